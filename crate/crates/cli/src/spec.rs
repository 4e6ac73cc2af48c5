//! Benchmark spec files.
//!
//! A spec is a flat `key=value` file. Workload keys (`n`, `m`, `rho`, `qa`,
//! `seed`, `reps`) set the defaults of every cell; the remaining keys pick
//! the network and the sweep values:
//!
//! ```text
//! dataset = grid150        # name written to the CSV
//! grid_size = 150          # k x k unit lattice ...
//! nodes = ny.nodes         # ... or node and edge files, relative to the spec
//! edges = ny.edges
//! normalize = true         # rescale into [0, 1000]^2
//! max_fanout = 16
//! node_cap = 50000         # largest network `verify` accepts
//! ba_max_combinations = 10000000
//! n_values = 2,4,6,8,10
//! m_values = 2,4,6,8,10
//! rho_values = 0.001,0.005,0.01,0.05
//! qa_values = 25,50,75,100
//! scalability_n_values = 5,10,15,20,25,30
//! scalability_rho_values = 0.001,0.005,0.01,0.05
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use tgnn_core::network::{load_network, IdMap};
use tgnn_core::poi_index::DEFAULT_MAX_FANOUT;
use tgnn_core::workload::Config;
use tgnn_core::{RoadNetwork, WorkloadSpec};

const KEYS: &[&str] = &[
    "dataset",
    "grid_size",
    "nodes",
    "edges",
    "normalize",
    "max_fanout",
    "node_cap",
    "ba_max_combinations",
    "n",
    "m",
    "rho",
    "qa",
    "seed",
    "reps",
    "n_values",
    "m_values",
    "rho_values",
    "qa_values",
    "scalability_n_values",
    "scalability_rho_values",
];

#[derive(Clone, Debug, PartialEq)]
pub enum NetworkSource {
    Grid { size: usize },
    Files { nodes: PathBuf, edges: PathBuf },
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchSpec {
    pub dataset: String,
    pub source: NetworkSource,
    pub normalize: bool,
    pub max_fanout: usize,
    pub node_cap: usize,
    pub ba_max_combinations: u64,
    pub workload: WorkloadSpec,
    pub n_values: Vec<usize>,
    pub m_values: Vec<usize>,
    pub rho_values: Vec<f64>,
    pub qa_values: Vec<f64>,
    pub scalability_n_values: Vec<usize>,
    pub scalability_rho_values: Vec<f64>,
}

impl Default for BenchSpec {
    fn default() -> Self {
        BenchSpec {
            dataset: "grid150".into(),
            source: NetworkSource::Grid { size: 150 },
            normalize: true,
            max_fanout: DEFAULT_MAX_FANOUT,
            node_cap: 50_000,
            ba_max_combinations: 10_000_000,
            workload: WorkloadSpec::default(),
            n_values: vec![2, 4, 6, 8, 10],
            m_values: vec![2, 4, 6, 8, 10],
            rho_values: vec![0.001, 0.005, 0.01, 0.05],
            qa_values: vec![25.0, 50.0, 75.0, 100.0],
            scalability_n_values: vec![5, 10, 15, 20, 25, 30],
            scalability_rho_values: vec![0.001, 0.005, 0.01, 0.05],
        }
    }
}

impl BenchSpec {
    /// Parses spec text; relative network paths resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let cfg = Config::parse(text)?;
        if let Some(k) = cfg.keys().find(|k| !KEYS.contains(k)) {
            bail!("unknown spec key {k:?}");
        }
        let d = BenchSpec::default();
        let source = match (cfg.get("nodes"), cfg.get("edges"), cfg.get("grid_size")) {
            (Some(n), Some(e), None) => NetworkSource::Files {
                nodes: base.join(n),
                edges: base.join(e),
            },
            (None, None, _) => NetworkSource::Grid {
                size: cfg.get_or("grid_size", 150usize)?,
            },
            _ => bail!("give either grid_size or both nodes and edges"),
        };
        if let NetworkSource::Grid { size } = source {
            if size < 2 {
                bail!("grid_size must be at least 2, got {size}");
            }
        }
        let dataset = match (cfg.get("dataset"), &source) {
            (Some(d), _) => d.to_string(),
            (None, NetworkSource::Grid { size }) => format!("grid{size}"),
            (None, NetworkSource::Files { nodes, .. }) => nodes
                .file_stem()
                .map_or("network".into(), |s| s.to_string_lossy().into_owned()),
        };
        if dataset.contains([',', '"', '\n']) {
            bail!("dataset name may not contain commas, quotes or newlines");
        }
        let spec = BenchSpec {
            dataset,
            source,
            normalize: cfg.get_or("normalize", d.normalize)?,
            max_fanout: cfg.get_or("max_fanout", d.max_fanout)?,
            node_cap: cfg.get_or("node_cap", d.node_cap)?,
            ba_max_combinations: cfg.get_or("ba_max_combinations", d.ba_max_combinations)?,
            workload: WorkloadSpec::from_config(&cfg)?,
            n_values: cfg.get_list("n_values")?.unwrap_or(d.n_values),
            m_values: cfg.get_list("m_values")?.unwrap_or(d.m_values),
            rho_values: cfg.get_list("rho_values")?.unwrap_or(d.rho_values),
            qa_values: cfg.get_list("qa_values")?.unwrap_or(d.qa_values),
            scalability_n_values: cfg
                .get_list("scalability_n_values")?
                .unwrap_or(d.scalability_n_values),
            scalability_rho_values: cfg
                .get_list("scalability_rho_values")?
                .unwrap_or(d.scalability_rho_values),
        };
        for (key, empty) in [
            ("n_values", spec.n_values.is_empty()),
            ("m_values", spec.m_values.is_empty()),
            ("rho_values", spec.rho_values.is_empty()),
            ("qa_values", spec.qa_values.is_empty()),
        ] {
            if empty {
                bail!("{key} is empty");
            }
        }
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading spec {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        BenchSpec::parse(&text, base).with_context(|| format!("in spec {}", path.display()))
    }

    /// Builds or loads the network, normalized if requested.
    pub fn network(&self) -> Result<(RoadNetwork, IdMap)> {
        let (net, ids) = match &self.source {
            NetworkSource::Grid { size } => {
                (RoadNetwork::grid(*size, *size, 1.0), IdMap::identity(size * size))
            }
            NetworkSource::Files { nodes, edges } => {
                let loaded = load_network(nodes, edges)?;
                (loaded.network, loaded.ids)
            }
        };
        let net = if self.normalize { net.normalize() } else { net };
        Ok((net, ids))
    }
}
