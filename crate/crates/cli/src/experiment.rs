//! Parameter sweeps and the experiment CSV.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use anyhow::{anyhow, bail, Result};
use rayon::prelude::*;
use serde::Serialize;
use tgnn_core::baseline::{ba_tgnn, combination_count, exhaustive};
use tgnn_core::workload::{generate_instance, Instance};
use tgnn_core::{
    solve, DistanceOracle, Error, PoiIndex, Pruning, RoadNetwork, SolverConfig, WorkloadSpec,
    DEFAULT_TIE_TOLERANCE,
};

use crate::spec::BenchSpec;

/// Largest difference in total overhead tolerated between algorithms on
/// one instance.
pub const AGREEMENT_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algorithm {
    /// The incremental search with the given pruning subset.
    Ea(Pruning),
    /// Combination-enumerating baseline.
    Ba,
    Exhaustive,
}

impl Algorithm {
    /// The row set of the pruning ablation: each pruning subset, then the
    /// baseline.
    pub fn ablation() -> Vec<Algorithm> {
        let mut v: Vec<Algorithm> = Pruning::subsets().into_iter().map(Algorithm::Ea).collect();
        v.push(Algorithm::Ba);
        v
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Algorithm::Ea(p) if *p == Pruning::ALL => f.write_str("EA"),
            Algorithm::Ea(p) if *p == Pruning::NONE => f.write_str("EA-noPrune"),
            Algorithm::Ea(p) => write!(f, "EA-{}", p.label()),
            Algorithm::Ba => f.write_str("BA"),
            Algorithm::Exhaustive => f.write_str("exhaustive"),
        }
    }
}

impl FromStr for Algorithm {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "EA" => return Ok(Algorithm::Ea(Pruning::ALL)),
            "EA-noPrune" => return Ok(Algorithm::Ea(Pruning::NONE)),
            "BA" => return Ok(Algorithm::Ba),
            "exhaustive" => return Ok(Algorithm::Exhaustive),
            _ => {}
        }
        let rest = s
            .strip_prefix("EA-")
            .ok_or_else(|| anyhow!("unknown algorithm {s:?}"))?;
        let mut p = Pruning::NONE;
        for part in rest.split('+') {
            match part {
                "PT1" => p.pt1 = true,
                "PT2" => p.pt2 = true,
                "PT3" => p.pt3 = true,
                _ => bail!("unknown algorithm {s:?}"),
            }
        }
        Ok(Algorithm::Ea(p))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sweep {
    N,
    M,
    Rho,
    Qa,
    PruningAblation,
    Scalability,
}

impl FromStr for Sweep {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "n" => Sweep::N,
            "m" => Sweep::M,
            "rho" => Sweep::Rho,
            "qa" => Sweep::Qa,
            "pruning-ablation" => Sweep::PruningAblation,
            "scalability" => Sweep::Scalability,
            _ => bail!("unknown sweep {s:?}"),
        })
    }
}

impl Sweep {
    /// One workload per cell; parameters not swept keep the spec defaults.
    pub fn cells(&self, spec: &BenchSpec) -> Vec<WorkloadSpec> {
        let base = &spec.workload;
        match self {
            Sweep::N => spec.n_values.iter().map(|&n| WorkloadSpec { n, ..base.clone() }).collect(),
            Sweep::M => spec.m_values.iter().map(|&m| WorkloadSpec { m, ..base.clone() }).collect(),
            Sweep::Rho => spec
                .rho_values
                .iter()
                .map(|&rho| WorkloadSpec { rho, ..base.clone() })
                .collect(),
            Sweep::Qa => spec
                .qa_values
                .iter()
                .map(|&qa| WorkloadSpec { qa, ..base.clone() })
                .collect(),
            Sweep::PruningAblation => vec![base.clone()],
            Sweep::Scalability => spec
                .scalability_rho_values
                .iter()
                .flat_map(|&rho| {
                    spec.scalability_n_values
                        .iter()
                        .map(move |&n| WorkloadSpec { n, rho, ..base.clone() })
                })
                .collect(),
        }
    }

    pub fn default_algorithms(&self) -> Vec<Algorithm> {
        match self {
            Sweep::PruningAblation => Algorithm::ablation(),
            Sweep::Scalability => vec![Algorithm::Ea(Pruning::ALL)],
            _ => vec![Algorithm::Ea(Pruning::ALL), Algorithm::Ba],
        }
    }
}

/// A network prepared for experiments.
pub struct Dataset {
    pub name: String,
    pub network: RoadNetwork,
    pub components: Vec<u32>,
    pub max_fanout: usize,
    pub ba_max_combinations: u64,
}

impl Dataset {
    pub fn new(name: impl Into<String>, network: RoadNetwork) -> Self {
        let components = network.components();
        Dataset {
            name: name.into(),
            network,
            components,
            max_fanout: tgnn_core::poi_index::DEFAULT_MAX_FANOUT,
            ba_max_combinations: u64::MAX,
        }
    }

    pub fn from_spec(spec: &BenchSpec) -> Result<Self> {
        let (network, _) = spec.network()?;
        let mut d = Dataset::new(spec.dataset.clone(), network);
        d.max_fanout = spec.max_fanout;
        d.ba_max_combinations = spec.ba_max_combinations;
        Ok(d)
    }
}

/// One CSV row per (instance, algorithm). Metric fields are empty when the
/// run was skipped: instance generation failed, the baseline exceeded its
/// combination cap, or no POI was reachable.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentRow {
    pub dataset: String,
    pub n: usize,
    pub m: usize,
    pub rho: f64,
    pub qa: f64,
    pub algorithm: String,
    pub repetition: usize,
    /// Seconds, rounded to microseconds; 0 when timing is disabled.
    pub elapsed: Option<f64>,
    pub pois_dequeued: Option<u64>,
    pub pois_evaluated: Option<u64>,
    pub dijkstra_runs: Option<u64>,
    pub total_to: Option<f64>,
}

impl ExperimentRow {
    pub fn is_skipped(&self) -> bool {
        self.total_to.is_none()
    }
}

pub const CSV_HEADER: &str =
    "dataset,n,m,rho,qa,algorithm,repetition,elapsed,pois_dequeued,pois_evaluated,dijkstra_runs,total_to";

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Measurement {
    pub elapsed: f64,
    pub pois_dequeued: u64,
    pub pois_evaluated: u64,
    pub dijkstra_runs: u64,
    pub total_to: f64,
}

/// Runs `algorithm` on `instance` with a fresh distance cache. `Ok(None)`
/// means the run was skipped.
pub fn measure(
    dataset: &Dataset,
    instance: &Instance,
    index: &PoiIndex,
    algorithm: Algorithm,
) -> Result<Option<Measurement>> {
    let mut oracle = DistanceOracle::new(&dataset.network);
    let started = Instant::now();
    let result = match algorithm {
        Algorithm::Ea(pruning) => solve(
            &instance.group,
            index,
            &mut oracle,
            &SolverConfig::with_pruning(pruning),
        )
        .map(|r| Measurement {
            elapsed: r.elapsed.as_secs_f64(),
            pois_dequeued: r.pois_dequeued,
            pois_evaluated: r.pois_evaluated,
            dijkstra_runs: r.dijkstra_runs,
            total_to: r.solution.total_overhead,
        }),
        Algorithm::Ba => {
            let combos = combination_count(&instance.group);
            if combos.is_none_or(|c| c > dataset.ba_max_combinations) {
                return Ok(None);
            }
            ba_tgnn(&instance.group, &instance.pois, &mut oracle, DEFAULT_TIE_TOLERANCE).map(|r| {
                Measurement {
                    elapsed: started.elapsed().as_secs_f64(),
                    pois_dequeued: r.pois_evaluated,
                    pois_evaluated: r.pois_evaluated,
                    dijkstra_runs: r.dijkstra_runs,
                    total_to: r.solution.total_overhead,
                }
            })
        }
        Algorithm::Exhaustive => {
            exhaustive(&instance.group, &instance.pois, &mut oracle, DEFAULT_TIE_TOLERANCE).map(
                |s| Measurement {
                    elapsed: started.elapsed().as_secs_f64(),
                    pois_dequeued: instance.pois.len() as u64,
                    pois_evaluated: instance.pois.len() as u64,
                    dijkstra_runs: oracle.searches(),
                    total_to: s.total_overhead,
                },
            )
        }
    };
    match result {
        Ok(m) => Ok(Some(m)),
        Err(Error::NoFeasibleMeetup) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

#[derive(Clone, Debug)]
pub struct BenchOptions {
    pub repetitions: usize,
    pub seed: u64,
    pub threads: usize,
    /// Record wall-clock time; off writes 0 so output is byte-reproducible.
    pub timing: bool,
    pub algorithms: Vec<Algorithm>,
}

/// Instance stream of repetition `rep` in cell `cell`.
pub fn stream(cell: usize, rep: usize) -> u64 {
    ((cell as u64) << 32) | rep as u64
}

fn run_repetition(
    dataset: &Dataset,
    cell: usize,
    workload: &WorkloadSpec,
    rep: usize,
    opts: &BenchOptions,
) -> Result<Vec<ExperimentRow>> {
    let row = |algorithm: Algorithm, m: Option<Measurement>| ExperimentRow {
        dataset: dataset.name.clone(),
        n: workload.n,
        m: workload.m,
        rho: workload.rho,
        qa: workload.qa,
        algorithm: algorithm.to_string(),
        repetition: rep,
        elapsed: m.map(|m| {
            if opts.timing {
                (m.elapsed * 1e6).round() / 1e6
            } else {
                0.0
            }
        }),
        pois_dequeued: m.map(|m| m.pois_dequeued),
        pois_evaluated: m.map(|m| m.pois_evaluated),
        dijkstra_runs: m.map(|m| m.dijkstra_runs),
        total_to: m.map(|m| m.total_to),
    };
    let instance = match generate_instance(
        &dataset.network,
        &dataset.components,
        workload,
        stream(cell, rep),
    ) {
        Ok(i) => i,
        Err(Error::RetryExhausted { .. } | Error::InvalidWorkload(_)) => {
            return Ok(opts.algorithms.iter().map(|&a| row(a, None)).collect());
        }
        Err(e) => return Err(e.into()),
    };
    let index = PoiIndex::build(instance.pois.clone(), dataset.max_fanout)?;
    let mut rows = Vec::with_capacity(opts.algorithms.len());
    for &a in &opts.algorithms {
        rows.push(row(a, measure(dataset, &instance, &index, a)?));
    }
    check_agreement(&rows)?;
    Ok(rows)
}

/// Fails when two algorithms report different total overheads for the
/// same instance.
pub fn check_agreement(rows: &[ExperimentRow]) -> Result<()> {
    let mut done = rows.iter().filter_map(|r| r.total_to.map(|t| (r, t)));
    let Some((first, t0)) = done.next() else {
        return Ok(());
    };
    for (r, t) in done {
        if (t - t0).abs() > AGREEMENT_TOLERANCE {
            return Err(crate::Mismatch(format!(
                "total overhead mismatch on {} n={} m={} rho={} qa={} repetition {}: {} {} vs {} {}",
                r.dataset,
                r.n,
                r.m,
                r.rho,
                r.qa,
                r.repetition,
                first.algorithm,
                t0,
                r.algorithm,
                t
            ))
            .into());
        }
    }
    Ok(())
}

/// Runs every repetition of every cell. Rows are ordered by cell, then
/// repetition, then algorithm, whatever the thread count.
pub fn run_cells(
    dataset: &Dataset,
    cells: &[WorkloadSpec],
    opts: &BenchOptions,
) -> Result<Vec<ExperimentRow>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.threads.max(1))
        .build()?;
    let mut rows = Vec::new();
    for (c, cell) in cells.iter().enumerate() {
        let workload = WorkloadSpec {
            seed: opts.seed,
            repetitions: opts.repetitions,
            ..cell.clone()
        };
        workload.validate()?;
        if opts.timing && opts.repetitions > 0 {
            // warm-up, not recorded
            run_repetition(dataset, c, &workload, 0, opts)?;
        }
        let cell_rows: Vec<Vec<ExperimentRow>> = pool.install(|| {
            (0..opts.repetitions)
                .into_par_iter()
                .map(|rep| run_repetition(dataset, c, &workload, rep, opts))
                .collect::<Result<_>>()
        })?;
        rows.extend(cell_rows.into_iter().flatten());
    }
    Ok(rows)
}

fn csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

pub fn write_rows<W: Write, R: Serialize>(out: W, rows: &[R]) -> Result<()> {
    let mut w = csv_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Mean and standard deviation per (cell, algorithm) over the runs that
/// were not skipped.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryRow {
    pub dataset: String,
    pub n: usize,
    pub m: usize,
    pub rho: f64,
    pub qa: f64,
    pub algorithm: String,
    pub runs: usize,
    pub skipped: usize,
    pub mean_elapsed: Option<f64>,
    pub std_elapsed: Option<f64>,
    pub mean_pois_dequeued: Option<f64>,
    pub std_pois_dequeued: Option<f64>,
    pub mean_pois_evaluated: Option<f64>,
    pub std_pois_evaluated: Option<f64>,
    pub mean_dijkstra_runs: Option<f64>,
    pub std_dijkstra_runs: Option<f64>,
    pub mean_total_to: Option<f64>,
}

/// Mean and sample standard deviation; `None` for no values, deviation 0
/// for one.
pub fn mean_std(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return Some((mean, 0.0));
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Some((mean, var.sqrt()))
}

pub fn summarize(rows: &[ExperimentRow]) -> Vec<SummaryRow> {
    let key = |r: &ExperimentRow| {
        (
            r.dataset.clone(),
            r.n,
            r.m,
            r.rho.to_bits(),
            r.qa.to_bits(),
            r.algorithm.clone(),
        )
    };
    let mut keys = Vec::new();
    for r in rows {
        let k = key(r);
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    keys.into_iter()
        .map(|k| {
            let group: Vec<&ExperimentRow> = rows.iter().filter(|r| key(r) == k).collect();
            let done: Vec<&&ExperimentRow> = group.iter().filter(|r| !r.is_skipped()).collect();
            let stat = |f: &dyn Fn(&ExperimentRow) -> Option<f64>| {
                mean_std(&done.iter().filter_map(|r| f(r)).collect::<Vec<_>>())
            };
            let elapsed = stat(&|r| r.elapsed);
            let deq = stat(&|r| r.pois_dequeued.map(|v| v as f64));
            let eval = stat(&|r| r.pois_evaluated.map(|v| v as f64));
            let runs = stat(&|r| r.dijkstra_runs.map(|v| v as f64));
            let to = stat(&|r| r.total_to);
            let first = group[0];
            SummaryRow {
                dataset: first.dataset.clone(),
                n: first.n,
                m: first.m,
                rho: first.rho,
                qa: first.qa,
                algorithm: first.algorithm.clone(),
                runs: done.len(),
                skipped: group.len() - done.len(),
                mean_elapsed: elapsed.map(|s| s.0),
                std_elapsed: elapsed.map(|s| s.1),
                mean_pois_dequeued: deq.map(|s| s.0),
                std_pois_dequeued: deq.map(|s| s.1),
                mean_pois_evaluated: eval.map(|s| s.0),
                std_pois_evaluated: eval.map(|s| s.1),
                mean_dijkstra_runs: runs.map(|s| s.0),
                std_dijkstra_runs: runs.map(|s| s.1),
                mean_total_to: to.map(|s| s.0),
            }
        })
        .collect()
}
