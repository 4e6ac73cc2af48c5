//! Command-line front end: `solve`, `bench`, `verify` and `gen`.

pub mod experiment;
pub mod spec;
pub mod verify;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use tgnn_core::io::{format_pois, format_queries, format_result, read_pois, read_queries, ResultRecord};
use tgnn_core::network::{load_network, IdMap};
use tgnn_core::poi_index::DEFAULT_MAX_FANOUT;
use tgnn_core::workload::generate_instance;
use tgnn_core::{solve, DistanceOracle, Error, PoiIndex, Pruning, SolverConfig};

use experiment::{run_cells, summarize, write_rows, Algorithm, BenchOptions, Dataset, Sweep};
use spec::BenchSpec;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INPUT: i32 = 3;
pub const EXIT_INFEASIBLE: i32 = 4;
pub const EXIT_MISMATCH: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "tgnn", version, about = "Trip-based group nearest neighbor queries")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Answer the queries in a query file.
    Solve(SolveArgs),
    /// Run a parameter sweep and write experiment CSV.
    Bench(BenchArgs),
    /// Compare the search with the reference solvers on random instances.
    Verify(VerifyArgs),
    /// Write generated POI and query files.
    Gen(GenArgs),
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub nodes: PathBuf,
    #[arg(long)]
    pub edges: PathBuf,
    #[arg(long)]
    pub pois: PathBuf,
    #[arg(long)]
    pub queries: PathBuf,
    /// Pruning technique 1; `--pt1=false` or `--no-pt1` turns it off.
    #[arg(long, default_value_t = true, num_args = 0..=1, default_missing_value = "true",
          action = clap::ArgAction::Set, overrides_with = "no_pt1")]
    pub pt1: bool,
    #[arg(long, overrides_with = "pt1")]
    pub no_pt1: bool,
    /// Pruning technique 2; `--pt2=false` or `--no-pt2` turns it off.
    #[arg(long, default_value_t = true, num_args = 0..=1, default_missing_value = "true",
          action = clap::ArgAction::Set, overrides_with = "no_pt2")]
    pub pt2: bool,
    #[arg(long, overrides_with = "pt2")]
    pub no_pt2: bool,
    /// Pruning technique 3; `--pt3=false` or `--no-pt3` turns it off.
    #[arg(long, default_value_t = true, num_args = 0..=1, default_missing_value = "true",
          action = clap::ArgAction::Set, overrides_with = "no_pt3")]
    pub pt3: bool,
    #[arg(long, overrides_with = "pt3")]
    pub no_pt3: bool,
    /// Skip R-tree nodes that lie outside the search areas.
    #[arg(long)]
    pub prune_internal: bool,
    /// Rescale the network into [0, 1000]^2 before solving.
    #[arg(long)]
    pub normalize: bool,
    #[arg(long, default_value_t = DEFAULT_MAX_FANOUT)]
    pub max_fanout: usize,
    /// Print one JSON document instead of text records.
    #[arg(long)]
    pub json: bool,
    /// Write the dense-id to file-id mapping here.
    #[arg(long)]
    pub idmap_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// n, m, rho, qa, pruning-ablation or scalability.
    #[arg(long)]
    pub sweep: Sweep,
    #[arg(long)]
    pub out: PathBuf,
    /// Per-cell means; defaults to the output path with `.summary.csv`.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    /// Write 0 for elapsed so output is byte-reproducible.
    #[arg(long)]
    pub no_timing: bool,
    /// Comma-separated algorithm labels, e.g. `EA,EA-PT3,BA`.
    #[arg(long, value_delimiter = ',')]
    pub algos: Option<Vec<Algorithm>>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long, default_value_t = 200)]
    pub instances: u64,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Multiply every search radius by this factor to check that the
    /// harness detects unsound pruning.
    #[arg(long)]
    pub mutate: Option<f64>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Exit code for an error: parse and I/O problems, infeasible queries and
/// verification mismatches have their own codes.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    if err.downcast_ref::<Mismatch>().is_some() {
        return EXIT_MISMATCH;
    }
    match err.downcast_ref::<Error>() {
        Some(Error::NoFeasibleMeetup | Error::DisconnectedTrip { .. }) => EXIT_INFEASIBLE,
        _ => EXIT_INPUT,
    }
}

#[derive(Debug)]
pub struct Mismatch(pub String);

impl std::fmt::Display for Mismatch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Mismatch {}

/// Runs a command, writing results to `out` and diagnostics to `err`.
/// Returns the process exit code.
pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(&a, out, err),
        Command::Bench(a) => cmd_bench(&a, out),
        Command::Verify(a) => cmd_verify(&a, out),
        Command::Gen(a) => cmd_gen(&a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            exit_code(&e)
        }
    }
}

fn load_spec(path: Option<&Path>) -> Result<BenchSpec> {
    match path {
        Some(p) => BenchSpec::load(p),
        None => Ok(BenchSpec::default()),
    }
}

#[derive(Serialize)]
struct ReportJson {
    pois_dequeued: u64,
    pois_evaluated: u64,
    dijkstra_runs: u64,
    terminated_early: bool,
    elapsed_seconds: f64,
}

#[derive(Serialize)]
struct SolveJson {
    pruning: String,
    prune_internal: bool,
    results: Vec<Option<ResultRecord>>,
    reports: Vec<Option<ReportJson>>,
}

fn describe_infeasible(e: &Error, ids: &IdMap) -> String {
    match e {
        Error::DisconnectedTrip {
            user_id,
            leg,
            from,
            to,
        } => format!(
            "user {user_id} leg {leg}: node {} cannot reach node {}",
            ids.original(tgnn_core::NodeId(*from)),
            ids.original(tgnn_core::NodeId(*to))
        ),
        other => other.to_string(),
    }
}

pub fn cmd_solve(a: &SolveArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let loaded = load_network(&a.nodes, &a.edges)?;
    let ids = loaded.ids;
    let network = if a.normalize {
        loaded.network.normalize()
    } else {
        loaded.network
    };
    if let Some(p) = &a.idmap_out {
        fs::write(p, ids.to_sidecar()).with_context(|| format!("writing {}", p.display()))?;
    }
    let pois = read_pois(&a.pois, &network, &ids)?;
    let index = PoiIndex::build(pois, a.max_fanout)?;
    let groups = read_queries(&a.queries, &ids)?;
    let config = SolverConfig {
        pruning: Pruning {
            pt1: a.pt1 && !a.no_pt1,
            pt2: a.pt2 && !a.no_pt2,
            pt3: a.pt3 && !a.no_pt3,
        },
        prune_internal_nodes: a.prune_internal,
        ..Default::default()
    };

    let mut code = EXIT_OK;
    let mut results = Vec::new();
    let mut reports = Vec::new();
    for (q, group) in groups.iter().enumerate() {
        let mut oracle = DistanceOracle::new(&network);
        match solve(group, &index, &mut oracle, &config) {
            Ok(r) => {
                results.push(Some(ResultRecord::from_solution(&r.solution, &ids)));
                reports.push(Some(ReportJson {
                    pois_dequeued: r.pois_dequeued,
                    pois_evaluated: r.pois_evaluated,
                    dijkstra_runs: r.dijkstra_runs,
                    terminated_early: r.terminated_early,
                    elapsed_seconds: r.elapsed.as_secs_f64(),
                }));
            }
            Err(e @ (Error::NoFeasibleMeetup | Error::DisconnectedTrip { .. })) => {
                writeln!(err, "query {q}: infeasible: {}", describe_infeasible(&e, &ids))?;
                code = EXIT_INFEASIBLE;
                results.push(None);
                reports.push(None);
            }
            Err(e) => return Err(e).with_context(|| format!("query {q}")),
        }
    }

    let pruning = config.pruning.label();
    if a.json {
        let doc = SolveJson {
            pruning,
            prune_internal: a.prune_internal,
            results,
            reports,
        };
        serde_json::to_writer_pretty(&mut *out, &doc)?;
        writeln!(out)?;
    } else {
        for (q, (res, rep)) in results.iter().zip(&reports).enumerate() {
            match rep {
                Some(r) => writeln!(
                    out,
                    "# query {q} pruning={pruning} pois_dequeued={} pois_evaluated={} \
                     dijkstra_runs={} terminated_early={} elapsed={:.6}",
                    r.pois_dequeued,
                    r.pois_evaluated,
                    r.dijkstra_runs,
                    r.terminated_early,
                    r.elapsed_seconds
                )?,
                None => writeln!(out, "# query {q} pruning={pruning}")?,
            }
            out.write_all(format_result(res.as_ref()).as_bytes())?;
        }
    }
    Ok(code)
}

fn summary_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map_or("bench".into(), |s| s.to_string_lossy().into_owned());
    out.with_file_name(format!("{stem}.summary.csv"))
}

pub fn cmd_bench(a: &BenchArgs, out: &mut dyn Write) -> Result<i32> {
    let spec = load_spec(a.spec.as_deref())?;
    let dataset = Dataset::from_spec(&spec)?;
    let opts = BenchOptions {
        repetitions: a.reps.unwrap_or(spec.workload.repetitions),
        seed: a.seed.unwrap_or(spec.workload.seed),
        threads: a.threads,
        timing: !a.no_timing,
        algorithms: a.algos.clone().unwrap_or_else(|| a.sweep.default_algorithms()),
    };
    if opts.algorithms.is_empty() {
        bail!("no algorithms selected");
    }
    let cells = a.sweep.cells(&spec);
    let rows = run_cells(&dataset, &cells, &opts)?;
    let file = fs::File::create(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    write_rows(std::io::BufWriter::new(file), &rows)?;
    let summary = a.summary.clone().unwrap_or_else(|| summary_path(&a.out));
    let file = fs::File::create(&summary)
        .with_context(|| format!("creating {}", summary.display()))?;
    write_rows(std::io::BufWriter::new(file), &summarize(&rows))?;
    let skipped = rows.iter().filter(|r| r.is_skipped()).count();
    writeln!(
        out,
        "{} rows ({skipped} skipped) to {}; summary in {}",
        rows.len(),
        a.out.display(),
        summary.display()
    )?;
    Ok(EXIT_OK)
}

pub fn cmd_verify(a: &VerifyArgs, out: &mut dyn Write) -> Result<i32> {
    let spec = load_spec(a.spec.as_deref())?;
    let dataset = Dataset::from_spec(&spec)?;
    if dataset.network.node_count() > spec.node_cap {
        bail!(
            "network has {} nodes, above node_cap {}",
            dataset.network.node_count(),
            spec.node_cap
        );
    }
    let seed = a.seed.unwrap_or(spec.workload.seed);
    if a.instances == 0 {
        writeln!(out, "warning: 0 instances requested, nothing to verify")?;
        writeln!(out, "0/0 match")?;
        return Ok(EXIT_OK);
    }
    let report = verify::run(&spec, &dataset, a.instances, seed, a.mutate.unwrap_or(1.0))?;
    for (i, w, d) in &report.mismatches {
        writeln!(
            out,
            "MISMATCH instance {i} (seed {seed}, stream {i}, n={} m={} rho={} qa={}): {d}",
            w.n, w.m, w.rho, w.qa
        )?;
    }
    if report.skipped > 0 {
        writeln!(out, "{} instances skipped", report.skipped)?;
    }
    writeln!(out, "{}/{} match", report.matched, report.checked())?;
    Ok(if report.mismatches.is_empty() {
        EXIT_OK
    } else {
        EXIT_MISMATCH
    })
}

pub fn cmd_gen(a: &GenArgs, out: &mut dyn Write) -> Result<i32> {
    let spec = load_spec(a.spec.as_deref())?;
    let dataset = Dataset::from_spec(&spec)?;
    let mut workload = spec.workload.clone();
    workload.repetitions = a.reps.unwrap_or(workload.repetitions);
    workload.seed = a.seed.unwrap_or(workload.seed);
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let path = |name: &str| a.out.join(name);
    dataset
        .network
        .write_files(&path("network.nodes"), &path("network.edges"))?;
    fs::write(path("workload.cfg"), workload.to_config().to_string())?;
    let ids = IdMap::identity(dataset.network.node_count());
    for rep in 0..workload.repetitions {
        let inst = generate_instance(
            &dataset.network,
            &dataset.components,
            &workload,
            experiment::stream(0, rep),
        )?;
        fs::write(path(&format!("instance_{rep:03}.pois")), format_pois(&inst.pois, &ids))?;
        fs::write(
            path(&format!("instance_{rep:03}.queries")),
            format_queries(std::slice::from_ref(&inst.group), &ids),
        )?;
    }
    writeln!(
        out,
        "wrote network and {} instances to {}",
        workload.repetitions,
        a.out.display()
    )?;
    Ok(EXIT_OK)
}
