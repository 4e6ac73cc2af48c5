//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails. Pass a substring such as `AC4` to run a subset.

use std::collections::HashMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use tgnn_cli::experiment::{
    run_cells, summarize, write_rows, Algorithm, BenchOptions, Dataset, ExperimentRow, Sweep,
};
use tgnn_cli::spec::{BenchSpec, NetworkSource};
use tgnn_cli::verify::draw_workload;
use tgnn_core::baseline::{ba_tgnn, exhaustive};
use tgnn_core::distance::single_source;
use tgnn_core::solver::{
    compute_trip_overhead, pt1_radius, pt2_radius, pt3_radius, SearchAreas, TripStats,
};
use tgnn_core::workload::{generate_instance, poi_count, Instance};
use tgnn_core::{
    euclidean, solve, Coord, DistanceOracle, NodeId, Poi, PoiIndex, Pruning,
    RoadNetwork, SolverConfig, Trip, DEFAULT_TIE_TOLERANCE,
};

/// Largest allowed difference between total overheads.
const TO_TOLERANCE: f64 = 1e-9;
const EQUIVALENCE_INSTANCES: usize = 200;
const REPLAY_INSTANCES: usize = 50;
const TERMINATION_INSTANCES: usize = 100;
const REPETITIONS: usize = 30;
/// All-pruning mean evaluated POIs over the no-pruning mean.
const MAX_PRUNED_FRACTION: f64 = 0.25;
/// Mean evaluated POIs at n=6 over n=2.
const MAX_GROWTH_RATIO: f64 = 6.0;
const KERNEL_SAMPLES: usize = 100_000;
const KERNEL_TIME_LIMIT_SECS: f64 = 60.0;
/// Slack for the Euclidean lower bounds, relative to the compared value.
const GEOMETRY_SLACK: f64 = 1e-9;

const SINGLE_TECHNIQUES: [Pruning; 3] = [
    Pruning { pt1: true, pt2: false, pt3: false },
    Pruning { pt1: false, pt2: true, pt3: false },
    Pruning { pt1: false, pt2: false, pt3: true },
];

type Check = fn() -> Result<String, String>;

fn main() {
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let criteria: [(&str, &str, Check); 8] = [
        ("AC1", "oracle equivalence", ac1_oracle_equivalence),
        ("AC2", "per-technique soundness", ac2_single_technique),
        ("AC3", "pruning replay", ac3_pruning_replay),
        ("AC4", "pruning effectiveness", ac4_pruning_effectiveness),
        ("AC5", "baseline blow-up", ac5_baseline_growth),
        ("AC6", "kernel and geometry", ac6_kernel_and_geometry),
        ("AC7", "termination soundness", ac7_termination),
        ("AC8", "determinism", ac8_determinism),
    ];
    let mut failed = 0;
    for (id, name, check) in criteria {
        if !filters.is_empty() && !filters.iter().any(|f| id.contains(f.as_str())) {
            continue;
        }
        let started = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|p| Err(format!("panicked: {}", panic_message(&p))));
        let secs = started.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS {id} {name}: {detail} ({secs:.1}s)"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {id} {name}: {detail} ({secs:.1}s)");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}

fn panic_message(p: &Box<dyn std::any::Any + Send>) -> String {
    p.downcast_ref::<String>()
        .cloned()
        .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
        .unwrap_or_else(|| "unknown".into())
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// ---------------------------------------------------------------------------
// Instance sets

/// 60 x 60 lattice with unit spacing, left unnormalized so that a 10-unit
/// query area holds 121 nodes.
fn equivalence_spec() -> BenchSpec {
    BenchSpec {
        dataset: "grid60".into(),
        source: NetworkSource::Grid { size: 60 },
        normalize: false,
        n_values: (1..=6).collect(),
        m_values: (2..=6).collect(),
        rho_values: vec![0.005, 0.01, 0.05],
        qa_values: vec![10.0, 20.0, 40.0],
        ..BenchSpec::default()
    }
}

fn dataset(spec: &BenchSpec) -> Dataset {
    Dataset::from_spec(spec).expect("spec network")
}

/// Instance `i` of the randomized set: parameters drawn from the spec's
/// lists, generated from stream `i` of seed 2024.
fn random_instance(spec: &BenchSpec, d: &Dataset, i: u64) -> Instance {
    let w = draw_workload(spec, 2024, i);
    generate_instance(&d.network, &d.components, &w, i).expect("instance generation")
}

fn index_of(d: &Dataset, inst: &Instance) -> PoiIndex {
    PoiIndex::build(inst.pois.clone(), d.max_fanout).unwrap()
}

fn run_solve(d: &Dataset, inst: &Instance, index: &PoiIndex, config: &SolverConfig) -> tgnn_core::SolverReport {
    solve(&inst.group, index, &mut DistanceOracle::new(&d.network), config).expect("solve")
}

/// Brute-force total overhead of every POI.
fn all_overheads(d: &Dataset, inst: &Instance) -> HashMap<u64, f64> {
    let mut oracle = DistanceOracle::new(&d.network);
    inst.pois
        .iter()
        .map(|p| {
            let total = inst
                .group
                .trips()
                .iter()
                .map(|t| compute_trip_overhead(p, t, &mut oracle, DEFAULT_TIE_TOLERANCE).overhead)
                .sum();
            (p.id, total)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// AC1, AC2

fn compare(name: &str, i: u64, got: &tgnn_core::Solution, want: &tgnn_core::Solution) -> Result<(), String> {
    ensure(
        (got.total_overhead - want.total_overhead).abs() <= TO_TOLERANCE && got.meetup.id == want.meetup.id,
        || {
            format!(
                "instance {i}: {name} gave POI {} TO {}, exhaustive POI {} TO {}",
                got.meetup.id, got.total_overhead, want.meetup.id, want.total_overhead
            )
        },
    )
}

fn ac1_oracle_equivalence() -> Result<String, String> {
    let spec = equivalence_spec();
    let d = dataset(&spec);
    let results: Vec<Result<(), String>> = (0..EQUIVALENCE_INSTANCES as u64)
        .into_par_iter()
        .map(|i| {
            let inst = random_instance(&spec, &d, i);
            let index = index_of(&d, &inst);
            let oracle = exhaustive(&inst.group, &inst.pois, &mut DistanceOracle::new(&d.network), DEFAULT_TIE_TOLERANCE)
                .map_err(|e| format!("instance {i}: exhaustive: {e}"))?;
            let ea = run_solve(&d, &inst, &index, &SolverConfig::default());
            compare("solve", i, &ea.solution, &oracle)?;
            let ba = ba_tgnn(&inst.group, &inst.pois, &mut DistanceOracle::new(&d.network), DEFAULT_TIE_TOLERANCE)
                .map_err(|e| format!("instance {i}: ba_tgnn: {e}"))?;
            compare("ba_tgnn", i, &ba.solution, &oracle)
        })
        .collect();
    let bad: Vec<&String> = results.iter().filter_map(|r| r.as_ref().err()).collect();
    ensure(bad.is_empty(), || format!("{} mismatches; first: {}", bad.len(), bad[0]))?;
    Ok(format!(
        "{n}/{n} instances: solve, exhaustive and ba_tgnn agree (TO within {TO_TOLERANCE:e}, same meetup)",
        n = EQUIVALENCE_INSTANCES
    ))
}

fn ac2_single_technique() -> Result<String, String> {
    let spec = equivalence_spec();
    let d = dataset(&spec);
    let results: Vec<Result<(), String>> = (0..EQUIVALENCE_INSTANCES as u64)
        .into_par_iter()
        .map(|i| {
            let inst = random_instance(&spec, &d, i);
            let index = index_of(&d, &inst);
            let oracle = exhaustive(&inst.group, &inst.pois, &mut DistanceOracle::new(&d.network), DEFAULT_TIE_TOLERANCE)
                .map_err(|e| e.to_string())?;
            for p in SINGLE_TECHNIQUES {
                let r = run_solve(&d, &inst, &index, &SolverConfig::with_pruning(p));
                compare(&format!("solve[{}]", p.label()), i, &r.solution, &oracle)?;
            }
            Ok(())
        })
        .collect();
    let bad: Vec<&String> = results.iter().filter_map(|r| r.as_ref().err()).collect();
    ensure(bad.is_empty(), || format!("{} mismatches; first: {}", bad.len(), bad[0]))?;
    Ok(format!("PT1, PT2 and PT3 each alone match the oracle on {EQUIVALENCE_INSTANCES} instances"))
}

// ---------------------------------------------------------------------------
// AC3

fn ac3_pruning_replay() -> Result<String, String> {
    let spec = equivalence_spec();
    let d = dataset(&spec);
    let subsets: Vec<Pruning> = Pruning::subsets().into_iter().filter(|p| *p != Pruning::NONE).collect();
    let rejected: Vec<Result<usize, String>> = (0..REPLAY_INSTANCES as u64)
        .into_par_iter()
        .map(|i| {
            let inst = random_instance(&spec, &d, i);
            let index = index_of(&d, &inst);
            let truth = all_overheads(&d, &inst);
            let mut count = 0;
            for &pruning in &subsets {
                for prune_internal_nodes in [false, true] {
                    let config = SolverConfig {
                        pruning,
                        prune_internal_nodes,
                        record_trace: true,
                        ..Default::default()
                    };
                    let r = run_solve(&d, &inst, &index, &config);
                    let found = r.solution.total_overhead;
                    for id in &r.trace.unwrap().rejected {
                        count += 1;
                        ensure(truth[id] >= found - TO_TOLERANCE, || {
                            format!(
                                "instance {i} {}: rejected POI {id} has TO {} < returned {found}",
                                pruning.label(),
                                truth[id]
                            )
                        })?;
                    }
                }
            }
            Ok(count)
        })
        .collect();
    let mut total = 0;
    for r in rejected {
        total += r?;
    }
    ensure(total > 0, || "no POI was ever rejected; the check is vacuous".into())?;
    Ok(format!(
        "{total} rejected POIs over {REPLAY_INSTANCES} instances x 7 pruning subsets x 2 node modes, none better than the answer"
    ))
}

// ---------------------------------------------------------------------------
// AC4, AC5

fn desk_spec() -> BenchSpec {
    // 150 x 150 lattice normalized into [0, 1000]^2, defaults n=6, m=6,
    // rho=1%, QA=50
    let spec = BenchSpec::default();
    assert_eq!(spec.source, NetworkSource::Grid { size: 150 });
    assert!(spec.normalize);
    spec
}

fn bench(d: &Dataset, cells: &[tgnn_core::WorkloadSpec], algorithms: Vec<Algorithm>, threads: usize) -> Vec<ExperimentRow> {
    let opts = BenchOptions {
        repetitions: REPETITIONS,
        seed: 1,
        threads,
        timing: false,
        algorithms,
    };
    run_cells(d, cells, &opts).expect("bench run")
}

fn threads() -> usize {
    std::thread::available_parallelism().map_or(4, |n| n.get())
}

fn mean_evaluated(rows: &[ExperimentRow], algorithm: &str, n: usize) -> f64 {
    let s = summarize(rows);
    s.iter()
        .find(|r| r.algorithm == algorithm && r.n == n)
        .and_then(|r| r.mean_pois_evaluated)
        .unwrap_or_else(|| panic!("no runs for {algorithm} n={n}"))
}

fn ac4_pruning_effectiveness() -> Result<String, String> {
    let spec = desk_spec();
    let d = dataset(&spec);
    let cells = Sweep::PruningAblation.cells(&spec);
    let rows = bench(&d, &cells, Algorithm::ablation(), threads());
    ensure(rows.iter().all(|r| !r.is_skipped()), || "skipped runs".into())?;
    let n = spec.workload.n;
    let mean = |p: Pruning| mean_evaluated(&rows, &Algorithm::Ea(p).to_string(), n);
    let none = mean(Pruning::NONE);
    let all = mean(Pruning::ALL);
    let [pt1, pt2, pt3] = SINGLE_TECHNIQUES.map(mean);
    ensure(all <= MAX_PRUNED_FRACTION * none, || {
        format!("all-pruning mean {all:.2} > {MAX_PRUNED_FRACTION} x no-pruning mean {none:.2}")
    })?;
    let others: Vec<(String, f64)> = Pruning::subsets()
        .into_iter()
        .filter(|p| *p != Pruning::NONE && *p != SINGLE_TECHNIQUES[2])
        .map(|p| (p.label(), mean(p)))
        .collect();
    for (label, m) in &others {
        ensure(pt3 > *m, || format!("PT3-only mean {pt3:.2} not above {label} mean {m:.2}"))?;
    }
    Ok(format!(
        "mean evaluated over {REPETITIONS} reps: none {none:.2}, all {all:.2} ({:.1}%), PT1 {pt1:.2}, PT2 {pt2:.2}, PT3 {pt3:.2} (largest of the pruned runs)",
        100.0 * all / none
    ))
}

fn ac5_baseline_growth() -> Result<String, String> {
    let spec = desk_spec();
    let d = dataset(&spec);
    let base = &spec.workload;
    assert_eq!(base.m, 6);
    let cells: Vec<_> = [2, 3, 4, 6]
        .into_iter()
        .map(|n| tgnn_core::WorkloadSpec { n, ..base.clone() })
        .collect();
    let rows = bench(&d, &cells, vec![Algorithm::Ea(Pruning::ALL), Algorithm::Ba], threads());
    let pois = poi_count(d.network.node_count(), base.rho) as u64;
    for n in [2u32, 3, 4] {
        let want = 5u64.pow(n) * pois;
        for r in rows.iter().filter(|r| r.algorithm == "BA" && r.n == n as usize) {
            ensure(r.pois_evaluated == Some(want), || {
                format!("BA n={n} rep {}: evaluated {:?}, expected 5^{n} x {pois} = {want}", r.repetition, r.pois_evaluated)
            })?;
        }
    }
    let m2 = mean_evaluated(&rows, "EA", 2);
    let m6 = mean_evaluated(&rows, "EA", 6);
    ensure(m6 / m2 <= MAX_GROWTH_RATIO, || {
        format!("solve mean evaluated n=6 {m6:.2} / n=2 {m2:.2} = {:.2} > {MAX_GROWTH_RATIO}", m6 / m2)
    })?;
    Ok(format!(
        "BA evaluated exactly 5^n x {pois} for n=2,3,4; solve mean evaluated n=2 {m2:.2}, n=6 {m6:.2} (ratio {:.2})",
        m6 / m2
    ))
}

// ---------------------------------------------------------------------------
// AC6

/// Jittered 30 x 30 grid with random diagonals and weights 0-40% above the
/// straight-line length.
fn jittered_network(seed: u64) -> RoadNetwork {
    let side = 30;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coords: Vec<Coord> = (0..side * side)
        .map(|i| {
            Coord::new(
                (i % side) as f64 * 10.0 + rng.random_range(-3.0..3.0),
                (i / side) as f64 * 10.0 + rng.random_range(-3.0..3.0),
            )
        })
        .collect();
    let mut edges = Vec::new();
    for r in 0..side {
        for c in 0..side {
            let u = r * side + c;
            let mut targets = vec![];
            if c + 1 < side {
                targets.push(u + 1);
            }
            if r + 1 < side {
                targets.push(u + side);
            }
            if c + 1 < side && r + 1 < side && rng.random_bool(0.3) {
                targets.push(u + side + 1);
            }
            for v in targets {
                let w = euclidean(coords[u], coords[v]) * rng.random_range(1.0..1.4);
                edges.push((u as u32, v as u32, Some(w)));
            }
        }
    }
    RoadNetwork::from_edges(coords, edges).unwrap()
}

fn ac6_kernel_and_geometry() -> Result<String, String> {
    let started = Instant::now();
    let net = jittered_network(6);
    let v = net.node_count();
    let apsp: Vec<Vec<f64>> = (0..v as u32).into_par_iter().map(|s| single_source(&net, NodeId(s))).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(66);

    // overhead kernel against per-leg enumeration
    let mut oracle = DistanceOracle::new(&net);
    for k in 0..KERNEL_SAMPLES {
        let m = rng.random_range(2..=6);
        let locs: Vec<NodeId> = rand::seq::index::sample(&mut rng, v, m)
            .into_iter()
            .map(|i| NodeId(i as u32))
            .collect();
        let trip = Trip::new(0, locs.clone()).unwrap();
        let poi = Poi::on_network(0, NodeId(rng.random_range(0..v as u32)), &net);
        let got = compute_trip_overhead(&poi, &trip, &mut oracle, DEFAULT_TIE_TOLERANCE);
        let from_poi = &apsp[poi.node.index()];
        let want = locs
            .windows(2)
            .map(|w| from_poi[w[0].index()] + from_poi[w[1].index()] - apsp[w[0].index()][w[1].index()])
            .fold(f64::INFINITY, f64::min)
            .max(0.0);
        ensure(got.overhead == want, || format!("sample {k}: kernel {} vs enumeration {want}", got.overhead))?;
        ensure(got.overhead >= 0.0, || format!("sample {k}: negative overhead {}", got.overhead))?;
    }

    // radius formulas
    for k in 0..KERNEL_SAMPLES {
        let s = TripStats {
            centroid: Coord::new(rng.random_range(0.0..1000.0), rng.random_range(0.0..1000.0)),
            legs: vec![],
            trip_distance: rng.random_range(0.0..5000.0),
            mdist: rng.random_range(0.0..1000.0),
            cdist: rng.random_range(0.0..700.0),
        };
        let n = rng.random_range(1..=30);
        let total: f64 = rng.random_range(0.0..5000.0);
        let own: f64 = rng.random_range(0.0..total.max(1e-3));
        let r1 = total / (2.0 * n as f64) + s.mdist / 2.0 + s.cdist;
        let r2 = own / 2.0 + s.mdist / 2.0 + s.cdist;
        let r3 = total + s.trip_distance;
        ensure(pt1_radius(&s, n, total) == r1, || format!("sample {k}: PT1 radius"))?;
        ensure(pt2_radius(&s, own) == r2, || format!("sample {k}: PT2 radius"))?;
        ensure(pt3_radius(&s, total) == r3, || format!("sample {k}: PT3 radius"))?;
        if k % 100 == 0 {
            let stats = vec![s.clone(); n];
            let mut areas = SearchAreas::unbounded(&stats);
            let mut per_user = vec![0.0; n];
            per_user[0] = own;
            areas.update(&stats, total, &per_user, 1.0);
            ensure(areas.s1[0].radius == r1 && areas.s2[0].radius == r2 && areas.s3[0].radius == r3, || {
                format!("sample {k}: search areas disagree with the radius formulas")
            })?;
        }
    }

    // centroid is no farther from p than the mean distance of the points
    for k in 0..KERNEL_SAMPLES {
        let m = rng.random_range(2..=10);
        let pts: Vec<Coord> = (0..m)
            .map(|_| Coord::new(rng.random_range(0.0..1000.0), rng.random_range(0.0..1000.0)))
            .collect();
        let p = Coord::new(rng.random_range(-500.0..1500.0), rng.random_range(-500.0..1500.0));
        let c = Coord::centroid(pts.iter().copied()).unwrap();
        let mean = pts.iter().map(|&q| euclidean(q, p)).sum::<f64>() / m as f64;
        let lhs = euclidean(c, p);
        ensure(lhs <= mean + GEOMETRY_SLACK * mean.max(1.0), || {
            format!("sample {k}: centroid distance {lhs} > mean distance {mean}")
        })?;
    }

    // network distance bounds straight-line distance, on the jittered
    // network and on a normalized lattice
    let lattice = RoadNetwork::grid(150, 150, 1.0).normalize();
    let sources: Vec<u32> = (0..50).map(|_| rng.random_range(0..lattice.node_count() as u32)).collect();
    let lattice_rows: Vec<(u32, Vec<f64>)> = sources
        .par_iter()
        .map(|&s| (s, single_source(&lattice, NodeId(s))))
        .collect();
    for k in 0..KERNEL_SAMPLES {
        let (net, d, u, t) = if k % 2 == 0 {
            let u = rng.random_range(0..v);
            let t = rng.random_range(0..v);
            (&net, apsp[u][t], u, t)
        } else {
            let (s, row) = &lattice_rows[rng.random_range(0..lattice_rows.len())];
            let t = rng.random_range(0..lattice.node_count());
            (&lattice, row[t], *s as usize, t)
        };
        let de = euclidean(net.coord(NodeId(u as u32)), net.coord(NodeId(t as u32)));
        ensure(d >= de - GEOMETRY_SLACK * de.max(1.0), || format!("pair {u}-{t}: d {d} < d_E {de}"))?;
    }

    let secs = started.elapsed().as_secs_f64();
    ensure(secs < KERNEL_TIME_LIMIT_SECS, || format!("took {secs:.1}s, limit {KERNEL_TIME_LIMIT_SECS}s"))?;
    Ok(format!(
        "{KERNEL_SAMPLES} samples each: kernel exact and non-negative, radii exact, centroid bound, d >= d_E"
    ))
}

// ---------------------------------------------------------------------------
// AC7

fn ac7_termination() -> Result<String, String> {
    let spec = equivalence_spec();
    let d = dataset(&spec);
    let max_attempts = 20 * TERMINATION_INSTANCES as u64;
    let check = |i: u64| -> Result<Option<usize>, String> {
        let inst = random_instance(&spec, &d, 10_000 + i);
        let index = index_of(&d, &inst);
        let config = SolverConfig {
            record_trace: true,
            ..Default::default()
        };
        let r = run_solve(&d, &inst, &index, &config);
        if !r.terminated_early {
            return Ok(None);
        }
        let seen = r.trace.unwrap().dequeued;
        let rest: Vec<Poi> = inst.pois.iter().filter(|p| !seen.contains(&p.id)).copied().collect();
        ensure(!rest.is_empty(), || format!("instance {i}: early stop with an empty queue"))?;
        let mut oracle = DistanceOracle::new(&d.network);
        let found = r.solution.total_overhead;
        for p in &rest {
            let to: f64 = inst
                .group
                .trips()
                .iter()
                .map(|t| compute_trip_overhead(p, t, &mut oracle, DEFAULT_TIE_TOLERANCE).overhead)
                .sum();
            ensure(to >= found - TO_TOLERANCE, || {
                format!("instance {i}: undrained POI {} has TO {to} < returned {found}", p.id)
            })?;
        }
        Ok(Some(rest.len()))
    };
    let mut early = 0;
    let mut drained = 0;
    let mut attempts = 0;
    while early < TERMINATION_INSTANCES && attempts < max_attempts {
        let batch = (attempts..attempts + TERMINATION_INSTANCES as u64).into_par_iter().map(check);
        for o in batch.collect::<Vec<_>>() {
            if let Some(n) = o? {
                early += 1;
                drained += n;
            }
        }
        attempts += TERMINATION_INSTANCES as u64;
    }
    ensure(early >= TERMINATION_INSTANCES, || {
        format!("only {early} early-terminating instances in {attempts} attempts")
    })?;
    Ok(format!(
        "{early} early-terminating instances of {attempts}, {drained} undrained POIs evaluated, none improves the answer"
    ))
}

// ---------------------------------------------------------------------------
// AC8

fn csv_bytes(rows: &[ExperimentRow]) -> Vec<u8> {
    let mut buf = Vec::new();
    write_rows(&mut buf, rows).unwrap();
    buf
}

fn ac8_determinism() -> Result<String, String> {
    let spec = BenchSpec {
        n_values: vec![2, 4, 6],
        ..equivalence_spec()
    };
    let d = dataset(&spec);
    let cells = Sweep::N.cells(&spec);
    let algos = vec![Algorithm::Ea(Pruning::ALL), Algorithm::Ea(Pruning::NONE), Algorithm::Ba];
    let run = |threads, timing| {
        let opts = BenchOptions {
            repetitions: 8,
            seed: 99,
            threads,
            timing,
            algorithms: algos.clone(),
        };
        run_cells(&d, &cells, &opts).expect("bench")
    };
    let a = csv_bytes(&run(1, false));
    let b = csv_bytes(&run(1, false));
    let c = csv_bytes(&run(8, false));
    ensure(a == b, || "two single-thread runs differ".into())?;
    ensure(a == c, || "1-thread and 8-thread runs differ".into())?;

    // with timing on only the elapsed column may change
    let strip = |rows: Vec<ExperimentRow>| {
        rows.into_iter()
            .map(|r| ExperimentRow { elapsed: None, ..r })
            .collect::<Vec<_>>()
    };
    ensure(strip(run(1, true)) == strip(run(8, true)), || "timed runs differ outside elapsed".into())?;

    // the binary, end to end
    let dir = tempfile::tempdir().unwrap();
    let spec_file = dir.path().join("spec.cfg");
    std::fs::write(&spec_file, "grid_size=60\nnormalize=false\nn_values=2,4\nqa=20\nreps=6\nseed=5\n").unwrap();
    let mut files = Vec::new();
    for (k, threads) in ["1", "1", "8"].into_iter().enumerate() {
        let out = dir.path().join(format!("run{k}.csv"));
        let status = Command::new(env!("CARGO_BIN_EXE_tgnn"))
            .args(["bench", "--sweep", "n", "--no-timing", "--threads", threads])
            .arg("--spec")
            .arg(&spec_file)
            .arg("--out")
            .arg(&out)
            .output()
            .unwrap();
        ensure(status.status.success(), || {
            format!("tgnn bench failed: {}", String::from_utf8_lossy(&status.stderr))
        })?;
        files.push((std::fs::read(&out).unwrap(), std::fs::read(out.with_file_name(format!("run{k}.summary.csv"))).unwrap()));
    }
    ensure(files[0] == files[1] && files[0] == files[2], || "tgnn bench CSV files differ".into())?;
    Ok(format!(
        "library CSV ({} bytes) and tgnn bench CSV identical across repeated runs and 1 vs 8 threads",
        a.len()
    ))
}
