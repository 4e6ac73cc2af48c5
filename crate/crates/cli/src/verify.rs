//! Randomized comparison of the search against the reference solvers.

use anyhow::Result;
use rand::seq::IndexedRandom;
use tgnn_core::baseline::{ba_tgnn, combination_count, exhaustive};
use tgnn_core::workload::{generate_instance, rng_for, Instance, Purpose};
use tgnn_core::{
    solve, DistanceOracle, Error, PoiIndex, Pruning, SolverConfig, WorkloadSpec,
    DEFAULT_TIE_TOLERANCE,
};

use crate::experiment::{Dataset, AGREEMENT_TOLERANCE};
use crate::spec::BenchSpec;

/// Pruning settings every instance is solved with: all techniques, then
/// each one alone.
pub const CHECKED_PRUNING: [Pruning; 4] = [
    Pruning::ALL,
    Pruning {
        pt1: true,
        pt2: false,
        pt3: false,
    },
    Pruning {
        pt1: false,
        pt2: true,
        pt3: false,
    },
    Pruning {
        pt1: false,
        pt2: false,
        pt3: true,
    },
];

/// Draws instance `index`'s parameters from the spec's value lists.
pub fn draw_workload(spec: &BenchSpec, seed: u64, index: u64) -> WorkloadSpec {
    let mut rng = rng_for(seed, index, Purpose::Params);
    WorkloadSpec {
        n: *spec.n_values.choose(&mut rng).expect("non-empty"),
        m: *spec.m_values.choose(&mut rng).expect("non-empty"),
        rho: *spec.rho_values.choose(&mut rng).expect("non-empty"),
        qa: *spec.qa_values.choose(&mut rng).expect("non-empty"),
        seed,
        repetitions: 1,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Outcome {
    Match,
    /// Generation failed or nothing was reachable; not counted.
    Skipped(String),
    Mismatch(String),
}

/// Solves `instance` with every setting in [`CHECKED_PRUNING`], the
/// exhaustive oracle and, when under the combination cap, the baseline.
/// Total overhead must agree within [`AGREEMENT_TOLERANCE`] and the meetup
/// POI must be the same.
pub fn check_instance(
    dataset: &Dataset,
    instance: &Instance,
    radius_scale: f64,
) -> Result<Outcome> {
    let index = PoiIndex::build(instance.pois.clone(), dataset.max_fanout)?;
    let group = &instance.group;
    let oracle = match exhaustive(
        group,
        &instance.pois,
        &mut DistanceOracle::new(&dataset.network),
        DEFAULT_TIE_TOLERANCE,
    ) {
        Ok(s) => s,
        Err(Error::NoFeasibleMeetup) => return Ok(Outcome::Skipped("infeasible".into())),
        Err(e) => return Err(e.into()),
    };
    let mut answers = Vec::new();
    for pruning in CHECKED_PRUNING {
        let config = SolverConfig {
            pruning,
            radius_scale,
            ..Default::default()
        };
        let r = solve(group, &index, &mut DistanceOracle::new(&dataset.network), &config)?;
        answers.push((format!("solve[{}]", pruning.label()), r.solution));
    }
    if combination_count(group).is_some_and(|c| c <= dataset.ba_max_combinations) {
        let r = ba_tgnn(
            group,
            &instance.pois,
            &mut DistanceOracle::new(&dataset.network),
            DEFAULT_TIE_TOLERANCE,
        )?;
        answers.push(("ba_tgnn".into(), r.solution));
    }
    for (name, s) in answers {
        if (s.total_overhead - oracle.total_overhead).abs() > AGREEMENT_TOLERANCE
            || s.meetup.id != oracle.meetup.id
        {
            return Ok(Outcome::Mismatch(format!(
                "{name} returned POI {} with TO {}, exhaustive POI {} with TO {}",
                s.meetup.id, s.total_overhead, oracle.meetup.id, oracle.total_overhead
            )));
        }
    }
    Ok(Outcome::Match)
}

#[derive(Clone, Debug, Default)]
pub struct VerifyReport {
    pub matched: usize,
    pub skipped: usize,
    /// `(instance index, workload, description)`.
    pub mismatches: Vec<(u64, WorkloadSpec, String)>,
}

impl VerifyReport {
    pub fn checked(&self) -> usize {
        self.matched + self.mismatches.len()
    }
}

/// Checks `count` instances. Instance `i` uses stream `i` of `seed`.
pub fn run(
    spec: &BenchSpec,
    dataset: &Dataset,
    count: u64,
    seed: u64,
    radius_scale: f64,
) -> Result<VerifyReport> {
    let mut report = VerifyReport::default();
    for i in 0..count {
        let workload = draw_workload(spec, seed, i);
        let outcome = match generate_instance(&dataset.network, &dataset.components, &workload, i)
        {
            Ok(instance) => check_instance(dataset, &instance, radius_scale)?,
            Err(e @ (Error::RetryExhausted { .. } | Error::InvalidWorkload(_))) => {
                Outcome::Skipped(e.to_string())
            }
            Err(e) => return Err(e.into()),
        };
        match outcome {
            Outcome::Match => report.matched += 1,
            Outcome::Skipped(_) => report.skipped += 1,
            Outcome::Mismatch(d) => report.mismatches.push((i, workload, d)),
        }
    }
    Ok(report)
}
