//! The T-GNN search.
//!
//! [`solve`] walks the POI R-tree outward from the global centroid. Each
//! retrieved POI that lies inside the current search areas is evaluated
//! with one truncated shortest-path search from its node to every trip
//! location. A strictly better total overhead shrinks the search areas.
//! The walk stops when the queue is empty or the known area (everything
//! within the last retrieval distance) covers the search areas.

mod overhead;
mod pruning;
mod trip;

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

pub use overhead::{compute_trip_overhead, overhead_from_distances, TripOverhead};
pub use pruning::{pt1_radius, pt2_radius, pt3_radius, KnownArea, Pruning, SearchAreas};
pub use trip::{initialize, Initialized, QueryGroup, Trip, TripStats};

use crate::distance::DistanceOracle;
use crate::network::NodeId;
use crate::poi_index::{Poi, PoiIndex, Retrieved};
use crate::{Error, Result, DEFAULT_TIE_TOLERANCE};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub pruning: Pruning,
    /// Drop R-tree nodes whose rectangle lies outside the search areas
    /// instead of expanding them.
    pub prune_internal_nodes: bool,
    pub tie_tolerance: f64,
    /// Multiplier on every search radius. Values below 1 break the pruning
    /// guarantees; used only to check that verification catches it.
    pub radius_scale: f64,
    /// Record dequeued and rejected POI ids in the report.
    pub record_trace: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            pruning: Pruning::ALL,
            prune_internal_nodes: false,
            tie_tolerance: DEFAULT_TIE_TOLERANCE,
            radius_scale: 1.0,
            record_trace: false,
        }
    }
}

impl SolverConfig {
    pub fn with_pruning(pruning: Pruning) -> Self {
        SolverConfig {
            pruning,
            ..Default::default()
        }
    }
}

/// A user's part of a solution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Detour {
    pub user_id: u64,
    /// Position in the trip of the location the user detours from.
    pub index: usize,
    pub node: NodeId,
    pub overhead: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub meetup: Poi,
    pub detours: Vec<Detour>,
    pub total_overhead: f64,
}

impl Solution {
    pub fn per_user_overhead(&self) -> Vec<f64> {
        self.detours.iter().map(|d| d.overhead).collect()
    }

    /// Assembles a solution from per-user overheads in group order.
    pub fn assemble(group: &QueryGroup, meetup: Poi, per_user: &[TripOverhead]) -> Self {
        let detours: Vec<Detour> = group
            .trips()
            .iter()
            .zip(per_user)
            .map(|(trip, o)| Detour {
                user_id: trip.user_id,
                index: o.detour_index,
                node: trip.locations[o.detour_index],
                overhead: o.overhead,
            })
            .collect();
        let total_overhead = detours.iter().map(|d| d.overhead).sum();
        Solution {
            meetup,
            detours,
            total_overhead,
        }
    }
}

/// POI ids seen by a run, in retrieval order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolverTrace {
    pub dequeued: Vec<u64>,
    /// Dequeued POIs that failed the search-area test.
    pub rejected: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverReport {
    pub solution: Solution,
    pub pois_dequeued: u64,
    /// POIs that passed the search-area test and had their overhead computed.
    pub pois_evaluated: u64,
    pub dijkstra_runs: u64,
    /// The known area covered the search areas while the queue still held
    /// entries.
    pub terminated_early: bool,
    /// Radius of the known area at termination.
    pub known_radius: f64,
    pub elapsed: Duration,
    pub trace: Option<SolverTrace>,
}

/// Evaluates every user's overhead for `poi` with one shortest-path search
/// from the POI to `targets`, which must hold every trip location;
/// `slots[i][j]` is the position of user `i`'s location `j` in `targets`.
struct GroupEvaluator<'g> {
    group: &'g QueryGroup,
    targets: Vec<NodeId>,
    slots: Vec<Vec<usize>>,
}

impl<'g> GroupEvaluator<'g> {
    fn new(group: &'g QueryGroup) -> Self {
        let targets = group.distinct_locations();
        let slots = group
            .trips()
            .iter()
            .map(|t| {
                t.locations
                    .iter()
                    .map(|n| targets.iter().position(|x| x == n).expect("collected above"))
                    .collect()
            })
            .collect();
        GroupEvaluator {
            group,
            targets,
            slots,
        }
    }

    fn evaluate(
        &self,
        poi: &Poi,
        stats: &[TripStats],
        oracle: &mut DistanceOracle<'_>,
        tie_tolerance: f64,
    ) -> Vec<TripOverhead> {
        let dist = oracle.multi_target_distances(poi.node, &self.targets);
        let mut to_poi = Vec::new();
        self.slots
            .iter()
            .zip(stats)
            .map(|(slots, s)| {
                to_poi.clear();
                to_poi.extend(slots.iter().map(|&k| dist[k]));
                overhead_from_distances(&to_poi, &s.legs, tie_tolerance)
            })
            .collect()
    }

    fn group(&self) -> &QueryGroup {
        self.group
    }
}

/// Finds the meetup POI and detours minimizing the group's total overhead.
pub fn solve(
    group: &QueryGroup,
    index: &PoiIndex,
    oracle: &mut DistanceOracle<'_>,
    config: &SolverConfig,
) -> Result<SolverReport> {
    let started = Instant::now();
    let runs_before = oracle.searches();
    if index.is_empty() {
        return Err(Error::NoPois);
    }
    let init = initialize(group, oracle)?;
    let stats = &init.stats;
    let evaluator = GroupEvaluator::new(group);
    let pruning = config.pruning;
    let tol = config.tie_tolerance;

    let mut areas = SearchAreas::unbounded(stats);
    let mut known = KnownArea::new(init.global_centroid);
    let mut queue = index.nearest_iter(init.global_centroid);
    let mut trace = config.record_trace.then(SolverTrace::default);

    let mut best: Option<Solution> = None;
    let mut best_total = f64::INFINITY;
    let mut dequeued = 0u64;
    let mut evaluated = 0u64;
    let mut terminated_early = false;

    loop {
        if areas.covered_by(&known, pruning) {
            terminated_early = !queue.is_exhausted();
            break;
        }
        let step = if config.prune_internal_nodes {
            queue.pop_filtered(|mbr| areas.may_contain(mbr, pruning))
        } else {
            queue.pop()
        };
        let Some(step) = step else { break };
        known.expand_to(step.key());
        let Retrieved::Poi { poi, .. } = step else {
            continue;
        };

        dequeued += 1;
        if let Some(t) = trace.as_mut() {
            t.dequeued.push(poi.id);
        }
        if !areas.is_candidate(poi.coord, pruning) {
            if let Some(t) = trace.as_mut() {
                t.rejected.push(poi.id);
            }
            continue;
        }
        evaluated += 1;
        let per_user = evaluator.evaluate(poi, stats, oracle, tol);
        let total: f64 = per_user.iter().map(|o| o.overhead).sum();
        if total < best_total - tol {
            let solution = Solution::assemble(evaluator.group(), *poi, &per_user);
            best_total = total;
            areas.update(
                stats,
                best_total,
                &solution.per_user_overhead(),
                config.radius_scale,
            );
            best = Some(solution);
        }
    }

    let solution = best.ok_or(Error::NoFeasibleMeetup)?;
    Ok(SolverReport {
        solution,
        pois_dequeued: dequeued,
        pois_evaluated: evaluated,
        dijkstra_runs: oracle.searches() - runs_before,
        terminated_early,
        known_radius: known.radius,
        elapsed: started.elapsed(),
        trace,
    })
}
