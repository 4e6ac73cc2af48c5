//! Reference solvers.
//!
//! [`exhaustive`] evaluates every POI and is the correctness oracle for
//! [`solve`](crate::solve). [`ba_tgnn`] is the combination-enumerating
//! baseline: it fixes one consecutive source/destination pair per user,
//! finds the best POI for that combination, and keeps the best over all
//! `∏(m_i - 1)` combinations. Its per-combination sub-solver scans every
//! POI rather than using elliptical search regions; results are identical,
//! only the work differs.
//!
//! Both visit POIs in the order [`solve`](crate::solve) retrieves them
//! (distance from the global centroid, then POI id) and keep the first
//! minimum, so all three agree on ties.

use serde::{Deserialize, Serialize};

use crate::distance::DistanceOracle;
use crate::network::NodeId;
use crate::poi_index::{retrieval_order, Poi};
use crate::solver::{initialize, overhead_from_distances, QueryGroup, Solution, TripOverhead};
use crate::{Error, Result};

/// Network distances from every trip location to every POI, the POIs
/// listed in retrieval order.
struct DistanceTable {
    pois: Vec<Poi>,
    /// `per_user[i][j][k]`: distance from user i's location j to POI k.
    per_user: Vec<Vec<Vec<f64>>>,
    legs: Vec<Vec<f64>>,
}

impl DistanceTable {
    fn build(group: &QueryGroup, pois: &[Poi], oracle: &mut DistanceOracle<'_>) -> Result<Self> {
        if pois.is_empty() {
            return Err(Error::NoPois);
        }
        let init = initialize(group, oracle)?;
        let pois: Vec<Poi> = retrieval_order(pois, init.global_centroid)
            .into_iter()
            .map(|(p, _)| p)
            .collect();
        let nodes: Vec<NodeId> = pois.iter().map(|p| p.node).collect();
        let per_user = group
            .trips()
            .iter()
            .map(|t| {
                t.locations
                    .iter()
                    .map(|&l| oracle.multi_target_distances(l, &nodes))
                    .collect()
            })
            .collect();
        let legs = init.stats.into_iter().map(|s| s.legs).collect();
        Ok(DistanceTable {
            pois,
            per_user,
            legs,
        })
    }
}

/// Minimum-overhead solution found by evaluating every POI.
pub fn exhaustive(
    group: &QueryGroup,
    pois: &[Poi],
    oracle: &mut DistanceOracle<'_>,
    tie_tolerance: f64,
) -> Result<Solution> {
    let table = DistanceTable::build(group, pois, oracle)?;
    let mut best: Option<(f64, usize, Vec<TripOverhead>)> = None;
    let mut to_poi = Vec::new();
    for k in 0..table.pois.len() {
        let per_user: Vec<TripOverhead> = table
            .per_user
            .iter()
            .zip(&table.legs)
            .map(|(locs, legs)| {
                to_poi.clear();
                to_poi.extend(locs.iter().map(|d| d[k]));
                overhead_from_distances(&to_poi, legs, tie_tolerance)
            })
            .collect();
        let total: f64 = per_user.iter().map(|o| o.overhead).sum();
        let best_total = best.as_ref().map_or(f64::INFINITY, |b| b.0);
        if total < best_total - tie_tolerance {
            best = Some((total, k, per_user));
        }
    }
    let (_, k, per_user) = best.ok_or(Error::NoFeasibleMeetup)?;
    Ok(Solution::assemble(group, table.pois[k], &per_user))
}

/// One consecutive location pair of a user's trip.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SdPair {
    pub user_id: u64,
    pub leg_index: usize,
    pub source: NodeId,
    pub destination: NodeId,
}

/// One pair per user, in group order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Combination {
    pub pairs: Vec<SdPair>,
}

/// Number of combinations, `∏(m_i - 1)`; `None` on overflow.
pub fn combination_count(group: &QueryGroup) -> Option<u64> {
    group
        .trips()
        .iter()
        .try_fold(1u64, |acc, t| acc.checked_mul(t.legs() as u64))
}

/// Lexicographic enumeration of leg-index tuples, last user fastest.
#[derive(Clone, Debug)]
pub struct Combinations<'g> {
    group: &'g QueryGroup,
    legs: Vec<usize>,
    done: bool,
}

impl<'g> Combinations<'g> {
    fn new(group: &'g QueryGroup) -> Self {
        Combinations {
            group,
            legs: vec![0; group.len()],
            done: group.is_empty(),
        }
    }

    /// Advances the odometer; returns the first position that changed, or
    /// `None` when the enumeration wrapped around.
    fn advance(&mut self) -> Option<usize> {
        for i in (0..self.legs.len()).rev() {
            self.legs[i] += 1;
            if self.legs[i] < self.group.trips()[i].legs() {
                return Some(i);
            }
            self.legs[i] = 0;
        }
        None
    }
}

impl Iterator for Combinations<'_> {
    type Item = Combination;

    fn next(&mut self) -> Option<Combination> {
        if self.done {
            return None;
        }
        let pairs = self
            .group
            .trips()
            .iter()
            .zip(&self.legs)
            .map(|(t, &j)| SdPair {
                user_id: t.user_id,
                leg_index: j,
                source: t.locations[j],
                destination: t.locations[j + 1],
            })
            .collect();
        self.done = self.advance().is_none();
        Some(Combination { pairs })
    }
}

pub fn enumerate_combinations(group: &QueryGroup) -> Combinations<'_> {
    Combinations::new(group)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineReport {
    pub solution: Solution,
    pub combinations: u64,
    /// `(POI, combination)` pairs scored: combinations times POI count.
    pub pois_evaluated: u64,
    pub dijkstra_runs: u64,
}

/// The combination-enumerating baseline.
pub fn ba_tgnn(
    group: &QueryGroup,
    pois: &[Poi],
    oracle: &mut DistanceOracle<'_>,
    tie_tolerance: f64,
) -> Result<BaselineReport> {
    let runs_before = oracle.searches();
    let table = DistanceTable::build(group, pois, oracle)?;
    let q = table.pois.len();
    let n = group.len();

    // detour[i][j][k]: overhead of user i leaving at location j for POI k
    let detour: Vec<Vec<Vec<f64>>> = table
        .per_user
        .iter()
        .zip(&table.legs)
        .map(|(locs, legs)| {
            legs.iter()
                .enumerate()
                .map(|(j, &leg)| {
                    (0..q)
                        .map(|k| (locs[j][k] + locs[j + 1][k] - leg).max(0.0))
                        .collect()
                })
                .collect()
        })
        .collect();

    // prefix[i][k]: sum over users 0..=i of their current leg's overhead.
    // The odometer changes the last users most often, so only the suffix
    // from the first changed position is recomputed.
    let mut prefix = vec![vec![0.0; q]; n];
    let mut combos = Combinations::new(group);
    let mut changed_from = 0;
    let mut count = 0u64;
    let mut best: Option<(f64, usize, Vec<usize>)> = None;
    loop {
        for i in changed_from..n {
            let row = &detour[i][combos.legs[i]];
            if i == 0 {
                prefix[0].copy_from_slice(row);
            } else {
                let (head, tail) = prefix.split_at_mut(i);
                for ((dst, &prev), &d) in tail[0].iter_mut().zip(&head[i - 1]).zip(row) {
                    *dst = prev + d;
                }
            }
        }
        count += 1;

        // best POI for this combination, first minimum in retrieval order
        let totals = &prefix[n - 1];
        let mut combo_best: Option<(f64, usize)> = None;
        for (k, &t) in totals.iter().enumerate() {
            if t < combo_best.map_or(f64::INFINITY, |b| b.0) - tie_tolerance {
                combo_best = Some((t, k));
            }
        }
        if let Some((t, k)) = combo_best {
            let replace = match &best {
                None => true,
                Some((bt, bk, _)) => {
                    t < bt - tie_tolerance || (t <= bt + tie_tolerance && k < *bk)
                }
            };
            if replace {
                best = Some((t, k, combos.legs.clone()));
            }
        }

        match combos.advance() {
            Some(i) => changed_from = i,
            None => break,
        }
    }

    let (_, k, legs) = best.ok_or(Error::NoFeasibleMeetup)?;
    let per_user: Vec<TripOverhead> = legs
        .iter()
        .enumerate()
        .map(|(i, &j)| TripOverhead {
            overhead: detour[i][j][k],
            detour_index: j,
        })
        .collect();
    Ok(BaselineReport {
        solution: Solution::assemble(group, table.pois[k], &per_user),
        combinations: count,
        pois_evaluated: count * q as u64,
        dijkstra_runs: oracle.searches() - runs_before,
    })
}
