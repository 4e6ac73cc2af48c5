use serde::{Deserialize, Serialize};

use crate::distance::DistanceOracle;
use crate::poi_index::Poi;
use crate::solver::Trip;

/// Minimum extra distance for one user to visit a POI, and the leg at
/// which the detour starts.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TripOverhead {
    pub overhead: f64,
    /// Index `j` of the detour location; the user returns at `j + 1`.
    pub detour_index: usize,
}

/// Overhead from precomputed distances.
///
/// `to_poi[j]` is the network distance between location `j` and the POI,
/// `legs[j]` the length of leg `j -> j+1`. The overhead is the minimum over
/// legs of `to_poi[j] + to_poi[j+1] - legs[j]`, clamped at zero against
/// rounding; the detour index is the smallest leg within `tie_tolerance`
/// of that minimum.
pub fn overhead_from_distances(to_poi: &[f64], legs: &[f64], tie_tolerance: f64) -> TripOverhead {
    debug_assert_eq!(to_poi.len(), legs.len() + 1);
    let detour = |j: usize| to_poi[j] + to_poi[j + 1] - legs[j];
    let min = (0..legs.len()).map(detour).fold(f64::INFINITY, f64::min);
    if !min.is_finite() {
        return TripOverhead {
            overhead: f64::INFINITY,
            detour_index: 0,
        };
    }
    let detour_index = (0..legs.len())
        .find(|&j| detour(j) <= min + tie_tolerance)
        .expect("minimum is attained");
    TripOverhead {
        overhead: min.max(0.0),
        detour_index,
    }
}

/// Minimum overhead for `trip` to detour via `poi`. Unreachable POIs get
/// `+inf`.
pub fn compute_trip_overhead(
    poi: &Poi,
    trip: &Trip,
    oracle: &mut DistanceOracle<'_>,
    tie_tolerance: f64,
) -> TripOverhead {
    let to_poi = oracle.multi_target_distances(poi.node, &trip.locations);
    let legs: Vec<f64> = trip
        .locations
        .windows(2)
        .map(|w| oracle.shortest_distance(w[0], w[1]))
        .collect();
    overhead_from_distances(&to_poi, &legs, tie_tolerance)
}
