use rustc_hash::FxHashSet;
use serde::{Deserialize, Serialize};

use crate::distance::DistanceOracle;
use crate::geometry::{euclidean, Coord};
use crate::network::NodeId;
use crate::{Error, Result};

/// One user's predefined trip: an ordered sequence of network locations.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trip {
    pub user_id: u64,
    pub locations: Vec<NodeId>,
}

impl Trip {
    /// Requires at least two locations and no two equal consecutive ones.
    pub fn new(user_id: u64, locations: Vec<NodeId>) -> Result<Self> {
        let trip = Trip { user_id, locations };
        trip.validate()?;
        Ok(trip)
    }

    pub fn validate(&self) -> Result<()> {
        let reason = if self.locations.len() < 2 {
            format!("needs at least 2 locations, got {}", self.locations.len())
        } else if let Some(j) = self.locations.windows(2).position(|w| w[0] == w[1]) {
            format!("locations {j} and {} are the same node", j + 1)
        } else {
            return Ok(());
        };
        Err(Error::InvalidTrip {
            user_id: self.user_id,
            reason,
        })
    }

    pub fn len(&self) -> usize {
        self.locations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.locations.is_empty()
    }

    /// Number of consecutive location pairs.
    pub fn legs(&self) -> usize {
        self.locations.len() - 1
    }
}

/// The trips of all users in a group.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryGroup {
    trips: Vec<Trip>,
}

impl QueryGroup {
    pub fn new(trips: Vec<Trip>) -> Result<Self> {
        if trips.is_empty() {
            return Err(Error::InvalidGroup("a group needs at least one user".into()));
        }
        let mut ids = FxHashSet::default();
        for t in &trips {
            if !ids.insert(t.user_id) {
                return Err(Error::InvalidGroup(format!("duplicate user id {}", t.user_id)));
            }
            t.validate()?;
        }
        Ok(QueryGroup { trips })
    }

    /// Builds a group with user ids `0..n` in order.
    pub fn from_locations<I>(trips: I) -> Result<Self>
    where
        I: IntoIterator<Item = Vec<NodeId>>,
    {
        let trips = trips
            .into_iter()
            .enumerate()
            .map(|(i, locs)| Trip::new(i as u64, locs))
            .collect::<Result<Vec<_>>>()?;
        Self::new(trips)
    }

    pub fn trips(&self) -> &[Trip] {
        &self.trips
    }

    pub fn len(&self) -> usize {
        self.trips.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trips.is_empty()
    }

    /// Every distinct trip location, in first-occurrence order.
    pub fn distinct_locations(&self) -> Vec<NodeId> {
        let mut seen = FxHashSet::default();
        self.trips
            .iter()
            .flat_map(|t| t.locations.iter().copied())
            .filter(|n| seen.insert(*n))
            .collect()
    }
}

/// Per-user quantities derived once per query.
#[derive(Clone, Debug, PartialEq)]
pub struct TripStats {
    /// Mean of the trip location coordinates.
    pub centroid: Coord,
    /// Network length of each leg `j -> j+1`.
    pub legs: Vec<f64>,
    /// Sum of `legs`.
    pub trip_distance: f64,
    /// Longest leg.
    pub mdist: f64,
    /// Largest straight-line distance from the centroid to a trip location.
    pub cdist: f64,
}

/// Output of [`initialize`].
#[derive(Clone, Debug)]
pub struct Initialized {
    pub stats: Vec<TripStats>,
    /// Mean of the per-user centroids.
    pub global_centroid: Coord,
}

/// Computes centroids, leg distances, trip distance, longest leg and
/// centroid spread for each user, then the global centroid.
///
/// Fails when a trip location is not a network node or a leg is
/// disconnected.
pub fn initialize(group: &QueryGroup, oracle: &mut DistanceOracle<'_>) -> Result<Initialized> {
    let network = oracle.network();
    let mut stats = Vec::with_capacity(group.len());
    for trip in group.trips() {
        if let Some(bad) = trip.locations.iter().find(|n| !network.contains(**n)) {
            return Err(Error::UnknownNode(bad.0 as u64));
        }
        let centroid = Coord::centroid(trip.locations.iter().map(|&n| network.coord(n)))
            .expect("trip has locations");
        let mut legs = Vec::with_capacity(trip.legs());
        for (j, w) in trip.locations.windows(2).enumerate() {
            let d = oracle.shortest_distance(w[0], w[1]);
            if !d.is_finite() {
                return Err(Error::DisconnectedTrip {
                    user_id: trip.user_id,
                    leg: j,
                    from: w[0].0,
                    to: w[1].0,
                });
            }
            legs.push(d);
        }
        let trip_distance = legs.iter().sum();
        let mdist = legs.iter().copied().fold(0.0, f64::max);
        let cdist = trip
            .locations
            .iter()
            .map(|&n| euclidean(network.coord(n), centroid))
            .fold(0.0, f64::max);
        stats.push(TripStats {
            centroid,
            legs,
            trip_distance,
            mdist,
            cdist,
        });
    }
    let global_centroid =
        Coord::centroid(stats.iter().map(|s| s.centroid)).expect("group has users");
    Ok(Initialized {
        stats,
        global_centroid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::RoadNetwork;

    fn ids(v: &[u32]) -> Vec<NodeId> {
        v.iter().map(|&i| NodeId(i)).collect()
    }

    #[test]
    fn trip_validation() {
        assert!(Trip::new(0, ids(&[1])).is_err());
        assert!(Trip::new(0, ids(&[1, 1, 2])).is_err());
        assert!(Trip::new(0, ids(&[1, 2, 1])).is_ok());
        assert!(QueryGroup::new(vec![]).is_err());
        let t = Trip::new(4, ids(&[0, 1])).unwrap();
        assert!(QueryGroup::new(vec![t.clone(), t]).is_err());
    }

    #[test]
    fn line_trip_stats() {
        // unit-spaced line road 0..=4, trip visits x = 0, 2, 4
        let net = RoadNetwork::grid(5, 1, 1.0);
        let group = QueryGroup::from_locations([ids(&[0, 2, 4])]).unwrap();
        let mut oracle = DistanceOracle::new(&net);
        let init = initialize(&group, &mut oracle).unwrap();
        let s = &init.stats[0];
        assert_eq!(s.centroid, Coord::new(2.0, 0.0));
        assert_eq!(s.trip_distance, 4.0);
        assert_eq!(s.mdist, 2.0);
        assert_eq!(s.cdist, 2.0);
        assert_eq!(init.global_centroid, Coord::new(2.0, 0.0));
    }

    #[test]
    fn single_leg_and_shared_centroid() {
        let net = RoadNetwork::grid(4, 4, 1.0);
        let group = QueryGroup::from_locations([ids(&[0, 15]), ids(&[0, 15])]).unwrap();
        let mut oracle = DistanceOracle::new(&net);
        let init = initialize(&group, &mut oracle).unwrap();
        for s in &init.stats {
            assert_eq!(s.trip_distance, 6.0);
            assert_eq!(s.mdist, s.trip_distance);
        }
        assert_eq!(init.global_centroid, Coord::new(1.5, 1.5));
    }

    #[test]
    fn disconnected_leg_is_rejected() {
        let net = RoadNetwork::from_edges(
            vec![Coord::new(0.0, 0.0), Coord::new(1.0, 0.0), Coord::new(5.0, 0.0)],
            [(0, 1, None)],
        )
        .unwrap();
        let group = QueryGroup::from_locations([ids(&[0, 1, 2])]).unwrap();
        let err = initialize(&group, &mut DistanceOracle::new(&net)).unwrap_err();
        assert!(matches!(err, Error::DisconnectedTrip { user_id: 0, leg: 1, .. }));
    }
}
