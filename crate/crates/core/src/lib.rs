//! Trip-based group nearest neighbor (T-GNN) queries on road networks.
//!
//! Every user in a group has a fixed trip, an ordered list of network
//! locations. A query returns the meetup POI and, per user, the trip
//! location from which to detour to it, such that the sum of the extra
//! distances travelled by all users is minimal.
//!
//! The main entry point is [`solve`], which retrieves POIs incrementally
//! from an R-tree in order of distance from the group's centroid and
//! prunes them with three circle-based search areas. [`baseline`] holds
//! an exhaustive oracle and the combination-enumerating baseline used for
//! verification and comparison.

pub mod baseline;
pub mod distance;
mod error;
pub mod geometry;
pub mod io;
pub mod network;
pub mod poi_index;
pub mod solver;
pub mod workload;

pub use distance::DistanceOracle;
pub use error::{Error, Result};
pub use geometry::{euclidean, Circle, Coord, Mbr};
pub use network::{NodeId, RoadNetwork};
pub use poi_index::{NearestIterator, Poi, PoiIndex};
pub use solver::{
    solve, Detour, Pruning, QueryGroup, Solution, SolverConfig, SolverReport, Trip,
};
pub use workload::WorkloadSpec;

/// Default tolerance used when comparing overhead distances.
pub const DEFAULT_TIE_TOLERANCE: f64 = 1e-9;
