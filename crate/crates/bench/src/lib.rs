//! Fixtures shared by the criterion benchmarks.

use tgnn_core::workload::{generate_instance, Instance};
use tgnn_core::{RoadNetwork, WorkloadSpec};

/// A normalized `size` x `size` lattice.
pub fn lattice(size: usize) -> RoadNetwork {
    RoadNetwork::grid(size, size, 1.0).normalize()
}

/// Instance `stream` of `spec` on `network`. Panics if generation fails.
pub fn instance(network: &RoadNetwork, spec: &WorkloadSpec, stream: u64) -> Instance {
    generate_instance(network, &network.components(), spec, stream)
        .unwrap_or_else(|e| panic!("generating bench instance: {e}"))
}

pub fn workload(n: usize, m: usize, rho: f64, qa: f64) -> WorkloadSpec {
    WorkloadSpec {
        n,
        m,
        rho,
        qa,
        seed: 7,
        repetitions: 1,
    }
}
