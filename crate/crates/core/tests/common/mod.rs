#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tgnn_core::workload::{generate_group, place_query_area};
use tgnn_core::{Coord, NodeId, Poi, QueryGroup, RoadNetwork};

/// Jittered `side` x `side` grid with some diagonals and edge weights up to
/// 40% above the Euclidean length.
pub fn random_network(seed: u64, side: usize) -> RoadNetwork {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coords = Vec::with_capacity(side * side);
    for r in 0..side {
        for c in 0..side {
            coords.push(Coord::new(
                c as f64 * 10.0 + rng.random_range(-3.0..3.0),
                r as f64 * 10.0 + rng.random_range(-3.0..3.0),
            ));
        }
    }
    let mut edges = Vec::new();
    let id = |r: usize, c: usize| (r * side + c) as u32;
    for r in 0..side {
        for c in 0..side {
            let mut link = |a: u32, b: u32, rng: &mut ChaCha8Rng| {
                let d = tgnn_core::euclidean(coords[a as usize], coords[b as usize]);
                edges.push((a, b, Some(d * rng.random_range(1.0..1.4))));
            };
            if c + 1 < side {
                link(id(r, c), id(r, c + 1), &mut rng);
            }
            if r + 1 < side {
                link(id(r, c), id(r + 1, c), &mut rng);
            }
            if r + 1 < side && c + 1 < side && rng.random_bool(0.2) {
                link(id(r, c), id(r + 1, c + 1), &mut rng);
            }
        }
    }
    RoadNetwork::from_edges(coords, edges).unwrap()
}

pub struct Case {
    pub network: RoadNetwork,
    pub pois: Vec<Poi>,
    pub group: QueryGroup,
}

/// A random instance: `poi_count` POIs anywhere, `n` trips of `m` stops
/// drawn from a square of side `qa`.
pub fn random_case(seed: u64, side: usize, poi_count: usize, n: usize, m: usize, qa: f64) -> Case {
    let network = random_network(seed, side);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
    let nodes = rand::seq::index::sample(&mut rng, network.node_count(), poi_count);
    let pois = nodes
        .into_iter()
        .enumerate()
        .map(|(i, v)| Poi::on_network(i as u64, NodeId(v as u32), &network))
        .collect();
    let components = network.components();
    let area = place_query_area(&network, qa, n * m, &mut rng).unwrap();
    let group = generate_group(&network, &components, &area, n, m, &mut rng).unwrap();
    Case {
        network,
        pois,
        group,
    }
}

pub fn ids(v: &[u32]) -> Vec<NodeId> {
    v.iter().map(|&i| NodeId(i)).collect()
}
