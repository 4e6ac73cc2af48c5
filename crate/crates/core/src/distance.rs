//! Shortest-path distances with per-source memoization.
//!
//! Every source node owns a resumable Dijkstra search. A lookup settles
//! nodes only until all requested targets are settled; later lookups from
//! the same source continue where the previous one stopped. Settled
//! distances do not depend on where a search was paused, so cached values
//! equal those of a fresh search bit for bit.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use ordered_float::OrderedFloat;
use rustc_hash::{FxHashMap, FxHashSet};

use crate::network::{NodeId, RoadNetwork};

#[derive(Debug, Default)]
struct SearchTree {
    settled: FxHashMap<u32, f64>,
    tentative: FxHashMap<u32, f64>,
    frontier: BinaryHeap<Reverse<(OrderedFloat<f64>, u32)>>,
}

impl SearchTree {
    fn new(source: NodeId) -> Self {
        let mut tree = SearchTree::default();
        tree.tentative.insert(source.0, 0.0);
        tree.frontier.push(Reverse((OrderedFloat(0.0), source.0)));
        tree
    }

    fn exhausted(&self) -> bool {
        self.frontier.is_empty()
    }

    /// Settles nodes until every node in `pending` is settled or the
    /// component is exhausted.
    fn settle_until(&mut self, network: &RoadNetwork, mut pending: FxHashSet<u32>) {
        while !pending.is_empty() {
            let Some(Reverse((OrderedFloat(d), u))) = self.frontier.pop() else {
                break;
            };
            if self.settled.contains_key(&u) {
                continue;
            }
            self.settled.insert(u, d);
            self.tentative.remove(&u);
            pending.remove(&u);
            for (v, w) in network.neighbors(NodeId(u)) {
                if self.settled.contains_key(&v.0) {
                    continue;
                }
                let nd = d + w;
                let better = self.tentative.get(&v.0).is_none_or(|&old| nd < old);
                if better {
                    self.tentative.insert(v.0, nd);
                    self.frontier.push(Reverse((OrderedFloat(nd), v.0)));
                }
            }
        }
    }

    fn get(&self, target: NodeId) -> f64 {
        self.settled
            .get(&target.0)
            .copied()
            .unwrap_or(f64::INFINITY)
    }
}

/// Network distance lookups backed by a per-source cache.
///
/// Lookups take `&mut self`; use one oracle per thread.
#[derive(Debug)]
pub struct DistanceOracle<'a> {
    network: &'a RoadNetwork,
    cache: FxHashMap<NodeId, SearchTree>,
    searches: u64,
}

impl<'a> DistanceOracle<'a> {
    pub fn new(network: &'a RoadNetwork) -> Self {
        DistanceOracle {
            network,
            cache: FxHashMap::default(),
            searches: 0,
        }
    }

    pub fn network(&self) -> &'a RoadNetwork {
        self.network
    }

    /// Number of times a single-source search was started or resumed.
    pub fn searches(&self) -> u64 {
        self.searches
    }

    pub fn cached_sources(&self) -> usize {
        self.cache.len()
    }

    pub fn clear(&mut self) {
        self.cache.clear();
    }

    /// Network distance from `s` to `t`; `+inf` when disconnected.
    pub fn shortest_distance(&mut self, s: NodeId, t: NodeId) -> f64 {
        self.multi_target_distances(s, &[t])[0]
    }

    /// Distances from `s` to each of `targets`, in the same order.
    pub fn multi_target_distances(&mut self, s: NodeId, targets: &[NodeId]) -> Vec<f64> {
        debug_assert!(self.network.contains(s));
        let network = self.network;
        let tree = self.cache.entry(s).or_insert_with(|| SearchTree::new(s));
        let pending: FxHashSet<u32> = targets
            .iter()
            .filter(|t| !tree.settled.contains_key(&t.0))
            .map(|t| t.0)
            .collect();
        if !pending.is_empty() && !tree.exhausted() {
            self.searches += 1;
            tree.settle_until(network, pending);
        }
        targets.iter().map(|&t| tree.get(t)).collect()
    }
}

/// Unmemoized single-source distances to every node.
pub fn single_source(network: &RoadNetwork, s: NodeId) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; network.node_count()];
    let mut done = vec![false; network.node_count()];
    let mut heap = BinaryHeap::new();
    dist[s.index()] = 0.0;
    heap.push(Reverse((OrderedFloat(0.0), s.0)));
    while let Some(Reverse((OrderedFloat(d), u))) = heap.pop() {
        if done[u as usize] {
            continue;
        }
        done[u as usize] = true;
        for (v, w) in network.neighbors(NodeId(u)) {
            let nd = d + w;
            if nd < dist[v.index()] {
                dist[v.index()] = nd;
                heap.push(Reverse((OrderedFloat(nd), v.0)));
            }
        }
    }
    dist
}
