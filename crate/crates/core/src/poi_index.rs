//! Static R-tree over POIs with best-first incremental nearest retrieval.
//!
//! The tree is bulk-loaded with sort-tile-recursive packing, so the same
//! input always yields the same tree. [`NearestIterator`] keeps a priority
//! queue of tree entries keyed by their Euclidean lower bound from the
//! query point (mindist for nodes, exact distance for POIs). Ties are
//! resolved nodes first, then by ascending POI id, which makes the yielded
//! order exactly the sort order of `(distance, poi_id)`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rustc_hash::FxHashSet;
use serde::{Deserialize, Serialize};

use crate::geometry::{euclidean, Coord, Mbr};
use crate::network::{NodeId, RoadNetwork};
use crate::{Error, Result};

pub const DEFAULT_MAX_FANOUT: usize = 16;

/// A point of interest located on a network node.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Poi {
    pub id: u64,
    pub node: NodeId,
    pub coord: Coord,
}

impl Poi {
    pub fn on_network(id: u64, node: NodeId, network: &RoadNetwork) -> Self {
        Poi {
            id,
            node,
            coord: network.coord(node),
        }
    }
}

#[derive(Clone, Debug)]
enum Children {
    Leaf(Vec<u32>),
    Inner(Vec<u32>),
}

#[derive(Clone, Debug)]
struct TreeNode {
    mbr: Mbr,
    children: Children,
}

#[derive(Clone, Debug)]
pub struct PoiIndex {
    pois: Vec<Poi>,
    nodes: Vec<TreeNode>,
    root: Option<u32>,
    max_fanout: usize,
}

impl PoiIndex {
    pub fn build(pois: Vec<Poi>, max_fanout: usize) -> Result<Self> {
        if max_fanout < 4 {
            return Err(Error::FanoutTooSmall(max_fanout));
        }
        let mut seen = FxHashSet::default();
        for p in &pois {
            if !seen.insert(p.id) {
                return Err(Error::DuplicatePoi(p.id));
            }
        }
        let mut index = PoiIndex {
            pois,
            nodes: Vec::new(),
            root: None,
            max_fanout,
        };
        index.bulk_load();
        Ok(index)
    }

    fn bulk_load(&mut self) {
        if self.pois.is_empty() {
            return;
        }
        let entries: Vec<(u32, Coord)> = self
            .pois
            .iter()
            .enumerate()
            .map(|(i, p)| (i as u32, p.coord))
            .collect();
        let pois = &self.pois;
        let leaves: Vec<(Mbr, Vec<u32>)> =
            str_pack(entries, self.max_fanout, |i| pois[i as usize].id)
                .into_iter()
                .map(|group| {
                    let mbr = Mbr::from_points(group.iter().map(|&i| pois[i as usize].coord))
                        .expect("non-empty group");
                    (mbr, group)
                })
                .collect();
        let mut level: Vec<u32> = leaves
            .into_iter()
            .map(|(mbr, group)| self.push_node(mbr, Children::Leaf(group)))
            .collect();
        while level.len() > 1 {
            let entries: Vec<(u32, Coord)> = level
                .iter()
                .map(|&n| (n, self.nodes[n as usize].mbr.center()))
                .collect();
            level = str_pack(entries, self.max_fanout, u64::from)
                .into_iter()
                .map(|group| {
                    let mbr = group
                        .iter()
                        .map(|&c| self.nodes[c as usize].mbr)
                        .reduce(|a, b| a.union(&b))
                        .expect("non-empty group");
                    self.push_node(mbr, Children::Inner(group))
                })
                .collect();
        }
        self.root = level.first().copied();
    }

    fn push_node(&mut self, mbr: Mbr, children: Children) -> u32 {
        self.nodes.push(TreeNode { mbr, children });
        (self.nodes.len() - 1) as u32
    }

    pub fn len(&self) -> usize {
        self.pois.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pois.is_empty()
    }

    pub fn pois(&self) -> &[Poi] {
        &self.pois
    }

    pub fn max_fanout(&self) -> usize {
        self.max_fanout
    }

    /// Number of levels, counting the leaf level; zero for an empty index.
    pub fn height(&self) -> usize {
        let mut h = 0;
        let mut cur = self.root;
        while let Some(n) = cur {
            h += 1;
            cur = match &self.nodes[n as usize].children {
                Children::Inner(c) => c.first().copied(),
                Children::Leaf(_) => None,
            };
        }
        h
    }

    /// Checks fan-out bounds, MBR containment and that every POI sits in
    /// exactly one leaf.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let Some(root) = self.root else {
            return if self.pois.is_empty() {
                Ok(())
            } else {
                Err("no root for non-empty index".into())
            };
        };
        let mut seen = vec![0u32; self.pois.len()];
        let mut stack = vec![root];
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n as usize];
            let count = match &node.children {
                Children::Leaf(c) => {
                    for &p in c {
                        seen[p as usize] += 1;
                        if !node.mbr.contains_point(self.pois[p as usize].coord) {
                            return Err(format!("poi {p} outside its leaf"));
                        }
                    }
                    c.len()
                }
                Children::Inner(c) => {
                    for &child in c {
                        if !node.mbr.contains(&self.nodes[child as usize].mbr) {
                            return Err(format!("node {child} outside its parent"));
                        }
                        stack.push(child);
                    }
                    c.len()
                }
            };
            let min = if n == root { 1 } else { 2.min(self.pois.len()) };
            if count < min || count > self.max_fanout {
                return Err(format!("node {n} has {count} children"));
            }
        }
        match seen.iter().position(|&c| c != 1) {
            Some(p) => Err(format!("poi {p} appears {} times", seen[p])),
            None => Ok(()),
        }
    }

    pub fn nearest_iter(&self, query: Coord) -> NearestIterator<'_> {
        let mut heap = BinaryHeap::new();
        if let Some(root) = self.root {
            heap.push(QueueItem {
                key: self.nodes[root as usize].mbr.mindist(query),
                kind: EntryKind::Node,
                order: root as u64,
                slot: root,
            });
        }
        NearestIterator {
            index: self,
            query,
            heap,
            last_key: 0.0,
        }
    }
}

/// Sort-tile-recursive grouping of entries into runs of at most `fanout`.
///
/// Groups of a level are balanced so that every group holds at least two
/// entries whenever the level holds at least two.
fn str_pack<F: Fn(u32) -> u64>(
    mut entries: Vec<(u32, Coord)>,
    fanout: usize,
    tiebreak: F,
) -> Vec<Vec<u32>> {
    let n = entries.len();
    let groups = n.div_ceil(fanout);
    let slabs = (groups as f64).sqrt().ceil() as usize;
    let cmp = |a: &(u32, Coord), b: &(u32, Coord), by_x: bool| {
        let (ka, kb) = if by_x {
            ((a.1.x, a.1.y), (b.1.x, b.1.y))
        } else {
            ((a.1.y, a.1.x), (b.1.y, b.1.x))
        };
        ka.0.total_cmp(&kb.0)
            .then(ka.1.total_cmp(&kb.1))
            .then_with(|| tiebreak(a.0).cmp(&tiebreak(b.0)))
    };
    entries.sort_by(|a, b| cmp(a, b, true));
    let mut out = Vec::with_capacity(groups);
    // Even splits keep every group at >= 2 entries when the level has >= 2.
    for (start, len) in even_split(n, slabs) {
        let slab = &mut entries[start..start + len];
        slab.sort_by(|a, b| cmp(a, b, false));
        for (s, l) in even_split(len, len.div_ceil(fanout)) {
            out.push(slab[s..s + l].iter().map(|e| e.0).collect());
        }
    }
    out
}

/// `(start, len)` of `parts` contiguous runs covering `0..n` whose lengths
/// differ by at most one.
fn even_split(n: usize, parts: usize) -> impl Iterator<Item = (usize, usize)> {
    let base = n / parts;
    let extra = n % parts;
    (0..parts).scan(0, move |start, i| {
        let len = base + usize::from(i < extra);
        let run = (*start, len);
        *start += len;
        Some(run)
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum EntryKind {
    Node,
    Poi,
}

#[derive(Clone, Copy, Debug)]
struct QueueItem {
    key: f64,
    kind: EntryKind,
    // node index or poi id
    order: u64,
    slot: u32,
}

impl QueueItem {
    fn cmp_asc(&self, other: &Self) -> Ordering {
        self.key
            .total_cmp(&other.key)
            .then(self.kind.cmp(&other.kind))
            .then(self.order.cmp(&other.order))
    }
}

impl PartialEq for QueueItem {
    fn eq(&self, other: &Self) -> bool {
        self.cmp_asc(other) == Ordering::Equal
    }
}

impl Eq for QueueItem {}

impl PartialOrd for QueueItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QueueItem {
    // BinaryHeap is a max-heap; invert for smallest-first.
    fn cmp(&self, other: &Self) -> Ordering {
        other.cmp_asc(self)
    }
}

/// One dequeue step of a [`NearestIterator`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Retrieved<'a> {
    /// A tree node was dequeued; `expanded` is false when the caller's
    /// filter discarded it.
    Node { key: f64, mbr: Mbr, expanded: bool },
    Poi { poi: &'a Poi, key: f64 },
}

impl Retrieved<'_> {
    pub fn key(&self) -> f64 {
        match *self {
            Retrieved::Node { key, .. } | Retrieved::Poi { key, .. } => key,
        }
    }
}

/// Best-first traversal yielding POIs by increasing distance from a point.
#[derive(Debug)]
pub struct NearestIterator<'a> {
    index: &'a PoiIndex,
    query: Coord,
    heap: BinaryHeap<QueueItem>,
    last_key: f64,
}

impl<'a> NearestIterator<'a> {
    pub fn query(&self) -> Coord {
        self.query
    }

    /// Key of the most recently dequeued entry. Every entry still queued
    /// has a key at least this large.
    pub fn last_key(&self) -> f64 {
        self.last_key
    }

    pub fn is_exhausted(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn queued(&self) -> usize {
        self.heap.len()
    }

    /// Dequeues one entry, expanding tree nodes.
    pub fn pop(&mut self) -> Option<Retrieved<'a>> {
        self.pop_filtered(|_| true)
    }

    /// Dequeues one entry. Tree nodes for which `keep` returns false are
    /// dropped instead of expanded.
    pub fn pop_filtered<F: FnMut(&Mbr) -> bool>(&mut self, mut keep: F) -> Option<Retrieved<'a>> {
        let item = self.heap.pop()?;
        debug_assert!(item.key >= self.last_key);
        self.last_key = item.key;
        let index = self.index;
        match item.kind {
            EntryKind::Poi => Some(Retrieved::Poi {
                poi: &index.pois[item.slot as usize],
                key: item.key,
            }),
            EntryKind::Node => {
                let node = &index.nodes[item.slot as usize];
                let expanded = keep(&node.mbr);
                if expanded {
                    self.expand(node);
                }
                Some(Retrieved::Node {
                    key: item.key,
                    mbr: node.mbr,
                    expanded,
                })
            }
        }
    }

    fn expand(&mut self, node: &TreeNode) {
        match &node.children {
            Children::Leaf(pois) => {
                for &p in pois {
                    let poi = &self.index.pois[p as usize];
                    self.heap.push(QueueItem {
                        key: euclidean(self.query, poi.coord),
                        kind: EntryKind::Poi,
                        order: poi.id,
                        slot: p,
                    });
                }
            }
            Children::Inner(children) => {
                for &c in children {
                    self.heap.push(QueueItem {
                        key: self.index.nodes[c as usize].mbr.mindist(self.query),
                        kind: EntryKind::Node,
                        order: c as u64,
                        slot: c,
                    });
                }
            }
        }
    }

    /// Next POI and its distance from the query point.
    pub fn next_nearest(&mut self) -> Option<(&'a Poi, f64)> {
        loop {
            match self.pop()? {
                Retrieved::Poi { poi, key } => return Some((poi, key)),
                Retrieved::Node { .. } => continue,
            }
        }
    }

    /// Remaining POIs in retrieval order, consuming the queue.
    pub fn drain(mut self) -> Vec<(&'a Poi, f64)> {
        std::iter::from_fn(|| self.next_nearest()).collect()
    }
}

impl<'a> Iterator for NearestIterator<'a> {
    type Item = (&'a Poi, f64);

    fn next(&mut self) -> Option<Self::Item> {
        self.next_nearest()
    }
}

/// POIs sorted by `(distance from query, poi id)`: the order in which a
/// [`NearestIterator`] yields them.
pub fn retrieval_order(pois: &[Poi], query: Coord) -> Vec<(Poi, f64)> {
    let mut v: Vec<(Poi, f64)> = pois.iter().map(|p| (*p, euclidean(query, p.coord))).collect();
    v.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.id.cmp(&b.0.id)));
    v
}
