//! Undirected road graph with planar node coordinates.
//!
//! Adjacency is stored in compressed sparse row form. Every edge weight is
//! at least the straight-line distance between its endpoints, so network
//! distances are bounded below by Euclidean distances.

use std::collections::hash_map::Entry;
use std::fs;
use std::io::Write;
use std::path::Path;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::geometry::{euclidean, Coord, Mbr};
use crate::{Error, Result};

/// Dense index of a node in its [`RoadNetwork`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl std::fmt::Display for NodeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

/// Side length of the square that [`RoadNetwork::normalize`] maps into.
pub const NORMALIZED_EXTENT: f64 = 1000.0;

// Relative slack when validating explicit weights against the straight-line
// distance; weights inside the slack are raised to the straight-line value.
const WEIGHT_SLACK: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct RoadNetwork {
    coords: Vec<Coord>,
    offsets: Vec<usize>,
    targets: Vec<NodeId>,
    weights: Vec<f64>,
}

/// An undirected edge between two dense node ids.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub u: NodeId,
    pub v: NodeId,
    pub weight: f64,
}

impl RoadNetwork {
    /// Builds a network from coordinates and undirected edges given by dense
    /// index. A `None` weight defaults to the endpoint distance. Duplicate
    /// edges keep the smallest weight.
    pub fn from_edges<I>(coords: Vec<Coord>, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (u32, u32, Option<f64>)>,
    {
        let raw = edges
            .into_iter()
            .enumerate()
            .map(|(i, (u, v, w))| (i + 1, u as u64, v as u64, w));
        Self::build(coords, raw, |id| {
            (id < u32::MAX as u64).then_some(id as u32)
        })
    }

    fn build<I, F>(coords: Vec<Coord>, edges: I, resolve: F) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, u64, u64, Option<f64>)>,
        F: Fn(u64) -> Option<u32>,
    {
        let n = coords.len();
        let mut unique: FxHashMap<(u32, u32), f64> = FxHashMap::default();
        let mut order: Vec<(u32, u32)> = Vec::new();
        for (line, ou, ov, w) in edges {
            let u = resolve(ou)
                .filter(|&u| (u as usize) < n)
                .ok_or(Error::DanglingNode { line, node: ou })?;
            let v = resolve(ov)
                .filter(|&v| (v as usize) < n)
                .ok_or(Error::DanglingNode { line, node: ov })?;
            if u == v {
                return Err(Error::SelfLoop { line, node: ou });
            }
            let straight = euclidean(coords[u as usize], coords[v as usize]);
            let weight = match w {
                None => straight,
                Some(w) if w <= 0.0 || !w.is_finite() => {
                    return Err(Error::NonPositiveWeight {
                        line,
                        u: ou,
                        v: ov,
                        weight: w,
                    })
                }
                Some(w) if w < straight * (1.0 - WEIGHT_SLACK) => {
                    return Err(Error::WeightBelowEuclidean {
                        line,
                        u: ou,
                        v: ov,
                        weight: w,
                        euclidean: straight,
                    })
                }
                Some(w) => w.max(straight),
            };
            // A zero-length default weight happens only for coincident nodes.
            if weight.is_nan() || weight <= 0.0 {
                return Err(Error::NonPositiveWeight {
                    line,
                    u: ou,
                    v: ov,
                    weight,
                });
            }
            let key = (u.min(v), u.max(v));
            match unique.entry(key) {
                Entry::Occupied(mut e) => {
                    if weight < *e.get() {
                        e.insert(weight);
                    }
                }
                Entry::Vacant(e) => {
                    e.insert(weight);
                    order.push(key);
                }
            }
        }
        let edges: Vec<Edge> = order
            .into_iter()
            .map(|(u, v)| Edge {
                u: NodeId(u),
                v: NodeId(v),
                weight: unique[&(u, v)],
            })
            .collect();
        Ok(Self::from_validated(coords, &edges))
    }

    fn from_validated(coords: Vec<Coord>, edges: &[Edge]) -> Self {
        let n = coords.len();
        let mut degree = vec![0usize; n + 1];
        for e in edges {
            degree[e.u.index()] += 1;
            degree[e.v.index()] += 1;
        }
        let mut offsets = vec![0usize; n + 1];
        for i in 0..n {
            offsets[i + 1] = offsets[i] + degree[i];
        }
        let mut cursor = offsets.clone();
        let mut targets = vec![NodeId(0); offsets[n]];
        let mut weights = vec![0.0; offsets[n]];
        for e in edges {
            for (a, b) in [(e.u, e.v), (e.v, e.u)] {
                let slot = cursor[a.index()];
                targets[slot] = b;
                weights[slot] = e.weight;
                cursor[a.index()] += 1;
            }
        }
        RoadNetwork {
            coords,
            offsets,
            targets,
            weights,
        }
    }

    /// A `cols` x `rows` lattice with 4-neighbour edges and the given node
    /// spacing. Node `(c, r)` has id `r * cols + c` and sits at
    /// `(c * spacing, r * spacing)`.
    pub fn grid(cols: usize, rows: usize, spacing: f64) -> Self {
        assert!(cols > 0 && rows > 0 && spacing > 0.0);
        let mut coords = Vec::with_capacity(cols * rows);
        for r in 0..rows {
            for c in 0..cols {
                coords.push(Coord::new(c as f64 * spacing, r as f64 * spacing));
            }
        }
        let mut edges = Vec::with_capacity(2 * cols * rows);
        for r in 0..rows {
            for c in 0..cols {
                let id = (r * cols + c) as u32;
                if c + 1 < cols {
                    edges.push(Edge {
                        u: NodeId(id),
                        v: NodeId(id + 1),
                        weight: spacing,
                    });
                }
                if r + 1 < rows {
                    edges.push(Edge {
                        u: NodeId(id),
                        v: NodeId(id + cols as u32),
                        weight: spacing,
                    });
                }
            }
        }
        Self::from_validated(coords, &edges)
    }

    pub fn node_count(&self) -> usize {
        self.coords.len()
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    #[inline]
    pub fn coord(&self, node: NodeId) -> Coord {
        self.coords[node.index()]
    }

    pub fn coords(&self) -> &[Coord] {
        &self.coords
    }

    pub fn contains(&self, node: NodeId) -> bool {
        node.index() < self.coords.len()
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = NodeId> + '_ {
        (0..self.coords.len() as u32).map(NodeId)
    }

    #[inline]
    pub fn neighbors(&self, node: NodeId) -> impl Iterator<Item = (NodeId, f64)> + '_ {
        let range = self.offsets[node.index()]..self.offsets[node.index() + 1];
        self.targets[range.clone()]
            .iter()
            .copied()
            .zip(self.weights[range].iter().copied())
    }

    /// Each undirected edge once, with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.nodes().flat_map(move |u| {
            self.neighbors(u)
                .filter(move |(v, _)| u < *v)
                .map(move |(v, weight)| Edge { u, v, weight })
        })
    }

    pub fn bounding_box(&self) -> Option<Mbr> {
        Mbr::from_points(self.coords.iter().copied())
    }

    /// Uniformly rescales and translates coordinates so the bounding box
    /// fits in `[0, 1000]²` with its lower-left corner at the origin.
    /// Weights are scaled by the same factor. A network whose nodes all
    /// coincide is moved to the origin with weights unchanged.
    pub fn normalize(&self) -> RoadNetwork {
        let Some(bbox) = self.bounding_box() else {
            return self.clone();
        };
        let extent = bbox.width().max(bbox.height());
        let scale = if extent > 0.0 {
            NORMALIZED_EXTENT / extent
        } else {
            1.0
        };
        let coords: Vec<Coord> = self
            .coords
            .iter()
            .map(|c| Coord::new((c.x - bbox.min.x) * scale, (c.y - bbox.min.y) * scale))
            .collect();
        // Rounding in the scaled weights must not break the lower bound.
        let weights = self
            .nodes()
            .flat_map(|u| self.neighbors(u).map(move |(v, w)| (u, v, w)))
            .map(|(u, v, w)| (w * scale).max(euclidean(coords[u.index()], coords[v.index()])))
            .collect();
        RoadNetwork {
            coords,
            offsets: self.offsets.clone(),
            targets: self.targets.clone(),
            weights,
        }
    }

    /// Connected component label for every node; labels are dense and
    /// assigned in order of the smallest node id in each component.
    pub fn components(&self) -> Vec<u32> {
        let mut label = vec![u32::MAX; self.node_count()];
        let mut next = 0u32;
        let mut stack = Vec::new();
        for start in self.nodes() {
            if label[start.index()] != u32::MAX {
                continue;
            }
            label[start.index()] = next;
            stack.push(start);
            while let Some(u) = stack.pop() {
                for (v, _) in self.neighbors(u) {
                    if label[v.index()] == u32::MAX {
                        label[v.index()] = next;
                        stack.push(v);
                    }
                }
            }
            next += 1;
        }
        label
    }

    /// Writes node and edge files in the text format read by [`load_network`].
    /// Weights are always written explicitly.
    pub fn write_files(&self, node_file: &Path, edge_file: &Path) -> Result<()> {
        let mut nodes = String::new();
        for (i, c) in self.coords.iter().enumerate() {
            nodes.push_str(&format!("{i} {} {}\n", c.x, c.y));
        }
        fs::write(node_file, nodes).map_err(|e| Error::io(node_file, e))?;
        let mut out = Vec::new();
        for e in self.edges() {
            writeln!(out, "{} {} {}", e.u, e.v, e.weight).expect("write to vec");
        }
        fs::write(edge_file, out).map_err(|e| Error::io(edge_file, e))
    }
}

/// Mapping between ids used in input files and dense [`NodeId`]s.
#[derive(Clone, Debug, Default)]
pub struct IdMap {
    original: Vec<u64>,
    lookup: FxHashMap<u64, u32>,
}

impl IdMap {
    fn new(original: Vec<u64>) -> Self {
        let lookup = original
            .iter()
            .enumerate()
            .map(|(i, &o)| (o, i as u32))
            .collect();
        IdMap { original, lookup }
    }

    /// File ids equal to dense ids, for generated networks.
    pub fn identity(node_count: usize) -> Self {
        IdMap::new((0..node_count as u64).collect())
    }

    /// True when file ids already equal dense ids.
    pub fn is_identity(&self) -> bool {
        self.original.iter().enumerate().all(|(i, &o)| i as u64 == o)
    }

    pub fn resolve(&self, original: u64) -> Option<NodeId> {
        self.lookup.get(&original).map(|&i| NodeId(i))
    }

    pub fn original(&self, node: NodeId) -> u64 {
        self.original[node.index()]
    }

    /// Sidecar text: one `<dense id> <original id>` pair per line.
    pub fn to_sidecar(&self) -> String {
        let mut s = String::from("# dense_id original_id\n");
        for (i, o) in self.original.iter().enumerate() {
            s.push_str(&format!("{i} {o}\n"));
        }
        s
    }
}

/// A network read from disk together with the file-id mapping.
#[derive(Clone, Debug)]
pub struct LoadedNetwork {
    pub network: RoadNetwork,
    pub ids: IdMap,
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Non-empty, non-comment lines with their 1-based line numbers.
pub(crate) fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let t = l.trim();
        (!t.is_empty() && !t.starts_with('#')).then_some((i + 1, t))
    })
}

pub(crate) fn parse_field<T: std::str::FromStr>(
    path: &Path,
    line: usize,
    token: Option<&str>,
    what: &str,
) -> Result<T> {
    let token = token.ok_or_else(|| Error::parse(path, line, format!("missing {what}")))?;
    token
        .parse()
        .map_err(|_| Error::parse(path, line, format!("invalid {what} {token:?}")))
}

/// Reads a node file (`<id> <x> <y>`) and an edge file (`<u> <v> [w]`).
///
/// Node ids that are not exactly `0..n-1` in file order are remapped to
/// dense ids sorted by original id; `ids` records the mapping.
pub fn load_network(node_file: &Path, edge_file: &Path) -> Result<LoadedNetwork> {
    let text = read_text(node_file)?;
    let mut nodes: Vec<(u64, Coord)> = Vec::new();
    for (line, l) in data_lines(&text) {
        let mut it = l.split_whitespace();
        let id: u64 = parse_field(node_file, line, it.next(), "node id")?;
        let x: f64 = parse_field(node_file, line, it.next(), "x coordinate")?;
        let y: f64 = parse_field(node_file, line, it.next(), "y coordinate")?;
        if it.next().is_some() {
            return Err(Error::parse(node_file, line, "trailing tokens"));
        }
        let c = Coord::new(x, y);
        if !c.is_finite() {
            return Err(Error::parse(node_file, line, "non-finite coordinate"));
        }
        nodes.push((id, c));
    }
    nodes.sort_by_key(|(id, _)| *id);
    if let Some(w) = nodes.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(Error::DuplicateNode(w[0].0));
    }
    let ids = IdMap::new(nodes.iter().map(|(id, _)| *id).collect());
    let coords: Vec<Coord> = nodes.into_iter().map(|(_, c)| c).collect();

    let text = read_text(edge_file)?;
    let mut edges = Vec::new();
    for (line, l) in data_lines(&text) {
        let mut it = l.split_whitespace();
        let u: u64 = parse_field(edge_file, line, it.next(), "source node")?;
        let v: u64 = parse_field(edge_file, line, it.next(), "target node")?;
        let w: Option<f64> = match it.next() {
            Some(t) => Some(parse_field(edge_file, line, Some(t), "weight")?),
            None => None,
        };
        if it.next().is_some() {
            return Err(Error::parse(edge_file, line, "trailing tokens"));
        }
        edges.push((line, u, v, w));
    }
    let network = RoadNetwork::build(coords, edges, |o| ids.resolve(o).map(|n| n.0))?;
    Ok(LoadedNetwork { network, ids })
}
