//! Seeded generation of POI sets, query areas and query groups.
//!
//! Randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng`). A generator
//! for `(seed, stream, purpose)` is `ChaCha8Rng::seed_from_u64(seed)` with
//! its stream set to `stream * 4 + purpose`, where purpose is 0 for POIs,
//! 1 for the query area, 2 for trips and 3 for drawing the workload
//! parameters themselves (used by randomized verification). Streams are independent, so
//! repetitions can be generated in any order or in parallel.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{Coord, Mbr};
use crate::network::{NodeId, RoadNetwork};
use crate::poi_index::Poi;
use crate::solver::{QueryGroup, Trip};
use crate::{Error, Result};

/// Attempts per placement before giving up.
pub const RETRY_BUDGET: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Pois = 0,
    Area = 1,
    Trips = 2,
    Params = 3,
}

pub fn rng_for(seed: u64, stream: u64, purpose: Purpose) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream.wrapping_mul(4).wrapping_add(purpose as u64));
    rng
}

/// Query workload parameters. Defaults: `n = 6`, `m = 6`, 1% POI density,
/// 50-unit query area.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorkloadSpec {
    /// Group size.
    pub n: usize,
    /// Trip length.
    pub m: usize,
    /// POIs as a fraction of network nodes.
    pub rho: f64,
    /// Side of the square query area, in network units.
    pub qa: f64,
    pub seed: u64,
    pub repetitions: usize,
}

impl Default for WorkloadSpec {
    fn default() -> Self {
        WorkloadSpec {
            n: 6,
            m: 6,
            rho: 0.01,
            qa: 50.0,
            seed: 1,
            repetitions: 30,
        }
    }
}

impl WorkloadSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidWorkload(msg));
        if self.n < 1 {
            return bad(format!("n must be >= 1, got {}", self.n));
        }
        if self.m < 2 {
            return bad(format!("m must be >= 2, got {}", self.m));
        }
        if !(self.rho > 0.0 && self.rho <= 1.0) {
            return bad(format!("rho must be in (0, 1], got {}", self.rho));
        }
        if !(self.qa > 0.0 && self.qa <= 1000.0) {
            return bad(format!("qa must be in (0, 1000], got {}", self.qa));
        }
        Ok(())
    }

    /// Reads `n`, `m`, `rho`, `qa`, `seed` and `reps` from a key/value map;
    /// missing keys keep their defaults and unknown keys are ignored.
    pub fn from_config(cfg: &Config) -> Result<Self> {
        let d = WorkloadSpec::default();
        let spec = WorkloadSpec {
            n: cfg.get_or("n", d.n)?,
            m: cfg.get_or("m", d.m)?,
            rho: cfg.get_or("rho", d.rho)?,
            qa: cfg.get_or("qa", d.qa)?,
            seed: cfg.get_or("seed", d.seed)?,
            repetitions: cfg.get_or("reps", d.repetitions)?,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_config(&self) -> Config {
        let mut c = Config::default();
        c.set("n", self.n);
        c.set("m", self.m);
        c.set("rho", self.rho);
        c.set("qa", self.qa);
        c.set("seed", self.seed);
        c.set("reps", self.repetitions);
        c
    }
}

/// Flat `key=value` configuration. Blank lines and `#` comments are
/// ignored; later keys override earlier ones.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Config {
    entries: BTreeMap<String, String>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (line, l) in crate::network::data_lines(text) {
            let (k, v) = l
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {line}: expected key=value")))?;
            let k = k.trim();
            if k.is_empty() {
                return Err(Error::Config(format!("line {line}: empty key")));
            }
            entries.insert(k.to_string(), v.trim().to_string());
        }
        Ok(Config { entries })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| Error::Config(format!("invalid value for {key}: {v:?}"))),
        }
    }

    /// Comma-separated list.
    pub fn get_list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>> {
        let Some(v) = self.get(key) else {
            return Ok(None);
        };
        v.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse()
                    .map_err(|_| Error::Config(format!("invalid item in {key}: {s:?}")))
            })
            .collect::<Result<Vec<T>>>()
            .map(Some)
    }

    pub fn set(&mut self, key: &str, value: impl fmt::Display) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}

impl fmt::Display for Config {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in &self.entries {
            writeln!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

/// Number of POIs for density `rho`: `rho * v` rounded to the nearest
/// integer, at least one.
pub fn poi_count(node_count: usize, rho: f64) -> usize {
    ((rho * node_count as f64).round() as usize).clamp(1, node_count.max(1))
}

/// Samples distinct nodes uniformly without replacement. POI ids are
/// `0..count` in ascending node order.
pub fn generate_pois<R: Rng + ?Sized>(
    network: &RoadNetwork,
    rho: f64,
    rng: &mut R,
) -> Result<Vec<Poi>> {
    if network.is_empty() {
        return Err(Error::InvalidWorkload("network has no nodes".into()));
    }
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::InvalidWorkload(format!("rho must be in (0, 1], got {rho}")));
    }
    let count = poi_count(network.node_count(), rho);
    let mut nodes: Vec<u32> = index::sample(rng, network.node_count(), count)
        .into_iter()
        .map(|i| i as u32)
        .collect();
    nodes.sort_unstable();
    Ok(nodes
        .into_iter()
        .enumerate()
        .map(|(i, n)| Poi::on_network(i as u64, NodeId(n), network))
        .collect())
}

fn nodes_in(network: &RoadNetwork, area: &Mbr) -> Vec<NodeId> {
    network
        .nodes()
        .filter(|&n| area.contains_point(network.coord(n)))
        .collect()
}

/// Places a `side` x `side` square uniformly inside the network's bounding
/// box so that it holds at least `min_nodes` nodes. When the side exceeds
/// the box in some dimension the square is anchored at the box minimum.
pub fn place_query_area<R: Rng + ?Sized>(
    network: &RoadNetwork,
    side: f64,
    min_nodes: usize,
    rng: &mut R,
) -> Result<Mbr> {
    if side.is_nan() || side <= 0.0 {
        return Err(Error::InvalidWorkload(format!("query area side must be positive, got {side}")));
    }
    let bbox = network
        .bounding_box()
        .ok_or_else(|| Error::InvalidWorkload("network has no nodes".into()))?;
    let origin = |lo: f64, extent: f64, rng: &mut R| {
        if side < extent {
            rng.random_range(lo..=lo + extent - side)
        } else {
            lo
        }
    };
    for _ in 0..RETRY_BUDGET {
        let x = origin(bbox.min.x, bbox.width(), rng);
        let y = origin(bbox.min.y, bbox.height(), rng);
        let area = Mbr::new(Coord::new(x, y), Coord::new(x + side, y + side));
        let inside = network
            .nodes()
            .filter(|&n| area.contains_point(network.coord(n)))
            .take(min_nodes)
            .count();
        if inside >= min_nodes {
            return Ok(area);
        }
    }
    Err(Error::RetryExhausted {
        what: "query area placement",
        attempts: RETRY_BUDGET,
    })
}

/// `n` trips of `m` distinct nodes drawn from `area`, each trip within one
/// connected component. `components` is [`RoadNetwork::components`].
pub fn generate_group<R: Rng + ?Sized>(
    network: &RoadNetwork,
    components: &[u32],
    area: &Mbr,
    n: usize,
    m: usize,
    rng: &mut R,
) -> Result<QueryGroup> {
    if n < 1 || m < 2 {
        return Err(Error::InvalidWorkload(format!("need n >= 1 and m >= 2, got n={n} m={m}")));
    }
    let candidates = nodes_in(network, area);
    if candidates.len() < m {
        return Err(Error::InvalidWorkload(format!(
            "query area holds {} nodes, trips need {m}",
            candidates.len()
        )));
    }
    let mut trips = Vec::with_capacity(n);
    for user in 0..n {
        let mut trip = None;
        for _ in 0..RETRY_BUDGET {
            let locs: Vec<NodeId> = index::sample(rng, candidates.len(), m)
                .into_iter()
                .map(|i| candidates[i])
                .collect();
            let c = components[locs[0].index()];
            if locs.iter().all(|l| components[l.index()] == c) {
                trip = Some(locs);
                break;
            }
        }
        let locs = trip.ok_or(Error::RetryExhausted {
            what: "connected trip sampling",
            attempts: RETRY_BUDGET,
        })?;
        trips.push(Trip::new(user as u64, locs)?);
    }
    QueryGroup::new(trips)
}

/// A generated query with its POI set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub pois: Vec<Poi>,
    pub area: Mbr,
    pub group: QueryGroup,
}

/// Generates the instance for `stream` of `seed`: POIs, then a query area
/// with room for `n * m` nodes, then the trips.
pub fn generate_instance(
    network: &RoadNetwork,
    components: &[u32],
    spec: &WorkloadSpec,
    stream: u64,
) -> Result<Instance> {
    spec.validate()?;
    let pois = generate_pois(network, spec.rho, &mut rng_for(spec.seed, stream, Purpose::Pois))?;
    let area = place_query_area(
        network,
        spec.qa,
        spec.n * spec.m,
        &mut rng_for(spec.seed, stream, Purpose::Area),
    )?;
    let group = generate_group(
        network,
        components,
        &area,
        spec.n,
        spec.m,
        &mut rng_for(spec.seed, stream, Purpose::Trips),
    )?;
    Ok(Instance { pois, area, group })
}
