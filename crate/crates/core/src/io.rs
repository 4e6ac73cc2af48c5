//! Text formats for POIs, queries and results.
//!
//! * POI file: one `<poi_id> <node_id>` per line.
//! * Query file: a sequence of group records. A record is the user count
//!   `n`, then for each user the trip length `m_i` followed by `m_i` node
//!   ids. Line breaks are not significant inside a record; the writer puts
//!   `n` and each `m_i` on their own line and a trip's ids on one line.
//! * Result record: `<poi_id> <total_overhead>`, then one
//!   `<user_id> <detour_index> <detour_node> <overhead>` line per user, or
//!   the single line `infeasible`.
//!
//! Node ids in files are the ids of the node file; they pass through the
//! network's [`IdMap`]. `#` starts a comment line everywhere.
//!
//! Queries and results can also be stored as one JSON document
//! ([`QueryDocument`], [`ResultDocument`]) using dense node ids.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::network::{data_lines, parse_field, IdMap, NodeId, RoadNetwork};
use crate::poi_index::Poi;
use crate::solver::{QueryGroup, Solution, Trip};
use crate::{Error, Result};

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn resolve(ids: &IdMap, path: &Path, line: usize, original: u64) -> Result<NodeId> {
    ids.resolve(original)
        .ok_or_else(|| Error::parse(path, line, format!("unknown node {original}")))
}

pub fn parse_pois(text: &str, path: &Path, network: &RoadNetwork, ids: &IdMap) -> Result<Vec<Poi>> {
    let mut pois = Vec::new();
    for (line, l) in data_lines(text) {
        let mut it = l.split_whitespace();
        let id: u64 = parse_field(path, line, it.next(), "poi id")?;
        let node: u64 = parse_field(path, line, it.next(), "node id")?;
        if it.next().is_some() {
            return Err(Error::parse(path, line, "trailing tokens"));
        }
        pois.push(Poi::on_network(id, resolve(ids, path, line, node)?, network));
    }
    Ok(pois)
}

pub fn read_pois(path: &Path, network: &RoadNetwork, ids: &IdMap) -> Result<Vec<Poi>> {
    parse_pois(&read(path)?, path, network, ids)
}

pub fn format_pois(pois: &[Poi], ids: &IdMap) -> String {
    let mut s = String::new();
    for p in pois {
        writeln!(s, "{} {}", p.id, ids.original(p.node)).unwrap();
    }
    s
}

pub fn parse_queries(text: &str, path: &Path, ids: &IdMap) -> Result<Vec<QueryGroup>> {
    let mut tokens = data_lines(text).flat_map(|(line, l)| l.split_whitespace().map(move |t| (line, t)));
    let mut last_line = 0;
    let mut next = |what: &str| -> Result<Option<(usize, u64)>> {
        match tokens.next() {
            None => Ok(None),
            Some((line, t)) => {
                last_line = line;
                t.parse()
                    .map(|v| Some((line, v)))
                    .map_err(|_| Error::parse(path, line, format!("invalid {what} {t:?}")))
            }
        }
    };
    let mut groups = Vec::new();
    while let Some((line, n)) = next("user count")? {
        if n == 0 {
            return Err(Error::parse(path, line, "group with zero users"));
        }
        let mut trips = Vec::with_capacity(n as usize);
        for user in 0..n {
            let (line, m) = next("trip length")?
                .ok_or_else(|| Error::parse(path, line, "truncated group record"))?;
            let mut locs = Vec::with_capacity(m as usize);
            for _ in 0..m {
                let (l, node) = next("node id")?
                    .ok_or_else(|| Error::parse(path, line, "truncated trip"))?;
                locs.push(resolve(ids, path, l, node)?);
            }
            trips.push(Trip::new(user, locs).map_err(|e| Error::parse(path, line, e.to_string()))?);
        }
        groups.push(QueryGroup::new(trips).map_err(|e| Error::parse(path, line, e.to_string()))?);
    }
    Ok(groups)
}

pub fn read_queries(path: &Path, ids: &IdMap) -> Result<Vec<QueryGroup>> {
    parse_queries(&read(path)?, path, ids)
}

pub fn format_queries(groups: &[QueryGroup], ids: &IdMap) -> String {
    let mut s = String::new();
    for g in groups {
        writeln!(s, "{}", g.len()).unwrap();
        for t in g.trips() {
            writeln!(s, "{}", t.len()).unwrap();
            let locs: Vec<String> = t
                .locations
                .iter()
                .map(|&n| ids.original(n).to_string())
                .collect();
            writeln!(s, "{}", locs.join(" ")).unwrap();
        }
    }
    s
}

/// A result as written to text, with file node ids.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub meetup_poi: u64,
    pub total_overhead: f64,
    pub users: Vec<UserResult>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UserResult {
    pub user_id: u64,
    pub detour_index: usize,
    pub detour_node: u64,
    pub overhead: f64,
}

impl ResultRecord {
    pub fn from_solution(s: &Solution, ids: &IdMap) -> Self {
        ResultRecord {
            meetup_poi: s.meetup.id,
            total_overhead: s.total_overhead,
            users: s
                .detours
                .iter()
                .map(|d| UserResult {
                    user_id: d.user_id,
                    detour_index: d.index,
                    detour_node: ids.original(d.node),
                    overhead: d.overhead,
                })
                .collect(),
        }
    }
}

/// Text form of one result; `None` is written as `infeasible`.
pub fn format_result(record: Option<&ResultRecord>) -> String {
    let Some(r) = record else {
        return "infeasible\n".into();
    };
    let mut s = format!("{} {}\n", r.meetup_poi, r.total_overhead);
    for u in &r.users {
        writeln!(s, "{} {} {} {}", u.user_id, u.detour_index, u.detour_node, u.overhead).unwrap();
    }
    s
}

/// Parses consecutive result records. `group_sizes[i]` is the number of
/// user lines in record `i`.
pub fn parse_results(
    text: &str,
    path: &Path,
    group_sizes: &[usize],
) -> Result<Vec<Option<ResultRecord>>> {
    let mut lines = data_lines(text);
    let mut out = Vec::with_capacity(group_sizes.len());
    for &n in group_sizes {
        let (line, head) = lines
            .next()
            .ok_or_else(|| Error::parse(path, 0, "missing result record"))?;
        if head == "infeasible" {
            out.push(None);
            continue;
        }
        let mut it = head.split_whitespace();
        let meetup_poi = parse_field(path, line, it.next(), "poi id")?;
        let total_overhead = parse_field(path, line, it.next(), "total overhead")?;
        let mut users = Vec::with_capacity(n);
        for _ in 0..n {
            let (line, l) = lines
                .next()
                .ok_or_else(|| Error::parse(path, line, "missing user line"))?;
            let mut it = l.split_whitespace();
            users.push(UserResult {
                user_id: parse_field(path, line, it.next(), "user id")?,
                detour_index: parse_field(path, line, it.next(), "detour index")?,
                detour_node: parse_field(path, line, it.next(), "detour node")?,
                overhead: parse_field(path, line, it.next(), "overhead")?,
            });
        }
        out.push(Some(ResultRecord {
            meetup_poi,
            total_overhead,
            users,
        }));
    }
    Ok(out)
}

/// JSON document holding a list of query groups.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueryDocument {
    pub groups: Vec<QueryGroup>,
}

/// JSON document holding one result per query; `null` marks an infeasible
/// query.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub results: Vec<Option<Solution>>,
}

pub fn to_json<T: Serialize>(doc: &T) -> String {
    serde_json::to_string_pretty(doc).expect("documents serialize")
}

pub fn from_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Config(format!("json: {e}")))
}
