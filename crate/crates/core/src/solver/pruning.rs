//! Search-area geometry.
//!
//! Once a candidate meetup with total overhead `TO` is known, three circle
//! families around the users' centroids bound where a strictly better POI
//! can lie:
//!
//! * S1, union of circles with radius `TO/(2n) + mdist/2 + cdist`;
//! * S2, union of circles with radius `TO_i/2 + mdist/2 + cdist`, using the
//!   current best's per-user overhead;
//! * S3, intersection of circles with radius `TO + T_i`.
//!
//! A POI outside any enabled family cannot improve on the current best.

use serde::{Deserialize, Serialize};

use crate::geometry::{euclidean, Circle, Coord, Mbr};
use crate::solver::TripStats;

/// Which search-area families are in force.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Pruning {
    pub pt1: bool,
    pub pt2: bool,
    pub pt3: bool,
}

impl Pruning {
    pub const ALL: Pruning = Pruning {
        pt1: true,
        pt2: true,
        pt3: true,
    };
    pub const NONE: Pruning = Pruning {
        pt1: false,
        pt2: false,
        pt3: false,
    };

    /// The eight subsets, from none to all.
    pub fn subsets() -> [Pruning; 8] {
        let p = |pt1, pt2, pt3| Pruning { pt1, pt2, pt3 };
        [
            p(false, false, false),
            p(true, false, false),
            p(false, true, false),
            p(false, false, true),
            p(true, true, false),
            p(true, false, true),
            p(false, true, true),
            p(true, true, true),
        ]
    }

    pub fn is_subset_of(&self, other: &Pruning) -> bool {
        (!self.pt1 || other.pt1) && (!self.pt2 || other.pt2) && (!self.pt3 || other.pt3)
    }

    /// `PT1+PT2+PT3`, `PT2` or `none`.
    pub fn label(&self) -> String {
        let names: Vec<&str> = [(self.pt1, "PT1"), (self.pt2, "PT2"), (self.pt3, "PT3")]
            .into_iter()
            .filter_map(|(on, name)| on.then_some(name))
            .collect();
        if names.is_empty() {
            "none".into()
        } else {
            names.join("+")
        }
    }
}

impl Default for Pruning {
    fn default() -> Self {
        Pruning::ALL
    }
}

pub fn pt1_radius(stats: &TripStats, group_size: usize, best_total: f64) -> f64 {
    best_total / (2.0 * group_size as f64) + stats.mdist / 2.0 + stats.cdist
}

pub fn pt2_radius(stats: &TripStats, best_user_overhead: f64) -> f64 {
    best_user_overhead / 2.0 + stats.mdist / 2.0 + stats.cdist
}

pub fn pt3_radius(stats: &TripStats, best_total: f64) -> f64 {
    best_total + stats.trip_distance
}

/// Circle at the global centroid inside which every POI has already been
/// retrieved.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KnownArea {
    pub center: Coord,
    pub radius: f64,
}

impl KnownArea {
    pub fn new(center: Coord) -> Self {
        KnownArea {
            center,
            radius: 0.0,
        }
    }

    pub fn expand_to(&mut self, radius: f64) {
        debug_assert!(radius >= self.radius);
        self.radius = self.radius.max(radius);
    }

    /// Strict internal containment of `circle`.
    pub fn covers(&self, circle: &Circle) -> bool {
        circle.radius.is_finite()
            && euclidean(self.center, circle.center) + circle.radius < self.radius
    }
}

/// The S1, S2 and S3 circle families, one circle per user in each.
#[derive(Clone, Debug, PartialEq)]
pub struct SearchAreas {
    pub s1: Vec<Circle>,
    pub s2: Vec<Circle>,
    pub s3: Vec<Circle>,
}

impl SearchAreas {
    /// Unbounded circles centred on each user's centroid.
    pub fn unbounded(stats: &[TripStats]) -> Self {
        let circles: Vec<Circle> = stats.iter().map(|s| Circle::unbounded(s.centroid)).collect();
        SearchAreas {
            s1: circles.clone(),
            s2: circles.clone(),
            s3: circles,
        }
    }

    /// Shrinks the circles after a better meetup with total overhead
    /// `best_total` and per-user overheads `best_per_user` was found.
    /// `scale` multiplies every radius; anything other than 1 makes the
    /// areas unsound and exists for exercising verification harnesses.
    pub fn update(
        &mut self,
        stats: &[TripStats],
        best_total: f64,
        best_per_user: &[f64],
        scale: f64,
    ) {
        let n = stats.len();
        for (i, s) in stats.iter().enumerate() {
            self.s1[i].radius = scale * pt1_radius(s, n, best_total);
            self.s2[i].radius = scale * pt2_radius(s, best_per_user[i]);
            self.s3[i].radius = scale * pt3_radius(s, best_total);
        }
    }

    /// True if `p` lies in the intersection of the enabled families.
    pub fn is_candidate(&self, p: Coord, pruning: Pruning) -> bool {
        let in_union = |cs: &[Circle]| cs.iter().any(|c| c.contains(p));
        (!pruning.pt1 || in_union(&self.s1))
            && (!pruning.pt2 || in_union(&self.s2))
            && (!pruning.pt3 || self.s3.iter().all(|c| c.contains(p)))
    }

    /// True if some point of `mbr` may lie in the intersection of the
    /// enabled families.
    pub fn may_contain(&self, mbr: &Mbr, pruning: Pruning) -> bool {
        let any = |cs: &[Circle]| cs.iter().any(|c| c.may_intersect(mbr));
        (!pruning.pt1 || any(&self.s1))
            && (!pruning.pt2 || any(&self.s2))
            && (!pruning.pt3 || self.s3.iter().all(|c| c.may_intersect(mbr)))
    }

    /// Sufficient condition for `known` to cover the intersection of the
    /// enabled families: it strictly contains every S1 circle, or every S2
    /// circle, or any single S3 circle. Each of these regions contains the
    /// intersection.
    pub fn covered_by(&self, known: &KnownArea, pruning: Pruning) -> bool {
        let all = |cs: &[Circle]| cs.iter().all(|c| known.covers(c));
        (pruning.pt1 && all(&self.s1))
            || (pruning.pt2 && all(&self.s2))
            || (pruning.pt3 && self.s3.iter().any(|c| known.covers(c)))
    }
}
