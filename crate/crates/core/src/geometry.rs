//! Planar primitives: points, rectangles and circles.

use serde::{Deserialize, Serialize};

/// A point in the plane, in network units.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Coord {
    pub x: f64,
    pub y: f64,
}

impl Coord {
    pub const fn new(x: f64, y: f64) -> Self {
        Coord { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Arithmetic mean of a non-empty set of points.
    pub fn centroid<I: IntoIterator<Item = Coord>>(points: I) -> Option<Coord> {
        let mut count = 0usize;
        let (mut sx, mut sy) = (0.0, 0.0);
        for p in points {
            sx += p.x;
            sy += p.y;
            count += 1;
        }
        (count > 0).then(|| Coord::new(sx / count as f64, sy / count as f64))
    }
}

/// Straight-line distance.
///
/// [`Mbr::mindist`] uses the same arithmetic, so the distance to a point
/// is never smaller than the mindist of a box containing it, even after
/// rounding.
#[inline]
pub fn euclidean(a: Coord, b: Coord) -> f64 {
    let dx = a.x - b.x;
    let dy = a.y - b.y;
    (dx * dx + dy * dy).sqrt()
}

/// Axis-aligned minimum bounding rectangle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mbr {
    pub min: Coord,
    pub max: Coord,
}

impl Mbr {
    pub fn new(min: Coord, max: Coord) -> Self {
        debug_assert!(min.x <= max.x && min.y <= max.y);
        Mbr { min, max }
    }

    pub fn point(p: Coord) -> Self {
        Mbr { min: p, max: p }
    }

    pub fn from_points<I: IntoIterator<Item = Coord>>(points: I) -> Option<Self> {
        let mut it = points.into_iter();
        let first = it.next()?;
        Some(it.fold(Mbr::point(first), |acc, p| acc.union(&Mbr::point(p))))
    }

    pub fn union(&self, other: &Mbr) -> Mbr {
        Mbr {
            min: Coord::new(self.min.x.min(other.min.x), self.min.y.min(other.min.y)),
            max: Coord::new(self.max.x.max(other.max.x), self.max.y.max(other.max.y)),
        }
    }

    pub fn contains_point(&self, p: Coord) -> bool {
        self.min.x <= p.x && p.x <= self.max.x && self.min.y <= p.y && p.y <= self.max.y
    }

    pub fn contains(&self, other: &Mbr) -> bool {
        self.contains_point(other.min) && self.contains_point(other.max)
    }

    pub fn center(&self) -> Coord {
        Coord::new(
            (self.min.x + self.max.x) / 2.0,
            (self.min.y + self.max.y) / 2.0,
        )
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    /// Smallest Euclidean distance from `q` to any point of the box; zero
    /// when `q` is inside.
    #[inline]
    pub fn mindist(&self, q: Coord) -> f64 {
        let dx = if q.x < self.min.x {
            self.min.x - q.x
        } else if q.x > self.max.x {
            q.x - self.max.x
        } else {
            0.0
        };
        let dy = if q.y < self.min.y {
            self.min.y - q.y
        } else if q.y > self.max.y {
            q.y - self.max.y
        } else {
            0.0
        };
        (dx * dx + dy * dy).sqrt()
    }
}

/// Closed disc. The radius may be `+inf`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    pub center: Coord,
    pub radius: f64,
}

impl Circle {
    pub fn new(center: Coord, radius: f64) -> Self {
        debug_assert!(radius >= 0.0);
        Circle { center, radius }
    }

    pub fn unbounded(center: Coord) -> Self {
        Circle {
            center,
            radius: f64::INFINITY,
        }
    }

    pub fn contains(&self, p: Coord) -> bool {
        euclidean(self.center, p) <= self.radius
    }

    /// True if some point of `mbr` may lie inside the disc.
    pub fn may_intersect(&self, mbr: &Mbr) -> bool {
        mbr.mindist(self.center) <= self.radius
    }
}
