use std::fmt;

use serde::{Deserialize, Serialize};

use super::grid::Point;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// `{x : x_axis < offset}`
    Below,
    /// `{x : x_axis > offset}`
    Above,
}

impl Side {
    pub fn flip(self) -> Side {
        match self {
            Side::Below => Side::Above,
            Side::Above => Side::Below,
        }
    }
}

/// Open sets used as supports, observation sets, and cutoff carriers.
#[derive(Clone, Debug, PartialEq)]
pub enum Region {
    HalfSpace { axis: usize, side: Side, offset: f64 },
    Ball { center: Point, radius: f64 },
    Complement(Box<Region>),
    /// Minkowski sum `inner + B_radius(0)`.
    Dilation(Box<Region>, f64),
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Region::HalfSpace { axis, side: Side::Below, offset } => write!(f, "{{x{} < {}}}", axis + 1, offset),
            Region::HalfSpace { axis, side: Side::Above, offset } => write!(f, "{{x{} > {}}}", axis + 1, offset),
            Region::Ball { center, radius } => write!(f, "B(({}, {}), {})", center[0], center[1], radius),
            Region::Complement(inner) => write!(f, "complement({inner})"),
            Region::Dilation(inner, r) => write!(f, "({inner} + B_{r})"),
        }
    }
}

impl Region {
    pub fn half_space(axis: usize, side: Side, offset: f64) -> Result<Region> {
        if axis > 1 {
            return Err(Error::InvalidRegion(format!("axis {axis} out of range")));
        }
        Ok(Region::HalfSpace { axis, side, offset })
    }

    pub fn above(axis: usize, offset: f64) -> Region {
        Region::HalfSpace { axis, side: Side::Above, offset }
    }

    pub fn below(axis: usize, offset: f64) -> Region {
        Region::HalfSpace { axis, side: Side::Below, offset }
    }

    pub fn ball(center: Point, radius: f64) -> Result<Region> {
        if !(radius > 0.0) {
            return Err(Error::InvalidRegion(format!("ball radius must be positive, got {radius}")));
        }
        Ok(Region::Ball { center, radius })
    }

    pub fn complement(self) -> Region {
        Region::Complement(Box::new(self))
    }

    pub fn dilate(self, radius: f64) -> Result<Region> {
        if !(radius >= 0.0) {
            return Err(Error::InvalidRegion(format!("dilation radius must be >= 0, got {radius}")));
        }
        Ok(Region::Dilation(Box::new(self), radius))
    }

    /// Signed distance, negative inside. Exact for half-spaces, balls and the
    /// complements/dilations built from them.
    pub fn signed_distance(&self, p: Point) -> f64 {
        match self {
            Region::HalfSpace { axis, side, offset } => match side {
                Side::Below => p[*axis] - offset,
                Side::Above => offset - p[*axis],
            },
            Region::Ball { center, radius } => {
                let dx = p[0] - center[0];
                let dy = p[1] - center[1];
                (dx * dx + dy * dy).sqrt() - radius
            }
            Region::Complement(inner) => -inner.signed_distance(p),
            Region::Dilation(inner, r) => inner.signed_distance(p) - r,
        }
    }

    /// Node-sampled membership. Sets are open; complements are closed.
    pub fn contains(&self, p: Point) -> bool {
        match self {
            Region::Complement(inner) => !inner.contains(p),
            Region::Dilation(inner, r) => {
                if *r == 0.0 {
                    inner.contains(p)
                } else {
                    inner.signed_distance(p) < *r
                }
            }
            _ => self.signed_distance(p) < 0.0,
        }
    }

    /// Euclidean distance from a point to the set (zero inside).
    pub fn distance_to(&self, p: Point) -> f64 {
        self.signed_distance(p).max(0.0)
    }

    fn canonical(&self) -> Option<Shape> {
        Some(match self {
            Region::HalfSpace { axis, side, offset } => Shape::Half { axis: *axis, side: *side, offset: *offset },
            Region::Ball { center, radius } => Shape::Ball { center: *center, radius: *radius },
            Region::Complement(inner) => match inner.canonical()? {
                Shape::Half { axis, side, offset } => Shape::Half { axis, side: side.flip(), offset },
                Shape::Ball { center, radius } => Shape::Exterior { center, radius },
                Shape::Exterior { center, radius } => Shape::Ball { center, radius },
            },
            Region::Dilation(inner, r) => match inner.canonical()? {
                Shape::Half { axis, side: Side::Below, offset } => Shape::Half { axis, side: Side::Below, offset: offset + r },
                Shape::Half { axis, side: Side::Above, offset } => Shape::Half { axis, side: Side::Above, offset: offset - r },
                Shape::Ball { center, radius } => Shape::Ball { center, radius: radius + r },
                Shape::Exterior { center, radius } if radius > *r => Shape::Exterior { center, radius: radius - r },
                Shape::Exterior { .. } => return None,
            },
        })
    }
}

/// Normal forms with closed-form pairwise distances.
#[derive(Clone, Copy, Debug)]
enum Shape {
    Half { axis: usize, side: Side, offset: f64 },
    Ball { center: Point, radius: f64 },
    /// Complement of a closed ball.
    Exterior { center: Point, radius: f64 },
}

fn dist_points(a: Point, b: Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

fn shape_distance(a: Shape, b: Shape) -> f64 {
    use Shape::*;
    let d = match (a, b) {
        (Half { axis: a1, side: s1, offset: c1 }, Half { axis: a2, side: s2, offset: c2 }) => {
            if a1 != a2 || s1 == s2 {
                0.0
            } else if s1 == Side::Below {
                c2 - c1
            } else {
                c1 - c2
            }
        }
        (Ball { center, radius }, Half { axis, side, offset }) | (Half { axis, side, offset }, Ball { center, radius }) => {
            match side {
                Side::Below => center[axis] - radius - offset,
                Side::Above => offset - center[axis] - radius,
            }
        }
        (Ball { center: c1, radius: r1 }, Ball { center: c2, radius: r2 }) => dist_points(c1, c2) - r1 - r2,
        (Ball { center: c1, radius: r1 }, Exterior { center: c2, radius: r2 })
        | (Exterior { center: c2, radius: r2 }, Ball { center: c1, radius: r1 }) => r2 - dist_points(c1, c2) - r1,
        (Exterior { .. }, _) | (_, Exterior { .. }) => 0.0,
    };
    d.max(0.0)
}

/// Exact Euclidean distance between two supported regions.
///
/// Supported: pairs of half-spaces, balls, ball exteriors (and the dilations
/// and complements reducing to them), plus any region against the complement
/// of its own dilation.
pub fn region_distance(a: &Region, b: &Region) -> Result<f64> {
    if let Some(r) = dilation_complement_gap(a, b).or_else(|| dilation_complement_gap(b, a)) {
        return Ok(r);
    }
    match (a.canonical(), b.canonical()) {
        (Some(sa), Some(sb)) => Ok(shape_distance(sa, sb)),
        _ => Err(Error::NoAnalyticDistance(a.to_string(), b.to_string())),
    }
}

fn dilation_complement_gap(a: &Region, b: &Region) -> Option<f64> {
    if let Region::Complement(inner) = b {
        if let Region::Dilation(base, r) = inner.as_ref() {
            if base.as_ref() == a {
                return Some(*r);
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separated_half_spaces() {
        let d = 6.0;
        let a = Region::below(0, -d / 2.0);
        let b = Region::above(0, d / 2.0);
        assert_eq!(region_distance(&a, &b).unwrap(), 6.0);
        let a = Region::below(0, -3.0);
        let b = Region::above(0, 0.0);
        assert_eq!(region_distance(&a, &b).unwrap(), 3.0);
        assert_eq!(region_distance(&b, &a).unwrap(), 3.0);
    }

    #[test]
    fn ball_and_half_space() {
        let a = Region::ball([0.0, 0.0], 1.0).unwrap();
        let b = Region::above(0, 4.0);
        assert_eq!(region_distance(&a, &b).unwrap(), 3.0);
        assert_eq!(region_distance(&b, &a).unwrap(), 3.0);
        let c = Region::below(0, -0.5);
        assert_eq!(region_distance(&a, &c).unwrap(), 0.0);
    }

    #[test]
    fn balls_and_exteriors() {
        let a = Region::ball([0.0, 0.0], 1.0).unwrap();
        let b = Region::ball([3.0, 4.0], 2.0).unwrap();
        assert!((region_distance(&a, &b).unwrap() - 2.0).abs() < 1e-15);
        let ext = Region::ball([0.0, 0.0], 5.0).unwrap().complement();
        assert_eq!(region_distance(&a, &ext).unwrap(), 4.0);
    }

    #[test]
    fn dilation_complement_of_anything() {
        let a = Region::ball([0.0, 0.0], 1.0).unwrap();
        let c = a.clone().dilate(2.5).unwrap().complement();
        assert_eq!(region_distance(&a, &c).unwrap(), 2.5);
        let h = Region::below(1, 0.0);
        let hc = h.clone().dilate(1.0).unwrap().complement();
        assert_eq!(region_distance(&hc, &h).unwrap(), 1.0);
    }

    #[test]
    fn perpendicular_half_spaces_intersect() {
        assert_eq!(region_distance(&Region::above(0, 5.0), &Region::below(1, -5.0)).unwrap(), 0.0);
    }

    #[test]
    fn unsupported_pair_is_an_error() {
        let a = Region::ball([0.0, 0.0], 1.0).unwrap();
        // exterior of a ball dilated past its radius is all of space: no normal form
        let weird = Region::ball([0.0, 0.0], 1.0).unwrap().complement().dilate(2.0).unwrap();
        assert!(matches!(region_distance(&a, &weird), Err(Error::NoAnalyticDistance(..))));
    }

    #[test]
    fn membership_and_complement_partition() {
        let r = Region::above(0, 0.0);
        assert!(!r.contains([0.0, 0.0]));
        assert!(r.clone().complement().contains([0.0, 0.0]));
        let d = Region::ball([0.0, 0.0], 1.0).unwrap().dilate(1.0).unwrap();
        assert!(d.contains([1.9, 0.0]));
        assert!(!d.contains([2.0, 0.0]));
        assert!(Region::ball([0.0, 0.0], -1.0).is_err());
        assert!(Region::ball([0.0, 0.0], 0.0).is_err());
    }
}
