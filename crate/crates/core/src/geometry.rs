//! Circle geometry for trilateral centroid localization.
//!
//! Circles are centered on beacon positions with the measured distance as
//! radius. [`circle_pair`] classifies a pair by how many intersection points
//! it has, [`classify_triple`] assigns a triple to one of the four
//! relationship cases, and [`triple_reference`] turns a triple into a single
//! reference coordinate for the mobile node.

use serde::{Deserialize, Serialize};
use std::fmt;

/// Default geometric tolerance, in cm.
pub const DEFAULT_EPS: f64 = 1e-6;

/// A point in the plane, coordinates in cm.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2D {
    pub x: f64,
    pub y: f64,
}

impl Point2D {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point2D) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn midpoint(&self, other: &Point2D) -> Point2D {
        Point2D::new((self.x + other.x) / 2.0, (self.y + other.y) / 2.0)
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Point2D {
        Point2D::new(self.x + dx, self.y + dy)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    fn lex_cmp(&self, other: &Point2D) -> std::cmp::Ordering {
        self.x.total_cmp(&other.x).then(self.y.total_cmp(&other.y))
    }
}

impl fmt::Display for Point2D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:.3}, {:.3})", self.x, self.y)
    }
}

/// A beacon position with the measured distance to the mobile node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle {
    pub center: Point2D,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("circle radius must be positive and finite, got {0}")]
    InvalidRadius(f64),
    #[error("circle center must be finite")]
    InvalidCenter,
    #[error("test area must satisfy min < max componentwise")]
    InvalidArea,
}

impl Circle {
    pub fn new(center: Point2D, radius: f64) -> Result<Self, GeometryError> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(GeometryError::InvalidRadius(radius));
        }
        if !center.is_finite() {
            return Err(GeometryError::InvalidCenter);
        }
        Ok(Self { center, radius })
    }

    /// Absolute distance of `p` from the circle's boundary.
    pub fn residual(&self, p: &Point2D) -> f64 {
        (p.distance(&self.center) - self.radius).abs()
    }
}

/// Axis-aligned rectangle the mobile node is known to be in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestArea {
    pub min: Point2D,
    pub max: Point2D,
}

impl TestArea {
    pub fn new(min: Point2D, max: Point2D) -> Result<Self, GeometryError> {
        if !(min.is_finite() && max.is_finite() && min.x < max.x && min.y < max.y) {
            return Err(GeometryError::InvalidArea);
        }
        Ok(Self { min, max })
    }

    /// Closed-rectangle containment.
    pub fn contains(&self, p: &Point2D) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn translate(&self, dx: f64, dy: f64) -> TestArea {
        TestArea {
            min: self.min.translate(dx, dy),
            max: self.max.translate(dx, dy),
        }
    }
}

/// How two circles relate. The `isHI` encoding is 1, 0 and -1 respectively.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PairRelation {
    /// Two distinct intersections, lexicographically ordered by `(x, y)`.
    Two(Point2D, Point2D),
    /// Tangent circles.
    One(Point2D),
    /// Disjoint, nested or concentric.
    None,
}

impl PairRelation {
    pub fn is_hi(&self) -> i8 {
        match self {
            PairRelation::Two(..) => 1,
            PairRelation::One(_) => 0,
            PairRelation::None => -1,
        }
    }

    pub fn intersects(&self) -> bool {
        !matches!(self, PairRelation::None)
    }

    pub fn points(&self) -> Vec<Point2D> {
        match *self {
            PairRelation::Two(p, q) => vec![p, q],
            PairRelation::One(p) => vec![p],
            PairRelation::None => Vec::new(),
        }
    }
}

/// Intersect two circles.
///
/// The inputs are put into a canonical order first so that `circle_pair(a, b)`
/// and `circle_pair(b, a)` return bit-identical results.
pub fn circle_pair(a: &Circle, b: &Circle, eps: f64) -> PairRelation {
    let key = |c: &Circle| (c.center.x, c.center.y, c.radius);
    let (a, b) = {
        let (ka, kb) = (key(a), key(b));
        let a_first =
            ka.0.total_cmp(&kb.0)
                .then(ka.1.total_cmp(&kb.1))
                .then(ka.2.total_cmp(&kb.2))
                .is_le();
        if a_first {
            (a, b)
        } else {
            (b, a)
        }
    };

    let dx = b.center.x - a.center.x;
    let dy = b.center.y - a.center.y;
    let d = dx.hypot(dy);
    let (ra, rb) = (a.radius, b.radius);
    let sum = ra + rb;
    let diff = (ra - rb).abs();

    if d <= eps || d > sum + eps || d < diff - eps {
        return PairRelation::None;
    }

    let (ux, uy) = (dx / d, dy / d);
    // Signed distance from a's center to the chord midpoint along a -> b.
    let along = (d * d + ra * ra - rb * rb) / (2.0 * d);

    if (d - sum).abs() <= eps || (d - diff).abs() <= eps {
        return PairRelation::One(Point2D::new(
            a.center.x + ux * along,
            a.center.y + uy * along,
        ));
    }

    let h = (ra * ra - along * along).max(0.0).sqrt();
    let mx = a.center.x + ux * along;
    let my = a.center.y + uy * along;
    let p = Point2D::new(mx - uy * h, my + ux * h);
    let q = Point2D::new(mx + uy * h, my - ux * h);
    if p.lex_cmp(&q).is_le() {
        PairRelation::Two(p, q)
    } else {
        PairRelation::Two(q, p)
    }
}

/// The pairwise relations of circles `(a, b, c)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TripleRelations {
    pub ab: PairRelation,
    pub bc: PairRelation,
    pub ac: PairRelation,
}

impl TripleRelations {
    pub fn compute(circles: &[Circle; 3], eps: f64) -> Self {
        let [a, b, c] = circles;
        Self {
            ab: circle_pair(a, b, eps),
            bc: circle_pair(b, c, eps),
            ac: circle_pair(a, c, eps),
        }
    }

    fn intersecting_count(&self) -> usize {
        [self.ab, self.bc, self.ac]
            .iter()
            .filter(|r| r.intersects())
            .count()
    }
}

/// Relationship of three circles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TripleClass {
    /// One point lies on all three circles.
    CommonPoint,
    /// All three pairs intersect and bound a region.
    Region,
    /// Exactly two pairs intersect.
    Line,
    /// Exactly one pair intersects.
    TwoOnly,
    /// No pair intersects; the triple is ignored.
    NoIntersection,
}

fn common_points(circles: &[Circle; 3], rel: &TripleRelations, eps: f64) -> Vec<Point2D> {
    if rel.intersecting_count() < 3 {
        return Vec::new();
    }
    rel.ab
        .points()
        .into_iter()
        .filter(|p| circles[2].residual(p) <= eps)
        .collect()
}

pub fn classify_triple(circles: &[Circle; 3], rel: &TripleRelations, eps: f64) -> TripleClass {
    match rel.intersecting_count() {
        3 if !common_points(circles, rel, eps).is_empty() => TripleClass::CommonPoint,
        3 => TripleClass::Region,
        2 => TripleClass::Line,
        1 => TripleClass::TwoOnly,
        _ => TripleClass::NoIntersection,
    }
}

fn closer_to(target: &Point2D, p: Point2D, q: Point2D) -> Point2D {
    if p.distance(target) <= q.distance(target) {
        p
    } else {
        q
    }
}

/// Pick one intersection of a pair: the one inside the area if exactly one
/// is, otherwise the one closer to `third_center`.
fn select_point(rel: &PairRelation, area: &TestArea, third_center: &Point2D) -> Option<Point2D> {
    match *rel {
        PairRelation::None => None,
        PairRelation::One(p) => Some(p),
        PairRelation::Two(p, q) => Some(match (area.contains(&p), area.contains(&q)) {
            (true, false) => p,
            (false, true) => q,
            _ => closer_to(third_center, p, q),
        }),
    }
}

/// A triple's reference coordinate before weighting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TripleReference {
    pub point: Point2D,
    /// Smallest of the three radii.
    pub mr_cm: f64,
    pub class: TripleClass,
}

/// Reference coordinate for one triple, or `None` if no pair intersects.
pub fn triple_reference(
    circles: &[Circle; 3],
    rel: &TripleRelations,
    area: &TestArea,
    eps: f64,
) -> Option<TripleReference> {
    let [a, b, c] = circles;
    let class = classify_triple(circles, rel, eps);
    // (relation, the circle not in the pair)
    let pairs = [(&rel.ab, c), (&rel.bc, a), (&rel.ac, b)];

    let point = match class {
        TripleClass::NoIntersection => return None,
        TripleClass::CommonPoint => {
            let mut candidates = common_points(circles, rel, eps);
            candidates.sort_by(|p, q| area.contains(q).cmp(&area.contains(p)).then(p.lex_cmp(q)));
            candidates[0]
        }
        TripleClass::Region => {
            let chosen: Vec<Point2D> = pairs
                .iter()
                .filter_map(|(r, third)| select_point(r, area, &third.center))
                .collect();
            let n = chosen.len() as f64;
            Point2D::new(
                chosen.iter().map(|p| p.x).sum::<f64>() / n,
                chosen.iter().map(|p| p.y).sum::<f64>() / n,
            )
        }
        TripleClass::Line => {
            let chosen: Vec<Point2D> = pairs
                .iter()
                .filter_map(|(r, third)| select_point(r, area, &third.center))
                .collect();
            chosen[0].midpoint(&chosen[1])
        }
        TripleClass::TwoOnly => {
            let (rel, third) = pairs
                .iter()
                .find(|(r, _)| r.intersects())
                .expect("exactly one pair intersects");
            let third_center = &third.center;
            let p = match **rel {
                PairRelation::Two(p, q) => closer_to(third_center, p, q),
                PairRelation::One(p) => p,
                PairRelation::None => unreachable!(),
            };
            let to_p = p.distance(third_center);
            if to_p > third.radius {
                // Line through P and the third center meets the circle between them.
                let s = third.radius / to_p;
                let q = Point2D::new(
                    third_center.x + (p.x - third_center.x) * s,
                    third_center.y + (p.y - third_center.y) * s,
                );
                p.midpoint(&q)
            } else {
                p
            }
        }
    };

    Some(TripleReference {
        point,
        mr_cm: a.radius.min(b.radius).min(c.radius),
        class,
    })
}
