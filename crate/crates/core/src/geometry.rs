//! Points, compact regions of R^d and the distances between them.
//!
//! Every region kind is nonempty, closed and bounded. Point/set and set/set
//! distances have closed forms for all kind pairs. The supremum-type
//! quantities also have closed forms except for a few one-sided Hausdorff
//! deviations (ball into box, continuous region into cloud), which are
//! evaluated on a deterministic covering grid. Such values come back as an
//! [`Estimate`] carrying the covering radius of the grid, so the true value
//! lies in `[value, value + resolution]`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

/// Default absolute tolerance for equality and membership tests.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Upper bound on the number of points in a covering grid.
const COVERING_BUDGET: usize = 4096;

/// Box vertex enumeration is used up to this dimension.
const MAX_VERTEX_DIM: usize = 16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("point must have at least one coordinate")]
    EmptyPoint,
    #[error("coordinate {axis} is not finite")]
    NonFinite { axis: usize },
    #[error("invalid region: {0}")]
    InvalidRegion(String),
}

pub type Result<T> = std::result::Result<T, GeometryError>;

/// A point of R^d with finite coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Point(Vec<f64>);

impl serde::Serialize for Point {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(GeometryError::EmptyPoint);
        }
        if let Some(axis) = coords.iter().position(|c| !c.is_finite()) {
            return Err(GeometryError::NonFinite { axis });
        }
        Ok(Point(coords))
    }

    /// Builds a point from coordinates already known to be finite.
    pub(crate) fn from_raw(coords: Vec<f64>) -> Self {
        debug_assert!(!coords.is_empty() && coords.iter().all(|c| c.is_finite()));
        Point(coords)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }

    /// True when every coordinate differs by at most `tol`.
    pub fn approx_eq(&self, other: &Point, tol: f64) -> bool {
        self.dim() == other.dim() && self.0.iter().zip(&other.0).all(|(a, b)| (a - b).abs() <= tol)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(GeometryError::DimensionMismatch { expected, found })
    }
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn norm(v: impl Iterator<Item = f64>) -> f64 {
    v.map(|x| x * x).sum::<f64>().sqrt()
}

/// Euclidean distance between two points.
pub fn metric(x: &Point, y: &Point) -> Result<f64> {
    check_dim(x.dim(), y.dim())?;
    Ok(euclid(&x.0, &y.0))
}

/// A nonempty compact subset of R^d.
#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    /// Closed interval of the real line.
    Interval { lower: f64, upper: f64 },
    /// Axis-aligned box `[lower, upper]`.
    Cuboid { lower: Vec<f64>, upper: Vec<f64> },
    /// Closed Euclidean ball.
    Ball { center: Point, radius: f64 },
    /// Finite point set.
    Cloud(Vec<Point>),
}

impl Region {
    pub fn interval(lower: f64, upper: f64) -> Result<Self> {
        if !lower.is_finite() || !upper.is_finite() {
            return Err(GeometryError::InvalidRegion("interval bounds must be finite".into()));
        }
        if lower > upper {
            return Err(GeometryError::InvalidRegion(format!(
                "interval lower bound {lower} exceeds upper bound {upper}"
            )));
        }
        Ok(Region::Interval { lower, upper })
    }

    pub fn cuboid(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() {
            return Err(GeometryError::EmptyPoint);
        }
        check_dim(lower.len(), upper.len())?;
        for (axis, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !lo.is_finite() || !hi.is_finite() {
                return Err(GeometryError::NonFinite { axis });
            }
            if lo > hi {
                return Err(GeometryError::InvalidRegion(format!(
                    "box axis {axis}: lower bound {lo} exceeds upper bound {hi}"
                )));
            }
        }
        Ok(Region::Cuboid { lower, upper })
    }

    pub fn ball(center: Point, radius: f64) -> Result<Self> {
        if !radius.is_finite() || radius < 0.0 {
            return Err(GeometryError::InvalidRegion(format!(
                "ball radius must be finite and nonnegative, got {radius}"
            )));
        }
        Ok(Region::Ball { center, radius })
    }

    pub fn cloud(points: Vec<Point>) -> Result<Self> {
        let first = points
            .first()
            .ok_or_else(|| GeometryError::InvalidRegion("cloud must contain a point".into()))?;
        let d = first.dim();
        for p in &points {
            check_dim(d, p.dim())?;
        }
        Ok(Region::Cloud(points))
    }

    /// The singleton `{p}`.
    pub fn singleton(p: Point) -> Self {
        Region::Cloud(vec![p])
    }

    pub fn dim(&self) -> usize {
        match self {
            Region::Interval { .. } => 1,
            Region::Cuboid { lower, .. } => lower.len(),
            Region::Ball { center, .. } => center.dim(),
            Region::Cloud(points) => points[0].dim(),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Region::Interval { .. } => "interval",
            Region::Cuboid { .. } => "box",
            Region::Ball { .. } => "ball",
            Region::Cloud(_) => "cloud",
        }
    }

    /// Clouds are convex only when they hold a single distinct point.
    pub fn is_convex(&self) -> bool {
        match self {
            Region::Cloud(points) => points.iter().all(|p| p == &points[0]),
            _ => true,
        }
    }

    fn bounds(&self) -> Option<(&[f64], &[f64])> {
        match self {
            Region::Interval { lower, upper } => {
                Some((std::slice::from_ref(lower), std::slice::from_ref(upper)))
            }
            Region::Cuboid { lower, upper } => Some((lower, upper)),
            _ => None,
        }
    }

    pub fn contains(&self, x: &Point, tol: f64) -> Result<bool> {
        Ok(point_to_set_distance(x, self)? <= tol)
    }
}

fn box_distance(x: &[f64], lower: &[f64], upper: &[f64]) -> f64 {
    norm(x.iter().zip(lower.iter().zip(upper)).map(|(&c, (&lo, &hi))| (lo - c).max(c - hi).max(0.0)))
}

/// Distance from a point to the farthest point of a box.
fn box_far(x: &[f64], lower: &[f64], upper: &[f64]) -> f64 {
    norm(x.iter().zip(lower.iter().zip(upper)).map(|(&c, (&lo, &hi))| (c - lo).abs().max((hi - c).abs())))
}

fn point_to_set_raw(x: &[f64], a: &Region) -> f64 {
    if let Some((lower, upper)) = a.bounds() {
        return box_distance(x, lower, upper);
    }
    match a {
        Region::Ball { center, radius } => (euclid(x, &center.0) - radius).max(0.0),
        Region::Cloud(points) => points.iter().map(|p| euclid(x, &p.0)).fold(f64::INFINITY, f64::min),
        _ => unreachable!(),
    }
}

/// Distance from a point to its farthest point in `a`.
fn point_to_set_far(x: &[f64], a: &Region) -> f64 {
    if let Some((lower, upper)) = a.bounds() {
        return box_far(x, lower, upper);
    }
    match a {
        Region::Ball { center, radius } => euclid(x, &center.0) + radius,
        Region::Cloud(points) => points.iter().map(|p| euclid(x, &p.0)).fold(0.0, f64::max),
        _ => unreachable!(),
    }
}

/// `inf_{a in A} d(x, a)`.
pub fn point_to_set_distance(x: &Point, a: &Region) -> Result<f64> {
    check_dim(a.dim(), x.dim())?;
    Ok(point_to_set_raw(&x.0, a))
}

/// A point of `a` closest to `x`. Cloud ties go to the lowest index.
pub fn nearest_point(x: &Point, a: &Region) -> Result<Point> {
    check_dim(a.dim(), x.dim())?;
    if let Some((lower, upper)) = a.bounds() {
        let clamped =
            x.0.iter().zip(lower.iter().zip(upper)).map(|(&c, (&lo, &hi))| c.clamp(lo, hi)).collect();
        return Ok(Point::from_raw(clamped));
    }
    Ok(match a {
        Region::Ball { center, radius } => {
            let dist = euclid(&x.0, &center.0);
            if dist <= *radius {
                x.clone()
            } else {
                let scale = radius / dist;
                Point::from_raw(center.0.iter().zip(&x.0).map(|(c, v)| c + (v - c) * scale).collect())
            }
        }
        Region::Cloud(points) => {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (i, p) in points.iter().enumerate() {
                let d = euclid(&x.0, &p.0);
                if d < best_d {
                    best = i;
                    best_d = d;
                }
            }
            points[best].clone()
        }
        _ => unreachable!(),
    })
}

/// `inf_{a in A, b in B} d(a, b)`. Exact for every kind pair.
pub fn set_distance(a: &Region, b: &Region) -> Result<f64> {
    check_dim(a.dim(), b.dim())?;
    if let Region::Cloud(points) = a {
        return Ok(points.iter().map(|p| point_to_set_raw(&p.0, b)).fold(f64::INFINITY, f64::min));
    }
    if let Region::Cloud(_) = b {
        return set_distance(b, a);
    }
    Ok(match (a, b) {
        (Region::Ball { center: c1, radius: r1 }, Region::Ball { center: c2, radius: r2 }) => {
            (euclid(&c1.0, &c2.0) - r1 - r2).max(0.0)
        }
        (Region::Ball { center, radius }, other) | (other, Region::Ball { center, radius }) => {
            (point_to_set_raw(&center.0, other) - radius).max(0.0)
        }
        _ => {
            let (l1, u1) = a.bounds().unwrap();
            let (l2, u2) = b.bounds().unwrap();
            norm((0..l1.len()).map(|i| (l2[i] - u1[i]).max(l1[i] - u2[i]).max(0.0)))
        }
    })
}

/// `sup_{a in A, b in B} d(a, b)`. Exact for every kind pair.
pub fn sup_deviation(a: &Region, b: &Region) -> Result<f64> {
    check_dim(a.dim(), b.dim())?;
    if let Region::Cloud(points) = a {
        return Ok(points.iter().map(|p| point_to_set_far(&p.0, b)).fold(0.0, f64::max));
    }
    if let Region::Cloud(_) = b {
        return sup_deviation(b, a);
    }
    Ok(match (a, b) {
        (Region::Ball { center, radius }, other) | (other, Region::Ball { center, radius }) => {
            point_to_set_far(&center.0, other) + radius
        }
        _ => {
            let (l1, u1) = a.bounds().unwrap();
            let (l2, u2) = b.bounds().unwrap();
            norm((0..l1.len()).map(|i| (u2[i] - l1[i]).abs().max((u1[i] - l2[i]).abs())))
        }
    })
}

/// `sup_deviation(A, A)`.
pub fn diameter(a: &Region) -> f64 {
    match a {
        Region::Interval { lower, upper } => upper - lower,
        Region::Cuboid { lower, upper } => norm(lower.iter().zip(upper).map(|(l, u)| u - l)),
        Region::Ball { radius, .. } => 2.0 * radius,
        Region::Cloud(points) => {
            let mut best: f64 = 0.0;
            for (i, p) in points.iter().enumerate() {
                for q in &points[i + 1..] {
                    best = best.max(euclid(&p.0, &q.0));
                }
            }
            best
        }
    }
}

/// A computed supremum together with a bound on its discretization error:
/// the exact quantity lies in `[value, value + resolution]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub resolution: f64,
}

impl Estimate {
    fn exact(value: f64) -> Self {
        Estimate { value, resolution: 0.0 }
    }

    pub fn is_exact(&self) -> bool {
        self.resolution == 0.0
    }
}

fn box_vertices<'a>(lower: &'a [f64], upper: &'a [f64]) -> impl Iterator<Item = Vec<f64>> + 'a {
    let d = lower.len();
    (0u64..1 << d)
        .map(move |mask| (0..d).map(|i| if mask >> i & 1 == 1 { upper[i] } else { lower[i] }).collect())
}

fn grid_points_per_axis(d: usize) -> Option<usize> {
    let mut m = 2usize;
    if (m as f64).powi(d as i32) > COVERING_BUDGET as f64 {
        return None;
    }
    while ((m + 1) as f64).powi(d as i32) <= COVERING_BUDGET as f64 {
        m += 1;
    }
    Some(m)
}

fn grid_over(lower: &[f64], upper: &[f64], m: usize) -> Vec<Vec<f64>> {
    let d = lower.len();
    let total = m.pow(d as u32);
    (0..total)
        .map(|mut idx| {
            (0..d)
                .map(|i| {
                    let c = idx % m;
                    idx /= m;
                    lower[i] + (upper[i] - lower[i]) * c as f64 / (m - 1) as f64
                })
                .collect()
        })
        .collect()
}

/// Points of `a` such that every point of `a` lies within the returned
/// radius of one of them.
fn covering(a: &Region) -> (Vec<Vec<f64>>, f64) {
    match a {
        Region::Cloud(points) => (points.iter().map(|p| p.0.clone()).collect(), 0.0),
        Region::Ball { center, radius } => {
            let d = center.dim();
            match grid_points_per_axis(d) {
                Some(m) => {
                    let lower: Vec<f64> = center.0.iter().map(|c| c - radius).collect();
                    let upper: Vec<f64> = center.0.iter().map(|c| c + radius).collect();
                    let cell = 2.0 * radius / (m - 1) as f64;
                    let pts = grid_over(&lower, &upper, m)
                        .into_iter()
                        .map(|g| {
                            let dist = euclid(&g, &center.0);
                            if dist <= *radius {
                                g
                            } else {
                                let s = radius / dist;
                                center.0.iter().zip(&g).map(|(c, v)| c + (v - c) * s).collect()
                            }
                        })
                        .collect();
                    // Projection onto the ball is nonexpansive, so the grid's
                    // half-diagonal still covers.
                    (pts, 0.5 * cell * (d as f64).sqrt())
                }
                None => {
                    let pts = sample(a, COVERING_BUDGET, 0).into_iter().map(|p| p.0).collect();
                    (pts, diameter(a))
                }
            }
        }
        _ => {
            let (lower, upper) = a.bounds().unwrap();
            match grid_points_per_axis(lower.len()) {
                Some(m) => {
                    let half_diag =
                        0.5 * norm(lower.iter().zip(upper).map(|(l, u)| (u - l) / (m - 1) as f64));
                    (grid_over(lower, upper, m), half_diag)
                }
                None => {
                    let pts = sample(a, COVERING_BUDGET, 0).into_iter().map(|p| p.0).collect();
                    (pts, diameter(a))
                }
            }
        }
    }
}

/// One-sided deviation `sup_{a in A} d(a, B)`.
pub fn directed_hausdorff(a: &Region, b: &Region) -> Result<Estimate> {
    check_dim(a.dim(), b.dim())?;
    let sup_over =
        |pts: &mut dyn Iterator<Item = Vec<f64>>| pts.map(|p| point_to_set_raw(&p, b)).fold(0.0, f64::max);
    if let Region::Cloud(points) = a {
        return Ok(Estimate::exact(points.iter().map(|p| point_to_set_raw(&p.0, b)).fold(0.0, f64::max)));
    }
    let b_convex = !matches!(b, Region::Cloud(_));
    // d(., B) is convex for convex B, so its maximum over a box is at a vertex.
    if let (Some((lower, upper)), true) = (a.bounds(), b_convex) {
        if lower.len() <= MAX_VERTEX_DIM {
            return Ok(Estimate::exact(sup_over(&mut box_vertices(lower, upper))));
        }
    }
    if let (Region::Ball { center: c1, radius: r1 }, Region::Ball { center: c2, radius: r2 }) = (a, b) {
        return Ok(Estimate::exact((euclid(&c1.0, &c2.0) + r1 - r2).max(0.0)));
    }
    // A ball on the line is a segment.
    if let (Region::Ball { center, radius }, true) = (a, b_convex) {
        if center.dim() == 1 {
            let c = center.0[0];
            return Ok(Estimate::exact(sup_over(&mut [vec![c - radius], vec![c + radius]].into_iter())));
        }
    }
    let (pts, resolution) = covering(a);
    Ok(Estimate { value: sup_over(&mut pts.into_iter()), resolution })
}

/// Hausdorff distance with its discretization bound.
pub fn hausdorff_estimate(a: &Region, b: &Region) -> Result<Estimate> {
    let ab = directed_hausdorff(a, b)?;
    let ba = directed_hausdorff(b, a)?;
    Ok(Estimate { value: ab.value.max(ba.value), resolution: ab.resolution.max(ba.resolution) })
}

/// `max(sup_{a in A} d(a, B), sup_{b in B} d(b, A))`.
pub fn hausdorff(a: &Region, b: &Region) -> Result<f64> {
    Ok(hausdorff_estimate(a, b)?.value)
}

/// Set distance, Hausdorff distance and sup-deviation of a pair of regions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SetMetrics {
    pub distance: f64,
    pub hausdorff: f64,
    pub sup_deviation: f64,
}

pub fn set_metrics(a: &Region, b: &Region) -> Result<SetMetrics> {
    Ok(SetMetrics {
        distance: set_distance(a, b)?,
        hausdorff: hausdorff(a, b)?,
        sup_deviation: sup_deviation(a, b)?,
    })
}

/// Deterministic sample of `n` members of `a`.
///
/// Intervals give a uniform grid including both endpoints, boxes a
/// stratified grid with jitter, balls rejection sampling from the bounding
/// box, clouds their first `min(n, len)` points.
pub fn sample(a: &Region, n: usize, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match a {
        Region::Interval { lower, upper } => match n {
            0 => Vec::new(),
            1 => vec![Point::from_raw(vec![0.5 * (lower + upper)])],
            _ => (0..n)
                .map(|i| {
                    let t = i as f64 / (n - 1) as f64;
                    Point::from_raw(vec![lower + (upper - lower) * t])
                })
                .collect(),
        },
        Region::Cuboid { lower, upper } => stratified(lower, upper, n, &mut rng),
        Region::Ball { center, radius } => (0..n).map(|_| ball_point(center, *radius, &mut rng)).collect(),
        Region::Cloud(points) => points.iter().take(n).cloned().collect(),
    }
}

fn stratified(lower: &[f64], upper: &[f64], n: usize, rng: &mut ChaCha8Rng) -> Vec<Point> {
    let d = lower.len();
    let m = (n as f64).powf(1.0 / d as f64).ceil().max(1.0) as u128;
    let total = m.checked_pow(d as u32).filter(|t| *t < u64::MAX as u128);
    let Some(total) = total else {
        // Too many strata to index; plain uniform draws.
        return (0..n)
            .map(|_| {
                Point::from_raw((0..d).map(|i| lower[i] + (upper[i] - lower[i]) * rng.gen::<f64>()).collect())
            })
            .collect();
    };
    (0..n)
        .map(|i| {
            let mut cell = (i as u128 * total) / n as u128;
            let coords = (0..d)
                .map(|axis| {
                    let c = (cell % m) as f64;
                    cell /= m;
                    let width = (upper[axis] - lower[axis]) / m as f64;
                    let v = lower[axis] + (c + rng.gen::<f64>()) * width;
                    v.clamp(lower[axis], upper[axis])
                })
                .collect();
            Point::from_raw(coords)
        })
        .collect()
}

fn ball_point(center: &Point, radius: f64, rng: &mut ChaCha8Rng) -> Point {
    let d = center.dim();
    if radius == 0.0 {
        return center.clone();
    }
    if d <= 4 {
        loop {
            let offset: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            if norm(offset.iter().copied()) <= 1.0 {
                return Point::from_raw(center.0.iter().zip(&offset).map(|(c, o)| c + radius * o).collect());
            }
        }
    }
    // Rejection degrades quickly with dimension; draw a direction and a
    // radius instead.
    let dir: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let len = norm(dir.iter().copied()).max(f64::MIN_POSITIVE);
    let r = radius * rng.gen::<f64>().powf(1.0 / d as f64);
    Point::from_raw(center.0.iter().zip(&dir).map(|(c, u)| c + r * u / len).collect())
}
