//! Order-respecting iteration `x_{n+1} ∈ T x_n` and its convergence
//! diagnostics.
//!
//! A trajectory starting in subset `i` visits `i, i+1, …` cyclically. For
//! every subset `j` the elements sitting in `A_j` form the subsequence
//! `{x_{np+j}}`; the distance between consecutive elements of that
//! subsequence is its Cauchy increment. A run stops once the latest
//! increment of every subsequence is within tolerance, and the last element
//! of each subsequence is then taken as its limit.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::checks::proximity_residual;
use crate::geometry::{metric, nearest_point, point_to_set_distance, sample, GeometryError, Point};
use crate::order::{verify_chain, ChainCheck, OrderRelation, OrderThresholds};
use crate::system::{CyclicSystem, SystemError};

pub const DEFAULT_MAX_STEPS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error(transparent)]
    System(#[from] SystemError),
    #[error("non-finite coordinates produced at step {step}")]
    NonFinite { step: usize },
    #[error("max_steps ({max_steps}) must be at least the number of subsets ({p})")]
    TooFewSteps { max_steps: usize, p: usize },
    #[error("trajectory did not converge")]
    NotConverged,
    #[error("map image is empty")]
    EmptyImage,
}

impl From<GeometryError> for EngineError {
    fn from(e: GeometryError) -> Self {
        EngineError::System(e.into())
    }
}

impl EngineError {
    pub(crate) fn into_system(self) -> SystemError {
        match self {
            EngineError::System(e) => e,
            other => SystemError::Geometry(GeometryError::InvalidRegion(other.to_string())),
        }
    }
}

/// Rule choosing one successor out of the image `Tx`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SelectionStrategy {
    /// Point of `Tx` closest to `x`.
    #[default]
    Nearest,
    /// Closest among `samples` sampled image points `y` with `x ⪯ y`;
    /// falls back to `Nearest` when none is comparable.
    OrderGreedy { samples: usize },
    /// Uniform choice among `samples` sampled image points.
    SeededRandom { samples: usize },
}

impl SelectionStrategy {
    pub fn kind_name(&self) -> &'static str {
        match self {
            SelectionStrategy::Nearest => "nearest",
            SelectionStrategy::OrderGreedy { .. } => "order_greedy",
            SelectionStrategy::SeededRandom { .. } => "random",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub point: Point,
    /// Set when order-greedy found no comparable candidate.
    pub fallback: bool,
}

/// Picks a point of `Tx` for `x` sitting at position `subset`.
pub fn select_successor(
    sys: &CyclicSystem,
    order: &OrderRelation,
    strategy: &SelectionStrategy,
    subset: usize,
    x: &Point,
    seed: u64,
) -> Result<Selection, EngineError> {
    let image = sys.apply_at(subset, x)?;
    match *strategy {
        SelectionStrategy::Nearest => Ok(Selection { point: nearest_point(x, &image)?, fallback: false }),
        SelectionStrategy::OrderGreedy { samples } => {
            let mut best: Option<(f64, Point)> = None;
            for y in sample(&image, samples.max(1), seed) {
                if order.leq(x, &y)? {
                    let d = metric(x, &y)?;
                    if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
                        best = Some((d, y));
                    }
                }
            }
            Ok(match best {
                Some((_, point)) => Selection { point, fallback: false },
                None => Selection { point: nearest_point(x, &image)?, fallback: true },
            })
        }
        SelectionStrategy::SeededRandom { samples } => {
            let mut candidates = sample(&image, samples.max(1), seed);
            if candidates.is_empty() {
                return Err(EngineError::EmptyImage);
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
            let pick = rng.gen_range(0..candidates.len());
            Ok(Selection { point: candidates.swap_remove(pick), fallback: false })
        }
    }
}

/// Applies `times` selections starting from `x` at position `subset` and
/// returns the point reached and its position.
pub fn composite_apply_at(
    sys: &CyclicSystem,
    order: &OrderRelation,
    strategy: &SelectionStrategy,
    subset: usize,
    x: &Point,
    times: usize,
    seed: u64,
) -> Result<(Point, usize), EngineError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut i = subset % sys.len();
    let mut x = x.clone();
    for _ in 0..times {
        x = select_successor(sys, order, strategy, i, &x, rng.next_u64())?.point;
        i = sys.next(i);
    }
    Ok((x, i))
}

/// `composite_apply_at` from the first subset containing `x`.
pub fn composite_apply(
    sys: &CyclicSystem,
    order: &OrderRelation,
    strategy: &SelectionStrategy,
    x: &Point,
    times: usize,
    seed: u64,
) -> Result<Point, EngineError> {
    let i = sys.subset_index(x)?;
    Ok(composite_apply_at(sys, order, strategy, i, x, times, seed)?.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub max_steps: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { max_steps: DEFAULT_MAX_STEPS, tol: crate::geometry::DEFAULT_TOL, seed: 0 }
    }
}

/// An iterated sequence with its per-step records.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub points: Vec<Point>,
    /// 0-based subset position of each point.
    pub subsets: Vec<usize>,
    /// `d(x_n, x_{n+1})`.
    pub step_distances: Vec<f64>,
    /// Whether the order-induction rule fired for step `n`.
    pub order_certified: Vec<bool>,
    /// Whether step `n` used the order-greedy fallback.
    pub fallbacks: Vec<bool>,
    pub converged: bool,
    pub p: usize,
    pub tol: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn start_subset(&self) -> usize {
        self.subsets[0]
    }

    /// Elements sitting in subset `j`, in order.
    pub fn subsequence(&self, j: usize) -> Vec<Point> {
        self.points.iter().zip(&self.subsets).filter(|(_, s)| **s == j).map(|(x, _)| x.clone()).collect()
    }

    pub fn cauchy_increments(&self, j: usize) -> Vec<f64> {
        self.subsequence(j).windows(2).map(|w| metric(&w[0], &w[1]).expect("same dimension")).collect()
    }

    /// Last element of subsequence `j`, once the run has converged.
    pub fn limit(&self, j: usize) -> Option<&Point> {
        if !self.converged {
            return None;
        }
        self.points.iter().zip(&self.subsets).rev().find(|(_, s)| **s == j).map(|(x, _)| x)
    }

    fn settled(&self) -> bool {
        let n = self.points.len();
        let p = self.p;
        if n < 2 * p {
            return false;
        }
        (n - p..n).all(|m| metric(&self.points[m], &self.points[m - p]).expect("same dimension") <= self.tol)
    }
}

/// Iterates the selection rule from `x0` until every subsequence settles
/// or `max_steps` map applications have been made.
pub fn run_trajectory(
    sys: &CyclicSystem,
    order: &OrderRelation,
    thresholds: &OrderThresholds,
    strategy: &SelectionStrategy,
    x0: &Point,
    cfg: &RunConfig,
) -> Result<Trajectory, EngineError> {
    let p = sys.len();
    if cfg.max_steps < p {
        return Err(EngineError::TooFewSteps { max_steps: cfg.max_steps, p });
    }
    let start = sys.subset_index(x0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut traj = Trajectory {
        points: vec![x0.clone()],
        subsets: vec![start],
        step_distances: Vec::new(),
        order_certified: Vec::new(),
        fallbacks: Vec::new(),
        converged: false,
        p,
        tol: cfg.tol,
    };
    let mut x = x0.clone();
    let mut i = start;
    for step in 0..cfg.max_steps {
        let sel = select_successor(sys, order, strategy, i, &x, rng.next_u64()).map_err(|e| match e {
            EngineError::System(SystemError::Geometry(GeometryError::NonFinite { .. })) => {
                EngineError::NonFinite { step }
            }
            e => e,
        })?;
        if !sel.point.is_finite() {
            return Err(EngineError::NonFinite { step });
        }
        let d = metric(&x, &sel.point)?;
        traj.step_distances.push(d);
        traj.order_certified.push(thresholds.induces_order(true, d));
        traj.fallbacks.push(sel.fallback);
        i = sys.next(i);
        x = sel.point;
        traj.points.push(x.clone());
        traj.subsets.push(i);
        if traj.settled() {
            traj.converged = true;
            break;
        }
    }
    Ok(traj)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BandState {
    /// Above the band before it has been entered.
    PreBand,
    InBand,
    Violation,
}

/// Step distances against the band `[D_i − tol, D + tol]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandRecord {
    pub states: Vec<BandState>,
    pub entry_step: Option<usize>,
    pub violations: Vec<usize>,
    /// `D = 0`: the band collapses to a point and is reached only in the
    /// limit.
    pub degenerate: bool,
}

impl BandRecord {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Classifies every step distance against the quasi-proximity band. The
/// lower bound applies to every step, the upper bound only from the first
/// step inside the band on.
pub fn quasi_proximity_check(traj: &Trajectory, sys: &CyclicSystem) -> BandRecord {
    let upper = sys.max_gap() + traj.tol;
    let mut states = Vec::with_capacity(traj.step_distances.len());
    let mut entry_step = None;
    let mut violations = Vec::new();
    for (n, &d) in traj.step_distances.iter().enumerate() {
        let lower = sys.gap(traj.subsets[n]) - traj.tol;
        let state = if d < lower {
            BandState::Violation
        } else if d <= upper {
            entry_step.get_or_insert(n);
            BandState::InBand
        } else if entry_step.is_some() {
            BandState::Violation
        } else {
            BandState::PreBand
        };
        if state == BandState::Violation {
            violations.push(n);
        }
        states.push(state);
    }
    BandRecord { states, entry_step, violations, degenerate: sys.max_gap() <= traj.tol }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converged,
    Incomplete,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubsetSummary {
    /// 1-based.
    pub subset: usize,
    pub status: Status,
    pub elements: usize,
    pub final_increment: Option<f64>,
    pub limit: Option<Point>,
    /// `D_j`.
    pub gap: f64,
    /// `d(x̄_j, x̄_{j+1})`.
    pub adjacent_distance: Option<f64>,
    /// `|d(x̄_j, x̄_{j+1}) − D_j|`.
    pub pairing_residual: Option<f64>,
    /// Distance from `x̄_j` to the image reached after `p` steps from it.
    pub composite_residual: Option<f64>,
    /// `|d(x̄_j, T x̄_j) − D_j|`.
    pub proximity_residual: Option<f64>,
    pub chain_ordered: bool,
    pub chain_first_violation: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandSummary {
    pub holds: bool,
    pub entry_step: Option<usize>,
    pub violations: usize,
    pub first_violation: Option<usize>,
    pub degenerate: bool,
}

impl From<&BandRecord> for BandSummary {
    fn from(b: &BandRecord) -> Self {
        BandSummary {
            holds: b.holds(),
            entry_step: b.entry_step,
            violations: b.violations.len(),
            first_violation: b.violations.first().copied(),
            degenerate: b.degenerate,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedPointEstimate {
    pub point: Point,
    /// `d(x̄, T x̄)`.
    pub residual: f64,
}

/// Limit estimates and residuals of one trajectory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProximityReport {
    pub status: Status,
    pub start: Point,
    pub start_subset: usize,
    pub steps: usize,
    pub subsets: Vec<SubsetSummary>,
    pub band: BandSummary,
    /// All gaps equal, so step distances themselves tend to `D`.
    pub uniform_gap: bool,
    pub final_step_distance: Option<f64>,
    pub order_certified_steps: usize,
    pub fallback_steps: usize,
    /// Present when every gap vanishes.
    pub fixed_point: Option<FixedPointEstimate>,
}

impl ProximityReport {
    pub fn converged(&self) -> bool {
        self.status == Status::Converged
    }

    pub fn subset(&self, j: usize) -> &SubsetSummary {
        &self.subsets[j]
    }
}

/// Builds the convergence report for a finished trajectory.
pub fn convergence_report(
    traj: &Trajectory,
    sys: &CyclicSystem,
    order: &OrderRelation,
    strategy: &SelectionStrategy,
    seed: u64,
) -> Result<ProximityReport, EngineError> {
    let p = sys.len();
    let tol = traj.tol;
    let status = if traj.converged { Status::Converged } else { Status::Incomplete };
    let mut subsets = Vec::with_capacity(p);
    for j in 0..p {
        let seq = traj.subsequence(j);
        let incs = traj.cauchy_increments(j);
        let final_increment = incs.last().copied();
        let chain: ChainCheck = verify_chain(order, &seq)?;
        let limit = traj.limit(j).cloned();
        let (composite_residual, proximity) = match &limit {
            Some(z) => {
                let (back, at) = composite_apply_at(sys, order, strategy, j, z, p - 1, seed)?;
                let image = sys.apply_at(at, &back)?;
                (Some(point_to_set_distance(z, &image)?), Some(proximity_residual(sys, j, z)?))
            }
            None => (None, None),
        };
        subsets.push(SubsetSummary {
            subset: j + 1,
            status: if limit.is_some() { Status::Converged } else { Status::Incomplete },
            elements: seq.len(),
            final_increment,
            limit,
            gap: sys.gap(j),
            adjacent_distance: None,
            pairing_residual: None,
            composite_residual,
            proximity_residual: proximity,
            chain_ordered: chain.ordered,
            chain_first_violation: chain.first_violation,
        });
    }
    for j in 0..p {
        let next = sys.next(j);
        if let (Some(a), Some(b)) = (&subsets[j].limit, &subsets[next].limit) {
            let d = metric(a, b)?;
            subsets[j].adjacent_distance = Some(d);
            subsets[j].pairing_residual = Some((d - sys.gap(j)).abs());
        }
    }
    let gaps = sys.gaps();
    let uniform_gap = gaps.iter().all(|g| (g - gaps[0]).abs() <= tol);
    let fixed_point = if gaps.iter().all(|g| *g <= tol) {
        match traj.limit(traj.start_subset()) {
            Some(x) => Some(FixedPointEstimate {
                point: x.clone(),
                residual: point_to_set_distance(x, &sys.apply_at(traj.start_subset(), x)?)?,
            }),
            None => None,
        }
    } else {
        None
    };
    let band = quasi_proximity_check(traj, sys);
    Ok(ProximityReport {
        status,
        start: traj.points[0].clone(),
        start_subset: traj.start_subset() + 1,
        steps: traj.step_distances.len(),
        subsets,
        band: (&band).into(),
        uniform_gap,
        final_step_distance: traj.step_distances.last().copied(),
        order_certified_steps: traj.order_certified.iter().filter(|c| **c).count(),
        fallback_steps: traj.fallbacks.iter().filter(|c| **c).count(),
        fixed_point,
    })
}

/// Spread of the limit estimates across several starting points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniquenessProbe {
    /// Per subset, the largest distance between two limit estimates.
    pub max_pairwise: Vec<f64>,
    /// False when some trajectory did not converge.
    pub reliable: bool,
    pub tol: f64,
    pub unique: bool,
}

impl UniquenessProbe {
    pub fn from_trajectories(trajectories: &[Trajectory], p: usize, tol: f64) -> Self {
        let reliable = trajectories.iter().all(|t| t.converged);
        let max_pairwise: Vec<f64> = (0..p)
            .map(|j| {
                let limits: Vec<&Point> = trajectories.iter().filter_map(|t| t.limit(j)).collect();
                let mut worst: f64 = 0.0;
                for (a, x) in limits.iter().enumerate() {
                    for y in &limits[a + 1..] {
                        worst = worst.max(metric(x, y).expect("same dimension"));
                    }
                }
                worst
            })
            .collect();
        let unique = reliable && max_pairwise.iter().all(|m| *m <= tol);
        UniquenessProbe { max_pairwise, reliable, tol, unique }
    }
}

/// Runs one trajectory per seed. Each trajectory gets its own seed derived
/// from `cfg.seed` and its position, so results do not depend on
/// `parallel`.
pub fn run_many(
    sys: &CyclicSystem,
    order: &OrderRelation,
    thresholds: &OrderThresholds,
    strategy: &SelectionStrategy,
    seeds: &[Point],
    cfg: &RunConfig,
    parallel: bool,
) -> Result<Vec<Trajectory>, EngineError> {
    let run = |(k, x0): (usize, &Point)| {
        let cfg = RunConfig { seed: trajectory_seed(cfg.seed, k), ..*cfg };
        run_trajectory(sys, order, thresholds, strategy, x0, &cfg)
    };
    if parallel {
        seeds.par_iter().enumerate().map(run).collect()
    } else {
        seeds.iter().enumerate().map(run).collect()
    }
}

pub fn trajectory_seed(base: u64, index: usize) -> u64 {
    base ^ (index as u64).wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

/// Runs trajectories from every seed and compares their limits.
pub fn uniqueness_probe(
    sys: &CyclicSystem,
    order: &OrderRelation,
    thresholds: &OrderThresholds,
    strategy: &SelectionStrategy,
    seeds: &[Point],
    cfg: &RunConfig,
    tol: f64,
) -> Result<UniquenessProbe, EngineError> {
    let trajectories = run_many(sys, order, thresholds, strategy, seeds, cfg, false)?;
    Ok(UniquenessProbe::from_trajectories(&trajectories, sys.len(), tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Region;
    use crate::system::{AffinePiece, MultiMap};

    fn p(c: &[f64]) -> Point {
        Point::new(c.to_vec()).unwrap()
    }

    fn two_interval() -> CyclicSystem {
        CyclicSystem::new(
            vec![Region::interval(0.0, 1.0).unwrap(), Region::interval(2.0, 3.0).unwrap()],
            MultiMap::Affine(vec![AffinePiece::scalar(1.0, 2.0, -0.5), AffinePiece::scalar(2.0, 1.0, -0.5)]),
            vec![0.5, 0.5],
        )
        .unwrap()
    }

    fn halving() -> CyclicSystem {
        let unit = Region::interval(0.0, 1.0).unwrap();
        CyclicSystem::new(
            vec![unit.clone(), unit],
            MultiMap::Affine(vec![AffinePiece::scalar(0.0, 0.0, 0.5), AffinePiece::scalar(0.0, 0.0, 0.5)]),
            vec![0.5, 0.5],
        )
        .unwrap()
    }

    fn thresholds() -> OrderThresholds {
        OrderThresholds::new(1.5, vec![1.5, 1.5]).unwrap()
    }

    #[test]
    fn singleton_image_forces_selection() {
        let sys = two_interval();
        let o = OrderRelation::componentwise();
        for s in [
            SelectionStrategy::Nearest,
            SelectionStrategy::OrderGreedy { samples: 8 },
            SelectionStrategy::SeededRandom { samples: 8 },
        ] {
            let sel = select_successor(&sys, &o, &s, 0, &p(&[0.5]), 3).unwrap();
            assert_eq!(sel.point, p(&[2.25]));
            assert!(!sel.fallback);
        }
    }

    #[test]
    fn ball_image_nearest_is_radial_projection() {
        let sys = CyclicSystem::new(
            vec![
                Region::cuboid(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap(),
                Region::cuboid(vec![2.0, 0.0], vec![4.0, 1.0]).unwrap(),
            ],
            MultiMap::Ball(vec![
                (AffinePiece::new(vec![0.0, 0.0], vec![3.0, 0.5], vec![0.0; 4]), 0.5),
                (AffinePiece::new(vec![0.0, 0.0], vec![0.5, 0.5], vec![0.0; 4]), 0.5),
            ]),
            vec![0.5, 0.5],
        )
        .unwrap();
        let o = OrderRelation::componentwise();
        let sel = select_successor(&sys, &o, &SelectionStrategy::Nearest, 0, &p(&[1.0, 0.5]), 0).unwrap();
        assert!(sel.point.approx_eq(&p(&[2.5, 0.5]), 1e-15));
    }

    #[test]
    fn order_greedy_falls_back_when_nothing_is_comparable() {
        let sys = two_interval();
        let o = OrderRelation::componentwise();
        // from A_2 every image point is smaller than x
        let sel =
            select_successor(&sys, &o, &SelectionStrategy::OrderGreedy { samples: 4 }, 1, &p(&[2.5]), 0)
                .unwrap();
        assert!(sel.fallback);
        assert_eq!(sel.point, p(&[0.75]));
    }

    #[test]
    fn composite_examples() {
        let sys = two_interval();
        let o = OrderRelation::componentwise();
        let s = SelectionStrategy::Nearest;
        let x = p(&[0.5]);
        assert_eq!(composite_apply(&sys, &o, &s, &x, 0, 0).unwrap(), x);
        // 0.5 -> 2.25 -> 1 - 0.5 * 0.25
        assert_eq!(composite_apply(&sys, &o, &s, &x, 2, 0).unwrap(), p(&[0.875]));
        assert_eq!(composite_apply(&sys, &o, &s, &p(&[1.0]), 2, 0).unwrap(), p(&[1.0]));
    }

    #[test]
    fn trajectory_phase_is_cyclic() {
        let sys = two_interval();
        let traj = run_trajectory(
            &sys,
            &OrderRelation::componentwise(),
            &thresholds(),
            &SelectionStrategy::Nearest,
            &p(&[0.3]),
            &RunConfig::default(),
        )
        .unwrap();
        assert!(traj.converged);
        for (n, s) in traj.subsets.iter().enumerate() {
            assert_eq!(*s, n % 2);
        }
        assert!(traj.limit(0).unwrap().approx_eq(&p(&[1.0]), 1e-8));
        assert!(traj.limit(1).unwrap().approx_eq(&p(&[2.0]), 1e-8));
    }

    #[test]
    fn fixed_point_start_stops_after_one_cycle() {
        let sys = halving();
        let traj = run_trajectory(
            &sys,
            &OrderRelation::componentwise(),
            &OrderThresholds::new(1.0, vec![0.5, 0.5]).unwrap(),
            &SelectionStrategy::Nearest,
            &p(&[0.0]),
            &RunConfig::default(),
        )
        .unwrap();
        assert!(traj.converged);
        assert_eq!(traj.len(), 4);
        assert!(traj.step_distances.iter().all(|d| *d == 0.0));
    }

    #[test]
    fn too_few_steps_is_an_error() {
        let err = run_trajectory(
            &two_interval(),
            &OrderRelation::componentwise(),
            &thresholds(),
            &SelectionStrategy::Nearest,
            &p(&[0.3]),
            &RunConfig { max_steps: 1, ..RunConfig::default() },
        );
        assert_eq!(err, Err(EngineError::TooFewSteps { max_steps: 1, p: 2 }));
    }

    #[test]
    fn non_finite_iterates_abort() {
        let sys = CyclicSystem::new(
            vec![Region::interval(-1e308, 1e308).unwrap()],
            MultiMap::Affine(vec![AffinePiece::scalar(0.0, 0.0, 10.0)]),
            vec![0.5],
        )
        .unwrap();
        let err = run_trajectory(
            &sys,
            &OrderRelation::componentwise(),
            &OrderThresholds::new(1.0, vec![1.0]).unwrap(),
            &SelectionStrategy::Nearest,
            &p(&[1e300]),
            &RunConfig::default(),
        );
        assert!(matches!(err, Err(EngineError::NonFinite { step: 8 })), "{err:?}");
    }

    #[test]
    fn band_records_entry() {
        let sys = two_interval();
        let o = OrderRelation::componentwise();
        let run = |x: f64| {
            run_trajectory(
                &sys,
                &o,
                &thresholds(),
                &SelectionStrategy::Nearest,
                &p(&[x]),
                &RunConfig::default(),
            )
            .unwrap()
        };
        let at_best = quasi_proximity_check(&run(1.0), &sys);
        assert_eq!(at_best.entry_step, Some(0));
        assert!(at_best.states.iter().all(|s| *s == BandState::InBand));
        let from_zero = run(0.0);
        assert_eq!(from_zero.step_distances[0], 2.5);
        let band = quasi_proximity_check(&from_zero, &sys);
        assert_eq!(band.states[0], BandState::PreBand);
        assert!(band.holds());
        assert!(band.entry_step.unwrap() > 0);
        assert!(!band.degenerate);
    }

    #[test]
    fn degenerate_band_when_subsets_intersect() {
        let sys = halving();
        let traj = run_trajectory(
            &sys,
            &OrderRelation::componentwise(),
            &OrderThresholds::new(1.0, vec![0.5, 0.5]).unwrap(),
            &SelectionStrategy::Nearest,
            &p(&[0.9]),
            &RunConfig::default(),
        )
        .unwrap();
        let band = quasi_proximity_check(&traj, &sys);
        assert!(band.degenerate);
        assert!(band.holds());
    }

    #[test]
    fn incomplete_report_makes_no_claims() {
        let sys = two_interval();
        let o = OrderRelation::componentwise();
        let traj = run_trajectory(
            &sys,
            &o,
            &thresholds(),
            &SelectionStrategy::Nearest,
            &p(&[0.0]),
            &RunConfig { max_steps: 4, ..RunConfig::default() },
        )
        .unwrap();
        assert!(!traj.converged);
        let report = convergence_report(&traj, &sys, &o, &SelectionStrategy::Nearest, 0).unwrap();
        assert_eq!(report.status, Status::Incomplete);
        assert!(report.subsets.iter().all(|s| s.limit.is_none() && s.pairing_residual.is_none()));
    }

    #[test]
    fn single_seed_probe_is_degenerate() {
        let sys = two_interval();
        let probe = uniqueness_probe(
            &sys,
            &OrderRelation::componentwise(),
            &thresholds(),
            &SelectionStrategy::Nearest,
            &[p(&[0.4])],
            &RunConfig::default(),
            1e-8,
        )
        .unwrap();
        assert_eq!(probe.max_pairwise, vec![0.0, 0.0]);
        assert!(probe.unique);
    }

    #[test]
    fn parallel_runs_match_sequential() {
        let sys = CyclicSystem::new(
            vec![Region::interval(0.0, 1.0).unwrap(), Region::interval(2.0, 3.0).unwrap()],
            MultiMap::Ball(vec![
                (AffinePiece::scalar(1.0, 2.1, -0.5), 0.1),
                (AffinePiece::scalar(2.0, 0.9, -0.5), 0.1),
            ]),
            vec![0.5, 0.5],
        )
        .unwrap();
        let o = OrderRelation::componentwise();
        let seeds = [p(&[0.0]), p(&[0.5]), p(&[2.7])];
        let s = SelectionStrategy::SeededRandom { samples: 5 };
        let cfg = RunConfig { max_steps: 50, ..RunConfig::default() };
        let a = run_many(&sys, &o, &thresholds(), &s, &seeds, &cfg, false).unwrap();
        let b = run_many(&sys, &o, &thresholds(), &s, &seeds, &cfg, true).unwrap();
        assert_eq!(a, b);
    }
}
