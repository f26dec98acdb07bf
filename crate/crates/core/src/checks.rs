//! Sample-based certificates for the hypotheses of the convergence results.
//!
//! Each check scans deterministic samples and reports the worst margin it
//! saw together with a witness. A PASS is evidence on the scanned samples,
//! a FAIL comes with a concrete counterexample.

use serde::Serialize;

use crate::engine::{select_successor, SelectionStrategy, Trajectory};
use crate::geometry::{
    diameter, directed_hausdorff, hausdorff, hausdorff_estimate, metric, point_to_set_distance, Point,
};
use crate::order::{OrderRelation, OrderThresholds};
use crate::system::{CyclicSystem, SystemError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Pass,
    Fail,
    /// Nothing to check: no sampled pair met the hypothesis' precondition.
    Vacuous,
}

impl Verdict {
    pub fn label(self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Vacuous => "VACUOUS",
        }
    }

    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    /// FAIL dominates, then PASS, then VACUOUS.
    pub fn combine(verdicts: impl IntoIterator<Item = Verdict>) -> Verdict {
        let mut out = Verdict::Vacuous;
        for v in verdicts {
            match v {
                Verdict::Fail => return Verdict::Fail,
                Verdict::Pass => out = Verdict::Pass,
                Verdict::Vacuous => {}
            }
        }
        out
    }
}

/// A pair `x ∈ A_i ⪯ y ∈ A_{i+1}` with the two sides of the contraction
/// inequality evaluated on it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContractionWitness {
    pub x: Point,
    pub y: Point,
    pub distance: f64,
    pub hausdorff: f64,
    pub bound: f64,
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeContraction {
    /// 1-based index of the source subset.
    pub subset: usize,
    pub pairs_checked: usize,
    pub verdict: Verdict,
    /// Pair with the smallest slack.
    pub witness: Option<ContractionWitness>,
    /// Largest discretization bound among the Hausdorff values used.
    pub resolution: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContractionCheck {
    pub verdict: Verdict,
    pub edges: Vec<EdgeContraction>,
}

impl ContractionCheck {
    /// The witness with the smallest slack over all edges.
    pub fn worst(&self) -> Option<&ContractionWitness> {
        self.edges.iter().filter_map(|e| e.witness.as_ref()).min_by(|a, b| a.slack.total_cmp(&b.slack))
    }
}

/// Checks `H(Tx, Ty) ≤ k_i d(x, y) + (1 − k_i) D_i` on sampled ordered pairs
/// `x ∈ A_i`, `y ∈ A_{i+1}`, `x ⪯ y`.
pub fn check_contraction(
    sys: &CyclicSystem,
    order: &OrderRelation,
    samples_per_subset: usize,
    seed: u64,
) -> Result<ContractionCheck, SystemError> {
    let p = sys.len();
    let tol = sys.tol();
    let samples: Vec<Vec<Point>> =
        (0..p).map(|i| sys.domain_sample(i, samples_per_subset, seed.wrapping_add(i as u64))).collect();
    let images = samples
        .iter()
        .enumerate()
        .map(|(i, xs)| xs.iter().map(|x| sys.apply_at(i, x)).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()?;

    let mut edges = Vec::with_capacity(p);
    for i in 0..p {
        let j = sys.next(i);
        let k = sys.constant(i);
        let gap = sys.gap(i);
        let mut pairs = 0;
        let mut resolution: f64 = 0.0;
        let mut witness: Option<ContractionWitness> = None;
        for (x, tx) in samples[i].iter().zip(&images[i]) {
            for (y, ty) in samples[j].iter().zip(&images[j]) {
                if !order.leq(x, y)? {
                    continue;
                }
                pairs += 1;
                let distance = metric(x, y)?;
                let h = hausdorff_estimate(tx, ty)?;
                resolution = resolution.max(h.resolution);
                let bound = k * distance + (1.0 - k) * gap;
                let slack = bound - h.value;
                if witness.as_ref().is_none_or(|w| slack < w.slack) {
                    witness = Some(ContractionWitness {
                        x: x.clone(),
                        y: y.clone(),
                        distance,
                        hausdorff: h.value,
                        bound,
                        slack,
                    });
                }
            }
        }
        let verdict = match &witness {
            None => Verdict::Vacuous,
            Some(w) => Verdict::from_bool(w.slack >= -tol),
        };
        edges.push(EdgeContraction { subset: i + 1, pairs_checked: pairs, verdict, witness, resolution });
    }
    Ok(ContractionCheck { verdict: Verdict::combine(edges.iter().map(|e| e.verdict)), edges })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContainmentCheck {
    pub verdict: Verdict,
    /// Largest `sup_{y ∈ Tx} d(y, A_{i+1})` seen.
    pub worst_excess: f64,
    /// 1-based subset and point attaining the worst excess.
    pub worst_subset: usize,
    pub worst_point: Option<Point>,
}

/// Checks `Tx ⊆ A_{i+1}` for sampled `x ∈ A_i`.
pub fn check_containment(
    sys: &CyclicSystem,
    samples_per_subset: usize,
    seed: u64,
) -> Result<ContainmentCheck, SystemError> {
    let mut out =
        ContainmentCheck { verdict: Verdict::Pass, worst_excess: 0.0, worst_subset: 1, worst_point: None };
    for i in 0..sys.len() {
        let target = sys.subset(sys.next(i));
        for x in sys.domain_sample(i, samples_per_subset, seed.wrapping_add(i as u64)) {
            let excess = directed_hausdorff(&sys.apply_at(i, &x)?, target)?.value;
            if out.worst_point.is_none() || excess > out.worst_excess {
                out.worst_excess = excess;
                out.worst_subset = i + 1;
                out.worst_point = Some(x);
            }
        }
    }
    out.verdict = Verdict::from_bool(out.worst_excess <= sys.tol());
    Ok(out)
}

/// Starting pair `x ∈ A_i`, `y ∈ Tx` close enough to seed an ordered
/// sequence.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProximitySeed {
    /// 1-based.
    pub subset: usize,
    pub x: Point,
    pub y: Point,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProximitySeedCheck {
    pub verdict: Verdict,
    pub witness: Option<ProximitySeed>,
}

fn check_threshold_len(sys: &CyclicSystem, thresholds: &OrderThresholds) -> Result<(), SystemError> {
    if thresholds.d0i.len() != sys.len() {
        return Err(SystemError::CountMismatch {
            what: "d0i thresholds",
            expected: sys.len(),
            found: thresholds.d0i.len(),
        });
    }
    Ok(())
}

/// Looks for some `i`, `x ∈ A_i` and `y ∈ Tx` with `d(x, y) < d0i[i]` and
/// `d0i[i] > D_i`.
///
/// Sampled points are paired with their nearest image point first; the
/// witness reported is the closest such pair. When no sample qualifies,
/// short nearest-selection iterations from the samples are scanned too.
pub fn check_proximity_seed(
    sys: &CyclicSystem,
    thresholds: &OrderThresholds,
    samples_per_subset: usize,
    seed: u64,
) -> Result<ProximitySeedCheck, SystemError> {
    check_threshold_len(sys, thresholds)?;
    let p = sys.len();
    let eligible: Vec<bool> = (0..p).map(|i| thresholds.d0i[i] > sys.gap(i)).collect();
    if !eligible.iter().any(|e| *e) {
        return Ok(ProximitySeedCheck { verdict: Verdict::Fail, witness: None });
    }
    let mut best: Option<ProximitySeed> = None;
    let consider = |i: usize, x: &Point, y: Point, best: &mut Option<ProximitySeed>| {
        let distance = metric(x, &y).expect("same dimension");
        if eligible[i] && distance < thresholds.d0i[i] && best.as_ref().is_none_or(|b| distance < b.distance)
        {
            *best = Some(ProximitySeed { subset: i + 1, x: x.clone(), y, distance });
        }
    };
    let starts: Vec<Vec<Point>> =
        (0..p).map(|i| sys.domain_sample(i, samples_per_subset, seed.wrapping_add(i as u64))).collect();
    for (i, xs) in starts.iter().enumerate() {
        for x in xs {
            let y = sys.nearest_image_point(i, x)?;
            consider(i, x, y, &mut best);
        }
    }
    if best.is_none() {
        const ITERATIONS: usize = 64;
        let order = OrderRelation::default();
        'outer: for (i0, xs) in starts.iter().enumerate() {
            for x0 in xs {
                let mut i = i0;
                let mut x = x0.clone();
                for _ in 0..ITERATIONS * p {
                    let y = select_successor(sys, &order, &SelectionStrategy::Nearest, i, &x, 0)
                        .map_err(|e| e.into_system())?
                        .point;
                    consider(i, &x, y.clone(), &mut best);
                    if best.is_some() {
                        break 'outer;
                    }
                    x = y;
                    i = sys.next(i);
                }
            }
        }
    }
    Ok(ProximitySeedCheck { verdict: Verdict::from_bool(best.is_some()), witness: best })
}

/// A threshold requirement on `d0` and whether it is met.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdCheck {
    pub verdict: Verdict,
    pub d0: f64,
    pub required: f64,
    /// Whether `d0` must strictly exceed `required`.
    pub strict: bool,
}

fn step_bound(sys: &CyclicSystem, thresholds: &OrderThresholds) -> f64 {
    (0..sys.len())
        .map(|j| sys.constant(j) * (thresholds.d0i[j] - sys.gap(j)) + sys.gap(j))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `d0 ≥ max(max_j d0j, max_j (k_j (d0j − D_j) + D_j))`.
pub fn check_threshold(
    sys: &CyclicSystem,
    thresholds: &OrderThresholds,
) -> Result<ThresholdCheck, SystemError> {
    check_threshold_len(sys, thresholds)?;
    let max_d0i = thresholds.d0i.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let required = max_d0i.max(step_bound(sys, thresholds));
    Ok(ThresholdCheck {
        verdict: Verdict::from_bool(thresholds.d0 >= required),
        d0: thresholds.d0,
        required,
        strict: false,
    })
}

/// `d0 > max(max_j (D_j + diam A_j), max_j (k_j (d0j − D_j) + D_j))`.
pub fn check_strong_threshold(
    sys: &CyclicSystem,
    thresholds: &OrderThresholds,
) -> Result<ThresholdCheck, SystemError> {
    check_threshold_len(sys, thresholds)?;
    let spread =
        (0..sys.len()).map(|j| sys.gap(j) + diameter(sys.subset(j))).fold(f64::NEG_INFINITY, f64::max);
    let required = spread.max(step_bound(sys, thresholds));
    Ok(ThresholdCheck {
        verdict: Verdict::from_bool(thresholds.d0 > required),
        d0: thresholds.d0,
        required,
        strict: true,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitComparabilityWitness {
    /// Trajectory position of `x_n`.
    pub step: usize,
    pub point: Point,
    pub limit: Point,
    pub hausdorff: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitComparabilityCheck {
    pub verdict: Verdict,
    pub pairs_checked: usize,
    /// First failing element, if any.
    pub witness: Option<LimitComparabilityWitness>,
}

/// Along a converged trajectory, checks `H(Tx̄, Tx_n) > k_i d(x̄, x_n)` for
/// every element `x_n ≠ x̄` comparable to the limit `x̄` of its subset.
/// Differences within the system tolerance count as satisfied.
pub fn check_limit_comparability(
    sys: &CyclicSystem,
    order: &OrderRelation,
    traj: &Trajectory,
) -> Result<LimitComparabilityCheck, crate::engine::EngineError> {
    if !traj.converged {
        return Err(crate::engine::EngineError::NotConverged);
    }
    let tol = sys.tol();
    let mut pairs = 0;
    for (n, (x, &i)) in traj.points.iter().zip(&traj.subsets).enumerate() {
        let limit = traj.limit(i).expect("converged trajectory has limits");
        if x.approx_eq(limit, tol) || !order.comparable(x, limit)? {
            continue;
        }
        pairs += 1;
        let h = hausdorff(&sys.apply_at(i, limit)?, &sys.apply_at(i, x)?)?;
        let bound = sys.constant(i) * metric(limit, x)?;
        if h <= bound - tol {
            return Ok(LimitComparabilityCheck {
                verdict: Verdict::Fail,
                pairs_checked: pairs,
                witness: Some(LimitComparabilityWitness {
                    step: n,
                    point: x.clone(),
                    limit: limit.clone(),
                    hausdorff: h,
                    bound,
                }),
            });
        }
    }
    let verdict = if pairs == 0 { Verdict::Vacuous } else { Verdict::Pass };
    Ok(LimitComparabilityCheck { verdict, pairs_checked: pairs, witness: None })
}

/// Whether every cached gap is zero, so the subsets share a point.
pub fn subsets_intersect(sys: &CyclicSystem) -> bool {
    sys.gaps().iter().all(|g| *g <= sys.tol())
}

/// `|d(z, Tz) − D_i|` for `z` at position `i`: zero exactly when `z` is a
/// best proximity point of subset `i`.
pub fn proximity_residual(sys: &CyclicSystem, i: usize, z: &Point) -> Result<f64, SystemError> {
    Ok((point_to_set_distance(z, &sys.apply_at(i, z)?)? - sys.gap(i)).abs())
}
