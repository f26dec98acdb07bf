//! Scenario documents, full runs and the files they produce.
//!
//! A scenario is a JSON document describing the regions, the map, the
//! constants, the order, the thresholds and the starting points. Unknown
//! fields are rejected. [`parse_scenario`] validates everything up front so
//! a [`Scenario`] always holds a consistent system; [`run_scenario`]
//! executes every check and trajectory; [`emit`] writes a report and one
//! trace table per starting point.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::checks::{
    check_containment, check_contraction, check_limit_comparability, check_proximity_seed,
    check_strong_threshold, check_threshold, subsets_intersect, ContainmentCheck, ContractionCheck,
    LimitComparabilityCheck, ProximitySeedCheck, ThresholdCheck, Verdict,
};
use crate::engine::{
    convergence_report, quasi_proximity_check, run_many, trajectory_seed, BandState, EngineError,
    ProximityReport, RunConfig, SelectionStrategy, Status, Trajectory, UniquenessProbe, DEFAULT_MAX_STEPS,
};
use crate::geometry::{diameter, GeometryError, Point, Region, DEFAULT_TOL};
use crate::order::{OrderError, OrderRelation, OrderThresholds};
use crate::system::{AffinePiece, CyclicSystem, MultiMap, SystemError, TableEntry};

const MAX_SAMPLES: usize = 100_000;
const MAX_SEEDS: usize = 10_000;
/// Region coordinates beyond this would overflow distance computations.
const MAX_COORD: f64 = 1e100;

/// Meaning given to "best proximity point" in reports.
pub const BEST_PROXIMITY_READING: &str =
    "z in A_j is a best proximity point iff d(z, Tz) = D_j = d(A_j, A_{j+1})";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("invalid field `{field}`: {message}")]
    Invalid { field: String, message: String },
}

fn invalid(field: impl Into<String>, message: impl ToString) -> ScenarioError {
    ScenarioError::Invalid { field: field.into(), message: message.to_string() }
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

fn default_max_steps() -> usize {
    DEFAULT_MAX_STEPS
}

fn default_check_samples() -> usize {
    100
}

fn default_strategy_samples() -> usize {
    32
}

/// On-disk scenario document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDoc {
    pub name: String,
    pub dimension: usize,
    pub subsets: Vec<RegionSpec>,
    pub map: MapSpec,
    pub constants: Vec<f64>,
    #[serde(default)]
    pub order: OrderSpec,
    pub thresholds: ThresholdSpec,
    #[serde(default)]
    pub strategy: StrategySpec,
    #[serde(default)]
    pub seeds: SeedSpec,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
    #[serde(default)]
    pub rng_seed: u64,
    /// Points sampled per subset by the hypothesis checks.
    #[serde(default = "default_check_samples")]
    pub check_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RegionSpec {
    Interval { lower: f64, upper: f64 },
    Box { lower: Vec<f64>, upper: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
    Cloud { points: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AffineSpec {
    pub anchor: Vec<f64>,
    pub offset: Vec<f64>,
    /// Rows of the `d × d` matrix.
    pub matrix: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BallPieceSpec {
    pub anchor: Vec<f64>,
    pub offset: Vec<f64>,
    pub matrix: Vec<Vec<f64>>,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableEntrySpec {
    pub point: Vec<f64>,
    pub image: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MapSpec {
    Affine { pieces: Vec<AffineSpec> },
    Ball { pieces: Vec<BallPieceSpec> },
    Table { subsets: Vec<Vec<TableEntrySpec>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OrderSpec {
    Componentwise {
        #[serde(default)]
        strict: bool,
    },
    Coordinate {
        axis: usize,
        #[serde(default)]
        strict: bool,
    },
    Table {
        pairs: Vec<(Vec<f64>, Vec<f64>)>,
        #[serde(default)]
        strict: bool,
    },
}

impl Default for OrderSpec {
    fn default() -> Self {
        OrderSpec::Componentwise { strict: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdSpec {
    pub d0: f64,
    pub d0i: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StrategySpec {
    #[default]
    Nearest,
    OrderGreedy {
        #[serde(default = "default_strategy_samples")]
        samples: usize,
    },
    Random {
        #[serde(default = "default_strategy_samples")]
        samples: usize,
    },
}

/// Starting points, given explicitly or as a sample count per subset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SeedSpec {
    Points(Vec<Vec<f64>>),
    PerSubset { per_subset: Vec<usize> },
}

impl Default for SeedSpec {
    fn default() -> Self {
        SeedSpec::Points(Vec::new())
    }
}

/// A validated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub doc: ScenarioDoc,
    pub system: CyclicSystem,
    pub order: OrderRelation,
    pub thresholds: OrderThresholds,
    pub strategy: SelectionStrategy,
    pub seeds: Vec<Point>,
    pub config: RunConfig,
}

fn point(field: &str, coords: &[f64], d: usize) -> Result<Point, ScenarioError> {
    if coords.len() != d {
        return Err(invalid(field, GeometryError::DimensionMismatch { expected: d, found: coords.len() }));
    }
    Point::new(coords.to_vec()).map_err(|e| invalid(field, e))
}

fn region(field: &str, spec: &RegionSpec, d: usize) -> Result<Region, ScenarioError> {
    let magnitudes: Vec<f64> = match spec {
        RegionSpec::Interval { lower, upper } => vec![*lower, *upper],
        RegionSpec::Box { lower, upper } => lower.iter().chain(upper).copied().collect(),
        RegionSpec::Ball { center, radius } => center.iter().map(|c| c.abs() + radius.abs()).collect(),
        RegionSpec::Cloud { points } => points.iter().flatten().copied().collect(),
    };
    if magnitudes.iter().any(|v| v.abs() > MAX_COORD) {
        return Err(invalid(field, format!("coordinates must lie within [-{MAX_COORD:e}, {MAX_COORD:e}]")));
    }
    let r = match spec {
        RegionSpec::Interval { lower, upper } => {
            if d != 1 {
                return Err(invalid(field, "intervals require dimension 1"));
            }
            Region::interval(*lower, *upper)
        }
        RegionSpec::Box { lower, upper } => {
            if lower.len() != d || upper.len() != d {
                return Err(invalid(field, format!("box bounds must have {d} coordinates")));
            }
            Region::cuboid(lower.clone(), upper.clone())
        }
        RegionSpec::Ball { center, radius } => {
            Region::ball(point(&format!("{field}.center"), center, d)?, *radius)
        }
        RegionSpec::Cloud { points } => {
            let pts = points
                .iter()
                .enumerate()
                .map(|(k, c)| point(&format!("{field}.points[{k}]"), c, d))
                .collect::<Result<Vec<_>, _>>()?;
            Region::cloud(pts)
        }
    };
    r.map_err(|e| invalid(field, e))
}

fn affine(
    field: &str,
    anchor: &[f64],
    offset: &[f64],
    matrix: &[Vec<f64>],
    d: usize,
) -> Result<AffinePiece, ScenarioError> {
    point(&format!("{field}.anchor"), anchor, d)?;
    point(&format!("{field}.offset"), offset, d)?;
    if matrix.len() != d || matrix.iter().any(|row| row.len() != d) {
        return Err(invalid(format!("{field}.matrix"), format!("matrix must be {d}x{d}")));
    }
    let flat: Vec<f64> = matrix.iter().flatten().copied().collect();
    if flat.iter().any(|v| !v.is_finite()) {
        return Err(invalid(format!("{field}.matrix"), "matrix entries must be finite"));
    }
    Ok(AffinePiece::new(anchor.to_vec(), offset.to_vec(), flat))
}

fn multimap(spec: &MapSpec, d: usize) -> Result<MultiMap, ScenarioError> {
    Ok(match spec {
        MapSpec::Affine { pieces } => MultiMap::Affine(
            pieces
                .iter()
                .enumerate()
                .map(|(i, s)| affine(&format!("map.pieces[{i}]"), &s.anchor, &s.offset, &s.matrix, d))
                .collect::<Result<_, _>>()?,
        ),
        MapSpec::Ball { pieces } => MultiMap::Ball(
            pieces
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    let field = format!("map.pieces[{i}]");
                    if !s.radius.is_finite() || s.radius < 0.0 {
                        return Err(invalid(
                            format!("{field}.radius"),
                            "radius must be finite and nonnegative",
                        ));
                    }
                    Ok((affine(&field, &s.anchor, &s.offset, &s.matrix, d)?, s.radius))
                })
                .collect::<Result<_, _>>()?,
        ),
        MapSpec::Table { subsets } => MultiMap::Table(
            subsets
                .iter()
                .enumerate()
                .map(|(i, entries)| {
                    entries
                        .iter()
                        .enumerate()
                        .map(|(e, entry)| {
                            let field = format!("map.subsets[{i}][{e}]");
                            if entry.image.is_empty() {
                                return Err(invalid(format!("{field}.image"), "image must be nonempty"));
                            }
                            Ok(TableEntry {
                                point: point(&format!("{field}.point"), &entry.point, d)?,
                                image: entry
                                    .image
                                    .iter()
                                    .enumerate()
                                    .map(|(k, c)| point(&format!("{field}.image[{k}]"), c, d))
                                    .collect::<Result<_, _>>()?,
                            })
                        })
                        .collect::<Result<Vec<_>, _>>()
                })
                .collect::<Result<_, _>>()?,
        ),
    })
}

fn system_error(e: SystemError) -> ScenarioError {
    let field = match &e {
        SystemError::CountMismatch { what, .. } if what.starts_with("map") => "map",
        SystemError::ProductNotContractive(_)
        | SystemError::BadConstant { .. }
        | SystemError::CountMismatch { .. } => "constants",
        SystemError::NoSubsets => "subsets",
        _ => "map",
    };
    invalid(field, e)
}

fn order(spec: &OrderSpec, d: usize, tol: f64) -> Result<OrderRelation, ScenarioError> {
    let (relation, strict) = match spec {
        OrderSpec::Componentwise { strict } => (OrderRelation::componentwise(), *strict),
        OrderSpec::Coordinate { axis, strict } => {
            if *axis >= d {
                return Err(invalid("order.axis", format!("axis {axis} out of range for dimension {d}")));
            }
            (OrderRelation::coordinate(*axis), *strict)
        }
        OrderSpec::Table { pairs, strict } => {
            let pts = pairs
                .iter()
                .enumerate()
                .map(|(k, (x, y))| {
                    let field = format!("order.pairs[{k}]");
                    Ok((point(&field, x, d)?, point(&field, y, d)?))
                })
                .collect::<Result<Vec<_>, ScenarioError>>()?;
            let rel = OrderRelation::table(pts).map_err(|e| invalid("order.pairs", e))?;
            (rel, *strict)
        }
    };
    let mut relation = relation.with_strict(strict);
    relation.tol = tol;
    Ok(relation)
}

fn strategy(spec: &StrategySpec) -> Result<SelectionStrategy, ScenarioError> {
    let check = |samples: usize| {
        if samples == 0 || samples > MAX_SAMPLES {
            Err(invalid("strategy.samples", format!("must be between 1 and {MAX_SAMPLES}")))
        } else {
            Ok(samples)
        }
    };
    Ok(match spec {
        StrategySpec::Nearest => SelectionStrategy::Nearest,
        StrategySpec::OrderGreedy { samples } => SelectionStrategy::OrderGreedy { samples: check(*samples)? },
        StrategySpec::Random { samples } => SelectionStrategy::SeededRandom { samples: check(*samples)? },
    })
}

impl Scenario {
    /// Validates a document into a scenario.
    pub fn from_doc(doc: ScenarioDoc) -> Result<Self, ScenarioError> {
        let d = doc.dimension;
        if d == 0 {
            return Err(invalid("dimension", "must be at least 1"));
        }
        if !(doc.tol.is_finite() && doc.tol > 0.0) {
            return Err(invalid("tol", "must be positive and finite"));
        }
        if doc.check_samples == 0 || doc.check_samples > MAX_SAMPLES {
            return Err(invalid("check_samples", format!("must be between 1 and {MAX_SAMPLES}")));
        }
        if doc.subsets.is_empty() {
            return Err(invalid("subsets", "at least one subset is required"));
        }
        let p = doc.subsets.len();
        let regions = doc
            .subsets
            .iter()
            .enumerate()
            .map(|(i, s)| region(&format!("subsets[{i}]"), s, d))
            .collect::<Result<Vec<_>, _>>()?;
        let map = multimap(&doc.map, d)?;
        if doc.constants.len() != p {
            return Err(invalid(
                "constants",
                format!("expected {p} constants, found {}", doc.constants.len()),
            ));
        }
        let system = CyclicSystem::new(regions, map, doc.constants.clone())
            .map_err(system_error)?
            .with_tolerance(doc.tol);
        if doc.thresholds.d0i.len() != p {
            return Err(invalid(
                "thresholds.d0i",
                format!("expected {p} thresholds, found {}", doc.thresholds.d0i.len()),
            ));
        }
        let thresholds =
            OrderThresholds::new(doc.thresholds.d0, doc.thresholds.d0i.clone()).map_err(|e| match e {
                OrderError::BadThreshold { ref name, .. } if name == "d0" => invalid("thresholds.d0", e),
                e => invalid("thresholds.d0i", e),
            })?;
        let order = order(&doc.order, d, doc.tol)?;
        let strategy = strategy(&doc.strategy)?;
        if doc.max_steps < p {
            return Err(invalid("max_steps", format!("must be at least the number of subsets ({p})")));
        }
        let seeds = match &doc.seeds {
            SeedSpec::Points(points) => points
                .iter()
                .enumerate()
                .map(|(k, c)| {
                    let field = format!("seeds[{k}]");
                    let x = point(&field, c, d)?;
                    system.subset_index(&x).map_err(|e| invalid(&field, e))?;
                    Ok(x)
                })
                .collect::<Result<Vec<_>, ScenarioError>>()?,
            SeedSpec::PerSubset { per_subset } => {
                if per_subset.len() != p {
                    return Err(invalid("seeds.per_subset", format!("expected {p} counts")));
                }
                if per_subset
                    .iter()
                    .try_fold(0usize, |acc, c| acc.checked_add(*c))
                    .is_none_or(|t| t > MAX_SEEDS)
                {
                    return Err(invalid("seeds.per_subset", format!("at most {MAX_SEEDS} seeds in total")));
                }
                per_subset
                    .iter()
                    .enumerate()
                    .flat_map(|(j, &count)| {
                        let seed = trajectory_seed(doc.rng_seed, usize::MAX - j);
                        system.domain_sample(j, count, seed).into_iter().take(count)
                    })
                    .collect()
            }
        };
        let config = RunConfig { max_steps: doc.max_steps, tol: doc.tol, seed: doc.rng_seed };
        Ok(Scenario { doc, system, order, thresholds, strategy, seeds, config })
    }

    pub fn name(&self) -> &str {
        &self.doc.name
    }

    /// Canonical JSON form; parsing it gives back an equal scenario.
    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string_pretty(&self.doc).expect("scenario documents serialize")
    }

    /// Copy with run parameters replaced, revalidated.
    pub fn with_overrides(
        &self,
        tol: Option<f64>,
        max_steps: Option<usize>,
        rng_seed: Option<u64>,
    ) -> Result<Self, ScenarioError> {
        let mut doc = self.doc.clone();
        if let Some(t) = tol {
            doc.tol = t;
        }
        if let Some(m) = max_steps {
            doc.max_steps = m;
        }
        if let Some(s) = rng_seed {
            doc.rng_seed = s;
        }
        Scenario::from_doc(doc)
    }
}

/// Parses and validates a scenario document.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let doc: ScenarioDoc = serde_json::from_str(text).map_err(|e| ScenarioError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    Scenario::from_doc(doc)
}

/// Verdicts for the hypotheses that can be checked without iterating.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Hypotheses {
    pub contraction: ContractionCheck,
    pub containment: ContainmentCheck,
    pub proximity_seed: ProximitySeedCheck,
    pub threshold: ThresholdCheck,
    /// Stronger threshold that makes every start admissible; optional.
    pub strong_threshold: ThresholdCheck,
    pub intersecting: bool,
    /// Contraction, containment, proximity seed and threshold all PASS.
    pub all_required_pass: bool,
}

pub fn check_hypotheses(s: &Scenario) -> Result<Hypotheses, SystemError> {
    let sys = &s.system;
    let n = s.doc.check_samples;
    let seed = s.doc.rng_seed;
    let contraction = check_contraction(sys, &s.order, n, seed)?;
    let containment = check_containment(sys, n, seed)?;
    let proximity_seed = check_proximity_seed(sys, &s.thresholds, n, seed)?;
    let threshold = check_threshold(sys, &s.thresholds)?;
    let strong_threshold = check_strong_threshold(sys, &s.thresholds)?;
    let all_required_pass =
        [contraction.verdict, containment.verdict, proximity_seed.verdict, threshold.verdict]
            .iter()
            .all(|v| *v == Verdict::Pass);
    Ok(Hypotheses {
        contraction,
        containment,
        proximity_seed,
        threshold,
        strong_threshold,
        intersecting: subsets_intersect(sys),
        all_required_pass,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeedRun {
    /// 1-based.
    pub seed_index: usize,
    pub report: ProximityReport,
    /// Only evaluated for converged runs.
    pub limit_comparability: Option<LimitComparabilityCheck>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub scenario: String,
    pub dimension: usize,
    pub subsets: usize,
    pub region_kinds: Vec<&'static str>,
    pub map_kind: &'static str,
    pub order_kind: &'static str,
    pub strategy: &'static str,
    pub tol: f64,
    pub max_steps: usize,
    pub rng_seed: u64,
    pub gaps: Vec<f64>,
    pub max_gap: f64,
    pub diameters: Vec<f64>,
    pub constants: Vec<f64>,
    pub contraction_product: f64,
    pub convex_subsets: bool,
    pub best_proximity_reading: &'static str,
    pub hypotheses: Hypotheses,
    pub runs: Vec<SeedRun>,
    pub uniqueness: Option<UniquenessProbe>,
}

/// Everything a run produces.
#[derive(Debug, Clone, PartialEq)]
pub struct RunArtifacts {
    pub report: RunReport,
    pub trajectories: Vec<Trajectory>,
    /// One CSV document per trajectory.
    pub traces: Vec<String>,
}

/// Runs all checks, one trajectory per seed, the uniqueness probe and the
/// convergence reports. Hypothesis failures are recorded, not fatal.
pub fn run_scenario(s: &Scenario, parallel: bool) -> Result<RunArtifacts, EngineError> {
    let sys = &s.system;
    let hypotheses = check_hypotheses(s)?;
    let trajectories = run_many(sys, &s.order, &s.thresholds, &s.strategy, &s.seeds, &s.config, parallel)?;
    let mut runs = Vec::with_capacity(trajectories.len());
    let mut traces = Vec::with_capacity(trajectories.len());
    for (k, traj) in trajectories.iter().enumerate() {
        let seed = trajectory_seed(s.config.seed, k);
        let report = convergence_report(traj, sys, &s.order, &s.strategy, seed)?;
        let limit_comparability =
            if traj.converged { Some(check_limit_comparability(sys, &s.order, traj)?) } else { None };
        traces.push(trace_csv(traj, sys));
        runs.push(SeedRun { seed_index: k + 1, report, limit_comparability });
    }
    let uniqueness = (!trajectories.is_empty())
        .then(|| UniquenessProbe::from_trajectories(&trajectories, sys.len(), 10.0 * s.config.tol));
    let report = RunReport {
        scenario: s.doc.name.clone(),
        dimension: sys.dim(),
        subsets: sys.len(),
        region_kinds: sys.subsets().iter().map(Region::kind_name).collect(),
        map_kind: sys.map().kind_name(),
        order_kind: s.order.kind_name(),
        strategy: s.strategy.kind_name(),
        tol: s.config.tol,
        max_steps: s.config.max_steps,
        rng_seed: s.config.seed,
        gaps: sys.gaps().to_vec(),
        max_gap: sys.max_gap(),
        diameters: sys.subsets().iter().map(diameter).collect(),
        constants: sys.constants().to_vec(),
        contraction_product: sys.contraction_product(),
        convex_subsets: sys.subsets().iter().all(Region::is_convex),
        best_proximity_reading: BEST_PROXIMITY_READING,
        hypotheses,
        runs,
        uniqueness,
    };
    Ok(RunArtifacts { report, trajectories, traces })
}

/// 17 significant digits, enough to round-trip any double.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_point(p: &Point) -> String {
    let parts: Vec<String> = p.coords().iter().map(|c| fmt_num(*c)).collect();
    format!("({})", parts.join(", "))
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "n/a".to_string(), fmt_num)
}

/// Trace table: one row per step with the point it starts from.
pub fn trace_csv(traj: &Trajectory, sys: &CyclicSystem) -> String {
    let band = quasi_proximity_check(traj, sys);
    let d = sys.dim();
    let mut out = String::from("step,subset");
    for a in 1..=d {
        let _ = write!(out, ",x{a}");
    }
    out.push_str(",d_n,order_certified,in_band\n");
    for (n, dist) in traj.step_distances.iter().enumerate() {
        let _ = write!(out, "{},{}", n, traj.subsets[n] + 1);
        for c in traj.points[n].coords() {
            let _ = write!(out, ",{}", fmt_num(*c));
        }
        let _ = writeln!(
            out,
            ",{},{},{}",
            fmt_num(*dist),
            u8::from(traj.order_certified[n]),
            u8::from(band.states[n] == BandState::InBand)
        );
    }
    out
}

fn write_hypotheses(out: &mut String, h: &Hypotheses) {
    let c = &h.contraction;
    let _ = writeln!(out, "contraction H(Tx,Ty) <= k_i d(x,y) + (1-k_i) D_i: {}", c.verdict.label());
    for e in &c.edges {
        let _ =
            write!(out, "  edge {}: {} over {} ordered pairs", e.subset, e.verdict.label(), e.pairs_checked);
        if let Some(w) = &e.witness {
            let _ = write!(
                out,
                ", min slack {} at x={} y={} (H={}, bound={})",
                fmt_num(w.slack),
                fmt_point(&w.x),
                fmt_point(&w.y),
                fmt_num(w.hausdorff),
                fmt_num(w.bound)
            );
        }
        if e.resolution > 0.0 {
            let _ = write!(out, ", Hausdorff resolution {}", fmt_num(e.resolution));
        }
        out.push('\n');
    }
    let m = &h.containment;
    let _ = writeln!(
        out,
        "containment T(A_i) in A_(i+1): {} (worst excess {} from subset {})",
        m.verdict.label(),
        fmt_num(m.worst_excess),
        m.worst_subset
    );
    let a3 = &h.proximity_seed;
    let _ = write!(out, "proximity seed d(x,y) < d0i with d0i > D_i: {}", a3.verdict.label());
    if let Some(w) = &a3.witness {
        let _ = write!(
            out,
            " (subset {}, x={}, y={}, d={})",
            w.subset,
            fmt_point(&w.x),
            fmt_point(&w.y),
            fmt_num(w.distance)
        );
    }
    out.push('\n');
    for (label, t) in [("threshold", &h.threshold), ("strong threshold (optional)", &h.strong_threshold)] {
        let _ = writeln!(
            out,
            "{label} d0 {} {}: {} (d0 = {})",
            if t.strict { ">" } else { ">=" },
            fmt_num(t.required),
            t.verdict.label(),
            fmt_num(t.d0)
        );
    }
    let _ =
        writeln!(out, "intersecting subsets (all D_i = 0): {}", if h.intersecting { "yes" } else { "no" });
    let _ = writeln!(out, "all required hypotheses: {}", if h.all_required_pass { "PASS" } else { "FAIL" });
}

/// Human-readable report followed by a JSON block with the same content.
pub fn render_report(report: &RunReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# Scenario {}", report.scenario);
    let _ = writeln!(
        out,
        "dimension {}, {} subsets, map {}, order {}, strategy {}, tol {}, max_steps {}, rng_seed {}",
        report.dimension,
        report.subsets,
        report.map_kind,
        report.order_kind,
        report.strategy,
        fmt_num(report.tol),
        report.max_steps,
        report.rng_seed
    );
    out.push_str("\n## Subsets\n");
    for j in 0..report.subsets {
        let _ = writeln!(
            out,
            "A{}: {}, k = {}, D = {}, diam = {}",
            j + 1,
            report.region_kinds[j],
            fmt_num(report.constants[j]),
            fmt_num(report.gaps[j]),
            fmt_num(report.diameters[j])
        );
    }
    let _ = writeln!(
        out,
        "max gap D = {}, product of constants = {}",
        fmt_num(report.max_gap),
        fmt_num(report.contraction_product)
    );
    out.push_str("\n## Hypotheses\n");
    write_hypotheses(&mut out, &report.hypotheses);
    let _ = writeln!(out, "\n## Reading\n{}", report.best_proximity_reading);
    for run in &report.runs {
        let r = &run.report;
        let _ = writeln!(
            out,
            "\n## Run {} from {} (subset {})",
            run.seed_index,
            fmt_point(&r.start),
            r.start_subset
        );
        let _ = writeln!(
            out,
            "status {}, {} steps, final d_n = {}, {} steps order-certified, {} fallbacks",
            match r.status {
                Status::Converged => "converged",
                Status::Incomplete => "incomplete",
            },
            r.steps,
            fmt_opt(r.final_step_distance),
            r.order_certified_steps,
            r.fallback_steps
        );
        let b = &r.band;
        let _ = writeln!(
            out,
            "band D_i <= d_n <= D: {} (entry step {}, {} violations{})",
            match (b.holds, b.entry_step) {
                (false, _) => "violated",
                (true, Some(_)) => "holds",
                (true, None) => "not entered",
            },
            b.entry_step.map_or_else(|| "none".into(), |s| s.to_string()),
            b.violations,
            if b.degenerate { ", degenerate band reached asymptotically" } else { "" }
        );
        for s in &r.subsets {
            let _ = writeln!(
                out,
                "subset {}: {} elements, limit {}, last increment {}, d(limit, next limit) = {}, pairing residual {}, composite residual {}, proximity residual {}, chain {}",
                s.subset,
                s.elements,
                s.limit.as_ref().map_or_else(|| "n/a".into(), fmt_point),
                fmt_opt(s.final_increment),
                fmt_opt(s.adjacent_distance),
                fmt_opt(s.pairing_residual),
                fmt_opt(s.composite_residual),
                fmt_opt(s.proximity_residual),
                match s.chain_first_violation {
                    None => "ordered".to_string(),
                    Some(t) => format!("unordered at {t}"),
                }
            );
        }
        if let Some(fp) = &r.fixed_point {
            let _ = writeln!(
                out,
                "fixed point {} with d(x, Tx) = {}",
                fmt_point(&fp.point),
                fmt_num(fp.residual)
            );
        }
        if let Some(a7) = &run.limit_comparability {
            let _ = writeln!(
                out,
                "limit comparability H(Tx,Tx_n) > k d(x,x_n): {} over {} pairs",
                a7.verdict.label(),
                a7.pairs_checked
            );
        }
    }
    if let Some(u) = &report.uniqueness {
        out.push_str("\n## Uniqueness\n");
        for (j, m) in u.max_pairwise.iter().enumerate() {
            let _ = writeln!(out, "subset {}: max pairwise limit distance {}", j + 1, fmt_num(*m));
        }
        let _ = writeln!(
            out,
            "unique within {}: {}{}",
            fmt_num(u.tol),
            if u.unique { "yes" } else { "no" },
            if u.reliable { "" } else { " (unreliable: incomplete runs)" }
        );
    }
    out.push_str("\n## Machine-readable\n");
    out.push_str(&serde_json::to_string_pretty(report).expect("reports serialize"));
    out.push('\n');
    out
}

/// Writes `report.txt` and `trace_<k>.csv` (one per seed) into `out_dir`.
pub fn emit(artifacts: &RunArtifacts, out_dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir)?;
    let mut written = Vec::with_capacity(1 + artifacts.traces.len());
    let report = out_dir.join("report.txt");
    std::fs::write(&report, render_report(&artifacts.report))?;
    written.push(report);
    for (k, trace) in artifacts.traces.iter().enumerate() {
        let path = out_dir.join(format!("trace_{}.csv", k + 1));
        std::fs::write(&path, trace)?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "name": "minimal",
        "dimension": 1,
        "subsets": [
            {"kind": "interval", "lower": 0.0, "upper": 1.0},
            {"kind": "interval", "lower": 2.0, "upper": 3.0}
        ],
        "map": {"kind": "affine", "pieces": [
            {"anchor": [1.0], "offset": [2.0], "matrix": [[-0.5]]},
            {"anchor": [2.0], "offset": [1.0], "matrix": [[-0.5]]}
        ]},
        "constants": [0.5, 0.5],
        "thresholds": {"d0": 1.5, "d0i": [1.5, 1.5]},
        "seeds": [[0.3]]
    }"#;

    #[test]
    fn defaults_are_filled() {
        let s = parse_scenario(MINIMAL).unwrap();
        assert_eq!(s.doc.tol, DEFAULT_TOL);
        assert_eq!(s.doc.max_steps, DEFAULT_MAX_STEPS);
        assert_eq!(s.strategy, SelectionStrategy::Nearest);
        assert_eq!(s.order, OrderRelation::componentwise());
        assert_eq!(s.system.gaps(), &[1.0, 1.0]);
    }

    #[test]
    fn syntax_errors_carry_position() {
        let err = parse_scenario("{\n  \"name\": }").unwrap_err();
        assert!(matches!(err, ScenarioError::Syntax { line: 2, .. }), "{err:?}");
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = MINIMAL.replace("\"constants\"", "\"colour\": 1, \"constants\"");
        assert!(matches!(parse_scenario(&text), Err(ScenarioError::Syntax { .. })));
    }

    #[test]
    fn semantic_errors_name_the_field() {
        let cases = [
            (MINIMAL.replace("[0.5, 0.5]", "[1.0, 1.0]"), "constants"),
            (MINIMAL.replace("\"d0i\": [1.5, 1.5]", "\"d0i\": [1.5]"), "thresholds.d0i"),
            (MINIMAL.replace("\"d0\": 1.5", "\"d0\": -1.0"), "thresholds.d0"),
            (MINIMAL.replace("[[0.3]]", "[[1.5]]"), "seeds[0]"),
            (MINIMAL.replace("\"dimension\": 1", "\"dimension\": 2"), "subsets[0]"),
            (MINIMAL.replace("[[-0.5]]}", "[[-0.5, 1.0]]}"), "map.pieces[0].matrix"),
        ];
        for (text, field) in cases {
            match parse_scenario(&text) {
                Err(ScenarioError::Invalid { field: f, .. }) => assert_eq!(f, field),
                other => panic!("expected error on {field}, got {other:?}"),
            }
        }
    }

    #[test]
    fn product_message() {
        let err = parse_scenario(&MINIMAL.replace("[0.5, 0.5]", "[1.0, 1.0]")).unwrap_err();
        assert!(err.to_string().contains("product of constants ≥ 1"), "{err}");
    }

    #[test]
    fn per_subset_seeds_are_members() {
        let text = MINIMAL.replace("[[0.3]]", "{\"per_subset\": [2, 3]}");
        let s = parse_scenario(&text).unwrap();
        assert_eq!(s.seeds.len(), 5);
        assert_eq!(s.system.subset_index(&s.seeds[0]).unwrap(), 0);
        assert_eq!(s.system.subset_index(&s.seeds[4]).unwrap(), 1);
    }

    #[test]
    fn overrides_revalidate() {
        let s = parse_scenario(MINIMAL).unwrap();
        let t = s.with_overrides(Some(1e-6), Some(20), Some(4)).unwrap();
        assert_eq!(t.config, RunConfig { max_steps: 20, tol: 1e-6, seed: 4 });
        assert!(s.with_overrides(Some(-1.0), None, None).is_err());
        assert!(s.with_overrides(None, Some(1), None).is_err());
    }

    #[test]
    fn trace_has_one_row_per_step() {
        let s = parse_scenario(MINIMAL).unwrap();
        let art = run_scenario(&s, false).unwrap();
        let trace = &art.traces[0];
        let lines: Vec<&str> = trace.lines().collect();
        assert_eq!(lines[0], "step,subset,x1,d_n,order_certified,in_band");
        assert_eq!(lines.len() - 1, art.trajectories[0].len() - 1);
    }

    #[test]
    fn number_format_round_trips() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 12345.678901234567] {
            assert_eq!(fmt_num(x).parse::<f64>().unwrap(), x);
        }
    }
}
