//! Best proximity points of multivalued cyclic maps.
//!
//! A cyclic system is a list of compact regions `A_1, …, A_p` of R^d and a
//! multivalued map `T` with `T(A_i) ⊆ A_{i+1}` (indices wrap around). When
//! `T` satisfies a contraction condition of the form
//! `H(Tx, Ty) ≤ k_i d(x, y) + (1 − k_i) D_i` on ordered pairs, iterating it
//! produces per-subset sequences converging to points `x̄_i` with
//! `d(x̄_i, x̄_{i+1}) = D_i = d(A_i, A_{i+1})`; when the regions intersect
//! they converge to a common fixed point.
//!
//! * [`geometry`] – points, regions, Hausdorff/set distances
//! * [`order`] – partial orders and chain verification
//! * [`system`] – the cyclic map
//! * [`checks`] – sample-based hypothesis certificates
//! * [`engine`] – trajectories and convergence reports
//! * [`scenario`] – scenario documents, runs and artifacts

pub mod checks;
pub mod engine;
pub mod geometry;
pub mod order;
pub mod scenario;
pub mod system;

pub use checks::Verdict;
pub use engine::{
    convergence_report, run_trajectory, ProximityReport, RunConfig, SelectionStrategy, Trajectory,
};
pub use geometry::{Point, Region, DEFAULT_TOL};
pub use order::{OrderRelation, OrderThresholds};
pub use scenario::{parse_scenario, run_scenario, Scenario, ScenarioError};
pub use system::{CyclicSystem, MultiMap};
