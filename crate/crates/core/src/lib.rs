//! # npc-core
//!
//! A numerical laboratory for harmonic maps from discretized metric-measure
//! domains into nonpositively curved (CAT(0)) target spaces.
//!
//! The crate is organized around the objects it computes with:
//!
//! * [`graph`] — weighted graphs standing in for metric-measure spaces,
//!   with model-space generators (path, flat torus, hyperbolic disk).
//! * [`laplacian`] — the weighted graph Laplacian, heat semigroup and heat
//!   kernel, and the calculus of upper Laplacian bounds (Duhamel bound,
//!   stability under minima, comparison diagnostics).
//! * [`cat0`] — CAT(0) target geometries (Euclidean, metric trees, the
//!   hyperbolic plane, products) with geodesics, barycenters and the
//!   comparison/quadrilateral inequalities as testable properties.
//! * [`energy`] — Korevaar–Schoen approximating energies, energy density,
//!   local Lipschitz slope and the probe-based weak gradient.
//! * [`solver`] — the Dirichlet problem solved by geodesic barycenter
//!   iteration, with an exact linear oracle for Euclidean targets.
//! * [`hopf_lax`] — the two-variable Hopf-Lax evolution, tilt and slope
//!   estimates, and the proximal map with its pushforward-density bound.
//! * [`verifier`] — scenario-level checks of the regularity theory on solved
//!   harmonic maps (subharmonicity, reverse Poincaré, Lipschitz estimate,
//!   Zhang-Zhong-Zhu, Rademacher, Moser conclusion, Liouville experiment).

pub mod cat0;
pub mod csvio;
pub mod energy;
pub mod error;
pub mod graph;
pub mod hopf_lax;
pub mod laplacian;
pub mod report;
pub mod solver;
pub mod verifier;

pub use cat0::{MetricTree, TargetPoint, TargetSpace};
pub use energy::{EnergyProfile, MapField};
pub use error::{Error, Result};
pub use graph::{
    build_hyperbolic_disk, build_path, build_torus_grid, graph_distance, torus_index, DomainGraph,
    Edge, VertexSubset,
};
pub use hopf_lax::{HopfLaxResult, ProxResult, TwoVarFunction};
pub use laplacian::{LaplacianBoundClaim, ScalarField};
pub use report::{CheckReport, Gate};
pub use solver::{DirichletProblem, SolveResult, SolverParams};
pub use verifier::{RefinementStudy, Scenario};
