//! Frozen calibration constants.
//!
//! The regularity constants (reverse Poincaré, Lipschitz estimate, Moser
//! C₁/C₂) are not explicit, so they are measured once on a calibration
//! suite and frozen here with 1.5× headroom; fresh seeds must stay under
//! these bounds. Rerun `cargo run --example calibrate` after changing the
//! suite and update the table from its output.
//!
//! Calibration suite: torus frame-complement scenarios (12×12, spacing 1,
//! anchored boundary data, seeds 101..=105, levels 0..3) for the c_emp /
//! C_emp bounds; scalar harmonic and torsion instances (seeds 101..=110)
//! for the Moser pair at λ = 1/2. Measured maxima:
//!   euclidean  rp 1.0184  lip 1.4689
//!   tree       rp 0.9034  lip 1.7373
//!   hyperbolic rp 1.1148  lip 1.4244
//!   moser torus C1 2.1958  C2 1.4529 (avg term zeroed)
//!   moser path  C1 2.0270  C2 3.1250

use crate::cat0::TargetSpace;

fn target_name(t: &TargetSpace) -> &'static str {
    match t {
        TargetSpace::Euclidean { .. } => "euclidean",
        TargetSpace::Tree(_) => "tree",
        TargetSpace::Hyperbolic => "hyperbolic",
        TargetSpace::Product { .. } => "product",
    }
}

/// Upper bound on the empirical reverse-Poincaré constant c_emp.
pub fn reverse_poincare_bound(family: &str, target: &TargetSpace) -> Option<f64> {
    match (family, target_name(target)) {
        ("torus", "euclidean") => Some(1.53),
        ("torus", "tree") => Some(1.36),
        ("torus", "hyperbolic") => Some(1.68),
        _ => None,
    }
}

/// Upper bound on the empirical Lipschitz-estimate constant C_emp.
pub fn lipschitz_estimate_bound(family: &str, target: &TargetSpace) -> Option<f64> {
    match (family, target_name(target)) {
        ("torus", "euclidean") => Some(2.21),
        ("torus", "tree") => Some(2.61),
        ("torus", "hyperbolic") => Some(2.14),
        _ => None,
    }
}

/// Frozen Moser constants (C₁, C₂) per graph family at λ = 1/2.
pub fn moser_constants(family: &str) -> (f64, f64) {
    match family {
        "torus" => (3.30, 2.18),
        "path" => (3.05, 4.69),
        _ => (4.0, 5.0),
    }
}
