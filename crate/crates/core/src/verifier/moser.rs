//! Moser-type sup bound for subsolutions.
//!
//! For Δf ≥ -R⁻²(α f + β) on U the conclusion is
//!
//!   ‖f⁺‖_{L∞(B_{λr})} ≤ C₁ · avg_{B_r} f⁺ + β (r²/R²) C₂
//!
//! with constants depending on (α⁺, 1/(1-λ), K⁻R², N) only. The constants
//! are not explicit, so they are fitted once per graph family on a
//! calibration suite and frozen; fresh instances must satisfy the frozen
//! bounds.

use crate::error::{Error, Result};
use crate::graph::{DomainGraph, VertexSubset};
use crate::laplacian::ScalarField;
use crate::report::{CheckReport, Gate};
use crate::solver;

pub struct MoserMeasurement {
    pub sup_small: f64,
    pub avg_plus: f64,
    /// (sup_small - c1 * avg_plus)⁺ · R² / (β r²), the C₂ usage; zero when β = 0
    pub c2_usage: f64,
}

fn laplacian_on(g: &DomainGraph, region: &VertexSubset, f: &ScalarField, x: usize) -> f64 {
    let fx = f[x];
    g.neighbors(x)
        .iter()
        .filter(|&&(y, _, _)| region.is_member(y))
        .map(|&(y, _, w)| w * (f[y] - fx))
        .sum::<f64>()
        / g.measure(x)
}

/// Verifies the differential inequality pointwise and measures both sides of
/// the sup bound.
#[allow(clippy::too_many_arguments)]
pub fn moser_measure(
    g: &DomainGraph,
    f: &ScalarField,
    region: &VertexSubset,
    center: usize,
    r: f64,
    alpha: f64,
    beta: f64,
    big_r: f64,
    lambda: f64,
    c1: f64,
) -> Result<MoserMeasurement> {
    if beta < 0.0 {
        return Err(Error::InvalidArgument("moser needs beta >= 0".into()));
    }
    if !(lambda > 0.0 && lambda < 1.0) || !(r > 0.0 && r <= big_r) {
        return Err(Error::InvalidArgument("moser needs 0 < lambda < 1, 0 < r <= R".into()));
    }
    // pointwise subsolution check on the interior
    for x in region.interior() {
        let lap = laplacian_on(g, region, f, x);
        let rhs = -(alpha * f[x] + beta) / (big_r * big_r);
        if lap < rhs - 1e-9 {
            return Err(Error::Precondition(format!(
                "Δf ≥ -R⁻²(αf+β) fails at vertex {x} by {:.3e}",
                rhs - lap
            )));
        }
    }
    let ball = g.ball(center, r)?;
    let small = g.ball(center, lambda * r)?;
    if !region.contains_all(&ball) {
        return Err(Error::Precondition("moser ball is not inside the region".into()));
    }
    let sup_small = small.members().map(|x| f[x].max(0.0)).fold(0.0f64, f64::max);
    let mut mass = 0.0;
    let mut acc = 0.0;
    for x in ball.members() {
        acc += f[x].max(0.0) * g.measure(x);
        mass += g.measure(x);
    }
    let avg_plus = acc / mass;
    let c2_usage = if beta > 0.0 {
        (sup_small - c1 * avg_plus).max(0.0) * big_r * big_r / (beta * r * r)
    } else {
        0.0
    };
    Ok(MoserMeasurement { sup_small, avg_plus, c2_usage })
}

/// Check against frozen constants (C₁, C₂).
#[allow(clippy::too_many_arguments)]
pub fn check_moser_conclusion(
    g: &DomainGraph,
    f: &ScalarField,
    region: &VertexSubset,
    center: usize,
    r: f64,
    alpha: f64,
    beta: f64,
    big_r: f64,
    lambda: f64,
    c1: f64,
    c2: f64,
) -> Result<CheckReport> {
    let m = match moser_measure(g, f, region, center, r, alpha, beta, big_r, lambda, c1) {
        Ok(m) => m,
        Err(Error::Precondition(msg)) => {
            return Ok(CheckReport::precondition_failure("moser_conclusion", Gate::Trend, &msg))
        }
        Err(e) => return Err(e),
    };
    let bound = c1 * m.avg_plus + beta * r * r / (big_r * big_r) * c2;
    let viol = m.sup_small - bound;
    Ok(CheckReport::new("moser_conclusion", Gate::Trend, viol, 0.0).with_note(&format!(
        "sup={:.6} bound={bound:.6} C1={c1} C2={c2} alpha={alpha} beta={beta}",
        m.sup_small
    )))
}

/// Harmonic instance: scalar linear-oracle solve with seeded boundary data.
pub fn harmonic_instance(
    g: &DomainGraph,
    region: &VertexSubset,
    seed: u64,
) -> Result<ScalarField> {
    use rand::prelude::*;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let boundary: Vec<(usize, f64)> =
        region.boundary().map(|x| (x, rng.gen_range(-1.0..1.0))).collect();
    let zero = vec![0.0; g.vertex_count()];
    solver::poisson_solve(g, region, &zero, &boundary)
}

/// Subsolution instance with Δf = -β/R² on the interior and zero boundary
/// data (a discrete torsion function scaled by β).
pub fn torsion_instance(
    g: &DomainGraph,
    region: &VertexSubset,
    beta: f64,
    big_r: f64,
) -> Result<ScalarField> {
    let rhs: ScalarField = vec![beta / (big_r * big_r); g.vertex_count()];
    let boundary: Vec<(usize, f64)> = region.boundary().map(|x| (x, 0.0)).collect();
    solver::poisson_solve(g, region, &rhs, &boundary)
}
