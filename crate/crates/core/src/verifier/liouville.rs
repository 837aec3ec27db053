//! Liouville experiment on growing flat grids.
//!
//! Harmonic maps with sublinear growth on a K = 0 family must flatten:
//! solving Dirichlet problems on L×L grids with boundary oscillation ∝ L^a
//! (a < 1), the interior Lipschitz constant on the centered L/2 box scales
//! like L^{a-1}, so it must drop by at least a factor ~2^{1-a} per doubling
//! of L. The pass criterion asks for a factor 1.8 at a = 0.

use crate::error::{Error, Result};
use crate::graph::{build_torus_grid, torus_index, VertexSubset};
use crate::report::{CheckReport, Gate};
use crate::solver::{linear_oracle, DirichletProblem, SolverParams};
use crate::{cat0::TargetPoint, cat0::TargetSpace, energy::lip_slope_on, energy::MapField};

pub struct LiouvilleLevel {
    pub size: usize,
    pub interior_lip: f64,
}

/// Boundary data on the double frame around the excluded axis slit:
/// amplitude L^a times a fixed smooth profile of the normalized coordinates.
fn boundary_value(exponent: f64, l: usize, i: usize, j: usize) -> f64 {
    let s = i as f64 / l as f64;
    let t = j as f64 / l as f64;
    (l as f64).powf(exponent)
        * ((std::f64::consts::TAU * s).sin() + (std::f64::consts::TAU * t).cos())
}

pub fn liouville_level(size: usize, exponent: f64) -> Result<LiouvilleLevel> {
    if size < 8 {
        return Err(Error::InvalidArgument("liouville grid must be at least 8".into()));
    }
    let g = build_torus_grid(size, size, 1.0)?;
    let members: Vec<bool> = (0..g.vertex_count())
        .map(|v| {
            let (i, j) = (v % size, v / size);
            i != 0 && j != 0
        })
        .collect();
    let region = VertexSubset::from_members(&g, members)?;
    let boundary: Vec<(usize, TargetPoint)> = region
        .boundary()
        .map(|v| {
            let (i, j) = (v % size, v / size);
            (v, TargetPoint::Euclidean { coords: vec![boundary_value(exponent, size, i, j)] })
        })
        .collect();
    let problem = DirichletProblem::new(
        &g,
        region.clone(),
        TargetSpace::Euclidean { dim: 1 },
        boundary,
        SolverParams::default(),
    )?;
    let u = linear_oracle(&problem)?;
    let lip = lip_slope_on(&g, &u, &region);
    let mut interior_lip = 0.0f64;
    for j in size / 4..3 * size / 4 {
        for i in size / 4..3 * size / 4 {
            interior_lip = interior_lip.max(lip[torus_index(size, size, i, j)]);
        }
    }
    Ok(LiouvilleLevel { size, interior_lip })
}

/// Runs the experiment over doubling grid sizes; passes iff the interior lip
/// decreases by at least `min_factor` per doubling.
pub fn liouville_experiment(
    sizes: &[usize],
    exponent: f64,
    min_factor: f64,
) -> Result<(CheckReport, Vec<LiouvilleLevel>)> {
    if exponent >= 1.0 {
        return Err(Error::InvalidArgument("liouville needs a sublinear exponent < 1".into()));
    }
    if sizes.len() < 2 {
        return Err(Error::InvalidArgument("liouville needs at least two sizes".into()));
    }
    let levels: Vec<LiouvilleLevel> =
        sizes.iter().map(|&l| liouville_level(l, exponent)).collect::<Result<_>>()?;
    let mut worst_factor = f64::INFINITY;
    for w in levels.windows(2) {
        let doublings = (w[1].size as f64 / w[0].size as f64).log2();
        let factor = (w[0].interior_lip / w[1].interior_lip.max(1e-300)).powf(1.0 / doublings);
        worst_factor = worst_factor.min(factor);
    }
    let viol = min_factor - worst_factor;
    let lips: Vec<String> =
        levels.iter().map(|l| format!("L={}:{:.3e}", l.size, l.interior_lip)).collect();
    let report = CheckReport::new("liouville", Gate::Trend, viol, 0.0).with_note(&format!(
        "decay_factor_per_doubling={worst_factor:.3} exponent={exponent} [{}]",
        lips.join(" ")
    ));
    Ok((report, levels))
}

/// Constant boundary data gives a constant interior map (lip 0); used as a
/// degenerate control in the tests.
pub fn liouville_constant_control(size: usize) -> Result<f64> {
    let g = build_torus_grid(size, size, 1.0)?;
    let members: Vec<bool> = (0..g.vertex_count())
        .map(|v| {
            let (i, j) = (v % size, v / size);
            i != 0 && j != 0
        })
        .collect();
    let region = VertexSubset::from_members(&g, members)?;
    let boundary: Vec<(usize, TargetPoint)> = region
        .boundary()
        .map(|v| (v, TargetPoint::Euclidean { coords: vec![0.75] }))
        .collect();
    let problem = DirichletProblem::new(
        &g,
        region.clone(),
        TargetSpace::Euclidean { dim: 1 },
        boundary,
        SolverParams::default(),
    )?;
    let u: MapField = linear_oracle(&problem)?;
    let lip = lip_slope_on(&g, &u, &region);
    Ok(lip.iter().cloned().fold(0.0f64, f64::max))
}
