//! Dirichlet problem: minimize the discrete energy among maps with
//! prescribed boundary values.
//!
//! The workhorse is geodesic barycenter iteration: sweeping the interior in
//! ascending vertex order, each vertex is replaced by the conductance-
//! weighted barycenter of its neighbor values. Each update is the exact
//! minimizer of the local convex objective, so the energy trace is
//! non-increasing, and the fixed points are exactly the maps whose interior
//! values are neighbor barycenters. A Jacobi mode updates all vertices from
//! the previous sweep in parallel; results of record use Gauss–Seidel.
//!
//! For Euclidean targets `linear_oracle` solves the harmonic system
//! componentwise by conjugate gradients to machine accuracy and serves as an
//! independent reference for the iterative path.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cat0::{self, TargetPoint, TargetSpace};
use crate::energy::{dirichlet_energy, MapField};
use crate::error::{Error, Result};
use crate::graph::{DomainGraph, VertexSubset};
use crate::laplacian::ScalarField;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    GaussSeidel,
    Jacobi,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverParams {
    pub max_sweeps: usize,
    pub tolerance: f64,
    pub mode: SweepMode,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams { max_sweeps: 100_000, tolerance: 1e-10, mode: SweepMode::GaussSeidel }
    }
}

#[derive(Debug, Clone)]
pub struct DirichletProblem<'g> {
    pub graph: &'g DomainGraph,
    pub region: VertexSubset,
    pub space: TargetSpace,
    /// boundary values, one per boundary vertex of the region
    pub boundary: Vec<(usize, TargetPoint)>,
    pub params: SolverParams,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveResult {
    pub map: MapField,
    pub residual: f64,
    pub energy_trace: Vec<f64>,
    pub sweeps: usize,
    pub converged: bool,
}

impl<'g> DirichletProblem<'g> {
    pub fn new(
        graph: &'g DomainGraph,
        region: VertexSubset,
        space: TargetSpace,
        boundary: Vec<(usize, TargetPoint)>,
        params: SolverParams,
    ) -> Result<Self> {
        if region.interior().next().is_none() {
            return Err(Error::InvalidRegion("region has empty interior".into()));
        }
        let mut covered = vec![false; graph.vertex_count()];
        for (x, p) in &boundary {
            if !region.is_boundary(*x) {
                return Err(Error::InvalidRegion(format!(
                    "value prescribed at {x}, which is not a boundary vertex"
                )));
            }
            space.validate(p)?;
            covered[*x] = true;
        }
        for x in region.boundary() {
            if !covered[x] {
                return Err(Error::InvalidRegion(format!("boundary vertex {x} has no value")));
            }
        }
        Ok(DirichletProblem { graph, region, space, boundary, params })
    }

    fn initial_map(&self) -> Result<MapField> {
        // start every vertex at the barycenter of the boundary values; it
        // lies in their convex hull so iterates stay bounded
        let points: Vec<TargetPoint> = self.boundary.iter().map(|(_, p)| p.clone()).collect();
        let weights = vec![1.0; points.len()];
        let start = cat0::weighted_barycenter(&self.space, &points, &weights)?;
        let mut map = MapField::constant(self.space.clone(), start, self.graph.vertex_count())?;
        for (x, p) in &self.boundary {
            map.points[*x] = p.clone();
        }
        Ok(map)
    }
}

fn neighbor_barycenter(
    g: &DomainGraph,
    region: &VertexSubset,
    space: &TargetSpace,
    map: &MapField,
    x: usize,
) -> Result<TargetPoint> {
    let mut pts = Vec::new();
    let mut w = Vec::new();
    for &(y, _, cond) in g.neighbors(x) {
        if region.is_member(y) {
            pts.push(map.points[y].clone());
            w.push(cond);
        }
    }
    cat0::weighted_barycenter(space, &pts, &w)
}

/// Max over interior vertices of the distance from u(x) to the
/// conductance-weighted barycenter of its neighbor values.
pub fn residual(g: &DomainGraph, u: &MapField, region: &VertexSubset) -> Result<f64> {
    let mut worst = 0.0f64;
    for x in region.interior() {
        let b = neighbor_barycenter(g, region, &u.space, u, x)?;
        worst = worst.max(u.distance_to(x, &b));
    }
    Ok(worst)
}

/// Energy minimization by barycenter sweeps.
pub fn solve_dirichlet(problem: &DirichletProblem) -> Result<SolveResult> {
    let g = problem.graph;
    let region = &problem.region;
    let mut map = problem.initial_map()?;
    let interior: Vec<usize> = region.interior().collect();
    let mut energy_trace = vec![dirichlet_energy(g, &map, region)];
    let mut sweeps = 0;
    let mut res = f64::INFINITY;
    while sweeps < problem.params.max_sweeps {
        match problem.params.mode {
            SweepMode::GaussSeidel => {
                for &x in &interior {
                    map.points[x] = neighbor_barycenter(g, region, &problem.space, &map, x)?;
                }
            }
            SweepMode::Jacobi => {
                let prev = map.clone();
                let updates: Vec<(usize, Result<TargetPoint>)> = interior
                    .par_iter()
                    .map(|&x| (x, neighbor_barycenter(g, region, &problem.space, &prev, x)))
                    .collect();
                for (x, p) in updates {
                    map.points[x] = p?;
                }
            }
        }
        sweeps += 1;
        energy_trace.push(dirichlet_energy(g, &map, region));
        // the residual costs a sweep; amortize by checking on a schedule
        if sweeps % 8 == 0 || sweeps == problem.params.max_sweeps {
            res = residual(g, &map, region)?;
            if res <= problem.params.tolerance {
                break;
            }
        }
    }
    if res.is_infinite() {
        res = residual(g, &map, region)?;
    }
    Ok(SolveResult {
        converged: res <= problem.params.tolerance,
        map,
        residual: res,
        energy_trace,
        sweeps,
    })
}

/// Componentwise harmonic solve for Euclidean targets: Σ w_xy (u(y)-u(x)) = 0
/// at interior vertices with the given boundary data, by conjugate gradients
/// on the SPD interior system to relative tolerance 1e-12.
pub fn linear_oracle(problem: &DirichletProblem) -> Result<MapField> {
    let TargetSpace::Euclidean { dim } = problem.space else {
        return Err(Error::InvalidArgument("linear_oracle needs a Euclidean target".into()));
    };
    let g = problem.graph;
    let region = &problem.region;
    let n = g.vertex_count();
    let interior: Vec<usize> = region.interior().collect();
    let mut slot = vec![usize::MAX; n];
    for (k, &x) in interior.iter().enumerate() {
        slot[x] = k;
    }
    let mut values = vec![vec![0.0; dim]; n];
    for (x, p) in &problem.boundary {
        let TargetPoint::Euclidean { coords } = p else { unreachable!() };
        values[*x] = coords.clone();
    }

    for c in 0..dim {
        // A u = b with A the conductance Laplacian restricted to interior
        let apply = |v: &[f64]| -> Vec<f64> {
            interior
                .iter()
                .map(|&x| {
                    let mut acc = 0.0;
                    for &(y, _, w) in g.neighbors(x) {
                        if !region.is_member(y) {
                            continue;
                        }
                        let vy = if slot[y] != usize::MAX { v[slot[y]] } else { 0.0 };
                        acc += w * (v[slot[x]] - vy);
                    }
                    acc
                })
                .collect()
        };
        let b: Vec<f64> = interior
            .iter()
            .map(|&x| {
                let mut acc = 0.0;
                for &(y, _, w) in g.neighbors(x) {
                    if region.is_member(y) && slot[y] == usize::MAX {
                        acc += w * values[y][c];
                    }
                }
                acc
            })
            .collect();
        let sol = cg(&apply, &b, 12 * interior.len() + 64, 1e-12);
        for (k, &x) in interior.iter().enumerate() {
            values[x][c] = sol[k];
        }
    }
    let points: Vec<TargetPoint> = values
        .into_iter()
        .map(|coords| TargetPoint::Euclidean { coords })
        .collect();
    MapField::new(problem.space.clone(), points)
}

/// Scalar Poisson solve on the interior: Σ w_xy (u(y)-u(x)) = -m(x) rhs(x)
/// (interior), u = boundary data, i.e. Δu = -rhs. Used by instance builders.
pub(crate) fn poisson_solve(
    g: &DomainGraph,
    region: &VertexSubset,
    rhs: &ScalarField,
    boundary_values: &[(usize, f64)],
) -> Result<ScalarField> {
    let n = g.vertex_count();
    let interior: Vec<usize> = region.interior().collect();
    if interior.is_empty() {
        return Err(Error::InvalidRegion("poisson solve needs interior vertices".into()));
    }
    let mut slot = vec![usize::MAX; n];
    for (k, &x) in interior.iter().enumerate() {
        slot[x] = k;
    }
    let mut values = vec![0.0; n];
    for &(x, v) in boundary_values {
        values[x] = v;
    }
    let apply = |v: &[f64]| -> Vec<f64> {
        interior
            .iter()
            .map(|&x| {
                let mut acc = 0.0;
                for &(y, _, w) in g.neighbors(x) {
                    if !region.is_member(y) {
                        continue;
                    }
                    let vy = if slot[y] != usize::MAX { v[slot[y]] } else { 0.0 };
                    acc += w * (v[slot[x]] - vy);
                }
                acc
            })
            .collect()
    };
    let b: Vec<f64> = interior
        .iter()
        .map(|&x| {
            let mut acc = g.measure(x) * rhs[x];
            for &(y, _, w) in g.neighbors(x) {
                if region.is_member(y) && slot[y] == usize::MAX {
                    acc += w * values[y];
                }
            }
            acc
        })
        .collect();
    let sol = cg(&apply, &b, 12 * interior.len() + 64, 1e-12);
    for (k, &x) in interior.iter().enumerate() {
        values[x] = sol[k];
    }
    Ok(values)
}

fn cg(apply: &dyn Fn(&[f64]) -> Vec<f64>, b: &[f64], max_iter: usize, rel_tol: f64) -> Vec<f64> {
    let n = b.len();
    let dot = |u: &[f64], v: &[f64]| -> f64 { u.iter().zip(v).map(|(a, b)| a * b).sum() };
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let target = rel_tol * rel_tol * rr.max(1e-300);
    for _ in 0..max_iter {
        if rr <= target {
            break;
        }
        let ap = apply(&p);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            break;
        }
        let alpha = rr / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cat0::MetricTree;
    use crate::graph::{build_path, build_torus_grid, torus_index};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn path_problem(g: &DomainGraph) -> DirichletProblem<'_> {
        let region =
            VertexSubset::whole_graph_with_boundary(g, vec![0, g.vertex_count() - 1]).unwrap();
        DirichletProblem::new(
            g,
            region,
            TargetSpace::Euclidean { dim: 1 },
            vec![
                (0, TargetPoint::Euclidean { coords: vec![0.0] }),
                (g.vertex_count() - 1, TargetPoint::Euclidean { coords: vec![2.0] }),
            ],
            SolverParams::default(),
        )
        .unwrap()
    }

    #[test]
    fn path_midpoint() {
        let g = build_path(3, 1.0).unwrap();
        let problem = path_problem(&g);
        let result = solve_dirichlet(&problem).unwrap();
        assert!(result.converged);
        let TargetPoint::Euclidean { coords } = &result.map.points[1] else { panic!() };
        assert!((coords[0] - 1.0).abs() < 1e-9);
        // oracle agrees
        let oracle = linear_oracle(&problem).unwrap();
        let TargetPoint::Euclidean { coords } = &oracle.points[1] else { panic!() };
        assert!((coords[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn residual_detects_perturbation() {
        let g = build_path(3, 1.0).unwrap();
        let problem = path_problem(&g);
        let mut u = linear_oracle(&problem).unwrap();
        assert!(residual(&g, &u, &problem.region).unwrap() < 1e-10);
        u.points[1] = TargetPoint::Euclidean { coords: vec![1.1] };
        let r = residual(&g, &u, &problem.region).unwrap();
        assert!((r - 0.1).abs() < 1e-12);
        // constant map has zero residual
        let c = MapField::constant(
            TargetSpace::Euclidean { dim: 1 },
            TargetPoint::Euclidean { coords: vec![0.5] },
            3,
        )
        .unwrap();
        assert_eq!(residual(&g, &c, &problem.region).unwrap(), 0.0);
    }

    fn frame_region(g: &DomainGraph, nx: usize, _ny: usize) -> VertexSubset {
        let members: Vec<bool> = (0..g.vertex_count())
            .map(|v| {
                let (i, j) = (v % nx, v / nx);
                i != 0 && j != 0
            })
            .collect();
        VertexSubset::from_members(g, members).unwrap()
    }

    #[test]
    fn affine_boundary_gives_affine_interior() {
        let nx = 9;
        let g = build_torus_grid(nx, nx, 1.0).unwrap();
        let region = frame_region(&g, nx, nx);
        let affine = |i: usize, j: usize| vec![0.5 * i as f64 - 0.25 * j as f64 + 1.0, j as f64];
        let boundary: Vec<(usize, TargetPoint)> = region
            .boundary()
            .map(|v| {
                let (i, j) = (v % nx, v / nx);
                (v, TargetPoint::Euclidean { coords: affine(i, j) })
            })
            .collect();
        let problem = DirichletProblem::new(
            &g,
            region,
            TargetSpace::Euclidean { dim: 2 },
            boundary,
            SolverParams { tolerance: 1e-11, ..Default::default() },
        )
        .unwrap();
        let result = solve_dirichlet(&problem).unwrap();
        assert!(result.converged);
        for v in problem.region.interior() {
            let (i, j) = (v % nx, v / nx);
            let TargetPoint::Euclidean { coords } = &result.map.points[v] else { panic!() };
            let expect = affine(i, j);
            assert!((coords[0] - expect[0]).abs() < 1e-7, "vertex {v}");
            assert!((coords[1] - expect[1]).abs() < 1e-7);
        }
    }

    #[test]
    fn energy_trace_non_increasing_and_oracle_agreement() {
        let nx = 12;
        let g = build_torus_grid(nx, nx, 1.0).unwrap();
        let region = frame_region(&g, nx, nx);
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let boundary: Vec<(usize, TargetPoint)> = region
            .boundary()
            .map(|v| {
                (v, TargetPoint::Euclidean { coords: vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)] })
            })
            .collect();
        let problem = DirichletProblem::new(
            &g,
            region,
            TargetSpace::Euclidean { dim: 2 },
            boundary,
            SolverParams { tolerance: 1e-10, ..Default::default() },
        )
        .unwrap();
        let result = solve_dirichlet(&problem).unwrap();
        assert!(result.converged);
        let scale = result.energy_trace[0].abs() + 1.0;
        for w in result.energy_trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-12 * scale);
        }
        let oracle = linear_oracle(&problem).unwrap();
        let max_dev = problem
            .region
            .members()
            .map(|x| {
                cat0::distance(&problem.space, &result.map.points[x], &oracle.points[x]).unwrap()
            })
            .fold(0.0f64, f64::max);
        assert!(max_dev <= 1e-6, "solver vs oracle deviation {max_dev}");
        // boundary values are untouched bit-exactly
        for (x, p) in &problem.boundary {
            assert_eq!(&result.map.points[*x], p);
        }
    }

    #[test]
    fn oracle_maximum_principle() {
        // two pinned vertices at 0 and 1: all values in [0, 1]
        let nx = 8;
        let g = build_torus_grid(nx, nx, 1.0).unwrap();
        let pin_a = torus_index(nx, nx, 2, 3);
        let pin_b = torus_index(nx, nx, 6, 6);
        let region = VertexSubset::whole_graph_with_boundary(&g, vec![pin_a, pin_b]).unwrap();
        let problem = DirichletProblem::new(
            &g,
            region,
            TargetSpace::Euclidean { dim: 1 },
            vec![
                (pin_a, TargetPoint::Euclidean { coords: vec![0.0] }),
                (pin_b, TargetPoint::Euclidean { coords: vec![1.0] }),
            ],
            SolverParams::default(),
        )
        .unwrap();
        let u = linear_oracle(&problem).unwrap();
        for p in &u.points {
            let TargetPoint::Euclidean { coords } = p else { panic!() };
            assert!(coords[0] >= -1e-9 && coords[0] <= 1.0 + 1e-9);
        }
        assert!(linear_oracle(&DirichletProblem {
            space: TargetSpace::Hyperbolic,
            ..problem.clone()
        })
        .is_err());
    }

    #[test]
    fn tripod_target_stays_on_spanning_path() {
        // boundary at two different leaf tips: the image lies on the path
        // through the center
        let t = MetricTree::tripod();
        let space = TargetSpace::Tree(t.clone());
        let g = build_path(5, 1.0).unwrap();
        let region = VertexSubset::whole_graph_with_boundary(&g, vec![0, 4]).unwrap();
        let (e1, o1) = t.vertex_point(1);
        let (e2, o2) = t.vertex_point(2);
        let problem = DirichletProblem::new(
            &g,
            region,
            space.clone(),
            vec![
                (0, TargetPoint::Tree { edge: e1, offset: o1 }),
                (4, TargetPoint::Tree { edge: e2, offset: o2 }),
            ],
            SolverParams::default(),
        )
        .unwrap();
        let result = solve_dirichlet(&problem).unwrap();
        assert!(result.converged);
        // exhaustive oracle: discretize tree positions on edges 0 and 1,
        // the energy-minimal profile is the evenly spaced one on the a-b path
        for (x, p) in result.map.points.iter().enumerate() {
            let TargetPoint::Tree { edge, .. } = p else { panic!() };
            assert!(*edge == e1 || *edge == e2, "vertex {x} on edge {edge}");
            let tip3 = t.vertex_point(3);
            let d3 = cat0::distance(
                &space,
                p,
                &TargetPoint::Tree { edge: tip3.0, offset: tip3.1 },
            )
            .unwrap();
            assert!(d3 >= 1.0 - 1e-9, "image strayed into the third branch");
        }
    }

    #[test]
    fn jacobi_and_seeds_agree() {
        // uniqueness probe: Gauss-Seidel and Jacobi converge to the same map
        let nx = 8;
        let g = build_torus_grid(nx, nx, 1.0).unwrap();
        let region = frame_region(&g, nx, nx);
        let t = MetricTree::tripod();
        let space = TargetSpace::Tree(t.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let boundary: Vec<(usize, TargetPoint)> = region
            .boundary()
            .map(|v| (v, space.sample_point(&mut rng, 1.0)))
            .collect();
        let make = |mode| {
            DirichletProblem::new(
                &g,
                region.clone(),
                space.clone(),
                boundary.clone(),
                SolverParams { mode, tolerance: 1e-10, ..Default::default() },
            )
            .unwrap()
        };
        let gs = solve_dirichlet(&make(SweepMode::GaussSeidel)).unwrap();
        let ja = solve_dirichlet(&make(SweepMode::Jacobi)).unwrap();
        assert!(gs.converged && ja.converged);
        let dev = region
            .members()
            .map(|x| cat0::distance(&space, &gs.map.points[x], &ja.map.points[x]).unwrap())
            .fold(0.0f64, f64::max);
        assert!(dev <= 1e-6, "two modes differ by {dev}");
    }
}
