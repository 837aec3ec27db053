//! Korevaar–Schoen approximating energies and slopes for target-valued maps.
//!
//! For u : vertices → Y the scale-r energy density is
//!
//!   ks_r(x)² = (1/m(B_r(x))) Σ_{y ∈ B_r(x)} d_Y²(u(x), u(y)) m(y) / r²,
//!
//! set to zero when B_r(x) is not contained in the region. The limit density
//! e₂[u] is approximated by a linear fit of ks² in r over the smallest
//! admissible scales; the per-vertex fit residual is recorded so downstream
//! checks can widen tolerances where the extrapolation is poor.
//!
//! `lip_slope` is the neighbor-restricted local Lipschitz constant and
//! `weak_gradient` its probe-based lower realization via post-composition
//! with the 1-Lipschitz functions d_Y(·, p): always ≤ lip_slope, and equal
//! in the limit for rich probe sets.

use serde::{Deserialize, Serialize};

use crate::cat0::{self, TargetPoint, TargetSpace};
use crate::error::{Error, Result};
use crate::graph::{DomainGraph, VertexSubset};
use crate::laplacian::ScalarField;

/// Assignment of a target point to every vertex.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MapField {
    pub space: TargetSpace,
    pub points: Vec<TargetPoint>,
}

impl MapField {
    pub fn new(space: TargetSpace, points: Vec<TargetPoint>) -> Result<Self> {
        for p in &points {
            space.validate(p)?;
        }
        Ok(MapField { space, points })
    }

    pub fn constant(space: TargetSpace, point: TargetPoint, n: usize) -> Result<Self> {
        space.validate(&point)?;
        Ok(MapField { space, points: vec![point; n] })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn distance(&self, x: usize, y: usize) -> f64 {
        cat0::distance(&self.space, &self.points[x], &self.points[y])
            .expect("points of a MapField belong to its space")
    }

    pub fn distance_to(&self, x: usize, p: &TargetPoint) -> f64 {
        cat0::distance(&self.space, &self.points[x], p)
            .expect("points of a MapField belong to its space")
    }

    /// Scalar post-composition d_Y(u(·), p).
    pub fn distance_field(&self, p: &TargetPoint) -> ScalarField {
        (0..self.len()).map(|x| self.distance_to(x, p)).collect()
    }
}

/// Per-scale KS densities with the extrapolated limit field.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnergyProfile {
    pub scales: Vec<f64>,
    pub per_scale: Vec<ScalarField>,
    pub e2: ScalarField,
    pub fit_residual: ScalarField,
}

/// Scale-r KS density (the field of ks values, not squared).
pub fn ks_density(g: &DomainGraph, u: &MapField, region: &VertexSubset, r: f64) -> Result<ScalarField> {
    if !(r > 0.0) {
        return Err(Error::InvalidArgument("ks scale must be positive".into()));
    }
    let n = g.vertex_count();
    let mut out = vec![0.0; n];
    for x in 0..n {
        if !region.is_member(x) {
            continue;
        }
        let dist = g.distances_from(x);
        // B_r(x) ⊂ region required, else the density is zero by convention
        let mut mass = 0.0;
        let mut acc = 0.0;
        let mut inside = true;
        for y in 0..n {
            if dist[y] < r {
                if !region.is_member(y) {
                    inside = false;
                    break;
                }
                let d = u.distance(x, y);
                acc += d * d * g.measure(y);
                mass += g.measure(y);
            }
        }
        if inside && mass > 0.0 {
            out[x] = (acc / (mass * r * r)).sqrt();
        }
    }
    Ok(out)
}

/// Per-scale densities plus the small-r limit by a linear fit of ks²(r) in r
/// over the three smallest scales.
pub fn energy_density(
    g: &DomainGraph,
    u: &MapField,
    region: &VertexSubset,
    scales: &[f64],
) -> Result<EnergyProfile> {
    if scales.len() < 3 {
        return Err(Error::InvalidArgument("need at least 3 scales".into()));
    }
    for w in scales.windows(2) {
        if !(w[0] > w[1]) {
            return Err(Error::InvalidArgument("scales must be strictly decreasing".into()));
        }
    }
    if *scales.last().unwrap() <= 2.0 * g.mesh_scale() {
        return Err(Error::InvalidArgument("scales must exceed 2 * mesh_scale".into()));
    }
    let per_scale: Vec<ScalarField> = scales
        .iter()
        .map(|&r| ks_density(g, u, region, r))
        .collect::<Result<_>>()?;
    let n = g.vertex_count();
    let k = scales.len();
    // fit ks²(r) ≈ a + b r on the three smallest scales, e₂ = sqrt(a⁺)
    let fit_scales = &scales[k - 3..];
    let mut e2 = vec![0.0; n];
    let mut fit_residual = vec![0.0; n];
    let sx: f64 = fit_scales.iter().sum();
    let sxx: f64 = fit_scales.iter().map(|r| r * r).sum();
    let det = 3.0 * sxx - sx * sx;
    for x in 0..n {
        let ys: Vec<f64> = (k - 3..k).map(|i| per_scale[i][x] * per_scale[i][x]).collect();
        let sy: f64 = ys.iter().sum();
        let sxy: f64 = fit_scales.iter().zip(&ys).map(|(r, y)| r * y).sum();
        let a = (sxx * sy - sx * sxy) / det;
        let b = (3.0 * sxy - sx * sy) / det;
        e2[x] = a.max(0.0).sqrt();
        let rms: f64 = fit_scales
            .iter()
            .zip(&ys)
            .map(|(r, y)| {
                let p = a + b * r;
                (y - p) * (y - p)
            })
            .sum::<f64>();
        fit_residual[x] = (rms / 3.0).sqrt();
    }
    Ok(EnergyProfile { scales: scales.to_vec(), per_scale, e2, fit_residual })
}

/// Heat-kernel energy (1/t) Σ_y d_Y²(u(x), u(y)) ρ_t[x](y) m(y); its small-t
/// trend tracks 2(d+2) e₂[u]²(x).
pub fn heat_kernel_energy(g: &DomainGraph, u: &MapField, x: usize, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::InvalidArgument("heat-kernel energy needs t > 0".into()));
    }
    let kernel = crate::laplacian::heat_kernel(g, x, t)?;
    let mut acc = 0.0;
    for y in 0..g.vertex_count() {
        let d = u.distance(x, y);
        acc += d * d * kernel[y] * g.measure(y);
    }
    Ok(acc / t)
}

/// Neighbor-restricted local Lipschitz constant
/// lip u(x) = max_{y ~ x} d_Y(u(y), u(x)) / ℓ_xy.
pub fn lip_slope(g: &DomainGraph, u: &MapField) -> ScalarField {
    (0..g.vertex_count())
        .map(|x| {
            g.neighbors(x)
                .iter()
                .map(|&(y, len, _)| u.distance(x, y) / len)
                .fold(0.0f64, f64::max)
        })
        .collect()
}

/// Same slope restricted to edges inside a region.
pub fn lip_slope_on(g: &DomainGraph, u: &MapField, region: &VertexSubset) -> ScalarField {
    (0..g.vertex_count())
        .map(|x| {
            if !region.is_member(x) {
                return 0.0;
            }
            g.neighbors(x)
                .iter()
                .filter(|&&(y, _, _)| region.is_member(y))
                .map(|&(y, len, _)| u.distance(x, y) / len)
                .fold(0.0f64, f64::max)
        })
        .collect()
}

/// Probe realization of the minimal weak upper gradient:
/// |du|(x) ≈ max over probes p of the scalar slope of d_Y(u(·), p).
/// Always ≤ lip_slope pointwise since post-composition is 1-Lipschitz.
pub fn weak_gradient(g: &DomainGraph, u: &MapField, probes: &[TargetPoint]) -> Result<ScalarField> {
    if probes.is_empty() {
        return Err(Error::InvalidArgument("weak_gradient needs at least one probe".into()));
    }
    let n = g.vertex_count();
    let mut out: Vec<f64> = vec![0.0; n];
    for p in probes {
        u.space.validate(p)?;
        let field = u.distance_field(p);
        for x in 0..n {
            let slope = g
                .neighbors(x)
                .iter()
                .map(|&(y, len, _)| (field[y] - field[x]).abs() / len)
                .fold(0.0f64, f64::max);
            out[x] = out[x].max(slope);
        }
    }
    Ok(out)
}

/// Farthest-point sampling of the image of u, the default probe set.
pub fn farthest_point_probes(u: &MapField, count: usize) -> Vec<TargetPoint> {
    let n = u.len();
    if n == 0 || count == 0 {
        return Vec::new();
    }
    let mut chosen: Vec<usize> = vec![0];
    let mut min_dist: Vec<f64> = (0..n).map(|x| u.distance(0, x)).collect();
    while chosen.len() < count.min(n) {
        let (next, &d) = min_dist
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap();
        if d <= 1e-14 {
            break; // image exhausted
        }
        chosen.push(next);
        for x in 0..n {
            min_dist[x] = min_dist[x].min(u.distance(next, x));
        }
    }
    chosen.into_iter().map(|x| u.points[x].clone()).collect()
}

/// Discrete Dirichlet energy E(u) = ½ Σ_{edges xy ⊂ U} w_xy d_Y²(u(x), u(y)).
pub fn dirichlet_energy(g: &DomainGraph, u: &MapField, region: &VertexSubset) -> f64 {
    g.edges()
        .iter()
        .filter(|e| region.is_member(e.a) && region.is_member(e.b))
        .map(|e| {
            let d = u.distance(e.a, e.b);
            0.5 * e.conductance * d * d
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cat0::MetricTree;
    use crate::graph::build_path;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn linear_path_map(n: usize, spacing: f64) -> (DomainGraph, MapField, VertexSubset) {
        let g = build_path(n, spacing).unwrap();
        let space = TargetSpace::Euclidean { dim: 1 };
        let points = (0..n)
            .map(|i| TargetPoint::Euclidean { coords: vec![i as f64 * spacing] })
            .collect();
        let u = MapField::new(space, points).unwrap();
        let all = VertexSubset::from_members(&g, vec![true; n]).unwrap();
        (g, u, all)
    }

    #[test]
    fn ks_density_example() {
        let (g, u, all) = linear_path_map(5, 1.0);
        let ks = ks_density(&g, &u, &all, 1.5).unwrap();
        // (1/3)(1 + 0 + 1)/1.5² at the middle vertex
        let expect = (2.0f64 / (3.0 * 1.5 * 1.5)).sqrt();
        assert!((ks[2] - expect).abs() < 1e-12);
        // constant map: zero field
        let c = MapField::constant(
            TargetSpace::Euclidean { dim: 1 },
            TargetPoint::Euclidean { coords: vec![2.0] },
            5,
        )
        .unwrap();
        assert!(ks_density(&g, &c, &all, 1.5).unwrap().iter().all(|&v| v == 0.0));
        // scale below every edge: B_r(x) = {x}, zero
        assert!(ks_density(&g, &u, &all, 0.5).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn energy_density_linear_map() {
        // u(x) = x on a fine grid: e₂² → |u'|²/3 = 1/3 in one dimension
        let (g, u, all) = linear_path_map(401, 0.01);
        let h = g.mesh_scale();
        let scales = vec![5.5 * h, 4.5 * h, 3.5 * h];
        let profile = energy_density(&g, &u, &all, &scales).unwrap();
        let mid = 200;
        let e2sq = profile.e2[mid] * profile.e2[mid];
        assert!((e2sq - 1.0 / 3.0).abs() < 0.05, "e2² = {e2sq}");
        // scaling u → λu scales e₂ by |λ|
        let lam = 2.5;
        let scaled_pts: Vec<TargetPoint> = u
            .points
            .iter()
            .map(|p| match p {
                TargetPoint::Euclidean { coords } => {
                    TargetPoint::Euclidean { coords: coords.iter().map(|c| lam * c).collect() }
                }
                _ => unreachable!(),
            })
            .collect();
        let v = MapField::new(u.space.clone(), scaled_pts).unwrap();
        let profile_v = energy_density(&g, &v, &all, &scales).unwrap();
        assert!((profile_v.e2[mid] - lam * profile.e2[mid]).abs() < 1e-9);
        // bad scales rejected
        assert!(energy_density(&g, &u, &all, &[3.5 * h, 4.5 * h, 5.5 * h]).is_err());
        assert!(energy_density(&g, &u, &all, &[5.5 * h, 4.5 * h]).is_err());
    }

    #[test]
    fn heat_kernel_energy_examples() {
        // constant map: zero for all t
        let (g, _, _) = linear_path_map(5, 1.0);
        let c = MapField::constant(
            TargetSpace::Euclidean { dim: 1 },
            TargetPoint::Euclidean { coords: vec![0.0] },
            5,
        )
        .unwrap();
        assert_eq!(heat_kernel_energy(&g, &c, 2, 0.7).unwrap(), 0.0);

        // two-vertex closed form: (1/t) ρ_t[0](1) m(1) d²
        let g2 = DomainGraph::new(
            vec![1.0, 1.0],
            vec![crate::graph::Edge { a: 0, b: 1, length: 1.0, conductance: 1.0 }],
            0.0,
            1.0,
        )
        .unwrap();
        let u2 = MapField::new(
            TargetSpace::Euclidean { dim: 1 },
            vec![
                TargetPoint::Euclidean { coords: vec![0.0] },
                TargetPoint::Euclidean { coords: vec![1.0] },
            ],
        )
        .unwrap();
        let t = 0.8;
        let got = heat_kernel_energy(&g2, &u2, 0, t).unwrap();
        let rho = 0.5 - 0.5 * (-2.0 * t).exp();
        assert!((got - rho / t).abs() < 1e-12);
    }

    #[test]
    fn heat_kernel_energy_matches_e2_on_fine_path() {
        // linear map: the small-t value approaches 2(d+2) e₂² = 2·3·(1/3) = 2
        let (g, u, _) = linear_path_map(401, 0.01);
        let mid = 200;
        let v = heat_kernel_energy(&g, &u, mid, 0.01).unwrap();
        assert!((v - 2.0).abs() / 2.0 < 0.10, "heat-kernel energy {v}");
    }

    #[test]
    fn lip_slope_examples() {
        let (g, u, _) = linear_path_map(6, 1.0);
        assert!(lip_slope(&g, &u).iter().all(|&v| (v - 1.0).abs() < 1e-12));

        // tripod-valued jump of tree-distance 2 across a unit edge
        let t = MetricTree::tripod();
        let space = TargetSpace::Tree(t.clone());
        let g = build_path(2, 1.0).unwrap();
        let (e1, o1) = t.vertex_point(1);
        let (e2, o2) = t.vertex_point(2);
        let u = MapField::new(
            space,
            vec![
                TargetPoint::Tree { edge: e1, offset: o1 },
                TargetPoint::Tree { edge: e2, offset: o2 },
            ],
        )
        .unwrap();
        let lip = lip_slope(&g, &u);
        assert!((lip[0] - 2.0).abs() < 1e-12 && (lip[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn weak_gradient_bounds_and_saturation() {
        let (g, u, _) = linear_path_map(10, 0.5);
        // probes = image saturate in one dimension
        let wg = weak_gradient(&g, &u, &u.points).unwrap();
        let lip = lip_slope(&g, &u);
        for x in 0..10 {
            assert!(wg[x] <= lip[x] + 1e-12);
            assert!((wg[x] - lip[x]).abs() < 1e-12);
        }
        // empty probe set rejected
        assert!(weak_gradient(&g, &u, &[]).is_err());
        // constant map has zero gradient for any probe
        let c = MapField::constant(
            TargetSpace::Euclidean { dim: 1 },
            TargetPoint::Euclidean { coords: vec![5.0] },
            10,
        )
        .unwrap();
        let far = vec![TargetPoint::Euclidean { coords: vec![100.0] }];
        assert!(weak_gradient(&g, &c, &far).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn weak_gradient_monotone_in_probes() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let g = build_path(12, 0.7).unwrap();
        let space = TargetSpace::Euclidean { dim: 2 };
        let pts: Vec<TargetPoint> = (0..12).map(|_| space.sample_point(&mut rng, 1.0)).collect();
        let u = MapField::new(space.clone(), pts).unwrap();
        let probes = farthest_point_probes(&u, 8);
        let small = weak_gradient(&g, &u, &probes[..3]).unwrap();
        let large = weak_gradient(&g, &u, &probes).unwrap();
        for x in 0..12 {
            assert!(small[x] <= large[x] + 1e-14);
        }
    }

    #[test]
    fn dirichlet_energy_examples() {
        let (g, u, all) = linear_path_map(3, 1.0);
        assert!((dirichlet_energy(&g, &u, &all) - 1.0).abs() < 1e-14);
        // doubling all conductances doubles the energy
        let doubled = DomainGraph::new(
            g.measures().to_vec(),
            g.edges()
                .iter()
                .map(|e| crate::graph::Edge { conductance: 2.0 * e.conductance, ..*e })
                .collect(),
            0.0,
            1.0,
        )
        .unwrap();
        let all2 = VertexSubset::from_members(&doubled, vec![true; 3]).unwrap();
        assert!((dirichlet_energy(&doubled, &u, &all2) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn dirichlet_energy_convex_along_interpolation() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let g = build_path(8, 1.0).unwrap();
        let all = VertexSubset::from_members(&g, vec![true; 8]).unwrap();
        let space = TargetSpace::Tree(MetricTree::tripod());
        let u0pts: Vec<TargetPoint> = (0..8).map(|_| space.sample_point(&mut rng, 1.0)).collect();
        let u1pts: Vec<TargetPoint> = (0..8).map(|_| space.sample_point(&mut rng, 1.0)).collect();
        let u0 = MapField::new(space.clone(), u0pts).unwrap();
        let u1 = MapField::new(space.clone(), u1pts).unwrap();
        let energy_at = |t: f64| -> f64 {
            let pts: Vec<TargetPoint> = (0..8)
                .map(|x| cat0::geodesic_point(&space, &u0.points[x], &u1.points[x], t).unwrap())
                .collect();
            dirichlet_energy(&g, &MapField::new(space.clone(), pts).unwrap(), &all)
        };
        let samples: Vec<f64> = (0..=10).map(|k| energy_at(k as f64 / 10.0)).collect();
        for w in samples.windows(3) {
            assert!(w[0] - 2.0 * w[1] + w[2] >= -1e-9);
        }
    }

    #[test]
    fn ks_invariant_under_target_isometry() {
        // rotate a Euclidean(2)-valued map; ks is unchanged
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let g = build_path(9, 0.5).unwrap();
        let all = VertexSubset::from_members(&g, vec![true; 9]).unwrap();
        let space = TargetSpace::Euclidean { dim: 2 };
        let pts: Vec<TargetPoint> = (0..9).map(|_| space.sample_point(&mut rng, 1.0)).collect();
        let u = MapField::new(space.clone(), pts.clone()).unwrap();
        let (c, s) = (0.6f64.cos(), 0.6f64.sin());
        let rotated: Vec<TargetPoint> = pts
            .iter()
            .map(|p| match p {
                TargetPoint::Euclidean { coords } => TargetPoint::Euclidean {
                    coords: vec![c * coords[0] - s * coords[1], s * coords[0] + c * coords[1]],
                },
                _ => unreachable!(),
            })
            .collect();
        let v = MapField::new(space, rotated).unwrap();
        let ks_u = ks_density(&g, &u, &all, 1.1).unwrap();
        let ks_v = ks_density(&g, &v, &all, 1.1).unwrap();
        for x in 0..9 {
            assert!((ks_u[x] - ks_v[x]).abs() < 1e-12);
        }
    }

    use crate::graph::DomainGraph;
}
