//! CAT(0) target geometries.
//!
//! Four families, all complete geodesic spaces of nonpositive curvature:
//! Euclidean space, metric trees, the hyperbolic plane (hyperboloid model)
//! and binary products with the l² combination of factor distances. The
//! defining comparison inequality
//!
//!   d²(z, γ_t) ≤ (1-t) d²(z, p) + t d²(z, q) - t(1-t) d²(p, q)
//!
//! and the quadrilateral inequality used by the regularity argument are
//! exposed as checks rather than assumed, so the test suite can exercise
//! them on random configurations.

pub mod hyperbolic;
pub mod tree;

use serde::{Deserialize, Serialize};

pub use tree::{MetricTree, TreeEdge};

use crate::error::{Error, Result};
use crate::report::{CheckReport, Gate};

const SLACK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TargetSpace {
    Euclidean { dim: usize },
    Tree(MetricTree),
    Hyperbolic,
    Product { first: Box<TargetSpace>, second: Box<TargetSpace> },
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TargetPoint {
    Euclidean { coords: Vec<f64> },
    Tree { edge: usize, offset: f64 },
    Hyperbolic { coords: [f64; 3] },
    Product { first: Box<TargetPoint>, second: Box<TargetPoint> },
}

impl TargetSpace {
    pub fn product(a: TargetSpace, b: TargetSpace) -> TargetSpace {
        TargetSpace::Product { first: Box::new(a), second: Box::new(b) }
    }

    pub fn validate(&self, p: &TargetPoint) -> Result<()> {
        match (self, p) {
            (TargetSpace::Euclidean { dim }, TargetPoint::Euclidean { coords }) => {
                if coords.len() != *dim {
                    return Err(Error::KindMismatch(format!(
                        "euclidean point has dim {} in space of dim {dim}",
                        coords.len()
                    )));
                }
                Ok(())
            }
            (TargetSpace::Tree(t), TargetPoint::Tree { edge, offset }) => {
                t.validate_point(*edge, *offset)
            }
            (TargetSpace::Hyperbolic, TargetPoint::Hyperbolic { coords }) => {
                if !hyperbolic::is_normalized(coords) {
                    return Err(Error::KindMismatch(
                        "hyperboloid constraint x0²-x1²-x2²=1 violated".into(),
                    ));
                }
                Ok(())
            }
            (TargetSpace::Product { first, second }, TargetPoint::Product { first: pa, second: pb }) => {
                first.validate(pa)?;
                second.validate(pb)
            }
            _ => Err(Error::KindMismatch("point kind does not match space kind".into())),
        }
    }

    /// A fixed reference point (origin-like) of the space.
    pub fn base_point(&self) -> TargetPoint {
        match self {
            TargetSpace::Euclidean { dim } => TargetPoint::Euclidean { coords: vec![0.0; *dim] },
            TargetSpace::Tree(t) => {
                let (e, o) = t.vertex_point(0);
                TargetPoint::Tree { edge: e, offset: o }
            }
            TargetSpace::Hyperbolic => TargetPoint::Hyperbolic { coords: hyperbolic::origin() },
            TargetSpace::Product { first, second } => TargetPoint::Product {
                first: Box::new(first.base_point()),
                second: Box::new(second.base_point()),
            },
        }
    }

    /// Seeded sample point with displacement on the order of `spread`.
    pub fn sample_point<R: rand::Rng>(&self, rng: &mut R, spread: f64) -> TargetPoint {
        match self {
            TargetSpace::Euclidean { dim } => TargetPoint::Euclidean {
                coords: (0..*dim).map(|_| rng.gen_range(-spread..spread)).collect(),
            },
            TargetSpace::Tree(t) => {
                let edge = rng.gen_range(0..t.edges().len());
                let offset = rng.gen_range(0.0..t.edges()[edge].length);
                let (e, o) = t.canonicalize(edge, offset);
                TargetPoint::Tree { edge: e, offset: o }
            }
            TargetSpace::Hyperbolic => {
                let r = rng.gen_range(0.0..spread);
                let theta = rng.gen_range(0.0..std::f64::consts::TAU);
                TargetPoint::Hyperbolic { coords: hyperbolic::from_polar(r, theta) }
            }
            TargetSpace::Product { first, second } => TargetPoint::Product {
                first: Box::new(first.sample_point(rng, spread)),
                second: Box::new(second.sample_point(rng, spread)),
            },
        }
    }
}

pub fn distance(s: &TargetSpace, p: &TargetPoint, q: &TargetPoint) -> Result<f64> {
    match (s, p, q) {
        (TargetSpace::Euclidean { .. }, TargetPoint::Euclidean { coords: a }, TargetPoint::Euclidean { coords: b }) => {
            if a.len() != b.len() {
                return Err(Error::KindMismatch("euclidean dims differ".into()));
            }
            Ok(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt())
        }
        (TargetSpace::Tree(t), TargetPoint::Tree { edge: e1, offset: o1 }, TargetPoint::Tree { edge: e2, offset: o2 }) => {
            Ok(t.point_distance((*e1, *o1), (*e2, *o2)))
        }
        (TargetSpace::Hyperbolic, TargetPoint::Hyperbolic { coords: a }, TargetPoint::Hyperbolic { coords: b }) => {
            Ok(hyperbolic::distance(a, b))
        }
        (
            TargetSpace::Product { first, second },
            TargetPoint::Product { first: pa, second: pb },
            TargetPoint::Product { first: qa, second: qb },
        ) => {
            let da = distance(first, pa, qa)?;
            let db = distance(second, pb, qb)?;
            Ok((da * da + db * db).sqrt())
        }
        _ => Err(Error::KindMismatch("distance: point kinds do not match the space".into())),
    }
}

/// Constant-speed geodesic: γ_0 = p, γ_1 = q, d(γ_t, γ_s) = |t-s| d(p, q).
pub fn geodesic_point(s: &TargetSpace, p: &TargetPoint, q: &TargetPoint, t: f64) -> Result<TargetPoint> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidArgument(format!("geodesic parameter {t} outside [0,1]")));
    }
    match (s, p, q) {
        (TargetSpace::Euclidean { .. }, TargetPoint::Euclidean { coords: a }, TargetPoint::Euclidean { coords: b }) => {
            Ok(TargetPoint::Euclidean {
                coords: a.iter().zip(b).map(|(x, y)| (1.0 - t) * x + t * y).collect(),
            })
        }
        (TargetSpace::Tree(tree), TargetPoint::Tree { edge: e1, offset: o1 }, TargetPoint::Tree { edge: e2, offset: o2 }) => {
            let total = tree.point_distance((*e1, *o1), (*e2, *o2));
            let (e, o) = tree.geodesic_point((*e1, *o1), (*e2, *o2), t * total);
            Ok(TargetPoint::Tree { edge: e, offset: o })
        }
        (TargetSpace::Hyperbolic, TargetPoint::Hyperbolic { coords: a }, TargetPoint::Hyperbolic { coords: b }) => {
            Ok(TargetPoint::Hyperbolic { coords: hyperbolic::geodesic(a, b, t) })
        }
        (
            TargetSpace::Product { first, second },
            TargetPoint::Product { first: pa, second: pb },
            TargetPoint::Product { first: qa, second: qb },
        ) => Ok(TargetPoint::Product {
            first: Box::new(geodesic_point(first, pa, qa, t)?),
            second: Box::new(geodesic_point(second, pb, qb, t)?),
        }),
        _ => Err(Error::KindMismatch("geodesic: point kinds do not match the space".into())),
    }
}

pub fn midpoint(s: &TargetSpace, p: &TargetPoint, q: &TargetPoint) -> Result<TargetPoint> {
    geodesic_point(s, p, q, 0.5)
}

/// CAT(0) comparison: slack of
/// (1-t) d²(z,p) + t d²(z,q) - t(1-t) d²(p,q) - d²(z, γ_t) ≥ 0.
pub fn check_cat0_comparison(
    s: &TargetSpace,
    z: &TargetPoint,
    p: &TargetPoint,
    q: &TargetPoint,
    t: f64,
) -> Result<CheckReport> {
    let gt = geodesic_point(s, p, q, t)?;
    let dzp = distance(s, z, p)?;
    let dzq = distance(s, z, q)?;
    let dpq = distance(s, p, q)?;
    let dzg = distance(s, z, &gt)?;
    let slack = (1.0 - t) * dzp * dzp + t * dzq * dzq - t * (1.0 - t) * dpq * dpq - dzg * dzg;
    Ok(CheckReport::new("cat0_comparison", Gate::Exact, -slack, SLACK_TOL)
        .with_note(&format!("slack={slack:.3e}")))
}

/// Quadrilateral inequality: with m the midpoint of q, r,
///
///   (|ps| - |qr|)|qr| ≥ (|pm|² - |pq|² - |mq|²) + (|sm|² - |sr|² - |mr|²).
///
/// Both subtracted midpoint legs equal |qr|/2; keeping them as measured
/// distances also exercises the midpoint construction.
pub fn check_quadrilateral(
    space: &TargetSpace,
    p: &TargetPoint,
    q: &TargetPoint,
    r: &TargetPoint,
    s: &TargetPoint,
) -> Result<CheckReport> {
    let m = midpoint(space, q, r)?;
    let dps = distance(space, p, s)?;
    let dqr = distance(space, q, r)?;
    let dpm = distance(space, p, &m)?;
    let dpq = distance(space, p, q)?;
    let dmq = distance(space, &m, q)?;
    let dsm = distance(space, s, &m)?;
    let dsr = distance(space, s, r)?;
    let dmr = distance(space, &m, r)?;
    let lhs = (dps - dqr) * dqr;
    let rhs = (dpm * dpm - dpq * dpq - dmq * dmq) + (dsm * dsm - dsr * dsr - dmr * dmr);
    let slack = lhs - rhs;
    Ok(CheckReport::new("quadrilateral", Gate::Exact, -slack, SLACK_TOL)
        .with_note(&format!("slack={slack:.3e}")))
}

/// Convexity of d(·, p) and 2-convexity of d²(·, p) along the geodesic a→b,
/// sampled at `samples` interior parameters.
pub fn check_distance_convexity(
    s: &TargetSpace,
    p: &TargetPoint,
    a: &TargetPoint,
    b: &TargetPoint,
    samples: usize,
) -> Result<CheckReport> {
    let dap = distance(s, a, p)?;
    let dbp = distance(s, b, p)?;
    let dab = distance(s, a, b)?;
    let mut worst = f64::NEG_INFINITY;
    for k in 0..=samples.max(1) {
        let t = k as f64 / samples.max(1) as f64;
        let gt = geodesic_point(s, a, b, t)?;
        let dgp = distance(s, &gt, p)?;
        let lin = (1.0 - t) * dap + t * dbp - dgp;
        let quad = (1.0 - t) * dap * dap + t * dbp * dbp - t * (1.0 - t) * dab * dab - dgp * dgp;
        worst = worst.max(-lin).max(-quad);
    }
    Ok(CheckReport::new("distance_convexity", Gate::Exact, worst, SLACK_TOL))
}

/// Argmin of Σ wᵢ d²(·, pᵢ).
///
/// Euclidean: weighted mean. Tree: exact convex edge-wise search.
/// Hyperbolic: Karcher iteration to gradient norm ≤ 1e-10. Products split
/// coordinatewise.
pub fn weighted_barycenter(
    s: &TargetSpace,
    points: &[TargetPoint],
    weights: &[f64],
) -> Result<TargetPoint> {
    if points.is_empty() || points.len() != weights.len() {
        return Err(Error::InvalidArgument("barycenter needs matching nonempty points/weights".into()));
    }
    if weights.iter().any(|&w| !(w > 0.0)) {
        return Err(Error::InvalidArgument("barycenter weights must be positive".into()));
    }
    match s {
        TargetSpace::Euclidean { dim } => {
            let mut acc = vec![0.0; *dim];
            let mut total = 0.0;
            for (p, &w) in points.iter().zip(weights) {
                let TargetPoint::Euclidean { coords } = p else {
                    return Err(Error::KindMismatch("barycenter: euclidean point expected".into()));
                };
                for (a, c) in acc.iter_mut().zip(coords) {
                    *a += w * c;
                }
                total += w;
            }
            for a in &mut acc {
                *a /= total;
            }
            Ok(TargetPoint::Euclidean { coords: acc })
        }
        TargetSpace::Tree(t) => {
            let pts: Vec<(usize, f64)> = points
                .iter()
                .map(|p| match p {
                    TargetPoint::Tree { edge, offset } => Ok((*edge, *offset)),
                    _ => Err(Error::KindMismatch("barycenter: tree point expected".into())),
                })
                .collect::<Result<_>>()?;
            let (e, o) = t.barycenter(&pts, weights);
            Ok(TargetPoint::Tree { edge: e, offset: o })
        }
        TargetSpace::Hyperbolic => {
            let pts: Vec<[f64; 3]> = points
                .iter()
                .map(|p| match p {
                    TargetPoint::Hyperbolic { coords } => Ok(*coords),
                    _ => Err(Error::KindMismatch("barycenter: hyperbolic point expected".into())),
                })
                .collect::<Result<_>>()?;
            match hyperbolic::barycenter(&pts, weights, 1e-10, 10_000) {
                Ok(p) => Ok(TargetPoint::Hyperbolic { coords: p }),
                Err(residual) => Err(Error::NonConvergence { iterations: 10_000, residual }),
            }
        }
        TargetSpace::Product { first, second } => {
            let mut pa = Vec::with_capacity(points.len());
            let mut pb = Vec::with_capacity(points.len());
            for p in points {
                let TargetPoint::Product { first: a, second: b } = p else {
                    return Err(Error::KindMismatch("barycenter: product point expected".into()));
                };
                pa.push((**a).clone());
                pb.push((**b).clone());
            }
            Ok(TargetPoint::Product {
                first: Box::new(weighted_barycenter(first, &pa, weights)?),
                second: Box::new(weighted_barycenter(second, &pb, weights)?),
            })
        }
    }
}

/// Value of the barycenter objective Σ wᵢ d²(x, pᵢ).
pub fn barycenter_objective(
    s: &TargetSpace,
    x: &TargetPoint,
    points: &[TargetPoint],
    weights: &[f64],
) -> Result<f64> {
    let mut acc = 0.0;
    for (p, &w) in points.iter().zip(weights) {
        let d = distance(s, x, p)?;
        acc += w * d * d;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn spaces() -> Vec<TargetSpace> {
        vec![
            TargetSpace::Euclidean { dim: 3 },
            TargetSpace::Tree(MetricTree::tripod()),
            TargetSpace::Hyperbolic,
            TargetSpace::product(
                TargetSpace::Euclidean { dim: 1 },
                TargetSpace::Tree(MetricTree::tripod()),
            ),
        ]
    }

    #[test]
    fn distance_examples() {
        // hyperbolic distance by construction of the second point
        let s = TargetSpace::Hyperbolic;
        let p = TargetPoint::Hyperbolic { coords: [1.0, 0.0, 0.0] };
        let q = TargetPoint::Hyperbolic { coords: [1.0f64.cosh(), 1.0f64.sinh(), 0.0] };
        assert!((distance(&s, &p, &q).unwrap() - 1.0).abs() < 1e-12);

        // tripod tips are at distance 2
        let t = MetricTree::tripod();
        let s = TargetSpace::Tree(t.clone());
        let (e1, o1) = t.vertex_point(1);
        let (e2, o2) = t.vertex_point(2);
        let p1 = TargetPoint::Tree { edge: e1, offset: o1 };
        let p2 = TargetPoint::Tree { edge: e2, offset: o2 };
        assert!((distance(&s, &p1, &p2).unwrap() - 2.0).abs() < 1e-14);
        assert_eq!(distance(&s, &p1, &p1).unwrap(), 0.0);

        // kind mismatch is rejected
        let e = TargetSpace::Euclidean { dim: 2 };
        assert!(distance(&e, &p1, &p2).is_err());
    }

    #[test]
    fn geodesic_examples() {
        let s = TargetSpace::Euclidean { dim: 2 };
        let p = TargetPoint::Euclidean { coords: vec![0.0, 0.0] };
        let q = TargetPoint::Euclidean { coords: vec![2.0, 0.0] };
        let g = geodesic_point(&s, &p, &q, 0.25).unwrap();
        assert_eq!(g, TargetPoint::Euclidean { coords: vec![0.5, 0.0] });
        assert!(geodesic_point(&s, &p, &q, 1.5).is_err());

        // tripod tips meet at the center
        let t = MetricTree::tripod();
        let st = TargetSpace::Tree(t.clone());
        let (e1, o1) = t.vertex_point(1);
        let (e2, o2) = t.vertex_point(2);
        let a = TargetPoint::Tree { edge: e1, offset: o1 };
        let b = TargetPoint::Tree { edge: e2, offset: o2 };
        let mid = midpoint(&st, &a, &b).unwrap();
        let (ec, oc) = t.vertex_point(0);
        assert_eq!(mid, TargetPoint::Tree { edge: ec, offset: oc });

        // hyperbolic midpoint is equidistant
        let sh = TargetSpace::Hyperbolic;
        let p = TargetPoint::Hyperbolic { coords: hyperbolic::from_polar(0.5, 0.0) };
        let q = TargetPoint::Hyperbolic { coords: hyperbolic::from_polar(0.5, 1.2) };
        let len = distance(&sh, &p, &q).unwrap();
        let m = midpoint(&sh, &p, &q).unwrap();
        assert!((distance(&sh, &p, &m).unwrap() - 0.5 * len).abs() < 1e-10);
    }

    #[test]
    fn geodesic_speed_is_constant() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for space in spaces() {
            for _ in 0..200 {
                let p = space.sample_point(&mut rng, 1.5);
                let q = space.sample_point(&mut rng, 1.5);
                let t = rng.gen_range(0.0..1.0);
                let s2 = rng.gen_range(0.0..1.0);
                let d = distance(&space, &p, &q).unwrap();
                let gt = geodesic_point(&space, &p, &q, t).unwrap();
                let gs = geodesic_point(&space, &p, &q, s2).unwrap();
                let dg = distance(&space, &gt, &gs).unwrap();
                assert!(
                    (dg - (t - s2).abs() * d).abs() < 1e-9 * (1.0 + d),
                    "space {space:?}"
                );
            }
        }
    }

    #[test]
    fn comparison_euclidean_equality() {
        let s = TargetSpace::Euclidean { dim: 2 };
        let z = TargetPoint::Euclidean { coords: vec![0.0, 1.0] };
        let p = TargetPoint::Euclidean { coords: vec![-1.0, 0.0] };
        let q = TargetPoint::Euclidean { coords: vec![1.0, 0.0] };
        let rep = check_cat0_comparison(&s, &z, &p, &q, 0.5).unwrap();
        assert!(rep.pass);
        assert!(rep.max_violation.abs() < 1e-12); // equality in Euclidean space
    }

    #[test]
    fn comparison_random_all_spaces() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for space in spaces() {
            for _ in 0..500 {
                let z = space.sample_point(&mut rng, 2.0);
                let p = space.sample_point(&mut rng, 2.0);
                let q = space.sample_point(&mut rng, 2.0);
                let t = rng.gen_range(0.0..=1.0);
                let rep = check_cat0_comparison(&space, &z, &p, &q, t).unwrap();
                assert!(rep.pass, "{space:?}: {rep:?}");
            }
        }
    }

    #[test]
    fn hyperbolic_triangle_has_positive_slack() {
        let s = TargetSpace::Hyperbolic;
        let z = TargetPoint::Hyperbolic { coords: hyperbolic::from_polar(2.0, 0.0) };
        let p = TargetPoint::Hyperbolic { coords: hyperbolic::from_polar(2.0, 2.1) };
        let q = TargetPoint::Hyperbolic { coords: hyperbolic::from_polar(2.0, 4.2) };
        let rep = check_cat0_comparison(&s, &z, &p, &q, 0.5).unwrap();
        assert!(rep.pass && rep.max_violation < -0.1, "{rep:?}");
    }

    #[test]
    fn quadrilateral_random_all_spaces() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for space in spaces() {
            for _ in 0..500 {
                let p = space.sample_point(&mut rng, 2.0);
                let q = space.sample_point(&mut rng, 2.0);
                let r = space.sample_point(&mut rng, 2.0);
                let s4 = space.sample_point(&mut rng, 2.0);
                let rep = check_quadrilateral(&space, &p, &q, &r, &s4).unwrap();
                assert!(rep.pass, "{space:?}: {rep:?}");
            }
        }
        // degenerate case p=q, r=s
        let space = TargetSpace::Euclidean { dim: 2 };
        let p = TargetPoint::Euclidean { coords: vec![0.3, -0.4] };
        let r = TargetPoint::Euclidean { coords: vec![1.0, 2.0] };
        let rep = check_quadrilateral(&space, &p, &p, &r, &r).unwrap();
        assert!(rep.pass);
    }

    #[test]
    fn convexity_checks() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for space in spaces() {
            for _ in 0..100 {
                let p = space.sample_point(&mut rng, 2.0);
                let a = space.sample_point(&mut rng, 2.0);
                let b = space.sample_point(&mut rng, 2.0);
                let rep = check_distance_convexity(&space, &p, &a, &b, 16).unwrap();
                assert!(rep.pass, "{space:?}: {rep:?}");
            }
        }
        // a = b: constant, trivially convex
        let space = TargetSpace::Hyperbolic;
        let p = space.sample_point(&mut rng, 1.0);
        let a = space.sample_point(&mut rng, 1.0);
        assert!(check_distance_convexity(&space, &p, &a, &a, 8).unwrap().pass);
    }

    #[test]
    fn barycenter_examples() {
        let s = TargetSpace::Euclidean { dim: 2 };
        let pts = vec![
            TargetPoint::Euclidean { coords: vec![0.0, 0.0] },
            TargetPoint::Euclidean { coords: vec![2.0, 0.0] },
        ];
        let b = weighted_barycenter(&s, &pts, &[1.0, 1.0]).unwrap();
        assert_eq!(b, TargetPoint::Euclidean { coords: vec![1.0, 0.0] });

        // single point: that point
        let one = weighted_barycenter(&s, &pts[..1], &[3.0]).unwrap();
        assert_eq!(one, pts[0]);

        assert!(weighted_barycenter(&s, &[], &[]).is_err());
        assert!(weighted_barycenter(&s, &pts, &[1.0, -1.0]).is_err());
    }

    #[test]
    fn barycenter_beats_input_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for space in spaces() {
            for _ in 0..100 {
                let k = rng.gen_range(1..5);
                let pts: Vec<TargetPoint> =
                    (0..k).map(|_| space.sample_point(&mut rng, 1.5)).collect();
                let w: Vec<f64> = (0..k).map(|_| rng.gen_range(0.1..2.0)).collect();
                let b = weighted_barycenter(&space, &pts, &w).unwrap();
                let val = barycenter_objective(&space, &b, &pts, &w).unwrap();
                for p in &pts {
                    let at_p = barycenter_objective(&space, p, &pts, &w).unwrap();
                    assert!(val <= at_p + 1e-8, "{space:?}");
                }
            }
        }
    }

    #[test]
    fn barycenter_jensen_property() {
        // for convex φ = d(·, p): φ(barycenter) ≤ Σ wᵢ φ(pᵢ) / Σ wᵢ
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        for space in spaces() {
            for _ in 0..100 {
                let k = rng.gen_range(1..5);
                let pts: Vec<TargetPoint> =
                    (0..k).map(|_| space.sample_point(&mut rng, 1.5)).collect();
                let w: Vec<f64> = (0..k).map(|_| rng.gen_range(0.1..2.0)).collect();
                let probe = space.sample_point(&mut rng, 1.5);
                let b = weighted_barycenter(&space, &pts, &w).unwrap();
                let wsum: f64 = w.iter().sum();
                let avg: f64 = pts
                    .iter()
                    .zip(&w)
                    .map(|(p, &wi)| wi * distance(&space, p, &probe).unwrap())
                    .sum::<f64>()
                    / wsum;
                let at_b = distance(&space, &b, &probe).unwrap();
                assert!(at_b <= avg + 1e-8, "{space:?}: {at_b} vs {avg}");
            }
        }
    }

    #[test]
    fn first_order_optimality() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for space in spaces() {
            for _ in 0..50 {
                let k = rng.gen_range(2..5);
                let pts: Vec<TargetPoint> =
                    (0..k).map(|_| space.sample_point(&mut rng, 1.5)).collect();
                let w: Vec<f64> = (0..k).map(|_| rng.gen_range(0.5..2.0)).collect();
                let b = weighted_barycenter(&space, &pts, &w).unwrap();
                let val = barycenter_objective(&space, &b, &pts, &w).unwrap();
                // moving ε toward any pᵢ cannot decrease the objective by more
                // than o(ε)
                for p in &pts {
                    let d = distance(&space, &b, p).unwrap();
                    if d < 1e-9 {
                        continue;
                    }
                    let eps = 1e-4 / d;
                    let moved = geodesic_point(&space, &b, p, eps.min(1.0)).unwrap();
                    let v2 = barycenter_objective(&space, &moved, &pts, &w).unwrap();
                    assert!(v2 >= val - 1e-6, "{space:?}: {v2} < {val}");
                }
            }
        }
    }

    #[test]
    fn serialization_tagged_unions() {
        let s = TargetSpace::product(
            TargetSpace::Euclidean { dim: 1 },
            TargetSpace::Tree(MetricTree::tripod()),
        );
        let json = serde_json::to_value(&s).unwrap();
        assert_eq!(json["kind"], "product");
        assert_eq!(json["first"]["kind"], "euclidean");
        let back: TargetSpace = serde_json::from_value(json).unwrap();
        assert_eq!(back, s);
    }
}
