//! Hyperbolic plane in the hyperboloid (Minkowski) model.
//!
//! Points are triples (x₀, x₁, x₂) with x₀² - x₁² - x₂² = 1 and x₀ ≥ 1.
//! With the bilinear form ⟨p, q⟩ = p₀q₀ - p₁q₁ - p₂q₂ the distance is
//! arccosh⟨p, q⟩ and geodesics have the sinh-weighted closed form
//! γ_t = (sinh((1-t)L) p + sinh(tL) q) / sinh L. Results are renormalized
//! back onto the hyperboloid to kill arithmetic drift.

pub type HPoint = [f64; 3];

pub fn minkowski(p: &HPoint, q: &HPoint) -> f64 {
    p[0] * q[0] - p[1] * q[1] - p[2] * q[2]
}

/// Projects back onto the hyperboloid by recomputing the timelike coordinate.
pub fn normalize(p: &HPoint) -> HPoint {
    [(1.0 + p[1] * p[1] + p[2] * p[2]).sqrt(), p[1], p[2]]
}

pub fn is_normalized(p: &HPoint) -> bool {
    p[0] >= 1.0 - 1e-10 && (p[0] * p[0] - p[1] * p[1] - p[2] * p[2] - 1.0).abs() <= 1e-10 * p[0].max(1.0)
}

pub fn origin() -> HPoint {
    [1.0, 0.0, 0.0]
}

/// Distance via the chord identity d = 2 asinh(‖p-q‖_L / 2): the
/// componentwise difference avoids the catastrophic cancellation of
/// acosh(⟨p,q⟩) near coincident points, where acosh(1+ε) only resolves
/// distances down to ~1e-8.
pub fn distance(p: &HPoint, q: &HPoint) -> f64 {
    let u = [p[0] - q[0], p[1] - q[1], p[2] - q[2]];
    let chord_sq = (-u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).max(0.0);
    2.0 * (0.5 * chord_sq.sqrt()).asinh()
}

pub fn geodesic(p: &HPoint, q: &HPoint, t: f64) -> HPoint {
    let len = distance(p, q);
    if len <= 1e-9 {
        // sinh weights degrade gracefully to linear interpolation
        return normalize(&[
            (1.0 - t) * p[0] + t * q[0],
            (1.0 - t) * p[1] + t * q[1],
            (1.0 - t) * p[2] + t * q[2],
        ]);
    }
    let sl = len.sinh();
    let wa = ((1.0 - t) * len).sinh() / sl;
    let wb = (t * len).sinh() / sl;
    normalize(&[
        wa * p[0] + wb * q[0],
        wa * p[1] + wb * q[1],
        wa * p[2] + wb * q[2],
    ])
}

/// Tangent-space logarithm: the vector v at `p` with exp_p(v) = q.
pub fn log_map(p: &HPoint, q: &HPoint) -> [f64; 3] {
    let d = distance(p, q);
    if d <= 1e-15 {
        return [0.0; 3];
    }
    let c = minkowski(p, q);
    // q - cosh(d) p is Minkowski-orthogonal to p and spacelike
    let raw = [q[0] - c * p[0], q[1] - c * p[1], q[2] - c * p[2]];
    let norm = (-minkowski(&raw, &raw)).max(0.0).sqrt();
    if norm <= 0.0 {
        return [0.0; 3];
    }
    [raw[0] * d / norm, raw[1] * d / norm, raw[2] * d / norm]
}

pub fn exp_map(p: &HPoint, v: &[f64; 3]) -> HPoint {
    let norm = (-minkowski(v, v)).max(0.0).sqrt();
    if norm <= 1e-300 {
        return *p;
    }
    let (c, s) = (norm.cosh(), norm.sinh());
    normalize(&[
        c * p[0] + s * v[0] / norm,
        c * p[1] + s * v[1] / norm,
        c * p[2] + s * v[2] / norm,
    ])
}

/// Point at hyperbolic polar coordinates (r, θ) around the origin.
pub fn from_polar(r: f64, theta: f64) -> HPoint {
    [r.cosh(), r.sinh() * theta.cos(), r.sinh() * theta.sin()]
}

/// Weighted Karcher mean by intrinsic fixed-point iteration.
///
/// Minimizes Σ wᵢ d²(x, pᵢ); the gradient is -2 Σ wᵢ log_x(pᵢ), so the stop
/// criterion ‖Σ wᵢ log_x(pᵢ)‖ ≤ grad_tol/2 matches a gradient-norm bound.
pub fn barycenter(
    points: &[HPoint],
    weights: &[f64],
    grad_tol: f64,
    max_iter: usize,
) -> Result<HPoint, f64> {
    let wsum: f64 = weights.iter().sum();
    let mut x = points[0];
    let mut residual = f64::INFINITY;
    for _ in 0..max_iter {
        let mut step = [0.0; 3];
        for (p, &w) in points.iter().zip(weights) {
            let v = log_map(&x, p);
            step[0] += w * v[0];
            step[1] += w * v[1];
            step[2] += w * v[2];
        }
        residual = 2.0 * (-minkowski(&step, &step)).max(0.0).sqrt();
        if residual <= grad_tol {
            return Ok(x);
        }
        let scaled = [step[0] / wsum, step[1] / wsum, step[2] / wsum];
        x = exp_map(&x, &scaled);
    }
    Err(residual)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_by_construction() {
        let p = origin();
        let q = from_polar(1.0, 0.0);
        assert!((distance(&p, &q) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn geodesic_midpoint_distances() {
        let p = from_polar(0.8, 0.3);
        let q = from_polar(1.1, 2.0);
        let len = distance(&p, &q);
        let mid = geodesic(&p, &q, 0.5);
        assert!((distance(&p, &mid) - 0.5 * len).abs() < 1e-10);
        assert!((distance(&mid, &q) - 0.5 * len).abs() < 1e-10);
        assert!(is_normalized(&mid));
    }

    #[test]
    fn exp_log_round_trip() {
        let p = from_polar(0.5, 1.0);
        let q = from_polar(1.3, -0.7);
        let v = log_map(&p, &q);
        let back = exp_map(&p, &v);
        assert!(distance(&back, &q) < 1e-10);
    }

    #[test]
    fn barycenter_of_two_points_is_midpoint() {
        let p = from_polar(1.0, 0.0);
        let q = from_polar(1.0, std::f64::consts::PI / 2.0);
        let b = barycenter(&[p, q], &[1.0, 1.0], 1e-12, 10_000).unwrap();
        let mid = geodesic(&p, &q, 0.5);
        assert!(distance(&b, &mid) < 1e-9);
    }
}
