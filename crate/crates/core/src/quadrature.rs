//! Gauss–Legendre quadrature, used as the independent integration oracle for
//! spectral reference values. Nodes and weights come from Newton iteration
//! on the Legendre recurrence; box integrals are tensor products with
//! node-doubling until two successive refinements agree.

use crate::error::{Error, Result};

/// Hard ceiling on integrand evaluations for one tensor-product pass.
const MAX_EVALS: usize = 1 << 24;

/// Per-axis node ceiling for the doubling loop.
const MAX_NODES: usize = 16_384;

/// A Gauss–Legendre rule on `[-1, 1]` with `n` nodes, exact for polynomials
/// of degree `2n − 1`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

/// Legendre `P_n(x)` and its derivative via the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p_prev, mut p) = (1.0f64, x);
    for k in 1..n {
        let next = ((2 * k + 1) as f64 * x * p - k as f64 * p_prev) / (k + 1) as f64;
        p_prev = p;
        p = next;
    }
    let dp = n as f64 * (x * p - p_prev) / (x * x - 1.0);
    (p, dp)
}

impl GaussLegendre {
    pub fn new(n: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::Parameter("quadrature rule needs at least one node".into()));
        }
        if n > MAX_NODES {
            return Err(Error::Feasibility(format!(
                "quadrature rule with {n} nodes exceeds the {MAX_NODES}-node ceiling"
            )));
        }
        if n == 1 {
            return Ok(GaussLegendre { nodes: vec![0.0], weights: vec![2.0] });
        }
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            // Tricomi's initial guess, then Newton to machine precision.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let step = p / dp;
                x -= step;
                if step.abs() <= 1e-15 {
                    let (p, d) = legendre_with_derivative(n, x);
                    dp = d;
                    x -= p / dp;
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            weights[i] = w;
            nodes[n - 1 - i] = x;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Ok(GaussLegendre { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes in increasing order on `[-1, 1]`.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `∫_a^b f` by affine change of variables onto `[-1, 1]`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut acc = 0.0;
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }
}

/// `∫_a^b f` with `n` nodes.
pub fn integrate_1d(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> Result<f64> {
    Ok(GaussLegendre::new(n)?.integrate(f, a, b))
}

/// Tensor-product integral of `f` over the box `Π_i [lo_i, hi_i]` with `n`
/// nodes per axis.
pub fn integrate_box(
    f: impl Fn(&[f64]) -> f64,
    lo: &[f64],
    hi: &[f64],
    n: usize,
) -> Result<f64> {
    let d = lo.len();
    if d == 0 || d != hi.len() {
        return Err(Error::DimensionMismatch { expected: d.max(1), got: hi.len() });
    }
    if lo.iter().zip(hi).any(|(a, b)| !(a.is_finite() && b.is_finite() && a < b)) {
        return Err(Error::Parameter("integration box must have finite lo < hi".into()));
    }
    let total = n
        .checked_pow(d as u32)
        .filter(|&t| t <= MAX_EVALS)
        .ok_or_else(|| {
            Error::Feasibility(format!(
                "{n} nodes per axis in dimension {d} exceeds the {MAX_EVALS}-evaluation ceiling"
            ))
        })?;
    let rule = GaussLegendre::new(n)?;
    let mids: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)).collect();
    let halves: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| 0.5 * (b - a)).collect();
    let mut idx = vec![0usize; d];
    let mut point = vec![0.0f64; d];
    let mut acc = 0.0f64;
    for _ in 0..total {
        let mut w = 1.0;
        for (axis, &i) in idx.iter().enumerate() {
            point[axis] = mids[axis] + halves[axis] * rule.nodes[i];
            w *= rule.weights[i];
        }
        acc += w * f(&point);
        // Odometer increment over the index lattice.
        for axis in (0..d).rev() {
            idx[axis] += 1;
            if idx[axis] < n {
                break;
            }
            idx[axis] = 0;
        }
    }
    Ok(acc * halves.iter().product::<f64>())
}

/// Node-doubling tensor quadrature: starts at 8 nodes per axis and doubles
/// until two successive passes agree to `tol` (relative to `max(1, |I|)`).
/// Returns the converged value and the per-axis node count that achieved it.
pub fn integrate_box_converged(
    f: impl Fn(&[f64]) -> f64,
    lo: &[f64],
    hi: &[f64],
    tol: f64,
) -> Result<(f64, usize)> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::Parameter(format!("tolerance must be positive, got {tol}")));
    }
    let mut n = 8usize;
    let mut prev = integrate_box(&f, lo, hi, n)?;
    loop {
        let next_n = n * 2;
        let d = lo.len() as u32;
        let overflows = next_n > MAX_NODES
            || next_n.checked_pow(d).map(|t| t > MAX_EVALS).unwrap_or(true);
        if overflows {
            return Err(Error::Feasibility(format!(
                "quadrature did not reach tolerance {tol} within {n} nodes per axis"
            )));
        }
        let curr = integrate_box(&f, lo, hi, next_n)?;
        if (curr - prev).abs() <= tol * curr.abs().max(1.0) {
            return Ok((curr, next_n));
        }
        prev = curr;
        n = next_n;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_rule_is_the_classic_one() {
        let rule = GaussLegendre::new(2).unwrap();
        let r = 1.0 / 3.0f64.sqrt();
        assert!((rule.nodes()[0] + r).abs() < 1e-15);
        assert!((rule.nodes()[1] - r).abs() < 1e-15);
        assert!((rule.weights()[0] - 1.0).abs() < 1e-15);
        assert!((rule.weights()[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn five_point_rule_integrates_degree_nine() {
        // ∫_{-1}^{1} x^8 dx = 2/9, within reach of 5 nodes (exact to degree 9).
        let got = integrate_1d(|x| x.powi(8), -1.0, 1.0, 5).unwrap();
        assert!((got - 2.0 / 9.0).abs() < 1e-14, "got {got}");
        // Degree 10 must show a visible defect with the same rule.
        let got = integrate_1d(|x| x.powi(10), -1.0, 1.0, 5).unwrap();
        assert!((got - 2.0 / 11.0).abs() > 1e-6);
    }

    #[test]
    fn weights_sum_to_interval_length() {
        for n in [1, 2, 3, 7, 20, 65] {
            let rule = GaussLegendre::new(n).unwrap();
            let sum: f64 = rule.weights().iter().sum();
            assert!((sum - 2.0).abs() < 1e-13, "n={n}: {sum}");
        }
    }

    #[test]
    fn sine_integral_on_shifted_interval() {
        let got = integrate_1d(f64::sin, 0.0, std::f64::consts::PI, 20).unwrap();
        assert!((got - 2.0).abs() < 1e-13, "got {got}");
    }

    #[test]
    fn box_integral_of_separable_product() {
        // ∫∫ xy over [0,1]² = 1/4.
        let got = integrate_box(|p| p[0] * p[1], &[0.0, 0.0], &[1.0, 1.0], 6).unwrap();
        assert!((got - 0.25).abs() < 1e-14, "got {got}");
    }

    #[test]
    fn box_integral_matches_three_dim_volume() {
        let got = integrate_box(|_| 1.0, &[-1.0, 0.0, 2.0], &[1.0, 3.0, 2.5], 4).unwrap();
        assert!((got - 2.0 * 3.0 * 0.5).abs() < 1e-13);
    }

    #[test]
    fn converged_integral_of_gaussian() {
        // ∫_{-8}^{8} e^{-x²/2}/√(2π) dx ≈ 1 to far below the tolerance.
        let f = |p: &[f64]| (-0.5 * p[0] * p[0]).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let (val, nodes) = integrate_box_converged(f, &[-8.0], &[8.0], 1e-12).unwrap();
        assert!((val - 1.0).abs() < 1e-10, "got {val} with {nodes} nodes");
    }

    #[test]
    fn convergence_failure_is_reported() {
        // A kink keeps Gauss–Legendre at algebraic convergence, far from
        // 1e-14 within the node ceiling.
        let err = integrate_box_converged(|p| p[0].abs(), &[-1.0], &[1.0], 1e-14);
        assert!(matches!(err, Err(Error::Feasibility(_))));
    }

    #[test]
    fn rejects_bad_boxes() {
        assert!(integrate_box(|_| 1.0, &[0.0], &[0.0], 4).is_err());
        assert!(integrate_box(|_| 1.0, &[0.0, 1.0], &[2.0], 4).is_err());
        assert!(integrate_box(|_| 1.0, &[f64::NEG_INFINITY], &[0.0], 4).is_err());
    }
}
