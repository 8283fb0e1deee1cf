//! Networks for functions analytic in an ellipse around their interval.
//!
//! A function analytic inside the Bernstein-style ellipse with parameter
//! `s > 1` over `[-scale, scale]` has Chebyshev coefficients decaying like
//! `s^(−k)`, so the tail after degree `n` is below `2·bound·s^(−n)/(s−1)`.
//! Splitting the target accuracy between that truncation tail and the series
//! network turns an analyticity certificate `(s, bound)` into an explicit
//! rectifier graph of depth and size polylogarithmic in `1/eps`.

use crate::chebyshev::{build_cheb_series, cheb_coeffs, ChebSeries};
use crate::error::{Error, Result};
use crate::graph::NetworkGraph;

/// Analyticity certificate: the witness ellipse parameter `s`, a bound on
/// the coefficient envelope, and the half-width of the real interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipseParams {
    s: f64,
    bound: f64,
    scale: f64,
}

impl EllipseParams {
    pub fn new(s: f64, bound: f64, scale: f64) -> Result<Self> {
        if !(s.is_finite() && s > 1.0) {
            return Err(Error::Parameter(format!("ellipse parameter must exceed 1, got {s}")));
        }
        if !(bound.is_finite() && bound > 0.0) {
            return Err(Error::Parameter(format!("envelope bound must be positive, got {bound}")));
        }
        if !(scale.is_finite() && scale >= 1.0) {
            return Err(Error::Parameter(format!("scale must be at least 1, got {scale}")));
        }
        Ok(EllipseParams { s, bound, scale })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Semi-axes of the witness ellipse: `(scale·(s+1/s)/2, scale·(s−1/s)/2)`.
    pub fn axes(&self) -> (f64, f64) {
        ellipse_axes(self.s, self.scale)
    }
}

/// Semi-major and semi-minor axes of the parameter-`s` ellipse scaled to the
/// interval `[-scale, scale]`.
pub fn ellipse_axes(s: f64, scale: f64) -> (f64, f64) {
    (scale * (s + 1.0 / s) / 2.0, scale * (s - 1.0 / s) / 2.0)
}

/// Certificate for the rational witness `x ↦ 1/(1 + x²/β²)` on
/// `[-scale, scale]`: the ellipse parameter solves for the semi-minor axis
/// meeting the poles at `±iβ`, and the envelope constant is
/// `1/(1 + axis²/β²)` at that axis.
pub fn runge_params(beta: f64, scale: f64) -> Result<EllipseParams> {
    if !(beta.is_finite() && beta > 1.0) {
        return Err(Error::Parameter(format!("pole height must exceed 1, got {beta}")));
    }
    if !(scale.is_finite() && scale >= 1.0) {
        return Err(Error::Parameter(format!("scale must be at least 1, got {scale}")));
    }
    let r = beta + (beta * beta + 1.0).sqrt();
    let r2 = r * r;
    let s = (((4.0 * scale * scale - 2.0) * r2 + r2 * r2 + 1.0).sqrt() + r2 - 1.0)
        / (2.0 * scale * r);
    let (_, minor) = ellipse_axes(s, scale);
    let bound = 1.0 / (1.0 + (minor / beta).powi(2));
    EllipseParams::new(s, bound, scale)
}

/// Envelope constant for shifted cosines `t ↦ cos(t + θ)` on
/// `[-scale, scale]`: the modulus on the parameter-`s` ellipse is at most
/// `e^(semi-minor axis)`.
pub fn exp_kernel_bound(s: f64, scale: f64) -> f64 {
    let (_, minor) = ellipse_axes(s, scale);
    minor.exp()
}

/// Tail envelope after degree `n`: `2·bound·s^(−n)/(s−1)`.
pub fn truncation_bound(params: &EllipseParams, degree: usize) -> f64 {
    2.0 * params.bound / (params.s - 1.0) * params.s.powi(-(degree as i32))
}

/// Smallest degree `n ≥ 2` whose tail envelope is at most `eps`, computed
/// from the closed-form logarithm and then nudged so the returned degree is
/// minimal for the bound as evaluated in floating point.
pub fn truncation_degree(params: &EllipseParams, eps: f64) -> Result<usize> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::Parameter(format!("eps must be positive, got {eps}")));
    }
    let raw = (2.0 * params.bound / ((params.s - 1.0) * eps)).ln() / params.s.ln();
    let mut n = if raw.is_finite() && raw > 2.0 { raw.ceil() as usize } else { 2 };
    while n > 2 && truncation_bound(params, n - 1) <= eps {
        n -= 1;
    }
    while truncation_bound(params, n) > eps {
        n += 1;
        if n > 1_000_000 {
            return Err(Error::Feasibility(format!(
                "truncation degree for eps={eps} exceeds 1e6 at ellipse parameter {}",
                params.s
            )));
        }
    }
    Ok(n)
}

/// An analytic-function network and the interpolant it realizes.
#[derive(Debug, Clone)]
pub struct AnalyticNet {
    pub net: NetworkGraph,
    pub series: ChebSeries,
    pub degree: usize,
}

/// Builds a network within `eps` of `f` on `[-scale, scale]` given an
/// analyticity certificate: half the budget buys the truncation degree, the
/// other half the series network.
pub fn build_analytic(
    f: impl Fn(f64) -> f64,
    params: &EllipseParams,
    eps: f64,
) -> Result<AnalyticNet> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Parameter(format!("eps must lie in (0,1), got {eps}")));
    }
    let degree = truncation_degree(params, eps / 2.0)?;
    let series = cheb_coeffs(&f, degree, params.scale)?;
    let net = build_cheb_series(&series, eps / 2.0)?;
    Ok(AnalyticNet { net, series, degree })
}
