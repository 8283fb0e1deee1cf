//! Chebyshev machinery: series data types, interpolation coefficients, the
//! Clenshaw evaluation oracle, and networks built on the three-term
//! recurrence `T_k = 2x·T_{k−1} − T_{k−2}`.
//!
//! A recurrence chain keeps every `T̂_k` as an affine read-out of the shared
//! graph: `T̂_0 = 1` and `T̂_1 = x` live at the output level for free, and
//! each later degree spends one pairwise-product gadget. Stage `k`
//! multiplies `x ∈ [−1,1]` against `T̂_{k−1}`, whose magnitude ledger bound
//! `3^(k−3)·(1+ε₀)^(k−1)` sets the second factor range; with per-product
//! relative accuracy `ε₀ = eps/(n·4ⁿ·e)` the accumulated error of every
//! `T̂_k` stays below `eps`.

use crate::error::{Error, Result};
use crate::graph::{AffineExpr, GraphBuilder, NetworkGraph};
use crate::product::{append_product_chain, build_mul2, MulBudget};

/// A truncated Chebyshev expansion `Σ_k c_k T_k(x / scale)` on
/// `[-scale, scale]`, with a coefficient bound used for budget splitting.
#[derive(Debug, Clone, PartialEq)]
pub struct ChebSeries {
    coeffs: Vec<f64>,
    scale: f64,
    bound: f64,
}

/// A polynomial `Σ_k c_k x^k` in the monomial basis on `[-scale, scale]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MonomialPoly {
    coeffs: Vec<f64>,
    scale: f64,
    bound: f64,
}

fn validate_coeffs(coeffs: &[f64], scale: f64) -> Result<f64> {
    if coeffs.is_empty() {
        return Err(Error::Data("a series needs at least one coefficient".into()));
    }
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::Data("series coefficients must be finite".into()));
    }
    if !(scale.is_finite() && scale >= 1.0) {
        return Err(Error::Parameter(format!("scale must be at least 1, got {scale}")));
    }
    Ok(coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs())))
}

impl ChebSeries {
    /// Wraps coefficients with the default bound `max_k |c_k|`.
    pub fn new(coeffs: Vec<f64>, scale: f64) -> Result<Self> {
        let bound = validate_coeffs(&coeffs, scale)?;
        Ok(ChebSeries { coeffs, scale, bound })
    }

    /// Wraps coefficients with a caller-supplied bound (it may be larger
    /// than `max|c_k|`, never smaller).
    pub fn with_bound(coeffs: Vec<f64>, scale: f64, bound: f64) -> Result<Self> {
        let max = validate_coeffs(&coeffs, scale)?;
        if !(bound.is_finite() && bound >= max) {
            return Err(Error::Parameter(format!(
                "coefficient bound {bound} is below max|c_k| = {max}"
            )));
        }
        Ok(ChebSeries { coeffs, scale, bound })
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Drops the coefficients above `degree` (used to form lower-degree
    /// truncations of a converged expansion).
    pub fn truncated(&self, degree: usize) -> Result<Self> {
        if degree >= self.coeffs.len() {
            return Err(Error::Parameter(format!(
                "cannot truncate degree {} series to degree {degree}",
                self.degree()
            )));
        }
        ChebSeries::new(self.coeffs[..=degree].to_vec(), self.scale)
    }
}

impl MonomialPoly {
    pub fn new(coeffs: Vec<f64>, scale: f64) -> Result<Self> {
        let bound = validate_coeffs(&coeffs, scale)?;
        Ok(MonomialPoly { coeffs, scale, bound })
    }

    pub fn with_bound(coeffs: Vec<f64>, scale: f64, bound: f64) -> Result<Self> {
        let max = validate_coeffs(&coeffs, scale)?;
        if !(bound.is_finite() && bound >= max) {
            return Err(Error::Parameter(format!(
                "coefficient bound {bound} is below max|c_k| = {max}"
            )));
        }
        Ok(MonomialPoly { coeffs, scale, bound })
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Horner evaluation, the oracle for polynomial networks.
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }
}

/// Degree-n Chebyshev interpolation coefficients of `f` on `[-scale, scale]`
/// from samples at the extremum points `scale·cos(jπ/n)`:
/// `c_k = (2/n)·Σ''_j f(scale·cos(jπ/n))·cos(kjπ/n)`, where `Σ''` halves the
/// first and last summands, and `c_0`, `c_n` are halved once more.
pub fn cheb_coeffs(f: impl Fn(f64) -> f64, n: usize, scale: f64) -> Result<ChebSeries> {
    if n == 0 {
        return Err(Error::Parameter("interpolation degree must be at least 1".into()));
    }
    if !(scale.is_finite() && scale >= 1.0) {
        return Err(Error::Parameter(format!("scale must be at least 1, got {scale}")));
    }
    let samples: Vec<f64> = (0..=n)
        .map(|j| {
            let x = scale * (j as f64 * std::f64::consts::PI / n as f64).cos();
            f(x)
        })
        .collect();
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::Data("function returned a non-finite sample".into()));
    }
    let mut coeffs = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let mut acc = 0.0f64;
        for (j, &fj) in samples.iter().enumerate() {
            let w = if j == 0 || j == n { 0.5 } else { 1.0 };
            acc += w * fj * (k as f64 * j as f64 * std::f64::consts::PI / n as f64).cos();
        }
        let mut c = 2.0 * acc / n as f64;
        if k == 0 || k == n {
            c *= 0.5;
        }
        coeffs.push(c);
    }
    ChebSeries::new(coeffs, scale)
}

/// Clenshaw backward recurrence — the numerically stable series oracle.
pub fn clenshaw_eval(series: &ChebSeries, x: f64) -> Result<f64> {
    if !x.is_finite() || x.abs() > series.scale {
        return Err(Error::Domain(format!(
            "point {x} lies outside [-{m}, {m}]",
            m = series.scale
        )));
    }
    let t = x / series.scale;
    let c = &series.coeffs;
    let n = c.len() - 1;
    if n == 0 {
        return Ok(c[0]);
    }
    let (mut b_k1, mut b_k2) = (0.0f64, 0.0f64);
    for k in (1..=n).rev() {
        let b_k = 2.0 * t * b_k1 - b_k2 + c[k];
        b_k2 = b_k1;
        b_k1 = b_k;
    }
    Ok(t * b_k1 - b_k2 + c[0])
}

/// Splices the recurrence chain for degrees `0..=n` onto `builder`, reading
/// the (already scaled) argument expression `t ∈ [−1, 1]`. Returns the
/// read-outs `T̂_0 … T̂_n`, each within `eps` of `T_k(t)`.
pub(crate) fn append_cheb_chain(
    builder: &mut GraphBuilder,
    t: &AffineExpr,
    n: usize,
    eps: f64,
) -> Result<Vec<AffineExpr>> {
    if n < 2 {
        return Err(Error::Parameter(format!("recurrence chain needs degree ≥ 2, got {n}")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Parameter(format!("eps must lie in (0,1), got {eps}")));
    }
    // Per-product relative accuracy ε₀ = eps/(n·4ⁿ·e); the error recursion
    // e_k ≤ 2ε₀·3^(k−3)(1+ε₀)^(k−1) + 2e_{k−1} + e_{k−2} then keeps every
    // e_k below n·4ⁿ·(1+ε₀)ⁿ·ε₀ ≤ eps.
    let eps0 = eps / (n as f64 * 4.0f64.powi(n as i32) * std::f64::consts::E);
    if eps0 == 0.0 {
        return Err(Error::Construction(format!(
            "per-product budget underflows for degree {n} at eps={eps}"
        )));
    }
    let mut exprs = Vec::with_capacity(n + 1);
    exprs.push(AffineExpr::constant(1.0));
    exprs.push(t.clone());
    for k in 2..=n {
        // Magnitude ledger bound on T̂_{k−1}, clamped to the gadget's minimum
        // admissible range of 1.
        let ledger = 3.0f64.powi(k as i32 - 3) * (1.0 + eps0).powi(k as i32 - 1);
        let second = ledger.max(1.0);
        let budget = MulBudget::new(1.0, second, second * eps0)?;
        let stage = build_mul2(&budget)?;
        let outs = builder.splice(&stage, &[t.clone(), exprs[k - 1].clone()])?;
        let prod = outs.into_iter().next().expect("mul2 has one output");
        let t_k = AffineExpr::combine(&[(2.0, &prod), (-1.0, &exprs[k - 2])], 0.0);
        exprs.push(t_k);
    }
    Ok(exprs)
}

/// Recurrence-chain network exposing `T̂_0 … T̂_n` as its outputs (the last
/// output is `T̂_n`). Every read-out is within `eps` of the corresponding
/// Chebyshev polynomial on `[-1, 1]`.
pub fn build_chebyshev(n: usize, eps: f64) -> Result<NetworkGraph> {
    let mut builder = GraphBuilder::new(1);
    let t = builder.input_expr(0);
    let exprs = append_cheb_chain(&mut builder, &t, n, eps)?;
    builder.finish(exprs)
}

/// Network for a truncated Chebyshev series, within `eps` of the Clenshaw
/// evaluation of `series` on `[-scale, scale]`.
///
/// Degrees 0 and 1 are affine and cost nothing; if no coefficient of degree
/// ≥ 2 is nonzero the result is exact with zero hidden units. Otherwise the
/// recurrence chain is built to the declared degree with per-degree accuracy
/// `ε₀ = eps/(bound·n)`.
pub fn build_cheb_series(series: &ChebSeries, eps: f64) -> Result<NetworkGraph> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Parameter(format!("eps must lie in (0,1), got {eps}")));
    }
    let n = series.degree();
    let c = series.coeffs();
    let mut builder = GraphBuilder::new(1);
    let x = builder.input_expr(0);
    let t = AffineExpr::combine(&[(1.0 / series.scale(), &x)], 0.0);
    let affine_only = n < 2 || c[2..].iter().all(|&ck| ck == 0.0);
    let out = if affine_only {
        let mut terms = Vec::new();
        let mut bias = c[0];
        if n >= 1 && c[1] != 0.0 {
            for &(src, w) in &t.terms {
                terms.push((src, c[1] * w));
            }
            bias += c[1] * t.bias;
        }
        AffineExpr { terms, bias }
    } else {
        let eps0 = eps / (series.bound() * n as f64);
        let chain = append_cheb_chain(&mut builder, &t, n, eps0.min(0.5))?;
        let parts: Vec<(f64, &AffineExpr)> =
            c.iter().zip(&chain).skip(1).map(|(&ck, e)| (ck, e)).collect();
        AffineExpr::combine(&parts, c[0])
    };
    builder.finish(vec![out])
}

/// Network for a monomial polynomial, within `eps` of Horner evaluation on
/// `[-scale, scale]`: `c₀ + c₁x` plus a tied product chain supplying the
/// powers `x^k ≈ y_{k−1}`.
pub fn build_poly(poly: &MonomialPoly, eps: f64) -> Result<NetworkGraph> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Parameter(format!("eps must lie in (0,1), got {eps}")));
    }
    let n = poly.degree();
    let c = poly.coeffs();
    let mut builder = GraphBuilder::new(1);
    let x = builder.input_expr(0);
    let affine_only = n < 2 || c[2..].iter().all(|&ck| ck == 0.0);
    let out = if affine_only {
        let mut terms = Vec::new();
        if n >= 1 && c[1] != 0.0 {
            terms.push((x.terms[0].0, c[1]));
        }
        AffineExpr { terms, bias: c[0] }
    } else {
        // Per-power accuracy ε₀ = eps/(bound·n); the chain supplies every
        // x^k to that accuracy.
        let eps0 = eps / (poly.bound() * n as f64);
        let inputs = vec![x.clone(); n];
        let ys = append_product_chain(&mut builder, &inputs, poly.scale(), eps0.min(0.5))?;
        let mut parts: Vec<(f64, &AffineExpr)> = vec![(c[1], &x)];
        for (k, y) in ys.iter().enumerate() {
            parts.push((c[k + 2], y));
        }
        AffineExpr::combine(&parts, c[0])
    };
    builder.finish(vec![out])
}
