//! Multiplication from rectifiers.
//!
//! The building blocks, in order:
//!
//! * [`build_sawtooth`] — the m-fold self-composition of the hat function
//!   `g(x) = 2σ(x) − 4σ(x−1/2) + 2σ(x−1)`, an exact piecewise-linear
//!   sawtooth with `2^(m−1)` teeth on `[0,1]`.
//! * [`build_square`] — `sq_m(x) = x − Σ_{s≤m} g_s(x)/4^s`, the piecewise
//!   linear interpolant of `x²` on the dyadic grid of step `2^−m`; the
//!   uniform error is at most `2^(−2m−2)` and the endpoints are exact.
//! * [`build_mul2`] — products on a box via the polarization identity
//!   `x·y = M·N·(((x/M+y/N)/2)² − ((x/M−y/N)/2)²)`, with `|t| = σ(t)+σ(−t)`
//!   feeding each squaring chain. Each of the two squarings receives half of
//!   the error budget, and the refinement is the smallest that meets it.
//! * [`build_muld`] — left-to-right chains of pairwise products computing
//!   `x₁⋯x_d` together with every intermediate partial product.
//!
//! A factor that is exactly zero makes both squaring chains bitwise equal,
//! and the output functional interleaves the two chains term by term, so the
//! product is exactly `0.0` — not merely small — whenever a factor is zero.

use crate::error::{Error, Result};
use crate::graph::{AffineExpr, GraphBuilder, Layer, NetworkGraph, OutputSpec, SourceRef, Unit};

/// Hard cap on sawtooth refinement; budgets this deep exhaust binary64 long
/// before they exhaust patience.
const MAX_REFINEMENT: usize = 4096;

/// Accuracy budget for a pairwise product on `[-M,M] × [-N,N]`.
///
/// `refinement` is the smallest `m ≥ 1` whose a-priori error bound
/// `M·N·2^(−2m−1)` is at most `eps` — equivalently, each of the two squaring
/// chains meets its `eps/2` share.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MulBudget {
    first_bound: f64,
    second_bound: f64,
    eps: f64,
    refinement: usize,
}

impl MulBudget {
    pub fn new(first_bound: f64, second_bound: f64, eps: f64) -> Result<Self> {
        if !(first_bound.is_finite() && first_bound >= 1.0)
            || !(second_bound.is_finite() && second_bound >= 1.0)
        {
            return Err(Error::Parameter(format!(
                "factor bounds must be finite and at least 1, got {first_bound} and {second_bound}"
            )));
        }
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::Parameter(format!("eps must lie in (0,1), got {eps}")));
        }
        let mn = first_bound * second_bound;
        if !mn.is_finite() {
            return Err(Error::Parameter("factor bound product overflows".into()));
        }
        let mut refinement = 1usize;
        while mn * f64::exp2(-(2.0 * refinement as f64 + 1.0)) > eps {
            refinement += 1;
            if refinement > MAX_REFINEMENT {
                return Err(Error::Construction(format!(
                    "accuracy eps={eps} on a [{first_bound}]x[{second_bound}] box needs more than \
                     {MAX_REFINEMENT} refinement levels"
                )));
            }
        }
        Ok(MulBudget { first_bound, second_bound, eps, refinement })
    }

    pub fn first_bound(&self) -> f64 {
        self.first_bound
    }

    pub fn second_bound(&self) -> f64 {
        self.second_bound
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Chosen sawtooth depth per squaring chain.
    pub fn refinement(&self) -> usize {
        self.refinement
    }

    /// The a-priori uniform error bound `M·N·2^(−2m−1)` actually achieved.
    pub fn error_bound(&self) -> f64 {
        self.first_bound * self.second_bound * f64::exp2(-(2.0 * self.refinement as f64 + 1.0))
    }
}

/// Units computing `σ(t)`, `σ(t−1/2)`, `σ(t−1)` of the affine input `t`.
fn hat_layer(t: &[(SourceRef, f64)]) -> Layer {
    let unit = |bias: f64| Unit { weights: t.to_vec(), bias };
    Layer { units: vec![unit(0.0), unit(-0.5), unit(-1.0)] }
}

/// The affine read-out `2u₀ − 4u₁ + 2u₂` of a hat layer.
fn hat_readout(layer: u32, first_unit: u32) -> [(SourceRef, f64); 3] {
    [
        (SourceRef::Unit { layer, unit: first_unit }, 2.0),
        (SourceRef::Unit { layer, unit: first_unit + 1 }, -4.0),
        (SourceRef::Unit { layer, unit: first_unit + 2 }, 2.0),
    ]
}

/// The m-fold composed sawtooth `g∘g∘…∘g` on `[0,1]`: depth `m`, size `3m`,
/// `2^(m−1)` teeth, identically zero outside `[0,1]`.
pub fn build_sawtooth(m: usize) -> Result<NetworkGraph> {
    if m == 0 {
        return Err(Error::Parameter("sawtooth needs at least one level".into()));
    }
    if m > MAX_REFINEMENT {
        return Err(Error::Feasibility(format!("sawtooth depth {m} exceeds {MAX_REFINEMENT}")));
    }
    let mut layers = vec![hat_layer(&[(SourceRef::Input(0), 1.0)])];
    for s in 1..m {
        layers.push(hat_layer(&hat_readout(s as u32 - 1, 0)));
    }
    let out = OutputSpec { weights: hat_readout(m as u32 - 1, 0).to_vec(), bias: 0.0 };
    NetworkGraph::new(1, layers, vec![out])
}

/// The level-m squaring surrogate on `[0,1]`: the piecewise linear
/// interpolant of `x²` at step `2^−m`. Exact at every dyadic grid point
/// (in particular at 0 and 1); uniform error at most `2^(−2m−2)`.
pub fn build_square(m: usize) -> Result<NetworkGraph> {
    if m == 0 {
        return Err(Error::Parameter("squaring needs at least one level".into()));
    }
    if m > MAX_REFINEMENT {
        return Err(Error::Feasibility(format!("squaring depth {m} exceeds {MAX_REFINEMENT}")));
    }
    let mut layers = vec![hat_layer(&[(SourceRef::Input(0), 1.0)])];
    for s in 1..m {
        layers.push(hat_layer(&hat_readout(s as u32 - 1, 0)));
    }
    // x − Σ_s g_s(x)/4^s, where g_s reads the s-th hat layer.
    let mut weights = vec![(SourceRef::Input(0), 1.0)];
    for s in 1..=m {
        let scale = f64::exp2(-2.0 * s as f64);
        for (src, c) in hat_readout(s as u32 - 1, 0) {
            weights.push((src, -scale * c));
        }
    }
    NetworkGraph::new(1, layers, vec![OutputSpec { weights, bias: 0.0 }])
}

/// Pairwise product network on `[-M,M] × [-N,N]`.
///
/// Layer 0 holds the four rectifiers realizing `|x/(2M) ± y/(2N)|`; two
/// sawtooth chains of depth `m` square those absolute values; the output
/// functional assembles `M·N·(sq(t₊) − sq(t₋))`. Mirrored terms of the two
/// chains are interleaved in the output so that when the chains carry
/// bitwise-equal values (any zero factor), the accumulated sum returns to
/// exactly `0.0` after every pair.
pub fn build_mul2(budget: &MulBudget) -> Result<NetworkGraph> {
    let m = budget.refinement();
    let mn = budget.first_bound() * budget.second_bound();
    let wx = 1.0 / (2.0 * budget.first_bound());
    let wy = 1.0 / (2.0 * budget.second_bound());

    let abs_unit = |cx: f64, cy: f64| Unit {
        weights: vec![(SourceRef::Input(0), cx), (SourceRef::Input(1), cy)],
        bias: 0.0,
    };
    // p-pair realizes |x/(2M) + y/(2N)|, q-pair |x/(2M) − y/(2N)|.
    let mut layers = vec![Layer {
        units: vec![
            abs_unit(wx, wy),
            abs_unit(-wx, -wy),
            abs_unit(wx, -wy),
            abs_unit(-wx, wy),
        ],
    }];

    let plus_t = [
        (SourceRef::Unit { layer: 0, unit: 0 }, 1.0),
        (SourceRef::Unit { layer: 0, unit: 1 }, 1.0),
    ];
    let minus_t = [
        (SourceRef::Unit { layer: 0, unit: 2 }, 1.0),
        (SourceRef::Unit { layer: 0, unit: 3 }, 1.0),
    ];
    for s in 0..m {
        let (plus, minus) = if s == 0 {
            (hat_layer(&plus_t), hat_layer(&minus_t))
        } else {
            let layer = s as u32; // previous chain layer
            (hat_layer(&hat_readout(layer, 0)), hat_layer(&hat_readout(layer, 3)))
        };
        let mut units = plus.units;
        units.extend(minus.units);
        layers.push(Layer { units });
    }

    // Output: MN·(sq(t₊) − sq(t₋)) with chain terms interleaved pairwise.
    let mut weights = Vec::with_capacity(4 + 6 * m);
    for (p, q) in [(0u32, 2u32), (1, 3)] {
        weights.push((SourceRef::Unit { layer: 0, unit: p }, mn));
        weights.push((SourceRef::Unit { layer: 0, unit: q }, -mn));
    }
    for s in 1..=m {
        let scale = mn * f64::exp2(-2.0 * s as f64);
        let plus = hat_readout(s as u32, 0);
        let minus = hat_readout(s as u32, 3);
        for ((ps, pc), (qs, qc)) in plus.into_iter().zip(minus) {
            weights.push((ps, -scale * pc));
            weights.push((qs, scale * qc));
        }
    }
    NetworkGraph::new(2, layers, vec![OutputSpec { weights, bias: 0.0 }])
}

/// Splices a chain of pairwise products `y₁ = inputs₀·inputs₁`,
/// `y_k = y_{k−1}·inputs_{k+1}` into `builder`, sized so that every partial
/// product lands within `eps` of the true one when each `inputs_i` ranges
/// over `[-bound, bound]`. Returns the partial-product expressions
/// `y₁ … y_{d−1}`.
pub(crate) fn append_product_chain(
    builder: &mut GraphBuilder,
    inputs: &[AffineExpr],
    bound: f64,
    eps: f64,
) -> Result<Vec<AffineExpr>> {
    let d = inputs.len();
    if d < 2 {
        return Err(Error::Parameter("a product chain needs at least two factors".into()));
    }
    if !(bound.is_finite() && bound >= 1.0) {
        return Err(Error::Parameter(format!("factor bound must be at least 1, got {bound}")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Parameter(format!("eps must lie in (0,1), got {eps}")));
    }
    // Per-stage relative accuracy ε₀ = eps / (d·bound^d·e); the chained error
    // then stays below d·bound^d·(1+ε₀)^d·ε₀ ≤ eps.
    let eps0 = eps / (d as f64 * bound.powi(d as i32) * std::f64::consts::E);
    if eps0 == 0.0 {
        return Err(Error::Construction(format!(
            "per-stage budget underflows for d={d}, bound={bound}, eps={eps}"
        )));
    }
    let mut ys = Vec::with_capacity(d - 1);
    let mut running_bound = bound; // bound on the left factor entering the stage
    let mut left = inputs[0].clone();
    for k in 2..=d {
        let budget = MulBudget::new(running_bound, bound, running_bound * bound * eps0)?;
        let stage = build_mul2(&budget)?;
        let outs = builder.splice(&stage, &[left, inputs[k - 1].clone()])?;
        let y = outs.into_iter().next().expect("mul2 has one output");
        ys.push(y.clone());
        left = y;
        running_bound *= bound * (1.0 + eps0);
    }
    Ok(ys)
}

/// Chained product of `d` factors on `[-bound, bound]^d`.
///
/// The network has `d` inputs and `d−1` outputs: every partial product
/// `y_{k−1} ≈ x₁⋯x_k` is exposed, each within `eps` of the truth. The last
/// output is the full product, and it is exactly zero whenever any factor
/// is zero.
pub fn build_muld(d: usize, bound: f64, eps: f64) -> Result<NetworkGraph> {
    let mut builder = GraphBuilder::new(d);
    let inputs: Vec<AffineExpr> = (0..d).map(|i| builder.input_expr(i)).collect();
    let ys = append_product_chain(&mut builder, &inputs, bound, eps)?;
    builder.finish(ys)
}
