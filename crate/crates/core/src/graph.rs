//! Rectifier computation graphs with cross-layer connections.
//!
//! A network is a sequence of hidden layers of rectifier units plus a list of
//! affine output functionals. A unit computes `max(0, w·v + b)` where `v`
//! ranges over raw inputs and units of strictly earlier layers, so skip
//! connections are native and cost nothing. Outputs are affine — they add no
//! units. Depth is the number of hidden layers, size the total number of
//! hidden units.
//!
//! Evaluation is deterministic: layers in order, units in order, and each
//! weighted sum accumulated left to right in the stored term order, bias
//! last. Constructions elsewhere in the crate rely on that order for exact
//! floating-point cancellations, so it is part of the contract.

use crate::error::{Error, Result};

/// A value a unit or output functional can read: a raw input coordinate, or
/// a unit in a strictly earlier layer. Serialized with `layer = -1` standing
/// for raw inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SourceRef {
    /// Raw input coordinate.
    Input(u32),
    /// Hidden unit `unit` of hidden layer `layer` (0-based).
    Unit { layer: u32, unit: u32 },
}

/// One rectifier unit: `max(0, Σ coeff·source + bias)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Unit {
    pub weights: Vec<(SourceRef, f64)>,
    pub bias: f64,
}

/// One hidden layer. Always holds at least one unit.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub units: Vec<Unit>,
}

/// An affine output functional over units and raw inputs (no activation).
#[derive(Debug, Clone, PartialEq)]
pub struct OutputSpec {
    pub weights: Vec<(SourceRef, f64)>,
    pub bias: f64,
}

/// A validated rectifier network.
///
/// Invariants enforced at construction: every reference points at a raw
/// input or a unit in a strictly earlier layer (the graph is a DAG by
/// layering), every layer is nonempty, there is at least one output, and all
/// coefficients are finite.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkGraph {
    input_dim: usize,
    layers: Vec<Layer>,
    outputs: Vec<OutputSpec>,
}

#[inline]
fn relu(v: f64) -> f64 {
    // Branch rather than f64::max so that -0.0 never survives activation.
    if v > 0.0 {
        v
    } else {
        0.0
    }
}

fn check_terms(
    terms: &[(SourceRef, f64)],
    bias: f64,
    current_layer: usize,
    input_dim: usize,
    layer_sizes: &[usize],
    what: &str,
) -> Result<()> {
    if !bias.is_finite() {
        return Err(Error::Data(format!("{what} has non-finite bias")));
    }
    for &(src, coeff) in terms {
        if !coeff.is_finite() {
            return Err(Error::Data(format!("{what} has non-finite weight")));
        }
        match src {
            SourceRef::Input(i) => {
                if i as usize >= input_dim {
                    return Err(Error::Data(format!(
                        "{what} reads input {i} but the network has {input_dim} inputs"
                    )));
                }
            }
            SourceRef::Unit { layer, unit } => {
                let (layer, unit) = (layer as usize, unit as usize);
                if layer >= current_layer {
                    return Err(Error::Data(format!(
                        "{what} reads layer {layer}, which is not strictly earlier"
                    )));
                }
                if unit >= layer_sizes[layer] {
                    return Err(Error::Data(format!(
                        "{what} reads unit {unit} of layer {layer}, which has {} units",
                        layer_sizes[layer]
                    )));
                }
            }
        }
    }
    Ok(())
}

impl NetworkGraph {
    /// Validates layering, reference targets and finiteness, and wraps the
    /// parts into a network.
    pub fn new(input_dim: usize, layers: Vec<Layer>, outputs: Vec<OutputSpec>) -> Result<Self> {
        if input_dim == 0 {
            return Err(Error::Parameter("input_dim must be at least 1".into()));
        }
        if outputs.is_empty() {
            return Err(Error::Parameter("a network needs at least one output".into()));
        }
        let layer_sizes: Vec<usize> = layers.iter().map(|l| l.units.len()).collect();
        for (li, layer) in layers.iter().enumerate() {
            if layer.units.is_empty() {
                return Err(Error::Data(format!("layer {li} is empty")));
            }
            for (ui, unit) in layer.units.iter().enumerate() {
                check_terms(
                    &unit.weights,
                    unit.bias,
                    li,
                    input_dim,
                    &layer_sizes,
                    &format!("unit {ui} of layer {li}"),
                )?;
            }
        }
        for (oi, out) in outputs.iter().enumerate() {
            check_terms(
                &out.weights,
                out.bias,
                layers.len(),
                input_dim,
                &layer_sizes,
                &format!("output {oi}"),
            )?;
        }
        Ok(NetworkGraph { input_dim, layers, outputs })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    /// Number of hidden layers.
    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    /// Total number of hidden units across all layers.
    pub fn size(&self) -> usize {
        self.layers.iter().map(|l| l.units.len()).sum()
    }

    pub fn output_arity(&self) -> usize {
        self.outputs.len()
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn outputs(&self) -> &[OutputSpec] {
        &self.outputs
    }

    /// Largest absolute coefficient (weights and biases, units and outputs).
    pub fn max_abs_weight(&self) -> f64 {
        let mut m = 0.0f64;
        let mut scan = |terms: &[(SourceRef, f64)], bias: f64| {
            for &(_, c) in terms {
                m = m.max(c.abs());
            }
            m = m.max(bias.abs());
        };
        for layer in &self.layers {
            for unit in &layer.units {
                scan(&unit.weights, unit.bias);
            }
        }
        for out in &self.outputs {
            scan(&out.weights, out.bias);
        }
        m
    }

    /// Evaluates every output functional at `x`.
    pub fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut values = Vec::new();
        let mut out = Vec::new();
        self.evaluate_into(x, &mut values, &mut out)?;
        Ok(out)
    }

    /// The last output coordinate; constructions place their principal value
    /// there (the full product of a chain, the highest-degree recurrence
    /// term, the lone output of a scalar network).
    pub fn evaluate_scalar(&self, x: &[f64]) -> Result<f64> {
        let mut values = Vec::new();
        let mut out = Vec::new();
        self.evaluate_into(x, &mut values, &mut out)?;
        Ok(*out.last().expect("networks have at least one output"))
    }

    /// Evaluation core with caller-owned scratch, for hot loops. `values` is
    /// the flat unit-value buffer, `out` receives the outputs.
    pub fn evaluate_into(
        &self,
        x: &[f64],
        values: &mut Vec<f64>,
        out: &mut Vec<f64>,
    ) -> Result<()> {
        if x.len() != self.input_dim {
            return Err(Error::DimensionMismatch { expected: self.input_dim, got: x.len() });
        }
        values.clear();
        values.reserve(self.size());
        // Offsets of each layer inside the flat buffer. Layer counts are
        // small; recomputing keeps the network immutable and Sync.
        let mut offsets = Vec::with_capacity(self.layers.len());
        let mut total = 0usize;
        for layer in &self.layers {
            offsets.push(total);
            total += layer.units.len();
        }
        for (li, layer) in self.layers.iter().enumerate() {
            let base = offsets[li];
            for (ui, unit) in layer.units.iter().enumerate() {
                let mut acc = 0.0f64;
                for &(src, c) in &unit.weights {
                    let v = match src {
                        SourceRef::Input(i) => x[i as usize],
                        SourceRef::Unit { layer, unit } => {
                            values[offsets[layer as usize] + unit as usize]
                        }
                    };
                    acc += c * v;
                }
                acc += unit.bias;
                debug_assert_eq!(values.len(), base + ui);
                values.push(relu(acc));
            }
        }
        out.clear();
        out.reserve(self.outputs.len());
        for o in &self.outputs {
            let mut acc = 0.0f64;
            for &(src, c) in &o.weights {
                let v = match src {
                    SourceRef::Input(i) => x[i as usize],
                    SourceRef::Unit { layer, unit } => {
                        values[offsets[layer as usize] + unit as usize]
                    }
                };
                acc += c * v;
            }
            acc += o.bias;
            out.push(acc);
        }
        Ok(())
    }
}

/// The scalar identity `x = max(0, x) - max(0, -x)`, exact for every finite
/// input. Two units, depth 1.
pub fn identity() -> NetworkGraph {
    let layer = Layer {
        units: vec![
            Unit { weights: vec![(SourceRef::Input(0), 1.0)], bias: 0.0 },
            Unit { weights: vec![(SourceRef::Input(0), -1.0)], bias: 0.0 },
        ],
    };
    let out = OutputSpec {
        weights: vec![
            (SourceRef::Unit { layer: 0, unit: 0 }, 1.0),
            (SourceRef::Unit { layer: 0, unit: 1 }, -1.0),
        ],
        bias: 0.0,
    };
    NetworkGraph::new(1, vec![layer], vec![out]).expect("identity network is valid")
}

/// Feeds the outputs of `inner` into the inputs of `outer`.
///
/// `outer.input_dim` must equal `inner.output_arity()`. Depth and size add;
/// the affine outputs of `inner` fold into the weights of `outer`'s units,
/// so no glue units are spent.
pub fn compose(outer: &NetworkGraph, inner: &NetworkGraph) -> Result<NetworkGraph> {
    if outer.input_dim() != inner.output_arity() {
        return Err(Error::DimensionMismatch {
            expected: outer.input_dim(),
            got: inner.output_arity(),
        });
    }
    let mut b = GraphBuilder::new(inner.input_dim());
    let raw: Vec<AffineExpr> = (0..inner.input_dim()).map(|i| b.input_expr(i)).collect();
    let mid = b.splice(inner, &raw)?;
    let outs = b.splice(outer, &mid)?;
    b.finish(outs)
}

/// Offsets of each net's units inside the layer-aligned merge used by
/// [`parallel`] and [`linear_combine`].
fn parallel_offsets(nets: &[NetworkGraph]) -> (usize, Vec<Vec<usize>>) {
    let max_depth = nets.iter().map(|n| n.depth()).max().unwrap_or(0);
    let mut offsets = vec![Vec::with_capacity(max_depth); nets.len()];
    for l in 0..max_depth {
        let mut acc = 0usize;
        for (net, row) in nets.iter().zip(offsets.iter_mut()) {
            row.push(acc);
            if l < net.depth() {
                acc += net.layers()[l].units.len();
            }
        }
    }
    (max_depth, offsets)
}

fn remap_terms(terms: &[(SourceRef, f64)], offsets: &[usize]) -> Vec<(SourceRef, f64)> {
    terms
        .iter()
        .map(|&(src, c)| match src {
            SourceRef::Input(i) => (SourceRef::Input(i), c),
            SourceRef::Unit { layer, unit } => (
                SourceRef::Unit { layer, unit: unit + offsets[layer as usize] as u32 },
                c,
            ),
        })
        .collect()
}

/// Runs several networks side by side on the same inputs, concatenating
/// their outputs. Depth is the maximum, size the sum.
pub fn parallel(nets: &[NetworkGraph]) -> Result<NetworkGraph> {
    if nets.is_empty() {
        return Err(Error::Parameter("parallel needs at least one network".into()));
    }
    let input_dim = nets[0].input_dim();
    for n in nets {
        if n.input_dim() != input_dim {
            return Err(Error::DimensionMismatch { expected: input_dim, got: n.input_dim() });
        }
    }
    let (max_depth, offsets) = parallel_offsets(nets);
    let mut layers = Vec::with_capacity(max_depth);
    for l in 0..max_depth {
        let mut units = Vec::new();
        for (k, net) in nets.iter().enumerate() {
            if l < net.depth() {
                for unit in &net.layers()[l].units {
                    units.push(Unit {
                        weights: remap_terms(&unit.weights, &offsets[k]),
                        bias: unit.bias,
                    });
                }
            }
        }
        layers.push(Layer { units });
    }
    let mut outputs = Vec::new();
    for (k, net) in nets.iter().enumerate() {
        for out in net.outputs() {
            outputs.push(OutputSpec {
                weights: remap_terms(&out.weights, &offsets[k]),
                bias: out.bias,
            });
        }
    }
    NetworkGraph::new(input_dim, layers, outputs)
}

/// Merges scalar networks into `bias + Σ coeffs[i] · nets[i](x)`.
///
/// Purely an output-functional rewrite on top of the parallel merge: no
/// hidden units are added.
pub fn linear_combine(nets: &[NetworkGraph], coeffs: &[f64], bias: f64) -> Result<NetworkGraph> {
    if nets.len() != coeffs.len() {
        return Err(Error::DimensionMismatch { expected: nets.len(), got: coeffs.len() });
    }
    for n in nets {
        if n.output_arity() != 1 {
            return Err(Error::Parameter(
                "linear_combine requires scalar-output networks".into(),
            ));
        }
    }
    let merged = parallel(nets)?;
    let mut weights = Vec::new();
    let mut total_bias = bias;
    for (out, &c) in merged.outputs().iter().zip(coeffs) {
        for &(src, w) in &out.weights {
            weights.push((src, c * w));
        }
        total_bias += c * out.bias;
    }
    NetworkGraph::new(
        merged.input_dim(),
        merged.layers.clone(),
        vec![OutputSpec { weights, bias: total_bias }],
    )
}

/// Replaces the inputs of `net` by the affine map `x ↦ A·x + b`, folding the
/// map into every weight that reads a raw input. `a` has one row per old
/// input; all rows share the new input dimension. Depth and size are
/// unchanged.
pub fn precompose_affine(
    net: &NetworkGraph,
    a: &[Vec<f64>],
    b: &[f64],
) -> Result<NetworkGraph> {
    if a.len() != net.input_dim() || b.len() != net.input_dim() {
        return Err(Error::DimensionMismatch {
            expected: net.input_dim(),
            got: if a.len() != net.input_dim() { a.len() } else { b.len() },
        });
    }
    let new_dim = a.first().map(|row| row.len()).unwrap_or(0);
    if new_dim == 0 {
        return Err(Error::Parameter("affine precomposition needs at least one new input".into()));
    }
    for row in a {
        if row.len() != new_dim {
            return Err(Error::DimensionMismatch { expected: new_dim, got: row.len() });
        }
    }
    let mut builder = GraphBuilder::new(new_dim);
    let exprs: Vec<AffineExpr> = a
        .iter()
        .zip(b)
        .map(|(row, &bi)| {
            let terms = row
                .iter()
                .enumerate()
                .filter(|(_, &c)| c != 0.0)
                .map(|(j, &c)| (SourceRef::Input(j as u32), c))
                .collect();
            AffineExpr { terms, bias: bi }
        })
        .collect();
    let outs = builder.splice(net, &exprs)?;
    builder.finish(outs)
}

/// An affine expression over the values of a graph under construction: used
/// to wire sub-networks together without spending units on glue.
#[derive(Debug, Clone)]
pub(crate) struct AffineExpr {
    pub(crate) terms: Vec<(SourceRef, f64)>,
    pub(crate) bias: f64,
}

impl AffineExpr {
    pub(crate) fn constant(bias: f64) -> Self {
        AffineExpr { terms: Vec::new(), bias }
    }

    /// `bias + Σ c_i · part_i`, term order following `parts`.
    pub(crate) fn combine(parts: &[(f64, &AffineExpr)], bias: f64) -> Self {
        let mut terms = Vec::new();
        let mut total_bias = bias;
        for &(c, expr) in parts {
            for &(src, w) in &expr.terms {
                terms.push((src, c * w));
            }
            total_bias += c * expr.bias;
        }
        AffineExpr { terms, bias: total_bias }
    }
}

/// Incrementally grows a network by splicing validated sub-networks onto the
/// end, rewiring their raw inputs to arbitrary affine expressions over the
/// host's values.
pub(crate) struct GraphBuilder {
    input_dim: usize,
    layers: Vec<Layer>,
}

impl GraphBuilder {
    pub(crate) fn new(input_dim: usize) -> Self {
        GraphBuilder { input_dim, layers: Vec::new() }
    }

    pub(crate) fn input_expr(&self, i: usize) -> AffineExpr {
        debug_assert!(i < self.input_dim);
        AffineExpr { terms: vec![(SourceRef::Input(i as u32), 1.0)], bias: 0.0 }
    }

    /// Appends `net`'s layers after the host's current layers, substituting
    /// `inputs[i]` for every reference to `net`'s raw input `i`. Substitution
    /// preserves term order, so exact cancellation patterns in `inputs`
    /// survive the splice. Returns `net`'s outputs as host expressions.
    pub(crate) fn splice(
        &mut self,
        net: &NetworkGraph,
        inputs: &[AffineExpr],
    ) -> Result<Vec<AffineExpr>> {
        if inputs.len() != net.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: net.input_dim(),
                got: inputs.len(),
            });
        }
        let offset = self.layers.len() as u32;
        let rewire = |terms: &[(SourceRef, f64)], bias: f64| -> (Vec<(SourceRef, f64)>, f64) {
            let mut new_terms = Vec::with_capacity(terms.len());
            let mut new_bias = bias;
            for &(src, c) in terms {
                match src {
                    SourceRef::Input(i) => {
                        let expr = &inputs[i as usize];
                        for &(s2, c2) in &expr.terms {
                            new_terms.push((s2, c * c2));
                        }
                        new_bias += c * expr.bias;
                    }
                    SourceRef::Unit { layer, unit } => {
                        new_terms.push((SourceRef::Unit { layer: layer + offset, unit }, c));
                    }
                }
            }
            (new_terms, new_bias)
        };
        for layer in net.layers() {
            let units = layer
                .units
                .iter()
                .map(|u| {
                    let (weights, bias) = rewire(&u.weights, u.bias);
                    Unit { weights, bias }
                })
                .collect();
            self.layers.push(Layer { units });
        }
        Ok(net
            .outputs()
            .iter()
            .map(|o| {
                let (terms, bias) = rewire(&o.weights, o.bias);
                AffineExpr { terms, bias }
            })
            .collect())
    }

    pub(crate) fn finish(self, outputs: Vec<AffineExpr>) -> Result<NetworkGraph> {
        let outputs = outputs
            .into_iter()
            .map(|e| OutputSpec { weights: e.terms, bias: e.bias })
            .collect();
        NetworkGraph::new(self.input_dim, self.layers, outputs)
    }
}
