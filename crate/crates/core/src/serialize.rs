//! JSON serialization for networks and related documents.
//!
//! Numbers are printed in scientific notation with 17 significant digits,
//! which is enough to reproduce every binary64 value exactly, so a network
//! written to disk and read back evaluates bit-for-bit identically.

use std::io;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Layer, NetworkGraph, OutputSpec, SourceRef, Unit};

/// serde_json formatter that prints every float with 17 significant digits.
struct SigDigitFormatter;

impl serde_json::ser::Formatter for SigDigitFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        if !value.is_finite() {
            return Err(io::Error::new(
                io::ErrorKind::InvalidData,
                "non-finite value cannot be serialized",
            ));
        }
        write!(writer, "{value:.16e}")
    }
}

/// Serializes any document with the 17-significant-digit float convention.
pub(crate) fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigDigitFormatter);
    value
        .serialize(&mut ser)
        .map_err(|e| Error::Serialization(e.to_string()))?;
    String::from_utf8(buf).map_err(|e| Error::Serialization(e.to_string()))
}

#[derive(Serialize, Deserialize)]
struct WeightJson {
    /// Hidden layer index, or -1 for a raw input.
    layer: i64,
    unit: u32,
    coeff: f64,
}

#[derive(Serialize, Deserialize)]
struct AffineJson {
    weights: Vec<WeightJson>,
    bias: f64,
}

#[derive(Serialize, Deserialize)]
struct NetworkJson {
    input_dim: usize,
    layers: Vec<Vec<AffineJson>>,
    output: Vec<AffineJson>,
}

fn terms_to_json(terms: &[(SourceRef, f64)]) -> Vec<WeightJson> {
    terms
        .iter()
        .map(|&(src, coeff)| match src {
            SourceRef::Input(i) => WeightJson { layer: -1, unit: i, coeff },
            SourceRef::Unit { layer, unit } => WeightJson { layer: layer as i64, unit, coeff },
        })
        .collect()
}

fn terms_from_json(weights: Vec<WeightJson>) -> Result<Vec<(SourceRef, f64)>> {
    weights
        .into_iter()
        .map(|w| {
            let src = if w.layer == -1 {
                SourceRef::Input(w.unit)
            } else if w.layer >= 0 && w.layer <= u32::MAX as i64 {
                SourceRef::Unit { layer: w.layer as u32, unit: w.unit }
            } else {
                return Err(Error::Serialization(format!("invalid layer index {}", w.layer)));
            };
            Ok((src, w.coeff))
        })
        .collect()
}

impl NetworkGraph {
    /// Serializes the network to its JSON document form.
    pub fn to_json_string(&self) -> Result<String> {
        let doc = NetworkJson {
            input_dim: self.input_dim(),
            layers: self
                .layers()
                .iter()
                .map(|layer| {
                    layer
                        .units
                        .iter()
                        .map(|u| AffineJson { weights: terms_to_json(&u.weights), bias: u.bias })
                        .collect()
                })
                .collect(),
            output: self
                .outputs()
                .iter()
                .map(|o| AffineJson { weights: terms_to_json(&o.weights), bias: o.bias })
                .collect(),
        };
        to_json_string(&doc)
    }

    /// Parses and re-validates a network from its JSON document form.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let doc: NetworkJson = serde_json::from_str(text)?;
        let layers = doc
            .layers
            .into_iter()
            .map(|units| {
                let units = units
                    .into_iter()
                    .map(|u| {
                        Ok(Unit { weights: terms_from_json(u.weights)?, bias: u.bias })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(Layer { units })
            })
            .collect::<Result<Vec<_>>>()?;
        let outputs = doc
            .output
            .into_iter()
            .map(|o| Ok(OutputSpec { weights: terms_from_json(o.weights)?, bias: o.bias }))
            .collect::<Result<Vec<_>>>()?;
        NetworkGraph::new(doc.input_dim, layers, outputs)
    }
}
