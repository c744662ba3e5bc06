//! Layered ReLU network IR: evaluation, composition, audit and persistence.
//!
//! Layers keep their weights row-compressed; absent edges are structural
//! zeros and never stored. Small layers are written to JSON as dense
//! matrices, large ones as per-row `[column, weight]` lists.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{check_dim, Error, Result};
use crate::scalar::Scalar;

/// Layers with at most this many matrix entries are written densely.
pub const DENSE_JSON_LIMIT: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Linear,
}

impl Activation {
    #[inline]
    pub fn apply<T: Scalar>(self, t: T) -> T {
        match self {
            Activation::Relu => t.relu(),
            Activation::Linear => t,
        }
    }
}

/// One affine-plus-activation layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    fan_in: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
    bias: Vec<f64>,
    activation: Vec<Activation>,
}

impl Layer {
    /// Builds a layer from sparse rows; zero weights are dropped.
    pub fn from_rows(
        fan_in: usize,
        rows: Vec<Vec<(usize, f64)>>,
        bias: Vec<f64>,
        activation: Vec<Activation>,
    ) -> Result<Self> {
        if rows.len() != bias.len() || rows.len() != activation.len() {
            return Err(Error::InvalidNetwork(format!(
                "layer has {} rows, {} biases and {} activations",
                rows.len(),
                bias.len(),
                activation.len()
            )));
        }
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            for (c, w) in row {
                if c >= fan_in {
                    return Err(Error::InvalidNetwork(format!("column {c} out of range for fan-in {fan_in}")));
                }
                if !w.is_finite() {
                    return Err(Error::NonFinite("layer weights".into()));
                }
                if cols.len() > *row_ptr.last().unwrap() && *cols.last().unwrap() as usize == c {
                    return Err(Error::InvalidNetwork(format!("duplicate column {c} in a row")));
                }
                if w != 0.0 {
                    cols.push(c as u32);
                    vals.push(w);
                }
            }
            row_ptr.push(cols.len());
        }
        if bias.iter().any(|b| !b.is_finite()) {
            return Err(Error::NonFinite("layer biases".into()));
        }
        Ok(Layer { fan_in, row_ptr, cols, vals, bias, activation })
    }

    /// Builds a layer from a dense row-major matrix (`units × fan_in`).
    pub fn dense(weights: Vec<Vec<f64>>, bias: Vec<f64>, activation: Vec<Activation>) -> Result<Self> {
        let fan_in = weights.first().map_or(0, Vec::len);
        let mut rows = Vec::with_capacity(weights.len());
        for w in weights {
            check_dim(fan_in, w.len())?;
            rows.push(w.into_iter().enumerate().collect());
        }
        Self::from_rows(fan_in, rows, bias, activation)
    }

    pub fn units(&self) -> usize {
        self.bias.len()
    }

    pub fn fan_in(&self) -> usize {
        self.fan_in
    }

    pub fn nonzero_weights(&self) -> usize {
        self.vals.len()
    }

    pub fn nonzero_biases(&self) -> usize {
        self.bias.iter().filter(|b| **b != 0.0).count()
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn activation(&self) -> &[Activation] {
        &self.activation
    }

    /// `(column, weight)` pairs of unit `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[span.clone()].iter().map(|&c| c as usize).zip(self.vals[span].iter().copied())
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.units())
            .map(|i| {
                let mut r = vec![0.0; self.fan_in];
                for (c, w) in self.row(i) {
                    r[c] = w;
                }
                r
            })
            .collect()
    }

    fn forward<T: Scalar>(&self, x: &[T], out: &mut Vec<T>) {
        out.clear();
        for i in 0..self.units() {
            let mut acc = T::from_f64(self.bias[i]);
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc = acc + x[self.cols[k] as usize] * self.vals[k];
            }
            out.push(self.activation[i].apply(acc));
        }
    }

    /// `width` LINEAR units passing their inputs through unchanged.
    pub fn identity(width: usize) -> Self {
        Layer {
            fan_in: width,
            row_ptr: (0..=width).collect(),
            cols: (0..width as u32).collect(),
            vals: vec![1.0; width],
            bias: vec![0.0; width],
            activation: vec![Activation::Linear; width],
        }
    }
}

/// A feed-forward network `y ↦ A_L(… A_1(y))` with annotations.
#[derive(Debug, Clone, PartialEq)]
pub struct ReluNetwork {
    input_dim: usize,
    layers: Vec<Layer>,
    metadata: BTreeMap<String, Value>,
}

impl ReluNetwork {
    pub fn new(input_dim: usize, layers: Vec<Layer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidNetwork("a network needs at least one layer".into()));
        }
        let mut width = input_dim;
        for (k, layer) in layers.iter().enumerate() {
            if layer.fan_in != width {
                return Err(Error::InvalidNetwork(format!(
                    "layer {k} has fan-in {} but receives {width} values",
                    layer.fan_in
                )));
            }
            width = layer.units();
        }
        Ok(ReluNetwork { input_dim, layers, metadata: BTreeMap::new() })
    }

    pub fn with_metadata(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.metadata.insert(key.to_string(), value.into());
        self
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map_or(self.input_dim, Layer::units)
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn metadata(&self) -> &BTreeMap<String, Value> {
        &self.metadata
    }

    pub fn metadata_mut(&mut self) -> &mut BTreeMap<String, Value> {
        &mut self.metadata
    }

    pub fn eval(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.eval_in::<f64>(y)
    }

    pub fn eval_in<T: Scalar>(&self, y: &[f64]) -> Result<Vec<T>> {
        let mut ev = Evaluator::new(self);
        Ok(ev.eval(y)?.to_vec())
    }

    pub fn evaluator<T: Scalar>(&self) -> Evaluator<'_, T> {
        Evaluator::new(self)
    }

    pub fn audit(&self) -> ComplexityAudit {
        ComplexityAudit::of(self)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_doc())?)
    }

    pub fn to_json_pretty(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_doc())?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: NetworkDoc = serde_json::from_str(s)?;
        Self::from_doc(doc)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    fn to_doc(&self) -> NetworkDoc {
        let layers = self
            .layers
            .iter()
            .map(|l| {
                let (weights, sparse) = if l.units() * l.fan_in <= DENSE_JSON_LIMIT {
                    (Some(l.to_dense()), None)
                } else {
                    let rows = (0..l.units()).map(|i| l.row(i).collect()).collect();
                    (None, Some(SparseDoc { fan_in: l.fan_in, rows }))
                };
                LayerDoc { weights, sparse, bias: l.bias.clone(), activation: l.activation.clone() }
            })
            .collect();
        NetworkDoc { input_dim: self.input_dim, layers, metadata: self.metadata.clone() }
    }

    fn from_doc(doc: NetworkDoc) -> Result<Self> {
        let mut width = doc.input_dim;
        let mut layers = Vec::with_capacity(doc.layers.len());
        for (k, ld) in doc.layers.into_iter().enumerate() {
            let layer = match (ld.weights, ld.sparse) {
                (Some(w), None) => {
                    // an empty dense matrix carries no fan-in of its own
                    if w.is_empty() {
                        Layer::from_rows(width, Vec::new(), ld.bias, ld.activation)?
                    } else {
                        Layer::dense(w, ld.bias, ld.activation)?
                    }
                }
                (None, Some(s)) => Layer::from_rows(s.fan_in, s.rows, ld.bias, ld.activation)?,
                _ => {
                    return Err(Error::InvalidNetwork(format!(
                        "layer {k} must have exactly one of `weights` or `sparse`"
                    )))
                }
            };
            width = layer.units();
            layers.push(layer);
        }
        let mut net = ReluNetwork::new(doc.input_dim, layers)?;
        net.metadata = doc.metadata;
        Ok(net)
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkDoc {
    input_dim: usize,
    layers: Vec<LayerDoc>,
    #[serde(default)]
    metadata: BTreeMap<String, Value>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayerDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weights: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sparse: Option<SparseDoc>,
    bias: Vec<f64>,
    activation: Vec<Activation>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SparseDoc {
    fan_in: usize,
    rows: Vec<Vec<(usize, f64)>>,
}

/// Reusable forward-pass buffers.
pub struct Evaluator<'a, T> {
    net: &'a ReluNetwork,
    cur: Vec<T>,
    next: Vec<T>,
    penultimate: Vec<T>,
}

impl<'a, T: Scalar> Evaluator<'a, T> {
    pub fn new(net: &'a ReluNetwork) -> Self {
        Evaluator { net, cur: Vec::new(), next: Vec::new(), penultimate: Vec::new() }
    }

    pub fn eval(&mut self, y: &[f64]) -> Result<&[T]> {
        check_dim(self.net.input_dim, y.len())?;
        if let Some(bad) = y.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("network input ({bad})")));
        }
        self.cur.clear();
        self.cur.extend(y.iter().map(|&v| T::from_f64(v)));
        let last = self.net.layers.len() - 1;
        for (k, layer) in self.net.layers.iter().enumerate() {
            if k == last {
                self.penultimate.clear();
                self.penultimate.extend_from_slice(&self.cur);
            }
            layer.forward(&self.cur, &mut self.next);
            std::mem::swap(&mut self.cur, &mut self.next);
        }
        Ok(&self.cur)
    }

    /// Values entering the final layer during the last `eval` call.
    pub fn penultimate(&self) -> &[T] {
        &self.penultimate
    }
}

/// Appends `b` after `a`; depth adds.
pub fn stack(a: &ReluNetwork, b: &ReluNetwork) -> Result<ReluNetwork> {
    if a.output_dim() != b.input_dim {
        return Err(Error::DimensionMismatch { expected: b.input_dim, got: a.output_dim() });
    }
    let layers = a.layers.iter().chain(&b.layers).cloned().collect();
    let mut net = ReluNetwork::new(a.input_dim, layers)?;
    net.metadata = a.metadata.clone();
    net.metadata.extend(b.metadata.clone());
    Ok(net)
}

/// Places `nets` side by side. Members shorter than the deepest are
/// extended with LINEAR identity layers; these padding units and weights
/// are recorded in the `padding` metadata entry and count toward the audit.
pub fn parallel(nets: &[ReluNetwork], shared_input: bool) -> Result<ReluNetwork> {
    if nets.is_empty() {
        return Err(Error::InvalidNetwork("parallel composition of zero networks".into()));
    }
    let input_dim = if shared_input {
        let d = nets[0].input_dim;
        for n in nets {
            check_dim(d, n.input_dim)?;
        }
        d
    } else {
        nets.iter().map(|n| n.input_dim).sum()
    };
    let depth = nets.iter().map(ReluNetwork::depth).max().unwrap();

    let mut in_offsets = Vec::with_capacity(nets.len());
    let mut acc = 0;
    for n in nets {
        in_offsets.push(if shared_input { 0 } else { acc });
        acc += n.input_dim;
    }

    let mut layers = Vec::with_capacity(depth);
    let mut prev_offsets = in_offsets.clone();
    let mut prev_width = input_dim;
    for k in 0..depth {
        let mut rows = Vec::new();
        let mut bias = Vec::new();
        let mut activation = Vec::new();
        let mut offsets = Vec::with_capacity(nets.len());
        for (n, &off) in nets.iter().zip(&prev_offsets) {
            offsets.push(rows.len());
            let padded;
            let layer = match n.layers.get(k) {
                Some(l) => l,
                None => {
                    padded = Layer::identity(n.output_dim());
                    &padded
                }
            };
            for i in 0..layer.units() {
                rows.push(layer.row(i).map(|(c, w)| (c + off, w)).collect());
            }
            bias.extend_from_slice(&layer.bias);
            activation.extend_from_slice(&layer.activation);
        }
        layers.push(Layer::from_rows(prev_width, rows, bias, activation)?);
        prev_width = layers.last().unwrap().units();
        prev_offsets = offsets;
    }

    let mut subnets = Vec::with_capacity(nets.len());
    let (mut pad_units, mut pad_weights) = (0usize, 0usize);
    let mut out_offset = 0;
    for (idx, n) in nets.iter().enumerate() {
        let a = n.audit();
        let pad = (depth - n.depth()) * n.output_dim();
        pad_units += pad;
        pad_weights += pad;
        let name = n
            .metadata
            .get("name")
            .and_then(Value::as_str)
            .map_or_else(|| format!("subnet{idx}"), str::to_string);
        subnets.push(serde_json::json!({
            "name": name,
            "units": a.units,
            "nonzero_weights": a.nonzero_weights,
            "nonzero_biases": a.nonzero_biases,
            "depth": a.depth,
            "output_offset": out_offset,
            "padding_units": pad,
        }));
        out_offset += n.output_dim();
    }
    let net = ReluNetwork::new(input_dim, layers)?
        .with_metadata("subnetworks", Value::Array(subnets))
        .with_metadata("padding", serde_json::json!({ "units": pad_units, "weights": pad_weights }));
    Ok(net)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubnetAudit {
    pub units: usize,
    pub nonzero_weights: usize,
    pub nonzero_biases: usize,
    pub depth: usize,
}

/// Size counts of a network. `units` includes the output units.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexityAudit {
    pub units: usize,
    pub nonzero_weights: usize,
    pub nonzero_biases: usize,
    pub depth: usize,
    /// Nonzero weights of the first layer, i.e. edges leaving the inputs.
    pub first_layer_weights: usize,
    pub padding_units: usize,
    pub padding_weights: usize,
    pub per_subnetwork: BTreeMap<String, SubnetAudit>,
}

impl ComplexityAudit {
    pub fn of(net: &ReluNetwork) -> Self {
        let mut per_subnetwork = BTreeMap::new();
        if let Some(Value::Array(subs)) = net.metadata.get("subnetworks") {
            for s in subs {
                let get = |k: &str| s.get(k).and_then(Value::as_u64).unwrap_or(0) as usize;
                let name = s.get("name").and_then(Value::as_str).unwrap_or("?").to_string();
                per_subnetwork.insert(
                    name,
                    SubnetAudit {
                        units: get("units"),
                        nonzero_weights: get("nonzero_weights"),
                        nonzero_biases: get("nonzero_biases"),
                        depth: get("depth"),
                    },
                );
            }
        }
        let pad = |k: &str| {
            net.metadata
                .get("padding")
                .and_then(|p| p.get(k))
                .and_then(Value::as_u64)
                .unwrap_or(0) as usize
        };
        ComplexityAudit {
            units: net.layers.iter().map(Layer::units).sum(),
            nonzero_weights: net.layers.iter().map(Layer::nonzero_weights).sum(),
            nonzero_biases: net.layers.iter().map(Layer::nonzero_biases).sum(),
            depth: net.depth(),
            first_layer_weights: net.layers[0].nonzero_weights(),
            padding_units: pad("units"),
            padding_weights: pad("weights"),
            per_subnetwork,
        }
    }

    /// `units + nonzero weights + nonzero biases`.
    pub fn complexity(&self) -> usize {
        self.units + self.nonzero_weights + self.nonzero_biases
    }

    /// Units and weights not attributable to a member subnetwork or to
    /// padding (for an assembled network: the output layer).
    pub fn overhead(&self) -> (usize, usize) {
        let su: usize = self.per_subnetwork.values().map(|s| s.units).sum();
        let sw: usize = self.per_subnetwork.values().map(|s| s.nonzero_weights).sum();
        (
            self.units - su - self.padding_units,
            self.nonzero_weights - sw - self.padding_weights,
        )
    }
}

/// `t ↦ σ(t) − σ(−t)` in two layers.
pub fn identity_gadget() -> ReluNetwork {
    let l1 = Layer::dense(vec![vec![1.0], vec![-1.0]], vec![0.0; 2], vec![Activation::Relu; 2]).unwrap();
    let l2 = Layer::dense(vec![vec![1.0, -1.0]], vec![0.0], vec![Activation::Linear]).unwrap();
    ReluNetwork::new(1, vec![l1, l2]).unwrap()
}

/// `t ↦ σ(t+1) − σ(t−1) − 1`, i.e. `t` clamped to `[−1,1]`.
pub fn clamp_gadget() -> ReluNetwork {
    let l1 = Layer::dense(vec![vec![1.0], vec![1.0]], vec![1.0, -1.0], vec![Activation::Relu; 2]).unwrap();
    let l2 = Layer::dense(vec![vec![1.0, -1.0]], vec![-1.0], vec![Activation::Linear]).unwrap();
    ReluNetwork::new(1, vec![l1, l2]).unwrap()
}
