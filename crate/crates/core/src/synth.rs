//! Weight-by-weight construction of the approximating network.
//!
//! Gadgets:
//!
//! - squaring on `[0,1]`: `t − Σ_{s=1}^m g_s(t)/4^s` with the hat map
//!   `g_1(x) = 2σ(x) − 4σ(x−½) + 2σ(x−1)` and `g_s = g_1∘g_{s−1}`; the
//!   running sum stays nonnegative and rides along as one ReLU unit;
//! - pairwise product on `[−1,1]²` by polarization,
//!   `xy = ½[4s(|x+y|/2) − s(|x|) − s(|y|)]`, where the absolute values are
//!   fused into the first squaring layer (`σ(|w|−c) = σ(w−c) + σ(−w−c)` for
//!   `c ≥ 0`) and the result is clamped by `σ(z+1) − σ(z−1) − 1`;
//! - `n`-ary product as a balanced tree of pairwise nodes sharing one
//!   refinement level;
//! - factor layer `y_i − r = σ(y_i − r) − σ(r − y_i)`.
//!
//! All construction weights are powers of two except the roots and the
//! expansion coefficients.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use twofloat::TwoFloat;

use crate::error::{Error, Result};
use crate::multiindex::{BoundFunction, MultiIndex, QuasiOptimalIndexSet};
use crate::netcore::{parallel, stack, Activation, ComplexityAudit, Layer, ReluNetwork};
use crate::orthopoly::{PolynomialFamily, QuasiOptimalExpansion};
use crate::sampling::SamplerSpec;
use crate::scalar::{Precision, Scalar};

/// Largest refinement level a product node may use.
pub const MAX_REFINEMENT: u32 = 60;

/// Raw budgets at or above one are replaced by this value.
pub const BUDGET_CLAMP: f64 = 1.0 - 1e-6;

/// Budgets that underflow to zero are raised to this value.
pub const BUDGET_FLOOR: f64 = 1e-300;

/// Networks are measured in double-double arithmetic when some budget is
/// below this value and no precision is requested explicitly.
pub const AUTO_DOUBLE_DOUBLE_BELOW: f64 = 1e-12;

#[derive(Debug, Clone, Default, PartialEq)]
struct Expr {
    terms: Vec<(usize, f64)>,
    bias: f64,
}

impl Expr {
    fn var(i: usize) -> Self {
        Expr { terms: vec![(i, 1.0)], bias: 0.0 }
    }

    fn affine(i: usize, w: f64, bias: f64) -> Self {
        Expr { terms: vec![(i, w)], bias }
    }

    fn scaled(&self, a: f64) -> Self {
        Expr { terms: self.terms.iter().map(|&(i, w)| (i, a * w)).collect(), bias: a * self.bias }
    }

    /// `self + a·other`.
    fn plus(&self, other: &Expr, a: f64) -> Self {
        let mut e = self.clone();
        e.terms.extend(other.terms.iter().map(|&(i, w)| (i, a * w)));
        e.bias += a * other.bias;
        e
    }

    fn shifted(&self, c: f64) -> Self {
        Expr { terms: self.terms.clone(), bias: self.bias + c }
    }

    /// Merged `(column, weight)` row with zero weights removed.
    fn row(&self) -> Vec<(usize, f64)> {
        let mut t = self.terms.clone();
        t.sort_by_key(|&(i, _)| i);
        let mut out: Vec<(usize, f64)> = Vec::with_capacity(t.len());
        for (i, w) in t {
            match out.last_mut() {
                Some((j, acc)) if *j == i => *acc += w,
                _ => out.push((i, w)),
            }
        }
        out.retain(|&(_, w)| w != 0.0);
        out
    }
}

#[derive(Default)]
struct LayerAcc {
    rows: Vec<Vec<(usize, f64)>>,
    bias: Vec<f64>,
    activation: Vec<Activation>,
}

impl LayerAcc {
    fn relu(&mut self, e: &Expr) -> Expr {
        self.rows.push(e.row());
        self.bias.push(e.bias);
        self.activation.push(Activation::Relu);
        Expr::var(self.rows.len() - 1)
    }
}

struct NetBuilder {
    input_dim: usize,
    width: usize,
    layers: Vec<Layer>,
}

impl NetBuilder {
    fn new(input_dim: usize) -> Self {
        NetBuilder { input_dim, width: input_dim, layers: Vec::new() }
    }

    fn commit(&mut self, acc: LayerAcc) -> Result<()> {
        let layer = Layer::from_rows(self.width, acc.rows, acc.bias, acc.activation)?;
        self.width = layer.units();
        self.layers.push(layer);
        Ok(())
    }

    fn finish(mut self, outputs: &[Expr]) -> Result<ReluNetwork> {
        let rows = outputs.iter().map(Expr::row).collect();
        let bias = outputs.iter().map(|e| e.bias).collect();
        let layer = Layer::from_rows(self.width, rows, bias, vec![Activation::Linear; outputs.len()])?;
        self.layers.push(layer);
        ReluNetwork::new(self.input_dim, self.layers)
    }
}

/// Squaring lane advancing one layer per call.
enum SquareLane {
    Start { w: Expr, signed: bool },
    Running { g: Expr, acc: Expr, s: i32 },
}

impl SquareLane {
    fn advance(&mut self, layer: &mut LayerAcc) {
        let next = match self {
            SquareLane::Start { w, signed } => {
                let (u1, u2, u3) = if *signed {
                    let neg = w.scaled(-1.0);
                    let pair = |layer: &mut LayerAcc, c: f64| {
                        let p = layer.relu(&w.shifted(-c));
                        let n = layer.relu(&neg.shifted(-c));
                        p.plus(&n, 1.0)
                    };
                    (pair(layer, 0.0), pair(layer, 0.5), pair(layer, 1.0))
                } else {
                    (layer.relu(w), layer.relu(&w.shifted(-0.5)), layer.relu(&w.shifted(-1.0)))
                };
                let g = u1.scaled(2.0).plus(&u2, -4.0).plus(&u3, 2.0);
                SquareLane::Running { g, acc: u1, s: 1 }
            }
            SquareLane::Running { g, acc, s } => {
                let a = layer.relu(g);
                let b = layer.relu(&g.shifted(-0.5));
                let c = layer.relu(&g.shifted(-1.0));
                let acc = layer.relu(&acc.plus(g, -(0.25f64).powi(*s)));
                let g = a.scaled(2.0).plus(&b, -4.0).plus(&c, 2.0);
                SquareLane::Running { g, acc, s: *s + 1 }
            }
        };
        *self = next;
    }

    fn value(&self) -> Expr {
        match self {
            SquareLane::Running { g, acc, s } => acc.plus(g, -(0.25f64).powi(*s)),
            SquareLane::Start { .. } => unreachable!("squaring lane read before its first layer"),
        }
    }
}

/// One slot of a product-tree level.
enum Lane {
    Product { squares: [SquareLane; 3], out: Option<Expr> },
    Pass { pos: Expr, neg: Expr },
}

impl Lane {
    fn product(x: &Expr, y: &Expr) -> Self {
        let w = x.scaled(0.5).plus(y, 0.5);
        Lane::Product {
            squares: [
                SquareLane::Start { w, signed: true },
                SquareLane::Start { w: x.clone(), signed: true },
                SquareLane::Start { w: y.clone(), signed: true },
            ],
            out: None,
        }
    }

    fn pass(e: &Expr) -> Self {
        Lane::Pass { pos: e.clone(), neg: e.scaled(-1.0) }
    }

    /// Step `step` of `m + 1`; the last step is the clamp.
    fn advance(&mut self, step: u32, m: u32, layer: &mut LayerAcc) {
        match self {
            Lane::Product { squares, out } => {
                if step < m {
                    for sq in squares.iter_mut() {
                        sq.advance(layer);
                    }
                } else {
                    let p = squares[0]
                        .value()
                        .scaled(2.0)
                        .plus(&squares[1].value(), -0.5)
                        .plus(&squares[2].value(), -0.5);
                    let hi = layer.relu(&p.shifted(1.0));
                    let lo = layer.relu(&p.shifted(-1.0));
                    *out = Some(hi.plus(&lo, -1.0).shifted(-1.0));
                }
            }
            Lane::Pass { pos, neg } => {
                *pos = layer.relu(pos);
                *neg = layer.relu(neg);
            }
        }
    }

    fn value(&self) -> Expr {
        match self {
            Lane::Product { out, .. } => out.clone().expect("product lane read before its clamp layer"),
            Lane::Pass { pos, neg } => pos.plus(neg, -1.0),
        }
    }
}

fn product_tree(b: &mut NetBuilder, mut vals: Vec<Expr>, m: u32) -> Result<Expr> {
    while vals.len() > 1 {
        let mut lanes: Vec<Lane> = vals
            .chunks(2)
            .map(|c| if c.len() == 2 { Lane::product(&c[0], &c[1]) } else { Lane::pass(&c[0]) })
            .collect();
        for step in 0..=m {
            let mut layer = LayerAcc::default();
            for lane in lanes.iter_mut() {
                lane.advance(step, m, &mut layer);
            }
            b.commit(layer)?;
        }
        vals = lanes.iter().map(Lane::value).collect();
    }
    vals.pop().ok_or_else(|| Error::InvalidNetwork("empty product".into()))
}

/// Smallest `m ≥ 1` with `(2n−1)·3·2^{−2m−2} ≤ δ`; zero for `n ≤ 1`.
pub fn product_refinement(n: usize, delta: f64) -> Result<u32> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Config(format!("product accuracy must lie in (0,1), got {delta}")));
    }
    if n <= 1 {
        return Ok(0);
    }
    let nodes = (2 * n - 1) as f64;
    (1..=MAX_REFINEMENT)
        .find(|&m| nodes * 3.0 * 0.25f64.powi(m as i32 + 1) <= delta)
        .ok_or_else(|| {
            Error::Envelope(format!(
                "accuracy {delta:e} for a {n}-fold product needs refinement beyond {MAX_REFINEMENT}"
            ))
        })
}

/// Approximates `t²` on `[0,1]` with sup error `2^{−2m−2}`; depth `m+1`.
pub fn synth_square(m: u32) -> Result<ReluNetwork> {
    check_refinement(m)?;
    let mut b = NetBuilder::new(1);
    let mut lane = SquareLane::Start { w: Expr::var(0), signed: false };
    for _ in 0..m {
        let mut layer = LayerAcc::default();
        lane.advance(&mut layer);
        b.commit(layer)?;
    }
    Ok(b.finish(&[lane.value()])?.with_metadata("name", format!("square(m={m})")))
}

/// Approximates `xy` on `[−1,1]²` within `3·2^{−2m−2}`, clamped to `[−1,1]`.
pub fn synth_pairwise_product(m: u32) -> Result<ReluNetwork> {
    check_refinement(m)?;
    let mut b = NetBuilder::new(2);
    let out = product_tree(&mut b, vec![Expr::var(0), Expr::var(1)], m)?;
    Ok(b.finish(&[out])?.with_metadata("name", format!("pairwise(m={m})")))
}

/// Approximates `Π x_i` on `[−1,1]^n` within `delta`.
pub fn synth_product(n: usize, delta: f64) -> Result<ReluNetwork> {
    if n == 0 {
        return Err(Error::Config("a product needs at least one factor".into()));
    }
    let m = product_refinement(n, delta)?;
    let mut b = NetBuilder::new(n);
    let out = if n == 1 {
        let mut lane = Lane::pass(&Expr::var(0));
        let mut layer = LayerAcc::default();
        lane.advance(0, 0, &mut layer);
        b.commit(layer)?;
        lane.value()
    } else {
        product_tree(&mut b, (0..n).map(Expr::var).collect(), m)?
    };
    Ok(b.finish(&[out])?
        .with_metadata("name", format!("product(n={n})"))
        .with_metadata("refinement", m))
}

fn check_refinement(m: u32) -> Result<()> {
    if m == 0 || m > MAX_REFINEMENT {
        return Err(Error::Config(format!("refinement level must lie in 1..={MAX_REFINEMENT}, got {m}")));
    }
    Ok(())
}

fn factor_exprs(nu: &MultiIndex, family: &PolynomialFamily, layer: &mut LayerAcc) -> Result<Vec<Expr>> {
    let mut outs = Vec::with_capacity(nu.l1() as usize);
    for (i, &k) in nu.degrees().iter().enumerate() {
        for &r in family.roots(k as usize)? {
            let p = layer.relu(&Expr::affine(i, 1.0, -r));
            let q = layer.relu(&Expr::affine(i, -1.0, r));
            outs.push(p.plus(&q, -1.0));
        }
    }
    Ok(outs)
}

/// The `|ν|_1` values `y_i − r_j^{(ν_i)}`, from `2|ν|_1` ReLU units.
pub fn synth_factor_layer(nu: &MultiIndex, family: &PolynomialFamily) -> Result<ReluNetwork> {
    let mut b = NetBuilder::new(nu.dim());
    let mut layer = LayerAcc::default();
    let outs = factor_exprs(nu, family, &mut layer)?;
    b.commit(layer)?;
    Ok(b.finish(&outs)?.with_metadata("name", format!("factors{nu}")))
}

/// Approximates `Ψ_ν` on `[0,1]^d` within `eps`.
///
/// `ν = 0` gives a single ReLU unit with bias 1; `|ν|_1 = 1` is exact.
pub fn synth_psi(nu: &MultiIndex, family: &PolynomialFamily, eps: f64) -> Result<ReluNetwork> {
    let m = product_refinement(nu.l1() as usize, eps)?;
    let net = if nu.is_zero() {
        let layer = Layer::from_rows(nu.dim(), vec![Vec::new()], vec![1.0], vec![Activation::Relu])?;
        ReluNetwork::new(nu.dim(), vec![layer])?
    } else {
        let mut b = NetBuilder::new(nu.dim());
        let mut layer = LayerAcc::default();
        let factors = factor_exprs(nu, family, &mut layer)?;
        b.commit(layer)?;
        let out = product_tree(&mut b, factors, m)?;
        b.finish(&[out])?
    };
    Ok(net
        .with_metadata("name", nu.to_string())
        .with_metadata("nu", nu.degrees().to_vec())
        .with_metadata("eps", eps)
        .with_metadata("refinement", m))
}

/// Per-index accuracy budgets `ε_ν = exp(b(ν) − (2M/|𝒫|)^{1/d})`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonSchedule {
    pub indices: Vec<MultiIndex>,
    pub budgets: Vec<f64>,
    pub global_exponent: f64,
    pub pvol: f64,
    /// Indices whose raw budget was at least one.
    pub clamped: Vec<MultiIndex>,
    /// Indices whose raw budget underflowed to zero.
    pub raised: Vec<MultiIndex>,
}

impl EpsilonSchedule {
    fn from_values(indices: &[MultiIndex], values: &[f64], pvol: f64) -> Result<Self> {
        if !(pvol > 0.0 && pvol.is_finite()) {
            return Err(Error::Config(format!("|P| must be positive, got {pvol}")));
        }
        let m = indices.len();
        if m == 0 {
            return Err(Error::EmptySet);
        }
        let d = indices[0].dim() as f64;
        let global_exponent = (2.0 * m as f64 / pvol).powf(1.0 / d);
        let mut clamped = Vec::new();
        let mut raised = Vec::new();
        let budgets = indices
            .iter()
            .zip(values)
            .map(|(nu, &b)| {
                let raw = (b - global_exponent).exp();
                if raw >= 1.0 {
                    clamped.push(nu.clone());
                    BUDGET_CLAMP
                } else if raw == 0.0 {
                    raised.push(nu.clone());
                    BUDGET_FLOOR
                } else {
                    raw
                }
            })
            .collect();
        Ok(EpsilonSchedule { indices: indices.to_vec(), budgets, global_exponent, pvol, clamped, raised })
    }

    pub fn budget(&self, nu: &MultiIndex) -> Option<f64> {
        self.indices.iter().position(|m| m == nu).map(|k| self.budgets[k])
    }

    /// `M·exp(−(2M/|𝒫|)^{1/d})`.
    pub fn bound_rhs(&self) -> f64 {
        self.indices.len() as f64 * (-self.global_exponent).exp()
    }
}

pub fn epsilon_schedule(b: &BoundFunction, set: &QuasiOptimalIndexSet, pvol: f64) -> Result<EpsilonSchedule> {
    let values = set.indices().iter().map(|nu| b.eval(nu)).collect::<Result<Vec<_>>>()?;
    EpsilonSchedule::from_values(set.indices(), &values, pvol)
}

/// How the assembled network is measured.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthOptions {
    pub sampler: SamplerSpec,
    /// `None` picks double-double when a budget is below
    /// [`AUTO_DOUBLE_DOUBLE_BELOW`].
    pub precision: Option<Precision>,
}

impl SynthOptions {
    pub fn default_for(d: usize) -> Self {
        SynthOptions { sampler: SamplerSpec::default_for(d), precision: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisReport {
    pub m: usize,
    pub pvol: f64,
    pub budgets: EpsilonSchedule,
    pub coefficients: Vec<f64>,
    pub refinement: Vec<u32>,
    /// Sampled `‖Ψ_ν − Ψ̃_ν‖_∞`, in index-set order.
    pub measured_subnet_errors: Vec<f64>,
    /// Sampled `‖u_Q − u_NN‖_∞`.
    pub measured_output_error: f64,
    /// `Σ |c_ν| ε_ν`.
    pub weighted_budget_sum: f64,
    /// `Σ |c_ν| · measured subnet error`.
    pub weighted_measured_sum: f64,
    pub bound_rhs: f64,
    pub audit: ComplexityAudit,
    pub precision: Precision,
    pub sampler: SamplerSpec,
    pub sample_count: usize,
}

impl SynthesisReport {
    /// Positions whose measured error exceeds the budget.
    pub fn budget_violations(&self) -> Vec<usize> {
        self.measured_subnet_errors
            .iter()
            .zip(&self.budgets.budgets)
            .enumerate()
            .filter(|(_, (e, b))| e > b)
            .map(|(k, _)| k)
            .collect()
    }

    pub fn to_value(&self) -> Value {
        json!({
            "M": self.m,
            "pvol": self.pvol,
            "global_exponent": self.budgets.global_exponent,
            "indices": self.budgets.indices,
            "budgets": self.budgets.budgets,
            "clamped": self.budgets.clamped,
            "raised": self.budgets.raised,
            "coefficients": self.coefficients,
            "refinement": self.refinement,
            "measured_errors": self.measured_subnet_errors,
            "measured_output_error": self.measured_output_error,
            "weighted_budget_sum": self.weighted_budget_sum,
            "weighted_measured_sum": self.weighted_measured_sum,
            "bound_rhs": self.bound_rhs,
            "audit": self.audit,
            "complexity": self.audit.complexity(),
            "precision": self.precision,
            "sampler": self.sampler,
            "sample_count": self.sample_count,
        })
    }
}

/// Builds `u_NN = Σ c_ν Ψ̃_ν`: the `Ψ̃_ν` side by side over shared inputs,
/// followed by one LINEAR output unit. The report carries sampled errors of
/// every subnetwork and of the whole network against the expansion.
pub fn synth_unn(
    expansion: &QuasiOptimalExpansion,
    pvol: f64,
    opts: &SynthOptions,
) -> Result<(ReluNetwork, SynthesisReport)> {
    let set = expansion.index_set();
    let schedule = EpsilonSchedule::from_values(set.indices(), set.values(), pvol)?;
    let family = expansion.family();

    let mut psis = Vec::with_capacity(set.len());
    let mut refinement = Vec::with_capacity(set.len());
    for (nu, &eps) in set.indices().iter().zip(&schedule.budgets) {
        refinement.push(product_refinement(nu.l1() as usize, eps)?);
        psis.push(synth_psi(nu, family, eps)?);
    }
    let body = parallel(&psis, true)?;
    drop(psis);
    let m = set.len();
    let out = Layer::from_rows(
        m,
        vec![expansion.coefficients().iter().copied().enumerate().collect()],
        vec![0.0],
        vec![Activation::Linear],
    )?;
    let net = stack(&body, &ReluNetwork::new(m, vec![out])?)?
        .with_metadata("kind", "u_nn")
        .with_metadata("M", m)
        .with_metadata("d", set.dim())
        .with_metadata("family", family.kind().to_string())
        .with_metadata("bound_id", set.bound_id())
        .with_metadata("pvol", pvol)
        .with_metadata("global_exponent", schedule.global_exponent)
        .with_metadata("indices", serde_json::to_value(set.indices())?)
        .with_metadata("coefficients", expansion.coefficients().to_vec())
        .with_metadata("budgets", schedule.budgets.clone())
        .with_metadata("refinement", refinement.clone());

    let precision = opts.precision.unwrap_or_else(|| {
        if schedule.budgets.iter().any(|&e| e < AUTO_DOUBLE_DOUBLE_BELOW) {
            Precision::DoubleDouble
        } else {
            Precision::F64
        }
    });
    let points = opts.sampler.points(set.dim())?;
    let (subnet_errors, output_error) = match precision {
        Precision::F64 => measure::<f64>(&net, expansion, &points)?,
        Precision::DoubleDouble => measure::<TwoFloat>(&net, expansion, &points)?,
    };

    let abs_c = expansion.coefficients().iter().map(|c| c.abs());
    let weighted_budget_sum = abs_c.clone().zip(&schedule.budgets).map(|(c, e)| c * e).sum();
    let weighted_measured_sum = abs_c.zip(&subnet_errors).map(|(c, e)| c * e).sum();
    let report = SynthesisReport {
        m,
        pvol,
        bound_rhs: schedule.bound_rhs(),
        budgets: schedule,
        coefficients: expansion.coefficients().to_vec(),
        refinement,
        measured_subnet_errors: subnet_errors,
        measured_output_error: output_error,
        weighted_budget_sum,
        weighted_measured_sum,
        audit: net.audit(),
        precision,
        sampler: opts.sampler.clone(),
        sample_count: points.len(),
    };
    Ok((net, report))
}

/// One pass over `points`: per-subnetwork errors read off the layer
/// feeding the output unit, and the output error against `u_Q`.
fn measure<T: Scalar>(
    net: &ReluNetwork,
    expansion: &QuasiOptimalExpansion,
    points: &[Vec<f64>],
) -> Result<(Vec<f64>, f64)> {
    let family = expansion.family();
    let mut ev = net.evaluator::<T>();
    let mut subnet = vec![0.0f64; expansion.len()];
    let mut output = 0.0f64;
    for y in points {
        let out = ev.eval(y)?[0];
        let hidden = ev.penultimate();
        let mut uq = T::zero();
        for (k, (nu, c)) in expansion.terms().enumerate() {
            let psi = family.eval_tensor_in::<T>(nu, y)?;
            uq = uq + psi * c;
            let e = (hidden[k] - psi).abs().to_f64();
            if !e.is_finite() {
                return Err(Error::NonFinite(format!("subnetwork {nu} at {y:?}")));
            }
            subnet[k] = subnet[k].max(e);
        }
        let e = (out - uq).abs().to_f64();
        if !e.is_finite() {
            return Err(Error::NonFinite(format!("network output at {y:?}")));
        }
        output = output.max(e);
    }
    Ok((subnet, output))
}
