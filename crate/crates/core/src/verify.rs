//! Error measurement, convergence studies and checks of the error,
//! complexity and depth bounds.

use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::multiindex::{
    enumerate_quasi_optimal, estimate_p_volume, default_tail_cutoff, tail_sum, BoundFunction,
    MultiIndex, QuasiOptimalIndexSet, DEFAULT_TAU,
};
use crate::netcore::ReluNetwork;
use crate::orthopoly::{synthetic_target, FamilyKind, QuasiOptimalExpansion};
use crate::sampling::SamplerSpec;
use crate::scalar::Precision;
use crate::synth::{synth_unn, SynthOptions, SynthesisReport};

/// Largest dimension a study accepts.
pub const DESK_MAX_DIM: usize = 3;
/// Largest index-set size a study accepts.
pub const DESK_MAX_M: usize = 256;
/// Largest total degree of a single subnetwork a study accepts.
pub const DESK_MAX_L1: u64 = 64;

/// Relative tolerance on `Σ|c_ν|ε_ν ≤ M·exp(−(2M/|𝒫|)^{1/d})`, an
/// identity in exact arithmetic for the synthetic targets.
pub const BUDGET_SUM_RTOL: f64 = 1e-12;

/// CSV header of a study.
pub const STUDY_COLUMNS: [&str; 12] = [
    "M",
    "J",
    "pvol",
    "sup_error_uQ_uNN",
    "tail_bound_u_uQ",
    "total_bound",
    "complexity",
    "units",
    "nonzero_weights",
    "depth",
    "bound_rhs",
    "wall_time",
];

/// `max |f(y) − g(y)|` over the sampler's points.
pub fn sup_error<F, G>(mut f: F, mut g: G, d: usize, sampler: &SamplerSpec) -> Result<f64>
where
    F: FnMut(&[f64]) -> Result<f64>,
    G: FnMut(&[f64]) -> Result<f64>,
{
    let mut worst = 0.0f64;
    for y in sampler.points(d)? {
        let (a, b) = (f(&y)?, g(&y)?);
        let e = (a - b).abs();
        if !e.is_finite() {
            return Err(Error::NonFinite(format!("evaluation at {y:?} ({a}, {b})")));
        }
        worst = worst.max(e);
    }
    Ok(worst)
}

/// Source of `|𝒫|` for a study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PVolumeSource {
    Exact { value: f64 },
    Estimate { tau: f64, extrapolate: bool },
}

impl Default for PVolumeSource {
    fn default() -> Self {
        PVolumeSource::Estimate { tau: DEFAULT_TAU, extrapolate: true }
    }
}

#[derive(Debug, Clone)]
pub struct StudyConfig {
    pub bound: BoundFunction,
    pub family: FamilyKind,
    pub m_list: Vec<usize>,
    pub sampler: SamplerSpec,
    pub precision: Option<Precision>,
    pub pvol: PVolumeSource,
    /// Seed for the signs of the synthetic target's coefficients.
    pub seed: u64,
    /// Record wall-clock time per row; zero otherwise.
    pub timing: bool,
}

impl StudyConfig {
    pub fn new(bound: BoundFunction, family: FamilyKind, m_list: Vec<usize>) -> Self {
        let d = bound.dim();
        StudyConfig {
            bound,
            family,
            m_list,
            sampler: SamplerSpec::default_for(d),
            precision: None,
            pvol: PVolumeSource::default(),
            seed: 0,
            timing: true,
        }
    }

    pub fn to_value(&self) -> Result<Value> {
        Ok(json!({
            "bound": self.bound.to_value()?,
            "family": self.family,
            "d": self.bound.dim(),
            "M_list": self.m_list,
            "sampler": self.sampler,
            "precision": self.precision,
            "pvol": self.pvol,
            "seed": self.seed,
            "timing": self.timing,
        }))
    }

    fn validate(&self) -> Result<()> {
        let d = self.bound.dim();
        if d == 0 || d > DESK_MAX_DIM {
            return Err(Error::Envelope(format!("studies support 1 ≤ d ≤ {DESK_MAX_DIM}, got {d}")));
        }
        if self.m_list.is_empty() {
            return Err(Error::Config("M list is empty".into()));
        }
        if self.m_list.windows(2).any(|w| w[0] >= w[1]) || self.m_list[0] == 0 {
            return Err(Error::Config("M list must be positive and strictly ascending".into()));
        }
        let m_max = *self.m_list.last().unwrap();
        if m_max > DESK_MAX_M {
            return Err(Error::Envelope(format!("M = {m_max} exceeds the desk limit {DESK_MAX_M}")));
        }
        Ok(())
    }
}

/// The three links of the error chain for one row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkCheck {
    /// Every sampled `‖Ψ_ν − Ψ̃_ν‖_∞ ≤ ε_ν`.
    pub subnet_budgets: bool,
    pub budget_violations: Vec<MultiIndex>,
    /// `Σ|c_ν|ε_ν ≤ bound_rhs`.
    pub budget_sum: bool,
    pub weighted_budget_sum: f64,
    /// `‖u_Q − u_NN‖_∞ ≤ Σ|c_ν|·(measured subnet error)` up to `slack`.
    pub triangle: bool,
    pub weighted_measured_sum: f64,
    pub slack: f64,
    /// `‖u_Q − u_NN‖_∞ ≤ bound_rhs`.
    pub headline: bool,
    pub clamped: usize,
    pub precision: Precision,
}

impl LinkCheck {
    pub fn from_report(rep: &SynthesisReport) -> Self {
        let budget_violations =
            rep.budget_violations().into_iter().map(|k| rep.budgets.indices[k].clone()).collect::<Vec<_>>();
        let abs_c: f64 = rep.coefficients.iter().map(|c| c.abs()).sum();
        // rounding of the final weighted sum and of the oracle
        let slack = 16.0 * (rep.m + rep.audit.depth) as f64 * rep.precision.epsilon() * abs_c.max(1.0);
        LinkCheck {
            subnet_budgets: budget_violations.is_empty(),
            budget_violations,
            budget_sum: rep.weighted_budget_sum <= rep.bound_rhs * (1.0 + BUDGET_SUM_RTOL),
            weighted_budget_sum: rep.weighted_budget_sum,
            triangle: rep.measured_output_error <= rep.weighted_measured_sum + slack,
            weighted_measured_sum: rep.weighted_measured_sum,
            slack,
            headline: rep.measured_output_error <= rep.bound_rhs,
            clamped: rep.budgets.clamped.len(),
            precision: rep.precision,
        }
    }

    pub fn all(&self) -> bool {
        self.subnet_budgets && self.budget_sum && self.triangle && self.headline
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub m: usize,
    pub j: f64,
    pub pvol: f64,
    pub sup_error: f64,
    pub tail_bound: f64,
    pub total_bound: f64,
    pub complexity: usize,
    pub units: usize,
    pub nonzero_weights: usize,
    pub depth: usize,
    pub bound_rhs: f64,
    pub wall_time: f64,
    pub first_layer_weights: usize,
    pub sum_l1: u64,
    /// Largest `|ν|_1` in `Λ_M`; below 2 no product network is built.
    pub max_l1: u64,
    pub links: LinkCheck,
}

impl StudyRow {
    fn csv_record(&self) -> Vec<String> {
        vec![
            self.m.to_string(),
            format!("{:e}", self.j),
            format!("{:e}", self.pvol),
            format!("{:e}", self.sup_error),
            format!("{:e}", self.tail_bound),
            format!("{:e}", self.total_bound),
            self.complexity.to_string(),
            self.units.to_string(),
            self.nonzero_weights.to_string(),
            self.depth.to_string(),
            format!("{:e}", self.bound_rhs),
            format!("{:e}", self.wall_time),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub d: usize,
    pub rows: Vec<StudyRow>,
    pub config_echo: Value,
}

impl StudyReport {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(STUDY_COLUMNS)?;
        for r in &self.rows {
            w.write_record(r.csv_record())?;
        }
        w.flush()?;
        Ok(())
    }

    /// Sidecar document: the configuration and per-row link checks.
    pub fn sidecar(&self) -> Value {
        json!({
            "config_echo": self.config_echo,
            "rows": self.rows.iter().map(|r| json!({
                "M": r.m,
                "first_layer_weights": r.first_layer_weights,
                "sum_l1": r.sum_l1,
                "links": r.links,
            })).collect::<Vec<_>>(),
        })
    }
}

/// Everything built for one row, handed to the study's row callback.
pub struct RowArtifacts<'a> {
    pub network: &'a ReluNetwork,
    pub synthesis: &'a SynthesisReport,
    pub expansion: &'a QuasiOptimalExpansion,
}

/// Streams CSV rows as they are produced.
pub struct CsvRowSink<W: Write> {
    writer: csv::Writer<W>,
}

impl<W: Write> CsvRowSink<W> {
    pub fn new(out: W) -> Result<Self> {
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(STUDY_COLUMNS)?;
        writer.flush()?;
        Ok(CsvRowSink { writer })
    }

    pub fn push(&mut self, row: &StudyRow) -> Result<()> {
        self.writer.write_record(row.csv_record())?;
        self.writer.flush()?;
        Ok(())
    }
}

/// For each `M`: `Λ_M`, `|𝒫|`, `u_NN` for the first `M` terms of a seeded
/// synthetic target, sampled errors, tail bracket and audit.
///
/// `on_row` sees every finished row before the next one starts, so rows
/// already produced survive a later failure.
pub fn convergence_study<F>(config: &StudyConfig, mut on_row: F) -> Result<StudyReport>
where
    F: FnMut(&StudyRow, &RowArtifacts<'_>) -> Result<()>,
{
    config.validate()?;
    let b = &config.bound;
    let d = b.dim();
    let m_max = *config.m_list.last().unwrap();
    let top = enumerate_quasi_optimal(b, m_max)?;
    if let Some(nu) = top.indices().iter().find(|nu| nu.l1() > DESK_MAX_L1) {
        return Err(Error::Envelope(format!("index {nu} exceeds the per-subnetwork degree limit {DESK_MAX_L1}")));
    }
    let target = synthetic_target(b, config.family, top.threshold_j(), config.seed)?;

    let pvol = match config.pvol {
        PVolumeSource::Exact { value } => value,
        PVolumeSource::Estimate { tau, extrapolate } => estimate_p_volume(b, tau, extrapolate)?.value,
    };
    let opts = SynthOptions { sampler: config.sampler.clone(), precision: config.precision };

    let mut rows = Vec::with_capacity(config.m_list.len());
    for &m in &config.m_list {
        let start = Instant::now();
        let expansion = target.truncate(m)?;
        let set = expansion.index_set();
        let (net, rep) = synth_unn(&expansion, pvol, &opts)?;
        let j = set.threshold_j();
        let tail = tail_sum(b, set, default_tail_cutoff(b, j))?.upper();
        let wall_time = if config.timing { start.elapsed().as_secs_f64() } else { 0.0 };
        let row = StudyRow {
            m,
            j,
            pvol,
            sup_error: rep.measured_output_error,
            tail_bound: tail,
            total_bound: tail + rep.bound_rhs,
            complexity: rep.audit.complexity(),
            units: rep.audit.units,
            nonzero_weights: rep.audit.nonzero_weights,
            depth: rep.audit.depth,
            bound_rhs: rep.bound_rhs,
            wall_time,
            first_layer_weights: rep.audit.first_layer_weights,
            sum_l1: set.indices().iter().map(MultiIndex::l1).sum(),
            max_l1: set.indices().iter().map(MultiIndex::l1).max().unwrap_or(0),
            links: LinkCheck::from_report(&rep),
        };
        on_row(&row, &RowArtifacts { network: &net, synthesis: &rep, expansion: &expansion })?;
        rows.push(row);
    }
    Ok(StudyReport { d, rows, config_echo: config.to_value()? })
}

/// Outcome of a fitted-constant envelope check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub passed: bool,
    pub fitted_c: f64,
    /// `measured / (C·envelope)` per row.
    pub ratios: Vec<f64>,
    pub factor: f64,
    /// First offending `M`, if any.
    pub offending: Option<usize>,
    pub detail: String,
}

fn fitted_check(
    ms: &[usize],
    measured: &[f64],
    fit: usize,
    envelope: impl Fn(f64) -> f64,
    factor: f64,
    what: &str,
) -> BoundCheck {
    let c = measured[fit] / envelope(ms[fit] as f64);
    let ratios: Vec<f64> = ms.iter().zip(measured).map(|(&m, &v)| v / (c * envelope(m as f64))).collect();
    let offending = ratios.iter().position(|&r| r > factor).map(|k| ms[k]);
    let detail = match offending {
        Some(m) => format!("{what} at M = {m} exceeds {factor}× the envelope fitted at M = {}", ms[fit]),
        None => format!("{what} within {factor}× of the envelope fitted at M = {} (C = {c:.4e})", ms[fit]),
    };
    BoundCheck { passed: offending.is_none(), fitted_c: c, ratios, factor, offending, detail }
}

/// Row the constant is fitted on: the smallest `M` whose network contains a
/// product gadget. Rows before it consist of exact subnetworks only.
fn fit_row(rows: &[StudyRow]) -> usize {
    rows.iter().position(|r| r.max_l1 >= 2).unwrap_or(0)
}

fn monotonicity_violation(rows: &[StudyRow], key: impl Fn(&StudyRow) -> usize) -> Option<usize> {
    rows.windows(2).find(|w| key(&w[1]) < key(&w[0])).map(|w| w[1].m)
}

/// `depth − 1 ≤ 2·C·M^{1/d}·max(1, ln M^{1/d})` with `C` fitted at the
/// smallest `M` that builds a product network; depth must also be
/// nondecreasing in `M`.
pub fn check_depth_bound(report: &StudyReport) -> BoundCheck {
    let d = report.d as f64;
    let rows = &report.rows;
    if rows.len() < 2 {
        return BoundCheck {
            passed: true,
            fitted_c: f64::NAN,
            ratios: vec![1.0; rows.len()],
            factor: 2.0,
            offending: None,
            detail: "fewer than two rows".into(),
        };
    }
    if let Some(m) = monotonicity_violation(rows, |r| r.depth) {
        return BoundCheck {
            passed: false,
            fitted_c: f64::NAN,
            ratios: Vec::new(),
            factor: 2.0,
            offending: Some(m),
            detail: format!("depth decreases at M = {m}"),
        };
    }
    let ms: Vec<usize> = rows.iter().map(|r| r.m).collect();
    let measured: Vec<f64> = rows.iter().map(|r| (r.depth as f64 - 1.0).max(0.0)).collect();
    let envelope = |m: f64| {
        let root = m.powf(1.0 / d);
        root * root.ln().max(1.0)
    };
    fitted_check(&ms, &measured, fit_row(rows), envelope, 2.0, "depth")
}

/// `complexity ≤ 4·C·M^{2/d+1}` with `C` fitted like the depth constant;
/// complexity must also be nondecreasing in `M`.
pub fn check_complexity_bound(report: &StudyReport) -> BoundCheck {
    let d = report.d as f64;
    let rows = &report.rows;
    if let Some(m) = monotonicity_violation(rows, |r| r.complexity) {
        return BoundCheck {
            passed: false,
            fitted_c: f64::NAN,
            ratios: Vec::new(),
            factor: 4.0,
            offending: Some(m),
            detail: format!("complexity decreases at M = {m}"),
        };
    }
    let ms: Vec<usize> = rows.iter().map(|r| r.m).collect();
    let measured: Vec<f64> = rows.iter().map(|r| r.complexity as f64).collect();
    fitted_check(&ms, &measured, fit_row(rows), |m| m.powf(2.0 / d + 1.0), 4.0, "complexity")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirstLayerCheck {
    pub input_weights: usize,
    pub sum_l1: u64,
    pub passed: bool,
}

/// Input-to-first-layer weights of an assembled network against
/// `2·Σ_{ν∈Λ} |ν|_1`, read from the network's `indices` annotation.
pub fn check_first_layer_count(net: &ReluNetwork) -> Result<FirstLayerCheck> {
    let indices: Vec<MultiIndex> = serde_json::from_value(
        net.metadata().get("indices").cloned().ok_or(Error::MissingMetadata("indices"))?,
    )?;
    let sum_l1: u64 = indices.iter().map(MultiIndex::l1).sum();
    let input_weights = net.layers()[0].nonzero_weights();
    Ok(FirstLayerCheck { input_weights, sum_l1, passed: input_weights as u64 == 2 * sum_l1 })
}

/// `Σ|ν|_1 ≤ 4·C·M^{1/d+1}`, `C` fitted at the smallest `M` with a nonzero sum.
pub fn check_l1_growth(d: usize, points: &[(usize, u64)]) -> BoundCheck {
    let pts: Vec<(usize, u64)> = points.iter().copied().filter(|&(_, s)| s > 0).collect();
    if pts.is_empty() {
        return BoundCheck {
            passed: true,
            fitted_c: 0.0,
            ratios: Vec::new(),
            factor: 4.0,
            offending: None,
            detail: "all sums are zero".into(),
        };
    }
    let ms: Vec<usize> = pts.iter().map(|p| p.0).collect();
    let measured: Vec<f64> = pts.iter().map(|p| p.1 as f64).collect();
    fitted_check(&ms, &measured, 0, |m| m.powf(1.0 / d as f64 + 1.0), 4.0, "Σ|ν|_1")
}

/// Least-squares slope of `ln(sup_error/M)` against `M` over the rows
/// whose `M` is in `ms`.
pub fn rate_slope(report: &StudyReport, ms: &[usize]) -> Result<f64> {
    let pts: Vec<(f64, f64)> = report
        .rows
        .iter()
        .filter(|r| ms.contains(&r.m))
        .map(|r| {
            if r.sup_error > 0.0 {
                Ok((r.m as f64, (r.sup_error / r.m as f64).ln()))
            } else {
                Err(Error::NonFinite(format!("log of a zero error at M = {}", r.m)))
            }
        })
        .collect::<Result<_>>()?;
    if pts.len() < 2 {
        return Err(Error::Config("slope needs at least two rows".into()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

/// Single-`M` run: builds `u_NN` for the first `m` terms of the synthetic
/// target and returns the network with its report and link checks.
pub fn verify_single(
    b: &BoundFunction,
    family: FamilyKind,
    m: usize,
    pvol: f64,
    opts: &SynthOptions,
    seed: u64,
) -> Result<(ReluNetwork, SynthesisReport, LinkCheck)> {
    let top: QuasiOptimalIndexSet = enumerate_quasi_optimal(b, m)?;
    let target = synthetic_target(b, family, top.threshold_j(), seed)?;
    let (net, rep) = synth_unn(&target.truncate(m)?, pvol, opts)?;
    let links = LinkCheck::from_report(&rep);
    Ok((net, rep, links))
}
