//! Multi-indices, coefficient bound functions and quasi-optimal index sets.
//!
//! A bound function `b` encodes coefficient decay `|c_ν| ≤ e^{-b(ν)}`. The
//! quasi-optimal set `Λ_M` holds the `M` indices with the smallest `b(ν)`,
//! ties broken lexicographically on the degree tuple.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// Default limit on the number of lattice points an enumeration may visit.
pub const DEFAULT_ENUMERATION_CAP: u64 = 100_000_000;

/// Default resolution for the `|𝒫|` lattice-count estimator.
pub const DEFAULT_TAU: f64 = 512.0;

/// Relative tolerance under which two bound values are treated as tied.
pub const TIE_RTOL: f64 = 1e-12;

/// A d-tuple of nonnegative polynomial degrees.
///
/// The derived ordering is lexicographic on the degree tuple, which is the
/// tie-break used for index-set enumeration.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(degrees: Vec<u32>) -> Self {
        MultiIndex(degrees)
    }

    pub fn zeros(d: usize) -> Self {
        MultiIndex(vec![0; d])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn degrees(&self) -> &[u32] {
        &self.0
    }

    /// `|ν|_1`
    pub fn l1(&self) -> u64 {
        self.0.iter().map(|&k| u64::from(k)).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&k| k == 0)
    }

    /// `ν + e_i`
    pub fn incremented(&self, i: usize) -> Self {
        let mut next = self.0.clone();
        next[i] += 1;
        MultiIndex(next)
    }

    /// Componentwise `self ≤ other`.
    pub fn componentwise_le(&self, other: &MultiIndex) -> bool {
        self.dim() == other.dim() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// The indices `ν - e_i` for every nonzero coordinate `i`.
    pub fn predecessors(&self) -> impl Iterator<Item = MultiIndex> + '_ {
        (0..self.dim()).filter(|&i| self.0[i] > 0).map(move |i| {
            let mut prev = self.0.clone();
            prev[i] -= 1;
            MultiIndex(prev)
        })
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(degrees: Vec<u32>) -> Self {
        MultiIndex(degrees)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, k) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{k}")?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundKind {
    /// `b(ν) = Σ ν_i ln ρ_i`
    #[serde(rename = "taylor")]
    TaylorAnisotropic,
    /// `b(ν) = Σ [ν_i ln ρ_i − ln(2ν_i + 1)]`
    #[serde(rename = "legendre")]
    LegendreAnisotropic,
    /// `b(ν) = |ν|_1`
    #[serde(rename = "isotropic")]
    IsotropicLinear,
    #[serde(rename = "custom")]
    Custom,
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            BoundKind::TaylorAnisotropic => "taylor",
            BoundKind::LegendreAnisotropic => "legendre",
            BoundKind::IsotropicLinear => "isotropic",
            BoundKind::Custom => "custom",
        };
        f.write_str(name)
    }
}

/// Global linear-growth constants: `c_low·|ν|_1 − offset ≤ b(ν) ≤ c_high·|ν|_1`
/// for every `ν ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Growth {
    pub c_low: f64,
    pub c_high: f64,
    pub offset: f64,
}

pub type CustomBoundFn = Arc<dyn Fn(&[u32]) -> f64 + Send + Sync>;

/// Exponent `b(ν)` of the coefficient bound `e^{-b(ν)}`.
///
/// Built-in kinds are separable, `b(ν) = Σ_i f_i(ν_i)` with `f_i(0) = 0`.
/// The Legendre kind is not monotone for `ρ_i < 3`; enumeration routines use
/// the cone minorant [`BoundFunction::cone_lower_bound`] and stay exact.
#[derive(Clone)]
pub struct BoundFunction {
    kind: BoundKind,
    rho: Vec<f64>,
    ln_rho: Vec<f64>,
    log_c: f64,
    literal_prefactor: bool,
    custom: Option<CustomBoundFn>,
    growth: Growth,
    /// `suffix_min[i][k] = min_{j ≥ k} f_i(j)`; beyond the table `f_i` is increasing.
    suffix_min: Vec<Vec<f64>>,
}

impl fmt::Debug for BoundFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BoundFunction")
            .field("kind", &self.kind)
            .field("rho", &self.rho)
            .field("log_c", &self.log_c)
            .field("literal_prefactor", &self.literal_prefactor)
            .field("growth", &self.growth)
            .finish()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoundDoc {
    kind: BoundKind,
    rho: Vec<f64>,
    #[serde(rename = "logC", default)]
    log_c: f64,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    literal_prefactor: bool,
}

impl BoundFunction {
    pub fn isotropic(d: usize) -> Result<Self> {
        Self::build(BoundKind::IsotropicLinear, vec![std::f64::consts::E; d], 0.0, false)
    }

    pub fn taylor(rho: Vec<f64>) -> Result<Self> {
        Self::build(BoundKind::TaylorAnisotropic, rho, 0.0, false)
    }

    /// Legendre bound with prefactor `Π(2ν_i + 1)`.
    pub fn legendre(rho: Vec<f64>) -> Result<Self> {
        Self::build(BoundKind::LegendreAnisotropic, rho, 0.0, false)
    }

    /// Legendre bound with the prefactor taken as `Π|2ν_i − 1|`.
    pub fn legendre_literal(rho: Vec<f64>) -> Result<Self> {
        Self::build(BoundKind::LegendreAnisotropic, rho, 0.0, true)
    }

    /// A user-supplied bound. It must satisfy `b(0) = 0`, be nondecreasing in
    /// every coordinate, and obey the supplied growth constants.
    pub fn custom(d: usize, f: CustomBoundFn, growth: Growth) -> Result<Self> {
        if d == 0 {
            return Err(Error::Config("dimension must be at least 1".into()));
        }
        if !(growth.c_low > 0.0 && growth.c_high >= growth.c_low && growth.offset >= 0.0) {
            return Err(Error::Config(format!("invalid growth constants {growth:?}")));
        }
        let at_zero = f(&vec![0; d]);
        if at_zero != 0.0 {
            return Err(Error::Config(format!("custom bound has b(0) = {at_zero}, expected 0")));
        }
        Ok(BoundFunction {
            kind: BoundKind::Custom,
            rho: Vec::new(),
            ln_rho: vec![0.0; d],
            log_c: 0.0,
            literal_prefactor: false,
            custom: Some(f),
            growth,
            suffix_min: vec![Vec::new(); d],
        })
    }

    pub fn with_log_c(mut self, log_c: f64) -> Self {
        self.log_c = log_c;
        self
    }

    fn build(kind: BoundKind, rho: Vec<f64>, log_c: f64, literal_prefactor: bool) -> Result<Self> {
        if rho.is_empty() {
            return Err(Error::Config("rho must have at least one entry".into()));
        }
        if let Some(bad) = rho.iter().find(|r| !(r.is_finite() && **r > 1.0)) {
            return Err(Error::Config(format!("every rho_i must be a finite value > 1, got {bad}")));
        }
        if kind == BoundKind::IsotropicLinear
            && rho.iter().any(|r| (r.ln() - 1.0).abs() > 1e-9)
        {
            return Err(Error::Config("isotropic bound requires rho_i = e".into()));
        }
        if literal_prefactor && kind != BoundKind::LegendreAnisotropic {
            return Err(Error::Config("literal_prefactor applies to the legendre bound only".into()));
        }
        let ln_rho: Vec<f64> = rho.iter().map(|r| r.ln()).collect();
        let mut b = BoundFunction {
            kind,
            rho,
            ln_rho,
            log_c,
            literal_prefactor,
            custom: None,
            growth: Growth { c_low: 1.0, c_high: 1.0, offset: 0.0 },
            suffix_min: Vec::new(),
        };
        b.suffix_min = (0..b.dim()).map(|i| b.suffix_min_table(i)).collect();
        b.growth = b.derive_growth();
        Ok(b)
    }

    pub fn kind(&self) -> BoundKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.ln_rho.len()
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    /// Logarithm of the bound's multiplicative constant; reporting only.
    pub fn log_c(&self) -> f64 {
        self.log_c
    }

    pub fn growth(&self) -> Growth {
        self.growth
    }

    pub fn is_separable(&self) -> bool {
        self.custom.is_none()
    }

    /// True when `b` is nondecreasing in every coordinate.
    pub fn is_monotone(&self) -> bool {
        self.suffix_min.iter().all(|t| t.is_empty())
    }

    /// Short label identifying the bound, used in index-set documents.
    pub fn id(&self) -> String {
        match self.kind {
            BoundKind::IsotropicLinear => format!("isotropic(d={})", self.dim()),
            BoundKind::Custom => format!("custom(d={})", self.dim()),
            _ => {
                let lit = if self.literal_prefactor { ",literal" } else { "" };
                format!("{}(rho={:?}{lit})", self.kind, self.rho)
            }
        }
    }

    /// `f_i(k)` for the separable built-in kinds.
    fn term(&self, i: usize, k: u32) -> f64 {
        let k = f64::from(k);
        match self.kind {
            BoundKind::IsotropicLinear => k,
            BoundKind::TaylorAnisotropic => k * self.ln_rho[i],
            BoundKind::LegendreAnisotropic => {
                let prefactor = if self.literal_prefactor {
                    (2.0 * k - 1.0).abs()
                } else {
                    2.0 * k + 1.0
                };
                k * self.ln_rho[i] - prefactor.ln()
            }
            BoundKind::Custom => unreachable!("custom bounds are not separable"),
        }
    }

    /// Index from which `f_i` is increasing.
    fn increasing_from(&self, i: usize) -> u32 {
        self.suffix_min[i].len().saturating_sub(1) as u32
    }

    fn suffix_min_table(&self, i: usize) -> Vec<f64> {
        if self.kind != BoundKind::LegendreAnisotropic {
            return Vec::new();
        }
        // f(j+1) - f(j) is increasing for j >= 1 in both prefactor forms, so
        // once an increment is positive every later one is too.
        let mut last_drop = None;
        let mut j = 0u32;
        loop {
            let inc = self.term(i, j + 1) - self.term(i, j);
            if inc < 0.0 {
                last_drop = Some(j);
            } else if j >= 1 {
                break;
            }
            j += 1;
        }
        let Some(last) = last_drop else {
            return Vec::new();
        };
        let top = last + 1;
        let mut table = vec![0.0; top as usize + 1];
        table[top as usize] = self.term(i, top);
        for k in (0..top).rev() {
            table[k as usize] = self.term(i, k).min(table[k as usize + 1]);
        }
        table
    }

    fn min_from(&self, i: usize, k: u32) -> f64 {
        match self.suffix_min[i].get(k as usize) {
            Some(&m) => m,
            None => self.term(i, k),
        }
    }

    fn derive_growth(&self) -> Growth {
        let min_ln = self.ln_rho.iter().copied().fold(f64::INFINITY, f64::min);
        let max_ln = self.ln_rho.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        match self.kind {
            BoundKind::IsotropicLinear => Growth { c_low: 1.0, c_high: 1.0, offset: 0.0 },
            BoundKind::TaylorAnisotropic => Growth { c_low: min_ln, c_high: max_ln, offset: 0.0 },
            BoundKind::LegendreAnisotropic => {
                let c_low = 0.5 * min_ln;
                // offset_i = max_k (c_low·k − f_i(k)); the gap is concave for k ≥ 1.
                let offset = (0..self.dim())
                    .map(|i| {
                        let gap = |k: u32| c_low * f64::from(k) - self.term(i, k);
                        let mut best = 0.0f64;
                        let mut k = 0u32;
                        loop {
                            let g = gap(k);
                            best = best.max(g);
                            if k >= 1 && gap(k + 1) < g {
                                break;
                            }
                            k += 1;
                        }
                        best
                    })
                    .sum();
                Growth { c_low, c_high: max_ln, offset }
            }
            BoundKind::Custom => self.growth,
        }
    }

    /// `b(ν)`.
    pub fn eval(&self, nu: &MultiIndex) -> Result<f64> {
        check_dim(self.dim(), nu.dim())?;
        Ok(self.eval_unchecked(nu.degrees()))
    }

    fn eval_unchecked(&self, degrees: &[u32]) -> f64 {
        match &self.custom {
            Some(f) => f(degrees),
            None => {
                let mut s = 0.0;
                for (i, &k) in degrees.iter().enumerate() {
                    s += self.term(i, k);
                }
                s
            }
        }
    }

    /// Lower bound of `b` over the cone `{μ : μ ≥ ν}`. Equals `b(ν)` for
    /// monotone bounds and is itself monotone along lattice edges.
    pub fn cone_lower_bound(&self, nu: &MultiIndex) -> f64 {
        if self.custom.is_some() {
            return self.eval_unchecked(nu.degrees());
        }
        let mut s = 0.0;
        for (i, &k) in nu.degrees().iter().enumerate() {
            s += self.min_from(i, k);
        }
        s
    }

    /// Checks the linear-growth sandwich at `nu`.
    pub fn growth_holds_at(&self, nu: &MultiIndex) -> Result<bool> {
        let v = self.eval(nu)?;
        let n = nu.l1() as f64;
        let g = self.growth;
        let slack = 1e-12 * v.abs().max(1.0);
        Ok(g.c_low * n - g.offset <= v + slack && v <= g.c_high * n + slack)
    }

    pub fn to_json(&self) -> Result<String> {
        if self.kind == BoundKind::Custom {
            return Err(Error::Config("custom bounds cannot be serialized".into()));
        }
        let doc = BoundDoc {
            kind: self.kind,
            rho: self.rho.clone(),
            log_c: self.log_c,
            literal_prefactor: self.literal_prefactor,
        };
        Ok(serde_json::to_string(&doc)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: BoundDoc = serde_json::from_str(s)?;
        Self::from_doc(doc)
    }

    pub fn from_value(v: serde_json::Value) -> Result<Self> {
        let doc: BoundDoc = serde_json::from_value(v)?;
        Self::from_doc(doc)
    }

    pub fn to_value(&self) -> Result<serde_json::Value> {
        Ok(serde_json::from_str(&self.to_json()?)?)
    }

    fn from_doc(doc: BoundDoc) -> Result<Self> {
        if doc.kind == BoundKind::Custom {
            return Err(Error::Config("custom bounds cannot be deserialized".into()));
        }
        Self::build(doc.kind, doc.rho, doc.log_c, doc.literal_prefactor)
    }
}

/// `(b, ν)` ordering with tolerance-aware ties.
///
/// Entries are sorted by exact `b`, then runs whose values lie within
/// [`TIE_RTOL`] of the run's first value are re-sorted lexicographically.
pub fn sort_by_bound(entries: &mut [(f64, MultiIndex)]) {
    entries.sort_by(|x, y| x.0.total_cmp(&y.0).then_with(|| x.1.cmp(&y.1)));
    let mut start = 0;
    for j in 1..=entries.len() {
        if j == entries.len() || !bounds_tie(entries[start].0, entries[j].0) {
            entries[start..j].sort_by(|x, y| x.1.cmp(&y.1));
            start = j;
        }
    }
}

pub fn bounds_tie(a: f64, b: f64) -> bool {
    (a - b).abs() <= tie_slack(a.max(b))
}

fn tie_slack(v: f64) -> f64 {
    TIE_RTOL * v.abs().max(1.0)
}

/// Heap entry ordered by `(key, ν)`.
#[derive(Debug, PartialEq)]
struct Keyed(f64, MultiIndex);

impl Eq for Keyed {}

impl PartialOrd for Keyed {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Keyed {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then_with(|| self.1.cmp(&other.1))
    }
}

/// Best-first walk over the lattice `ℕ^d` in order of the cone minorant.
struct Frontier<'a> {
    b: &'a BoundFunction,
    heap: BinaryHeap<Reverse<Keyed>>,
    seen: HashSet<MultiIndex>,
    cap: u64,
}

impl<'a> Frontier<'a> {
    fn new(b: &'a BoundFunction, cap: u64) -> Self {
        let zero = MultiIndex::zeros(b.dim());
        let mut heap = BinaryHeap::new();
        heap.push(Reverse(Keyed(b.cone_lower_bound(&zero), zero.clone())));
        let mut seen = HashSet::new();
        seen.insert(zero);
        Frontier { b, heap, seen, cap }
    }

    fn peek_key(&self) -> f64 {
        self.heap.peek().map_or(f64::INFINITY, |Reverse(k)| k.0)
    }

    /// Pops the next index and schedules its successors whose cone minorant
    /// does not exceed `limit`.
    fn pop(&mut self, limit: f64) -> Result<Option<(f64, MultiIndex)>> {
        let Some(Reverse(Keyed(_, nu))) = self.heap.pop() else {
            return Ok(None);
        };
        for i in 0..nu.dim() {
            let next = nu.incremented(i);
            if self.seen.contains(&next) {
                continue;
            }
            let key = self.b.cone_lower_bound(&next);
            if key > limit {
                continue;
            }
            self.seen.insert(next.clone());
            if self.seen.len() as u64 > self.cap {
                return Err(Error::CapExceeded { what: "lattice enumeration", cap: self.cap });
            }
            self.heap.push(Reverse(Keyed(key, next)));
        }
        let value = self.b.eval_unchecked(nu.degrees());
        Ok(Some((value, nu)))
    }
}

/// All `ν` with `b(ν) ≤ level`, unordered.
fn sublevel_set(b: &BoundFunction, level: f64, cap: u64) -> Result<Vec<(f64, MultiIndex)>> {
    let mut frontier = Frontier::new(b, cap);
    let mut out = Vec::new();
    if frontier.peek_key() > level {
        return Ok(out);
    }
    while let Some((value, nu)) = frontier.pop(level)? {
        if value <= level {
            out.push((value, nu));
        }
    }
    Ok(out)
}

/// `Λ_M`: the `M` indices with the smallest bound value, in `(b, lex)` order.
#[derive(Debug, Clone, PartialEq)]
pub struct QuasiOptimalIndexSet {
    indices: Vec<MultiIndex>,
    values: Vec<f64>,
    threshold_j: f64,
    bound_id: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct IndexSetDoc {
    #[serde(rename = "M")]
    m: usize,
    #[serde(rename = "J")]
    j: f64,
    indices: Vec<MultiIndex>,
}

impl QuasiOptimalIndexSet {
    /// Builds a set from explicit indices, evaluating `b` on each. No
    /// optimality check is made.
    pub fn from_indices(b: &BoundFunction, indices: Vec<MultiIndex>) -> Result<Self> {
        let values = indices.iter().map(|nu| b.eval(nu)).collect::<Result<Vec<_>>>()?;
        let threshold_j = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(QuasiOptimalIndexSet { indices, values, threshold_j, bound_id: b.id() })
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    /// `b(ν)` for each index, aligned with [`Self::indices`].
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn threshold_j(&self) -> f64 {
        self.threshold_j
    }

    pub fn bound_id(&self) -> &str {
        &self.bound_id
    }

    pub fn dim(&self) -> usize {
        self.indices.first().map_or(0, MultiIndex::dim)
    }

    /// The first `m` entries, which form `Λ_m` when `self` is quasi-optimal.
    pub fn prefix(&self, m: usize) -> Result<Self> {
        if m == 0 || m > self.len() {
            return Err(Error::Config(format!("prefix length {m} outside 1..={}", self.len())));
        }
        let values = self.values[..m].to_vec();
        let threshold_j = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(QuasiOptimalIndexSet {
            indices: self.indices[..m].to_vec(),
            values,
            threshold_j,
            bound_id: self.bound_id.clone(),
        })
    }

    /// True when every componentwise-smaller index is also a member.
    pub fn is_downward_closed(&self) -> bool {
        let members: HashSet<&MultiIndex> = self.indices.iter().collect();
        self.indices
            .iter()
            .all(|nu| nu.predecessors().all(|p| members.contains(&p)))
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = IndexSetDoc { m: self.len(), j: self.threshold_j, indices: self.indices.clone() };
        Ok(serde_json::to_string(&doc)?)
    }

    /// Parses an index-set document, recomputing bound values with `b` and
    /// checking the recorded `M` and `J`.
    pub fn from_json(s: &str, b: &BoundFunction) -> Result<Self> {
        let doc: IndexSetDoc = serde_json::from_str(s)?;
        let set = Self::from_indices(b, doc.indices)?;
        if set.len() != doc.m {
            return Err(Error::Config(format!("document declares M={} but lists {}", doc.m, set.len())));
        }
        if !bounds_tie(set.threshold_j, doc.j) {
            return Err(Error::Config(format!(
                "document declares J={} but the bound gives {}",
                doc.j, set.threshold_j
            )));
        }
        Ok(set)
    }
}

pub fn enumerate_quasi_optimal(b: &BoundFunction, m: usize) -> Result<QuasiOptimalIndexSet> {
    enumerate_quasi_optimal_capped(b, m, DEFAULT_ENUMERATION_CAP)
}

/// Best-first frontier enumeration of `Λ_M`.
///
/// Lattice points are popped in order of the cone minorant; the walk stops
/// once no unvisited index can undercut (or tie with) the current `M`-th
/// smallest bound value.
pub fn enumerate_quasi_optimal_capped(
    b: &BoundFunction,
    m: usize,
    cap: u64,
) -> Result<QuasiOptimalIndexSet> {
    if m == 0 {
        return Err(Error::Config("M must be at least 1".into()));
    }
    let mut frontier = Frontier::new(b, cap);
    // max-heap of the m smallest values seen so far
    let mut smallest: BinaryHeap<Keyed> = BinaryHeap::with_capacity(m + 1);
    let mut candidates = Vec::new();
    loop {
        if smallest.len() == m {
            let kth = smallest.peek().map(|k| k.0).unwrap_or(f64::INFINITY);
            if frontier.peek_key() > kth + 2.0 * tie_slack(kth) {
                break;
            }
        }
        let Some((value, nu)) = frontier.pop(f64::INFINITY)? else {
            break;
        };
        smallest.push(Keyed(value, nu.clone()));
        if smallest.len() > m {
            smallest.pop();
        }
        candidates.push((value, nu));
    }
    sort_by_bound(&mut candidates);
    candidates.truncate(m);
    let (values, indices): (Vec<f64>, Vec<MultiIndex>) = candidates.into_iter().unzip();
    let threshold_j = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(QuasiOptimalIndexSet { indices, values, threshold_j, bound_id: b.id() })
}

/// The full sublevel set `{ν : b(ν) ≤ level}` in `(b, lex)` order.
pub fn sublevel_index_set(b: &BoundFunction, level: f64, cap: u64) -> Result<QuasiOptimalIndexSet> {
    let mut entries = sublevel_set(b, level, cap)?;
    if entries.is_empty() {
        return Err(Error::EmptySet);
    }
    sort_by_bound(&mut entries);
    let (values, indices): (Vec<f64>, Vec<MultiIndex>) = entries.into_iter().unzip();
    let threshold_j = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(QuasiOptimalIndexSet { indices, values, threshold_j, bound_id: b.id() })
}

/// `J = max_{ν ∈ Λ_M} b(ν)`.
pub fn compute_j(set: &QuasiOptimalIndexSet) -> Result<f64> {
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    Ok(set.threshold_j)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JRegime {
    BelowAsymptoticRegime,
    Inside,
    AboveInterval,
}

impl fmt::Display for JRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            JRegime::BelowAsymptoticRegime => "below asymptotic regime",
            JRegime::Inside => "inside interval",
            JRegime::AboveInterval => "above interval",
        })
    }
}

/// Position of `J` relative to `[(M/(|𝒫|(1+ε)))^{1/d}, (2M/|𝒫|)^{1/d}]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JDiagnostic {
    pub j: f64,
    pub lower: f64,
    pub upper: f64,
    pub regime: JRegime,
    /// Whether the interval is a claim at these inputs (`|𝒫| > 1`) rather
    /// than a diagnostic.
    pub asserted: bool,
}

impl JDiagnostic {
    pub fn inside(&self) -> bool {
        self.regime == JRegime::Inside
    }
}

pub fn j_interval_diagnostic(set: &QuasiOptimalIndexSet, pvol: f64, eps: f64) -> Result<JDiagnostic> {
    let j = compute_j(set)?;
    if !(pvol > 0.0 && pvol.is_finite()) {
        return Err(Error::Config(format!("|P| must be positive, got {pvol}")));
    }
    if !(eps > 0.0) {
        return Err(Error::Config(format!("epsilon must be positive, got {eps}")));
    }
    let m = set.len() as f64;
    let inv_d = 1.0 / set.dim() as f64;
    let lower = (m / (pvol * (1.0 + eps))).powf(inv_d);
    let upper = (2.0 * m / pvol).powf(inv_d);
    let regime = if j < lower {
        JRegime::BelowAsymptoticRegime
    } else if j > upper {
        JRegime::AboveInterval
    } else {
        JRegime::Inside
    };
    Ok(JDiagnostic { j, lower, upper, regime, asserted: pvol > 1.0 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PVolumeEstimate {
    pub value: f64,
    pub tau: f64,
    /// `#(𝒫_τ ∩ ℤ^d)`
    pub lattice_count: u64,
    pub extrapolated: bool,
    /// Count at `2τ` when extrapolated.
    pub lattice_count_2tau: Option<u64>,
}

pub fn estimate_p_volume(b: &BoundFunction, tau: f64, extrapolate: bool) -> Result<PVolumeEstimate> {
    estimate_p_volume_capped(b, tau, extrapolate, DEFAULT_ENUMERATION_CAP)
}

/// `|𝒫| ≈ #(𝒫_τ ∩ ℤ^d)/τ^d`, optionally Richardson-extrapolated from `τ`
/// and `2τ` to cancel the first-order surface term.
pub fn estimate_p_volume_capped(
    b: &BoundFunction,
    tau: f64,
    extrapolate: bool,
    cap: u64,
) -> Result<PVolumeEstimate> {
    if !(tau >= 1.0 && tau.is_finite()) {
        return Err(Error::Config(format!("tau must be >= 1, got {tau}")));
    }
    let d = b.dim() as i32;
    let count = count_sublevel(b, tau, cap)?;
    let raw = count as f64 / tau.powi(d);
    let (value, count_2tau) = if extrapolate {
        let count2 = count_sublevel(b, 2.0 * tau, cap)?;
        let raw2 = count2 as f64 / (2.0 * tau).powi(d);
        (2.0 * raw2 - raw, Some(count2))
    } else {
        (raw, None)
    };
    if !(value > 0.0) {
        return Err(Error::Config(format!("volume estimate {value} is not positive; increase tau")));
    }
    Ok(PVolumeEstimate { value, tau, lattice_count: count, extrapolated: extrapolate, lattice_count_2tau: count_2tau })
}

/// `#{ν ≥ 0 : b(ν) ≤ τ}`.
///
/// Separable bounds count the last coordinate by bisection, so the work (and
/// the cap) scales with the number of `(d−1)`-dimensional prefixes rather
/// than with the count itself.
pub fn count_sublevel(b: &BoundFunction, tau: f64, cap: u64) -> Result<u64> {
    if !b.is_separable() {
        return count_sublevel_by_enumeration(b, tau, cap);
    }
    let d = b.dim();
    let mut min_rest = vec![0.0; d + 1];
    for i in (0..d).rev() {
        min_rest[i] = min_rest[i + 1] + b.min_from(i, 0);
    }
    let mut work = 0u64;
    count_prefixes(b, 0, 0.0, tau, &min_rest, &mut work, cap)
}

fn count_prefixes(
    b: &BoundFunction,
    i: usize,
    partial: f64,
    tau: f64,
    min_rest: &[f64],
    work: &mut u64,
    cap: u64,
) -> Result<u64> {
    if i + 1 == b.dim() {
        return Ok(count_last_coordinate(b, i, partial, tau));
    }
    let slack = 1e-9 * tau.abs().max(1.0);
    let mut total = 0u64;
    let mut k = 0u32;
    loop {
        let s = partial + b.term(i, k);
        if s + min_rest[i + 1] <= tau + slack {
            *work += 1;
            if *work > cap {
                return Err(Error::CapExceeded { what: "lattice count", cap });
            }
            total += count_prefixes(b, i + 1, s, tau, min_rest, work, cap)?;
        } else if k >= b.increasing_from(i) {
            break;
        }
        k += 1;
    }
    Ok(total)
}

fn count_last_coordinate(b: &BoundFunction, i: usize, partial: f64, tau: f64) -> u64 {
    let fits = |k: u32| partial + b.term(i, k) <= tau;
    let start = b.increasing_from(i);
    let mut count = (0..start).filter(|&k| fits(k)).count() as u64;
    if !fits(start) {
        return count;
    }
    // largest k >= start that fits, by doubling then bisection
    let mut lo = start;
    let mut step = 1u32;
    let mut hi = loop {
        let probe = lo.saturating_add(step);
        if !fits(probe) {
            break probe;
        }
        lo = probe;
        step = step.saturating_mul(2);
    };
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if fits(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    count += u64::from(lo - start) + 1;
    count
}

/// Reference count by walking the lattice point by point.
pub fn count_sublevel_by_enumeration(b: &BoundFunction, tau: f64, cap: u64) -> Result<u64> {
    Ok(sublevel_set(b, tau, cap)?.len() as u64)
}

/// Bracket for `Σ_{ν ∉ Λ_M} e^{-b(ν)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailSum {
    /// Sum over `ν ∉ Λ_M` with `b(ν) ≤ cutoff`.
    pub partial: f64,
    /// Rigorous bound for the indices with `b(ν) > cutoff`.
    pub remainder_bound: f64,
    pub cutoff: f64,
    pub terms: u64,
}

impl TailSum {
    pub fn upper(&self) -> f64 {
        self.partial + self.remainder_bound
    }
}

pub fn tail_sum(b: &BoundFunction, set: &QuasiOptimalIndexSet, cutoff: f64) -> Result<TailSum> {
    tail_sum_capped(b, set, cutoff, DEFAULT_ENUMERATION_CAP)
}

pub fn tail_sum_capped(
    b: &BoundFunction,
    set: &QuasiOptimalIndexSet,
    cutoff: f64,
    cap: u64,
) -> Result<TailSum> {
    let j = compute_j(set)?;
    check_dim(b.dim(), set.dim())?;
    if !(cutoff > j) {
        return Err(Error::Config(format!("tail cutoff {cutoff} must exceed J = {j}")));
    }
    let members: HashSet<&MultiIndex> = set.indices().iter().collect();
    let mut terms: Vec<f64> = sublevel_set(b, cutoff, cap)?
        .into_iter()
        .filter(|(_, nu)| !members.contains(nu))
        .map(|(v, _)| (-v).exp())
        .collect();
    // smallest terms first
    terms.sort_by(f64::total_cmp);
    let partial = terms.iter().sum();
    Ok(TailSum {
        partial,
        remainder_bound: remainder_bound(b.dim(), b.growth(), cutoff),
        cutoff,
        terms: terms.len() as u64,
    })
}

/// Majorant for `Σ_{b(ν) > L} e^{-b(ν)}`.
///
/// Indices with `b(ν) > L` have `|ν|_1 > L/c_high`, and each contributes at
/// most `min(e^{-L}, e^{offset − c_low|ν|_1})`. Shell `|ν|_1 = k` holds
/// `C(k+d−1, d−1)` indices; once the shell terms are geometric the rest is
/// bounded by the ratio test.
pub fn remainder_bound(d: usize, growth: Growth, cutoff: f64) -> f64 {
    let Growth { c_low, c_high, offset } = growth;
    let shell = |k: f64| -> f64 { (1..d).map(|j| (k + j as f64) / j as f64).product() };
    let mut k = (cutoff / c_high).floor() + 1.0;
    let mut total = 0.0;
    loop {
        let per_index = (-cutoff).exp().min((offset - c_low * k).exp());
        let term = shell(k) * per_index;
        total += term;
        if c_low * k >= cutoff + offset {
            // shell(k+1)/shell(k) decreases in k, so q bounds every later ratio
            let q = shell(k + 1.0) / shell(k) * (-c_low).exp();
            if q < 1.0 && (term <= 1e-17 * total || term == 0.0) {
                total += term * q / (1.0 - q);
                break;
            }
        }
        k += 1.0;
    }
    total
}

/// `C_u(ε) = (4e + 4εe − 2)·e/(e − 1)`.
pub fn c_u(eps: f64) -> f64 {
    let e = std::f64::consts::E;
    (4.0 * e + 4.0 * eps * e - 2.0) * e / (e - 1.0)
}

/// Both sides of the quasi-optimal tail estimate
/// `Σ_{ν∉Λ_M} e^{-b(ν)} ≤ C_u(ε)·M·exp(−(M/(|𝒫|(1+ε)))^{1/d})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailBoundCheck {
    pub m: usize,
    pub tail: TailSum,
    pub bound: f64,
    /// `tail.upper() / bound`
    pub ratio: f64,
    pub c_u: f64,
    /// Whether `M` is at or above the configured asymptotic onset.
    pub asserted: bool,
    pub holds: bool,
}

impl TailBoundCheck {
    /// Passes unless the estimate is asserted at this `M` and fails.
    pub fn passes(&self) -> bool {
        self.holds || !self.asserted
    }
}

/// Default tail cutoff: far enough past `J` that the remainder is negligible.
pub fn default_tail_cutoff(b: &BoundFunction, j: f64) -> f64 {
    let g = b.growth();
    j + (36.0 + g.offset) / g.c_low
}

pub fn check_quasi_tail_bound(
    b: &BoundFunction,
    set: &QuasiOptimalIndexSet,
    pvol: f64,
    eps: f64,
    asymptotic_onset: usize,
) -> Result<TailBoundCheck> {
    let j = compute_j(set)?;
    if !(pvol > 0.0) {
        return Err(Error::Config(format!("|P| must be positive, got {pvol}")));
    }
    let tail = tail_sum(b, set, default_tail_cutoff(b, j))?;
    let m = set.len();
    let cu = c_u(eps);
    let exponent = (m as f64 / (pvol * (1.0 + eps))).powf(1.0 / b.dim() as f64);
    let bound = cu * m as f64 * (-exponent).exp();
    Ok(TailBoundCheck {
        m,
        tail,
        bound,
        ratio: tail.upper() / bound,
        c_u: cu,
        asserted: m >= asymptotic_onset,
        holds: tail.upper() <= bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mi(v: &[u32]) -> MultiIndex {
        MultiIndex::new(v.to_vec())
    }

    #[test]
    fn eval_examples() {
        let t = BoundFunction::taylor(vec![2.0, 3.0]).unwrap();
        let v = t.eval(&mi(&[1, 1])).unwrap();
        assert!((v - 1.791759469228055).abs() < 1e-12);
        let iso = BoundFunction::isotropic(2).unwrap();
        assert_eq!(iso.eval(&mi(&[3, 4])).unwrap(), 7.0);
        for b in [&t, &iso, &BoundFunction::legendre(vec![2.0, 3.0]).unwrap()] {
            assert_eq!(b.eval(&MultiIndex::zeros(2)).unwrap(), 0.0);
        }
    }

    #[test]
    fn eval_rejects_wrong_dimension() {
        let b = BoundFunction::taylor(vec![2.0, 3.0]).unwrap();
        assert!(matches!(b.eval(&mi(&[1])), Err(Error::DimensionMismatch { expected: 2, got: 1 })));
    }

    #[test]
    fn rho_must_exceed_one() {
        assert!(matches!(BoundFunction::taylor(vec![2.0, 1.0]), Err(Error::Config(_))));
        assert!(matches!(BoundFunction::legendre(vec![0.5]), Err(Error::Config(_))));
        assert!(matches!(BoundFunction::taylor(vec![]), Err(Error::Config(_))));
    }

    #[test]
    fn legendre_is_nonmonotone_below_three() {
        let b = BoundFunction::legendre(vec![2.0]).unwrap();
        assert!(!b.is_monotone());
        assert!(b.eval(&mi(&[1])).unwrap() < 0.0);
        let b3 = BoundFunction::legendre(vec![3.0]).unwrap();
        assert!(b3.is_monotone());
        assert!(BoundFunction::taylor(vec![1.5, 4.0]).unwrap().is_monotone());
    }

    #[test]
    fn cone_lower_bound_is_a_minorant() {
        for b in [
            BoundFunction::legendre(vec![2.0, 3.0]).unwrap(),
            BoundFunction::legendre_literal(vec![1.5, 2.0]).unwrap(),
        ] {
            for a in 0..12u32 {
                for c in 0..12u32 {
                    let nu = mi(&[a, c]);
                    let lb = b.cone_lower_bound(&nu);
                    for da in 0..25u32 {
                        for dc in 0..25u32 {
                            let v = b.eval(&mi(&[a + da, c + dc])).unwrap();
                            assert!(lb <= v + 1e-12, "{nu} lb {lb} > b = {v}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn growth_constants_hold_globally_for_builtins() {
        let bounds = [
            BoundFunction::isotropic(2).unwrap(),
            BoundFunction::taylor(vec![2.0, 3.0]).unwrap(),
            BoundFunction::legendre(vec![2.0, 3.0]).unwrap(),
            BoundFunction::legendre_literal(vec![2.0, 3.0]).unwrap(),
        ];
        for b in &bounds {
            for a in 0..60 {
                for c in 0..60 {
                    assert!(b.growth_holds_at(&mi(&[a, c])).unwrap(), "{} at ({a},{c})", b.id());
                }
            }
        }
    }

    #[test]
    fn enumeration_examples() {
        let iso = BoundFunction::isotropic(2).unwrap();
        let set = enumerate_quasi_optimal(&iso, 6).unwrap();
        let expect: Vec<_> = [[0, 0], [0, 1], [1, 0], [0, 2], [1, 1], [2, 0]].iter().map(|v| mi(v)).collect();
        let mut got = set.indices().to_vec();
        got.sort();
        let mut want = expect.clone();
        want.sort();
        assert_eq!(got, want);
        assert_eq!(compute_j(&set).unwrap(), 2.0);
        assert!(set.is_downward_closed());

        let one = enumerate_quasi_optimal(&BoundFunction::taylor(vec![2.0, 3.0]).unwrap(), 1).unwrap();
        assert_eq!(one.indices(), &[MultiIndex::zeros(2)]);

        // ln 8 and 3 ln 2 tie; (0,1) precedes (3,0) lexicographically
        let t = BoundFunction::taylor(vec![2.0, 8.0]).unwrap();
        let four = enumerate_quasi_optimal(&t, 4).unwrap();
        assert_eq!(four.indices(), &[mi(&[0, 0]), mi(&[1, 0]), mi(&[2, 0]), mi(&[0, 1])]);
        let five = enumerate_quasi_optimal(&t, 5).unwrap();
        assert_eq!(five.indices()[4], mi(&[3, 0]));
    }

    #[test]
    fn enumeration_rejects_zero() {
        let b = BoundFunction::isotropic(1).unwrap();
        assert!(matches!(enumerate_quasi_optimal(&b, 0), Err(Error::Config(_))));
    }

    #[test]
    fn enumeration_respects_cap() {
        let b = BoundFunction::isotropic(3).unwrap();
        assert!(matches!(
            enumerate_quasi_optimal_capped(&b, 500, 50),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn pvolume_examples() {
        let iso = BoundFunction::isotropic(2).unwrap();
        let raw = estimate_p_volume(&iso, 1000.0, false).unwrap();
        assert_eq!(raw.lattice_count, 1001 * 1002 / 2);
        assert!((raw.value - 0.501501).abs() < 1e-12);
        let ext = estimate_p_volume(&iso, 512.0, true).unwrap();
        assert!((ext.value - 0.5).abs() < 1e-4);

        let e = std::f64::consts::E;
        let t = BoundFunction::taylor(vec![e, e]).unwrap();
        let tr = estimate_p_volume(&t, 1000.0, false).unwrap();
        assert!((tr.value - 0.501501).abs() < 1e-3);
    }

    #[test]
    fn pvolume_requires_tau_at_least_one() {
        let iso = BoundFunction::isotropic(2).unwrap();
        assert!(matches!(estimate_p_volume(&iso, 0.5, false), Err(Error::Config(_))));
    }

    #[test]
    fn separable_count_matches_enumeration() {
        let bounds = [
            BoundFunction::isotropic(3).unwrap(),
            BoundFunction::taylor(vec![2.0, 3.0]).unwrap(),
            BoundFunction::legendre(vec![2.0, 3.0, 1.5]).unwrap(),
            BoundFunction::legendre_literal(vec![2.0, 3.0]).unwrap(),
        ];
        for b in &bounds {
            for tau in [1.0, 2.5, 7.0, 13.3, 20.0] {
                let fast = count_sublevel(b, tau, DEFAULT_ENUMERATION_CAP).unwrap();
                let slow = count_sublevel_by_enumeration(b, tau, DEFAULT_ENUMERATION_CAP).unwrap();
                assert_eq!(fast, slow, "{} tau={tau}", b.id());
            }
        }
    }

    #[test]
    fn count_respects_cap() {
        let b = BoundFunction::isotropic(3).unwrap();
        assert!(matches!(count_sublevel(&b, 1000.0, 10), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn j_interval_examples() {
        let iso = BoundFunction::isotropic(2).unwrap();
        let full = enumerate_quasi_optimal(&iso, 231).unwrap();
        let diag = j_interval_diagnostic(&full, 0.5, 0.5).unwrap();
        assert_eq!(diag.j, 20.0);
        assert!((diag.lower - (231.0f64 / 0.75).sqrt()).abs() < 1e-12);
        assert!((diag.upper - (924.0f64).sqrt()).abs() < 1e-12);
        assert!(diag.inside());
        assert!(!diag.asserted);

        let small = enumerate_quasi_optimal(&iso, 6).unwrap();
        let diag = j_interval_diagnostic(&small, 0.5, 0.5).unwrap();
        assert_eq!(diag.regime, JRegime::BelowAsymptoticRegime);
        assert!((diag.lower - 8.0f64.sqrt()).abs() < 1e-12);
        assert!((diag.upper - 24.0f64.sqrt()).abs() < 1e-12);
        assert_eq!(diag.regime.to_string(), "below asymptotic regime");
    }

    #[test]
    fn compute_j_rejects_empty() {
        let b = BoundFunction::isotropic(1).unwrap();
        let empty = QuasiOptimalIndexSet::from_indices(&b, Vec::new()).unwrap();
        assert!(matches!(compute_j(&empty), Err(Error::EmptySet)));
    }

    #[test]
    fn tail_sum_geometric_series() {
        let b = BoundFunction::isotropic(1).unwrap();
        let set = enumerate_quasi_optimal(&b, 3).unwrap();
        let tail = tail_sum(&b, &set, 40.0).unwrap();
        let e = std::f64::consts::E;
        let exact = (-3.0f64).exp() / (1.0 - 1.0 / e);
        assert!((tail.partial - exact).abs() < 1e-12);
        assert!(tail.partial <= exact && exact <= tail.upper() * (1.0 + 1e-15));
    }

    #[test]
    fn tail_sum_empty_range() {
        let b = BoundFunction::isotropic(2).unwrap();
        let set = enumerate_quasi_optimal(&b, 6).unwrap();
        // every index with b <= 2.5 is already in the set
        let tail = tail_sum(&b, &set, 2.5).unwrap();
        assert_eq!(tail.partial, 0.0);
        assert_eq!(tail.terms, 0);
        assert!(tail.remainder_bound > 0.0);
    }

    #[test]
    fn tail_sum_requires_cutoff_above_j() {
        let b = BoundFunction::isotropic(2).unwrap();
        let set = enumerate_quasi_optimal(&b, 6).unwrap();
        assert!(matches!(tail_sum(&b, &set, 2.0), Err(Error::Config(_))));
    }

    #[test]
    fn c_u_formula() {
        let e = std::f64::consts::E;
        assert!((c_u(0.5) - (6.0 * e - 2.0) * e / (e - 1.0)).abs() < 1e-12);
        assert!((c_u(0.5) - 22.637_597_798_231_58).abs() < 1e-12);
    }

    #[test]
    fn quasi_tail_bound_example() {
        let b = BoundFunction::isotropic(1).unwrap();
        let set = enumerate_quasi_optimal(&b, 10).unwrap();
        let check = check_quasi_tail_bound(&b, &set, 1.0, 0.5, 1).unwrap();
        let e = std::f64::consts::E;
        let tail = (-10.0f64).exp() / (1.0 - 1.0 / e);
        assert!((check.tail.partial - tail).abs() < 1e-15);
        let bound = c_u(0.5) * 10.0 * (-10.0f64 / 1.5).exp();
        assert!((check.bound - bound).abs() < 1e-12 * bound);
        assert!(check.ratio < 1e-2);
        assert!(check.holds && check.passes());
    }

    #[test]
    fn bound_json_round_trip() {
        let b = BoundFunction::taylor(vec![2.0, 3.0]).unwrap().with_log_c(0.25);
        let s = b.to_json().unwrap();
        assert!(s.contains("\"kind\":\"taylor\"") && s.contains("\"logC\":0.25"));
        let back = BoundFunction::from_json(&s).unwrap();
        assert_eq!(back.rho(), b.rho());
        assert_eq!(back.log_c(), 0.25);
        let lit = BoundFunction::legendre_literal(vec![2.5]).unwrap();
        let back = BoundFunction::from_json(&lit.to_json().unwrap()).unwrap();
        assert_eq!(back.id(), lit.id());
        assert!(BoundFunction::from_json(r#"{"kind":"taylor","rho":[2.0],"rate":1}"#).is_err());
    }

    #[test]
    fn index_set_json_layout() {
        let b = BoundFunction::isotropic(2).unwrap();
        let set = enumerate_quasi_optimal(&b, 3).unwrap();
        let s = set.to_json().unwrap();
        assert_eq!(s, r#"{"M":3,"J":1.0,"indices":[[0,0],[0,1],[1,0]]}"#);
        let back = QuasiOptimalIndexSet::from_json(&s, &b).unwrap();
        assert_eq!(back, set);
    }

    #[test]
    fn custom_bound_enumerates() {
        let f: CustomBoundFn = Arc::new(|nu: &[u32]| nu.iter().map(|&k| f64::from(k).powf(1.5)).sum());
        let b = BoundFunction::custom(2, f, Growth { c_low: 1.0, c_high: 1e3, offset: 1.0 }).unwrap();
        let set = enumerate_quasi_optimal(&b, 10).unwrap();
        assert_eq!(set.len(), 10);
        assert!(set.is_downward_closed());
        assert!(b.to_json().is_err());
        let bad: CustomBoundFn = Arc::new(|_: &[u32]| 1.0);
        assert!(BoundFunction::custom(2, bad, b.growth()).is_err());
    }
}
