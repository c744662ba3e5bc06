//! One-dimensional polynomial families on `[0,1]` in monic factored form,
//! their tensor products, and expansions `u_Q = Σ c_ν Ψ_ν`.

use std::f64::consts::PI;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::multiindex::{sublevel_index_set, BoundFunction, MultiIndex, QuasiOptimalIndexSet, DEFAULT_ENUMERATION_CAP};
use crate::scalar::Scalar;

/// Largest supported polynomial degree.
pub const MAX_DEGREE_CAP: usize = 64;

const NEWTON_MAX_ITER: usize = 100;
const BISECTION_MAX_ITER: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    ShiftedLegendre,
    Monomial,
}

impl std::fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FamilyKind::ShiftedLegendre => "shifted-legendre",
            FamilyKind::Monomial => "monomial",
        })
    }
}

impl std::str::FromStr for FamilyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "shifted-legendre" | "legendre" => Ok(FamilyKind::ShiftedLegendre),
            "monomial" => Ok(FamilyKind::Monomial),
            other => Err(Error::Config(format!("unknown polynomial family `{other}`"))),
        }
    }
}

/// Root and leading-coefficient tables for degrees `0..=max_degree`.
///
/// Polynomials are used in the monic form `ψ_n(y) = Π_j (y − r_j)`; the
/// leading coefficient of the conventional normalization is reported only.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialFamily {
    kind: FamilyKind,
    max_degree: usize,
    roots_by_degree: Vec<Vec<f64>>,
    leading_by_degree: Vec<f64>,
}

impl PolynomialFamily {
    pub fn new(kind: FamilyKind, max_degree: usize) -> Result<Self> {
        if max_degree > MAX_DEGREE_CAP {
            return Err(Error::Envelope(format!(
                "polynomial degree {max_degree} exceeds the cap of {MAX_DEGREE_CAP}"
            )));
        }
        let roots_by_degree = match kind {
            FamilyKind::Monomial => (0..=max_degree).map(|n| vec![0.0; n]).collect(),
            FamilyKind::ShiftedLegendre => shifted_legendre_root_table(max_degree)?,
        };
        let leading_by_degree = (0..=max_degree)
            .map(|n| match kind {
                FamilyKind::Monomial => 1.0,
                // P_n(2y − 1) has leading coefficient C(2n, n)
                FamilyKind::ShiftedLegendre => (1..=n).fold(1.0, |acc, k| acc * (n + k) as f64 / k as f64),
            })
            .collect();
        Ok(PolynomialFamily { kind, max_degree, roots_by_degree, leading_by_degree })
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn roots(&self, degree: usize) -> Result<&[f64]> {
        self.roots_by_degree
            .get(degree)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::Config(format!("degree {degree} exceeds the family's max degree {}", self.max_degree)))
    }

    pub fn leading_coefficient(&self, degree: usize) -> Result<f64> {
        self.leading_by_degree
            .get(degree)
            .copied()
            .ok_or_else(|| Error::Config(format!("degree {degree} exceeds the family's max degree {}", self.max_degree)))
    }

    /// `Π_{j=1}^{degree} (y − r_j)`.
    pub fn eval_factored(&self, degree: usize, y: f64) -> Result<f64> {
        self.eval_factored_in::<f64>(degree, y)
    }

    pub fn eval_factored_in<T: Scalar>(&self, degree: usize, y: f64) -> Result<T> {
        let y = T::from_f64(y);
        Ok(self
            .roots(degree)?
            .iter()
            .fold(T::one(), |acc, &r| acc * (y + (-r))))
    }

    /// `Ψ_ν(y) = Π_i ψ_{ν_i}(y_i)`.
    pub fn eval_tensor(&self, nu: &MultiIndex, y: &[f64]) -> Result<f64> {
        self.eval_tensor_in::<f64>(nu, y)
    }

    pub fn eval_tensor_in<T: Scalar>(&self, nu: &MultiIndex, y: &[f64]) -> Result<T> {
        check_dim(nu.dim(), y.len())?;
        let mut acc = T::one();
        for (&k, &yi) in nu.degrees().iter().zip(y) {
            acc = acc * self.eval_factored_in::<T>(k as usize, yi)?;
        }
        Ok(acc)
    }

    /// Writes `degree,index,root` rows for every stored degree.
    pub fn write_roots_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["degree", "index", "root"])?;
        for (n, roots) in self.roots_by_degree.iter().enumerate() {
            for (j, r) in roots.iter().enumerate() {
                w.write_record([n.to_string(), j.to_string(), format!("{r:e}")])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Sorted roots of the degree-`degree` member of `kind` on `[0,1]`.
pub fn roots(kind: FamilyKind, degree: usize) -> Result<Vec<f64>> {
    Ok(PolynomialFamily::new(kind, degree)?.roots(degree)?.to_vec())
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0) * x * p - kf * p_prev) / (kf + 1.0);
        p_prev = p;
        p = next;
    }
    let dp = n as f64 * (x * p - p_prev) / (x * x - 1.0);
    (p, dp)
}

/// Root table on `[−1,1]`, built degree by degree so that each root is
/// bracketed by consecutive roots of the previous degree.
fn shifted_legendre_root_table(max_degree: usize) -> Result<Vec<Vec<f64>>> {
    let mut table: Vec<Vec<f64>> = vec![Vec::new()];
    let mut prev: Vec<f64> = Vec::new();
    for n in 1..=max_degree {
        let mut xs = Vec::with_capacity(n);
        for i in 0..n {
            let lo = if i == 0 { -1.0 } else { prev[i - 1] };
            let hi = if i == n - 1 { 1.0 } else { prev[i] };
            xs.push(legendre_root_in(n, i, lo, hi)?);
        }
        // enforce the reflection symmetry x_i = −x_{n−1−i}
        for i in 0..n / 2 {
            let half = 0.5 * (xs[n - 1 - i] - xs[i]);
            xs[i] = -half;
            xs[n - 1 - i] = half;
        }
        if n % 2 == 1 {
            xs[n / 2] = 0.0;
        }
        table.push(xs.iter().map(|x| 0.5 * (1.0 + x)).collect());
        prev = xs;
    }
    Ok(table)
}

fn legendre_root_in(n: usize, i: usize, lo: f64, hi: f64) -> Result<f64> {
    let guess = -(PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
    let mut x = if guess > lo && guess < hi { guess } else { 0.5 * (lo + hi) };
    for _ in 0..NEWTON_MAX_ITER {
        let (p, dp) = legendre_with_derivative(n, x);
        let step = p / dp;
        let next = x - step;
        if !(next > lo && next < hi) || !next.is_finite() {
            return bisect_legendre(n, i, lo, hi);
        }
        x = next;
        if step.abs() <= 1e-16 * x.abs().max(1e-3) {
            return Ok(x);
        }
    }
    bisect_legendre(n, i, lo, hi)
}

fn bisect_legendre(n: usize, index: usize, mut lo: f64, mut hi: f64) -> Result<f64> {
    let mut f_lo = legendre_with_derivative(n, lo).0;
    let f_hi = legendre_with_derivative(n, hi).0;
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::NonConvergence { degree: n, index });
    }
    for _ in 0..BISECTION_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let f_mid = legendre_with_derivative(n, mid).0;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::NonConvergence { degree: n, index })
}

/// `u_Q(y) = Σ_{ν ∈ Λ} c_ν Ψ_ν(y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuasiOptimalExpansion {
    index_set: QuasiOptimalIndexSet,
    coeffs: Vec<f64>,
    family: PolynomialFamily,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExpansionDoc {
    family: FamilyKind,
    d: usize,
    terms: Vec<TermDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermDoc {
    nu: MultiIndex,
    c: f64,
}

impl QuasiOptimalExpansion {
    /// `coeffs[k]` is the coefficient of `index_set.indices()[k]`.
    pub fn new(index_set: QuasiOptimalIndexSet, coeffs: Vec<f64>, family_kind: FamilyKind) -> Result<Self> {
        if index_set.is_empty() {
            return Err(Error::EmptySet);
        }
        check_dim(index_set.len(), coeffs.len())?;
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("expansion coefficients".into()));
        }
        let max_degree = index_set
            .indices()
            .iter()
            .flat_map(|nu| nu.degrees().iter().copied())
            .max()
            .unwrap_or(0) as usize;
        let family = PolynomialFamily::new(family_kind, max_degree)?;
        Ok(QuasiOptimalExpansion { index_set, coeffs, family })
    }

    pub fn index_set(&self) -> &QuasiOptimalIndexSet {
        &self.index_set
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn family(&self) -> &PolynomialFamily {
        &self.family
    }

    pub fn dim(&self) -> usize {
        self.index_set.dim()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, f64)> {
        self.index_set.indices().iter().zip(self.coeffs.iter().copied())
    }

    pub fn coefficient(&self, nu: &MultiIndex) -> Option<f64> {
        self.terms().find(|(m, _)| *m == nu).map(|(_, c)| c)
    }

    /// True when `|c_ν| ≤ e^{-b(ν)}` for every term.
    pub fn satisfies_bound(&self, b: &BoundFunction) -> Result<bool> {
        for (nu, c) in self.terms() {
            let limit = (-b.eval(nu)?).exp();
            if c.abs() > limit * (1.0 + 1e-12) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn eval(&self, y: &[f64]) -> Result<f64> {
        self.eval_in::<f64>(y)
    }

    /// Sums the terms in index-set order.
    pub fn eval_in<T: Scalar>(&self, y: &[f64]) -> Result<T> {
        check_dim(self.dim(), y.len())?;
        let mut acc = T::zero();
        for (nu, c) in self.terms() {
            acc = acc + self.family.eval_tensor_in::<T>(nu, y)? * c;
        }
        Ok(acc)
    }

    /// The expansion restricted to its first `m` terms.
    pub fn truncate(&self, m: usize) -> Result<Self> {
        let set = self.index_set.prefix(m)?;
        Self::new(set, self.coeffs[..m].to_vec(), self.family.kind)
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = ExpansionDoc {
            family: self.family.kind,
            d: self.dim(),
            terms: self.terms().map(|(nu, c)| TermDoc { nu: nu.clone(), c }).collect(),
        };
        Ok(serde_json::to_string(&doc)?)
    }

    /// Parses an expansion document; `b` supplies the bound values of the
    /// listed indices.
    pub fn from_json(s: &str, b: &BoundFunction) -> Result<Self> {
        let doc: ExpansionDoc = serde_json::from_str(s)?;
        check_dim(b.dim(), doc.d)?;
        let (indices, coeffs): (Vec<_>, Vec<_>) = doc.terms.into_iter().map(|t| (t.nu, t.c)).unzip();
        for nu in &indices {
            check_dim(doc.d, nu.dim())?;
        }
        let set = QuasiOptimalIndexSet::from_indices(b, indices)?;
        Self::new(set, coeffs, doc.family)
    }
}

/// Ground-truth expansion over `{ν : b(ν) ≤ cutoff}` with
/// `c_ν = ±e^{-b(ν)}`, signs drawn from a seeded generator in index order.
pub fn synthetic_target(
    b: &BoundFunction,
    family: FamilyKind,
    cutoff: f64,
    seed: u64,
) -> Result<QuasiOptimalExpansion> {
    let set = sublevel_index_set(b, cutoff, DEFAULT_ENUMERATION_CAP)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs = set
        .values()
        .iter()
        .map(|v| {
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            sign * (-v).exp()
        })
        .collect();
    QuasiOptimalExpansion::new(set, coeffs, family)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multiindex::enumerate_quasi_optimal;
    use twofloat::TwoFloat;

    #[test]
    fn root_examples() {
        assert_eq!(roots(FamilyKind::ShiftedLegendre, 0).unwrap(), Vec::<f64>::new());
        assert_eq!(roots(FamilyKind::ShiftedLegendre, 1).unwrap(), vec![0.5]);
        let r2 = roots(FamilyKind::ShiftedLegendre, 2).unwrap();
        let h = 0.5 / 3.0f64.sqrt();
        assert!((r2[0] - (0.5 - h)).abs() < 1e-15);
        assert!((r2[1] - (0.5 + h)).abs() < 1e-15);
        assert!((r2[0] - 0.2113248654).abs() < 1e-10);
        assert_eq!(roots(FamilyKind::Monomial, 3).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn degree_cap_enforced() {
        assert!(matches!(PolynomialFamily::new(FamilyKind::ShiftedLegendre, 65), Err(Error::Envelope(_))));
        let fam = PolynomialFamily::new(FamilyKind::ShiftedLegendre, 4).unwrap();
        assert!(fam.roots(5).is_err());
    }

    #[test]
    fn roots_match_golub_welsch_reference() {
        // degree-5 Gauss–Legendre nodes on [-1, 1], mapped to [0, 1]
        let reference = [
            -0.906_179_845_938_664,
            -0.538_469_310_105_683,
            0.0,
            0.538_469_310_105_683,
            0.906_179_845_938_664,
        ];
        let got = roots(FamilyKind::ShiftedLegendre, 5).unwrap();
        for (r, x) in got.iter().zip(reference) {
            assert!((r - 0.5 * (1.0 + x)).abs() < 1e-14);
        }
    }

    #[test]
    fn root_table_invariants() {
        let fam = PolynomialFamily::new(FamilyKind::ShiftedLegendre, MAX_DEGREE_CAP).unwrap();
        for n in 1..=MAX_DEGREE_CAP {
            let r = fam.roots(n).unwrap();
            assert_eq!(r.len(), n);
            assert!(r.windows(2).all(|w| w[0] < w[1]), "degree {n} not strictly sorted");
            assert!(r.iter().all(|&x| x > 0.0 && x < 1.0));
            let sum: f64 = r.iter().sum();
            assert!((sum - n as f64 / 2.0).abs() < 1e-12, "degree {n} sum {sum}");
            if n >= 2 {
                let prev = fam.roots(n - 1).unwrap();
                for (k, p) in prev.iter().enumerate() {
                    assert!(r[k] < *p && *p < r[k + 1], "interlacing fails at degree {n}");
                }
            }
            // value at stored roots vanishes
            for &x in r {
                let v = fam.eval_factored(n, x).unwrap();
                assert!(v.abs() <= 1e-12 * n as f64, "degree {n}: ψ({x}) = {v}");
            }
        }
    }

    #[test]
    fn roots_are_roots_of_the_recurrence_polynomial() {
        for n in [7usize, 20, 41, 64] {
            for r in roots(FamilyKind::ShiftedLegendre, n).unwrap() {
                let x = 2.0 * r - 1.0;
                let (p, dp) = legendre_with_derivative(n, x);
                // Newton correction on [0,1] below 1e-14
                assert!((p / dp / 2.0).abs() < 1e-14, "n={n} r={r}");
            }
        }
    }

    #[test]
    fn factored_values_are_bounded_by_one() {
        let fam = PolynomialFamily::new(FamilyKind::ShiftedLegendre, MAX_DEGREE_CAP).unwrap();
        let mono = PolynomialFamily::new(FamilyKind::Monomial, MAX_DEGREE_CAP).unwrap();
        let n_grid = 10_000;
        for n in 0..=MAX_DEGREE_CAP {
            for i in 0..n_grid {
                let y = i as f64 / (n_grid - 1) as f64;
                assert!(fam.eval_factored(n, y).unwrap().abs() <= 1.0);
                assert!(mono.eval_factored(n, y).unwrap().abs() <= 1.0);
            }
        }
    }

    #[test]
    fn factored_examples() {
        let fam = PolynomialFamily::new(FamilyKind::ShiftedLegendre, 4).unwrap();
        assert_eq!(fam.eval_factored(0, 0.37).unwrap(), 1.0);
        assert_eq!(fam.eval_factored(1, 0.75).unwrap(), 0.25);
        assert!((fam.eval_factored(2, 0.5).unwrap() + 1.0 / 12.0).abs() < 1e-15);
        let mono = PolynomialFamily::new(FamilyKind::Monomial, 3).unwrap();
        assert_eq!(mono.eval_factored(3, 0.5).unwrap(), 0.125);
    }

    #[test]
    fn leading_coefficients() {
        let fam = PolynomialFamily::new(FamilyKind::ShiftedLegendre, 5).unwrap();
        let expect = [1.0, 2.0, 6.0, 20.0, 70.0, 252.0];
        for (n, e) in expect.iter().enumerate() {
            assert_eq!(fam.leading_coefficient(n).unwrap(), *e);
        }
    }

    #[test]
    fn tensor_examples() {
        let fam = PolynomialFamily::new(FamilyKind::ShiftedLegendre, 2).unwrap();
        let nu = |v: &[u32]| MultiIndex::new(v.to_vec());
        assert_eq!(fam.eval_tensor(&nu(&[0, 0]), &[0.3, 0.9]).unwrap(), 1.0);
        assert_eq!(fam.eval_tensor(&nu(&[1, 1]), &[0.75, 0.25]).unwrap(), -0.0625);
        assert!((fam.eval_tensor(&nu(&[2, 0]), &[0.5, 0.9]).unwrap() + 1.0 / 12.0).abs() < 1e-15);
        assert!(matches!(
            fam.eval_tensor(&nu(&[1, 1]), &[0.5]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn expansion_examples() {
        let b = BoundFunction::isotropic(1).unwrap();
        let one = enumerate_quasi_optimal(&b, 1).unwrap();
        let e = QuasiOptimalExpansion::new(one, vec![2.5], FamilyKind::ShiftedLegendre).unwrap();
        assert_eq!(e.eval(&[0.123]).unwrap(), 2.5);
        let two = enumerate_quasi_optimal(&b, 2).unwrap();
        let e = QuasiOptimalExpansion::new(two, vec![1.0, 1.0], FamilyKind::ShiftedLegendre).unwrap();
        assert_eq!(e.eval(&[0.75]).unwrap(), 1.25);
        assert!(e.eval(&[0.1, 0.2]).is_err());
    }

    #[test]
    fn synthetic_target_examples() {
        let b = BoundFunction::isotropic(1).unwrap();
        let t = synthetic_target(&b, FamilyKind::ShiftedLegendre, 0.5, 7).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.coefficients()[0].abs(), 1.0);

        let t = synthetic_target(&b, FamilyKind::ShiftedLegendre, 30.0, 7).unwrap();
        assert_eq!(t.len(), 31);
        for (k, (nu, c)) in t.terms().enumerate() {
            assert_eq!(nu.degrees(), &[k as u32]);
            assert!((c.abs() - (-(k as f64)).exp()).abs() < 1e-300 + 1e-16 * c.abs());
        }
        assert!(t.satisfies_bound(&b).unwrap());
        let again = synthetic_target(&b, FamilyKind::ShiftedLegendre, 30.0, 7).unwrap();
        assert_eq!(t, again);
        let other = synthetic_target(&b, FamilyKind::ShiftedLegendre, 30.0, 8).unwrap();
        assert_ne!(t.coefficients(), other.coefficients());
    }

    #[test]
    fn truncation_is_the_quasi_optimal_expansion() {
        let b = BoundFunction::taylor(vec![2.0, 3.0]).unwrap();
        let t = synthetic_target(&b, FamilyKind::ShiftedLegendre, 12.0, 1).unwrap();
        for m in [1usize, 5, 17, 40] {
            let q = t.truncate(m).unwrap();
            assert_eq!(q.index_set().indices(), enumerate_quasi_optimal(&b, m).unwrap().indices());
        }
    }

    /// Reverse-order compensated summation, independent of `eval_in`.
    fn kahan_reverse(e: &QuasiOptimalExpansion, y: &[f64]) -> f64 {
        let terms: Vec<_> = e.terms().collect();
        let (mut sum, mut comp) = (0.0f64, 0.0f64);
        for (nu, c) in terms.into_iter().rev() {
            let mut psi = 1.0;
            for (i, &k) in nu.degrees().iter().enumerate() {
                for r in roots(e.family().kind(), k as usize).unwrap() {
                    psi *= y[i] - r;
                }
            }
            let t = c * psi - comp;
            let s = sum + t;
            comp = (s - sum) - t;
            sum = s;
        }
        sum
    }

    #[test]
    fn expansion_matches_independent_summation() {
        let b = BoundFunction::isotropic(2).unwrap();
        let t = synthetic_target(&b, FamilyKind::ShiftedLegendre, 20.0, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let y = [rng.random::<f64>(), rng.random::<f64>()];
            let a = t.eval(&y).unwrap();
            let dd = t.eval_in::<TwoFloat>(&y).unwrap().to_f64();
            let k = kahan_reverse(&t, &y);
            assert!((a - k).abs() <= 1e-12 * k.abs().max(1e-3), "{a} vs {k}");
            assert!((dd - k).abs() <= 1e-12 * k.abs().max(1e-3));
        }
    }

    #[test]
    fn expansion_json_round_trip() {
        let b = BoundFunction::isotropic(2).unwrap();
        let t = synthetic_target(&b, FamilyKind::Monomial, 4.0, 2).unwrap();
        let s = t.to_json().unwrap();
        assert!(s.starts_with(r#"{"family":"monomial","d":2,"terms":[{"nu":[0,0],"c":"#));
        let back = QuasiOptimalExpansion::from_json(&s, &b).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn roots_csv_layout() {
        let fam = PolynomialFamily::new(FamilyKind::ShiftedLegendre, 2).unwrap();
        let mut buf = Vec::new();
        fam.write_roots_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "degree,index,root");
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[1], "1,0,5e-1");
    }
}
