//! Holomorphic sections of `O(l)` as homogeneous polynomials in `n + 1`
//! variables.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::atlas::{sample_fs_uniform_with, ChartPoint, HomogeneousPoint};
use crate::error::{Error, Result};
use crate::fubini_study::{in_best_chart, target_volume};
use crate::numeric::binomial;
use crate::picard::{hermitian_metric, PicardClass};
use crate::Parallelism;

/// Exponent tuple of a monomial in `Z^0, …, Z^n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn degree(&self) -> u64 {
        self.0.iter().map(|&e| e as u64).sum()
    }

    pub fn evaluate(&self, z: &[Complex64]) -> Complex64 {
        self.0
            .iter()
            .zip(z)
            .fold(Complex64::new(1.0, 0.0), |acc, (&e, zi)| acc * zi.powu(e))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|e| e.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// `dim H^0(CP^n, O(l))`: `binomial(n + l, n)` for `l ≥ 0`, zero otherwise.
pub fn dimension(n: usize, l: i64) -> u64 {
    if l < 0 {
        return 0;
    }
    binomial(n as u64 + l as u64, n as u64)
}

/// All degree-`l` exponent tuples of length `n + 1`, in decreasing
/// lexicographic order (`(l,0,…)` first).
pub fn enumerate_basis(n: usize, l: i64) -> Result<Vec<MultiIndex>> {
    if l < 0 {
        return Err(Error::NegativeDegree(l));
    }
    fn fill(rest: u32, slots: usize, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
        if slots == 1 {
            prefix.push(rest);
            out.push(MultiIndex(prefix.clone()));
            prefix.pop();
            return;
        }
        for e in (0..=rest).rev() {
            prefix.push(e);
            fill(rest - e, slots - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    fill(l as u32, n + 1, &mut Vec::with_capacity(n + 1), &mut out);
    Ok(out)
}

/// A degree-`l` homogeneous polynomial on `C^{n+1}`; the empty map is the
/// zero section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolynomialSection {
    n: usize,
    l: u32,
    coefficients: BTreeMap<MultiIndex, Complex64>,
}

impl PolynomialSection {
    pub fn zero(n: usize, l: u32) -> Self {
        Self {
            n,
            l,
            coefficients: BTreeMap::new(),
        }
    }

    pub fn monomial(alpha: MultiIndex) -> Result<Self> {
        let n = alpha
            .0
            .len()
            .checked_sub(1)
            .ok_or_else(|| Error::InvalidArgument("empty multi-index".into()))?;
        let l = alpha.degree() as u32;
        let mut s = Self::zero(n, l);
        s.coefficients.insert(alpha, Complex64::new(1.0, 0.0));
        Ok(s)
    }

    /// Adds `coefficient · Z^alpha`.
    pub fn with_term(mut self, alpha: MultiIndex, coefficient: Complex64) -> Result<Self> {
        if alpha.0.len() != self.n + 1 {
            return Err(Error::DimensionMismatch {
                expected: self.n + 1,
                got: alpha.0.len(),
            });
        }
        if alpha.degree() != self.l as u64 {
            return Err(Error::InvalidArgument(format!(
                "{alpha} does not have degree {}",
                self.l
            )));
        }
        *self
            .coefficients
            .entry(alpha)
            .or_insert(Complex64::new(0.0, 0.0)) += coefficient;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> u32 {
        self.l
    }

    pub fn picard_class(&self) -> PicardClass {
        PicardClass(self.l as i64)
    }

    pub fn coefficients(&self) -> &BTreeMap<MultiIndex, Complex64> {
        &self.coefficients
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.values().all(|c| c.norm_sqr() == 0.0)
    }

    /// `P(Z)` on homogeneous coordinates.
    pub fn evaluate(&self, z: &[Complex64]) -> Complex64 {
        self.coefficients
            .iter()
            .map(|(a, c)| c * a.evaluate(z))
            .sum()
    }
}

/// `P(Z) / (Z^k)^l` at a point of chart `k`.
pub fn local_representative(s: &PolynomialSection, p: &ChartPoint) -> Result<Complex64> {
    if p.n() != s.n {
        return Err(Error::DimensionMismatch {
            expected: s.n,
            got: p.n(),
        });
    }
    // The lift has Z^k = 1, so the division is trivial.
    Ok(s.evaluate(p.lift().coords()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InnerProductEstimate {
    pub value: Complex64,
    pub std_error: f64,
    pub samples: usize,
}

/// Integrand `h · conj(s1) · s2` at a point, evaluated in its best chart.
fn pointwise(s1: &PolynomialSection, s2: &PolynomialSection, p: &HomogeneousPoint) -> Complex64 {
    let cp = in_best_chart(p);
    let a = s1.evaluate(cp.lift().coords());
    let b = s2.evaluate(cp.lift().coords());
    hermitian_metric(s1.picard_class(), &cp) * a.conj() * b
}

/// Monte Carlo estimate of `⟨s1, s2⟩ = ∫ h · conj(s1) · s2 (s·ω_FS)^n`,
/// conjugate-linear in the first slot.
///
/// Samples are Fubini–Study uniform, and the normalized volume is `n + 1`,
/// so the estimate is `(n + 1)` times the sample mean.
pub fn l2_inner_product(
    s1: &PolynomialSection,
    s2: &PolynomialSection,
    samples: usize,
    seed: u64,
) -> Result<InnerProductEstimate> {
    let g = gram_matrix(
        &[s1.clone(), s2.clone()],
        samples,
        seed,
        Parallelism::Threads,
    )?;
    Ok(g[0][1])
}

/// All pairwise inner products from one shared sample set.
pub fn gram_matrix(
    sections: &[PolynomialSection],
    samples: usize,
    seed: u64,
    mode: Parallelism,
) -> Result<Vec<Vec<InnerProductEstimate>>> {
    let Some(first) = sections.first() else {
        return Ok(Vec::new());
    };
    let (n, l) = (first.n, first.l);
    if let Some(bad) = sections.iter().find(|s| s.n != n || s.l != l) {
        return Err(Error::InvalidArgument(format!(
            "sections of O({}) on CP^{} and O({}) on CP^{} cannot be paired",
            l, n, bad.l, bad.n
        )));
    }
    if samples < 2 {
        return Err(Error::InvalidArgument(
            "at least two samples are needed".into(),
        ));
    }
    let points = sample_fs_uniform_with(n, samples, seed, mode);
    let total = target_volume(n);
    let m = samples as f64;
    let k = sections.len();
    let mut out = vec![
        vec![
            InnerProductEstimate {
                value: Complex64::new(0.0, 0.0),
                std_error: 0.0,
                samples
            };
            k
        ];
        k
    ];
    for i in 0..k {
        for j in 0..k {
            let (mut sum, mut sq, mut abs_sum) = (Complex64::new(0.0, 0.0), 0.0, 0.0);
            for p in &points {
                let v = pointwise(&sections[i], &sections[j], p);
                sum += v;
                sq += v.norm_sqr();
                abs_sum += v.norm();
            }
            let mean = sum / m;
            let var = ((sq - m * mean.norm_sqr()) / (m - 1.0)).max(0.0);
            let std_error = total * (var / m).sqrt();
            let scale = total * abs_sum / m;
            if std_error > 0.1 * scale {
                return Err(Error::InsufficientSamples {
                    value: scale,
                    std_error,
                });
            }
            out[i][j] = InnerProductEstimate {
                value: mean * total,
                std_error,
                samples,
            };
        }
    }
    Ok(out)
}

/// One integer identity checked by [`rep_dimension_checks`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    pub lhs: u64,
    pub rhs: u64,
    pub pass: bool,
}

/// Dimension of the `(p, q)` irreducible representation of SU(3).
pub fn su3_dimension(p: u64, q: u64) -> u64 {
    (p + 1) * (q + 1) * (p + q + 2) / 2
}

/// Integer identities linking `dim H^0(CP^n, O(l))` to representation
/// dimensions. Identities that do not apply to `n` are omitted.
pub fn rep_dimension_checks(n: usize, l: i64) -> Result<Vec<IdentityCheck>> {
    if l < 0 {
        return Err(Error::NegativeDegree(l));
    }
    let d = dimension(n, l);
    let mut checks = Vec::new();
    let mut push = |name: &str, lhs: u64, rhs: u64| {
        checks.push(IdentityCheck {
            name: name.to_string(),
            lhs,
            rhs,
            pass: lhs == rhs,
        });
    };
    // Stars and bars: size-n multisets drawn from l + 1 symbols.
    let mut multisets = vec![1u64; l as usize + 1];
    for _ in 0..n {
        for s in 1..multisets.len() {
            multisets[s] += multisets[s - 1];
        }
    }
    push(
        "basis size = binomial(n+l, n)",
        enumerate_basis(n, l)?.len() as u64,
        d,
    );
    push(
        "multisets of size n from l+1 symbols",
        multisets[l as usize],
        d,
    );
    if n == 1 {
        push("n = 1: dimension = l + 1", d, l as u64 + 1);
    }
    if n == 2 {
        push("n = 2: dimension = d(0, l)", d, su3_dimension(0, l as u64));
        push("n = 2: dimension = d(l, 0)", d, su3_dimension(l as u64, 0));
    }
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mi(e: &[u32]) -> MultiIndex {
        MultiIndex(e.to_vec())
    }

    #[test]
    fn dimension_examples() {
        assert_eq!(dimension(1, 3), 4);
        assert_eq!(dimension(5, 0), 1);
        assert_eq!(dimension(2, -1), 0);
        assert_eq!(dimension(2, 1), 3);
    }

    #[test]
    fn basis_examples() {
        assert_eq!(
            enumerate_basis(1, 2).unwrap(),
            vec![mi(&[2, 0]), mi(&[1, 1]), mi(&[0, 2])]
        );
        assert_eq!(
            enumerate_basis(2, 1).unwrap(),
            vec![mi(&[1, 0, 0]), mi(&[0, 1, 0]), mi(&[0, 0, 1])]
        );
        assert_eq!(enumerate_basis(1, 0).unwrap(), vec![mi(&[0, 0])]);
        assert_eq!(enumerate_basis(1, -1), Err(Error::NegativeDegree(-1)));
    }

    #[test]
    fn local_representative_examples() {
        let s = PolynomialSection::monomial(mi(&[3, 0])).unwrap();
        let p = ChartPoint::new(0, vec![Complex64::new(-0.4, 2.0)]).unwrap();
        assert_eq!(
            local_representative(&s, &p).unwrap(),
            Complex64::new(1.0, 0.0)
        );

        let s = PolynomialSection::monomial(mi(&[1, 1])).unwrap();
        let p = ChartPoint::new(0, vec![Complex64::new(3.0, 0.0)]).unwrap();
        assert_eq!(
            local_representative(&s, &p).unwrap(),
            Complex64::new(3.0, 0.0)
        );
    }

    #[test]
    fn with_term_validates_degree() {
        let s = PolynomialSection::zero(1, 2);
        assert!(s
            .clone()
            .with_term(mi(&[1, 0]), Complex64::new(1.0, 0.0))
            .is_err());
        assert!(s
            .with_term(mi(&[1, 0, 1]), Complex64::new(1.0, 0.0))
            .is_err());
    }

    #[test]
    fn zero_section_pairs_to_zero() {
        let z = PolynomialSection::zero(1, 2);
        let s = PolynomialSection::monomial(mi(&[1, 1])).unwrap();
        let ip = l2_inner_product(&z, &s, 1000, 3).unwrap();
        assert_eq!(ip.value, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn norm_is_real_positive_and_hermitian() {
        let s = PolynomialSection::monomial(mi(&[2, 0]))
            .unwrap()
            .with_term(mi(&[1, 1]), Complex64::new(0.5, -1.0))
            .unwrap();
        let t = PolynomialSection::monomial(mi(&[0, 2])).unwrap();
        let g = gram_matrix(&[s.clone(), t], 20_000, 8, Parallelism::Threads).unwrap();
        assert!(g[0][0].value.re > 0.0 && g[0][0].value.im.abs() < 1e-15);
        assert!((g[0][1].value - g[1][0].value.conj()).norm() < 1e-14);
    }

    #[test]
    fn rep_checks_examples() {
        let r = rep_dimension_checks(2, 2).unwrap();
        assert!(r.iter().all(|c| c.pass));
        assert!(r.iter().any(|c| c.name.contains("d(0, l)") && c.rhs == 6));
        let r = rep_dimension_checks(1, 7).unwrap();
        assert!(r.iter().all(|c| c.pass) && r.iter().any(|c| c.lhs == 8 && c.rhs == 8));
        assert!(rep_dimension_checks(3, 0).unwrap().iter().all(|c| c.pass));
    }

    #[test]
    fn su3_dimensions() {
        assert_eq!(su3_dimension(0, 2), 6);
        assert_eq!(su3_dimension(1, 1), 8);
    }
}
