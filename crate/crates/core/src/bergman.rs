//! Truncated Bergman kernels and the embedding into projective space.
//!
//! Two models are supported: the unit disc with orthonormal basis
//! `sqrt((m+1)/π) z^m` (kernel `1 / (π (1 − z w̄)²)` in the limit) and `C^n`
//! with Gaussian weight `π^{-n} e^{-|z|²}`, basis `z^α / sqrt(α!)` (kernel
//! `π^{-n} e^{z·w̄}`). A model keeps the first `M` elementary functions,
//! optionally mixed by a matrix `C`, so `h = C e`.
//!
//! The kernel form is carried as its scalar density `k` in the coordinate
//! frame; metrics only consume `log k`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fubini_study::{fs_metric, MetricValue};
use crate::numeric::{
    composite_legendre, gauss_legendre, max_abs, mixed_hessian, mixed_hessian_with_step,
    serialize_cmatrix, wirtinger_jacobians, Stencil,
};
use crate::sections::{enumerate_basis, MultiIndex};
use crate::{CMatrix, ChartPoint};

/// Default number of retained basis functions.
pub const DEFAULT_TRUNCATION: usize = 80;

/// Diagonal kernel values below this count as vanishing.
pub const KERNEL_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    UnitDisc,
    ComplexSpace { n: usize },
}

impl Domain {
    pub fn dim(self) -> usize {
        match self {
            Domain::UnitDisc => 1,
            Domain::ComplexSpace { n } => n,
        }
    }

    fn check(self, z: &[Complex64]) -> Result<()> {
        if z.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: z.len(),
            });
        }
        if self == Domain::UnitDisc && z[0].norm() >= 1.0 {
            return Err(Error::DomainViolation(format!(
                "|z| = {} is outside the unit disc",
                z[0].norm()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelModel {
    domain: Domain,
    exponents: Vec<MultiIndex>,
    norms: Vec<f64>,
    mixing: Option<CMatrix>,
}

fn ln_factorial(k: u32) -> f64 {
    (2..=k).map(|i| (i as f64).ln()).sum()
}

impl KernelModel {
    pub fn disc(truncation: usize) -> Result<Self> {
        if truncation == 0 {
            return Err(Error::InvalidArgument("truncation must be positive".into()));
        }
        let exponents = (0..truncation as u32)
            .map(|m| MultiIndex(vec![m]))
            .collect();
        let norms = (0..truncation)
            .map(|m| ((m + 1) as f64 / PI).sqrt())
            .collect();
        Ok(Self {
            domain: Domain::UnitDisc,
            exponents,
            norms,
            mixing: None,
        })
    }

    /// First `truncation` monomials on `C^n` ordered by total degree.
    pub fn complex_space(n: usize, truncation: usize) -> Result<Self> {
        if n == 0 || truncation == 0 {
            return Err(Error::InvalidArgument(
                "dimension and truncation must be positive".into(),
            ));
        }
        let mut exponents = Vec::with_capacity(truncation);
        let mut degree = 0;
        while exponents.len() < truncation {
            for alpha in enumerate_basis(n - 1, degree)? {
                if exponents.len() == truncation {
                    break;
                }
                exponents.push(alpha);
            }
            degree += 1;
        }
        let norms = exponents
            .iter()
            .map(|a: &MultiIndex| {
                let ln_fact: f64 = a.0.iter().map(|&e| ln_factorial(e)).sum();
                (-0.5 * (ln_fact + n as f64 * PI.ln())).exp()
            })
            .collect();
        Ok(Self {
            domain: Domain::ComplexSpace { n },
            exponents,
            norms,
            mixing: None,
        })
    }

    /// Replaces the basis by `h_i = Σ_a C[(i, a)] e_a`.
    pub fn with_mixing(mut self, c: CMatrix) -> Result<Self> {
        let m = self.truncation();
        if c.nrows() != m || c.ncols() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: c.nrows(),
            });
        }
        self.mixing = Some(c);
        Ok(self)
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn truncation(&self) -> usize {
        self.exponents.len()
    }

    fn elementary(&self, z: &[Complex64]) -> Vec<Complex64> {
        self.exponents
            .iter()
            .zip(&self.norms)
            .map(|(a, c)| a.evaluate(z) * c)
            .collect()
    }

    /// `h_j(z)` for all retained `j`, without domain checks.
    pub fn basis_values(&self, z: &[Complex64]) -> Vec<Complex64> {
        let e = self.elementary(z);
        match &self.mixing {
            None => e,
            Some(c) => (c * crate::CVector::from_vec(e)).iter().copied().collect(),
        }
    }

    fn diagonal_unchecked(&self, z: &[Complex64]) -> f64 {
        self.basis_values(z).iter().map(|h| h.norm_sqr()).sum()
    }
}

/// `Σ_j h_j(z) conj(h_j(w))`.
pub fn kernel_at(model: &KernelModel, z: &[Complex64], w: &[Complex64]) -> Result<Complex64> {
    model.domain.check(z)?;
    model.domain.check(w)?;
    let hz = model.basis_values(z);
    let hw = model.basis_values(w);
    Ok(hz.iter().zip(&hw).map(|(a, b)| a * b.conj()).sum())
}

/// The untruncated kernel density.
pub fn exact_kernel(domain: Domain, z: &[Complex64], w: &[Complex64]) -> Result<Complex64> {
    domain.check(z)?;
    domain.check(w)?;
    Ok(match domain {
        Domain::UnitDisc => {
            let d = Complex64::new(1.0, 0.0) - z[0] * w[0].conj();
            1.0 / (PI * d * d)
        }
        Domain::ComplexSpace { n } => {
            let s: Complex64 = z.iter().zip(w).map(|(a, b)| a * b.conj()).sum();
            s.exp() / PI.powi(n as i32)
        }
    })
}

/// Log-Hessian of `k(z, z)` by central differences.
pub fn bergman_metric(model: &KernelModel, z: &[Complex64]) -> Result<MetricValue> {
    model.domain.check(z)?;
    let k = model.diagonal_unchecked(z);
    if k < KERNEL_FLOOR {
        return Err(Error::KernelVanishes { value: k });
    }
    Ok(MetricValue {
        g: mixed_hessian(|w| model.diagonal_unchecked(w).ln(), z),
    })
}

/// Bergman metric of the untruncated kernel: `2 / (1 − |z|²)²` on the disc,
/// the identity on `C^n`.
pub fn limit_metric(domain: Domain, z: &[Complex64]) -> Result<MetricValue> {
    domain.check(z)?;
    Ok(MetricValue {
        g: match domain {
            Domain::UnitDisc => {
                let q = 1.0 - z[0].norm_sqr();
                CMatrix::from_element(1, 1, Complex64::new(2.0 / (q * q), 0.0))
            }
            Domain::ComplexSpace { n } => CMatrix::identity(n, n),
        },
    })
}

/// Homogeneous coordinates `conj(h_j(z))` of the embedded point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmbeddedPoint {
    pub coords: Vec<Complex64>,
}

impl EmbeddedPoint {
    /// `sqrt(1 − |⟨u, v⟩|² / (|u|² |v|²))`; zero iff the points coincide in
    /// projective space.
    pub fn projective_distance(&self, other: &EmbeddedPoint) -> f64 {
        let dot: Complex64 = self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| a.conj() * b)
            .sum();
        let nu: f64 = self.coords.iter().map(|c| c.norm_sqr()).sum();
        let nv: f64 = other.coords.iter().map(|c| c.norm_sqr()).sum();
        (1.0 - dot.norm_sqr() / (nu * nv)).max(0.0).sqrt()
    }

    /// Index of the largest-modulus component.
    pub fn dominant_index(&self) -> usize {
        self.coords
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .map(|(i, _)| i)
            .unwrap_or(0)
    }
}

pub fn embed(model: &KernelModel, z: &[Complex64]) -> Result<EmbeddedPoint> {
    model.domain.check(z)?;
    let coords: Vec<Complex64> = model.basis_values(z).iter().map(|h| h.conj()).collect();
    let k: f64 = coords.iter().map(|c| c.norm_sqr()).sum();
    if k < KERNEL_FLOOR {
        return Err(Error::KernelVanishes { value: k });
    }
    Ok(EmbeddedPoint { coords })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PullbackReport {
    pub point: Vec<Complex64>,
    /// Pullback of the Fubini–Study metric of `CP^{M−1}` through the
    /// embedding.
    #[serde(serialize_with = "serialize_cmatrix")]
    pub lhs: CMatrix,
    /// Bergman metric of the untruncated kernel.
    #[serde(serialize_with = "serialize_cmatrix")]
    pub rhs: CMatrix,
    /// `max |lhs − rhs| / max |rhs|`.
    pub deviation: f64,
    pub truncation: usize,
    /// Log-Hessian of the truncated kernel and its distance to `lhs`.
    #[serde(serialize_with = "serialize_cmatrix")]
    pub truncated_metric: CMatrix,
    pub truncated_deviation: f64,
}

/// Compares `ι*(ds²_FS)` with the Bergman metric at `z`.
///
/// The embedding is antiholomorphic, so with `dw = A dz + B dz̄` in the
/// affine chart of the dominant component, the pulled-back coefficients are
/// `A^H G A + (B^H G B)^T`.
pub fn pullback_check(model: &KernelModel, z: &[Complex64]) -> Result<PullbackReport> {
    let m = model.truncation();
    if m < 2 {
        return Err(Error::InvalidArgument(
            "pullback needs truncation >= 2".into(),
        ));
    }
    let a = embed(model, z)?.dominant_index();
    let chart_coords = |w: &[Complex64]| -> Vec<Complex64> {
        let v = model.basis_values(w);
        let va = v[a].conj();
        v.iter()
            .enumerate()
            .filter(|(j, _)| *j != a)
            .map(|(_, h)| h.conj() / va)
            .collect()
    };
    let base = ChartPoint::new(a, chart_coords(z))?;
    let g = fs_metric(&base).g;
    let (da, db) = wirtinger_jacobians(chart_coords, z, Stencil::Central5);
    let lhs = da.adjoint() * &g * &da + (db.adjoint() * &g * &db).transpose();
    let rhs = limit_metric(model.domain, z)?.g;
    let truncated = bergman_metric(model, z)?.g;
    Ok(PullbackReport {
        point: z.to_vec(),
        deviation: max_abs(&(&lhs - &rhs)) / max_abs(&rhs),
        truncated_deviation: max_abs(&(&lhs - &truncated)) / max_abs(&truncated),
        lhs,
        rhs,
        truncation: m,
        truncated_metric: truncated,
    })
}

/// `∫ e_a conj(e_b)` for the elementary functions, by quadrature that is
/// exact (disc) or converged to rounding (Gaussian weight).
fn elementary_gram(model: &KernelModel) -> CMatrix {
    let m = model.truncation();
    let max_exp = model
        .exponents
        .iter()
        .flat_map(|a| a.0.iter().copied())
        .max()
        .unwrap_or(0) as usize;
    // Trapezoid in θ integrates e^{idθ} exactly for |d| < count.
    let theta_count = 2 * max_exp + 2;
    let angular = |d: i64| -> Complex64 {
        let step = 2.0 * PI / theta_count as f64;
        (0..theta_count)
            .map(|j| Complex64::from_polar(step, d as f64 * j as f64 * step))
            .sum()
    };
    // Radial nodes with the domain's weight folded into the quadrature weights.
    let (rs, ws) = match model.domain {
        Domain::UnitDisc => gauss_legendre(max_exp + 2, 0.0, 1.0),
        Domain::ComplexSpace { .. } => {
            let rmax = ((max_exp + 1) as f64).sqrt() + 8.0;
            let (r, w) = composite_legendre(0.0, rmax, (rmax * 4.0).ceil() as usize, 12);
            let w = r.iter().zip(&w).map(|(r, w)| w * (-r * r).exp()).collect();
            (r, w)
        }
    };
    let radial = |k: u32| -> f64 {
        rs.iter()
            .zip(&ws)
            .map(|(r, w)| w * r.powi(k as i32 + 1))
            .sum()
    };
    let ang: Vec<Complex64> = (0..=2 * max_exp)
        .map(|i| angular(i as i64 - max_exp as i64))
        .collect();
    let rad: Vec<f64> = (0..=2 * max_exp as u32).map(radial).collect();
    CMatrix::from_fn(m, m, |i, j| {
        let (a, b) = (&model.exponents[i], &model.exponents[j]);
        let mut v = Complex64::new(model.norms[i] * model.norms[j], 0.0);
        for (&ea, &eb) in a.0.iter().zip(&b.0) {
            v *= rad[(ea + eb) as usize] * ang[(ea as i64 - eb as i64 + max_exp as i64) as usize];
        }
        v
    })
}

/// `⟨h_i, h_j⟩` under the domain's inner product, by quadrature.
pub fn gram_matrix(model: &KernelModel) -> CMatrix {
    let e = elementary_gram(model);
    match &model.mixing {
        None => e,
        Some(c) => c * e * c.adjoint(),
    }
}

/// `max |G − I|` of [`gram_matrix`].
pub fn gram_defect(model: &KernelModel) -> f64 {
    let g = gram_matrix(model);
    max_abs(&(&g - CMatrix::identity(g.nrows(), g.ncols())))
}

/// Haar-random unitary from the QR factorization of a complex Gaussian
/// matrix, with the phases of `R`'s diagonal absorbed.
pub fn random_unitary(m: usize, seed: u64) -> CMatrix {
    let mut rng = crate::rng::substream(seed, 0);
    let mut draw = || {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        Complex64::new(re, im)
    };
    let g = DMatrix::from_fn(m, m, |_, _| draw());
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let phases = CMatrix::from_diagonal(&nalgebra::DVector::from_fn(m, |i, _| {
        let d = r[(i, i)];
        if d.norm() > 0.0 {
            d / d.norm()
        } else {
            Complex64::new(1.0, 0.0)
        }
    }));
    q * phases
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropagatorReport {
    pub n: usize,
    pub point: Vec<Complex64>,
    /// Log-Hessian of `exp(Σ z̄ z)`, which is the identity.
    #[serde(serialize_with = "serialize_cmatrix")]
    pub analytic: CMatrix,
    #[serde(serialize_with = "serialize_cmatrix")]
    pub finite_difference: CMatrix,
    pub fd_defect: f64,
    /// Log-modulus Hessian of the imaginary-exponent density
    /// `exp(i Σ z̄ z)`: identically zero, so it cannot give a metric.
    #[serde(serialize_with = "serialize_cmatrix")]
    pub imaginary_exponent_metric: CMatrix,
    pub imaginary_exponent_deviation: f64,
    pub pass: bool,
}

/// Tolerance for the finite-difference check of the `C^n` metric.
pub const PROPAGATOR_TOLERANCE: f64 = 1e-8;

/// Metric of the Gaussian-weight kernel on `C^n` at `z`.
///
/// `log k` is quadratic, so central differences have no truncation error;
/// a step of order `0.1 (1 + |z|)` keeps rounding well below the
/// tolerance.
pub fn propagator_metric_cn(n: usize, z: &[Complex64]) -> Result<PropagatorReport> {
    if z.len() != n || n == 0 {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: z.len(),
        });
    }
    let h = 0.1 * (1.0 + crate::numeric::norm(z));
    let s = |w: &[Complex64]| -> f64 { w.iter().map(|c| c.norm_sqr()).sum() };
    let fd = mixed_hessian_with_step(|w| s(w).exp().ln(), z, h);
    let imag = mixed_hessian_with_step(|w| Complex64::new(0.0, s(w)).exp().norm().ln(), z, h);
    let analytic = CMatrix::identity(n, n);
    let fd_defect = max_abs(&(&fd - &analytic));
    Ok(PropagatorReport {
        n,
        point: z.to_vec(),
        imaginary_exponent_deviation: max_abs(&(&imag - &analytic)),
        imaginary_exponent_metric: imag,
        finite_difference: fd,
        fd_defect,
        analytic,
        pass: fd_defect < PROPAGATOR_TOLERANCE,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn kernel_examples() {
        for m in [1, 5, 80] {
            let model = KernelModel::disc(m).unwrap();
            let k = kernel_at(&model, &[c(0.0, 0.0)], &[c(0.0, 0.0)]).unwrap();
            assert!((k - c(1.0 / PI, 0.0)).norm() < 1e-15);
        }
        let model = KernelModel::disc(80).unwrap();
        let z = [c(0.3, 0.4)];
        let k = kernel_at(&model, &z, &z).unwrap();
        // Σ (m+1) x^m = (1 − x)^{-2}
        assert!((k.re - 1.0 / (PI * 0.75 * 0.75)).abs() < 1e-6);
        let k2 = kernel_at(&KernelModel::disc(160).unwrap(), &z, &z).unwrap();
        assert!((k2 - k).norm() < 1e-9);
    }

    #[test]
    fn domain_violations() {
        let model = KernelModel::disc(10).unwrap();
        assert!(matches!(
            kernel_at(&model, &[c(1.0, 0.0)], &[c(0.0, 0.0)]),
            Err(Error::DomainViolation(_))
        ));
        assert!(matches!(
            bergman_metric(&model, &[c(0.0, 1.2)]),
            Err(Error::DomainViolation(_))
        ));
    }

    #[test]
    fn metric_examples() {
        let g0 = bergman_metric(&KernelModel::disc(80).unwrap(), &[c(0.0, 0.0)]).unwrap();
        assert!((g0.g[(0, 0)].re - 2.0).abs() < 1e-6);
        let g = bergman_metric(&KernelModel::disc(120).unwrap(), &[c(0.5, 0.0)]).unwrap();
        assert!((g.g[(0, 0)].re - 2.0 / 0.5625).abs() < 1e-5);
    }

    #[test]
    fn kernel_vanishing_detected() {
        // h = e_1 only: k(0, 0) = 0.
        let mut c1 = CMatrix::zeros(2, 2);
        c1[(0, 1)] = c(1.0, 0.0);
        c1[(1, 1)] = c(0.0, 0.0);
        let model = KernelModel::disc(2).unwrap().with_mixing(c1).unwrap();
        assert!(matches!(
            bergman_metric(&model, &[c(0.0, 0.0)]),
            Err(Error::KernelVanishes { .. })
        ));
        assert!(matches!(
            embed(&model, &[c(0.0, 0.0)]),
            Err(Error::KernelVanishes { .. })
        ));
    }

    #[test]
    fn embedding_at_origin() {
        let e = embed(&KernelModel::disc(80).unwrap(), &[c(0.0, 0.0)]).unwrap();
        assert!((e.coords[0] - c((1.0 / PI).sqrt(), 0.0)).norm() < 1e-15);
        assert!(e.coords[1..].iter().all(|x| x.norm() == 0.0));
    }

    #[test]
    fn pullback_examples() {
        let r = pullback_check(&KernelModel::disc(80).unwrap(), &[c(0.0, 0.0)]).unwrap();
        assert!(r.deviation < 1e-4, "{}", r.deviation);
        let r = pullback_check(&KernelModel::disc(120).unwrap(), &[c(0.3, -0.4)]).unwrap();
        assert!(r.deviation < 1e-3, "{}", r.deviation);
        // Same truncated model on both sides: agreement up to differencing.
        assert!(r.truncated_deviation < 1e-5, "{}", r.truncated_deviation);
    }

    #[test]
    fn gram_is_identity() {
        assert!(gram_defect(&KernelModel::disc(120).unwrap()) < 1e-10);
        assert!(gram_defect(&KernelModel::complex_space(1, 60).unwrap()) < 1e-10);
        assert!(gram_defect(&KernelModel::complex_space(2, 45).unwrap()) < 1e-10);
        let u = random_unitary(30, 9);
        assert!(gram_defect(&KernelModel::disc(30).unwrap().with_mixing(u).unwrap()) < 1e-10);
    }

    #[test]
    fn fock_kernel_limit() {
        let model = KernelModel::complex_space(2, 231).unwrap(); // total degree ≤ 20
        let z = [c(0.3, 0.1), c(-0.2, 0.5)];
        let w = [c(0.1, -0.4), c(0.6, 0.0)];
        let k = kernel_at(&model, &z, &w).unwrap();
        assert!((k - exact_kernel(model.domain(), &z, &w).unwrap()).norm() < 1e-12);
        let g = bergman_metric(&model, &z).unwrap();
        assert!(max_abs(&(g.g - CMatrix::identity(2, 2))) < 1e-6);
    }

    #[test]
    fn propagator_examples() {
        let r = propagator_metric_cn(1, &[c(0.0, 0.0)]).unwrap();
        assert!(r.pass && r.fd_defect < 1e-8);
        let r = propagator_metric_cn(2, &[c(1.0, 1.0), c(2.0, 0.0)]).unwrap();
        assert!(r.pass, "{}", r.fd_defect);
        assert_eq!(r.analytic, CMatrix::identity(2, 2));
        assert!(max_abs(&r.imaginary_exponent_metric) < 1e-8);
        assert!((r.imaginary_exponent_deviation - 1.0).abs() < 1e-8);
    }
}
