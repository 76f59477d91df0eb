//! Fubini–Study geometry: Kähler potential, metric, and normalized volume.
//!
//! Conventions: `ω_FS = (i/2) ∂∂̄K` with `K = log(1 + |z|²)`, so the volume
//! form `ω_FS^n` integrates `det g` against Lebesgue measure on a chart and
//! `∫_{CP^1} ω_FS = π`. The normalized form is `s·ω_FS` with the scale `s`
//! chosen so that `∫ (s·ω_FS)^n = n + 1`.

use std::f64::consts::PI;

use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::atlas::{ChartPoint, HomogeneousPoint};
use crate::error::{Error, Result};
use crate::numeric::gauss_legendre;
use crate::{rng, CMatrix, Parallelism};

/// Target total volume `∫ ω^n` for CP^n.
pub fn target_volume(n: usize) -> f64 {
    (n + 1) as f64
}

pub fn kahler_potential(p: &ChartPoint) -> f64 {
    p.norm_sqr().ln_1p()
}

/// Hermitian metric at a chart point.
///
/// Entry `(a, b)` of `g` is `∂²K / ∂z̄_a ∂z_b`; the squared length of a
/// tangent vector `ξ` is `ξ^H g ξ`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricValue {
    pub g: CMatrix,
}

impl MetricValue {
    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        crate::numeric::max_abs(&(&self.g - self.g.adjoint()))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let sym = (&self.g + self.g.adjoint()) * Complex64::new(0.5, 0.0);
        SymmetricEigen::new(sym)
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_positive_definite(&self) -> bool {
        self.min_eigenvalue() > 0.0
    }

    pub fn norm_sqr(&self, xi: &[Complex64]) -> f64 {
        let v = crate::CVector::from_column_slice(xi);
        (v.adjoint() * &self.g * v)[(0, 0)].re
    }

    pub fn determinant(&self) -> f64 {
        self.g.determinant().re
    }
}

/// Closed-form mixed Hessian of [`kahler_potential`].
pub fn fs_metric(p: &ChartPoint) -> MetricValue {
    let z = p.coords();
    let n = z.len();
    let q = 1.0 + p.norm_sqr();
    let g = CMatrix::from_fn(n, n, |a, b| {
        let delta = if a == b { 1.0 / q } else { 0.0 };
        Complex64::new(delta, 0.0) - z[a] * z[b].conj() / (q * q)
    });
    MetricValue { g }
}

/// `det g = (1 + |z|²)^{-(n+1)}`: density of `ω_FS^n` against Lebesgue
/// measure on the chart.
pub fn volume_density(p: &ChartPoint) -> f64 {
    (1.0 + p.norm_sqr()).powi(-(p.n() as i32 + 1))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolumeEstimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: usize,
    /// Scale applied to `ω_FS` (1 for raw estimates).
    pub scale: f64,
}

/// A uniform point of the unit polydisc in chart `k`.
fn polydisc_point(n: usize, r: &mut impl Rng) -> (usize, ChartPoint) {
    let k = r.random_range(0..=n);
    let z = (0..n)
        .map(|_| {
            let radius = r.random::<f64>().sqrt();
            Complex64::from_polar(radius, 2.0 * PI * r.random::<f64>())
        })
        .collect();
    (k, ChartPoint::new(k, z).expect("chart index in range"))
}

/// Monte Carlo estimate of `∫ f ω_FS^n`.
///
/// CP^n is the union of the n+1 closed polydiscs `{|z_(k)| ≤ 1}` (the region
/// where `Z^k` has the largest modulus), overlapping in measure zero. Each
/// sample picks a chart uniformly and a uniform point of its polydisc, with
/// weight `(n+1) π^n det g`.
fn raw_integral<F>(
    n: usize,
    f: &F,
    samples: usize,
    seed: u64,
    mode: Parallelism,
) -> Result<(f64, f64)>
where
    F: Fn(&ChartPoint) -> Result<f64> + Sync,
{
    if samples == 0 {
        return Err(Error::InvalidArgument("samples must be at least 1".into()));
    }
    let weight = (n + 1) as f64 * PI.powi(n as i32);
    let values = rng::map_samples(samples, seed, mode, |_, r| {
        let (_, p) = polydisc_point(n, r);
        f(&p).map(|v| weight * v * volume_density(&p))
    });
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for v in values {
        let v = v?;
        sum += v;
        sum_sq += v * v;
    }
    let m = samples as f64;
    let mean = sum / m;
    // A single sample carries no spread information.
    let var = if samples > 1 {
        ((sum_sq - m * mean * mean) / (m - 1.0)).max(0.0)
    } else {
        f64::INFINITY
    };
    Ok((mean, (var / m).sqrt()))
}

/// Raw Monte Carlo estimate of `∫_{CP^n} ω_FS^n` (exact value `π^n / n!`).
pub fn fs_volume(n: usize, samples: usize, seed: u64, mode: Parallelism) -> Result<VolumeEstimate> {
    let (value, std_error) = raw_integral(n, &|_: &ChartPoint| Ok(1.0), samples, seed, mode)?;
    Ok(VolumeEstimate {
        value,
        std_error,
        samples,
        scale: 1.0,
    })
}

/// Scale `s` with `∫ (s·ω_FS)^n = n + 1`, from a Monte Carlo volume.
pub fn normalization_constant(n: usize, samples: usize, seed: u64) -> Result<f64> {
    normalization_with(n, samples, seed, Parallelism::Threads).map(|(s, _)| s)
}

/// Scale together with the volume estimate it was derived from.
pub fn normalization_with(
    n: usize,
    samples: usize,
    seed: u64,
    mode: Parallelism,
) -> Result<(f64, VolumeEstimate)> {
    if n == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    let vol = fs_volume(n, samples, seed, mode)?;
    if vol.std_error.is_nan() || vol.std_error > 0.1 * vol.value {
        return Err(Error::InsufficientSamples {
            value: vol.value,
            std_error: vol.std_error,
        });
    }
    let s = (target_volume(n) / vol.value).powf(1.0 / n as f64);
    Ok((s, vol))
}

/// Gauss–Legendre × trapezoid quadrature over the standard line
/// `Z = (Z^1, Z^2, 0, …, 0)` of CP^n.
///
/// `density(p)` must be the integrand's density against `dx dy` of the first
/// affine coordinate of `p`. Each hemisphere is integrated in its own chart
/// (chart 0 for `|Z^2| ≤ |Z^1|`, chart 1 otherwise) through the
/// stereographic parametrization `z = tan(θ/2) e^{iφ}`, `θ ∈ [0, π/2]`.
/// `resolution` is the polar × azimuthal node count for the whole sphere.
pub fn line_quadrature<F>(n: usize, resolution: usize, density: F) -> f64
where
    F: Fn(&ChartPoint) -> f64,
{
    let polar = (resolution / 2).max(1);
    let azimuthal = resolution.max(1);
    let (thetas, weights) = gauss_legendre(polar, 0.0, PI / 2.0);
    let dphi = 2.0 * PI / azimuthal as f64;
    let mut total = 0.0;
    for chart in 0..2 {
        for (theta, w) in thetas.iter().zip(&weights) {
            let rho = (theta / 2.0).tan();
            let drho = 0.5 / (theta / 2.0).cos().powi(2);
            let mut ring = 0.0;
            for a in 0..azimuthal {
                let phi = dphi * a as f64;
                let mut z = vec![Complex64::new(0.0, 0.0); n];
                z[0] = Complex64::from_polar(rho, phi);
                let p = ChartPoint::new(chart, z).expect("chart 0 or 1 exists for n >= 1");
                ring += density(&p);
            }
            total += w * rho * drho * ring * dphi;
        }
    }
    total
}

/// `∫_{CP^1} ω_FS` by deterministic quadrature (exact value π).
pub fn cp1_area_quadrature(resolution: usize) -> f64 {
    line_quadrature(1, resolution, |p| fs_metric(p).g[(0, 0)].re)
}

/// Deterministic cross-check of the scale for n = 1.
pub fn normalization_constant_cp1_quadrature(resolution: usize) -> f64 {
    target_volume(1) / cp1_area_quadrature(resolution)
}

/// Monte Carlo estimate of `∫ f (s·ω_FS)^n`.
///
/// `f` is evaluated in the chart where `|Z^k|` is largest. The scale and the
/// integral come from independent substreams of `seed`, so `f ≡ 1`
/// reproduces `n + 1` only up to the reported standard error.
pub fn volume_integral<F>(n: usize, f: F, samples: usize, seed: u64) -> Result<VolumeEstimate>
where
    F: Fn(&ChartPoint) -> Result<f64> + Sync,
{
    volume_integral_with(n, f, samples, seed, Parallelism::Threads)
}

pub fn volume_integral_with<F>(
    n: usize,
    f: F,
    samples: usize,
    seed: u64,
    mode: Parallelism,
) -> Result<VolumeEstimate>
where
    F: Fn(&ChartPoint) -> Result<f64> + Sync,
{
    let (scale, vol) = normalization_with(n, samples, rng::derive_seed(seed, 1), mode)?;
    let (integral, err) = raw_integral(n, &f, samples, rng::derive_seed(seed, 2), mode)?;
    let factor = scale.powi(n as i32);
    let rel_vol = vol.std_error / vol.value;
    let std_error = factor * (err * err + integral * integral * rel_vol * rel_vol).sqrt();
    Ok(VolumeEstimate {
        value: factor * integral,
        std_error,
        samples,
        scale,
    })
}

/// Evaluate a function given on homogeneous points in its best chart.
pub fn in_best_chart(p: &HomogeneousPoint) -> ChartPoint {
    p.to_chart(p.best_chart())
        .expect("the largest coordinate is nonzero")
}
