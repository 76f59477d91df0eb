//! The line bundles `O(l)` over CP^n.
//!
//! A section of `O(l)` is a degree-`l` homogeneous polynomial `P`; its
//! representative on chart `k` is `P / (Z^k)^l`, so on overlaps
//! `s_j = g_jk s_k` with `g_jk = (Z^k / Z^j)^l`. The Hermitian metric is
//! `h_k = (1 + |z_(k)|²)^{-l}`, which makes `h |s|² = |P|² / |Z|^{2l}`
//! chart-independent.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Neg};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::atlas::{ChartPoint, HomogeneousPoint};
use crate::error::{Error, Result};
use crate::fubini_study::{fs_metric, line_quadrature};
use crate::CMatrix;

/// Element of `Pic(CP^n) ≅ Z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PicardClass(pub i64);

impl PicardClass {
    pub fn degree(self) -> i64 {
        self.0
    }

    pub fn dual(self) -> Self {
        -self
    }

    pub fn tensor(self, other: Self) -> Self {
        self + other
    }
}

impl Add for PicardClass {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        PicardClass(self.0 + rhs.0)
    }
}

impl Neg for PicardClass {
    type Output = Self;
    fn neg(self) -> Self {
        PicardClass(-self.0)
    }
}

impl fmt::Display for PicardClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "O({})", self.0)
    }
}

fn int_pow(z: Complex64, l: i64) -> Complex64 {
    let base = if l < 0 { z.inv() } else { z };
    let mut acc = Complex64::new(1.0, 0.0);
    for _ in 0..l.unsigned_abs() {
        acc *= base;
    }
    acc
}

/// Transition function `g_jk = (Z^k / Z^j)^l` on the overlap of charts
/// `j` and `k`.
pub fn bundle_transition(
    l: PicardClass,
    j: usize,
    k: usize,
    p: &HomogeneousPoint,
) -> Result<Complex64> {
    for chart in [j, k] {
        if chart > p.n() {
            return Err(Error::InvalidChart { chart, n: p.n() });
        }
        if !p.in_chart(chart) {
            return Err(Error::ChartUndefined {
                chart,
                ratio: p.chart_ratio(chart),
            });
        }
    }
    if j == k {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let z = p.coords();
    Ok(int_pow(z[k] / z[j], l.0))
}

pub fn hermitian_metric(l: PicardClass, p: &ChartPoint) -> f64 {
    (1.0 + p.norm_sqr()).powf(-(l.0 as f64))
}

/// Coefficients `F_{b ā}` of the Chern curvature `F = -∂∂̄ log h = l ∂∂̄K`,
/// laid out like [`crate::MetricValue::g`].
pub fn chern_curvature(l: PicardClass, p: &ChartPoint) -> CMatrix {
    fs_metric(p).g * Complex64::new(l.0 as f64, 0.0)
}

/// The `(1,0)` Chern connection form `A = ∂ log h` in chart coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConnectionForm {
    pub components: Vec<Complex64>,
}

impl ConnectionForm {
    /// `A(ξ) = Σ_m A_m ξ^m`.
    pub fn contract(&self, xi: &[Complex64]) -> Complex64 {
        self.components.iter().zip(xi).map(|(a, x)| a * x).sum()
    }
}

pub fn chern_connection(l: PicardClass, p: &ChartPoint) -> ConnectionForm {
    let q = 1.0 + p.norm_sqr();
    let lf = l.0 as f64;
    ConnectionForm {
        components: p.coords().iter().map(|z| -lf * z.conj() / q).collect(),
    }
}

/// `(1/2π) ∫ iF` over the line `Z = (Z^1, Z^2, 0, …)` of CP^n.
pub fn chern_number(l: PicardClass, n: usize, resolution: usize) -> f64 {
    // iF_{zz̄} dz∧dz̄ = 2 F_{zz̄} dx∧dy
    let integral = line_quadrature(n, resolution, |p| 2.0 * chern_curvature(l, p)[(0, 0)].re);
    integral / (2.0 * PI)
}

/// Constant `c` in `F = c · ω` when `ω = scale · ω_FS`, with `F` and `ω`
/// written as 2-forms. Since `ω_FS = (i/2) ∂∂̄K`, `c = -2i l / scale`.
pub fn curvature_form_constant(l: PicardClass, scale: f64) -> Complex64 {
    Complex64::new(0.0, -2.0 * l.0 as f64 / scale)
}

/// Measures `F_{b ā} / g_{b ā}` entrywise at `p`; returns the worst
/// relative deviation from `l` over entries with non-negligible metric.
pub fn curvature_ratio_defect(l: PicardClass, p: &ChartPoint) -> f64 {
    let f = chern_curvature(l, p);
    let g = fs_metric(p).g;
    let scale = crate::numeric::max_abs(&g);
    let lf = Complex64::new(l.0 as f64, 0.0);
    let mut worst = 0.0_f64;
    for (fe, ge) in f.iter().zip(g.iter()) {
        if ge.norm() > 1e-8 * scale {
            let denom = lf.norm().max(1.0);
            worst = worst.max((fe / ge - lf).norm() / denom);
        }
    }
    worst
}
