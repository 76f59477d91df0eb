//! Points of CP^n in homogeneous and affine chart coordinates.
//!
//! Chart `k` (zero-based) is the open set `Z^k ≠ 0` with affine coordinates
//! `z^j = Z^j / Z^k` for `j ≠ k`, stored in increasing `j` with slot `k`
//! omitted. Every other module relies on that ordering.

use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{rng, CMatrix, Parallelism};

/// Relative modulus `|Z^k| / max_j |Z^j|` below which a point is treated as
/// lying on the hyperplane at infinity of chart `k`.
pub const CHART_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomogeneousPoint {
    coords: Vec<Complex64>,
}

impl HomogeneousPoint {
    pub fn new(coords: Vec<Complex64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::InvalidArgument(
                "CP^n needs at least two homogeneous coordinates".into(),
            ));
        }
        if coords.iter().all(|c| c.norm_sqr() == 0.0) {
            return Err(Error::ZeroVector);
        }
        Ok(Self { coords })
    }

    /// Convenience constructor from real parts only.
    pub fn from_reals(re: &[f64]) -> Result<Self> {
        Self::new(re.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn n(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.coords
    }

    fn max_modulus(&self) -> f64 {
        self.coords.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// `|Z^k| / max_j |Z^j|`.
    pub fn chart_ratio(&self, k: usize) -> f64 {
        self.coords[k].norm() / self.max_modulus()
    }

    pub fn in_chart(&self, k: usize) -> bool {
        k <= self.n() && self.chart_ratio(k) > CHART_TOLERANCE
    }

    /// Chart with the largest `|Z^k|`; its affine coordinates all have
    /// modulus at most one.
    pub fn best_chart(&self) -> usize {
        let mut best = 0;
        for (k, c) in self.coords.iter().enumerate() {
            if c.norm() > self.coords[best].norm() {
                best = k;
            }
        }
        best
    }

    /// Representative with unit norm whose largest-modulus entry is real
    /// and positive.
    pub fn normalized(&self) -> Vec<Complex64> {
        let k = self.best_chart();
        let scale: f64 = self.coords.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let phase = self.coords[k] / self.coords[k].norm();
        self.coords.iter().map(|c| c / (phase * scale)).collect()
    }

    /// Scale-invariant equality up to `tol` on normalized representatives.
    pub fn equivalent(&self, other: &Self, tol: f64) -> bool {
        if self.n() != other.n() {
            return false;
        }
        self.normalized()
            .iter()
            .zip(other.normalized())
            .all(|(a, b)| (a - b).norm() <= tol)
    }

    pub fn scaled(&self, lambda: Complex64) -> Result<Self> {
        Self::new(self.coords.iter().map(|c| c * lambda).collect())
    }

    pub fn to_chart(&self, k: usize) -> Result<ChartPoint> {
        to_chart(self, k)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartPoint {
    chart: usize,
    z: Vec<Complex64>,
}

impl ChartPoint {
    /// Affine point `z` (length `n`) in chart `chart ∈ 0..=n`.
    pub fn new(chart: usize, z: Vec<Complex64>) -> Result<Self> {
        let n = z.len();
        if n == 0 {
            return Err(Error::InvalidArgument(
                "CP^0 has no affine coordinates".into(),
            ));
        }
        if chart > n {
            return Err(Error::InvalidChart { chart, n });
        }
        Ok(Self { chart, z })
    }

    /// The base point of chart `k` (all affine coordinates zero).
    pub fn origin(n: usize, chart: usize) -> Result<Self> {
        Self::new(chart, vec![Complex64::new(0.0, 0.0); n])
    }

    pub fn chart(&self) -> usize {
        self.chart
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.z
    }

    pub fn n(&self) -> usize {
        self.z.len()
    }

    /// `Σ |z^j|²`.
    pub fn norm_sqr(&self) -> f64 {
        self.z.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Homogeneous coordinates with `Z^k = 1`.
    pub fn lift(&self) -> HomogeneousPoint {
        let mut coords = Vec::with_capacity(self.n() + 1);
        coords.extend_from_slice(&self.z[..self.chart]);
        coords.push(Complex64::new(1.0, 0.0));
        coords.extend_from_slice(&self.z[self.chart..]);
        HomogeneousPoint { coords }
    }

    pub fn transition(&self, target: usize) -> Result<ChartPoint> {
        transition(self, target)
    }
}

/// Position of homogeneous index `idx` among the affine coordinates of
/// chart `chart` (`idx ≠ chart`).
fn slot(chart: usize, idx: usize) -> usize {
    if idx < chart {
        idx
    } else {
        idx - 1
    }
}

/// Homogeneous index of affine slot `pos` in chart `chart`.
fn homogeneous_index(chart: usize, pos: usize) -> usize {
    if pos < chart {
        pos
    } else {
        pos + 1
    }
}

pub fn to_chart(p: &HomogeneousPoint, k: usize) -> Result<ChartPoint> {
    let n = p.n();
    if k > n {
        return Err(Error::InvalidChart { chart: k, n });
    }
    if !p.in_chart(k) {
        return Err(Error::ChartUndefined {
            chart: k,
            ratio: p.chart_ratio(k),
        });
    }
    let zk = p.coords[k];
    let z = p
        .coords
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != k)
        .map(|(_, c)| c / zk)
        .collect();
    Ok(ChartPoint { chart: k, z })
}

/// Coordinates of `p` in chart `target`.
pub fn transition(p: &ChartPoint, target: usize) -> Result<ChartPoint> {
    if target == p.chart {
        return Ok(p.clone());
    }
    to_chart(&p.lift(), target)
}

/// Jacobian `∂z_(target) / ∂z_(source)` of the chart change; rows index the
/// target coordinates, columns the source ones.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobianMatrix {
    pub source: usize,
    pub target: usize,
    pub matrix: CMatrix,
}

impl JacobianMatrix {
    pub fn det(&self) -> Complex64 {
        self.matrix.determinant()
    }
}

pub fn transition_jacobian(p: &ChartPoint, target: usize) -> Result<JacobianMatrix> {
    let n = p.n();
    let source = p.chart;
    if target > n {
        return Err(Error::InvalidChart { chart: target, n });
    }
    if target == source {
        return Ok(JacobianMatrix {
            source,
            target,
            matrix: CMatrix::identity(n, n),
        });
    }
    // Reject points off the target chart with the same rule as `to_chart`.
    transition(p, target)?;
    let u_pos = slot(source, target);
    let u = p.z[u_pos];
    let mut m = CMatrix::zeros(n, n);
    for b in 0..n {
        let idx = homogeneous_index(target, b);
        if idx == source {
            m[(b, u_pos)] = -1.0 / (u * u);
        } else {
            let c = slot(source, idx);
            m[(b, c)] += 1.0 / u;
            m[(b, u_pos)] += -p.z[c] / (u * u);
        }
    }
    Ok(JacobianMatrix {
        source,
        target,
        matrix: m,
    })
}

fn gaussian_point(n: usize, r: &mut impl rand::Rng) -> HomogeneousPoint {
    loop {
        let coords: Vec<Complex64> = (0..=n)
            .map(|_| Complex64::new(StandardNormal.sample(r), StandardNormal.sample(r)))
            .collect();
        let norm = coords.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            return HomogeneousPoint {
                coords: coords.into_iter().map(|c| c / norm).collect(),
            };
        }
    }
}

/// Points of CP^n distributed uniformly for the Fubini–Study volume:
/// normalized complex Gaussian vectors in C^{n+1}. Deterministic in `seed`.
pub fn sample_fs_uniform(n: usize, count: usize, seed: u64) -> Vec<HomogeneousPoint> {
    sample_fs_uniform_with(n, count, seed, Parallelism::Threads)
}

pub fn sample_fs_uniform_with(
    n: usize,
    count: usize,
    seed: u64,
    mode: Parallelism,
) -> Vec<HomogeneousPoint> {
    rng::map_samples(count, seed, mode, |_, r| gaussian_point(n, r))
}
