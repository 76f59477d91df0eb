//! Shared numerical kernels: Wirtinger finite differences, Gaussian
//! quadrature rules, and small linear-algebra helpers.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::CMatrix;

/// Central-difference step for a point of modulus `scale`.
pub fn fd_step(scale: f64) -> f64 {
    1e-4 * (1.0 + scale)
}

/// Euclidean norm of a complex slice.
pub fn norm(z: &[Complex64]) -> f64 {
    z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

fn perturbed(z: &[Complex64], shifts: &[(usize, Complex64)]) -> Vec<Complex64> {
    let mut w = z.to_vec();
    for &(i, d) in shifts {
        w[i] += d;
    }
    w
}

/// Mixed complex Hessian of a real function by central differences.
///
/// Entry `(a, b)` is `∂²f / ∂z̄_a ∂z_b`, so a Hermitian form reads
/// `ξ^H H ξ`. The step is [`fd_step`] of `|z|`.
pub fn mixed_hessian<F>(f: F, z: &[Complex64]) -> CMatrix
where
    F: Fn(&[Complex64]) -> f64,
{
    mixed_hessian_with_step(f, z, fd_step(norm(z)))
}

/// [`mixed_hessian`] with an explicit step `h`.
pub fn mixed_hessian_with_step<F>(f: F, z: &[Complex64], h: f64) -> CMatrix
where
    F: Fn(&[Complex64]) -> f64,
{
    let n = z.len();
    let dir = |k: usize| -> (usize, Complex64) {
        if k < n {
            (k, Complex64::new(h, 0.0))
        } else {
            (k - n, Complex64::new(0.0, h))
        }
    };
    let neg = |(i, d): (usize, Complex64)| (i, -d);

    // Real Hessian over (x_1..x_n, y_1..y_n).
    let dim = 2 * n;
    let f0 = f(z);
    let mut real = DMatrix::<f64>::zeros(dim, dim);
    for i in 0..dim {
        let ei = dir(i);
        let fp = f(&perturbed(z, &[ei]));
        let fm = f(&perturbed(z, &[neg(ei)]));
        real[(i, i)] = (fp - 2.0 * f0 + fm) / (h * h);
        for j in (i + 1)..dim {
            let ej = dir(j);
            let fpp = f(&perturbed(z, &[ei, ej]));
            let fpm = f(&perturbed(z, &[ei, neg(ej)]));
            let fmp = f(&perturbed(z, &[neg(ei), ej]));
            let fmm = f(&perturbed(z, &[neg(ei), neg(ej)]));
            let v = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
            real[(i, j)] = v;
            real[(j, i)] = v;
        }
    }

    CMatrix::from_fn(n, n, |a, b| {
        let xx = real[(a, b)];
        let yy = real[(n + a, n + b)];
        let yx = real[(n + a, b)];
        let xy = real[(a, n + b)];
        Complex64::new(0.25 * (xx + yy), 0.25 * (yx - xy))
    })
}

/// Finite-difference stencil for first derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stencil {
    /// Second-order, three points.
    Central3,
    /// Fourth-order, five points.
    Central5,
}

/// Wirtinger derivatives `(∂F/∂z_p, ∂F/∂z̄_p)` of a vector-valued map.
///
/// Returns two `m × n` matrices, column `p` holding the derivative along
/// coordinate `p`.
pub fn wirtinger_jacobians<F>(f: F, z: &[Complex64], stencil: Stencil) -> (CMatrix, CMatrix)
where
    F: Fn(&[Complex64]) -> Vec<Complex64>,
{
    let n = z.len();
    let h = fd_step(norm(z));
    let m = f(z).len();
    let mut dz = CMatrix::zeros(m, n);
    let mut dzbar = CMatrix::zeros(m, n);
    let partial = |p: usize, unit: Complex64| -> Vec<Complex64> {
        let at = |s: f64| f(&perturbed(z, &[(p, unit * s)]));
        match stencil {
            Stencil::Central3 => {
                let (a, b) = (at(h), at(-h));
                a.iter().zip(&b).map(|(x, y)| (x - y) / (2.0 * h)).collect()
            }
            Stencil::Central5 => {
                let (a, b, c, d) = (at(2.0 * h), at(h), at(-h), at(-2.0 * h));
                (0..m)
                    .map(|i| (-a[i] + 8.0 * b[i] - 8.0 * c[i] + d[i]) / (12.0 * h))
                    .collect()
            }
        }
    };
    let i = Complex64::i();
    for p in 0..n {
        let dx = partial(p, Complex64::new(1.0, 0.0));
        let dy = partial(p, i);
        for r in 0..m {
            dz[(r, p)] = 0.5 * (dx[r] - i * dy[r]);
            dzbar[(r, p)] = 0.5 * (dx[r] + i * dy[r]);
        }
    }
    (dz, dzbar)
}

/// Gauss–Legendre nodes and weights on `[a, b]`.
pub fn gauss_legendre(count: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    if count == 0 {
        return (Vec::new(), Vec::new());
    }
    let mut nodes = vec![0.0; count];
    let mut weights = vec![0.0; count];
    let nf = count as f64;
    for i in 0..count.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Three-term recurrence for P_count and its derivative.
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=count {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[count - 1 - i] = x;
        weights[i] = w;
        weights[count - 1 - i] = w;
    }
    let (half, mid) = (0.5 * (b - a), 0.5 * (b + a));
    (
        nodes.iter().map(|x| mid + half * x).collect(),
        weights.iter().map(|w| half * w).collect(),
    )
}

/// Gauss–Laguerre nodes and weights for `∫_0^∞ f(u) e^{-u} du`
/// (Golub–Welsch).
pub fn gauss_laguerre(count: usize) -> (Vec<f64>, Vec<f64>) {
    let jacobi = DMatrix::<f64>::from_fn(count, count, |i, j| {
        if i == j {
            2.0 * i as f64 + 1.0
        } else if i + 1 == j || j + 1 == i {
            (i.max(j)) as f64
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(jacobi);
    let mut pairs: Vec<(f64, f64)> = (0..count)
        .map(|k| (eig.eigenvalues[k], eig.eigenvectors[(0, k)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// Composite Gauss–Legendre rule: `panels` equal panels on `[a, b]`, each
/// with `per_panel` nodes.
pub fn composite_legendre(a: f64, b: f64, panels: usize, per_panel: usize) -> (Vec<f64>, Vec<f64>) {
    let width = (b - a) / panels as f64;
    let mut nodes = Vec::with_capacity(panels * per_panel);
    let mut weights = Vec::with_capacity(panels * per_panel);
    for p in 0..panels {
        let lo = a + p as f64 * width;
        let (x, w) = gauss_legendre(per_panel, lo, lo + width);
        nodes.extend(x);
        weights.extend(w);
    }
    (nodes, weights)
}

/// Serializes a complex matrix as rows of `[re, im]` pairs.
pub fn serialize_cmatrix<S: serde::Serializer>(m: &CMatrix, s: S) -> Result<S::Ok, S::Error> {
    use serde::Serialize;
    complex_rows(m).serialize(s)
}

pub fn complex_rows(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| [m[(i, j)].re, m[(i, j)].im])
                .collect()
        })
        .collect()
}

/// Largest singular value.
pub fn operator_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .fold(0.0, f64::max)
}

/// `‖M − I‖₂`.
pub fn deviation_from_identity(m: &CMatrix) -> f64 {
    let id = CMatrix::identity(m.nrows(), m.ncols());
    operator_norm(&(m - id))
}

/// Largest entry modulus; cheap sup-norm for tolerance checks.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Exact binomial coefficient, saturating on overflow.
pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(10, 0.0, 2.0);
        let integral: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(19)).sum();
        assert!((integral - 2f64.powi(20) / 20.0).abs() < 1e-9 * integral);
        let (x, w) = gauss_legendre(1, -1.0, 1.0);
        assert!(x[0].abs() < 1e-15 && (w[0] - 2.0).abs() < 1e-15);
        let (_, w) = gauss_legendre(200, 0.0, PI);
        assert!((w.iter().sum::<f64>() - PI).abs() < 1e-13);
    }

    #[test]
    fn laguerre_reproduces_factorials() {
        let (u, w) = gauss_laguerre(20);
        let mut fact = 1.0;
        for m in 0..20 {
            if m > 0 {
                fact *= m as f64;
            }
            let got: f64 = u.iter().zip(&w).map(|(u, w)| w * u.powi(m)).sum();
            assert!((got - fact).abs() < 1e-10 * fact, "m={m}: {got} vs {fact}");
        }
    }

    #[test]
    fn hessian_of_squared_norm_is_identity() {
        let z = [Complex64::new(0.3, -1.2), Complex64::new(2.0, 0.5)];
        let h = mixed_hessian(|w| w.iter().map(|c| c.norm_sqr()).sum(), &z);
        assert!(max_abs(&(h - CMatrix::identity(2, 2))) < 1e-7);
    }

    #[test]
    fn hessian_off_diagonal_orientation() {
        // f = |z1 + i z2|^2 = |z1|^2 + |z2|^2 + i z̄1 z2 - i z1 z̄2
        let z = [Complex64::new(0.1, 0.2), Complex64::new(-0.4, 0.3)];
        let h = mixed_hessian(|w| (w[0] + Complex64::i() * w[1]).norm_sqr(), &z);
        // ∂²f/∂z̄1∂z2 = i
        assert!((h[(0, 1)] - Complex64::i()).norm() < 1e-7);
        assert!((h[(1, 0)] + Complex64::i()).norm() < 1e-7);
    }

    #[test]
    fn wirtinger_separates_holomorphic_parts() {
        let z = [Complex64::new(0.7, -0.2)];
        let (dz, dzbar) =
            wirtinger_jacobians(|w| vec![w[0] * w[0], w[0].conj()], &z, Stencil::Central5);
        assert!((dz[(0, 0)] - 2.0 * z[0]).norm() < 1e-11);
        assert!(dzbar[(0, 0)].norm() < 1e-11);
        assert!(dz[(1, 0)].norm() < 1e-11);
        assert!((dzbar[(1, 0)] - 1.0).norm() < 1e-11);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(4, 1), 4);
        assert_eq!(binomial(14, 6), 3003);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(binomial(0, 0), 1);
    }
}
