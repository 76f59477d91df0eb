use std::f64::consts::PI;

use num_complex::Complex64;
use quantizer_core::bergman::{
    bergman_metric, embed, exact_kernel, gram_matrix, kernel_at, pullback_check, Domain,
    KernelModel,
};
use quantizer_core::numeric::{wirtinger_jacobians, Stencil};
use quantizer_core::rng::substream;
use rand::Rng;

fn disc_points(count: usize, max_r: f64, seed: u64) -> Vec<Complex64> {
    (0..count)
        .map(|i| {
            let mut rng = substream(seed, i as u64);
            let r = max_r * rng.random::<f64>().sqrt();
            Complex64::from_polar(r, 2.0 * PI * rng.random::<f64>())
        })
        .collect()
}

#[test]
fn truncated_kernel_matches_closed_form() {
    let model = KernelModel::disc(80).unwrap();
    for z in disc_points(200, 0.5, 1) {
        let k = kernel_at(&model, &[z], &[z]).unwrap().re;
        let exact = 1.0 / (PI * (1.0 - z.norm_sqr()).powi(2));
        assert!((k - exact).abs() < 1e-6);
        let w = Complex64::new(0.1, -0.3);
        let off = kernel_at(&model, &[z], &[w]).unwrap();
        assert!((off - exact_kernel(Domain::UnitDisc, &[z], &[w]).unwrap()).norm() < 1e-6);
    }
}

#[test]
fn metric_positive_on_interior() {
    let model = KernelModel::disc(80).unwrap();
    for z in disc_points(1000, 0.8, 2) {
        assert!(bergman_metric(&model, &[z]).unwrap().is_positive_definite());
    }
}

#[test]
fn embedding_is_injective_on_sample_pairs() {
    let model = KernelModel::disc(80).unwrap();
    let a = disc_points(1000, 0.8, 3);
    let b = disc_points(1000, 0.8, 4);
    for (z, w) in a.iter().zip(&b) {
        let d = embed(&model, &[*z])
            .unwrap()
            .projective_distance(&embed(&model, &[*w]).unwrap());
        assert!(d > 1e-8, "{z} {w}");
    }
}

#[test]
fn embedding_differential_has_full_rank() {
    let model = KernelModel::disc(80).unwrap();
    for z in disc_points(50, 0.8, 5) {
        let e = embed(&model, &[z]).unwrap();
        let a = e.dominant_index();
        let chart = |w: &[Complex64]| {
            let v = embed(&model, w).unwrap().coords;
            v.iter()
                .enumerate()
                .filter(|(j, _)| *j != a)
                .map(|(_, c)| c / v[a])
                .collect()
        };
        let (_, dzbar) = wirtinger_jacobians(chart, &[z], Stencil::Central5);
        let largest = dzbar.iter().map(|c| c.norm()).fold(0.0, f64::max);
        assert!(largest > 1e-3);
    }
}

#[test]
fn reproducing_property_at_finite_truncation() {
    let model = KernelModel::disc(30).unwrap();
    let gram = gram_matrix(&model);
    let coeffs: Vec<Complex64> = (0..30)
        .map(|i| Complex64::new((i % 4) as f64 - 1.5, (i % 3) as f64 * 0.5))
        .collect();
    for z in disc_points(20, 0.9, 6) {
        let h = model.basis_values(&[z]);
        let f: Complex64 = coeffs.iter().zip(&h).map(|(c, hj)| c * hj).sum();
        // ⟨f, h_j⟩ = Σ_i c_i ⟨h_i, h_j⟩
        let reproduced: Complex64 = (0..30)
            .map(|j| (0..30).map(|i| coeffs[i] * gram[(i, j)]).sum::<Complex64>() * h[j])
            .sum();
        assert!((f - reproduced).norm() < 1e-10 * (1.0 + f.norm()));
    }
}

#[test]
fn pullback_deviation_shrinks_with_truncation() {
    for z in disc_points(10, 0.8, 7)
        .into_iter()
        .map(|z| Complex64::from_polar(0.75 + 0.05 * z.norm() / 0.8, z.arg()))
    {
        let d: Vec<f64> = [20, 40, 80]
            .iter()
            .map(|&m| {
                pullback_check(&KernelModel::disc(m).unwrap(), &[z])
                    .unwrap()
                    .deviation
            })
            .collect();
        assert!(d[0] > d[1] && d[1] > d[2], "{z}: {d:?}");
        assert!(
            pullback_check(&KernelModel::disc(120).unwrap(), &[z])
                .unwrap()
                .deviation
                < 1e-3
        );
    }
}

#[test]
fn fock_pullback_is_flat_metric() {
    let model = KernelModel::complex_space(2, 231).unwrap();
    let r = pullback_check(
        &model,
        &[Complex64::new(0.3, 0.2), Complex64::new(-0.4, 0.1)],
    )
    .unwrap();
    assert!(r.deviation < 1e-6, "{}", r.deviation);
}
