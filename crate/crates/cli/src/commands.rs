use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use num_complex::Complex64;
use quantizer_core::atlas::{sample_fs_uniform_with, to_chart, transition, transition_jacobian};
use quantizer_core::bergman::{
    bergman_metric, exact_kernel, kernel_at, propagator_metric_cn, pullback_check, Domain,
    KernelModel,
};
use quantizer_core::fubini_study::{
    fs_metric, normalization_constant_cp1_quadrature, target_volume, volume_integral_with,
};
use quantizer_core::numeric::{binomial, max_abs};
use quantizer_core::oscillator::projective_spectrum;
use quantizer_core::picard::{bundle_transition, chern_number, curvature_form_constant};
use quantizer_core::qh_bundle::{
    latitude_holonomy_oracle, nonflatness_certificate, parallel_transport, qh_transition, Loop,
    Segment,
};
use quantizer_core::sections::{dimension, enumerate_basis, rep_dimension_checks};
use quantizer_core::{CMatrix, Parallelism, PicardClass};
use serde_json::{json, Value};

use crate::config::{Command, Model, RunConfig};
use crate::report::{Report, Table};

/// Configuration problems found while running a command (exit status 2).
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

pub fn run(cfg: &RunConfig) -> Result<Report> {
    match &cfg.command {
        Command::AtlasCheck => atlas_check(cfg),
        Command::Dim => dim(cfg),
        Command::Chern => chern(cfg),
        Command::Spectrum => spectrum(cfg),
        Command::Holonomy { loop_file } => holonomy(cfg, loop_file.as_deref()),
        Command::Bergman { model, grid } => bergman(cfg, *model, *grid),
        Command::Volume => volume(cfg),
        Command::QhCheck => qh_check(cfg),
    }
}

fn mode(cfg: &RunConfig) -> Parallelism {
    if cfg.common.serial {
        Parallelism::Serial
    } else {
        Parallelism::Threads
    }
}

fn tolerance(cfg: &RunConfig, default: f64) -> f64 {
    cfg.common.inject_tolerance.unwrap_or(default)
}

fn pairs(z: &[Complex64]) -> Vec<[f64; 2]> {
    z.iter().map(|c| [c.re, c.im]).collect()
}

fn rel(a: &CMatrix, b: &CMatrix) -> f64 {
    max_abs(&(a - b)) / max_abs(b).max(1.0)
}

#[derive(Default)]
struct Suite {
    name: &'static str,
    checks: usize,
    max_error: f64,
    first_failure: Option<Value>,
}

impl Suite {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            ..Default::default()
        }
    }

    fn record(&mut self, error: f64, tol: f64, case: impl FnOnce() -> Value) {
        self.checks += 1;
        self.max_error = self.max_error.max(error);
        if (error.is_nan() || error > tol) && self.first_failure.is_none() {
            let mut c = case();
            c["error"] = json!(error);
            self.first_failure = Some(c);
        }
    }

    fn pass(&self) -> bool {
        self.first_failure.is_none()
    }

    fn to_json(&self) -> Value {
        json!({
            "suite": self.name,
            "checks": self.checks,
            "max_error": self.max_error,
            "pass": self.pass(),
            "first_failure": self.first_failure,
        })
    }
}

fn suites_report(anchor: &'static str, suites: &[Suite], tol: f64, extra: Value) -> Report {
    let mut table = Table::new(&["suite", "checks", "max_error", "tolerance", "pass"]);
    for s in suites {
        table.push([
            s.name.to_string(),
            s.checks.to_string(),
            s.max_error.to_string(),
            tol.to_string(),
            s.pass().to_string(),
        ]);
    }
    let mut result = json!({
        "tolerance": tol,
        "suites": suites.iter().map(Suite::to_json).collect::<Vec<_>>(),
    });
    if let Value::Object(map) = extra {
        for (k, v) in map {
            result[k] = v;
        }
    }
    let pass = suites.iter().all(Suite::pass)
        && result
            .get("certificate")
            .is_none_or(|c| c["pass"] == json!(true));
    Report {
        anchor,
        pass,
        result,
        table,
    }
}

fn atlas_check(cfg: &RunConfig) -> Result<Report> {
    let n = cfg.common.n;
    let tol = tolerance(cfg, 1e-10);
    let points = sample_fs_uniform_with(n, cfg.common.samples, cfg.common.seed, mode(cfg));
    let mut round = Suite::new("round_trip");
    let mut cocycle = Suite::new("coordinate_cocycle");
    let mut chain = Suite::new("jacobian_chain_rule");
    for (i, p) in points.iter().enumerate() {
        let case =
            |charts: &[usize]| json!({"sample": i, "point": pairs(p.coords()), "charts": charts});
        let local: Vec<_> = (0..=n)
            .map(|k| to_chart(p, k))
            .collect::<std::result::Result<_, _>>()?;
        let unit = p.normalized();
        for (j, pj) in local.iter().enumerate() {
            let back = pj.lift().normalized();
            let err = back
                .iter()
                .zip(&unit)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            round.record(err, tol, || case(&[j + 1]));
        }
        for j in 0..=n {
            for k in 0..=n {
                let jkj = transition_jacobian(&local[j], k)?.matrix;
                let via_k = transition(&local[j], k)?;
                for m in 0..=n {
                    let direct = transition(&local[j], m)?;
                    let via = transition(&via_k, m)?;
                    let err = direct
                        .coords()
                        .iter()
                        .zip(via.coords())
                        .map(|(a, b)| (a - b).norm() / (1.0 + a.norm()))
                        .fold(0.0, f64::max);
                    cocycle.record(err, tol, || case(&[j + 1, k + 1, m + 1]));
                    let jmk = transition_jacobian(&local[k], m)?.matrix;
                    let jmj = transition_jacobian(&local[j], m)?.matrix;
                    chain.record(rel(&(jmk * &jkj), &jmj), tol, || {
                        case(&[j + 1, k + 1, m + 1])
                    });
                }
            }
        }
    }
    Ok(suites_report(
        "z_(k) = Z/Z^k;  φ_mk ∘ φ_kj = φ_mj;  J_mk J_kj = J_mj",
        &[round, cocycle, chain],
        tol,
        json!({}),
    ))
}

fn dim(cfg: &RunConfig) -> Result<Report> {
    let max_l = cfg.common.l.max(0);
    let mut table = Table::new(&["n", "l", "dimension", "binomial", "enumerated"]);
    let mut rows = Vec::new();
    let mut pass = true;
    for n in 1..=cfg.common.n {
        for l in -1..=max_l {
            let d = dimension(n, l);
            let b = if l < 0 {
                0
            } else {
                binomial((n as i64 + l) as u64, n as u64)
            };
            let e = if l < 0 {
                0
            } else {
                enumerate_basis(n, l)?.len() as u64
            };
            pass &= d == b && d == e;
            table.push([
                n.to_string(),
                l.to_string(),
                d.to_string(),
                b.to_string(),
                e.to_string(),
            ]);
            rows.push(json!({"n": n, "l": l, "dimension": d, "binomial": b, "enumerated": e}));
        }
    }
    let checks = if cfg.common.l >= 0 {
        rep_dimension_checks(cfg.common.n, cfg.common.l)?
    } else {
        Vec::new()
    };
    pass &= checks.iter().all(|c| c.pass);
    Ok(Report {
        anchor: "dim H^0(CP^n, O(l)) = C(n+l, n) for l >= 0, 0 for l < 0",
        pass,
        result: json!({"table": rows, "identities": checks}),
        table,
    })
}

fn chern(cfg: &RunConfig) -> Result<Report> {
    let l = PicardClass(cfg.common.l);
    let tol = tolerance(cfg, 1e-3);
    let c1 = chern_number(l, cfg.common.n, cfg.common.resolution);
    let error = (c1 - l.0 as f64).abs();
    // Volume 2 (= n + 1 on CP^1) and volume 1 normalizations of the line.
    let scale2 = normalization_constant_cp1_quadrature(cfg.common.resolution);
    let scale1 = scale2 / 2.0;
    let k2 = curvature_form_constant(l, scale2);
    let k1 = curvature_form_constant(l, scale1);
    let mut table = Table::new(&[
        "l",
        "chern_number",
        "error",
        "f_over_omega_volume2_im",
        "f_over_omega_volume1_im",
    ]);
    table.push([
        l.0.to_string(),
        c1.to_string(),
        error.to_string(),
        k2.im.to_string(),
        k1.im.to_string(),
    ]);
    Ok(Report {
        anchor: "c1 = (1/2π) ∫ iF over a line of CP^n;  F = c·ω with c = -2il/s for ω = s·ω_FS",
        pass: error < tol,
        result: json!({
            "l": l.0,
            "chern_number": c1,
            "error": error,
            "tolerance": tol,
            "f_over_omega": {
                "volume_2": {"scale": scale2, "constant": [k2.re, k2.im], "in_units_of_pi_i": k2.im / PI},
                "volume_1": {"scale": scale1, "constant": [k1.re, k1.im], "in_units_of_pi_i": k1.im / PI},
            },
        }),
        table,
    })
}

fn spectrum(cfg: &RunConfig) -> Result<Report> {
    let n = cfg.common.n;
    let t = projective_spectrum(n)?;
    let mut table = Table::new(&["state", "E_lin", "E_proj", "degeneracy"]);
    let mut pass = t.rows.len() == n + 1;
    let nf = n as f64;
    let expected = [(1.0 + nf / 2.0).ln(), (2.0 + nf / 2.0).ln()];
    for (i, row) in t.rows.iter().enumerate() {
        let target = if i == 0 { expected[0] } else { expected[1] };
        pass &= (row.projective_eigenvalue - (1.0 + row.linear_eigenvalue).ln()).abs()
            <= 4.0 * f64::EPSILON;
        pass &= (row.projective_eigenvalue - target).abs() <= 4.0 * f64::EPSILON;
        table.push([
            row.state.to_string(),
            row.linear_eigenvalue.to_string(),
            row.projective_eigenvalue.to_string(),
            row.degeneracy.to_string(),
        ]);
    }
    let levels = t.levels();
    pass &= levels.iter().map(|l| l.1).collect::<Vec<_>>()
        == if n == 1 { vec![1, 1] } else { vec![1, n] };
    Ok(Report {
        anchor:
            "E_lin = Σ(m_j + 1/2);  E_proj = log(1 + E_lin) on the vacuum and single-quantum states",
        pass,
        result: json!({"table": t, "levels": levels}),
        table,
    })
}

fn load_loop(n: usize, path: Option<&Path>) -> Result<(Loop, Vec<Segment>)> {
    let segments = match path {
        Some(p) => {
            let text = fs::read_to_string(p)
                .with_context(|| format!("reading loop file {}", p.display()))?;
            serde_json::from_str::<Vec<Segment>>(&text)
                .map_err(|e| UsageError(format!("loop file {}: {e}", p.display())))?
        }
        None => vec![Segment::Latitude {
            chart: 1,
            radius: 1.0,
        }],
    };
    Ok((Loop::from_segments(n, &segments)?, segments))
}

fn holonomy(cfg: &RunConfig, path: Option<&Path>) -> Result<Report> {
    let n = cfg.common.n;
    let l = PicardClass(cfg.common.l);
    let tol = tolerance(cfg, 1e-6);
    let (lp, segments) = load_loop(n, path)?;
    let h = parallel_transport(l, &lp, cfg.common.steps)?;
    // Every chart sees a single latitude the same way, so Stokes applies.
    let oracle_defect = match segments.as_slice() {
        [Segment::Latitude { radius, .. }] => Some(max_abs(
            &(&h.matrix - latitude_holonomy_oracle(n, l, *radius)),
        )),
        _ => None,
    };
    let mut table = Table::new(&["row", "col", "re", "im"]);
    for i in 0..h.matrix.nrows() {
        for j in 0..h.matrix.ncols() {
            table.push([
                i.to_string(),
                j.to_string(),
                h.matrix[(i, j)].re.to_string(),
                h.matrix[(i, j)].im.to_string(),
            ]);
        }
    }
    let pass = h.leakage < 1e-8 && oracle_defect.is_none_or(|d| d < tol);
    Ok(Report {
        anchor: "H = P exp(-∮ A ⊕ Γ) on T(CP^n) ⊕ O(l);  nonflat iff ‖H − I‖ > 0",
        pass,
        result: json!({
            "segments": segments,
            "holonomy": h,
            "nonflat": h.deviation_from_identity > 0.1,
            "stokes_oracle_defect": oracle_defect,
            "tolerance": tol,
        }),
        table,
    })
}

fn grid_points(rings: usize, max_r: f64) -> Vec<Complex64> {
    let mut pts = vec![Complex64::new(0.0, 0.0)];
    for i in 1..rings {
        let r = max_r * i as f64 / (rings - 1) as f64;
        pts.extend((0..8).map(|a| Complex64::from_polar(r, a as f64 * PI / 4.0)));
    }
    pts
}

fn bergman(cfg: &RunConfig, model: Model, rings: usize) -> Result<Report> {
    if rings == 0 {
        return Err(UsageError("--grid must be positive".into()).into());
    }
    let m = cfg.common.truncation;
    let tol = tolerance(cfg, 1e-3);
    let mut records = Vec::new();
    let mut pass = true;
    match model {
        Model::Disc => {
            let km = KernelModel::disc(m)?;
            let mut table = Table::new(&[
                "re",
                "im",
                "kernel",
                "kernel_exact",
                "metric",
                "metric_exact",
                "lhs",
                "rhs",
                "deviation",
                "truncation",
            ]);
            for z in grid_points(rings, 0.8) {
                let zs = [z];
                let k = kernel_at(&km, &zs, &zs)?.re;
                let ke = exact_kernel(Domain::UnitDisc, &zs, &zs)?.re;
                let g = bergman_metric(&km, &zs)?.g[(0, 0)].re;
                let r = pullback_check(&km, &zs)?;
                pass &= r.deviation < tol;
                let (lhs, rhs) = (r.lhs[(0, 0)].re, r.rhs[(0, 0)].re);
                table.push(
                    [z.re, z.im, k, ke, g, rhs, lhs, rhs, r.deviation, m as f64]
                        .map(|v| v.to_string()),
                );
                records.push(json!({
                    "point": [z.re, z.im],
                    "lhs": lhs,
                    "rhs": rhs,
                    "deviation": r.deviation,
                    "truncation": m,
                    "kernel": k,
                    "kernel_exact": ke,
                    "truncated_metric": g,
                }));
            }
            Ok(Report {
                anchor: "k(z,w) = Σ h_j(z) conj(h_j(w)) → 1/(π(1 − z w̄)²);  ι*(ds²_FS) = ∂∂̄ log k = 2/(1 − |z|²)²",
                pass,
                result: json!({"model": "disc", "records": records, "tolerance": tol}),
                table,
            })
        }
        Model::Cn => {
            let n = cfg.common.n;
            let km = KernelModel::complex_space(n, m)?;
            let mut table = Table::new(&[
                "point",
                "fd_defect",
                "imaginary_exponent_deviation",
                "deviation",
                "truncation",
            ]);
            for z in grid_points(rings, 0.8) {
                let zs = vec![z; n];
                let p = propagator_metric_cn(n, &zs)?;
                let r = pullback_check(&km, &zs)?;
                pass &= p.pass && r.deviation < tol;
                let label = pairs(&zs)
                    .iter()
                    .map(|[a, b]| format!("{a}{b:+}i"))
                    .collect::<Vec<_>>()
                    .join(" ");
                table.push([
                    label,
                    p.fd_defect.to_string(),
                    p.imaginary_exponent_deviation.to_string(),
                    r.deviation.to_string(),
                    m.to_string(),
                ]);
                records.push(json!({
                    "point": pairs(&zs),
                    "lhs": quantizer_core::numeric::complex_rows(&r.lhs),
                    "rhs": quantizer_core::numeric::complex_rows(&r.rhs),
                    "deviation": r.deviation,
                    "truncation": m,
                    "propagator": p,
                }));
            }
            Ok(Report {
                anchor: "k(z, z̄) = π^{-n} exp(Σ z̄ z);  ∂∂̄ log k = identity (the literal exp(i Σ z̄ z) has zero log-modulus Hessian)",
                pass,
                result: json!({"model": "cn", "n": n, "records": records, "tolerance": tol}),
                table,
            })
        }
    }
}

fn volume(cfg: &RunConfig) -> Result<Report> {
    let n = cfg.common.n;
    let est = volume_integral_with(
        n,
        |_| Ok(1.0),
        cfg.common.samples,
        cfg.common.seed,
        mode(cfg),
    )?;
    let target = target_volume(n);
    let error = (est.value - target).abs();
    let allowed = tolerance(cfg, 4.0 * est.std_error);
    let mut table = Table::new(&["n", "value", "std_error", "target", "scale", "samples"]);
    table.push(
        [
            n as f64,
            est.value,
            est.std_error,
            target,
            est.scale,
            est.samples as f64,
        ]
        .map(|v| v.to_string()),
    );
    Ok(Report {
        anchor: "∫_{CP^n} ω^n = n + 1 with ω = s·ω_FS, s = ((n+1)/vol_FS)^{1/n}",
        pass: error <= allowed,
        result: json!({"estimate": est, "target": target, "error": error, "allowed_error": allowed}),
        table,
    })
}

fn qh_check(cfg: &RunConfig) -> Result<Report> {
    let n = cfg.common.n;
    let l = PicardClass(cfg.common.l);
    let tol = tolerance(cfg, 1e-10);
    let points = sample_fs_uniform_with(n, cfg.common.samples, cfg.common.seed, mode(cfg));
    let mut scalar = Suite::new("scalar_cocycle");
    let mut block = Suite::new("block_cocycle");
    let mut law = Suite::new("metric_transformation");
    let mut split = Suite::new("block_splitting");
    for (i, p) in points.iter().enumerate() {
        let case =
            |charts: &[usize]| json!({"sample": i, "point": pairs(p.coords()), "charts": charts});
        let local: Vec<_> = (0..=n)
            .map(|k| to_chart(p, k))
            .collect::<std::result::Result<_, _>>()?;
        for j in 0..=n {
            for k in 0..=n {
                let jac = transition_jacobian(&local[j], k)?.matrix;
                let pulled = jac.adjoint() * fs_metric(&local[k]).g * &jac;
                law.record(rel(&pulled, &fs_metric(&local[j]).g), tol, || {
                    case(&[j + 1, k + 1])
                });
                let tjk = qh_transition(l, j, k, &local[k])?;
                split.record(tjk.off_block_max(), tol, || case(&[j + 1, k + 1]));
                for (m, pm) in local.iter().enumerate() {
                    let g = bundle_transition(l, j, k, p)?
                        * bundle_transition(l, k, m, p)?
                        * bundle_transition(l, m, j, p)?;
                    scalar.record((g - 1.0).norm(), tol, || case(&[j + 1, k + 1, m + 1]));
                    let tkm = qh_transition(l, k, m, pm)?.matrix;
                    let tjm = qh_transition(l, j, m, pm)?.matrix;
                    block.record(rel(&(&tjk.matrix * tkm), &tjm), tol, || {
                        case(&[j + 1, k + 1, m + 1])
                    });
                }
            }
        }
    }
    let cert = nonflatness_certificate(n, l, cfg.common.steps)?;
    Ok(suites_report(
        "T_jk = (Z^k/Z^j)^l ⊕ ∂z_(j)/∂z_(k);  T_jk T_km = T_jm;  g_j = J^H g_k J",
        &[scalar, block, law, split],
        tol,
        json!({"certificate": cert}),
    ))
}
