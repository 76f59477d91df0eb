//! The bundle `T(CP^n) ⊕ O(l)` with fibre `C^{n+1}`.
//!
//! Fibre vectors are ordered `(vacuum, excited_1, …, excited_n)`: index 0 is
//! the line `O(l)`, indices `1..=n` are tangent components ordered like the
//! chart's affine coordinates. Transitions and the connection are both
//! block-diagonal in this splitting.
//!
//! The tangent block carries the Chern connection of the Fubini–Study
//! metric, `Γ^m_{pq} = -(δ^m_p z̄_q + δ^m_q z̄_p) / (1 + |z|²)`; the line block
//! carries `A = ∂ log h`. Parallel transport solves `dv/dt = -C(t) v` with
//! fixed-step RK4.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::atlas::{transition, transition_jacobian, ChartPoint};
use crate::error::{Error, Result};
use crate::fubini_study::fs_metric;
use crate::numeric::{deviation_from_identity, gauss_legendre, max_abs, serialize_cmatrix};
use crate::picard::{bundle_transition, chern_connection, chern_curvature, PicardClass};
use crate::{CMatrix, CVector};

/// Working-chart switch thresholds on `|z|` (leave above the upper bound,
/// return to the loop's own chart below the lower one).
pub const CHART_SWITCH_HIGH: f64 = 2.2;
pub const CHART_SWITCH_LOW: f64 = 1.8;

/// Largest change allowed when the step count is doubled.
pub const STEP_DOUBLING_TOLERANCE: f64 = 1e-6;

pub fn fibre_dimension(n: usize, _l: PicardClass) -> usize {
    n + 1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FibreVector {
    pub chart: usize,
    pub vacuum: Complex64,
    pub excited: Vec<Complex64>,
}

impl FibreVector {
    pub fn to_vector(&self) -> CVector {
        let mut v = Vec::with_capacity(self.excited.len() + 1);
        v.push(self.vacuum);
        v.extend_from_slice(&self.excited);
        CVector::from_vec(v)
    }

    pub fn from_vector(chart: usize, v: &CVector) -> Self {
        Self {
            chart,
            vacuum: v[0],
            excited: v.iter().skip(1).copied().collect(),
        }
    }
}

/// Block-diagonal transition `(g_jk)^l ⊕ ∂z_(j)/∂z_(k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionBlock {
    pub matrix: CMatrix,
}

impl TransitionBlock {
    pub fn scalar(&self) -> Complex64 {
        self.matrix[(0, 0)]
    }

    pub fn tangent(&self) -> CMatrix {
        let n = self.matrix.nrows() - 1;
        self.matrix.view((1, 1), (n, n)).into_owned()
    }

    /// Largest modulus in the off-diagonal blocks.
    pub fn off_block_max(&self) -> f64 {
        off_block_max(&self.matrix)
    }
}

fn off_block_max(m: &CMatrix) -> f64 {
    let n = m.nrows();
    (1..n)
        .map(|i| m[(0, i)].norm().max(m[(i, 0)].norm()))
        .fold(0.0, f64::max)
}

/// Transition taking chart-`k` fibre components to chart-`j` components at
/// `p` (given in any chart containing it).
pub fn qh_transition(
    l: PicardClass,
    j: usize,
    k: usize,
    p: &ChartPoint,
) -> Result<TransitionBlock> {
    let pk = transition(p, k)?;
    let n = pk.n();
    let jac = transition_jacobian(&pk, j)?;
    let g = bundle_transition(l, j, k, &pk.lift())?;
    let mut m = CMatrix::zeros(n + 1, n + 1);
    m[(0, 0)] = g;
    m.view_mut((1, 1), (n, n)).copy_from(&jac.matrix);
    Ok(TransitionBlock { matrix: m })
}

/// Christoffel matrices `Γ_p` with `(Γ_p)[(m, q)] = Γ^m_{pq}`.
pub fn christoffel(p: &ChartPoint) -> Vec<CMatrix> {
    let z = p.coords();
    let n = z.len();
    let q = 1.0 + p.norm_sqr();
    (0..n)
        .map(|pi| {
            CMatrix::from_fn(n, n, |m, qi| {
                let mut v = Complex64::new(0.0, 0.0);
                if m == pi {
                    v += z[qi].conj();
                }
                if m == qi {
                    v += z[pi].conj();
                }
                -v / q
            })
        })
        .collect()
}

/// `C(ξ)`: the full connection matrix contracted with a velocity `ξ`.
pub fn connection_matrix(l: PicardClass, p: &ChartPoint, xi: &[Complex64]) -> CMatrix {
    let z = p.coords();
    let n = z.len();
    let q = 1.0 + p.norm_sqr();
    let zbar_xi: Complex64 = z.iter().zip(xi).map(|(a, b)| a.conj() * b).sum();
    let mut c = CMatrix::zeros(n + 1, n + 1);
    c[(0, 0)] = chern_connection(l, p).contract(xi);
    for m in 0..n {
        for qi in 0..n {
            let mut v = xi[m] * z[qi].conj();
            if m == qi {
                v += zbar_xi;
            }
            c[(m + 1, qi + 1)] = -v / q;
        }
    }
    c
}

/// Affine point used in loop files: `[re, im]` for the first coordinate
/// (others zero), or one `[re, im]` pair per coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointSpec {
    Scalar([f64; 2]),
    Vector(Vec<[f64; 2]>),
}

impl PointSpec {
    fn to_coords(&self, n: usize) -> Result<Vec<Complex64>> {
        let mut z = vec![Complex64::new(0.0, 0.0); n];
        match self {
            PointSpec::Scalar([re, im]) => z[0] = Complex64::new(*re, *im),
            PointSpec::Vector(v) => {
                if v.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        got: v.len(),
                    });
                }
                for (zi, [re, im]) in z.iter_mut().zip(v) {
                    *zi = Complex64::new(*re, *im);
                }
            }
        }
        Ok(z)
    }
}

/// One segment of a loop file. Chart indices are one-based here, as in the
/// command-line interface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Segment {
    /// `z^1 = r e^{2πit}` (other coordinates zero), counterclockwise from
    /// `z^1 = r`.
    Latitude { chart: usize, radius: f64 },
    /// Straight pieces between consecutive points.
    Polyline {
        chart: usize,
        points: Vec<PointSpec>,
    },
}

#[derive(Debug, Clone, PartialEq)]
enum Path {
    Arc {
        radius: f64,
        start: f64,
        sweep: f64,
    },
    Line {
        from: Vec<Complex64>,
        to: Vec<Complex64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
struct Piece {
    chart: usize,
    n: usize,
    path: Path,
}

impl Piece {
    /// Position and velocity in the piece's own chart, `t ∈ [0, 1]`.
    fn eval(&self, t: f64) -> (ChartPoint, Vec<Complex64>) {
        let mut z = vec![Complex64::new(0.0, 0.0); self.n];
        let mut dz = vec![Complex64::new(0.0, 0.0); self.n];
        match &self.path {
            Path::Arc {
                radius,
                start,
                sweep,
            } => {
                let w = Complex64::from_polar(*radius, start + sweep * t);
                z[0] = w;
                dz[0] = Complex64::new(0.0, *sweep) * w;
            }
            Path::Line { from, to } => {
                for i in 0..self.n {
                    z[i] = from[i] + (to[i] - from[i]) * t;
                    dz[i] = to[i] - from[i];
                }
            }
        }
        (ChartPoint::new(self.chart, z).expect("validated chart"), dz)
    }

    fn reversed(&self) -> Self {
        let path = match &self.path {
            Path::Arc {
                radius,
                start,
                sweep,
            } => Path::Arc {
                radius: *radius,
                start: start + sweep,
                sweep: -sweep,
            },
            Path::Line { from, to } => Path::Line {
                from: to.clone(),
                to: from.clone(),
            },
        };
        Self {
            chart: self.chart,
            n: self.n,
            path,
        }
    }
}

/// A closed piecewise-smooth curve in CP^n.
#[derive(Debug, Clone, PartialEq)]
pub struct Loop {
    n: usize,
    pieces: Vec<Piece>,
    description: String,
}

const CLOSURE_TOLERANCE: f64 = 1e-9;

impl Loop {
    pub fn from_segments(n: usize, segments: &[Segment]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidLoop("dimension must be positive".into()));
        }
        let mut pieces = Vec::new();
        for seg in segments {
            let chart = match seg {
                Segment::Latitude { chart, .. } | Segment::Polyline { chart, .. } => *chart,
            };
            if chart == 0 || chart > n + 1 {
                return Err(Error::InvalidLoop(format!(
                    "chart {chart} outside 1..={}",
                    n + 1
                )));
            }
            let chart = chart - 1;
            match seg {
                Segment::Latitude { radius, .. } => {
                    if !(radius.is_finite() && *radius >= 0.0) {
                        return Err(Error::InvalidLoop(format!("bad radius {radius}")));
                    }
                    pieces.push(Piece {
                        chart,
                        n,
                        path: Path::Arc {
                            radius: *radius,
                            start: 0.0,
                            sweep: 2.0 * PI,
                        },
                    });
                }
                Segment::Polyline { points, .. } => {
                    if points.len() < 2 {
                        return Err(Error::InvalidLoop(
                            "polyline needs at least two points".into(),
                        ));
                    }
                    let coords = points
                        .iter()
                        .map(|p| p.to_coords(n))
                        .collect::<Result<Vec<_>>>()?;
                    for w in coords.windows(2) {
                        pieces.push(Piece {
                            chart,
                            n,
                            path: Path::Line {
                                from: w[0].clone(),
                                to: w[1].clone(),
                            },
                        });
                    }
                }
            }
        }
        if pieces.is_empty() {
            return Err(Error::InvalidLoop("no segments".into()));
        }
        let description = serde_json_like(segments);
        let lp = Self {
            n,
            pieces,
            description,
        };
        lp.check_closed()?;
        Ok(lp)
    }

    /// Latitude `|z^1| = r` in `chart` (zero-based).
    pub fn latitude(n: usize, chart: usize, radius: f64) -> Result<Self> {
        Self::from_segments(
            n,
            &[Segment::Latitude {
                chart: chart + 1,
                radius,
            }],
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    /// Base point in the chart of the first piece.
    pub fn base_point(&self) -> ChartPoint {
        self.pieces[0].eval(0.0).0
    }

    fn check_closed(&self) -> Result<()> {
        let k = self.pieces.len();
        for i in 0..k {
            let end = self.pieces[i].eval(1.0).0.lift();
            let start = self.pieces[(i + 1) % k].eval(0.0).0.lift();
            if !end.equivalent(&start, CLOSURE_TOLERANCE) {
                return Err(Error::InvalidLoop(format!(
                    "piece {i} does not end where the next piece starts"
                )));
            }
        }
        Ok(())
    }

    /// The same curve traversed backwards.
    pub fn reversed(&self) -> Self {
        Self {
            n: self.n,
            pieces: self.pieces.iter().rev().map(Piece::reversed).collect(),
            description: format!("reverse of {}", self.description),
        }
    }

    /// `self` followed by `other`; both must share the base point.
    pub fn then(&self, other: &Loop) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: other.n,
            });
        }
        let mut pieces = self.pieces.clone();
        pieces.extend(other.pieces.iter().cloned());
        let lp = Self {
            n: self.n,
            pieces,
            description: format!("{} then {}", self.description, other.description),
        };
        lp.check_closed()?;
        Ok(lp)
    }
}

fn serde_json_like(segments: &[Segment]) -> String {
    let parts: Vec<String> = segments
        .iter()
        .map(|s| match s {
            Segment::Latitude { chart, radius } => format!("latitude(chart={chart}, r={radius})"),
            Segment::Polyline { chart, points } => {
                format!("polyline(chart={chart}, {} points)", points.len())
            }
        })
        .collect();
    parts.join(" + ")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HolonomyResult {
    /// Holonomy in the base chart's frame (rows/cols ordered vacuum first).
    #[serde(serialize_with = "serialize_cmatrix")]
    pub matrix: CMatrix,
    #[serde(rename = "loop")]
    pub loop_description: String,
    pub base_chart: usize,
    pub deviation_from_identity: f64,
    pub vacuum_phase: Complex64,
    /// Largest modulus in the off-diagonal blocks.
    pub leakage: f64,
    pub steps: usize,
    /// `‖H(2·steps) − H(steps)‖`, entrywise sup.
    pub step_doubling_change: f64,
}

impl HolonomyResult {
    fn from_matrix(
        matrix: CMatrix,
        lp: &Loop,
        base_chart: usize,
        steps: usize,
        change: f64,
    ) -> Self {
        Self {
            deviation_from_identity: deviation_from_identity(&matrix),
            vacuum_phase: matrix[(0, 0)],
            leakage: off_block_max(&matrix),
            loop_description: lp.description.clone(),
            base_chart,
            steps,
            step_doubling_change: change,
            matrix,
        }
    }
}

/// Working-chart policy during transport.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChartPolicy {
    /// Switch charts when `|z|` leaves the comfortable band.
    Adaptive,
    /// Integrate entirely in one chart (which must contain the loop).
    Fixed(usize),
}

struct Transporter<'a> {
    l: PicardClass,
    lp: &'a Loop,
    policy: ChartPolicy,
}

impl Transporter<'_> {
    /// Point and velocity of `piece` at `t`, expressed in chart `w`.
    fn in_chart(&self, piece: &Piece, t: f64, w: usize) -> Result<(ChartPoint, Vec<Complex64>)> {
        let (p, dz) = piece.eval(t);
        if w == piece.chart {
            return Ok((p, dz));
        }
        let jac = transition_jacobian(&p, w)?;
        let v = &jac.matrix * CVector::from_column_slice(&dz);
        Ok((transition(&p, w)?, v.iter().copied().collect()))
    }

    fn rhs(&self, piece: &Piece, t: f64, w: usize, v: &CMatrix) -> Result<CMatrix> {
        let (p, xi) = self.in_chart(piece, t, w)?;
        Ok(-(connection_matrix(self.l, &p, &xi) * v))
    }

    fn choose_chart(&self, piece: &Piece, t: f64, current: usize) -> usize {
        let (p, _) = piece.eval(t);
        let here = p.lift();
        let size = |k: usize| {
            transition(&p, k)
                .map(|q| q.norm_sqr().sqrt())
                .unwrap_or(f64::INFINITY)
        };
        if current != piece.chart && size(piece.chart) < CHART_SWITCH_LOW {
            return piece.chart;
        }
        if size(current) > CHART_SWITCH_HIGH {
            return here.best_chart();
        }
        current
    }

    fn run(&self, steps: usize) -> Result<(CMatrix, usize)> {
        let n = self.lp.n;
        let first = &self.lp.pieces[0];
        let base = match self.policy {
            ChartPolicy::Fixed(c) => c,
            ChartPolicy::Adaptive => self.choose_chart(first, 0.0, first.chart),
        };
        let mut w = base;
        let mut v = CMatrix::identity(n + 1, n + 1);
        let per_piece = steps.div_ceil(self.lp.pieces.len()).max(1);
        let h = 1.0 / per_piece as f64;
        let half = Complex64::new(0.5 * h, 0.0);
        let full = Complex64::new(h, 0.0);
        let sixth = Complex64::new(h / 6.0, 0.0);
        let two = Complex64::new(2.0, 0.0);
        for piece in &self.lp.pieces {
            for i in 0..per_piece {
                let t = i as f64 * h;
                if self.policy == ChartPolicy::Adaptive {
                    let next = self.choose_chart(piece, t, w);
                    if next != w {
                        let (p, _) = piece.eval(t);
                        v = qh_transition(self.l, next, w, &p)?.matrix * v;
                        w = next;
                    }
                }
                let k1 = self.rhs(piece, t, w, &v)?;
                let k2 = self.rhs(piece, t + 0.5 * h, w, &(&v + &k1 * half))?;
                let k3 = self.rhs(piece, t + 0.5 * h, w, &(&v + &k2 * half))?;
                let k4 = self.rhs(piece, t + h, w, &(&v + &k3 * full))?;
                v += (k1 + k2 * two + k3 * two + k4) * sixth;
            }
        }
        let last = self.lp.pieces.last().expect("nonempty loop");
        let (end, _) = last.eval(1.0);
        let back = qh_transition(self.l, base, w, &end)?;
        Ok((back.matrix * v, base))
    }
}

/// Holonomy with exactly `steps` RK4 steps (spread over the loop's pieces)
/// and no step-doubling control.
pub fn transport_fixed(
    l: PicardClass,
    lp: &Loop,
    steps: usize,
    policy: ChartPolicy,
) -> Result<HolonomyResult> {
    let (m, base) = Transporter { l, lp, policy }.run(steps)?;
    Ok(HolonomyResult::from_matrix(m, lp, base, steps, f64::NAN))
}

/// Holonomy of the Chern connection on `T(CP^n) ⊕ O(l)` around `lp`.
///
/// Runs `steps` and `2·steps` RK4 steps and returns the finer result; fails
/// with [`Error::StepTooCoarse`] if the two differ by more than
/// [`STEP_DOUBLING_TOLERANCE`].
pub fn parallel_transport(l: PicardClass, lp: &Loop, steps: usize) -> Result<HolonomyResult> {
    parallel_transport_with(l, lp, steps, ChartPolicy::Adaptive)
}

pub fn parallel_transport_with(
    l: PicardClass,
    lp: &Loop,
    steps: usize,
    policy: ChartPolicy,
) -> Result<HolonomyResult> {
    if steps < 100 {
        return Err(Error::InvalidArgument(format!(
            "steps must be at least 100, got {steps}"
        )));
    }
    let t = Transporter { l, lp, policy };
    let (coarse, _) = t.run(steps)?;
    let (fine, base) = t.run(2 * steps)?;
    let change = max_abs(&(&fine - &coarse));
    if change > STEP_DOUBLING_TOLERANCE {
        return Err(Error::StepTooCoarse { change });
    }
    Ok(HolonomyResult::from_matrix(
        fine,
        lp,
        base,
        2 * steps,
        change,
    ))
}

/// `∫_{|w| < r} iF` over the disc in the coordinate line of CP^n for a line
/// bundle whose curvature is `c` times the Fubini–Study form, by
/// Gauss–Legendre quadrature of [`chern_curvature`].
pub fn enclosed_curvature(c: i64, radius: f64, nodes: usize) -> f64 {
    let (rs, ws) = gauss_legendre(nodes, 0.0, radius);
    // Radially symmetric integrand: the angular integral is exactly 2π.
    rs.iter()
        .zip(&ws)
        .map(|(r, w)| {
            let p = ChartPoint::new(0, vec![Complex64::new(*r, 0.0)]).expect("CP^1 chart");
            w * 2.0 * chern_curvature(PicardClass(c), &p)[(0, 0)].re * r * 2.0 * PI
        })
        .sum()
}

/// Holonomy predicted by Stokes' theorem for the latitude of radius `r` in
/// chart 0 of CP^n. Along the coordinate line the connection is diagonal:
/// `O(l)` for the vacuum, `T CP^1 ≅ O(2)` for the first tangent direction,
/// and the normal bundle `O(1)` for the rest.
pub fn latitude_holonomy_oracle(n: usize, l: PicardClass, radius: f64) -> CMatrix {
    const NODES: usize = 64;
    let phase = |c: i64| Complex64::from_polar(1.0, enclosed_curvature(c, radius, NODES));
    let mut m = CMatrix::zeros(n + 1, n + 1);
    m[(0, 0)] = phase(l.0);
    m[(1, 1)] = phase(2);
    for i in 2..=n {
        m[(i, i)] = phase(1);
    }
    m
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NonflatnessCertificate {
    pub n: usize,
    pub l: i64,
    pub segments: Vec<Segment>,
    pub radius: f64,
    pub holonomy: HolonomyResult,
    /// Entrywise sup distance to the Stokes prediction.
    pub oracle_defect: f64,
    pub tangent_deviation: f64,
    pub pass: bool,
}

/// Deviation above which a holonomy certifies a nonflat connection.
pub const NONFLAT_THRESHOLD: f64 = 0.1;

/// Radii tried in order. For n = 1 the tangent rotation at r = 1 is exactly
/// 2π, so l = 0 needs a smaller loop.
const CERTIFICATE_RADII: [f64; 4] = [1.0, 0.5, 0.75, 0.25];

pub fn nonflatness_certificate(
    n: usize,
    l: PicardClass,
    steps: usize,
) -> Result<NonflatnessCertificate> {
    let mut last = None;
    for radius in CERTIFICATE_RADII {
        let lp = Loop::latitude(n, 0, radius)?;
        let hol = parallel_transport(l, &lp, steps)?;
        let oracle = latitude_holonomy_oracle(n, l, radius);
        let tangent = hol.matrix.view((1, 1), (n, n)).into_owned();
        let cert = NonflatnessCertificate {
            n,
            l: l.0,
            segments: vec![Segment::Latitude { chart: 1, radius }],
            radius,
            oracle_defect: max_abs(&(&hol.matrix - oracle)),
            tangent_deviation: deviation_from_identity(&tangent),
            pass: hol.deviation_from_identity > NONFLAT_THRESHOLD,
            holonomy: hol,
        };
        if cert.pass {
            return Ok(cert);
        }
        last = Some(cert);
    }
    Ok(last.expect("at least one radius"))
}

/// `ξ^H g ξ` along the transport is constant for the tangent block; helper
/// for checking metric compatibility.
pub fn tangent_norm_sqr(p: &ChartPoint, xi: &[Complex64]) -> f64 {
    fs_metric(p).norm_sqr(xi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{wirtinger_jacobians, Stencil};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn fibre_dimensions() {
        assert_eq!(fibre_dimension(1, PicardClass(3)), 2);
        assert_eq!(fibre_dimension(2, PicardClass(-1)), 3);
        assert_eq!(
            fibre_dimension(2, PicardClass(1)) as u64,
            crate::sections::dimension(2, 1)
        );
    }

    #[test]
    fn transition_example_on_cp1() {
        // Z = (1, 2): chart 0 coordinate 2, target chart 1.
        let p = ChartPoint::new(0, vec![c(2.0, 0.0)]).unwrap();
        let t = qh_transition(PicardClass(1), 1, 0, &p).unwrap();
        assert!((t.scalar() - c(0.5, 0.0)).norm() < 1e-15);
        assert!((t.tangent()[(0, 0)] - c(-0.25, 0.0)).norm() < 1e-15);
        assert_eq!(t.off_block_max(), 0.0);
        let id = qh_transition(PicardClass(4), 0, 0, &p).unwrap();
        assert_eq!(id.matrix, CMatrix::identity(2, 2));
    }

    #[test]
    fn christoffel_matches_metric_derivative() {
        // Γ_p = g^{-1} ∂_p g in the (row = antiholomorphic) layout.
        let z = vec![c(0.3, -0.7), c(1.2, 0.4)];
        let p = ChartPoint::new(0, z.clone()).unwrap();
        let g = fs_metric(&p).g;
        let ginv = g.clone().try_inverse().unwrap();
        let (dz, _) = wirtinger_jacobians(
            |w| {
                fs_metric(&ChartPoint::new(0, w.to_vec()).unwrap())
                    .g
                    .iter()
                    .copied()
                    .collect()
            },
            &z,
            Stencil::Central5,
        );
        let gammas = christoffel(&p);
        for (pi, gamma) in gammas.iter().enumerate() {
            let dg = CMatrix::from_iterator(2, 2, dz.column(pi).iter().copied());
            let expected = &ginv * dg;
            assert!(max_abs(&(&expected - gamma)) < 1e-9, "p = {pi}");
        }
    }

    #[test]
    fn connection_matrix_contracts_christoffels() {
        let p = ChartPoint::new(1, vec![c(0.5, 0.1), c(-0.2, 0.9)]).unwrap();
        let xi = [c(0.3, 0.2), c(-1.0, 0.5)];
        let cm = connection_matrix(PicardClass(2), &p, &xi);
        let gammas = christoffel(&p);
        let expected = &gammas[0] * xi[0] + &gammas[1] * xi[1];
        assert!(max_abs(&(cm.view((1, 1), (2, 2)).into_owned() - expected)) < 1e-15);
        assert_eq!(off_block_max(&cm), 0.0);
    }

    #[test]
    fn constant_loop_is_trivial() {
        let lp = Loop::latitude(2, 0, 0.0).unwrap();
        let h = parallel_transport(PicardClass(3), &lp, 100).unwrap();
        assert!(h.deviation_from_identity < 1e-15);
    }

    #[test]
    fn too_few_steps_rejected() {
        let lp = Loop::latitude(1, 0, 1.0).unwrap();
        assert!(matches!(
            parallel_transport(PicardClass(1), &lp, 50),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn coarse_steps_detected() {
        // l = 40 winds the vacuum phase by 40π; 100 steps cannot resolve it.
        let lp = Loop::latitude(1, 0, 1.0).unwrap();
        assert!(matches!(
            parallel_transport(PicardClass(40), &lp, 100),
            Err(Error::StepTooCoarse { .. })
        ));
    }

    #[test]
    fn open_polyline_rejected() {
        let seg = Segment::Polyline {
            chart: 1,
            points: vec![PointSpec::Scalar([0.0, 0.0]), PointSpec::Scalar([1.0, 0.0])],
        };
        assert!(matches!(
            Loop::from_segments(1, &[seg]),
            Err(Error::InvalidLoop(_))
        ));
        assert!(Loop::latitude(1, 5, 1.0).is_err());
    }

    #[test]
    fn loop_file_format_parses() {
        let json = r#"[{"type": "latitude", "chart": 1, "radius": 0.5},
                       {"type": "polyline", "chart": 1, "points": [[0.5, 0], [0.5, 0.5], [0.5, 0]]}]"#;
        let segs: Vec<Segment> = serde_json::from_str(json).unwrap();
        assert_eq!(segs.len(), 2);
        let lp = Loop::from_segments(1, &segs).unwrap();
        assert_eq!(lp.pieces.len(), 3);
    }

    #[test]
    fn stokes_oracle_closed_form() {
        // ∫_{|w|<r} 2c/(1+|w|²)² dxdy = 2πc r²/(1+r²)
        for (cc, r) in [(1, 1.0), (-2, 0.5), (2, 1.0)] {
            let exact = 2.0 * PI * cc as f64 * r * r / (1.0 + r * r);
            assert!((enclosed_curvature(cc, r, 64) - exact).abs() < 1e-13);
        }
    }
}
