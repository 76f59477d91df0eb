//! Linear and projective harmonic oscillator spectra (ħ = ω = 1).
//!
//! Both Hamiltonians are diagonal on occupation states `|m_1, …, m_n⟩`:
//! `E_lin = Σ (m_j + 1/2)` and `E_proj = log(1 + E_lin)`. Only the vacuum
//! and the `n` single-quantum states are admissible for the projective
//! oscillator.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::atlas::ChartPoint;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OccupationState(pub Vec<u32>);

impl OccupationState {
    pub fn vacuum(n: usize) -> Self {
        Self(vec![0; n])
    }

    /// One quantum in mode `j`.
    pub fn excited(n: usize, j: usize) -> Self {
        let mut m = vec![0; n];
        m[j] = 1;
        Self(m)
    }

    pub fn is_admissible(&self) -> bool {
        let ones = self.0.iter().filter(|&&m| m == 1).count();
        self.0.iter().all(|&m| m <= 1) && ones <= 1
    }
}

impl fmt::Display for OccupationState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|m| m.to_string()).collect();
        write!(f, "|{}>", parts.join(" "))
    }
}

/// An occupation state known to be admissible for the projective
/// oscillator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdmissibleState(OccupationState);

impl AdmissibleState {
    pub fn state(&self) -> &OccupationState {
        &self.0
    }
}

impl TryFrom<OccupationState> for AdmissibleState {
    type Error = Error;

    fn try_from(s: OccupationState) -> Result<Self> {
        if s.is_admissible() {
            Ok(Self(s))
        } else {
            Err(Error::InadmissibleState(s.0))
        }
    }
}

pub fn linear_eigenvalue(state: &OccupationState) -> f64 {
    state.0.iter().map(|&m| m as f64 + 0.5).sum()
}

pub fn projective_eigenvalue(state: &OccupationState) -> Result<f64> {
    let admissible = AdmissibleState::try_from(state.clone())?;
    Ok(admissible_eigenvalue(&admissible))
}

pub fn admissible_eigenvalue(state: &AdmissibleState) -> f64 {
    linear_eigenvalue(&state.0).ln_1p()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRow {
    pub state: OccupationState,
    pub linear_eigenvalue: f64,
    pub projective_eigenvalue: f64,
    /// Multiplicity of this row's projective eigenvalue.
    pub degeneracy: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumTable {
    pub n: usize,
    pub rows: Vec<SpectrumRow>,
}

impl SpectrumTable {
    /// Distinct projective levels with their degeneracies, ascending.
    pub fn levels(&self) -> Vec<(f64, usize)> {
        let mut levels: Vec<(f64, usize)> = Vec::new();
        for row in &self.rows {
            match levels
                .iter_mut()
                .find(|(e, _)| *e == row.projective_eigenvalue)
            {
                Some(level) => level.1 += 1,
                None => levels.push((row.projective_eigenvalue, 1)),
            }
        }
        levels.sort_by(|a, b| a.0.total_cmp(&b.0));
        levels
    }
}

/// The `n + 1` admissible states: vacuum `log(1 + n/2)` and the `n`-fold
/// level `log(2 + n/2)`.
pub fn projective_spectrum(n: usize) -> Result<SpectrumTable> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "projective spectrum needs n >= 1".into(),
        ));
    }
    let mut states = vec![OccupationState::vacuum(n)];
    states.extend((0..n).map(|j| OccupationState::excited(n, j)));
    let rows = states
        .into_iter()
        .map(|state| {
            let admissible =
                AdmissibleState::try_from(state.clone()).expect("constructed admissible");
            let degeneracy = if state.0.iter().all(|&m| m == 0) {
                1
            } else {
                n
            };
            SpectrumRow {
                linear_eigenvalue: linear_eigenvalue(&state),
                projective_eigenvalue: admissible_eigenvalue(&admissible),
                degeneracy,
                state,
            }
        })
        .collect();
    Ok(SpectrumTable { n, rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaylorReport {
    /// `s = Σ |z|²`.
    pub s: f64,
    /// `|log(1 + s) − s|`.
    pub remainder: f64,
    /// `s² / 2`.
    pub bound: f64,
    pub bound_holds: bool,
    /// `s ≤ small_threshold`.
    pub small_regime: bool,
}

/// Bound on the potential's first-order Taylor remainder.
pub fn taylor_consistency(p: &ChartPoint, small_threshold: f64) -> TaylorReport {
    taylor_remainder(p.norm_sqr(), small_threshold)
}

pub fn taylor_remainder(s: f64, small_threshold: f64) -> TaylorReport {
    let remainder = (s.ln_1p() - s).abs();
    let bound = 0.5 * s * s;
    TaylorReport {
        s,
        remainder,
        bound,
        bound_holds: remainder <= bound,
        small_regime: s <= small_threshold,
    }
}
