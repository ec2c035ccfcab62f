//! Generators for the model families: all-to-all counterexample, truncated oscillator, particle
//! hopping on a line, and the nearest-neighbour ladder.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix};
use crate::model::{BathModel, SystemSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Counterexample,
    Oscillator,
    ParticleLine,
    DLevel,
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "counterexample" => Ok(ModelKind::Counterexample),
            "oscillator" => Ok(ModelKind::Oscillator),
            "particle_line" => Ok(ModelKind::ParticleLine),
            "d_level" => Ok(ModelKind::DLevel),
            _ => Err(Error::InvalidParameters(format!(
                "unknown model '{s}' (expected counterexample, oscillator, particle_line or d_level)"
            ))),
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Counterexample => "counterexample",
            ModelKind::Oscillator => "oscillator",
            ModelKind::ParticleLine => "particle_line",
            ModelKind::DLevel => "d_level",
        })
    }
}

/// Parameters of a model family member.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams {
    pub model: ModelKind,
    /// `N` for the counterexample and particle line, `D` for the oscillator and ladder.
    pub size: usize,
    pub gamma: f64,
    /// Inverse temperature in units of the level spacing.
    #[serde(rename = "K")]
    pub k: f64,
    /// Energy offset of the particle-line spectrum.
    pub g: f64,
}

impl ModelParams {
    pub fn new(model: ModelKind, size: usize, gamma: f64, k: f64) -> Self {
        ModelParams { model, size, gamma, k, g: 0.0 }
    }

    pub fn build(&self) -> Result<SystemSpec> {
        match self.model {
            ModelKind::Counterexample => make_counterexample(self.size, self.gamma, self.k),
            ModelKind::Oscillator => make_oscillator(self.size, self.gamma, self.k),
            ModelKind::ParticleLine => make_particle_line(self.size, self.gamma, self.g, self.k),
            ModelKind::DLevel => make_d_level(self.size, self.gamma, self.k),
        }
    }
}

fn check(size: usize, min: usize, gamma: f64, beta: f64) -> Result<()> {
    if size < min {
        return Err(Error::InvalidParameters(format!("size must be at least {min}, got {size}")));
    }
    if gamma == 0.0 || !gamma.is_finite() {
        return Err(Error::InvalidParameters(format!("gamma must be finite and nonzero, got {gamma}")));
    }
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::InvalidParameters(format!("inverse temperature must be finite and non-negative, got {beta}")));
    }
    Ok(())
}

/// Energies `1..N`, one coupling with every entry `γ/√N`.
pub fn make_counterexample(n: usize, gamma: f64, beta: f64) -> Result<SystemSpec> {
    check(n, 2, gamma, beta)?;
    let energies = (1..=n).map(|a| a as f64).collect();
    let s = CMatrix::from_element(n, n, c(gamma / (n as f64).sqrt()));
    SystemSpec::new(energies, vec![s], beta, BathModel::glauber())
}

/// Energies `0..D`, coupling `γ(a + a†)` on `D + 1` levels, `β = K`.
pub fn make_oscillator(d_max: usize, gamma: f64, k: f64) -> Result<SystemSpec> {
    check(d_max, 2, gamma, k)?;
    let d = d_max + 1;
    let energies = (0..d).map(|n| n as f64).collect();
    let mut s = CMatrix::zeros(d, d);
    for n in 1..d {
        let v = c(gamma * (n as f64).sqrt());
        s[(n, n - 1)] = v;
        s[(n - 1, n)] = v;
    }
    SystemSpec::new(energies, vec![s], k, BathModel::glauber())
}

/// Single particle hopping on `N` sites with on-site couplings `γ|n⟩⟨n|`, in the eigenbasis.
///
/// Mode `k` has energy `2cos(kπ/(N+1)) − g`; levels are relabeled in ascending order, so mode
/// `k` becomes level `N − k`.
pub fn make_particle_line(n: usize, gamma: f64, g: f64, k: f64) -> Result<SystemSpec> {
    check(n, 3, gamma, k)?;
    if !g.is_finite() {
        return Err(Error::InvalidParameters("offset g must be finite".into()));
    }
    let np1 = (n + 1) as f64;
    let mode = |level: usize| n - level;
    let energies = (0..n)
        .map(|level| 2.0 * (mode(level) as f64 * std::f64::consts::PI / np1).cos() - g)
        .collect();
    let couplings = (1..=n)
        .map(|site| {
            let amp = |level: usize| (mode(level) as f64 * site as f64 * std::f64::consts::PI / np1).sin();
            CMatrix::from_fn(n, n, |p, q| c(2.0 * gamma / np1 * amp(p) * amp(q)))
        })
        .collect();
    SystemSpec::new(energies, couplings, k, BathModel::glauber())
}

/// Energies `1..D`, unweighted nearest-neighbour coupling `γ`.
pub fn make_d_level(d: usize, gamma: f64, k: f64) -> Result<SystemSpec> {
    check(d, 3, gamma, k)?;
    let energies = (1..=d).map(|n| n as f64).collect();
    let mut s = CMatrix::zeros(d, d);
    for n in 0..d - 1 {
        s[(n + 1, n)] = c(gamma);
        s[(n, n + 1)] = c(gamma);
    }
    SystemSpec::new(energies, vec![s], k, BathModel::glauber())
}
