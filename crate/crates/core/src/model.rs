//! Problem instances: spectrum, couplings, bath and Gibbs weights.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{frobenius, CMatrix};

/// Relative Frobenius tolerance for the Hermiticity check on couplings.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Relative width used for both degeneracy detection and Bohr-frequency grouping.
pub const SPECTRAL_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BathKind {
    Glauber,
    CustomTabulated,
}

impl FromStr for BathKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "glauber" => Ok(BathKind::Glauber),
            "custom-tabulated" | "custom_tabulated" => Ok(BathKind::CustomTabulated),
            other => Err(Error::UnknownBathKind(other.to_string())),
        }
    }
}

impl fmt::Display for BathKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BathKind::Glauber => "glauber",
            BathKind::CustomTabulated => "custom-tabulated",
        })
    }
}

/// Bath spectral function.
///
/// A tabulated bath stores its values keyed by frequency, with keys given as decimal strings
/// in `params`. Lookups match within `1e-9 · max(1, |ω|)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BathModel {
    pub kind: BathKind,
    pub params: BTreeMap<String, f64>,
    table: Vec<(f64, f64)>,
}

impl BathModel {
    pub fn glauber() -> Self {
        BathModel {
            kind: BathKind::Glauber,
            params: BTreeMap::new(),
            table: Vec::new(),
        }
    }

    /// Tabulated bath from `(ω, G(ω))` pairs.
    pub fn tabulated(points: &[(f64, f64)]) -> Result<Self> {
        let params = points
            .iter()
            .map(|&(w, g)| (format!("{w:?}"), g))
            .collect();
        Self::from_parts(BathKind::CustomTabulated, params)
    }

    pub fn from_parts(kind: BathKind, params: BTreeMap<String, f64>) -> Result<Self> {
        let mut table = Vec::new();
        if kind == BathKind::CustomTabulated {
            for (key, &value) in &params {
                let w: f64 = key.trim().parse().map_err(|_| {
                    Error::MalformedDocument(format!("tabulated bath key '{key}' is not a number"))
                })?;
                if !w.is_finite() || !value.is_finite() {
                    return Err(Error::MalformedDocument(format!(
                        "tabulated bath entry {key} -> {value} is not finite"
                    )));
                }
                table.push((w, value));
            }
            table.sort_by(|a, b| a.0.total_cmp(&b.0));
        }
        Ok(BathModel { kind, params, table })
    }

    /// Evaluates `G(ω)` at inverse temperature `beta`.
    pub fn eval(&self, omega: f64, beta: f64) -> Result<f64> {
        match self.kind {
            BathKind::Glauber => Ok(glauber(omega, beta)),
            BathKind::CustomTabulated => {
                let tol = 1e-9 * omega.abs().max(1.0);
                let i = self.table.partition_point(|&(w, _)| w < omega - tol);
                match self.table.get(i) {
                    Some(&(w, g)) if (w - omega).abs() <= tol => Ok(g),
                    _ => Err(Error::MissingBathFrequency(omega)),
                }
            }
        }
    }

    /// Upper bound on admissible values.
    pub fn g_max(&self) -> f64 {
        match self.kind {
            BathKind::Glauber => 1.0,
            BathKind::CustomTabulated => f64::INFINITY,
        }
    }
}

/// `1/(1+e^{βω})` without overflow.
pub fn glauber(omega: f64, beta: f64) -> f64 {
    let x = beta * omega;
    if x > 0.0 {
        let e = (-x).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + x.exp())
    }
}

/// Evaluates the bath spectral function.
pub fn bath_g(model: &BathModel, omega: f64, beta: f64) -> Result<f64> {
    model.eval(omega, beta)
}

/// A validated problem instance.
#[derive(Debug, Clone)]
pub struct SystemSpec {
    energies: Vec<f64>,
    couplings: Vec<CMatrix>,
    beta: f64,
    bath: BathModel,
    /// `rates[(k, m)] = G(ε_k − ε_m)`.
    rates: nalgebra::DMatrix<f64>,
}

impl SystemSpec {
    /// Builds and validates an instance.
    pub fn new(energies: Vec<f64>, couplings: Vec<CMatrix>, beta: f64, bath: BathModel) -> Result<Self> {
        Self::build(energies, couplings, beta, bath, true)
    }

    /// Like [`SystemSpec::new`] but accepts couplings without off-diagonal elements.
    ///
    /// Used to exercise non-primitive generators.
    pub fn new_permissive(
        energies: Vec<f64>,
        couplings: Vec<CMatrix>,
        beta: f64,
        bath: BathModel,
    ) -> Result<Self> {
        Self::build(energies, couplings, beta, bath, false)
    }

    fn build(
        energies: Vec<f64>,
        couplings: Vec<CMatrix>,
        beta: f64,
        bath: BathModel,
        require_off_diagonal: bool,
    ) -> Result<Self> {
        let d = energies.len();
        if d < 2 {
            return Err(Error::MalformedDocument(format!("need at least 2 energies, got {d}")));
        }
        if energies.iter().any(|e| !e.is_finite()) {
            return Err(Error::MalformedDocument("energies must be finite".into()));
        }
        if !beta.is_finite() || beta < 0.0 {
            return Err(Error::MalformedDocument(format!("beta must be finite and non-negative, got {beta}")));
        }
        let tol = spectral_tol(&energies);
        for k in 0..d - 1 {
            let gap = energies[k + 1] - energies[k];
            if gap.abs() <= tol {
                return Err(Error::DegenerateSpectrum { index: k, gap, tol });
            }
            if gap < 0.0 {
                return Err(Error::MalformedDocument(format!(
                    "energies must be strictly ascending (index {k})"
                )));
            }
        }
        if couplings.is_empty() {
            return Err(Error::EmptyCouplings("no coupling operators given".into()));
        }
        for (index, s) in couplings.iter().enumerate() {
            if s.nrows() != d || s.ncols() != d {
                return Err(Error::MalformedDocument(format!(
                    "coupling {index} has shape {}x{}, expected {d}x{d}",
                    s.nrows(),
                    s.ncols()
                )));
            }
            if s.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::MalformedDocument(format!("coupling {index} has non-finite entries")));
            }
            let norm = frobenius(s);
            if norm > 0.0 {
                let residual = frobenius(&(s - s.adjoint())) / norm;
                if residual > HERMITIAN_TOL {
                    return Err(Error::NonHermitianCoupling { index, residual });
                }
            }
        }
        if require_off_diagonal {
            let any_off = couplings
                .iter()
                .any(|s| (0..d).any(|i| (0..d).any(|j| i != j && s[(i, j)].norm() > 0.0)));
            if !any_off {
                return Err(Error::EmptyCouplings(
                    "no coupling has a nonzero off-diagonal element".into(),
                ));
            }
        }

        let mut rates = nalgebra::DMatrix::zeros(d, d);
        for k in 0..d {
            for m in 0..d {
                let omega = energies[k] - energies[m];
                let g = bath.eval(omega, beta)?;
                if !(g > 0.0 && g <= bath.g_max() && g.is_finite()) {
                    return Err(Error::InvalidParameters(format!(
                        "bath value G({omega}) = {g} outside (0, {}]",
                        bath.g_max()
                    )));
                }
                rates[(k, m)] = g;
            }
        }
        Ok(SystemSpec {
            energies,
            couplings,
            beta,
            bath,
            rates,
        })
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn couplings(&self) -> &[CMatrix] {
        &self.couplings
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn bath(&self) -> &BathModel {
        &self.bath
    }

    /// Degeneracy tolerance `1e-9 · (ε_max − ε_min)`.
    pub fn tol_deg(&self) -> f64 {
        spectral_tol(&self.energies)
    }

    /// `G(ε_k − ε_m)`.
    #[inline]
    pub fn rate(&self, k: usize, m: usize) -> f64 {
        self.rates[(k, m)]
    }

    /// Serializes to the JSON input document.
    pub fn to_document(&self) -> serde_json::Value {
        let couplings: Vec<RawMatrix> = self
            .couplings
            .iter()
            .map(|s| RawMatrix {
                re: (0..s.nrows()).map(|i| (0..s.ncols()).map(|j| s[(i, j)].re).collect()).collect(),
                im: Some((0..s.nrows()).map(|i| (0..s.ncols()).map(|j| s[(i, j)].im).collect()).collect()),
            })
            .collect();
        let doc = RawDocument {
            energies: self.energies.clone(),
            couplings,
            beta: self.beta,
            bath: RawBath {
                kind: self.bath.kind.to_string(),
                params: Some(self.bath.params.clone()),
            },
        };
        serde_json::to_value(doc).expect("document serialization cannot fail")
    }
}

fn spectral_tol(energies: &[f64]) -> f64 {
    let lo = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = energies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    SPECTRAL_REL_TOL * (hi - lo)
}

#[derive(Debug, Serialize, Deserialize)]
struct RawMatrix {
    re: Vec<Vec<f64>>,
    #[serde(default)]
    im: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawBath {
    kind: String,
    #[serde(default)]
    params: Option<BTreeMap<String, f64>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawDocument {
    energies: Vec<f64>,
    couplings: Vec<RawMatrix>,
    beta: f64,
    bath: RawBath,
}

fn raw_to_matrix(index: usize, raw: &RawMatrix, d: usize) -> Result<CMatrix> {
    let bad = |what: &str| Error::MalformedDocument(format!("coupling {index}: {what}"));
    if raw.re.len() != d || raw.re.iter().any(|r| r.len() != d) {
        return Err(bad("'re' must be a d x d array"));
    }
    if let Some(im) = &raw.im {
        if im.len() != d || im.iter().any(|r| r.len() != d) {
            return Err(bad("'im' must be a d x d array"));
        }
    }
    Ok(CMatrix::from_fn(d, d, |i, j| {
        Complex64::new(raw.re[i][j], raw.im.as_ref().map_or(0.0, |im| im[i][j]))
    }))
}

/// Parses and validates a JSON instance document.
pub fn load_system(document: &str) -> Result<SystemSpec> {
    let raw: RawDocument =
        serde_json::from_str(document).map_err(|e| Error::MalformedDocument(e.to_string()))?;
    let d = raw.energies.len();
    let couplings = raw
        .couplings
        .iter()
        .enumerate()
        .map(|(i, m)| raw_to_matrix(i, m, d))
        .collect::<Result<Vec<_>>>()?;
    let kind: BathKind = raw.bath.kind.parse()?;
    let bath = BathModel::from_parts(kind, raw.bath.params.unwrap_or_default())?;
    SystemSpec::new(raw.energies, couplings, raw.beta, bath)
}

/// Normalized Gibbs weights `σ_k ∝ e^{−βε_k}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GibbsWeights {
    pub sigma: Vec<f64>,
    pub log_z: f64,
    pub sigma_min: f64,
}

impl GibbsWeights {
    /// `σ(a,b) = √(σ_a σ_b)`.
    #[inline]
    pub fn pair(&self, a: usize, b: usize) -> f64 {
        (self.sigma[a] * self.sigma[b]).sqrt()
    }

    pub fn dim(&self) -> usize {
        self.sigma.len()
    }
}

/// Gibbs weights computed in the log domain, shifted by the ground energy.
pub fn gibbs(spec: &SystemSpec) -> GibbsWeights {
    let beta = spec.beta();
    let e0 = spec.energies().iter().copied().fold(f64::INFINITY, f64::min);
    let boltz: Vec<f64> = spec.energies().iter().map(|&e| (-beta * (e - e0)).exp()).collect();
    let z: f64 = boltz.iter().sum();
    let sigma: Vec<f64> = boltz.iter().map(|b| b / z).collect();
    let sigma_min = sigma.iter().copied().fold(f64::INFINITY, f64::min);
    GibbsWeights {
        sigma,
        log_z: -beta * e0 + z.ln(),
        sigma_min,
    }
}
