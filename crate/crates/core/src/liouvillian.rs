//! Full Davies superoperator on vectorized operators, with exact gap and evolution oracles.
//!
//! Vectorization is row-major: `|f⟩_{a·d+b} = f_{ab}`, so `|AXB⟩ = (A ⊗ Bᵀ)|X⟩`.

use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::blocks::{bohr_index, BohrIndex};
use crate::error::{Error, Result};
use crate::linalg::{c, eigh, frobenius, trace_norm, CMatrix, Eigh};
use crate::model::{GibbsWeights, SystemSpec};

/// Default largest dimension `d` for dense `d² × d²` operations.
pub const DEFAULT_DENSE_LIMIT: usize = 64;

/// Relative width of the zero-eigenvalue cluster used for primitivity detection.
pub const ZERO_CLUSTER_TOL: f64 = 1e-10;

/// One nonzero matrix element `S_{km}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entry {
    pub k: usize,
    pub m: usize,
    pub value: Complex64,
}

/// Bohr-frequency components `S^α(ω)`, stored sparsely.
#[derive(Debug, Clone)]
pub struct FourierComponents {
    pub dim: usize,
    /// Component frequencies, ascending.
    pub frequencies: Vec<f64>,
    /// `entries[i][α]` lists the elements of `S^α(frequencies[i])`.
    pub entries: Vec<Vec<Vec<Entry>>>,
}

impl FourierComponents {
    pub fn dense(&self, i: usize, alpha: usize) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim, self.dim);
        for e in &self.entries[i][alpha] {
            out[(e.k, e.m)] = e.value;
        }
        out
    }

    pub fn index_of(&self, omega: f64) -> Option<usize> {
        self.frequencies
            .iter()
            .position(|&w| (w - omega).abs() <= 1e-9 * omega.abs().max(1.0))
    }
}

/// Splits every coupling into components at `ω = ε_k − ε_m`.
pub fn fourier_components(spec: &SystemSpec) -> FourierComponents {
    fourier_with_index(spec, &bohr_index(spec))
}

fn fourier_with_index(spec: &SystemSpec, idx: &BohrIndex) -> FourierComponents {
    let d = spec.dim();
    let n_alpha = spec.couplings().len();
    let mut slots: Vec<Vec<Vec<Entry>>> = vec![vec![Vec::new(); n_alpha]; idx.groups.len()];
    for (alpha, op) in spec.couplings().iter().enumerate() {
        for k in 0..d {
            for m in 0..d {
                let v = op[(k, m)];
                if v != Complex64::new(0.0, 0.0) {
                    // the pair (m, k) carries ν = ε_k − ε_m
                    let (g, _) = idx.locate(m, k);
                    slots[g][alpha].push(Entry { k, m, value: v });
                }
            }
        }
    }
    let mut frequencies = Vec::new();
    let mut entries = Vec::new();
    for (g, slot) in slots.into_iter().enumerate() {
        if slot.iter().any(|s| !s.is_empty()) {
            frequencies.push(idx.groups[g].nu);
            entries.push(slot);
        }
    }
    FourierComponents {
        dim: d,
        frequencies,
        entries,
    }
}

/// Dense Davies generator in the Heisenberg picture.
#[derive(Debug, Clone)]
pub struct Superoperator {
    pub dim: usize,
    /// Dissipative part `L̂_d`.
    pub dissipative: CMatrix,
    /// `h[a·d+b] = ε_a − ε_b`; the Hamiltonian part is `diag(i·h)`.
    pub hamiltonian: Vec<f64>,
}

impl Superoperator {
    /// `L̂ = L̂_d + i·diag(h)`.
    pub fn matrix(&self) -> CMatrix {
        let mut out = self.dissipative.clone();
        for (i, &h) in self.hamiltonian.iter().enumerate() {
            out[(i, i)] += Complex64::new(0.0, h);
        }
        out
    }

    /// Applies `L̂` to a vectorized operator.
    pub fn apply(&self, f: &CMatrix) -> CMatrix {
        let d = self.dim;
        let v = DVector::from_iterator(d * d, (0..d * d).map(|i| f[(i / d, i % d)]));
        let out = self.matrix() * v;
        CMatrix::from_fn(d, d, |a, b| out[a * d + b])
    }

    /// `Q = ½(Γ^{½} L̂_d Γ^{−½} + Γ^{−½} L̂_d† Γ^{½})`, Hermitian with kernel `vec(√σ)`.
    pub fn symmetrized(&self, w: &GibbsWeights) -> CMatrix {
        let g = gamma_sqrt(self.dim, w);
        let l = &self.dissipative;
        CMatrix::from_fn(l.nrows(), l.ncols(), |i, j| {
            (l[(i, j)] * (g[i] / g[j]) + l[(j, i)].conj() * (g[j] / g[i])) * 0.5
        })
    }

    /// Dirichlet matrix `−½(Γ̂L̂_d + L̂_d†Γ̂)`.
    pub fn dirichlet_matrix(&self, w: &GibbsWeights) -> CMatrix {
        let d = self.dim;
        let gam: Vec<f64> = (0..d * d).map(|i| w.pair(i / d, i % d)).collect();
        let l = &self.dissipative;
        CMatrix::from_fn(l.nrows(), l.ncols(), |i, j| {
            -(l[(i, j)] * gam[i] + l[(j, i)].conj() * gam[j]) * 0.5
        })
    }
}

/// Diagonal of `Γ̂^{½}`: `σ(a,b)^{½}`.
fn gamma_sqrt(d: usize, w: &GibbsWeights) -> Vec<f64> {
    (0..d * d).map(|i| w.pair(i / d, i % d).sqrt()).collect()
}

/// Builds the full generator, failing when `d` exceeds [`DEFAULT_DENSE_LIMIT`].
pub fn build_davies(spec: &SystemSpec) -> Result<Superoperator> {
    build_davies_with_limit(spec, DEFAULT_DENSE_LIMIT)
}

pub fn build_davies_with_limit(spec: &SystemSpec, limit: usize) -> Result<Superoperator> {
    let d = spec.dim();
    if d > limit {
        return Err(Error::DimensionOverflow { dim: d, limit });
    }
    let fc = fourier_components(spec);
    let n = d * d;
    let mut l = CMatrix::zeros(n, n);
    for (i, &omega) in fc.frequencies.iter().enumerate() {
        let g = spec.bath().eval(omega, spec.beta())?;
        for comp in &fc.entries[i] {
            // S†(ω) f S(ω): [(m,m'),(k,k')] += G conj(S_km) S_k'm'
            for e1 in comp {
                for e2 in comp {
                    l[(e1.m * d + e2.m, e1.k * d + e2.k)] += e1.value.conj() * e2.value * g;
                }
            }
            // X = S†(ω) S(ω); −½G (X ⊗ 1 + 1 ⊗ Xᵀ)
            let mut x = CMatrix::zeros(d, d);
            for e1 in comp {
                for e2 in comp {
                    if e1.k == e2.k {
                        x[(e1.m, e2.m)] += e1.value.conj() * e2.value;
                    }
                }
            }
            for a in 0..d {
                for cc in 0..d {
                    let v = x[(a, cc)];
                    if v == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    for b in 0..d {
                        l[(a * d + b, cc * d + b)] -= v * (0.5 * g);
                        l[(b * d + cc, b * d + a)] -= v * (0.5 * g);
                    }
                }
            }
        }
    }
    let e = spec.energies();
    let hamiltonian = (0..n).map(|i| e[i / d] - e[i % d]).collect();
    Ok(Superoperator {
        dim: d,
        dissipative: l,
        hamiltonian,
    })
}

/// `‖Γ̂L̂_d − L̂_d†Γ̂‖_F / ‖Γ̂L̂_d‖_F`, zero for a vanishing dissipator.
pub fn detailed_balance_residual(sop: &Superoperator, w: &GibbsWeights) -> f64 {
    let d = sop.dim;
    let gam: Vec<f64> = (0..d * d).map(|i| w.pair(i / d, i % d)).collect();
    let l = &sop.dissipative;
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..l.nrows() {
        for j in 0..l.ncols() {
            let gl = l[(i, j)] * gam[i];
            let lg = l[(j, i)].conj() * gam[j];
            num += (gl - lg).norm_sqr();
            den += gl.norm_sqr();
        }
    }
    if den == 0.0 {
        0.0
    } else {
        (num / den).sqrt()
    }
}

/// Eigendecomposition of `Q` with the stationary mode identified.
#[derive(Debug, Clone)]
pub struct SpectralData {
    pub eig: Eigh,
    /// Column of the stationary eigenvector.
    pub zero_index: usize,
    pub gap: f64,
}

pub fn spectral_data(sop: &Superoperator, w: &GibbsWeights) -> Result<SpectralData> {
    let d = sop.dim;
    let q = sop.symmetrized(w);
    let eig = eigh(&q);
    let scale = eig.values.iter().fold(0.0_f64, |a, v| a.max(v.abs())).max(1.0);
    let zeros = eig.values.iter().filter(|v| v.abs() <= ZERO_CLUSTER_TOL * scale).count();
    if zeros > 1 {
        return Err(Error::NotPrimitive(format!(
            "{zeros} eigenvalues of the symmetrized generator vanish"
        )));
    }
    let root: Vec<f64> = (0..d * d)
        .map(|i| if i / d == i % d { w.sigma[i / d].sqrt() } else { 0.0 })
        .collect();
    let overlap = |col: usize| -> f64 {
        root.iter()
            .enumerate()
            .filter(|(_, &r)| r != 0.0)
            .map(|(i, &r)| eig.vectors[(i, col)] * r)
            .sum::<Complex64>()
            .norm()
    };
    let zero_index = (0..d * d)
        .max_by(|&a, &b| overlap(a).total_cmp(&overlap(b)))
        .expect("nonempty spectrum");
    let gap = eig
        .values
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != zero_index)
        .map(|(_, &v)| -v)
        .fold(f64::INFINITY, f64::min);
    Ok(SpectralData { eig, zero_index, gap })
}

/// Spectral gap of the generator from the eigendecomposition of `Q`.
pub fn exact_gap(sop: &Superoperator, w: &GibbsWeights) -> Result<f64> {
    Ok(spectral_data(sop, w)?.gap)
}

/// Distance of an evolved state to the Gibbs state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackPoint {
    pub time: f64,
    pub trace_distance: f64,
    pub chi2: f64,
}

/// Tolerance for the Hermiticity, trace and positivity checks on input states.
pub const STATE_TOL: f64 = 1e-10;

pub fn validate_state(rho: &CMatrix, d: usize) -> Result<()> {
    if rho.nrows() != d || rho.ncols() != d {
        return Err(Error::InvalidState(format!(
            "state has shape {}x{}, expected {d}x{d}",
            rho.nrows(),
            rho.ncols()
        )));
    }
    if rho.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidState("non-finite entries".into()));
    }
    let herm = frobenius(&(rho - rho.adjoint()));
    if herm > STATE_TOL * frobenius(rho).max(1.0) {
        return Err(Error::InvalidState(format!("not Hermitian (residual {herm:e})")));
    }
    let tr = rho.trace();
    if (tr - c(1.0)).norm() > STATE_TOL {
        return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
    }
    let min = crate::linalg::eigvalsh(rho)[0];
    if min < -STATE_TOL {
        return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
    }
    Ok(())
}

/// `χ²(ρ, σ) = Σ_{ab} |ρ_{ab} − σ_{ab}|² / σ(a,b)` in the energy basis.
pub fn chi2(rho: &CMatrix, w: &GibbsWeights) -> f64 {
    let d = w.dim();
    let mut acc = 0.0;
    for a in 0..d {
        for b in 0..d {
            let delta = rho[(a, b)] - if a == b { c(w.sigma[a]) } else { c(0.0) };
            acc += delta.norm_sqr() / w.pair(a, b);
        }
    }
    acc
}

/// Trace norm `‖ρ − σ‖_tr`.
pub fn trace_distance(rho: &CMatrix, w: &GibbsWeights) -> f64 {
    let d = w.dim();
    let delta = CMatrix::from_fn(d, d, |a, b| rho[(a, b)] - if a == b { c(w.sigma[a]) } else { c(0.0) });
    trace_norm(&delta)
}

/// Evolves `ρ0` under the Schrödinger-picture generator and reports distances to `σ`.
///
/// Uses `e^{tL̂†} = e^{tL̂_H†} Γ̂^{½} V e^{tΛ} V† Γ̂^{−½}` with `Q = VΛV†`; the two factors commute
/// because the dissipator preserves Bohr frequencies.
pub fn evolve_and_track(
    sop: &Superoperator,
    rho0: &CMatrix,
    w: &GibbsWeights,
    times: &[f64],
) -> Result<Vec<TrackPoint>> {
    let d = sop.dim;
    validate_state(rho0, d)?;
    let data = spectral_data(sop, w)?;
    evolve_with(sop, &data, rho0, w, times)
}

/// Like [`evolve_and_track`] with a precomputed decomposition.
pub fn evolve_with(
    sop: &Superoperator,
    data: &SpectralData,
    rho0: &CMatrix,
    w: &GibbsWeights,
    times: &[f64],
) -> Result<Vec<TrackPoint>> {
    let d = sop.dim;
    validate_state(rho0, d)?;
    if let Some(t) = times.iter().find(|t| !t.is_finite() || **t < 0.0) {
        return Err(Error::InvalidArguments(format!("time {t} must be finite and non-negative")));
    }
    let g = gamma_sqrt(d, w);
    let v = &data.eig.vectors;
    let x = DVector::from_iterator(d * d, (0..d * d).map(|i| rho0[(i / d, i % d)] / g[i]));
    let coeff = v.adjoint() * x;
    let points = times
        .par_iter()
        .map(|&t| {
            let scaled = DVector::from_iterator(
                d * d,
                coeff
                    .iter()
                    .zip(&data.eig.values)
                    .map(|(&cf, &lam)| cf * (lam * t).exp()),
            );
            let y = v * scaled;
            let rho = CMatrix::from_fn(d, d, |a, b| {
                let i = a * d + b;
                y[i] * g[i] * Complex64::from_polar(1.0, -sop.hamiltonian[i] * t)
            });
            let rho = (&rho + rho.adjoint()).scale(0.5);
            TrackPoint {
                time: t,
                trace_distance: trace_distance(&rho, w),
                chi2: chi2(&rho, w),
            }
        })
        .collect();
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{gibbs, BathModel};

    fn pauli_x_spec(beta: f64) -> SystemSpec {
        let x = CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]);
        SystemSpec::new(vec![0.0, 1.0], vec![x], beta, BathModel::glauber()).unwrap()
    }

    #[test]
    fn unital_and_balanced() {
        let spec = pauli_x_spec(0.8);
        let w = gibbs(&spec);
        let sop = build_davies(&spec).unwrap();
        let one = CMatrix::identity(2, 2);
        assert!(frobenius(&sop.apply(&one)) < 1e-12);
        assert!(detailed_balance_residual(&sop, &w) < 1e-12);
    }

    #[test]
    fn identity_coupling_is_not_primitive() {
        let spec = SystemSpec::new_permissive(
            vec![0.0, 1.0, 3.0],
            vec![CMatrix::identity(3, 3)],
            1.0,
            BathModel::glauber(),
        )
        .unwrap();
        let w = gibbs(&spec);
        let sop = build_davies(&spec).unwrap();
        assert!(frobenius(&sop.dissipative) < 1e-15);
        assert!(matches!(exact_gap(&sop, &w), Err(Error::NotPrimitive(_))));
    }

    #[test]
    fn components_partition_couplings() {
        let n = 3;
        let s = CMatrix::from_element(n, n, c(1.0));
        let spec = SystemSpec::new(vec![1.0, 2.0, 3.0], vec![s.clone()], 0.0, BathModel::glauber()).unwrap();
        let fc = fourier_components(&spec);
        assert_eq!(fc.frequencies, vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
        let mut total = CMatrix::zeros(n, n);
        for i in 0..fc.frequencies.len() {
            total += fc.dense(i, 0);
        }
        assert_eq!(total, s);
        // ω = 1 raises the energy by one unit
        let up = fc.dense(fc.index_of(1.0).unwrap(), 0);
        assert_eq!(up[(1, 0)], c(1.0));
        assert_eq!(up[(0, 1)], c(0.0));
    }

    #[test]
    fn dense_limit_enforced() {
        let spec = pauli_x_spec(0.0);
        assert!(matches!(build_davies_with_limit(&spec, 1), Err(Error::DimensionOverflow { .. })));
    }

    #[test]
    fn fixed_point_stays_put() {
        let spec = pauli_x_spec(0.5);
        let w = gibbs(&spec);
        let sop = build_davies(&spec).unwrap();
        let sigma = CMatrix::from_diagonal(&DVector::from_iterator(2, w.sigma.iter().map(|&s| c(s))));
        for p in evolve_and_track(&sop, &sigma, &w, &[0.0, 1.0, 10.0]).unwrap() {
            assert!(p.trace_distance < 1e-12 && p.chi2 < 1e-12);
        }
        let bad = CMatrix::from_row_slice(2, 2, &[c(2.0), c(0.0), c(0.0), c(-1.0)]);
        assert!(matches!(evolve_and_track(&sop, &bad, &w, &[0.0]), Err(Error::InvalidState(_))));
    }
}
