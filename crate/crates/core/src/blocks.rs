//! Bohr-frequency grouping, per-frequency Dirichlet and variance blocks, and the classical
//! Pauli master equation.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    c, eigvalsh, frobenius, hermitian_part, pencil_eigenvalues, CMatrix, KERNEL_MISMATCH_TOL,
};
use crate::model::{GibbsWeights, SystemSpec, SPECTRAL_REL_TOL};

/// One Bohr frequency and the label pairs realizing it.
#[derive(Debug, Clone, Serialize)]
pub struct BohrGroup {
    pub nu: f64,
    /// Pairs `(n1, n2)` with `ε_{n2} − ε_{n1} ≈ ν`, sorted lexicographically.
    pub pairs: Vec<(usize, usize)>,
    /// Labels not occurring as `n1` (index 0) or `n2` (index 1) in `pairs`.
    pub complements: [Vec<usize>; 2],
    /// Spread of the raw differences merged into this group.
    pub diameter: f64,
}

/// Partition of all ordered label pairs by Bohr frequency.
#[derive(Debug, Clone, Serialize)]
pub struct BohrIndex {
    pub groups: Vec<BohrGroup>,
    pub tol: f64,
    dim: usize,
    #[serde(skip)]
    lookup: Vec<(u32, u32)>,
}

impl BohrIndex {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Frequencies in ascending order.
    pub fn frequencies(&self) -> Vec<f64> {
        self.groups.iter().map(|g| g.nu).collect()
    }

    /// `(group, position)` of pair `(n1, n2)`.
    #[inline]
    pub fn locate(&self, n1: usize, n2: usize) -> (usize, usize) {
        let (g, p) = self.lookup[n1 * self.dim + n2];
        (g as usize, p as usize)
    }

    /// Group index of a frequency.
    pub fn group_of(&self, nu: f64) -> Result<usize> {
        let i = self.groups.partition_point(|g| g.nu < nu);
        [i.checked_sub(1), Some(i)]
            .into_iter()
            .flatten()
            .filter(|&j| j < self.groups.len())
            .filter(|&j| (self.groups[j].nu - nu).abs() <= self.tol + 0.5 * self.groups[j].diameter)
            .min_by(|&a, &b| (self.groups[a].nu - nu).abs().total_cmp(&(self.groups[b].nu - nu).abs()))
            .ok_or(Error::UnknownFrequency(nu))
    }

    /// Index of the `ν = 0` group.
    pub fn zero_group(&self) -> usize {
        self.group_of(0.0).expect("the zero frequency is always present")
    }

    /// Index of the group at `−ν` for group `g`.
    pub fn mirror(&self, g: usize) -> usize {
        self.groups.len() - 1 - g
    }

    pub fn max_diameter(&self) -> f64 {
        self.groups.iter().map(|g| g.diameter).fold(0.0, f64::max)
    }
}

/// Groups all `d²` energy differences, chain-merging neighbours closer than
/// `1e-9 · (ε_max − ε_min)`.
pub fn bohr_index(spec: &SystemSpec) -> BohrIndex {
    let e = spec.energies();
    let d = e.len();
    let tol = SPECTRAL_REL_TOL * (e[d - 1] - e[0]);
    let mut diffs: Vec<(f64, usize, usize)> = Vec::with_capacity(d * d);
    for n1 in 0..d {
        for n2 in 0..d {
            diffs.push((e[n2] - e[n1], n1, n2));
        }
    }
    diffs.sort_by(|a, b| a.0.total_cmp(&b.0).then((a.1, a.2).cmp(&(b.1, b.2))));

    let mut groups = Vec::new();
    let mut lookup = vec![(0u32, 0u32); d * d];
    let mut start = 0;
    while start < diffs.len() {
        let mut end = start + 1;
        while end < diffs.len() && diffs[end].0 - diffs[end - 1].0 <= tol {
            end += 1;
        }
        let lo = diffs[start].0;
        let hi = diffs[end - 1].0;
        let mut pairs: Vec<(usize, usize)> = diffs[start..end].iter().map(|t| (t.1, t.2)).collect();
        pairs.sort_unstable();
        let gi = groups.len();
        let mut used = [vec![false; d], vec![false; d]];
        for (pos, &(n1, n2)) in pairs.iter().enumerate() {
            lookup[n1 * d + n2] = (gi as u32, pos as u32);
            used[0][n1] = true;
            used[1][n2] = true;
        }
        let complements = [
            (0..d).filter(|&k| !used[0][k]).collect(),
            (0..d).filter(|&k| !used[1][k]).collect(),
        ];
        groups.push(BohrGroup {
            nu: 0.5 * (lo + hi),
            pairs,
            complements,
            diameter: hi - lo,
        });
        start = end;
    }
    BohrIndex {
        groups,
        tol,
        dim: d,
        lookup,
    }
}

/// Data of the 2×2 link matrix between basis elements `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Link {
    pub a: usize,
    pub b: usize,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    /// `u₊ = (|a⟩ − e^{iθ}|b⟩)/√2` spans the `λ₊` eigenvector.
    pub theta: f64,
}

impl Link {
    /// The 2×2 link matrix in the `(a, b)` basis.
    pub fn matrix(&self) -> [[Complex64; 2]; 2] {
        let p = 0.5 * (self.lambda_plus + self.lambda_minus);
        let h = 0.5 * (self.lambda_plus - self.lambda_minus);
        // M = [[p, -q], [-q̄, p]] with q = h·e^{-iθ}
        let q = Complex64::from_polar(h, -self.theta);
        [[c(p), -q], [-q.conj(), c(p)]]
    }
}

/// Dirichlet-form block at one Bohr frequency.
#[derive(Debug, Clone, Serialize)]
pub struct DirichletBlock {
    pub nu: f64,
    pub basis: Vec<(usize, usize)>,
    #[serde(skip)]
    pub matrix: CMatrix,
    pub phi: Vec<f64>,
    pub links: Vec<Link>,
}

impl DirichletBlock {
    pub fn size(&self) -> usize {
        self.basis.len()
    }

    /// `Σ φ_m |m⟩⟨m| + Σ_links M`.
    pub fn reconstruct(&self) -> CMatrix {
        let n = self.size();
        let mut out = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            n,
            self.phi.iter().map(|&p| c(p)),
        ));
        for link in &self.links {
            let m = link.matrix();
            let idx = [link.a, link.b];
            for i in 0..2 {
                for j in 0..2 {
                    out[(idx[i], idx[j])] += m[i][j];
                }
            }
        }
        out
    }
}

/// `r_n = Σ_{k,α} G(ε_k − ε_n) |S_{kn}|²`.
pub fn escape_rates(spec: &SystemSpec) -> Vec<f64> {
    let d = spec.dim();
    (0..d)
        .map(|n| {
            (0..d)
                .map(|k| {
                    spec.rate(k, n) * spec.couplings().iter().map(|op| op[(k, n)].norm_sqr()).sum::<f64>()
                })
                .sum()
        })
        .collect()
}

/// Builds the block `Ê^ν` for group `gi`.
pub fn dirichlet_block_at(spec: &SystemSpec, w: &GibbsWeights, idx: &BohrIndex, gi: usize) -> DirichletBlock {
    let rates = escape_rates(spec);
    block_with_rates(spec, w, idx, gi, &rates)
}

fn block_with_rates(
    spec: &SystemSpec,
    w: &GibbsWeights,
    idx: &BohrIndex,
    gi: usize,
    rates: &[f64],
) -> DirichletBlock {
    let group = &idx.groups[gi];
    let basis = group.pairs.clone();
    let n = basis.len();
    let ops = spec.couplings();

    // −Γ̂L̂ restricted to the block, then its Hermitian part. Row m, column k carries
    // −σ(m) Σ_α G(ε_{k1} − ε_{m1}) conj(S_{k1 m1}) S_{k2 m2} off the diagonal escape term.
    let mut raw = CMatrix::zeros(n, n);
    for (i, &m) in basis.iter().enumerate() {
        let sm = w.pair(m.0, m.1);
        raw[(i, i)] += c(sm * 0.5 * (rates[m.0] + rates[m.1]));
        for (j, &k) in basis.iter().enumerate() {
            let s: Complex64 = ops.iter().map(|op| op[(k.0, m.0)].conj() * op[(k.1, m.1)]).sum();
            raw[(i, j)] -= s * (sm * spec.rate(k.0, m.0));
        }
    }
    let matrix = (&raw + raw.adjoint()).scale(0.5);

    let mut phi = Vec::with_capacity(n);
    for &m in &basis {
        let sm = w.pair(m.0, m.1);
        let mut acc = 0.0;
        for (pos, &label) in [m.0, m.1].iter().enumerate() {
            for &k in &group.complements[pos] {
                let amp: f64 = ops.iter().map(|op| op[(k, label)].norm_sqr()).sum();
                acc += spec.rate(k, label) * amp;
            }
        }
        let self_term: f64 = ops.iter().map(|op| (op[(m.0, m.0)] - op[(m.1, m.1)]).norm_sqr()).sum();
        acc += spec.rate(m.0, m.0) * self_term;
        phi.push(0.5 * sm * acc);
    }

    let mut links = Vec::new();
    for a in 0..n {
        let m = basis[a];
        let sm = w.pair(m.0, m.1);
        for b in a + 1..n {
            let l = basis[b];
            let cw = sm * spec.rate(l.0, m.0);
            let mut p = 0.0;
            let mut q = Complex64::new(0.0, 0.0);
            for op in ops {
                let x = op[(m.0, l.0)];
                let y = op[(m.1, l.1)];
                p += 0.5 * (x.norm_sqr() + y.norm_sqr());
                q += y.conj() * x;
            }
            p *= cw;
            q *= cw;
            if p == 0.0 {
                continue;
            }
            let qa = q.norm();
            let theta = if qa == 0.0 { 0.0 } else { q.conj().arg() };
            links.push(Link {
                a,
                b,
                lambda_plus: p + qa,
                lambda_minus: (p - qa).max(0.0),
                theta,
            });
        }
    }

    DirichletBlock {
        nu: group.nu,
        basis,
        matrix,
        phi,
        links,
    }
}

/// Builds the Dirichlet block at frequency `nu`.
pub fn dirichlet_block(spec: &SystemSpec, w: &GibbsWeights, idx: &BohrIndex, nu: f64) -> Result<DirichletBlock> {
    let gi = idx.group_of(nu)?;
    Ok(dirichlet_block_at(spec, w, idx, gi))
}

/// All blocks with `ν ≥ 0`, in ascending frequency order.
pub fn nonnegative_blocks(spec: &SystemSpec, w: &GibbsWeights, idx: &BohrIndex) -> Vec<DirichletBlock> {
    let rates = escape_rates(spec);
    let zero = idx.zero_group();
    (zero..idx.groups.len())
        .into_par_iter()
        .map(|gi| block_with_rates(spec, w, idx, gi, &rates))
        .collect()
}

/// Variance block at one Bohr frequency.
#[derive(Debug, Clone, Serialize)]
pub struct VarianceBlock {
    pub nu: f64,
    #[serde(skip)]
    pub matrix: CMatrix,
    /// Pair weights `σ(n₁, n₂)`; the matrix is this diagonal minus a rank-one term at `ν = 0`.
    pub diagonal: Vec<f64>,
    pub is_zero_frequency: bool,
}

pub fn variance_block_at(w: &GibbsWeights, idx: &BohrIndex, gi: usize) -> VarianceBlock {
    let group = &idx.groups[gi];
    let n = group.pairs.len();
    let is_zero = gi == idx.zero_group();
    let diagonal: Vec<f64> = group.pairs.iter().map(|&(a, b)| w.pair(a, b)).collect();
    let matrix = if is_zero {
        // diag(σ) − ssᵀ with s supported on the diagonal pairs
        let s: Vec<f64> = group.pairs.iter().map(|&(a, b)| if a == b { w.sigma[a] } else { 0.0 }).collect();
        CMatrix::from_fn(n, n, |i, j| c(if i == j { diagonal[i] } else { 0.0 } - s[i] * s[j]))
    } else {
        CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(n, diagonal.iter().map(|&v| c(v))))
    };
    VarianceBlock {
        nu: group.nu,
        matrix,
        diagonal,
        is_zero_frequency: is_zero,
    }
}

pub fn variance_block(w: &GibbsWeights, idx: &BohrIndex, nu: f64) -> Result<VarianceBlock> {
    let gi = idx.group_of(nu)?;
    Ok(variance_block_at(w, idx, gi))
}

/// Smallest generalized eigenvalue of `(Ê^ν, V̂^ν)` off the kernel of `V̂^ν`.
pub fn block_exact_gap(db: &DirichletBlock, vb: &VarianceBlock) -> Result<f64> {
    if db.nu != vb.nu || db.size() != vb.matrix.nrows() {
        return Err(Error::InvalidArguments(format!(
            "Dirichlet block at {} does not match variance block at {}",
            db.nu, vb.nu
        )));
    }
    if (0..db.size()).any(|i| !(vb.matrix[(i, i)].re > 0.0)) {
        return Err(Error::SingularVariance(vb.nu));
    }
    if vb.is_zero_frequency {
        return zero_block_gap(db, vb);
    }
    let vals = pencil_eigenvalues(&db.matrix, &vb.matrix)?;
    vals.first()
        .copied()
        .ok_or_else(|| Error::InvalidArguments("empty block".into()))
}

/// `V̂⁰ = D − ssᵀ` annihilates the indicator `u` of the diagonal pairs. When `Ê⁰ u = 0`, every
/// eigenvector of `(Ê⁰, D)` off `u` is `s`-centred, so the gap is the smallest eigenvalue of
/// `D^{-½} Ê⁰ D^{-½}` on the complement of `D^{½} u`, deflated with a Householder reflection.
fn zero_block_gap(db: &DirichletBlock, vb: &VarianceBlock) -> Result<f64> {
    let a = &db.matrix;
    let n = db.size();
    let a_norm = frobenius(a).max(f64::MIN_POSITIVE);
    let u: Vec<f64> = db.basis.iter().map(|&(p, q)| if p == q { 1.0 } else { 0.0 }).collect();
    let au = (0..n)
        .map(|i| (0..n).map(|j| a[(i, j)] * u[j]).sum::<Complex64>().norm_sqr())
        .sum::<f64>()
        .sqrt()
        / a_norm;
    if au > KERNEL_MISMATCH_TOL {
        return Err(Error::KernelMismatch(au));
    }
    // entries of Ê⁰ scale like √(σ_i σ_j), so the rescaled matrix stays O(1) without deflation
    if n < 2 {
        return Err(Error::InvalidArguments("empty block".into()));
    }
    let scale: Vec<f64> = vb.diagonal.iter().map(|&v| v.powf(-0.5)).collect();
    let m = CMatrix::from_fn(n, n, |i, j| a[(i, j)] * (scale[i] * scale[j]));

    // H = I − β w wᵀ maps v = D^{½}u/‖·‖ to ∓e₀
    let mut w: Vec<f64> = (0..n).map(|i| u[i] * vb.diagonal[i].sqrt()).collect();
    let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
    w.iter_mut().for_each(|x| *x /= norm);
    w[0] += if w[0] >= 0.0 { 1.0 } else { -1.0 };
    let beta = 2.0 / w.iter().map(|x| x * x).sum::<f64>();
    let p: Vec<Complex64> = (0..n).map(|i| (0..n).map(|j| m[(i, j)] * w[j]).sum::<Complex64>() * beta).collect();
    let k: Complex64 = (0..n).map(|i| p[i] * w[i]).sum::<Complex64>() * (0.5 * beta);
    let q: Vec<Complex64> = (0..n).map(|i| p[i] - k * w[i]).collect();
    let reduced = CMatrix::from_fn(n - 1, n - 1, |i, j| {
        let (i, j) = (i + 1, j + 1);
        m[(i, j)] - q[j].conj() * w[i] - q[i] * w[j]
    });
    eigvalsh(&hermitian_part(&reduced))
        .first()
        .copied()
        .ok_or_else(|| Error::InvalidArguments("empty block".into()))
}

/// Classical rate equation on level populations.
#[derive(Debug, Clone)]
pub struct PauliGenerator {
    /// `rates[(k, m)]` is the rate of `m → k`.
    pub rates: DMatrix<f64>,
    pub sigma: Vec<f64>,
}

pub fn pauli_generator(spec: &SystemSpec, w: &GibbsWeights) -> PauliGenerator {
    let d = spec.dim();
    let rates = DMatrix::from_fn(d, d, |k, m| {
        if k == m {
            0.0
        } else {
            spec.rate(k, m) * spec.couplings().iter().map(|op| op[(k, m)].norm_sqr()).sum::<f64>()
        }
    });
    PauliGenerator {
        rates,
        sigma: w.sigma.clone(),
    }
}

impl PauliGenerator {
    pub fn dim(&self) -> usize {
        self.sigma.len()
    }

    /// `(Lf)_m = Σ_k P(k,m)(f_k − f_m)` as a matrix.
    pub fn generator(&self) -> DMatrix<f64> {
        let d = self.dim();
        let mut l = DMatrix::zeros(d, d);
        for m in 0..d {
            for k in 0..d {
                if k != m {
                    l[(m, k)] = self.rates[(k, m)];
                    l[(m, m)] -= self.rates[(k, m)];
                }
            }
        }
        l
    }

    /// `½ Σ_{m,l} P(m,l) σ_l (f_l − f_m)²`.
    pub fn dirichlet_form(&self, f: &[f64]) -> f64 {
        let d = self.dim();
        let mut acc = 0.0;
        for m in 0..d {
            for l in 0..d {
                acc += self.rates[(m, l)] * self.sigma[l] * (f[l] - f[m]).powi(2);
            }
        }
        0.5 * acc
    }

    /// Spectral gap from the σ-symmetrized generator `D^{½}(−L)D^{−½}`.
    pub fn spectral_gap(&self) -> f64 {
        let d = self.dim();
        let l = self.generator();
        let sym = CMatrix::from_fn(d, d, |i, j| {
            c(-l[(i, j)] * (self.sigma[i] / self.sigma[j]).sqrt())
        });
        let vals = eigvalsh(&crate::linalg::hermitian_part(&sym));
        vals[1]
    }

    /// Largest relative violation of `P(k,m)σ_m = P(m,k)σ_k`.
    pub fn balance_residual(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for k in 0..d {
            for m in 0..d {
                let x = self.rates[(k, m)] * self.sigma[m];
                let y = self.rates[(m, k)] * self.sigma[k];
                let scale = x.abs().max(y.abs());
                if scale > 0.0 {
                    worst = worst.max((x - y).abs() / scale);
                }
            }
        }
        worst
    }
}
