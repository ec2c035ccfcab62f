//! Spectral-gap lower bounds from support theory, their combination and the mixing time.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::blocks::{BohrIndex, DirichletBlock, PauliGenerator};
use crate::error::{Error, Result};
use crate::graphs::{fill_weights, CanonicalPaths, SpanningTree};
use crate::linalg::{pencil_eigenvalues, CMatrix};
use crate::model::{GibbsWeights, SystemSpec};

/// Smallest `τ` with `τB − A ⪰ 0`: the largest generalized eigenvalue on `range(B)`.
pub fn support_number(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    let vals = pencil_eigenvalues(a, b)?;
    Ok(vals.last().copied().unwrap_or(0.0).max(0.0))
}

/// Symmetrized classical edge weight `P(u,v)σ_v`.
fn edge_weight(pg: &PauliGenerator, u: usize, v: usize) -> f64 {
    0.5 * (pg.rates[(u, v)] * pg.sigma[v] + pg.rates[(v, u)] * pg.sigma[u])
}

/// Path statistics of one classical edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EdgeLoad {
    pub a: usize,
    pub b: usize,
    /// `P(a,b)σ_b`.
    pub weight: f64,
    /// `Σ_{γ ∋ e} σ_a σ_b |γ|`.
    pub load: f64,
    /// `Σ_{γ ∋ e} √(σ_a σ_b / weight)`.
    pub congestion: f64,
}

/// Canonical-path and congestion–dilation quantities for the classical block.
#[derive(Debug, Clone, Serialize)]
pub struct PathBounds {
    pub tau0: f64,
    pub tau0_hat: f64,
    pub dilation: f64,
    pub congestion: f64,
    pub edges: Vec<EdgeLoad>,
}

/// Evaluates both path bounds over the given canonical paths.
pub fn path_bounds(pg: &PauliGenerator, w: &GibbsWeights, cp: &CanonicalPaths) -> Result<PathBounds> {
    let mut edges: BTreeMap<(usize, usize), EdgeLoad> = BTreeMap::new();
    let mut dilation: f64 = 0.0;
    for (&(a, b), path) in &cp.paths {
        let pair = w.sigma[a] * w.sigma[b];
        let hops = path.len() as f64;
        let mut stretch = 0.0;
        for step in path.vertices.windows(2) {
            let key = (step[0].min(step[1]), step[0].max(step[1]));
            let weight = edge_weight(pg, key.0, key.1);
            if !(weight > 0.0) {
                return Err(Error::Disconnected { components: 2 });
            }
            let entry = edges.entry(key).or_insert(EdgeLoad {
                a: key.0,
                b: key.1,
                weight,
                load: 0.0,
                congestion: 0.0,
            });
            let term = (pair / weight).sqrt();
            entry.load += pair * hops;
            entry.congestion += term;
            stretch += term;
        }
        dilation = dilation.max(stretch);
    }
    let tau0 = edges.values().map(|e| e.load / e.weight).fold(0.0, f64::max);
    let congestion = edges.values().map(|e| e.congestion).fold(0.0, f64::max);
    Ok(PathBounds {
        tau0,
        tau0_hat: dilation * congestion,
        dilation,
        congestion,
        edges: edges.into_values().collect(),
    })
}

/// `τ⁰ = max_e (1/(P_e σ_e)) Σ_{γ ∋ e} σ_a σ_b |γ|`.
pub fn tau0_canonical(pg: &PauliGenerator, w: &GibbsWeights, cp: &CanonicalPaths) -> Result<f64> {
    Ok(path_bounds(pg, w, cp)?.tau0)
}

/// Dilation times congestion of the path matrix.
pub fn tau0_congestion_dilation(pg: &PauliGenerator, w: &GibbsWeights, cp: &CanonicalPaths) -> Result<f64> {
    Ok(path_bounds(pg, w, cp)?.tau0_hat)
}

/// Row-diagonal-dominance value `½Λ_m` of one basis pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairValue {
    pub nu: f64,
    pub pair: (usize, usize),
    pub value: f64,
}

/// `½Λ_m` for every pair at positive frequency.
pub fn gershgorin_pair_values(idx: &BohrIndex, spec: &SystemSpec) -> Vec<PairValue> {
    let ops = spec.couplings();
    let zero = idx.zero_group();
    let mut out = Vec::new();
    for group in &idx.groups[zero + 1..] {
        for &m in &group.pairs {
            let mut total = 0.0;
            for &n in &group.pairs {
                let g = spec.rate(n.0, m.0);
                let s: f64 = ops
                    .iter()
                    .map(|op| (op[(n.0, m.0)].norm() - op[(n.1, m.1)].norm()).powi(2))
                    .sum();
                total += g * s;
            }
            for (pos, &label) in [m.0, m.1].iter().enumerate() {
                for &k in &group.complements[pos] {
                    let s: f64 = ops.iter().map(|op| op[(k, label)].norm_sqr()).sum();
                    total += spec.rate(k, label) * s;
                }
            }
            out.push(PairValue {
                nu: group.nu,
                pair: m,
                value: 0.5 * total,
            });
        }
    }
    out
}

/// `Λ_QM = min_m ½Λ_m`; zero signals a failed bound.
pub fn lambda_qm_gershgorin(idx: &BohrIndex, spec: &SystemSpec) -> f64 {
    gershgorin_pair_values(idx, spec)
        .iter()
        .map(|p| p.value)
        .fold(f64::INFINITY, f64::min)
        .max(0.0)
}

/// Tree bound on the gap of one block: the minimum over tree components of `1/‖W_c‖_F²`.
pub fn lambda_tree_block(block: &DirichletBlock, tree: &SpanningTree, w: &GibbsWeights) -> Result<f64> {
    let mut best = f64::INFINITY;
    for r in tree.roots() {
        let comp = tree.component_of(r);
        let tree_in: Vec<usize> = (0..tree.edges.len())
            .filter(|&e| tree.root[tree.edges[e].a] == r)
            .collect();
        let phi_sum: f64 = comp.iter().map(|&v| block.phi[v]).sum();
        let minus_sum: f64 = tree_in.iter().map(|&e| tree.edges[e].lambda_minus).sum();
        let norm = phi_sum + 2.0 * minus_sum;
        if !(norm > 0.0) {
            return Err(Error::DegenerateNormalization { nu: block.nu });
        }
        let mut inv = 0.0;
        for &m in &comp {
            let sm = w.pair(block.basis[m].0, block.basis[m].1);
            let flow: f64 = fill_weights(tree, &block.phi, m)?
                .iter()
                .map(|f| f.omega * f.omega / tree.edges[f.edge].lambda_plus)
                .sum();
            inv += sm * (phi_sum + 2.0 * minus_sum + 2.0 * flow);
        }
        inv /= norm * norm;
        best = best.min(1.0 / inv);
    }
    Ok(best)
}

/// `Λ̂_QM = min_ν Λ̂_ν` over the given positive-frequency blocks and their trees.
pub fn lambda_qm_tree(blocks: &[DirichletBlock], trees: &[SpanningTree], w: &GibbsWeights) -> Result<f64> {
    assert_eq!(blocks.len(), trees.len(), "one tree per block");
    let mut best = f64::INFINITY;
    for (b, t) in blocks.iter().zip(trees) {
        best = best.min(lambda_tree_block(b, t, w)?);
    }
    Ok(best)
}

/// The two theorem combinations and their maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Combined {
    /// `min(1/τ⁰, Λ_QM)`.
    pub canonical: Option<f64>,
    /// `min(1/τ̂⁰, Λ̂_QM)`.
    pub congestion_dilation: Option<f64>,
    pub lambda_lower: f64,
}

fn valid(x: Option<f64>) -> Option<f64> {
    x.filter(|v| v.is_finite() && *v > 0.0)
}

/// Combines available component bounds; zero or missing components invalidate a combination.
pub fn combined_bound(
    tau0: Option<f64>,
    lambda_qm_gersh: Option<f64>,
    tau0_hat: Option<f64>,
    lambda_qm_tree: Option<f64>,
) -> Result<Combined> {
    let pair = |t: Option<f64>, q: Option<f64>| -> Option<f64> {
        match (valid(t), valid(q)) {
            (Some(t), Some(q)) => Some((1.0 / t).min(q)),
            _ => None,
        }
    };
    let canonical = pair(tau0, lambda_qm_gersh);
    let congestion_dilation = pair(tau0_hat, lambda_qm_tree);
    let lambda_lower = match (canonical, congestion_dilation) {
        (Some(a), Some(b)) => a.max(b),
        (Some(a), None) | (None, Some(a)) => a,
        (None, None) => {
            return Err(Error::NoValidBound(
                "neither combination has a positive classical and quantum part".into(),
            ))
        }
    };
    Ok(Combined {
        canonical,
        congestion_dilation,
        lambda_lower,
    })
}

/// `t = ln(σ_min^{-1}/ε²)/(2λ)`.
pub fn mixing_time_bound(lambda: f64, sigma_min: f64, epsilon: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidArguments(format!("gap bound must be positive, got {lambda}")));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidArguments(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    if !(sigma_min > 0.0 && sigma_min <= 1.0) {
        return Err(Error::InvalidArguments(format!("sigma_min must lie in (0, 1], got {sigma_min}")));
    }
    Ok((1.0 / (sigma_min * epsilon * epsilon)).ln() / (2.0 * lambda))
}
