//! End-to-end bound pipeline for one instance.

use rayon::prelude::*;
use serde::Serialize;

use crate::blocks::{
    bohr_index, block_exact_gap, nonnegative_blocks, pauli_generator, variance_block_at, BohrIndex,
    DirichletBlock, PauliGenerator,
};
use crate::bounds::{
    combined_bound, gershgorin_pair_values, lambda_tree_block, mixing_time_bound, path_bounds, EdgeLoad,
};
use crate::error::Result;
use crate::graphs::{build_graph, canonical_paths, spanning_tree, CanonicalPaths, SpanningTree, TransitionGraph};
use crate::liouvillian::{build_davies_with_limit, detailed_balance_residual, exact_gap, DEFAULT_DENSE_LIMIT};
use crate::model::{gibbs, GibbsWeights, SystemSpec};

/// Largest dimension for which per-block exact gaps are computed by default.
pub const DEFAULT_BLOCK_LIMIT: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisOptions {
    /// Compute the path and block bounds.
    pub bounds: bool,
    pub block_oracles: bool,
    pub dense_oracle: bool,
    pub dense_limit: usize,
    pub block_limit: usize,
    pub epsilon: f64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            bounds: true,
            block_oracles: true,
            dense_oracle: true,
            dense_limit: DEFAULT_DENSE_LIMIT,
            block_limit: DEFAULT_BLOCK_LIMIT,
            epsilon: 0.01,
        }
    }
}

impl AnalysisOptions {
    pub fn bounds_only() -> Self {
        AnalysisOptions {
            block_oracles: false,
            dense_oracle: false,
            ..Self::default()
        }
    }

    /// Exact block gaps without any bound.
    pub fn oracles_only() -> Self {
        AnalysisOptions {
            bounds: false,
            dense_oracle: false,
            ..Self::default()
        }
    }
}

/// Per-frequency summary.
#[derive(Debug, Clone, Serialize)]
pub struct BlockReport {
    pub nu: f64,
    pub size: usize,
    pub edges: Option<usize>,
    pub tree_edges: Option<usize>,
    pub removed_edges: Option<usize>,
    pub components: Option<usize>,
    pub exact_gap: Option<f64>,
    /// Tree bound on this block (positive frequencies).
    pub lambda_tree: Option<f64>,
    /// Smallest row-dominance value in this block (positive frequencies).
    pub gershgorin: Option<f64>,
}

/// All bounds, oracles and intermediate quantities of one instance.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub dim: usize,
    pub beta: f64,
    pub sigma_min: f64,
    pub tau0: Option<f64>,
    pub lambda_qm_gersh: Option<f64>,
    pub tau0_hat: Option<f64>,
    pub dilation: Option<f64>,
    pub congestion: Option<f64>,
    pub lambda_qm_tree: Option<f64>,
    /// `min(1/τ⁰, Λ_QM)` when both parts are positive.
    pub bound_canonical: Option<f64>,
    /// `min(1/τ̂⁰, Λ̂_QM)` when both parts are positive.
    pub bound_congestion_dilation: Option<f64>,
    pub lambda_lower: Option<f64>,
    pub lambda_cl_exact: Option<f64>,
    pub lambda_qm_exact: Option<f64>,
    /// Minimum of the per-block exact gaps.
    pub lambda_exact: Option<f64>,
    /// Gap of the full superoperator.
    pub lambda_exact_dense: Option<f64>,
    pub detailed_balance_residual: Option<f64>,
    pub epsilon: f64,
    pub t_mix_bound: Option<f64>,
    pub max_bohr_diameter: f64,
    pub blocks: Vec<BlockReport>,
    pub edge_loads: Vec<EdgeLoad>,
    pub failures: Vec<String>,
}

/// Intermediate objects of an analysis, kept for inspection.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub weights: GibbsWeights,
    pub index: BohrIndex,
    /// Blocks with `ν ≥ 0`; the first is `ν = 0`.
    pub blocks: Vec<DirichletBlock>,
    /// Empty when bounds are disabled.
    pub graphs: Vec<TransitionGraph>,
    /// Trees of the positive-frequency blocks, aligned with `blocks[1..]`.
    pub trees: Vec<SpanningTree>,
    pub pauli: PauliGenerator,
    pub paths: Option<CanonicalPaths>,
    pub report: BoundReport,
}

pub fn analyze(spec: &SystemSpec, opts: &AnalysisOptions) -> Result<Analysis> {
    let d = spec.dim();
    let w = gibbs(spec);
    let idx = bohr_index(spec);
    let zero = idx.zero_group();
    let blocks = nonnegative_blocks(spec, &w, &idx);
    let pauli = pauli_generator(spec, &w);
    let mut failures = Vec::new();

    let (graphs, trees): (Vec<TransitionGraph>, Vec<SpanningTree>) = if opts.bounds {
        let graphs: Vec<TransitionGraph> = blocks.iter().map(build_graph).collect();
        let trees = graphs[1..].iter().map(spanning_tree).collect();
        (graphs, trees)
    } else {
        (Vec::new(), Vec::new())
    };

    let mut paths = None;
    let mut path_data = None;
    let mut pair_values = Vec::new();
    let mut lambda_qm_gersh = None;
    let mut tree_values: Vec<Result<f64>> = Vec::new();
    let mut lambda_qm_tree = None;
    if opts.bounds {
        match canonical_paths(&graphs[0]) {
            Ok(p) => paths = Some(p),
            Err(e) => failures.push(format!("classical paths: {e}")),
        }
        if let Some(cp) = &paths {
            match path_bounds(&pauli, &w, cp) {
                Ok(p) => path_data = Some(p),
                Err(e) => failures.push(format!("path bounds: {e}")),
            }
        }

        pair_values = gershgorin_pair_values(&idx, spec);
        let g = pair_values.iter().map(|p| p.value).fold(f64::INFINITY, f64::min).max(0.0);
        if g == 0.0 {
            failures.push("lambda_qm_gersh: bound degenerates to 0".into());
        }
        lambda_qm_gersh = Some(g);

        tree_values = blocks[1..]
            .par_iter()
            .zip(trees.par_iter())
            .map(|(b, t)| lambda_tree_block(b, t, &w))
            .collect();
        match tree_values.iter().find_map(|r| r.as_ref().err()) {
            Some(e) => failures.push(format!("lambda_qm_tree: {e}")),
            None => {
                lambda_qm_tree = Some(tree_values.iter().map(|r| *r.as_ref().unwrap()).fold(f64::INFINITY, f64::min))
            }
        }
    }

    let run_blocks = opts.block_oracles && d <= opts.block_limit;
    let exact: Vec<Option<f64>> = if run_blocks {
        blocks
            .par_iter()
            .enumerate()
            .map(|(i, b)| block_exact_gap(b, &variance_block_at(&w, &idx, zero + i)).ok())
            .collect()
    } else {
        vec![None; blocks.len()]
    };
    let lambda_cl_exact = exact[0];
    let lambda_qm_exact = if run_blocks && exact[1..].iter().all(Option::is_some) {
        exact[1..].iter().flatten().copied().reduce(f64::min)
    } else {
        None
    };
    let lambda_exact = match (lambda_cl_exact, lambda_qm_exact) {
        (Some(a), Some(b)) => Some(a.min(b)),
        _ => None,
    };

    let (mut lambda_exact_dense, mut residual) = (None, None);
    if opts.dense_oracle && d <= opts.dense_limit {
        match build_davies_with_limit(spec, opts.dense_limit) {
            Ok(sop) => {
                residual = Some(detailed_balance_residual(&sop, &w));
                match exact_gap(&sop, &w) {
                    Ok(g) => lambda_exact_dense = Some(g),
                    Err(e) => failures.push(format!("dense oracle: {e}")),
                }
            }
            Err(e) => failures.push(format!("dense oracle: {e}")),
        }
    }

    let tau0 = path_data.as_ref().map(|p| p.tau0);
    let tau0_hat = path_data.as_ref().map(|p| p.tau0_hat);
    let (bound_canonical, bound_congestion_dilation, lambda_lower) = if opts.bounds {
        match combined_bound(tau0, lambda_qm_gersh, tau0_hat, lambda_qm_tree) {
            Ok(cb) => (cb.canonical, cb.congestion_dilation, Some(cb.lambda_lower)),
            Err(e) => {
                failures.push(e.to_string());
                (None, None, None)
            }
        }
    } else {
        (None, None, None)
    };
    let t_mix_bound = lambda_lower.and_then(|l| mixing_time_bound(l, w.sigma_min, opts.epsilon).ok());

    let block_reports = blocks
        .iter()
        .enumerate()
        .map(|(i, b)| {
            let g = graphs.get(i);
            let t = if i == 0 { None } else { trees.get(i - 1) };
            BlockReport {
                nu: b.nu,
                size: b.size(),
                edges: g.map(|g| g.edges.len()),
                tree_edges: t.map(|t| t.tree_edges.len()),
                removed_edges: t.map(|t| t.removed_edges.len()),
                components: g.map(|g| g.component_count()),
                exact_gap: exact[i],
                lambda_tree: if i == 0 { None } else { tree_values.get(i - 1).and_then(|r| r.as_ref().ok().copied()) },
                gershgorin: if i == 0 || !opts.bounds {
                    None
                } else {
                    pair_values
                        .iter()
                        .filter(|p| p.nu == b.nu)
                        .map(|p| p.value)
                        .reduce(f64::min)
                },
            }
        })
        .collect();

    let report = BoundReport {
        dim: d,
        beta: spec.beta(),
        sigma_min: w.sigma_min,
        tau0,
        lambda_qm_gersh,
        tau0_hat,
        dilation: path_data.as_ref().map(|p| p.dilation),
        congestion: path_data.as_ref().map(|p| p.congestion),
        lambda_qm_tree,
        bound_canonical,
        bound_congestion_dilation,
        lambda_lower,
        lambda_cl_exact,
        lambda_qm_exact,
        lambda_exact,
        lambda_exact_dense,
        detailed_balance_residual: residual,
        epsilon: opts.epsilon,
        t_mix_bound,
        max_bohr_diameter: idx.max_diameter(),
        blocks: block_reports,
        edge_loads: path_data.map(|p| p.edges).unwrap_or_default(),
        failures,
    };
    Ok(Analysis {
        weights: w,
        index: idx,
        blocks,
        graphs,
        trees,
        pauli,
        paths,
        report,
    })
}
