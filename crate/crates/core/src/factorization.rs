//! Explicit factorizations `E = AA†`, `V = UU†`, `AW = U` witnessing the path and tree bounds.

use std::collections::HashMap;

use num_complex::Complex64;

use crate::blocks::{DirichletBlock, PauliGenerator};
use crate::error::Result;
use crate::graphs::{fill_weights, CanonicalPaths, SpanningTree};
use crate::linalg::{c, CMatrix};
use crate::model::GibbsWeights;

/// Factors with `A·W = U`.
#[derive(Debug, Clone)]
pub struct Factorization {
    pub a: CMatrix,
    pub u: CMatrix,
    pub w: CMatrix,
}

impl Factorization {
    /// Largest absolute column sum times largest absolute row sum of `W`.
    pub fn one_inf_product(&self) -> f64 {
        let col = (0..self.w.ncols())
            .map(|j| self.w.column(j).iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max);
        let row = (0..self.w.nrows())
            .map(|i| self.w.row(i).iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max);
        col * row
    }
}

/// Classical factors: `A` over edges, `U` over all vertex pairs, `W` routing pairs along paths.
pub fn classical_factorization(pg: &PauliGenerator, w: &GibbsWeights, cp: &CanonicalPaths) -> Factorization {
    let d = w.dim();
    let mut edge_ids: HashMap<(usize, usize), usize> = HashMap::new();
    let mut edge_list = Vec::new();
    for path in cp.paths.values() {
        for s in path.vertices.windows(2) {
            let key = (s[0].min(s[1]), s[0].max(s[1]));
            edge_ids.entry(key).or_insert_with(|| {
                edge_list.push(key);
                edge_list.len() - 1
            });
        }
    }
    let weight = |i: usize, j: usize| 0.5 * (pg.rates[(i, j)] * pg.sigma[j] + pg.rates[(j, i)] * pg.sigma[i]);
    let mut a = CMatrix::zeros(d, edge_list.len());
    for (col, &(i, j)) in edge_list.iter().enumerate() {
        let s = weight(i, j).sqrt();
        a[(i, col)] = c(s);
        a[(j, col)] = c(-s);
    }
    let pairs: Vec<(usize, usize)> = cp.paths.keys().copied().collect();
    let mut u = CMatrix::zeros(d, pairs.len());
    let mut wm = CMatrix::zeros(edge_list.len(), pairs.len());
    for (col, &(x, y)) in pairs.iter().enumerate() {
        let s = (w.sigma[x] * w.sigma[y]).sqrt();
        u[(x, col)] = c(s);
        u[(y, col)] = c(-s);
        let path = &cp.paths[&(x, y)];
        for step in path.vertices.windows(2) {
            let (from, to) = (step[0], step[1]);
            let key = (from.min(to), from.max(to));
            let sign = if from < to { 1.0 } else { -1.0 };
            wm[(edge_ids[&key], col)] = c(sign * s / weight(key.0, key.1).sqrt());
        }
    }
    Factorization { a, u, w: wm }
}

/// Tree factors of one block: sink columns `√φ_l |l⟩`, then per link `√λ₊ u₊` and `√λ₋ u₋`.
///
/// With vertex phases `z`, every column of `W` routes the unit mass at `m` through the tree:
/// `N e_m = Σ φ_l e_l + Σ_T λ₋ (e_a + e_b) + Σ_T ω (e_near − e_far)` where `e_v = z_v |v⟩`.
pub fn tree_factorization(block: &DirichletBlock, tree: &SpanningTree, w: &GibbsWeights) -> Result<Factorization> {
    let n = block.size();
    let links = &block.links;
    let cols = n + 2 * links.len();
    let mut a = CMatrix::zeros(n, cols);
    for l in 0..n {
        a[(l, l)] = c(block.phi[l].sqrt());
    }
    let r2 = std::f64::consts::FRAC_1_SQRT_2;
    let mut link_col: HashMap<(usize, usize), usize> = HashMap::new();
    for (k, link) in links.iter().enumerate() {
        let col = n + 2 * k;
        let ph = Complex64::from_polar(1.0, link.theta);
        let sp = link.lambda_plus.sqrt() * r2;
        let sm = link.lambda_minus.sqrt() * r2;
        a[(link.a, col)] = c(sp);
        a[(link.b, col)] = -ph * sp;
        a[(link.a, col + 1)] = c(sm);
        a[(link.b, col + 1)] = ph * sm;
        link_col.insert((link.a, link.b), col);
    }
    let u = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        n,
        block.basis.iter().map(|&(x, y)| c(w.pair(x, y).sqrt())),
    ));

    let z = &tree.phases;
    let sqrt2 = std::f64::consts::SQRT_2;
    let mut wm = CMatrix::zeros(cols, n);
    for m in 0..n {
        let comp = tree.component_of(m);
        let tree_in: Vec<usize> = (0..tree.edges.len())
            .filter(|&e| tree.root[tree.edges[e].a] == tree.root[m])
            .collect();
        let norm: f64 = comp.iter().map(|&v| block.phi[v]).sum::<f64>()
            + 2.0 * tree_in.iter().map(|&e| tree.edges[e].lambda_minus).sum::<f64>();
        let scale = z[m].conj() * (w.pair(block.basis[m].0, block.basis[m].1).sqrt() / norm);
        for &l in &comp {
            wm[(l, m)] = z[l] * block.phi[l].sqrt() * scale;
        }
        for &e in &tree_in {
            let edge = &tree.edges[e];
            let col = link_col[&(edge.a, edge.b)];
            wm[(col + 1, m)] = z[edge.a] * (sqrt2 * edge.lambda_minus.sqrt()) * scale;
        }
        for f in fill_weights(tree, &block.phi, m)? {
            let edge = &tree.edges[f.edge];
            let col = link_col[&(edge.a, edge.b)];
            let sign = if f.near == edge.a { 1.0 } else { -1.0 };
            wm[(col, m)] = z[edge.a] * (sign * sqrt2 * f.omega / edge.lambda_plus.sqrt()) * scale;
        }
    }
    Ok(Factorization { a, u, w: wm })
}
