//! Transition graphs of Dirichlet blocks, canonical paths, spanning trees and fill weights.

use std::collections::{BTreeMap, VecDeque};

use num_complex::Complex64;
use serde::Serialize;

use crate::blocks::{DirichletBlock, Link};
use crate::error::{Error, Result};

/// Relative threshold on `λ₊` below which a link is not an edge.
///
/// The reference scale of a link is the largest `λ₊` incident to either endpoint, so weak
/// edges in low-weight regions of the basis survive.
pub const EDGE_REL_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub theta: f64,
}

impl From<&Link> for Edge {
    fn from(l: &Link) -> Self {
        Edge {
            a: l.a,
            b: l.b,
            lambda_plus: l.lambda_plus,
            lambda_minus: l.lambda_minus,
            theta: l.theta,
        }
    }
}

/// Graph on the basis of one block, with edges where `λ₊` is numerically nonzero.
#[derive(Debug, Clone, Serialize)]
pub struct TransitionGraph {
    pub nu: f64,
    pub vertices: usize,
    /// Edges with `a < b`, sorted by `(a, b)`.
    pub edges: Vec<Edge>,
    #[serde(skip)]
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl TransitionGraph {
    /// Builds a graph from explicit edges, dropping numerically vanishing links.
    pub fn from_edges(nu: f64, vertices: usize, edges: Vec<Edge>) -> Self {
        let mut local = vec![0.0_f64; vertices];
        for e in &edges {
            local[e.a] = local[e.a].max(e.lambda_plus);
            local[e.b] = local[e.b].max(e.lambda_plus);
        }
        let mut kept: Vec<Edge> = edges
            .into_iter()
            .filter(|e| e.lambda_plus > 0.0 && e.lambda_plus > EDGE_REL_TOL * local[e.a].max(local[e.b]))
            .map(|e| if e.a < e.b { e } else { Edge { a: e.b, b: e.a, theta: -e.theta, ..e } })
            .collect();
        kept.sort_unstable_by_key(|e| (e.a, e.b));
        let mut adjacency = vec![Vec::new(); vertices];
        for (i, e) in kept.iter().enumerate() {
            assert!(e.b < vertices && e.a != e.b, "edge ({}, {}) out of range", e.a, e.b);
            adjacency[e.a].push((e.b, i));
            adjacency[e.b].push((e.a, i));
        }
        // Lexicographic edge order leaves each adjacency list sorted.
        TransitionGraph {
            nu,
            vertices,
            edges: kept,
            adjacency,
        }
    }

    /// Neighbours of `v` with edge indices, sorted by neighbour.
    pub fn neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.adjacency[v]
    }

    pub fn edge_between(&self, u: usize, v: usize) -> Option<usize> {
        let list = &self.adjacency[u];
        list.binary_search_by_key(&v, |&(n, _)| n).ok().map(|k| list[k].1)
    }

    /// Component label per vertex, labels ordered by smallest member.
    pub fn components(&self) -> Vec<usize> {
        let mut label = vec![usize::MAX; self.vertices];
        let mut next = 0;
        for s in 0..self.vertices {
            if label[s] != usize::MAX {
                continue;
            }
            label[s] = next;
            let mut stack = vec![s];
            while let Some(v) = stack.pop() {
                for &(u, _) in &self.adjacency[v] {
                    if label[u] == usize::MAX {
                        label[u] = next;
                        stack.push(u);
                    }
                }
            }
            next += 1;
        }
        label
    }

    pub fn component_count(&self) -> usize {
        self.components().iter().copied().max().map_or(0, |m| m + 1)
    }
}

pub fn build_graph(db: &DirichletBlock) -> TransitionGraph {
    TransitionGraph::from_edges(db.nu, db.size(), db.links.iter().map(Edge::from).collect())
}

/// A path between two vertices.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Path {
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
}

impl Path {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

/// Minimum-hop paths for every unordered vertex pair.
#[derive(Debug, Clone, Serialize)]
pub struct CanonicalPaths {
    pub vertices: usize,
    /// `paths[&(a, b)]` for `a < b`, running from `a` to `b`.
    pub paths: BTreeMap<(usize, usize), Path>,
}

impl CanonicalPaths {
    /// Path from `a` to `b` (either orientation).
    pub fn path(&self, a: usize, b: usize) -> Option<Path> {
        if a < b {
            self.paths.get(&(a, b)).cloned()
        } else {
            self.paths.get(&(b, a)).map(|p| Path {
                vertices: p.vertices.iter().rev().copied().collect(),
                edges: p.edges.iter().rev().copied().collect(),
            })
        }
    }
}

fn bfs_distances(g: &TransitionGraph, source: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; g.vertices];
    dist[source] = 0;
    let mut queue = VecDeque::from([source]);
    while let Some(v) = queue.pop_front() {
        for &(u, _) in g.neighbors(v) {
            if dist[u] == usize::MAX {
                dist[u] = dist[v] + 1;
                queue.push_back(u);
            }
        }
    }
    dist
}

/// Minimum-hop paths, ties broken by the lexicographically smallest vertex sequence.
pub fn canonical_paths(g: &TransitionGraph) -> Result<CanonicalPaths> {
    let components = g.component_count();
    if components > 1 {
        return Err(Error::Disconnected { components });
    }
    let mut paths = BTreeMap::new();
    for b in 1..g.vertices {
        let dist = bfs_distances(g, b);
        for a in 0..b {
            let mut vertices = vec![a];
            let mut edges = Vec::with_capacity(dist[a]);
            let mut cur = a;
            while cur != b {
                let &(next, e) = g
                    .neighbors(cur)
                    .iter()
                    .find(|&&(u, _)| dist[u] + 1 == dist[cur])
                    .expect("BFS layers are consistent");
                vertices.push(next);
                edges.push(e);
                cur = next;
            }
            paths.insert((a, b), Path { vertices, edges });
        }
    }
    Ok(CanonicalPaths {
        vertices: g.vertices,
        paths,
    })
}

/// Maximum-`λ₊` spanning forest with propagated vertex phases.
#[derive(Debug, Clone, Serialize)]
pub struct SpanningTree {
    pub nu: f64,
    pub vertices: usize,
    /// Graph edge indices of the tree edges, ascending.
    pub tree_edges: Vec<usize>,
    /// Graph edge indices of the discarded edges, ascending.
    pub removed_edges: Vec<usize>,
    /// Component root per vertex (the smallest vertex of its component).
    pub root: Vec<usize>,
    /// Vertex phases `z_v`, with `z_child = z_parent · e^{iθ(parent, child)}`.
    #[serde(skip)]
    pub phases: Vec<Complex64>,
    /// Tree edges, aligned with `tree_edges`.
    pub edges: Vec<Edge>,
    #[serde(skip)]
    adjacency: Vec<Vec<(usize, usize)>>,
}

struct Dsu(Vec<usize>);

impl Dsu {
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.0[ra.max(rb)] = ra.min(rb);
        true
    }
}

/// Kruskal with edges in decreasing `λ₊`, ties by `(a, b)`.
pub fn spanning_tree(g: &TransitionGraph) -> SpanningTree {
    let mut order: Vec<usize> = (0..g.edges.len()).collect();
    order.sort_unstable_by(|&i, &j| {
        let (x, y) = (&g.edges[i], &g.edges[j]);
        y.lambda_plus.total_cmp(&x.lambda_plus).then((x.a, x.b).cmp(&(y.a, y.b)))
    });
    let mut dsu = Dsu((0..g.vertices).collect());
    let mut tree_edges = Vec::new();
    let mut removed_edges = Vec::new();
    for i in order {
        if dsu.union(g.edges[i].a, g.edges[i].b) {
            tree_edges.push(i);
        } else {
            removed_edges.push(i);
        }
    }
    tree_edges.sort_unstable();
    removed_edges.sort_unstable();

    let edges: Vec<Edge> = tree_edges.iter().map(|&i| g.edges[i]).collect();
    let mut adjacency = vec![Vec::new(); g.vertices];
    for (i, e) in edges.iter().enumerate() {
        adjacency[e.a].push((e.b, i));
        adjacency[e.b].push((e.a, i));
    }
    for list in &mut adjacency {
        list.sort_unstable();
    }

    let mut root = vec![usize::MAX; g.vertices];
    let mut phases = vec![Complex64::new(1.0, 0.0); g.vertices];
    for s in 0..g.vertices {
        if root[s] != usize::MAX {
            continue;
        }
        root[s] = s;
        let mut stack = vec![s];
        while let Some(v) = stack.pop() {
            for &(u, i) in &adjacency[v] {
                if root[u] == usize::MAX {
                    root[u] = s;
                    let e = &edges[i];
                    let theta = if e.a == v { e.theta } else { -e.theta };
                    phases[u] = phases[v] * Complex64::from_polar(1.0, theta);
                    stack.push(u);
                }
            }
        }
    }

    SpanningTree {
        nu: g.nu,
        vertices: g.vertices,
        tree_edges,
        removed_edges,
        root,
        phases,
        edges,
        adjacency,
    }
}

impl SpanningTree {
    pub fn tree_neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.adjacency[v]
    }

    /// Vertices sharing `v`'s component, ascending.
    pub fn component_of(&self, v: usize) -> Vec<usize> {
        (0..self.vertices).filter(|&u| self.root[u] == self.root[v]).collect()
    }

    /// Distinct component roots, ascending.
    pub fn roots(&self) -> Vec<usize> {
        let mut r: Vec<usize> = (0..self.vertices).filter(|&v| self.root[v] == v).collect();
        r.sort_unstable();
        r
    }
}

/// Fill weight of one tree edge for a fixed source vertex.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FillWeight {
    /// Index into the tree's edge list.
    pub edge: usize,
    /// Endpoint nearer the source.
    pub near: usize,
    /// Endpoint on the far side.
    pub far: usize,
    pub omega: f64,
}

/// Fill weights `ω_m(l, n) = λ₋(l,n) + φ_n + Σ_{children r of n} (ω_m(n,r) + λ₋(n,r))` for every tree
/// edge in `m`'s component, rooted at `m`.
pub fn fill_weights(t: &SpanningTree, phi: &[f64], m: usize) -> Result<Vec<FillWeight>> {
    if m >= t.vertices {
        return Err(Error::VertexNotInTree(m));
    }
    assert_eq!(phi.len(), t.vertices, "phi has the wrong length");
    // iterative DFS to get a parent order, then accumulate bottom-up
    let mut order = Vec::new();
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; t.vertices];
    let mut seen = vec![false; t.vertices];
    seen[m] = true;
    let mut stack = vec![m];
    while let Some(v) = stack.pop() {
        order.push(v);
        for &(u, e) in t.tree_neighbors(v) {
            if !seen[u] {
                seen[u] = true;
                parent[u] = Some((v, e));
                stack.push(u);
            }
        }
    }
    // below[v] = φ_v + Σ_children (ω(v,child) + λ₋(v,child))
    let mut below = phi.to_vec();
    let mut out = Vec::with_capacity(order.len().saturating_sub(1));
    for &v in order.iter().rev() {
        if let Some((p, e)) = parent[v] {
            let lm = t.edges[e].lambda_minus;
            let omega = lm + below[v];
            out.push(FillWeight {
                edge: e,
                near: p,
                far: v,
                omega,
            });
            below[p] += omega + lm;
        }
    }
    out.sort_by_key(|f| f.edge);
    Ok(out)
}
