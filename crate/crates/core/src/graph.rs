//! Weighted graphs, twin vertices and the rank-one edge perturbation.
//!
//! Vertices are `0..n`. A [`WeightedGraph`] keeps a symmetric weight table
//! where an absent pair means weight 0. Perturbing the edge `{a, b}` by
//! `alpha` adds `alpha * M` to the Laplacian, with
//! `M = (e_a - e_b)(e_a - e_b)^T`.

use std::collections::BTreeMap;

use rand::Rng;

use crate::error::{Error, Result};
use crate::matrix::SymmetricMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    n: usize,
    /// Keyed by `(u, v)` with `u < v`. Zero weights are never stored.
    weights: BTreeMap<(usize, usize), f64>,
}

#[inline]
fn key(u: usize, v: usize) -> (usize, usize) {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

impl WeightedGraph {
    /// Graph on `n` vertices with no edges.
    pub fn empty(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        Ok(Self {
            n,
            weights: BTreeMap::new(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn weight(&self, u: usize, v: usize) -> f64 {
        if u == v {
            return 0.0;
        }
        self.weights.get(&key(u, v)).copied().unwrap_or(0.0)
    }

    /// Edges as `(u, v, w)` with `u < v`, sorted.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.weights.iter().map(|(&(u, v), &w)| (u, v, w))
    }

    pub fn edge_count(&self) -> usize {
        self.weights.len()
    }

    pub fn has_negative_weight(&self) -> bool {
        self.weights.values().any(|&w| w < 0.0)
    }

    pub fn degree(&self, u: usize) -> f64 {
        (0..self.n).map(|v| self.weight(u, v)).sum()
    }

    pub(crate) fn check_vertex(&self, v: usize) -> Result<()> {
        if v >= self.n {
            Err(Error::IndexOutOfRange {
                vertex: v,
                n: self.n,
            })
        } else {
            Ok(())
        }
    }

    fn set_weight(&mut self, u: usize, v: usize, w: f64) {
        if w == 0.0 {
            self.weights.remove(&key(u, v));
        } else {
            self.weights.insert(key(u, v), w);
        }
    }
}

/// Builds a graph from `(u, v, w)` triples. Every weight must be positive.
pub fn build_graph(n: usize, edges: &[(usize, usize, f64)]) -> Result<WeightedGraph> {
    let mut g = WeightedGraph::empty(n)?;
    for &(u, v, w) in edges {
        g.check_vertex(u)?;
        g.check_vertex(v)?;
        if u == v {
            return Err(Error::SelfLoop(u));
        }
        if !w.is_finite() || w <= 0.0 {
            return Err(Error::NonPositiveWeight { u, v, w });
        }
        if g.weights.contains_key(&key(u, v)) {
            return Err(Error::DuplicateEdge(u.min(v), u.max(v)));
        }
        g.set_weight(u, v, w);
    }
    Ok(g)
}

/// `L = D - A`.
pub fn laplacian(g: &WeightedGraph) -> SymmetricMatrix {
    let mut l = SymmetricMatrix::zeros(g.n);
    for (u, v, w) in g.edges() {
        l.set(u, v, -w);
        l.add_to(u, u, w);
        l.add_to(v, v, w);
    }
    l
}

pub fn adjacency(g: &WeightedGraph) -> SymmetricMatrix {
    let mut a = SymmetricMatrix::zeros(g.n);
    for (u, v, w) in g.edges() {
        a.set(u, v, w);
    }
    a
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwinPair {
    pub a: usize,
    pub b: usize,
    pub adjacent: bool,
    /// Common weight to each shared neighbour outside `{a, b}`.
    pub shared_weight_profile: BTreeMap<usize, f64>,
}

/// Twins carry identical weights to every vertex outside the pair.
pub fn is_twin_pair(g: &WeightedGraph, a: usize, b: usize) -> Result<bool> {
    g.check_vertex(a)?;
    g.check_vertex(b)?;
    if a == b {
        return Err(Error::EqualVertices(a));
    }
    Ok((0..g.n)
        .filter(|&q| q != a && q != b)
        .all(|q| g.weight(a, q) == g.weight(b, q)))
}

/// Returns the pair as a [`TwinPair`], or `Ok(None)` if it is not one.
pub fn twin_pair(g: &WeightedGraph, a: usize, b: usize) -> Result<Option<TwinPair>> {
    if !is_twin_pair(g, a, b)? {
        return Ok(None);
    }
    let (a, b) = (a.min(b), a.max(b));
    let shared_weight_profile = (0..g.n)
        .filter(|&q| q != a && q != b && g.weight(a, q) != 0.0)
        .map(|q| (q, g.weight(a, q)))
        .collect();
    Ok(Some(TwinPair {
        a,
        b,
        adjacent: g.weight(a, b) != 0.0,
        shared_weight_profile,
    }))
}

pub fn list_twin_pairs(g: &WeightedGraph) -> Vec<TwinPair> {
    let mut out = Vec::new();
    for a in 0..g.n {
        for b in a + 1..g.n {
            if let Ok(Some(tp)) = twin_pair(g, a, b) {
                out.push(tp);
            }
        }
    }
    out
}

/// `M = (e_a - e_b)(e_a - e_b)^T` in dimension `n`.
pub fn rank_one_m(n: usize, a: usize, b: usize) -> Result<SymmetricMatrix> {
    for v in [a, b] {
        if v >= n {
            return Err(Error::IndexOutOfRange { vertex: v, n });
        }
    }
    if a == b {
        return Err(Error::EqualVertices(a));
    }
    let mut m = SymmetricMatrix::zeros(n);
    m.set(a, a, 1.0);
    m.set(b, b, 1.0);
    m.set(a, b, -1.0);
    Ok(m)
}

/// Recovers `(a, b)`, `a < b`, from a matrix built by [`rank_one_m`].
pub fn rank_one_pair(m: &SymmetricMatrix) -> Option<(usize, usize)> {
    let n = m.dim();
    let mut found = None;
    for i in 0..n {
        for j in i..n {
            let v = m.get(i, j);
            if v == 0.0 {
                continue;
            }
            if i == j {
                if v != 1.0 {
                    return None;
                }
            } else if v != -1.0 || found.replace((i, j)).is_some() {
                return None;
            }
        }
    }
    let (a, b) = found?;
    (m.get(a, a) == 1.0 && m.get(b, b) == 1.0).then_some((a, b))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgePerturbation {
    a: usize,
    b: usize,
    pub alpha: f64,
}

impl EdgePerturbation {
    pub fn new(a: usize, b: usize, alpha: f64) -> Result<Self> {
        if a == b {
            return Err(Error::EqualVertices(a));
        }
        Ok(Self { a, b, alpha })
    }

    pub fn a(&self) -> usize {
        self.a
    }

    pub fn b(&self) -> usize {
        self.b
    }
}

/// Adds `alpha` to the weight of `{a, b}`. Negative results are kept.
pub fn perturb_edge(g: &WeightedGraph, p: EdgePerturbation) -> Result<WeightedGraph> {
    g.check_vertex(p.a)?;
    g.check_vertex(p.b)?;
    let mut out = g.clone();
    out.set_weight(p.a, p.b, g.weight(p.a, p.b) + p.alpha);
    Ok(out)
}

/// Random weighted graph on `n >= 2` vertices with vertices `n - 2` and
/// `n - 1` planted as twins. Weights are drawn from a few small values so
/// ties and absent edges both occur.
pub fn random_graph_with_twins<R: Rng + ?Sized>(rng: &mut R, n: usize) -> WeightedGraph {
    assert!(n >= 2, "need at least two vertices");
    const CHOICES: [f64; 5] = [0.0, 0.0, 1.0, 0.5, 2.0];
    let mut g = WeightedGraph::empty(n).expect("n >= 2");
    let (a, b) = (n - 2, n - 1);
    for u in 0..a {
        for v in u + 1..a {
            g.set_weight(u, v, CHOICES[rng.random_range(0..CHOICES.len())]);
        }
        let w = CHOICES[rng.random_range(0..CHOICES.len())];
        g.set_weight(u, a, w);
        g.set_weight(u, b, w);
    }
    g.set_weight(a, b, CHOICES[rng.random_range(0..CHOICES.len())]);
    g
}
