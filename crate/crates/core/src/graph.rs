//! Fundamental graphs of periodic graphs and their quotients.
//!
//! An edge is stored directed: `tail -> head` with integer offset `β` joins
//! the copy of `tail` in the cell at the origin with the copy of `head` in the
//! cell `β`. The operator does not depend on the stored orientation.

use std::collections::{BTreeMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intlat::{
    complete_to_basis, saturation, smith_normal_form, smith_with_inverses,
    ChiralMatrix, IntMatrix, UnimodularCompletion,
};

/// Largest accepted offset component; keeps phase arithmetic accurate.
pub const MAX_OFFSET: i64 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Vertex {
    pub label: String,
    pub potential: f64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub tail: usize,
    pub head: usize,
    pub offset: Vec<i64>,
}

impl Edge {
    pub fn is_loop(&self) -> bool {
        self.tail == self.head
    }
}

/// Finite quotient `G/Γ` of a `Γ`-periodic graph, with one potential value per
/// vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct FundamentalGraph {
    dim: usize,
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
}

impl FundamentalGraph {
    pub fn new(dim: usize, vertices: Vec<Vertex>, edges: Vec<Edge>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("dimension must be at least 1".into()));
        }
        if vertices.is_empty() {
            return Err(Error::InvalidInput("graph has no vertices".into()));
        }
        let mut seen = HashSet::new();
        for v in &vertices {
            if !seen.insert(v.label.as_str()) {
                return Err(Error::InvalidInput(format!("duplicate vertex label {:?}", v.label)));
            }
            if !v.potential.is_finite() {
                return Err(Error::InvalidInput(format!("potential of {:?} is not finite", v.label)));
            }
        }
        for (i, e) in edges.iter().enumerate() {
            if e.tail >= vertices.len() || e.head >= vertices.len() {
                return Err(Error::InvalidInput(format!("edge {i} refers to a missing vertex")));
            }
            if e.offset.len() != dim {
                return Err(Error::WrongShape(format!(
                    "edge {i} has offset of length {}, expected {dim}",
                    e.offset.len()
                )));
            }
            if e.offset.iter().any(|x| x.abs() > MAX_OFFSET) {
                return Err(Error::InvalidInput(format!("edge {i} offset exceeds {MAX_OFFSET}")));
            }
        }
        Ok(FundamentalGraph { dim, vertices, edges })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of vertices `ν`.
    pub fn order(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Vertex degree in the periodic graph; a loop counts twice.
    pub fn degree(&self, v: usize) -> usize {
        self.edges
            .iter()
            .map(|e| usize::from(e.tail == v) + usize::from(e.head == v))
            .sum()
    }

    /// Same graph with the representative of vertex `v` moved by `g`.
    pub fn regauge(&self, v: usize, g: &[i64]) -> Result<Self> {
        if g.len() != self.dim {
            return Err(Error::WrongShape("gauge vector length".into()));
        }
        let mut edges = self.edges.clone();
        for e in edges.iter_mut().filter(|e| !e.is_loop()) {
            if e.tail == v {
                e.offset.iter_mut().zip(g).for_each(|(o, x)| *o += x);
            }
            if e.head == v {
                e.offset.iter_mut().zip(g).for_each(|(o, x)| *o -= x);
            }
        }
        Self::new(self.dim, self.vertices.clone(), edges)
    }

    /// Same graph with every potential replaced by `f(label, old)`.
    pub fn with_potentials(&self, mut f: impl FnMut(usize, f64) -> f64) -> Result<Self> {
        let vertices = self
            .vertices
            .iter()
            .enumerate()
            .map(|(i, v)| Vertex { label: v.label.clone(), potential: f(i, v.potential) })
            .collect();
        Self::new(self.dim, vertices, self.edges.clone())
    }
}

fn vertex(label: &str, potential: f64) -> Vertex {
    Vertex { label: label.to_string(), potential }
}

/// `Z^d` lattice: one vertex, `d` loops with offsets `e_1, …, e_d`.
pub fn build_hypercubic(d: usize) -> Result<FundamentalGraph> {
    if d == 0 {
        return Err(Error::InvalidInput("dimension must be at least 1".into()));
    }
    let edges = (0..d)
        .map(|s| {
            let mut offset = vec![0; d];
            offset[s] = 1;
            Edge { tail: 0, head: 0, offset }
        })
        .collect();
    FundamentalGraph::new(d, vec![vertex("v", 0.0)], edges)
}

fn two_vertex_lattice(d: usize, q: f64) -> Result<FundamentalGraph> {
    let mut edges = vec![Edge { tail: 0, head: 1, offset: vec![0; d] }];
    for s in 0..d {
        let mut offset = vec![0; d];
        offset[s] = 1;
        edges.push(Edge { tail: 0, head: 1, offset });
    }
    FundamentalGraph::new(d, vec![vertex("v1", q), vertex("v2", -q)], edges)
}

/// Hexagonal lattice with potentials `±q` on the two sublattices.
pub fn build_hexagonal(q: f64) -> Result<FundamentalGraph> {
    two_vertex_lattice(2, q)
}

/// Diamond lattice with potentials `±q` on the two sublattices.
pub fn build_diamond(q: f64) -> Result<FundamentalGraph> {
    two_vertex_lattice(3, q)
}

/// Result of [`connectivity_check`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConnectivityReport {
    /// Connected components of the fundamental graph (vertex indices).
    pub components: Vec<Vec<usize>>,
    /// Smith invariant factors of the lattice spanned by cycle offsets
    /// (first `d`, zero-padded when the rank is short).
    pub cycle_factors: Vec<i64>,
}

impl ConnectivityReport {
    pub fn is_connected(&self) -> bool {
        self.components.len() == 1 && self.cycle_factors.iter().all(|&s| s == 1)
    }
}

/// Decides whether the periodic graph generated by `g` is connected.
///
/// The fundamental graph must be connected and the offsets of a fundamental
/// cycle basis must generate all of `Z^d`.
pub fn connectivity_check(g: &FundamentalGraph) -> ConnectivityReport {
    let n = g.order();
    let d = g.dim();
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (i, e) in g.edges().iter().enumerate() {
        adj[e.tail].push((i, e.head));
        if !e.is_loop() {
            adj[e.head].push((i, e.tail));
        }
    }

    let mut position: Vec<Option<Vec<i64>>> = vec![None; n];
    let mut tree_edges = HashSet::new();
    let mut components = Vec::new();
    for root in 0..n {
        if position[root].is_some() {
            continue;
        }
        position[root] = Some(vec![0; d]);
        let mut comp = vec![root];
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            for &(ei, w) in &adj[u] {
                if position[w].is_some() {
                    continue;
                }
                let e = &g.edges()[ei];
                let pu = position[u].as_ref().unwrap();
                let pw = if e.tail == u {
                    pu.iter().zip(&e.offset).map(|(a, b)| a + b).collect()
                } else {
                    pu.iter().zip(&e.offset).map(|(a, b)| a - b).collect()
                };
                position[w] = Some(pw);
                tree_edges.insert(ei);
                comp.push(w);
                queue.push_back(w);
            }
        }
        comp.sort_unstable();
        components.push(comp);
    }

    let mut cycles: Vec<Vec<i64>> = Vec::new();
    for (i, e) in g.edges().iter().enumerate() {
        if tree_edges.contains(&i) {
            continue;
        }
        let pt = position[e.tail].as_ref().unwrap();
        let ph = position[e.head].as_ref().unwrap();
        let c: Vec<i64> = (0..d).map(|s| pt[s] + e.offset[s] - ph[s]).collect();
        if c.iter().any(|&x| x != 0) {
            cycles.push(c);
        }
    }

    let mut cycle_factors = vec![0; d];
    if !cycles.is_empty() {
        if let Ok(m) = IntMatrix::from_rows(&cycles) {
            if let Ok(snf) = smith_normal_form(&m) {
                for (slot, s) in cycle_factors.iter_mut().zip(snf.invariant_factors()) {
                    *slot = s;
                }
            }
        }
    }
    ConnectivityReport { components, cycle_factors }
}

/// A subcovering with a primitive chiral set: the base graph seen through a
/// unimodular completion of the chiral matrix.
#[derive(Clone, Debug)]
pub struct SubcoveringView {
    pub base: FundamentalGraph,
    pub chiral: ChiralMatrix,
    pub completion: UnimodularCompletion,
}

impl SubcoveringView {
    /// `d - d_o`.
    pub fn residual_dimension(&self) -> usize {
        self.chiral.dim() - self.chiral.count()
    }

    /// `k(κ) = T̃⁻¹ (0, κ)`.
    pub fn quasimomentum(&self, kappa: &[f64]) -> Vec<f64> {
        self.completion.residual_to_quasimomentum(kappa)
    }

    /// Residual coordinates of a quasimomentum `k` in the restricted zone
    /// (the trailing components of `T̃ k`).
    pub fn residual_coordinates(&self, k: &[f64]) -> Vec<f64> {
        let full = self.completion.matrix().apply_f64(k);
        full[self.chiral.count()..].to_vec()
    }
}

/// Subcovering view for a primitive chiral set, using the Hermite completion.
pub fn quotient_primitive(g: &FundamentalGraph, t: &ChiralMatrix) -> Result<SubcoveringView> {
    let completion = complete_to_basis(t)?;
    quotient_primitive_with(g, t, completion)
}

/// Subcovering view with a caller-chosen completion.
pub fn quotient_primitive_with(
    g: &FundamentalGraph,
    t: &ChiralMatrix,
    completion: UnimodularCompletion,
) -> Result<SubcoveringView> {
    if t.dim() != g.dim() {
        return Err(Error::WrongShape(format!(
            "chiral matrix has {} columns, graph dimension is {}",
            t.dim(),
            g.dim()
        )));
    }
    if completion.matrix().row_range(0, t.count()) != *t.matrix() {
        return Err(Error::InvalidInput("completion does not extend the chiral matrix".into()));
    }
    Ok(SubcoveringView { base: g.clone(), chiral: t.clone(), completion })
}

/// Explicit fundamental graph of the subcovering `G/Γ_τ` as a
/// `(d - d_o)`-periodic graph. Primitivity is not required.
///
/// Vertices are pairs `(v, c)` with `c` running over coset representatives of
/// `Γ_sat / Γ_τ`, listed coset-major in lexicographic order of their Smith
/// coordinates, so the result has `index · ν` vertices.
pub fn quotient_general(g: &FundamentalGraph, t: &ChiralMatrix) -> Result<FundamentalGraph> {
    if t.dim() != g.dim() {
        return Err(Error::WrongShape(format!(
            "chiral matrix has {} columns, graph dimension is {}",
            t.dim(),
            g.dim()
        )));
    }
    let k = t.count();
    let sat = saturation(t)?;
    let base_rows = if sat.index == 1 { t.clone() } else { ChiralMatrix::new(sat.basis)? };
    let completion = complete_to_basis(&base_rows)?;
    let w_inv = completion.inverse();

    // T = C · B with C = leading block of T · W⁻¹.
    let tw = t.matrix().mul(w_inv)?;
    let c = tw.select_cols(&(0..k).collect::<Vec<_>>());
    let snf = smith_with_inverses(&c)?;
    let moduli = snf.s;
    let v2_inv = snf.v_inv;

    let cosets = enumerate_cosets(&moduli);
    let coset_index: BTreeMap<Vec<i64>, usize> =
        cosets.iter().cloned().enumerate().map(|(i, c)| (c, i)).collect();
    let nu = g.order();
    let trivial = cosets_is_trivial(&moduli);

    let vertices = cosets
        .iter()
        .flat_map(|c| {
            g.vertices().iter().map(move |v| Vertex {
                label: if trivial {
                    v.label.clone()
                } else {
                    format!(
                        "{}#{}",
                        v.label,
                        c.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(".")
                    )
                },
                potential: v.potential,
            })
        })
        .collect();

    let mut edges = Vec::with_capacity(g.edges().len() * cosets.len());
    for (ci, c) in cosets.iter().enumerate() {
        for e in g.edges() {
            let y = IntMatrix::from_rows(std::slice::from_ref(&e.offset))?.mul(w_inv)?;
            let y_lead = IntMatrix::from_rows(&[y.row(0)[..k].to_vec()])?;
            let shift = y_lead.mul(&v2_inv)?;
            let target: Vec<i64> = c
                .iter()
                .zip(shift.row(0))
                .zip(&moduli)
                .map(|((a, b), &m)| (a + b).rem_euclid(m))
                .collect();
            let cj = coset_index[&target];
            edges.push(Edge {
                tail: ci * nu + e.tail,
                head: cj * nu + e.head,
                offset: y.row(0)[k..].to_vec(),
            });
        }
    }
    FundamentalGraph::new(t.dim() - k, vertices, edges)
}

fn cosets_is_trivial(moduli: &[i64]) -> bool {
    moduli.iter().all(|&m| m == 1)
}

fn enumerate_cosets(moduli: &[i64]) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for &m in moduli {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..m).map(move |x| {
                    let mut p = prefix.clone();
                    p.push(x);
                    p
                })
            })
            .collect();
    }
    out
}

/// On-disk graph description (labels instead of indices).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub dimension: usize,
    pub vertices: Vec<Vertex>,
    pub edges: Vec<EdgeRecord>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeRecord {
    pub tail: String,
    pub head: String,
    pub offset: Vec<i64>,
}

impl GraphFile {
    pub fn into_graph(self) -> Result<FundamentalGraph> {
        let index: BTreeMap<&str, usize> = self
            .vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (v.label.as_str(), i))
            .collect();
        if index.len() != self.vertices.len() {
            return Err(Error::InvalidInput("duplicate vertex labels".into()));
        }
        let lookup = |l: &str| {
            index
                .get(l)
                .copied()
                .ok_or_else(|| Error::InvalidInput(format!("unknown vertex label {l:?}")))
        };
        let edges = self
            .edges
            .iter()
            .map(|e| {
                Ok(Edge { tail: lookup(&e.tail)?, head: lookup(&e.head)?, offset: e.offset.clone() })
            })
            .collect::<Result<Vec<_>>>()?;
        FundamentalGraph::new(self.dimension, self.vertices.clone(), edges)
    }

    pub fn from_graph(g: &FundamentalGraph) -> Self {
        GraphFile {
            dimension: g.dim(),
            vertices: g.vertices().to_vec(),
            edges: g
                .edges()
                .iter()
                .map(|e| EdgeRecord {
                    tail: g.vertices()[e.tail].label.clone(),
                    head: g.vertices()[e.head].label.clone(),
                    offset: e.offset.clone(),
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hypercubic_shape() {
        let g = build_hypercubic(1).unwrap();
        assert_eq!(g.order(), 1);
        assert_eq!(g.edges().len(), 1);
        assert_eq!(g.edges()[0].offset, vec![1]);
        assert_eq!(g.degree(0), 2);
        assert_eq!(build_hypercubic(3).unwrap().degree(0), 6);
        assert!(build_hypercubic(0).is_err());
    }

    #[test]
    fn hexagonal_and_diamond_shape() {
        let h = build_hexagonal(1.0).unwrap();
        assert_eq!(h.order(), 2);
        assert_eq!(h.degree(0), 3);
        assert_eq!(h.vertices()[1].potential, -1.0);
        let offs: Vec<_> = h.edges().iter().map(|e| e.offset.clone()).collect();
        assert_eq!(offs, vec![vec![0, 0], vec![1, 0], vec![0, 1]]);
        let d = build_diamond(2.0).unwrap();
        assert_eq!(d.degree(1), 4);
        assert_eq!(d.edges().len(), 4);
    }

    #[test]
    fn builtins_are_connected() {
        for g in [
            build_hypercubic(1).unwrap(),
            build_hypercubic(2).unwrap(),
            build_hypercubic(3).unwrap(),
            build_hexagonal(1.0).unwrap(),
            build_diamond(1.0).unwrap(),
        ] {
            assert!(connectivity_check(&g).is_connected());
        }
    }

    #[test]
    fn index_two_offset_lattice_is_disconnected() {
        let g = FundamentalGraph::new(
            2,
            vec![vertex("v", 0.0)],
            vec![
                Edge { tail: 0, head: 0, offset: vec![2, 0] },
                Edge { tail: 0, head: 0, offset: vec![0, 1] },
            ],
        )
        .unwrap();
        let r = connectivity_check(&g);
        assert!(!r.is_connected());
        assert_eq!(r.components.len(), 1);
        assert_eq!(r.cycle_factors, vec![1, 2]);
    }

    #[test]
    fn disconnected_fundamental_graph() {
        let g = FundamentalGraph::new(
            1,
            vec![vertex("a", 0.0), vertex("b", 0.0)],
            vec![Edge { tail: 0, head: 0, offset: vec![1] }],
        )
        .unwrap();
        let r = connectivity_check(&g);
        assert_eq!(r.components, vec![vec![0], vec![1]]);
        assert!(!r.is_connected());
    }

    #[test]
    fn validation_errors() {
        assert!(FundamentalGraph::new(
            2,
            vec![vertex("a", 0.0)],
            vec![Edge { tail: 0, head: 0, offset: vec![1] }]
        )
        .is_err());
        assert!(FundamentalGraph::new(1, vec![vertex("a", 0.0), vertex("a", 1.0)], vec![]).is_err());
        assert!(FundamentalGraph::new(1, vec![], vec![]).is_err());
    }

    #[test]
    fn primitive_views() {
        let h = build_hexagonal(1.0).unwrap();
        let v = quotient_primitive(&h, &ChiralMatrix::from_rows(&[[5, 2]]).unwrap()).unwrap();
        assert_eq!(v.residual_dimension(), 1);
        let c = build_hypercubic(3).unwrap();
        let t = ChiralMatrix::from_rows(&[[1, 5, -1], [4, 1, 0]]).unwrap();
        assert_eq!(quotient_primitive(&c, &t).unwrap().residual_dimension(), 1);
        let t = ChiralMatrix::from_rows(&[[1, 0, 0]]).unwrap();
        let v = quotient_primitive(&c, &t).unwrap();
        assert_eq!(v.quasimomentum(&[0.3, -1.1]), vec![0.0, 0.3, -1.1]);
        assert!(matches!(
            quotient_primitive(&h, &ChiralMatrix::from_rows(&[[2, 0]]).unwrap()),
            Err(Error::NotPrimitive { index: 2 })
        ));
    }

    #[test]
    fn zigzag_quotient_structure() {
        let h = build_hexagonal(1.0).unwrap();
        let z = quotient_general(&h, &ChiralMatrix::from_rows(&[[2, 0]]).unwrap()).unwrap();
        assert_eq!(z.order(), 4);
        assert_eq!(z.dim(), 1);
        assert!(connectivity_check(&z).is_connected());
        let pots: Vec<f64> = z.vertices().iter().map(|v| v.potential).collect();
        assert_eq!(pots, vec![1.0, -1.0, 1.0, -1.0]);
    }

    #[test]
    fn general_quotient_vertex_count() {
        let c = build_hypercubic(2).unwrap();
        let g = quotient_general(&c, &ChiralMatrix::from_rows(&[[3, 0]]).unwrap()).unwrap();
        assert_eq!(g.order(), 3);
        let c3 = build_hypercubic(3).unwrap();
        let t = ChiralMatrix::from_rows(&[[2, 0, 0], [0, 3, 0]]).unwrap();
        assert_eq!(quotient_general(&c3, &t).unwrap().order(), 6);
        let t = ChiralMatrix::from_rows(&[[1, 2, 3], [2, 4, 6]]).unwrap();
        assert_eq!(quotient_general(&c3, &t), Err(Error::RankDeficient));
    }

    #[test]
    fn graph_file_round_trip() {
        let h = build_hexagonal(0.5).unwrap();
        assert_eq!(GraphFile::from_graph(&h).into_graph().unwrap(), h);
    }
}
