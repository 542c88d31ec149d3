//! Signed multigraphs and their matrix views.
//!
//! The one graph type here carries every object the pipeline touches: the
//! biregular constraint/variable graph, its random lifts and signings, and
//! the primal (clique-expanded) 2XOR instance. Parallel edges are first-class:
//! each edge occupies its own slot, so the non-backtracking matrix can exclude
//! only the reversal of the *same* parallel edge.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default dimension cap for dense matrix construction.
pub const DENSE_CAP: usize = 2_000;

/// Default cap on arc count for dense non-backtracking matrices.
pub const NB_DENSE_CAP: usize = 3_000;

/// An undirected edge with a ±1 label. Endpoints are vertex indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub u: u32,
    pub v: u32,
    pub sign: i8,
}

/// Loopless multigraph with ±1 edge labels and an optional bipartition.
///
/// When `bipartition = Some((m, n))`, vertices `0..m` form the left part
/// (constraints) and `m..m+n` the right part (variables); every edge must
/// cross the parts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignedMultigraph {
    vertex_count: usize,
    edges: Vec<Edge>,
    bipartition: Option<(usize, usize)>,
}

/// ±1 assignment to the variable vertices of an instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment(pub Vec<i8>);

impl Assignment {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl SignedMultigraph {
    pub fn new(vertex_count: usize, edges: Vec<Edge>) -> Result<Self> {
        Self::with_bipartition(vertex_count, edges, None)
    }

    pub fn with_bipartition(
        vertex_count: usize,
        edges: Vec<Edge>,
        bipartition: Option<(usize, usize)>,
    ) -> Result<Self> {
        if let Some((m, n)) = bipartition {
            if m + n != vertex_count {
                return Err(Error::InvalidGraph(format!(
                    "bipartition {m}+{n} != vertex count {vertex_count}"
                )));
            }
        }
        for e in &edges {
            if e.u as usize >= vertex_count || e.v as usize >= vertex_count {
                return Err(Error::InvalidGraph(format!(
                    "edge ({},{}) out of range (|V| = {vertex_count})",
                    e.u, e.v
                )));
            }
            if e.u == e.v {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {}", e.u)));
            }
            if e.sign != 1 && e.sign != -1 {
                return Err(Error::InvalidGraph(format!("edge sign {} not ±1", e.sign)));
            }
            if let Some((m, _)) = bipartition {
                let m = m as u32;
                if (e.u < m) == (e.v < m) {
                    return Err(Error::InvalidGraph(format!(
                        "edge ({},{}) does not cross the bipartition",
                        e.u, e.v
                    )));
                }
            }
        }
        Ok(Self {
            vertex_count,
            edges,
            bipartition,
        })
    }

    /// Convenience constructor from `(u, v, sign)` triples.
    pub fn from_edges(vertex_count: usize, edges: &[(u32, u32, i8)]) -> Result<Self> {
        Self::new(
            vertex_count,
            edges
                .iter()
                .map(|&(u, v, sign)| Edge { u, v, sign })
                .collect(),
        )
    }

    /// Complete bipartite graph K_{left,right}, all labels +1, with the
    /// bipartition recorded. `kdc(d, c)` is the base graph of the lift model:
    /// `d` constraints of degree `c`, `c` variables of degree `d`.
    pub fn kdc(left: usize, right: usize) -> Self {
        let mut edges = Vec::with_capacity(left * right);
        for a in 0..left {
            for i in 0..right {
                edges.push(Edge {
                    u: a as u32,
                    v: (left + i) as u32,
                    sign: 1,
                });
            }
        }
        Self {
            vertex_count: left + right,
            edges,
            bipartition: Some((left, right)),
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn bipartition(&self) -> Option<(usize, usize)> {
        self.bipartition
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0usize; self.vertex_count];
        for e in &self.edges {
            deg[e.u as usize] += 1;
            deg[e.v as usize] += 1;
        }
        deg
    }

    /// Adjacency list: for each vertex, `(neighbor, edge_slot)` pairs.
    pub fn adjacency_list(&self) -> Vec<Vec<(u32, u32)>> {
        let mut adj = vec![Vec::new(); self.vertex_count];
        for (i, e) in self.edges.iter().enumerate() {
            adj[e.u as usize].push((e.v, i as u32));
            adj[e.v as usize].push((e.u, i as u32));
        }
        adj
    }

    /// Checks (c,d)-biregularity and returns `(c, d)` = (left degree, right degree).
    pub fn biregularity(&self) -> Result<(usize, usize)> {
        let (m, n) = self
            .bipartition
            .ok_or_else(|| Error::NotBiregular("no bipartition recorded".into()))?;
        if m == 0 || n == 0 {
            return Err(Error::NotBiregular("empty part".into()));
        }
        let deg = self.degrees();
        let c = deg[0];
        let d = deg[m];
        for v in 0..m {
            if deg[v] != c {
                return Err(Error::NotBiregular(format!(
                    "left vertex {v} has degree {} != {c}",
                    deg[v]
                )));
            }
        }
        for v in m..m + n {
            if deg[v] != d {
                return Err(Error::NotBiregular(format!(
                    "right vertex {v} has degree {} != {d}",
                    deg[v]
                )));
            }
        }
        Ok((c, d))
    }

    /// Dense adjacency matrix; entry [i,j] sums the ±1 labels over all
    /// parallel edges between i and j.
    pub fn adjacency_dense(&self) -> Result<DMatrix<f64>> {
        self.adjacency_dense_capped(DENSE_CAP)
    }

    pub fn adjacency_dense_capped(&self, cap: usize) -> Result<DMatrix<f64>> {
        let n = self.vertex_count;
        if n > cap {
            return Err(Error::ResourceCap(format!(
                "dense adjacency of dimension {n} exceeds cap {cap}"
            )));
        }
        let mut a = DMatrix::zeros(n, n);
        for e in &self.edges {
            let (u, v, s) = (e.u as usize, e.v as usize, e.sign as f64);
            a[(u, v)] += s;
            a[(v, u)] += s;
        }
        Ok(a)
    }

    /// Dense degree matrix; both signed and unsigned edges count 1.
    pub fn degree_dense(&self) -> Result<DMatrix<f64>> {
        let n = self.vertex_count;
        if n > DENSE_CAP {
            return Err(Error::ResourceCap(format!(
                "dense degree matrix of dimension {n} exceeds cap {DENSE_CAP}"
            )));
        }
        let deg = self.degrees();
        Ok(DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            n,
            deg.iter().map(|&d| d as f64),
        )))
    }

    /// Dense Laplacian D - A.
    pub fn laplacian_dense(&self) -> Result<DMatrix<f64>> {
        Ok(self.degree_dense()? - self.adjacency_dense()?)
    }

    /// Deformed Laplacian (1-u²)·I + u²·D - u·A.
    pub fn deformed_laplacian_dense(&self, u: f64) -> Result<DMatrix<f64>> {
        let n = self.vertex_count;
        let mut m = self.degree_dense()? * (u * u) - self.adjacency_dense()? * u;
        for i in 0..n {
            m[(i, i)] += 1.0 - u * u;
        }
        Ok(m)
    }

    /// Sparse symmetric adjacency in CSR form.
    pub fn adjacency_csr(&self) -> Csr {
        let mut triplets: Vec<(u32, u32, f64)> = Vec::with_capacity(2 * self.edges.len());
        for e in &self.edges {
            triplets.push((e.u, e.v, e.sign as f64));
            triplets.push((e.v, e.u, e.sign as f64));
        }
        Csr::from_triplets(self.vertex_count, self.vertex_count, triplets)
    }

    /// Sparse Laplacian D - A in CSR form.
    pub fn laplacian_csr(&self) -> Csr {
        let mut triplets: Vec<(u32, u32, f64)> = Vec::with_capacity(3 * self.edges.len());
        for e in &self.edges {
            triplets.push((e.u, e.v, -(e.sign as f64)));
            triplets.push((e.v, e.u, -(e.sign as f64)));
            triplets.push((e.u, e.u, 1.0));
            triplets.push((e.v, e.v, 1.0));
        }
        Csr::from_triplets(self.vertex_count, self.vertex_count, triplets)
    }

    /// Biadjacency of a bipartite graph as CSR: rows = left part, cols = right.
    pub fn biadjacency_csr(&self) -> Result<Csr> {
        let (m, n) = self
            .bipartition
            .ok_or_else(|| Error::InvalidGraph("no bipartition".into()))?;
        let triplets = self
            .edges
            .iter()
            .map(|e| {
                let (a, i) = if (e.u as usize) < m {
                    (e.u, e.v)
                } else {
                    (e.v, e.u)
                };
                (a, i - m as u32, e.sign as f64)
            })
            .collect();
        Ok(Csr::from_triplets(m, n, triplets))
    }

    /// Dense non-backtracking matrix over arcs, with the arc index.
    ///
    /// Entry [(i,j),(k,l)] is the sign of (i,j) iff j = k and the second arc
    /// is not the reversal of the same parallel slot.
    pub fn non_backtracking_dense(&self) -> Result<(DMatrix<f64>, DirectedEdgeIndex)> {
        let idx = self.directed_edge_index()?;
        let na = idx.arc_count();
        if na > NB_DENSE_CAP {
            return Err(Error::ResourceCap(format!(
                "non-backtracking matrix with {na} arcs exceeds cap {NB_DENSE_CAP}"
            )));
        }
        let mut b = DMatrix::zeros(na, na);
        for a in 0..na {
            let sign = idx.sign(a) as f64;
            for &b_arc in idx.out_arcs(idx.head(a)) {
                if b_arc == (a ^ 1) {
                    continue;
                }
                b[(a, b_arc)] = sign;
            }
        }
        Ok((b, idx))
    }

    /// Exact integer non-backtracking matrix for trace arithmetic.
    pub fn non_backtracking_int(&self) -> Result<(Vec<Vec<i64>>, DirectedEdgeIndex)> {
        let idx = self.directed_edge_index()?;
        let na = idx.arc_count();
        if na > NB_DENSE_CAP {
            return Err(Error::ResourceCap(format!(
                "non-backtracking matrix with {na} arcs exceeds cap {NB_DENSE_CAP}"
            )));
        }
        let mut b = vec![vec![0i64; na]; na];
        for a in 0..na {
            let sign = idx.sign(a) as i64;
            for &b_arc in idx.out_arcs(idx.head(a)) {
                if b_arc == (a ^ 1) {
                    continue;
                }
                b[a][b_arc] = sign;
            }
        }
        Ok((b, idx))
    }

    pub fn directed_edge_index(&self) -> Result<DirectedEdgeIndex> {
        if self.edges.is_empty() {
            return Err(Error::InvalidGraph("graph has no edges".into()));
        }
        Ok(DirectedEdgeIndex::new(self))
    }

    /// Primal graph: replace each constraint's neighborhood by a clique on the
    /// variables, edge {i,j} via constraint a getting the sign ξ_ai·ξ_aj.
    /// Output vertices are the variable vertices renumbered from 0.
    pub fn primal_graph(&self) -> Result<SignedMultigraph> {
        let (_c, _d) = self.biregularity()?;
        let (m, n) = self.bipartition.unwrap();
        let mut incident: Vec<Vec<(u32, i8)>> = vec![Vec::new(); m];
        for e in &self.edges {
            let (a, i) = if (e.u as usize) < m {
                (e.u, e.v)
            } else {
                (e.v, e.u)
            };
            incident[a as usize].push((i - m as u32, e.sign));
        }
        let mut edges = Vec::new();
        for vars in &incident {
            for i in 0..vars.len() {
                for j in i + 1..vars.len() {
                    edges.push(Edge {
                        u: vars[i].0,
                        v: vars[j].0,
                        sign: vars[i].1 * vars[j].1,
                    });
                }
            }
        }
        SignedMultigraph::new(n, edges)
    }

    /// Fraction of NAE constraints and of 2XOR constraints satisfied by `a`,
    /// the two counted independently. Requires c = 3 for the NAE view.
    pub fn evaluate_assignment(&self, a: &Assignment) -> Result<(f64, f64)> {
        let (nae_sat, m, xor_sat, xm) = self.evaluate_assignment_counts(a)?;
        Ok((nae_sat as f64 / m as f64, xor_sat as f64 / xm as f64))
    }

    /// Raw satisfaction counts: (nae satisfied, #constraints, xor satisfied, #xor edges).
    pub fn evaluate_assignment_counts(
        &self,
        assignment: &Assignment,
    ) -> Result<(usize, usize, usize, usize)> {
        let (c, _d) = self.biregularity()?;
        if c != 3 {
            return Err(Error::InvalidParameter(format!(
                "NAE evaluation requires c = 3, got c = {c}"
            )));
        }
        let (m, n) = self.bipartition.unwrap();
        if assignment.len() != n {
            return Err(Error::InvalidParameter(format!(
                "assignment length {} != variable count {n}",
                assignment.len()
            )));
        }
        let mut incident: Vec<Vec<(usize, i8)>> = vec![Vec::new(); m];
        for e in &self.edges {
            let (a, i) = if (e.u as usize) < m {
                (e.u, e.v)
            } else {
                (e.v, e.u)
            };
            incident[a as usize].push((i as usize - m, e.sign));
        }
        let mut nae_sat = 0usize;
        let mut xor_sat = 0usize;
        let mut xor_total = 0usize;
        for vars in &incident {
            // adjusted literal values ξ_ai·x_i
            let lits: Vec<i8> = vars.iter().map(|&(i, s)| s * assignment.0[i]).collect();
            let all_equal = lits.windows(2).all(|w| w[0] == w[1]);
            if !all_equal {
                nae_sat += 1;
            }
            // 2XOR view: edge {i,j} with sign ξ = ξ_ai ξ_aj satisfied iff x_i x_j = -ξ
            for i in 0..vars.len() {
                for j in i + 1..vars.len() {
                    xor_total += 1;
                    let xi = vars[i].1 * vars[j].1;
                    let prod = assignment.0[vars[i].0] * assignment.0[vars[j].0];
                    if prod as i16 == -(xi as i16) {
                        xor_sat += 1;
                    }
                }
            }
        }
        Ok((nae_sat, m, xor_sat, xor_total))
    }
}

/// Arc-level index of a multigraph: arc `2e` runs along edge slot `e` from u
/// to v, arc `2e+1` the reverse. The involution `a ↔ a^1` is fixed-point free.
#[derive(Debug, Clone)]
pub struct DirectedEdgeIndex {
    tails: Vec<u32>,
    heads: Vec<u32>,
    signs: Vec<i8>,
    /// Arcs grouped by tail vertex.
    out_offsets: Vec<usize>,
    out_arcs: Vec<usize>,
}

impl DirectedEdgeIndex {
    fn new(g: &SignedMultigraph) -> Self {
        let na = 2 * g.edges.len();
        let mut tails = Vec::with_capacity(na);
        let mut heads = Vec::with_capacity(na);
        let mut signs = Vec::with_capacity(na);
        for e in &g.edges {
            tails.push(e.u);
            heads.push(e.v);
            signs.push(e.sign);
            tails.push(e.v);
            heads.push(e.u);
            signs.push(e.sign);
        }
        let nv = g.vertex_count;
        let mut counts = vec![0usize; nv + 1];
        for &t in &tails {
            counts[t as usize + 1] += 1;
        }
        for i in 0..nv {
            counts[i + 1] += counts[i];
        }
        let mut out_arcs = vec![0usize; na];
        let mut cursor = counts.clone();
        for (a, &t) in tails.iter().enumerate() {
            out_arcs[cursor[t as usize]] = a;
            cursor[t as usize] += 1;
        }
        Self {
            tails,
            heads,
            signs,
            out_offsets: counts,
            out_arcs,
        }
    }

    pub fn arc_count(&self) -> usize {
        self.tails.len()
    }

    pub fn tail(&self, arc: usize) -> u32 {
        self.tails[arc]
    }

    pub fn head(&self, arc: usize) -> u32 {
        self.heads[arc]
    }

    pub fn sign(&self, arc: usize) -> i8 {
        self.signs[arc]
    }

    /// Edge slot of an arc.
    pub fn slot(&self, arc: usize) -> usize {
        arc >> 1
    }

    /// Index of the reversed arc.
    pub fn reversed(&self, arc: usize) -> usize {
        arc ^ 1
    }

    /// Arc index for edge slot `e` in the given direction.
    pub fn arc_of(&self, slot: usize, forward: bool) -> usize {
        2 * slot + usize::from(!forward)
    }

    pub fn out_arcs(&self, v: u32) -> &[usize] {
        &self.out_arcs[self.out_offsets[v as usize]..self.out_offsets[v as usize + 1]]
    }
}

/// Minimal CSR matrix for sparse symmetric matvec work.
#[derive(Debug, Clone)]
pub struct Csr {
    pub rows: usize,
    pub cols: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<u32>,
    pub values: Vec<f64>,
}

impl Csr {
    pub fn from_triplets(rows: usize, cols: usize, mut triplets: Vec<(u32, u32, f64)>) -> Self {
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; rows + 1];
        let mut col_idx: Vec<u32> = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut prev: Option<(u32, u32)> = None;
        for (r, c, v) in triplets {
            if prev == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r as usize + 1] = col_idx.len();
                prev = Some((r, c));
            }
        }
        for i in 1..=rows {
            row_ptr[i] = row_ptr[i].max(row_ptr[i - 1]);
        }
        Self {
            rows,
            cols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(y.len(), self.rows);
        for r in 0..self.rows {
            let mut acc = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[k] * x[self.col_idx[k] as usize];
            }
            y[r] = acc;
        }
    }

    pub fn transpose_matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.rows);
        debug_assert_eq!(y.len(), self.cols);
        y.fill(0.0);
        for r in 0..self.rows {
            let xv = x[r];
            if xv == 0.0 {
                continue;
            }
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                y[self.col_idx[k] as usize] += self.values[k] * xv;
            }
        }
    }
}
