//! Gaussian-wave SDP feasibility witnesses on lifted instances.
//!
//! Good vertices (tree-like neighborhoods) receive geometrically decaying
//! coefficients over the IID generators in their primal ball, with path signs;
//! bad vertices fall back to private unit generators. The Gram matrix of the
//! resulting vectors is PSD by construction with exactly unit diagonal.

use nalgebra::DMatrix;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::SignedMultigraph;
use crate::linalg;
use crate::tree::{
    solve_truncated_rho, truncated_variance_sum, wave_params, TreeParams, WaveParams,
};

/// Dense Gram storage cap; above it entries are computed on demand.
pub const GRAM_DENSE_CAP: usize = 4_000;

/// Hard ceiling on the truncation radius search.
const MAX_TRUNCATION_RADIUS: usize = 64;

/// An explicit SDP-feasible point: per-vertex coefficient vectors over IID
/// generators plus the induced Gram entries.
#[derive(Debug, Clone)]
pub struct GramWitness {
    /// Sparse unit coefficient rows, sorted by generator id.
    pub coefficients: Vec<Vec<(u32, f64)>>,
    pub good: Vec<bool>,
    pub params: WaveParams,
    pub tree: TreeParams,
    /// The 2XOR instance the witness was built for.
    pub instance: SignedMultigraph,
    /// The bipartite source of the instance.
    pub source: SignedMultigraph,
    pub n_generators: usize,
    dense: Option<DMatrix<f64>>,
}

/// Objective and feasibility summary of a witness.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WitnessReport {
    pub xor_value: f64,
    /// (3/2)·xor for c = 3 instances; absent otherwise.
    pub nae_value: Option<f64>,
    pub good_fraction: f64,
    pub min_gram_eigenvalue: Option<f64>,
    pub worst_triangle_slack: Option<f64>,
    pub max_offdiag_abs: Option<f64>,
}

impl GramWitness {
    /// Gram entry ⟨X_u, X_v⟩. The diagonal is exactly 1 by the variance
    /// normalization, so self-pairs short-circuit past the rounding of the
    /// explicit dot product.
    pub fn entry(&self, u: usize, v: usize) -> f64 {
        if u == v {
            return 1.0;
        }
        if let Some(d) = &self.dense {
            return d[(u, v)];
        }
        sparse_dot(&self.coefficients[u], &self.coefficients[v])
    }

    pub fn n_vars(&self) -> usize {
        self.coefficients.len()
    }

    pub fn good_fraction(&self) -> f64 {
        self.good.iter().filter(|&&g| g).count() as f64 / self.good.len().max(1) as f64
    }
}

fn sparse_dot(a: &[(u32, f64)], b: &[(u32, f64)]) -> f64 {
    let mut i = 0;
    let mut j = 0;
    let mut acc = 0.0;
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                acc += a[i].1 * b[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    acc
}

fn check_instance_matches_source(
    instance: &SignedMultigraph,
    source: &SignedMultigraph,
) -> Result<(usize, usize)> {
    let (c, d) = source.biregularity()?;
    let (m, n) = source.bipartition().unwrap();
    if instance.vertex_count() != n {
        return Err(Error::InvalidParameter(format!(
            "instance has {} vertices but source has {n} variables",
            instance.vertex_count()
        )));
    }
    let expect_edges = m * c * (c - 1) / 2;
    if instance.edge_count() != expect_edges {
        return Err(Error::InvalidParameter(format!(
            "instance has {} edges but the primal of the source has {expect_edges}",
            instance.edge_count()
        )));
    }
    Ok((c, d))
}

/// Flags each variable vertex good iff its radius-(L+1) primal ball is
/// cycle-free, checked as acyclicity of the (2L+2)-ball in the bipartite
/// source.
pub fn classify_good_vertices(
    instance: &SignedMultigraph,
    source: &SignedMultigraph,
    big_l: usize,
) -> Result<Vec<bool>> {
    check_instance_matches_source(instance, source)?;
    let (m, n) = source.bipartition().unwrap();
    let adj = source.adjacency_list();
    let radius = 2 * big_l + 2;
    let mut flags = vec![false; n];
    let mut dist = vec![u32::MAX; source.vertex_count()];
    let mut parent_slot = vec![u32::MAX; source.vertex_count()];
    let mut touched: Vec<u32> = Vec::new();
    let mut queue = std::collections::VecDeque::new();
    for v in 0..n {
        let start = (m + v) as u32;
        touched.clear();
        queue.clear();
        dist[start as usize] = 0;
        parent_slot[start as usize] = u32::MAX;
        touched.push(start);
        queue.push_back(start);
        let mut acyclic = true;
        'bfs: while let Some(u) = queue.pop_front() {
            let du = dist[u as usize];
            for &(w, slot) in &adj[u as usize] {
                if dist[w as usize] != u32::MAX {
                    // non-tree edge inside the ball unless it is the parent slot
                    if slot != parent_slot[u as usize] {
                        acyclic = false;
                        break 'bfs;
                    }
                } else if (du as usize) < radius {
                    dist[w as usize] = du + 1;
                    parent_slot[w as usize] = slot;
                    touched.push(w);
                    queue.push_back(w);
                }
            }
        }
        flags[v] = acyclic;
        for &t in &touched {
            dist[t as usize] = u32::MAX;
            parent_slot[t as usize] = u32::MAX;
        }
    }
    Ok(flags)
}

/// A sign-tracked primal ball for path-sign queries.
#[derive(Debug, Clone)]
pub struct PathBall {
    pub center: u32,
    pub radius: usize,
    /// distance from center, u32::MAX when outside the ball
    dist: Vec<u32>,
    sign: Vec<i8>,
    /// false when some induced edge contradicts the BFS-propagated signs,
    /// i.e. the ball carries a sign-inconsistent cycle
    pub consistent: bool,
}

impl PathBall {
    /// BFS ball on the instance with multiplicative sign propagation.
    pub fn grow(instance: &SignedMultigraph, center: u32, radius: usize) -> Self {
        let nv = instance.vertex_count();
        let adj = instance.adjacency_list();
        let mut dist = vec![u32::MAX; nv];
        let mut sign = vec![0i8; nv];
        dist[center as usize] = 0;
        sign[center as usize] = 1;
        let mut queue = std::collections::VecDeque::new();
        queue.push_back(center);
        let mut consistent = true;
        let edges = instance.edges();
        while let Some(u) = queue.pop_front() {
            let du = dist[u as usize];
            if du as usize == radius {
                continue;
            }
            for &(w, slot) in &adj[u as usize] {
                let es = edges[slot as usize].sign;
                if dist[w as usize] == u32::MAX {
                    dist[w as usize] = du + 1;
                    sign[w as usize] = sign[u as usize] * es;
                    queue.push_back(w);
                } else if sign[w as usize] as i16 != (sign[u as usize] * es) as i16 {
                    consistent = false;
                }
            }
        }
        // edges among in-ball vertices that BFS never traversed
        for e in edges {
            if dist[e.u as usize] != u32::MAX
                && dist[e.v as usize] != u32::MAX
                && sign[e.u as usize] as i16 * e.sign as i16 != sign[e.v as usize] as i16
            {
                consistent = false;
            }
        }
        Self {
            center,
            radius,
            dist,
            sign,
            consistent,
        }
    }

    pub fn contains(&self, v: u32) -> bool {
        self.dist[v as usize] != u32::MAX
    }

    pub fn distance(&self, v: u32) -> Option<usize> {
        (self.dist[v as usize] != u32::MAX).then_some(self.dist[v as usize] as usize)
    }
}

/// Product of edge signs along the unique u–w path inside a tree-like ball.
///
/// Errors when the two vertices are not connected within the ball or when the
/// ball's signs are cycle-inconsistent (so no unambiguous path sign exists).
pub fn path_sign(ball: &PathBall, u: u32, w: u32) -> Result<i8> {
    if !ball.consistent {
        return Err(Error::InvalidParameter(
            "ball contains a sign-inconsistent cycle".into(),
        ));
    }
    if !ball.contains(u) || !ball.contains(w) {
        return Err(Error::InvalidParameter(
            "vertices not connected within the ball".into(),
        ));
    }
    Ok(ball.sign[u as usize] * ball.sign[w as usize])
}

/// Builds the Gaussian-wave witness for a signed primal instance.
///
/// `rho` is the target edge correlation; in `triangle_safe` mode it is clamped
/// to magnitude 1/3 so that every vertex triple keeps its slack nonnegative.
/// The decay parameter is calibrated against the truncated correlation map at
/// the smallest radius that can reach `rho`, so good-edge entries equal
/// ξ·rho to machine precision.
pub fn build_witness(
    instance: &SignedMultigraph,
    source: &SignedMultigraph,
    rho: f64,
    tol: f64,
    triangle_safe: bool,
) -> Result<GramWitness> {
    let (c, d) = check_instance_matches_source(instance, source)?;
    let p = TreeParams::new(c, d)?;
    let rho_eff = if triangle_safe && rho.abs() > 1.0 / 3.0 {
        rho.signum() / 3.0
    } else {
        rho
    };
    if !(rho_eff > p.rho_star() && rho_eff < p.rho_plus()) {
        return Err(Error::InvalidParameter(format!(
            "rho = {rho_eff} outside the open interval ({}, {})",
            p.rho_star(),
            p.rho_plus()
        )));
    }
    // analytic parameters fix the tail-control radius; the build then uses the
    // smallest radius whose truncated map can represent rho exactly
    let analytic = wave_params(rho_eff, &p, tol)?;
    let mut chosen: Option<(usize, f64)> = None;
    if rho_eff == 0.0 {
        chosen = Some((0, 0.0));
    } else {
        for big_l in 1..=MAX_TRUNCATION_RADIUS {
            if let Some(r) = solve_truncated_rho(rho_eff, big_l, &p) {
                chosen = Some((big_l, r));
                break;
            }
        }
    }
    let (big_l, r) = chosen.ok_or_else(|| {
        Error::ResourceCap(format!(
            "rho = {rho_eff} unreachable by truncated waves of radius ≤ {MAX_TRUNCATION_RADIUS}"
        ))
    })?;
    let gamma = 1.0 / truncated_variance_sum(r, big_l, &p).sqrt();
    let params = WaveParams {
        rho: rho_eff,
        r,
        gamma,
        l: big_l,
        tol: analytic.tol,
    };

    let good = classify_good_vertices(instance, source, big_l)?;
    let (m, n) = source.bipartition().unwrap();
    let src_adj = source.adjacency_list();
    let src_edges = source.edges();

    let mut coefficients: Vec<Vec<(u32, f64)>> = Vec::with_capacity(n);
    let mut next_private = n as u32;
    let mut dist = vec![u32::MAX; source.vertex_count()];
    let mut sign = vec![0i8; source.vertex_count()];
    let mut touched: Vec<u32> = Vec::new();
    let mut queue = std::collections::VecDeque::new();

    for v in 0..n {
        if !good[v] {
            coefficients.push(vec![(next_private, 1.0)]);
            next_private += 1;
            continue;
        }
        if big_l == 0 {
            coefficients.push(vec![(v as u32, 1.0)]);
            continue;
        }
        // bipartite BFS to radius 2L with sign propagation; generators are the
        // variables at even depth
        let start = (m + v) as u32;
        touched.clear();
        queue.clear();
        dist[start as usize] = 0;
        sign[start as usize] = 1;
        touched.push(start);
        queue.push_back(start);
        let mut row: Vec<(u32, f64)> = vec![(v as u32, gamma)];
        while let Some(u) = queue.pop_front() {
            let du = dist[u as usize];
            if du as usize == 2 * big_l {
                continue;
            }
            for &(w, slot) in &src_adj[u as usize] {
                if dist[w as usize] != u32::MAX {
                    continue;
                }
                dist[w as usize] = du + 1;
                sign[w as usize] = sign[u as usize] * src_edges[slot as usize].sign;
                touched.push(w);
                queue.push_back(w);
                if w as usize >= m {
                    // a variable vertex at even bipartite depth
                    let depth = (du + 1) as usize;
                    debug_assert_eq!(depth % 2, 0);
                    let ell = depth / 2;
                    row.push((
                        w - m as u32,
                        gamma * sign[w as usize] as f64 * r.powi(ell as i32),
                    ));
                }
            }
        }
        for &t in &touched {
            dist[t as usize] = u32::MAX;
            sign[t as usize] = 0;
        }
        row.sort_unstable_by_key(|&(g, _)| g);
        coefficients.push(row);
    }

    let n_generators = next_private as usize;
    let dense = if n <= GRAM_DENSE_CAP {
        let mut g = DMatrix::zeros(n, n);
        for u in 0..n {
            g[(u, u)] = 1.0;
            for v in u + 1..n {
                let x = sparse_dot(&coefficients[u], &coefficients[v]);
                g[(u, v)] = x;
                g[(v, u)] = x;
            }
        }
        Some(g)
    } else {
        None
    };

    let mut witness = GramWitness {
        coefficients,
        good,
        params,
        tree: p,
        instance: instance.clone(),
        source: source.clone(),
        n_generators,
        dense,
    };
    // force exactly-unit diagonal (the sparse rows are unit by calibration up
    // to rounding; pin the dense copy too)
    if let Some(dm) = &mut witness.dense {
        for i in 0..n {
            dm[(i, i)] = 1.0;
        }
    }
    Ok(witness)
}

/// SDP objective of the witness on its 2XOR instance.
pub fn witness_objective(w: &GramWitness) -> WitnessReport {
    let mut acc = 0.0;
    for e in w.instance.edges() {
        let g = w.entry(e.u as usize, e.v as usize);
        acc += 0.5 - 0.5 * e.sign as f64 * g;
    }
    let m = w.instance.edge_count().max(1);
    let xor_value = acc / m as f64;
    let (c, _) = w.source.biregularity().expect("validated at build");
    WitnessReport {
        xor_value,
        nae_value: (c == 3).then_some(1.5 * xor_value),
        good_fraction: w.good_fraction(),
        min_gram_eigenvalue: None,
        worst_triangle_slack: None,
        max_offdiag_abs: None,
    }
}

/// Options for [`validate_witness`].
#[derive(Debug, Clone, Copy)]
pub struct ValidateOptions {
    pub random_triples: usize,
    pub seed: u64,
    /// Dimension up to which the full dense Gram is eigensolved; larger
    /// witnesses are checked on sampled principal blocks.
    pub full_eig_cap: usize,
    pub block_size: usize,
    pub blocks: usize,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        Self {
            random_triples: 100_000,
            seed: 0x5eed,
            full_eig_cap: 600,
            block_size: 256,
            blocks: 6,
        }
    }
}

/// Feasibility audit: PSD spot-check, triangle slacks over every constraint
/// clique triple plus random triples, and the off-diagonal envelope.
pub fn validate_witness(w: &GramWitness, opts: ValidateOptions) -> Result<WitnessReport> {
    let n = w.n_vars();
    let mut report = witness_objective(w);

    // PSD check: exact by factorization, so this guards assembly bugs only
    let min_eig = if n <= opts.full_eig_cap {
        let mut g = DMatrix::zeros(n, n);
        for u in 0..n {
            for v in 0..n {
                g[(u, v)] = w.entry(u, v);
            }
        }
        let (vals, _) = linalg::dense_symmetric_eigenvalues(&g)?;
        vals[0]
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(w.params.rho.to_bits() ^ opts.seed);
        let mut min_eig = f64::INFINITY;
        for _ in 0..opts.blocks {
            let mut idx: Vec<usize> = (0..n).collect();
            idx.shuffle(&mut rng);
            idx.truncate(opts.block_size);
            let k = idx.len();
            let mut g = DMatrix::zeros(k, k);
            for a in 0..k {
                for b in 0..k {
                    g[(a, b)] = w.entry(idx[a], idx[b]);
                }
            }
            let (vals, _) = linalg::dense_symmetric_eigenvalues(&g)?;
            min_eig = min_eig.min(vals[0]);
        }
        min_eig
    };

    // triangle slacks: all constraint-clique triples, then random triples
    let (m, _) = w.source.bipartition().unwrap();
    let (c, _) = w.source.biregularity()?;
    let mut slack = f64::INFINITY;
    let mut max_off = 0.0f64;
    let mut incident: Vec<Vec<u32>> = vec![Vec::new(); m];
    for e in w.source.edges() {
        let (a, i) = if (e.u as usize) < m {
            (e.u, e.v)
        } else {
            (e.v, e.u)
        };
        incident[a as usize].push(i - m as u32);
    }
    let mut check_triple = |x: f64, y: f64, z: f64| {
        let s = (x + y + z + 1.0)
            .min(x - y - z + 1.0)
            .min(-x + y - z + 1.0)
            .min(-x - y + z + 1.0);
        if s < slack {
            slack = s;
        }
    };
    if c >= 3 {
        for vars in &incident {
            for i in 0..vars.len() {
                for j in i + 1..vars.len() {
                    for k in j + 1..vars.len() {
                        let (a, b, cc) = (vars[i] as usize, vars[j] as usize, vars[k] as usize);
                        let xy = w.entry(a, b);
                        let yz = w.entry(b, cc);
                        let zx = w.entry(cc, a);
                        max_off = max_off.max(xy.abs()).max(yz.abs()).max(zx.abs());
                        check_triple(xy, yz, zx);
                    }
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x7170);
    if n >= 3 {
        for _ in 0..opts.random_triples {
            let a = rng.random_range(0..n);
            let mut b = rng.random_range(0..n - 1);
            if b >= a {
                b += 1;
            }
            let mut cc = rng.random_range(0..n - 2);
            if cc >= a.min(b) {
                cc += 1;
            }
            if cc >= a.max(b) {
                cc += 1;
            }
            let xy = w.entry(a, b);
            let yz = w.entry(b, cc);
            let zx = w.entry(cc, a);
            max_off = max_off.max(xy.abs()).max(yz.abs()).max(zx.abs());
            check_triple(xy, yz, zx);
        }
    }
    for e in w.instance.edges() {
        max_off = max_off.max(w.entry(e.u as usize, e.v as usize).abs());
    }

    report.min_gram_eigenvalue = Some(min_eig);
    report.worst_triangle_slack = Some(if slack.is_finite() { slack } else { 1.0 });
    report.max_offdiag_abs = Some(max_off);
    Ok(report)
}

/// Lovász-theta consequence of an unsigned witness: 1 - 1/ϱ, after verifying
/// the witness actually attains edge correlation ϱ on every edge.
pub fn theta_bound(w: &GramWitness) -> Result<f64> {
    if w.instance.edges().iter().any(|e| e.sign != 1) {
        return Err(Error::InvalidParameter(
            "theta bound needs an unsigned instance".into(),
        ));
    }
    let rho = w.params.rho;
    if rho >= 0.0 {
        return Err(Error::InvalidParameter("theta bound needs rho < 0".into()));
    }
    for e in w.instance.edges() {
        let g = w.entry(e.u as usize, e.v as usize);
        if (g - rho).abs() > 1e-9 {
            return Err(Error::Other(format!(
                "edge ({}, {}) has Gram entry {g}, expected {rho}",
                e.u, e.v
            )));
        }
    }
    Ok(1.0 - 1.0 / rho)
}
