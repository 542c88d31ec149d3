//! Random n-lifts, random signings, and the lift-statistics toolkit.
//!
//! Permutations are drawn by Fisher–Yates from per-edge ChaCha streams whose
//! seeds mix (master seed, edge index), so generation is reproducible whether
//! trials run serially or in parallel.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Edge, SignedMultigraph};

/// Mixes a seed and a stream index into an independent sub-seed.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    // splitmix64 finalizer over the combined word
    let mut z = seed ^ stream.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Everything needed to rebuild one lifted, signed instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LiftSpec {
    pub base: SignedMultigraph,
    pub n: usize,
    /// One permutation of [n] per base edge.
    pub permutations: Vec<Vec<u32>>,
    /// One ±1 per lifted edge, indexed base_edge * n + fiber.
    pub signs: Vec<i8>,
    pub seed: u64,
}

impl LiftSpec {
    /// Materializes the lifted graph this spec describes.
    pub fn build(&self) -> Result<SignedMultigraph> {
        build_lift(&self.base, self.n, &self.permutations, &self.signs)
    }
}

/// Exact cycle counts by length, with the Poisson means predicted from the
/// base graph's non-backtracking walk counts when available.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CycleStats {
    /// counts[k - 2] = number of length-k cycles, k = 2..=gmax.
    pub counts: Vec<u64>,
    /// poisson_means[k - 2] = w_k / (2k) of the base, when a base was supplied.
    pub poisson_means: Vec<f64>,
    pub gmax: usize,
}

fn lifted_vertex(base_vertex: u32, fiber: u32, n: usize) -> u32 {
    base_vertex * n as u32 + fiber
}

fn build_lift(
    base: &SignedMultigraph,
    n: usize,
    permutations: &[Vec<u32>],
    signs: &[i8],
) -> Result<SignedMultigraph> {
    if n == 0 {
        return Err(Error::InvalidParameter("lift order n must be >= 1".into()));
    }
    if permutations.len() != base.edge_count() {
        return Err(Error::InvalidParameter(format!(
            "{} permutations for {} base edges",
            permutations.len(),
            base.edge_count()
        )));
    }
    if signs.len() != n * base.edge_count() {
        return Err(Error::InvalidParameter(format!(
            "{} signs for {} lifted edges",
            signs.len(),
            n * base.edge_count()
        )));
    }
    let mut seen = vec![false; n];
    for p in permutations {
        if p.len() != n {
            return Err(Error::InvalidParameter("permutation length != n".into()));
        }
        seen.fill(false);
        for &x in p {
            if x as usize >= n || seen[x as usize] {
                return Err(Error::InvalidParameter("not a permutation of [n]".into()));
            }
            seen[x as usize] = true;
        }
    }
    let mut edges = Vec::with_capacity(n * base.edge_count());
    for (e, be) in base.edges().iter().enumerate() {
        let perm = &permutations[e];
        for x in 0..n {
            edges.push(Edge {
                u: lifted_vertex(be.u, x as u32, n),
                v: lifted_vertex(be.v, perm[x], n),
                sign: signs[e * n + x],
            });
        }
    }
    let bipartition = base.bipartition().map(|(m, r)| (m * n, r * n));
    SignedMultigraph::with_bipartition(n * base.vertex_count(), edges, bipartition)
}

/// Uniformly random n-lift. The base's edge signs are carried through
/// unchanged; signing is a separate step.
pub fn random_lift(
    base: &SignedMultigraph,
    n: usize,
    seed: u64,
) -> Result<(SignedMultigraph, LiftSpec)> {
    if n == 0 {
        return Err(Error::InvalidParameter("lift order n must be >= 1".into()));
    }
    let mut permutations = Vec::with_capacity(base.edge_count());
    for e in 0..base.edge_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, e as u64));
        let mut perm: Vec<u32> = (0..n as u32).collect();
        perm.shuffle(&mut rng);
        permutations.push(perm);
    }
    let signs: Vec<i8> = base
        .edges()
        .iter()
        .flat_map(|be| std::iter::repeat_n(be.sign, n))
        .collect();
    let spec = LiftSpec {
        base: base.clone(),
        n,
        permutations,
        signs,
        seed,
    };
    let lifted = spec.build()?;
    Ok((lifted, spec))
}

/// Re-labels every edge with an independent uniform ±1.
pub fn random_signing(g: &SignedMultigraph, seed: u64) -> SignedMultigraph {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0x5167));
    let edges = g
        .edges()
        .iter()
        .map(|e| Edge {
            u: e.u,
            v: e.v,
            sign: if rng.random::<bool>() { 1 } else { -1 },
        })
        .collect();
    SignedMultigraph::with_bipartition(g.vertex_count(), edges, g.bipartition())
        .expect("topology unchanged")
}

/// w_k = tr(B^k) of the base graph for k = 2..=kmax, exact integers.
pub fn nb_walk_counts(base: &SignedMultigraph, kmax: usize) -> Result<Vec<i64>> {
    if kmax < 2 {
        return Err(Error::InvalidParameter("kmax must be >= 2".into()));
    }
    let (b, idx) = base.non_backtracking_int()?;
    let na = idx.arc_count();
    let mut power = b.clone();
    let trace = |m: &Vec<Vec<i64>>| -> i64 { (0..na).map(|i| m[i][i]).sum() };
    let mut out = Vec::with_capacity(kmax - 1);
    for _k in 2..=kmax {
        // power currently holds B^(k-1); multiply by B
        let mut next = vec![vec![0i64; na]; na];
        for i in 0..na {
            for l in 0..na {
                let v = power[i][l];
                if v == 0 {
                    continue;
                }
                for j in 0..na {
                    next[i][j] += v * b[l][j];
                }
            }
        }
        power = next;
        out.push(trace(&power));
    }
    Ok(out)
}

/// Exact simple-cycle counts by length up to `gmax`.
///
/// Cycles are enumerated by rooted DFS with the root forced to be the least
/// vertex on the cycle, then each cycle's two orientations are merged. A
/// length-2 cycle is a pair of parallel edges.
pub fn cycle_counts(
    g: &SignedMultigraph,
    gmax: usize,
    base: Option<&SignedMultigraph>,
) -> Result<CycleStats> {
    cycle_counts_capped(g, gmax, base, 8)
}

/// [`cycle_counts`] with an explicit enumeration-length cap.
pub fn cycle_counts_capped(
    g: &SignedMultigraph,
    gmax: usize,
    base: Option<&SignedMultigraph>,
    cap: usize,
) -> Result<CycleStats> {
    if gmax < 2 {
        return Err(Error::InvalidParameter("gmax must be >= 2".into()));
    }
    if gmax > cap {
        return Err(Error::ResourceCap(format!(
            "cycle enumeration capped at length {cap}, asked {gmax}"
        )));
    }
    let adj = g.adjacency_list();
    let nv = g.vertex_count();
    let mut counts = vec![0u64; gmax - 1];

    // DFS stack of (vertex, edge slot used to get here)
    let mut path: Vec<u32> = Vec::with_capacity(gmax);
    let mut on_path = vec![false; nv];

    // doubled count per length (each cycle seen once per orientation)
    let mut doubled = vec![0u64; gmax + 1];

    #[allow(clippy::too_many_arguments)]
    fn dfs(
        adj: &[Vec<(u32, u32)>],
        root: u32,
        v: u32,
        in_slot: u32,
        depth: usize,
        gmax: usize,
        path: &mut Vec<u32>,
        on_path: &mut [bool],
        doubled: &mut [u64],
    ) {
        for &(w, slot) in &adj[v as usize] {
            if w == root && slot != in_slot && depth >= 2 {
                doubled[depth] += 1;
            }
            if depth < gmax && w > root && !on_path[w as usize] {
                on_path[w as usize] = true;
                path.push(w);
                dfs(adj, root, w, slot, depth + 1, gmax, path, on_path, doubled);
                path.pop();
                on_path[w as usize] = false;
            }
        }
    }

    for root in 0..nv as u32 {
        on_path[root as usize] = true;
        for &(w, slot) in &adj[root as usize] {
            if w > root {
                on_path[w as usize] = true;
                path.push(w);
                dfs(
                    &adj,
                    root,
                    w,
                    slot,
                    2,
                    gmax,
                    &mut path,
                    &mut on_path,
                    &mut doubled,
                );
                path.pop();
                on_path[w as usize] = false;
            }
        }
        on_path[root as usize] = false;
    }
    for k in 2..=gmax {
        debug_assert_eq!(doubled[k] % 2, 0);
        counts[k - 2] = doubled[k] / 2;
    }

    let poisson_means = match base {
        Some(b) => nb_walk_counts(b, gmax)?
            .iter()
            .enumerate()
            .map(|(i, &w)| w as f64 / (2.0 * (i + 2) as f64))
            .collect(),
        None => Vec::new(),
    };
    Ok(CycleStats {
        counts,
        poisson_means,
        gmax,
    })
}

/// Vertices within distance `radius`, via BFS.
fn ball_vertices(adj: &[Vec<(u32, u32)>], center: u32, radius: usize) -> Vec<u32> {
    let mut dist = std::collections::HashMap::new();
    dist.insert(center, 0usize);
    let mut queue = std::collections::VecDeque::new();
    queue.push_back(center);
    let mut out = vec![center];
    while let Some(u) = queue.pop_front() {
        let du = dist[&u];
        if du == radius {
            continue;
        }
        for &(w, _) in &adj[u as usize] {
            if let std::collections::hash_map::Entry::Vacant(e) = dist.entry(w) {
                e.insert(du + 1);
                out.push(w);
                queue.push_back(w);
            }
        }
    }
    out
}

/// Independent-cycle count (E - V + 1) of the subgraph induced by a ball.
fn ball_cycle_rank(adj: &[Vec<(u32, u32)>], center: u32, radius: usize) -> isize {
    let verts = ball_vertices(adj, center, radius);
    let inside: std::collections::HashSet<u32> = verts.iter().copied().collect();
    let mut e2 = 0usize;
    for &u in &verts {
        for &(w, _) in &adj[u as usize] {
            if inside.contains(&w) {
                e2 += 1;
            }
        }
    }
    (e2 / 2) as isize - verts.len() as isize + 1
}

/// Vertices whose distance-`radius` neighborhood (induced subgraph) contains a cycle.
pub fn bad_vertices(g: &SignedMultigraph, radius: usize) -> Vec<u32> {
    let adj = g.adjacency_list();
    (0..g.vertex_count() as u32)
        .filter(|&v| ball_cycle_rank(&adj, v, radius) > 0)
        .collect()
}

/// True iff every radius-`ell` neighborhood contains at most one independent cycle.
pub fn is_tangle_free(g: &SignedMultigraph, ell: usize) -> bool {
    let adj = g.adjacency_list();
    (0..g.vertex_count() as u32).all(|v| ball_cycle_rank(&adj, v, ell) <= 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lift_n1_is_base() {
        let base = SignedMultigraph::kdc(4, 3);
        let (lifted, _) = random_lift(&base, 1, 42).unwrap();
        assert_eq!(lifted.vertex_count(), base.vertex_count());
        assert_eq!(lifted.edge_count(), base.edge_count());
        let mut a: Vec<(u32, u32)> = lifted
            .edges()
            .iter()
            .map(|e| (e.u.min(e.v), e.u.max(e.v)))
            .collect();
        let mut b: Vec<(u32, u32)> = base
            .edges()
            .iter()
            .map(|e| (e.u.min(e.v), e.u.max(e.v)))
            .collect();
        a.sort_unstable();
        b.sort_unstable();
        assert_eq!(a, b);
    }

    #[test]
    fn lift_k43_n50_shape() {
        let base = SignedMultigraph::kdc(4, 3);
        let (lifted, _) = random_lift(&base, 50, 7).unwrap();
        assert_eq!(lifted.vertex_count(), 350);
        assert_eq!(lifted.edge_count(), 600);
        assert_eq!(lifted.biregularity().unwrap(), (3, 4));
    }

    #[test]
    fn lift_deterministic() {
        let base = SignedMultigraph::kdc(4, 3);
        let (a, sa) = random_lift(&base, 20, 999).unwrap();
        let (b, sb) = random_lift(&base, 20, 999).unwrap();
        assert_eq!(a, b);
        assert_eq!(sa.permutations, sb.permutations);
        let (c, _) = random_lift(&base, 20, 1000).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn lift_rejects_n0() {
        let base = SignedMultigraph::kdc(4, 3);
        assert!(random_lift(&base, 0, 1).is_err());
    }

    #[test]
    fn lift_projection_recovers_base_edges() {
        let base = SignedMultigraph::kdc(5, 3);
        let n = 13;
        let (lifted, _) = random_lift(&base, n, 4).unwrap();
        let mut collapsed: Vec<(u32, u32)> = lifted
            .edges()
            .iter()
            .map(|e| {
                let bu = e.u / n as u32;
                let bv = e.v / n as u32;
                (bu.min(bv), bu.max(bv))
            })
            .collect();
        collapsed.sort_unstable();
        let mut expect: Vec<(u32, u32)> = Vec::new();
        for e in base.edges() {
            for _ in 0..n {
                expect.push((e.u.min(e.v), e.u.max(e.v)));
            }
        }
        expect.sort_unstable();
        assert_eq!(collapsed, expect);
    }

    #[test]
    fn base_spectrum_contained_in_lift_spectrum() {
        let base = SignedMultigraph::kdc(4, 3);
        let (lifted, _) = random_lift(&base, 6, 11).unwrap();
        let (sb, _) =
            crate::linalg::dense_symmetric_eigenvalues(&base.adjacency_dense().unwrap()).unwrap();
        let (sl, _) =
            crate::linalg::dense_symmetric_eigenvalues(&lifted.adjacency_dense().unwrap()).unwrap();
        // every base eigenvalue appears in the lift spectrum (multiset containment)
        let mut pool = sl.clone();
        for lam in sb {
            let (i, best) = pool
                .iter()
                .enumerate()
                .map(|(i, &x)| (i, (x - lam).abs()))
                .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                .unwrap();
            assert!(best < 1e-8, "missing eigenvalue {lam}");
            pool.remove(i);
        }
    }

    #[test]
    fn signing_deterministic_and_balanced() {
        let base = SignedMultigraph::kdc(4, 3);
        let (lifted, _) = random_lift(&base, 3000, 5).unwrap();
        let s1 = random_signing(&lifted, 77);
        let s2 = random_signing(&lifted, 77);
        assert_eq!(s1, s2);
        let mean: f64 =
            s1.edges().iter().map(|e| e.sign as f64).sum::<f64>() / s1.edge_count() as f64;
        assert!(mean.abs() < 0.02, "sign mean {mean}");
    }

    #[test]
    fn signed_primal_triangle_products_positive() {
        let base = SignedMultigraph::kdc(4, 3);
        let (lifted, _) = random_lift(&base, 10, 21).unwrap();
        let signed = random_signing(&lifted, 22);
        let primal = signed.primal_graph().unwrap();
        // each constraint contributes a triangle whose sign product is +1
        for (k, chunk) in primal.edges().chunks(3).enumerate() {
            let prod: i32 = chunk.iter().map(|e| e.sign as i32).product();
            assert_eq!(prod, 1, "constraint {k}");
        }
    }

    #[test]
    fn walk_counts_k43() {
        let base = SignedMultigraph::kdc(4, 3);
        let w = nb_walk_counts(&base, 4).unwrap();
        assert_eq!(w, vec![0, 0, 144]);
    }

    #[test]
    fn cycle_counts_small_graphs() {
        let tree =
            SignedMultigraph::from_edges(5, &[(0, 1, 1), (1, 2, 1), (1, 3, 1), (3, 4, 1)]).unwrap();
        let st = cycle_counts(&tree, 5, None).unwrap();
        assert!(st.counts.iter().all(|&c| c == 0));

        let tri = SignedMultigraph::from_edges(3, &[(0, 1, 1), (1, 2, 1), (2, 0, 1)]).unwrap();
        let st = cycle_counts(&tri, 3, None).unwrap();
        assert_eq!(st.counts, vec![0, 1]);

        // parallel pair: one 2-cycle
        let par = SignedMultigraph::from_edges(2, &[(0, 1, 1), (0, 1, -1)]).unwrap();
        let st = cycle_counts(&par, 3, None).unwrap();
        assert_eq!(st.counts, vec![1, 0]);

        // K4: 3 four-cycles and 4 triangles
        let k4 = SignedMultigraph::from_edges(
            4,
            &[
                (0, 1, 1),
                (0, 2, 1),
                (0, 3, 1),
                (1, 2, 1),
                (1, 3, 1),
                (2, 3, 1),
            ],
        )
        .unwrap();
        let st = cycle_counts(&k4, 4, None).unwrap();
        assert_eq!(st.counts, vec![0, 4, 3]);
    }

    #[test]
    fn cycle_counts_on_base_match_poisson_means_source() {
        // n = 1 lift of K_{4,3} is the base; direct enumeration gives Z_4 = 18
        let base = SignedMultigraph::kdc(4, 3);
        let st = cycle_counts(&base, 4, Some(&base)).unwrap();
        assert_eq!(st.counts, vec![0, 0, 18]);
        assert_eq!(st.poisson_means, vec![0.0, 0.0, 18.0]);
    }

    #[test]
    fn bad_vertices_cases() {
        let tree = SignedMultigraph::from_edges(4, &[(0, 1, 1), (1, 2, 1), (2, 3, 1)]).unwrap();
        assert!(bad_vertices(&tree, 3).is_empty());

        // triangle 0-1-2 with pendant path 2-3-4-5
        let g = SignedMultigraph::from_edges(
            6,
            &[
                (0, 1, 1),
                (1, 2, 1),
                (2, 0, 1),
                (2, 3, 1),
                (3, 4, 1),
                (4, 5, 1),
            ],
        )
        .unwrap();
        assert_eq!(bad_vertices(&g, 1), vec![0, 1, 2]);
        assert_eq!(bad_vertices(&g, 2), vec![0, 1, 2, 3]);
        assert!(bad_vertices(&g, 0).is_empty());
    }

    #[test]
    fn tangle_free_cases() {
        let tree = SignedMultigraph::from_edges(4, &[(0, 1, 1), (1, 2, 1), (2, 3, 1)]).unwrap();
        for ell in 0..4 {
            assert!(is_tangle_free(&tree, ell));
        }
        // two triangles sharing vertex 0
        let bowtie = SignedMultigraph::from_edges(
            5,
            &[
                (0, 1, 1),
                (1, 2, 1),
                (2, 0, 1),
                (0, 3, 1),
                (3, 4, 1),
                (4, 0, 1),
            ],
        )
        .unwrap();
        assert!(!is_tangle_free(&bowtie, 1));
        // one long cycle is tangle-free at all radii
        let c6 = SignedMultigraph::from_edges(
            6,
            &[
                (0, 1, 1),
                (1, 2, 1),
                (2, 3, 1),
                (3, 4, 1),
                (4, 5, 1),
                (5, 0, 1),
            ],
        )
        .unwrap();
        for ell in 0..8 {
            assert!(is_tangle_free(&c6, ell));
        }
    }

    #[test]
    fn lift_cycle_means_match_poisson_at_small_scale() {
        // Monte Carlo: lifts of K_{4,3}, mean Z_4 ≈ 18 within 5 standard errors
        let base = SignedMultigraph::kdc(4, 3);
        let trials = 60;
        let n = 300;
        let mut zs = Vec::with_capacity(trials);
        for t in 0..trials {
            let (lifted, _) = random_lift(&base, n, derive_seed(808, t as u64)).unwrap();
            let st = cycle_counts(&lifted, 4, Some(&base)).unwrap();
            zs.push(st.counts[2] as f64);
            assert_eq!(st.poisson_means[2], 18.0);
        }
        let mean = zs.iter().sum::<f64>() / trials as f64;
        let var = zs.iter().map(|z| (z - mean) * (z - mean)).sum::<f64>() / (trials as f64 - 1.0);
        let stderr = (var / trials as f64).sqrt();
        assert!(
            (mean - 18.0).abs() <= 5.0 * stderr,
            "mean {mean} stderr {stderr}"
        );
    }
}
