//! The infinite (c,d)-biregular tree, its distance-regular primal graph, and
//! the Gaussian-wave correlation machinery.
//!
//! Distances here are primal-graph distances: one primal step is two steps in
//! the bipartite tree. All neighborhood radii elsewhere in the crate follow
//! this convention.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Edge, SignedMultigraph};

/// Parameters of T_{d,c}; every derived constant is recomputed on call.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeParams {
    pub c: usize,
    pub d: usize,
}

impl TreeParams {
    pub fn new(c: usize, d: usize) -> Result<Self> {
        if c < 2 || d < 2 {
            return Err(Error::InvalidParameter(format!(
                "need c, d ≥ 2, got ({c}, {d})"
            )));
        }
        Ok(Self { c, d })
    }

    pub fn s_c(&self) -> f64 {
        ((self.c - 1) as f64).sqrt()
    }

    pub fn s_d(&self) -> f64 {
        ((self.d - 1) as f64).sqrt()
    }

    pub fn rho1(&self) -> f64 {
        self.s_c() * self.s_d()
    }

    pub fn lambda_bar(&self) -> f64 {
        self.s_d() + self.s_c()
    }

    pub fn lambda_under(&self) -> f64 {
        (self.s_d() - self.s_c()).abs()
    }

    /// Degree of the primal graph G_{d,c}: κ = (c-1)d.
    pub fn kappa(&self) -> usize {
        (self.c - 1) * self.d
    }

    /// Most negative edge correlation achievable by the infinite wave.
    pub fn rho_star(&self) -> f64 {
        1.0 - (1.0 + self.rho1()).powi(2) / self.kappa() as f64
    }

    /// Upper end of the achievable correlation interval.
    pub fn rho_plus(&self) -> f64 {
        1.0 - (1.0 - self.rho1()).powi(2) / self.kappa() as f64
    }
}

/// Intersection number p^h_{j,k} of the distance-regular graph G_{d,c}:
/// the number of vertices at distance j from u and k from v, where
/// dist(u,v) = h. Exact integer arithmetic; errors on u128 overflow.
pub fn intersection_number(h: usize, j: usize, k: usize, p: &TreeParams) -> Result<u128> {
    let sc2 = (p.c - 1) as u128;
    let rho2 = ((p.c - 1) * (p.d - 1)) as u128;
    let pow = |b: u128, e: usize| -> Result<u128> {
        let mut acc: u128 = 1;
        for _ in 0..e {
            acc = acc
                .checked_mul(b)
                .ok_or_else(|| Error::ResourceCap("intersection number exceeds u128".into()))?;
        }
        Ok(acc)
    };
    if h == 0 {
        if j != k {
            return Ok(0);
        }
        if j == 0 {
            return Ok(1);
        }
        let kappa = rho2 + sc2;
        return kappa
            .checked_mul(pow(rho2, j - 1)?)
            .ok_or_else(|| Error::ResourceCap("intersection number exceeds u128".into()));
    }
    let t = j.abs_diff(k);
    if t > h {
        return Ok(0);
    }
    let l = j.min(k);
    if (h - t).is_multiple_of(2) {
        let half = (h - t) / 2;
        if l < half {
            Ok(0)
        } else if l == half {
            Ok(1)
        } else if t == h {
            pow(rho2, l)
        } else {
            let f = rho2 - sc2;
            Ok(f * pow(rho2, l - (h - t + 2) / 2)?)
        }
    } else {
        let half = (h - t).div_ceil(2);
        if l < half {
            Ok(0)
        } else {
            let f = sc2 - 1;
            Ok(f * pow(rho2, l - half)?)
        }
    }
}

/// f64 evaluation of p^h_{j,k} for large-index series work.
pub fn intersection_number_f64(h: usize, j: usize, k: usize, p: &TreeParams) -> f64 {
    let sc2 = (p.c - 1) as f64;
    let rho2 = ((p.c - 1) * (p.d - 1)) as f64;
    if h == 0 {
        if j != k {
            return 0.0;
        }
        if j == 0 {
            return 1.0;
        }
        return (rho2 + sc2) * rho2.powi(j as i32 - 1);
    }
    let t = j.abs_diff(k);
    if t > h {
        return 0.0;
    }
    let l = j.min(k);
    if (h - t).is_multiple_of(2) {
        let half = (h - t) / 2;
        if l < half {
            0.0
        } else if l == half {
            1.0
        } else if t == h {
            rho2.powi(l as i32)
        } else {
            (rho2 - sc2) * rho2.powi(l as i32 - ((h - t + 2) / 2) as i32)
        }
    } else {
        let half = (h - t).div_ceil(2);
        if l < half {
            0.0
        } else {
            (sc2 - 1.0) * rho2.powi((l - half) as i32)
        }
    }
}

/// Explicit finite ball of G_{d,c} around a center vertex, with exact
/// distances from the center. Brute-force oracle for the closed-form counts.
#[derive(Debug, Clone)]
pub struct TreeBall {
    pub graph: SignedMultigraph,
    pub center: u32,
    pub dist_from_center: Vec<u32>,
    /// The bipartite tree the ball was expanded from.
    pub source: SignedMultigraph,
    pub radius: usize,
}

/// Builds the radius-`radius` primal ball by alternating constraint/variable
/// expansion of T_{d,c} followed by clique replacement.
pub fn ball_oracle(p: &TreeParams, radius: usize) -> Result<TreeBall> {
    // variable count ≈ κ·ρ₁^{2(radius-1)}: enforce the resource cap up front
    let mut estimate: f64 = 1.0;
    let rho2 = ((p.c - 1) * (p.d - 1)) as f64;
    for l in 1..=radius {
        estimate += p.kappa() as f64 * rho2.powi(l as i32 - 1);
    }
    if estimate > 1e6 {
        return Err(Error::ResourceCap(format!(
            "ball with ~{estimate:.2e} vertices exceeds the 1e6 cap"
        )));
    }

    // variables carry primal ids; constraints are expansion nodes only
    let mut dist: Vec<u32> = vec![0]; // center = variable 0
    let mut constraints: Vec<Vec<u32>> = Vec::new(); // member variable ids
                                                     // frontier of (variable id, is_root) to expand constraint-side
    let mut frontier: Vec<u32> = vec![0];
    for level in 1..=radius {
        let mut next = Vec::new();
        for &v in &frontier {
            let n_cons = if dist[v as usize] == 0 { p.d } else { p.d - 1 };
            for _ in 0..n_cons {
                let mut members = vec![v];
                for _ in 0..p.c - 1 {
                    let id = dist.len() as u32;
                    dist.push(level as u32);
                    members.push(id);
                    next.push(id);
                }
                constraints.push(members);
            }
        }
        frontier = next;
    }
    let nv = dist.len();
    let mut edges = Vec::new();
    for members in &constraints {
        for i in 0..members.len() {
            for j in i + 1..members.len() {
                edges.push(Edge {
                    u: members[i],
                    v: members[j],
                    sign: 1,
                });
            }
        }
    }
    let graph = SignedMultigraph::new(nv, edges)?;

    // bipartite source: constraints first (left part), then variables
    let mc = constraints.len();
    let mut src_edges = Vec::new();
    for (a, members) in constraints.iter().enumerate() {
        for &v in members {
            src_edges.push(Edge {
                u: a as u32,
                v: mc as u32 + v,
                sign: 1,
            });
        }
    }
    let source = SignedMultigraph::with_bipartition(mc + nv, src_edges, Some((mc, nv)))?;

    Ok(TreeBall {
        graph,
        center: 0,
        dist_from_center: dist,
        source,
        radius,
    })
}

/// Wave parameters: target correlation, geometric decay, normalization, and
/// the truncation radius in primal distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveParams {
    pub rho: f64,
    pub r: f64,
    pub gamma: f64,
    pub l: usize,
    pub tol: f64,
}

/// The infinite-wave edge correlation as a function of the decay parameter.
pub fn forward_map(r: f64, p: &TreeParams) -> f64 {
    let sc2 = (p.c - 1) as f64;
    1.0 - (1.0 - r) * (1.0 - r) / (1.0 + sc2 * r * r)
}

/// Inverts [`forward_map`] on (-1/ρ₁, 1/ρ₁) by bisection; the map is
/// increasing there.
pub fn rho_to_r(rho: f64, p: &TreeParams) -> Result<f64> {
    if !(rho > p.rho_star() && rho < p.rho_plus()) {
        return Err(Error::InvalidParameter(format!(
            "rho = {rho} outside the open interval ({}, {})",
            p.rho_star(),
            p.rho_plus()
        )));
    }
    if rho == 0.0 {
        return Ok(0.0);
    }
    let bound = 1.0 / p.rho1();
    let (mut lo, mut hi) = (-bound, bound);
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if forward_map(mid, p) < rho {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let r = 0.5 * (lo + hi);
    debug_assert!((forward_map(r, p) - rho).abs() <= 1e-11);
    Ok(r)
}

/// Closed-form correlation of the infinite wave at primal distance h:
/// r^h · (1 + h(1-r)(1+s_c²r) / (1+(s_c r)²)).
pub fn wave_correlation(h: usize, r: f64, p: &TreeParams) -> f64 {
    let sc2 = (p.c - 1) as f64;
    let scr2 = 1.0 + sc2 * r * r;
    r.powi(h as i32) * (1.0 + h as f64 * (1.0 - r) * (1.0 + sc2 * r) / scr2)
}

/// Truncated double series Σ_{j,k ≤ L} p^h_{j,k} r^{j+k}, times the analytic
/// normalization γ² = (1-(ρ₁r)²)/(1+(s_c r)²). Independent oracle for
/// [`wave_correlation`].
pub fn series_correlation(h: usize, r: f64, p: &TreeParams, big_l: usize) -> f64 {
    let sc2 = (p.c - 1) as f64;
    let rho1 = p.rho1();
    let gamma2 = (1.0 - (rho1 * r) * (rho1 * r)) / (1.0 + sc2 * r * r);
    let mut sum = 0.0;
    for j in 0..=big_l {
        for k in 0..=big_l {
            let pv = intersection_number_f64(h, j, k, p);
            if pv != 0.0 {
                sum += pv * r.powi((j + k) as i32);
            }
        }
    }
    gamma2 * sum
}

/// Σ_{ℓ ≤ L} p⁰_{ℓ,ℓ} r^{2ℓ}: the un-normalized truncated variance.
pub fn truncated_variance_sum(r: f64, big_l: usize, p: &TreeParams) -> f64 {
    (0..=big_l)
        .map(|l| intersection_number_f64(0, l, l, p) * r.powi(2 * l as i32))
        .sum()
}

/// Σ_{j,k ≤ L} p^h_{j,k} r^{j+k}: un-normalized truncated correlation sum.
pub fn truncated_corr_sum(h: usize, r: f64, big_l: usize, p: &TreeParams) -> f64 {
    let mut sum = 0.0;
    for j in 0..=big_l {
        for k in 0..=big_l {
            let pv = intersection_number_f64(h, j, k, p);
            if pv != 0.0 {
                sum += pv * r.powi((j + k) as i32);
            }
        }
    }
    sum
}

/// Edge correlation of the radius-L truncated, exactly-normalized wave.
pub fn truncated_rho(r: f64, big_l: usize, p: &TreeParams) -> f64 {
    truncated_corr_sum(1, r, big_l, p) / truncated_variance_sum(r, big_l, p)
}

/// Solves `truncated_rho(r, L) = rho` for r on the branch through r = 0,
/// searching |r| < 1/ρ₁. Returns None when rho is out of reach at this L.
pub fn solve_truncated_rho(rho: f64, big_l: usize, p: &TreeParams) -> Option<f64> {
    if rho == 0.0 {
        return Some(0.0);
    }
    let bound = 1.0 / p.rho1() * (1.0 - 1e-12);
    // locate the extremum of truncated_rho on the relevant side by grid search
    let side = rho.signum();
    let grid = 500;
    let mut best_i = 0usize;
    let mut best_v: f64 = 0.0;
    for i in 1..=grid {
        let r = side * bound * i as f64 / grid as f64;
        let v = truncated_rho(r, big_l, p);
        if side * v > side * best_v {
            best_v = v;
            best_i = i;
        }
    }
    if best_i == 0 {
        return None;
    }
    // golden-section refinement of the extremum
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = side * bound * (best_i.saturating_sub(1)) as f64 / grid as f64;
    let mut b = side * bound * (best_i + 1).min(grid) as f64 / grid as f64;
    for _ in 0..80 {
        let x1 = b - phi * (b - a);
        let x2 = a + phi * (b - a);
        if side * truncated_rho(x1, big_l, p) > side * truncated_rho(x2, big_l, p) {
            b = x2;
        } else {
            a = x1;
        }
    }
    let best_r = 0.5 * (a + b);
    best_v = truncated_rho(best_r, big_l, p);
    if side * best_v < side * rho {
        return None; // unreachable at this truncation radius
    }
    // bisect on [0, best_r] (monotone toward the extremum on this branch)
    let (mut lo, mut hi) = (0.0f64, best_r);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let v = truncated_rho(mid, big_l, p);
        if side * v < side * rho {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let r = 0.5 * (lo + hi);
    if (truncated_rho(r, big_l, p) - rho).abs() < 1e-9 {
        Some(r)
    } else {
        None
    }
}

/// Derives (r, L, γ) for a target correlation: r by the analytic inversion,
/// L as the smallest truncation radius with geometric tail factor ≤ tol, and
/// γ normalizing the truncated variance to exactly 1.
pub fn wave_params(rho: f64, p: &TreeParams, tol: f64) -> Result<WaveParams> {
    if tol <= 0.0 {
        return Err(Error::InvalidParameter("tol must be positive".into()));
    }
    let r = rho_to_r(rho, p)?;
    let l = if r == 0.0 {
        0
    } else {
        let q = p.rho1() * r.abs();
        let scale = p.kappa() as f64 / (1.0 - (p.rho1() * r) * (p.rho1() * r));
        let mut l = 0usize;
        while q.powi(l as i32) * scale > tol {
            l += 1;
            if l > 100_000 {
                return Err(Error::ResourceCap(
                    "truncation radius exceeds 1e5; tol unreachable".into(),
                ));
            }
        }
        l
    };
    let var = truncated_variance_sum(r, l, p);
    Ok(WaveParams {
        rho,
        r,
        gamma: 1.0 / var.sqrt(),
        l,
        tol,
    })
}
