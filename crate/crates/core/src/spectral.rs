//! Eigenvalue engines and the Ihara–Bass bridge.
//!
//! Non-backtracking spectra of biregular graphs are computed through the
//! deformed-Laplacian determinant identity and the symmetric spectrum PS(A),
//! reserving the dense nonsymmetric eigensolver for small cross-checks.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Csr, SignedMultigraph, DENSE_CAP};
use crate::linalg::{self, GramOp, SymOp};
use crate::tree::TreeParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumMethod {
    Dense,
    Iterative,
    IharaBass,
}

/// Real eigenvalue multiset with provenance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumReport {
    /// Sorted ascending. In iterative mode, only the declared extremes.
    pub eigenvalues: Vec<f64>,
    pub method: SpectrumMethod,
    /// Residual (relative) achieved by the solver.
    pub residual: f64,
    /// Dimension of the underlying matrix.
    pub dimension: usize,
}

/// Complex eigenvalue multiset (non-backtracking spectra).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComplexSpectrumReport {
    pub eigenvalues: Vec<(f64, f64)>,
    pub method: SpectrumMethod,
    pub residual: f64,
    pub dimension: usize,
    pub spectral_radius: f64,
}

/// Requested mode for [`symmetric_spectrum`].
#[derive(Debug, Clone, Copy)]
pub enum SpectrumMode {
    /// All eigenvalues by dense decomposition (dimension-capped).
    Full,
    /// The `largest` top and `smallest` bottom eigenvalues by Lanczos.
    Extreme { largest: usize, smallest: usize },
}

/// A symmetric matrix in either representation.
pub enum SymMatrix<'a> {
    Dense(&'a DMatrix<f64>),
    Sparse(&'a Csr),
}

/// Symmetric eigenvalues in the requested mode.
///
/// Full mode insists on `dim <= DENSE_CAP`; extreme mode runs restarted
/// Lanczos to relative tolerance 1e-8 and reports only the converged ends.
pub fn symmetric_spectrum(m: &SymMatrix, mode: SpectrumMode) -> Result<SpectrumReport> {
    match mode {
        SpectrumMode::Full => {
            let dense_owned;
            let dense: &DMatrix<f64> = match m {
                SymMatrix::Dense(d) => d,
                SymMatrix::Sparse(s) => {
                    if s.rows > DENSE_CAP {
                        return Err(Error::ResourceCap(format!(
                            "full spectrum of dimension {} exceeds dense cap {DENSE_CAP}",
                            s.rows
                        )));
                    }
                    dense_owned = csr_to_dense(s);
                    &dense_owned
                }
            };
            if dense.nrows() > DENSE_CAP {
                return Err(Error::ResourceCap(format!(
                    "full spectrum of dimension {} exceeds dense cap {DENSE_CAP}",
                    dense.nrows()
                )));
            }
            let (vals, residual) = linalg::dense_symmetric_eigenvalues(dense)?;
            Ok(SpectrumReport {
                dimension: vals.len(),
                eigenvalues: vals,
                method: SpectrumMethod::Dense,
                residual,
            })
        }
        SpectrumMode::Extreme { largest, smallest } => {
            let op: &dyn SymOp = match m {
                SymMatrix::Dense(d) => *d,
                SymMatrix::Sparse(s) => *s,
            };
            let mut vals = Vec::new();
            let mut residual = 0.0f64;
            if largest > 0 {
                for p in linalg::lanczos_largest(op, largest, 1e-8, 0x1a)? {
                    vals.push(p.value);
                    residual = residual.max(p.residual);
                }
            }
            if smallest > 0 {
                let hi = vals.first().copied().unwrap_or(0.0);
                let sigma = hi.abs() * 2.0 + 1.0;
                let shift = linalg::ShiftNeg {
                    sigma,
                    inner: &OpRef(op),
                };
                for p in linalg::lanczos_largest(&shift, smallest, 1e-8, 0x2b)? {
                    vals.push(sigma - p.value);
                    residual = residual.max(p.residual);
                }
            }
            vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
            Ok(SpectrumReport {
                dimension: op.dim(),
                eigenvalues: vals,
                method: SpectrumMethod::Iterative,
                residual,
            })
        }
    }
}

struct OpRef<'a>(&'a dyn SymOp);
impl SymOp for OpRef<'_> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.0.apply(x, y)
    }
}

fn csr_to_dense(s: &Csr) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(s.rows, s.cols);
    for r in 0..s.rows {
        for k in s.row_ptr[r]..s.row_ptr[r + 1] {
            d[(r, s.col_idx[k] as usize)] += s.values[k];
        }
    }
    d
}

/// PS(A): the n nonnegative nontrivial values of a bipartite adjacency
/// spectrum, after stripping the m-n forced zeros and folding ± pairs.
///
/// Computed as singular values of the biadjacency block: PS = sqrt(spec(MᵀM)).
pub fn positive_spectrum(x: &SignedMultigraph) -> Result<SpectrumReport> {
    let (m, n) = x
        .bipartition()
        .ok_or_else(|| Error::InvalidGraph("positive spectrum needs a bipartition".into()))?;
    if m < n {
        return Err(Error::InvalidParameter(format!(
            "parts inverted: left {m} < right {n}"
        )));
    }
    if n > DENSE_CAP {
        return Err(Error::ResourceCap(format!(
            "PS of dimension {n} exceeds dense cap {DENSE_CAP}; use positive_spectrum_extremes"
        )));
    }
    let bi = x.biadjacency_csr()?;
    let gram = GramOp::new(&bi);
    let mut dense = DMatrix::zeros(n, n);
    let mut e = vec![0.0; n];
    let mut col = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        gram.apply(&e, &mut col);
        e[j] = 0.0;
        for i in 0..n {
            dense[(i, j)] = col[i];
        }
    }
    let (vals, residual) = linalg::dense_symmetric_eigenvalues(&dense)?;
    let ps: Vec<f64> = vals.iter().map(|&v| v.max(0.0).sqrt()).collect();
    Ok(SpectrumReport {
        dimension: n,
        eigenvalues: ps,
        method: SpectrumMethod::Dense,
        residual,
    })
}

/// (min, max) of PS(A) by Lanczos on MᵀM; scales to large lifts.
pub fn positive_spectrum_extremes(x: &SignedMultigraph, seed: u64) -> Result<(f64, f64)> {
    let (m, n) = x
        .bipartition()
        .ok_or_else(|| Error::InvalidGraph("positive spectrum needs a bipartition".into()))?;
    if m < n {
        return Err(Error::InvalidParameter(format!(
            "parts inverted: left {m} < right {n}"
        )));
    }
    let bi = x.biadjacency_csr()?;
    let gram = GramOp::new(&bi);
    let (lo, hi) = linalg::extreme_eigenvalues(&gram, 1e-9, seed)?;
    Ok((lo.max(0.0).sqrt(), hi.max(0.0).sqrt()))
}

/// The four roots of p_λ(u) = u⁴ + (s_c²+s_d²-λ²)u² + ρ₁².
#[derive(Debug, Clone)]
pub struct QuarticRoots {
    pub lambda: f64,
    pub roots: [Complex64; 4],
}

impl QuarticRoots {
    pub fn max_magnitude(&self) -> f64 {
        self.roots.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Closed-form quartic roots via U = ((√α ± √β)/√2)² with complex square roots.
pub fn quartic_roots(lambda: f64, p: &TreeParams) -> QuarticRoots {
    let l2 = lambda * lambda;
    let alpha = Complex64::new((l2 - p.lambda_under() * p.lambda_under()) / 2.0, 0.0);
    let beta = Complex64::new((l2 - p.lambda_bar() * p.lambda_bar()) / 2.0, 0.0);
    let (sa, sb) = (alpha.sqrt(), beta.sqrt());
    let u1 = (sa + sb) * (sa + sb) * 0.5;
    let u2 = (sa - sb) * (sa - sb) * 0.5;
    let r1 = u1.sqrt();
    let r2 = u2.sqrt();
    QuarticRoots {
        lambda,
        roots: [r1, -r1, r2, -r2],
    }
}

/// Non-backtracking spectrum of a (c,d)-biregular signed graph by the
/// determinant identity: ±1 and ±i·s_c trivial families plus four quartic
/// roots per element of PS(A).
pub fn b_spectrum_via_ihara_bass(x: &SignedMultigraph) -> Result<ComplexSpectrumReport> {
    let (c, d) = x.biregularity()?;
    if c == 2 && d == 2 {
        return Err(Error::InvalidParameter(
            "degenerate c = d = 2 rejected: the spectrum formula needs more edges than vertices"
                .into(),
        ));
    }
    let (m, n) = x.bipartition().unwrap();
    let e = x.edge_count();
    debug_assert_eq!(e, c * m);
    debug_assert_eq!(e, d * n);
    let p = TreeParams::new(c, d)?;
    let ps = positive_spectrum(x)?;
    let mut eigs: Vec<Complex64> = Vec::with_capacity(2 * e);
    for _ in 0..e.saturating_sub(m + n) {
        eigs.push(Complex64::new(1.0, 0.0));
        eigs.push(Complex64::new(-1.0, 0.0));
    }
    for _ in 0..m - n {
        eigs.push(Complex64::new(0.0, p.s_c()));
        eigs.push(Complex64::new(0.0, -p.s_c()));
    }
    for &lam in &ps.eigenvalues {
        eigs.extend_from_slice(&quartic_roots(lam, &p).roots);
    }
    let radius = eigs.iter().map(|z| z.norm()).fold(0.0, f64::max);
    Ok(ComplexSpectrumReport {
        eigenvalues: eigs.iter().map(|z| (z.re, z.im)).collect(),
        method: SpectrumMethod::IharaBass,
        residual: ps.residual,
        dimension: 2 * e,
        spectral_radius: radius,
    })
}

/// Spectral radius of B for a biregular signed graph, from PS extremes only.
///
/// Inside ±[λ̲, λ̄] every quartic root has magnitude √ρ₁; outside, the maximal
/// root magnitude grows with the distance from the bulk, so the radius is
/// attained at an extreme of PS (or at the trivial ±1 / ±i·s_c families).
pub fn b_spectral_radius_from_ps(
    ps_min: f64,
    ps_max: f64,
    p: &TreeParams,
    has_parallel_free_slack: bool,
) -> f64 {
    let mut r = quartic_roots(ps_min, p)
        .max_magnitude()
        .max(quartic_roots(ps_max, p).max_magnitude());
    if has_parallel_free_slack {
        // trivial families present for any graph with e > m + n and m > n
        r = r.max(1.0).max(p.s_c());
    }
    r
}

/// Relative gap between det(I - uB) and det(L(u))·(1-u²)^{E-V}, both sides via
/// independent LU factorizations in (sign, log magnitude) form.
pub fn ihara_bass_residual(x: &SignedMultigraph, u: f64) -> Result<f64> {
    if u == 1.0 || u == -1.0 {
        return Err(Error::InvalidParameter("u = ±1 is excluded".into()));
    }
    if u.abs() > 2.0 {
        return Err(Error::InvalidParameter("|u| must be ≤ 2".into()));
    }
    let (b, idx) = x.non_backtracking_dense()?;
    let na = idx.arc_count();
    let mut lhs_m = DMatrix::identity(na, na);
    lhs_m -= &b * u;
    let (s_l, log_l) = linalg::lu_logdet(&lhs_m);

    let lu = x.deformed_laplacian_dense(u)?;
    let (mut s_r, mut log_r) = linalg::lu_logdet(&lu);
    let pow = x.edge_count() as i64 - x.vertex_count() as i64;
    let base = 1.0 - u * u;
    log_r += pow as f64 * base.abs().ln();
    if base < 0.0 && pow % 2 != 0 {
        s_r = -s_r;
    }

    // relative difference of s·e^log values without overflow
    let resid = if s_l == 0 && s_r == 0 {
        0.0
    } else {
        let m = log_l.max(log_r);
        let a = if log_l == f64::NEG_INFINITY {
            0.0
        } else {
            s_l as f64 * (log_l - m).exp()
        };
        let bb = if log_r == f64::NEG_INFINITY {
            0.0
        } else {
            s_r as f64 * (log_r - m).exp()
        };
        let denom_log = 0f64.max(log_r);
        (a - bb).abs() * (m - denom_log).exp()
    };
    Ok(resid)
}

/// Outcome of the bulk-containment test on PS(A).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BulkCheck {
    pub ok: bool,
    /// Eigenvalue with the largest violation (or the closest to the boundary).
    pub worst_value: f64,
    /// Positive distance outside [λ̲-ε, λ̄+ε]; ≤ 0 when inside.
    pub worst_violation: f64,
    pub lo: f64,
    pub hi: f64,
}

/// True iff every element of `ps` lies in [λ̲-eps, λ̄+eps].
pub fn bulk_check(ps: &[f64], p: &TreeParams, eps: f64) -> Result<BulkCheck> {
    if eps <= 0.0 {
        return Err(Error::InvalidParameter("eps must be positive".into()));
    }
    let lo = p.lambda_under() - eps;
    let hi = p.lambda_bar() + eps;
    let mut worst_value = f64::NAN;
    let mut worst_violation = f64::NEG_INFINITY;
    for &v in ps {
        let viol = (lo - v).max(v - hi);
        if viol > worst_violation {
            worst_violation = viol;
            worst_value = v;
        }
    }
    Ok(BulkCheck {
        ok: worst_violation <= 0.0,
        worst_value,
        worst_violation,
        lo,
        hi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lift::{derive_seed, random_lift, random_signing};

    fn k43_signed(seed: u64, n: usize) -> SignedMultigraph {
        let base = SignedMultigraph::kdc(4, 3);
        let (lifted, _) = random_lift(&base, n, seed).unwrap();
        random_signing(&lifted, seed ^ 0xabc)
    }

    #[test]
    fn identity_spectrum() {
        let m = DMatrix::identity(5, 5);
        let rep = symmetric_spectrum(&SymMatrix::Dense(&m), SpectrumMode::Full).unwrap();
        assert_eq!(rep.eigenvalues, vec![1.0; 5]);
    }

    #[test]
    fn path_p3_laplacian_spectrum() {
        let g = SignedMultigraph::from_edges(3, &[(0, 1, 1), (1, 2, 1)]).unwrap();
        let l = g.laplacian_dense().unwrap();
        let rep = symmetric_spectrum(&SymMatrix::Dense(&l), SpectrumMode::Full).unwrap();
        let expect = [0.0, 1.0, 3.0];
        for (a, b) in rep.eigenvalues.iter().zip(expect) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn k43_adjacency_spectrum() {
        let g = SignedMultigraph::kdc(4, 3);
        let a = g.adjacency_dense().unwrap();
        let rep = symmetric_spectrum(&SymMatrix::Dense(&a), SpectrumMode::Full).unwrap();
        let s = 12f64.sqrt();
        let expect = [-s, 0.0, 0.0, 0.0, 0.0, 0.0, s];
        for (a, b) in rep.eigenvalues.iter().zip(expect) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn ps_of_k43() {
        let g = SignedMultigraph::kdc(4, 3);
        let ps = positive_spectrum(&g).unwrap();
        assert_eq!(ps.eigenvalues.len(), 3);
        assert!(ps.eigenvalues[0].abs() < 1e-9);
        assert!(ps.eigenvalues[1].abs() < 1e-9);
        assert!((ps.eigenvalues[2] - 12f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn ps_bounded_by_sqrt_cd() {
        for seed in 0..5 {
            let x = k43_signed(derive_seed(1, seed), 12);
            let ps = positive_spectrum(&x).unwrap();
            let bound = 12f64.sqrt() + 1e-8;
            assert!(ps.eigenvalues.iter().all(|&v| v <= bound && v >= 0.0));
        }
    }

    #[test]
    fn ps_extremes_match_dense() {
        let x = k43_signed(99, 40);
        let ps = positive_spectrum(&x).unwrap();
        let (lo, hi) = positive_spectrum_extremes(&x, 5).unwrap();
        assert!((lo - ps.eigenvalues.first().unwrap()).abs() < 1e-6);
        assert!((hi - ps.eigenvalues.last().unwrap()).abs() < 1e-6);
    }

    #[test]
    fn bipartite_spectrum_symmetric_about_zero() {
        let x = k43_signed(123, 9);
        let a = x.adjacency_dense().unwrap();
        let rep = symmetric_spectrum(&SymMatrix::Dense(&a), SpectrumMode::Full).unwrap();
        let v = &rep.eigenvalues;
        for i in 0..v.len() {
            assert!((v[i] + v[v.len() - 1 - i]).abs() < 1e-8);
        }
    }

    #[test]
    fn quartic_endpoints() {
        let p = TreeParams::new(3, 4).unwrap();
        let q0 = quartic_roots(0.0, &p);
        let mut mags: Vec<f64> = q0.roots.iter().map(|z| z.norm()).collect();
        mags.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((mags[0] - 2f64.sqrt()).abs() < 1e-12);
        assert!((mags[1] - 2f64.sqrt()).abs() < 1e-12);
        assert!((mags[2] - 3f64.sqrt()).abs() < 1e-12);
        assert!((mags[3] - 3f64.sqrt()).abs() < 1e-12);
        assert!(q0.roots.iter().all(|z| z.re.abs() < 1e-12));

        let qcd = quartic_roots(12f64.sqrt(), &p);
        let mut mags: Vec<f64> = qcd.roots.iter().map(|z| z.norm()).collect();
        mags.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((mags[0] - 1.0).abs() < 1e-10);
        assert!((mags[1] - 1.0).abs() < 1e-10);
        assert!((mags[2] - 6f64.sqrt()).abs() < 1e-10);
        assert!((mags[3] - 6f64.sqrt()).abs() < 1e-10);
        assert!(qcd.roots.iter().all(|z| z.im.abs() < 1e-10));
    }

    #[test]
    fn quartic_boundary_equal_magnitudes() {
        let p = TreeParams::new(3, 4).unwrap();
        let q = quartic_roots(p.lambda_bar(), &p);
        for z in &q.roots {
            assert!((z.norm() - 6f64.powf(0.25)).abs() < 1e-10);
        }
    }

    #[test]
    fn quartic_root_product_invariant() {
        let p = TreeParams::new(3, 8).unwrap();
        for i in 0..50 {
            let lam = i as f64 * (24f64).sqrt() / 49.0;
            let q = quartic_roots(lam, &p);
            let prod: f64 = q.roots.iter().map(|z| z.norm()).product();
            assert!((prod - p.rho1() * p.rho1()).abs() < 1e-8 * p.rho1() * p.rho1());
        }
    }

    #[test]
    fn b_spectrum_k43_formula() {
        let g = SignedMultigraph::kdc(4, 3);
        let rep = b_spectrum_via_ihara_bass(&g).unwrap();
        assert_eq!(rep.dimension, 24);
        assert!((rep.spectral_radius - 6f64.sqrt()).abs() < 1e-9);
        let mut mags: Vec<f64> = rep
            .eigenvalues
            .iter()
            .map(|&(re, im)| Complex64::new(re, im).norm())
            .collect();
        mags.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut expect = vec![1.0f64; 12];
        expect.extend(vec![2f64.sqrt(); 6]);
        expect.extend(vec![3f64.sqrt(); 4]);
        expect.extend(vec![6f64.sqrt(); 2]);
        for (a, b) in mags.iter().zip(expect) {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
    }

    #[test]
    fn b_spectrum_matches_dense_eigensolve_on_signed_lift() {
        let x = k43_signed(4242, 8); // 96 edges -> 192 arcs
        let rep = b_spectrum_via_ihara_bass(&x).unwrap();
        let (b, _) = x.non_backtracking_dense().unwrap();
        let dense: Vec<Complex64> = linalg::dense_complex_eigenvalues(&b, 1).unwrap();
        let a: Vec<Complex64> = rep
            .eigenvalues
            .iter()
            .map(|&(re, im)| Complex64::new(re, im))
            .collect();
        assert_eq!(a.len(), dense.len());
        // multiset match by greedy nearest neighbor
        let mut used = vec![false; dense.len()];
        let mut max_diff = 0.0f64;
        for x in &a {
            let (i, d) = dense
                .iter()
                .enumerate()
                .filter(|(i, _)| !used[*i])
                .map(|(i, y)| (i, (x - y).norm()))
                .min_by(|p, q| p.1.partial_cmp(&q.1).unwrap())
                .unwrap();
            used[i] = true;
            max_diff = max_diff.max(d);
        }
        assert!(max_diff < 1e-6, "max diff {max_diff}");
    }

    #[test]
    fn ihara_bass_residual_zero_at_u0() {
        let g = SignedMultigraph::kdc(4, 3);
        assert!(ihara_bass_residual(&g, 0.0).unwrap() < 1e-15);
    }

    #[test]
    fn ihara_bass_residual_triangle() {
        let g = SignedMultigraph::from_edges(3, &[(0, 1, 1), (1, 2, 1), (2, 0, 1)]).unwrap();
        assert!(ihara_bass_residual(&g, 0.5).unwrap() < 1e-12);
    }

    #[test]
    fn ihara_bass_residual_random_lifts() {
        for t in 0..6 {
            let x = k43_signed(derive_seed(31, t), 15);
            let u = -0.9 + 1.8 * (t as f64 / 5.0);
            let u = if (u - 1.0).abs() < 0.05 || (u + 1.0).abs() < 0.05 {
                u / 2.0
            } else {
                u
            };
            let r = ihara_bass_residual(&x, u).unwrap();
            assert!(r < 1e-9, "u={u} residual={r}");
        }
    }

    #[test]
    fn ihara_bass_rejects_forbidden_u() {
        let g = SignedMultigraph::kdc(4, 3);
        assert!(ihara_bass_residual(&g, 1.0).is_err());
        assert!(ihara_bass_residual(&g, -1.0).is_err());
        assert!(ihara_bass_residual(&g, 2.5).is_err());
    }

    #[test]
    fn ps_rejects_inverted_parts() {
        // left part smaller than right: K_{2,3} with parts (2, 3)
        let g = SignedMultigraph::kdc(2, 3);
        assert!(positive_spectrum(&g).is_err());
        assert!(positive_spectrum_extremes(&g, 1).is_err());
    }

    #[test]
    fn b_spectrum_rejects_degenerate_2_2() {
        let g = SignedMultigraph::kdc(2, 2); // the 4-cycle: e = m + n
        assert!(b_spectrum_via_ihara_bass(&g).is_err());
    }

    #[test]
    fn bulk_check_cases() {
        let p = TreeParams::new(3, 4).unwrap();
        let ps = vec![p.lambda_under(), p.lambda_bar()];
        let chk = bulk_check(&ps, &p, 1e-12).unwrap();
        assert!(chk.ok);

        let ps_bad = vec![12f64.sqrt()];
        let chk = bulk_check(&ps_bad, &p, 0.1).unwrap();
        assert!(!chk.ok);
        assert!((chk.worst_value - 12f64.sqrt()).abs() < 1e-12);

        // interval endpoints for (3,4): [√3-√2-eps, √3+√2+eps]
        assert!((chk.lo - (3f64.sqrt() - 2f64.sqrt() - 0.1)).abs() < 1e-12);
        assert!((chk.hi - (3f64.sqrt() + 2f64.sqrt() + 0.1)).abs() < 1e-12);
    }

    #[test]
    fn prop33_spectral_map() {
        for t in 0..4 {
            let x = k43_signed(derive_seed(77, t), 20);
            let primal = x.primal_graph().unwrap();
            let lp = primal.laplacian_dense().unwrap();
            let (spec_l, _) = linalg::dense_symmetric_eigenvalues(&lp).unwrap();
            let ps = positive_spectrum(&x).unwrap();
            let mut mapped: Vec<f64> = ps.eigenvalues.iter().map(|&l| 12.0 - l * l).collect();
            mapped.sort_by(|a, b| a.partial_cmp(b).unwrap());
            assert_eq!(spec_l.len(), mapped.len());
            for (a, b) in spec_l.iter().zip(mapped) {
                assert!((a - b).abs() < 1e-7, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn deformed_laplacian_feeds_residual() {
        let x = k43_signed(5150, 10);
        assert!(ihara_bass_residual(&x, 0.3).unwrap() < 1e-9);
    }
}
