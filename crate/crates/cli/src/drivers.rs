//! Reproducible experiment drivers.
//!
//! Every driver maps trial indices to derived seeds, runs trials on a rayon
//! pool, and aggregates records in trial order, so reports are byte-identical
//! across thread counts.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::time::Instant;

use nae_sdp_core::error::{Error, Result};
use nae_sdp_core::graph::SignedMultigraph;
use nae_sdp_core::lift::{cycle_counts, derive_seed, is_tangle_free, nb_walk_counts};
use nae_sdp_core::linalg;
use nae_sdp_core::refute::{
    classify_regime, dual_correction_search, eig_bound, f_threshold, threshold_curve,
    RefutationReport, Regime, ThresholdCurve,
};
use nae_sdp_core::spectral::{
    b_spectral_radius_from_ps, b_spectrum_via_ihara_bass, bulk_check, positive_spectrum,
    positive_spectrum_extremes,
};
use nae_sdp_core::tree::TreeParams;
use nae_sdp_core::witness::{
    build_witness, validate_witness, witness_objective, ValidateOptions, WitnessReport,
};

use crate::config::{ExperimentConfig, RhoPolicy, TrialRecord};
use crate::io::generate_signed_lift;

fn elapsed_ms(t: Instant) -> u64 {
    t.elapsed().as_millis() as u64
}

/// Effective witness correlation for a config.
pub fn resolve_rho(cfg: &ExperimentConfig, p: &TreeParams) -> f64 {
    match cfg.rho {
        RhoPolicy::Explicit(r) => r,
        RhoPolicy::Auto => {
            let base = p.rho_star() + cfg.epsilon.min(0.05);
            if cfg.triangle_safe {
                base.max(-1.0 / 3.0)
            } else {
                base
            }
        }
    }
}

// ---------------------------------------------------------------- bordenave

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BordenaveTrial {
    pub ps_min: f64,
    pub ps_max: f64,
    pub bulk_ok: bool,
    pub b_radius: f64,
    pub b_radius_ok: bool,
    pub degenerate: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BordenaveSummary {
    pub trials: Vec<TrialRecord<BordenaveTrial>>,
    pub counted: usize,
    pub bulk_pass_fraction: f64,
    pub radius_pass_fraction: f64,
    pub pass: bool,
    pub pass_threshold: f64,
}

/// Signed-lift bulk trials: PS(A_n) containment in [λ̲-ε, λ̄+ε] and the
/// non-backtracking radius against √ρ₁ + ε.
pub fn run_bordenave(cfg: &ExperimentConfig, signed: bool) -> Result<BordenaveSummary> {
    cfg.validate()?;
    let p = TreeParams::new(cfg.c, cfg.d)?;
    let pool = cfg.pool()?;
    let results: Vec<Result<TrialRecord<BordenaveTrial>>> = pool.install(|| {
        (0..cfg.trials)
            .into_par_iter()
            .map(|trial| {
                let t0 = Instant::now();
                let seed = cfg.trial_seed(trial);
                if cfg.n == 1 {
                    return Ok(TrialRecord {
                        trial,
                        seed,
                        wall_ms: 0,
                        data: BordenaveTrial {
                            ps_min: f64::NAN,
                            ps_max: f64::NAN,
                            bulk_ok: false,
                            b_radius: f64::NAN,
                            b_radius_ok: false,
                            degenerate: true,
                        },
                    });
                }
                let x = if signed {
                    generate_signed_lift(cfg.c, cfg.d, cfg.n, seed)?.0
                } else {
                    let base = SignedMultigraph::kdc(cfg.d, cfg.c);
                    nae_sdp_core::lift::random_lift(&base, cfg.n, seed)?.0
                };
                let (lo, hi) = positive_spectrum_extremes(&x, derive_seed(seed, 2))?;
                let bulk = bulk_check(&[lo, hi], &p, cfg.epsilon)?;
                let radius = b_spectral_radius_from_ps(lo, hi, &p, true);
                let radius_ok = radius <= p.rho1().sqrt() + cfg.epsilon;
                Ok(TrialRecord {
                    trial,
                    seed,
                    wall_ms: elapsed_ms(t0),
                    data: BordenaveTrial {
                        ps_min: lo,
                        ps_max: hi,
                        bulk_ok: bulk.ok,
                        b_radius: radius,
                        b_radius_ok: radius_ok,
                        degenerate: false,
                    },
                })
            })
            .collect()
    });
    let trials: Vec<TrialRecord<BordenaveTrial>> =
        results.into_iter().collect::<Result<Vec<_>>>()?;
    let counted: Vec<_> = trials.iter().filter(|t| !t.data.degenerate).collect();
    let n = counted.len().max(1);
    let bulk_pass = counted.iter().filter(|t| t.data.bulk_ok).count() as f64 / n as f64;
    let radius_pass = counted.iter().filter(|t| t.data.b_radius_ok).count() as f64 / n as f64;
    let threshold = 0.95;
    Ok(BordenaveSummary {
        counted: counted.len(),
        bulk_pass_fraction: bulk_pass,
        radius_pass_fraction: radius_pass,
        pass: bulk_pass >= threshold,
        pass_threshold: threshold,
        trials,
    })
}

// ---------------------------------------------------------------- refute

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RefuteSummary {
    pub trials: Vec<TrialRecord<RefutationReport>>,
    pub median_eig_nae: Option<f64>,
    pub refute_fraction: Option<f64>,
    pub threshold_f: Option<f64>,
}

fn median(xs: &mut [f64]) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Some(xs[xs.len() / 2])
}

/// Eigenvalue-bound trials on fresh random signed lifts.
pub fn run_refute(cfg: &ExperimentConfig, correction_iters: usize) -> Result<RefuteSummary> {
    cfg.validate()?;
    if cfg.c != 3 {
        return Err(Error::InvalidParameter(
            "the NAE refutation driver needs c = 3".into(),
        ));
    }
    let pool = cfg.pool()?;
    let results: Vec<Result<TrialRecord<RefutationReport>>> = pool.install(|| {
        (0..cfg.trials)
            .into_par_iter()
            .map(|trial| {
                let t0 = Instant::now();
                let seed = cfg.trial_seed(trial);
                let (signed, _) = generate_signed_lift(cfg.c, cfg.d, cfg.n, seed)?;
                let primal = signed.primal_graph()?;
                let mut report = if correction_iters > 0 {
                    let mut r = dual_correction_search(&primal, correction_iters, seed)?;
                    let nae = eig_bound(&primal, true, seed)?;
                    r.eig_nae = nae.eig_nae;
                    r.threshold_f = nae.threshold_f;
                    r.refutes_nae = nae.refutes_nae;
                    r
                } else {
                    eig_bound(&primal, true, seed)?
                };
                // correction never loosens the certificate
                if let Some(cv) = report.correction_value {
                    debug_assert!(cv <= report.eig_xor + 1e-12);
                }
                report.converged = true;
                Ok(TrialRecord {
                    trial,
                    seed,
                    wall_ms: elapsed_ms(t0),
                    data: report,
                })
            })
            .collect()
    });
    let trials: Vec<TrialRecord<RefutationReport>> =
        results.into_iter().collect::<Result<Vec<_>>>()?;
    let mut naes: Vec<f64> = trials.iter().filter_map(|t| t.data.eig_nae).collect();
    let refute_fraction = if naes.is_empty() {
        None
    } else {
        Some(naes.iter().filter(|&&v| v < 1.0).count() as f64 / naes.len() as f64)
    };
    Ok(RefuteSummary {
        median_eig_nae: median(&mut naes),
        refute_fraction,
        threshold_f: trials.first().and_then(|t| t.data.threshold_f),
        trials,
    })
}

// ---------------------------------------------------------------- witness

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WitnessTrial {
    #[serde(flatten)]
    pub report: WitnessReport,
    pub rho: f64,
    pub r: f64,
    pub truncation_radius: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WitnessSummary {
    pub trials: Vec<TrialRecord<WitnessTrial>>,
    pub median_nae: Option<f64>,
    pub median_good_fraction: f64,
}

/// Gaussian-wave witness trials on fresh random signed lifts.
pub fn run_witness(cfg: &ExperimentConfig, validate: bool) -> Result<WitnessSummary> {
    cfg.validate()?;
    let p = TreeParams::new(cfg.c, cfg.d)?;
    let rho = resolve_rho(cfg, &p);
    let pool = cfg.pool()?;
    let results: Vec<Result<TrialRecord<WitnessTrial>>> = pool.install(|| {
        (0..cfg.trials)
            .into_par_iter()
            .map(|trial| {
                let t0 = Instant::now();
                let seed = cfg.trial_seed(trial);
                let (signed, _) = generate_signed_lift(cfg.c, cfg.d, cfg.n, seed)?;
                let primal = signed.primal_graph()?;
                let w = build_witness(&primal, &signed, rho, cfg.tol, cfg.triangle_safe)?;
                let report = if validate {
                    validate_witness(
                        &w,
                        ValidateOptions {
                            seed: derive_seed(seed, 9),
                            ..Default::default()
                        },
                    )?
                } else {
                    witness_objective(&w)
                };
                Ok(TrialRecord {
                    trial,
                    seed,
                    wall_ms: elapsed_ms(t0),
                    data: WitnessTrial {
                        report,
                        rho: w.params.rho,
                        r: w.params.r,
                        truncation_radius: w.params.l,
                    },
                })
            })
            .collect()
    });
    let trials: Vec<TrialRecord<WitnessTrial>> = results.into_iter().collect::<Result<Vec<_>>>()?;
    let mut naes: Vec<f64> = trials
        .iter()
        .filter_map(|t| t.data.report.nae_value)
        .collect();
    let mut goods: Vec<f64> = trials.iter().map(|t| t.data.report.good_fraction).collect();
    Ok(WitnessSummary {
        median_nae: median(&mut naes),
        median_good_fraction: median(&mut goods).unwrap_or(0.0),
        trials,
    })
}

// ---------------------------------------------------------------- sweep

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub d: usize,
    pub f: f64,
    pub rho_star: f64,
    pub xor_bound: f64,
    pub regime: Regime,
    pub median_eig_nae: f64,
    pub median_witness_nae: f64,
    pub regime_agree_fraction: f64,
    pub trials: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepSummary {
    pub rows: Vec<SweepRow>,
    pub curve: ThresholdCurve,
    /// Overall pass: agreement ≥ 90% for every asserted d at n ≥ 500.
    pub pass: bool,
    pub asserted: bool,
}

/// Refuter-vs-prover sweep over integer degrees.
pub fn run_sweep(cfg: &ExperimentConfig, d_list: &[usize]) -> Result<SweepSummary> {
    cfg.validate()?;
    if cfg.c != 3 {
        return Err(Error::InvalidParameter("the sweep needs c = 3".into()));
    }
    for &d in d_list {
        if !(3..=64).contains(&d) {
            return Err(Error::InvalidParameter(format!(
                "sweep degrees must lie in [3, 64], got {d}"
            )));
        }
    }
    let curve = threshold_curve(d_list)?;
    let mut rows = Vec::with_capacity(d_list.len());
    let mut pass = true;
    let mut asserted = false;
    for &d in d_list {
        let dcfg = ExperimentConfig { d, ..cfg.clone() };
        let refute = run_refute(&dcfg, 0)?;
        let witness = run_witness(&dcfg, false)?;
        let p = TreeParams::new(3, d)?;
        let regime = classify_regime(d)?.regime;
        let eig_naes: Vec<f64> = refute
            .trials
            .iter()
            .filter_map(|t| t.data.eig_nae)
            .collect();
        let agree = eig_naes
            .iter()
            .filter(|&&v| match regime {
                Regime::SdpSatisfiableWhp => v > 1.0,
                Regime::SdpRefutableWhp => v < 1.0,
            })
            .count() as f64
            / eig_naes.len().max(1) as f64;
        // the asserted regime window per the sweep contract
        if ((8..=13).contains(&d) || (14..=20).contains(&d)) && cfg.n >= 500 {
            asserted = true;
            if agree < 0.9 {
                pass = false;
            }
        }
        rows.push(SweepRow {
            d,
            f: f_threshold(d as f64)?,
            rho_star: p.rho_star(),
            xor_bound: (1.0 + p.rho1()).powi(2) / (2.0 * p.kappa() as f64),
            regime,
            median_eig_nae: refute.median_eig_nae.unwrap_or(f64::NAN),
            median_witness_nae: witness.median_nae.unwrap_or(f64::NAN),
            regime_agree_fraction: agree,
            trials: cfg.trials,
        });
    }
    Ok(SweepSummary {
        rows,
        curve,
        pass,
        asserted,
    })
}

/// The frozen 5-column curve schema.
pub fn curve_to_csv(curve: &ThresholdCurve) -> String {
    let mut out = String::from("d,f,rho_star,xor_bound,regime\n");
    for row in &curve.rows {
        let regime = match row.regime {
            Regime::SdpSatisfiableWhp => "sdp-satisfiable-whp",
            Regime::SdpRefutableWhp => "sdp-refutable-whp",
        };
        out.push_str(&format!(
            "{},{:.12},{:.12},{:.12},{}\n",
            row.d, row.f, row.rho_star, row.xor_bound, regime
        ));
    }
    out
}

/// Sweep CSV: the curve columns plus empirical medians.
pub fn sweep_to_csv(s: &SweepSummary) -> String {
    let mut out = String::from(
        "d,f,rho_star,xor_bound,regime,median_eig_nae,median_witness_nae,regime_agree_fraction,trials\n",
    );
    for row in &s.rows {
        let regime = match row.regime {
            Regime::SdpSatisfiableWhp => "sdp-satisfiable-whp",
            Regime::SdpRefutableWhp => "sdp-refutable-whp",
        };
        out.push_str(&format!(
            "{},{:.12},{:.12},{:.12},{},{:.9},{:.9},{:.4},{}\n",
            row.d,
            row.f,
            row.rho_star,
            row.xor_bound,
            regime,
            row.median_eig_nae,
            row.median_witness_nae,
            row.regime_agree_fraction,
            row.trials
        ));
    }
    out
}

// ---------------------------------------------------------------- cycles

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CycleLengthSummary {
    pub k: usize,
    pub poisson_mean: f64,
    pub empirical_mean: f64,
    pub empirical_variance: f64,
    pub stderr: f64,
    pub mean_flagged: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CycleSummary {
    pub per_length: Vec<CycleLengthSummary>,
    pub trials: usize,
    pub pass: bool,
}

/// Cycle-count statistics across random lifts against the Poisson means.
pub fn run_cycle_poisson(cfg: &ExperimentConfig, gmax: usize) -> Result<CycleSummary> {
    cfg.validate()?;
    if gmax > 8 {
        return Err(Error::ResourceCap("gmax capped at 8".into()));
    }
    let base = SignedMultigraph::kdc(cfg.d, cfg.c);
    let means: Vec<f64> = nb_walk_counts(&base, gmax)?
        .iter()
        .enumerate()
        .map(|(i, &w)| w as f64 / (2.0 * (i + 2) as f64))
        .collect();
    let pool = cfg.pool()?;
    let counts: Vec<Result<Vec<u64>>> = pool.install(|| {
        (0..cfg.trials)
            .into_par_iter()
            .map(|trial| {
                let seed = cfg.trial_seed(trial);
                let (lifted, _) = nae_sdp_core::lift::random_lift(&base, cfg.n, seed)?;
                Ok(cycle_counts(&lifted, gmax, None)?.counts)
            })
            .collect()
    });
    let counts = counts.into_iter().collect::<Result<Vec<_>>>()?;
    let t = cfg.trials as f64;
    let mut per_length = Vec::new();
    let mut pass = true;
    for (i, &pm) in means.iter().enumerate() {
        let xs: Vec<f64> = counts.iter().map(|c| c[i] as f64).collect();
        let mean = xs.iter().sum::<f64>() / t;
        let var = if cfg.trials > 1 {
            xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (t - 1.0)
        } else {
            0.0
        };
        let stderr = (var / t).sqrt();
        let flagged = (mean - pm).abs() > 5.0 * stderr.max(1e-12) && pm + mean > 0.0;
        if flagged {
            pass = false;
        }
        per_length.push(CycleLengthSummary {
            k: i + 2,
            poisson_mean: pm,
            empirical_mean: mean,
            empirical_variance: var,
            stderr,
            mean_flagged: flagged,
        });
    }
    Ok(CycleSummary {
        per_length,
        trials: cfg.trials,
        pass,
    })
}

// ---------------------------------------------------------------- trace check

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceCheckSummary {
    pub ell: usize,
    pub m_power: usize,
    pub kept_trials: usize,
    pub tangled_excluded: usize,
    pub tangled_fraction: f64,
    pub mean_trace: f64,
    pub raw_statistic: f64,
    /// (mean trace / arc count)^(1/(2ℓm)).
    pub normalized_statistic: f64,
    pub bound: f64,
    pub pass: bool,
}

fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut c = vec![vec![0.0; n]; n];
    for i in 0..n {
        for (k, &aik) in a[i].iter().enumerate() {
            if aik == 0.0 {
                continue;
            }
            let brow = &b[k];
            let crow = &mut c[i];
            for j in 0..n {
                crow[j] += aik * brow[j];
            }
        }
    }
    c
}

/// Monte Carlo check of the trace-method growth rate on tangle-free samples.
pub fn run_trace_bound_check(
    cfg: &ExperimentConfig,
    ell: usize,
    m_power: usize,
) -> Result<TraceCheckSummary> {
    cfg.validate()?;
    if ell == 0 {
        return Err(Error::InvalidParameter(
            "ell = 0 gives the identity power; statistic degenerate".into(),
        ));
    }
    if m_power == 0 {
        return Err(Error::InvalidParameter("m must be ≥ 1".into()));
    }
    let base = SignedMultigraph::kdc(cfg.d, cfg.c);
    let max_deg = *base.degrees().iter().max().unwrap();
    let total_vertices = (cfg.n * base.vertex_count()) as f64;
    let regime = 0.25 * total_vertices.ln() / ((max_deg as f64 - 1.0).ln());
    if ell as f64 > regime.ceil() {
        return Err(Error::InvalidParameter(format!(
            "ell = {ell} outside the tangle-free regime (≤ ceil({regime:.2}))"
        )));
    }
    let arcs = 2 * cfg.n * base.edge_count();
    if arcs > 3000 {
        return Err(Error::ResourceCap(format!(
            "{arcs} arcs exceed the dense-power cap of 3000"
        )));
    }
    // spectral radius of the base non-backtracking matrix
    let (bb, _) = base.non_backtracking_dense()?;
    let rho_base = linalg::dense_complex_eigenvalues(&bb, 7)?
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    let pool = cfg.pool()?;
    let traces: Vec<Result<Option<f64>>> = pool.install(|| {
        (0..cfg.trials)
            .into_par_iter()
            .map(|trial| {
                let seed = cfg.trial_seed(trial);
                let (x, _) = generate_signed_lift(cfg.c, cfg.d, cfg.n, seed)?;
                if !is_tangle_free(&x, ell) {
                    return Ok(None);
                }
                let (b, idx) = x.non_backtracking_dense()?;
                let na = idx.arc_count();
                let rows: Vec<Vec<f64>> = (0..na)
                    .map(|i| (0..na).map(|j| b[(i, j)]).collect())
                    .collect();
                // B^ell
                let mut bl = rows.clone();
                for _ in 1..ell {
                    bl = matmul(&bl, &rows);
                }
                // G = B^ell (B^ell)^T
                let blt: Vec<Vec<f64>> = (0..na)
                    .map(|i| (0..na).map(|j| bl[j][i]).collect())
                    .collect();
                let g = matmul(&bl, &blt);
                // tr(G^m)
                let mut gp = g.clone();
                for _ in 1..m_power {
                    gp = matmul(&gp, &g);
                }
                let tr: f64 = (0..na).map(|i| gp[i][i]).sum();
                Ok(Some(tr))
            })
            .collect()
    });
    let traces = traces.into_iter().collect::<Result<Vec<_>>>()?;
    let kept: Vec<f64> = traces.iter().filter_map(|t| *t).collect();
    let tangled = traces.len() - kept.len();
    if kept.is_empty() {
        return Err(Error::Other(
            "all samples were tangled; retry with smaller ell".into(),
        ));
    }
    let mean = kept.iter().sum::<f64>() / kept.len() as f64;
    let exponent = 1.0 / (2.0 * ell as f64 * m_power as f64);
    let raw = mean.powf(exponent);
    let normalized = (mean / arcs as f64).powf(exponent);
    let bound = rho_base.sqrt() + cfg.epsilon;
    Ok(TraceCheckSummary {
        ell,
        m_power,
        kept_trials: kept.len(),
        tangled_excluded: tangled,
        tangled_fraction: tangled as f64 / traces.len() as f64,
        mean_trace: mean,
        raw_statistic: raw,
        normalized_statistic: normalized,
        bound,
        pass: normalized <= bound,
    })
}

// ---------------------------------------------------------------- spectra

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectraSummary {
    pub ps: Option<Vec<f64>>,
    pub ps_min: f64,
    pub ps_max: f64,
    pub b_radius: f64,
    pub bulk_ok: bool,
    pub b_spectrum: Option<Vec<(f64, f64)>>,
}

/// Spectral report for a single generated instance.
pub fn run_spectra(cfg: &ExperimentConfig, full: bool) -> Result<SpectraSummary> {
    cfg.validate()?;
    let p = TreeParams::new(cfg.c, cfg.d)?;
    let seed = cfg.trial_seed(0);
    let (x, _) = generate_signed_lift(cfg.c, cfg.d, cfg.n, seed)?;
    let (lo, hi) = positive_spectrum_extremes(&x, derive_seed(seed, 2))?;
    let bulk = bulk_check(&[lo, hi], &p, cfg.epsilon)?;
    let (ps, b_spec, radius) = if full {
        let ps = positive_spectrum(&x)?;
        let bs = b_spectrum_via_ihara_bass(&x)?;
        let r = bs.spectral_radius;
        (Some(ps.eigenvalues), Some(bs.eigenvalues), r)
    } else {
        (None, None, b_spectral_radius_from_ps(lo, hi, &p, true))
    };
    Ok(SpectraSummary {
        ps,
        ps_min: lo,
        ps_max: hi,
        b_radius: radius,
        bulk_ok: bulk.ok,
        b_spectrum: b_spec,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> ExperimentConfig {
        ExperimentConfig {
            c: 3,
            d: 4,
            n: 60,
            trials: 6,
            seed: 42,
            epsilon: 0.3,
            threads: 2,
            ..Default::default()
        }
    }

    #[test]
    fn bordenave_driver_smoke() {
        let s = run_bordenave(&small_cfg(), true).unwrap();
        assert_eq!(s.trials.len(), 6);
        assert_eq!(s.counted, 6);
        for t in &s.trials {
            assert!(t.data.ps_max <= 12f64.sqrt() + 1e-8);
        }
    }

    #[test]
    fn bordenave_degenerate_n1_flagged() {
        let cfg = ExperimentConfig {
            n: 1,
            ..small_cfg()
        };
        let s = run_bordenave(&cfg, true).unwrap();
        assert_eq!(s.counted, 0);
        assert!(s.trials.iter().all(|t| t.data.degenerate));
    }

    #[test]
    fn refute_driver_smoke() {
        let s = run_refute(&small_cfg(), 0).unwrap();
        assert_eq!(s.trials.len(), 6);
        assert!(s.median_eig_nae.unwrap() > 0.0);
        assert!((s.threshold_f.unwrap() - f_threshold(4.0).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn witness_driver_smoke() {
        let cfg = ExperimentConfig {
            rho: RhoPolicy::Explicit(-0.25),
            ..small_cfg()
        };
        let s = run_witness(&cfg, false).unwrap();
        assert_eq!(s.trials.len(), 6);
        for t in &s.trials {
            assert!((t.data.rho + 0.25).abs() < 1e-12);
            let nae = t.data.report.nae_value.unwrap();
            assert!((0.75 - 1e-12..=1.5).contains(&nae));
        }
    }

    #[test]
    fn determinism_across_thread_counts() {
        // byte-identical up to wall-clock fields
        fn scrub(v: &mut serde_json::Value) {
            match v {
                serde_json::Value::Object(map) => {
                    map.remove("wall_ms");
                    for (_, x) in map.iter_mut() {
                        scrub(x);
                    }
                }
                serde_json::Value::Array(xs) => xs.iter_mut().for_each(scrub),
                _ => {}
            }
        }
        let cfg1 = ExperimentConfig {
            threads: 1,
            ..small_cfg()
        };
        let cfg4 = ExperimentConfig {
            threads: 4,
            ..small_cfg()
        };
        let mut a = serde_json::to_value(run_refute(&cfg1, 0).unwrap()).unwrap();
        let mut b = serde_json::to_value(run_refute(&cfg4, 0).unwrap()).unwrap();
        scrub(&mut a);
        scrub(&mut b);
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
        let mut a = serde_json::to_value(run_bordenave(&cfg1, true).unwrap()).unwrap();
        let mut b = serde_json::to_value(run_bordenave(&cfg4, true).unwrap()).unwrap();
        scrub(&mut a);
        scrub(&mut b);
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn cycles_driver_small() {
        let cfg = ExperimentConfig {
            n: 150,
            trials: 40,
            ..small_cfg()
        };
        let s = run_cycle_poisson(&cfg, 4).unwrap();
        assert_eq!(s.per_length.len(), 3);
        assert_eq!(s.per_length[0].poisson_mean, 0.0); // w_2 = 0
        assert_eq!(s.per_length[1].poisson_mean, 0.0); // odd cycles absent
        assert_eq!(s.per_length[2].poisson_mean, 18.0);
        assert!(s.pass, "{:?}", s.per_length);
    }

    #[test]
    fn trace_check_small() {
        // radius-1 balls of simple bipartite lifts are acyclic, so nothing is
        // excluded and the statistic is well defined
        let cfg = ExperimentConfig {
            n: 20,
            trials: 8,
            epsilon: 0.5,
            ..small_cfg()
        };
        let s = run_trace_bound_check(&cfg, 1, 2).unwrap();
        assert_eq!(s.kept_trials + s.tangled_excluded, 8);
        assert!(s.kept_trials > 0);
        assert!(s.normalized_statistic > 0.0);
        assert!(s.raw_statistic >= s.normalized_statistic);
        // ℓ = 0 rejected
        assert!(run_trace_bound_check(&cfg, 0, 2).is_err());
    }

    #[test]
    fn sweep_csv_schema() {
        let curve = threshold_curve(&[8, 14]).unwrap();
        let csv = curve_to_csv(&curve);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "d,f,rho_star,xor_bound,regime");
        assert_eq!(lines.count(), 2);
    }

    #[test]
    fn sweep_regime_agreement_at_moderate_size() {
        // the asserted window: eig_nae sign matches the regime at n ≥ 500
        let cfg = ExperimentConfig {
            n: 500,
            trials: 4,
            seed: 99,
            epsilon: 0.01,
            threads: 2,
            ..Default::default()
        };
        let s = run_sweep(&cfg, &[8, 16]).unwrap();
        assert!(s.asserted);
        assert!(s.pass, "rows: {:?}", s.rows);
        assert_eq!(s.rows.len(), 2);
        assert!(s.rows[0].median_eig_nae > 1.0); // d = 8: no refutation
        assert!(s.rows[1].median_eig_nae < 1.0); // d = 16: refutes
        let csv = sweep_to_csv(&s);
        assert!(csv.starts_with(
            "d,f,rho_star,xor_bound,regime,median_eig_nae,median_witness_nae,regime_agree_fraction,trials"
        ));
        // sweep degrees outside [3, 64] rejected
        assert!(run_sweep(&cfg, &[65]).is_err());
    }
}
