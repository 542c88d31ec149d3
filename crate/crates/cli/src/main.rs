use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use nae_sdp_cli::config::{default_threads, ExperimentConfig, Manifest, RhoPolicy};
use nae_sdp_cli::drivers;
use nae_sdp_cli::io;

/// Laboratory for the SDP-refutation threshold of random d-regular NAE-3SAT.
#[derive(Parser)]
#[command(name = "nae-sdp", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// Constraint arity (clique size).
    #[arg(long, default_value_t = 3)]
    c: usize,
    /// Variable degree.
    #[arg(long, default_value_t = 4)]
    d: usize,
    /// Lift order.
    #[arg(long, default_value_t = 100)]
    n: usize,
    /// Number of independent trials.
    #[arg(long, default_value_t = 10)]
    trials: usize,
    /// Master seed; per-trial seeds are derived from it.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Slack parameter (bulk interval widening, rho margin, trace slack).
    #[arg(long)]
    eps: Option<f64>,
    /// Explicit witness correlation; omitted = auto policy.
    #[arg(long, allow_hyphen_values = true)]
    rho: Option<f64>,
    /// Clamp |rho| to 1/3 so triangle inequalities hold on every triple.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    triangle_safe: bool,
    /// Worker threads (default: NAE_SDP_THREADS or all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory for reports; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Wave truncation tolerance.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
}

impl CommonOpts {
    fn to_config(&self, default_eps: f64) -> ExperimentConfig {
        ExperimentConfig {
            c: self.c,
            d: self.d,
            n: self.n,
            trials: self.trials,
            seed: self.seed,
            epsilon: self.eps.unwrap_or(default_eps),
            rho: match self.rho {
                Some(r) => RhoPolicy::Explicit(r),
                None => RhoPolicy::Auto,
            },
            triangle_safe: self.triangle_safe,
            threads: self.threads.unwrap_or_else(default_threads),
            tol: self.tol,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random signed lift and save it as a JSON instance.
    Generate {
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Positive spectrum, bulk containment, and non-backtracking radius.
    Spectra {
        #[command(flatten)]
        opts: CommonOpts,
        /// Compute the full PS(A) and B-spectrum multisets (dimension-capped).
        #[arg(long)]
        full: bool,
    },
    /// Eigenvalue-bound refutation trials.
    Refute {
        #[command(flatten)]
        opts: CommonOpts,
        /// Dual diagonal-correction subgradient iterations (0 = plain bound).
        #[arg(long, default_value_t = 0)]
        iterations: usize,
        /// Evaluate a saved instance instead of generating lifts.
        #[arg(long)]
        instance: Option<PathBuf>,
    },
    /// Gaussian-wave witness trials.
    Witness {
        #[command(flatten)]
        opts: CommonOpts,
        /// Run the full feasibility audit (PSD blocks, triangle slacks).
        #[arg(long)]
        validate: bool,
        /// Dump the trial-0 coefficient map for audit.
        #[arg(long)]
        dump_coefficients: bool,
    },
    /// Refuter-vs-prover threshold sweep over integer degrees.
    Sweep {
        #[command(flatten)]
        opts: CommonOpts,
        /// Comma-separated degree list, e.g. 8,10,13,14,16.
        #[arg(long, value_delimiter = ',', required = true)]
        d_list: Vec<usize>,
    },
    /// Cycle-count statistics against the Poisson predictions.
    Cycles {
        #[command(flatten)]
        opts: CommonOpts,
        #[arg(long, default_value_t = 4)]
        gmax: usize,
    },
    /// Signed-lift spectral bulk trials (with an unsigned control).
    Bordenave {
        #[command(flatten)]
        opts: CommonOpts,
        /// Run unsigned lifts instead of signed ones.
        #[arg(long)]
        unsigned: bool,
    },
    /// Monte Carlo check of the trace-method growth statistic.
    TraceCheck {
        #[command(flatten)]
        opts: CommonOpts,
        #[arg(long, default_value_t = 2)]
        ell: usize,
        #[arg(long = "m", default_value_t = 2)]
        m_power: usize,
    },
}

fn emit(
    out: &Option<PathBuf>,
    name: &str,
    manifest: &Manifest,
    report: &serde_json::Value,
) -> std::io::Result<()> {
    let doc = serde_json::json!({ "manifest": manifest, "report": report });
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            let path = dir.join(format!("{name}.json"));
            std::fs::write(&path, serde_json::to_string_pretty(&doc)?)?;
            eprintln!("wrote {}", path.display());
        }
        None => println!("{}", serde_json::to_string_pretty(&doc)?),
    }
    Ok(())
}

fn write_out(out: &Option<PathBuf>, name: &str, contents: &str) -> std::io::Result<()> {
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            let path = dir.join(name);
            std::fs::write(&path, contents)?;
            eprintln!("wrote {}", path.display());
        }
        None => println!("{contents}"),
    }
    Ok(())
}

fn run() -> Result<u8, Box<dyn std::error::Error>> {
    let cli = Cli::parse();
    match cli.command {
        Command::Generate { opts } => {
            let cfg = opts.to_config(0.15);
            cfg.validate()?;
            let manifest = Manifest::new("generate", &cfg);
            let (_, spec) = io::generate_signed_lift(cfg.c, cfg.d, cfg.n, cfg.trial_seed(0))?;
            match &opts.out {
                Some(dir) => {
                    std::fs::create_dir_all(dir)?;
                    let path = dir.join("instance.json");
                    let checksum = io::save_instance(&path, &spec, cfg.c, cfg.d)?;
                    emit(
                        &opts.out,
                        "generate",
                        &manifest,
                        &serde_json::json!({ "instance": path, "sha256": checksum }),
                    )?;
                }
                None => {
                    let (json, checksum) = io::instance_to_json(&spec, cfg.c, cfg.d)?;
                    println!("{json}");
                    eprintln!("sha256: {checksum}");
                }
            }
            Ok(0)
        }
        Command::Spectra { opts, full } => {
            let cfg = opts.to_config(0.15);
            let manifest = Manifest::new("spectra", &cfg);
            let s = drivers::run_spectra(&cfg, full)?;
            emit(&opts.out, "spectra", &manifest, &serde_json::to_value(&s)?)?;
            Ok(if s.bulk_ok { 0 } else { 2 })
        }
        Command::Refute {
            opts,
            iterations,
            instance,
        } => {
            let cfg = opts.to_config(0.15);
            let manifest = Manifest::new("refute", &cfg);
            if let Some(path) = instance {
                let (spec, _c, _d, checksum) = io::load_instance(&path)?;
                let lifted = spec.build()?;
                let primal = lifted.primal_graph()?;
                let report = if iterations > 0 {
                    nae_sdp_core::refute::dual_correction_search(&primal, iterations, cfg.seed)?
                } else {
                    nae_sdp_core::refute::eig_bound(&primal, true, cfg.seed)?
                };
                emit(
                    &opts.out,
                    "refute",
                    &manifest,
                    &serde_json::json!({ "instance_sha256": checksum, "report": report }),
                )?;
                return Ok(0);
            }
            let s = drivers::run_refute(&cfg, iterations)?;
            emit(&opts.out, "refute", &manifest, &serde_json::to_value(&s)?)?;
            Ok(0)
        }
        Command::Witness {
            opts,
            validate,
            dump_coefficients,
        } => {
            let cfg = opts.to_config(0.01);
            let manifest = Manifest::new("witness", &cfg);
            let s = drivers::run_witness(&cfg, validate)?;
            if dump_coefficients {
                let seed = cfg.trial_seed(0);
                let (signed, _) = io::generate_signed_lift(cfg.c, cfg.d, cfg.n, seed)?;
                let primal = signed.primal_graph()?;
                let p = nae_sdp_core::tree::TreeParams::new(cfg.c, cfg.d)?;
                let rho = drivers::resolve_rho(&cfg, &p);
                let w = nae_sdp_core::witness::build_witness(
                    &primal,
                    &signed,
                    rho,
                    cfg.tol,
                    cfg.triangle_safe,
                )?;
                write_out(
                    &opts.out,
                    "coefficients.json",
                    &serde_json::to_string(&serde_json::json!({
                        "params": w.params,
                        "good": w.good,
                        "coefficients": w.coefficients,
                    }))?,
                )?;
            }
            emit(&opts.out, "witness", &manifest, &serde_json::to_value(&s)?)?;
            Ok(0)
        }
        Command::Sweep { opts, d_list } => {
            let cfg = opts.to_config(0.01);
            let manifest = Manifest::new("sweep", &cfg);
            let s = drivers::run_sweep(&cfg, &d_list)?;
            write_out(&opts.out, "curve.csv", &drivers::curve_to_csv(&s.curve))?;
            write_out(&opts.out, "sweep.csv", &drivers::sweep_to_csv(&s))?;
            emit(&opts.out, "sweep", &manifest, &serde_json::to_value(&s)?)?;
            Ok(if !s.asserted || s.pass { 0 } else { 2 })
        }
        Command::Cycles { opts, gmax } => {
            let cfg = opts.to_config(0.15);
            let manifest = Manifest::new("cycles", &cfg);
            let s = drivers::run_cycle_poisson(&cfg, gmax)?;
            emit(&opts.out, "cycles", &manifest, &serde_json::to_value(&s)?)?;
            Ok(if s.pass { 0 } else { 2 })
        }
        Command::Bordenave { opts, unsigned } => {
            let cfg = opts.to_config(0.15);
            let manifest = Manifest::new("bordenave", &cfg);
            let s = drivers::run_bordenave(&cfg, !unsigned)?;
            emit(
                &opts.out,
                "bordenave",
                &manifest,
                &serde_json::to_value(&s)?,
            )?;
            Ok(if s.pass { 0 } else { 2 })
        }
        Command::TraceCheck { opts, ell, m_power } => {
            let cfg = opts.to_config(0.3);
            let manifest = Manifest::new("trace-check", &cfg);
            let s = drivers::run_trace_bound_check(&cfg, ell, m_power)?;
            emit(
                &opts.out,
                "trace-check",
                &manifest,
                &serde_json::to_value(&s)?,
            )?;
            Ok(if s.pass { 0 } else { 2 })
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
