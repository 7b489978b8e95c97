//! `bo-lab`: run the verification experiments from the command line.
//!
//! Exit codes: 0 all checks passed, 1 a check failed, 2 configuration error,
//! 3 numerical abort (trajectory blow-up).

mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{ConfigOverlay, ExperimentConfig, TruncArg};

#[derive(Parser)]
#[command(
    name = "bo-lab",
    version,
    about = "Spectral laboratory for the truncated periodic Benjamin-Ono equation",
    after_help = "Output defaults to ./bo-lab-out (override with --out or BO_LAB_OUT)."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a trajectory and record conservation diagnostics to CSV
    Evolve(CommonArgs),
    /// Wiener/Gibbs ensemble statistics: calibration, weights, moments
    Sample(CommonArgs),
    /// Monte Carlo check of finite-N Gibbs measure invariance under the flow
    Invariance(CommonArgs),
    /// Gauge-transform identities: commutator, source term, evolution residual
    GaugeCheck(CommonArgs),
    /// Exact cancellation of the resonant coefficient polynomials
    Cancellation(CommonArgs),
    /// Eisenstein norm counts and the constrained quadruple/divisor oracle
    Divisor(CommonArgs),
    /// Factorial composition sums S_{N,k} and their closed-form bound
    Snk(CommonArgs),
    /// Z1-norm tail curve and quartic large-deviation exceedances
    Tails(CommonArgs),
    /// The s-derived exponent family and its ordering chain
    Params(CommonArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Evolve(_) => "evolve",
            Command::Sample(_) => "sample",
            Command::Invariance(_) => "invariance",
            Command::GaugeCheck(_) => "gauge-check",
            Command::Cancellation(_) => "cancellation",
            Command::Divisor(_) => "divisor",
            Command::Snk(_) => "snk",
            Command::Tails(_) => "tails",
            Command::Params(_) => "params",
        }
    }

    fn args(&self) -> &CommonArgs {
        match self {
            Command::Evolve(a)
            | Command::Sample(a)
            | Command::Invariance(a)
            | Command::GaugeCheck(a)
            | Command::Cancellation(a)
            | Command::Divisor(a)
            | Command::Snk(a)
            | Command::Tails(a)
            | Command::Params(a) => a,
        }
    }
}

/// Flags mirror the config-file fields; explicit flags override the file.
#[derive(Args)]
struct CommonArgs {
    /// JSON config file applied before the flags
    #[arg(long)]
    config: Option<PathBuf>,
    /// Truncation parameter N (a positive integer, or "inf")
    #[arg(long)]
    n: Option<TruncArg>,
    /// Spectral resolution (defaults to N)
    #[arg(long)]
    n_max: Option<usize>,
    /// Regularity parameter s in (0, 0.25)
    #[arg(long)]
    s: Option<f64>,
    /// Integrator step
    #[arg(long)]
    dt: Option<f64>,
    /// Time horizon
    #[arg(long)]
    t: Option<f64>,
    /// Sample count
    #[arg(long)]
    m: Option<usize>,
    /// RNG seed
    #[arg(long)]
    seed: Option<u64>,
    /// Gauge series depth
    #[arg(long)]
    mu_max: Option<usize>,
    /// Finite-difference offset for the gauge evolution residual
    #[arg(long)]
    dt_fd: Option<f64>,
    /// L2 norm the random initial data is scaled to
    #[arg(long)]
    l2_scale: Option<f64>,
    /// Cutoff plateau edge (psi equals 1 on [-inner, inner])
    #[arg(long)]
    psi_inner: Option<f64>,
    /// Cutoff support edge (psi vanishes outside [-outer, outer])
    #[arg(long)]
    psi_outer: Option<f64>,
    /// Plateau half-width of the Gibbs cutoff zeta
    #[arg(long)]
    zeta_plateau: Option<f64>,
    /// Observables: mass_sq, re_<k>, abs_sq_<k>
    #[arg(long, value_delimiter = ',')]
    observables: Option<Vec<String>>,
    /// Largest norm K in the Eisenstein sweep
    #[arg(long)]
    k_max: Option<u64>,
    /// Dyadic scale bound for quadruple instances
    #[arg(long)]
    d: Option<u32>,
    /// Number of random quadruple instances
    #[arg(long)]
    instances: Option<usize>,
    /// Largest N in the S_{N,k} sweep
    #[arg(long)]
    snk_n_max: Option<u32>,
    /// Largest k in the S_{N,k} sweep
    #[arg(long)]
    snk_k_max: Option<u32>,
    /// Thresholds for the Z1 tail curve
    #[arg(long, value_delimiter = ',')]
    k_grid: Option<Vec<f64>>,
    /// Thresholds alpha for the quartic tail bound
    #[arg(long, value_delimiter = ',')]
    alpha_grid: Option<Vec<f64>>,
    /// Gaussian-vector lengths N for the quartic tail bound
    #[arg(long, value_delimiter = ',')]
    quartic_n: Option<Vec<usize>>,
    /// Append flattened coefficients to the trajectory CSV
    #[arg(long)]
    csv_coeffs: bool,
    /// Write per-sample observables as a flat CSV
    #[arg(long)]
    per_sample_csv: bool,
    /// Worker threads (0 = library default); results are thread-count invariant
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
}

impl CommonArgs {
    fn overlay(&self) -> ConfigOverlay {
        ConfigOverlay {
            subcommand: None,
            n: self.n,
            n_max: self.n_max,
            s: self.s,
            dt: self.dt,
            t: self.t,
            m: self.m,
            seed: self.seed,
            mu_max: self.mu_max,
            dt_fd: self.dt_fd,
            l2_scale: self.l2_scale,
            psi_inner: self.psi_inner,
            psi_outer: self.psi_outer,
            zeta_plateau: self.zeta_plateau,
            observables: self.observables.clone(),
            k_max: self.k_max,
            d: self.d,
            instances: self.instances,
            snk_n_max: self.snk_n_max,
            snk_k_max: self.snk_k_max,
            k_grid: self.k_grid.clone(),
            alpha_grid: self.alpha_grid.clone(),
            quartic_n: self.quartic_n.clone(),
            csv_coeffs: self.csv_coeffs.then_some(true),
            per_sample_csv: self.per_sample_csv.then_some(true),
            threads: self.threads,
            out_dir: self.out.clone(),
        }
    }
}

fn resolve_config(command: &Command) -> anyhow::Result<ExperimentConfig> {
    let name = command.name();
    let args = command.args();
    let mut cfg = ExperimentConfig::defaults(name);
    if let Some(path) = &args.config {
        let overlay = config::load_config(path, name)?;
        cfg.apply(&overlay);
    }
    cfg.apply(&args.overlay());
    Ok(cfg.finish())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match resolve_config(&cli.command) {
        Ok(cfg) => cfg,
        Err(err) => {
            eprintln!("config error: {err:#}");
            return ExitCode::from(2);
        }
    };
    if cfg.threads > 0 {
        if let Err(err) =
            rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build_global()
        {
            eprintln!("config error: cannot size the worker pool: {err}");
            return ExitCode::from(2);
        }
    }
    match run::execute(&cfg) {
        Ok(output) => {
            for line in output.report.summary_lines() {
                println!("{line}");
            }
            println!(
                "report: {}",
                cfg.out_dir.join(format!("{}_report.json", cfg.subcommand)).display()
            );
            if output.report.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(err) => {
            // numerical aborts are distinguished from configuration problems
            let numerical = err
                .downcast_ref::<bo_lab::Error>()
                .map(|e| matches!(e, bo_lab::Error::Blowup { .. }))
                .unwrap_or(false);
            if numerical {
                eprintln!("numerical abort: {err:#}");
                ExitCode::from(3)
            } else {
                eprintln!("config error: {err:#}");
                ExitCode::from(2)
            }
        }
    }
}
