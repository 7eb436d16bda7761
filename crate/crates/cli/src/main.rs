use std::fs::{self, File};
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use fracks_core::ic::InitialCondition;
use fracks_core::oracle::QuadratureSpec;
use fracks_core::sweep::{run_sweep_with, threads_override, SweepSpec};
use fracks_core::verification::{
    compare_with_oracle, run_suite, Suite, SuiteOptions, SuiteSummary,
};
use fracks_core::{persist, run, DriftVariant, ModelParams, Outcome, SolverConfig, TorusGrid};

const EXIT_OK: u8 = 0;
const EXIT_USAGE: u8 = 1;
const EXIT_BLOWUP: u8 = 2;
const EXIT_DT_UNDERFLOW: u8 = 3;
/// A verification, oracle comparison or sweep gate did not pass.
const EXIT_CHECK_FAILED: u8 = 2;

#[cfg(feature = "parallel")]
const BUILD_ID: &str = concat!(env!("CARGO_PKG_VERSION"), " (parallel)");
#[cfg(not(feature = "parallel"))]
const BUILD_ID: &str = concat!(env!("CARGO_PKG_VERSION"), " (sequential)");

#[derive(Parser)]
#[command(name = "fracks", version = BUILD_ID, about = "Fractional Keller-Segel lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and write its run directory.
    Simulate(SimulateArgs),
    /// Run verification suites.
    Verify(VerifyArgs),
    /// Compare the spectral Λ^α with the real-space kernel quadrature.
    OracleCompare(OracleArgs),
    /// Run an (α, χ, r) sweep from a JSON config.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long, default_value_t = 2.0)]
    beta: f64,
    #[arg(long, default_value_t = 1.0)]
    chi: f64,
    #[arg(long, default_value_t = 1.0)]
    r: f64,
    #[arg(long, default_value_t = 0.0)]
    eps: f64,
    #[arg(long, default_value = "helmholtz")]
    variant: DriftVariant,
    #[arg(long, default_value_t = 256)]
    n: usize,
    /// Initial (and largest) time step.
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    #[arg(long, default_value_t = 1.0)]
    t_end: f64,
    /// Fixed step size instead of adaptive stepping.
    #[arg(long)]
    fixed_dt: bool,
    #[arg(long, default_value_t = 100)]
    record_every: usize,
    #[arg(long, default_value = "cosine:0.1")]
    ic: InitialCondition,
    /// Parent directory of the run directory.
    #[arg(long, default_value = "runs")]
    out: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    suite: Suite,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, default_value_t = 256)]
    n: usize,
    /// JSON summary file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long, default_value_t = 256)]
    n: usize,
    /// Explicit periodic images on each side.
    #[arg(long, default_value_t = 200)]
    cutoff: usize,
    /// Quadrature refinement relative to the grid.
    #[arg(long, default_value_t = 8)]
    refine: usize,
    #[arg(long, default_value = "expcos")]
    ic: InitialCondition,
}

#[derive(Args)]
struct SweepArgs {
    /// Sweep config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Regime map CSV.
    #[arg(long, default_value = "regime_map.csv")]
    out: PathBuf,
}

fn simulate(a: SimulateArgs) -> Result<u8> {
    let params = ModelParams {
        alpha: a.alpha,
        beta: a.beta,
        chi: a.chi,
        r: a.r,
        epsilon: a.eps,
        variant: a.variant,
    };
    let config = SolverConfig {
        n: a.n,
        dt_init: a.dt,
        t_end: a.t_end,
        adapt: !a.fixed_dt,
        record_every: a.record_every,
        ..SolverConfig::default()
    };
    params.validate()?;
    config.validate()?;
    let u0 = a.ic.sample(TorusGrid::new(a.n)?)?;
    let traj = run(&u0, &params, &config)?;
    let label = a.ic.to_string();
    let dir = persist::write_run(&a.out, &traj, &u0, Some(&label))?;
    println!(
        "{} at t = {} after {} steps ({} rejected); sup |u| = {:.6e}",
        traj.outcome,
        traj.final_time,
        traj.steps,
        traj.rejected,
        traj.sup_linf()
    );
    println!("{}", dir.display());
    Ok(match traj.outcome {
        Outcome::Completed => EXIT_OK,
        Outcome::BlowupDetected => EXIT_BLOWUP,
        Outcome::DtUnderflow => EXIT_DT_UNDERFLOW,
    })
}

fn verify(a: VerifyArgs) -> Result<u8> {
    let opts = SuiteOptions {
        trials: a.trials,
        seed: a.seed,
        n: a.n,
    };
    let summary = SuiteSummary::new(run_suite(a.suite, &opts)?);
    print!("{}", summary.table());
    if let Some(out) = a.out {
        fs::write(&out, summary.to_json()? + "\n")
            .with_context(|| format!("writing {}", out.display()))?;
    }
    Ok(if summary.pass {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    })
}

fn oracle_compare(a: OracleArgs) -> Result<u8> {
    if !(a.alpha > 0.0 && a.alpha < 2.0) {
        bail!("--alpha must lie in (0, 2), got {}", a.alpha);
    }
    let q = QuadratureSpec {
        refinement: a.refine,
        image_cutoff: a.cutoff,
        ..QuadratureSpec::default()
    };
    q.validate().context("--cutoff/--refine")?;
    let f = a.ic.sample(TorusGrid::new(a.n)?)?;
    let c = compare_with_oracle(&f, a.alpha, &q)?;
    println!("max_abs_deviation {:.6e}", c.max_abs);
    println!("max_rel_deviation {:.6e}", c.max_rel);
    println!("oracle_self_tolerance {:.6e}", c.self_tolerance);
    println!("{}", if c.pass() { "PASS" } else { "FAIL" });
    Ok(if c.pass() { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn sweep(a: SweepArgs) -> Result<u8> {
    let text =
        fs::read_to_string(&a.config).with_context(|| format!("reading {}", a.config.display()))?;
    let spec = SweepSpec::from_json(&text).with_context(|| format!("in {}", a.config.display()))?;
    let threads = threads_override().unwrap_or(spec.parallelism);
    let map = run_sweep_with(&spec, threads)?;
    let file = File::create(&a.out).with_context(|| format!("writing {}", a.out.display()))?;
    map.write_csv(BufWriter::new(file))?;
    let failures = map.gate_failures();
    for r in &failures {
        eprintln!(
            "gate failure: alpha={} chi={} r={} ended {} at t={}",
            r.alpha, r.chi, r.r, r.outcome, r.t_final
        );
    }
    println!(
        "{} cells, {} gated, {} gate failures -> {}",
        map.rows.len(),
        map.rows.iter().filter(|r| r.gated).count(),
        failures.len(),
        a.out.display()
    );
    Ok(if failures.is_empty() {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { EXIT_OK });
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Verify(a) => verify(a),
        Command::OracleCompare(a) => oracle_compare(a),
        Command::Sweep(a) => sweep(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
