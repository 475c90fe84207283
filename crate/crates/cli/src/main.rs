//! `hhgbox`: run, sweep and validate breathing-box HHG simulations.

mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use hhgbox::simulation::{check_basis_convergence, simulate, SpectrumOptions, SweepParam};
use hhgbox::validation::{run_validation, ValidationOptions};
use hhgbox::{load_config, RunResult, SimulationConfig, Window};
use output::{BasisFlag, Flags, Manifest, NormFlag};

#[derive(Parser)]
#[command(
    name = "hhgbox",
    version,
    about = "High-harmonic generation from an atom in a breathing spherical box"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum WindowArg {
    None,
    Hann,
}

#[derive(clap::Args)]
struct RunFlags {
    /// Write outputs and exit 0 even if a convergence check fails.
    #[arg(long)]
    allow_unconverged: bool,

    /// Taper applied before the transform. `hann` is a diagnostic extension,
    /// not the reference spectrum.
    #[arg(long, value_enum, default_value = "none")]
    window: WindowArg,
}

#[derive(Subcommand)]
enum Command {
    /// Propagate one configuration and write dipole, spectrum and manifest.
    Run {
        config: PathBuf,
        #[arg(short, long, default_value = "out")]
        output: PathBuf,
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Repeat a run for several values of one parameter.
    Sweep {
        #[arg(long)]
        param: String,
        /// Comma-separated values, at least two.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        config: PathBuf,
        #[arg(short, long, default_value = "out")]
        output: PathBuf,
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Run the built-in self checks and print a pass/fail table.
    Validate {
        /// Tolerance of the confined-hydrogen eigenvalue check.
        #[arg(long, default_value_t = 1e-5)]
        eigen_tolerance: f64,
        /// Force the basis size of the dynamical checks.
        #[arg(long)]
        basis_size: Option<usize>,
    },
}

fn spectrum_options(flags: &RunFlags) -> SpectrumOptions {
    let window = match flags.window {
        WindowArg::None => Window::None,
        WindowArg::Hann => Window::Hann,
    };
    SpectrumOptions {
        window,
        ..SpectrumOptions::default()
    }
}

fn grid_description(opts: &SpectrumOptions) -> String {
    format!(
        "0 to {} omega0 in steps of omega0/{}",
        opts.max_order, opts.per_harmonic
    )
}

struct Item {
    run: RunResult,
    flags: Flags,
}

/// Runs `config`, checks convergence, and writes the data files plus a
/// manifest into `dir`.
fn run_one(
    config: &SimulationConfig,
    dir: &Path,
    opts: &SpectrumOptions,
    command: &str,
) -> Result<Item> {
    let start = Instant::now();
    let run = simulate(config, opts)?;
    let basis = check_basis_convergence(&run, opts)?;
    let flags = Flags {
        norm: NormFlag {
            max_drift: run.norm_drift,
            limit: hhgbox::propagator::NORM_DRIFT_LIMIT,
            ok: run.norm_ok(),
        },
        basis: BasisFlag::from(&basis),
        window: output::window_name(opts.window),
    };
    let files = output::write_run(dir, &run)?;
    let manifest = Manifest {
        software: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command: command.to_string(),
        config: output::config_echo(config),
        spectrum_grid: grid_description(opts),
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        flags: Some(flags),
        outputs: files.iter().map(|p| p.display().to_string()).collect(),
    };
    output::write_manifest(dir, &manifest)?;
    let flags = manifest.flags.expect("set above");
    Ok(Item { run, flags })
}

fn describe_flags(flags: &Flags) -> Vec<String> {
    let mut problems = Vec::new();
    if !flags.norm.ok {
        problems.push(format!(
            "norm drift {:.2e} exceeds {:.0e}",
            flags.norm.max_drift, flags.norm.limit
        ));
    }
    if !flags.basis.ok {
        problems.push(format!(
            "basis not converged: harmonic {} changes by {:.1}% between N = {} and N = {}",
            flags.basis.worst_harmonic,
            100.0 * flags.basis.max_relative_change,
            flags.basis.basis_size,
            flags.basis.reference_size
        ));
    }
    problems
}

fn cmd_run(config_path: &Path, dir: &Path, flags: &RunFlags) -> Result<bool> {
    let config =
        load_config(config_path).with_context(|| format!("config {}", config_path.display()))?;
    let opts = spectrum_options(flags);
    let item = run_one(
        &config,
        dir,
        &opts,
        &format!("run {}", config_path.display()),
    )?;
    println!("wrote {}", dir.display());
    let problems = describe_flags(&item.flags);
    for p in &problems {
        eprintln!("warning: {p}");
    }
    if problems.is_empty() {
        return Ok(true);
    }
    if flags.allow_unconverged {
        eprintln!("continuing: --allow-unconverged");
        return Ok(true);
    }
    eprintln!("error: convergence check failed (rerun with --allow-unconverged to accept)");
    Ok(false)
}

fn value_label(v: f64) -> String {
    format!("{v}")
}

fn cmd_sweep(
    param: &str,
    values: &[f64],
    config_path: &Path,
    dir: &Path,
    flags: &RunFlags,
) -> Result<bool> {
    let param: SweepParam = param.parse()?;
    if values.len() < 2 {
        bail!("a sweep needs at least two values");
    }
    let base =
        load_config(config_path).with_context(|| format!("config {}", config_path.display()))?;
    let opts = spectrum_options(flags);
    let start = Instant::now();
    // An invalid value fails its own item only; the rest still run.
    let results: Vec<Result<Item>> = values
        .par_iter()
        .map(|&v| {
            let config = param.apply(&base, v)?;
            let sub = dir.join(format!("{param}_{}", value_label(v)));
            run_one(
                &config,
                &sub,
                &opts,
                &format!("sweep {param} = {v} {}", config_path.display()),
            )
        })
        .collect();

    let mut ok = true;
    let mut rows = Vec::new();
    for (&v, result) in values.iter().zip(&results) {
        match result {
            Ok(item) => {
                let problems = describe_flags(&item.flags);
                let status = if problems.is_empty() {
                    "ok".to_string()
                } else {
                    problems.join("; ")
                };
                println!("{param} = {v}: {status}");
                if !problems.is_empty() && !flags.allow_unconverged {
                    ok = false;
                }
                rows.extend(item.run.harmonics.iter().map(|&(k, p)| (v, k, p)));
            }
            Err(e) => {
                println!("{param} = {v}: FAILED: {e:#}");
                ok = false;
            }
        }
    }
    std::fs::create_dir_all(dir)?;
    let combined = output::write_sweep(&dir.join(format!("sweep_{param}.csv")), &rows)?;
    let manifest = Manifest {
        software: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command: format!(
            "sweep {param} over {} {}",
            values
                .iter()
                .map(|v| value_label(*v))
                .collect::<Vec<_>>()
                .join(","),
            config_path.display()
        ),
        config: output::config_echo(&base),
        spectrum_grid: grid_description(&opts),
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        flags: None,
        outputs: vec![combined.display().to_string()],
    };
    output::write_manifest(dir, &manifest)?;
    println!("wrote {}", combined.display());
    Ok(ok)
}

fn cmd_validate(eigen_tolerance: f64, basis_size: Option<usize>) -> bool {
    let opts = ValidationOptions {
        eigenvalue_tolerance: eigen_tolerance,
        basis_size,
    };
    let outcomes = run_validation(&opts);
    let width = outcomes.iter().map(|o| o.name.len()).max().unwrap_or(0);
    for o in &outcomes {
        let status = if o.passed { "PASS" } else { "FAIL" };
        println!(
            "{status}  {:width$}  {:>7.2}s  {}",
            o.name, o.seconds, o.detail
        );
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    if failed == 0 {
        println!("all {} checks passed", outcomes.len());
    } else {
        println!("{failed} of {} checks failed", outcomes.len());
    }
    failed == 0
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run {
            config,
            output,
            flags,
        } => cmd_run(config, output, flags),
        Command::Sweep {
            param,
            values,
            config,
            output,
            flags,
        } => cmd_sweep(param, values, config, output, flags),
        Command::Validate {
            eigen_tolerance,
            basis_size,
        } => Ok(cmd_validate(*eigen_tolerance, *basis_size)),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
