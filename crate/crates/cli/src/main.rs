//! `slitwave`: plan, run, and analyze multi-slit interference simulations.
//!
//! Exit codes: 0 success, 2 configuration error, 3 non-convergence,
//! 4 resource gate.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use slitwave_core::analysis::fraunhofer_intensity;
use slitwave_core::error::CoreError;
use slitwave_core::io::fmt_f64;
use slitwave_core::runner::{analyze, execute_with_progress, plan, PlanOptions, Profile};

#[derive(Parser)]
#[command(name = "slitwave", version, about = "2D Maxwell solver for multi-slit interference")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct RunOptions {
    /// Experiment config file
    config: PathBuf,
    /// Resolution profile (overrides the config)
    #[arg(long, value_parser = parse_profile)]
    profile: Option<Profile>,
    /// Output directory (overrides the config)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores)
    #[arg(long)]
    threads: Option<usize>,
    /// Period budget before a run is declared non-convergent
    #[arg(long)]
    max_periods: Option<u32>,
    /// Steady-state drift tolerance
    #[arg(long)]
    settle_tol: Option<f64>,
    /// Write a field snapshot every N periods
    #[arg(long)]
    checkpoint_every: Option<u32>,
}

#[derive(Subcommand)]
enum Command {
    /// Resolve a config into its runs and write the manifest
    Plan {
        #[command(flatten)]
        opts: RunOptions,
    },
    /// Execute all configurations and assemble the report
    Run {
        #[command(flatten)]
        opts: RunOptions,
        /// Re-run configurations even when up to date
        #[arg(long)]
        force: bool,
    },
    /// Re-derive the report from stored spectra
    Analyze {
        /// Output directory of a previous run
        dir: PathBuf,
    },
    /// Dump the analytic N-slit far-field intensity as CSV
    Fraunhofer {
        /// Slit width in wavelengths
        #[arg(long)]
        s: f64,
        /// Slit separation in wavelengths
        #[arg(long)]
        d: f64,
        /// Number of slits
        #[arg(long, default_value_t = 3)]
        n: u32,
        /// Half-range of the angle grid in degrees
        #[arg(long, default_value_t = 45.0)]
        theta_max: f64,
        /// Angle step in degrees
        #[arg(long, default_value_t = 0.05)]
        step: f64,
    },
}

fn parse_profile(s: &str) -> Result<Profile, String> {
    Profile::parse(s).ok_or_else(|| format!("unknown profile `{s}` (ci, paper)"))
}

fn to_plan_options(opts: &RunOptions) -> PlanOptions {
    PlanOptions {
        profile: opts.profile,
        out_dir: opts.out.clone(),
        max_periods: opts.max_periods,
        settle_tol: opts.settle_tol,
        checkpoint_every: opts.checkpoint_every,
    }
}

fn with_pool<T>(threads: Option<usize>, f: impl FnOnce() -> T + Send, _: std::marker::PhantomData<T>) -> T
where
    T: Send,
{
    match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("thread pool")
            .install(f),
        None => f(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

fn read_config(path: &PathBuf) -> Result<String, CoreError> {
    std::fs::read_to_string(path).map_err(|e| CoreError::Config {
        line: 0,
        message: format!("cannot read {}: {e}", path.display()),
    })
}

fn dispatch(cli: Cli) -> Result<(), CoreError> {
    match cli.command {
        Command::Plan { opts } => {
            let text = read_config(&opts.config)?;
            let plan = plan(&text, &to_plan_options(&opts))?;
            std::fs::create_dir_all(&plan.out_dir)
                .map_err(|e| CoreError::io(plan.out_dir.display().to_string(), e))?;
            slitwave_core::io::write_text(
                &plan.out_dir.join("manifest.txt"),
                &format!("{}manifest_sha256 = {}\n", plan.manifest, plan.manifest_hash),
            )?;
            println!(
                "{} runs planned ({} / {}), manifest {} -> {}",
                plan.runs.len(),
                plan.kind.name(),
                plan.profile.name(),
                plan.manifest_hash,
                plan.out_dir.display()
            );
            for r in &plan.runs {
                println!(
                    "  {}: {} x {} cells, ~{:.2} GB",
                    r.label,
                    r.scene.nx(),
                    r.scene.nz(),
                    r.scene.memory_estimate_bytes() as f64 / 1e9
                );
            }
            Ok(())
        }
        Command::Run { opts, force } => {
            let text = read_config(&opts.config)?;
            let plan = plan(&text, &to_plan_options(&opts))?;
            let outcome = with_pool(
                opts.threads,
                || {
                    execute_with_progress(&plan, force, &mut |event| {
                        use slitwave_core::runner::RunEvent;
                        match event {
                            RunEvent::Skipped(label) => println!("skip {label} (up to date)"),
                            RunEvent::Started(label) => println!("run  {label} ..."),
                            RunEvent::Finished {
                                label,
                                periods,
                                wall_seconds,
                            } => println!("done {label}: {periods} periods, {wall_seconds:.0} s"),
                        }
                        use std::io::Write;
                        let _ = std::io::stdout().flush();
                    })
                },
                std::marker::PhantomData,
            )?;
            println!(
                "ran {:?}, skipped {:?} -> {}",
                outcome.ran,
                outcome.skipped,
                outcome.out_dir.display()
            );
            if let Some(report) = &outcome.report {
                println!(
                    "max|Sigma| = {:.3e}, kappa(0) = {}, max residual = {:.3e}",
                    report.max_abs_sigma(),
                    report
                        .kappa_at_zero()
                        .map(|k| format!("{k:.3e}"))
                        .unwrap_or_else(|| "masked".into()),
                    report.residuals.max()
                );
            }
            if let Some(blocked) = &outcome.blocked {
                println!(
                    "blocked variants: L2 diff = {:.3e}, max normalized diff = {:.3e}",
                    blocked.l2_relative_diff, blocked.max_normalized_diff
                );
            }
            Ok(())
        }
        Command::Analyze { dir } => {
            let outcome = analyze(&dir)?;
            if let Some(report) = &outcome.report {
                println!(
                    "max|Sigma| = {:.3e}, kappa(0) = {}, max residual = {:.3e}",
                    report.max_abs_sigma(),
                    report
                        .kappa_at_zero()
                        .map(|k| format!("{k:.3e}"))
                        .unwrap_or_else(|| "masked".into()),
                    report.residuals.max()
                );
            }
            if let Some(blocked) = &outcome.blocked {
                println!(
                    "blocked variants: L2 diff = {:.3e}, max normalized diff = {:.3e}",
                    blocked.l2_relative_diff, blocked.max_normalized_diff
                );
            }
            println!("reports refreshed under {}", outcome.out_dir.display());
            Ok(())
        }
        Command::Fraunhofer {
            s,
            d,
            n,
            theta_max,
            step,
        } => {
            if s <= 0.0 || d <= s || n == 0 || step <= 0.0 || theta_max <= 0.0 {
                return Err(CoreError::Config {
                    line: 0,
                    message: "require s > 0, d > s, n >= 1, positive step and range".into(),
                });
            }
            println!("theta_deg,intensity");
            let count = (2.0 * theta_max / step).round() as usize;
            for i in 0..=count {
                let theta_deg = -theta_max + i as f64 * step;
                let v = fraunhofer_intensity(theta_deg.to_radians(), s, d, n);
                println!("{},{}", fmt_f64(theta_deg), fmt_f64(v));
            }
            Ok(())
        }
    }
}
