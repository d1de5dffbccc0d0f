use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use binotone_cli::{
    cmd_baseline, cmd_batch, cmd_evaluate, cmd_optimize, cmd_refs, exit_code, Settings,
};

#[derive(Debug, Parser)]
#[command(
    name = "binotone",
    version,
    about = "Binocular tone mapping: one HDR image in, an LDR stereo pair out"
)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Find the optimal pair and write images, report and trajectory.
    Optimize {
        input: PathBuf,
        #[arg(short, long)]
        out_dir: PathBuf,
        /// Record seconds per iteration in report.json.
        #[arg(long)]
        timing: bool,
        #[command(flatten)]
        settings: Settings,
    },
    /// Write the contrast and detail reference images.
    Refs {
        input: PathBuf,
        #[arg(short, long)]
        out_dir: PathBuf,
        #[command(flatten)]
        settings: Settings,
    },
    /// Write the monocular image tone mapped at the midpoint beta.
    Baseline {
        input: PathBuf,
        #[arg(long)]
        beta_l: f64,
        #[arg(long)]
        beta_r: f64,
        #[arg(short, long)]
        out: PathBuf,
        #[command(flatten)]
        settings: Settings,
    },
    /// Print the energy breakdown of an LDR pair as JSON.
    Evaluate {
        input: PathBuf,
        left: PathBuf,
        right: PathBuf,
        #[command(flatten)]
        settings: Settings,
    },
    /// Optimize every HDR file in a directory into one CSV table.
    Batch {
        input_dir: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        #[command(flatten)]
        settings: Settings,
    },
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    match cli.command {
        Command::Optimize {
            input,
            out_dir,
            timing,
            settings,
        } => {
            let report = cmd_optimize(&input, &out_dir, &settings, timing)?;
            println!(
                "beta_left={:.4} beta_right={:.4} E={:.6} E_mono={:.6}",
                report.beta_left, report.beta_right, report.energy.e_total, report.baseline.e_total
            );
        }
        Command::Refs {
            input,
            out_dir,
            settings,
        } => cmd_refs(&input, &out_dir, &settings)?,
        Command::Baseline {
            input,
            beta_l,
            beta_r,
            out,
            settings,
        } => {
            cmd_baseline(&input, beta_l, beta_r, &out, &settings)?;
        }
        Command::Evaluate {
            input,
            left,
            right,
            settings,
        } => {
            let report = cmd_evaluate(&input, &left, &right, &settings)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
        Command::Batch {
            input_dir,
            out,
            settings,
        } => {
            let summary = cmd_batch(&input_dir, &out, &settings)?;
            println!(
                "{} images, {} skipped, mean E={:.6} (baseline {:.6})",
                summary.rows.len(),
                summary.failures.len(),
                summary.mean.e,
                summary.mean.e_mono
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            // usage errors are input errors
            return ExitCode::from(if err.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err) as u8)
        }
    }
}
