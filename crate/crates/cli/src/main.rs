use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use sharp_embed::extremal::Family;
use sharp_embed_cli::{
    cmd_brezis_merle, cmd_check_inequalities, cmd_lq_constants, cmd_sweep_sharpness, cmd_target_membership, CliError,
    Outcome, RunConfig,
};

#[derive(Parser, Debug)]
#[command(name = "sharp-embed", version, about = "Verify sharp rearrangement bounds and sweep their extremals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// key = value configuration file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// CSV destination (stdout when absent)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Comma-separated dimensions
    #[arg(long, global = true)]
    dims: Option<String>,
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Scales the kernel in the inequality suite (harness self-test)
    #[arg(long, global = true, hide = true)]
    kernel_scale: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Random radial data against the pointwise rearrangement bounds
    CheckInequalities,
    /// Sharpness ratios along the extremal families
    SweepSharpness {
        /// bump, balanced or translated (all when absent)
        #[arg(long)]
        family: Option<String>,
    },
    /// Exponential integrals in the plane
    BrezisMerle,
    /// Sharp L^q constants of the Green kernel
    LqConstants,
    /// Target-space membership and the majorant construction
    TargetMembership,
}

fn config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(d) = &cli.dims {
        cfg.set("dims", d)?;
    }
    if let Some(t) = cli.tol {
        cfg.set("tol", &t.to_string())?;
    }
    if let Some(k) = cli.kernel_scale {
        cfg.set("kernel_scale", &k.to_string())?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn suite(c: &Command) -> &'static str {
    match c {
        Command::CheckInequalities => "check-inequalities",
        Command::SweepSharpness { .. } => "sweep-sharpness",
        Command::BrezisMerle => "brezis-merle",
        Command::LqConstants => "lq-constants",
        Command::TargetMembership => "target-membership",
    }
}

fn run(cli: &Cli, cfg: &RunConfig) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::CheckInequalities => cmd_check_inequalities(cfg),
        Command::SweepSharpness { family } => {
            let fam = match family.as_deref() {
                None => None,
                Some(s) => Some(Family::parse(s).ok_or_else(|| CliError::Config(format!("unknown family `{s}`")))?),
            };
            cmd_sweep_sharpness(cfg, fam)
        }
        Command::BrezisMerle => cmd_brezis_merle(cfg),
        Command::LqConstants => cmd_lq_constants(cfg),
        Command::TargetMembership => cmd_target_membership(cfg),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let start = Instant::now();
    let cfg = match config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let outcome = match run(&cli, &cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let written = match &cli.out {
        Some(p) => File::create(p).map_err(CliError::from).and_then(|f| {
            let mut w = BufWriter::new(f);
            outcome.table.write(&mut w)?;
            w.flush()?;
            Ok(())
        }),
        None => outcome.table.write(io::stdout().lock()).map_err(CliError::from),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(e.exit_code() as u8);
    }
    for n in &outcome.notes {
        eprintln!("{n}");
    }
    eprintln!(
        "{} config {:016x}: {} rows, {:.2} s, {}",
        suite(&cli.command),
        cfg.hash(),
        outcome.table.rows.len(),
        start.elapsed().as_secs_f64(),
        if outcome.passed { "all checks hold" } else { "violations found" }
    );
    ExitCode::from(if outcome.passed { 0 } else { 1 })
}
