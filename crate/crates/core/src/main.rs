use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mobsim::config::parse_config;
use mobsim::output::{run_compare, summary_table};
use mobsim::{ProcedureKind, SimConfig, SimError};

#[derive(Parser)]
#[command(name = "mobsim", version, about = "Handover procedure simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured procedures and write KPI/reservation CSVs.
    Run(RunArgs),
    /// Like `run`, defaulting to all six procedures on shared seeds, and
    /// print the pooled comparison table.
    Compare(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Config file (`key = value`); defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Procedure to run; repeat for several. Overrides the config file.
    #[arg(long = "procedure", value_parser = parse_procedure)]
    procedures: Vec<ProcedureKind>,
    #[arg(long)]
    drops: Option<u32>,
    /// Base seed; drop i uses seed + i.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    ues: Option<u32>,
    #[arg(long = "duration-s")]
    duration_s: Option<f64>,
    /// Also write per-drop JSONL event logs.
    #[arg(long)]
    emit_events: bool,
}

fn parse_procedure(s: &str) -> Result<ProcedureKind, String> {
    s.parse()
}

fn resolve(args: &RunArgs, compare: bool) -> Result<SimConfig, SimError> {
    let mut cfg = match &args.config {
        Some(p) => parse_config(p)?,
        None => SimConfig::default(),
    };
    if !args.procedures.is_empty() {
        cfg.procedures = args.procedures.clone();
    } else if compare && args.config.is_none() {
        cfg.procedures = ProcedureKind::ALL.to_vec();
    }
    if let Some(d) = args.drops {
        cfg.n_drops = d;
    }
    if let Some(s) = args.seed {
        cfg.base_seed = s;
    }
    if let Some(u) = args.ues {
        cfg.n_ues = u;
    }
    if let Some(d) = args.duration_s {
        cfg.duration_s = d;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (args, compare) = match &cli.command {
        Command::Run(a) => (a, false),
        Command::Compare(a) => (a, true),
    };
    let result = resolve(args, compare).and_then(|cfg| {
        let results = run_compare(&cfg, args.config.as_deref(), &args.out, args.emit_events)?;
        if compare {
            print!("{}", summary_table(&results));
        } else {
            eprintln!("wrote {} procedure(s) to {}", results.len(), args.out.display());
        }
        Ok(())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
