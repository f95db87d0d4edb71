use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use rwndq_cli::{execute, parse_scenario_as, Mode};

/// Run the RWNDQ fluid model, a packet-level scenario, or an RWNDQ versus
/// DropTail comparison, and write CSV results.
#[derive(Debug, Parser)]
#[command(name = "rwndq-sim", version)]
struct Args {
    /// Scenario file. Without one, the defaults for --mode are used.
    #[arg(long)]
    scenario: Option<PathBuf>,

    /// fluid, sim or ab_compare. Overrides the file's run.mode.
    #[arg(long, value_parser = |s: &str| s.parse::<Mode>())]
    mode: Option<Mode>,

    /// Overrides the file's run.seed.
    #[arg(long)]
    seed: Option<u64>,

    /// Output directory. RWNDQ_SIM_OUT takes precedence when set.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Do not print the summary.
    #[arg(long, short)]
    quiet: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rwndq-sim: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(args: &Args) -> Result<(), Box<dyn std::error::Error>> {
    let text = match &args.scenario {
        Some(path) => std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?,
        None if args.mode.is_some() => String::new(),
        None => return Err("need --scenario or --mode".into()),
    };
    let mut spec = parse_scenario_as(&text, args.mode)?;
    if let Some(seed) = args.seed {
        spec.set_seed(seed);
    }
    if let Some(out) = std::env::var_os("RWNDQ_SIM_OUT").filter(|v| !v.is_empty()) {
        spec.out_dir = out.into();
    } else if let Some(out) = &args.out {
        spec.out_dir = out.clone();
    }
    let outcome = execute(&spec)?;
    if !args.quiet {
        print!("{}", outcome.summary);
        println!("wrote {} files to {}", outcome.files.len(), spec.out_dir.display());
    }
    Ok(())
}
