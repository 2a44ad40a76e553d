//! Command-line front end: run a configuration file or a named
//! reproduction case, write the report and CSV artifacts, and exit 0
//! when every check passes, 1 on a failed check, 2 on usage errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use susyqm::config::parse_config;
use susyqm::repro::{run_case, run_command, write_outcome, CaseId, CaseOutcome, RunOverrides};

#[derive(Parser)]
#[command(name = "susyqm", about = "oscillator transform designer and verifier")]
struct Cli {
    /// flat key = value configuration file
    #[arg(long)]
    config: Option<PathBuf>,

    /// output directory for report.txt and CSVs
    #[arg(long)]
    out: Option<PathBuf>,

    /// run a named reproduction case (fig1..fig5, equiv, am,
    /// intertwining, ladder_k1, ladder_k2, cs, uncertainty, all)
    #[arg(long)]
    repro: Option<String>,

    /// override the per-case tolerance
    #[arg(long)]
    tol: Option<f64>,

    /// override the grid as xmin,xmax,n
    #[arg(long)]
    grid: Option<String>,
}

fn parse_grid_flag(s: &str) -> Result<(f64, f64, usize), String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("--grid wants xmin,xmax,n, got '{s}'"));
    }
    let xmin: f64 = parts[0].parse().map_err(|_| format!("bad xmin '{}'", parts[0]))?;
    let xmax: f64 = parts[1].parse().map_err(|_| format!("bad xmax '{}'", parts[1]))?;
    let n: usize = parts[2].parse().map_err(|_| format!("bad grid size '{}'", parts[2]))?;
    if !(xmin < xmax) || n < 9 {
        return Err(format!("unusable grid {xmin},{xmax},{n}"));
    }
    Ok((xmin, xmax, n))
}

fn finish(outcome: &CaseOutcome, out_dir: &PathBuf) -> ExitCode {
    if let Err(e) = write_outcome(outcome, out_dir) {
        eprintln!("cannot write {}: {e}", out_dir.display());
        return ExitCode::from(2);
    }
    print!("{}", outcome.report());
    println!("artifacts in {}", out_dir.display());
    if outcome.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let grid_override = match cli.grid.as_deref().map(parse_grid_flag).transpose() {
        Ok(g) => g,
        Err(msg) => {
            eprintln!("{msg}");
            return ExitCode::from(2);
        }
    };

    if let Some(case_name) = &cli.repro {
        let id = match CaseId::parse(case_name) {
            Ok(id) => id,
            Err(e) => {
                eprintln!("{e}");
                return ExitCode::from(2);
            }
        };
        let ov = RunOverrides { tol: cli.tol, grid: grid_override };
        let out_dir = cli.out.unwrap_or_else(|| PathBuf::from(format!("out_{}", id.name())));
        return match run_case(id, &ov) {
            Ok(outcome) => finish(&outcome, &out_dir),
            Err(e) => {
                eprintln!("case {case_name} failed to run: {e}");
                ExitCode::from(1)
            }
        };
    }

    let Some(config_path) = &cli.config else {
        eprintln!("nothing to do: pass --config FILE or --repro CASE");
        return ExitCode::from(2);
    };
    let text = match std::fs::read_to_string(config_path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("cannot read {}: {e}", config_path.display());
            return ExitCode::from(2);
        }
    };
    let mut cfg = match parse_config(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("bad configuration: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(g) = grid_override {
        cfg.grid = g;
    }
    if cli.tol.is_some() {
        cfg.tol = cli.tol;
    }
    if cli.out.is_some() {
        cfg.out = cli.out;
    }
    let out_dir = cfg
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("out_{}", cfg_command_name(&cfg))));
    match run_command(&cfg) {
        Ok(outcome) => finish(&outcome, &out_dir),
        Err(e) => match e {
            susyqm::Error::UnknownCase(_)
            | susyqm::Error::ParseError { .. }
            | susyqm::Error::ValidationError { .. } => {
                eprintln!("{e}");
                ExitCode::from(2)
            }
            other => {
                eprintln!("run failed: {other}");
                ExitCode::from(1)
            }
        },
    }
}

fn cfg_command_name(cfg: &susyqm::config::RunConfig) -> &'static str {
    use susyqm::config::Command;
    match cfg.command {
        Command::Design => "design",
        Command::Verify => "verify",
        Command::Algebra => "algebra",
        Command::Coherent => "coherent",
        Command::Repro => "repro",
    }
}
