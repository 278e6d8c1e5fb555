use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lvrm_cli::analysis::{run_analysis, run_scenario, RunOptions};
use lvrm_cli::corpus::{corpus_dir, resolve};
use lvrm_cli::error::{CliError, CliResult, EXIT_OK};
use lvrm_cli::reproduce::reproduce_matrix;
use lvrm_cli::scan::{load_spec, run_scan};
use lvrm_cli::scenario::Analysis;

#[derive(Parser)]
#[command(name = "lvrm", version, about = "LV-RM success dynamics: simulation and bifurcation analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: Global,
}

#[derive(Args)]
struct Global {
    /// Directory for artifacts.
    #[arg(long, global = true, default_value = "lvrm-out")]
    out_dir: PathBuf,
    /// Scan worker threads (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    #[arg(long, global = true)]
    rel_tol: Option<f64>,
    #[arg(long, global = true)]
    abs_tol: Option<f64>,
    /// Override the scenario's integration horizon.
    #[arg(long, global = true)]
    t_end: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run every analysis a scenario requests.
    Run {
        scenario: String,
    },
    Simulate {
        scenario: String,
    },
    Equilibria {
        scenario: String,
    },
    Spectral {
        scenario: String,
    },
    Hopf {
        scenario: String,
    },
    Zerohopf {
        scenario: String,
    },
    /// Scan the (alpha, beta) plane described by a spec file.
    Scan {
        spec: PathBuf,
    },
    /// Run the bundled corpus and print the acceptance matrix.
    Reproduce,
}

fn options(g: &Global) -> RunOptions {
    RunOptions { out_dir: g.out_dir.clone(), rel_tol: g.rel_tol, abs_tol: g.abs_tol, t_end: g.t_end }
}

fn single(arg: &str, which: Analysis, g: &Global) -> CliResult<()> {
    let (_, sc) = resolve(arg)?;
    let out = run_analysis(&sc, which, &options(g))?;
    println!("{}", out.summary);
    Ok(())
}

fn execute(cli: Cli) -> CliResult<()> {
    let g = &cli.global;
    match &cli.command {
        Command::Run { scenario } => {
            let (_, sc) = resolve(scenario)?;
            let mut first_err = None;
            for res in run_scenario(&sc, &options(g)) {
                match res {
                    Ok(out) => println!("{}", out.summary),
                    Err(e) if first_err.is_none() => first_err = Some(e),
                    Err(e) => eprintln!("error: {e}"),
                }
            }
            first_err.map_or(Ok(()), Err)
        }
        Command::Simulate { scenario } => single(scenario, Analysis::Simulate, g),
        Command::Equilibria { scenario } => single(scenario, Analysis::Equilibria, g),
        Command::Spectral { scenario } => single(scenario, Analysis::Spectral, g),
        Command::Hopf { scenario } => single(scenario, Analysis::Hopf, g),
        Command::Zerohopf { scenario } => single(scenario, Analysis::ZeroHopf, g),
        Command::Scan { spec } => {
            let s = load_spec(spec)?;
            let csv = run_scan(&s, g.workers)?;
            std::fs::create_dir_all(&g.out_dir).map_err(|e| CliError::io(&g.out_dir, e))?;
            let stem = spec.file_stem().and_then(|s| s.to_str()).unwrap_or("scan");
            let path = g.out_dir.join(format!("{stem}.csv"));
            std::fs::write(&path, &csv).map_err(|e| CliError::io(&path, e))?;
            println!("Scan: {} cells -> {}", csv.lines().count() - 1, path.display());
            Ok(())
        }
        Command::Reproduce => {
            let report = reproduce_matrix(&corpus_dir())?;
            for r in &report.rows {
                println!("{r}");
            }
            let failed = report.failed();
            println!(
                "{} scenarios, {} rows, {} passed, {} failed",
                report.scenarios,
                report.rows.len(),
                report.rows.len() - failed,
                failed
            );
            if failed > 0 {
                return Err(CliError::Acceptance { failed, total: report.rows.len() });
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
