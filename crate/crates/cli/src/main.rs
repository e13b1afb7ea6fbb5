use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qflatlab_core::error::Error;
use qflatlab_core::fields::spec::MetricSpec;
use qflatlab_core::gallery::{gallery_entries, run_analysis, run_verification_suite, sweep, CheckStatus};

#[derive(Parser)]
#[command(
    name = "qflatlab",
    version,
    about = "Normality analysis for conformally flat Q-curvature metrics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyse one metric spec and write the report as JSON.
    Analyze {
        #[arg(long)]
        spec: PathBuf,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the verification suite.
    Verify {
        /// Keep only cases whose id contains this string.
        #[arg(long)]
        filter: Option<String>,
        /// Print the full summary as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Analyse a spec template once per parameter value; CSV on stdout.
    Sweep {
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long)]
        values: String,
        #[arg(long)]
        spec: PathBuf,
    },
    /// Inspect the built-in metric families.
    Gallery {
        #[command(subcommand)]
        action: GalleryAction,
    },
}

#[derive(Subcommand)]
enum GalleryAction {
    List,
}

const INPUT_ERROR: u8 = 1;
const NUMERIC_ERROR: u8 = 2;
const VERIFICATION_FAILED: u8 = 3;

fn fail(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(if e.is_input_error() { INPUT_ERROR } else { NUMERIC_ERROR })
}

fn read_spec(path: &PathBuf) -> Result<MetricSpec, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Schema {
        pointer: String::new(),
        msg: format!("cannot read {}: {e}", path.display()),
    })?;
    MetricSpec::from_json_str(&text)
}

fn parse_values(s: &str) -> Result<Vec<f64>, Error> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>().map_err(|e| Error::Schema {
                pointer: "/values".into(),
                msg: format!("`{t}`: {e}"),
            })
        })
        .collect()
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Analyze { spec, out, seed } => {
            let spec = read_spec(&spec)?;
            let json = run_analysis(&spec, seed)?.to_json()?;
            match out {
                Some(path) => std::fs::write(&path, json + "\n").map_err(|e| Error::Io(e.to_string()))?,
                None => println!("{json}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { filter, json } => {
            let summary = run_verification_suite(filter.as_deref());
            if json {
                let text = serde_json::to_string_pretty(&summary).map_err(|e| Error::Io(e.to_string()))?;
                println!("{text}");
            } else {
                for case in &summary.cases {
                    let tag = match case.status {
                        CheckStatus::Passed => "PASS",
                        CheckStatus::Failed => "FAIL",
                        CheckStatus::Inconclusive => "INCONCLUSIVE",
                    };
                    println!("{tag:<13} {}", case.id);
                    for c in case.checks.iter().filter(|c| c.status != CheckStatus::Passed) {
                        println!(
                            "    {} expected {:?} got {:?} ({})",
                            c.quantity, c.expected, c.actual, c.anchor
                        );
                        if let Some(note) = &c.note {
                            println!("    note: {note}");
                        }
                    }
                }
                println!(
                    "passed {} failed {} inconclusive {}",
                    summary.passed, summary.failed, summary.inconclusive
                );
            }
            Ok(if summary.failed > 0 {
                ExitCode::from(VERIFICATION_FAILED)
            } else {
                ExitCode::SUCCESS
            })
        }
        Command::Sweep { param, values, spec } => {
            let template = read_spec(&spec)?;
            let values = parse_values(&values)?;
            print!("{}", sweep(&param, &values, &template)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Gallery {
            action: GalleryAction::List,
        } => {
            for e in gallery_entries() {
                let params: Vec<String> = e
                    .params
                    .iter()
                    .map(|p| format!("{}={} in [{}, {}]", p.name, p.default, p.min, p.max))
                    .collect();
                println!("{:<16} {:<40} {}", e.name, e.description, params.join(" "));
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => fail(&e),
    }
}
