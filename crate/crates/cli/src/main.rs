use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use forge_core::recipe::{self, RunError};
use serde_json::Value;

/// Worker count for the audit and construction pool. Unset or 0 means one
/// worker per core.
const WORKERS_ENV: &str = "FORGE_WORKERS";

#[derive(Parser)]
#[command(name = "forge", version, about = "Build and audit explicit unique-neighbor expanders")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the graph a recipe describes and write it with its manifest.
    Construct { recipe: PathBuf },
    /// Run the audits listed in a spec against a graph file.
    Verify { graph: PathBuf, audit: PathBuf },
    /// Build every stage of a recipe into a bundle directory and audit it.
    Pipeline { recipe: PathBuf },
}

fn configure_workers() -> Result<(), String> {
    let Ok(raw) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| format!("{WORKERS_ENV}={raw:?} is not a worker count"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| format!("{WORKERS_ENV}: {e}"))
}

/// First non-null `witness` entry anywhere in an audit's detail.
fn find_witness(v: &Value) -> Option<&Value> {
    match v {
        Value::Object(map) => map
            .get("witness")
            .filter(|w| !w.is_null())
            .or_else(|| map.values().find_map(find_witness)),
        Value::Array(items) => items.iter().find_map(find_witness),
        _ => None,
    }
}

fn fail(e: &RunError) -> ExitCode {
    eprintln!("forge: {e}");
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = configure_workers() {
        eprintln!("forge: {msg}");
        return ExitCode::from(2);
    }
    match cli.command {
        Command::Construct { recipe } => match recipe::construct_file(&recipe) {
            Ok(out) => {
                println!("{}", out.graph_path.display());
                println!("{}", out.manifest_path.display());
                println!("checksum {}", out.checksum);
                ExitCode::SUCCESS
            }
            Err(e) => fail(&e),
        },
        Command::Verify { graph, audit } => match recipe::verify_files(&graph, &audit) {
            Ok((report, path)) => {
                for a in &report.audits {
                    if a.pass {
                        println!("{:<24} pass", a.kind);
                    } else if let Some(w) = find_witness(&a.detail) {
                        println!("{:<24} FAIL witness {w}", a.kind);
                    } else {
                        println!("{:<24} FAIL", a.kind);
                    }
                }
                println!("report {}", path.display());
                ExitCode::from(report.exit_code() as u8)
            }
            Err(e) => fail(&e),
        },
        Command::Pipeline { recipe } => match recipe::pipeline_file(&recipe) {
            Ok(out) => {
                for a in &out.summary.audits {
                    let status = match (a.pass, a.vacuous) {
                        (true, true) => "pass (vacuous)",
                        (true, false) => "pass",
                        (false, _) => "FAIL",
                    };
                    println!("{:<36} {status}", a.label);
                }
                println!("bundle {}", out.dir.display());
                ExitCode::SUCCESS
            }
            Err(e) => fail(&e),
        },
    }
}
