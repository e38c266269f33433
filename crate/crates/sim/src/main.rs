use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use pouw_core::model::DEFAULT_TX_CAP;
use pouw_core::{Digest, PublicKey};
use pouw_sim::cli::{goldens_report, inspect, verify, InspectTarget};
use pouw_sim::{ScenarioConfig, Simulation};

#[derive(Parser)]
#[command(name = "pouw", about = "Proof-of-useful-work chain simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and print (or write) its JSON report.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
        /// Also write the RA's chain to this directory.
        #[arg(long)]
        store: Option<PathBuf>,
    },
    /// Show the tip, a block or an account from a stored chain.
    Inspect {
        #[arg(long)]
        store: PathBuf,
        #[arg(long, conflicts_with_all = ["tip", "account"])]
        block: Option<String>,
        #[arg(long)]
        tip: bool,
        #[arg(long, conflicts_with = "tip")]
        account: Option<String>,
    },
    /// Replay a stored chain; exit code 1 on any violation.
    Verify {
        #[arg(long)]
        store: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TX_CAP)]
        tx_cap: usize,
    },
    /// Re-derive the golden vectors.
    Goldens,
}

fn fail(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::FAILURE
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run { config, report, store } => {
            let text = match std::fs::read_to_string(&config) {
                Ok(t) => t,
                Err(e) => return fail(format!("{}: {e}", config.display())),
            };
            let cfg = match ScenarioConfig::from_json(&text) {
                Ok(c) => c,
                Err(e) => return fail(e),
            };
            let mut sim = match Simulation::new(cfg) {
                Ok(s) => s,
                Err(e) => return fail(e),
            };
            sim.run();
            if let Some(dir) = store {
                if let Err(e) = sim.export_store(&dir) {
                    return fail(e);
                }
            }
            let json = sim.report().to_json();
            match report {
                Some(path) => {
                    if let Err(e) = std::fs::write(&path, json + "\n") {
                        return fail(format!("{}: {e}", path.display()));
                    }
                }
                None => println!("{json}"),
            }
            ExitCode::SUCCESS
        }
        Command::Inspect { store, block, tip, account } => {
            let target = match (block, account) {
                (Some(b), _) => match Digest::from_hex(&b) {
                    Ok(d) => InspectTarget::Block(d),
                    Err(e) => return fail(format!("block hash: {e}")),
                },
                (_, Some(a)) => match PublicKey::from_hex(&a) {
                    Ok(k) => InspectTarget::Account(k),
                    Err(e) => return fail(format!("account: {e}")),
                },
                _ => {
                    let _ = tip;
                    InspectTarget::Tip
                }
            };
            match inspect(&store, &target) {
                Ok(v) => {
                    println!("{}", serde_json::to_string_pretty(&v).expect("json"));
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
        Command::Verify { store, tx_cap } => match verify(&store, tx_cap) {
            Ok(out) => {
                println!("blocks: {}", out.blocks);
                for p in &out.problems {
                    println!("violation: {p}");
                }
                if out.ok() {
                    println!("ok");
                    ExitCode::SUCCESS
                } else {
                    ExitCode::FAILURE
                }
            }
            Err(e) => fail(e),
        },
        Command::Goldens => {
            let (lines, all) = goldens_report();
            for l in lines {
                println!("{l}");
            }
            if all {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
