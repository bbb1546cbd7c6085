use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand, ValueEnum};

mod check;
mod load;
mod sim;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Dot,
    Text,
}

#[derive(Parser)]
#[command(name = "hqs", version, about = "Heterogeneous quorum system toolkit")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(clap::Args)]
struct SystemArgs {
    /// System JSON file, or `fixture:NAME`.
    #[arg(long)]
    system: String,
    /// Comma-separated Byzantine processes, replacing the file's set.
    #[arg(long)]
    attack: Option<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check quorum system properties. Exit code 1 when one fails.
    Check {
        #[command(flatten)]
        sys: SystemArgs,
        /// Check that this set is outlived.
        #[arg(long)]
        outlived: Option<String>,
        #[arg(long)]
        consistency: bool,
        #[arg(long)]
        inclusion: bool,
        #[arg(long)]
        sharing: bool,
        /// Processes that must each have a quorum inside `--at`.
        #[arg(long)]
        availability: Option<String>,
        /// Set that must be available inside itself.
        #[arg(long)]
        inside: Option<String>,
        /// Target set for consistency, inclusion and availability
        /// (defaults to the well-behaved processes).
        #[arg(long)]
        at: Option<String>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Quorum graph with its sink components.
    Graph {
        #[command(flatten)]
        sys: SystemArgs,
        #[arg(long, value_enum, default_value = "dot")]
        format: Format,
    },
    /// Minimal quorums, small blocking sets and maximal outlived sets.
    Enumerate {
        #[command(flatten)]
        sys: SystemArgs,
        /// Largest blocking set size listed.
        #[arg(long, default_value_t = 2)]
        k: usize,
        /// Refuse outlived enumeration above this many well-behaved processes.
        #[arg(long, default_value_t = 16)]
        bound: usize,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Run a scenario file. Exit code 1 when a probe fires or the step cap
    /// is hit.
    Simulate {
        scenario: PathBuf,
        /// Replace the scenario's system.
        #[arg(long)]
        system: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        /// Run this many consecutive seeds.
        #[arg(long, default_value_t = 1)]
        seeds: u64,
        /// Write the JSONL trace here.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Write every named fixture as JSON into a directory.
    Fixtures {
        #[arg(long, default_value = "fixtures")]
        out: PathBuf,
    },
}

fn system(a: &SystemArgs) -> Result<hqs_core::SystemDoc> {
    let mut doc = load::system(&a.system)?;
    if let Some(att) = &a.attack {
        load::override_attack(&mut doc, att)?;
    }
    Ok(doc)
}

fn opt_set(doc: &hqs_core::SystemDoc, s: &Option<String>) -> Result<Option<hqs_core::ProcessSet>> {
    s.as_deref().map(|s| load::set(doc, s)).transpose()
}

fn run(cli: Cli) -> Result<bool> {
    match cli.cmd {
        Cmd::Check {
            sys,
            outlived,
            consistency,
            inclusion,
            sharing,
            availability,
            inside,
            at,
            format,
        } => {
            let doc = system(&sys)?;
            let want = check::Wanted {
                consistency,
                inclusion,
                sharing,
                availability: opt_set(&doc, &availability)?,
                inside: opt_set(&doc, &inside)?,
                outlived: opt_set(&doc, &outlived)?,
                at: opt_set(&doc, &at)?,
            };
            check::check(&doc, want, format)
        }
        Cmd::Graph { sys, format } => {
            check::graph(&system(&sys)?, format)?;
            Ok(true)
        }
        Cmd::Enumerate { sys, k, bound, format } => {
            check::enumerate(&system(&sys)?, k, bound, format)?;
            Ok(true)
        }
        Cmd::Simulate {
            scenario,
            system,
            seed,
            seeds,
            trace,
            format,
        } => sim::simulate(
            &sim::SimArgs {
                scenario,
                system,
                seed,
                seeds,
                trace,
            },
            format,
        ),
        Cmd::Fixtures { out } => {
            std::fs::create_dir_all(&out)?;
            for (name, doc) in hqs_core::fixtures::library() {
                let path = out.join(format!("{name}.json"));
                std::fs::write(&path, hqs_core::write_system(&doc))?;
                eprintln!("wrote {}", path.display());
            }
            Ok(true)
        }
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
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
