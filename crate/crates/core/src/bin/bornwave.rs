use std::path::PathBuf;
use std::process::ExitCode;

use bornwave::scenario::{self, RunOptions};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bornwave", version, about = "Run bundled or file-based scenarios and summarise their bundles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file or bundled id and write its bundle.
    Run {
        scenario: String,
        /// `key.path=value`, applied to the scenario before validation.
        #[arg(long = "override", value_name = "K=V")]
        overrides: Vec<String>,
        #[arg(long)]
        json: bool,
        #[arg(long, value_name = "N")]
        threads: Option<usize>,
        /// Output root; the bundle goes to `<DIR>/<id>`. Defaults to $BORNWAVE_OUT.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// List bundled scenarios whose id contains FILTER.
    List {
        filter: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// Summarise a bundle directory and write its long-format CSV.
    Report {
        dir: PathBuf,
        #[arg(long)]
        json: bool,
    },
}

fn fail(e: bornwave::Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(scenario::exit_code(&e) as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { scenario: source, overrides, json, threads, out } => {
            let s = match scenario::load(&source, &overrides) {
                Ok(s) => s,
                Err(e) => return fail(e),
            };
            let dir = scenario::bundle_dir(&s, out.as_deref());
            let b = match scenario::run_to_dir(&s, RunOptions { threads }, &dir) {
                Ok(b) => b,
                Err(e) => return fail(e),
            };
            if json {
                let summary = serde_json::json!({
                    "id": s.id,
                    "passed": b.passed,
                    "bundle": dir,
                    "checks": b.checks,
                    "threads": b.provenance.threads,
                });
                println!("{summary:#}");
            } else {
                for c in &b.checks {
                    let mark = if c.passed { "ok  " } else { "FAIL" };
                    println!("{mark} {:<36} {:.4e}", c.check, c.value);
                }
                println!("{}: {} ({})", s.id, if b.passed { "passed" } else { "failed" }, dir.display());
            }
            ExitCode::from(if b.passed { scenario::EXIT_OK } else { scenario::EXIT_TOLERANCE } as u8)
        }
        Command::List { filter, json } => match scenario::list_scenarios(filter.as_deref()) {
            Ok(rows) => {
                if json {
                    let v: Vec<_> = rows.iter().map(|(id, d)| serde_json::json!({ "id": id, "description": d })).collect();
                    println!("{}", serde_json::Value::Array(v));
                } else {
                    for (id, d) in rows {
                        println!("{id:<24} {d}");
                    }
                }
                ExitCode::SUCCESS
            }
            Err(e) => fail(e),
        },
        Command::Report { dir, json } => match scenario::report(&dir) {
            Ok(r) => {
                if json {
                    println!("{}", serde_json::to_string_pretty(&r).expect("summary serialises"));
                } else {
                    print!("{}", r.render());
                }
                ExitCode::from(if r.passed { scenario::EXIT_OK } else { scenario::EXIT_TOLERANCE } as u8)
            }
            Err(e) => fail(e),
        },
    }
}
