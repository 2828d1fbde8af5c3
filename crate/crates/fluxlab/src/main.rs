use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fluxlab::{emit_report, load_config, registry, resolve, run_suite, Format};

#[derive(Parser)]
#[command(name = "fluxlab", version, about = "Numerical checks of flux and displacement geometry on the flat torus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a suite and write `<stem>.csv` and `<stem>.json`.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the configured suite; `all` runs every suite.
        #[arg(long)]
        suite: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Grid points per axis.
        #[arg(long)]
        mesh: Option<usize>,
    },
    /// Print the registered suites.
    ListSuites,
    /// Print what a suite checks.
    DescribeSuite { name: String },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<bool, fluxlab::Error> {
    match cli.command {
        Command::ListSuites => {
            let width = registry().iter().map(|s| s.name.len()).max().unwrap_or(0);
            for s in registry() {
                println!("{:width$}  {}", s.name, s.summary);
            }
            Ok(true)
        }
        Command::DescribeSuite { name } => {
            for s in resolve(&name)? {
                println!("{}: {}", s.name, s.summary);
                for a in s.anchors {
                    println!("  - {a}");
                }
            }
            Ok(true)
        }
        Command::Run { config, suite, out, seed, mesh } => {
            let mut cfg = load_config(&config)?;
            if let Some(s) = suite {
                cfg.suite = s;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(n) = mesh {
                cfg.mesh.n = n;
            }
            if let Some(d) = out {
                cfg.output.dir = d;
            }
            let report = run_suite(&cfg)?;
            let stem = cfg.output.stem.clone().unwrap_or_else(|| report.suite.clone());
            for format in [Format::Csv, Format::Json] {
                let path = emit_report(&report, format, &cfg.output.dir, &stem)?;
                println!("wrote {}", path.display());
            }
            for r in report.failures() {
                let value = r.value.map(|v| format!("{v:.6e}")).unwrap_or_else(|| "error".into());
                println!("FAIL {}: {value} {} {:.3e} {}", r.check_id, r.relation.symbol(), r.tolerance, r.note);
            }
            let failed = report.failures().count();
            println!(
                "{} {}: {} rows, {failed} failed",
                if report.pass { "PASS" } else { "FAIL" },
                report.suite,
                report.rows.len()
            );
            Ok(report.pass)
        }
    }
}
