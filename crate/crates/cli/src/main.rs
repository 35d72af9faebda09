use clap::{Parser, Subcommand};
use cornerlab::suites::{registry, RunProfile};
use cornerlab_cli::commands::{execute, run_suite, RunError};
use cornerlab_cli::config::{parse_config, ConfigError};
use serde_json::json;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "cornerlab", version, about = "Corner scattering experiments")]
struct Cli {
    /// Worker threads (default: logical cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the experiment described by a TOML config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `output_dir` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the built-in suites.
    ListSuites,
    /// Run one built-in suite.
    RunSuite {
        name: String,
        #[arg(long, default_value = "laptop")]
        profile: String,
        #[arg(long, default_value = "runs")]
        out: PathBuf,
    },
}

fn fail(e: RunError) -> ExitCode {
    eprintln!("{}", e.to_json());
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.jobs {
        if n == 0 {
            return fail(RunError::Config(ConfigError::new("jobs", "must be at least 1")));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().expect("thread pool set once");
    }
    match cli.cmd {
        Cmd::ListSuites => {
            for s in registry() {
                println!("{}\t{}", s.name, s.description);
            }
            ExitCode::SUCCESS
        }
        Cmd::Run { config, out } => {
            let text = match std::fs::read_to_string(&config) {
                Ok(t) => t,
                Err(e) => return fail(RunError::Config(ConfigError::new("config", format!("{}: {e}", config.display())))),
            };
            let cfg = match parse_config(&text) {
                Ok(c) => c,
                Err(e) => return fail(RunError::Config(e)),
            };
            match execute(&cfg, out.as_deref()) {
                Ok(o) => {
                    if let Some(v) = &o.stdout {
                        println!("{v}");
                    }
                    if !o.passed {
                        eprintln!("{}", o.failure_json());
                    }
                    ExitCode::from(o.exit_code() as u8)
                }
                Err(e) => fail(e),
            }
        }
        Cmd::RunSuite { name, profile, out } => {
            let profile: RunProfile = match profile.parse() {
                Ok(p) => p,
                Err(e) => return fail(e.into()),
            };
            match run_suite(&name, profile, &out) {
                Ok((o, dir)) => {
                    for c in &o.checks {
                        println!("{} {} {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
                    }
                    println!("{}", json!({ "suite": o.suite, "passed": o.passed, "run_dir": dir }));
                    if o.passed {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(1)
                    }
                }
                Err(e) => fail(e),
            }
        }
    }
}
