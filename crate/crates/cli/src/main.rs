use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use curvedcc::runner::{run, Command, ExitStatus, ExperimentConfig, RunOptions};
use curvedcc::CcError;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Cmd {
    SolveGeodesic,
    SolvePlanar,
    Index,
    DynamicsVerify,
    Compactness,
    PalmoreCount,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::SolveGeodesic => Command::SolveGeodesic,
            Cmd::SolvePlanar => Command::SolvePlanar,
            Cmd::Index => Command::Index,
            Cmd::DynamicsVerify => Command::DynamicsVerify,
            Cmd::Compactness => Command::Compactness,
            Cmd::PalmoreCount => Command::PalmoreCount,
        }
    }
}

/// Central configurations on S³ and H³.
///
/// Exit status: 0 all assertions pass, 1 an assertion failed,
/// 2 configuration error, 3 numerical failure.
#[derive(Debug, Parser)]
#[command(name = "curvedcc", version)]
struct Cli {
    command: Cmd,
    /// TOML experiment file.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed in the file.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for `envelope.json` and CSV tables.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; 1 runs sequentially.
    #[arg(long)]
    jobs: Option<usize>,
}

fn fail(e: &CcError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(ExitStatus::for_error(e).code() as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(ExitStatus::ConfigError.code() as u8);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    if cli.jobs == Some(0) {
        return fail(&CcError::Config("--jobs must be at least 1".into()));
    }
    let cfg = match ExperimentConfig::load(&cli.config) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    let command = Command::from(cli.command);
    if cfg.command != command {
        return fail(&CcError::Config(format!(
            "{} describes `{}` but `{}` was requested",
            cli.config.display(),
            cfg.command,
            command
        )));
    }
    let opts = RunOptions {
        seed: cli.seed,
        out_dir: cli.out,
        jobs: cli.jobs,
    };
    let out = match run(&cfg, &opts) {
        Ok(o) => o,
        Err(e) => return fail(&e),
    };
    let env = &out.envelope;
    for a in &env.assertions {
        let verdict = if a.passed { "PASS" } else { "FAIL" };
        match &a.case {
            Some(c) => println!("{verdict} {} [{c}] {}", a.name, a.detail),
            None => println!("{verdict} {} {}", a.name, a.detail),
        }
    }
    for c in env.cases.iter().filter(|c| c.error.is_some()) {
        eprintln!("case {}: {}", c.case.label, c.error.as_deref().unwrap_or_default());
    }
    let failed = env.failed().count();
    println!(
        "{}: {} assertions, {failed} failed, {:.2} s",
        env.command,
        env.assertions.len(),
        env.wall_time_s
    );
    if let Some(dir) = &out.out_dir {
        println!("results in {}", dir.display());
    }
    ExitCode::from(env.status.code() as u8)
}
