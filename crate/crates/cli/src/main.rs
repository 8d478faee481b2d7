mod args;
mod output;
mod run;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

fn configure_threads() -> Result<(), String> {
    let Ok(value) = std::env::var("STEERKIT_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| format!("STEERKIT_THREADS must be a positive integer, got `{value}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = configure_threads() {
        eprintln!("steerkit: {msg}");
        return ExitCode::from(2);
    }
    let outcome = match &cli.command {
        Command::Steer(c) => run::steer(c),
        Command::Chsh(c) => run::chsh(c),
        Command::Radius(c) => run::radius(c),
        Command::Ellipsoid(c) => run::ellipsoid(c),
        Command::Asym(c) => run::asym(c),
        Command::Sweep(c) => run::sweep(c),
        Command::Region(c) => run::region(c),
    };
    match outcome {
        Ok(text) => {
            let mut out = std::io::stdout().lock();
            if out
                .write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .is_err()
            {
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            let envelope = e.envelope();
            println!("{}", serde_json::to_string(&envelope).unwrap_or_default());
            eprintln!(
                "steerkit: {}",
                envelope["error"]["message"].as_str().unwrap_or("")
            );
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
