use std::process::ExitCode;

use clap::Parser;
use ftnn::cli::{self, Cli, THREADS_ENV};

fn main() -> ExitCode {
    let args = Cli::parse();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                    eprintln!("error: could not start {n} worker threads: {e}");
                    return ExitCode::from(3);
                }
            }
            _ => {
                eprintln!("error: {THREADS_ENV} must be a positive integer, got '{v}'");
                return ExitCode::from(2);
            }
        }
    }
    match cli::run(args) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(cli::exit_code(&e) as u8)
        }
    }
}
