mod args;
mod config;
mod exit;
mod report;
mod run;
mod table;

use clap::error::ErrorKind;
use clap::Parser;
use std::process::ExitCode;

use args::{Cli, Command};

fn apply_thread_cap() {
    if let Ok(raw) = std::env::var("SPIN_TOOLKIT_THREADS") {
        match raw.trim().parse::<usize>() {
            Ok(0) => {} // 0 = auto
            Ok(n) => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            Err(_) => eprintln!("warning: ignoring non-numeric SPIN_TOOLKIT_THREADS='{raw}'"),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    apply_thread_cap();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    ExitCode::SUCCESS
                }
                _ => {
                    eprint!("{e}");
                    ExitCode::from(1)
                }
            };
        }
    };

    let result = match &cli.command {
        Command::Levels(a) => run::run_levels(a),
        Command::Spectrum(a) => run::run_spectrum(a),
        Command::Sweep(a) => run::run_sweep(a),
        Command::RateSim(a) => run::run_rate_sim(a),
        Command::RamseySim(a) => run::run_ramsey_sim(a),
        Command::T1Sim(a) => run::run_t1_sim(a),
        Command::FitZfs(a) => run::run_fit_zfs(a),
        Command::FitLifetime(a) => run::run_fit_lifetime(a),
        Command::FitT1(a) => run::run_fit_t1(a),
        Command::FitRamsey(a) => run::run_fit_ramsey(a),
        Command::DwFactor(a) => run::run_dw_factor(a),
        Command::Presets(a) => run::run_presets(a),
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
