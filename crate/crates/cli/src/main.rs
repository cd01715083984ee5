//! Command-line front end: parse arguments, load the config, fork the
//! seed, and dispatch to one subcommand.

mod args;
mod commands;
mod config;
mod dataset;
mod rundir;

use std::process;

use chunkflow_core::error::Error;

use args::{Command, Invocation};

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) => 2,
        Error::Divergence { .. } | Error::NonFinite(_) | Error::NanGradient(_) => 3,
        Error::InfeasibleMask { .. } => 4,
        _ => 1,
    }
}

fn run(argv: &[String]) -> i32 {
    let cli = match args::parse(argv) {
        Ok(Invocation::Help) => {
            print!("{}", args::usage());
            return 0;
        }
        Ok(Invocation::Run(cli)) => cli,
        Err(e) => {
            eprintln!("error: {e}");
            eprintln!("run 'chunkflow --help' for usage");
            return 2;
        }
    };
    let ctx = match commands::prepare(&cli) {
        Ok(ctx) => ctx,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    let result = match cli.command {
        Command::GenData => commands::gen_data::run(&ctx),
        Command::Pretrain => commands::pretrain::run(&ctx),
        Command::Finetune => commands::finetune::run(&ctx),
        Command::Sample => commands::sample::run(&ctx),
        Command::Invert => commands::invert::run(&ctx),
        Command::OtPlan => commands::otplan::run(&ctx),
        Command::Evaluate => commands::evaluate::run(&ctx),
        Command::MemFit => commands::memfit::run(&ctx),
        Command::Verify => commands::verify::run(&ctx, cli.target.as_deref()),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn main() {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    process::exit(run(&argv));
}
