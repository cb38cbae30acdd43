use clap::Parser;
use crcen_cli::args::{Cli, Command};
use crcen_cli::commands;

fn main() {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Train(args) => commands::cmd_train(args),
        Command::Simulate(args) => commands::cmd_simulate(args),
        Command::Sweep(args) => commands::cmd_sweep(args),
        Command::Bench(args) => commands::cmd_bench(args),
        Command::Verify(args) => commands::cmd_verify(args),
    };
    if let Err(e) = result {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
