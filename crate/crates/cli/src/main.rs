use clap::error::ErrorKind;
use clap::Parser;

use levelk_cli::args::{Cli, Command};
use levelk_cli::{cmd_audit, cmd_entropy_profile, cmd_run, cmd_sweep};

fn main() {
    env_logger::init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            e.exit();
        }
        Err(e) => {
            // usage problems are config errors: exit 1
            eprint!("{e}");
            std::process::exit(1);
        }
    };

    let result = match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::EntropyProfile(args) => cmd_entropy_profile(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Audit(args) => cmd_audit(args),
    };

    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
