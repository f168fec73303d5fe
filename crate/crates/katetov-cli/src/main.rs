use clap::Parser;

use katetov_cli::run::{emit, execute, Cli, Outcome};

fn main() {
    let cli = Cli::parse();
    match execute(&cli.command) {
        Ok(artifact) => {
            if let Err(e) = emit(&artifact, cli.format, cli.out.as_deref()) {
                eprintln!("error: {e}");
                std::process::exit(Outcome::Malformed as i32);
            }
        }
        Err(err) => {
            eprintln!("error: {}", err.message);
            std::process::exit(err.outcome as i32);
        }
    }
}
