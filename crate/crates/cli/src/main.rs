use clap::Parser;
use trisw_cli::{exit_code, run, Cli};

fn main() {
    if let Err(e) = run(Cli::parse()) {
        eprintln!("trisw: {e}");
        std::process::exit(exit_code(&e));
    }
}
