use clap::Parser;

use spinframe_cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        eprintln!("spinframe: {err}");
        std::process::exit(err.exit_code());
    }
}
