use clap::Parser;
use tilecast_cli::{execute, Cli};

fn main() {
    let cli = Cli::parse();
    let mut stdout = std::io::stdout().lock();
    if let Err(err) = execute(cli, &mut stdout) {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}
