use clap::Parser;
use epiconfound::{run, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(&cli, &mut std::io::stdout().lock()) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
