use clap::Parser;
use diffyw::cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    if let Err(err) = run(cli, &mut stdout.lock()) {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}
