use clap::Parser;

fn main() {
    let cli = roughvol::cli::Cli::parse();
    if let Err(e) = roughvol::cli::run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
