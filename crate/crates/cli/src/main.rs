use clap::Parser;

fn main() {
    let cli = xxchain::Cli::parse();
    if let Err(e) = xxchain::run(cli) {
        eprintln!("xxchain: {}", e);
        std::process::exit(xxchain::exit_code(&e));
    }
}
