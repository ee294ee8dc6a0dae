use clap::Parser;

fn main() {
    let cli = gnoop_cli::Cli::parse();
    std::process::exit(gnoop_cli::run(&cli));
}
