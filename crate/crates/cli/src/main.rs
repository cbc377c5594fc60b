use clap::Parser;

fn main() {
    let cli = robinpol_cli::Cli::parse();
    std::process::exit(robinpol_cli::run_cli(cli));
}
