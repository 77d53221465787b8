use clap::Parser;

fn main() {
    let cli = topowg::Cli::parse();
    std::process::exit(topowg::run(cli));
}
