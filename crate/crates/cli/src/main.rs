use clap::Parser;

use choquard_lab::{run, Cli, Status};

fn main() {
    let cli = Cli::parse();
    let status = match run(&cli) {
        Ok(status) => status,
        Err(err) => {
            eprintln!("error: {err:#}");
            Status::from_error(&err)
        }
    };
    std::process::exit(status.code());
}
