use std::process::ExitCode;

use clap::Parser;
use zpred::cli::{run, Cli, EXIT_INPUT};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let mut out = std::io::BufWriter::new(stdout.lock());
    let code = match run(cli, &mut out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("zpred: {e}");
            EXIT_INPUT
        }
    };
    drop(out);
    ExitCode::from(code as u8)
}
