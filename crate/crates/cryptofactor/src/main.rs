use clap::Parser;
use cryptofactor::cli::{run, Cli};

fn main() -> std::process::ExitCode {
    let cli = Cli::parse();
    let (mut out, mut err) = (std::io::stdout().lock(), std::io::stderr().lock());
    match run(cli, &mut out, &mut err) {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(e) => {
            use std::io::Write;
            let _ = writeln!(err, "error: {e:#}");
            std::process::ExitCode::FAILURE
        }
    }
}
