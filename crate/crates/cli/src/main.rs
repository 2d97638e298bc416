use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let outcome = beliefgraph_cli::run(std::env::args_os(), &mut std::io::stdin().lock());
    // a closed pipe is not worth reporting
    let _ = std::io::stdout().write_all(&outcome.stdout);
    let _ = std::io::stderr().write_all(&outcome.stderr);
    ExitCode::from(outcome.code as u8)
}
