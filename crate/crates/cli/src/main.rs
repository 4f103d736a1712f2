use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(comaction_cli::run(std::env::args_os()))
}
