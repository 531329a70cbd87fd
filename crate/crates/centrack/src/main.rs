use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(centrack::cli::run(std::env::args_os()))
}
