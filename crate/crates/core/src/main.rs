use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(wittcycle::cli::run())
}
