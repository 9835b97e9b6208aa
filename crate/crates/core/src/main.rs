use std::process::ExitCode;

fn main() -> ExitCode {
    fp_expander::cli::run(std::env::args_os())
}
