use std::process::ExitCode;

fn main() -> ExitCode {
    longtail_lab::cli::main_with_args(std::env::args_os())
}
