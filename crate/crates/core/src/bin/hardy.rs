use std::process::ExitCode;

fn main() -> ExitCode {
    hardy_core::cli::main_with_args(std::env::args_os())
}
