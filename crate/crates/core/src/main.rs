use std::process::ExitCode;

fn main() -> ExitCode {
    mdlquad::cli::main_with_args(std::env::args_os())
}
