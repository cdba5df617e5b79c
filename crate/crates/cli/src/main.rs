use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(blindpad::commands::main_with(std::env::args_os()))
}
