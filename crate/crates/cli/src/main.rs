use std::process::ExitCode;

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let code = burgers_cli::main_with_args(&argv);
    ExitCode::from(code)
}
