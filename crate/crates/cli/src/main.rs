use std::process::ExitCode;

fn main() -> ExitCode {
    let code = match omega_cli::parse_args(std::env::args_os()) {
        Ok(config) => omega_cli::run(config),
        Err(e) => {
            eprintln!("omega: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code)
}
