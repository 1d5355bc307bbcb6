use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let (result, json) = pentabell::cli::run_args(std::env::args_os());
    let out = result.stdout(json);
    if !out.is_empty() {
        let _ = std::io::stdout().write_all(out.as_bytes());
    }
    if let Some(e) = &result.error {
        eprintln!("{}", e.trim_end());
    }
    ExitCode::from(result.exit_code as u8)
}
