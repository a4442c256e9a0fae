use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let (status, output) = openworld_cli::run(std::env::args_os());
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(output.as_bytes());
    let _ = out.flush();
    ExitCode::from(status as u8)
}
