use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    if let Ok(v) = std::env::var("FANKIT_BUDGET") {
        match v.trim().parse::<u64>() {
            Ok(n) if n > 0 => fankit::budget::set_limit(n),
            _ => {
                eprintln!("error: FANKIT_BUDGET must be a positive integer, got {v:?}");
                return ExitCode::from(fankit::cli::EXIT_USAGE as u8);
            }
        }
    }
    let out = fankit::cli::run(std::env::args_os());
    let _ = std::io::stdout().write_all(out.stdout.as_bytes());
    let _ = std::io::stderr().write_all(out.stderr.as_bytes());
    ExitCode::from(out.code as u8)
}
