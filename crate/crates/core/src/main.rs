use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

fn main() -> ExitCode {
    let mut out = BufWriter::with_capacity(1 << 16, io::stdout());
    let mut err = io::stderr();
    let status = cclsim::cli::run(std::env::args_os(), &mut out, &mut err);
    if out.flush().is_err() && status == 0 {
        return ExitCode::from(1);
    }
    ExitCode::from(status as u8)
}
