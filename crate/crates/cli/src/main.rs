use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use flatri::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut out = run(&cli);
    if let (Some(path), Some(text)) = (&cli.transcript, &out.transcript) {
        if let Err(e) = std::fs::write(path, text) {
            eprintln!("flatri: cannot write transcript {}: {}", path.display(), e);
            out.code = 2;
            out.doc["exit_code"] = 2.into();
        }
    }
    let _ = std::io::stdout().write_all(out.render(cli.format).as_bytes());
    ExitCode::from(out.code as u8)
}
