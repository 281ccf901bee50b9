use std::io::Write;

use clap::Parser;
use gtw_cli::{run, Args};

fn main() {
    let args = Args::parse();
    match run(&args) {
        Ok(outcome) => {
            // a closed pipe on stdout is not worth a panic
            let _ = writeln!(
                std::io::stdout(),
                "{}",
                serde_json::to_string_pretty(&outcome).expect("outcome serializes")
            );
        }
        Err(e) => {
            let report = serde_json::json!({
                "error": e.kind(),
                "message": e.to_string(),
                "exit_code": e.exit_code(),
            });
            eprintln!("{report}");
            std::process::exit(e.exit_code());
        }
    }
}
