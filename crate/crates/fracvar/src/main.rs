use clap::error::ErrorKind;
use clap::Parser;
use fracvar::run::{emit, out_path};
use fracvar::{acceptance, Cli, Command};

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                std::process::exit(0);
            }
            eprintln!("{e}");
            std::process::exit(1);
        }
    };
    match &cli.command {
        Command::Selftest => {
            let results = acceptance::run_all();
            let mut all_ok = true;
            for c in &results {
                let status = if c.passed { "PASS" } else { "FAIL" };
                println!("{status}  {} — {}", c.name, c.detail);
                all_ok &= c.passed;
            }
            std::process::exit(if all_ok { 0 } else { 2 });
        }
        cmd => match fracvar::execute(cmd) {
            Ok(body) => {
                if let Err(e) = emit(out_path(cmd), &body) {
                    eprintln!("error: {e}");
                    std::process::exit(e.exit_code());
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                std::process::exit(e.exit_code());
            }
        },
    }
}
