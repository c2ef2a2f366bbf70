use clap::Parser;

use dyadlab::cli::{exit_code, replay_line, run, Cli, EXIT_USAGE};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let code = match run(&cli, &replay_line(&args)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("dyadlab: {e}");
            exit_code(&e)
        }
    };
    std::process::exit(code);
}
