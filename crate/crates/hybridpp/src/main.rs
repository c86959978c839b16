use std::process::ExitCode;

fn main() -> ExitCode {
    match hybridpp::cli::run(std::env::args_os(), &mut std::io::stdout().lock()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hybridpp: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
