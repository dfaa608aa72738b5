use clap::Parser;
use rabidimer_cli::cli::{self, Cli};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let args = Cli::parse();
    match cli::run(&args) {
        Ok(summary) => {
            log::info!(
                "{} computed, {} reused, {} failed",
                summary.computed,
                summary.reused,
                summary.failed
            );
            for path in &summary.artifacts {
                println!("{}", path.display());
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
