use std::process::ExitCode;

use clap::Parser;
use lumiref_service::cli::{report, Cli, Command};
use lumiref_service::router;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    if !matches!(cli.command, Command::Serve { .. }) {
        let stdout = std::io::stdout();
        return match cli.run_batch(&mut stdout.lock()) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                report(&e, &mut std::io::stderr());
                ExitCode::FAILURE
            }
        };
    }

    let (state, addr) = match cli.serve_state() {
        Ok(v) => v,
        Err(e) => {
            report(&e, &mut std::io::stderr());
            return ExitCode::FAILURE;
        }
    };
    let runtime = tokio::runtime::Runtime::new().expect("tokio runtime");
    runtime.block_on(async move {
        let listener = match tokio::net::TcpListener::bind(addr).await {
            Ok(l) => l,
            Err(e) => {
                eprintln!("error: cannot bind {addr}: {e}");
                return ExitCode::FAILURE;
            }
        };
        log::info!(
            "serving {} images (thesaurus {}) on http://{addr}",
            state.corpus.len(),
            state.thesaurus.version()
        );
        let served = axum::serve(listener, router(state))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await;
        match served {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::FAILURE
            }
        }
    })
}
