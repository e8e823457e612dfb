use std::process::ExitCode;

use clap::Parser;
use fdr_bandit::cli::{execute, Cli, EXIT_VALIDATION};
use fdr_bandit::ErrorMode;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match execute(&cli.command) {
        Ok(out) => {
            for p in &out.csv_paths {
                println!("wrote {}", p.display());
            }
            println!("wrote {}", out.summary_path.display());
            let fwer = out.summary.config.engine.error_mode == ErrorMode::Fwer;
            for panel in &out.summary.panels {
                for r in &panel.results {
                    let reached = r
                        .samples_to_tpr
                        .map_or_else(|| "not reached".to_owned(), |s| s.to_string());
                    let ratio = r.ratio_to_ucb.map_or_else(String::new, |x| format!(" ({x:.2}x ucb)"));
                    let max_fdp = r.metrics.curve.iter().map(|c| c.fdp.mean).fold(0.0, f64::max);
                    let mut line = format!(
                        "{:<16} {:<8} samples to TPR {:.3}: {reached}{ratio}  max FDP {max_fdp:.3}",
                        panel.panel.name, r.algo, panel.target_tpr
                    );
                    if fwer {
                        line += &format!("  R-FWER {:.3}", r.metrics.r_fwer.mean);
                    }
                    println!("{line}");
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
