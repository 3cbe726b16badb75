use std::path::Path;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use uavnet_cli::config::{builtin, load_config};
use uavnet_cli::{acceptance, csvio, runners, CliError};

#[derive(Parser)]
#[command(
    name = "uavnet",
    version,
    about = "UAV-swarm CoMP network simulator: formation/tracking control and coverage/rate evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario: a built-in preset (fig4, fig5, fig6, fig7, fig8),
    /// `verify`, or a path to a TOML config.
    Run {
        /// Scenario name or config path.
        scenario: String,
        /// Master seed override.
        #[arg(long)]
        seed: Option<u64>,
        /// Monte-Carlo trial count override.
        #[arg(long)]
        trials: Option<u64>,
        /// Output directory override.
        #[arg(long)]
        out: Option<String>,
        /// Key-path overrides, e.g. --set network.alpha=3.0 (repeatable).
        #[arg(long = "set", value_parser = parse_kv)]
        sets: Vec<(String, String)>,
        /// Worker threads (0 = all cores). Results are identical for any
        /// value.
        #[arg(long, default_value_t = 0)]
        threads: usize,
    },
    /// Sample a deployment and write it as CSV (`id,x_m,y_m,h_m`), or check
    /// an existing file.
    Deployment {
        /// Validate this CSV instead of sampling.
        #[arg(long)]
        check: Option<String>,
        #[arg(long, default_value_t = 16.0)]
        density_per_km2: f64,
        #[arg(long, default_value_t = 3000.0)]
        radius_m: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value = "deployment.csv")]
        out: String,
    },
}

fn parse_kv(raw: &str) -> Result<(String, String), String> {
    match raw.split_once('=') {
        Some((k, v)) if !k.is_empty() => Ok((k.to_string(), v.to_string())),
        _ => Err(format!("expected key.path=value, got \"{raw}\"")),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // help/version are not errors
            if e.use_stderr() {
                eprintln!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { scenario, seed, trials, out, sets, threads } => {
            if scenario == "verify" {
                let results = acceptance::run_all(threads);
                let failed: Vec<String> = results
                    .iter()
                    .filter(|r| !r.passed)
                    .map(|r| format!("criterion {}", r.id))
                    .collect();
                if failed.is_empty() {
                    println!("all criteria passed");
                    return Ok(());
                }
                return Err(CliError::ToleranceNotMet(failed.join(", ")));
            }
            let texts: Vec<String> = match builtin(&scenario) {
                Some(presets) => presets.iter().map(|s| s.to_string()).collect(),
                None => {
                    let path = Path::new(&scenario);
                    if !path.exists() {
                        return Err(CliError::Validation(format!(
                            "\"{scenario}\" is neither a built-in scenario (fig4, fig5, fig6, \
                             fig7, fig8, verify) nor a config file"
                        )));
                    }
                    vec![std::fs::read_to_string(path)?]
                }
            };
            for text in texts {
                let cfg = load_config(&text, &sets, seed, trials, out.as_deref())?;
                let outcome = runners::run_scenario(&cfg, threads)?;
                println!("wrote {} in {}/", outcome.artifacts.join(", "), cfg.out_dir);
            }
            Ok(())
        }
        Command::Deployment { check, density_per_km2, radius_m, seed, out } => {
            if let Some(path) = check {
                let dep =
                    csvio::read_deployment(Path::new(&path), radius_m, density_per_km2 * 1e-6)?;
                println!("{}: {} UAVs, heights {:?}", path, dep.len(), dep.height_law);
                return Ok(());
            }
            let dep = uavnet_core::geometry::Deployment::sample(
                density_per_km2 * 1e-6,
                radius_m,
                uavnet_core::geometry::HeightLaw::DEFAULT,
                seed,
            )
            .map_err(|e| CliError::Validation(format!("{e}")))?;
            csvio::write_deployment(Path::new(&out), &dep)?;
            println!("wrote {} UAVs to {out}", dep.len());
            Ok(())
        }
    }
}
