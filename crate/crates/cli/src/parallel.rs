//! Parallel trial execution with a deterministic reduction.
//!
//! Trials are pure functions of (master_seed, index); results are collected
//! into an index-ordered vector before any aggregation, so the output is
//! bit-identical to the sequential path for every thread count.

use rayon::prelude::*;
use uavnet_core::montecarlo::{run_trial, McConfig, Scheme, TrialDraw};
use uavnet_core::SirSample;

use crate::CliError;

fn pool(threads: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Runtime(format!("thread pool: {e}")))
}

/// All trial samples in index order.
pub fn collect_samples(cfg: &McConfig, threads: usize) -> Result<Vec<SirSample>, CliError> {
    cfg.validate().map_err(|e| CliError::Validation(format!("{e}")))?;
    let pool = pool(threads)?;
    Ok(pool.install(|| (0..cfg.trials).into_par_iter().map(|i| run_trial(cfg, i)).collect()))
}

pub fn collect_sirs(cfg: &McConfig, threads: usize) -> Result<Vec<f64>, CliError> {
    Ok(collect_samples(cfg, threads)?.into_iter().map(|s| s.sir).collect())
}

/// One realization evaluated under several schemes (common random numbers):
/// returns per-trial SIR vectors, one inner entry per scheme.
pub fn collect_compare(
    cfg: &McConfig,
    schemes: &[Scheme],
    threads: usize,
) -> Result<Vec<Vec<f64>>, CliError> {
    cfg.validate().map_err(|e| CliError::Validation(format!("{e}")))?;
    let pool = pool(threads)?;
    let rows: Vec<Vec<f64>> = pool.install(|| {
        (0..cfg.trials)
            .into_par_iter()
            .map(|i| {
                let TrialDraw { deployment, amplitudes, .. } =
                    uavnet_core::montecarlo::draw_trial(cfg, i);
                schemes
                    .iter()
                    .map(|&scheme| {
                        let serving = uavnet_core::montecarlo::select_serving(
                            &deployment,
                            scheme,
                            (0.0, 0.0),
                            cfg.network.alpha,
                            &amplitudes,
                            cfg.conventional_by_distance,
                        );
                        uavnet_core::channel::sir_with_draws(
                            &deployment,
                            &serving,
                            (0.0, 0.0),
                            cfg.network.alpha,
                            &amplitudes,
                        )
                        .sir
                    })
                    .collect()
            })
            .collect()
    });
    // transpose to per-scheme streams, preserving trial order
    let mut per_scheme = vec![Vec::with_capacity(rows.len()); schemes.len()];
    for row in rows {
        for (k, sir) in row.into_iter().enumerate() {
            per_scheme[k].push(sir);
        }
    }
    Ok(per_scheme)
}
