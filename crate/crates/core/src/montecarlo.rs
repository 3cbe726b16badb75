//! Monte-Carlo estimation of coverage probability and ergodic rate.
//!
//! Every trial is a pure function of (master_seed, trial_index): it samples
//! one deployment on a disk 20% wider than the declared region (edge-effect
//! guard), draws one fading amplitude per UAV, selects the serving set per
//! scheme, and returns the SIR. Selection happens after all draws, so every
//! scheme sees common random numbers and scheme comparisons are low-variance
//! and exactly monotone where they should be. Aggregation always runs in
//! trial-index order, which makes results bit-identical no matter how the
//! trials were scheduled.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::analytic::NetworkParams;
use crate::channel::{sample_nakagami_amplitude, sir_with_draws, SirSample};
use crate::geometry::{sample_heights, sample_ppp, select_comp_set, Deployment};
// in test builds std's inherent float methods shadow this trait
#[cfg_attr(test, allow(unused_imports))]
use crate::math::FloatExt;
use crate::rng::Rng;

#[derive(Clone, Debug, PartialEq)]
pub enum McError {
    Config(String),
}

impl core::fmt::Display for McError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            McError::Config(m) => write!(f, "config error: {m}"),
        }
    }
}

impl core::error::Error for McError {}

/// Serving-set selection scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    /// Four horizontally-nearest UAVs (the Delaunay-cell cooperation set).
    ProposedDelaunay4,
    /// Top-n UAVs by instantaneous received power (or by 3D distance when
    /// the config selects the geometric variant), n in 1..=4.
    Conventional { n: usize },
    /// Single horizontally-nearest UAV, no cooperation.
    NoComp,
}

impl Scheme {
    pub fn serving_size(&self) -> usize {
        match *self {
            Scheme::ProposedDelaunay4 => 4,
            Scheme::Conventional { n } => n,
            Scheme::NoComp => 1,
        }
    }

    pub fn label(&self) -> &'static str {
        match *self {
            Scheme::ProposedDelaunay4 => "proposed",
            Scheme::Conventional { n: 1 } => "conventional_1",
            Scheme::Conventional { n: 2 } => "conventional_2",
            Scheme::Conventional { n: 3 } => "conventional_3",
            Scheme::Conventional { n: _ } => "conventional_4",
            Scheme::NoComp => "no_comp",
        }
    }
}

/// Trial harness configuration.
#[derive(Clone, Debug)]
pub struct McConfig {
    pub trials: u64,
    pub master_seed: u64,
    pub network: NetworkParams,
    /// Declared region radius; sampling uses 1.2x this to blunt edge bias.
    pub region_radius: f64,
    pub scheme: Scheme,
    /// Linear SIR thresholds, strictly increasing.
    pub gamma_grid: Vec<f64>,
    /// Rank conventional schemes by pure 3D distance instead of received
    /// power.
    pub conventional_by_distance: bool,
}

impl McConfig {
    pub fn validate(&self) -> Result<(), McError> {
        if self.trials == 0 {
            return Err(McError::Config(String::from("at least one trial required")));
        }
        if !(self.region_radius > 0.0) {
            return Err(McError::Config(format!(
                "region radius must be positive, got {}",
                self.region_radius
            )));
        }
        if let Scheme::Conventional { n } = self.scheme {
            if !(1..=4).contains(&n) {
                return Err(McError::Config(format!("conventional n must be in 1..=4, got {n}")));
            }
        }
        for w in self.gamma_grid.windows(2) {
            if w[1] <= w[0] {
                return Err(McError::Config(String::from(
                    "gamma grid must be strictly increasing",
                )));
            }
        }
        if self.gamma_grid.iter().any(|&g| g <= 0.0) {
            return Err(McError::Config(String::from(
                "gamma grid must be positive (linear scale)",
            )));
        }
        self.network.validate().map_err(|e| McError::Config(format!("{e}")))
    }

    pub fn sampling_radius(&self) -> f64 {
        1.2 * self.region_radius
    }
}

/// A metric value with its Monte-Carlo standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricEstimate {
    pub value: f64,
    pub std_err: f64,
    pub trials_used: u64,
}

/// Serving-set selection on a fixed realization.
pub fn select_serving(
    dep: &Deployment,
    scheme: Scheme,
    ue: (f64, f64),
    alpha: f64,
    amplitudes: &[f64],
    by_distance: bool,
) -> Vec<usize> {
    match scheme {
        Scheme::ProposedDelaunay4 => select_comp_set(dep, ue)
            .expect("trial deployments carry at least 4 UAVs")
            .uav_indices
            .to_vec(),
        Scheme::NoComp => {
            let mut best = (f64::INFINITY, usize::MAX);
            for i in 0..dep.len() {
                let (x, y) = dep.planar[i];
                let d = (x - ue.0).hypot(y - ue.1);
                if (d, i) < best {
                    best = (d, i);
                }
            }
            alloc::vec![best.1]
        }
        Scheme::Conventional { n } => {
            // rank by instantaneous received power d^-α·a² (descending), or
            // by 3D distance (ascending) in the geometric variant
            let mut keyed: Vec<(f64, usize)> = (0..dep.len())
                .map(|i| {
                    let d = dep.distance_3d(i, ue);
                    let key = if by_distance {
                        d
                    } else {
                        -(d.powf(-alpha) * amplitudes[i] * amplitudes[i])
                    };
                    (key, i)
                })
                .collect();
            keyed.sort_by(|a, b| a.partial_cmp(b).unwrap());
            keyed.iter().take(n).map(|&(_, i)| i).collect()
        }
    }
}

/// Everything one realization produces, before scheme selection.
pub struct TrialDraw {
    pub deployment: Deployment,
    pub amplitudes: Vec<f64>,
    /// Deployments redrawn because they were too small to interfere.
    pub resamples: u32,
}

/// Samples the deployment and fading of trial `index`, redrawing (with a
/// derived sub-seed, counted) in the astronomically rare case of fewer than
/// five UAVs. The minimum is scheme-independent so common random numbers
/// survive scheme comparisons.
pub fn draw_trial(cfg: &McConfig, index: u64) -> TrialDraw {
    let radius = cfg.sampling_radius();
    let mut resamples = 0u32;
    loop {
        assert!(
            resamples < 10_000,
            "trial {index} cannot find 5 UAVs; density * area is far too small"
        );
        let salt = (resamples as u64).wrapping_mul(0xD6E8_FEB8_6659_FD93);
        let mut rng = Rng::substream(cfg.master_seed ^ salt, index);
        let planar = sample_ppp(cfg.network.density, radius, &mut rng);
        let heights = sample_heights(planar.len(), cfg.network.height_law, &mut rng);
        if planar.len() >= 5 {
            let n = planar.len();
            let deployment = Deployment {
                planar,
                heights,
                region_radius: radius,
                density: cfg.network.density,
                height_law: cfg.network.height_law,
                seed: cfg.master_seed,
            };
            let amplitudes =
                (0..n).map(|_| sample_nakagami_amplitude(cfg.network.fading, &mut rng)).collect();
            return TrialDraw { deployment, amplitudes, resamples };
        }
        resamples += 1;
    }
}

/// One full trial: deterministic in (master_seed, trial_index).
pub fn run_trial(cfg: &McConfig, index: u64) -> SirSample {
    let draw = draw_trial(cfg, index);
    let serving = select_serving(
        &draw.deployment,
        cfg.scheme,
        (0.0, 0.0),
        cfg.network.alpha,
        &draw.amplitudes,
        cfg.conventional_by_distance,
    );
    sir_with_draws(&draw.deployment, &serving, (0.0, 0.0), cfg.network.alpha, &draw.amplitudes)
}

/// All trial SIRs in index order (the sequential reference path; a parallel
/// driver must produce this exact vector).
pub fn collect_sirs(cfg: &McConfig) -> Result<Vec<f64>, McError> {
    cfg.validate()?;
    Ok((0..cfg.trials).map(|i| run_trial(cfg, i).sir).collect())
}

/// Empirical coverage (CCDF of the SIR) at each grid threshold, with
/// binomial standard errors.
pub fn coverage_from_sirs(sirs: &[f64], gamma_grid: &[f64]) -> Vec<(f64, MetricEstimate)> {
    let n = sirs.len() as f64;
    gamma_grid
        .iter()
        .map(|&g| {
            let hits = sirs.iter().filter(|&&z| z > g).count() as f64;
            let p = hits / n;
            let std_err = (p * (1.0 - p) / n).sqrt();
            (g, MetricEstimate { value: p, std_err, trials_used: sirs.len() as u64 })
        })
        .collect()
}

/// Sample mean of ln(1 + SIR) with its standard error.
pub fn rate_from_sirs(sirs: &[f64]) -> MetricEstimate {
    let n = sirs.len() as f64;
    let mut sum = 0.0;
    let mut sum2 = 0.0;
    for &z in sirs {
        let r = z.ln_1p();
        sum += r;
        sum2 += r * r;
    }
    let mean = sum / n;
    let var = (sum2 / n - mean * mean).max(0.0);
    MetricEstimate { value: mean, std_err: (var / n).sqrt(), trials_used: sirs.len() as u64 }
}

pub fn estimate_coverage(cfg: &McConfig) -> Result<Vec<(f64, MetricEstimate)>, McError> {
    Ok(coverage_from_sirs(&collect_sirs(cfg)?, &cfg.gamma_grid))
}

pub fn estimate_rate(cfg: &McConfig) -> Result<MetricEstimate, McError> {
    Ok(rate_from_sirs(&collect_sirs(cfg)?))
}

/// Normalized histogram: densities integrate to one.
#[derive(Clone, Debug)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub densities: Vec<f64>,
    pub n_samples: usize,
}

/// Histogram over `bins` equal-width bins spanning the sample range.
/// Degenerate all-equal samples collapse to a single unit-mass bin.
pub fn empirical_pdf(samples: &[f64], bins: usize) -> Result<Histogram, McError> {
    if samples.len() < 2 {
        return Err(McError::Config(String::from("need at least two samples")));
    }
    if bins == 0 {
        return Err(McError::Config(String::from("need at least one bin")));
    }
    let lo = samples.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(McError::Config(String::from("non-finite samples")));
    }
    if hi == lo {
        let width = lo.abs().max(1.0) * 1e-9;
        let e0 = lo - width / 2.0;
        let e1 = lo + width / 2.0;
        return Ok(Histogram {
            densities: alloc::vec![1.0 / (e1 - e0)],
            edges: alloc::vec![e0, e1],
            n_samples: samples.len(),
        });
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = alloc::vec![0usize; bins];
    for &s in samples {
        let k = (((s - lo) / width) as usize).min(bins - 1);
        counts[k] += 1;
    }
    let n = samples.len() as f64;
    Ok(Histogram {
        edges: (0..=bins).map(|k| lo + k as f64 * width).collect(),
        densities: counts.iter().map(|&c| c as f64 / (n * width)).collect(),
        n_samples: samples.len(),
    })
}

impl Histogram {
    pub fn integral(&self) -> f64 {
        self.densities
            .iter()
            .enumerate()
            .map(|(k, d)| d * (self.edges[k + 1] - self.edges[k]))
            .sum()
    }
}
