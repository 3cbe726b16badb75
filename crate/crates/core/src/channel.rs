//! Small-scale fading and SIR sample generation.
//!
//! Nakagami-m amplitudes for the MRT-combined desired links, Gamma-law
//! post-beamforming powers for interferers, and the interference-limited
//! SIR assembled over a deployment. Transmit powers are identical and
//! normalized to unity; noise is omitted.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::geometry::{CompSet, Deployment};
// in test builds std's inherent float methods shadow this trait
#[cfg_attr(test, allow(unused_imports))]
use crate::math::FloatExt;
use crate::rng::Rng;

#[derive(Clone, Debug, PartialEq)]
pub enum ChannelError {
    Config(String),
    /// Every UAV serves; the interference term would be empty.
    NoInterferers,
}

impl core::fmt::Display for ChannelError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ChannelError::Config(m) => write!(f, "config error: {m}"),
            ChannelError::NoInterferers => write!(f, "no interferers: SIR undefined"),
        }
    }
}

impl core::error::Error for ChannelError {}

/// Nakagami-m fading: shape m >= 0.5 and mean power Ω > 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FadingParams {
    pub m: f64,
    pub omega: f64,
}

impl FadingParams {
    /// m = 2, Ω = 1: the fast-fading setting used throughout the experiments.
    pub const DEFAULT: FadingParams = FadingParams { m: 2.0, omega: 1.0 };

    pub fn validate(&self) -> Result<(), ChannelError> {
        if self.m < 0.5 || !self.m.is_finite() {
            return Err(ChannelError::Config(format!(
                "Nakagami shape m >= 0.5 required, got {}",
                self.m
            )));
        }
        if self.omega <= 0.0 || !self.omega.is_finite() {
            return Err(ChannelError::Config(format!(
                "mean power omega > 0 required, got {}",
                self.omega
            )));
        }
        Ok(())
    }

    /// E[‖h‖] = Γ(m + 1/2)/Γ(m) · (Ω/m)^(1/2).
    pub fn mean_amplitude(&self) -> f64 {
        let m = self.m;
        if m > 1e8 {
            // Γ(m+1/2)/Γ(m) = sqrt(m)(1 - 1/(8m) + 1/(128m²) + ...); the
            // lnΓ difference cancels catastrophically up here
            let ratio = 1.0 - 1.0 / (8.0 * m) + 1.0 / (128.0 * m * m);
            return ratio * self.omega.sqrt();
        }
        let lg = crate::specialfn::ln_gamma(m + 0.5) - crate::specialfn::ln_gamma(m);
        lg.exp() * (self.omega / m).sqrt()
    }
}

/// One SIR draw: desired power S, interference power I, and their ratio.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SirSample {
    pub signal_power: f64,
    pub interference_power: f64,
    pub sir: f64,
}

impl SirSample {
    pub fn new(signal_power: f64, interference_power: f64) -> Self {
        Self { signal_power, interference_power, sir: signal_power / interference_power }
    }
}

/// Nakagami-m amplitude draw: the square root of Gamma(m, Ω/m).
pub fn sample_nakagami_amplitude(p: FadingParams, rng: &mut Rng) -> f64 {
    rng.gamma(p.m, p.omega / p.m).sqrt()
}

/// Post-beamforming interference power draw, |g|² ~ Gamma(m, Ω/m).
pub fn sample_interference_power(p: FadingParams, rng: &mut Rng) -> f64 {
    rng.gamma(p.m, p.omega / p.m)
}

/// SIR from explicit per-link quantities (no randomness):
/// S = (Σ_i d_i^(-α/2) a_i)², I = Σ_j d_j^(-α) g_j.
///
/// Kept separate from the sampling path so the arithmetic can be audited
/// against hand computations.
pub fn sir_from_draws(
    serving: &[(f64, f64)],     // (3D distance, amplitude)
    interfering: &[(f64, f64)], // (3D distance, power)
    alpha: f64,
) -> SirSample {
    let mut t = 0.0;
    for &(d, amp) in serving {
        t += d.powf(-alpha / 2.0) * amp;
    }
    let mut i_pow = 0.0;
    for &(d, g) in interfering {
        i_pow += d.powf(-alpha) * g;
    }
    SirSample::new(t * t, i_pow)
}

/// Draws the fading and assembles the SIR of a UE at `ue` (ground level)
/// served by `comp`, with every other UAV interfering.
pub fn compute_sir(
    dep: &Deployment,
    comp: &CompSet,
    ue: (f64, f64),
    alpha: f64,
    fading: FadingParams,
    rng: &mut Rng,
) -> Result<SirSample, ChannelError> {
    if alpha < 2.0 {
        return Err(ChannelError::Config(format!(
            "path-loss exponent alpha >= 2 required, got {alpha}"
        )));
    }
    fading.validate()?;
    if dep.len() <= 4 {
        return Err(ChannelError::NoInterferers);
    }
    // One fading draw per UAV, in deployment order: serving links use the
    // amplitude, interfering links its square (the same Gamma(m, Ω/m) power
    // law). Sharing the draw per UAV is what lets selection schemes run on
    // common random numbers.
    let draws: Vec<f64> = (0..dep.len()).map(|_| sample_nakagami_amplitude(fading, rng)).collect();
    Ok(sir_with_draws(dep, &comp.uav_indices, ue, alpha, &draws))
}

/// Same assembly from pre-drawn per-UAV amplitudes.
pub fn sir_with_draws(
    dep: &Deployment,
    serving: &[usize],
    ue: (f64, f64),
    alpha: f64,
    amplitudes: &[f64],
) -> SirSample {
    let mut t = 0.0;
    let mut i_pow = 0.0;
    for (i, &amp) in amplitudes.iter().enumerate().take(dep.len()) {
        let d = dep.distance_3d(i, ue);
        if serving.contains(&i) {
            t += d.powf(-alpha / 2.0) * amp;
        } else {
            i_pow += d.powf(-alpha) * amp * amp;
        }
    }
    SirSample::new(t * t, i_pow)
}
