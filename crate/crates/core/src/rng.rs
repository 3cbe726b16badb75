//! Deterministic random number generation.
//!
//! Reproducibility contract: every sampling routine in this crate is a pure
//! function of an explicit seed, and Monte-Carlo trials derive independent
//! sub-streams from `(master_seed, trial_index)` with a counter-based mix,
//! so results are bit-identical no matter how trials are scheduled across
//! threads.

// in test builds std's inherent float methods shadow this trait
#[cfg_attr(test, allow(unused_imports))]
use crate::math::FloatExt;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// splitmix64 finalization mix (a bijection on u64).
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// splitmix64 stream, used only to expand seeds.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        mix64(self.state)
    }
}

/// xoshiro256++ generator.
#[derive(Clone, Debug)]
pub struct Rng {
    s: [u64; 4],
}

impl Rng {
    /// Expands a 64-bit seed into the full state via splitmix64.
    pub fn from_seed(seed: u64) -> Self {
        let mut sm = SplitMix64::new(seed);
        let mut s = [0u64; 4];
        for w in &mut s {
            *w = sm.next_u64();
        }
        // xoshiro must not start from the all-zero state
        if s == [0, 0, 0, 0] {
            s[0] = GOLDEN;
        }
        Self { s }
    }

    /// Counter-based sub-stream for trial `index` under `master` seed.
    ///
    /// `mix64` is a bijection, so distinct indices give distinct seeds and
    /// the derivation costs O(1) regardless of `index`.
    pub fn substream(master: u64, index: u64) -> Self {
        Self::from_seed(mix64(master ^ (index.wrapping_add(1)).wrapping_mul(GOLDEN)))
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let result = (self.s[0].wrapping_add(self.s[3])).rotate_left(23).wrapping_add(self.s[0]);
        let t = self.s[1] << 17;
        self.s[2] ^= self.s[0];
        self.s[3] ^= self.s[1];
        self.s[1] ^= self.s[2];
        self.s[0] ^= self.s[3];
        self.s[2] ^= t;
        self.s[3] = self.s[3].rotate_left(45);
        result
    }

    /// Uniform on [0, 1) with 53 random bits.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on (0, 1], safe as a `ln` argument.
    #[inline]
    pub fn uniform_open(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on [lo, hi).
    #[inline]
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Standard normal via Box-Muller.
    pub fn normal(&mut self) -> f64 {
        let u1 = self.uniform_open();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (2.0 * crate::math::PI * u2).cos()
    }

    /// Gamma(shape, scale) via Marsaglia-Tsang, with the boost trick for
    /// shape < 1.
    pub fn gamma(&mut self, shape: f64, scale: f64) -> f64 {
        debug_assert!(shape > 0.0 && scale > 0.0);
        if shape < 1.0 {
            let boost = self.uniform_open().powf(1.0 / shape);
            return self.gamma(shape + 1.0, scale) * boost;
        }
        let d = shape - 1.0 / 3.0;
        let c = 1.0 / (9.0 * d).sqrt();
        loop {
            let x = self.normal();
            let v = {
                let t = 1.0 + c * x;
                t * t * t
            };
            if v <= 0.0 {
                continue;
            }
            let u = self.uniform_open();
            if u < 1.0 - 0.0331 * x * x * x * x {
                return d * v * scale;
            }
            if u.ln() < 0.5 * x * x + d * (1.0 - v + v.ln()) {
                return d * v * scale;
            }
        }
    }

    /// Poisson(mean). Knuth's product method below mean 10, Hörmann's PTRD
    /// transformed rejection above; both sample the exact law.
    pub fn poisson(&mut self, mean: f64) -> u64 {
        debug_assert!(mean >= 0.0);
        if mean <= 0.0 {
            return 0;
        }
        if mean < 10.0 {
            let limit = (-mean).exp();
            let mut k = 0u64;
            let mut prod = self.uniform_open();
            while prod > limit {
                k += 1;
                prod *= self.uniform_open();
            }
            k
        } else {
            self.poisson_ptrd(mean)
        }
    }

    /// Hörmann's PTRD, with the acceptance step done against the exact
    /// log-pmf (lgamma is cheap here, so the k >= 10 Stirling shortcut of
    /// the original is unnecessary).
    fn poisson_ptrd(&mut self, mu: f64) -> u64 {
        let smu = mu.sqrt();
        let b = 0.931 + 2.53 * smu;
        let a = -0.059 + 0.02483 * b;
        let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
        let v_r = 0.9277 - 3.6224 / (b - 2.0);
        loop {
            let mut v = self.uniform_open();
            let mut u;
            if v <= 0.86 * v_r {
                u = v / v_r - 0.43;
                return ((2.0 * a / (0.5 - u.abs()) + b) * u + mu + 0.445).floor() as u64;
            }
            if v >= v_r {
                u = self.uniform_open() - 0.5;
            } else {
                u = v / v_r - 0.93;
                u = if u >= 0.0 { 0.5 - u } else { -0.5 - u };
                v = self.uniform_open() * v_r;
            }
            let us = 0.5 - u.abs();
            if us < 0.013 && v > us {
                continue;
            }
            let kf = ((2.0 * a / us + b) * u + mu + 0.445).floor();
            if kf < 0.0 {
                continue;
            }
            v = v * inv_alpha / (a / (us * us) + b);
            if v.ln() <= kf * mu.ln() - mu - crate::specialfn::ln_gamma(kf + 1.0) {
                return kf as u64;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_deterministic() {
        let mut a = Rng::from_seed(42);
        let mut b = Rng::from_seed(42);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn substreams_differ_per_index() {
        let mut a = Rng::substream(7, 0);
        let mut b = Rng::substream(7, 1);
        let same = (0..64).filter(|_| a.next_u64() == b.next_u64()).count();
        assert!(same < 2);
    }

    #[test]
    fn normal_moments() {
        let mut rng = Rng::from_seed(1);
        let n = 200_000;
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let x = rng.normal();
            s += x;
            s2 += x * x;
        }
        let mean = s / n as f64;
        let var = s2 / n as f64 - mean * mean;
        assert!(mean.abs() < 0.01, "mean {mean}");
        assert!((var - 1.0).abs() < 0.02, "var {var}");
    }

    #[test]
    fn gamma_moments() {
        let mut rng = Rng::from_seed(2);
        let (shape, scale) = (2.0, 0.5);
        let n = 200_000;
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let x = rng.gamma(shape, scale);
            s += x;
            s2 += x * x;
        }
        let mean = s / n as f64;
        let var = s2 / n as f64 - mean * mean;
        assert!((mean - shape * scale).abs() < 0.01, "mean {mean}");
        assert!((var - shape * scale * scale).abs() < 0.02, "var {var}");
    }

    #[test]
    fn poisson_moments_large_mean() {
        let mut rng = Rng::from_seed(3);
        let mu = 452.39;
        let n = 20_000;
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let x = rng.poisson(mu) as f64;
            s += x;
            s2 += x * x;
        }
        let mean = s / n as f64;
        let var = s2 / n as f64 - mean * mean;
        // mean and variance are both mu; allow 4 sigma
        assert!((mean - mu).abs() < 4.0 * (mu / n as f64).sqrt(), "mean {mean}");
        assert!((var / mu - 1.0).abs() < 0.05, "var {var}");
    }

    #[test]
    fn poisson_small_mean() {
        let mut rng = Rng::from_seed(4);
        let mu = 3.3;
        let n = 100_000;
        let mut s = 0.0;
        for _ in 0..n {
            s += rng.poisson(mu) as f64;
        }
        let mean = s / n as f64;
        assert!((mean - mu).abs() < 3.0 * (mu / n as f64).sqrt(), "mean {mean}");
    }
}
