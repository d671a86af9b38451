//! Hopping noise β(t) and its integral over a time step.
//!
//! The integrated impulse `W = ∫β dt` over a step `h` has variance `2β₀h`
//! in the white limit. That is the normalisation under which the averaged
//! two-level dynamics decays at the `4β₀` rate of the averaged master
//! equation. Coloured noise is an Ornstein–Uhlenbeck process with
//! correlation time `τ_c` and the same integrated strength, so it reaches
//! the white limit as `τ_c → 0`.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{require_finite, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// White-noise strength β₀ (natural units).
    pub beta0: f64,
    /// 0 for white noise, otherwise the OU correlation time.
    pub correlation_time: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn white(beta0: f64, seed: u64) -> Result<Self> {
        Self::colored(beta0, 0.0, seed)
    }

    pub fn colored(beta0: f64, correlation_time: f64, seed: u64) -> Result<Self> {
        require_finite("beta0", beta0)?;
        require_finite("correlation_time", correlation_time)?;
        if beta0 < 0.0 {
            return Err(Error::invalid("beta0", "must be >= 0"));
        }
        if correlation_time < 0.0 {
            return Err(Error::invalid("correlation_time", "must be >= 0"));
        }
        Ok(NoiseSpec {
            beta0,
            correlation_time,
            seed,
        })
    }

    pub fn is_white(&self) -> bool {
        self.correlation_time == 0.0
    }

    /// Integral of the noise autocorrelation, D = 2β₀.
    pub fn strength(&self) -> f64 {
        2.0 * self.beta0
    }

    /// Variance of ∫β dt over a window of length `h` for the stationary process.
    pub fn integrated_variance(&self, h: f64) -> f64 {
        let d = self.strength();
        if self.is_white() {
            return d * h;
        }
        let tau = self.correlation_time;
        let u = h / tau;
        // 2σ²τ²(u − 1 + e^{−u}) with σ² = D/(2τ)
        d * tau * (u + (-u).exp_m1())
    }
}

/// 2u − 3 + 4e^{−u} − e^{−2u}, by series where the closed form cancels.
/// Scaled by σ²τ², this is the variance of ∫β dt over `uτ` given β at the start.
fn ou_window_factor(u: f64) -> f64 {
    if u < 0.5 {
        let mut term = 1.0;
        let mut sum = 0.0;
        for k in 1..=30 {
            term *= -u / k as f64;
            if k >= 3 {
                sum += (4.0 - 2f64.powi(k)) * term;
            }
        }
        sum
    } else {
        2.0 * u - 3.0 + 4.0 * (-u).exp() - (-2.0 * u).exp()
    }
}

/// Per-trajectory noise state.
#[derive(Debug, Clone)]
pub(crate) enum NoiseProcess {
    Off,
    White { strength: f64 },
    Colored { tau: f64, sigma2: f64, value: f64 },
}

impl NoiseProcess {
    pub(crate) fn start<R: Rng>(spec: &NoiseSpec, rng: &mut R) -> Self {
        if spec.beta0 == 0.0 {
            NoiseProcess::Off
        } else if spec.is_white() {
            NoiseProcess::White {
                strength: spec.strength(),
            }
        } else {
            let tau = spec.correlation_time;
            let sigma2 = spec.strength() / (2.0 * tau);
            let z: f64 = rng.sample(StandardNormal);
            NoiseProcess::Colored {
                tau,
                sigma2,
                value: sigma2.sqrt() * z,
            }
        }
    }

    /// Draw ∫β dt over the next step of length `h`.
    pub(crate) fn impulse<R: Rng>(&mut self, h: f64, rng: &mut R) -> f64 {
        match self {
            NoiseProcess::Off => 0.0,
            NoiseProcess::White { strength } => {
                let z: f64 = rng.sample(StandardNormal);
                (*strength * h).sqrt() * z
            }
            NoiseProcess::Colored { tau, sigma2, value } => {
                // exact joint Gaussian update of (β, ∫β) for the OU process
                let u = h / *tau;
                let e = (-u).exp();
                let mean_i = *value * *tau * -(-u).exp_m1();
                let mean_x = *value * e;
                let var_i = *sigma2 * *tau * *tau * ou_window_factor(u);
                let var_x = *sigma2 * -(-2.0 * u).exp_m1();
                let cov = *sigma2 * *tau * (-u).exp_m1().powi(2);
                let z1: f64 = rng.sample(StandardNormal);
                let z2: f64 = rng.sample(StandardNormal);
                let sd_i = var_i.max(0.0).sqrt();
                let (a, b) = if sd_i > 0.0 {
                    let a = cov / sd_i;
                    (a, (var_x - a * a).max(0.0).sqrt())
                } else {
                    (0.0, var_x.max(0.0).sqrt())
                };
                *value = mean_x + a * z1 + b * z2;
                mean_i + sd_i * z1
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;

    #[test]
    fn window_factor_series_matches_closed_form() {
        for u in [0.3f64, 0.49, 0.51, 0.7] {
            let closed = 2.0 * u - 3.0 + 4.0 * (-u).exp() - (-2.0 * u).exp();
            assert!((ou_window_factor(u) - closed).abs() < 1e-13 * closed.abs().max(1e-3), "u={u}");
        }
        // leading behaviour 2u³/3
        let u = 1e-4;
        assert!((ou_window_factor(u) / (2.0 * u * u * u / 3.0) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn white_variance_and_colored_limit() {
        let w = NoiseSpec::white(0.2, 0).unwrap();
        assert!((w.integrated_variance(0.5) - 0.2).abs() < 1e-15);
        let mut last = f64::INFINITY;
        for tau in [1.0, 0.1, 0.01, 0.001] {
            let c = NoiseSpec::colored(0.2, tau, 0).unwrap();
            let gap = (c.integrated_variance(0.5) / w.integrated_variance(0.5) - 1.0).abs();
            assert!(gap < last);
            last = gap;
        }
        assert!(last < 1e-2);
    }

    #[test]
    fn sampled_impulse_variance() {
        for spec in [NoiseSpec::white(0.3, 1).unwrap(), NoiseSpec::colored(0.3, 0.2, 1).unwrap()] {
            let h = 0.05;
            let steps = 20;
            let n = 20_000;
            let mut sum2 = 0.0;
            for k in 0..n {
                let mut rng = substream(5, k);
                let mut p = NoiseProcess::start(&spec, &mut rng);
                let total: f64 = (0..steps).map(|_| p.impulse(h, &mut rng)).sum();
                sum2 += total * total;
            }
            let var = sum2 / n as f64;
            let expect = spec.integrated_variance(h * steps as f64);
            // 4 standard errors of a variance estimate: sqrt(2/n)
            assert!((var / expect - 1.0).abs() < 4.0 * (2.0 / n as f64).sqrt(), "{var} vs {expect}");
        }
    }

    #[test]
    fn rejects_negative() {
        assert!(NoiseSpec::white(-1.0, 0).is_err());
        assert!(NoiseSpec::colored(1.0, -1.0, 0).is_err());
    }
}
