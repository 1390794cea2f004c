//! Per-RB success probability under Rician/Rayleigh block fading.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::marcum::marcum_q;
use crate::error::{Error, Result};

/// Mean power and Rice factor of one co-channel interferer, relative to noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interferer {
    pub mean_inr_db: f64,
    pub k_factor: f64,
}

/// Long-term statistics of one BS→vehicle link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkStats {
    /// Mean desired-signal power over thermal noise, dB.
    pub mean_snr_db: f64,
    pub k_factor: f64,
    pub interferers: Vec<Interferer>,
}

impl LinkStats {
    pub fn noise_limited(mean_snr_db: f64, k_factor: f64) -> Self {
        Self {
            mean_snr_db,
            k_factor,
            interferers: Vec::new(),
        }
    }

    pub fn mean_sinr_db(&self) -> f64 {
        if self.interferers.is_empty() {
            return self.mean_snr_db;
        }
        let inr: f64 = self
            .interferers
            .iter()
            .map(|i| 10f64.powf(i.mean_inr_db / 10.0))
            .sum();
        self.mean_snr_db - 10.0 * (1.0 + inr).log10()
    }
}

/// Probability that one resource block survives fading at a given protection ratio.
pub trait FadingModel {
    fn success_prob(&self, threshold_db: f64, link: &LinkStats) -> Result<f64>;
}

/// Closed-form Rician CDF via the Marcum Q function.
///
/// Exact for interference-free links. With interferers present the mean
/// interference is folded into the noise floor.
#[derive(Debug, Clone, Copy, Default)]
pub struct RicianAnalytic;

impl FadingModel for RicianAnalytic {
    fn success_prob(&self, threshold_db: f64, link: &LinkStats) -> Result<f64> {
        rician_success_prob(threshold_db, link.mean_sinr_db(), link.k_factor)
    }
}

/// Samples desired and interfering envelopes independently per draw.
///
/// The sample stream depends only on `seed`, so repeated calls with different
/// thresholds share common random numbers and stay monotone in the threshold.
#[derive(Debug, Clone, Copy)]
pub struct MonteCarloFading {
    pub draws: u32,
    pub seed: u64,
}

impl FadingModel for MonteCarloFading {
    fn success_prob(&self, threshold_db: f64, link: &LinkStats) -> Result<f64> {
        check_k(link.k_factor)?;
        for i in &link.interferers {
            check_k(i.k_factor)?;
        }
        if let Some(p) = degenerate_threshold(threshold_db) {
            return Ok(p);
        }
        if self.draws == 0 {
            return Err(Error::domain("Monte Carlo fading needs at least one draw"));
        }
        let ratio = 10f64.powf(threshold_db / 10.0);
        let snr = 10f64.powf(link.mean_snr_db / 10.0);
        let inrs: Vec<(f64, f64)> = link
            .interferers
            .iter()
            .map(|i| (10f64.powf(i.mean_inr_db / 10.0), i.k_factor))
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut ok = 0u64;
        for _ in 0..self.draws {
            let s = rician_power(&mut rng, snr, link.k_factor);
            let i: f64 = inrs
                .iter()
                .map(|&(m, k)| rician_power(&mut rng, m, k))
                .sum();
            if s >= ratio * (1.0 + i) {
                ok += 1;
            }
        }
        Ok(ok as f64 / f64::from(self.draws))
    }
}

/// Serializable choice of fading evaluator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FadingKind {
    #[default]
    Analytic,
    MonteCarlo {
        draws: u32,
        seed: u64,
    },
}

impl FadingModel for FadingKind {
    fn success_prob(&self, threshold_db: f64, link: &LinkStats) -> Result<f64> {
        match *self {
            FadingKind::Analytic => RicianAnalytic.success_prob(threshold_db, link),
            FadingKind::MonteCarlo { draws, seed } => {
                MonteCarloFading { draws, seed }.success_prob(threshold_db, link)
            }
        }
    }
}

/// Per-RB success probability `p` at the SINR threshold of the selected CQI.
pub fn rb_success_prob(
    threshold_db: f64,
    link: &LinkStats,
    model: &impl FadingModel,
) -> Result<f64> {
    model.success_prob(threshold_db, link)
}

/// `P[γ ≥ R]` for a Rician power `γ` with mean `mean_snr_db` and Rice factor `k`.
pub fn rician_success_prob(threshold_db: f64, mean_snr_db: f64, k: f64) -> Result<f64> {
    check_k(k)?;
    if let Some(p) = degenerate_threshold(threshold_db) {
        return Ok(p);
    }
    if mean_snr_db.is_nan() {
        return Err(Error::domain("mean SNR is NaN"));
    }
    if mean_snr_db == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    let ratio = 10f64.powf((threshold_db - mean_snr_db) / 10.0);
    let a = (2.0 * k).sqrt();
    let b = (2.0 * (1.0 + k) * ratio).sqrt();
    Ok(marcum_q(a, b))
}

fn check_k(k: f64) -> Result<()> {
    if k >= 0.0 && k.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "Rice factor must be non-negative and finite, got {k}"
        )))
    }
}

fn degenerate_threshold(threshold_db: f64) -> Option<f64> {
    if threshold_db.is_nan() {
        Some(f64::NAN)
    } else if threshold_db == f64::NEG_INFINITY {
        Some(1.0)
    } else if threshold_db == f64::INFINITY {
        Some(0.0)
    } else {
        None
    }
}

pub(crate) fn rician_power<R: rand::Rng + ?Sized>(rng: &mut R, mean: f64, k: f64) -> f64 {
    let los = (mean * k / (k + 1.0)).sqrt();
    let sigma = (mean / (2.0 * (k + 1.0))).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    let i = los + sigma * re;
    let q = sigma * im;
    i * i + q * q
}
