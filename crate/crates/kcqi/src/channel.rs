//! Ricean multipath channel generation.
//!
//! A channel is a set of taps at distinct delays. Each tap is the sum of a
//! fixed line-of-sight component `P·e^{jφ}` and a circularly-symmetric
//! complex Gaussian diffuse component. The common K-factor sets the power
//! ratio between the two; the power-delay profile sets the per-tap total
//! power, normalized so the whole channel has unit power.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::TAU;

use crate::error::{Error, Result};

/// Tap delays and normalized linear powers of a multipath channel.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerDelayProfile {
    delays_us: Vec<f64>,
    powers: Vec<f64>,
}

impl PowerDelayProfile {
    /// Builds a profile from delays and tap gains in dB, normalizing the
    /// linear powers to sum to one.
    pub fn from_gains_db(delays_us: &[f64], gains_db: &[f64]) -> Result<Self> {
        if delays_us.is_empty() {
            return Err(Error::invalid("power delay profile must have at least one tap"));
        }
        if delays_us.len() != gains_db.len() {
            return Err(Error::LengthMismatch {
                context: "delays vs gains",
                left: delays_us.len(),
                right: gains_db.len(),
            });
        }
        validate_delays(delays_us)?;
        let linear: Vec<f64> = gains_db.iter().map(|g| 10f64.powf(g / 10.0)).collect();
        let total: f64 = linear.iter().sum();
        let powers = linear.iter().map(|p| p / total).collect();
        Ok(Self {
            delays_us: delays_us.to_vec(),
            powers,
        })
    }

    /// Builds a profile from already-linear powers, which must sum to one.
    pub fn from_linear(delays_us: &[f64], powers: &[f64]) -> Result<Self> {
        if delays_us.is_empty() {
            return Err(Error::invalid("power delay profile must have at least one tap"));
        }
        if delays_us.len() != powers.len() {
            return Err(Error::LengthMismatch {
                context: "delays vs powers",
                left: delays_us.len(),
                right: powers.len(),
            });
        }
        validate_delays(delays_us)?;
        if powers.iter().any(|&p| p <= 0.0) {
            return Err(Error::invalid("tap powers must be positive"));
        }
        let total: f64 = powers.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!(
                "tap powers must sum to 1, got {total}"
            )));
        }
        Ok(Self {
            delays_us: delays_us.to_vec(),
            powers: powers.to_vec(),
        })
    }

    /// ITU-R Pedestrian B profile, the compiled-in default.
    pub fn pedestrian_b() -> Self {
        Self::from_gains_db(
            &[0.0, 0.2, 0.8, 1.2, 2.3, 3.7],
            &[0.0, -0.9, -4.9, -8.0, -7.8, -23.9],
        )
        .expect("static profile is valid")
    }

    pub fn delays_us(&self) -> &[f64] {
        &self.delays_us
    }

    pub fn powers(&self) -> &[f64] {
        &self.powers
    }

    pub fn num_taps(&self) -> usize {
        self.powers.len()
    }
}

fn validate_delays(delays_us: &[f64]) -> Result<()> {
    if delays_us[0] < 0.0 {
        return Err(Error::invalid("tap delays must be non-negative"));
    }
    if delays_us.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("tap delays must be strictly increasing"));
    }
    Ok(())
}

/// Per-tap Ricean parameters: LoS amplitude/phase and total diffuse variance.
///
/// `power = los_amplitude² + diffuse_variance`, and for a common factor K,
/// `los_amplitude² / diffuse_variance = K` on every tap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiceanTapParams {
    pub power: f64,
    pub los_amplitude: f64,
    /// LoS phase in [0, 2π).
    pub los_phase: f64,
    /// Total variance of the complex diffuse component (both quadratures).
    pub diffuse_variance: f64,
}

/// Splits each tap's power between LoS and diffuse parts for a common
/// K-factor, attaching the given LoS phases.
///
/// K = 0 yields Rayleigh taps with no LoS component.
pub fn tap_params(
    pdp: &PowerDelayProfile,
    k: f64,
    phases: &[f64],
) -> Result<Vec<RiceanTapParams>> {
    if k < 0.0 || !k.is_finite() {
        return Err(Error::invalid(format!("K-factor must be finite and >= 0, got {k}")));
    }
    if phases.len() != pdp.num_taps() {
        return Err(Error::LengthMismatch {
            context: "phases vs taps",
            left: phases.len(),
            right: pdp.num_taps(),
        });
    }
    Ok(pdp
        .powers
        .iter()
        .zip(phases)
        .map(|(&power, &phase)| RiceanTapParams {
            power,
            los_amplitude: (k * power / (k + 1.0)).sqrt(),
            los_phase: phase.rem_euclid(TAU),
            diffuse_variance: power / (k + 1.0),
        })
        .collect())
}

/// One realization of the channel: complex tap values at sample-index delays.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    taps: Vec<Complex64>,
    delay_samples: Vec<usize>,
}

impl ChannelRealization {
    pub fn new(taps: Vec<Complex64>, delay_samples: Vec<usize>) -> Result<Self> {
        if taps.len() != delay_samples.len() {
            return Err(Error::LengthMismatch {
                context: "taps vs delay samples",
                left: taps.len(),
                right: delay_samples.len(),
            });
        }
        if delay_samples.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("delay samples must be strictly increasing"));
        }
        Ok(Self {
            taps,
            delay_samples,
        })
    }

    pub fn taps(&self) -> &[Complex64] {
        &self.taps
    }

    pub fn delay_samples(&self) -> &[usize] {
        &self.delay_samples
    }
}

/// Draws one channel realization: `h_l = P_l·e^{jφ_l} + z_l` with
/// `z_l ~ CN(0, diffuse_variance_l)`.
///
/// The LoS phases are the fixed ones in `taps`; only the diffuse component
/// is redrawn per call. Each quadrature of `z_l` has variance
/// `diffuse_variance / 2`.
pub fn draw_epoch<R: Rng + ?Sized>(
    taps: &[RiceanTapParams],
    delay_samples: &[usize],
    rng: &mut R,
) -> Result<ChannelRealization> {
    if taps.len() != delay_samples.len() {
        return Err(Error::LengthMismatch {
            context: "taps vs delay samples",
            left: taps.len(),
            right: delay_samples.len(),
        });
    }
    let values = taps
        .iter()
        .map(|tap| {
            let los = Complex64::from_polar(tap.los_amplitude, tap.los_phase);
            let sigma = (tap.diffuse_variance / 2.0).sqrt();
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            los + Complex64::new(sigma * re, sigma * im)
        })
        .collect();
    ChannelRealization::new(values, delay_samples.to_vec())
}

/// Moment-based K estimate from complex samples: `|mean|² / variance`,
/// with the unbiased (n−1) sample variance. Returns `+∞` when the samples
/// have zero variance.
///
/// Validation oracle for the generator; apply it per tap.
pub fn estimate_k_moments(samples: &[Complex64]) -> Result<f64> {
    if samples.len() < 2 {
        return Err(Error::invalid(format!(
            "K estimation needs at least 2 samples, got {}",
            samples.len()
        )));
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<Complex64>() / n;
    let variance = samples.iter().map(|s| (s - mean).norm_sqr()).sum::<f64>() / (n - 1.0);
    if variance == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(mean.norm_sqr() / variance)
}
