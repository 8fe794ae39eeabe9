//! Channel realization → per-subcarrier SNRs → effective SNR → CQI.
//!
//! The frequency response comes from the first L columns of the DFT matrix
//! evaluated at the used subcarrier indices. The effective SNR compresses
//! the per-subcarrier SNR vector through `f(x) = e^{-x}` with calibration
//! factor β, and a fixed threshold table quantizes it to a 0..=15 CQI.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::channel::ChannelRealization;
use crate::error::{Error, Result};

/// Number of CQI thresholds (CQI levels 1..=15; below the first is 0).
pub const NUM_CQI_THRESHOLDS: usize = 15;

/// Default FFT size (10 MHz OFDM grid).
pub const DEFAULT_FFT_SIZE: usize = 1024;
/// Default sample rate in Hz.
pub const DEFAULT_SAMPLE_RATE_HZ: f64 = 15.36e6;
/// Default EESM calibration factor.
pub const DEFAULT_BETA: f64 = 0.5;
/// Default effective-SNR thresholds in dB for CQI 1..=15.
pub const DEFAULT_CQI_THRESHOLDS_DB: [f64; NUM_CQI_THRESHOLDS] = [
    -6.7, -4.7, -2.3, 0.2, 2.4, 4.3, 5.9, 8.1, 10.3, 11.7, 14.1, 16.3, 18.7, 21.0, 22.7,
];

/// OFDM grid, EESM calibration and CQI quantizer settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkMapConfig {
    fft_size: usize,
    sample_rate_hz: f64,
    used_subcarriers: Vec<usize>,
    beta: f64,
    cqi_thresholds_db: Vec<f64>,
}

impl LinkMapConfig {
    pub fn new(
        fft_size: usize,
        sample_rate_hz: f64,
        used_subcarriers: Vec<usize>,
        beta: f64,
        cqi_thresholds_db: Vec<f64>,
    ) -> Result<Self> {
        if fft_size == 0 {
            return Err(Error::config("fft_size", "must be positive"));
        }
        if !(sample_rate_hz > 0.0) {
            return Err(Error::config("sample_rate_hz", "must be positive"));
        }
        if used_subcarriers.is_empty() {
            return Err(Error::config("used_subcarriers", "must be non-empty"));
        }
        if used_subcarriers.len() > fft_size {
            return Err(Error::config(
                "used_subcarriers",
                format!("{} indices exceed fft_size {}", used_subcarriers.len(), fft_size),
            ));
        }
        let mut seen = vec![false; fft_size];
        for &idx in &used_subcarriers {
            if idx >= fft_size {
                return Err(Error::config(
                    "used_subcarriers",
                    format!("index {idx} out of range for fft_size {fft_size}"),
                ));
            }
            if seen[idx] {
                return Err(Error::config("used_subcarriers", format!("duplicate index {idx}")));
            }
            seen[idx] = true;
        }
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::config("beta", format!("must be in (0, 1], got {beta}")));
        }
        if cqi_thresholds_db.len() != NUM_CQI_THRESHOLDS {
            return Err(Error::config(
                "cqi_thresholds_db",
                format!("expected {} values, got {}", NUM_CQI_THRESHOLDS, cqi_thresholds_db.len()),
            ));
        }
        if cqi_thresholds_db.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::config("cqi_thresholds_db", "must be strictly increasing"));
        }
        Ok(Self {
            fft_size,
            sample_rate_hz,
            used_subcarriers,
            beta,
            cqi_thresholds_db,
        })
    }

    /// 600 used subcarriers symmetric about (and excluding) DC on the
    /// given grid: indices 1..=half and fft_size-half..fft_size.
    pub fn symmetric_subcarriers(fft_size: usize, used: usize) -> Vec<usize> {
        let half = used / 2;
        (1..=half)
            .chain(fft_size - (used - half)..fft_size)
            .collect()
    }

    pub fn fft_size(&self) -> usize {
        self.fft_size
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn used_subcarriers(&self) -> &[usize] {
        &self.used_subcarriers
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn cqi_thresholds_db(&self) -> &[f64] {
        &self.cqi_thresholds_db
    }
}

impl Default for LinkMapConfig {
    fn default() -> Self {
        Self::new(
            DEFAULT_FFT_SIZE,
            DEFAULT_SAMPLE_RATE_HZ,
            Self::symmetric_subcarriers(DEFAULT_FFT_SIZE, 600),
            DEFAULT_BETA,
            DEFAULT_CQI_THRESHOLDS_DB.to_vec(),
        )
        .expect("static defaults are valid")
    }
}

/// Converts a microsecond delay to the nearest sample index
/// (half away from zero).
pub fn delay_to_sample_index(delay_us: f64, sample_rate_hz: f64) -> Result<usize> {
    if delay_us < 0.0 {
        return Err(Error::invalid(format!("delay must be non-negative, got {delay_us}")));
    }
    if !(sample_rate_hz > 0.0) {
        return Err(Error::invalid(format!(
            "sample rate must be positive, got {sample_rate_hz}"
        )));
    }
    Ok((delay_us * 1e-6 * sample_rate_hz).round() as usize)
}

/// DFT columns for a fixed set of tap delays, evaluated at the used
/// subcarriers. Precompute once and reuse across epochs of the same channel.
#[derive(Debug, Clone)]
pub struct DftBasis {
    /// Row-major: one row per used subcarrier, one column per tap.
    twiddles: Vec<Complex64>,
    num_taps: usize,
}

impl DftBasis {
    pub fn new(delay_samples: &[usize], config: &LinkMapConfig) -> Result<Self> {
        let fft = config.fft_size;
        for &d in delay_samples {
            if d >= fft {
                return Err(Error::invalid(format!(
                    "delay index {d} out of range for fft_size {fft}"
                )));
            }
        }
        let mut twiddles =
            Vec::with_capacity(config.used_subcarriers.len() * delay_samples.len());
        for &n in &config.used_subcarriers {
            for &d in delay_samples {
                // Reduce n·d mod fft before the trig call so the angle stays
                // in [0, 2π) and the twiddle is exact.
                let phase = -TAU * ((n * d) % fft) as f64 / fft as f64;
                twiddles.push(Complex64::from_polar(1.0, phase));
            }
        }
        Ok(Self {
            twiddles,
            num_taps: delay_samples.len(),
        })
    }

    /// Frequency response at every used subcarrier for the given tap values.
    pub fn response(&self, taps: &[Complex64]) -> Result<Vec<Complex64>> {
        if taps.len() != self.num_taps {
            return Err(Error::LengthMismatch {
                context: "taps vs basis",
                left: taps.len(),
                right: self.num_taps,
            });
        }
        Ok(self
            .twiddles
            .chunks_exact(self.num_taps)
            .map(|row| {
                row.iter()
                    .zip(taps)
                    .map(|(w, h)| w * h)
                    .sum::<Complex64>()
            })
            .collect())
    }
}

/// Frequency response `H_n = Σ_l h_l·e^{-j2πn·d_l/fft}` at each used
/// subcarrier index n.
pub fn freq_response(
    realization: &ChannelRealization,
    config: &LinkMapConfig,
) -> Result<Vec<Complex64>> {
    DftBasis::new(realization.delay_samples(), config)?.response(realization.taps())
}

/// Per-subcarrier linear SNR for unit transmit power: `|H_n|² / N_o` with
/// `N_o = 10^(-snr_db/10)`.
pub fn subcarrier_snrs(h: &[Complex64], snr_db: f64) -> Vec<f64> {
    let noise = 10f64.powf(-snr_db / 10.0);
    h.iter().map(|hn| hn.norm_sqr() / noise).collect()
}

/// Exponential effective SNR: `β·(−ln((1/N)·Σ e^{−SNR_n/β}))`, evaluated in
/// shifted form so large SNRs cannot underflow the whole sum.
///
/// The shift by the minimum makes the result exactly `s` for a constant
/// vector `[s; N]` and keeps it within `[min, min + β·ln N]` even when every
/// naive `e^{−SNR_n/β}` term would be zero.
pub fn effective_snr(snrs: &[f64], beta: f64) -> Result<f64> {
    if snrs.is_empty() {
        return Err(Error::invalid("effective SNR of an empty vector"));
    }
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::invalid(format!("beta must be in (0, 1], got {beta}")));
    }
    let min = snrs.iter().cloned().fold(f64::INFINITY, f64::min);
    let sum: f64 = snrs.iter().map(|&s| (-(s - min) / beta).exp()).sum();
    // The true mean is ≤ 1; clamp away accumulated rounding so the
    // lower bound eff ≥ min holds structurally.
    let mean = (sum / snrs.len() as f64).min(1.0);
    Ok(min - beta * mean.ln())
}

/// Quantizes a linear effective SNR to a CQI in 0..=15: the largest level
/// whose dB threshold is ≤ the effective SNR in dB, with equality mapping
/// to the higher CQI.
///
/// `thresholds_db` must be strictly increasing
/// (enforced by [`LinkMapConfig`]).
pub fn quantize_cqi(snr_eff_linear: f64, thresholds_db: &[f64]) -> u8 {
    debug_assert!(thresholds_db.windows(2).all(|w| w[0] < w[1]));
    let snr_db = 10.0 * snr_eff_linear.log10();
    thresholds_db.partition_point(|&t| t <= snr_db) as u8
}
