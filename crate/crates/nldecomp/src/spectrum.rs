//! Welch-averaged power spectral density and band-power integration.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft;

/// Hann window of the given length.
fn hann(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let x = std::f64::consts::PI * i as f64 / n as f64;
            x.sin() * x.sin()
        })
        .collect()
}

/// Welch periodogram: mean of windowed-segment periodograms, two-sided,
/// bin k at signed frequency `signed_bin(k, segment_len) / segment_len`
/// cycles per sample. Segments overlap 50% and use a Hann window.
pub fn welch_psd(samples: &[Complex64], segment_len: usize) -> Result<Vec<f64>> {
    if samples.len() < segment_len {
        return Err(Error::TooShort {
            needed: segment_len,
            got: samples.len(),
        });
    }
    let window = hann(segment_len);
    let win_power: f64 = window.iter().map(|w| w * w).sum();
    let hop = segment_len / 2;
    let mut psd = vec![0.0f64; segment_len];
    let mut segments = 0usize;
    let mut start = 0usize;
    while start + segment_len <= samples.len() {
        let mut buf: Vec<Complex64> = samples[start..start + segment_len]
            .iter()
            .zip(&window)
            .map(|(s, w)| s * w)
            .collect();
        fft::fft_in_place(&mut buf);
        for (p, v) in psd.iter_mut().zip(&buf) {
            *p += v.norm_sqr();
        }
        segments += 1;
        start += hop;
    }
    let scale = 1.0 / (segments as f64 * win_power * segment_len as f64);
    for p in psd.iter_mut() {
        *p *= scale;
    }
    Ok(psd)
}

/// Integrated power in `[low, high]` cycles/sample, with band edges wrapped
/// modulo 1 onto the two-sided axis. `low` is exclusive, `high` inclusive,
/// so adjacent bands tile without double counting.
pub fn band_power(psd: &[f64], low: f64, high: f64) -> f64 {
    let n = psd.len();
    let mut acc = 0.0;
    for (k, &p) in psd.iter().enumerate() {
        let f = fft::signed_bin(k, n) as f64 / n as f64;
        // The spectrum is periodic; a band reaching past Nyquist wraps.
        let inside = [-1.0, 0.0, 1.0].iter().any(|off| {
            let fu = f + off;
            fu > low + 1e-15 && fu <= high + 1e-15
        });
        if inside {
            acc += p;
        }
    }
    acc
}

/// Symmetric in-band power |f| <= half_width.
pub fn channel_power(psd: &[f64], half_width: f64) -> f64 {
    let n = psd.len();
    psd.iter()
        .enumerate()
        .filter(|(k, _)| {
            (fft::signed_bin(*k, n) as f64 / n as f64).abs() <= half_width + 1e-15
        })
        .map(|(_, &p)| p)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signals::generate_filtered_noise;

    #[test]
    fn psd_total_power_matches_signal_power() {
        let sig = generate_filtered_noise(81, 16384, 1.0).unwrap();
        let psd = welch_psd(sig.samples(), 1024).unwrap();
        let total: f64 = psd.iter().sum();
        // Parseval up to windowing/overlap bias on stationary noise.
        assert!((total - sig.mean_power()).abs() / sig.mean_power() < 0.05);
    }

    #[test]
    fn band_limited_noise_concentrates_power() {
        let sig = generate_filtered_noise(82, 32768, 0.25).unwrap();
        let psd = welch_psd(sig.samples(), 1024).unwrap();
        let inside = channel_power(&psd, 0.130); // small margin beyond 0.125 for leakage
        let total: f64 = psd.iter().sum();
        assert!(inside / total > 0.98, "in-band fraction {}", inside / total);
    }

    #[test]
    fn band_power_wraps_above_nyquist() {
        let sig = generate_filtered_noise(83, 16384, 1.0).unwrap();
        let psd = welch_psd(sig.samples(), 256).unwrap();
        // (0.25, 0.75] wrapped covers everything outside |f| <= 0.25, with
        // the half-open edges landing exactly once on each boundary bin.
        let upper = band_power(&psd, 0.25, 0.75);
        let direct: f64 = psd
            .iter()
            .enumerate()
            .filter(|(k, _)| {
                let f = crate::fft::signed_bin(*k, 256) as f64 / 256.0;
                f > 0.25 + 1e-15 || f <= -0.25 + 1e-15
            })
            .map(|(_, &p)| p)
            .sum();
        assert!((upper - direct).abs() < 1e-12);
    }
}
