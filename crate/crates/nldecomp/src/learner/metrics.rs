//! Signal-quality metrics: NMSE, error vector magnitude, adjacent channel
//! leakage.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft;
use crate::signals::{MulticarrierFrame, SampledSignal};
use crate::spectrum;

/// Reporting floor for log-domain metrics.
pub const DB_FLOOR: f64 = -120.0;

/// 10 log10(E[|pred - target|^2] / E[|target|^2]), clipped at the -120 dB
/// floor.
pub fn nmse_db(pred: &SampledSignal, target: &SampledSignal) -> Result<f64> {
    if pred.len() != target.len() {
        return Err(Error::LengthMismatch {
            left: pred.len(),
            right: target.len(),
        });
    }
    nmse_db_samples(pred.samples(), target.samples())
}

pub fn nmse_db_samples(pred: &[Complex64], target: &[Complex64]) -> Result<f64> {
    let tp: f64 = target.iter().map(|v| v.norm_sqr()).sum();
    if tp <= 0.0 {
        return Err(Error::DegenerateTarget);
    }
    let ep: f64 = pred
        .iter()
        .zip(target)
        .map(|(p, t)| (p - t).norm_sqr())
        .sum();
    Ok((10.0 * (ep / tp).log10()).max(DB_FLOOR))
}

/// RMS error vector magnitude in dB of a received record against the frame's
/// stored reference grid.
///
/// The received record is split into DFT symbols, and each active subcarrier
/// gets one least-squares complex equalizer tap fitted across all symbols
/// before the error is measured; linear gain, rotation, and linear memory
/// therefore do not count as error.
pub fn evm_db(frame: &MulticarrierFrame, received: &SampledSignal) -> Result<f64> {
    if frame.reference.is_empty() || frame.active_bins.is_empty() {
        return Err(Error::NoReference);
    }
    let n = frame.fft_size;
    let want = frame.body_offset(frame.num_symbols() - 1) + n;
    if received.len() < want {
        return Err(Error::TooShort {
            needed: want,
            got: received.len(),
        });
    }

    // rx[s][b] for each active bin; the demod window of each symbol skips
    // its cyclic prefix.
    let bins: Vec<usize> = frame
        .active_bins
        .iter()
        .map(|&b| b.rem_euclid(n as i64) as usize)
        .collect();
    let rx: Vec<Vec<Complex64>> = (0..frame.num_symbols())
        .map(|s| {
            let off = frame.body_offset(s);
            let spec = fft::fft(&received.samples()[off..off + n]);
            bins.iter().map(|&k| spec[k]).collect()
        })
        .collect();

    let mut err_power = 0.0f64;
    let mut ref_power = 0.0f64;
    for (bi, _) in bins.iter().enumerate() {
        let mut num = Complex64::new(0.0, 0.0);
        let mut den = 0.0f64;
        for (s, refs) in frame.reference.iter().enumerate() {
            num += refs[bi] * rx[s][bi].conj();
            den += rx[s][bi].norm_sqr();
        }
        let w = if den > 0.0 { num / den } else { Complex64::new(0.0, 0.0) };
        for (s, refs) in frame.reference.iter().enumerate() {
            err_power += (w * rx[s][bi] - refs[bi]).norm_sqr();
            ref_power += refs[bi].norm_sqr();
        }
    }
    if ref_power <= 0.0 {
        return Err(Error::NoReference);
    }
    Ok((10.0 * (err_power / ref_power).log10()).max(DB_FLOOR))
}

/// Adjacent channel leakage ratio in dBc: integrated Welch-periodogram power
/// in the band of the same width immediately above the channel (wrapping
/// past Nyquist) over the in-band power. Lower is better.
///
/// `channel_bw_fraction` is the occupied bandwidth as a fraction of the
/// sample rate; it must leave room for the adjacent band, so at most 1/2.
pub fn aclr_dbc(sig: &SampledSignal, channel_bw_fraction: f64) -> Result<f64> {
    if sig.len() < 4096 {
        return Err(Error::TooShort {
            needed: 4096,
            got: sig.len(),
        });
    }
    if !(channel_bw_fraction > 0.0 && channel_bw_fraction <= 0.5) {
        return Err(Error::BadBandwidth(channel_bw_fraction));
    }
    let psd = spectrum::welch_psd(sig.samples(), 1024)?;
    let half = channel_bw_fraction / 2.0;
    let in_band = spectrum::channel_power(&psd, half);
    let adjacent = spectrum::band_power(&psd, half, 3.0 * half);
    if in_band <= 0.0 {
        return Err(Error::DegenerateTarget);
    }
    Ok(10.0 * (adjacent / in_band).max(1e-30).log10())
}
