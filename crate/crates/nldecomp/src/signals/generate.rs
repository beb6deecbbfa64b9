//! Seeded excitation generators. Every generator is a pure function of
//! (seed, parameters): repeated calls are bit-identical.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{Domain, SampledSignal};
use crate::error::{Error, Result};
use crate::fft;
use crate::stats;

/// Unit-variance complex Gaussian draw, deterministic in the seed.
pub(crate) fn complex_gaussian(seed: u64, length: usize) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..length)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
        })
        .collect()
}

fn renormalize_unit_power(samples: &mut [Complex64]) {
    let p = stats::mean_power(samples);
    if p > 0.0 {
        let scale = 1.0 / p.sqrt();
        for s in samples.iter_mut() {
            *s *= scale;
        }
    }
}

/// Zero-mean complex Gaussian noise low-pass filtered to `bandwidth_fraction`
/// of Nyquist and renormalized to unit mean power.
///
/// Filtering is a frequency-domain brick wall: bins with |f| beyond
/// `bandwidth_fraction/2` cycles/sample are zeroed, so the out-of-band power
/// of the result is exactly zero up to rounding.
pub fn generate_filtered_noise(
    seed: u64,
    length: usize,
    bandwidth_fraction: f64,
) -> Result<SampledSignal> {
    if !(bandwidth_fraction > 0.0 && bandwidth_fraction <= 1.0) {
        return Err(Error::BadBandwidth(bandwidth_fraction));
    }
    if length < 64 {
        return Err(Error::TooShort {
            needed: 64,
            got: length,
        });
    }
    let mut samples = complex_gaussian(seed, length);
    if bandwidth_fraction < 1.0 {
        fft::fft_in_place(&mut samples);
        let cutoff = bandwidth_fraction / 2.0;
        for (k, v) in samples.iter_mut().enumerate() {
            let f = fft::signed_bin(k, length) as f64 / length as f64;
            if f.abs() > cutoff {
                *v = Complex64::new(0.0, 0.0);
            }
        }
        fft::ifft_in_place(&mut samples);
    }
    renormalize_unit_power(&mut samples);
    SampledSignal::new(samples, 1.0, Domain::ComplexBaseband)
}

/// A multicarrier record together with the frequency-domain reference grid
/// needed to demodulate it for error-vector measurements.
///
/// Symbols are cyclic-prefixed and joined with raised-cosine crossfades that
/// live entirely inside the prefix, so each symbol's body (the last
/// `fft_size` samples of its stride) is an exact inverse DFT of the
/// reference grid while the assembled record stays spectrally contained.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MulticarrierFrame {
    pub signal_rate_hz: f64,
    /// DFT length of one symbol body.
    pub fft_size: usize,
    /// Cyclic prefix length; symbol m occupies [m*stride, m*stride + stride)
    /// with stride = fft_size + cp_len, body starting at m*stride + cp_len.
    pub cp_len: usize,
    /// Signed frequency indices of the active subcarriers, ascending.
    pub active_bins: Vec<i64>,
    /// Transmitted constellation points, `reference[symbol][bin]`, for every
    /// symbol whose body lies fully inside the record.
    pub reference: Vec<Vec<Complex64>>,
    pub constellation_order: u32,
    /// Channel bandwidth as a fraction of the sample rate; subcarriers
    /// occupy 90% of it, the rest is guard.
    pub channel_fraction: f64,
    #[serde(skip)]
    signal: Option<SampledSignal>,
}

impl MulticarrierFrame {
    pub fn signal(&self) -> &SampledSignal {
        self.signal
            .as_ref()
            .expect("frame constructed without signal")
    }

    pub fn into_signal(self) -> SampledSignal {
        self.signal.expect("frame constructed without signal")
    }

    pub fn num_symbols(&self) -> usize {
        self.reference.len()
    }

    pub fn stride(&self) -> usize {
        self.fft_size + self.cp_len
    }

    /// Start of symbol m's demodulation window.
    pub fn body_offset(&self, symbol: usize) -> usize {
        symbol * self.stride() + self.cp_len
    }

    /// Reattach a signal after deserializing the reference grid from JSON.
    pub fn with_signal(mut self, signal: SampledSignal) -> Self {
        self.signal = Some(signal);
        self
    }
}

fn qam_point(rng: &mut ChaCha8Rng, side: u32) -> Complex64 {
    let a = rng.gen_range(0..side) as f64;
    let b = rng.gen_range(0..side) as f64;
    let l = side as f64;
    // Unit average symbol energy.
    let norm = (2.0 * (l * l - 1.0) / 3.0).sqrt();
    Complex64::new(2.0 * a - l + 1.0, 2.0 * b - l + 1.0) / norm
}

/// OFDM-like multicarrier baseband: random QAM symbols on the active
/// subcarrier fraction of each DFT symbol, inverse-transformed to time
/// domain with a cyclic prefix, windowed overlap-add between symbols, and
/// renormalized to unit mean power.
///
/// The DFT length is the largest power of two at most min(1024, length/2);
/// the cyclic prefix is one eighth of it, and raised-cosine crossfades of
/// half the prefix smooth every junction. Active subcarriers are the bins
/// closest to DC, DC itself excluded, so the record is exactly zero-mean.
pub fn generate_multicarrier(
    seed: u64,
    length: usize,
    active_fraction: f64,
    constellation_order: u32,
) -> Result<MulticarrierFrame> {
    let side = match constellation_order {
        4 => 2,
        16 => 4,
        64 => 8,
        other => return Err(Error::BadOrder(other as usize)),
    };
    if !(active_fraction > 0.0 && active_fraction < 1.0) {
        return Err(Error::BadBandwidth(active_fraction));
    }
    if length < 64 {
        return Err(Error::TooShort {
            needed: 64,
            got: length,
        });
    }
    let fft_size = {
        let mut n = 16usize;
        while n * 2 <= (length / 2).min(1024) {
            n *= 2;
        }
        n
    };
    let cp_len = fft_size / 8;
    let ramp = cp_len;
    let stride = fft_size + cp_len;

    // Subcarriers fill 90% of the declared channel; the guard keeps the
    // occupied edge away from the channel boundary the way deployed
    // multicarrier systems do, so leakage measurements see signal, not
    // window skirts. m/2 bins on each side of DC, DC excluded.
    let occupied = 0.9 * active_fraction;
    let half = ((occupied * fft_size as f64 / 2.0).round() as usize)
        .clamp(1, fft_size / 2 - 1);
    let active_bins: Vec<i64> = (-(half as i64)..=half as i64)
        .filter(|&k| k != 0)
        .collect();

    // Enough symbols to cover the record plus the trailing ramp.
    let num_blocks = length / stride + 2;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assembled = vec![Complex64::new(0.0, 0.0); num_blocks * stride + ramp];
    let mut reference = Vec::new();

    // cos^2 ramp-up; the complementary ramp-down makes crossfades sum to 1.
    let rc_up = |i: usize| -> f64 {
        let x = std::f64::consts::FRAC_PI_2 * (i as f64 + 0.5) / ramp as f64;
        x.sin() * x.sin()
    };

    for m in 0..num_blocks {
        let symbols: Vec<Complex64> = active_bins.iter().map(|_| qam_point(&mut rng, side)).collect();
        let mut body = vec![Complex64::new(0.0, 0.0); fft_size];
        for (&bin, &sym) in active_bins.iter().zip(&symbols) {
            let k = bin.rem_euclid(fft_size as i64) as usize;
            body[k] = sym;
        }
        fft::ifft_in_place(&mut body);

        // Extended block: [cp | body | cyclic suffix], ramped at both ends.
        let t0 = m * stride;
        for i in 0..stride + ramp {
            let src = if i < cp_len {
                body[fft_size - cp_len + i] // cyclic prefix
            } else if i < stride {
                body[i - cp_len]
            } else {
                body[i - stride] // cyclic suffix
            };
            let w = if i < ramp {
                rc_up(i)
            } else if i >= stride {
                1.0 - rc_up(i - stride)
            } else {
                1.0
            };
            assembled[t0 + i] += src * w;
        }
        if t0 + cp_len + fft_size <= length {
            reference.push(symbols);
        }
    }

    let mut samples = assembled;
    samples.truncate(length);
    renormalize_unit_power(&mut samples);
    let signal = SampledSignal::new(samples, 1.0, Domain::ComplexBaseband)?;
    Ok(MulticarrierFrame {
        signal_rate_hz: signal.sample_rate_hz(),
        fft_size,
        cp_len,
        active_bins,
        reference,
        constellation_order,
        channel_fraction: active_fraction,
        signal: Some(signal),
    })
}
