//! Signal representation, synthetic excitation, and alignment.
//!
//! [`SampledSignal`] is the carrier type for every record in the toolkit:
//! inputs, outputs, fitted static parts, and the residuals derived from them.
//! Real-valued processes are embedded with zero imaginary parts so the rest
//! of the crate has a single complex code path.

mod align;
mod generate;
mod io;

pub use align::{align_and_normalize, align_pair, AlignmentReport};
pub use generate::{generate_filtered_noise, generate_multicarrier, MulticarrierFrame};
pub use io::{read_binary, read_csv, write_binary, write_csv};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::stats;

/// Whether a record is a real process or complex baseband.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Domain {
    /// Real-valued process embedded with zero imaginary parts.
    Real,
    /// Complex-baseband (I/Q) record.
    ComplexBaseband,
}

/// A finite sequence of samples at a fixed rate.
///
/// Invariants, enforced at construction:
/// - at least one sample, every sample finite;
/// - `Domain::Real` implies all imaginary parts are exactly zero;
/// - the sample rate is strictly positive and finite.
///
/// Mean power is therefore always finite and [`SampledSignal::mean_power`]
/// cannot fail.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal {
    samples: Vec<Complex64>,
    sample_rate_hz: f64,
    domain: Domain,
}

impl SampledSignal {
    pub fn new(samples: Vec<Complex64>, sample_rate_hz: f64, domain: Domain) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptySignal);
        }
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(Error::BadFormat(format!(
                "sample rate must be positive and finite, got {sample_rate_hz}"
            )));
        }
        for (index, s) in samples.iter().enumerate() {
            if !s.re.is_finite() || !s.im.is_finite() {
                return Err(Error::NonFiniteSample { index });
            }
            if domain == Domain::Real && s.im != 0.0 {
                return Err(Error::DomainViolation { index });
            }
        }
        Ok(Self {
            samples,
            sample_rate_hz,
            domain,
        })
    }

    /// Embed a real-valued record with zero imaginary parts.
    pub fn from_real(samples: &[f64], sample_rate_hz: f64) -> Result<Self> {
        Self::new(
            samples.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
            sample_rate_hz,
            Domain::Real,
        )
    }

    pub fn from_complex(samples: Vec<Complex64>, sample_rate_hz: f64) -> Result<Self> {
        Self::new(samples, sample_rate_hz, Domain::ComplexBaseband)
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        false // length >= 1 by construction
    }

    /// Mean power `E[|s|^2]`, always finite for a valid signal.
    pub fn mean_power(&self) -> f64 {
        stats::mean_power(&self.samples)
    }

    /// Copy of the sub-record `[start, start+len)`.
    pub fn slice(&self, start: usize, len: usize) -> Result<Self> {
        if start + len > self.samples.len() || len == 0 {
            return Err(Error::BadLength {
                len,
                reason: "slice out of bounds",
            });
        }
        Ok(Self {
            samples: self.samples[start..start + len].to_vec(),
            sample_rate_hz: self.sample_rate_hz,
            domain: self.domain,
        })
    }

    /// Scale every sample by a complex gain. The result is complex baseband
    /// unless the gain is real and the input was real.
    pub fn scaled(&self, gain: Complex64) -> Self {
        let domain = if self.domain == Domain::Real && gain.im == 0.0 {
            Domain::Real
        } else {
            Domain::ComplexBaseband
        };
        Self {
            samples: self.samples.iter().map(|s| s * gain).collect(),
            sample_rate_hz: self.sample_rate_hz,
            domain,
        }
    }
}

/// Mean power of a signal; kept as a free function to mirror the rest of the
/// statistics API.
pub fn mean_power(sig: &SampledSignal) -> f64 {
    sig.mean_power()
}
