//! Time-delay feature construction for the shallow learners.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signals::SampledSignal;

/// Per-tap real feature of a complex sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FeatureKind {
    /// Real part.
    I,
    /// Imaginary part.
    Q,
    /// |x|
    Abs,
    /// |x|^2
    Abs2,
    /// |x|^3
    Abs3,
}

impl FeatureKind {
    fn eval(self, v: num_complex::Complex64) -> f64 {
        match self {
            FeatureKind::I => v.re,
            FeatureKind::Q => v.im,
            FeatureKind::Abs => v.norm(),
            FeatureKind::Abs2 => v.norm_sqr(),
            FeatureKind::Abs3 => v.norm_sqr() * v.norm(),
        }
    }
}

/// Which features to build: for each tap q in 0..=delay_taps, the listed
/// kinds of x[n-q], in tap-major order (all kinds of tap 0, then tap 1, ...).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub delay_taps: usize,
    pub feature_kinds: Vec<FeatureKind>,
}

impl FeatureSpec {
    pub fn feature_count(&self) -> usize {
        (self.delay_taps + 1) * self.feature_kinds.len()
    }
}

/// Dense row-major real matrix of shape rows x cols.
#[derive(Debug, Clone)]
pub struct FeatureMatrix {
    data: Vec<f64>,
    rows: usize,
    cols: usize,
}

impl FeatureMatrix {
    pub(crate) fn from_raw(data: Vec<f64>, rows: usize, cols: usize) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Self { data, rows, cols }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Copy of the row range [start, end).
    pub fn slice_rows(&self, start: usize, end: usize) -> FeatureMatrix {
        FeatureMatrix {
            data: self.data[start * self.cols..end * self.cols].to_vec(),
            rows: end - start,
            cols: self.cols,
        }
    }
}

/// Row n concatenates, for each tap q, the selected kinds of x[n-q], with
/// zero prehistory for n < q.
pub fn build_features(x: &SampledSignal, spec: &FeatureSpec) -> Result<FeatureMatrix> {
    let n = x.len();
    if n <= spec.delay_taps {
        return Err(Error::TooShort {
            needed: spec.delay_taps + 1,
            got: n,
        });
    }
    let cols = spec.feature_count();
    let zero = num_complex::Complex64::new(0.0, 0.0);
    let mut data = Vec::with_capacity(n * cols);
    for i in 0..n {
        for q in 0..=spec.delay_taps {
            let v = if i >= q { x.samples()[i - q] } else { zero };
            for kind in &spec.feature_kinds {
                data.push(kind.eval(v));
            }
        }
    }
    Ok(FeatureMatrix {
        data,
        rows: n,
        cols,
    })
}
