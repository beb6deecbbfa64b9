//! Ground-truth causal nonlinear system simulators.
//!
//! These desk-scale oracles stand in for measured hardware. The memory
//! polynomial is the default because its static/dynamic split is exact: the
//! tap-0 terms are its static part, everything else is memory, so a fitted
//! decomposition can be validated against known ground truth.
//!
//! All coefficient generation is a pure function of the seed, and the random
//! draws are consumed in the same order regardless of `dynamic_strength`, so
//! sweeping the strength of one seed varies only the memory taps while the
//! static core stays fixed.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signals::{Domain, SampledSignal};

/// Structural family of a synthetic system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SystemKind {
    /// Odd polynomial of the instantaneous input; no memory.
    MemorylessPoly,
    /// Static polynomial followed by an FIR filter.
    Hammerstein,
    /// FIR filter followed by a static polynomial.
    Wiener,
    /// Parallel odd-order branches, each with its own FIR taps.
    MemoryPolynomial,
}

/// Largest |x[n]| accepted by [`simulate`]; keeps high-order polynomial
/// terms well-conditioned.
pub const MAX_INPUT_MAGNITUDE: f64 = 10.0;

/// Geometric decay of memory-tap magnitudes.
const TAP_DECAY: f64 = 0.5;

/// Parametric description of a synthetic causal nonlinear system.
///
/// `coefficients[k][q]` weights the term `x[n-q] * |x[n-q]|^(2k)` for the
/// memory-polynomial kinds; for Hammerstein/Wiener only the tap-0 column is
/// used as the static polynomial and `fir_taps` carries the linear block.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SystemSpec {
    kind: SystemKind,
    nl_order: usize,
    memory_depth: usize,
    coefficients: Vec<Vec<Complex64>>,
    fir_taps: Vec<Complex64>,
    seed: u64,
}

impl SystemSpec {
    pub fn kind(&self) -> SystemKind {
        self.kind
    }

    pub fn nl_order(&self) -> usize {
        self.nl_order
    }

    pub fn memory_depth(&self) -> usize {
        self.memory_depth
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Static-branch coefficient of nonlinear order `2k+1`.
    pub fn static_coefficient(&self, k: usize) -> Complex64 {
        self.coefficients[k][0]
    }

    pub fn num_orders(&self) -> usize {
        self.coefficients.len()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

fn check_odd_order(nl_order: usize) -> Result<usize> {
    if nl_order % 2 == 0 || nl_order == 0 {
        return Err(Error::BadOrder(nl_order));
    }
    Ok((nl_order + 1) / 2)
}

/// Random complex value with unit-order magnitude in [0.5, 1] and uniform
/// phase. Bounding the magnitude away from zero keeps every seeded system
/// detectably nonlinear.
fn ring_sample(rng: &mut ChaCha8Rng) -> Complex64 {
    let mag = 0.5 + 0.5 * rng.gen::<f64>();
    let phase = 2.0 * std::f64::consts::PI * rng.gen::<f64>();
    Complex64::from_polar(mag, phase)
}

/// 1/sqrt(E[|x|^(2(2k+1))]) for unit-power complex Gaussian input; scaling
/// order-(2k+1) coefficients by this keeps each branch's output power at the
/// same order of magnitude.
fn order_normalizer(k: usize) -> f64 {
    let mut f = 1.0f64;
    for i in 1..=(2 * k + 1) {
        f *= i as f64;
    }
    1.0 / f.sqrt()
}

const STATIC_RADIUS: f64 = 0.35;
const DYNAMIC_RADIUS: f64 = 0.1;
/// Memory taps of nonlinear orders are tilted down relative to the linear
/// ones; memory effects in the systems this mimics are predominantly
/// quasi-linear (thermal and bias dynamics).
const DYNAMIC_ORDER_TILT: f64 = 0.08;

fn draw_coefficients(
    rng: &mut ChaCha8Rng,
    n_orders: usize,
    memory_depth: usize,
    dynamic_strength: f64,
) -> Vec<Vec<Complex64>> {
    let mut coeffs = vec![vec![Complex64::new(0.0, 0.0); memory_depth + 1]; n_orders];
    for k in 0..n_orders {
        for q in 0..=memory_depth {
            let draw = ring_sample(rng);
            coeffs[k][q] = if k == 0 && q == 0 {
                Complex64::new(1.0, 0.0)
            } else if q == 0 {
                draw * (STATIC_RADIUS * order_normalizer(k))
            } else {
                let tilt = if k == 0 { 1.0 } else { DYNAMIC_ORDER_TILT };
                draw * (dynamic_strength
                    * TAP_DECAY.powi(q as i32)
                    * DYNAMIC_RADIUS
                    * tilt
                    * order_normalizer(k))
            };
        }
    }
    coeffs
}

fn draw_fir(rng: &mut ChaCha8Rng, memory_depth: usize, dynamic_strength: f64) -> Vec<Complex64> {
    let mut taps = vec![Complex64::new(0.0, 0.0); memory_depth + 1];
    for (q, tap) in taps.iter_mut().enumerate() {
        let draw = ring_sample(rng);
        *tap = if q == 0 {
            Complex64::new(1.0, 0.0)
        } else {
            draw * (dynamic_strength * TAP_DECAY.powi(q as i32) * DYNAMIC_RADIUS)
        };
    }
    taps
}

/// Memory polynomial with tap-0 dominance: the leading linear coefficient is
/// fixed to 1, higher-order static terms are drawn small, and taps q >= 1
/// scale with `dynamic_strength * 0.5^q`.
pub fn make_memory_polynomial(
    seed: u64,
    nl_order: usize,
    memory_depth: usize,
    dynamic_strength: f64,
) -> Result<SystemSpec> {
    let n_orders = check_odd_order(nl_order)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coefficients = draw_coefficients(&mut rng, n_orders, memory_depth, dynamic_strength);
    let kind = if memory_depth == 0 {
        SystemKind::MemorylessPoly
    } else {
        SystemKind::MemoryPolynomial
    };
    Ok(SystemSpec {
        kind,
        nl_order,
        memory_depth,
        coefficients,
        fir_taps: Vec::new(),
        seed,
    })
}

/// Memoryless odd polynomial (a memory polynomial with depth 0).
pub fn make_memoryless(seed: u64, nl_order: usize) -> Result<SystemSpec> {
    make_memory_polynomial(seed, nl_order, 0, 0.0)
}

/// Static polynomial followed by an FIR block.
pub fn make_hammerstein(
    seed: u64,
    nl_order: usize,
    memory_depth: usize,
    dynamic_strength: f64,
) -> Result<SystemSpec> {
    let n_orders = check_odd_order(nl_order)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coefficients = draw_coefficients(&mut rng, n_orders, 0, 0.0);
    let fir_taps = draw_fir(&mut rng, memory_depth, dynamic_strength);
    Ok(SystemSpec {
        kind: SystemKind::Hammerstein,
        nl_order,
        memory_depth,
        coefficients,
        fir_taps,
        seed,
    })
}

/// FIR block followed by a static polynomial.
pub fn make_wiener(
    seed: u64,
    nl_order: usize,
    memory_depth: usize,
    dynamic_strength: f64,
) -> Result<SystemSpec> {
    let n_orders = check_odd_order(nl_order)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coefficients = draw_coefficients(&mut rng, n_orders, 0, 0.0);
    let fir_taps = draw_fir(&mut rng, memory_depth, dynamic_strength);
    Ok(SystemSpec {
        kind: SystemKind::Wiener,
        nl_order,
        memory_depth,
        coefficients,
        fir_taps,
        seed,
    })
}

/// Odd polynomial in x with the given coefficient column, evaluated as
/// x * (c0 + c1 t + c2 t^2 + ...) with t = |x|^2, accumulated in ascending
/// order.
fn eval_odd_poly(column: &[Complex64], x: Complex64) -> Complex64 {
    let t = x.norm_sqr();
    let mut term = Complex64::new(1.0, 0.0);
    let mut acc = Complex64::new(0.0, 0.0);
    for &c in column {
        acc += c * term;
        term *= t;
    }
    x * acc
}

fn check_input(x: &SampledSignal) -> Result<()> {
    for (index, s) in x.samples().iter().enumerate() {
        let magnitude = s.norm();
        if magnitude > MAX_INPUT_MAGNITUDE {
            return Err(Error::SampleOutOfRange { index, magnitude });
        }
    }
    Ok(())
}

fn check_output(y: Vec<Complex64>, rate: f64) -> Result<SampledSignal> {
    for (index, s) in y.iter().enumerate() {
        if !s.re.is_finite() || !s.im.is_finite() {
            return Err(Error::NonFiniteOutput { index });
        }
    }
    SampledSignal::new(y, rate, Domain::ComplexBaseband)
}

/// Exact evaluation of the structural model with zero prehistory: x[n] = 0
/// for n < 0. Output has the input's length and sample rate.
pub fn simulate(spec: &SystemSpec, x: &SampledSignal) -> Result<SampledSignal> {
    check_input(x)?;
    let xs = x.samples();
    let n = xs.len();
    let zero = Complex64::new(0.0, 0.0);
    let at = |i: i64| -> Complex64 {
        if i < 0 {
            zero
        } else {
            xs[i as usize]
        }
    };
    let y: Vec<Complex64> = match spec.kind {
        SystemKind::MemorylessPoly | SystemKind::MemoryPolynomial => (0..n)
            .map(|i| {
                let mut acc = zero;
                for (k, row) in spec.coefficients.iter().enumerate() {
                    for (q, &c) in row.iter().enumerate() {
                        let xq = at(i as i64 - q as i64);
                        let t = xq.norm_sqr();
                        acc += c * xq * t.powi(k as i32);
                    }
                }
                acc
            })
            .collect(),
        SystemKind::Hammerstein => {
            let poly = column0(&spec.coefficients);
            let p: Vec<Complex64> = xs.iter().map(|&v| eval_odd_poly(&poly, v)).collect();
            (0..n)
                .map(|i| {
                    let mut acc = zero;
                    for (q, &tap) in spec.fir_taps.iter().enumerate() {
                        let j = i as i64 - q as i64;
                        if j >= 0 {
                            acc += tap * p[j as usize];
                        }
                    }
                    acc
                })
                .collect()
        }
        SystemKind::Wiener => {
            let poly = column0(&spec.coefficients);
            (0..n)
                .map(|i| {
                    let mut u = zero;
                    for (q, &tap) in spec.fir_taps.iter().enumerate() {
                        u += tap * at(i as i64 - q as i64);
                    }
                    eval_odd_poly(&poly, u)
                })
                .collect()
        }
    };
    check_output(y, x.sample_rate_hz())
}

fn column0(coefficients: &[Vec<Complex64>]) -> Vec<Complex64> {
    coefficients.iter().map(|row| row[0]).collect()
}

/// Ground-truth static part: the tap-0 terms only. Errors for Wiener systems,
/// whose static part has no closed form in this parameterization.
pub fn true_static_part(spec: &SystemSpec, x: &SampledSignal) -> Result<SampledSignal> {
    check_input(x)?;
    let y: Vec<Complex64> = match spec.kind {
        SystemKind::MemorylessPoly | SystemKind::MemoryPolynomial => x
            .samples()
            .iter()
            .map(|&v| {
                let t = v.norm_sqr();
                let mut acc = Complex64::new(0.0, 0.0);
                for (k, row) in spec.coefficients.iter().enumerate() {
                    acc += row[0] * v * t.powi(k as i32);
                }
                acc
            })
            .collect(),
        SystemKind::Hammerstein => {
            let f0 = spec.fir_taps[0];
            x.samples()
                .iter()
                .map(|&v| f0 * eval_odd_poly(&column0(&spec.coefficients), v))
                .collect()
        }
        SystemKind::Wiener => return Err(Error::NotSeparable),
    };
    check_output(y, x.sample_rate_hz())
}
