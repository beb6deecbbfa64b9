//! Static/dynamic decomposition of measured records.
//!
//! Given aligned input x and output y, a memoryless odd polynomial G is fit
//! by least squares, and the record splits into the four derived signals
//!
//! - total distortion d = y - x,
//! - dynamic residual h = y - G,
//! - static residual r = G - x,
//!
//! which satisfy the distortion identity r = d - h pointwise. The fit basis
//! is x|x|^(k-1) for odd k, so G(0) = 0 and G commutes with input phase
//! rotations.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signals::{align_pair, AlignmentReport, Domain, SampledSignal};
use crate::stats;

/// Highest supported polynomial order.
pub const MAX_ORDER: usize = 13;

/// Condition-number limit for the regression matrix.
pub const MAX_CONDITION: f64 = 1e12;

/// Default number of leading samples excluded from statistics.
pub const DEFAULT_GUARD: usize = 16;

/// Memoryless odd polynomial on the basis phi_k(x) = x|x|^(k-1).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StaticModel {
    order: usize,
    /// c_k for k = 1, 3, ..., order.
    coefficients: Vec<Complex64>,
    fit_condition_number: f64,
}

impl StaticModel {
    /// G(x) = x, i.e. c_1 = 1 and nothing else.
    pub fn identity() -> Self {
        Self {
            order: 1,
            coefficients: vec![Complex64::new(1.0, 0.0)],
            fit_condition_number: 1.0,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Coefficient of x|x|^(k-1) for odd k; index j holds k = 2j+1.
    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn fit_condition_number(&self) -> f64 {
        self.fit_condition_number
    }
}

/// Pointwise evaluation G[n] = sum_k c_k x[n] |x[n]|^(k-1).
pub fn apply_static(model: &StaticModel, x: &SampledSignal) -> SampledSignal {
    let samples: Vec<Complex64> = x
        .samples()
        .iter()
        .map(|&v| {
            let t = v.norm_sqr();
            let mut acc = Complex64::new(0.0, 0.0);
            let mut term = Complex64::new(1.0, 0.0);
            for &c in &model.coefficients {
                acc += c * term;
                term *= t;
            }
            v * acc
        })
        .collect();
    SampledSignal::new(samples, x.sample_rate_hz(), Domain::ComplexBaseband)
        .expect("static evaluation of a valid signal is finite")
}

fn basis_matrix(x: &[Complex64], terms: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(x.len(), terms, |n, j| {
        let v = x[n];
        v * v.norm_sqr().powi(j as i32)
    })
}

/// Least-squares fit of the static polynomial via QR orthogonalization.
///
/// `x` and `y` are assumed aligned and gain-normalized. The reported
/// condition number is that of the regression matrix (ratio of extreme
/// singular values of the R factor).
pub fn fit_static(x: &SampledSignal, y: &SampledSignal, order: usize) -> Result<StaticModel> {
    if order % 2 == 0 || order == 0 || order > MAX_ORDER {
        return Err(Error::BadOrder(order));
    }
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let terms = (order + 1) / 2;
    if x.len() < 10 * terms {
        return Err(Error::TooFewSamples {
            needed: 10 * terms,
            got: x.len(),
        });
    }

    let a = basis_matrix(x.samples(), terms);
    let b = DVector::from_column_slice(y.samples());
    let qr = a.qr();
    let r = qr.r();

    let singular = r.clone().svd(false, false).singular_values;
    let s_max = singular.iter().cloned().fold(0.0f64, f64::max);
    let s_min = singular.iter().cloned().fold(f64::INFINITY, f64::min);
    let condition = if s_min > 0.0 { s_max / s_min } else { f64::INFINITY };
    if !condition.is_finite() || condition > MAX_CONDITION {
        return Err(Error::IllConditioned {
            condition_number: condition,
        });
    }

    let qty = qr.q().adjoint() * b;
    let solved = r
        .solve_upper_triangular(&qty)
        .ok_or(Error::IllConditioned {
            condition_number: condition,
        })?;

    Ok(StaticModel {
        order,
        coefficients: solved.iter().cloned().collect(),
        fit_condition_number: condition,
    })
}

/// Options controlling [`decompose_opts`].
#[derive(Debug, Clone)]
pub struct DecomposeOptions {
    /// Run integer-lag alignment and gain normalization first.
    pub align: bool,
    /// Polynomial order; `None` selects the order minimizing residual power
    /// on a 20% holdout split, capped at [`MAX_ORDER`].
    pub order: Option<usize>,
    /// Leading samples excluded from the statistics support.
    pub guard: usize,
}

impl Default for DecomposeOptions {
    fn default() -> Self {
        Self {
            align: true,
            order: None,
            guard: DEFAULT_GUARD,
        }
    }
}

/// Aligned record with its fitted static part and the three residuals.
///
/// All six signals share one length; `support_start` marks the beginning of
/// the statistics support (prehistory transients excluded). The pointwise
/// relations d = y - x, h = y - G, r = G - x and the distortion identity
/// r = d - h hold over the whole record.
#[derive(Debug, Clone)]
pub struct DecompositionResult {
    pub x: SampledSignal,
    pub y: SampledSignal,
    pub g: SampledSignal,
    pub d: SampledSignal,
    pub h: SampledSignal,
    pub r: SampledSignal,
    pub static_model: StaticModel,
    pub alignment: AlignmentReport,
    pub support_start: usize,
}

/// Borrowed views of the six signals restricted to the statistics support.
pub struct Support<'a> {
    pub x: &'a [Complex64],
    pub y: &'a [Complex64],
    pub g: &'a [Complex64],
    pub d: &'a [Complex64],
    pub h: &'a [Complex64],
    pub r: &'a [Complex64],
}

impl DecompositionResult {
    pub fn support(&self) -> Support<'_> {
        let s = self.support_start;
        Support {
            x: &self.x.samples()[s..],
            y: &self.y.samples()[s..],
            g: &self.g.samples()[s..],
            d: &self.d.samples()[s..],
            h: &self.h.samples()[s..],
            r: &self.r.samples()[s..],
        }
    }

    pub fn support_len(&self) -> usize {
        self.x.len() - self.support_start
    }
}

fn pointwise_diff(a: &SampledSignal, b: &SampledSignal) -> SampledSignal {
    let samples: Vec<Complex64> = a
        .samples()
        .iter()
        .zip(b.samples())
        .map(|(u, v)| u - v)
        .collect();
    SampledSignal::new(samples, a.sample_rate_hz(), Domain::ComplexBaseband)
        .expect("difference of valid signals is finite")
}

fn residual_power(model: &StaticModel, x: &[Complex64], y: &[Complex64]) -> f64 {
    let t_len = x.len() as f64;
    x.iter()
        .zip(y)
        .map(|(&xv, &yv)| {
            let t = xv.norm_sqr();
            let mut acc = Complex64::new(0.0, 0.0);
            let mut term = Complex64::new(1.0, 0.0);
            for &c in &model.coefficients {
                acc += c * term;
                term *= t;
            }
            (yv - xv * acc).norm_sqr()
        })
        .sum::<f64>()
        / t_len
}

fn select_order(x: &SampledSignal, y: &SampledSignal, support_start: usize) -> Result<usize> {
    let n = x.len() - support_start;
    let split = support_start + (n * 4) / 5;
    let x_train = x.slice(support_start, split - support_start)?;
    let y_train = y.slice(support_start, split - support_start)?;
    let x_hold = &x.samples()[split..];
    let y_hold = &y.samples()[split..];

    let mut best: Option<(usize, f64)> = None;
    for order in (1..=MAX_ORDER).step_by(2) {
        let model = match fit_static(&x_train, &y_train, order) {
            Ok(m) => m,
            Err(Error::IllConditioned { .. }) | Err(Error::TooFewSamples { .. }) => break,
            Err(e) => return Err(e),
        };
        let hold_err = residual_power(&model, x_hold, y_hold);
        match best {
            Some((_, e)) if e <= hold_err => {}
            _ => best = Some((order, hold_err)),
        }
    }
    best.map(|(o, _)| o).ok_or(Error::TooFewSamples {
        needed: 10,
        got: n,
    })
}

/// Decompose with explicit order, alignment enabled, and the default guard.
pub fn decompose(x: &SampledSignal, y: &SampledSignal, order: usize) -> Result<DecompositionResult> {
    decompose_opts(
        x,
        y,
        &DecomposeOptions {
            order: Some(order),
            ..DecomposeOptions::default()
        },
    )
}

/// Full decomposition pipeline: optional alignment, static fit, residual
/// extraction.
pub fn decompose_opts(
    x: &SampledSignal,
    y: &SampledSignal,
    opts: &DecomposeOptions,
) -> Result<DecompositionResult> {
    let (x_al, y_al, alignment) = if opts.align {
        align_pair(x, y)?
    } else {
        if x.len() != y.len() {
            return Err(Error::LengthMismatch {
                left: x.len(),
                right: y.len(),
            });
        }
        (x.clone(), y.clone(), AlignmentReport::default())
    };

    let support_start = opts.guard.min(x_al.len().saturating_sub(64));
    let order = match opts.order {
        Some(o) => o,
        None => select_order(&x_al, &y_al, support_start)?,
    };

    let x_fit = x_al.slice(support_start, x_al.len() - support_start)?;
    let y_fit = y_al.slice(support_start, y_al.len() - support_start)?;
    let static_model = fit_static(&x_fit, &y_fit, order)?;

    let g = apply_static(&static_model, &x_al);
    let d = pointwise_diff(&y_al, &x_al);
    let h = pointwise_diff(&y_al, &g);
    let r = pointwise_diff(&g, &x_al);

    Ok(DecompositionResult {
        x: x_al,
        y: y_al,
        g,
        d,
        h,
        r,
        static_model,
        alignment,
        support_start,
    })
}

/// Residuals of the structural identities.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct IdentityReport {
    /// max |r[n] - (d[n] - h[n])| normalized by max(1, max|y|).
    pub pointwise_distortion_identity: f64,
    /// |E[|y|^2] - (E[|x|^2] + 2 Re E[x conj(d)] + E[|d|^2])| / max(1, E[|y|^2]).
    pub energy_identity_xd: f64,
    /// |E[|y|^2] - (E[|g|^2] + 2 Re E[g conj(h)] + E[|h|^2])| / max(1, E[|y|^2]).
    pub energy_identity_gh: f64,
    pub pass: bool,
}

/// Check the distortion identity r = d - h pointwise and both energy
/// identities over the statistics support. These are algebraic identities;
/// a violation beyond rounding signals an implementation bug.
pub fn verify_identities(res: &DecompositionResult, tol: f64) -> IdentityReport {
    let y_scale = res
        .y
        .samples()
        .iter()
        .map(|v| v.norm())
        .fold(1.0f64, f64::max);
    let max_pointwise = res
        .r
        .samples()
        .iter()
        .zip(res.d.samples())
        .zip(res.h.samples())
        .map(|((rv, dv), hv)| (rv - (dv - hv)).norm())
        .fold(0.0f64, f64::max)
        / y_scale;

    let s = res.support();
    let ey = stats::mean_power(s.y);
    let scale = ey.max(1.0);
    let xd = (ey - (stats::mean_power(s.x) + 2.0 * stats::cross_re(s.x, s.d) + stats::mean_power(s.d)))
        .abs()
        / scale;
    let gh = (ey - (stats::mean_power(s.g) + 2.0 * stats::cross_re(s.g, s.h) + stats::mean_power(s.h)))
        .abs()
        / scale;

    IdentityReport {
        pointwise_distortion_identity: max_pointwise,
        energy_identity_xd: xd,
        energy_identity_gh: gh,
        pass: max_pointwise <= tol && xd <= tol && gh <= tol,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signals::generate_filtered_noise;
    use crate::synth;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn fit_recovers_identity() {
        let x = generate_filtered_noise(31, 4096, 0.5).unwrap();
        let model = fit_static(&x, &x, 5).unwrap();
        assert!((model.coefficients()[0] - c(1.0, 0.0)).norm() < 1e-9);
        assert!(model.coefficients()[1].norm() < 1e-9);
        assert!(model.coefficients()[2].norm() < 1e-9);
    }

    #[test]
    fn fit_recovers_known_cubic() {
        let x = generate_filtered_noise(32, 4096, 0.5).unwrap();
        let yv: Vec<Complex64> = x
            .samples()
            .iter()
            .map(|&v| v + v * v.norm_sqr() * 0.1)
            .collect();
        let y = SampledSignal::from_complex(yv, 1.0).unwrap();
        let model = fit_static(&x, &y, 3).unwrap();
        assert!((model.coefficients()[0] - c(1.0, 0.0)).norm() < 1e-9);
        assert!((model.coefficients()[1] - c(0.1, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn fit_recovers_oracle_static_coefficients() {
        // White excitation: successive samples are independent, so memory
        // terms are uncorrelated with the static basis and do not bias the
        // fit.
        let spec = synth::make_memory_polynomial(42, 5, 3, 0.3).unwrap();
        let x = generate_filtered_noise(33, 65536, 1.0).unwrap();
        let y = synth::simulate(&spec, &x).unwrap();
        let model = fit_static(&x, &y, 5).unwrap();
        for k in 0..3 {
            let truth = spec.static_coefficient(k);
            let got = model.coefficients()[k];
            assert!(
                (got - truth).norm() <= 0.05 * truth.norm().max(0.05),
                "k={k}: {got} vs {truth}"
            );
        }
    }

    #[test]
    fn fit_rejects_bad_order_and_short_records() {
        let x = generate_filtered_noise(34, 512, 1.0).unwrap();
        assert!(matches!(fit_static(&x, &x, 2), Err(Error::BadOrder(2))));
        assert!(matches!(fit_static(&x, &x, 15), Err(Error::BadOrder(15))));
        let short = x.slice(0, 20).unwrap();
        assert!(matches!(
            fit_static(&short, &short, 5),
            Err(Error::TooFewSamples { .. })
        ));
    }

    #[test]
    fn apply_static_identity_and_zero() {
        let x = generate_filtered_noise(35, 512, 1.0).unwrap();
        let id = StaticModel::identity();
        assert_eq!(apply_static(&id, &x).samples(), x.samples());
        let zero = StaticModel {
            order: 3,
            coefficients: vec![c(0.0, 0.0); 2],
            fit_condition_number: 1.0,
        };
        assert!(apply_static(&zero, &x).samples().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn fitted_static_tracks_oracle_on_holdout() {
        let spec = synth::make_memory_polynomial(42, 5, 3, 0.3).unwrap();
        let x = generate_filtered_noise(36, 32768, 1.0).unwrap();
        let y = synth::simulate(&spec, &x).unwrap();
        let model = fit_static(&x, &y, 5).unwrap();
        let x2 = generate_filtered_noise(37, 32768, 1.0).unwrap();
        let g_fit = apply_static(&model, &x2);
        let g_true = synth::true_static_part(&spec, &x2).unwrap();
        let err: f64 = g_fit
            .samples()
            .iter()
            .zip(g_true.samples())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            / g_true.samples().iter().map(|v| v.norm_sqr()).sum::<f64>();
        let nmse_db = 10.0 * err.log10();
        assert!(nmse_db <= -30.0, "NMSE {nmse_db} dB");
    }

    #[test]
    fn distortionless_decomposition_is_all_zero() {
        let x = generate_filtered_noise(38, 4096, 0.5).unwrap();
        let res = decompose(&x, &x, 5).unwrap();
        let s = res.support();
        assert!(stats::mean_power(s.d) < 1e-24);
        assert!(stats::mean_power(s.h) < 1e-24);
        assert!(stats::mean_power(s.r) < 1e-24);
    }

    #[test]
    fn linear_gain_without_normalization() {
        let x = generate_filtered_noise(39, 4096, 0.5).unwrap();
        let y = x.scaled(c(2.0, 0.0));
        let res = decompose_opts(
            &x,
            &y,
            &DecomposeOptions {
                align: false,
                order: Some(3),
                guard: 16,
            },
        )
        .unwrap();
        let s = res.support();
        for i in 0..s.x.len() {
            assert!((s.g[i] - s.x[i] * 2.0).norm() < 1e-9);
            assert!(s.h[i].norm() < 1e-9);
            assert!((s.d[i] - s.x[i]).norm() < 1e-12);
            assert!((s.r[i] - s.x[i]).norm() < 1e-9);
        }
    }

    #[test]
    fn variance_domination_on_seeded_oracle() {
        let spec = synth::make_memory_polynomial(42, 5, 3, 0.3).unwrap();
        let x = generate_filtered_noise(40, 65536, 0.5).unwrap();
        let y = synth::simulate(&spec, &x).unwrap();
        let res = decompose(&x, &y, 5).unwrap();
        let s = res.support();
        assert!(stats::variance(s.h) < stats::variance(s.d));
    }

    #[test]
    fn identities_hold_on_seeded_run() {
        let spec = synth::make_memory_polynomial(42, 5, 3, 0.3).unwrap();
        let x = generate_filtered_noise(41, 65536, 0.5).unwrap();
        let y = synth::simulate(&spec, &x).unwrap();
        let res = decompose(&x, &y, 5).unwrap();
        let report = verify_identities(&res, 1e-9);
        assert!(report.pass, "{report:?}");
        assert!(report.pointwise_distortion_identity <= 1e-12);
    }

    #[test]
    fn identities_exact_for_distortionless() {
        let x = generate_filtered_noise(42, 2048, 0.5).unwrap();
        let res = decompose(&x, &x, 3).unwrap();
        let report = verify_identities(&res, 1e-12);
        assert_eq!(report.pointwise_distortion_identity, 0.0);
        assert!(report.energy_identity_xd <= 1e-15);
        assert!(report.energy_identity_gh <= 1e-15);
    }

    #[test]
    fn nested_orders_never_increase_residual_power() {
        let spec = synth::make_memory_polynomial(17, 7, 2, 0.2).unwrap();
        let x = generate_filtered_noise(43, 16384, 0.5).unwrap();
        let y = synth::simulate(&spec, &x).unwrap();
        let mut last = f64::INFINITY;
        for order in (1..=13).step_by(2) {
            let model = fit_static(&x, &y, order).unwrap();
            let p = residual_power(&model, x.samples(), y.samples());
            assert!(p <= last + 1e-12, "order {order}: {p} > {last}");
            last = p;
        }
    }

    #[test]
    fn auto_order_matches_oracle_scale() {
        let spec = synth::make_memory_polynomial(42, 5, 3, 0.3).unwrap();
        let x = generate_filtered_noise(44, 32768, 0.5).unwrap();
        let y = synth::simulate(&spec, &x).unwrap();
        let res = decompose_opts(&x, &y, &DecomposeOptions::default()).unwrap();
        assert!(res.static_model.order() >= 5, "order {}", res.static_model.order());
    }

    #[test]
    fn variance_statistics_are_shift_invariant() {
        // Adding a DC offset to the residual signals must not move the
        // centered variances; this is what makes the variance analysis hold
        // for arbitrary-mean records.
        let spec = synth::make_memory_polynomial(42, 5, 3, 0.3).unwrap();
        let x = generate_filtered_noise(45, 16384, 0.5).unwrap();
        let y = synth::simulate(&spec, &x).unwrap();
        let res = decompose(&x, &y, 5).unwrap();
        let s = res.support();
        let offset = c(0.37, -0.21);
        let shifted: Vec<Complex64> = s.d.iter().map(|v| v + offset).collect();
        assert!((stats::variance(&shifted) - stats::variance(s.d)).abs() < 1e-9);
        let h_shift: Vec<Complex64> = s.h.iter().map(|v| v + offset).collect();
        let r_shift: Vec<Complex64> = s.r.iter().map(|v| v + offset).collect();
        assert!((stats::variance(&h_shift) - stats::variance(s.h)).abs() < 1e-9);
        assert!((stats::variance(&r_shift) - stats::variance(s.r)).abs() < 1e-9);
    }
}
