//! Scalar diagnostics of a decomposition.
//!
//! Everything in this module reduces a [`DecompositionResult`] to numbers:
//! the static and dynamic behavior indicators theta and alpha, the memory
//! finiteness index, residual variances, the weak-uncorrelatedness level,
//! and the deviation-induced orthogonality bound (DOB) slacks.
//!
//! Conventions: expectations are plain sample means over the statistics
//! support; cross-moments over complex records take `Re{E[a conj(b)]}`;
//! `theta`, `alpha`, and the memory index use raw (uncentered) second
//! moments, while `var_*` fields are mean-centered variances.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::decomp::DecompositionResult;
use crate::error::{Error, Result};
use crate::stats;

/// Distortion below this fraction of output power counts as degenerate.
pub const DEGENERATE_DISTORTION_FRACTION: f64 = 1e-15;

/// Static behavior indicator: net power change through the static block,
/// `E[|G|^2] - E[|X|^2]`.
pub fn theta(res: &DecompositionResult) -> f64 {
    let s = res.support();
    stats::mean_power(s.g) - stats::mean_power(s.x)
}

/// Dynamic behavior indicator: net dynamic interaction power,
/// `Re E[h conj(G)] - Re E[d conj(X)]`.
pub fn alpha(res: &DecompositionResult) -> f64 {
    let s = res.support();
    stats::cross_re(s.h, s.g) - stats::cross_re(s.d, s.x)
}

/// |(theta + 2 alpha) - (E[|r|^2] + 2 Re E[r conj(h)])|, normalized by
/// max(1, E[|y|^2]). This is an algebraic identity; anything beyond rounding
/// is an implementation bug.
pub fn diagnostic_identity_residual(res: &DecompositionResult) -> f64 {
    let s = res.support();
    let lhs = theta(res) + 2.0 * alpha(res);
    let rhs = stats::mean_power(s.r) + 2.0 * stats::cross_re(s.r, s.h);
    (lhs - rhs).abs() / stats::mean_power(s.y).max(1.0)
}

/// Memory finiteness index `M = 1 - E[|h|^2]/E[|d|^2]`.
///
/// Cross-checked against the equivalent form `(theta + 2 alpha)/E[|d|^2]`;
/// the two agree to rounding by the diagnostic identity. Errors with
/// [`Error::DegenerateDistortion`] when the distortion power is negligible.
pub fn mfi(res: &DecompositionResult) -> Result<f64> {
    let s = res.support();
    let pd = stats::mean_power(s.d);
    let py = stats::mean_power(s.y);
    if pd <= DEGENERATE_DISTORTION_FRACTION * py.max(f64::MIN_POSITIVE) {
        return Err(Error::DegenerateDistortion);
    }
    let direct = 1.0 - stats::mean_power(s.h) / pd;
    let via_indicators = (theta(res) + 2.0 * alpha(res)) / pd;
    debug_assert!(
        (direct - via_indicators).abs() <= 1e-9 * direct.abs().max(1.0),
        "memory index routes disagree: {direct} vs {via_indicators}"
    );
    Ok(direct)
}

/// Slacks of the two DOB inequalities for a pair of records.
///
/// With R = a - b and the normalized inner product
/// `<u,v> = sum Re{u conj(v)} / N`:
///
/// - `slack_weak  = <b,R> + ||R||^2 / 2`  (>= 0 whenever `||a||^2 >= ||b||^2`),
/// - `slack_strong = <a,R> - ||R||^2 / 2` (>= 0 under the same dominance,
///   provided a != 0 and a != b).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DobCheck {
    pub slack_weak: f64,
    pub slack_strong: f64,
    pub power_dominance_ok: bool,
    /// The strong bound carries non-degeneracy conditions; false when a = 0
    /// or a = b.
    pub strong_applicable: bool,
}

pub fn dob_check(a: &[Complex64], b: &[Complex64]) -> Result<DobCheck> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let r: Vec<Complex64> = a.iter().zip(b).map(|(u, v)| u - v).collect();
    let rr = stats::mean_power(&r);
    let br = stats::cross_re(b, &r);
    let ar = stats::cross_re(a, &r);
    let pa = stats::mean_power(a);
    let pb = stats::mean_power(b);
    Ok(DobCheck {
        slack_weak: br + 0.5 * rr,
        slack_strong: ar - 0.5 * rr,
        power_dominance_ok: pa >= pb,
        strong_applicable: pa > 0.0 && rr > 0.0,
    })
}

/// The interaction lower bound `Re E[h conj(r)] >= -E[|r|^2]/2`, evaluated
/// on the decomposition's residuals.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct InteractionBound {
    /// Re E[h conj(r)].
    pub lhs: f64,
    /// -E[|r|^2] / 2.
    pub rhs: f64,
    pub satisfied: bool,
    /// E[|d|^2] >= E[|h|^2]; a violation means the decomposition is not
    /// physically realizable or is a fitting artifact. Reported, not fatal.
    pub power_dominance_ok: bool,
}

pub fn bup_interaction_bound(res: &DecompositionResult) -> InteractionBound {
    let s = res.support();
    let lhs = stats::cross_re(s.h, s.r);
    let rhs = -0.5 * stats::mean_power(s.r);
    InteractionBound {
        lhs,
        rhs,
        satisfied: lhs >= rhs - 1e-12,
        power_dominance_ok: stats::mean_power(s.d) >= stats::mean_power(s.h),
    }
}

/// Coupling level between the static and dynamic residuals:
/// `epsilon_abs = |E[r conj(h)]|` and its Cauchy-Schwarz-normalized form
/// `epsilon_norm = epsilon_abs / (rms(r) rms(h))` in [0, 1].
///
/// Errors with [`Error::DegenerateResidual`] carrying `epsilon_abs` when
/// either residual is identically zero (the normalized form is undefined).
pub fn weak_uncorrelatedness(res: &DecompositionResult) -> Result<(f64, f64)> {
    let s = res.support();
    let epsilon_abs = stats::cross_complex(s.r, s.h).norm();
    let rr = stats::rms(s.r);
    let rh = stats::rms(s.h);
    // A residual at the rounding floor of the fit counts as identically zero.
    let floor = 1e-12 * stats::rms(s.y).max(f64::MIN_POSITIVE);
    if rr <= floor || rh <= floor {
        return Err(Error::DegenerateResidual { epsilon_abs });
    }
    Ok((epsilon_abs, epsilon_abs / (rr * rh)))
}

/// Every scalar diagnostic for one decomposition.
///
/// `mfi` and `epsilon_norm` are `None` when the distortion or a residual is
/// degenerate (distortionless record); the matching flag is set instead of
/// erroring so a report can always be produced.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IndicatorReport {
    pub theta: f64,
    pub alpha: f64,
    pub theta_plus_2alpha: f64,
    pub diag_identity_residual: f64,
    pub mfi: Option<f64>,
    pub var_d: f64,
    pub var_h: f64,
    pub var_r: f64,
    /// Mean-centered Re E[(r - r̄) conj(h - h̄)]; with centered variances this
    /// makes var_d = var_r + var_h + 2 cross_rh exact for any means.
    pub cross_rh: f64,
    pub epsilon_abs: f64,
    pub epsilon_norm: Option<f64>,
    pub dob_slack_weak: f64,
    pub dob_slack_strong: f64,
    pub power_dominance_ok: bool,
    pub degenerate_distortion: bool,
    /// Set when theta + 2 alpha <= 0: non-realizable decomposition or
    /// fitting artifact.
    pub non_realizable_warning: bool,
    /// Cross-moment convention used for complex records.
    pub convention: String,
}

/// Populate the full report from one decomposition.
pub fn full_report(res: &DecompositionResult) -> IndicatorReport {
    let s = res.support();
    let theta_v = theta(res);
    let alpha_v = alpha(res);
    let combined = theta_v + 2.0 * alpha_v;
    let mfi_v = mfi(res).ok();
    let (epsilon_abs, epsilon_norm) = match weak_uncorrelatedness(res) {
        Ok((a, n)) => (a, Some(n)),
        Err(Error::DegenerateResidual { epsilon_abs }) => (epsilon_abs, None),
        Err(_) => unreachable!("weak_uncorrelatedness only fails as degenerate"),
    };
    let dob = dob_check(s.d, s.h).expect("equal lengths by construction");

    IndicatorReport {
        theta: theta_v,
        alpha: alpha_v,
        theta_plus_2alpha: combined,
        diag_identity_residual: diagnostic_identity_residual(res),
        mfi: mfi_v,
        var_d: stats::variance(s.d),
        var_h: stats::variance(s.h),
        var_r: stats::variance(s.r),
        cross_rh: stats::cross_re_centered(s.r, s.h),
        epsilon_abs,
        epsilon_norm,
        dob_slack_weak: dob.slack_weak,
        dob_slack_strong: dob.slack_strong,
        power_dominance_ok: dob.power_dominance_ok,
        degenerate_distortion: mfi_v.is_none(),
        non_realizable_warning: mfi_v.is_some() && combined <= 0.0,
        convention: "Re{E[a conj(b)]}".to_string(),
    }
}

/// Reports over consecutive non-overlapping windows of the statistics
/// support, for locally stationary analysis. Windows shorter than
/// `window_len` at the tail are dropped.
pub fn windowed_reports(res: &DecompositionResult, window_len: usize) -> Result<Vec<IndicatorReport>> {
    if window_len < 64 {
        return Err(Error::TooShort {
            needed: 64,
            got: window_len,
        });
    }
    let n = res.support_len();
    let mut out = Vec::new();
    let mut start = res.support_start;
    while start + window_len <= res.support_start + n {
        let windowed = DecompositionResult {
            x: res.x.slice(start, window_len)?,
            y: res.y.slice(start, window_len)?,
            g: res.g.slice(start, window_len)?,
            d: res.d.slice(start, window_len)?,
            h: res.h.slice(start, window_len)?,
            r: res.r.slice(start, window_len)?,
            static_model: res.static_model.clone(),
            alignment: res.alignment,
            support_start: 0,
        };
        out.push(full_report(&windowed));
        start += window_len;
    }
    Ok(out)
}
