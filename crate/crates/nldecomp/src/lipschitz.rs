//! Mean-squared Lipschitz estimation.
//!
//! For i.i.d. sample pairs, E[|f(x1) - f(x2)|^2] = 2 Var(f), so the
//! mean-squared Lipschitz ratio of f against x collapses to
//! Var(f)/Var(x). The primary estimator here is that variance ratio;
//! a seeded pair-sampling estimate of E[|Δf|^2] is carried alongside as a
//! consistency cross-check, and [`holder_sanity`] probes the non-collapsed
//! (bucketed-pair) reading of the same ratio.
//!
//! Unbiased (n-1) sample variances are used throughout so the pair estimate
//! and 2·Var agree in expectation under without-replacement pair draws.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::decomp::DecompositionResult;
use crate::error::{Error, Result};
use crate::signals::SampledSignal;
use crate::stats;

/// Default number of seeded index pairs for the cross-check estimate.
pub const DEFAULT_PAIRS: usize = 100_000;

/// Relative variance floor below which the input is considered degenerate.
const VAR_FLOOR: f64 = 1e-24;

/// Mean-squared Lipschitz estimate of a function's samples against the
/// input samples they were produced from.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LipschitzEstimate {
    /// sqrt(Var(f) / Var(x)).
    pub l_value: f64,
    pub var_f: f64,
    pub var_x: f64,
    /// Monte-Carlo estimate of E[|f(x_i) - f(x_j)|^2] over seeded pairs.
    pub pair_estimate_2var: f64,
    pub n_pairs: usize,
    pub seed: u64,
}

fn draw_pair(rng: &mut ChaCha8Rng, n: usize) -> (usize, usize) {
    let i = rng.gen_range(0..n);
    let mut j = rng.gen_range(0..n);
    while j == i {
        j = rng.gen_range(0..n);
    }
    (i, j)
}

fn pair_mean_sq_diff(f: &[Complex64], seed: u64, n_pairs: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = f.len();
    let mut acc = 0.0;
    for _ in 0..n_pairs {
        let (i, j) = draw_pair(&mut rng, n);
        acc += (f[i] - f[j]).norm_sqr();
    }
    acc / n_pairs as f64
}

/// Estimate the mean-squared Lipschitz constant of `f_samples` with respect
/// to `x_samples` as the ratio of unbiased sample variances, with a seeded
/// pair-sampling cross-check of the 2·Var identity.
pub fn ms_lipschitz(f_samples: &SampledSignal, x_samples: &SampledSignal) -> Result<LipschitzEstimate> {
    ms_lipschitz_seeded(f_samples, x_samples, 0, DEFAULT_PAIRS)
}

pub fn ms_lipschitz_seeded(
    f_samples: &SampledSignal,
    x_samples: &SampledSignal,
    seed: u64,
    n_pairs: usize,
) -> Result<LipschitzEstimate> {
    if f_samples.len() != x_samples.len() {
        return Err(Error::LengthMismatch {
            left: f_samples.len(),
            right: x_samples.len(),
        });
    }
    if f_samples.len() < 1000 {
        return Err(Error::TooShort {
            needed: 1000,
            got: f_samples.len(),
        });
    }
    let var_f = stats::unbiased_variance(f_samples.samples());
    let var_x = stats::unbiased_variance(x_samples.samples());
    if var_x <= VAR_FLOOR * x_samples.mean_power().max(f64::MIN_POSITIVE) {
        return Err(Error::DegenerateInput);
    }
    Ok(LipschitzEstimate {
        l_value: (var_f / var_x).sqrt(),
        var_f,
        var_x,
        pair_estimate_2var: pair_mean_sq_diff(f_samples.samples(), seed, n_pairs),
        n_pairs,
        seed,
    })
}

/// Compare the seeded pair estimate of E[|Δf|^2] against 2·Var̂(f).
///
/// Returns (pair_mean, two_var, z_score) where the z-score normalizes the
/// discrepancy by the standard error of the pair mean.
pub fn two_var_identity_check(
    f_samples: &SampledSignal,
    seed: u64,
    n_pairs: usize,
) -> Result<(f64, f64, f64)> {
    if f_samples.len() < 1000 {
        return Err(Error::TooShort {
            needed: 1000,
            got: f_samples.len(),
        });
    }
    let f = f_samples.samples();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = f.len();
    let mut acc = 0.0;
    let mut acc_sq = 0.0;
    for _ in 0..n_pairs {
        let (i, j) = draw_pair(&mut rng, n);
        let v = (f[i] - f[j]).norm_sqr();
        acc += v;
        acc_sq += v * v;
    }
    let pair_mean = acc / n_pairs as f64;
    let pair_var = (acc_sq / n_pairs as f64 - pair_mean * pair_mean).max(0.0);
    let stderr = (pair_var / n_pairs as f64).sqrt();
    let two_var = 2.0 * stats::unbiased_variance(f);
    let z_score = if stderr > 0.0 {
        (pair_mean - two_var) / stderr
    } else {
        0.0
    };
    Ok((pair_mean, two_var, z_score))
}

/// Lipschitz estimates of the total distortion and the dynamic residual
/// against the same input.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DominanceReport {
    pub l_d: f64,
    pub l_h: f64,
    /// l_d > l_h; equivalent to Var(d) > Var(h) under the variance-ratio
    /// estimator.
    pub dominant: bool,
}

pub fn lipschitz_dominance(res: &DecompositionResult) -> Result<DominanceReport> {
    let s = res.support_start;
    let n = res.x.len() - s;
    let x = res.x.slice(s, n)?;
    let d = res.d.slice(s, n)?;
    let h = res.h.slice(s, n)?;
    let l_d = ms_lipschitz(&d, &x)?.l_value;
    let l_h = ms_lipschitz(&h, &x)?.l_value;
    Ok(DominanceReport {
        l_d,
        l_h,
        dominant: l_d > l_h,
    })
}

/// One |Δx| decile bucket of pair-sampled ratio statistics.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct HolderBucket {
    pub bucket_low: f64,
    pub bucket_high: f64,
    /// mean|Δf|^2 / mean|Δx|^2 within the bucket.
    pub ratio: f64,
    pub n_pairs: usize,
}

/// Bucketed-pair probe of the non-collapsed Lipschitz ratio: pairs are
/// sampled, bucketed by |Δx| deciles, and each bucket reports the ratio of
/// mean squared differences. The max bucket ratio is an empirical K^2 for
/// the sufficiency condition.
pub fn holder_sanity(
    f_samples: &SampledSignal,
    x_samples: &SampledSignal,
    n_buckets: usize,
    seed: u64,
    n_pairs: usize,
) -> Result<Vec<HolderBucket>> {
    if f_samples.len() != x_samples.len() {
        return Err(Error::LengthMismatch {
            left: f_samples.len(),
            right: x_samples.len(),
        });
    }
    if f_samples.len() < 10_000 {
        return Err(Error::TooShort {
            needed: 10_000,
            got: f_samples.len(),
        });
    }
    let f = f_samples.samples();
    let x = x_samples.samples();
    let n = x.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs: Vec<(usize, usize)> = (0..n_pairs).map(|_| draw_pair(&mut rng, n)).collect();

    let mut dx: Vec<f64> = pairs.iter().map(|&(i, j)| (x[i] - x[j]).norm()).collect();
    dx.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let edges: Vec<f64> = (0..=n_buckets)
        .map(|b| {
            if b == 0 {
                0.0
            } else {
                let idx = (b * (n_pairs - 1)) / n_buckets;
                dx[idx]
            }
        })
        .collect();

    let mut sum_df = vec![0.0f64; n_buckets];
    let mut sum_dx = vec![0.0f64; n_buckets];
    let mut counts = vec![0usize; n_buckets];
    for &(i, j) in &pairs {
        let dxv = (x[i] - x[j]).norm();
        // Upper edge inclusive so the max |Δx| pair lands in the last bucket.
        let mut b = n_buckets - 1;
        for k in 0..n_buckets {
            if dxv <= edges[k + 1] {
                b = k;
                break;
            }
        }
        sum_df[b] += (f[i] - f[j]).norm_sqr();
        sum_dx[b] += dxv * dxv;
        counts[b] += 1;
    }

    Ok((0..n_buckets)
        .map(|b| HolderBucket {
            bucket_low: edges[b],
            bucket_high: edges[b + 1],
            ratio: if sum_dx[b] > 0.0 { sum_df[b] / sum_dx[b] } else { 0.0 },
            n_pairs: counts[b],
        })
        .collect())
}

/// Empirical K^2: the largest bucket ratio.
pub fn holder_max_ratio(buckets: &[HolderBucket]) -> f64 {
    buckets.iter().map(|b| b.ratio).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signals::{generate_filtered_noise, SampledSignal};
    use rand::Rng;

    fn uniform_real_signal(seed: u64, n: usize) -> SampledSignal {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
        SampledSignal::from_real(&v, 1.0).unwrap()
    }

    #[test]
    fn constant_function_has_zero_l() {
        let x = generate_filtered_noise(61, 4096, 0.5).unwrap();
        let f = SampledSignal::from_real(&[2.5; 4096], 1.0).unwrap();
        let est = ms_lipschitz(&f, &x).unwrap();
        assert_eq!(est.l_value, 0.0);
        assert_eq!(est.pair_estimate_2var, 0.0);
    }

    #[test]
    fn linear_map_recovers_gain() {
        let x = generate_filtered_noise(62, 8192, 0.5).unwrap();
        let f = x.scaled(Complex64::new(-3.0, 4.0)); // |a| = 5
        let est = ms_lipschitz(&f, &x).unwrap();
        assert!((est.l_value - 5.0).abs() < 1e-9, "l = {}", est.l_value);
    }

    #[test]
    fn cube_on_uniform_matches_closed_form() {
        // Var(x^3)/Var(x) = (1/7)/(1/3) = 3/7 for x ~ U[-1,1].
        let x = uniform_real_signal(63, 200_000);
        let f: Vec<Complex64> = x.samples().iter().map(|v| v * v * v).collect();
        let f = SampledSignal::from_complex(f, 1.0).unwrap();
        let est = ms_lipschitz(&f, &x).unwrap();
        let expect = (3.0f64 / 7.0).sqrt();
        assert!(
            (est.l_value - expect).abs() / expect < 0.01,
            "l = {} vs {expect}",
            est.l_value
        );
    }

    #[test]
    fn degenerate_input_rejected() {
        let x = SampledSignal::from_real(&[1.0; 2048], 1.0).unwrap();
        let f = generate_filtered_noise(64, 2048, 1.0).unwrap();
        assert!(matches!(ms_lipschitz(&f, &x), Err(Error::DegenerateInput)));
    }

    #[test]
    fn internal_consistency_of_estimate_fields() {
        let x = generate_filtered_noise(65, 4096, 0.5).unwrap();
        let f = generate_filtered_noise(66, 4096, 0.5).unwrap();
        let est = ms_lipschitz(&f, &x).unwrap();
        assert!((est.l_value * est.l_value - est.var_f / est.var_x).abs() < 1e-12);
        // Pair estimate within 5 standard errors of 2 Var(f).
        let (pair_mean, two_var, z) = two_var_identity_check(&f, est.seed, est.n_pairs).unwrap();
        assert!((pair_mean - est.pair_estimate_2var).abs() < 1e-12);
        assert!(z.abs() <= 5.0, "z = {z}, pair {pair_mean} vs {two_var}");
    }

    #[test]
    fn two_var_check_on_constant_and_gaussian() {
        let f = SampledSignal::from_real(&[7.0; 2048], 1.0).unwrap();
        let (pair_mean, two_var, _) = two_var_identity_check(&f, 1, 10_000).unwrap();
        assert_eq!(pair_mean, 0.0);
        assert_eq!(two_var, 0.0);

        let g = generate_filtered_noise(67, 65536, 1.0).unwrap();
        let (_, _, z) = two_var_identity_check(&g, 2, 100_000).unwrap();
        assert!(z.abs() <= 5.0, "z = {z}");
    }

    #[test]
    fn scale_equivariance_and_offset_invariance() {
        let x = generate_filtered_noise(68, 4096, 0.5).unwrap();
        let f = generate_filtered_noise(69, 4096, 0.5).unwrap();
        let base = ms_lipschitz(&f, &x).unwrap().l_value;
        let scaled = ms_lipschitz(&f.scaled(Complex64::new(0.0, 2.5)), &x).unwrap().l_value;
        assert!((scaled - 2.5 * base).abs() < 1e-9 * base.max(1.0));

        let offset: Vec<Complex64> = f
            .samples()
            .iter()
            .map(|v| v + Complex64::new(10.0, -3.0))
            .collect();
        let offset = SampledSignal::from_complex(offset, 1.0).unwrap();
        let shifted = ms_lipschitz(&offset, &x).unwrap().l_value;
        assert!((shifted - base).abs() < 1e-9 * base.max(1.0));
    }

    #[test]
    fn pair_estimator_variance_halves_with_double_pairs() {
        let f = generate_filtered_noise(70, 32768, 0.5).unwrap();
        // Spread of independent pair means across seeds, at two pair counts.
        let spread = |n_pairs: usize| -> f64 {
            let means: Vec<f64> = (0..24)
                .map(|s| pair_mean_sq_diff(f.samples(), 1000 + s, n_pairs))
                .collect();
            let m = means.iter().sum::<f64>() / means.len() as f64;
            means.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (means.len() - 1) as f64
        };
        let v1 = spread(2_000);
        let v2 = spread(4_000);
        let ratio = v1 / v2;
        assert!(
            ratio > 1.2 && ratio < 3.5,
            "variance ratio {ratio} not consistent with halving"
        );
    }

    #[test]
    fn holder_buckets_flat_for_linear_map() {
        let x = uniform_real_signal(71, 20_000);
        let f = x.scaled(Complex64::new(3.0, 0.0));
        let buckets = holder_sanity(&f, &x, 10, 5, 50_000).unwrap();
        for b in &buckets {
            assert!((b.ratio - 9.0).abs() < 0.5, "bucket ratio {}", b.ratio);
        }
        let f0 = SampledSignal::from_real(&[1.0; 20_000], 1.0).unwrap();
        let zeros = holder_sanity(&f0, &x, 10, 5, 50_000).unwrap();
        assert!(holder_max_ratio(&zeros) == 0.0);
    }
}
