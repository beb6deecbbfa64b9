//! Sample-mean expectation helpers shared by the decomposition and indicator code.
//!
//! All cross-moments over complex records use the real part of conjugate
//! products, `Re{E[a·conj(b)]}`, so one code path serves real-embedded and
//! complex-baseband signals alike.

use num_complex::Complex64;

/// Mean power `E[|s|^2]` as a plain sample mean.
pub fn mean_power(s: &[Complex64]) -> f64 {
    if s.is_empty() {
        return 0.0;
    }
    s.iter().map(|v| v.norm_sqr()).sum::<f64>() / s.len() as f64
}

/// Complex sample mean.
pub fn mean(s: &[Complex64]) -> Complex64 {
    if s.is_empty() {
        return Complex64::new(0.0, 0.0);
    }
    s.iter().sum::<Complex64>() / s.len() as f64
}

/// Population variance `E[|s - E[s]|^2]` (divide by N).
pub fn variance(s: &[Complex64]) -> f64 {
    let m = mean(s);
    s.iter().map(|v| (v - m).norm_sqr()).sum::<f64>() / s.len() as f64
}

/// Unbiased sample variance (divide by N-1). Zero for singleton records.
pub fn unbiased_variance(s: &[Complex64]) -> f64 {
    if s.len() < 2 {
        return 0.0;
    }
    let m = mean(s);
    s.iter().map(|v| (v - m).norm_sqr()).sum::<f64>() / (s.len() - 1) as f64
}

/// Uncentered real cross-moment `Re{E[a·conj(b)]}`.
pub fn cross_re(a: &[Complex64], b: &[Complex64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(u, v)| (u * v.conj()).re)
        .sum::<f64>()
        / a.len() as f64
}

/// Uncentered complex cross-moment `E[a·conj(b)]`.
pub fn cross_complex(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(u, v)| u * v.conj()).sum::<Complex64>() / a.len() as f64
}

/// Mean-centered real cross-moment `Re{E[(a-ā)·conj(b-b̄)]}` (a covariance).
pub fn cross_re_centered(a: &[Complex64], b: &[Complex64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let ma = mean(a);
    let mb = mean(b);
    a.iter()
        .zip(b)
        .map(|(u, v)| ((u - ma) * (v - mb).conj()).re)
        .sum::<f64>()
        / a.len() as f64
}

/// Root-mean-square value.
pub fn rms(s: &[Complex64]) -> f64 {
    mean_power(s).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variance_of_constant_is_zero() {
        let s = vec![Complex64::new(3.0, -1.0); 100];
        assert_eq!(variance(&s), 0.0);
        assert_eq!(unbiased_variance(&s), 0.0);
    }

    #[test]
    fn cross_re_is_symmetric() {
        let a = vec![Complex64::new(1.0, 2.0), Complex64::new(-0.5, 0.25)];
        let b = vec![Complex64::new(0.5, -1.0), Complex64::new(2.0, 1.0)];
        assert!((cross_re(&a, &b) - cross_re(&b, &a)).abs() < 1e-15);
    }

    #[test]
    fn centered_cross_ignores_common_offsets() {
        let a: Vec<_> = (0..64).map(|i| Complex64::new(i as f64, 0.0)).collect();
        let b: Vec<_> = (0..64)
            .map(|i| Complex64::new((i % 7) as f64, 0.5))
            .collect();
        let shift = Complex64::new(100.0, -40.0);
        let a2: Vec<_> = a.iter().map(|v| v + shift).collect();
        let b2: Vec<_> = b.iter().map(|v| v + shift).collect();
        assert!((cross_re_centered(&a, &b) - cross_re_centered(&a2, &b2)).abs() < 1e-9);
    }
}
