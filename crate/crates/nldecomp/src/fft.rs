//! Thin wrappers over rustfft with the normalization conventions used here:
//! forward transform is unnormalized, inverse divides by N so that
//! `ifft(fft(x)) == x`.

use num_complex::Complex64;
use rustfft::FftPlanner;

pub fn fft_in_place(buf: &mut [Complex64]) {
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(buf.len()).process(buf);
}

pub fn ifft_in_place(buf: &mut [Complex64]) {
    let n = buf.len();
    let mut planner = FftPlanner::new();
    planner.plan_fft_inverse(n).process(buf);
    let scale = 1.0 / n as f64;
    for v in buf.iter_mut() {
        *v *= scale;
    }
}

pub fn fft(input: &[Complex64]) -> Vec<Complex64> {
    let mut buf = input.to_vec();
    fft_in_place(&mut buf);
    buf
}

pub fn ifft(input: &[Complex64]) -> Vec<Complex64> {
    let mut buf = input.to_vec();
    ifft_in_place(&mut buf);
    buf
}

/// Signed frequency index of DFT bin `k` for length `n`: bins above `n/2`
/// wrap to negative frequencies.
pub fn signed_bin(k: usize, n: usize) -> i64 {
    if k <= n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}
