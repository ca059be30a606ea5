//! Multidimensional FFT helpers on row-major grids.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

pub type C64 = Complex<f64>;

/// In-place unnormalized DFT along every axis of a row-major array.
pub fn fft_nd(data: &mut [C64], shape: &[usize], inverse: bool) {
    let total: usize = shape.iter().product();
    assert_eq!(data.len(), total);
    let mut planner = FftPlanner::new();
    let mut stride = 1;
    for axis in (0..shape.len()).rev() {
        let n = shape[axis];
        if n > 1 {
            let fft = if inverse {
                planner.plan_fft_inverse(n)
            } else {
                planner.plan_fft_forward(n)
            };
            let mut line = vec![C64::new(0.0, 0.0); n];
            let block = n * stride;
            for outer in 0..total / block {
                for inner in 0..stride {
                    let base = outer * block + inner;
                    for (k, slot) in line.iter_mut().enumerate() {
                        *slot = data[base + k * stride];
                    }
                    fft.process(&mut line);
                    for (k, v) in line.iter().enumerate() {
                        data[base + k * stride] = *v;
                    }
                }
            }
        }
        stride *= n;
    }
}

/// Signed integer frequency of DFT index `k` on `n` points.
pub fn signed_freq(k: usize, n: usize) -> f64 {
    if k <= n / 2 {
        k as f64
    } else {
        k as f64 - n as f64
    }
}

/// Zero-extend a row-major array from `shape` to `padded` (same rank, each axis at least as large).
pub fn zero_pad(values: &[f64], shape: &[usize], padded: &[usize]) -> Vec<C64> {
    let total: usize = padded.iter().product();
    let mut out = vec![C64::new(0.0, 0.0); total];
    let dim = shape.len();
    let mut idx = vec![0usize; dim];
    for (lin, v) in values.iter().enumerate() {
        let mut rem = lin;
        for a in (0..dim).rev() {
            idx[a] = rem % shape[a];
            rem /= shape[a];
        }
        let mut p = 0;
        for a in 0..dim {
            p = p * padded[a] + idx[a];
        }
        out[p] = C64::new(*v, 0.0);
    }
    out
}

/// Angular wave vector `2π m / L` of a linear DFT index.
pub fn wave_vector(lin: usize, shape: &[usize], lengths: &[f64]) -> Vec<f64> {
    let dim = shape.len();
    let mut xi = vec![0.0; dim];
    let mut rem = lin;
    for a in (0..dim).rev() {
        let k = rem % shape[a];
        rem /= shape[a];
        xi[a] = 2.0 * std::f64::consts::PI * signed_freq(k, shape[a]) / lengths[a];
    }
    xi
}
