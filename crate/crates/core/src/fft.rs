//! Forward discrete Fourier transforms.
//!
//! Power-of-two lengths use an iterative radix-2 Cooley-Tukey transform;
//! other lengths fall back to the direct O(n^2) sum.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

/// In-place forward DFT, `X[k] = sum_n x[n] exp(-2 pi i k n / N)`.
pub fn fft_in_place(buf: &mut [Complex64]) {
    let n = buf.len();
    if n <= 1 {
        return;
    }
    if !n.is_power_of_two() {
        let out = dft(buf);
        buf.copy_from_slice(&out);
        return;
    }

    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            buf.swap(i, j);
        }
    }

    let twiddles: Vec<Complex64> = (0..n / 2)
        .map(|k| Complex64::from_polar(1.0, -2.0 * PI * k as f64 / n as f64))
        .collect();

    let mut len = 2;
    while len <= n {
        let half = len / 2;
        let stride = n / len;
        for start in (0..n).step_by(len) {
            for k in 0..half {
                let w = twiddles[k * stride];
                let a = buf[start + k];
                let b = buf[start + k + half] * w;
                buf[start + k] = a + b;
                buf[start + k + half] = a - b;
            }
        }
        len <<= 1;
    }
}

pub fn fft(input: &[Complex64]) -> Vec<Complex64> {
    let mut buf = input.to_vec();
    fft_in_place(&mut buf);
    buf
}

pub fn fft_real(x: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_in_place(&mut buf);
    buf
}

/// 2-D forward DFT of a row-major `rows x cols` array.
pub fn fft2_in_place(data: &mut [Complex64], rows: usize, cols: usize) {
    assert_eq!(data.len(), rows * cols, "fft2 buffer size");
    for row in data.chunks_exact_mut(cols) {
        fft_in_place(row);
    }
    let mut column = alloc::vec![Complex64::new(0.0, 0.0); rows];
    for c in 0..cols {
        for r in 0..rows {
            column[r] = data[r * cols + c];
        }
        fft_in_place(&mut column);
        for r in 0..rows {
            data[r * cols + c] = column[r];
        }
    }
}

fn dft(x: &[Complex64]) -> Vec<Complex64> {
    let n = x.len();
    (0..n)
        .map(|k| {
            x.iter()
                .enumerate()
                .fold(Complex64::new(0.0, 0.0), |acc, (j, &v)| {
                    // reduce k*j modulo n before forming the angle to keep it small
                    let phase = ((k * j) % n) as f64 / n as f64;
                    acc + v * Complex64::from_polar(1.0, -2.0 * PI * phase)
                })
        })
        .collect()
}
