//! Single-level Symlet-8 filter bank with half-point symmetric extension.

use alloc::vec;
use alloc::vec::Vec;

/// Symlet-8 decomposition low-pass filter.
const SYM8_DEC_LO: [f64; 16] = [
    -0.0033824159510061256,
    -0.0005421323317911481,
    0.03169508781149298,
    0.007607487324917605,
    -0.1432942383508097,
    -0.061273359067658524,
    0.4813596512583722,
    0.7771857517005235,
    0.3644418948353314,
    -0.05194583810770904,
    -0.027219029917056003,
    0.049137179673607506,
    0.003808752013890615,
    -0.01495225833704823,
    -0.0003029205147213668,
    0.0018899503327594609,
];

pub(crate) const FILTER_LEN: usize = SYM8_DEC_LO.len();

struct FilterBank {
    dec_lo: [f64; FILTER_LEN],
    dec_hi: [f64; FILTER_LEN],
    rec_lo: [f64; FILTER_LEN],
    rec_hi: [f64; FILTER_LEN],
}

fn sym8() -> FilterBank {
    let dec_lo = SYM8_DEC_LO;
    let mut rec_lo = dec_lo;
    rec_lo.reverse();
    let mut dec_hi = [0.0; FILTER_LEN];
    let mut rec_hi = [0.0; FILTER_LEN];
    for k in 0..FILTER_LEN {
        // quadrature mirror: rec_hi[k] = (-1)^k dec_lo[k]
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        rec_hi[k] = sign * dec_lo[k];
    }
    for k in 0..FILTER_LEN {
        dec_hi[k] = rec_hi[FILTER_LEN - 1 - k];
    }
    FilterBank {
        dec_lo,
        dec_hi,
        rec_lo,
        rec_hi,
    }
}

// Half-point symmetric reflection: x[-1] = x[0], x[n] = x[n-1].
fn reflect(mut k: isize, n: usize) -> usize {
    let n = n as isize;
    loop {
        if k < 0 {
            k = -k - 1;
        } else if k >= n {
            k = 2 * n - k - 1;
        } else {
            return k as usize;
        }
    }
}

fn analysis(x: &[f64], filter: &[f64; FILTER_LEN]) -> Vec<f64> {
    let n = x.len();
    let out_len = (n + FILTER_LEN - 1) / 2;
    (0..out_len)
        .map(|o| {
            let i = (2 * o + 1) as isize;
            filter
                .iter()
                .enumerate()
                .map(|(j, &h)| h * x[reflect(i - j as isize, n)])
                .sum()
        })
        .collect()
}

fn synthesis_add(coeffs: &[f64], filter: &[f64; FILTER_LEN], out: &mut [f64]) {
    let half = FILTER_LEN / 2;
    for (o, i) in (half - 1..coeffs.len()).enumerate() {
        let mut even = 0.0;
        let mut odd = 0.0;
        for j in 0..half {
            even += filter[2 * j] * coeffs[i - j];
            odd += filter[2 * j + 1] * coeffs[i - j];
        }
        out[2 * o] += even;
        out[2 * o + 1] += odd;
    }
}

/// Level-1 decomposition into (approximation, detail) coefficients.
pub(crate) fn dwt(x: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let bank = sym8();
    (analysis(x, &bank.dec_lo), analysis(x, &bank.dec_hi))
}

/// Level-1 reconstruction of a signal of length `n`; a missing detail band
/// is treated as zeros.
pub(crate) fn idwt(approx: &[f64], detail: Option<&[f64]>, n: usize) -> Vec<f64> {
    let bank = sym8();
    let full = 2 * approx.len() + 2 - FILTER_LEN;
    let mut out = vec![0.0; full];
    synthesis_add(approx, &bank.rec_lo, &mut out);
    if let Some(d) = detail {
        synthesis_add(d, &bank.rec_hi, &mut out);
    }
    out.truncate(n);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn filter_is_orthonormal() {
        let h = SYM8_DEC_LO;
        let sum: f64 = h.iter().sum();
        assert!((sum - core::f64::consts::SQRT_2).abs() < 1e-12);
        for shift in (0..FILTER_LEN).step_by(2) {
            let dot: f64 = (0..FILTER_LEN - shift).map(|k| h[k] * h[k + shift]).sum();
            let expected = if shift == 0 { 1.0 } else { 0.0 };
            assert!((dot - expected).abs() < 1e-12, "shift {shift}: {dot}");
        }
    }

    #[test]
    fn perfect_reconstruction() {
        for n in [16usize, 17, 33, 100] {
            let x: Vec<f64> = (0..n)
                .map(|i| (i as f64 * 0.41).sin() * 5.0 + i as f64)
                .collect();
            let (a, d) = dwt(&x);
            let y = idwt(&a, Some(&d), n);
            for (u, v) in x.iter().zip(&y) {
                assert!((u - v).abs() < 1e-10, "n={n}: {u} vs {v}");
            }
        }
    }

    // Reference approximation-only reconstructions from PyWavelets
    // (`idwt(dwt(x, 'sym8', 'symmetric')[0], None, 'sym8', 'symmetric')`).
    #[test]
    fn matches_reference_filter_bank() {
        let x: Vec<f64> = (0..20).map(|i| (i as f64).powf(1.5)).collect();
        let expected = [
            -0.010076383453841075,
            0.9954102108583367,
            2.831831611545384,
            5.19598296269041,
            7.99856919905124,
            11.183184082043839,
            14.69587557301325,
            18.5193789730528,
            22.625839499982188,
            27.000654160233225,
            31.637225365045637,
            36.478359988950494,
            41.49771634564787,
            46.92118740677824,
            52.595936761410364,
            57.87660215988853,
            63.602176156488675,
            70.58492251606475,
            77.06104464236242,
            81.6258644106338,
        ];
        let (a, _) = dwt(&x);
        assert_eq!(a.len(), 17);
        let y = idwt(&a, None, x.len());
        for (u, v) in y.iter().zip(expected) {
            assert!((u - v).abs() < 1e-10, "{u} vs {v}");
        }

        let x: Vec<f64> = (0..17)
            .map(|i| (i as f64 * 0.7).sin() * 3.0 + i as f64)
            .collect();
        let expected = [
            0.08320641140664084,
            2.2810132985196034,
            5.1719176641131375,
            5.80120765119029,
            4.928259792786349,
            3.885680969985482,
            3.374741503489442,
            4.105385638695248,
            6.086514880805459,
            9.04340232146691,
            11.986338134111168,
            13.926229191511284,
            14.657664128571156,
            13.915031465791502,
            12.692236193283932,
            12.646589366567035,
            13.118582382594207,
        ];
        let (a, _) = dwt(&x);
        let y = idwt(&a, None, x.len());
        assert_eq!(y.len(), 17);
        for (u, v) in y.iter().zip(expected) {
            assert!((u - v).abs() < 1e-10, "{u} vs {v}");
        }
    }
}
