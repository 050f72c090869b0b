//! Special functions needed by the statistical tests.

#[allow(unused_imports)]
use num_traits::Float;

const MAX_ITER: usize = 300;
const EPS: f64 = 1e-15;
const TINY: f64 = 1e-300;

pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// Regularized incomplete beta function `I_x(a, b)`.
pub fn regularized_incomplete_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    // the continued fraction converges fastest below the mean of the distribution
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_continued_fraction(a, b, x) / a
    } else {
        1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b
    }
}

// Modified Lentz evaluation.
fn beta_continued_fraction(a: f64, b: f64, x: f64) -> f64 {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Two-tailed p-value of a Student t statistic with `df` degrees of freedom.
pub fn student_t_two_tailed(t: f64, df: f64) -> f64 {
    if t.is_infinite() {
        return 0.0;
    }
    let p = regularized_incomplete_beta(0.5 * df, 0.5, df / (df + t * t));
    p.clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn incomplete_beta_closed_forms() {
        // I_x(1, 1) = x and I_x(a, 1) = x^a
        assert_relative_eq!(
            regularized_incomplete_beta(1.0, 1.0, 0.3),
            0.3,
            epsilon = 1e-14
        );
        assert_relative_eq!(
            regularized_incomplete_beta(3.0, 1.0, 0.4),
            0.064,
            epsilon = 1e-14
        );
        assert_relative_eq!(
            regularized_incomplete_beta(2.5, 4.0, 0.35)
                + regularized_incomplete_beta(4.0, 2.5, 0.65),
            1.0,
            epsilon = 1e-13
        );
    }

    #[test]
    fn t_distribution_reference_values() {
        // df = 1 is Cauchy: p = 1 - 2 atan(t) / pi
        let t = 2.0_f64;
        let cauchy = 1.0 - 2.0 * t.atan() / core::f64::consts::PI;
        assert_relative_eq!(student_t_two_tailed(t, 1.0), cauchy, epsilon = 1e-12);
        assert_eq!(student_t_two_tailed(0.0, 7.0), 1.0);
        // df = 2 has closed form p = 1 - t / sqrt(2 + t^2)
        let t = 1.7_f64;
        assert_relative_eq!(
            student_t_two_tailed(t, 2.0),
            1.0 - t / (2.0 + t * t).sqrt(),
            epsilon = 1e-12
        );
    }
}
