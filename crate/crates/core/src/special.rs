//! Special functions needed by the validation metrics.

use libm::{exp, fabs, lgamma, log, sqrt};

const PI: f64 = core::f64::consts::PI;

/// Regularized lower incomplete gamma function P(a, x).
pub fn gamma_p(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x < a + 1.0 {
        // series
        let mut ap = a;
        let mut sum = 1.0 / a;
        let mut del = sum;
        for _ in 0..10_000 {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if fabs(del) < fabs(sum) * 1e-16 {
                break;
            }
        }
        (sum * exp(-x + a * log(x) - lgamma(a))).clamp(0.0, 1.0)
    } else {
        // Lentz continued fraction for Q(a, x)
        let tiny = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..10_000 {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if fabs(d) < tiny {
                d = tiny;
            }
            c = b + an / c;
            if fabs(c) < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if fabs(del - 1.0) < 1e-16 {
                break;
            }
        }
        let q = exp(-x + a * log(x) - lgamma(a)) * h;
        (1.0 - q).clamp(0.0, 1.0)
    }
}

pub fn chi_square_cdf(x: f64, dof: usize) -> f64 {
    gamma_p(dof as f64 / 2.0, x / 2.0)
}

/// Inverse chi-square CDF by bracketed bisection on [`chi_square_cdf`].
///
/// `p` must lie in `[0, 1)`.
pub fn chi_square_quantile(p: f64, dof: usize) -> f64 {
    if p <= 0.0 {
        return 0.0;
    }
    if dof == 2 {
        return -2.0 * log(1.0 - p);
    }
    let mut lo = 0.0;
    let mut hi = (dof as f64).max(1.0);
    while chi_square_cdf(hi, dof) < p {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if chi_square_cdf(mid, dof) < p {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Survival function of the Kolmogorov distribution,
/// `Q(λ) = 2 Σ_{j≥1} (−1)^{j−1} exp(−2 j² λ²)`.
///
/// For small λ the alternating series converges slowly, so the equivalent
/// theta-function form `1 − √(2π)/λ Σ exp(−(2j−1)² π² / (8λ²))` is used there.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    let q = if lambda < 1.18 {
        let k = -(PI * PI) / (8.0 * lambda * lambda);
        let mut sum = 0.0;
        for j in 1..=20 {
            let m = (2 * j - 1) as f64;
            sum += exp(k * m * m);
        }
        1.0 - sqrt(2.0 * PI) / lambda * sum
    } else {
        let mut sum = 0.0;
        for j in 1..=100 {
            let jf = j as f64;
            let term = exp(-2.0 * jf * jf * lambda * lambda);
            if j % 2 == 1 {
                sum += term;
            } else {
                sum -= term;
            }
            if term < 1e-300 {
                break;
            }
        }
        2.0 * sum
    };
    q.clamp(0.0, 1.0)
}
