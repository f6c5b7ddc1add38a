//! Goodness-of-fit statistics used to judge simulated tallies against
//! closed-form probabilities: binomial z-scores, the chi-squared test, and
//! the Kolmogorov-Smirnov test against an arbitrary CDF.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// ln Γ(z) by the Lanczos approximation (g = 7, 9 terms), z > 0.
pub fn ln_gamma<T: Real>(z: T) -> T {
    const COEFFS: [f64; 8] = [
        676.5203681218851,
        -1259.1392167224028,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507343278686905,
        -0.13857109526572012,
        9.984_369_578_019_572e-6,
        1.5056327351493116e-7,
    ];
    debug_assert!(z > T::zero());
    if z < T::half() {
        // Reflection keeps the approximation in its accurate range.
        let pi = T::PI();
        return (pi / (pi * z).sin()).ln() - ln_gamma(T::one() - z);
    }
    let z = z - T::one();
    let mut acc = T::lit(0.999_999_999_999_809_9);
    for (i, &c) in COEFFS.iter().enumerate() {
        acc += T::lit(c) / (z + T::lit(i as f64 + 1.0));
    }
    let g = T::lit(7.5);
    let t = z + g;
    T::lit(0.5) * (T::two() * T::PI()).ln() + (z + T::half()) * t.ln() - t + acc.ln()
}

/// Lower regularized incomplete gamma P(a, x); Q(a, x) = 1 - P(a, x).
pub fn gamma_p<T: Real>(a: T, x: T) -> Result<T> {
    if a <= T::zero() || x < T::zero() {
        return Err(Error::domain(format!(
            "gamma_p requires a > 0, x >= 0; got a = {a}, x = {x}"
        )));
    }
    if x == T::zero() {
        return Ok(T::zero());
    }
    if x < a + T::one() {
        Ok(gamma_p_series(a, x))
    } else {
        Ok(T::one() - gamma_q_cf(a, x))
    }
}

/// Upper regularized incomplete gamma Q(a, x) = 1 - P(a, x).
pub fn gamma_q<T: Real>(a: T, x: T) -> Result<T> {
    Ok(T::one() - gamma_p(a, x)?)
}

fn gamma_p_series<T: Real>(a: T, x: T) -> T {
    let mut term = T::one() / a;
    let mut sum = term;
    let mut ap = a;
    for _ in 0..500 {
        ap += T::one();
        term = term * x / ap;
        sum += term;
        if term.abs() < sum.abs() * T::epsilon() {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma(a)).exp()
}

fn gamma_q_cf<T: Real>(a: T, x: T) -> T {
    // Modified Lentz continued fraction for Q(a, x).
    let tiny = T::lit(1e-30);
    let mut b = x + T::one() - a;
    let mut c = T::one() / tiny;
    let mut d = T::one() / b;
    let mut h = d;
    for i in 1..500 {
        let an = -T::lit(i as f64) * (T::lit(i as f64) - a);
        b += T::two();
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = T::one() / d;
        let delta = d * c;
        h *= delta;
        if (delta - T::one()).abs() < T::epsilon() {
            break;
        }
    }
    (-x + a * x.ln() - ln_gamma(a)).exp() * h
}

/// z-score of observing `count` successes in `n` Bernoulli(p) trials under
/// the normal approximation. Degenerate categories (p = 0 or p = 1) give 0
/// when the count matches exactly and +inf otherwise.
pub fn z_score<T: Real>(count: u64, n: u64, p: T) -> T {
    let nf = T::lit(n as f64);
    let freq = T::lit(count as f64) / nf;
    let var = p * (T::one() - p) / nf;
    if var <= T::zero() {
        let exact = (p <= T::zero() && count == 0) || (p >= T::one() && count == n);
        return if exact { T::zero() } else { T::infinity() };
    }
    (freq - p) / var.sqrt()
}

/// Pearson chi-squared statistic, degrees of freedom, and p-value for
/// observed `counts` against category probabilities `probs` (all > 0).
pub fn chi_squared_gof<T: Real>(counts: &[u64], probs: &[T]) -> Result<(T, usize, T)> {
    if counts.len() != probs.len() {
        return Err(Error::domain(format!(
            "chi-squared dimension mismatch: {} counts vs {} probabilities",
            counts.len(),
            probs.len()
        )));
    }
    if probs.iter().any(|&p| p <= T::zero()) {
        return Err(Error::domain(
            "chi-squared requires strictly positive category probabilities".to_string(),
        ));
    }
    if counts.len() < 2 {
        // A single forced category carries no information.
        return Ok((T::zero(), 0, T::one()));
    }
    let n = T::lit(counts.iter().sum::<u64>() as f64);
    let mut stat = T::zero();
    for (&o, &p) in counts.iter().zip(probs) {
        let expected = n * p;
        let diff = T::lit(o as f64) - expected;
        stat += diff * diff / expected;
    }
    let dof = counts.len() - 1;
    let p_value = gamma_q(T::lit(dof as f64) * T::half(), stat * T::half())?;
    Ok((stat, dof, p_value))
}

/// Kolmogorov-Smirnov statistic D_n of `samples` against `cdf`.
/// Sorts the slice in place.
pub fn ks_statistic<T: Real, F: Fn(T) -> T>(samples: &mut [T], cdf: F) -> T {
    assert!(!samples.is_empty(), "KS statistic of an empty sample");
    samples.sort_by(|a, b| a.partial_cmp(b).expect("NaN in KS samples"));
    let n = T::lit(samples.len() as f64);
    let mut sup = T::zero();
    for (i, &x) in samples.iter().enumerate() {
        let fx = cdf(x);
        let lo = T::lit(i as f64) / n;
        let hi = T::lit((i + 1) as f64) / n;
        sup = sup.max((fx - lo).abs()).max((hi - fx).abs());
    }
    sup
}

/// Asymptotic p-value of a KS statistic `d` at sample size `n`, using the
/// Kolmogorov distribution with the small-sample effective-size correction.
pub fn ks_p_value<T: Real>(d: T, n: usize) -> T {
    let sqrt_n = T::lit(n as f64).sqrt();
    let lambda = (sqrt_n + T::lit(0.12) + T::lit(0.11) / sqrt_n) * d;
    if lambda <= T::zero() {
        return T::one();
    }
    let mut sum = T::zero();
    let mut sign = T::one();
    let mut prev = T::infinity();
    for j in 1..=100 {
        let jf = T::lit(j as f64);
        let term = (-T::two() * jf * jf * lambda * lambda).exp();
        sum += sign * term;
        if term <= T::epsilon() * T::lit(1e3) || term >= prev {
            break;
        }
        prev = term;
        sign = -sign;
    }
    crate::scalar::clamp(T::two() * sum, T::zero(), T::one())
}
