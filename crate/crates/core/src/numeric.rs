//! One-dimensional numeric helpers: adaptive Simpson quadrature and
//! bracketed bisection. Both are written for smooth, monotone problems on
//! bounded intervals; robustness is preferred over speed.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Hard cap on adaptive subdivision depth. 2^-60 of the original interval is
/// far below any tolerance this crate requests.
const MAX_DEPTH: u32 = 60;

#[inline]
fn simpson<T: Real, F: Fn(T) -> T>(f: &F, a: T, fa: T, b: T, fb: T) -> (T, T, T) {
    let m = (a + b) * T::half();
    let fm = f(m);
    let six = T::lit(6.0);
    ((b - a) / six * (fa + T::lit(4.0) * fm + fb), m, fm)
}

#[allow(clippy::too_many_arguments)]
fn adapt<T: Real, F: Fn(T) -> T>(
    f: &F,
    a: T,
    fa: T,
    b: T,
    fb: T,
    whole: T,
    m: T,
    fm: T,
    tol: T,
    depth: u32,
) -> Result<T> {
    let (left, lm, flm) = simpson(f, a, fa, m, fm);
    let (right, rm, frm) = simpson(f, m, fm, b, fb);
    let delta = left + right - whole;
    if delta.abs() <= T::lit(15.0) * tol {
        return Ok(left + right + delta / T::lit(15.0));
    }
    if depth >= MAX_DEPTH {
        return Err(Error::numeric(format!(
            "quadrature did not converge on [{a}, {b}] at depth {depth}: \
             estimate {whole}, refinement delta {delta}"
        )));
    }
    let half_tol = tol * T::half();
    let l = adapt(f, a, fa, m, fm, left, lm, flm, half_tol, depth + 1)?;
    let r = adapt(f, m, fm, b, fb, right, rm, frm, half_tol, depth + 1)?;
    Ok(l + r)
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance
/// `tol`. Errors if the refinement stalls before reaching the tolerance.
pub fn integrate<T: Real, F: Fn(T) -> T>(f: F, a: T, b: T, tol: T) -> Result<T> {
    if a == b {
        return Ok(T::zero());
    }
    if !matches!(a.partial_cmp(&b), Some(std::cmp::Ordering::Less)) {
        return Err(Error::domain(format!(
            "integration interval reversed or not finite: [{a}, {b}]"
        )));
    }
    let fa = f(a);
    let fb = f(b);
    let (whole, m, fm) = simpson(&f, a, fa, b, fb);
    adapt(&f, a, fa, b, fb, whole, m, fm, tol, 0)
}

/// Bisection root of `f` on `[lo, hi]`, assuming `f(lo)` and `f(hi)` bracket
/// zero. Converges to an interval of width `x_tol` and returns its midpoint.
pub fn bisect<T: Real, F: Fn(T) -> T>(f: F, lo: T, hi: T, x_tol: T) -> Result<T> {
    if !matches!(lo.partial_cmp(&hi), Some(std::cmp::Ordering::Less)) {
        return Err(Error::domain(format!(
            "bisection bracket reversed: [{lo}, {hi}]"
        )));
    }
    let mut lo = lo;
    let mut hi = hi;
    let flo = f(lo);
    if flo == T::zero() {
        return Ok(lo);
    }
    let fhi = f(hi);
    if fhi == T::zero() {
        return Ok(hi);
    }
    if (flo > T::zero()) == (fhi > T::zero()) {
        return Err(Error::domain(format!(
            "bisection requires a sign change: f({lo}) = {flo}, f({hi}) = {fhi}"
        )));
    }
    let lo_negative = flo < T::zero();
    // Interval halves every step, so the iteration count is bounded by the
    // bit width of the mantissa plus the exponent range; 200 is ample.
    for _ in 0..200 {
        let mid = (lo + hi) * T::half();
        if hi - lo <= x_tol || mid == lo || mid == hi {
            return Ok(mid);
        }
        let fmid = f(mid);
        if fmid == T::zero() {
            return Ok(mid);
        }
        if (fmid < T::zero()) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) * T::half())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn integrates_polynomial() {
        let q = integrate(|x: f64| x * x, 0.0, 1.0, 1e-12).unwrap();
        assert_abs_diff_eq!(q, 1.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn integrates_sine_product() {
        // int_0^pi sin(x) dx = 2
        let q = integrate(|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-12).unwrap();
        assert_abs_diff_eq!(q, 2.0, epsilon = 1e-11);
    }

    #[test]
    fn empty_interval_is_zero() {
        assert_eq!(integrate(|x: f64| x, 2.0, 2.0, 1e-12).unwrap(), 0.0);
    }

    #[test]
    fn reversed_interval_rejected() {
        assert!(integrate(|x: f64| x, 1.0, 0.0, 1e-12).is_err());
    }

    #[test]
    fn bisect_finds_cosine_root() {
        let r = bisect(|x: f64| x.cos(), 0.0, 3.0, 1e-12).unwrap();
        assert_abs_diff_eq!(r, std::f64::consts::FRAC_PI_2, epsilon = 1e-11);
    }

    #[test]
    fn bisect_requires_bracket() {
        assert!(bisect(|x: f64| x * x + 1.0, -1.0, 1.0, 1e-12).is_err());
    }

    #[test]
    fn bisect_accepts_endpoint_root() {
        let r = bisect(|x: f64| x, 0.0, 1.0, 1e-12).unwrap();
        assert_eq!(r, 0.0);
    }
}
