//! Scalar float helpers on top of `libm`.
//!
//! The crate is `no_std`, so `f64::exp` and friends are unavailable; these
//! wrappers keep call sites short and collect the numerically careful forms
//! (stable softplus / sigmoid) in one place.

/// e^x.
#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

/// Natural log.
#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

/// ln(1 + x), accurate near zero.
#[inline]
pub fn ln_1p(x: f64) -> f64 {
    libm::log1p(x)
}

/// Square root.
#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}

#[inline]
pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}

/// log(1 + e^u) without overflow for large |u|.
///
/// Uses the identity softplus(u) = max(u, 0) + ln(1 + e^-|u|).
#[inline]
pub fn softplus(u: f64) -> f64 {
    let m = if u > 0.0 { u } else { 0.0 };
    m + ln_1p(exp(-abs(u)))
}

/// Logistic sigmoid 1 / (1 + e^-u), stable on both tails.
#[inline]
pub fn sigmoid(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + exp(-u))
    } else {
        let e = exp(u);
        e / (1.0 + e)
    }
}

#[inline]
pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

/// Squared Euclidean distance between two equal-length slices.
///
/// Callers guarantee equal lengths; debug builds assert it.
#[inline]
pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut s = 0.0;
    for (&ai, &bi) in a.iter().zip(b.iter()) {
        let d = ai - bi;
        s += d * d;
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn softplus_matches_naive_in_safe_range() {
        for &u in &[-20.0, -3.5, -1.0, 0.0, 0.3, 2.0, 15.0] {
            assert_relative_eq!(softplus(u), (1.0 + u.exp()).ln(), max_relative = 1e-12);
        }
    }

    #[test]
    fn softplus_is_stable_at_extremes() {
        // Naive log(1 + e^u) overflows near u = 710; the stable form stays
        // exact: softplus(u) -> u for large u, -> 0 for very negative u.
        assert_relative_eq!(softplus(1000.0), 1000.0, max_relative = 1e-15);
        assert_eq!(softplus(-1000.0), 0.0);
    }

    #[test]
    fn sigmoid_is_symmetric_and_bounded() {
        for &u in &[-800.0, -5.0, 0.0, 5.0, 800.0] {
            let s = sigmoid(u);
            assert!((0.0..=1.0).contains(&s));
            assert_relative_eq!(s + sigmoid(-u), 1.0, max_relative = 1e-12);
        }
        assert_relative_eq!(sigmoid(0.0), 0.5);
    }

    #[test]
    fn sigmoid_is_softplus_derivative() {
        // Finite-difference check that d/du softplus(u) = sigmoid(u).
        let h = 1e-6;
        for &u in &[-4.0, -0.7, 0.0, 1.3, 6.0] {
            let num = (softplus(u + h) - softplus(u - h)) / (2.0 * h);
            assert_relative_eq!(num, sigmoid(u), max_relative = 1e-6);
        }
    }

    #[test]
    fn sq_dist_basics() {
        assert_eq!(sq_dist(&[0.0, 0.0], &[3.0, 4.0]), 25.0);
        assert_eq!(sq_dist(&[1.5], &[1.5]), 0.0);
    }
}
