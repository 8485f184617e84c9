//! Ratios of factorials, exact for small arguments and via ln Γ otherwise.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use statrs::function::gamma::ln_gamma;

/// Largest factorial argument evaluated in exact rational arithmetic.
///
/// A Racah sum whose labels are all at most 15 never needs an argument
/// above `j1 + j2 + J + 1 = 61`.
pub(crate) const EXACT_LIMIT: u64 = 61;

pub(crate) fn exact_factorial(n: u64) -> BigInt {
    (2..=n).fold(BigInt::one(), |acc, k| acc * k)
}

pub(crate) fn ln_factorial(n: u64) -> f64 {
    if n < 2 {
        0.0
    } else {
        ln_gamma(n as f64 + 1.0)
    }
}

pub(crate) fn is_exact(args: &[u64]) -> bool {
    args.iter().all(|&n| n <= EXACT_LIMIT)
}

/// `Π num! / Π den!` as an exact rational.
pub(crate) fn exact_ratio(num: &[u64], den: &[u64]) -> BigRational {
    let n = num
        .iter()
        .fold(BigInt::one(), |acc, &k| acc * exact_factorial(k));
    let d = den
        .iter()
        .fold(BigInt::one(), |acc, &k| acc * exact_factorial(k));
    BigRational::new(n, d)
}

pub(crate) fn ln_ratio(num: &[u64], den: &[u64]) -> f64 {
    num.iter().map(|&k| ln_factorial(k)).sum::<f64>()
        - den.iter().map(|&k| ln_factorial(k)).sum::<f64>()
}

pub(crate) fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().expect("factorial ratio out of f64 range")
}

/// `sqrt(Π num! / Π den!)`.
pub(crate) fn sqrt_factorial_ratio(num: &[u64], den: &[u64]) -> f64 {
    if is_exact(num) && is_exact(den) {
        rational_to_f64(&exact_ratio(num, den)).sqrt()
    } else {
        (0.5 * ln_ratio(num, den)).exp()
    }
}

/// `Π num! / Π den!`.
pub(crate) fn factorial_ratio(num: &[u64], den: &[u64]) -> f64 {
    if is_exact(num) && is_exact(den) {
        rational_to_f64(&exact_ratio(num, den))
    } else {
        ln_ratio(num, den).exp()
    }
}

/// Binomial coefficient `n choose k` as a float.
pub(crate) fn binomial(n: u64, k: u64) -> f64 {
    debug_assert!(k <= n);
    factorial_ratio(&[n], &[k, n - k])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_and_log_paths_agree() {
        for (n, k) in [(10u64, 3u64), (40, 20), (61, 30)] {
            let exact = binomial(n, k);
            let logp = ln_ratio(&[n], &[k, n - k]).exp();
            assert!((exact - logp).abs() / exact < 1e-12, "{n} {k}");
        }
        assert_eq!(binomial(6, 2), 15.0);
        // 200 choose 100
        let big = binomial(200, 100);
        assert!((big / 9.054851465610328e58 - 1.0).abs() < 1e-11);
    }

    #[test]
    fn sqrt_ratio() {
        assert!((sqrt_factorial_ratio(&[4], &[2, 2]) - 6f64.sqrt()).abs() < 1e-15);
        assert!((sqrt_factorial_ratio(&[80], &[79]) - 80f64.sqrt()).abs() < 1e-12);
    }
}
