//! Clebsch–Gordan coefficients from the Racah closed-form sum.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use super::factorial::{exact_ratio, is_exact, ln_factorial, ln_ratio, rational_to_f64};
use crate::error::{domain, Result};
use crate::halfint::HalfInt;

/// `C^{J M}_{j1 m1, j2 m2} = ⟨j1 m1; j2 m2 | J M⟩`, Condon–Shortley phases.
///
/// Zero when `M ≠ m1 + m2`.
pub fn clebsch_gordan(
    j1: HalfInt,
    m1: HalfInt,
    j2: HalfInt,
    m2: HalfInt,
    jt: HalfInt,
    mt: HalfInt,
) -> Result<f64> {
    for (j, m) in [(j1, m1), (j2, m2), (jt, mt)] {
        if !j.admits(m) {
            return domain(format!("invalid angular momentum pair (j={j}, m={m})"));
        }
    }
    let lo = (j1 - j2).abs();
    if jt < lo || jt > j1 + j2 || !jt.same_parity(j1 + j2) {
        return domain(format!(
            "J={jt} is not in the coupling range of {j1} ⊗ {j2}"
        ));
    }
    if mt != m1 + m2 {
        return Ok(0.0);
    }

    let u = |x: i64| x as u64;

    // Triangle and projection factorial arguments, all nonnegative integers.
    let a = (jt + j1 - j2).twice() as i64 / 2;
    let b = (jt - j1 + j2).twice() as i64 / 2;
    let c = (j1 + j2 - jt).twice() as i64 / 2;
    let top = (j1 + j2 + jt).twice() as i64 / 2 + 1;
    let num = [
        a,
        b,
        c,
        jt.int_sum(mt),
        jt.int_diff(mt),
        j1.int_diff(m1),
        j1.int_sum(m1),
        j2.int_diff(m2),
        j2.int_sum(m2),
    ]
    .map(u);
    let den = [u(top)];
    let two_j_plus_one = u64::try_from(jt.twice() + 1).expect("J >= 0");

    let j1mm1 = j1.int_diff(m1);
    let j2pm2 = j2.int_sum(m2);
    let s1 = (jt - j2 + m1).twice() as i64 / 2;
    let s2 = (jt - j1 - m2).twice() as i64 / 2;
    let k_lo = 0.max(-s1).max(-s2);
    let k_hi = c.min(j1mm1).min(j2pm2);
    let sum_den = |k: i64| [k, c - k, j1mm1 - k, j2pm2 - k, s1 + k, s2 + k].map(u);

    let all_args_small =
        is_exact(&num) && is_exact(&den) && { (k_lo..=k_hi).all(|k| is_exact(&sum_den(k))) };

    if all_args_small {
        let mut s = BigRational::zero();
        for k in k_lo..=k_hi {
            let t = exact_ratio(&[], &sum_den(k));
            if k % 2 == 0 {
                s += t;
            } else {
                s -= t;
            }
        }
        if s.is_zero() {
            return Ok(0.0);
        }
        let p = exact_ratio(&num, &den) * BigRational::from_integer(BigInt::from(two_j_plus_one));
        let sq = rational_to_f64(&(&s * &s * p)).sqrt();
        Ok(if s.is_negative() { -sq } else { sq })
    } else {
        let half_ln_p = 0.5 * ((two_j_plus_one as f64).ln() + ln_ratio(&num, &den));
        let mut terms: Vec<f64> = (k_lo..=k_hi)
            .map(|k| {
                let ln_den: f64 = sum_den(k).iter().map(|&n| ln_factorial(n)).sum();
                let mag = (half_ln_p - ln_den).exp();
                if k % 2 == 0 {
                    mag
                } else {
                    -mag
                }
            })
            .collect();
        terms.sort_by(|x, y| x.abs().total_cmp(&y.abs()));
        Ok(terms.into_iter().sum())
    }
}
