//! Angular moments of the squared highest-weight column of `d^{j2}`.

use std::f64::consts::PI;

use crate::error::{domain, Result};
use crate::halfint::HalfInt;
use crate::su2::{binomial, factorial_ratio, ln_ratio};

/// `I(μ) = P + Q sin μ + R cos μ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentTriple {
    pub p: f64,
    pub q: f64,
    pub r: f64,
}

impl MomentTriple {
    pub fn at(&self, mu: f64) -> f64 {
        let (s, c) = mu.sin_cos();
        self.p + self.q * s + self.r * c
    }
}

/// Closed-form moments of `w(β) = (d^{j2}_{j2 m2}(β))²` against the prior
/// `sin β / 2` and the utility `cos²((μ - β)/2)`:
///
/// * `P = ¼∫ w sin β dβ = 1 / (2(2j+1))`
/// * `Q = ¼∫ w sin²β dβ = C(2j, p) Γ(p+3/2) Γ(q+3/2) / Γ(2j+3)`
/// * `R = ¼∫ w sin β cos β dβ = m / ((2j+1)(2j+2))`
///
/// with `p = j + m`, `q = j - m`. All three follow from writing `w` as
/// `C(2j, p) t^p (1-t)^q` in `t = cos²(β/2)` and reducing to Beta functions.
pub fn moment_integrals(j2: HalfInt, m2: HalfInt) -> Result<MomentTriple> {
    if !j2.admits(m2) {
        return domain(format!("invalid angular momentum pair (j={j2}, m={m2})"));
    }
    let n = f64::from(j2.twice());
    let p_int = j2.int_sum(m2) as u64;
    let q_int = j2.int_diff(m2) as u64;
    let p = 1.0 / (2.0 * (n + 1.0));
    let r = m2.value() / ((n + 1.0) * (n + 2.0));

    // Γ(k + 3/2) = (2k+2)! √π / (4^{k+1} (k+1)!), so
    // Q = π C(2j,p) (2p+2)! (2q+2)! / (4^{2j+2} (p+1)! (q+1)! (2j+2)!).
    let two_j = p_int + q_int;
    let num = [2 * p_int + 2, 2 * q_int + 2];
    let den = [p_int + 1, q_int + 1, two_j + 2];
    let pow4 = (2 * two_j + 4) as i32; // exponent of 2
    let q = if two_j <= 28 {
        PI * binomial(two_j, p_int) * factorial_ratio(&num, &den) * 2f64.powi(-pow4)
    } else {
        let ln = binomial(two_j, p_int).ln() + ln_ratio(&num, &den)
            - f64::from(pow4) * std::f64::consts::LN_2;
        PI * ln.exp()
    };
    Ok(MomentTriple { p, q, r })
}
