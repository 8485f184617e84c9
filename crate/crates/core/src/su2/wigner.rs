//! Wigner small-d functions `d^j_{m'm}(β) = ⟨j m'| e^{-iβJ_y} |j m⟩`.

use nalgebra::DMatrix;

use super::factorial::{binomial, sqrt_factorial_ratio};
use crate::error::{domain, Result};
use crate::halfint::HalfInt;

/// One term `coef · cos(β/2)^cos_pow · sin(β/2)^sin_pow` of the Wigner sum.
#[derive(Clone, Copy, Debug)]
struct Term {
    coef: f64,
    cos_pow: i32,
    sin_pow: i32,
}

fn check_pair(j: HalfInt, m: HalfInt) -> Result<()> {
    if j.admits(m) {
        Ok(())
    } else {
        domain(format!("invalid angular momentum pair (j={j}, m={m})"))
    }
}

fn terms(j: HalfInt, mp: HalfInt, m: HalfInt) -> Vec<Term> {
    let jpm = j.int_sum(m);
    let jmm = j.int_diff(m);
    let jpmp = j.int_sum(mp);
    let jmmp = j.int_diff(mp);
    let dm = mp.int_diff(m);
    let s_lo = (-dm).max(0);
    let s_hi = jpm.min(jmmp);
    let num = [jpmp as u64, jmmp as u64, jpm as u64, jmm as u64];
    let mut out: Vec<Term> = (s_lo..=s_hi)
        .map(|s| {
            let den = [jpm - s, s, dm + s, jmmp - s].map(|x| x as u64);
            let den2 = [
                den[0], den[0], den[1], den[1], den[2], den[2], den[3], den[3],
            ];
            let sign = if (dm + s).rem_euclid(2) == 0 {
                1.0
            } else {
                -1.0
            };
            Term {
                coef: sign * sqrt_factorial_ratio(&num, &den2),
                cos_pow: (jpm + jmmp - 2 * s) as i32,
                sin_pow: (dm + 2 * s) as i32,
            }
        })
        .collect();
    out.sort_by(|a, b| a.coef.abs().total_cmp(&b.coef.abs()));
    out
}

fn evaluate(terms: &[Term], beta: f64) -> f64 {
    let (s, c) = (0.5 * beta).sin_cos();
    let mut vals: Vec<f64> = terms
        .iter()
        .map(|t| t.coef * c.powi(t.cos_pow) * s.powi(t.sin_pow))
        .collect();
    vals.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
    vals.into_iter().sum()
}

/// Wigner small-d element `d^j_{m_row, m_col}(β)` in the Condon–Shortley convention.
pub fn wigner_d(j: HalfInt, m_row: HalfInt, m_col: HalfInt, beta: f64) -> Result<f64> {
    check_pair(j, m_row)?;
    check_pair(j, m_col)?;
    Ok(evaluate(&terms(j, m_row, m_col), beta))
}

/// `d^j_{m j}(β) = sqrt(C(2j, j+m)) cos^{j+m}(β/2) sin^{j-m}(β/2)`, the
/// components of a rotated highest-weight state.
pub fn wigner_d_highest(j: HalfInt, m: HalfInt, beta: f64) -> Result<f64> {
    check_pair(j, m)?;
    let p = j.int_sum(m);
    let q = j.int_diff(m);
    let (s, c) = (0.5 * beta).sin_cos();
    let b = binomial((p + q) as u64, p as u64);
    Ok(b.sqrt() * c.powi(p as i32) * s.powi(q as i32))
}

/// Squared highest-weight column, `(d^j_{m j}(β))²`.
pub fn wigner_d_highest_sq(j: HalfInt, m: HalfInt, beta: f64) -> Result<f64> {
    check_pair(j, m)?;
    let p = j.int_sum(m);
    let q = j.int_diff(m);
    let (s, c) = (0.5 * beta).sin_cos();
    let b = binomial((p + q) as u64, p as u64);
    Ok(b * (c * c).powi(p as i32) * (s * s).powi(q as i32))
}

/// Precomputed Wigner sums for every element of one spin-`j` representation.
///
/// Rows and columns are ordered by ascending projection, `-j ..= j`.
#[derive(Clone, Debug)]
pub struct WignerSmallD {
    j: HalfInt,
    terms: Vec<Vec<Term>>,
}

impl WignerSmallD {
    pub fn new(j: HalfInt) -> Result<Self> {
        if j.twice() < 0 {
            return domain(format!("negative angular momentum {j}"));
        }
        let mut terms = Vec::with_capacity(j.multiplicity() * j.multiplicity());
        for mp in j.projections() {
            for m in j.projections() {
                terms.push(self::terms(j, mp, m));
            }
        }
        Ok(Self { j, terms })
    }

    pub fn j(&self) -> HalfInt {
        self.j
    }

    pub fn dim(&self) -> usize {
        self.j.multiplicity()
    }

    pub fn element(&self, m_row: HalfInt, m_col: HalfInt, beta: f64) -> Result<f64> {
        check_pair(self.j, m_row)?;
        check_pair(self.j, m_col)?;
        let i = self.j.int_sum(m_row) as usize;
        let k = self.j.int_sum(m_col) as usize;
        Ok(evaluate(&self.terms[i * self.dim() + k], beta))
    }

    pub fn matrix(&self, beta: f64) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, k| evaluate(&self.terms[i * n + k], beta))
    }
}
