//! Estimation against a classical reference direction, the `j2 → ∞`
//! correspondence with the quantum task, and sweeps over `j2`.
//!
//! Against a classical z-axis only the polar angle `β` of Alice's frame is
//! unknown to be estimated; averaging over the two azimuthal angles leaves
//! `σ̄(β)`, diagonal in the projection `m`:
//! `⟨j' m|σ̄(β)|j m⟩ = a^{j'} a^j d^{j'}_{m m1}(β) d^j_{m m1}(β)`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use gauss_quad::GaussLegendre;
use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimator::{ScoreBlock, ScoreOperator};
use crate::halfint::HalfInt;
use crate::optimizer::{
    golden_section_max, max_fidelity, maximize, optimal_value, optimize_state, OptimizationResult,
};
use crate::states::{check_angle, Block, BlockedOperator, GenericState, SignalModel};
use crate::su2::wigner_d;

const QUADRATURE_NODES: usize = 200;

/// `σ̄(β)` as one block per projection `m`, over the labels `j ≥ |m|`.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalAveragedState {
    operator: BlockedOperator,
}

impl ClassicalAveragedState {
    pub fn operator(&self) -> &BlockedOperator {
        &self.operator
    }

    pub fn block(&self, m: HalfInt) -> Option<&Block> {
        self.operator.block(m)
    }

    pub fn trace(&self) -> f64 {
        self.operator.trace()
    }
}

/// `m → [j]` for every projection reachable from the state's labels.
fn m_sectors(state: &GenericState) -> BTreeMap<HalfInt, Vec<HalfInt>> {
    let mut sectors: BTreeMap<HalfInt, Vec<HalfInt>> = BTreeMap::new();
    for j in state.labels() {
        for m in j.projections() {
            sectors.entry(m).or_default().push(j);
        }
    }
    sectors
}

fn sigma_blocks(state: &GenericState, beta: f64) -> Result<BTreeMap<HalfInt, Block>> {
    let m1 = state.m1();
    m_sectors(state)
        .into_iter()
        .map(|(m, basis)| {
            let col = basis
                .iter()
                .map(|&j| Ok(state.amplitude(j) * wigner_d(j, m, m1, beta)?))
                .collect::<Result<Vec<f64>>>()?;
            let n = basis.len();
            let matrix = DMatrix::from_fn(n, n, |i, k| col[i] * col[k]);
            Ok((m, Block { basis, matrix }))
        })
        .collect()
}

pub fn classical_sigma(state: &GenericState, beta: f64) -> Result<ClassicalAveragedState> {
    check_angle("beta", beta)?;
    Ok(ClassicalAveragedState {
        operator: BlockedOperator::new(sigma_blocks(state, beta)?),
    })
}

/// `A_μ = ∫ σ̄(β) cos²((μ-β)/2) sin β dβ/2` by 200-node Gauss–Legendre.
pub fn classical_score_operator(state: &GenericState) -> Result<ScoreOperator> {
    let gl = GaussLegendre::new(QUADRATURE_NODES).expect("valid node count");
    let mut blocks: BTreeMap<HalfInt, ScoreBlock> = m_sectors(state)
        .into_iter()
        .map(|(m, basis)| {
            let n = basis.len();
            let zero = DMatrix::zeros(n, n);
            let block = ScoreBlock {
                basis,
                constant: zero.clone(),
                sine: zero.clone(),
                cosine: zero,
            };
            (m, block)
        })
        .collect();
    for (&x, &w) in gl.nodes().zip(gl.weights()) {
        let beta = 0.5 * PI * (x + 1.0);
        let (s, c) = beta.sin_cos();
        // cos²((μ-β)/2) = (1 + cos μ cos β + sin μ sin β) / 2
        let base = w * 0.5 * PI * s / 4.0;
        for (m, b) in sigma_blocks(state, beta)? {
            let target = blocks.get_mut(&m).expect("same sectors");
            target.constant += &b.matrix * base;
            target.sine += &b.matrix * (base * s);
            target.cosine += &b.matrix * (base * c);
        }
    }
    Ok(ScoreOperator::new(blocks))
}

/// Optimal fidelity of estimating `β` against a classical z-axis.
pub fn classical_fidelity(state: &GenericState) -> Result<OptimizationResult> {
    maximize(&classical_score_operator(state)?)
}

/// Best amplitude of the two-term `m1 = 0` family against a classical axis,
/// with its fidelity.
pub fn classical_optimal_amplitude() -> Result<(f64, f64)> {
    let f = |a: f64| {
        GenericState::two_term(a)
            .and_then(|s| optimal_value(&classical_score_operator(&s)?))
            .unwrap_or(f64::NEG_INFINITY)
    };
    let grid: Vec<f64> = (0..=100).map(|k| k as f64 / 100.0).collect();
    let values: Vec<f64> = grid.par_iter().map(|&a| f(a)).collect();
    let best = values
        .iter()
        .enumerate()
        .fold(0, |b, (k, v)| if *v > values[b] { k } else { b });
    let lo = (grid[best] - 0.01).max(0.0);
    let hi = (grid[best] + 0.01).min(1.0);
    Ok(golden_section_max(f, lo, hi, 1e-8))
}

/// Largest entrywise gap between `ρ̄(β)` at `j2` and `σ̄(β)`, pairing the
/// sector `J` of `ρ̄` with the projection `m = J - j2` of `σ̄`.
///
/// Errors when the sectors and projections do not pair up one to one with
/// equal label sets, which happens for `j2` below the largest `j1`.
pub fn asymptotic_deviation(state: &GenericState, j2: HalfInt, beta: f64) -> Result<f64> {
    check_angle("beta", beta)?;
    let rho = SignalModel::new(state, j2)?.averaged_state(beta)?;
    let sigma = classical_sigma(state, beta)?;
    if rho.blocks().len() != sigma.operator().blocks().len() {
        return Err(Error::Structure(format!(
            "{} sectors at j2={j2} cannot pair with {} projections",
            rho.blocks().len(),
            sigma.operator().blocks().len()
        )));
    }
    let mut worst = 0.0f64;
    for (&m, s) in sigma.operator().blocks() {
        let jt = j2 + m;
        let r = rho.block(jt).ok_or_else(|| {
            Error::Structure(format!("no sector J={jt} to pair with projection m={m}"))
        })?;
        if r.basis != s.basis {
            return Err(Error::Structure(format!(
                "sector J={jt} and projection m={m} have different label sets"
            )));
        }
        // Coupling j2 before j1 multiplies |J M (j1)⟩ by (-1)^{j1 + j2 - J};
        // the limit holds in that phase convention.
        let sign = |j: HalfInt| if j.int_diff(m) % 2 == 0 { 1.0 } else { -1.0 };
        let n = r.basis.len();
        let phased = DMatrix::from_fn(n, n, |i, k| {
            sign(r.basis[i]) * sign(r.basis[k]) * r.matrix[(i, k)]
        });
        worst = worst.max((phased - &s.matrix).amax());
    }
    Ok(worst)
}

/// Maximum of [`asymptotic_deviation`] over `points` uniform angles in `[0, π]`.
pub fn max_asymptotic_deviation(state: &GenericState, j2: HalfInt, points: usize) -> Result<f64> {
    (0..points)
        .map(|k| {
            let beta = if points > 1 {
                PI * k as f64 / (points - 1) as f64
            } else {
                0.0
            };
            asymptotic_deviation(state, j2, beta)
        })
        .try_fold(0.0f64, |acc, d| Ok(acc.max(d?)))
}

/// `1/2, 1, …, 10, 15, 20, 30, 50, 100`.
pub fn default_j2_grid() -> Vec<HalfInt> {
    (1..=20)
        .map(HalfInt::from_twice)
        .chain([15, 20, 30, 50, 100].map(HalfInt::integer))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepRow {
    pub j2: HalfInt,
    pub a_star: f64,
    pub f_opt: f64,
    pub f_parallel: f64,
    pub f_antiparallel: f64,
}

/// Optimal, parallel and antiparallel fidelities for each `j2`, in input order.
pub fn sweep_optimal_vs_j2(j2_values: &[HalfInt]) -> Result<Vec<SweepRow>> {
    j2_values
        .par_iter()
        .map(|&j2| {
            let opt = optimize_state(j2)?;
            let anti = max_fidelity(&GenericState::antiparallel(), j2)?;
            Ok(SweepRow {
                j2,
                a_star: opt.a_star,
                f_opt: opt.result.fidelity,
                f_parallel: opt.parallel_fidelity,
                f_antiparallel: anti.fidelity,
            })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassicalLimitRow {
    pub j2: HalfInt,
    pub deviation_max: f64,
    pub f_quantum: f64,
    pub f_classical: f64,
}

/// Convergence of the quantum task towards the classical one for `state`:
/// largest deviation over a 20-point `β` grid and both optimal fidelities.
pub fn classical_limit_rows(
    state: &GenericState,
    j2_values: &[HalfInt],
) -> Result<Vec<ClassicalLimitRow>> {
    let f_classical = classical_fidelity(state)?.fidelity;
    j2_values
        .par_iter()
        .map(|&j2| {
            Ok(ClassicalLimitRow {
                j2,
                deviation_max: max_asymptotic_deviation(state, j2, 20)?,
                f_quantum: max_fidelity(state, j2)?.fidelity,
                f_classical,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::su2::wigner_d_highest_sq;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_3;

    fn h(t: i32) -> HalfInt {
        HalfInt::from_twice(t)
    }

    fn named() -> [GenericState; 3] {
        [
            GenericState::parallel(),
            GenericState::antiparallel(),
            GenericState::two_term(0.609).unwrap(),
        ]
    }

    #[test]
    fn zero_rotation_keeps_the_state() {
        let state = GenericState::two_term(0.3).unwrap();
        let s = classical_sigma(&state, 0.0).unwrap();
        let b = s.block(HalfInt::ZERO).unwrap();
        assert!((b.matrix[(0, 1)] - 0.3 * (1.0 - 0.09f64).sqrt()).abs() < 1e-15);
        assert!(s.block(HalfInt::ONE).unwrap().matrix[(0, 0)].abs() < 1e-15);
        assert!((s.trace() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn coherent_diagonal_is_squared_column() {
        for beta in [0.0, 0.4, 2.0, PI] {
            let s = classical_sigma(&GenericState::parallel(), beta).unwrap();
            for m in HalfInt::ONE.projections() {
                let d2 = wigner_d_highest_sq(HalfInt::ONE, m, beta).unwrap();
                assert!((s.block(m).unwrap().matrix[(0, 0)] - d2).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn classical_score_matches_closed_moments_for_coherent_state() {
        // For |j j⟩ the classical and quantum moments coincide.
        let state = GenericState::coherent(h(3));
        let score = classical_score_operator(&state).unwrap();
        for m in h(3).projections() {
            let t = crate::estimator::moment_integrals(h(3), m).unwrap();
            let b = score.block(m).unwrap();
            assert!((b.constant[(0, 0)] - t.p).abs() < 1e-13);
            assert!((b.sine[(0, 0)] - t.q).abs() < 1e-13);
            assert!((b.cosine[(0, 0)] - t.r).abs() < 1e-13);
        }
    }

    #[test]
    fn classical_fidelity_bounds() {
        for state in named() {
            let r = classical_fidelity(&state).unwrap();
            assert!(r.fidelity >= 0.5 + PI / 8.0 - 1e-12 && r.fidelity <= 1.0);
            assert!(r.certified);
        }
    }

    #[test]
    fn deviation_shrinks_with_j2() {
        let state = GenericState::two_term(0.609).unwrap();
        let d: Vec<f64> = [4, 20, 200]
            .iter()
            .map(|&t| asymptotic_deviation(&state, h(t), FRAC_PI_3).unwrap())
            .collect();
        assert!(d[2] < d[1] && d[1] < d[0], "{d:?}");
        assert!(asymptotic_deviation(&state, h(4), 0.0).unwrap().is_finite());
        assert!(asymptotic_deviation(&state, h(1), 1.0).is_err());
    }

    #[test]
    fn default_grid_shape() {
        let g = default_j2_grid();
        assert_eq!(g.len(), 25);
        assert_eq!(g[0], HalfInt::HALF);
        assert_eq!(*g.last().unwrap(), HalfInt::integer(100));
    }

    fn arb_state() -> impl Strategy<Value = GenericState> {
        (0i32..3, prop::collection::vec(0.05f64..1.0, 1..4)).prop_map(|(m1, amps)| {
            let m1 = HalfInt::from_twice(m1);
            GenericState::normalized(
                m1,
                amps.into_iter()
                    .enumerate()
                    .map(|(k, a)| (m1 + HalfInt::integer(k as i32), a)),
            )
            .unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn sigma_trace_symmetry_positivity(state in arb_state(), beta in 0.0f64..PI) {
            let s = classical_sigma(&state, beta).unwrap();
            prop_assert!((s.trace() - 1.0).abs() < 1e-12);
            prop_assert!(s.operator().max_asymmetry() < 1e-12);
            prop_assert!(s.operator().min_eigenvalue() >= -1e-12);
        }
    }
}
