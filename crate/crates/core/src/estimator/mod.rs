//! Utility-weighted score operators `A_μ` and the average fidelity of
//! covariant measurements.

mod moments;
mod povm;

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{domain, Result};
use crate::halfint::HalfInt;
use crate::states::{check_angle, Block, BlockedOperator, GenericState, SignalModel};

pub use moments::{moment_integrals, MomentTriple};
pub use povm::{BlockPovm, PairEstimate, PovmElement, PovmSpec, POVM_TOLERANCE};

const CHUNK: usize = 4096;

/// `cos²((μ - β)/2)`.
pub fn utility(mu: f64, beta: f64) -> f64 {
    let c = (0.5 * (mu - beta)).cos();
    c * c
}

/// `A(μ) = constant + sin μ · sine + cos μ · cosine` on one sector.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreBlock {
    pub basis: Vec<HalfInt>,
    pub constant: DMatrix<f64>,
    pub sine: DMatrix<f64>,
    pub cosine: DMatrix<f64>,
}

impl ScoreBlock {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn at(&self, mu: f64) -> DMatrix<f64> {
        let (s, c) = mu.sin_cos();
        &self.constant + &self.sine * s + &self.cosine * c
    }

    /// `Tr A(μ)` as `(c0, c1, c2)` with `Tr A(μ) = c0 + c1 sin μ + c2 cos μ`.
    pub fn trace_coefficients(&self) -> (f64, f64, f64) {
        (
            self.constant.trace(),
            self.sine.trace(),
            self.cosine.trace(),
        )
    }

    /// `Σ_μ Tr(A(μ) E_μ)` for the elements of `povm` on this sector.
    pub fn contribution(&self, povm: &BlockPovm) -> f64 {
        povm.elements(self.dim())
            .iter()
            .map(|e| self.at(e.mu).dot(&e.element))
            .sum()
    }
}

/// The score operators `A_μ = ∫ ρ̄(β) cos²((μ-β)/2) sin β dβ/2` of a signal,
/// stored by their three μ-independent coefficient matrices.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ScoreOperator {
    blocks: BTreeMap<HalfInt, ScoreBlock>,
}

impl ScoreOperator {
    pub fn new(blocks: BTreeMap<HalfInt, ScoreBlock>) -> Self {
        Self { blocks }
    }

    pub fn blocks(&self) -> &BTreeMap<HalfInt, ScoreBlock> {
        &self.blocks
    }

    pub fn block(&self, label: HalfInt) -> Option<&ScoreBlock> {
        self.blocks.get(&label)
    }

    pub fn dims(&self) -> BTreeMap<HalfInt, usize> {
        self.blocks.iter().map(|(&l, b)| (l, b.dim())).collect()
    }

    pub fn at(&self, mu: f64) -> Result<BlockedOperator> {
        check_angle("mu", mu)?;
        let blocks = self
            .blocks
            .iter()
            .map(|(&l, b)| {
                (
                    l,
                    Block {
                        basis: b.basis.clone(),
                        matrix: b.at(mu),
                    },
                )
            })
            .collect();
        Ok(BlockedOperator::new(blocks))
    }

    /// Per-sector contributions `Σ_μ Tr(A_μ E_μ)` of a validated POVM.
    pub fn contributions(&self, povm: &PovmSpec) -> Result<BTreeMap<HalfInt, f64>> {
        povm.validate(&self.dims())?;
        Ok(self
            .blocks
            .iter()
            .map(|(&l, b)| (l, b.contribution(povm.block(l).expect("validated"))))
            .collect())
    }

    pub fn fidelity(&self, povm: &PovmSpec) -> Result<f64> {
        Ok(self.contributions(povm)?.values().sum())
    }

    /// Zips three operators with the same sector structure.
    pub(crate) fn from_parts(
        constant: BlockedOperator,
        sine: BlockedOperator,
        cosine: BlockedOperator,
    ) -> Self {
        let blocks = constant
            .blocks()
            .iter()
            .map(|(&l, c)| {
                let s = sine.block(l).expect("same structure");
                let k = cosine.block(l).expect("same structure");
                let block = ScoreBlock {
                    basis: c.basis.clone(),
                    constant: c.matrix.clone(),
                    sine: s.matrix.clone(),
                    cosine: k.matrix.clone(),
                };
                (l, block)
            })
            .collect();
        Self { blocks }
    }
}

impl SignalModel {
    /// `A_μ` for every sector, from the closed-form moments of `d^{j2}`.
    pub fn score_operator(&self) -> Result<ScoreOperator> {
        let j2 = self.j2();
        let triples: Vec<MomentTriple> = j2
            .projections()
            .map(|m2| moment_integrals(j2, m2))
            .collect::<Result<_>>()?;
        let part = |f: fn(&MomentTriple) -> f64| {
            self.weighted_sum(&triples.iter().map(f).collect::<Vec<_>>())
        };
        Ok(ScoreOperator::from_parts(
            part(|t| t.p),
            part(|t| t.q),
            part(|t| t.r),
        ))
    }
}

/// `A_μ` as a direct sum over total angular momentum.
pub fn a_operator(state: &GenericState, j2: HalfInt, mu: f64) -> Result<BlockedOperator> {
    check_angle("mu", mu)?;
    SignalModel::new(state, j2)?.score_operator()?.at(mu)
}

/// Average fidelity `Σ_J Σ_μ Tr(A^J_μ E^J_μ)`.
pub fn fidelity(state: &GenericState, j2: HalfInt, povm: &PovmSpec) -> Result<f64> {
    SignalModel::new(state, j2)?
        .score_operator()?
        .fidelity(povm)
}

/// Monte-Carlo estimate of the average fidelity with its standard error.
///
/// Each sample draws `β` from `sin β / 2`, an outcome from
/// `Tr(ρ̄(β) E_μ)`, and scores `cos²((μ - β)/2)`. Deterministic for a fixed
/// `(seed, samples)`.
pub fn fidelity_montecarlo(
    state: &GenericState,
    j2: HalfInt,
    povm: &PovmSpec,
    samples: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if samples == 0 {
        return domain("Monte-Carlo fidelity needs at least one sample");
    }
    let model = SignalModel::new(state, j2)?;
    let dims: BTreeMap<HalfInt, usize> =
        model.sectors().map(|(l, basis)| (l, basis.len())).collect();
    povm.validate(&dims)?;
    let outcomes: Vec<(HalfInt, f64, DMatrix<f64>)> = povm
        .blocks()
        .iter()
        .flat_map(|(&l, p)| {
            p.elements(dims[&l])
                .into_iter()
                .map(move |e| (l, e.mu, e.element))
        })
        .collect();

    let chunks = samples.div_ceil(CHUNK);
    let partial: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| -> Result<(f64, f64)> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let (mut sum, mut sq) = (0.0, 0.0);
            for _ in 0..CHUNK.min(samples - c * CHUNK) {
                let beta = (1.0 - 2.0 * rng.gen::<f64>()).clamp(-1.0, 1.0).acos();
                let rho = model.averaged_state(beta)?;
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                let mut mu = outcomes.last().map(|o| o.1).unwrap_or(PI / 2.0);
                for (l, m, e) in &outcomes {
                    acc += rho.block(*l).expect("validated").matrix.dot(e);
                    if u < acc {
                        mu = *m;
                        break;
                    }
                }
                let f = utility(mu, beta);
                sum += f;
                sq += f * f;
            }
            Ok((sum, sq))
        })
        .collect::<Result<_>>()?;
    let (sum, sq) = partial
        .iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let n = samples as f64;
    let mean = sum / n;
    let stderr = if samples > 1 {
        (((sq / n - mean * mean) * n / (n - 1.0)).max(0.0) / n).sqrt()
    } else {
        0.0
    };
    Ok((mean, stderr))
}

#[cfg(test)]
mod tests {
    use super::*;
    use gauss_quad::GaussLegendre;
    use std::f64::consts::FRAC_PI_2;

    fn h(t: i32) -> HalfInt {
        HalfInt::from_twice(t)
    }

    #[test]
    fn utility_examples() {
        assert_eq!(utility(0.7, 0.7), 1.0);
        assert!(utility(0.0, PI) < 1e-32);
        assert!((utility(FRAC_PI_2, 0.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn spin_half_entries() {
        for a in [0.0, 0.2, 0.609, 1.0 / 2f64.sqrt(), 1.0] {
            let state = GenericState::two_term(a).unwrap();
            let b2 = 1.0 - a * a;
            for mu in [0.0, 0.4, FRAC_PI_2, 2.5, PI] {
                let op = a_operator(&state, h(1), mu).unwrap();
                let (s, c) = mu.sin_cos();
                let half = &op.block(h(1)).unwrap().matrix;
                assert!((half[(0, 0)] - a * a * (4.0 + PI * s) / 8.0).abs() < 1e-15);
                let off = -a * b2.sqrt() * c / (6.0 * 3f64.sqrt());
                assert!((half[(0, 1)] - off).abs() < 1e-15);
                assert!((half[(1, 0)] - off).abs() < 1e-15);
                assert!((half[(1, 1)] - b2 * (12.0 + 3.0 * PI * s) / 72.0).abs() < 1e-15);
                let three = op.block(h(3)).unwrap().matrix[(0, 0)];
                assert!((three - b2 * (12.0 + 3.0 * PI * s) / 36.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn matches_quadrature_of_averaged_state() {
        let gl = GaussLegendre::new(200).unwrap();
        let states = [
            GenericState::parallel(),
            GenericState::two_term(0.3).unwrap(),
            GenericState::normalized(h(1), [(h(1), 0.5), (h(3), 0.7), (h(5), 0.2)]).unwrap(),
        ];
        for state in &states {
            for t2 in [1, 2, 5, 12] {
                let model = SignalModel::new(state, h(t2)).unwrap();
                let score = model.score_operator().unwrap();
                let nodes: Vec<(f64, BlockedOperator)> = gl
                    .nodes()
                    .map(|&x| {
                        let beta = 0.5 * PI * (x + 1.0);
                        (beta, model.averaged_state(beta).unwrap())
                    })
                    .collect();
                for mu in [0.0, 1.0, 2.2, PI] {
                    let exact = score.at(mu).unwrap();
                    for (l, block) in exact.blocks() {
                        let mut quad = DMatrix::zeros(block.dim(), block.dim());
                        for ((beta, rho), w) in nodes.iter().zip(gl.weights()) {
                            let f = w * 0.5 * PI * utility(mu, *beta) * beta.sin() / 2.0;
                            quad += &rho.block(*l).unwrap().matrix * f;
                        }
                        assert!((quad - &block.matrix).amax() < 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn entries_are_sinusoids() {
        let state = GenericState::two_term(0.45).unwrap();
        let score = SignalModel::new(&state, h(7))
            .unwrap()
            .score_operator()
            .unwrap();
        let mus: [f64; 5] = [0.1, 0.8, 1.5, 2.3, 3.0];
        for (l, b) in score.blocks() {
            let n = b.dim();
            for i in 0..n {
                for k in 0..n {
                    // Fit on three samples, check the other two.
                    let design = nalgebra::Matrix3::from_fn(|r, c| match c {
                        0 => 1.0,
                        1 => mus[r].sin(),
                        _ => mus[r].cos(),
                    });
                    let ys = nalgebra::Vector3::from_fn(|r, _| {
                        a_operator(&state, h(7), mus[r])
                            .unwrap()
                            .block(*l)
                            .unwrap()
                            .matrix[(i, k)]
                    });
                    let coef = design.lu().solve(&ys).unwrap();
                    for &mu in &mus[3..] {
                        let y = a_operator(&state, h(7), mu)
                            .unwrap()
                            .block(*l)
                            .unwrap()
                            .matrix[(i, k)];
                        let fit = coef[0] + coef[1] * mu.sin() + coef[2] * mu.cos();
                        assert!((fit - y).abs() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn blind_guess_floor() {
        let floor = 0.5 + PI / 8.0;
        for state in [
            GenericState::parallel(),
            GenericState::two_term(0.609).unwrap(),
        ] {
            for t2 in [1, 4, 9] {
                let score = SignalModel::new(&state, h(t2))
                    .unwrap()
                    .score_operator()
                    .unwrap();
                let povm = PovmSpec::uniform(score.blocks().keys().copied(), FRAC_PI_2);
                assert!((score.fidelity(&povm).unwrap() - floor).abs() < 1e-12);
                let worse = PovmSpec::uniform(score.blocks().keys().copied(), 1.2);
                assert!(score.fidelity(&worse).unwrap() < floor);
            }
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let state = GenericState::parallel();
        assert!(a_operator(&state, h(1), -0.1).is_err());
        let povm = PovmSpec::uniform([h(1)], 1.0);
        assert!(fidelity(&state, h(1), &povm).is_err());
        assert!(fidelity_montecarlo(&state, h(1), &povm, 0, 1).is_err());
    }

    #[test]
    fn montecarlo_single_outcome_and_determinism() {
        let state = GenericState::two_term(0.5).unwrap();
        let povm = PovmSpec::uniform([h(1), h(3)], 1.0);
        let (f, se) = fidelity_montecarlo(&state, h(1), &povm, 100_000, 3).unwrap();
        let exact = fidelity(&state, h(1), &povm).unwrap();
        assert!((f - exact).abs() < 4.0 * se, "{f} vs {exact} ± {se}");
        assert_eq!(
            fidelity_montecarlo(&state, h(1), &povm, 100_000, 3).unwrap(),
            (f, se)
        );
    }
}
