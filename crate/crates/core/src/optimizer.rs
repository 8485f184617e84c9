//! Optimal covariant measurements and the search over preparations.
//!
//! One-dimensional sectors get a single estimate. Two-dimensional sectors get
//! the two-outcome measurement `(ν, π - ν)` whose projectors diagonalize
//! `Δ(ν) = A_{π-ν} - A_ν`. Every result carries a Helstrom certificate: the
//! smallest eigenvalue of `Υ - A_μ` over a μ grid, with `Υ = Σ_μ A_μ E_μ`.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::estimator::{BlockPovm, PairEstimate, PovmSpec, ScoreBlock, ScoreOperator};
use crate::halfint::HalfInt;
use crate::states::{min_eigenvalue, symmetrized, GenericState, SignalModel};

/// Grid size for [`helstrom_certificate`] in [`max_fidelity`].
pub const CERTIFICATE_GRID: usize = 1001;
/// A certificate at or above `-CERTIFICATE_TOLERANCE` marks a result optimal.
pub const CERTIFICATE_TOLERANCE: f64 = 1e-9;

const NU_BRACKET: (f64, f64) = (1e-6, FRAC_PI_2);
const NU_TOLERANCE: f64 = 1e-10;
const A_GRID_STEP: f64 = 1e-3;
const A_TOLERANCE: f64 = 1e-8;
const SECTOR_TIE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizationResult {
    pub povm: PovmSpec,
    pub fidelity: f64,
    pub per_block_contributions: BTreeMap<HalfInt, f64>,
    pub certificate_min_eigenvalue: f64,
    /// `false` means "locally optimal, uncertified".
    pub certified: bool,
}

/// Maximizes `f` on `[lo, hi]` by golden-section search until the bracket
/// is narrower than `tol`. Returns the midpoint of the final bracket and
/// its value.
pub fn golden_section_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Root of a function that changes sign from positive to negative on
/// `[lo, hi]`, by bisection to machine precision.
fn bisect_decreasing(g: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Argmax on `[0, π]` of `c0 + c1 sin μ + c2 cos μ`; `π/2` when flat.
pub fn sinusoid_argmax(c1: f64, c2: f64) -> f64 {
    if c1 == 0.0 && c2 == 0.0 {
        return FRAC_PI_2;
    }
    if c1 >= 0.0 {
        c1.atan2(c2)
    } else if c2 >= 0.0 {
        0.0
    } else {
        PI
    }
}

fn is_zero_block(block: &ScoreBlock) -> bool {
    block.constant.amax() == 0.0 && block.sine.amax() == 0.0 && block.cosine.amax() == 0.0
}

/// Best single estimate for a one-dimensional sector.
pub fn single_estimate(block: &ScoreBlock) -> (f64, f64) {
    let (c0, c1, c2) = block.trace_coefficients();
    let mu = sinusoid_argmax(c1, c2);
    (mu, c0 + c1 * mu.sin() + c2 * mu.cos())
}

/// Eigen-decomposition of `A_{π-μ} - A_μ`, eigenvalues ascending.
fn delta_eigen(block: &ScoreBlock, mu: f64) -> (Vec<f64>, Vec<DVector<f64>>) {
    let delta = symmetrized(&(block.at(PI - mu) - block.at(mu)));
    let eig = SymmetricEigen::new(delta);
    let mut pairs: Vec<(f64, DVector<f64>)> = eig
        .eigenvalues
        .iter()
        .zip(eig.eigenvectors.column_iter())
        .map(|(&l, v)| (l, canonical_sign(v.into_owned())))
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    pairs.into_iter().unzip()
}

/// Flips `v` so its first non-negligible component is positive.
fn canonical_sign(v: DVector<f64>) -> DVector<f64> {
    match v.iter().find(|x| x.abs() > 1e-12) {
        Some(&x) if x < 0.0 => -v,
        _ => v,
    }
}

/// Value of the best `(μ, π - μ)` measurement: `Tr A_μ + Σ λ⁺(Δ(μ))`.
pub fn pair_value(block: &ScoreBlock, mu: f64) -> f64 {
    let (values, _) = delta_eigen(block, mu);
    block.at(mu).trace() + values.iter().filter(|&&l| l > 0.0).sum::<f64>()
}

/// `d/dμ` of [`pair_value`] from first-order eigenvalue perturbation.
fn pair_slope(block: &ScoreBlock, mu: f64) -> f64 {
    let deriv = |x: f64| &block.sine * x.cos() - &block.cosine * x.sin();
    let d_delta: DMatrix<f64> = symmetrized(&(-deriv(PI - mu) - deriv(mu)));
    let (values, vectors) = delta_eigen(block, mu);
    let mut slope = deriv(mu).trace();
    for (l, v) in values.iter().zip(&vectors) {
        if *l > 0.0 {
            slope += v.dot(&(&d_delta * v));
        }
    }
    slope
}

/// Numerical argmax of [`pair_value`] on `[1e-6, π/2]`: golden section,
/// then bisection on the analytic slope to resolve the flat top.
pub fn pair_argmax(block: &ScoreBlock) -> f64 {
    let (lo, hi) = NU_BRACKET;
    let (x, _) = golden_section_max(|m| pair_value(block, m), lo, hi, NU_TOLERANCE);
    let slope = |m: f64| pair_slope(block, m);
    let mut width = 1e-6;
    loop {
        let a = (x - width).max(lo);
        let b = (x + width).min(hi);
        let (sa, sb) = (slope(a), slope(b));
        if sa > 0.0 && sb <= 0.0 {
            return bisect_decreasing(slope, a, b);
        }
        if a == lo && b == hi {
            return x;
        }
        if a == lo && sa <= 0.0 {
            return lo;
        }
        if b == hi && sb > 0.0 {
            return hi;
        }
        width *= 10.0;
    }
}

/// Best `(ν, π - ν)` measurement for a two-dimensional sector.
///
/// The element reporting `ν` projects onto the span where `Δ(ν) ≤ 0`, the
/// one reporting `π - ν` onto `Δ(ν) > 0`. When `Δ(ν)` is semidefinite the
/// measurement collapses to a single estimate.
pub fn pair_estimate(block: &ScoreBlock) -> (BlockPovm, f64) {
    let nu = pair_argmax(block);
    let (values, vectors) = delta_eigen(block, nu);
    let povm = match (values[0] > 0.0, values[1] > 0.0) {
        (false, true) => BlockPovm::Pair(PairEstimate {
            estimates: [nu, PI - nu],
            projectors: [vectors[0].clone(), vectors[1].clone()],
        }),
        (false, false) => BlockPovm::Single { mu: nu },
        _ => BlockPovm::Single { mu: PI - nu },
    };
    let value = block.contribution(&povm);
    (povm, value)
}

/// `Υ - A_μ ≥ 0` check for one sector: minimum eigenvalue over the grid.
pub fn block_certificate(block: &ScoreBlock, povm: &BlockPovm, grid: usize) -> f64 {
    let n = block.dim();
    let mut upsilon = DMatrix::zeros(n, n);
    for e in povm.elements(n) {
        upsilon += block.at(e.mu) * e.element;
    }
    let upsilon = symmetrized(&upsilon);
    (0..grid)
        .map(|k| {
            let mu = if grid > 1 {
                PI * k as f64 / (grid - 1) as f64
            } else {
                0.0
            };
            min_eigenvalue(&(&upsilon - block.at(mu)))
        })
        .fold(f64::INFINITY, f64::min)
}

/// Minimum eigenvalue of `Υ - A_μ` across all sectors and `grid` uniform
/// points of `[0, π]`.
pub fn certificate(score: &ScoreOperator, povm: &PovmSpec, grid: usize) -> Result<f64> {
    povm.validate(&score.dims())?;
    Ok(score
        .blocks()
        .iter()
        .map(|(l, b)| block_certificate(b, povm.block(*l).expect("validated"), grid))
        .fold(f64::INFINITY, f64::min))
}

pub fn helstrom_certificate(
    state: &GenericState,
    j2: HalfInt,
    povm: &PovmSpec,
    grid: usize,
) -> Result<f64> {
    if grid == 0 {
        return domain("certificate grid must have at least one point");
    }
    certificate(&SignalModel::new(state, j2)?.score_operator()?, povm, grid)
}

/// Optimal POVM and per-sector contributions, without the certificate.
pub fn solve(score: &ScoreOperator) -> Result<(PovmSpec, BTreeMap<HalfInt, f64>)> {
    let mut povm = PovmSpec::new();
    let mut parts = BTreeMap::new();
    for (&label, block) in score.blocks() {
        let (p, value) = match block.dim() {
            _ if is_zero_block(block) => (BlockPovm::Single { mu: FRAC_PI_2 }, 0.0),
            1 => {
                let (mu, value) = single_estimate(block);
                (BlockPovm::Single { mu }, value)
            }
            2 => pair_estimate(block),
            dim => return Err(Error::UnsupportedDimension { label, dim }),
        };
        povm.insert(label, p);
        parts.insert(label, value);
    }
    Ok((povm, parts))
}

/// Sum of the optimal per-sector contributions.
pub fn optimal_value(score: &ScoreOperator) -> Result<f64> {
    Ok(solve(score)?.1.values().sum())
}

/// Optimal measurement for `score` with its certificate.
pub fn maximize(score: &ScoreOperator) -> Result<OptimizationResult> {
    let (povm, per_block_contributions) = solve(score)?;
    let certificate_min_eigenvalue = certificate(score, &povm, CERTIFICATE_GRID)?;
    Ok(OptimizationResult {
        fidelity: per_block_contributions.values().sum(),
        povm,
        per_block_contributions,
        certificate_min_eigenvalue,
        certified: certificate_min_eigenvalue >= -CERTIFICATE_TOLERANCE,
    })
}

pub fn max_fidelity(state: &GenericState, j2: HalfInt) -> Result<OptimizationResult> {
    maximize(&SignalModel::new(state, j2)?.score_operator()?)
}

fn score_block(state: &GenericState, j2: HalfInt, label: HalfInt) -> Result<ScoreBlock> {
    let score = SignalModel::new(state, j2)?.score_operator()?;
    score
        .block(label)
        .cloned()
        .ok_or_else(|| Error::Structure(format!("sector J={label} does not occur")))
}

/// `(μ*, Tr A^J_{μ*})` for a one-dimensional sector `J`.
pub fn optimal_single_estimate(
    state: &GenericState,
    j2: HalfInt,
    label: HalfInt,
) -> Result<(f64, f64)> {
    let block = score_block(state, j2, label)?;
    if block.dim() != 1 {
        return Err(Error::Structure(format!(
            "sector J={label} has dimension {}, expected 1",
            block.dim()
        )));
    }
    Ok(single_estimate(&block))
}

/// `(ν, measurement, contribution)` for a two-dimensional sector `J`.
pub fn optimal_pair(
    state: &GenericState,
    j2: HalfInt,
    label: HalfInt,
) -> Result<(f64, BlockPovm, f64)> {
    let block = score_block(state, j2, label)?;
    if block.dim() != 2 {
        return Err(Error::Structure(format!(
            "sector J={label} has dimension {}, expected 2",
            block.dim()
        )));
    }
    let nu = pair_argmax(&block);
    let (povm, value) = pair_estimate(&block);
    Ok((nu, povm, value))
}

/// `ν(a) = arctan[√3 (1 + 2a²) π / (8 a √(1 - a²))]`: the optimal pair
/// estimate of the `j2 = 1/2`, `J = 1/2` sector for the two-term state.
pub fn closed_form_nu(a: f64) -> f64 {
    let num = 3f64.sqrt() * (1.0 + 2.0 * a * a) * PI;
    let den = 8.0 * a * (1.0 - a * a).max(0.0).sqrt();
    num.atan2(den)
}

/// Result of [`optimize_state`].
#[derive(Clone, Debug)]
pub struct StateOptimum {
    /// Best amplitude of the `m1 = 0` family `a|0 0⟩ + √(1-a²)|1 0⟩`.
    pub a_star: f64,
    /// Optimal fidelity within that family.
    pub family_fidelity: f64,
    /// Fidelity of the `m1 = 1` preparation `|1 1⟩`.
    pub parallel_fidelity: f64,
    /// Winning sector; `m1 = 0` on ties within 1e-9.
    pub sector: HalfInt,
    pub state: GenericState,
    pub result: OptimizationResult,
}

/// Maximizes the optimal fidelity over the two-term `m1 = 0` family and
/// compares with the `m1 = 1` sector.
pub fn optimize_state(j2: HalfInt) -> Result<StateOptimum> {
    optimize_state_with_step(j2, A_GRID_STEP)
}

/// Optimal fidelity of `two_term(a)` for each `a`, reusing one coupling model.
pub fn family_curve(j2: HalfInt, amplitudes: &[f64]) -> Result<Vec<f64>> {
    let model = SignalModel::new(&GenericState::antiparallel(), j2)?;
    amplitudes
        .par_iter()
        .map(|&a| family_value(&model, a))
        .collect()
}

fn family_value(model: &SignalModel, a: f64) -> Result<f64> {
    let state = GenericState::two_term(a)?;
    optimal_value(&model.with_state(&state)?.score_operator()?)
}

/// [`optimize_state`] with a custom coarse grid step.
pub fn optimize_state_with_step(j2: HalfInt, step: f64) -> Result<StateOptimum> {
    if !(step > 0.0 && step <= 0.5) {
        return domain(format!("amplitude grid step {step} outside (0, 0.5]"));
    }
    let model = SignalModel::new(&GenericState::antiparallel(), j2)?;
    let n = (1.0 / step).round() as usize;
    // Endpoints a = 0 and a = 1 are always on the grid.
    let mut grid: Vec<f64> = (0..=n).map(|k| (k as f64 * step).min(1.0)).collect();
    if grid.last() != Some(&1.0) {
        grid.push(1.0);
    }
    let values = grid
        .par_iter()
        .map(|&a| family_value(&model, a))
        .collect::<Result<Vec<f64>>>()?;
    let best = values
        .iter()
        .enumerate()
        .fold(0, |b, (k, v)| if *v > values[b] { k } else { b });
    let lo = (grid[best] - step).max(0.0);
    let hi = (grid[best] + step).min(1.0);
    let f = |a: f64| family_value(&model, a).unwrap_or(f64::NEG_INFINITY);
    let (mut a_star, mut family_fidelity) = golden_section_max(f, lo, hi, A_TOLERANCE);
    if values[best] > family_fidelity {
        a_star = grid[best];
        family_fidelity = values[best];
    }

    let parallel = max_fidelity(&GenericState::parallel(), j2)?;
    let family_state = GenericState::two_term(a_star)?;
    let (sector, state, result) = if parallel.fidelity > family_fidelity + SECTOR_TIE {
        (HalfInt::ONE, GenericState::parallel(), parallel.clone())
    } else {
        let r = maximize(&model.with_state(&family_state)?.score_operator()?)?;
        (HalfInt::ZERO, family_state, r)
    };
    Ok(StateOptimum {
        a_star,
        family_fidelity,
        parallel_fidelity: parallel.fidelity,
        sector,
        state,
        result,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::{fidelity, PovmElement};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn h(t: i32) -> HalfInt {
        HalfInt::from_twice(t)
    }

    #[test]
    fn golden_section_finds_parabola_peak() {
        let (x, fx) = golden_section_max(|x| -(x - 0.3) * (x - 0.3), 0.0, 1.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-8 && fx <= 0.0);
    }

    #[test]
    fn sinusoid_argmax_cases() {
        assert_eq!(sinusoid_argmax(1.0, 0.0), FRAC_PI_2);
        assert_eq!(sinusoid_argmax(0.0, 0.0), FRAC_PI_2);
        assert_eq!(sinusoid_argmax(-1.0, 0.5), 0.0);
        assert_eq!(sinusoid_argmax(-1.0, -0.5), PI);
        let c = (0.3f64, -0.2f64);
        let mu = sinusoid_argmax(c.0, c.1);
        let scan = (0..=100_000)
            .map(|k| PI * k as f64 / 100_000.0)
            .max_by(|x, y| {
                let f = |m: f64| c.0 * m.sin() + c.1 * m.cos();
                f(*x).total_cmp(&f(*y))
            })
            .unwrap();
        assert!((mu - scan).abs() < 1e-4);
    }

    #[test]
    fn single_estimate_examples() {
        let state = GenericState::two_term(0.609).unwrap();
        let (mu, _) = optimal_single_estimate(&state, h(1), h(3)).unwrap();
        assert!((mu - FRAC_PI_2).abs() < 1e-12);

        // Dense scan oracle for the parallel J=1/2 sector.
        let (mu, value) = optimal_single_estimate(&GenericState::parallel(), h(1), h(1)).unwrap();
        let block = score_block(&GenericState::parallel(), h(1), h(1)).unwrap();
        let f = |m: f64| block.at(m).trace();
        let n = 100_000;
        let k = (0..=n)
            .max_by(|&x, &y| f(PI * x as f64 / n as f64).total_cmp(&f(PI * y as f64 / n as f64)));
        let scan = PI * k.unwrap() as f64 / n as f64;
        assert!((mu - scan).abs() <= PI / n as f64);
        assert!(value >= f(scan) - 1e-15);
        assert!(optimal_single_estimate(&state, h(1), h(1)).is_err());
        assert!(optimal_pair(&GenericState::parallel(), h(1), h(1)).is_err());
    }

    #[test]
    fn spin_half_pair_matches_closed_form() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        for a in [0.1, 0.3, 0.5, 0.609, 0.7, 0.9] {
            let state = GenericState::two_term(a).unwrap();
            let (nu, povm, _) = optimal_pair(&state, h(1), h(1)).unwrap();
            assert!((nu - closed_form_nu(a)).abs() < 1e-8, "a={a}");
            let BlockPovm::Pair(p) = povm else {
                panic!("expected a pair")
            };
            // |−⟩ reports ν and |+⟩ reports π − ν.
            assert!((p.projectors[0][0] - s).abs() < 1e-12);
            assert!((p.projectors[0][1] + s).abs() < 1e-12);
            assert!((p.projectors[1][0] - s).abs() < 1e-12);
            assert!((p.projectors[1][1] - s).abs() < 1e-12);
        }
    }

    #[test]
    fn headline_values() {
        let f = |s: &GenericState| max_fidelity(s, h(1)).unwrap();
        let par = f(&GenericState::parallel());
        let anti = f(&GenericState::antiparallel());
        let opt = f(&GenericState::two_term(0.609).unwrap());
        assert!((par.fidelity - 0.90983).abs() < 5e-5);
        assert!((anti.fidelity - 0.90982).abs() < 5e-5);
        assert!((opt.fidelity - 0.91092).abs() < 5e-5);
        for r in [&par, &anti, &opt] {
            assert!(r.certified, "{}", r.certificate_min_eigenvalue);
            let sum: f64 = r.per_block_contributions.values().sum();
            assert!((sum - r.fidelity).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_amplitudes() {
        for a in [0.0, 1.0] {
            let r = max_fidelity(&GenericState::two_term(a).unwrap(), h(1)).unwrap();
            assert!(r.certified);
            assert!(r.fidelity >= 0.5 + PI / 8.0 - 1e-12);
        }
    }

    #[test]
    fn pair_relabeling_is_exact() {
        let state = GenericState::two_term(0.4).unwrap();
        let score = SignalModel::new(&state, h(3))
            .unwrap()
            .score_operator()
            .unwrap();
        for block in score.blocks().values().filter(|b| b.dim() == 2) {
            if let (BlockPovm::Pair(p), _) = pair_estimate(block) {
                let a = block.contribution(&BlockPovm::Pair(p.clone()));
                let b = block.contribution(&BlockPovm::Pair(p.swapped()));
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn certificate_detects_suboptimal_povm() {
        let state = GenericState::parallel();
        let bad = PovmSpec::uniform([h(1), h(3)], 0.0);
        let c = helstrom_certificate(&state, h(1), &bad, CERTIFICATE_GRID).unwrap();
        assert!(c < -1e-3, "{c}");
        let good = max_fidelity(&state, h(1)).unwrap();
        let c = helstrom_certificate(&state, h(1), &good.povm, CERTIFICATE_GRID).unwrap();
        assert!(c >= -CERTIFICATE_TOLERANCE);
    }

    fn random_povm(rng: &mut ChaCha8Rng, dims: &BTreeMap<HalfInt, usize>) -> PovmSpec {
        let mut povm = PovmSpec::new();
        for (&l, &d) in dims {
            let p = match d {
                1 => BlockPovm::Single {
                    mu: PI * rng.gen::<f64>(),
                },
                _ => {
                    // Random rotation of the standard basis, two or three
                    // outcomes (the third splits one projector in half).
                    let t: f64 = PI * rng.gen::<f64>();
                    let u = DVector::from_vec(vec![t.cos(), t.sin()]);
                    let v = DVector::from_vec(vec![-t.sin(), t.cos()]);
                    let pu = &u * u.transpose();
                    let pv = &v * v.transpose();
                    let mut els = vec![PovmElement {
                        mu: PI * rng.gen::<f64>(),
                        element: pu,
                    }];
                    if rng.gen::<bool>() {
                        els.push(PovmElement {
                            mu: PI * rng.gen::<f64>(),
                            element: &pv * 0.5,
                        });
                        els.push(PovmElement {
                            mu: PI * rng.gen::<f64>(),
                            element: &pv * 0.5,
                        });
                    } else {
                        els.push(PovmElement {
                            mu: PI * rng.gen::<f64>(),
                            element: pv,
                        });
                    }
                    BlockPovm::General(els)
                }
            };
            povm.insert(l, p);
        }
        povm
    }

    #[test]
    fn optimum_beats_random_competitors() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let states = [
            GenericState::parallel(),
            GenericState::antiparallel(),
            GenericState::two_term(0.609).unwrap(),
            GenericState::two_term(0.2).unwrap(),
        ];
        for state in &states {
            for t2 in [1, 2, 5] {
                let score = SignalModel::new(state, h(t2))
                    .unwrap()
                    .score_operator()
                    .unwrap();
                let best = maximize(&score).unwrap();
                assert!(best.certified);
                for _ in 0..20 {
                    let povm = random_povm(&mut rng, &score.dims());
                    let f = fidelity(state, h(t2), &povm).unwrap();
                    assert!(f <= best.fidelity + 1e-7, "{f} > {}", best.fidelity);
                }
            }
        }
    }

    #[test]
    fn rejects_large_blocks() {
        let state =
            GenericState::normalized(h(0), [(h(0), 1.0), (h(2), 1.0), (h(4), 1.0)]).unwrap();
        match max_fidelity(&state, h(2)) {
            Err(Error::UnsupportedDimension { dim: 3, .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn spin_half_state_optimum() {
        let opt = optimize_state(h(1)).unwrap();
        assert!((opt.a_star - 0.609).abs() < 5e-3, "{}", opt.a_star);
        assert!((opt.result.fidelity - 0.91092).abs() < 5e-5);
        assert_eq!(opt.sector, HalfInt::ZERO);
        assert!(opt.result.certified);
    }

    #[test]
    fn family_curve_has_single_interior_peak() {
        for t2 in [1, 4] {
            let grid: Vec<f64> = (0..=1000).map(|k| k as f64 / 1000.0).collect();
            let f = family_curve(h(t2), &grid).unwrap();
            let diffs: Vec<f64> = f.windows(2).map(|w| w[1] - w[0]).collect();
            let changes = diffs
                .windows(2)
                .filter(|w| (w[0] > 0.0) != (w[1] > 0.0))
                .count();
            assert_eq!(changes, 1, "j2={}", h(t2));
        }
    }

    #[test]
    fn zero_sector_wins_up_to_ten() {
        for t2 in 1..=20 {
            let opt = optimize_state_with_step(h(t2), 0.01).unwrap();
            assert!(opt.family_fidelity >= opt.parallel_fidelity, "j2={}", h(t2));
            assert_eq!(opt.sector, HalfInt::ZERO);
        }
    }
}
