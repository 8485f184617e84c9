//! Alice's preparations and the globally averaged signal state `ρ̄(β)`.

mod format;
mod haar;

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{domain, Error, Result};
use crate::halfint::{couple_range, HalfInt};
use crate::su2::{clebsch_gordan, wigner_d_highest_sq};

pub use haar::{
    averaged_state_oracle, averaged_state_oracle_with, haar_euler_angles, product_basis,
    signal_vector, EulerAngles, OracleEstimate,
};

/// Tolerance on the squared norm of a preparation.
pub const NORM_TOLERANCE: f64 = 1e-12;

/// A preparation `Σ_{j1} a^{j1} |j1 m1⟩` with a single projection `m1 ≥ 0`
/// and real amplitudes.
#[derive(Clone, Debug, PartialEq)]
pub struct GenericState {
    m1: HalfInt,
    amplitudes: BTreeMap<HalfInt, f64>,
}

impl GenericState {
    pub fn new(m1: HalfInt, amplitudes: impl IntoIterator<Item = (HalfInt, f64)>) -> Result<Self> {
        let state = Self::unchecked(m1, amplitudes)?;
        let norm = state.norm_sq();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return domain(format!("amplitudes are not normalized (Σa² = {norm})"));
        }
        Ok(state)
    }

    /// Like [`GenericState::new`] but rescales the amplitudes to unit norm.
    pub fn normalized(
        m1: HalfInt,
        amplitudes: impl IntoIterator<Item = (HalfInt, f64)>,
    ) -> Result<Self> {
        let mut state = Self::unchecked(m1, amplitudes)?;
        let norm = state.norm_sq().sqrt();
        if norm == 0.0 {
            return domain("all amplitudes are zero");
        }
        state.amplitudes.values_mut().for_each(|a| *a /= norm);
        Ok(state)
    }

    fn unchecked(
        m1: HalfInt,
        amplitudes: impl IntoIterator<Item = (HalfInt, f64)>,
    ) -> Result<Self> {
        if m1.twice() < 0 {
            return domain(format!(
                "m1 = {m1} < 0; use the mirror sector m1 = {} instead",
                -m1
            ));
        }
        let mut map = BTreeMap::new();
        for (j1, a) in amplitudes {
            if !j1.admits(m1) {
                return domain(format!("j1 = {j1} cannot carry projection m1 = {m1}"));
            }
            if !a.is_finite() {
                return domain(format!("amplitude for j1 = {j1} is not finite"));
            }
            if map.insert(j1, a).is_some() {
                return domain(format!("duplicate amplitude for j1 = {j1}"));
            }
        }
        if map.is_empty() {
            return domain("a preparation needs at least one amplitude");
        }
        Ok(Self {
            m1,
            amplitudes: map,
        })
    }

    /// Spin-`j` coherent state `|j j⟩`.
    pub fn coherent(j: HalfInt) -> Self {
        Self {
            m1: j,
            amplitudes: BTreeMap::from([(j, 1.0)]),
        }
    }

    /// Two parallel spin-1/2, i.e. `|1 1⟩`.
    pub fn parallel() -> Self {
        Self::coherent(HalfInt::ONE)
    }

    /// `a |0 0⟩ + sqrt(1 - a²) |1 0⟩` for `a ∈ [0, 1]`.
    pub fn two_term(a: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&a) {
            return domain(format!("two-term amplitude a = {a} outside [0, 1]"));
        }
        let b = (1.0 - a * a).max(0.0).sqrt();
        Self::new(HalfInt::ZERO, [(HalfInt::ZERO, a), (HalfInt::ONE, b)])
    }

    /// Two anti-parallel spin-1/2, `(|0 0⟩ + |1 0⟩)/√2`.
    pub fn antiparallel() -> Self {
        Self::two_term(std::f64::consts::FRAC_1_SQRT_2).expect("valid amplitude")
    }

    pub fn m1(&self) -> HalfInt {
        self.m1
    }

    pub fn amplitudes(&self) -> &BTreeMap<HalfInt, f64> {
        &self.amplitudes
    }

    pub fn amplitude(&self, j1: HalfInt) -> f64 {
        self.amplitudes.get(&j1).copied().unwrap_or(0.0)
    }

    /// The `j1` labels in increasing order.
    pub fn labels(&self) -> impl Iterator<Item = HalfInt> + '_ {
        self.amplitudes.keys().copied()
    }

    pub fn j_max(&self) -> HalfInt {
        *self.amplitudes.keys().next_back().expect("non-empty")
    }

    pub fn norm_sq(&self) -> f64 {
        self.amplitudes.values().map(|a| a * a).sum()
    }

    /// A single `j1` with `m1 = j1`.
    pub fn is_coherent(&self) -> bool {
        self.amplitudes.len() == 1 && self.j_max() == self.m1
    }
}

/// One sector of a [`BlockedOperator`]: a symmetric matrix over the listed labels.
#[derive(Clone, Debug, PartialEq)]
pub struct Block {
    pub basis: Vec<HalfInt>,
    pub matrix: DMatrix<f64>,
}

impl Block {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }

    pub fn asymmetry(&self) -> f64 {
        (&self.matrix - self.matrix.transpose()).amax()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue(&self.matrix)
    }
}

pub(crate) fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    match m.nrows() {
        0 => f64::INFINITY,
        1 => m[(0, 0)],
        2 => {
            let (a, b, d) = (m[(0, 0)], 0.5 * (m[(0, 1)] + m[(1, 0)]), m[(1, 1)]);
            0.5 * (a + d) - (0.25 * (a - d) * (a - d) + b * b).sqrt()
        }
        _ => SymmetricEigen::new(symmetrized(m)).eigenvalues.min(),
    }
}

pub(crate) fn symmetrized(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// A direct sum of small real symmetric matrices, one per sector label.
///
/// For the signal state the label is the total angular momentum `J` and each
/// block is the operator `Σ_M ⟨J M j1'| · |J M j1⟩` on the multiplicity
/// space spanned by the repeated `j1`. The full product-space operator is
/// `⊕_J block ⊗ 1_{2J+1} / (2J+1)`, so block traces add up to the trace of
/// the full operator.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BlockedOperator {
    blocks: BTreeMap<HalfInt, Block>,
}

impl BlockedOperator {
    pub fn new(blocks: BTreeMap<HalfInt, Block>) -> Self {
        Self { blocks }
    }

    pub fn blocks(&self) -> &BTreeMap<HalfInt, Block> {
        &self.blocks
    }

    pub fn block(&self, label: HalfInt) -> Option<&Block> {
        self.blocks.get(&label)
    }

    pub fn labels(&self) -> impl Iterator<Item = HalfInt> + '_ {
        self.blocks.keys().copied()
    }

    pub fn trace(&self) -> f64 {
        self.blocks.values().map(Block::trace).sum()
    }

    pub fn max_asymmetry(&self) -> f64 {
        self.blocks
            .values()
            .map(Block::asymmetry)
            .fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.blocks
            .values()
            .map(Block::min_eigenvalue)
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest entrywise difference, or `None` when the block structures differ.
    pub fn max_abs_diff(&self, other: &BlockedOperator) -> Option<f64> {
        if self.blocks.len() != other.blocks.len() {
            return None;
        }
        let mut worst = 0.0f64;
        for ((ka, a), (kb, b)) in self.blocks.iter().zip(&other.blocks) {
            if ka != kb || a.basis != b.basis {
                return None;
            }
            worst = worst.max((&a.matrix - &b.matrix).amax());
        }
        Some(worst)
    }
}

/// Clebsch–Gordan products `C^{J M}_{j1 m1, j2 m2} C^{J M}_{j1' m1, j2 m2}` for
/// one total-J sector, one matrix per `m2 = -j2 ..= j2`.
#[derive(Clone, Debug)]
struct CouplingBlock {
    basis: Vec<HalfInt>,
    products: Vec<DMatrix<f64>>,
}

/// The coupling structure of `(state, j2)`: which `j1` enter each `J`
/// sector, and the Clebsch–Gordan weights of every `m2` component.
///
/// Building it is the expensive part; evaluating `ρ̄(β)` or `A_μ` afterwards
/// only sums precomputed matrices.
#[derive(Clone, Debug)]
pub struct SignalModel {
    state: GenericState,
    j2: HalfInt,
    blocks: BTreeMap<HalfInt, CouplingBlock>,
}

impl SignalModel {
    pub fn new(state: &GenericState, j2: HalfInt) -> Result<Self> {
        if j2.twice() < 1 {
            return domain(format!("reference spin j2 = {j2} must be at least 1/2"));
        }
        let m1 = state.m1();
        let mut sectors: BTreeMap<HalfInt, Vec<HalfInt>> = BTreeMap::new();
        for j1 in state.labels() {
            for jt in couple_range(j1, j2) {
                sectors.entry(jt).or_default().push(j1);
            }
        }
        let mut blocks = BTreeMap::new();
        for (jt, basis) in sectors {
            let n = basis.len();
            let mut products = Vec::with_capacity(j2.multiplicity());
            for m2 in j2.projections() {
                let mt = m1 + m2;
                let mut k = DMatrix::zeros(n, n);
                if jt.admits(mt) {
                    let c: Vec<f64> = basis
                        .iter()
                        .map(|&j1| clebsch_gordan(j1, m1, j2, m2, jt, mt))
                        .collect::<Result<_>>()?;
                    for i in 0..n {
                        for l in 0..n {
                            k[(i, l)] = c[i] * c[l];
                        }
                    }
                }
                products.push(k);
            }
            blocks.insert(jt, CouplingBlock { basis, products });
        }
        Ok(Self {
            state: state.clone(),
            j2,
            blocks,
        })
    }

    pub fn state(&self) -> &GenericState {
        &self.state
    }

    pub fn j2(&self) -> HalfInt {
        self.j2
    }

    /// Same coupling structure with new amplitudes on the same `j1` labels.
    pub fn with_state(&self, state: &GenericState) -> Result<Self> {
        if state.m1() != self.state.m1() || !state.labels().eq(self.state.labels()) {
            return Err(Error::Structure(
                "replacement state has a different m1 or j1 label set".into(),
            ));
        }
        Ok(Self {
            state: state.clone(),
            j2: self.j2,
            blocks: self.blocks.clone(),
        })
    }

    /// Sector labels `J` with their `j1` bases.
    pub fn sectors(&self) -> impl Iterator<Item = (HalfInt, &[HalfInt])> {
        self.blocks.iter().map(|(&jt, b)| (jt, b.basis.as_slice()))
    }

    fn amplitude_vector(&self, basis: &[HalfInt]) -> DVector<f64> {
        DVector::from_iterator(
            basis.len(),
            basis.iter().map(|&j1| self.state.amplitude(j1)),
        )
    }

    /// `Σ_{m2} w(m2) a a' C C` for every sector.
    pub(crate) fn weighted_sum(&self, weights: &[f64]) -> BlockedOperator {
        debug_assert_eq!(weights.len(), self.j2.multiplicity());
        let blocks = self
            .blocks
            .iter()
            .map(|(&jt, cb)| {
                let n = cb.basis.len();
                let mut m = DMatrix::zeros(n, n);
                for (w, k) in weights.iter().zip(&cb.products) {
                    if *w != 0.0 {
                        m += k * *w;
                    }
                }
                let a = self.amplitude_vector(&cb.basis);
                let scaled = DMatrix::from_fn(n, n, |i, l| a[i] * a[l] * m[(i, l)]);
                (
                    jt,
                    Block {
                        basis: cb.basis.clone(),
                        matrix: scaled,
                    },
                )
            })
            .collect();
        BlockedOperator::new(blocks)
    }

    /// `ρ̄(β)` block by block.
    pub fn averaged_state(&self, beta: f64) -> Result<BlockedOperator> {
        check_angle("beta", beta)?;
        let weights: Vec<f64> = self
            .j2
            .projections()
            .map(|m2| wigner_d_highest_sq(self.j2, m2, beta))
            .collect::<Result<_>>()?;
        Ok(self.weighted_sum(&weights))
    }

    /// Embeds a sector operator into the product basis of [`product_basis`].
    pub fn embed_product_basis(&self, op: &BlockedOperator) -> Result<DMatrix<f64>> {
        let basis = product_basis(&self.state, self.j2);
        let index = |j1: HalfInt, m: HalfInt, m2: HalfInt| {
            basis
                .iter()
                .position(|&b| b == (j1, m, m2))
                .expect("label in product basis")
        };
        let dim = basis.len();
        let mut full = DMatrix::zeros(dim, dim);
        for (jt, block) in op.blocks() {
            let cb = self.blocks.get(jt).ok_or_else(|| {
                Error::Structure(format!("sector J={jt} does not occur for this signal"))
            })?;
            if cb.basis != block.basis {
                return Err(Error::Structure(format!("basis mismatch in sector J={jt}")));
            }
            let norm = 1.0 / jt.multiplicity() as f64;
            for mt in jt.projections() {
                // Coupled vectors |J M (j1)⟩ in the product basis.
                let vecs: Vec<DVector<f64>> = block
                    .basis
                    .iter()
                    .map(|&j1| {
                        let mut v = DVector::zeros(dim);
                        for m in j1.projections() {
                            let m2 = mt - m;
                            if self.j2.admits(m2) {
                                v[index(j1, m, m2)] =
                                    clebsch_gordan(j1, m, self.j2, m2, *jt, mt).unwrap_or(0.0);
                            }
                        }
                        v
                    })
                    .collect();
                for (i, vi) in vecs.iter().enumerate() {
                    for (l, vl) in vecs.iter().enumerate() {
                        let w = block.matrix[(i, l)] * norm;
                        if w != 0.0 {
                            full += vi * vl.transpose() * w;
                        }
                    }
                }
            }
        }
        Ok(full)
    }
}

pub(crate) fn check_angle(name: &str, x: f64) -> Result<()> {
    if (0.0..=PI).contains(&x) {
        Ok(())
    } else {
        domain(format!("{name} = {x} outside [0, π]"))
    }
}

/// `ρ̄(β)`: the signal averaged over global rotations and the unobserved
/// Euler angles, as a direct sum over total angular momentum `J`.
pub fn averaged_state(state: &GenericState, j2: HalfInt, beta: f64) -> Result<BlockedOperator> {
    check_angle("beta", beta)?;
    SignalModel::new(state, j2)?.averaged_state(beta)
}

/// Sector probabilities `p_J(β)` for a coherent preparation, where every `J`
/// occurs once.
pub fn coherent_overlap_distribution(
    state: &GenericState,
    j2: HalfInt,
    beta: f64,
) -> Result<BTreeMap<HalfInt, f64>> {
    if !state.is_coherent() {
        return domain("overlap distribution requires a coherent preparation |j j⟩");
    }
    let rho = averaged_state(state, j2, beta)?;
    Ok(rho
        .blocks()
        .iter()
        .map(|(&jt, b)| (jt, b.trace()))
        .collect())
}
