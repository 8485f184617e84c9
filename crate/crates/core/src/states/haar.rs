//! Monte-Carlo Haar average of the signal in the full product space.
//!
//! This is an oracle for [`averaged_state`](super::averaged_state): it never
//! uses Clebsch–Gordan coefficients, only explicit rotation matrices applied
//! to the signal vector and an empirical average over random orientations.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::GenericState;
use crate::error::{domain, Result};
use crate::halfint::HalfInt;
use crate::su2::{wigner_d_highest, WignerSmallD};

const CHUNK: usize = 4096;

/// Rotation `e^{-iαJz} e^{-iβJy} e^{-iγJz}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EulerAngles {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl EulerAngles {
    pub const IDENTITY: EulerAngles = EulerAngles {
        alpha: 0.0,
        beta: 0.0,
        gamma: 0.0,
    };
}

/// Haar-uniform Euler angles: `α, γ` uniform, `cos β` uniform on `[-1, 1]`.
pub fn haar_euler_angles<R: Rng + ?Sized>(rng: &mut R) -> EulerAngles {
    let alpha = TAU * rng.gen::<f64>();
    let gamma = TAU * rng.gen::<f64>();
    let beta = (1.0 - 2.0 * rng.gen::<f64>()).clamp(-1.0, 1.0).acos();
    EulerAngles { alpha, beta, gamma }
}

/// Product basis `(j1, m, m2)`: `j1` ascending, then `m`, then `m2`, both ascending.
pub fn product_basis(state: &GenericState, j2: HalfInt) -> Vec<(HalfInt, HalfInt, HalfInt)> {
    state
        .labels()
        .flat_map(|j1| {
            j1.projections()
                .flat_map(move |m| j2.projections().map(move |m2| (j1, m, m2)))
        })
        .collect()
}

/// `Σ_{j1} a^{j1} Σ_{m2} d^{j2}_{m2 j2}(β) |j1 m1⟩|j2 m2⟩` in [`product_basis`] order.
pub fn signal_vector(state: &GenericState, j2: HalfInt, beta: f64) -> Result<DVector<f64>> {
    let basis = product_basis(state, j2);
    basis
        .iter()
        .map(|&(j1, m, m2)| {
            if m != state.m1() {
                return Ok(0.0);
            }
            Ok(state.amplitude(j1) * wigner_d_highest(j2, m2, beta)?)
        })
        .collect::<Result<Vec<f64>>>()
        .map(DVector::from_vec)
}

/// Empirical mean of `U ρ(β) U†` with entrywise standard errors of the real
/// and imaginary parts.
#[derive(Clone, Debug)]
pub struct OracleEstimate {
    pub basis: Vec<(HalfInt, HalfInt, HalfInt)>,
    pub mean: DMatrix<Complex64>,
    pub stderr_re: DMatrix<f64>,
    pub stderr_im: DMatrix<f64>,
    pub samples: usize,
}

struct Rotator {
    m1: HalfInt,
    j2: HalfInt,
    /// `(j1, a^{j1}, d^{j1})` per label.
    parts: Vec<(HalfInt, f64, WignerSmallD)>,
    d2: WignerSmallD,
    /// `d^{j2}_{m2 j2}(β)` of the unrotated signal.
    bob: Vec<f64>,
    dim: usize,
}

fn phase(m: HalfInt, angle: f64) -> Complex64 {
    Complex64::from_polar(1.0, -m.value() * angle)
}

impl Rotator {
    fn new(state: &GenericState, j2: HalfInt, beta: f64) -> Result<Self> {
        let parts = state
            .amplitudes()
            .iter()
            .map(|(&j1, &a)| Ok((j1, a, WignerSmallD::new(j1)?)))
            .collect::<Result<Vec<_>>>()?;
        let bob = j2
            .projections()
            .map(|m2| wigner_d_highest(j2, m2, beta))
            .collect::<Result<Vec<_>>>()?;
        let dim = product_basis(state, j2).len();
        Ok(Self {
            m1: state.m1(),
            j2,
            parts,
            d2: WignerSmallD::new(j2)?,
            bob,
            dim,
        })
    }

    /// Rotated signal vector `U(g) |Ψ(β)⟩`.
    fn rotate(&self, g: EulerAngles) -> DVector<Complex64> {
        let d2 = self.d2.matrix(g.beta);
        let w: Vec<Complex64> = self
            .j2
            .projections()
            .enumerate()
            .map(|(r, mr)| {
                let s: Complex64 = self
                    .j2
                    .projections()
                    .enumerate()
                    .map(|(c, mc)| phase(mc, g.gamma) * (d2[(r, c)] * self.bob[c]))
                    .sum();
                phase(mr, g.alpha) * s
            })
            .collect();
        let mut out = Vec::with_capacity(self.dim);
        for (j1, a, dj) in &self.parts {
            let col = j1.int_sum(self.m1) as usize;
            let dm = dj.matrix(g.beta);
            let tail = phase(self.m1, g.gamma) * *a;
            for (r, mr) in j1.projections().enumerate() {
                let v = phase(mr, g.alpha) * dm[(r, col)] * tail;
                out.extend(w.iter().map(|x| v * x));
            }
        }
        DVector::from_vec(out)
    }
}

#[derive(Clone)]
struct Accumulator {
    sum: DMatrix<Complex64>,
    sq_re: DMatrix<f64>,
    sq_im: DMatrix<f64>,
    n: usize,
}

impl Accumulator {
    fn new(dim: usize) -> Self {
        Self {
            sum: DMatrix::zeros(dim, dim),
            sq_re: DMatrix::zeros(dim, dim),
            sq_im: DMatrix::zeros(dim, dim),
            n: 0,
        }
    }

    fn push(&mut self, psi: &DVector<Complex64>) {
        let dim = psi.len();
        for i in 0..dim {
            for k in 0..dim {
                let x = psi[i] * psi[k].conj();
                self.sum[(i, k)] += x;
                self.sq_re[(i, k)] += x.re * x.re;
                self.sq_im[(i, k)] += x.im * x.im;
            }
        }
        self.n += 1;
    }

    fn merge(mut self, other: Accumulator) -> Self {
        self.sum += other.sum;
        self.sq_re += other.sq_re;
        self.sq_im += other.sq_im;
        self.n += other.n;
        self
    }

    fn finish(self, basis: Vec<(HalfInt, HalfInt, HalfInt)>) -> OracleEstimate {
        let n = self.n as f64;
        let mean = self.sum.map(|z| z / n);
        let stderr = |sq: &DMatrix<f64>, part: fn(Complex64) -> f64| {
            DMatrix::from_fn(mean.nrows(), mean.ncols(), |i, k| {
                if self.n < 2 {
                    return 0.0;
                }
                let mu = part(mean[(i, k)]);
                let var = ((sq[(i, k)] / n - mu * mu) * n / (n - 1.0)).max(0.0);
                (var / n).sqrt()
            })
        };
        OracleEstimate {
            stderr_re: stderr(&self.sq_re, |z| z.re),
            stderr_im: stderr(&self.sq_im, |z| z.im),
            mean,
            basis,
            samples: self.n,
        }
    }
}

/// Haar-averaged signal density matrix from `samples` random rotations.
///
/// Deterministic for a fixed `(seed, samples)`: samples are split into fixed
/// chunks, each with its own ChaCha stream, and chunk sums are combined in
/// chunk order.
pub fn averaged_state_oracle(
    state: &GenericState,
    j2: HalfInt,
    beta: f64,
    samples: usize,
    seed: u64,
) -> Result<OracleEstimate> {
    if samples == 0 {
        return domain("the Haar oracle needs at least one sample");
    }
    let rot = Rotator::new(state, j2, beta)?;
    let chunks = samples.div_ceil(CHUNK);
    let partial: Vec<Accumulator> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let count = CHUNK.min(samples - c * CHUNK);
            let mut acc = Accumulator::new(rot.dim);
            for _ in 0..count {
                acc.push(&rot.rotate(haar_euler_angles(&mut rng)));
            }
            acc
        })
        .collect();
    let total = partial
        .into_iter()
        .fold(Accumulator::new(rot.dim), Accumulator::merge);
    Ok(total.finish(product_basis(state, j2)))
}

/// Same average with rotations drawn from `next_rotation`.
pub fn averaged_state_oracle_with(
    state: &GenericState,
    j2: HalfInt,
    beta: f64,
    samples: usize,
    mut next_rotation: impl FnMut() -> EulerAngles,
) -> Result<OracleEstimate> {
    if samples == 0 {
        return domain("the Haar oracle needs at least one sample");
    }
    let rot = Rotator::new(state, j2, beta)?;
    let mut acc = Accumulator::new(rot.dim);
    for _ in 0..samples {
        acc.push(&rot.rotate(next_rotation()));
    }
    Ok(acc.finish(product_basis(state, j2)))
}
