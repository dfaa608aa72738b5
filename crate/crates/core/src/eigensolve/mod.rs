//! Lowest eigenpairs of the sparse Hamiltonian.
//!
//! Production solves go through a thick-restart Lanczos iteration with full
//! reorthogonalization ([`ground_state`], [`lowest_k_lanczos`]). A dense
//! symmetric diagonalization ([`lowest_k_dense`]) is kept as the reference for
//! small instances.

mod dense;
mod lanczos;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use dense::{lowest_k_dense, DENSE_DIM_LIMIT};
pub use lanczos::{ground_state, lowest_k_lanczos};

use crate::error::{Error, Result};
use crate::model::BasisIndex;

/// Eigenvalue of the total parity `σᶻ_L σᶻ_R (−1)^(n_L + n_R)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn sign(self) -> i8 {
        match self {
            Parity::Even => 1,
            Parity::Odd => -1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LanczosConfig {
    /// Cap on the total number of Lanczos steps (one matvec each), summed over restarts.
    pub max_iter: usize,
    /// Relative residual tolerance: `‖Hv − Ev‖ ≤ tol · max(1, |E|)`.
    pub tol: f64,
    /// Full reorthogonalization against the whole basis. When off, the plain
    /// three-term recurrence runs without restarts (at most 2000 steps); this
    /// mode exists for validation only.
    pub reorth: bool,
    pub seed: u64,
    /// Restrict the iteration to one parity sector.
    pub sector: Option<Parity>,
    /// Basis size between thick restarts.
    pub krylov_dim: usize,
}

impl Default for LanczosConfig {
    fn default() -> Self {
        Self {
            max_iter: 5000,
            tol: 1e-10,
            reorth: true,
            seed: 0x5eed,
            sector: Some(Parity::Even),
            krylov_dim: 32,
        }
    }
}

impl LanczosConfig {
    pub fn unrestricted() -> Self {
        Self {
            sector: None,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument(format!("tol must be > 0, got {}", self.tol)));
        }
        if self.max_iter < 2 {
            return Err(Error::InvalidArgument(format!(
                "max_iter must be >= 2, got {}",
                self.max_iter
            )));
        }
        if self.krylov_dim < 3 {
            return Err(Error::InvalidArgument(format!(
                "krylov_dim must be >= 3, got {}",
                self.krylov_dim
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenResult {
    pub value: f64,
    /// Unit-norm eigenvector over the full basis.
    pub vector: Vec<f64>,
    /// `‖Hv − Ev‖₂`.
    pub residual: f64,
    pub iterations: usize,
    /// Set when a neighbouring eigenvalue lies within `1e-12` of this one.
    pub near_degenerate: bool,
}

impl EigenResult {
    /// Text dump: a `key=value` header line followed by one component per line.
    pub fn write_dump<W: std::io::Write>(
        &self,
        mut out: W,
        params: &crate::model::ModelParams,
    ) -> Result<()> {
        writeln!(
            out,
            "# dim={} g={} eta={} J={} ncut={} E0={:.17e} residual={:.3e}",
            self.vector.len(),
            params.g,
            params.eta,
            params.j,
            params.n_cut,
            self.value,
            self.residual
        )?;
        for x in &self.vector {
            writeln!(out, "{x:.17e}")?;
        }
        Ok(())
    }
}

pub(crate) const DEGENERACY_GAP: f64 = 1e-12;

pub(crate) fn flag_degeneracies(results: &mut [EigenResult]) {
    for i in 0..results.len() {
        let close = |k: usize| (results[k].value - results[i].value).abs() < DEGENERACY_GAP;
        let flag = (i > 0 && close(i - 1)) || (i + 1 < results.len() && close(i + 1));
        results[i].near_degenerate = flag;
    }
}

/// Forces the largest-magnitude component positive (first one on ties).
pub(crate) fn fix_sign(v: &mut [f64]) {
    let mut best = 0usize;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v.get(best).is_some_and(|&x| x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Basis indices of a parity sector when `dim` is a Rabi-dimer basis size.
pub(crate) fn sector_of(dim: usize, parity: Parity) -> Result<Vec<usize>> {
    let n_cut = ((dim / 4) as f64).sqrt().round() as usize;
    if 4 * n_cut * n_cut != dim {
        return Err(Error::InvalidArgument(format!(
            "parity sectors need a Rabi-dimer basis (4·n_cut²), got dimension {dim}"
        )));
    }
    Ok(crate::model::sector_indices(n_cut, parity.sign()))
}

pub(crate) fn random_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect()
}

pub(crate) fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    // four accumulators; keeps the order fixed so results are reproducible
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for k in 0..chunks {
        let i = 4 * k;
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    let mut tail = 0.0;
    for i in 4 * chunks..a.len() {
        tail += a[i] * b[i];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[inline]
pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Parity label of a basis index, for callers holding a full-space vector.
pub fn parity_of_index(index: usize, n_cut: usize) -> Parity {
    if BasisIndex::decode(index, n_cut).parity() > 0 {
        Parity::Even
    } else {
        Parity::Odd
    }
}
