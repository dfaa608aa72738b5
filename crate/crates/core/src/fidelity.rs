//! Ground-state fidelity and fidelity susceptibility with respect to the hopping `J`.
//!
//! The production route is the finite difference `χ_F = −2 ln F / δJ²` with
//! `F = |⟨ψ₀(J)|ψ₀(J + δJ)⟩|`. The perturbative sum
//! `Σ_{n≠0} |⟨ψ_n|H₁|ψ₀⟩|² / (E_n − E₀)²` is kept as an independent check for
//! bases small enough to diagonalize.

use serde::{Deserialize, Serialize};

use crate::eigensolve::{
    dot, ground_state, lowest_k_dense, lowest_k_lanczos, EigenResult, LanczosConfig,
    DENSE_DIM_LIMIT,
};
use crate::error::{Error, Result};
use crate::model::{build_hamiltonian, hopping_operator, sector_indices, ModelParams};
use crate::sparse::SparseHamiltonian;

/// Above this overlap, `1 − F` is taken from the distance between the states.
const COMPLEMENT_SWITCH: f64 = 1.0 - 1e-4;
/// Excited states closer than this to `E₀` are left out of the perturbative sum.
const DEGENERATE_GAP: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FsPoint {
    pub j: f64,
    pub chi_f: f64,
    pub delta_j: f64,
    /// Raw overlap `F`.
    pub fidelity: f64,
    /// `1 − F`, computed without cancellation when `F` is close to one.
    pub infidelity: f64,
}

/// Which pair of ground states enters the overlap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Stencil {
    /// `(J, J + δJ)`.
    #[default]
    Forward,
    /// `(J − δJ, J)`.
    Backward,
    /// `(J − δJ/2, J + δJ/2)`.
    Central,
}

/// `|⟨ψ_a|ψ_b⟩|`.
pub fn fidelity(psi_a: &[f64], psi_b: &[f64]) -> Result<f64> {
    if psi_a.len() != psi_b.len() {
        return Err(Error::DimensionMismatch {
            expected: psi_a.len(),
            found: psi_b.len(),
        });
    }
    Ok(dot(psi_a, psi_b).abs())
}

/// `(F, 1 − F)` for two unit vectors.
///
/// Near unity the complement is `½‖ψ_a − sψ_b‖² + 1 − ½(‖ψ_a‖² + ‖ψ_b‖²)` with
/// `s` the overlap sign, which avoids subtracting two numbers close to one.
pub fn fidelity_with_complement(psi_a: &[f64], psi_b: &[f64]) -> Result<(f64, f64)> {
    let f = fidelity(psi_a, psi_b)?;
    if f <= COMPLEMENT_SWITCH {
        return Ok((f, 1.0 - f));
    }
    let s = dot(psi_a, psi_b).signum();
    let dist2: f64 = psi_a
        .iter()
        .zip(psi_b)
        .map(|(a, b)| (a - s * b).powi(2))
        .sum();
    let norms = 0.5 * (dot(psi_a, psi_a) + dot(psi_b, psi_b));
    let complement = 0.5 * dist2 + (1.0 - norms);
    Ok((1.0 - complement, complement))
}

/// `−2 ln F / δJ²` from two ground states a distance `δJ` apart.
pub fn chi_from_states(psi_a: &[f64], psi_b: &[f64], j: f64, delta_j: f64) -> Result<FsPoint> {
    if !(delta_j > 0.0) {
        return Err(Error::InvalidArgument(format!("delta_j must be > 0, got {delta_j}")));
    }
    let (f, complement) = fidelity_with_complement(psi_a, psi_b)?;
    if f <= 0.0 {
        return Err(Error::ZeroFidelity { j });
    }
    let ln_f = if complement < 1e-4 {
        (-complement).ln_1p()
    } else {
        f.ln()
    };
    Ok(FsPoint {
        j,
        chi_f: -2.0 * ln_f / (delta_j * delta_j),
        delta_j,
        fidelity: f,
        infidelity: complement,
    })
}

/// A susceptibility point together with the ground state at `J` itself, when it was computed.
#[derive(Debug, Clone)]
pub struct FsEvaluation {
    pub point: FsPoint,
    pub ground: Option<EigenResult>,
}

/// Finite-difference susceptibility for any one-parameter family `H(J)`.
///
/// Both ground states share the configuration (seed and sector) in `cfg`.
pub fn fs_for_family<F>(
    family: F,
    j: f64,
    delta_j: f64,
    stencil: Stencil,
    cfg: &LanczosConfig,
) -> Result<FsEvaluation>
where
    F: Fn(f64) -> Result<SparseHamiltonian>,
{
    if !(delta_j > 0.0) {
        return Err(Error::InvalidArgument(format!("delta_j must be > 0, got {delta_j}")));
    }
    let (ja, jb) = match stencil {
        Stencil::Forward => (j, j + delta_j),
        Stencil::Backward => (j - delta_j, j),
        Stencil::Central => (j - 0.5 * delta_j, j + 0.5 * delta_j),
    };
    let a = ground_state(&family(ja)?, cfg)?;
    let b = ground_state(&family(jb)?, cfg)?;
    let point = chi_from_states(&a.vector, &b.vector, j, delta_j)?;
    let ground = match stencil {
        Stencil::Forward => Some(a),
        Stencil::Backward => Some(b),
        Stencil::Central => None,
    };
    Ok(FsEvaluation { point, ground })
}

/// Model susceptibility at `params.j` with the chosen stencil.
pub fn fs_evaluation(
    params: &ModelParams,
    delta_j: f64,
    stencil: Stencil,
    cfg: &LanczosConfig,
) -> Result<FsEvaluation> {
    params.validate()?;
    fs_for_family(
        |j| build_hamiltonian(&params.with_j(j)),
        params.j,
        delta_j,
        stencil,
        cfg,
    )
}

/// Forward-difference susceptibility `χ_F(J)` of the Rabi dimer.
pub fn fidelity_susceptibility(
    params: &ModelParams,
    delta_j: f64,
    cfg: &LanczosConfig,
) -> Result<FsPoint> {
    Ok(fs_evaluation(params, delta_j, Stencil::Forward, cfg)?.point)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbativeFs {
    pub chi_f: f64,
    /// Excited states that entered the sum.
    pub states_used: usize,
    /// Excited states skipped as degenerate with the ground state.
    pub excluded_degenerate: usize,
}

/// Sum-over-states susceptibility for an explicit `H` and `∂H/∂J`.
///
/// Uses the `k_states` lowest excited states. Dense diagonalization is used
/// whenever the matrix fits, so partial sums are exactly nested in `k_states`.
pub fn fs_perturbative_with(
    h: &SparseHamiltonian,
    dh: &SparseHamiltonian,
    k_states: usize,
    cfg: &LanczosConfig,
) -> Result<PerturbativeFs> {
    if dh.dim() != h.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            found: dh.dim(),
        });
    }
    let want = (k_states + 1).min(h.dim());
    let spectrum = if h.dim() <= DENSE_DIM_LIMIT {
        let mut all = lowest_k_dense(h, h.dim())?;
        all.truncate(want);
        all
    } else {
        lowest_k_lanczos(h, want, cfg)?
    };
    let ground = &spectrum[0];
    let h1_psi0 = dh.apply(&ground.vector)?;
    let mut out = PerturbativeFs {
        chi_f: 0.0,
        states_used: 0,
        excluded_degenerate: 0,
    };
    for state in &spectrum[1..] {
        let gap = state.value - ground.value;
        if gap < DEGENERATE_GAP {
            out.excluded_degenerate += 1;
            continue;
        }
        let amp = dot(&state.vector, &h1_psi0);
        out.chi_f += amp * amp / (gap * gap);
        out.states_used += 1;
    }
    if out.excluded_degenerate > 0 {
        log::warn!(
            "{} excited state(s) degenerate with the ground state left out of the sum",
            out.excluded_degenerate
        );
    }
    Ok(out)
}

/// Sum-over-states susceptibility of the Rabi dimer, within `cfg.sector` when set.
pub fn fs_perturbative(
    params: &ModelParams,
    k_states: usize,
    cfg: &LanczosConfig,
) -> Result<PerturbativeFs> {
    let h = build_hamiltonian(params)?;
    let dh = hopping_operator(params.n_cut);
    let inner = LanczosConfig {
        sector: None,
        ..cfg.clone()
    };
    match cfg.sector {
        None => fs_perturbative_with(&h, &dh, k_states, &inner),
        Some(parity) => {
            let idx = sector_indices(params.n_cut, parity.sign());
            fs_perturbative_with(&h.restrict(&idx), &dh.restrict(&idx), k_states, &inner)
        }
    }
}
