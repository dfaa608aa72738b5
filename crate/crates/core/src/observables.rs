//! Ground-state diagnostics: energy, photon numbers and the normal-mode quadratures.
//!
//! The quadratures are `x_i = (a_i + a†_i)/√(2η)` and `x_± = (x_L ± x_R)/√2`.
//! Squared quadratures are evaluated as `‖X ψ‖²` with the sparse ladder action,
//! so nothing larger than a state vector is ever allocated.

use serde::{Deserialize, Serialize};

use crate::eigensolve::{dot, ground_state, LanczosConfig};
use crate::error::{Error, Result};
use crate::model::{apply_quadrature, basis_dim, build_hamiltonian, BasisIndex, ModelParams};

const NORM_TOL: f64 = 1e-8;

/// Fraction of `n_cut` above which a mean photon number is considered to press on the truncation.
pub const TRUNCATION_PRESSURE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cavity {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GsObservables {
    pub e0: f64,
    pub n_photon_l: f64,
    pub n_photon_r: f64,
    pub x2_minus: f64,
    pub params: ModelParams,
    /// Mean photon number exceeds half the truncation; the point is not trustworthy.
    pub truncation_pressure: bool,
    pub residual: f64,
}

fn check_state(state: &[f64], params: &ModelParams) -> Result<()> {
    let dim = basis_dim(params);
    if state.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: state.len(),
        });
    }
    let norm = dot(state, state).sqrt();
    if (norm - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized { norm });
    }
    Ok(())
}

/// `⟨a†a⟩` of one cavity.
pub fn photon_population(state: &[f64], cavity: Cavity, params: &ModelParams) -> Result<f64> {
    check_state(state, params)?;
    Ok(state
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let b = BasisIndex::decode(i, params.n_cut);
            let n = match cavity {
                Cavity::Left => b.n_l,
                Cavity::Right => b.n_r,
            };
            n as f64 * a * a
        })
        .sum())
}

fn normal_mode_squared(state: &[f64], params: &ModelParams, sign: f64) -> Result<f64> {
    check_state(state, params)?;
    let mut xl = vec![0.0; state.len()];
    let mut xr = vec![0.0; state.len()];
    apply_quadrature(state, params.n_cut, true, &mut xl);
    apply_quadrature(state, params.n_cut, false, &mut xr);
    let sq: f64 = xl.iter().zip(&xr).map(|(l, r)| (l + sign * r).powi(2)).sum();
    // x_± = (X_L ± X_R) / (2√η) with X = a + a†
    Ok(sq / (4.0 * params.eta))
}

/// `⟨x₋²⟩` for the antisymmetric normal mode.
pub fn x_minus_squared(state: &[f64], params: &ModelParams) -> Result<f64> {
    normal_mode_squared(state, params, -1.0)
}

/// `⟨x₊²⟩` for the symmetric normal mode.
pub fn x_plus_squared(state: &[f64], params: &ModelParams) -> Result<f64> {
    normal_mode_squared(state, params, 1.0)
}

/// Observables of an already computed ground state.
pub fn observables_of(
    e0: f64,
    state: &[f64],
    residual: f64,
    params: &ModelParams,
) -> Result<GsObservables> {
    let n_photon_l = photon_population(state, Cavity::Left, params)?;
    let n_photon_r = photon_population(state, Cavity::Right, params)?;
    let x2_minus = x_minus_squared(state, params)?;
    let limit = TRUNCATION_PRESSURE * params.n_cut as f64;
    Ok(GsObservables {
        e0,
        n_photon_l,
        n_photon_r,
        x2_minus,
        params: *params,
        truncation_pressure: n_photon_l > limit || n_photon_r > limit,
        residual,
    })
}

/// Solves the ground state at `params` and evaluates every observable on it.
pub fn gs_observables(params: &ModelParams, cfg: &LanczosConfig) -> Result<GsObservables> {
    let h = build_hamiltonian(params)?;
    let gs = ground_state(&h, cfg)?;
    observables_of(gs.value, &gs.vector, gs.residual, params)
}
