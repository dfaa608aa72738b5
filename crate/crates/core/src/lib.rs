//! Numerics for the inter-cavity-hopping driven superradiant transition of the
//! Rabi-dimer model.
//!
//! Two Rabi cavities (one two-level atom coupled to one bosonic mode each) are
//! linked by a hopping term `J (a_L + a_L†)(a_R + a_R†)`. The crate assembles the
//! truncated Fock ⊗ spin Hamiltonian, finds ground states by Lanczos iteration,
//! evaluates ground-state observables and the fidelity susceptibility, and runs
//! the finite-frequency scaling analysis that extracts the critical exponents.
//!
//! All energies are in units of the cavity frequency `ω`.
//!
//! ```
//! use rabidimer_core::{build_hamiltonian, ground_state, LanczosConfig, ModelParams};
//!
//! let params = ModelParams::new(0.0, 10.0, 0.0, 4).unwrap();
//! let h = build_hamiltonian(&params).unwrap();
//! let gs = ground_state(&h, &LanczosConfig::default()).unwrap();
//! assert!((gs.value + 10.0).abs() < 1e-9);
//! ```

// Negated comparisons below deliberately reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod criticality;
pub mod eigensolve;
mod error;
pub mod fidelity;
pub mod model;
pub mod observables;
pub mod sparse;

pub use criticality::{
    collapse_score, critical_hopping, fit_mu, locate_peak, mean_field, scaling_report,
    FsCurve, MeanFieldResult, PeakSearch, PowerLawFit, ScalingReport,
};
pub use eigensolve::{
    ground_state, lowest_k_dense, lowest_k_lanczos, EigenResult, LanczosConfig, Parity,
};
pub use error::{Error, Result};
pub use fidelity::{fidelity, fidelity_susceptibility, fs_perturbative, FsPoint, Stencil};
pub use model::{basis_dim, build_hamiltonian, parity_operator, BasisIndex, ModelParams, Spin};
pub use observables::{gs_observables, photon_population, x_minus_squared, Cavity, GsObservables};
pub use sparse::SparseHamiltonian;
