//! Mean-field phase boundary and the finite-frequency scaling pipeline.
//!
//! The numerical side locates the susceptibility peak `J_max(η)` for a set of
//! frequency ratios, fits `χ_F(J_max) ∝ η^μ` on a log-log scale and scores how
//! well the rescaled curves `(χ_max − χ_F)/χ_F` against `η^{1/ν}(J − J_max)`
//! collapse for a trial `ν`.

mod collapse;
mod mean_field;
mod peak;
mod scaling;

pub use collapse::{collapse_score, rescale, scan_nu};
pub use mean_field::{critical_hopping, mean_field, MeanFieldResult};
pub use peak::{locate_peak, refine_peak, scan_peak, FsCurve, PeakFlags, PeakScan, PeakSearch};
pub use scaling::{fit_mu, scaling_report, PowerLawFit, ScalingReport};
