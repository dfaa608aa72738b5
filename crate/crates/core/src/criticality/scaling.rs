use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::FsCurve;
use crate::error::{Error, Result};

/// Least-squares line through `(ln η, ln χ_max)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub mu: f64,
    pub stderr: f64,
    pub intercept: f64,
}

/// Ordinary least squares of `ln χ_max` on `ln η`; the slope is `μ`.
///
/// The standard error is `sqrt(SSR / (n − 2) / Sxx)`.
pub fn fit_mu(points: &[(f64, f64)]) -> Result<PowerLawFit> {
    if points.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "exponent fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    if let Some(&(e, c)) = points.iter().find(|(e, c)| !(*e > 0.0 && *c > 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "exponent fit needs positive data, got ({e}, {c})"
        )));
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("all eta values coincide".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let mu = sxy / sxx;
    let intercept = my - mu * mx;
    let ssr: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - mu * x).powi(2))
        .sum();
    let stderr = (ssr / (n - 2.0) / sxx).sqrt();
    Ok(PowerLawFit { mu, stderr, intercept })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub g: f64,
    pub etas: Vec<f64>,
    pub j_max_per_eta: Vec<f64>,
    pub chi_max_per_eta: Vec<f64>,
    pub mu: f64,
    pub mu_stderr: f64,
    /// `2/μ`.
    pub nu: f64,
    /// `(2/μ²)·stderr(μ)`.
    pub nu_stderr: f64,
    pub collapse_score: Option<f64>,
}

/// Fits `μ` over the peaks of curves sharing one `g`, ordered by `η`.
pub fn scaling_report(curves: &[FsCurve]) -> Result<ScalingReport> {
    let first = curves
        .first()
        .ok_or_else(|| Error::InvalidArgument("no curves to analyse".into()))?;
    if curves.iter().any(|c| c.g != first.g) {
        return Err(Error::InvalidArgument("curves mix different g".into()));
    }
    let mut sorted: Vec<&FsCurve> = curves.iter().collect();
    sorted.sort_by(|a, b| a.eta.total_cmp(&b.eta));
    let peaks: Vec<(f64, f64)> = sorted.iter().map(|c| (c.eta, c.chi_max)).collect();
    let fit = fit_mu(&peaks)?;
    Ok(ScalingReport {
        g: first.g,
        etas: sorted.iter().map(|c| c.eta).collect(),
        j_max_per_eta: sorted.iter().map(|c| c.j_max).collect(),
        chi_max_per_eta: sorted.iter().map(|c| c.chi_max).collect(),
        mu: fit.mu,
        mu_stderr: fit.stderr,
        nu: 2.0 / fit.mu,
        nu_stderr: 2.0 / (fit.mu * fit.mu) * fit.stderr,
        collapse_score: None,
    })
}

impl ScalingReport {
    /// `key=value` text form: one summary line, then one line per `η`.
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "g={} mu={:.10} mu_stderr={:.3e} nu={:.10} nu_stderr={:.3e}\n",
            self.g, self.mu, self.mu_stderr, self.nu, self.nu_stderr
        );
        for ((eta, j), chi) in self
            .etas
            .iter()
            .zip(&self.j_max_per_eta)
            .zip(&self.chi_max_per_eta)
        {
            let _ = writeln!(s, "eta={eta} j_max={j:.10} chi_max={chi:.10e}");
        }
        if let Some(score) = self.collapse_score {
            let _ = writeln!(s, "collapse_score={score:.6e}");
        }
        s
    }
}
