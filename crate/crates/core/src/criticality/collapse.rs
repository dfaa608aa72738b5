use super::FsCurve;
use crate::error::{Error, Result};

const COLLAPSE_GRID: usize = 201;

/// Rescaled curve `(η^{1/ν}(J − J_max), (χ_max − χ_F)/χ_F)`, increasing in the first coordinate.
///
/// Points with non-positive `χ_F` (round-off far from the peak) are dropped.
pub fn rescale(curve: &FsCurve, nu: f64) -> Vec<(f64, f64)> {
    let stretch = curve.eta.powf(1.0 / nu);
    curve
        .points
        .iter()
        .filter(|p| p.chi_f > 0.0)
        .map(|p| {
            (
                stretch * (p.j - curve.j_max),
                (curve.chi_max - p.chi_f) / p.chi_f,
            )
        })
        .collect()
}

fn interpolate(curve: &[(f64, f64)], u: f64) -> f64 {
    let k = curve.partition_point(|p| p.0 < u);
    if k == 0 {
        return curve[0].1;
    }
    if k == curve.len() {
        return curve[k - 1].1;
    }
    let (u0, y0) = curve[k - 1];
    let (u1, y1) = curve[k];
    y0 + (y1 - y0) * (u - u0) / (u1 - u0)
}

/// RMS over a common grid of the cross-curve standard deviation of the rescaled curves.
///
/// Zero means perfect collapse. Curves are linearly interpolated on a uniform
/// grid spanning the range of the scaling variable shared by all of them.
pub fn collapse_score(curves: &[FsCurve], nu: f64) -> Result<f64> {
    if curves.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "collapse needs at least 2 curves, got {}",
            curves.len()
        )));
    }
    if !(nu > 0.0) {
        return Err(Error::InvalidArgument(format!("nu must be > 0, got {nu}")));
    }
    let rescaled: Vec<Vec<(f64, f64)>> = curves.iter().map(|c| rescale(c, nu)).collect();
    if rescaled.iter().any(|r| r.len() < 2) {
        return Err(Error::EmptyOverlap);
    }
    let lo = rescaled.iter().map(|r| r[0].0).fold(f64::NEG_INFINITY, f64::max);
    let hi = rescaled.iter().map(|r| r[r.len() - 1].0).fold(f64::INFINITY, f64::min);
    if !(lo < hi) {
        return Err(Error::EmptyOverlap);
    }

    let m = rescaled.len() as f64;
    let mut sum_var = 0.0;
    for k in 0..COLLAPSE_GRID {
        let u = lo + (hi - lo) * k as f64 / (COLLAPSE_GRID - 1) as f64;
        let ys: Vec<f64> = rescaled.iter().map(|r| interpolate(r, u)).collect();
        let mean = ys.iter().sum::<f64>() / m;
        sum_var += ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / m;
    }
    Ok((sum_var / COLLAPSE_GRID as f64).sqrt())
}

/// Scores every trial `ν` and returns `(best ν, all (ν, score) pairs)`.
pub fn scan_nu(curves: &[FsCurve], nus: &[f64]) -> Result<(f64, Vec<(f64, f64)>)> {
    let scores: Vec<(f64, f64)> = nus
        .iter()
        .map(|&nu| collapse_score(curves, nu).map(|s| (nu, s)))
        .collect::<Result<_>>()?;
    let best = scores
        .iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|p| p.0)
        .ok_or_else(|| Error::InvalidArgument("no trial exponents given".into()))?;
    Ok((best, scores))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criticality::PeakFlags;
    use crate::fidelity::FsPoint;

    fn synthetic_curve(eta: f64, samples: usize) -> FsCurve {
        let chi = |j: f64| eta.powf(4.0 / 3.0) / (1.0 + (eta.powf(2.0 / 3.0) * (j - 0.3)).powi(2));
        let points = (0..samples)
            .map(|i| {
                let j = 0.25 + 0.1 * i as f64 / (samples - 1) as f64;
                FsPoint { j, chi_f: chi(j), delta_j: 1e-5, fidelity: 1.0, infidelity: 0.0 }
            })
            .collect();
        FsCurve {
            g: 0.7,
            eta,
            n_cut: 80,
            delta_j: 1e-5,
            points,
            j_max: 0.3,
            chi_max: eta.powf(4.0 / 3.0),
            flags: PeakFlags::default(),
        }
    }

    #[test]
    fn duplicate_curve_scores_zero() {
        let c = synthetic_curve(1200.0, 51);
        assert_eq!(collapse_score(&[c.clone(), c], 1.5).unwrap(), 0.0);
    }

    #[test]
    fn synthetic_family_prefers_three_halves() {
        let curves: Vec<FsCurve> = [1100.0, 1200.0, 1300.0, 1400.0, 1500.0]
            .iter()
            .map(|&e| synthetic_curve(e, 4001))
            .collect();
        let at = |nu| collapse_score(&curves, nu).unwrap();
        let best = at(1.5);
        assert!(best < 1e-6, "{best}");
        assert!(at(1.0) > best && at(2.0) > best);
        let nus: Vec<f64> = (0..=20).map(|k| 1.0 + 0.05 * k as f64).collect();
        let (argmin, _) = scan_nu(&curves, &nus).unwrap();
        assert!((argmin - 1.5).abs() < 1e-12);
    }

    #[test]
    fn disjoint_ranges_fail() {
        let a = synthetic_curve(1100.0, 11);
        let mut b = synthetic_curve(1200.0, 11);
        for p in &mut b.points {
            p.j += 10.0;
        }
        assert!(matches!(collapse_score(&[a.clone(), b], 1.5), Err(Error::EmptyOverlap)));
        assert!(collapse_score(&[a], 1.5).is_err());
    }
}
