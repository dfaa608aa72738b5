use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::critical_hopping;
use crate::eigensolve::LanczosConfig;
use crate::error::{Error, Result};
use crate::fidelity::{fidelity_susceptibility, FsPoint};
use crate::model::ModelParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakSearch {
    /// Points of the coarse uniform scan.
    pub grid_points: usize,
    /// Width of the final bracket around the maximum.
    pub xtol: f64,
    /// How many times a window whose maximum sits on the edge may be extended.
    pub max_widen: u32,
}

impl Default for PeakSearch {
    fn default() -> Self {
        Self {
            grid_points: 41,
            xtol: 1e-6,
            max_widen: 3,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PeakFlags {
    /// Number of times the window was extended.
    pub widened: u32,
    /// Interior local maxima of the coarse scan when there was more than one.
    pub local_maxima: Vec<f64>,
}

impl PeakFlags {
    pub fn non_unimodal(&self) -> bool {
        self.local_maxima.len() > 1
    }
}

/// Outcome of a peak search over an arbitrary `J ↦ FsPoint` map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakScan {
    /// Every evaluated point, strictly increasing in `j`.
    pub points: Vec<FsPoint>,
    pub j_max: f64,
    pub chi_max: f64,
    pub window: (f64, f64),
    pub flags: PeakFlags,
}

/// Sampled `χ_F(J)` at one `(g, η)` with its refined maximum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FsCurve {
    pub g: f64,
    pub eta: f64,
    pub n_cut: usize,
    pub delta_j: f64,
    pub points: Vec<FsPoint>,
    pub j_max: f64,
    pub chi_max: f64,
    pub flags: PeakFlags,
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.5 * (lo + hi)];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Maximizes `f` on `[a, b]` with Brent's parabolic interpolation, falling back
/// to golden-section steps, until the bracket is narrower than `xtol`.
///
/// Returns the best point together with every evaluation made.
pub fn refine_peak<F>(f: F, a: f64, b: f64, xtol: f64) -> Result<(FsPoint, Vec<FsPoint>)>
where
    F: Fn(f64) -> Result<FsPoint>,
{
    const GOLDEN: f64 = 0.381_966_011_250_105_1;
    if !(a < b) || !(xtol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "refinement needs a < b and xtol > 0 (got [{a}, {b}], {xtol})"
        )));
    }
    let mut trail = Vec::new();
    let mut eval = |x: f64| -> Result<f64> {
        let p = f(x)?;
        trail.push(p);
        Ok(-p.chi_f)
    };

    let (mut a, mut b) = (a, b);
    let mut x = a + GOLDEN * (b - a);
    let (mut w, mut v) = (x, x);
    let mut fx = eval(x)?;
    let (mut fw, mut fv) = (fx, fx);
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;
    let tol1 = 0.25 * xtol;
    let tol2 = 2.0 * tol1;

    loop {
        let xm = 0.5 * (a + b);
        if (x - xm).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let e_prev = e;
            if p.abs() < (0.5 * q * e_prev).abs() && p > q * (a - x) && p < q * (b - x) {
                e = d;
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = tol1.copysign(xm - x);
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= xm { a - x } else { b - x };
            d = GOLDEN * e;
        }
        let u = if d.abs() >= tol1 { x + d } else { x + tol1.copysign(d) };
        let fu = eval(u)?;
        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            (v, fv) = (w, fw);
            (w, fw) = (x, fx);
            (x, fx) = (u, fu);
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                (v, fv) = (w, fw);
                (w, fw) = (u, fu);
            } else if fu <= fv || v == x || v == w {
                (v, fv) = (u, fu);
            }
        }
    }
    let best = *trail
        .iter()
        .find(|p| p.j == x)
        .expect("x is always an evaluated point");
    Ok((best, trail))
}

fn merge_points(mut points: Vec<FsPoint>) -> Vec<FsPoint> {
    points.sort_by(|p, q| p.j.total_cmp(&q.j));
    points.dedup_by(|p, q| p.j == q.j);
    points
}

/// Coarse scan of `window` followed by Brent refinement around the largest sample.
///
/// A maximum on the window edge extends the window on that side (by half its
/// width, never below `J = 0`) up to `search.max_widen` times before failing
/// with [`Error::PeakAtEdge`]. Grid points are evaluated in parallel.
pub fn scan_peak<F>(f: F, window: (f64, f64), search: &PeakSearch) -> Result<PeakScan>
where
    F: Fn(f64) -> Result<FsPoint> + Sync,
{
    let (mut lo, mut hi) = window;
    if !(lo < hi) || lo < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "peak window must satisfy 0 <= lo < hi, got [{lo}, {hi}]"
        )));
    }
    if search.grid_points < 3 {
        return Err(Error::InvalidArgument("peak search needs >= 3 grid points".into()));
    }
    let mut flags = PeakFlags::default();
    loop {
        let grid = linspace(lo, hi, search.grid_points);
        let coarse: Vec<FsPoint> = grid.par_iter().map(|&j| f(j)).collect::<Result<_>>()?;
        let chi: Vec<f64> = coarse.iter().map(|p| p.chi_f).collect();
        let best = (0..chi.len())
            .fold(0, |b, i| if chi[i] > chi[b] { i } else { b });

        let maxima: Vec<f64> = (1..chi.len() - 1)
            .filter(|&i| chi[i] > chi[i - 1] && chi[i] >= chi[i + 1])
            .map(|i| grid[i])
            .collect();
        flags.local_maxima = if maxima.len() > 1 { maxima } else { Vec::new() };
        if flags.non_unimodal() {
            log::warn!(
                "susceptibility scan on [{lo}, {hi}] has {} local maxima; refining the global one",
                flags.local_maxima.len()
            );
        }

        let at_left = best == 0;
        let at_right = best == chi.len() - 1;
        if at_left || at_right {
            let stuck = at_left && lo == 0.0;
            if flags.widened >= search.max_widen || stuck {
                return Err(Error::PeakAtEdge { j: grid[best], lo, hi });
            }
            let width = hi - lo;
            if at_left {
                lo = (lo - 0.5 * width).max(0.0);
            } else {
                hi += 0.5 * width;
            }
            flags.widened += 1;
            log::warn!("susceptibility peak on the window edge; widening to [{lo}, {hi}]");
            continue;
        }

        let (peak, trail) = refine_peak(&f, grid[best - 1], grid[best + 1], search.xtol)?;
        let (peak, mut points) = if peak.chi_f >= coarse[best].chi_f {
            (peak, coarse)
        } else {
            (coarse[best], coarse)
        };
        points.extend(trail);
        return Ok(PeakScan {
            points: merge_points(points),
            j_max: peak.j,
            chi_max: peak.chi_f,
            window: (lo, hi),
            flags,
        });
    }
}

/// Locates the susceptibility peak of the Rabi dimer at fixed `(g, η)`.
///
/// `window` defaults to `[0.6 J_c, 1.4 J_c]` around the mean-field boundary.
pub fn locate_peak(
    g: f64,
    eta: f64,
    n_cut: usize,
    delta_j: f64,
    window: Option<(f64, f64)>,
    search: &PeakSearch,
    cfg: &LanczosConfig,
) -> Result<FsCurve> {
    let base = ModelParams::new(g, eta, 0.0, n_cut)?;
    let jc = critical_hopping(g);
    let window = window.unwrap_or((0.6 * jc, 1.4 * jc));
    let scan = scan_peak(
        |j| fidelity_susceptibility(&base.with_j(j), delta_j, cfg),
        window,
        search,
    )?;
    Ok(FsCurve {
        g,
        eta,
        n_cut,
        delta_j,
        points: scan.points,
        j_max: scan.j_max,
        chi_max: scan.chi_max,
        flags: scan.flags,
    })
}
