use nalgebra::{DMatrix, SymmetricEigen};
use rand_chacha::ChaCha8Rng;

use super::{
    axpy, dot, fix_sign, flag_degeneracies, norm, random_vector, sector_of, seeded_rng,
    EigenResult, LanczosConfig,
};
use crate::error::{Error, Result};
use crate::sparse::SparseHamiltonian;

/// Lowest eigenpair. Equivalent to `lowest_k_lanczos(h, 1, cfg)`.
pub fn ground_state(h: &SparseHamiltonian, cfg: &LanczosConfig) -> Result<EigenResult> {
    let mut pairs = lowest_k_lanczos(h, 1, cfg)?;
    Ok(pairs.swap_remove(0))
}

/// Lowest `k` eigenpairs by thick-restart Lanczos, ascending.
///
/// The start vector is drawn from `cfg.seed` over the full basis. With a
/// parity sector selected it is projected onto that sector and the iteration
/// runs on the sector block, which is exact because `H` never couples
/// opposite parities. Returned vectors always live in the full basis.
pub fn lowest_k_lanczos(
    h: &SparseHamiltonian,
    k: usize,
    cfg: &LanczosConfig,
) -> Result<Vec<EigenResult>> {
    cfg.validate()?;
    let dim = h.dim();
    let mut rng = seeded_rng(cfg.seed);
    let start = random_vector(&mut rng, dim);

    let (op, start, embed) = match cfg.sector {
        None => (None, start, None),
        Some(parity) => {
            let indices = sector_of(dim, parity)?;
            let local: Vec<f64> = indices.iter().map(|&i| start[i]).collect();
            (Some(h.restrict(&indices)), local, Some(indices))
        }
    };
    let op = op.as_ref().unwrap_or(h);
    if k == 0 || k > op.dim() {
        return Err(Error::InvalidArgument(format!(
            "k must lie in 1..={}, got {k}",
            op.dim()
        )));
    }
    if norm(&start) <= f64::EPSILON * (dim as f64).sqrt() {
        return Err(Error::EmptySectorProjection);
    }

    let run = thick_restart(op, start, k, cfg, &mut rng);

    let mut results: Vec<EigenResult> = run
        .pairs
        .into_iter()
        .map(|(value, local, residual)| {
            let mut vector = match &embed {
                None => local,
                Some(indices) => {
                    let mut full = vec![0.0; dim];
                    for (&i, x) in indices.iter().zip(local) {
                        full[i] = x;
                    }
                    full
                }
            };
            fix_sign(&mut vector);
            EigenResult {
                value,
                vector,
                residual,
                iterations: run.iterations,
                near_degenerate: false,
            }
        })
        .collect();
    flag_degeneracies(&mut results);

    if run.converged {
        Ok(results)
    } else {
        Err(Error::NotConverged {
            iterations: run.iterations,
            best: Box::new(results.swap_remove(0)),
        })
    }
}

/// Basis size limit of the unrestarted recurrence used when reorthogonalization is off.
const PLAIN_RECURRENCE_CAP: usize = 2000;

struct Run {
    pairs: Vec<(f64, Vec<f64>, f64)>,
    iterations: usize,
    converged: bool,
}

/// Orthonormal Krylov basis with the Rayleigh quotient matrix `T = Vᵀ H V`.
struct Basis {
    vectors: Vec<Vec<f64>>,
    t: DMatrix<f64>,
}

impl Basis {
    fn ritz(&self, size: usize) -> (Vec<f64>, DMatrix<f64>) {
        let block = self.t.view((0, 0), (size, size)).into_owned();
        let eig = SymmetricEigen::new(block);
        let mut order: Vec<usize> = (0..size).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = DMatrix::from_fn(size, size, |r, c| eig.eigenvectors[(r, order[c])]);
        (values, vectors)
    }

    fn combine(&self, coeffs: impl Iterator<Item = f64>) -> Vec<f64> {
        let mut y = vec![0.0; self.vectors[0].len()];
        for (c, v) in coeffs.zip(&self.vectors) {
            axpy(c, v, &mut y);
        }
        y
    }

    /// Removes the components of `w` along `vectors[lo..=hi]`, returning the coefficients.
    fn project_out(&self, w: &mut [f64], lo: usize, hi: usize) -> Vec<f64> {
        let coeffs: Vec<f64> = (lo..=hi).map(|i| dot(&self.vectors[i], w)).collect();
        for (c, i) in coeffs.iter().zip(lo..=hi) {
            axpy(-c, &self.vectors[i], w);
        }
        coeffs
    }
}

fn thick_restart(
    h: &SparseHamiltonian,
    start: Vec<f64>,
    nev: usize,
    cfg: &LanczosConfig,
    rng: &mut ChaCha8Rng,
) -> Run {
    let n = h.dim();
    let m = if cfg.reorth {
        cfg.krylov_dim.max(2 * nev + 8).min(n)
    } else {
        cfg.max_iter.min(PLAIN_RECURRENCE_CAP)
    };
    let keep = ((m + nev) / 2).max(nev).min(m.saturating_sub(1)).max(1);
    let scale = h.norm1().max(f64::MIN_POSITIVE);
    let breakdown = 1e-12 * scale;
    let converged_at = |value: f64, res: f64| res <= cfg.tol * value.abs().max(1.0);

    let s0 = norm(&start);
    let mut basis = Basis {
        vectors: vec![start.into_iter().map(|x| x / s0).collect()],
        t: DMatrix::zeros(m, m),
    };
    let mut w = vec![0.0; n];
    let mut j = 0usize;
    let mut kept = 0usize;
    let mut iterations = 0usize;
    let mut invariant = false;

    loop {
        // extend the basis up to m columns
        while j < m && iterations < cfg.max_iter {
            h.matvec(&basis.vectors[j], &mut w);
            iterations += 1;

            let lo = if cfg.reorth || j <= kept { 0 } else { j - 1 };
            let mut coeffs = basis.project_out(&mut w, lo, j);
            if cfg.reorth {
                let again = basis.project_out(&mut w, lo, j);
                coeffs.iter_mut().zip(again).for_each(|(c, d)| *c += d);
            }
            for (c, i) in coeffs.into_iter().zip(lo..=j) {
                basis.t[(i, j)] = c;
                basis.t[(j, i)] = c;
            }

            let beta = norm(&w);
            j += 1;
            let exhausted = cfg.reorth && j >= n;
            if beta <= breakdown || exhausted {
                if exhausted || j >= nev {
                    invariant = true;
                    break;
                }
                // Krylov space exhausted before nev vectors: continue with a fresh direction.
                let mut fresh = random_vector(rng, n);
                basis.project_out(&mut fresh, 0, j - 1);
                basis.project_out(&mut fresh, 0, j - 1);
                let f = norm(&fresh);
                basis.vectors.push(fresh.into_iter().map(|x| x / f).collect());
                continue;
            }
            basis.vectors.push(w.iter().map(|x| x / beta).collect());

            let due = j == m || (j >= nev && (j - kept) % 4 == 0);
            if due && j >= nev {
                let (values, s) = basis.ritz(j);
                let estimates_ok = (0..nev).all(|i| converged_at(values[i], (beta * s[(j - 1, i)]).abs()));
                if estimates_ok {
                    if let Some(pairs) = verified_pairs(h, &basis, j, nev, &values, &s, converged_at) {
                        return Run { pairs, iterations, converged: true };
                    }
                }
            }
        }

        if invariant || iterations >= cfg.max_iter || !cfg.reorth {
            let (values, s) = basis.ritz(j);
            let pairs = ritz_pairs(h, &basis, j, nev.min(j), &values, &s);
            let converged = pairs.len() == nev
                && pairs.iter().all(|(v, _, r)| converged_at(*v, *r));
            return Run { pairs, iterations, converged };
        }

        // thick restart: keep the lowest Ritz vectors and the current residual direction
        let (values, s) = basis.ritz(m);
        let residual_dir = basis.vectors.pop().expect("basis holds m + 1 vectors");
        let mut kept_vectors: Vec<Vec<f64>> = (0..keep)
            .map(|i| basis.combine((0..m).map(|r| s[(r, i)])))
            .collect();
        kept_vectors.push(residual_dir);
        basis.vectors = kept_vectors;
        basis.t.fill(0.0);
        for (i, &v) in values.iter().take(keep).enumerate() {
            basis.t[(i, i)] = v;
        }
        kept = keep;
        j = keep;
    }
}

fn ritz_pairs(
    h: &SparseHamiltonian,
    basis: &Basis,
    size: usize,
    count: usize,
    values: &[f64],
    s: &DMatrix<f64>,
) -> Vec<(f64, Vec<f64>, f64)> {
    (0..count)
        .map(|i| {
            let mut y = basis.combine((0..size).map(|r| s[(r, i)]));
            let ny = norm(&y);
            y.iter_mut().for_each(|x| *x /= ny);
            let mut hy = vec![0.0; y.len()];
            h.matvec(&y, &mut hy);
            let value = values[i];
            axpy(-value, &y, &mut hy);
            (value, y, norm(&hy))
        })
        .collect()
}

fn verified_pairs(
    h: &SparseHamiltonian,
    basis: &Basis,
    size: usize,
    nev: usize,
    values: &[f64],
    s: &DMatrix<f64>,
    ok: impl Fn(f64, f64) -> bool,
) -> Option<Vec<(f64, Vec<f64>, f64)>> {
    let pairs = ritz_pairs(h, basis, size, nev, values, s);
    pairs.iter().all(|(v, _, r)| ok(*v, *r)).then_some(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigensolve::{lowest_k_dense, Parity};
    use crate::model::{build_hamiltonian, parity_operator, ModelParams};

    fn toy(entries: &[(usize, usize, f64)], dim: usize) -> SparseHamiltonian {
        SparseHamiltonian::from_triplets(dim, entries).unwrap()
    }

    #[test]
    fn two_by_two_flip() {
        let h = toy(&[(0, 1, 1.0), (1, 0, 1.0)], 2);
        let r = ground_state(&h, &LanczosConfig::unrestricted()).unwrap();
        assert!((r.value + 1.0).abs() < 1e-14);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((r.vector[0].abs() - s).abs() < 1e-12);
        assert!((r.vector[0] + r.vector[1]).abs() < 1e-12);
    }

    #[test]
    fn sector_on_non_dimer_basis_is_rejected() {
        let h = toy(&[(0, 0, 1.0), (1, 1, 2.0), (2, 2, 3.0)], 3);
        assert!(ground_state(&h, &LanczosConfig::default()).is_err());
    }

    #[test]
    fn matches_dense_small_dimer() {
        let p = ModelParams::new(0.7, 50.0, 0.2, 4).unwrap();
        let h = build_hamiltonian(&p).unwrap();
        let dense = lowest_k_dense(&h, 1).unwrap()[0].value;
        let lz = ground_state(&h, &LanczosConfig::unrestricted()).unwrap();
        assert!((lz.value - dense).abs() < 1e-10);
        assert!(lz.residual <= 1e-10 * lz.value.abs());
        assert!((norm(&lz.vector) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lowest_six_against_dense() {
        let p = ModelParams::new(0.8, 50.0, 0.1, 4).unwrap();
        let h = build_hamiltonian(&p).unwrap();
        let dense = lowest_k_dense(&h, 6).unwrap();
        let lz = lowest_k_lanczos(&h, 6, &LanczosConfig::unrestricted()).unwrap();
        for (a, b) in lz.iter().zip(&dense) {
            assert!((a.value - b.value).abs() < 1e-9, "{} vs {}", a.value, b.value);
        }
        for a in 0..6 {
            for b in 0..a {
                assert!(dot(&lz[a].vector, &lz[b].vector).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn k_one_is_ground_state() {
        let p = ModelParams::new(0.5, 20.0, 0.3, 5).unwrap();
        let h = build_hamiltonian(&p).unwrap();
        let cfg = LanczosConfig::default();
        let a = ground_state(&h, &cfg).unwrap();
        let b = lowest_k_lanczos(&h, 1, &cfg).unwrap();
        assert_eq!(a, b[0]);
    }

    #[test]
    fn degenerate_copies_recovered_with_full_krylov() {
        // g = 0: the single-excitation atom states ↑↓ and ↓↑ are degenerate
        let p = ModelParams::new(0.0, 3.0, 0.2, 2).unwrap();
        let h = build_hamiltonian(&p).unwrap();
        let dense: Vec<f64> = lowest_k_dense(&h, 16).unwrap().iter().map(|e| e.value).collect();
        let lz = lowest_k_lanczos(&h, 16, &LanczosConfig::unrestricted()).unwrap();
        for (a, b) in lz.iter().zip(&dense) {
            assert!((a.value - b).abs() < 1e-10, "{} vs {b}", a.value);
        }
        assert!(lz.iter().any(|e| e.near_degenerate));
    }

    #[test]
    fn sector_restriction_keeps_parity() {
        let p = ModelParams::new(0.9, 10.0, 0.3, 6).unwrap();
        let h = build_hamiltonian(&p).unwrap();
        let pi = parity_operator(&p);
        for (parity, sign) in [(Parity::Even, 1), (Parity::Odd, -1)] {
            let cfg = LanczosConfig { sector: Some(parity), ..LanczosConfig::default() };
            let r = ground_state(&h, &cfg).unwrap();
            let leak: f64 = r
                .vector
                .iter()
                .zip(&pi)
                .filter(|(_, &s)| s != sign)
                .map(|(x, _)| x * x)
                .sum();
            assert_eq!(leak, 0.0);
        }
    }

    #[test]
    fn not_converged_reports_best_iterate() {
        let p = ModelParams::new(0.7, 100.0, 0.2, 12).unwrap();
        let h = build_hamiltonian(&p).unwrap();
        let cfg = LanczosConfig { max_iter: 3, ..LanczosConfig::default() };
        match ground_state(&h, &cfg) {
            Err(Error::NotConverged { iterations, best }) => {
                assert_eq!(iterations, 3);
                assert!(best.residual > 0.0);
                assert!((norm(&best.vector) - 1.0).abs() < 1e-12);
            }
            other => panic!("expected NotConverged, got {other:?}"),
        }
    }

    #[test]
    fn ritz_value_monotone_in_iterations() {
        let p = ModelParams::new(0.8, 30.0, 0.15, 8).unwrap();
        let h = build_hamiltonian(&p).unwrap();
        let mut last = f64::INFINITY;
        for max_iter in [2, 5, 10, 20, 40, 80, 160, 320] {
            let cfg = LanczosConfig { max_iter, krylov_dim: 24, ..LanczosConfig::default() };
            let value = match ground_state(&h, &cfg) {
                Ok(r) => r.value,
                Err(Error::NotConverged { best, .. }) => best.value,
                Err(e) => panic!("{e}"),
            };
            assert!(value <= last + 1e-12, "{value} > {last} at {max_iter}");
            last = value;
        }
    }

    #[test]
    fn seed_determinism() {
        let p = ModelParams::new(0.7, 40.0, 0.2, 10).unwrap();
        let h = build_hamiltonian(&p).unwrap();
        let cfg = LanczosConfig { seed: 42, ..LanczosConfig::default() };
        assert_eq!(ground_state(&h, &cfg).unwrap(), ground_state(&h, &cfg).unwrap());
    }

    #[test]
    fn without_reorthogonalization_still_finds_ground_value() {
        let p = ModelParams::new(0.6, 20.0, 0.2, 6).unwrap();
        let h = build_hamiltonian(&p).unwrap();
        let dense = lowest_k_dense(&h, 1).unwrap()[0].value;
        let cfg = LanczosConfig { reorth: false, sector: None, ..LanczosConfig::default() };
        let r = ground_state(&h, &cfg).unwrap();
        assert!((r.value - dense).abs() < 1e-8);
    }
}
