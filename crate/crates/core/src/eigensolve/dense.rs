use nalgebra::SymmetricEigen;

use super::{fix_sign, flag_degeneracies, EigenResult};
use crate::error::{Error, Result};
use crate::sparse::SparseHamiltonian;

/// Largest dimension accepted by [`lowest_k_dense`].
pub const DENSE_DIM_LIMIT: usize = 4096;

/// Lowest `k` eigenpairs by full dense diagonalization, ascending.
pub fn lowest_k_dense(h: &SparseHamiltonian, k: usize) -> Result<Vec<EigenResult>> {
    let dim = h.dim();
    if dim > DENSE_DIM_LIMIT {
        return Err(Error::DenseTooLarge {
            dim,
            limit: DENSE_DIM_LIMIT,
        });
    }
    if k == 0 || k > dim {
        return Err(Error::InvalidArgument(format!(
            "k must lie in 1..={dim}, got {k}"
        )));
    }
    let eig = SymmetricEigen::new(h.to_dense());
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let mut out: Vec<EigenResult> = order
        .into_iter()
        .take(k)
        .map(|i| {
            let value = eig.eigenvalues[i];
            let mut vector: Vec<f64> = eig.eigenvectors.column(i).iter().copied().collect();
            fix_sign(&mut vector);
            let hv = h.apply(&vector).expect("dimension checked");
            let residual = hv
                .iter()
                .zip(&vector)
                .map(|(a, b)| (a - value * b).powi(2))
                .sum::<f64>()
                .sqrt();
            EigenResult {
                value,
                vector,
                residual,
                iterations: 0,
                near_degenerate: false,
            }
        })
        .collect();
    flag_degeneracies(&mut out);
    Ok(out)
}
