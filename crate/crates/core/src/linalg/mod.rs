//! Small dense linear algebra: Perron data of nonnegative matrices and
//! singular values of small square matrices.

mod perron;
mod svd;

pub use perron::{perron_pair, spectral_radius, PerronData};
pub use svd::{singular_values, SingularValueProfile};

use nalgebra::DMatrix;

use crate::error::{invalid, Result};

/// Builds a dense matrix from row vectors, rejecting ragged input.
pub fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let nrows = rows.len();
    if nrows == 0 {
        return invalid("matrix has no rows");
    }
    let ncols = rows[0].len();
    if rows.iter().any(|r| r.len() != ncols) {
        return invalid("matrix rows have different lengths");
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return invalid("matrix has non-finite entries");
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

/// True when every off-diagonal entry is exactly zero.
pub fn is_diagonal(m: &DMatrix<f64>) -> bool {
    m.is_square()
        && (0..m.nrows()).all(|i| (0..m.ncols()).all(|j| i == j || m[(i, j)] == 0.0))
}
