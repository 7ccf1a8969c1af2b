//! Dense linear-algebra kernels: matrix exponentials, exponential integrals,
//! eigen-decompositions, numerical kernels and least-squares solves.

pub mod eigen;
pub mod expm;
pub mod linalg;

pub use eigen::{eig, eigenvalues, real_left_eigenspaces, EigenDecomposition, RealLeftEigenspace};
pub use expm::{expm, expm_integral, expm_scaled, ScaledExp};
pub use linalg::{
    canonical_basis, condition_number, kernel_basis, matrix_kernel, range_basis, rank,
    solve_linear, stack_rows, subspace_distance, LinearSolve,
};

use crate::error::{Error, Result};

pub type Matrix = nalgebra::DMatrix<f64>;
pub type Vector = nalgebra::DVector<f64>;

/// Default relative tolerance for rank and residual decisions.
pub const DEFAULT_TOL: f64 = 1e-10;

pub(crate) fn ensure_square(m: &Matrix, what: &str) -> Result<()> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::Dimension(format!(
            "{what}: expected a non-empty square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

pub(crate) fn ensure_finite(m: &Matrix, what: &'static str) -> Result<()> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

/// Builds a matrix from nested rows, rejecting ragged or non-finite input.
pub fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<Matrix> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if r == 0 || c == 0 {
        return Err(Error::Dimension("matrix needs at least one row and column".into()));
    }
    if rows.iter().any(|row| row.len() != c) {
        return Err(Error::Dimension("ragged matrix rows".into()));
    }
    let m = Matrix::from_fn(r, c, |i, j| rows[i][j]);
    ensure_finite(&m, "matrix")?;
    Ok(m)
}
