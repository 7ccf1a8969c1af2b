use nalgebra::SVD;

use super::{ensure_finite, Matrix, Vector};
use crate::error::{Error, Result};

const SVD_MAX_ITER: usize = 10_000;

fn svd(m: Matrix) -> Result<SVD<f64, nalgebra::Dyn, nalgebra::Dyn>> {
    SVD::try_new(m, true, true, f64::EPSILON, SVD_MAX_ITER).ok_or(Error::Convergence {
        what: "singular value decomposition",
        residual: f64::NAN,
    })
}

/// Stacks row vectors into a matrix.
pub fn stack_rows(rows: &[Vector]) -> Result<Matrix> {
    let Some(first) = rows.first() else {
        return Err(Error::Argument("no rows to stack".into()));
    };
    let m = first.len();
    if rows.iter().any(|r| r.len() != m) {
        return Err(Error::Dimension("rows of unequal length".into()));
    }
    Ok(Matrix::from_fn(rows.len(), m, |i, j| rows[i][j]))
}

/// Orthonormal basis of the joint null space of `rows`, by singular-value
/// thresholding at `tol · σ_max`. With no rows the kernel is all of `ℝ^dim`,
/// which requires `dim`.
pub fn kernel_basis(rows: &[Vector], tol: f64, dim: Option<usize>) -> Result<Vec<Vector>> {
    if tol <= 0.0 {
        return Err(Error::Argument("kernel tolerance must be positive".into()));
    }
    if rows.is_empty() {
        return match dim {
            Some(m) => Ok(canonical_basis(m)),
            None => Err(Error::Argument(
                "kernel of an empty row set needs the ambient dimension".into(),
            )),
        };
    }
    let a = stack_rows(rows)?;
    if let Some(m) = dim {
        if m != a.ncols() {
            return Err(Error::Dimension(format!(
                "rows have length {}, expected {m}",
                a.ncols()
            )));
        }
    }
    matrix_kernel(&a, tol)
}

/// Right null space of `a` (orthonormal columns returned as vectors).
pub fn matrix_kernel(a: &Matrix, tol: f64) -> Result<Vec<Vector>> {
    ensure_finite(a, "kernel input")?;
    let (k, m) = a.shape();
    // Pad to at least m rows so that V is square and carries the whole kernel.
    let padded = if k < m {
        let mut p = Matrix::zeros(m, m);
        p.view_mut((0, 0), (k, m)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let dec = svd(padded)?;
    let sv = &dec.singular_values;
    let v_t = dec.v_t.as_ref().expect("V computed");
    let smax = sv.max();
    if smax == 0.0 {
        return Ok(canonical_basis(m));
    }
    let cut = tol * smax;
    Ok((0..sv.len())
        .filter(|&i| sv[i] <= cut)
        .map(|i| v_t.row(i).transpose())
        .collect())
}

/// Orthonormal basis of the column space of `a`, rank by the same threshold rule.
pub fn range_basis(a: &Matrix, tol: f64) -> Result<Vec<Vector>> {
    ensure_finite(a, "range input")?;
    if a.ncols() == 0 {
        return Ok(Vec::new());
    }
    let dec = svd(a.clone())?;
    let sv = &dec.singular_values;
    let u = dec.u.as_ref().expect("U computed");
    let smax = sv.max();
    if smax == 0.0 {
        return Ok(Vec::new());
    }
    Ok((0..sv.len())
        .filter(|&i| sv[i] > tol * smax)
        .map(|i| u.column(i).into_owned())
        .collect())
}

/// Numerical rank with the relative threshold `tol · σ_max`.
pub fn rank(a: &Matrix, tol: f64) -> Result<usize> {
    ensure_finite(a, "rank input")?;
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(0);
    }
    let sv = svd(a.clone())?.singular_values;
    let smax = sv.max();
    if smax == 0.0 {
        return Ok(0);
    }
    Ok(sv.iter().filter(|&&s| s > tol * smax).count())
}

/// 2-norm condition number `σ_max / σ_min` (infinite when singular).
pub fn condition_number(a: &Matrix) -> Result<f64> {
    ensure_finite(a, "condition number input")?;
    let sv = svd(a.clone())?.singular_values;
    let smin = sv.min();
    if smin == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(sv.max() / smin)
}

pub fn canonical_basis(m: usize) -> Vec<Vector> {
    (0..m)
        .map(|i| {
            let mut e = Vector::zeros(m);
            e[i] = 1.0;
            e
        })
        .collect()
}

/// Outcome of a least-squares solve.
#[derive(Debug, Clone, PartialEq)]
pub enum LinearSolve {
    Solution { x: Vector, residual: f64 },
    NoSolution { residual: f64 },
}

impl LinearSolve {
    pub fn solution(&self) -> Option<&Vector> {
        match self {
            LinearSolve::Solution { x, .. } => Some(x),
            LinearSolve::NoSolution { .. } => None,
        }
    }

    pub fn residual(&self) -> f64 {
        match self {
            LinearSolve::Solution { residual, .. } | LinearSolve::NoSolution { residual } => {
                *residual
            }
        }
    }
}

/// Minimum-norm least-squares solution of `A x = y`. Declared inconsistent when
/// the residual exceeds `tol · ‖y‖`.
pub fn solve_linear(a: &Matrix, y: &Vector, tol: f64) -> Result<LinearSolve> {
    if a.nrows() != y.len() {
        return Err(Error::Dimension(format!(
            "solve_linear: {} rows but right-hand side of length {}",
            a.nrows(),
            y.len()
        )));
    }
    if a.nrows() == 0 || a.ncols() == 0 {
        return Err(Error::Dimension("solve_linear: empty system".into()));
    }
    ensure_finite(a, "solve_linear matrix")?;
    let dec = svd(a.clone())?;
    let smax = dec.singular_values.max();
    let x = dec
        .solve(y, tol * smax)
        .map_err(|e| Error::Argument(e.to_string()))?;
    let x: Vector = x.column(0).into_owned();
    let residual = (a * &x - y).norm();
    if residual > tol * y.norm() {
        Ok(LinearSolve::NoSolution { residual })
    } else {
        Ok(LinearSolve::Solution { x, residual })
    }
}

/// Orthonormal basis of the orthogonal complement of span(`basis`) in `ℝ^m`.
pub fn orthogonal_complement(basis: &[Vector], m: usize, tol: f64) -> Result<Vec<Vector>> {
    if basis.is_empty() {
        return Ok(canonical_basis(m));
    }
    kernel_basis(basis, tol, Some(m))
}

/// Largest principal-angle sine between two subspaces given by orthonormal bases
/// (1 when dimensions differ).
pub fn subspace_distance(a: &[Vector], b: &[Vector], m: usize) -> f64 {
    if a.len() != b.len() {
        return 1.0;
    }
    if a.is_empty() {
        return 0.0;
    }
    let proj = |basis: &[Vector]| {
        let mut p = Matrix::zeros(m, m);
        for v in basis {
            p += v * v.transpose();
        }
        p
    };
    let diff = proj(a) - proj(b);
    // spectral norm of the projector difference
    diff.singular_values().max()
}
