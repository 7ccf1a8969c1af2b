use nalgebra::Schur;
use num_complex::Complex64;

use super::linalg::matrix_kernel;
use super::{ensure_finite, ensure_square, Matrix, Vector};
use crate::error::{Error, Result};

type CMatrix = nalgebra::DMatrix<Complex64>;
pub type CVector = nalgebra::DVector<Complex64>;

// Eigenvalues closer than this (relative) are treated as one cluster when
// comparing algebraic and geometric multiplicity.
const CLUSTER_TOL: f64 = 1e-6;

/// Eigenvalues with aligned left and right eigenvectors. For a defective cluster
/// the members beyond the geometric multiplicity repeat the last eigenvector.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<Complex64>,
    pub left_eigenvectors: Vec<CVector>,
    pub right_eigenvectors: Vec<CVector>,
    pub defective: bool,
}

impl EigenDecomposition {
    pub fn max_real_part(&self) -> f64 {
        self.eigenvalues
            .iter()
            .map(|l| l.re)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Indices of eigenvalues with `|Im λ| ≤ tol·(1+|λ|)`.
    pub fn real_indices(&self, tol: f64) -> Vec<usize> {
        (0..self.eigenvalues.len())
            .filter(|&i| is_real(self.eigenvalues[i], tol))
            .collect()
    }
}

pub fn is_real(l: Complex64, tol: f64) -> bool {
    l.im.abs() <= tol * (1.0 + l.norm())
}

fn descending(a: &Complex64, b: &Complex64) -> std::cmp::Ordering {
    b.re.partial_cmp(&a.re)
        .unwrap_or(std::cmp::Ordering::Equal)
        .then(b.im.partial_cmp(&a.im).unwrap_or(std::cmp::Ordering::Equal))
}

/// Eigenvalues only, sorted by descending real part then imaginary part.
pub fn eigenvalues(m: &Matrix) -> Result<Vec<Complex64>> {
    ensure_square(m, "eig")?;
    ensure_finite(m, "eig input")?;
    let schur = Schur::try_new(m.clone(), f64::EPSILON, 10_000).ok_or(Error::Convergence {
        what: "Schur decomposition",
        residual: f64::NAN,
    })?;
    let mut vals: Vec<Complex64> = schur.complex_eigenvalues().iter().copied().collect();
    vals.sort_by(descending);
    Ok(vals)
}

/// Full eigen-decomposition of a real square matrix.
pub fn eig(m: &Matrix, tol: f64) -> Result<EigenDecomposition> {
    let vals = eigenvalues(m)?;
    let n = m.nrows();
    let scale = m.norm().max(f64::MIN_POSITIVE);
    let mc: CMatrix = m.map(|x| Complex64::new(x, 0.0));
    let mt = mc.transpose();

    let mut left = Vec::with_capacity(n);
    let mut right = Vec::with_capacity(n);
    let mut defective = false;
    let mut i = 0;
    while i < n {
        // cluster [i, j)
        let mut j = i + 1;
        while j < n && (vals[j] - vals[i]).norm() <= CLUSTER_TOL * (1.0 + vals[i].norm()) {
            j += 1;
        }
        let k = j - i;
        let center = vals[i..j].iter().sum::<Complex64>() / k as f64;
        let shift = CMatrix::identity(n, n) * center;
        let r_vecs = smallest_singular_vectors(&(&mc - &shift), scale)?;
        let l_vecs = smallest_singular_vectors(&(&mt - &shift), scale)?;
        if r_vecs.len() < k || l_vecs.len() < k {
            defective = true;
        }
        for idx in 0..k {
            right.push(r_vecs[idx.min(r_vecs.len() - 1)].clone());
            left.push(l_vecs[idx.min(l_vecs.len() - 1)].clone());
        }
        i = j;
    }

    let dec = EigenDecomposition {
        eigenvalues: vals,
        left_eigenvectors: left,
        right_eigenvectors: right,
        defective,
    };
    let worst = dec
        .eigenvalues
        .iter()
        .zip(&dec.left_eigenvectors)
        .map(|(l, v)| (v.transpose() * &mc - v.transpose() * *l).norm() / v.norm())
        .fold(0.0, f64::max);
    // a defective cluster is only determined to ~sqrt(eps); the residual check
    // applies to the non-defective case
    if !dec.defective && worst > tol.max(1e-8) * scale {
        return Err(Error::Convergence {
            what: "eigenvector extraction",
            residual: worst,
        });
    }
    Ok(dec)
}

/// Right singular vectors of `a` whose singular values lie below
/// `CLUSTER_TOL · scale`; always returns at least the smallest one.
fn smallest_singular_vectors(a: &CMatrix, scale: f64) -> Result<Vec<CVector>> {
    let n = a.ncols();
    let dec = nalgebra::SVD::try_new(a.clone(), false, true, f64::EPSILON, 10_000).ok_or(
        Error::Convergence {
            what: "complex singular value decomposition",
            residual: f64::NAN,
        },
    )?;
    let v_t = dec.v_t.expect("V computed");
    let sv = dec.singular_values;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| sv[x].partial_cmp(&sv[y]).unwrap());
    let cut = CLUSTER_TOL * scale;
    let mut out: Vec<CVector> = order
        .iter()
        .filter(|&&i| sv[i] <= cut)
        .map(|&i| v_t.row(i).adjoint())
        .collect();
    if out.is_empty() {
        out.push(v_t.row(order[0]).adjoint());
    }
    Ok(out)
}

/// A real eigenvalue of `m` together with an orthonormal basis of its real left
/// eigenspace `{v : vᵀm = λvᵀ}`.
#[derive(Debug, Clone)]
pub struct RealLeftEigenspace {
    pub eigenvalue: f64,
    pub basis: Vec<Vector>,
    pub algebraic_multiplicity: usize,
}

/// Real left eigenspaces by descending eigenvalue. Eigenvalues with
/// `|Im λ| > tol·(1+|λ|)` are skipped.
pub fn real_left_eigenspaces(m: &Matrix, tol: f64) -> Result<Vec<RealLeftEigenspace>> {
    let vals = eigenvalues(m)?;
    let n = m.nrows();
    let scale = m.norm().max(f64::MIN_POSITIVE);
    let real: Vec<f64> = vals.iter().filter(|l| is_real(**l, tol)).map(|l| l.re).collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < real.len() {
        let mut j = i + 1;
        while j < real.len() && (real[j] - real[i]).abs() <= CLUSTER_TOL * (1.0 + real[i].abs()) {
            j += 1;
        }
        let lambda = real[i..j].iter().sum::<f64>() / (j - i) as f64;
        let shifted = m.transpose() - Matrix::identity(n, n) * lambda;
        let mut basis = matrix_kernel(&shifted, CLUSTER_TOL * scale / shifted.norm().max(scale))?;
        if basis.is_empty() {
            basis = matrix_kernel(&shifted, 1.0)?
                .into_iter()
                .take(1)
                .collect::<Vec<_>>();
        }
        out.push(RealLeftEigenspace {
            eigenvalue: lambda,
            basis,
            algebraic_multiplicity: j - i,
        });
        i = j;
    }
    Ok(out)
}
