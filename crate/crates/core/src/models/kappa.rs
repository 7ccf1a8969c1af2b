use super::LgProcess;
use crate::error::{Error, Result};
use crate::numerics::{Matrix, Vector};

/// `κ = [[A, B], [C, D]]` with `A` scalar, `B` a row, `C` a column.
#[derive(Debug, Clone, PartialEq)]
pub struct KappaBlocks {
    pub kappa: Matrix,
    pub a: f64,
    pub b: Vector,
    pub c: Vector,
    pub d: Matrix,
}

impl KappaBlocks {
    pub fn from_kappa(kappa: Matrix) -> Result<Self> {
        let n1 = kappa.nrows();
        if n1 == 0 || kappa.ncols() != n1 {
            return Err(Error::Dimension("kappa must be square and non-empty".into()));
        }
        let n = n1 - 1;
        Ok(Self {
            a: kappa[(0, 0)],
            b: kappa.view((0, 1), (1, n)).transpose().column(0).into_owned(),
            c: kappa.view((1, 0), (n, 1)).column(0).into_owned(),
            d: kappa.view((1, 1), (n, n)).into_owned(),
            kappa,
        })
    }

    /// `β = αI + QκQ⁻¹`.
    pub fn reassemble_beta(&self, q_basis: &Matrix, alpha: f64) -> Result<Matrix> {
        let q_inv = invert(q_basis)?;
        let n1 = self.kappa.nrows();
        Ok(Matrix::identity(n1, n1) * alpha + q_basis * &self.kappa * q_inv)
    }

    /// `r = −A − Bx`.
    pub fn short_rate(&self, x: &Vector) -> f64 {
        -self.a - self.b.dot(x)
    }
}

fn invert(q: &Matrix) -> Result<Matrix> {
    if !q.is_square() {
        return Err(Error::Dimension("basis matrix must be square".into()));
    }
    q.clone()
        .try_inverse()
        .ok_or_else(|| Error::Singular("basis matrix Q is not invertible".into()))
}

/// `κ = Q⁻¹(β − αI)Q`, split into blocks.
pub fn lg_kappa_blocks(lg: &LgProcess, q_basis: &Matrix, alpha: f64) -> Result<KappaBlocks> {
    let m = lg.dim();
    if q_basis.shape() != (m, m) {
        return Err(Error::Dimension(format!(
            "basis is {}x{}, expected {m}x{m}",
            q_basis.nrows(),
            q_basis.ncols()
        )));
    }
    let q_inv = invert(q_basis)?;
    let kappa = q_inv * (&lg.beta - Matrix::identity(m, m) * alpha) * q_basis;
    KappaBlocks::from_kappa(kappa)
}

/// Q-drift `μ(x) = constant + linear·x + (quadratic_row·x)·x`.
#[derive(Debug, Clone, PartialEq)]
pub struct QDrift {
    pub constant: Vector,
    pub linear: Matrix,
    pub quadratic_row: Vector,
}

impl QDrift {
    pub fn eval(&self, x: &Vector) -> Vector {
        &self.constant + &self.linear * x + x * self.quadratic_row.dot(x)
    }
}

/// `(C, D − A·I, −B)`.
pub fn q_drift_coefficients(blocks: &KappaBlocks) -> QDrift {
    let n = blocks.d.nrows();
    QDrift {
        constant: blocks.c.clone(),
        linear: &blocks.d - Matrix::identity(n, n) * blocks.a,
        quadratic_row: -&blocks.b,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_twist() {
        let kappa = Matrix::from_row_slice(2, 2, &[-0.1, -0.2, 0.3, -0.4]);
        let drift = q_drift_coefficients(&KappaBlocks::from_kappa(kappa).unwrap());
        for x in [0.0, 1.0, 2.0] {
            let want = 0.3 + (-0.4 + 0.1) * x + 0.2 * x * x;
            let got = drift.eval(&Vector::from_element(1, x))[0];
            assert!((got - want).abs() < 1e-15, "{x}: {got} vs {want}");
        }
    }

    #[test]
    fn blocks_partition_kappa() {
        let kappa = Matrix::from_fn(3, 3, |i, j| (3 * i + j) as f64);
        let k = KappaBlocks::from_kappa(kappa).unwrap();
        assert_eq!(k.a, 0.0);
        assert_eq!(k.b, Vector::from_vec(vec![1.0, 2.0]));
        assert_eq!(k.c, Vector::from_vec(vec![3.0, 6.0]));
        assert_eq!(k.d, Matrix::from_row_slice(2, 2, &[4.0, 5.0, 7.0, 8.0]));
    }
}
