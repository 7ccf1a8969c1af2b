//! Matrix exponential by scaling and squaring with a degree-13 Padé approximant
//! (Higham 2005), plus a variant that keeps a separate power-of-two scale so
//! that exponentials too large for binary64 can still be used through logs.

use super::{ensure_finite, ensure_square, Matrix, Vector};
use crate::error::{Error, Result};

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

const THETA_13: f64 = 5.371920351148152;

// Powers whose largest entry leaves [2^-RESCALE_AT, 2^RESCALE_AT] are renormalized.
const RESCALE_AT: i32 = 256;

/// `e^{Mt}`. Errors if the result does not fit in binary64.
pub fn expm(m: &Matrix, t: f64) -> Result<Matrix> {
    let scaled = expm_scaled(m, t)?;
    scaled.to_matrix()
}

/// `e^{Mt}` represented as `mantissa · 2^exponent`.
#[derive(Debug, Clone)]
pub struct ScaledExp {
    pub mantissa: Matrix,
    pub exponent: i64,
}

impl ScaledExp {
    pub fn to_matrix(&self) -> Result<Matrix> {
        if self.exponent == 0 {
            return Ok(self.mantissa.clone());
        }
        let factor = pow2(self.exponent);
        let out = &self.mantissa * factor;
        if !factor.is_finite() || out.iter().any(|x| !x.is_finite()) {
            return Err(Error::Overflow(format!(
                "matrix exponential exceeds binary64 range (scale 2^{})",
                self.exponent
            )));
        }
        Ok(out)
    }

    pub fn log_scale(&self) -> f64 {
        self.exponent as f64 * std::f64::consts::LN_2
    }
}

fn pow2(e: i64) -> f64 {
    if e > 1023 {
        f64::INFINITY
    } else if e < -1074 {
        0.0
    } else {
        2f64.powi(e as i32)
    }
}

/// `e^{Mt}` with overflow-free squaring: whenever the largest entry of an
/// intermediate power leaves `[2^-256, 2^256]` the power is divided by an exact
/// power of two and the exponent is tracked.
pub fn expm_scaled(m: &Matrix, t: f64) -> Result<ScaledExp> {
    ensure_square(m, "expm")?;
    ensure_finite(m, "expm input")?;
    if !t.is_finite() {
        return Err(Error::Argument("expm time must be finite".into()));
    }
    let n = m.nrows();
    if t == 0.0 || m.iter().all(|&x| x == 0.0) {
        return Ok(ScaledExp {
            mantissa: Matrix::identity(n, n),
            exponent: 0,
        });
    }
    let a = m * t;
    let norm = a.column_iter().map(|c| c.lp_norm(1)).fold(0.0, f64::max);
    let squarings = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil().max(0.0) as u32
    } else {
        0
    };
    let a = &a * pow2(-(squarings as i64));
    let triangular = is_upper_triangular(&a);
    let mut x = pade13(&a)?;
    if triangular {
        refine_triangular(&mut x, &a, 1.0, 0);
    }
    let mut exponent: i64 = 0;
    for k in 1..=squarings {
        x = &x * &x;
        exponent *= 2;
        let big = x.amax();
        if big > 2f64.powi(RESCALE_AT) || (big > 0.0 && big < 2f64.powi(-RESCALE_AT)) {
            let e = big.log2().floor() as i64;
            x *= pow2(-e);
            exponent += e;
        }
        if triangular {
            refine_triangular(&mut x, &a, pow2(k as i64), exponent);
        }
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Overflow("matrix exponential squaring".into()));
    }
    Ok(ScaledExp {
        mantissa: x,
        exponent,
    })
}

fn is_upper_triangular(a: &Matrix) -> bool {
    let n = a.nrows();
    (0..n).all(|j| (j + 1..n).all(|i| a[(i, j)] == 0.0))
}

/// Overwrites the diagonal and first superdiagonal of `x ≈ e^{ha}·2^{-exponent}`
/// with their exact values (Al-Mohy and Higham 2009).
fn refine_triangular(x: &mut Matrix, a: &Matrix, h: f64, exponent: i64) {
    let n = a.nrows();
    let shift = exponent as f64 * std::f64::consts::LN_2;
    for i in 0..n {
        x[(i, i)] = (h * a[(i, i)] - shift).exp();
    }
    for i in 0..n.saturating_sub(1) {
        let (a1, a2) = (h * a[(i, i)], h * a[(i + 1, i + 1)]);
        let half = 0.5 * (a2 - a1);
        let divided = if half.abs() > 1.0 {
            ((a2 - shift).exp() - (a1 - shift).exp()) / (a2 - a1)
        } else {
            let sinhc = if half.abs() < 1e-8 { 1.0 + half * half / 6.0 } else { half.sinh() / half };
            (0.5 * (a1 + a2) - shift).exp() * sinhc
        };
        x[(i, i + 1)] = h * a[(i, i + 1)] * divided;
    }
}

fn pade13(a: &Matrix) -> Result<Matrix> {
    let n = a.nrows();
    let b = &PADE13;
    let ident = Matrix::identity(n, n);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_inner = &a6 * (&a6 * b[13] + &a4 * b[11] + &a2 * b[9])
        + &a6 * b[7]
        + &a4 * b[5]
        + &a2 * b[3]
        + &ident * b[1];
    let u = a * u_inner;
    let v = &a6 * (&a6 * b[12] + &a4 * b[10] + &a2 * b[8])
        + &a6 * b[6]
        + &a4 * b[4]
        + &a2 * b[2]
        + &ident * b[0];
    let p = &v + &u;
    let q = &v - &u;
    q.lu()
        .solve(&p)
        .ok_or_else(|| Error::Singular("Padé denominator in expm".into()))
}

/// `∫₀^t e^{Ms} b ds`, read off the exponential of the augmented matrix `[[M, b], [0, 0]]`.
pub fn expm_integral(m: &Matrix, b: &Vector, t: f64) -> Result<Vector> {
    ensure_square(m, "expm_integral")?;
    let n = m.nrows();
    if b.len() != n {
        return Err(Error::Dimension(format!(
            "expm_integral: vector of length {} for {n}x{n} matrix",
            b.len()
        )));
    }
    if t < 0.0 {
        return Err(Error::Argument("expm_integral needs t >= 0".into()));
    }
    if t == 0.0 || b.iter().all(|&x| x == 0.0) {
        return Ok(Vector::zeros(n));
    }
    let aug = augment(m, b);
    let e = expm(&aug, t)?;
    Ok(e.view((0, n), (n, 1)).column(0).into_owned())
}

/// `[[M, b], [0, 0]]`.
pub fn augment(m: &Matrix, b: &Vector) -> Matrix {
    let n = m.nrows();
    let mut aug = Matrix::zeros(n + 1, n + 1);
    aug.view_mut((0, 0), (n, n)).copy_from(m);
    aug.view_mut((0, n), (n, 1)).copy_from(b);
    aug
}
