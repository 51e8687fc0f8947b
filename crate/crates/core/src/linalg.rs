//! Small dense linear-algebra helpers: matrix exponential, Lyapunov
//! equation solve, Hurwitz test and norm utilities. Everything here is sized
//! for desk-scale systems (n <= 10).

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Matrix exponential by scaling-and-squaring with a degree-13 Padé
/// approximant. Accurate to roughly unit roundoff for the matrix sizes used
/// here, comfortably inside the 1e-12 relative budget the predictor needs.
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    assert_eq!(a.nrows(), a.ncols(), "expm expects a square matrix");
    let n = a.nrows();
    let eye = DMatrix::<f64>::identity(n, n);

    // One-norm controls the scaling.
    let norm = a
        .column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let theta_13 = 5.371920351148152;
    let s = if norm > theta_13 {
        (norm / theta_13).log2().ceil() as i32
    } else {
        0
    };
    let a = a / 2f64.powi(s);

    // Degree-13 Padé coefficients.
    const B: [f64; 14] = [
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

    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;

    let u_inner = &a6 * (B[13] * &a6 + B[11] * &a4 + B[9] * &a2)
        + B[7] * &a6
        + B[5] * &a4
        + B[3] * &a2
        + B[1] * &eye;
    let u = &a * u_inner;
    let v = &a6 * (B[12] * &a6 + B[10] * &a4 + B[8] * &a2)
        + B[6] * &a6
        + B[4] * &a4
        + B[2] * &a2
        + B[0] * &eye;

    let num = &v + &u;
    let den = &v - &u;
    let mut r = den
        .lu()
        .solve(&num)
        .expect("Pade denominator is singular; matrix exponential failed");

    for _ in 0..s {
        r = &r * &r;
    }
    r
}

/// Result of a Hurwitz test: the flag and the spectral abscissa
/// (largest real part over the eigenvalues).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HurwitzReport {
    pub is_hurwitz: bool,
    pub spectral_abscissa: f64,
}

/// Checks that every eigenvalue of `m` has strictly negative real part.
pub fn check_hurwitz(m: &DMatrix<f64>) -> Result<HurwitzReport> {
    if m.nrows() != m.ncols() {
        return Err(Error::invalid("check_hurwitz expects a square matrix"));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("check_hurwitz: non-finite entries"));
    }
    let eigs = m.complex_eigenvalues();
    let abscissa = eigs.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
    Ok(HurwitzReport {
        is_hurwitz: abscissa < 0.0,
        spectral_abscissa: abscissa,
    })
}

/// Solves `Q M + M' Q = -2 * rhs_scale * I` for symmetric positive definite
/// `Q` via the Kronecker-vectorized linear system. Requires `M` Hurwitz.
pub fn solve_lyapunov(m: &DMatrix<f64>, rhs_scale: f64) -> Result<DMatrix<f64>> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::invalid("solve_lyapunov expects a square matrix"));
    }
    if !(rhs_scale > 0.0) {
        return Err(Error::invalid("solve_lyapunov: rhs_scale must be > 0"));
    }
    let report = check_hurwitz(m)?;
    if !report.is_hurwitz {
        return Err(Error::NotHurwitz {
            abscissa: report.spectral_abscissa,
        });
    }

    // vec(Q M) = (M' (x) I) vec(Q), vec(M' Q) = (I (x) M') vec(Q).
    let nn = n * n;
    let mut big = DMatrix::<f64>::zeros(nn, nn);
    for col_block in 0..n {
        for row_block in 0..n {
            // (M' (x) I): block (row_block, col_block) = M'(row_block, col_block) * I
            let coeff = m[(col_block, row_block)];
            for k in 0..n {
                big[(row_block * n + k, col_block * n + k)] += coeff;
            }
        }
        // (I (x) M'): diagonal block col_block = M'.
        for i in 0..n {
            for j in 0..n {
                big[(col_block * n + i, col_block * n + j)] += m[(j, i)];
            }
        }
    }
    let mut rhs = DVector::<f64>::zeros(nn);
    for k in 0..n {
        rhs[k * n + k] = -2.0 * rhs_scale;
    }
    let sol = big
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::LyapunovSolve("singular Kronecker system".into()))?;
    let mut q = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            q[(i, j)] = sol[j * n + i];
        }
    }
    // Symmetrize away roundoff.
    let q = (&q + q.transpose()) * 0.5;

    let eigs = q.clone().symmetric_eigenvalues();
    if eigs.iter().any(|&l| l <= 0.0) {
        return Err(Error::LyapunovSolve(format!(
            "solution not positive definite (min eigenvalue {})",
            eigs.iter().cloned().fold(f64::INFINITY, f64::min)
        )));
    }
    Ok(q)
}

/// Smallest and largest eigenvalue of a symmetric matrix.
pub fn symmetric_eig_bounds(m: &DMatrix<f64>) -> (f64, f64) {
    let eigs = m.clone().symmetric_eigenvalues();
    let lo = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = eigs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

/// Induced 2-norm (largest singular value).
pub fn operator_norm(m: &DMatrix<f64>) -> f64 {
    let gram = m.transpose() * m;
    let (_, hi) = symmetric_eig_bounds(&gram);
    hi.max(0.0).sqrt()
}
