//! Small dense linear-algebra kernels.
//!
//! Everything here works on `nalgebra` dynamic matrices and targets the
//! n ≤ 10 systems this crate is about. Storage, LU, SVD and the symmetric
//! eigen-solver come from `nalgebra`; the matrix exponential, the
//! zero-order-hold discretization and the Lyapunov solve are implemented
//! here.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Target relative accuracy of [`expm`].
pub const EXPM_REL_TOL: f64 = 1e-10;
/// Lyapunov residual bound, relative to `‖M‖`.
pub const LYAPUNOV_RESIDUAL_TOL: f64 = 1e-10;
/// Eigenvalue real parts must lie strictly below this value.
pub const HURWITZ_THRESHOLD: f64 = -1e-9;
/// Allowed asymmetry `max |S - S'|`, scaled by `max(1, max |S|)`.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Extreme eigenvalues of a symmetric matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetricSpectrum {
    pub min_eig: f64,
    pub max_eig: f64,
}

/// Builds a matrix from row slices, rejecting ragged, empty or non-finite
/// input.
pub fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<Matrix> {
    let nrows = rows.len();
    if nrows == 0 {
        return Err(Error::Dimension("matrix must have at least one row".into()));
    }
    let ncols = rows[0].len();
    if ncols == 0 {
        return Err(Error::Dimension("matrix must have at least one column".into()));
    }
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != ncols) {
        return Err(Error::Dimension(format!(
            "row {i} has {} entries, expected {ncols}",
            r.len()
        )));
    }
    let m = Matrix::from_fn(nrows, ncols, |i, j| rows[i][j]);
    ensure_finite(&m, "matrix")?;
    Ok(m)
}

pub fn matrix_to_rows(m: &Matrix) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

pub(crate) fn ensure_finite(m: &Matrix, what: &str) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Domain(format!("{what} has non-finite entries")))
    }
}

pub(crate) fn ensure_square(m: &Matrix, what: &str) -> Result<()> {
    if m.is_square() && m.nrows() > 0 {
        Ok(())
    } else {
        Err(Error::Dimension(format!(
            "{what} must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )))
    }
}

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
const THETA13: f64 = 5.371920351148152;

/// `e^{A t}` by scaling and squaring with a degree-13 Padé approximant.
pub fn expm(a: &Matrix, t: f64) -> Result<Matrix> {
    ensure_square(a, "expm argument")?;
    ensure_finite(a, "expm argument")?;
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::Domain(format!("expm time must be finite and >= 0, got {t}")));
    }
    Ok(expm_unchecked(&(a * t)))
}

fn expm_unchecked(a: &Matrix) -> Matrix {
    let n = a.nrows();
    let ident = Matrix::identity(n, n);
    let norm1 = a
        .column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    if norm1 == 0.0 {
        return ident;
    }
    let squarings = if norm1 > THETA13 {
        (norm1 / THETA13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let a = a / 2f64.powi(squarings);

    let b = &PADE13;
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_inner = &a6 * (&a6 * b[13] + &a4 * b[11] + &a2 * b[9])
        + &a6 * b[7]
        + &a4 * b[5]
        + &a2 * b[3]
        + &ident * b[1];
    let u = &a * u_inner;
    let v = &a6 * (&a6 * b[12] + &a4 * b[10] + &a2 * b[8])
        + &a6 * b[6]
        + &a4 * b[4]
        + &a2 * b[2]
        + &ident * b[0];

    let denom = &v - &u;
    let numer = &v + &u;
    // V - U is well conditioned for ‖A‖₁ ≤ θ₁₃.
    let mut r = denom
        .lu()
        .solve(&numer)
        .expect("Pade denominator is nonsingular after scaling");
    for _ in 0..squarings {
        r = &r * &r;
    }
    r
}

/// Exact zero-order-hold discretization `(e^{Aδ}, ∫₀^δ e^{Aτ}B dτ)`,
/// both read off one exponential of the block matrix `[[A, B], [0, 0]]`.
pub fn zoh_discretize(a: &Matrix, b: &Matrix, delta: f64) -> Result<(Matrix, Matrix)> {
    ensure_square(a, "A")?;
    ensure_finite(a, "A")?;
    ensure_finite(b, "B")?;
    if b.nrows() != a.nrows() {
        return Err(Error::Dimension(format!(
            "B has {} rows but A is {}x{}",
            b.nrows(),
            a.nrows(),
            a.ncols()
        )));
    }
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::Domain(format!("discretization step must be > 0, got {delta}")));
    }
    let n = a.nrows();
    let m = b.ncols();
    let mut aug = Matrix::zeros(n + m, n + m);
    aug.view_mut((0, 0), (n, n)).copy_from(a);
    aug.view_mut((0, n), (n, m)).copy_from(b);
    let e = expm_unchecked(&(aug * delta));
    Ok((
        e.view((0, 0), (n, n)).into_owned(),
        e.view((0, n), (n, m)).into_owned(),
    ))
}

/// Rejects matrices with an eigenvalue whose real part is not below
/// [`HURWITZ_THRESHOLD`]; the error names the worst eigenvalue.
pub fn ensure_hurwitz(phi: &Matrix) -> Result<()> {
    ensure_square(phi, "closed-loop matrix")?;
    ensure_finite(phi, "closed-loop matrix")?;
    let eig = phi.complex_eigenvalues();
    let worst = eig
        .iter()
        .copied()
        .max_by(|x, y| x.re.total_cmp(&y.re))
        .expect("square matrix has eigenvalues");
    if worst.re < HURWITZ_THRESHOLD {
        Ok(())
    } else {
        Err(Error::NotHurwitz {
            re: worst.re,
            im: worst.im,
            threshold: HURWITZ_THRESHOLD,
        })
    }
}

fn asymmetry(s: &Matrix) -> f64 {
    (s - s.transpose()).amax()
}

fn ensure_symmetric(s: &Matrix, what: &str) -> Result<()> {
    ensure_square(s, what)?;
    ensure_finite(s, what)?;
    let tol = SYMMETRY_TOL * s.amax().max(1.0);
    let asym = asymmetry(s);
    if asym > tol {
        return Err(Error::Domain(format!(
            "{what} is not symmetric (max |S - S'| = {asym:e})"
        )));
    }
    Ok(())
}

/// Solves `Φ'P + PΦ + M = 0` for symmetric positive-definite `P` by
/// vectorization: `(I ⊗ Φ' + Φ' ⊗ I) vec(P) = -vec(M)`.
pub fn solve_lyapunov(phi: &Matrix, m: &Matrix) -> Result<Matrix> {
    ensure_hurwitz(phi)?;
    ensure_symmetric(m, "Lyapunov weight")?;
    if m.nrows() != phi.nrows() {
        return Err(Error::Dimension(format!(
            "Lyapunov weight is {}x{} but the closed-loop matrix is {}x{}",
            m.nrows(),
            m.ncols(),
            phi.nrows(),
            phi.ncols()
        )));
    }
    let spectrum = symmetric_extremes(m)?;
    if spectrum.min_eig <= 0.0 {
        return Err(Error::Domain(format!(
            "Lyapunov weight is not positive definite (min eigenvalue {})",
            spectrum.min_eig
        )));
    }

    let n = phi.nrows();
    let ident = Matrix::identity(n, n);
    let phi_t = phi.transpose();
    let op = ident.kronecker(&phi_t) + phi_t.kronecker(&ident);
    let rhs = -Vector::from_column_slice(m.as_slice());
    let sol = op
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Domain("Lyapunov operator is singular".into()))?;
    let p = Matrix::from_column_slice(n, n, sol.as_slice());
    let p = (&p + p.transpose()) * 0.5;

    let residual = lyapunov_residual(phi, &p, m);
    let bound = LYAPUNOV_RESIDUAL_TOL * spectral_norm(m);
    if residual > bound {
        return Err(Error::Domain(format!(
            "Lyapunov residual {residual:e} exceeds {bound:e}"
        )));
    }
    Ok(p)
}

/// `‖Φ'P + PΦ + M‖₂`.
pub fn lyapunov_residual(phi: &Matrix, p: &Matrix, m: &Matrix) -> f64 {
    spectral_norm(&(phi.transpose() * p + p * phi + m))
}

/// 2-norm logarithmic norm, `λ_max((A + A')/2)`.
pub fn log_norm(a: &Matrix) -> Result<f64> {
    ensure_square(a, "log_norm argument")?;
    ensure_finite(a, "log_norm argument")?;
    let sym = (a + a.transpose()) * 0.5;
    Ok(sym.symmetric_eigenvalues().max())
}

/// Largest singular value.
pub fn spectral_norm(m: &Matrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().max()
}

pub fn symmetric_extremes(s: &Matrix) -> Result<SymmetricSpectrum> {
    ensure_symmetric(s, "symmetric argument")?;
    let sym = (s + s.transpose()) * 0.5;
    let eig = sym.symmetric_eigenvalues();
    Ok(SymmetricSpectrum {
        min_eig: eig.min(),
        max_eig: eig.max(),
    })
}
