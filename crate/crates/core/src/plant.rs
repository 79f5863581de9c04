use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{ensure_finite, ensure_square, matrix_from_rows, matrix_to_rows, Matrix};

/// Relative rank tolerance for the stabilizability test.
const RANK_TOL: f64 = 1e-9;

/// Continuous-time plant `ẋ = A x + B u + d`, with `(A, B)` stabilizable.
#[derive(Debug, Clone, PartialEq)]
pub struct LtiPlant {
    a: Matrix,
    b: Matrix,
}

impl LtiPlant {
    pub fn new(a: Matrix, b: Matrix) -> Result<Self> {
        ensure_square(&a, "A")?;
        ensure_finite(&a, "A")?;
        ensure_finite(&b, "B")?;
        if b.nrows() != a.nrows() || b.ncols() == 0 {
            return Err(Error::Dimension(format!(
                "B is {}x{} but A is {}x{}",
                b.nrows(),
                b.ncols(),
                a.nrows(),
                a.ncols()
            )));
        }
        check_stabilizable(&a, &b)?;
        Ok(Self { a, b })
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn b(&self) -> &Matrix {
        &self.b
    }

    /// State dimension.
    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    /// Input dimension.
    pub fn m(&self) -> usize {
        self.b.ncols()
    }

    /// `Φ = A + BK`, after checking that `K` is `m × n`.
    pub fn closed_loop(&self, k: &Matrix) -> Result<Matrix> {
        self.check_gain(k)?;
        Ok(&self.a + &self.b * k)
    }

    pub fn check_gain(&self, k: &Matrix) -> Result<()> {
        ensure_finite(k, "K")?;
        if k.nrows() != self.m() || k.ncols() != self.n() {
            return Err(Error::Dimension(format!(
                "K must be {}x{}, got {}x{}",
                self.m(),
                self.n(),
                k.nrows(),
                k.ncols()
            )));
        }
        Ok(())
    }
}

/// PBH test: every eigenvalue `λ` of `A` with `Re λ ≥ 0` must satisfy
/// `rank [A − λI, B] = n`.
fn check_stabilizable(a: &Matrix, b: &Matrix) -> Result<()> {
    let n = a.nrows();
    let m = b.ncols();
    let scale = a.amax().max(b.amax()).max(1.0);
    for lambda in a.complex_eigenvalues().iter() {
        if lambda.re < 0.0 {
            continue;
        }
        let pbh = DMatrix::<Complex<f64>>::from_fn(n, n + m, |i, j| {
            if j < n {
                let diag = if i == j { *lambda } else { Complex::new(0.0, 0.0) };
                Complex::new(a[(i, j)], 0.0) - diag
            } else {
                Complex::new(b[(i, j - n)], 0.0)
            }
        });
        let sv = pbh.singular_values();
        let rank = sv.iter().filter(|s| **s > RANK_TOL * scale).count();
        if rank < n {
            return Err(Error::NotStabilizable {
                re: lambda.re,
                im: lambda.im,
            });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantSpec {
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<f64>>,
}

impl TryFrom<&PlantSpec> for LtiPlant {
    type Error = Error;

    fn try_from(spec: &PlantSpec) -> Result<Self> {
        LtiPlant::new(matrix_from_rows(&spec.a)?, matrix_from_rows(&spec.b)?)
    }
}

impl From<&LtiPlant> for PlantSpec {
    fn from(p: &LtiPlant) -> Self {
        PlantSpec {
            a: matrix_to_rows(&p.a),
            b: matrix_to_rows(&p.b),
        }
    }
}
