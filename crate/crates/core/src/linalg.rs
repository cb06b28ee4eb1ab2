//! Dense complex matrix kernel.
//!
//! Everything here is sized for desk-scale problems (local dimension up to 8,
//! bipartite operators up to 64x64). Storage is a plain `nalgebra::DMatrix`;
//! the eigensolver and SVD are nalgebra's, wrapped so that convergence
//! failures and non-Hermitian input surface as [`Error`] values.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Tolerance used when admitting a matrix as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;

const MAX_ITERATIONS: usize = 10_000;

pub fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

pub fn ensure_finite(m: &CMatrix) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

pub fn ensure_square(m: &CMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

/// A square complex matrix equal to its conjugate transpose.
///
/// Construction checks Hermiticity within [`HERMITIAN_TOL`] and then
/// replaces the entries by `(H + H^dagger) / 2`, so downstream code sees an
/// exactly Hermitian matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Hermitian(CMatrix);

impl Hermitian {
    pub fn new(m: CMatrix) -> Result<Self> {
        Self::with_tolerance(m, HERMITIAN_TOL)
    }

    pub fn with_tolerance(m: CMatrix, tol: f64) -> Result<Self> {
        ensure_square(&m)?;
        ensure_finite(&m)?;
        let deviation = max_abs_diff(&m, &m.adjoint());
        if deviation > tol {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self::symmetrize(m))
    }

    /// Skips the tolerance check. Only for matrices Hermitian by construction
    /// up to round-off.
    pub(crate) fn symmetrize(m: CMatrix) -> Self {
        let adj = m.adjoint();
        Hermitian((m + adj).scale(0.5))
    }

    pub fn identity(d: usize) -> Self {
        Hermitian(CMatrix::identity(d, d))
    }

    pub fn zeros(d: usize) -> Self {
        Hermitian(CMatrix::zeros(d, d))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn trace(&self) -> f64 {
        trace(&self.0).re
    }

    /// `Tr(self * other)`; real for a pair of Hermitian matrices.
    pub fn inner(&self, other: &Hermitian) -> f64 {
        hs_product(&self.0, &other.0).re
    }

    pub fn scale(&self, s: f64) -> Hermitian {
        Hermitian(self.0.scale(s))
    }

    pub fn add(&self, other: &Hermitian) -> Hermitian {
        Hermitian(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &Hermitian) -> Hermitian {
        Hermitian(&self.0 - &other.0)
    }

    /// `Tr(self * X)` for an arbitrary square matrix `X`.
    pub fn expectation(&self, x: &CMatrix) -> C64 {
        hs_product(&self.0, x)
    }
}

impl AsRef<CMatrix> for Hermitian {
    fn as_ref(&self) -> &CMatrix {
        &self.0
    }
}

#[derive(Clone, Debug)]
pub struct Eigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Columns are the eigenvectors matching `values`.
    pub vectors: CMatrix,
}

impl Eigen {
    pub fn reconstruct(&self) -> CMatrix {
        let n = self.values.len();
        let diag = CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                c(self.values[i], 0.0)
            } else {
                C64::default()
            }
        });
        &self.vectors * diag * self.vectors.adjoint()
    }
}

pub fn herm_eig(h: &Hermitian) -> Result<Eigen> {
    let decomposition = SymmetricEigen::try_new(h.0.clone(), f64::EPSILON, MAX_ITERATIONS)
        .ok_or(Error::EigenNoConvergence {
            iterations: MAX_ITERATIONS,
        })?;
    let mut order: Vec<usize> = (0..decomposition.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| decomposition.eigenvalues[i].total_cmp(&decomposition.eigenvalues[j]));
    let values = order.iter().map(|&i| decomposition.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(h.dim(), order.len(), |r, col| {
        decomposition.eigenvectors[(r, order[col])]
    });
    Ok(Eigen { values, vectors })
}

pub fn min_eigenvalue(h: &Hermitian) -> Result<f64> {
    Ok(herm_eig(h)?.values[0])
}

/// Eigenvector of the smallest eigenvalue, together with that eigenvalue.
pub fn lowest_eigenpair(h: &Hermitian) -> Result<(f64, CVector)> {
    let eig = herm_eig(h)?;
    Ok((eig.values[0], eig.vectors.column(0).into_owned()))
}

/// Singular values in descending order.
pub fn singular_values(m: &CMatrix) -> Result<Vec<f64>> {
    ensure_finite(m)?;
    if m.is_empty() {
        return Ok(Vec::new());
    }
    let svd = SVD::try_new(m.clone(), false, false, f64::EPSILON, MAX_ITERATIONS).ok_or(
        Error::SvdNoConvergence {
            iterations: MAX_ITERATIONS,
        },
    )?;
    let mut values: Vec<f64> = svd.singular_values.iter().copied().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values)
}

/// `Tr sqrt(M^dagger M)`, the sum of singular values.
pub fn trace_norm(m: &CMatrix) -> Result<f64> {
    Ok(singular_values(m)?.iter().sum())
}

pub fn trace_norm_real(m: &DMatrix<f64>) -> Result<f64> {
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    if m.is_empty() {
        return Ok(0.0);
    }
    let svd = SVD::try_new(m.clone(), false, false, f64::EPSILON, MAX_ITERATIONS).ok_or(
        Error::SvdNoConvergence {
            iterations: MAX_ITERATIONS,
        },
    )?;
    Ok(svd.singular_values.iter().sum())
}

/// Which tensor factor of a bipartite operator to act on or keep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Subsystem {
    A,
    B,
}

/// Partial trace of an operator on `C^dA (x) C^dB`, keeping `keep`.
pub fn partial_trace(rho: &CMatrix, dims: (usize, usize), keep: Subsystem) -> Result<CMatrix> {
    let (da, db) = dims;
    let n = ensure_square(rho)?;
    if n != da * db {
        return Err(Error::DimensionMismatch {
            context: "partial trace",
            expected: da * db,
            found: n,
        });
    }
    let out = match keep {
        Subsystem::A => CMatrix::from_fn(da, da, |i, j| {
            (0..db).map(|k| rho[(i * db + k, j * db + k)]).sum()
        }),
        Subsystem::B => CMatrix::from_fn(db, db, |i, j| {
            (0..da).map(|k| rho[(k * db + i, k * db + j)]).sum()
        }),
    };
    Ok(out)
}

/// Transpose of one tensor factor of a bipartite operator.
pub fn partial_transpose(rho: &CMatrix, dims: (usize, usize), which: Subsystem) -> Result<CMatrix> {
    let (da, db) = dims;
    let n = ensure_square(rho)?;
    if n != da * db {
        return Err(Error::DimensionMismatch {
            context: "partial transpose",
            expected: da * db,
            found: n,
        });
    }
    Ok(CMatrix::from_fn(n, n, |r, col| {
        let (i, k) = (r / db, r % db);
        let (j, l) = (col / db, col % db);
        match which {
            Subsystem::A => rho[(j * db + k, i * db + l)],
            Subsystem::B => rho[(i * db + l, j * db + k)],
        }
    }))
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// The swap operator `F_d = sum_{m,n} |m><n| (x) |n><m|` on `C^d (x) C^d`.
pub fn flip(d: usize) -> Result<CMatrix> {
    if d < 2 {
        return Err(Error::InvalidDimension { found: d, min: 2 });
    }
    let mut f = CMatrix::zeros(d * d, d * d);
    for m in 0..d {
        for n in 0..d {
            f[(m * d + n, n * d + m)] = c(1.0, 0.0);
        }
    }
    Ok(f)
}

pub fn trace(m: &CMatrix) -> C64 {
    m.diagonal().iter().sum()
}

/// `Tr(A B)` without forming the product.
pub fn hs_product(a: &CMatrix, b: &CMatrix) -> C64 {
    let mut acc = C64::default();
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn basis_ket(d: usize, i: usize) -> CVector {
    let mut v = CVector::zeros(d);
    v[i] = c(1.0, 0.0);
    v
}

/// `|u><v|`
pub fn outer(u: &CVector, v: &CVector) -> CMatrix {
    u * v.adjoint()
}

/// `|v><v| / <v|v>`
pub fn projector(v: &CVector) -> Hermitian {
    let norm2 = v.norm_squared();
    Hermitian::symmetrize(outer(v, v).unscale(norm2))
}

pub fn to_complex(m: &DMatrix<f64>) -> CMatrix {
    m.map(|x| c(x, 0.0))
}
