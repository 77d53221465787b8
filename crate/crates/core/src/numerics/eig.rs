use faer::{c64, Mat, MatRef, Side};

use crate::{Error, Result};

/// Eigenpairs of a dense matrix. Column `j` of `vectors` belongs to `values[j]`
/// and has unit 2-norm.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<c64>,
    pub vectors: Mat<c64>,
}

/// Largest residual accepted by [`eig_general`]: ‖Av − λv‖ / ‖A‖.
const RESIDUAL_TOL: f64 = 1e-10;

fn check_finite<T: Copy>(a: MatRef<'_, T>, finite: impl Fn(T) -> bool) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::EigenFailure(format!("matrix is {}x{}", a.nrows(), a.ncols())));
    }
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            if !finite(a[(i, j)]) {
                return Err(Error::EigenFailure(format!("non-finite entry at ({i}, {j})")));
            }
        }
    }
    Ok(())
}

fn normalize_and_check(a: MatRef<'_, c64>, values: Vec<c64>, mut vectors: Mat<c64>) -> Result<Eigen> {
    let n = a.nrows();
    let anorm = a.norm_l2().max(f64::MIN_POSITIVE);
    for j in 0..n {
        let norm = vectors.col(j).norm_l2();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::EigenFailure(format!("degenerate eigenvector {j}")));
        }
        for i in 0..n {
            vectors[(i, j)] /= norm;
        }
        let av = a * vectors.col(j);
        let mut r = 0.0;
        for i in 0..n {
            r += (av[i] - values[j] * vectors[(i, j)]).norm_sqr();
        }
        let rel = r.sqrt() / anorm;
        if rel > RESIDUAL_TOL {
            return Err(Error::EigenFailure(format!("residual {rel:e} for eigenpair {j}")));
        }
    }
    Ok(Eigen { values, vectors })
}

/// Eigendecomposition of a dense complex matrix, residual-checked.
pub fn eig_general(a: MatRef<'_, c64>) -> Result<Eigen> {
    check_finite(a, |z: c64| z.re.is_finite() && z.im.is_finite())?;
    let evd = a.eigen().map_err(|e| Error::EigenFailure(format!("{e:?}")))?;
    let values: Vec<c64> = (0..a.nrows()).map(|i| evd.S()[i]).collect();
    normalize_and_check(a, values, evd.U().to_owned())
}

/// Eigendecomposition of a dense real matrix, residual-checked.
pub fn eig_general_real(a: MatRef<'_, f64>) -> Result<Eigen> {
    check_finite(a, f64::is_finite)?;
    let evd = a.eigen().map_err(|e| Error::EigenFailure(format!("{e:?}")))?;
    let values: Vec<c64> = (0..a.nrows()).map(|i| evd.S()[i]).collect();
    let ac = Mat::from_fn(a.nrows(), a.ncols(), |i, j| c64::new(a[(i, j)], 0.0));
    normalize_and_check(ac.as_ref(), values, evd.U().to_owned())
}

/// Eigendecomposition of a Hermitian matrix (lower triangle is read).
/// Eigenvalues ascend; eigenvectors are orthonormal columns.
pub fn eig_hermitian(a: MatRef<'_, c64>) -> Result<(Vec<f64>, Mat<c64>)> {
    check_finite(a, |z: c64| z.re.is_finite() && z.im.is_finite())?;
    let evd = a
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::EigenFailure(format!("{e:?}")))?;
    let values = (0..a.nrows()).map(|i| evd.S()[i].re).collect();
    Ok((values, evd.U().to_owned()))
}

/// Cheap reciprocal condition estimate from the pivots of a partial-pivoting LU
/// factorization: min |u_ii| / max |u_ii|.
pub fn lu_rcond(a: MatRef<'_, f64>) -> f64 {
    let lu = a.partial_piv_lu();
    let u = lu.U();
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for i in 0..u.nrows() {
        let d = u[(i, i)].abs();
        lo = lo.min(d);
        hi = hi.max(d);
    }
    if hi == 0.0 {
        0.0
    } else {
        lo / hi
    }
}
