//! Dense linear-algebra helpers shared across the crate: Haar-distributed
//! orthogonal draws, basis completion, ordered SVD/eigendecompositions.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Standard-normal matrix draw.
pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Haar-distributed orthogonal matrix via QR of a Gaussian draw.
///
/// The R-diagonal sign correction is required for uniformity; plain QR of a
/// Gaussian matrix is not Haar.
pub fn haar_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<f64> {
    haar_semi_orthogonal(n, n, rng)
}

/// Haar-style draw with orthonormal columns (rows >= cols) or orthonormal
/// rows (rows < cols).
pub fn haar_semi_orthogonal<R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    rng: &mut R,
) -> DMatrix<f64> {
    if rows >= cols {
        let g = gaussian_matrix(rows, cols, rng);
        let qr = g.qr();
        let r = qr.r();
        let mut q = qr.q();
        for j in 0..cols {
            if r[(j, j)] < 0.0 {
                for i in 0..rows {
                    q[(i, j)] = -q[(i, j)];
                }
            }
        }
        q
    } else {
        haar_semi_orthogonal(cols, rows, rng).transpose()
    }
}

/// Extends `thin` (orthonormal columns) to a full square orthogonal matrix
/// whose first columns equal `thin` exactly up to roundoff. Deterministic:
/// the completion comes from QR of `[thin | I]`.
pub fn complete_orthonormal_basis(thin: &DMatrix<f64>) -> DMatrix<f64> {
    let n = thin.nrows();
    let k = thin.ncols();
    if k == n {
        return thin.clone();
    }
    let mut padded = DMatrix::zeros(n, k + n);
    padded.view_mut((0, 0), (n, k)).copy_from(thin);
    for i in 0..n {
        padded[(i, k + i)] = 1.0;
    }
    let mut q = padded.qr().q();
    // QR may flip signs of the leading columns; restore them to match `thin`.
    for j in 0..k {
        let dot: f64 = (0..n).map(|i| q[(i, j)] * thin[(i, j)]).sum();
        if dot < 0.0 {
            for i in 0..n {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    q
}

/// Thin SVD with singular values sorted descending.
pub struct ThinSvd {
    pub u: DMatrix<f64>,
    pub singular_values: DVector<f64>,
    pub v: DMatrix<f64>,
}

pub fn thin_svd(m: &DMatrix<f64>) -> Result<ThinSvd> {
    let max_abs = m.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
    let svd = m
        .clone()
        .try_svd(true, true, f64::EPSILON, 0)
        .ok_or(Error::SvdFailure {
            rows: m.nrows(),
            cols: m.ncols(),
            max_abs,
        })?;
    let u = svd.u.expect("svd requested u");
    let v_t = svd.v_t.expect("svd requested v_t");
    let s = svd.singular_values;

    let k = s.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| s[b].partial_cmp(&s[a]).expect("finite singular values"));

    let mut u_sorted = DMatrix::zeros(u.nrows(), k);
    let mut v_sorted = DMatrix::zeros(v_t.ncols(), k);
    let mut s_sorted = DVector::zeros(k);
    for (dst, &src) in order.iter().enumerate() {
        u_sorted.set_column(dst, &u.column(src));
        v_sorted.set_column(dst, &v_t.row(src).transpose());
        s_sorted[dst] = s[src];
    }
    Ok(ThinSvd {
        u: u_sorted,
        singular_values: s_sorted,
        v: v_sorted,
    })
}

/// Singular values only, sorted descending.
pub fn singular_values(m: &DMatrix<f64>) -> Result<DVector<f64>> {
    let max_abs = m.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
    let svd = m
        .clone()
        .try_svd(false, false, f64::EPSILON, 0)
        .ok_or(Error::SvdFailure {
            rows: m.nrows(),
            cols: m.ncols(),
            max_abs,
        })?;
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).expect("finite singular values"));
    Ok(DVector::from_vec(s))
}

/// Symmetric eigendecomposition with eigenvalues sorted descending.
pub fn symmetric_eigen_desc(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let eig = m.clone().symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .expect("finite eigenvalues")
    });
    let mut values = DVector::zeros(n);
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        values[dst] = eig.eigenvalues[src];
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Symmetric inverse square root, guarding against ill conditioning.
pub fn symmetric_inverse_sqrt(m: &DMatrix<f64>, condition_cap: f64) -> Result<DMatrix<f64>> {
    let (values, vectors) = symmetric_eigen_desc(m);
    let n = values.len();
    let max = values[0].max(0.0);
    let min = values[n - 1];
    let condition = if min > 0.0 { max / min } else { f64::INFINITY };
    if !(condition < condition_cap) {
        let null_dims = values.iter().filter(|&&v| v <= max / condition_cap).count();
        return Err(Error::RankDeficient {
            null_dims,
            dim: n,
            condition,
            cap: condition_cap,
        });
    }
    let inv_sqrt = DMatrix::from_diagonal(&values.map(|v| 1.0 / v.sqrt()));
    Ok(&vectors * inv_sqrt * vectors.transpose())
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |a, x| a.max(x.abs()))
}

pub fn frobenius(m: &DMatrix<f64>) -> f64 {
    m.iter().map(|x| x * x).sum::<f64>().sqrt()
}
