//! Dense complex linear algebra shared by the other modules.

use nalgebra::{DMatrix, DVector};
pub use num_complex::Complex64 as C64;

use crate::{Error, Result};

/// Dense complex matrix; the carrier for every matrix in the crate.
pub type ComplexMatrix = DMatrix<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn identity(dim: usize) -> ComplexMatrix {
    ComplexMatrix::identity(dim, dim)
}

pub fn frobenius(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn is_finite(m: &ComplexMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn ensure_finite(m: &ComplexMatrix) -> Result<()> {
    if is_finite(m) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

pub fn ensure_tolerance(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidTolerance(tol))
    }
}

/// Entrywise complex conjugate (no transpose).
pub fn conj(m: &ComplexMatrix) -> ComplexMatrix {
    m.map(|z| z.conj())
}

/// Square sub-block of size `size` starting at (`row`, `col`).
pub fn block(m: &ComplexMatrix, row: usize, col: usize, size: usize) -> ComplexMatrix {
    m.view((row, col), (size, size)).into_owned()
}

/// The four `n x n` blocks `(top-left, top-right, bottom-left, bottom-right)`
/// of a `2n x 2n` matrix.
pub fn quarters(m: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix, ComplexMatrix, ComplexMatrix) {
    let n = m.nrows() / 2;
    (
        block(m, 0, 0, n),
        block(m, 0, n, n),
        block(m, n, 0, n),
        block(m, n, n, n),
    )
}

pub fn from_quarters(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    c: &ComplexMatrix,
    d: &ComplexMatrix,
) -> ComplexMatrix {
    let n = a.nrows();
    let mut m = ComplexMatrix::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(a);
    m.view_mut((0, n), (n, n)).copy_from(b);
    m.view_mut((n, 0), (n, n)).copy_from(c);
    m.view_mut((n, n), (n, n)).copy_from(d);
    m
}

pub fn block_diag(a: &ComplexMatrix, d: &ComplexMatrix) -> ComplexMatrix {
    let z = ComplexMatrix::zeros(a.nrows(), a.nrows());
    from_quarters(a, &z, &z, d)
}

pub fn real_diag(values: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_diagonal(&DVector::from_iterator(
        values.len(),
        values.iter().map(|&x| C64::new(x, 0.0)),
    ))
}

pub fn inverse(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    m.clone()
        .try_inverse()
        .filter(is_finite)
        .ok_or_else(|| Error::InvariantViolation("matrix is numerically singular".into()))
}

/// Complex Schur form `m = q t q^+` with `t` upper triangular.
pub fn schur(m: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let (q, mut t) = nalgebra::Schur::new(m.clone()).unpack();
    // The QR sweep leaves round-off below the diagonal.
    for j in 0..t.ncols() {
        for i in (j + 1)..t.nrows() {
            t[(i, j)] = ZERO;
        }
    }
    (q, t)
}

/// Eigen-decomposition of a general complex matrix, obtained from its Schur
/// form by back-substitution. Eigenvector columns have unit 2-norm.
pub struct Eigen {
    pub values: Vec<C64>,
    pub vectors: ComplexMatrix,
}

pub fn eig(m: &ComplexMatrix) -> Eigen {
    let (q, t) = schur(m);
    let dim = t.nrows();
    let values: Vec<C64> = (0..dim).map(|k| t[(k, k)]).collect();
    let small = (f64::EPSILON * frobenius(&t)).max(f64::MIN_POSITIVE);
    let mut y = ComplexMatrix::zeros(dim, dim);
    for k in 0..dim {
        y[(k, k)] = ONE;
        for j in (0..k).rev() {
            let mut acc = ZERO;
            for l in (j + 1)..=k {
                acc += t[(j, l)] * y[(l, k)];
            }
            let mut denom = t[(j, j)] - values[k];
            if denom.norm() < small {
                denom = C64::new(small, 0.0);
            }
            y[(j, k)] = -acc / denom;
        }
    }
    let mut vectors = q * y;
    for mut col in vectors.column_iter_mut() {
        let norm = col.norm();
        if norm > 0.0 {
            col /= C64::new(norm, 0.0);
        }
    }
    Eigen { values, vectors }
}

/// Singular values of `m` in descending order.
pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// 2-norm condition number.
pub fn condition(m: &ComplexMatrix) -> f64 {
    let s = singular_values(m);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    }
}

/// Thin SVD `m = u diag(s) v^+` with singular values sorted descending and
/// the first non-negligible entry of every left singular vector made real
/// positive (the matching right vector absorbs the phase).
pub struct Svd {
    pub u: ComplexMatrix,
    pub s: Vec<f64>,
    pub v: ComplexMatrix,
}

pub fn svd(m: &ComplexMatrix) -> Svd {
    let dim = m.nrows();
    let raw = m.clone().svd(true, true);
    let u_raw = raw.u.expect("requested u");
    let v_raw = raw.v_t.expect("requested v^t").adjoint();
    let mut order: Vec<usize> = (0..raw.singular_values.len()).collect();
    order.sort_by(|&a, &b| raw.singular_values[b].total_cmp(&raw.singular_values[a]));
    let mut u = ComplexMatrix::zeros(dim, order.len());
    let mut v = ComplexMatrix::zeros(m.ncols(), order.len());
    let mut s = Vec::with_capacity(order.len());
    for (dst, &src) in order.iter().enumerate() {
        let ucol = u_raw.column(src);
        let pivot = ucol
            .iter()
            .find(|z| z.norm() > 1e-8)
            .copied()
            .unwrap_or(ONE);
        let phase = pivot.conj() / pivot.norm();
        u.set_column(dst, &(ucol * phase));
        v.set_column(dst, &(v_raw.column(src) * phase));
        s.push(raw.singular_values[src]);
    }
    Svd { u, s, v }
}

/// Hermitian eigen-decomposition (ascending eigenvalues).
pub fn hermitian_eig(m: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let sym = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = nalgebra::SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut vecs = ComplexMatrix::zeros(m.nrows(), order.len());
    for (dst, &src) in order.iter().enumerate() {
        vecs.set_column(dst, &eig.eigenvectors.column(src));
    }
    (order.iter().map(|&k| eig.eigenvalues[k]).collect(), vecs)
}

/// Residual `||u^+ u - 1||_F`.
pub fn unitarity_residual(u: &ComplexMatrix) -> f64 {
    frobenius(&(u.adjoint() * u - identity(u.nrows())))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(dim: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(dim, dim, |i, j| {
            let x = (i * 7 + j * 3) as f64;
            C64::new((x * 0.37).sin(), (x * 0.11 + 0.5).cos())
        })
    }

    #[test]
    fn schur_reconstructs() {
        let m = sample(6);
        let (q, t) = schur(&m);
        assert!(frobenius(&(&q * &t * q.adjoint() - &m)) < 1e-12);
        assert!(unitarity_residual(&q) < 1e-12);
    }

    #[test]
    fn eig_satisfies_definition() {
        let m = sample(5);
        let e = eig(&m);
        for (k, lam) in e.values.iter().enumerate() {
            let x = e.vectors.column(k).into_owned();
            let r = &m * &x - x * *lam;
            assert!(r.norm() < 1e-11, "eigenpair {k} residual {}", r.norm());
        }
    }

    #[test]
    fn svd_sorted_with_phase_convention() {
        let m = sample(4);
        let d = svd(&m);
        assert!(d.s.windows(2).all(|w| w[0] >= w[1]));
        let rebuilt = &d.u * real_diag(&d.s) * d.v.adjoint();
        assert!(frobenius(&(rebuilt - &m)) < 1e-12);
        for col in d.u.column_iter() {
            let first = col.iter().find(|z| z.norm() > 1e-8).unwrap();
            assert!(first.im.abs() < 1e-14 && first.re > 0.0);
        }
    }

    #[test]
    fn quarters_round_trip() {
        let m = sample(6);
        let (a, b, c, d) = quarters(&m);
        assert_eq!(from_quarters(&a, &b, &c, &d), m);
    }
}
