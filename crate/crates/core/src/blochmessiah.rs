//! Three-factor decomposition `S = expm(K1) expm(K2) expm(K3)`: a passive
//! network, a bank of real single-parameter squeezers, and another passive
//! network.
//!
//! The construction starts from the SVD of the off-diagonal block,
//! `S12 = U1 Sigma V2^+`, sets `C = (Sigma^2 + 1)^(1/2)` and recovers the
//! remaining unitaries as `V1 = S11^-1 U1 C`, `U2 = S22 V2 C^-1`, so that
//!
//! ```text
//! S = diag(U1, U2) (C Sigma; Sigma C) diag(V1^+, V2^+).
//! ```
//!
//! For block-conjugate `S` the two passive factors must themselves be
//! block-conjugate. The SVD fixes `U1` only up to a unitary acting inside
//! each group of equal singular values; the mismatch `W = U1^+ conj(U2)` is
//! a symmetric unitary on every such group, and replacing `U1` by
//! `U1 sqrt(Q W)` (with a sign `Q` chosen per group) makes the outer
//! factors conjugate-paired.

use serde::Serialize;

use crate::group::{self, Generator, ScatteringMatrix};
use crate::linalg::{self, block_diag, conj, frobenius, from_quarters, quarters, real_diag, ComplexMatrix, C64};
use crate::logm::expm;
use crate::{Error, Result};

/// Relative reconstruction bound every factorization is certified against.
pub const RECONSTRUCTION_TOL: f64 = 1e-8;
/// Consecutive singular values closer than this multiple of `||S||_F`
/// are treated as one degenerate group.
pub const DEGENERACY_TOL: f64 = 1e-7;
/// Perturbation sizes (times `||S||_F`) tried when the direct
/// construction cannot be certified.
pub const PERTURBATION_LADDER: [f64; 3] = [1e-7, 1e-9, 1e-11];
/// Required unitarity of the recovered `V1`, `U2`.
pub const UNITARITY_TOL: f64 = 1e-9;

fn certify_threshold(s: &ComplexMatrix) -> f64 {
    RECONSTRUCTION_TOL * frobenius(s).max(1.0)
}

/// Antihermitian logarithm of a unitary matrix from its spectral
/// factorization, with phases in `(-pi, pi]`.
pub fn unitary_log(u: &ComplexMatrix, tol: f64) -> Result<ComplexMatrix> {
    linalg::ensure_tolerance(tol)?;
    linalg::ensure_finite(u)?;
    if !u.is_square() {
        return Err(Error::InvalidDimension("unitary_log needs a square matrix".into()));
    }
    let residual = linalg::unitarity_residual(u);
    if residual > tol * (u.nrows() as f64).sqrt().max(1.0) {
        return Err(Error::NotUnitary { residual });
    }
    let (q, t) = linalg::schur(u);
    let phases = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        t.nrows(),
        (0..t.nrows()).map(|j| C64::new(0.0, crate::logm::principal_ln(t[(j, j)]).im)),
    ));
    let k = &q * phases * q.adjoint();
    Ok((&k - k.adjoint()) * C64::new(0.5, 0.0))
}

/// Principal square root of a unitary matrix.
fn unitary_sqrt(w: &ComplexMatrix) -> ComplexMatrix {
    let (q, t) = linalg::schur(w);
    let roots = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        t.nrows(),
        (0..t.nrows()).map(|j| {
            let z = t[(j, j)];
            C64::from_polar(1.0, 0.5 * crate::logm::principal_ln(z).im)
        }),
    ));
    &q * roots * q.adjoint()
}

/// `(cosh D, sinh D; sinh D, cosh D)` for real diagonal `D`.
pub fn middle_factor(d: &[f64]) -> ComplexMatrix {
    let ch: Vec<f64> = d.iter().map(|x| x.cosh()).collect();
    let sh: Vec<f64> = d.iter().map(|x| x.sinh()).collect();
    from_quarters(&real_diag(&ch), &real_diag(&sh), &real_diag(&sh), &real_diag(&ch))
}

/// `(0 D; D 0)`
pub fn squeezing_generator(d: &[f64]) -> ComplexMatrix {
    let z = ComplexMatrix::zeros(d.len(), d.len());
    from_quarters(&z, &real_diag(d), &real_diag(d), &z)
}

pub trait Factorization {
    fn factors(&self) -> [&Generator; 3];

    /// `expm(K1) expm(K2) expm(K3)`
    fn reconstruct(&self) -> ComplexMatrix {
        let [k1, k2, k3] = self.factors();
        expm::expm_unchecked(k1.matrix())
            * expm::expm_unchecked(k2.matrix())
            * expm::expm_unchecked(k3.matrix())
    }
}

/// Factorization valid for the whole quasi-unitary group: block-diagonal
/// outer generators with independent antihermitian blocks and a
/// non-negative squeezing vector sorted descending.
#[derive(Debug, Clone, Serialize)]
pub struct FactorizationG0 {
    #[serde(skip)]
    pub k1: Generator,
    #[serde(skip)]
    pub k2: Generator,
    #[serde(skip)]
    pub k3: Generator,
    pub d: Vec<f64>,
    pub v1_unitarity: f64,
    pub u2_unitarity: f64,
    pub reconstruction_residual: f64,
}

impl Factorization for FactorizationG0 {
    fn factors(&self) -> [&Generator; 3] {
        [&self.k1, &self.k2, &self.k3]
    }
}

/// Factorization with conjugate-paired outer generators
/// `diag(A, conj(A))`, so all three factors are physical.
#[derive(Debug, Clone, Serialize)]
pub struct FactorizationG {
    #[serde(skip)]
    pub k1: Generator,
    #[serde(skip)]
    pub k2: Generator,
    #[serde(skip)]
    pub k3: Generator,
    /// Signed squeezing parameters `log(C + Q Sigma)`.
    pub d: Vec<f64>,
    /// Sign of each squeezing channel.
    pub q: Vec<f64>,
    pub reconstruction_residual: f64,
    /// Perturbation size used to break a degeneracy, if any.
    pub perturbation: Option<f64>,
}

impl Factorization for FactorizationG {
    fn factors(&self) -> [&Generator; 3] {
        [&self.k1, &self.k2, &self.k3]
    }

    /// The middle factor uses its closed form.
    fn reconstruct(&self) -> ComplexMatrix {
        expm::expm_unchecked(self.k1.matrix())
            * middle_factor(&self.d)
            * expm::expm_unchecked(self.k3.matrix())
    }
}

/// The common first stage: SVD of `S12` and the recovered unitaries.
struct Stage {
    u1: ComplexMatrix,
    sigma: Vec<f64>,
    c: Vec<f64>,
    v1: ComplexMatrix,
    v2: ComplexMatrix,
    u2: ComplexMatrix,
}

fn first_stage(s: &ComplexMatrix) -> Result<Stage> {
    let (s11, s12, _s21, s22) = quarters(s);
    let svd = linalg::svd(&s12);
    let c: Vec<f64> = svd.s.iter().map(|x| (x * x + 1.0).sqrt()).collect();
    // S11 S11^+ = 1 + S12 S12^+ bounds its smallest singular value below by 1.
    let s11_inv = linalg::inverse(&s11)
        .ok()
        .filter(|inv| frobenius(inv) <= 1e8 * (s11.nrows() as f64).sqrt())
        .ok_or_else(|| {
            Error::InvariantViolation(
                "S11 is numerically singular; input is not quasi-unitary to working precision".into(),
            )
        })?;
    let v1 = s11_inv * &svd.u * real_diag(&c);
    let c_inv: Vec<f64> = c.iter().map(|x| 1.0 / x).collect();
    let u2 = s22 * &svd.v * real_diag(&c_inv);
    Ok(Stage {
        u1: svd.u,
        sigma: svd.s,
        c,
        v1,
        v2: svd.v,
        u2,
    })
}

fn ensure_quasi_unitary(s: &ComplexMatrix, tol: f64) -> Result<usize> {
    let report = group::validate_scattering(s, tol)?;
    let ok = report.dimension_ok
        && report
            .residuals
            .iter()
            .any(|r| r.name == group::QUASI_UNITARITY && r.ok());
    if !ok {
        return Err(Error::NotScattering(Box::new(report)));
    }
    Ok(report.n)
}

/// Decomposition for any quasi-unitary `S`; the block-conjugate layout is
/// not required.
pub fn factorize_g0(s: &ComplexMatrix, tol: f64) -> Result<FactorizationG0> {
    ensure_quasi_unitary(s, tol)?;
    let st = first_stage(s)?;
    let v1_unitarity = linalg::unitarity_residual(&st.v1);
    let u2_unitarity = linalg::unitarity_residual(&st.u2);
    for (name, r) in [("V1", v1_unitarity), ("U2", u2_unitarity)] {
        if r > UNITARITY_TOL {
            return Err(Error::InvariantViolation(format!(
                "{name} is not unitary (residual {r:.3e})"
            )));
        }
    }
    let d: Vec<f64> = st.c.iter().zip(&st.sigma).map(|(c, x)| (c + x).ln()).collect();
    let ulog = |m: &ComplexMatrix| unitary_log(m, UNITARITY_TOL);
    let k1 = block_diag(&ulog(&st.u1)?, &ulog(&st.u2)?);
    let k3 = block_diag(&ulog(&st.v1.adjoint())?, &ulog(&st.v2.adjoint())?);
    let k2 = squeezing_generator(&d);
    let mut f = FactorizationG0 {
        k1: Generator::new(k1, tol)?,
        k2: Generator::new(k2, tol)?,
        k3: Generator::new(k3, tol)?,
        d,
        v1_unitarity,
        u2_unitarity,
        reconstruction_residual: 0.0,
    };
    f.reconstruction_residual = frobenius(&(f.reconstruct() - s));
    Ok(f)
}

/// Groups of consecutive (descending) singular values within `gap`.
fn degenerate_groups(sigma: &[f64], gap: f64) -> Vec<std::ops::Range<usize>> {
    let mut groups = Vec::new();
    let mut start = 0;
    for j in 1..=sigma.len() {
        if j == sigma.len() || sigma[j - 1] - sigma[j] > gap {
            groups.push(start..j);
            start = j;
        }
    }
    groups
}

/// Conjugate-paired factorization of `s` without perturbation. Returns the
/// factorization and its residual against `s`.
fn paired(s: &ComplexMatrix, tol: f64) -> Result<FactorizationG> {
    let n = s.nrows() / 2;
    let st = first_stage(s)?;
    let w = st.u1.adjoint() * conj(&st.u2);
    let gap = DEGENERACY_TOL * frobenius(s);
    let mut r = linalg::identity(n);
    let mut q = vec![1.0; n];
    for g in degenerate_groups(&st.sigma, gap) {
        if st.sigma[g.start] <= gap {
            // Squeezing vanishes on this group; the plain SVD basis works.
            continue;
        }
        let len = g.len();
        let wb = w.view((g.start, g.start), (len, len)).into_owned();
        let wb = (&wb + wb.transpose()) * C64::new(0.5, 0.0);
        let sign = if len == 1 && wb[(0, 0)].re < 0.0 { -1.0 } else { 1.0 };
        let root = unitary_sqrt(&(wb * C64::new(sign, 0.0)));
        r.view_mut((g.start, g.start), (len, len)).copy_from(&root);
        for j in g {
            q[j] = sign;
        }
    }
    let u = &st.u1 * &r;
    let v_dag = r.adjoint() * st.v1.adjoint();
    let d: Vec<f64> = st
        .c
        .iter()
        .zip(&st.sigma)
        .zip(&q)
        .map(|((c, x), sign)| (c + sign * x).ln())
        .collect();
    let a1 = unitary_log(&u, UNITARITY_TOL)?;
    let a3 = unitary_log(&v_dag, UNITARITY_TOL)?;
    let mut f = FactorizationG {
        k1: Generator::new(block_diag(&a1, &conj(&a1)), tol)?,
        k2: Generator::new(squeezing_generator(&d), tol)?,
        k3: Generator::new(block_diag(&a3, &conj(&a3)), tol)?,
        d,
        q,
        reconstruction_residual: 0.0,
        perturbation: None,
    };
    f.reconstruction_residual = frobenius(&(f.reconstruct() - s));
    Ok(f)
}

/// Decomposition with all three generators in the physical algebra.
pub fn factorize_g(s: &ScatteringMatrix) -> Result<FactorizationG> {
    let m = s.matrix();
    let n = s.n();
    let tol = s.tol();
    let threshold = certify_threshold(m);
    let (s11, s12, _, _) = quarters(m);
    if frobenius(&s12) <= tol * frobenius(m).max(1.0) {
        let a = unitary_log(&s11, UNITARITY_TOL)?;
        let mut f = FactorizationG {
            k1: Generator::new(block_diag(&a, &conj(&a)), tol)?,
            k2: Generator::zero(n),
            k3: Generator::zero(n),
            d: vec![0.0; n],
            q: vec![1.0; n],
            reconstruction_residual: 0.0,
            perturbation: None,
        };
        f.reconstruction_residual = frobenius(&(f.reconstruct() - m));
        return Ok(f);
    }

    let gap = DEGENERACY_TOL * frobenius(m);
    let sigma = linalg::svd(&s12).s;
    let degenerate = degenerate_groups(&sigma, gap)
        .iter()
        .any(|g| g.len() > 1 && sigma[g.start] > gap);

    let mut best = f64::INFINITY;
    let mut attempt = |f: Result<FactorizationG>| -> Result<Option<FactorizationG>> {
        match f {
            Ok(f) if f.reconstruction_residual <= threshold => Ok(Some(f)),
            Ok(f) => {
                best = best.min(f.reconstruction_residual);
                Ok(None)
            }
            Err(Error::NotUnitary { .. }) | Err(Error::NotGenerator { .. }) => Ok(None),
            Err(e) => Err(e),
        }
    };
    if !degenerate {
        if let Some(f) = attempt(paired(m, tol))? {
            return Ok(f);
        }
    }

    // Split coinciding singular values with a small squeeze of distinct
    // strengths, factor the perturbed matrix, and certify the factors
    // against the original input. Every rung is tried and the smallest
    // certified residual wins.
    let mut chosen: Option<FactorizationG> = None;
    for scale in PERTURBATION_LADDER {
        let eps = scale * frobenius(m);
        let offsets: Vec<f64> = (0..n).map(|j| eps * (j + 1) as f64).collect();
        let perturbed = m * expm::expm_unchecked(&squeezing_generator(&offsets));
        let f = paired(&perturbed, tol.max(10.0 * eps)).map(|mut f| {
            f.reconstruction_residual = frobenius(&(f.reconstruct() - m));
            f.perturbation = Some(eps);
            f
        });
        if let Some(f) = attempt(f)? {
            if chosen
                .as_ref()
                .is_none_or(|c| f.reconstruction_residual < c.reconstruction_residual)
            {
                chosen = Some(f);
            }
        }
    }
    if let Some(f) = chosen {
        return Ok(f);
    }

    // Unperturbed split of each degenerate block by a symmetric unitary
    // square root.
    if degenerate {
        if let Some(f) = attempt(paired(m, tol))? {
            return Ok(f);
        }
    }
    Err(Error::DegeneracyUnresolved {
        best_residual: best,
    })
}
