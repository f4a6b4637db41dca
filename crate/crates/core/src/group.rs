//! Quasi-unitary group and Lie-algebra types.
//!
//! A scattering matrix `S` (`2n x 2n`) must have the block-conjugate layout
//! `(A B; conj(B) conj(A))` and satisfy `S G S^+ = G` for the metric
//! `G = diag(1_n, -1_n)`. Generators `K` of the group satisfy
//! `K G + G K^+ = 0`; the physical ones additionally have the layout
//! `(A D; conj(D) conj(A))` with `A` antihermitian and `D` symmetric.

use serde::{Deserialize, Serialize};

use crate::linalg::{self, conj, frobenius, quarters, ComplexMatrix, C64};
use crate::{Error, Result};

/// The metric `diag(1_n, -1_n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Metric {
    n: usize,
    matrix: ComplexMatrix,
}

impl Metric {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }
}

pub fn metric(n: usize) -> Result<Metric> {
    if n == 0 {
        return Err(Error::InvalidDimension("mode count must be at least 1".into()));
    }
    let matrix = ComplexMatrix::from_fn(2 * n, 2 * n, |i, j| match (i == j, i < n) {
        (true, true) => linalg::ONE,
        (true, false) => -linalg::ONE,
        _ => linalg::ZERO,
    });
    Ok(Metric { n, matrix })
}

/// `G M` computed by negating the creator rows.
pub(crate) fn metric_left(m: &ComplexMatrix) -> ComplexMatrix {
    let n = m.nrows() / 2;
    let mut out = m.clone();
    out.rows_mut(n, n).neg_mut();
    out
}

/// `M G` computed by negating the creator columns.
pub(crate) fn metric_right(m: &ComplexMatrix) -> ComplexMatrix {
    let n = m.ncols() / 2;
    let mut out = m.clone();
    out.columns_mut(n, n).neg_mut();
    out
}

/// Mode count of a `2n x 2n` matrix, if it has that shape.
pub(crate) fn mode_count(m: &ComplexMatrix) -> Option<usize> {
    let (r, c) = m.shape();
    (r == c && r >= 2 && r % 2 == 0).then_some(r / 2)
}

/// Residual `||S G S^+ - G||_F`.
pub fn quasi_unitarity_residual(s: &ComplexMatrix) -> f64 {
    let g = metric_right(&linalg::identity(s.nrows()));
    frobenius(&(metric_right(s) * s.adjoint() - g))
}

/// Residual of the block-conjugate layout: `||S21 - conj(S12)|| + ||S22 - conj(S11)||`
/// combined in quadrature.
pub fn block_conjugate_residual(s: &ComplexMatrix) -> f64 {
    let (a, b, c, d) = quarters(s);
    let r1 = frobenius(&(c - conj(&b)));
    let r2 = frobenius(&(d - conj(&a)));
    (r1 * r1 + r2 * r2).sqrt()
}

/// Residual `||K G + G K^+||_F`.
pub fn lie_residual(k: &ComplexMatrix) -> f64 {
    frobenius(&(metric_right(k) + metric_left(&k.adjoint())))
}

/// Deviation from `(A D; conj(D) conj(A))` with antihermitian `A` and
/// symmetric `D`.
pub fn physical_form_residual(k: &ComplexMatrix) -> f64 {
    let (a, d, c, b) = quarters(k);
    let parts = [
        frobenius(&(&a + a.adjoint())),
        frobenius(&(&d - d.transpose())),
        frobenius(&(c - conj(&d))),
        frobenius(&(b - conj(&a))),
    ];
    parts.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FormClass {
    /// Satisfies the Lie condition only.
    L0,
    /// Satisfies the Lie condition and has the physical block layout.
    L,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
}

impl Residual {
    fn new(name: &str, value: f64, threshold: f64) -> Self {
        Residual {
            name: name.to_string(),
            value,
            threshold,
        }
    }

    pub fn ok(&self) -> bool {
        self.value <= self.threshold
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub passed: bool,
    /// Mode count; 0 when the shape is not `2n x 2n`.
    pub n: usize,
    pub dimension_ok: bool,
    pub residuals: Vec<Residual>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub form_class: Option<FormClass>,
}

impl ValidationReport {
    pub fn residual(&self, name: &str) -> Option<f64> {
        self.residuals.iter().find(|r| r.name == name).map(|r| r.value)
    }

    pub fn summary(&self) -> String {
        if !self.dimension_ok {
            return "shape is not 2n x 2n".into();
        }
        let parts: Vec<String> = self
            .residuals
            .iter()
            .map(|r| format!("{}={:.3e}/{:.1e}", r.name, r.value, r.threshold))
            .collect();
        parts.join(", ")
    }

    fn bad_shape() -> Self {
        ValidationReport {
            passed: false,
            n: 0,
            dimension_ok: false,
            residuals: Vec::new(),
            form_class: None,
        }
    }
}

pub const BLOCK_STRUCTURE: &str = "block_structure";
pub const QUASI_UNITARITY: &str = "quasi_unitarity";
pub const LIE: &str = "lie";
pub const PHYSICAL_FORM: &str = "physical_form";

/// Checks shape, block-conjugate layout and quasi-unitarity. Mathematical
/// failures land in the report; only non-finite input is an error.
pub fn validate_scattering(m: &ComplexMatrix, tol: f64) -> Result<ValidationReport> {
    linalg::ensure_tolerance(tol)?;
    linalg::ensure_finite(m)?;
    let Some(n) = mode_count(m) else {
        return Ok(ValidationReport::bad_shape());
    };
    let norm = frobenius(m);
    let residuals = vec![
        Residual::new(BLOCK_STRUCTURE, block_conjugate_residual(m), tol * norm.max(1.0)),
        Residual::new(
            QUASI_UNITARITY,
            quasi_unitarity_residual(m),
            tol * (norm * norm).max(1.0),
        ),
    ];
    Ok(ValidationReport {
        passed: residuals.iter().all(Residual::ok),
        n,
        dimension_ok: true,
        residuals,
        form_class: None,
    })
}

/// Checks the Lie condition and, separately, the physical block layout.
pub fn validate_generator(k: &ComplexMatrix, tol: f64) -> Result<ValidationReport> {
    linalg::ensure_tolerance(tol)?;
    linalg::ensure_finite(k)?;
    let Some(n) = mode_count(k) else {
        return Ok(ValidationReport::bad_shape());
    };
    let threshold = tol * frobenius(k).max(1.0);
    let lie = Residual::new(LIE, lie_residual(k), threshold);
    let form = Residual::new(PHYSICAL_FORM, physical_form_residual(k), threshold);
    let class = match (lie.ok(), form.ok()) {
        (true, true) => FormClass::L,
        (true, false) => FormClass::L0,
        _ => FormClass::None,
    };
    Ok(ValidationReport {
        passed: lie.ok() && form.ok(),
        n,
        dimension_ok: true,
        residuals: vec![lie, form],
        form_class: Some(class),
    })
}

/// A validated element of the quasi-unitary group with block-conjugate layout.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringMatrix {
    n: usize,
    matrix: ComplexMatrix,
    tol: f64,
}

impl ScatteringMatrix {
    pub fn new(matrix: ComplexMatrix, tol: f64) -> Result<Self> {
        let report = validate_scattering(&matrix, tol)?;
        if !report.passed {
            return Err(Error::NotScattering(Box::new(report)));
        }
        Ok(ScatteringMatrix {
            n: report.n,
            matrix,
            tol,
        })
    }

    /// Wraps a matrix known to be exact by construction.
    pub(crate) fn trusted(matrix: ComplexMatrix) -> Self {
        ScatteringMatrix {
            n: matrix.nrows() / 2,
            matrix,
            tol: crate::DEFAULT_TOL,
        }
    }

    pub fn identity(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDimension("mode count must be at least 1".into()));
        }
        Self::new(linalg::identity(2 * n), crate::DEFAULT_TOL)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }
}

/// `G S^+ G`, the group inverse.
pub fn inverse_scattering(s: &ScatteringMatrix) -> ScatteringMatrix {
    ScatteringMatrix {
        n: s.n,
        matrix: metric_left(&metric_right(&s.matrix.adjoint())),
        tol: s.tol,
    }
}

pub fn compose(s1: &ScatteringMatrix, s2: &ScatteringMatrix) -> Result<ScatteringMatrix> {
    if s1.n != s2.n {
        return Err(Error::ModeMismatch {
            left: s1.n,
            right: s2.n,
        });
    }
    ScatteringMatrix::new(&s1.matrix * &s2.matrix, s1.tol.max(s2.tol))
}

/// Block-wise embedding of two networks on disjoint modes. The annihilator
/// half of the result lists the modes of `s1` then `s2`, and so does the
/// creator half.
pub fn direct_sum(s1: &ScatteringMatrix, s2: &ScatteringMatrix) -> ScatteringMatrix {
    let (n1, n2) = (s1.n, s2.n);
    let n = n1 + n2;
    let mut m = ComplexMatrix::zeros(2 * n, 2 * n);
    for (src, offset, size) in [(&s1.matrix, 0, n1), (&s2.matrix, n1, n2)] {
        for (bi, bj) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            let blk = src.view((bi * size, bj * size), (size, size));
            m.view_mut((bi * n + offset, bj * n + offset), (size, size))
                .copy_from(&blk);
        }
    }
    ScatteringMatrix {
        n,
        matrix: m,
        tol: s1.tol.max(s2.tol),
    }
}

/// A matrix tagged with its position relative to the Lie algebra.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    n: usize,
    matrix: ComplexMatrix,
    form_class: FormClass,
}

impl Generator {
    /// Classifies `matrix`; fails only on malformed input.
    pub fn classify(matrix: ComplexMatrix, tol: f64) -> Result<Self> {
        let report = validate_generator(&matrix, tol)?;
        if !report.dimension_ok {
            return Err(Error::InvalidDimension(format!(
                "generator must be 2n x 2n, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Generator {
            n: report.n,
            matrix,
            form_class: report.form_class.unwrap_or(FormClass::None),
        })
    }

    /// Like [`Generator::classify`] but rejects matrices outside the algebra.
    pub fn new(matrix: ComplexMatrix, tol: f64) -> Result<Self> {
        let g = Self::classify(matrix, tol)?;
        if g.form_class == FormClass::None {
            return Err(Error::NotGenerator {
                residual: lie_residual(&g.matrix),
            });
        }
        Ok(g)
    }

    pub fn zero(n: usize) -> Self {
        Generator {
            n,
            matrix: ComplexMatrix::zeros(2 * n, 2 * n),
            form_class: FormClass::L,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn form_class(&self) -> FormClass {
        self.form_class
    }

    pub fn is_lie(&self) -> bool {
        self.form_class != FormClass::None
    }
}
