//! JSON documents shared by the library and the command-line tool.
//!
//! Matrices use `{"n": n, "matrix": [[[re, im], ...], ...]}` with `2n` rows
//! of `2n` entries. Floating-point values are written with 17 significant
//! digits so that a write/read cycle is exact.

use std::io;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::blochmessiah::{Factorization, FactorizationG, FactorizationG0};
use crate::group::{self, FormClass};
use crate::hamiltonian::{hermiticity_residual, HamiltonianMatrix};
use crate::linalg::{ComplexMatrix, C64};
use crate::logm::{Diagnostics, LogOutcome, LogPath, LogResult};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixDoc {
    pub n: usize,
    pub matrix: Vec<Vec<[f64; 2]>>,
}

impl MatrixDoc {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        MatrixDoc {
            n: m.nrows() / 2,
            matrix: (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
                .collect(),
        }
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        let dim = 2 * self.n;
        if self.n == 0 {
            return Err(Error::Format("n must be at least 1".into()));
        }
        if self.matrix.len() != dim {
            return Err(Error::Format(format!(
                "expected {dim} rows for n = {}, got {}",
                self.n,
                self.matrix.len()
            )));
        }
        if let Some((i, row)) = self.matrix.iter().enumerate().find(|(_, r)| r.len() != dim) {
            return Err(Error::Format(format!(
                "row {i} has {} entries, expected {dim}",
                row.len()
            )));
        }
        let m = ComplexMatrix::from_fn(dim, dim, |i, j| {
            let [re, im] = self.matrix[i][j];
            C64::new(re, im)
        });
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(m)
    }
}

/// Reads a bare matrix document.
pub fn parse_matrix(text: &str) -> Result<ComplexMatrix> {
    let doc: MatrixDoc = serde_json::from_str(text)
        .map_err(|e| Error::Format(e.to_string()))?;
    doc.to_matrix()
}

/// Matrices carried by any document this crate writes: a bare matrix, a
/// logarithm result (its generator), or a list (`factors` / `matrices`).
pub fn extract_matrices(value: &Value) -> Result<Vec<ComplexMatrix>> {
    let one = |v: &Value| -> Result<ComplexMatrix> {
        let doc: MatrixDoc =
            serde_json::from_value(v.clone()).map_err(|e| Error::Format(e.to_string()))?;
        doc.to_matrix()
    };
    let obj = value
        .as_object()
        .ok_or_else(|| Error::Format("expected a JSON object".into()))?;
    if obj.contains_key("matrix") {
        return Ok(vec![one(value)?]);
    }
    for key in ["factors", "matrices"] {
        if let Some(list) = obj.get(key) {
            let items = list
                .as_array()
                .ok_or_else(|| Error::Format(format!("\"{key}\" must be an array")))?;
            return items.iter().map(one).collect();
        }
    }
    match obj.get("generator") {
        Some(Value::Null) => Err(Error::Format("document carries no generator".into())),
        Some(g) => Ok(vec![one(g)?]),
        None => Err(Error::Format(
            "expected \"matrix\", \"factors\", \"matrices\" or \"generator\"".into(),
        )),
    }
}

/// Like [`extract_matrices`] but requires exactly one matrix.
pub fn extract_matrix(value: &Value) -> Result<ComplexMatrix> {
    let mut all = extract_matrices(value)?;
    if all.len() != 1 {
        return Err(Error::Format(format!("expected one matrix, found {}", all.len())));
    }
    Ok(all.remove(0))
}

struct Precise;

impl serde_json::ser::Formatter for Precise {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }
}

/// Compact JSON with every float at 17 significant digits, newline
/// terminated. Non-finite floats become `null`.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Precise);
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeTag {
    GeneratorFound,
    NoSingleHamiltonian,
}

#[derive(Debug, Clone, Serialize)]
pub struct LogDoc {
    pub outcome: OutcomeTag,
    pub generator: Option<MatrixDoc>,
    pub form_class: Option<FormClass>,
    pub logarithm: MatrixDoc,
    pub path: LogPath,
    pub branch_note: String,
    pub reconstruction_residual: f64,
    pub lie_residual: f64,
    pub eigvec_condition: f64,
    pub defective: bool,
    pub diagnostics: Option<Diagnostics>,
}

impl From<&LogResult> for LogDoc {
    fn from(r: &LogResult) -> Self {
        let (outcome, generator, form_class, diagnostics) = match &r.outcome {
            LogOutcome::GeneratorFound(k) => (
                OutcomeTag::GeneratorFound,
                Some(MatrixDoc::from_matrix(k.matrix())),
                Some(k.form_class()),
                None,
            ),
            LogOutcome::NoSingleHamiltonian(d) => {
                (OutcomeTag::NoSingleHamiltonian, None, None, Some(d.clone()))
            }
        };
        LogDoc {
            outcome,
            generator,
            form_class,
            logarithm: MatrixDoc::from_matrix(&r.logarithm),
            path: r.path,
            branch_note: r.branch_note.clone(),
            reconstruction_residual: r.reconstruction_residual,
            lie_residual: group::lie_residual(&r.logarithm),
            eigvec_condition: r.eigvec_condition,
            defective: r.defective,
            diagnostics,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HamiltonianDoc {
    pub n: usize,
    pub matrix: Vec<Vec<[f64; 2]>>,
    pub hermitian: bool,
    pub hermiticity_residual: f64,
}

impl From<&HamiltonianMatrix> for HamiltonianDoc {
    fn from(h: &HamiltonianMatrix) -> Self {
        let MatrixDoc { n, matrix } = MatrixDoc::from_matrix(h.matrix());
        HamiltonianDoc {
            n,
            matrix,
            hermitian: true,
            hermiticity_residual: hermiticity_residual(h.matrix()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    G0,
    G,
}

#[derive(Debug, Clone, Serialize)]
pub struct FactorizationDoc {
    pub variant: Variant,
    /// Generators `K1, K2, K3` with `S = expm(K1) expm(K2) expm(K3)`.
    pub factors: Vec<MatrixDoc>,
    pub d: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<f64>>,
    pub reconstruction_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v1_unitarity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u2_unitarity: Option<f64>,
}

fn factor_docs(f: &impl Factorization) -> Vec<MatrixDoc> {
    f.factors()
        .iter()
        .map(|k| MatrixDoc::from_matrix(k.matrix()))
        .collect()
}

impl From<&FactorizationG> for FactorizationDoc {
    fn from(f: &FactorizationG) -> Self {
        FactorizationDoc {
            variant: Variant::G,
            factors: factor_docs(f),
            d: f.d.clone(),
            q: Some(f.q.clone()),
            reconstruction_residual: f.reconstruction_residual,
            perturbation: f.perturbation,
            v1_unitarity: None,
            u2_unitarity: None,
        }
    }
}

impl From<&FactorizationG0> for FactorizationDoc {
    fn from(f: &FactorizationG0) -> Self {
        FactorizationDoc {
            variant: Variant::G0,
            factors: factor_docs(f),
            d: f.d.clone(),
            q: None,
            reconstruction_residual: f.reconstruction_residual,
            perturbation: None,
            v1_unitarity: Some(f.v1_unitarity),
            u2_unitarity: Some(f.u2_unitarity),
        }
    }
}

/// An ordered list of matrices.
#[derive(Debug, Clone, Serialize)]
pub struct MatrixListDoc {
    pub matrices: Vec<MatrixDoc>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elements;
    use crate::logm::hamiltonian_log;

    #[test]
    fn write_read_is_exact() {
        let s = elements::compensated_tap(0.7).unwrap();
        let text = to_json(&MatrixDoc::from_matrix(s.matrix())).unwrap();
        assert!(text.ends_with('\n'));
        assert_eq!(&parse_matrix(&text).unwrap(), s.matrix());
        let third = C64::new(1.0 / 3.0, -0.1);
        let m = ComplexMatrix::from_element(2, 2, third);
        assert_eq!(parse_matrix(&to_json(&MatrixDoc::from_matrix(&m)).unwrap()).unwrap(), m);
    }

    #[test]
    fn seventeen_digits() {
        let text = to_json(&[0.1f64]).unwrap();
        assert_eq!(text, "[1.0000000000000001e-1]\n");
    }

    #[test]
    fn rejects_malformed() {
        let ragged = r#"{"n":1,"matrix":[[[1,0],[0,0]],[[0,0]]]}"#;
        assert!(matches!(parse_matrix(ragged), Err(Error::Format(_))));
        let short = r#"{"n":2,"matrix":[[[1,0],[0,0]],[[0,0],[1,0]]]}"#;
        assert!(matches!(parse_matrix(short), Err(Error::Format(_))));
        let not_pair = r#"{"n":1,"matrix":[[[1,0,0],[0,0]],[[0,0],[1,0]]]}"#;
        assert!(parse_matrix(not_pair).is_err());
        let huge = r#"{"n":1,"matrix":[[[1e999,0],[0,0]],[[0,0],[1,0]]]}"#;
        assert!(parse_matrix(huge).is_err());
        assert!(parse_matrix("[1, 2]").is_err());
        assert!(matches!(
            parse_matrix(r#"{"n":0,"matrix":[]}"#),
            Err(Error::Format(_))
        ));
    }

    #[test]
    fn log_document_tags() {
        let found = hamiltonian_log(&elements::beam_splitter(0.3), 1e-10).unwrap();
        let v: Value = serde_json::from_str(&to_json(&LogDoc::from(&found)).unwrap()).unwrap();
        assert_eq!(v["outcome"], "generator_found");
        assert_eq!(extract_matrix(&v).unwrap(), found.generator().unwrap().matrix().clone());

        let none = hamiltonian_log(&elements::squeezer_pi(0.3), 1e-10).unwrap();
        let v: Value = serde_json::from_str(&to_json(&LogDoc::from(&none)).unwrap()).unwrap();
        assert_eq!(v["outcome"], "no_single_hamiltonian");
        assert!(v["generator"].is_null());
        assert!(extract_matrix(&v).is_err());
        let tr = &v["diagnostics"]["trace"];
        assert!((tr[0].as_f64().unwrap() + 2.0 * 0.3f64.cosh()).abs() < 1e-12);
    }

    #[test]
    fn factor_list_extraction() {
        let f = crate::blochmessiah::factorize_g(&elements::parametric_amplifier(0.4)).unwrap();
        let v: Value = serde_json::from_str(&to_json(&FactorizationDoc::from(&f)).unwrap()).unwrap();
        assert_eq!(v["variant"], "g");
        assert_eq!(extract_matrices(&v).unwrap().len(), 3);
    }
}
