//! Matrix logarithms of scattering matrices and the decision whether a
//! single effective Hamiltonian exists.
//!
//! [`eig_log`] diagonalizes `S = X diag(lambda) X^-1` and takes principal
//! logarithms. Inputs that are defective, badly conditioned, or have an
//! eigenvalue on the negative real axis are handed to [`jordan_log`], which
//! works on a clustered Schur form instead. [`hamiltonian_log`] runs both
//! and, when the principal logarithm is not a physical generator, searches
//! a small set of alternative branches.

pub mod expm;
mod parlett;

use std::f64::consts::PI;

use serde::Serialize;

use crate::group::{self, FormClass, Generator, ScatteringMatrix};
use crate::linalg::{self, frobenius, ComplexMatrix, C64};
use crate::{Error, Result};

pub use expm::expm;
use parlett::{cluster, SchurLog};

/// Eigenvector condition number above which `S` is treated as defective.
pub const EIGVEC_CONDITION_CUTOFF: f64 = 1e8;
/// Eigenvalues within this multiple of `||S||_F` belong to one cluster.
pub const CLUSTER_RADIUS: f64 = 1e-6;
/// Required `||expm(K) - S||_F / max(1, ||S||_F)` for an accepted logarithm.
pub const RECONSTRUCTION_TOL: f64 = 1e-8;
/// Largest `|k|` tried when shifting a conjugate pair by `(2 pi i k, -2 pi i k)`.
pub const MAX_BRANCH_SHIFT: i32 = 2;
/// Above this many shift vectors only single-pair shifts are tried.
const FULL_SEARCH_LIMIT: usize = 625;

pub(crate) fn two_pi_i(k: i32) -> C64 {
    C64::new(0.0, 2.0 * PI * k as f64)
}

/// Principal logarithm with imaginary part in `(-pi, pi]`; a negative real
/// number carrying round-off in its imaginary part gets `+i pi`.
pub(crate) fn principal_ln(z: C64) -> C64 {
    if z.re < 0.0 && z.im.abs() <= 1e-14 * z.norm() {
        C64::new(z.norm().ln(), PI)
    } else {
        z.ln()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LogPath {
    /// `X ln(Lambda) X^-1`
    Diagonal,
    /// Clustered Schur form with Mercator series on each cluster.
    Jordan,
}

#[derive(Debug, Clone, Serialize)]
pub struct Diagnostics {
    /// Lie residual `||K G + G K^+||_F` of the best candidate tried.
    pub best_lie_residual: f64,
    /// Deviation of the best candidate from the physical block layout.
    pub best_form_residual: f64,
    pub trace: C64,
    pub eigenvalues: Vec<C64>,
    /// Single mode with real trace below -2: no branch of the logarithm can
    /// satisfy the Lie condition.
    pub trace_obstruction: bool,
    pub candidates_tried: usize,
}

#[derive(Debug, Clone)]
pub enum LogOutcome {
    GeneratorFound(Generator),
    NoSingleHamiltonian(Diagnostics),
}

#[derive(Debug, Clone)]
pub struct LogResult {
    pub outcome: LogOutcome,
    /// The logarithm that was returned or, on failure, the best attempt.
    pub logarithm: ComplexMatrix,
    pub path: LogPath,
    pub branch_note: String,
    pub reconstruction_residual: f64,
    /// 2-norm condition number of the unit-column eigenvector matrix.
    pub eigvec_condition: f64,
    /// The diagonal route was rejected because the eigenvector matrix is
    /// numerically singular.
    pub defective: bool,
}

impl LogResult {
    pub fn generator(&self) -> Option<&Generator> {
        match &self.outcome {
            LogOutcome::GeneratorFound(g) => Some(g),
            LogOutcome::NoSingleHamiltonian(_) => None,
        }
    }

    pub fn diagnostics(&self) -> Option<&Diagnostics> {
        match &self.outcome {
            LogOutcome::GeneratorFound(_) => None,
            LogOutcome::NoSingleHamiltonian(d) => Some(d),
        }
    }
}

fn reconstruction_residual(s: &ComplexMatrix, k: &ComplexMatrix) -> f64 {
    frobenius(&(expm::expm_unchecked(k) - s))
}

fn reconstruction_ok(s: &ComplexMatrix, residual: f64) -> bool {
    residual <= RECONSTRUCTION_TOL * frobenius(s).max(1.0)
}

/// Eigen-decomposition with clusters, shared by the diagonal route and the
/// branch search.
struct Diagonal {
    values: Vec<C64>,
    vectors: ComplexMatrix,
    condition: f64,
    clusters: Vec<Vec<usize>>,
    means: Vec<C64>,
}

impl Diagonal {
    fn new(s: &ComplexMatrix, radius: f64) -> Self {
        let e = linalg::eig(s);
        let condition = linalg::condition(&e.vectors);
        let clusters = cluster(&e.values, radius);
        let means = clusters
            .iter()
            .map(|m| m.iter().map(|&i| e.values[i]).sum::<C64>() / m.len() as f64)
            .collect();
        Diagonal {
            values: e.values,
            vectors: e.vectors,
            condition,
            clusters,
            means,
        }
    }

    fn negative_real(&self, radius: f64) -> Vec<usize> {
        (0..self.means.len())
            .filter(|&c| is_negative_real(self.means[c], radius))
            .collect()
    }

    /// `X diag(ln lambda + 2 pi i shift) X^-1`. With `split_negative`, every
    /// negative real cluster has its eigenspace re-based along the sign of
    /// the metric form `x^+ G x`, taking `+i pi` on the positive part and
    /// `-i pi` on the negative part. Returns `None` when that form is
    /// degenerate on some negative eigenspace.
    fn log(&self, shifts: &[i32], split_negative: &[usize]) -> Option<ComplexMatrix> {
        let mut vectors = self.vectors.clone();
        let mut logs: Vec<C64> = vec![C64::new(0.0, 0.0); self.values.len()];
        for (c, members) in self.clusters.iter().enumerate() {
            for &i in members {
                logs[i] = principal_ln(self.values[i]) + two_pi_i(shifts[c]);
            }
        }
        for &c in split_negative {
            let members = &self.clusters[c];
            let basis = ComplexMatrix::from_columns(
                &members.iter().map(|&i| self.vectors.column(i)).collect::<Vec<_>>(),
            );
            let q = basis.qr().q();
            let form = q.adjoint() * group::metric_left(&q);
            let (signs, w) = linalg::hermitian_eig(&form);
            if signs.iter().any(|v| v.abs() < 1e-6) {
                return None;
            }
            let rebased = q * w;
            let modulus = self.means[c].norm().ln();
            for (slot, (&i, &sign)) in members.iter().zip(signs.iter()).enumerate() {
                vectors.set_column(i, &rebased.column(slot));
                logs[i] = C64::new(modulus, PI * sign.signum());
            }
        }
        let scaled = ComplexMatrix::from_fn(vectors.nrows(), vectors.ncols(), |r, c| {
            vectors[(r, c)] * logs[c]
        });
        // K = X L X^-1  <=>  X^T K^T = (X L)^T
        let kt = vectors.transpose().lu().solve(&scaled.transpose())?;
        Some(kt.transpose())
    }
}

fn is_negative_real(z: C64, radius: f64) -> bool {
    z.re < 0.0 && z.im.abs() <= radius
}

fn assemble(
    s: &ScatteringMatrix,
    k: ComplexMatrix,
    path: LogPath,
    branch_note: String,
    tol: f64,
    eig: &Diagonal,
) -> Result<LogResult> {
    let residual = reconstruction_residual(s.matrix(), &k);
    let generator = Generator::classify(k.clone(), tol)?;
    let outcome = if generator.is_lie() && reconstruction_ok(s.matrix(), residual) {
        LogOutcome::GeneratorFound(generator)
    } else {
        LogOutcome::NoSingleHamiltonian(diagnostics(s, &k, eig, 1, tol))
    };
    Ok(LogResult {
        outcome,
        logarithm: k,
        path,
        branch_note,
        reconstruction_residual: residual,
        eigvec_condition: eig.condition,
        defective: eig.condition > EIGVEC_CONDITION_CUTOFF,
    })
}

fn trace_obstruction(s: &ScatteringMatrix, tol: f64) -> bool {
    let tr = s.trace();
    let slack = tol * frobenius(s.matrix()).max(1.0);
    s.n() == 1 && tr.im.abs() <= slack && tr.re < -2.0 - slack
}

fn diagnostics(
    s: &ScatteringMatrix,
    k: &ComplexMatrix,
    eig: &Diagonal,
    tried: usize,
    tol: f64,
) -> Diagnostics {
    Diagnostics {
        best_lie_residual: group::lie_residual(k),
        best_form_residual: group::physical_form_residual(k),
        trace: s.trace(),
        eigenvalues: eig.values.clone(),
        trace_obstruction: trace_obstruction(s, tol),
        candidates_tried: tried,
    }
}

fn check_invertible(s: &ScatteringMatrix, eig: &Diagonal) -> Result<()> {
    let floor = f64::EPSILON * frobenius(s.matrix());
    if eig.values.iter().any(|v| v.norm() <= floor) {
        return Err(Error::InvariantViolation(
            "scattering matrix has a zero eigenvalue".into(),
        ));
    }
    Ok(())
}

fn radius(s: &ScatteringMatrix) -> f64 {
    CLUSTER_RADIUS * frobenius(s.matrix())
}

/// Principal logarithm through diagonalization, deferring to
/// [`jordan_log`] when that route is unsound.
pub fn eig_log(s: &ScatteringMatrix) -> Result<LogResult> {
    eig_log_with(s, s.tol())
}

fn eig_log_with(s: &ScatteringMatrix, tol: f64) -> Result<LogResult> {
    let r = radius(s);
    let eig = Diagonal::new(s.matrix(), r);
    check_invertible(s, &eig)?;
    if eig.condition > EIGVEC_CONDITION_CUTOFF {
        let note = format!(
            "eigenvector condition {:.2e} exceeds {:.0e}; Jordan route",
            eig.condition, EIGVEC_CONDITION_CUTOFF
        );
        return jordan_with(s, tol, &eig, note);
    }
    if !eig.negative_real(r).is_empty() {
        return jordan_with(s, tol, &eig, "negative real eigenvalue; Jordan route".into());
    }
    let shifts = vec![0; eig.clusters.len()];
    let k = eig
        .log(&shifts, &[])
        .ok_or_else(|| Error::InvariantViolation("eigenvector matrix is singular".into()))?;
    assemble(s, k, LogPath::Diagonal, "principal branch".into(), tol, &eig)
}

/// Principal logarithm through a clustered Schur form: each cluster is
/// split into its scalar part and a unipotent remainder.
pub fn jordan_log(s: &ScatteringMatrix) -> Result<LogResult> {
    let eig = Diagonal::new(s.matrix(), radius(s));
    check_invertible(s, &eig)?;
    jordan_with(s, s.tol(), &eig, String::new())
}

fn jordan_with(
    s: &ScatteringMatrix,
    tol: f64,
    eig: &Diagonal,
    prefix: String,
) -> Result<LogResult> {
    let schur = SchurLog::new(s.matrix(), radius(s));
    let k = schur.log(&vec![0; schur.cluster_count()]);
    let note = if prefix.is_empty() {
        "principal branch".to_string()
    } else {
        format!("{prefix}; principal branch")
    };
    assemble(s, k, LogPath::Jordan, note, tol, eig)
}

/// Conjugate cluster pairs `(c, partner)` with `c < partner`.
fn conjugate_pairs(means: &[C64], radius: f64) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for (c, m) in means.iter().enumerate() {
        if m.im.abs() <= radius {
            continue;
        }
        let partner = (0..means.len())
            .filter(|&p| p != c)
            .min_by(|&a, &b| {
                (means[a] - m.conj())
                    .norm()
                    .total_cmp(&(means[b] - m.conj()).norm())
            });
        if let Some(p) = partner {
            if (means[p] - m.conj()).norm() <= 10.0 * radius && c < p {
                pairs.push((c, p));
            }
        }
    }
    pairs
}

/// Shift vectors in lexicographic order.
fn shift_vectors(pairs: usize) -> Vec<Vec<i32>> {
    let width = (2 * MAX_BRANCH_SHIFT + 1) as usize;
    let full = width.checked_pow(pairs as u32).filter(|&c| c <= FULL_SEARCH_LIMIT);
    match full {
        Some(count) => (0..count)
            .map(|mut idx| {
                let mut v = vec![0; pairs];
                for slot in (0..pairs).rev() {
                    v[slot] = (idx % width) as i32 - MAX_BRANCH_SHIFT;
                    idx /= width;
                }
                v
            })
            .collect(),
        None => {
            let mut out = vec![vec![0; pairs]];
            for slot in 0..pairs {
                for k in -MAX_BRANCH_SHIFT..=MAX_BRANCH_SHIFT {
                    if k != 0 {
                        let mut v = vec![0; pairs];
                        v[slot] = k;
                        out.push(v);
                    }
                }
            }
            out.sort();
            out
        }
    }
}

struct Candidate {
    k: ComplexMatrix,
    lie: f64,
    physical: bool,
    reconstructs: bool,
    note: String,
    path: LogPath,
}

fn branch_search(s: &ScatteringMatrix, tol: f64, eig: &Diagonal) -> (Option<Candidate>, usize) {
    let r = radius(s);
    let mut candidates = Vec::new();
    if eig.condition <= EIGVEC_CONDITION_CUTOFF {
        let negative = eig.negative_real(r);
        let pairs = conjugate_pairs(&eig.means, r);
        for pair_shift in shift_vectors(pairs.len()) {
            let mut shifts = vec![0; eig.clusters.len()];
            for (&(c, p), &k) in pairs.iter().zip(&pair_shift) {
                shifts[c] = k;
                shifts[p] = -k;
            }
            let (k, split) = match eig.log(&shifts, &negative) {
                Some(k) if !negative.is_empty() => (Some(k), true),
                _ => (eig.log(&shifts, &[]), false),
            };
            if let Some(k) = k {
                let mut note = format!("diagonal route, conjugate-pair shifts {pair_shift:?}");
                if split {
                    note.push_str(", negative eigenspaces split +/- i pi by metric sign");
                }
                candidates.push((k, note, LogPath::Diagonal));
            }
        }
    } else {
        let schur = SchurLog::new(s.matrix(), r);
        let pairs = conjugate_pairs(&schur.means, r);
        for pair_shift in shift_vectors(pairs.len()) {
            let mut shifts = vec![0; schur.cluster_count()];
            for (&(c, p), &k) in pairs.iter().zip(&pair_shift) {
                shifts[c] = k;
                shifts[p] = -k;
            }
            let note = format!("Jordan route, conjugate-pair shifts {pair_shift:?}");
            candidates.push((schur.log(&shifts), note, LogPath::Jordan));
        }
    }
    let tried = candidates.len();
    let best = candidates
        .into_iter()
        .map(|(k, note, path)| {
            let threshold = tol * frobenius(&k).max(1.0);
            let lie = group::lie_residual(&k);
            let physical = lie <= threshold && group::physical_form_residual(&k) <= threshold;
            let reconstructs = reconstruction_ok(s.matrix(), reconstruction_residual(s.matrix(), &k));
            Candidate {
                k,
                lie,
                physical,
                reconstructs,
                note,
                path,
            }
        })
        // Earliest (lexicographically smallest) wins ties.
        .reduce(|best, c| {
            let key = |x: &Candidate| (!x.physical, !x.reconstructs);
            if key(&c) < key(&best) || (key(&c) == key(&best) && c.lie < best.lie) {
                c
            } else {
                best
            }
        });
    (best, tried)
}

/// Finds a logarithm of `S` in the physical Lie algebra, or reports that
/// none exists within the branch policy.
pub fn hamiltonian_log(s: &ScatteringMatrix, tol: f64) -> Result<LogResult> {
    linalg::ensure_tolerance(tol)?;
    let base = eig_log_with(s, tol)?;
    let physical = base
        .generator()
        .is_some_and(|g| g.form_class() == FormClass::L);
    if physical && !trace_obstruction(s, tol) {
        return Ok(base);
    }
    let eig = Diagonal::new(s.matrix(), radius(s));
    let (best, tried) = branch_search(s, tol, &eig);
    let tried = tried + 1;
    let obstruction = trace_obstruction(s, tol);
    if let Some(c) = best {
        if c.physical && c.reconstructs && !obstruction {
            let residual = reconstruction_residual(s.matrix(), &c.k);
            let generator = Generator::classify(c.k.clone(), tol)?;
            return Ok(LogResult {
                outcome: LogOutcome::GeneratorFound(generator),
                logarithm: c.k,
                path: c.path,
                branch_note: c.note,
                reconstruction_residual: residual,
                eigvec_condition: eig.condition,
                defective: eig.condition > EIGVEC_CONDITION_CUTOFF,
            });
        }
        let base_lie = group::lie_residual(&base.logarithm);
        let (k, note, path) = if c.lie < base_lie {
            (c.k, c.note, c.path)
        } else {
            (base.logarithm.clone(), base.branch_note.clone(), base.path)
        };
        let mut diag = diagnostics(s, &k, &eig, tried, tol);
        diag.trace_obstruction = obstruction;
        return Ok(LogResult {
            outcome: LogOutcome::NoSingleHamiltonian(diag),
            reconstruction_residual: reconstruction_residual(s.matrix(), &k),
            logarithm: k,
            path,
            branch_note: format!("{note}; no branch within policy satisfies the Lie condition"),
            eigvec_condition: eig.condition,
            defective: eig.condition > EIGVEC_CONDITION_CUTOFF,
        });
    }
    let mut diag = diagnostics(s, &base.logarithm, &eig, tried, tol);
    diag.trace_obstruction = obstruction;
    Ok(LogResult {
        outcome: LogOutcome::NoSingleHamiltonian(diag),
        ..base
    })
}
