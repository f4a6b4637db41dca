//! Truncated Fock-space realization of the mode operators, the effective
//! Hamiltonian and the scattering operator, used to check directly that the
//! operator reproduces the classical mode transformation.
//!
//! With `H_op = 1/2 w^+ H w`, `H = -i G K` and `S_op = exp(-i H_op)` the
//! canonical commutators give `[H_op, w] = -G H w`, so
//! `S_op w S_op^+ = expm(K) w` and `S_op^+ w S_op = expm(-K) w`. The check
//! uses the first form; the second is reported alongside.
//!
//! Basis states `|m_0, ..., m_{n-1}>` with `0 <= m_k <= cutoff` are indexed
//! with mode 0 varying slowest: `index = sum_k m_k (cutoff + 1)^(n - 1 - k)`.

use serde::Serialize;

use crate::group::Generator;
use crate::hamiltonian::{effective_hamiltonian, hermiticity_residual, HamiltonianMatrix};
use crate::linalg::{self, frobenius, ComplexMatrix, C64, ZERO};
use crate::logm::expm;
use crate::{Error, Result};

pub const DEFAULT_BUDGET: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FockSpace {
    n: usize,
    cutoff: usize,
    dim: usize,
}

impl FockSpace {
    pub fn new(n: usize, cutoff: usize) -> Result<Self> {
        Self::with_budget(n, cutoff, DEFAULT_BUDGET)
    }

    pub fn with_budget(n: usize, cutoff: usize, budget: usize) -> Result<Self> {
        if n == 0 || cutoff == 0 {
            return Err(Error::InvalidDimension(
                "Fock space needs at least one mode and cutoff >= 1".into(),
            ));
        }
        let dim = (cutoff + 1)
            .checked_pow(n as u32)
            .filter(|&d| d <= budget)
            .ok_or(Error::BudgetExceeded {
                dim: (cutoff + 1).saturating_pow(n as u32),
                budget,
            })?;
        Ok(FockSpace { n, cutoff, dim })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn stride(&self, mode: usize) -> usize {
        (self.cutoff + 1).pow((self.n - 1 - mode) as u32)
    }

    /// Occupation of `mode` in basis state `index`.
    pub fn occupation(&self, index: usize, mode: usize) -> usize {
        (index / self.stride(mode)) % (self.cutoff + 1)
    }

    pub fn photons(&self, index: usize) -> usize {
        (0..self.n).map(|k| self.occupation(index, k)).sum()
    }

    pub fn index_of(&self, occupations: &[usize]) -> usize {
        occupations
            .iter()
            .enumerate()
            .map(|(k, &m)| m * self.stride(k))
            .sum()
    }

    /// Basis indices with total photon number `<= max_photons`.
    pub fn window(&self, max_photons: usize) -> Vec<usize> {
        (0..self.dim).filter(|&i| self.photons(i) <= max_photons).collect()
    }

    /// `a_mode |index>` as `(target, amplitude)`; `None` for the vacuum of
    /// that mode.
    fn lower(&self, index: usize, mode: usize) -> Option<(usize, f64)> {
        let m = self.occupation(index, mode);
        (m > 0).then(|| (index - self.stride(mode), (m as f64).sqrt()))
    }

    /// `a_mode^+ |index>`; `None` at the cutoff.
    fn raise(&self, index: usize, mode: usize) -> Option<(usize, f64)> {
        let m = self.occupation(index, mode);
        (m < self.cutoff).then(|| (index + self.stride(mode), ((m + 1) as f64).sqrt()))
    }

    /// Applies ladder operator `component` of the stacked vector
    /// `(a_0..a_{n-1}, a_0^+..a_{n-1}^+)`.
    fn ladder(&self, index: usize, component: usize) -> Option<(usize, f64)> {
        if component < self.n {
            self.lower(index, component)
        } else {
            self.raise(index, component - self.n)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    space: FockSpace,
    matrix: ComplexMatrix,
}

impl FockOperator {
    pub fn new(space: FockSpace, matrix: ComplexMatrix) -> Result<Self> {
        if matrix.shape() != (space.dim, space.dim) {
            return Err(Error::InvalidDimension(format!(
                "operator must be {0}x{0}, got {1}x{2}",
                space.dim,
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(FockOperator { space, matrix })
    }

    pub fn identity(space: FockSpace) -> Self {
        FockOperator {
            space,
            matrix: linalg::identity(space.dim),
        }
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn adjoint(&self) -> Self {
        FockOperator {
            space: self.space,
            matrix: self.matrix.adjoint(),
        }
    }
}

fn ladder_matrix(space: &FockSpace, component: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(space.dim, space.dim);
    for col in 0..space.dim {
        if let Some((row, amp)) = space.ladder(col, component) {
            m[(row, col)] = C64::new(amp, 0.0);
        }
    }
    m
}

pub fn annihilation_op(space: &FockSpace, mode: usize) -> Result<FockOperator> {
    if mode >= space.n {
        return Err(Error::ModeOutOfRange { mode, n: space.n });
    }
    Ok(FockOperator {
        space: *space,
        matrix: ladder_matrix(space, mode),
    })
}

pub fn creation_op(space: &FockSpace, mode: usize) -> Result<FockOperator> {
    annihilation_op(space, mode).map(|a| a.adjoint())
}

/// Total photon number, diagonal in the basis.
pub fn number_op(space: &FockSpace) -> FockOperator {
    let diag = nalgebra::DVector::from_iterator(
        space.dim,
        (0..space.dim).map(|i| C64::new(space.photons(i) as f64, 0.0)),
    );
    FockOperator {
        space: *space,
        matrix: ComplexMatrix::from_diagonal(&diag),
    }
}

/// The quadratic form `1/2 sum_{jk} w_j^+ H_{jk} w_k` with
/// `w = (a; a^+)` and `w^+ = (a^+, a)`, expanded term by term in exactly
/// that operator order.
pub fn hamiltonian_operator(h: &HamiltonianMatrix, space: &FockSpace) -> Result<FockOperator> {
    let n = space.n;
    if h.n() != n {
        return Err(Error::ModeMismatch {
            left: h.n(),
            right: n,
        });
    }
    let residual = hermiticity_residual(h.matrix());
    if residual > 1e-10 * frobenius(h.matrix()).max(1.0) {
        return Err(Error::NotHermitian { residual });
    }
    let hm = h.matrix();
    let mut out = ComplexMatrix::zeros(space.dim, space.dim);
    for col in 0..space.dim {
        for k in 0..2 * n {
            // w_k |col>
            let Some((mid, amp_k)) = space.ladder(col, k) else {
                continue;
            };
            for j in 0..2 * n {
                let coeff = hm[(j, k)];
                if coeff == ZERO {
                    continue;
                }
                // (w^+)_j is a_j^+ for j < n and a_{j-n} for j >= n, which is
                // ladder component (j + n) mod 2n.
                let Some((row, amp_j)) = space.ladder(mid, (j + n) % (2 * n)) else {
                    continue;
                };
                out[(row, col)] += coeff * (0.5 * amp_j * amp_k);
            }
        }
    }
    Ok(FockOperator {
        space: *space,
        matrix: out,
    })
}

/// `exp(-i H_K)` on the truncated space.
pub fn scattering_operator(k: &Generator, space: &FockSpace) -> Result<FockOperator> {
    let h = hamiltonian_operator(&effective_hamiltonian(k)?, space)?;
    let matrix = expm(&(h.matrix * C64::new(0.0, -1.0)))?;
    Ok(FockOperator {
        space: *space,
        matrix,
    })
}

/// Composition order of per-factor scattering operators for
/// `S = expm(K_1) ... expm(K_m)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProductOrder {
    /// `S_op = S_{K_m} ... S_{K_1}`: the operator of the last matrix factor
    /// is the leftmost.
    Reversed,
    /// `S_op = S_{K_1} ... S_{K_m}`.
    Forward,
}

/// Scattering operator of `expm(K_1) ... expm(K_m)`, composed as
/// `S_{K_m} ... S_{K_1}`.
pub fn product_operator(ks: &[Generator], space: &FockSpace) -> Result<FockOperator> {
    product_operator_ordered(ks, space, ProductOrder::Reversed)
}

pub fn product_operator_ordered(
    ks: &[Generator],
    space: &FockSpace,
    order: ProductOrder,
) -> Result<FockOperator> {
    let ops: Vec<FockOperator> = ks
        .iter()
        .map(|k| {
            if k.n() != space.n {
                return Err(Error::ModeMismatch {
                    left: k.n(),
                    right: space.n,
                });
            }
            scattering_operator(k, space)
        })
        .collect::<Result<_>>()?;
    let mut acc = linalg::identity(space.dim);
    match order {
        ProductOrder::Reversed => {
            for op in ops.iter().rev() {
                acc *= &op.matrix;
            }
        }
        ProductOrder::Forward => {
            for op in &ops {
                acc *= &op.matrix;
            }
        }
    }
    Ok(FockOperator {
        space: *space,
        matrix: acc,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct HeisenbergReport {
    /// Largest `|S w - S_op w S_op^+|` over components and window elements.
    pub residual: f64,
    /// Per-component maxima, annihilators first.
    pub component_residuals: Vec<f64>,
    /// Same comparison against `S_op^+ w S_op`.
    pub adjoint_conjugation_residual: f64,
    /// `||(S_op^+ S_op - 1) P||_F` with `P` the window projector.
    pub unitarity_residual: f64,
    pub cutoff: usize,
    pub max_photons: usize,
    pub window_size: usize,
}

fn check_guard(space: &FockSpace, max_photons: usize) -> Result<()> {
    if max_photons + 2 > space.cutoff {
        return Err(Error::GuardBand {
            max_photons,
            cutoff: space.cutoff,
        });
    }
    Ok(())
}

/// Applies ladder component `c` to the columns of `m` (rows are basis
/// states).
fn apply_ladder(space: &FockSpace, component: usize, m: &ComplexMatrix) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(m.nrows(), m.ncols());
    for src in 0..space.dim {
        if let Some((dst, amp)) = space.ladder(src, component) {
            let row = m.row(src) * C64::new(amp, 0.0);
            let mut target = out.row_mut(dst);
            target += row;
        }
    }
    out
}

/// `max_i max |(S w)_i - U^+ w_i U|` on the window, where `cols` holds the
/// columns of `U` belonging to the window.
fn conjugation_residuals(
    space: &FockSpace,
    s: &ComplexMatrix,
    plain: &[ComplexMatrix],
    cols: &ComplexMatrix,
) -> Vec<f64> {
    (0..2 * space.n)
        .map(|i| {
            let mut lhs = ComplexMatrix::zeros(cols.ncols(), cols.ncols());
            for (j, w) in plain.iter().enumerate() {
                if s[(i, j)] != ZERO {
                    lhs += w * s[(i, j)];
                }
            }
            let rhs = cols.adjoint() * apply_ladder(space, i, cols);
            linalg::max_abs(&(lhs - rhs))
        })
        .collect()
}

/// Compares `S w` with `op w op^+` on the window of states with at most
/// `max_photons` photons.
pub fn heisenberg_residual(
    s: &ComplexMatrix,
    op: &FockOperator,
    max_photons: usize,
) -> Result<HeisenbergReport> {
    let space = op.space;
    let n = space.n;
    if s.shape() != (2 * n, 2 * n) {
        return Err(Error::InvalidDimension(format!(
            "classical matrix must be {0}x{0} for {n} modes",
            2 * n
        )));
    }
    check_guard(&space, max_photons)?;
    let window = space.window(max_photons);
    let p = window.len();
    let mut proj = ComplexMatrix::zeros(space.dim, p);
    for (slot, &idx) in window.iter().enumerate() {
        proj[(idx, slot)] = C64::new(1.0, 0.0);
    }
    let plain: Vec<ComplexMatrix> = (0..2 * n)
        .map(|c| {
            let full = apply_ladder(&space, c, &proj);
            ComplexMatrix::from_fn(p, p, |r, col| full[(window[r], col)])
        })
        .collect();
    let adj = op.matrix.adjoint();
    let op_cols = &op.matrix * &proj;
    let adj_cols = &adj * &proj;
    let component_residuals = conjugation_residuals(&space, s, &plain, &adj_cols);
    let reverse = conjugation_residuals(&space, s, &plain, &op_cols);
    let unitarity_residual = frobenius(&(&adj * &op_cols - &proj));
    Ok(HeisenbergReport {
        residual: component_residuals.iter().copied().fold(0.0, f64::max),
        component_residuals,
        adjoint_conjugation_residual: reverse.into_iter().fold(0.0, f64::max),
        unitarity_residual,
        cutoff: space.cutoff,
        max_photons,
        window_size: p,
    })
}

/// Heisenberg-relation check for the single exponential `S = expm(K)`.
pub fn heisenberg_check(
    k: &Generator,
    space: &FockSpace,
    max_photons: usize,
) -> Result<HeisenbergReport> {
    check_guard(space, max_photons)?;
    let s = expm(k.matrix())?;
    let op = scattering_operator(k, space)?;
    heisenberg_residual(&s, &op, max_photons)
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceStep {
    pub cutoff: usize,
    pub residual: f64,
}

/// Repeats [`heisenberg_check`] while doubling the cutoff, starting at
/// `cutoff`, until the residual changes by less than 10% or the space
/// budget is exhausted.
pub fn convergence_study(
    k: &Generator,
    n_modes: usize,
    cutoff: usize,
    max_photons: usize,
    max_steps: usize,
) -> Result<Vec<ConvergenceStep>> {
    let mut steps: Vec<ConvergenceStep> = Vec::new();
    let mut c = cutoff;
    for _ in 0..max_steps {
        let Ok(space) = FockSpace::new(n_modes, c) else {
            break;
        };
        let residual = heisenberg_check(k, &space, max_photons)?.residual;
        let settled = steps
            .last()
            .is_some_and(|prev| (prev.residual - residual).abs() < 0.1 * prev.residual.max(f64::MIN_POSITIVE));
        steps.push(ConvergenceStep { cutoff: c, residual });
        if settled {
            break;
        }
        c *= 2;
    }
    Ok(steps)
}
