//! Logarithm through a reordered Schur form (block Schur-Parlett).
//!
//! Eigenvalues closer than the cluster radius are gathered into contiguous
//! diagonal blocks. On each block `T = mu (1 + N)` with `mu` the mean
//! eigenvalue: the scalar part gets the principal logarithm (plus any
//! requested `2 pi i` shift) and `log(1 + N)` is summed as a Mercator
//! series, which terminates when `N` is nilpotent. Off-diagonal blocks come
//! from the Parlett commutation recurrence `T F = F T`.

use crate::linalg::{ComplexMatrix, C64, ZERO};

use super::{principal_ln, two_pi_i};

/// Single-linkage clusters of `values` at distance `radius`, in order of
/// first appearance.
pub(crate) fn cluster(values: &[C64], radius: f64) -> Vec<Vec<usize>> {
    let mut label: Vec<usize> = (0..values.len()).collect();
    fn root(label: &mut [usize], mut i: usize) -> usize {
        while label[i] != i {
            label[i] = label[label[i]];
            i = label[i];
        }
        i
    }
    for i in 0..values.len() {
        for j in (i + 1)..values.len() {
            if (values[i] - values[j]).norm() <= radius {
                let (ri, rj) = (root(&mut label, i), root(&mut label, j));
                if ri != rj {
                    label[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
    for i in 0..values.len() {
        let r = root(&mut label, i);
        match groups.iter_mut().find(|(id, _)| *id == r) {
            Some((_, members)) => members.push(i),
            None => groups.push((r, vec![i])),
        }
    }
    groups.into_iter().map(|(_, m)| m).collect()
}

/// Swaps diagonal entries `k` and `k + 1` of the upper-triangular `t`,
/// updating the unitary `q` so that `q t q^+` is unchanged.
fn swap_adjacent(t: &mut ComplexMatrix, q: &mut ComplexMatrix, k: usize) {
    let (a, b, x) = (t[(k, k)], t[(k + 1, k + 1)], t[(k, k + 1)]);
    let (v0, v1) = (x, b - a);
    let norm = (v0.norm_sqr() + v1.norm_sqr()).sqrt();
    if norm == 0.0 {
        return;
    }
    let (v0, v1) = (v0 / norm, v1 / norm);
    let z = ComplexMatrix::from_row_slice(2, 2, &[v0, -v1.conj(), v1, v0.conj()]);
    let rows = z.adjoint() * t.rows(k, 2);
    t.rows_mut(k, 2).copy_from(&rows);
    let cols = t.columns(k, 2) * &z;
    t.columns_mut(k, 2).copy_from(&cols);
    let qcols = q.columns(k, 2) * &z;
    q.columns_mut(k, 2).copy_from(&qcols);
    t[(k + 1, k)] = ZERO;
}

/// Reorders the Schur form so every cluster occupies a contiguous diagonal
/// range. Returns the block boundaries `(start, len, cluster index)`.
fn group_blocks(
    t: &mut ComplexMatrix,
    q: &mut ComplexMatrix,
    radius: f64,
) -> Vec<(usize, usize, usize)> {
    let dim = t.nrows();
    let diag: Vec<C64> = (0..dim).map(|k| t[(k, k)]).collect();
    let clusters = cluster(&diag, radius);
    let mut id = vec![0usize; dim];
    for (c, members) in clusters.iter().enumerate() {
        for &m in members {
            id[m] = c;
        }
    }
    // Stable bubble sort by cluster id using unitary swaps.
    for pass in 0..dim {
        let mut swapped = false;
        for k in 0..dim.saturating_sub(1 + pass) {
            if id[k] > id[k + 1] {
                swap_adjacent(t, q, k);
                id.swap(k, k + 1);
                swapped = true;
            }
        }
        if !swapped {
            break;
        }
    }
    let mut blocks = Vec::new();
    let mut start = 0;
    while start < dim {
        let mut end = start + 1;
        while end < dim && id[end] == id[start] {
            end += 1;
        }
        blocks.push((start, end - start, id[start]));
        start = end;
    }
    blocks
}

/// Solves `a x - x b = r` for upper-triangular `a`, `b` with disjoint spectra.
fn sylvester_triangular(a: &ComplexMatrix, b: &ComplexMatrix, r: &ComplexMatrix) -> ComplexMatrix {
    let (p, q) = r.shape();
    let mut x = ComplexMatrix::zeros(p, q);
    for c in 0..q {
        let mut rhs = r.column(c).into_owned();
        for l in 0..c {
            rhs += x.column(l) * b[(l, c)];
        }
        let shift = b[(c, c)];
        for i in (0..p).rev() {
            let mut acc = rhs[i];
            for j in (i + 1)..p {
                acc -= a[(i, j)] * x[(j, c)];
            }
            x[(i, c)] = acc / (a[(i, i)] - shift);
        }
    }
    x
}

/// Logarithm of a diagonal block whose eigenvalues are clustered around
/// their mean.
fn block_log(t: &ComplexMatrix, shift: i32) -> ComplexMatrix {
    let m = t.nrows();
    let mu = t.trace() / m as f64;
    let id = ComplexMatrix::identity(m, m);
    let n = t / mu - &id;
    let mut series = ComplexMatrix::zeros(m, m);
    let mut power = id.clone();
    for k in 1..=200 {
        power = &power * &n;
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        let term = &power * C64::new(sign / k as f64, 0.0);
        let tn = term.norm();
        series += term;
        if tn <= f64::EPSILON * 1e-2 * series.norm().max(1.0) {
            break;
        }
    }
    id * (principal_ln(mu) + two_pi_i(shift)) + series
}

/// Precomputed reordered Schur form; logarithms for different branch
/// shifts reuse it.
pub(crate) struct SchurLog {
    q: ComplexMatrix,
    t: ComplexMatrix,
    blocks: Vec<(usize, usize, usize)>,
    /// Mean eigenvalue of each cluster, indexed by cluster id.
    pub(crate) means: Vec<C64>,
}

impl SchurLog {
    pub(crate) fn new(s: &ComplexMatrix, radius: f64) -> Self {
        let (mut q, mut t) = crate::linalg::schur(s);
        let blocks = group_blocks(&mut t, &mut q, radius);
        let mut means = vec![ZERO; blocks.len()];
        for &(start, len, id) in &blocks {
            let sum: C64 = (start..start + len).map(|k| t[(k, k)]).sum();
            means[id] = sum / len as f64;
        }
        SchurLog { q, t, blocks, means }
    }

    pub(crate) fn cluster_count(&self) -> usize {
        self.blocks.len()
    }

    /// Logarithm with `shifts[c]` multiples of `2 pi i` added on cluster `c`.
    pub(crate) fn log(&self, shifts: &[i32]) -> ComplexMatrix {
        let dim = self.t.nrows();
        let mut f = ComplexMatrix::zeros(dim, dim);
        let view = |m: &ComplexMatrix, bi: usize, bj: usize| {
            let (si, li, _) = self.blocks[bi];
            let (sj, lj, _) = self.blocks[bj];
            m.view((si, sj), (li, lj)).into_owned()
        };
        for (bi, &(start, len, id)) in self.blocks.iter().enumerate() {
            let tb = view(&self.t, bi, bi);
            f.view_mut((start, start), (len, len))
                .copy_from(&block_log(&tb, shifts[id]));
        }
        let nb = self.blocks.len();
        for bj in 1..nb {
            for bi in (0..bj).rev() {
                let tii = view(&self.t, bi, bi);
                let tjj = view(&self.t, bj, bj);
                let tij = view(&self.t, bi, bj);
                let mut rhs = view(&f, bi, bi) * &tij - &tij * view(&f, bj, bj);
                for bk in (bi + 1)..bj {
                    rhs += view(&f, bi, bk) * view(&self.t, bk, bj)
                        - view(&self.t, bi, bk) * view(&f, bk, bj);
                }
                let x = sylvester_triangular(&tii, &tjj, &rhs);
                let (si, li, _) = self.blocks[bi];
                let (sj, lj, _) = self.blocks[bj];
                f.view_mut((si, sj), (li, lj)).copy_from(&x);
            }
        }
        &self.q * f * self.q.adjoint()
    }
}
