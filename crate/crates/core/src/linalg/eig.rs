//! Hermitian eigendecomposition by cyclic Jacobi rotations.

use std::cmp::Ordering;

use super::matrix::{CMatrix, C64, ZERO};
use crate::error::{Error, Result};

/// Relative Hermitian defect tolerated before symmetrizing.
const HERMITIAN_TOL: f64 = 1e-12;
/// Off-diagonal Frobenius norm target, relative to `||a||_F`.
const OFFDIAG_TOL: f64 = 1e-13;
const MAX_SWEEPS: usize = 100;

/// Eigenvalues sorted descending with orthonormal eigenvectors.
#[derive(Debug, Clone)]
pub struct EigSystem {
    pub values: Vec<f64>,
    /// `vectors[i]` belongs to `values[i]`.
    pub vectors: Vec<Vec<C64>>,
}

impl EigSystem {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Largest absolute eigenvalue, i.e. the operator norm.
    pub fn spectral_radius(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Columns `range` of the eigenvector matrix.
    pub fn basis(&self, range: std::ops::Range<usize>) -> CMatrix {
        let n = self.dim();
        CMatrix::from_fn(n, range.len(), |i, j| self.vectors[range.start + j][i])
    }
}

/// Eigenvalues only; skips nothing, but callers that never touch the
/// vectors read better with this name.
pub fn hermitian_eigenvalues(a: &CMatrix) -> Result<Vec<f64>> {
    hermitian_eig(a).map(|e| e.values)
}

pub fn hermitian_eig(a: &CMatrix) -> Result<EigSystem> {
    if !a.is_square() {
        return Err(Error::Dimension {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let n = a.rows();
    if n == 0 {
        return Err(Error::Empty);
    }
    let norm = a.frobenius_norm();
    let defect = a.hermitian_defect();
    if defect > HERMITIAN_TOL * norm.max(f64::MIN_POSITIVE) && defect > 0.0 {
        return Err(Error::NotHermitian { defect });
    }
    let mut m = a.hermitian_part();
    let mut v = CMatrix::identity(n);
    jacobi_sweeps(&mut m, &mut v, norm);

    let mut pairs: Vec<(f64, Vec<C64>)> = (0..n)
        .map(|j| {
            let mut col = v.column(j);
            fix_phase(&mut col);
            (m[(j, j)].re, col)
        })
        .collect();
    pairs.sort_by(|x, y| match y.0.total_cmp(&x.0) {
        Ordering::Equal => lexicographic(&x.1, &y.1),
        o => o,
    });
    let (values, vectors) = pairs.into_iter().unzip();
    Ok(EigSystem { values, vectors })
}

fn jacobi_sweeps(m: &mut CMatrix, v: &mut CMatrix, norm: f64) {
    let n = m.rows();
    let target = OFFDIAG_TOL * norm;
    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(m) <= target {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(m, v, p, q);
            }
        }
    }
    for i in 0..n {
        m[(i, i)].im = 0.0;
    }
}

fn off_diagonal_norm(m: &CMatrix) -> f64 {
    let n = m.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += m[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Annihilates `m[p][q]` with a unitary rotation in the (p, q) plane.
fn rotate(m: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize) {
    let n = m.rows();
    let apq = m[(p, q)];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    // Phase step: conjugating by diag(.., e^{-i phi} at q, ..) makes m[p][q] real.
    let phase = apq / r;
    let inv = phase.conj();
    for k in 0..n {
        m[(k, q)] *= inv;
        v[(k, q)] *= inv;
    }
    for k in 0..n {
        m[(q, k)] *= phase;
    }
    let app = m[(p, p)].re;
    let aqq = m[(q, q)].re;
    let theta = (aqq - app) / (2.0 * r);
    let t = if theta.is_infinite() {
        0.0
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    for k in 0..n {
        let mkp = m[(k, p)];
        let mkq = m[(k, q)];
        m[(k, p)] = mkp * c - mkq * s;
        m[(k, q)] = mkp * s + mkq * c;
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c - vkq * s;
        v[(k, q)] = vkp * s + vkq * c;
    }
    for k in 0..n {
        let mpk = m[(p, k)];
        let mqk = m[(q, k)];
        m[(p, k)] = mpk * c - mqk * s;
        m[(q, k)] = mpk * s + mqk * c;
    }
    m[(p, q)] = ZERO;
    m[(q, p)] = ZERO;
}

/// Makes the first non-negligible component real and positive.
fn fix_phase(x: &mut [C64]) {
    let scale = x.iter().fold(0.0_f64, |m, c| m.max(c.norm()));
    if let Some(lead) = x.iter().copied().find(|c| c.norm() > 1e-12 * scale) {
        let rot = lead.conj() / lead.norm();
        for c in x.iter_mut() {
            *c *= rot;
        }
    }
}

fn lexicographic(a: &[C64], b: &[C64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        let o = y.re.total_cmp(&x.re).then(y.im.total_cmp(&x.im));
        if o != Ordering::Equal {
            return o;
        }
    }
    Ordering::Equal
}
