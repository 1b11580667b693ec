//! One-sided (Hestenes) Jacobi singular value decomposition.
//!
//! Small singular values come out with absolute accuracy near
//! `eps * sigma_max`, which the null-space and rank decisions elsewhere rely on.

use super::matrix::{dot, vec_norm, CMatrix, C64};

const MAX_SWEEPS: usize = 80;

#[derive(Debug, Clone)]
pub struct Svd {
    /// Singular values, descending.
    pub values: Vec<f64>,
    /// Right singular vectors, `right[i]` paired with `values[i]`.
    pub right: Vec<Vec<C64>>,
}

impl Svd {
    pub fn largest(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn smallest(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// Right singular vectors whose singular value is at most `threshold`.
    pub fn null_space(&self, threshold: f64) -> Vec<Vec<C64>> {
        self.values
            .iter()
            .zip(&self.right)
            .filter(|(s, _)| **s <= threshold)
            .map(|(_, v)| v.clone())
            .collect()
    }
}

/// Singular values and right singular vectors of `a` (any shape).
///
/// When `a` has fewer rows than columns the missing singular values are
/// reported as zero, with the corresponding right vectors completing the basis.
pub fn svd(a: &CMatrix) -> Svd {
    let n = a.cols();
    let mut cols: Vec<Vec<C64>> = (0..n).map(|j| a.column(j)).collect();
    let mut v: Vec<Vec<C64>> = (0..n)
        .map(|j| {
            let mut e = vec![C64::new(0.0, 0.0); n];
            e[j] = C64::new(1.0, 0.0);
            e
        })
        .collect();

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = cols[p].iter().map(|x| x.norm_sqr()).sum();
                let beta: f64 = cols[q].iter().map(|x| x.norm_sqr()).sum();
                let gamma = dot(&cols[p], &cols[q]);
                let g = gamma.norm();
                if g == 0.0 || g <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma.conj() / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                // column q is rephased by conj(phase of gamma) so the pair is real.
                let (left, right) = cols.split_at_mut(q);
                rotate_pair(&mut left[p], &mut right[0], phase, c, s);
                let (left, right) = v.split_at_mut(q);
                rotate_pair(&mut left[p], &mut right[0], phase, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<(f64, usize)> = cols.iter().map(|c| vec_norm(c)).zip(0..n).collect();
    order.sort_by(|x, y| y.0.total_cmp(&x.0));
    Svd {
        values: order.iter().map(|(s, _)| *s).collect(),
        right: order.iter().map(|&(_, j)| v[j].clone()).collect(),
    }
}

fn rotate_pair(x: &mut [C64], y: &mut [C64], phase: C64, c: f64, s: f64) {
    for (xi, yi) in x.iter_mut().zip(y.iter_mut()) {
        let yt = *yi * phase;
        let xo = *xi;
        *xi = xo * c - yt * s;
        *yi = xo * s + yt * c;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_singular_values() {
        let a = CMatrix::diag(&[C64::new(0.0, 3.0), C64::new(-1.0, 0.0), C64::new(0.0, 0.0)]);
        let s = svd(&a);
        assert!((s.values[0] - 3.0).abs() < 1e-14);
        assert!((s.values[1] - 1.0).abs() < 1e-14);
        assert!(s.values[2].abs() < 1e-14);
        let null = s.null_space(1e-10);
        assert_eq!(null.len(), 1);
        assert!((null[0][2].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rank_deficient_null_vector() {
        // Columns: c0, c1, c0 + i c1.
        let a = CMatrix::from_rows(&[
            vec![C64::new(1.0, 0.0), C64::new(2.0, 1.0), C64::new(1.0, 0.0) + C64::new(2.0, 1.0) * C64::new(0.0, 1.0)],
            vec![C64::new(0.0, 1.0), C64::new(-1.0, 0.0), C64::new(0.0, 1.0) + C64::new(-1.0, 0.0) * C64::new(0.0, 1.0)],
            vec![C64::new(3.0, 0.0), C64::new(0.5, 0.5), C64::new(3.0, 0.0) + C64::new(0.5, 0.5) * C64::new(0.0, 1.0)],
            vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 1.0)],
        ])
        .unwrap();
        let s = svd(&a);
        assert!(s.smallest() < 1e-13 * s.largest());
        let null = &s.null_space(1e-10 * s.largest())[0];
        let r = a.mul_vec(null);
        assert!(vec_norm(&r) < 1e-12 * s.largest());
    }

    #[test]
    fn agrees_with_hermitian_eigenvalues_of_gram() {
        let a = CMatrix::from_rows(&[
            vec![C64::new(1.0, 2.0), C64::new(0.0, -1.0)],
            vec![C64::new(0.5, 0.0), C64::new(2.0, 0.0)],
            vec![C64::new(-1.0, 1.0), C64::new(0.0, 0.0)],
        ])
        .unwrap();
        let s = svd(&a);
        let gram = a.adjoint().matmul(&a);
        let e = crate::linalg::eig::hermitian_eig(&gram).unwrap();
        for (sv, ev) in s.values.iter().zip(&e.values) {
            assert!((sv * sv - ev).abs() < 1e-12);
        }
    }
}
