//! Univariate complex polynomials: evaluation, interpolation and roots.

use std::f64::consts::PI;

use crate::linalg::C64;

/// Polynomial with coefficients in ascending order of degree.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    pub coeffs: Vec<C64>,
}

impl Poly {
    pub fn new(coeffs: Vec<C64>) -> Self {
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| C64::new(c, 0.0)).collect())
    }

    /// Monic `prod (x - r_i)`.
    pub fn from_roots(roots: &[C64]) -> Self {
        let mut c = vec![C64::new(1.0, 0.0)];
        for &r in roots {
            let mut next = vec![C64::new(0.0, 0.0); c.len() + 1];
            for (i, &a) in c.iter().enumerate() {
                next[i + 1] += a;
                next[i] -= a * r;
            }
            c = next;
        }
        Self::new(c)
    }

    /// Index of the highest non-zero coefficient (0 for the zero polynomial).
    pub fn degree(&self) -> usize {
        self.coeffs
            .iter()
            .rposition(|c| *c != C64::new(0.0, 0.0))
            .unwrap_or(0)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == C64::new(0.0, 0.0))
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.coeffs
            .iter()
            .rev()
            .fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Self::new(vec![C64::new(0.0, 0.0)]);
        }
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| c * i as f64)
                .collect(),
        )
    }

    /// Drops leading coefficients whose magnitude is at most `rel * max_abs`.
    pub fn trimmed(&self, rel: f64) -> Self {
        let cut = rel * self.max_abs();
        let mut c = self.coeffs.clone();
        while c.len() > 1 && c.last().is_some_and(|x| x.norm() <= cut) {
            c.pop();
        }
        Self::new(c)
    }

    /// All complex roots by Aberth iteration. Empty for constants.
    pub fn roots(&self) -> Vec<C64> {
        let p = self.trimmed(0.0);
        let d = p.degree();
        if d == 0 {
            return Vec::new();
        }
        let c = &p.coeffs[..=d];
        let lead = c[d];
        let monic: Vec<C64> = c.iter().map(|x| x / lead).collect();
        let q = Poly::new(monic.clone());
        let dq = q.derivative();

        // Fujiwara-style radius bound for the initial circle.
        let radius = (0..d)
            .map(|i| monic[i].norm().powf(1.0 / (d - i) as f64))
            .fold(0.0_f64, f64::max)
            .max(1e-3)
            * 2.0;
        let mut z: Vec<C64> = (0..d)
            .map(|j| C64::from_polar(radius, 2.0 * PI * j as f64 / d as f64 + 0.4))
            .collect();
        for _ in 0..800 {
            let mut moved = 0.0_f64;
            for i in 0..d {
                let pz = q.eval(z[i]);
                if pz == C64::new(0.0, 0.0) {
                    continue;
                }
                let ratio = pz / dq.eval(z[i]);
                let mut sum = C64::new(0.0, 0.0);
                for j in 0..d {
                    if j != i {
                        let diff = z[i] - z[j];
                        if diff != C64::new(0.0, 0.0) {
                            sum += diff.inv();
                        }
                    }
                }
                let step = ratio / (C64::new(1.0, 0.0) - ratio * sum);
                if step.is_finite() {
                    z[i] -= step;
                    moved = moved.max(step.norm() / (1.0 + z[i].norm()));
                }
            }
            if moved < 1e-15 {
                break;
            }
        }
        z
    }
}

/// Chebyshev points of the first kind on `[-1, 1]`.
pub fn chebyshev_nodes(count: usize) -> Vec<f64> {
    (0..count)
        .map(|j| ((2 * j + 1) as f64 * PI / (2 * count) as f64).cos())
        .collect()
}

/// `count` points `e^{2 pi i j / count}`.
pub fn unit_circle_nodes(count: usize) -> Vec<C64> {
    (0..count)
        .map(|j| C64::from_polar(1.0, 2.0 * PI * j as f64 / count as f64))
        .collect()
}

/// Monomial coefficients of the polynomial of degree `< count` taking
/// `values[j]` at the `j`-th unit-circle node. Perfectly conditioned.
pub fn interpolate_unit_circle(values: &[C64]) -> Vec<C64> {
    let m = values.len();
    (0..m)
        .map(|k| {
            let s: C64 = values
                .iter()
                .enumerate()
                .map(|(j, v)| v * C64::from_polar(1.0, -2.0 * PI * ((j * k) % m) as f64 / m as f64))
                .sum();
            s / m as f64
        })
        .collect()
}

/// Monomial coefficients of the interpolant through `(nodes[j], values[j])`.
///
/// Solves the Vandermonde system directly; only meant for the small degrees
/// that occur here, with nodes spread over `[-1, 1]`.
pub fn interpolate(nodes: &[f64], values: &[C64]) -> Vec<C64> {
    let m = nodes.len();
    let mut a: Vec<Vec<C64>> = nodes
        .iter()
        .zip(values)
        .map(|(&x, &v)| {
            let mut row: Vec<C64> = (0..m).map(|p| C64::new(x.powi(p as i32), 0.0)).collect();
            row.push(v);
            row
        })
        .collect();
    for col in 0..m {
        let piv = (col..m)
            .max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm()))
            .unwrap_or(col);
        a.swap(col, piv);
        let p = a[col][col];
        if p == C64::new(0.0, 0.0) {
            continue;
        }
        for r in col + 1..m {
            let f = a[r][col] / p;
            if f == C64::new(0.0, 0.0) {
                continue;
            }
            let (upper, lower) = a.split_at_mut(r);
            for (x, &t) in lower[0][col..=m].iter_mut().zip(&upper[col][col..=m]) {
                *x -= f * t;
            }
        }
    }
    let mut x = vec![C64::new(0.0, 0.0); m];
    for r in (0..m).rev() {
        let mut s = a[r][m];
        for c in r + 1..m {
            s -= a[r][c] * x[c];
        }
        x[r] = if a[r][r] == C64::new(0.0, 0.0) {
            C64::new(0.0, 0.0)
        } else {
            s / a[r][r]
        };
    }
    x
}
