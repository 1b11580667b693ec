use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, top_k_sum, EigSystem, Operator, C64};

/// Touch points of `W_k` on the tangent line with outward normal `e^{i theta}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Touch {
    Point(C64),
    /// `(P1, P2)`: the limits of the touch point from below and above `theta`.
    Segment(C64, C64),
}

impl Touch {
    pub fn first(&self) -> C64 {
        match *self {
            Touch::Point(p) | Touch::Segment(p, _) => p,
        }
    }

    pub fn last(&self) -> C64 {
        match *self {
            Touch::Point(p) | Touch::Segment(_, p) => p,
        }
    }

    pub fn is_segment(&self) -> bool {
        matches!(self, Touch::Segment(..))
    }

    pub fn points(&self) -> Vec<C64> {
        match *self {
            Touch::Point(p) => vec![p],
            Touch::Segment(a, b) => vec![a, b],
        }
    }

    pub fn shifted(self, mu: C64) -> Self {
        match self {
            Touch::Point(p) => Touch::Point(p + mu),
            Touch::Segment(a, b) => Touch::Segment(a + mu, b + mu),
        }
    }
}

fn check_k(op: &Operator, k: usize) -> Result<()> {
    if k == 0 || k > op.dim() {
        return Err(Error::KOutOfRange { k, n: op.dim() });
    }
    Ok(())
}

/// `(1/k)` times the sum of the `k` largest eigenvalues of `b_theta`.
pub fn support_wk(op: &Operator, k: usize, theta: f64) -> Result<f64> {
    check_k(op, k)?;
    Ok(top_k_sum(&op.eigenvalues_theta(theta), k)? / k as f64)
}

/// The point or segment where the tangent line at `theta` meets `W_k`.
///
/// `tol` is the absolute gap below which the `k`-th and `(k+1)`-th
/// eigenvalues count as tied.
pub fn touch_set(op: &Operator, k: usize, theta: f64, tol: f64) -> Result<Touch> {
    check_k(op, k)?;
    if !(tol > 0.0) {
        return Err(Error::Argument("tolerance must be positive".into()));
    }
    let eig = op.eig_theta(theta);
    Ok(touch_from_eig(op, &eig, k, theta, tol))
}

/// Endpoints closer than this (relative to the operator scale) collapse to a point.
pub(crate) const MERGE_REL: f64 = 1e-7;

pub(crate) fn touch_from_eig(op: &Operator, eig: &EigSystem, k: usize, theta: f64, tol: f64) -> Touch {
    let n = op.dim();
    let c = op.matrix();
    let mu = &eig.values;
    let avg = |vectors: &[&Vec<C64>]| -> C64 {
        vectors.iter().map(|v| c.quadratic_form(v)).sum::<C64>() / k as f64
    };
    if k == n || mu[k - 1] - mu[k] > tol {
        let v: Vec<&Vec<C64>> = eig.vectors[..k].iter().collect();
        return Touch::Point(avg(&v));
    }
    // Cluster of eigenvalues chained to mu[k-1] by gaps <= tol.
    let mut lo = k - 1;
    while lo > 0 && mu[lo - 1] - mu[lo] <= tol {
        lo -= 1;
    }
    let mut hi = k;
    while hi + 1 < n && mu[hi] - mu[hi + 1] <= tol {
        hi += 1;
    }
    let need = k - lo;
    let basis = eig.basis(lo..hi + 1);
    let compressed = op.im_theta(theta).compress(&basis);
    let inner = hermitian_eig(&compressed).expect("compression of a Hermitian matrix");
    let lift = |w: &Vec<C64>| basis.mul_vec(w);
    let fixed: Vec<&Vec<C64>> = eig.vectors[..lo].iter().collect();
    let m = inner.dim();
    let top: Vec<Vec<C64>> = inner.vectors[..need].iter().map(lift).collect();
    let bottom: Vec<Vec<C64>> = inner.vectors[m - need..].iter().map(lift).collect();
    let with = |extra: &[Vec<C64>]| {
        let mut all = fixed.clone();
        all.extend(extra.iter());
        avg(&all)
    };
    // Just below theta the preferred directions maximize -Im(e^{-i theta} c).
    let p1 = with(&bottom);
    let p2 = with(&top);
    if (p1 - p2).norm() <= MERGE_REL * op.scale() {
        Touch::Point(0.5 * (p1 + p2))
    } else {
        Touch::Segment(p1, p2)
    }
}

/// Intersection of the tangent lines of `W_k` at angles `theta` and `phi`.
pub fn tangent_intersection(op: &Operator, k: usize, theta: f64, phi: f64) -> Result<C64> {
    let rt = support_wk(op, k, theta)?;
    let rp = support_wk(op, k, phi)?;
    Ok(line_intersection(theta, rt, phi, rp))
}

/// Solves `x cos t + y sin t = r` for the two given lines.
pub fn line_intersection(theta: f64, r_theta: f64, phi: f64, r_phi: f64) -> C64 {
    let d = (theta - phi).sin();
    C64::new(
        (r_phi * theta.sin() - r_theta * phi.sin()) / d,
        -(r_phi * theta.cos() - r_theta * phi.cos()) / d,
    )
}

/// Deviation from `k W_k = n tau(c) - (n - k) W_{n-k}` in support-function
/// form, maximized over `grid` angles.
pub fn complement_identity_check(op: &Operator, k: usize, grid: usize) -> Result<f64> {
    let n = op.dim();
    if k == 0 || k >= n {
        return Err(Error::KOutOfRange { k, n });
    }
    if grid == 0 {
        return Err(Error::Argument("grid must be positive".into()));
    }
    let total = op.tau() * n as f64;
    let devs = crate::par::map_range(grid, |j| {
        let t = std::f64::consts::TAU * j as f64 / grid as f64;
        let lhs = k as f64 * support_wk(op, k, t)?;
        let rot = (C64::from_polar(1.0, -t) * total).re;
        let other = (n - k) as f64 * support_wk(op, n - k, t + std::f64::consts::PI)?;
        Ok((lhs - rot - other).abs())
    });
    devs.into_iter()
        .try_fold(0.0_f64, |m, d: Result<f64>| Ok(m.max(d?)))
}

/// `W_k` of a Hermitian matrix: the interval between the averages of the
/// `k` smallest and `k` largest eigenvalues.
pub fn selfadjoint_interval(a: &crate::linalg::CMatrix, k: usize) -> Result<(f64, f64)> {
    let values = crate::linalg::hermitian_eigenvalues(a)?;
    let n = values.len();
    if k == 0 || k > n {
        return Err(Error::KOutOfRange { k, n });
    }
    let hi = top_k_sum(&values, k)? / k as f64;
    let lo = values[n - k..].iter().sum::<f64>() / k as f64;
    Ok((lo, hi))
}
