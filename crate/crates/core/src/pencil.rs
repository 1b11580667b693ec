//! The bivariate characteristic polynomial `f(z, y) = det(b1 + z b2 - y)`,
//! its discriminant in `y`, and the angles where eigenvalues of the pencil
//! `b_theta` collide.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, svd, CMatrix, Operator, C64};
use crate::par;
use crate::poly::{chebyshev_nodes, interpolate, interpolate_unit_circle, unit_circle_nodes, Poly};

const ZERO: C64 = C64::new(0.0, 0.0);

/// Coefficients `coeffs[j][k]` of `z^j y^k`, zero whenever `j + k > n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BivariatePencilPoly {
    n: usize,
    coeffs: Vec<Vec<C64>>,
}

impl BivariatePencilPoly {
    /// Validates shape and total degree, then pins the `y^n` coefficient to `(-1)^n`.
    pub fn from_coeffs(n: usize, mut coeffs: Vec<Vec<C64>>) -> Result<Self> {
        if coeffs.len() != n + 1 || coeffs.iter().any(|r| r.len() != n + 1) {
            return Err(Error::Argument(format!(
                "bivariate coefficients must be {0}x{0}",
                n + 1
            )));
        }
        for (j, row) in coeffs.iter_mut().enumerate() {
            for (k, c) in row.iter_mut().enumerate() {
                if j + k > n {
                    *c = ZERO;
                }
            }
        }
        coeffs[0][n] = C64::new(sign(n), 0.0);
        Ok(Self { n, coeffs })
    }

    /// Degree in `y`.
    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[Vec<C64>] {
        &self.coeffs
    }

    pub fn coeff(&self, j: usize, k: usize) -> C64 {
        self.coeffs[j][k]
    }

    /// Largest coefficient magnitude.
    pub fn scale(&self) -> f64 {
        self.coeffs
            .iter()
            .flatten()
            .fold(0.0_f64, |m, c| m.max(c.norm()))
    }

    /// `f(z0, .)` as a polynomial in `y`.
    pub fn at_z(&self, z: C64) -> Poly {
        Poly::new(
            (0..=self.n)
                .map(|k| {
                    (0..=self.n)
                        .rev()
                        .fold(ZERO, |acc, j| acc * z + self.coeffs[j][k])
                })
                .collect(),
        )
    }

    pub fn eval(&self, z: C64, y: C64) -> C64 {
        self.at_z(z).eval(y)
    }

    /// `max_{j,k} |a_jk - b_jk|`; infinite when the degrees differ.
    pub fn max_coeff_diff(&self, other: &Self) -> f64 {
        if self.n != other.n {
            return f64::INFINITY;
        }
        self.coeffs
            .iter()
            .flatten()
            .zip(other.coeffs.iter().flatten())
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).norm()))
    }
}

fn sign(n: usize) -> f64 {
    if n.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Interpolates `det(b1 + z b2 - y)` from the spectra of `b1 + z_j b2` at
/// `n + 1` Chebyshev nodes scaled by `1 + ||b2||`.
pub fn char_poly_bivariate(op: &Operator) -> BivariatePencilPoly {
    let n = op.dim();
    let radius = 1.0
        + hermitian_eigenvalues(op.b2())
            .expect("b2 is Hermitian")
            .iter()
            .fold(0.0_f64, |m, v| m.max(v.abs()));
    let nodes = chebyshev_nodes(n + 1);
    // Row j: y-coefficients of det(b1 + z_j b2 - y) = (-1)^n prod (y - mu_i).
    let rows: Vec<Vec<C64>> = par::map_slice(&nodes, |&s| {
        let mu = hermitian_eigenvalues(&op.pencil(1.0, s * radius)).expect("Hermitian pencil");
        let roots: Vec<C64> = mu.iter().map(|&m| C64::new(m, 0.0)).collect();
        Poly::from_roots(&roots)
            .coeffs
            .into_iter()
            .map(|c| C64::new(c.re * sign(n), 0.0))
            .collect()
    });
    let mut coeffs = vec![vec![ZERO; n + 1]; n + 1];
    for k in 0..=n {
        let values: Vec<C64> = rows.iter().map(|r| r[k]).collect();
        let in_s = interpolate(&nodes, &values);
        for (j, c) in in_s.into_iter().enumerate() {
            coeffs[j][k] = C64::new(c.re / radius.powi(j as i32), 0.0);
        }
    }
    BivariatePencilPoly::from_coeffs(n, coeffs).expect("shape is consistent")
}

/// Outcome of [`discriminant_y`].
#[derive(Debug, Clone, PartialEq)]
pub enum Discriminant {
    Poly(Poly),
    /// Every evaluation was negligible: `f` has a repeated factor.
    VanishesIdentically,
}

impl Discriminant {
    pub fn poly(&self) -> Option<&Poly> {
        match self {
            Discriminant::Poly(p) => Some(p),
            Discriminant::VanishesIdentically => None,
        }
    }
}

/// Relative size below which the discriminant counts as identically zero.
const VANISH_TOL: f64 = 1e-8;

/// `(-1)^{n(n-1)/2} Res_y(f, f_y) / lc_y(f)` as a polynomial in `z`.
///
/// The resultant is evaluated as a Sylvester determinant at `n(n-1) + 1`
/// points of the unit circle and recovered by a discrete Fourier transform.
pub fn discriminant_y(f: &BivariatePencilPoly) -> Result<Discriminant> {
    let n = f.degree();
    if n == 0 {
        return Err(Error::Argument(
            "discriminant needs degree at least one in y".into(),
        ));
    }
    let count = n * (n - 1) + 1;
    let nodes = unit_circle_nodes(count);
    let evals: Vec<(C64, f64)> = par::map_slice(&nodes, |&z| {
        let p = f.at_z(z);
        let syl = sylvester(&p, &p.derivative(), n);
        let bound: f64 = (0..syl.rows())
            .map(|i| syl.row(i).iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt())
            .product();
        (syl.determinant(), bound)
    });
    let relative = evals
        .iter()
        .map(|(d, b)| if *b > 0.0 { d.norm() / b } else { 0.0 })
        .fold(0.0_f64, f64::max);
    if relative < VANISH_TOL {
        return Ok(Discriminant::VanishesIdentically);
    }
    let lead = C64::new(sign(n), 0.0);
    let norm = C64::new(sign(n * (n - 1) / 2), 0.0) / lead;
    let values: Vec<C64> = evals.iter().map(|(d, _)| d * norm).collect();
    let coeffs = interpolate_unit_circle(&values);
    Ok(Discriminant::Poly(Poly::new(coeffs).trimmed(1e-12)))
}

/// Sylvester matrix of `p` (degree `n`) and `q` (degree `n - 1`).
fn sylvester(p: &Poly, q: &Poly, n: usize) -> CMatrix {
    let m = 2 * n - 1;
    let mut s = CMatrix::zeros(m, m);
    for i in 0..n - 1 {
        for (c, k) in (0..=n).rev().enumerate() {
            s[(i, i + c)] = p.coeffs[k];
        }
    }
    for i in 0..n {
        for (c, k) in (0..n).rev().enumerate() {
            s[(n - 1 + i, i + c)] = q.coeffs.get(k).copied().unwrap_or(ZERO);
        }
    }
    s
}

/// Divides `f` by a numerical gcd of `f` and `f_y`.
///
/// The gcd degree is read off the nullity of the Sylvester matrix of
/// `(f(z0, .), f_y(z0, .))` at several real nodes. Nodes where a singular
/// value sits within a factor ten of `tol` are discarded; if too few remain,
/// or the result still has a vanishing discriminant, the reduction is
/// reported as indeterminate.
pub fn square_free_reduce(f: &BivariatePencilPoly, tol: f64) -> Result<BivariatePencilPoly> {
    if !(tol > 0.0) {
        return Err(Error::Argument("tolerance must be positive".into()));
    }
    let n = f.degree();
    if n <= 1 {
        return Ok(f.clone());
    }
    let nodes = chebyshev_nodes(2 * n + 3);
    // Per node: Some(nullity) or None when the rank decision is ambiguous.
    let nullities: Vec<Option<usize>> = par::map_slice(&nodes, |&z| {
        let p = f.at_z(C64::new(z, 0.0));
        let s = svd(&sylvester(&p, &p.derivative(), n));
        let top = s.largest();
        if top == 0.0 {
            return None;
        }
        let mut nullity = 0;
        for &v in &s.values {
            let r = v / top;
            if r > tol / 10.0 && r <= tol * 10.0 {
                return None;
            }
            if r <= tol {
                nullity += 1;
            }
        }
        Some(nullity)
    });
    let g = nullities
        .iter()
        .flatten()
        .copied()
        .min()
        .ok_or_else(|| Error::Indeterminate("every gcd rank decision was ambiguous".into()))?;
    if g == 0 {
        return Ok(f.clone());
    }
    let d = n - g;
    let valid: Vec<f64> = nodes
        .iter()
        .zip(&nullities)
        .filter(|(_, m)| **m == Some(g))
        .map(|(z, _)| *z)
        .collect();
    if valid.len() < d + 1 {
        return Err(Error::Indeterminate(format!(
            "only {} usable nodes for a reduced degree {}",
            valid.len(),
            d
        )));
    }
    let chosen: Vec<f64> = (0..=d)
        .map(|i| valid[i * (valid.len() - 1) / d.max(1)])
        .collect();

    let mut rows = Vec::with_capacity(chosen.len());
    for &z in &chosen {
        let p = f.at_z(C64::new(z, 0.0));
        let u = cofactor(&p, &p.derivative(), n, d)
            .ok_or_else(|| Error::Indeterminate("degenerate gcd cofactor".into()))?;
        rows.push(u);
    }
    let mut coeffs = vec![vec![ZERO; d + 1]; d + 1];
    for k in 0..=d {
        let values: Vec<C64> = rows.iter().map(|u| u[k]).collect();
        for (j, c) in interpolate(&chosen, &values).into_iter().enumerate() {
            if j + k <= d {
                coeffs[j][k] = c;
            }
        }
    }
    let reduced = BivariatePencilPoly::from_coeffs(d, coeffs)?;
    if d >= 1 && discriminant_y(&reduced)? == Discriminant::VanishesIdentically {
        return Err(Error::Indeterminate(
            "reduced polynomial still has a repeated factor".into(),
        ));
    }
    Ok(reduced)
}

/// `u = p / gcd(p, q)` of degree `d`, with leading coefficient `(-1)^d`,
/// from the null vector of `[p * v | -q * u]`.
fn cofactor(p: &Poly, q: &Poly, n: usize, d: usize) -> Option<Vec<C64>> {
    let rows = n + d;
    let cols = 2 * d + 1;
    let mut m = CMatrix::zeros(rows, cols);
    for c in 0..d {
        for k in 0..=n {
            m[(c + k, c)] = p.coeffs[k];
        }
    }
    for c in 0..=d {
        for k in 0..n {
            m[(c + k, d + c)] = -q.coeffs.get(k).copied().unwrap_or(ZERO);
        }
    }
    let s = svd(&m);
    let null = s.right.last()?;
    let u: Vec<C64> = null[d..].to_vec();
    let lead = u[d];
    if lead.norm() < 1e-10 {
        return None;
    }
    let f = C64::new(sign(d), 0.0) / lead;
    Some(u.iter().map(|x| x * f).collect())
}

/// Whether a critical angle is corroborated by the discriminant route.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Confirmation {
    /// `tan(theta)` (or `cot(theta)` for the swapped pencil) is close to a
    /// discriminant root.
    Confirmed,
    /// No discriminant root nearby.
    Unconfirmed,
    /// The square-free reduction or discriminant could not be formed.
    Unavailable,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CriticalAngleSet {
    /// Sorted angles in `[0, 2 pi)`.
    pub angles: Vec<f64>,
    /// Cross-check status, parallel to `angles`.
    pub confirmation: Vec<Confirmation>,
    /// For the open interval starting at `angles[i]` (cyclically), the
    /// `(branch index, multiplicity)` pairs of the eigenvalues of `b_theta`,
    /// branches counted from the top. A single entry when `angles` is empty.
    pub multiplicity_profile: Vec<Vec<(usize, usize)>>,
}

/// Locates the angles where the number of distinct eigenvalues of
/// `b_theta` drops below its generic value.
///
/// `tol` is relative to `max_theta ||b_theta||`.
pub fn critical_angles(op: &Operator, grid: usize, tol: f64) -> Result<CriticalAngleSet> {
    if grid < 360 {
        return Err(Error::Argument(format!("grid must be at least 360, got {grid}")));
    }
    if !(tol > 0.0) {
        return Err(Error::Argument("tolerance must be positive".into()));
    }
    let n = op.dim();
    if op.b1().max_abs() == 0.0 && op.b2().max_abs() == 0.0 {
        return Err(Error::DegeneratePencil);
    }
    let thetas: Vec<f64> = (0..grid).map(|j| TAU * j as f64 / grid as f64).collect();
    let spectra: Vec<Vec<f64>> = par::map_slice(&thetas, |&t| op.eigenvalues_theta(t));
    let top = spectra
        .iter()
        .flatten()
        .fold(0.0_f64, |m, v| m.max(v.abs()));
    let tol_abs = tol * top;
    if n == 1 {
        return Ok(CriticalAngleSet {
            angles: Vec::new(),
            confirmation: Vec::new(),
            multiplicity_profile: vec![vec![(0, 1)]],
        });
    }

    let distinct = |mu: &[f64]| 1 + mu.windows(2).filter(|w| w[0] - w[1] > tol_abs).count();
    let generic = spectra.iter().map(|m| distinct(m)).max().unwrap_or(n);
    let order = n - generic;
    let relevant = |mu: &[f64]| {
        let mut gaps: Vec<f64> = mu.windows(2).map(|w| w[0] - w[1]).collect();
        gaps.sort_by(f64::total_cmp);
        gaps[order]
    };
    let r: Vec<f64> = spectra.iter().map(|m| relevant(m)).collect();

    // A crossing can hide between grid points by at most the gap's
    // Lipschitz constant (bounded by 2 max ||b_theta||) times a step.
    let step = TAU / grid as f64;
    let reach = 2.0 * top * step + tol_abs;
    let windows: Vec<(f64, f64)> = runs_below(&r, reach)
        .into_iter()
        .map(|(a, b)| (thetas[a] - step, thetas[b] + step))
        .collect();
    let refined: Vec<Vec<f64>> = par::map_slice(&windows, |&(lo, hi)| {
        let f = |t: f64| relevant(&op.eigenvalues_theta(t));
        let mut found = Vec::new();
        refine_zeros(&f, lo, hi, step / SUBGRID as f64, top, tol_abs, SUBGRID_DEPTH, &mut found);
        found
    });
    let mut angles: Vec<f64> = refined.into_iter().flatten().map(|t| t.rem_euclid(TAU)).collect();
    angles.sort_by(f64::total_cmp);
    angles.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    if angles.len() > 1 && angles[0] + TAU - angles[angles.len() - 1] < 1e-9 {
        angles.pop();
    }

    let confirmation = if angles.is_empty() {
        Vec::new()
    } else {
        cross_check(op, &angles)
    };

    let mids: Vec<f64> = if angles.is_empty() {
        vec![0.0]
    } else {
        (0..angles.len())
            .map(|i| {
                let a = angles[i];
                let b = if i + 1 < angles.len() { angles[i + 1] } else { angles[0] + TAU };
                0.5 * (a + b)
            })
            .collect()
    };
    let multiplicity_profile = par::map_slice(&mids, |&t| {
        let mu = op.eigenvalues_theta(t);
        let mut profile = Vec::new();
        let mut size = 1;
        for i in 1..=mu.len() {
            if i < mu.len() && mu[i - 1] - mu[i] <= tol_abs {
                size += 1;
            } else {
                profile.push((profile.len(), size));
                size = 1;
            }
        }
        profile
    });

    Ok(CriticalAngleSet {
        angles,
        confirmation,
        multiplicity_profile,
    })
}

/// Compares each angle with the discriminant roots of the square-free
/// pencil polynomial. Angles with `|tan| <= 1` use `z = tan(theta)`; the rest
/// use `w = cot(theta)` and the pencil with `b1` and `b2` swapped, so every
/// lookup happens inside the unit disk where the interpolated coefficients
/// are accurate.
fn cross_check(op: &Operator, angles: &[f64]) -> Vec<Confirmation> {
    let roots_of = |o: &Operator| {
        square_free_reduce(&char_poly_bivariate(o), 1e-8)
            .and_then(|g| discriminant_y(&g))
            .ok()
            .and_then(|d| d.poly().map(|p| with_cluster_means(p.roots())))
    };
    let tan_roots = roots_of(op);
    let cot_roots = Operator::from_parts(op.b2(), op.b1()).ok().and_then(|o| roots_of(&o));
    angles
        .iter()
        .map(|&t| {
            let (c, s) = (t.cos(), t.sin());
            let (x, roots) = if c.abs() >= s.abs() {
                (s / c, &tan_roots)
            } else {
                (c / s, &cot_roots)
            };
            let Some(roots) = roots else {
                return Confirmation::Unavailable;
            };
            let hit = roots
                .iter()
                .any(|r| (r - C64::new(x, 0.0)).norm() <= 1e-5 * x.abs().max(1.0));
            if hit {
                Confirmation::Confirmed
            } else {
                Confirmation::Unconfirmed
            }
        })
        .collect()
}

/// Appends the centroid of every cluster of nearby roots. A root of
/// multiplicity `m` comes back as `m` points spread by roughly the `m`-th
/// root of the coefficient error, while their mean stays accurate.
fn with_cluster_means(mut roots: Vec<C64>) -> Vec<C64> {
    let mut used = vec![false; roots.len()];
    let mut means = Vec::new();
    for i in 0..roots.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let mut members = vec![roots[i]];
        let mut grew = true;
        while grew {
            grew = false;
            for j in 0..roots.len() {
                if !used[j]
                    && members
                        .iter()
                        .any(|m| (m - roots[j]).norm() <= 1e-3 * m.norm().max(1.0))
                {
                    used[j] = true;
                    members.push(roots[j]);
                    grew = true;
                }
            }
        }
        if members.len() > 1 {
            means.push(members.iter().sum::<C64>() / members.len() as f64);
        }
    }
    roots.extend(means);
    roots
}

const SUBGRID: usize = 32;
const SUBGRID_DEPTH: usize = 2;

/// Maximal runs `(first, last)` of consecutive indices with `v <= bound`.
fn runs_below(v: &[f64], bound: f64) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, &x) in v.iter().enumerate() {
        match (x <= bound, start) {
            (true, None) => start = Some(i),
            (false, Some(a)) => {
                out.push((a, i - 1));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(a) = start {
        out.push((a, v.len() - 1));
    }
    out
}

/// Collects the zeros of the gap function `f` in `[lo, hi]`, sampled at
/// spacing at most `h`.
///
/// A zero within one sample step of `t` forces `f(t) <= 2 top h`, so every
/// run of samples under that bound is searched again at spacing
/// `h / SUBGRID`. At the bottom level each valley is polished by golden
/// section.
#[allow(clippy::too_many_arguments)]
fn refine_zeros(
    f: &impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    h: f64,
    top: f64,
    tol_abs: f64,
    depth: usize,
    out: &mut Vec<f64>,
) {
    let count = ((hi - lo) / h).ceil().max(2.0) as usize;
    let h = (hi - lo) / count as f64;
    let ts: Vec<f64> = (0..=count).map(|i| lo + h * i as f64).collect();
    let vs: Vec<f64> = ts.iter().map(|&t| f(t)).collect();
    let reach = 2.0 * top * h + tol_abs;
    if depth > 0 {
        for (a, b) in runs_below(&vs, reach) {
            refine_zeros(f, ts[a] - h, ts[b] + h, h / SUBGRID as f64, top, tol_abs, depth - 1, out);
        }
        return;
    }
    for i in 0..=count {
        let left = if i > 0 { vs[i - 1] } else { f64::INFINITY };
        let right = if i < count { vs[i + 1] } else { f64::INFINITY };
        if vs[i] <= left && vs[i] <= right && vs[i] <= reach {
            let t = golden_section(f, ts[i] - h, ts[i] + h, 1e-12);
            if f(t) <= tol_abs {
                out.push(t);
            }
        }
    }
}

/// Minimizer of a unimodal `f` on `[lo, hi]`, to interval width `width`.
fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, width: f64) -> f64 {
    let g = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - g * (hi - lo);
    let mut b = lo + g * (hi - lo);
    let mut fa = f(a);
    let mut fb = f(b);
    while hi - lo > width {
        if fa <= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - g * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + g * (hi - lo);
            fb = f(b);
        }
        if hi - lo <= f64::EPSILON * (1.0 + lo.abs()) * 4.0 {
            break;
        }
    }
    let mid = 0.5 * (lo + hi);
    [(lo, f(lo)), (mid, f(mid)), (hi, f(hi)), (a, fa), (b, fb)]
        .into_iter()
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .map(|(t, _)| t)
        .unwrap_or(mid)
}

/// Maps an angle to `[0, 2 pi)`; exposed for callers that merge angle lists.
pub fn wrap_angle(t: f64) -> f64 {
    let w = t.rem_euclid(TAU);
    if w >= TAU - 1e-15 {
        0.0
    } else {
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CMatrix;
    use std::f64::consts::PI;

    fn op(b1: CMatrix, b2: CMatrix) -> Operator {
        Operator::from_parts(&b1, &b2).unwrap()
    }

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn bivariate(n: usize, entries: &[(usize, usize, f64)]) -> BivariatePencilPoly {
        let mut coeffs = vec![vec![ZERO; n + 1]; n + 1];
        for &(j, k, v) in entries {
            coeffs[j][k] = c(v);
        }
        BivariatePencilPoly::from_coeffs(n, coeffs).unwrap()
    }

    #[test]
    fn scalar_pencil_polynomial() {
        let f = char_poly_bivariate(&op(CMatrix::diag_real(&[2.5]), CMatrix::diag_real(&[-1.5])));
        assert!((f.coeff(0, 0) - c(2.5)).norm() < 1e-14);
        assert!((f.coeff(1, 0) - c(-1.5)).norm() < 1e-14);
        assert_eq!(f.coeff(0, 1), c(-1.0));
    }

    #[test]
    fn diagonal_pencil_factors() {
        // (1 + z - y)(-1 + z - y) = -1 + z^2 - 2zy + y^2
        let f = char_poly_bivariate(&op(CMatrix::diag_real(&[1.0, -1.0]), CMatrix::identity(2)));
        let want = bivariate(2, &[(0, 0, -1.0), (2, 0, 1.0), (1, 1, -2.0), (0, 2, 1.0)]);
        assert!(f.max_coeff_diff(&want) < 1e-12, "{f:?}");
    }

    #[test]
    fn agrees_with_determinant_at_random_points() {
        let c0 = CMatrix::from_rows(&[
            vec![C64::new(1.0, 0.3), C64::new(-0.5, 2.0), C64::new(0.1, 0.0)],
            vec![C64::new(0.0, 1.0), C64::new(2.0, -1.0), C64::new(0.7, 0.7)],
            vec![C64::new(-1.0, 0.0), C64::new(0.2, 0.4), C64::new(0.0, 0.0)],
        ])
        .unwrap();
        let o = Operator::new(c0).unwrap();
        let f = char_poly_bivariate(&o);
        for i in 0..10 {
            let z = C64::new(0.3 * i as f64 - 1.0, 0.2 * i as f64);
            let y = C64::new(1.0 - 0.17 * i as f64, -0.5 + 0.1 * i as f64);
            let mut m = o.b1() + &o.b2().scale(z);
            for d in 0..3 {
                m[(d, d)] -= y;
            }
            assert!((f.eval(z, y) - m.determinant()).norm() < 1e-10 * f.scale().max(1.0));
        }
    }

    #[test]
    fn discriminant_of_quadratics() {
        // y^2 - z
        let f = bivariate(2, &[(1, 0, -1.0), (0, 2, 1.0)]);
        let d = discriminant_y(&f).unwrap();
        let p = d.poly().unwrap().trimmed(1e-10);
        assert_eq!(p.coeffs.len(), 2);
        assert!(p.coeffs[0].norm() < 1e-12 && (p.coeffs[1] - c(4.0)).norm() < 1e-12);

        // y^2 - 3zy + 2z^2
        let f = bivariate(2, &[(1, 1, -3.0), (2, 0, 2.0), (0, 2, 1.0)]);
        let p = discriminant_y(&f).unwrap().poly().unwrap().trimmed(1e-10);
        assert_eq!(p.coeffs.len(), 3);
        assert!((p.coeffs[2] - c(1.0)).norm() < 1e-12);
        assert!(p.coeffs[0].norm() < 1e-12 && p.coeffs[1].norm() < 1e-12);
    }

    #[test]
    fn repeated_factor_discriminant_vanishes() {
        // (y - z)^2
        let f = bivariate(2, &[(2, 0, 1.0), (1, 1, -2.0), (0, 2, 1.0)]);
        assert_eq!(discriminant_y(&f).unwrap(), Discriminant::VanishesIdentically);
        assert!(matches!(
            discriminant_y(&bivariate(0, &[])),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn reduction_removes_square() {
        let f = bivariate(2, &[(2, 0, 1.0), (1, 1, -2.0), (0, 2, 1.0)]);
        let g = square_free_reduce(&f, 1e-8).unwrap();
        assert_eq!(g.degree(), 1);
        // leading -1, so g = z - y
        assert!((g.coeff(1, 0) - c(1.0)).norm() < 1e-10);
        assert_eq!(g.coeff(0, 1), c(-1.0));
        assert!(g.coeff(0, 0).norm() < 1e-10);
    }

    #[test]
    fn reduction_keeps_square_free_input() {
        let f = bivariate(2, &[(1, 0, -1.0), (0, 2, 1.0)]);
        assert_eq!(square_free_reduce(&f, 1e-8).unwrap(), f);
    }

    #[test]
    fn reduction_of_cube_times_line() {
        // b1 + z b2 = diag(z, z, z - 1): f = (z - y)^2 (z - 1 - y), reduced degree two
        let o = op(
            CMatrix::diag_real(&[0.0, 0.0, -1.0]),
            CMatrix::diag_real(&[1.0, 1.0, 1.0]),
        );
        let f = char_poly_bivariate(&o);
        let g = square_free_reduce(&f, 1e-8).unwrap();
        assert_eq!(g.degree(), 2);
        for &(z, y) in &[(0.4, 0.4), (0.4, -0.6), (-2.0, -2.0), (-2.0, -3.0)] {
            assert!(g.eval(c(z), c(y)).norm() < 1e-9);
        }
    }

    #[test]
    fn crossing_angles_of_diagonal_pencils() {
        let o = op(CMatrix::diag_real(&[1.0, -1.0]), CMatrix::identity(2));
        let s = critical_angles(&o, 3600, 1e-7).unwrap();
        assert_eq!(s.angles.len(), 2, "{:?}", s.angles);
        assert!((s.angles[0] - PI / 2.0).abs() < 1e-9);
        assert!((s.angles[1] - 3.0 * PI / 2.0).abs() < 1e-9);
        assert!(s
            .confirmation
            .iter()
            .all(|c| *c == Confirmation::Confirmed));
        assert_eq!(s.multiplicity_profile.len(), 2);
        assert_eq!(s.multiplicity_profile[0], vec![(0, 1), (1, 1)]);

        let o = op(CMatrix::diag_real(&[0.0, 1.0]), CMatrix::zeros(2, 2));
        let s = critical_angles(&o, 3600, 1e-7).unwrap();
        assert_eq!(s.angles.len(), 2);
        assert!((s.angles[0] - PI / 2.0).abs() < 1e-9);
        assert!((s.angles[1] - 3.0 * PI / 2.0).abs() < 1e-9);
    }

    #[test]
    fn pauli_pencil_has_no_crossings() {
        let b1 = CMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        let b2 = CMatrix::from_rows(&[
            vec![c(0.0), C64::new(0.0, -1.0)],
            vec![C64::new(0.0, 1.0), c(0.0)],
        ])
        .unwrap();
        let s = critical_angles(&op(b1, b2), 3600, 1e-7).unwrap();
        assert!(s.angles.is_empty());
        assert_eq!(s.multiplicity_profile, vec![vec![(0, 1), (1, 1)]]);
    }

    #[test]
    fn crossing_off_the_axis_is_confirmed() {
        // eigenvalues cos + 2 sin and 2 cos + sin meet at tan = 1
        let o = op(CMatrix::diag_real(&[1.0, 2.0]), CMatrix::diag_real(&[2.0, 1.0]));
        let s = critical_angles(&o, 720, 1e-7).unwrap();
        assert_eq!(s.angles.len(), 2);
        assert!((s.angles[0] - PI / 4.0).abs() < 1e-9);
        assert_eq!(s.confirmation, vec![Confirmation::Confirmed; 2]);
    }

    #[test]
    fn zero_pencil_is_degenerate() {
        let o = Operator::new(CMatrix::zeros(2, 2)).unwrap();
        assert!(matches!(critical_angles(&o, 360, 1e-7), Err(Error::DegeneratePencil)));
    }
}
