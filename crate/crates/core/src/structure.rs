//! Reducing subspaces of the pair `{b1, b2}`, reducing eigenvalues of `c`,
//! and complex slopes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, svd, CMatrix, Operator, C64};

/// Relative singular-value cutoff for the commutant null space.
const NULL_TOL: f64 = 1e-10;
const VERIFY_TOL: f64 = 1e-9;

/// Frobenius-orthonormal basis of `{X : X b1 = b1 X, X b2 = b2 X}`.
pub fn commutant_basis(op: &Operator) -> Vec<CMatrix> {
    commutant_of(op.b1(), op.b2())
}

fn commutant_of(b1: &CMatrix, b2: &CMatrix) -> Vec<CMatrix> {
    let n = b1.rows();
    let nn = n * n;
    let mut map = CMatrix::zeros(2 * nn, nn);
    for (block, b) in [b1, b2].into_iter().enumerate() {
        for i in 0..n {
            for j in 0..n {
                let row = block * nn + i * n + j;
                // (bX - Xb)_{ij} = sum_k b_ik X_kj - X_ik b_kj
                for k in 0..n {
                    map[(row, k * n + j)] += b[(i, k)];
                    map[(row, i * n + k)] -= b[(k, j)];
                }
            }
        }
    }
    let s = svd(&map);
    let top = s.largest();
    let null = if top == 0.0 {
        s.right.clone()
    } else {
        s.null_space(NULL_TOL * top)
    };
    null.into_iter()
        .map(|v| CMatrix::from_row_major(n, n, v).expect("n*n entries"))
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReducingStructure {
    /// Mutually orthogonal minimal reducing projections summing to 1.
    pub projections: Vec<CMatrix>,
    /// Orthonormal bases (as `n x r` column matrices) of their ranges.
    pub bases: Vec<CMatrix>,
    pub block_dims: Vec<usize>,
    /// `(lambda, multiplicity)`: scalars by which `c` acts on rank-one
    /// blocks, merged when equal and weighted by total rank.
    pub reducing_eigenvalues: Vec<(C64, usize)>,
    /// Per block, the scalar `c` acts as, when the block has rank one.
    pub block_eigenvalues: Vec<Option<C64>>,
}

/// Splits the space into minimal reducing subspaces of `{b1, b2}` using
/// spectral projections of random self-adjoint commutant elements.
///
/// `tol` is the relative gap for grouping eigenvalues of the random element
/// and for merging equal reducing eigenvalues. Retries with `seed + 1` and
/// `seed + 2` before giving up.
pub fn reducing_subspaces(op: &Operator, tol: f64, seed: u64) -> Result<ReducingStructure> {
    if !(tol > 0.0) {
        return Err(Error::Argument("tolerance must be positive".into()));
    }
    let mut last = String::new();
    for attempt in 0..3 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt));
        let mut blocks = Vec::new();
        split(op, &CMatrix::identity(op.dim()), tol, &mut rng, &mut blocks);
        match finish(op, blocks, tol) {
            Ok(s) => return Ok(s),
            Err(e) => last = e,
        }
    }
    Err(Error::Indeterminate(format!("reducing decomposition failed: {last}")))
}

fn split(op: &Operator, basis: &CMatrix, tol: f64, rng: &mut ChaCha8Rng, out: &mut Vec<CMatrix>) {
    let m = basis.cols();
    if m == 1 {
        out.push(basis.clone());
        return;
    }
    let b1 = op.b1().compress(basis);
    let b2 = op.b2().compress(basis);
    let comm = commutant_of(&b1, &b2);
    if comm.len() <= 1 {
        out.push(basis.clone());
        return;
    }
    let mut h = CMatrix::zeros(m, m);
    for x in &comm {
        let w = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        h = &h + &x.scale(w);
    }
    let h = h.hermitian_part();
    let eig = hermitian_eig(&h).expect("Hermitian part");
    let spread = (eig.values[0] - eig.values[m - 1]).abs();
    if spread <= tol * h.frobenius_norm().max(f64::MIN_POSITIVE) {
        // Draw again; a non-scalar element exists since the commutant is larger than C.
        split(op, basis, tol, rng, out);
        return;
    }
    let mut start = 0;
    for i in 1..=m {
        if i == m || eig.values[i - 1] - eig.values[i] > tol * spread {
            let sub = eig.basis(start..i);
            split(op, &basis.matmul(&sub), tol, rng, out);
            start = i;
        }
    }
}

fn finish(op: &Operator, bases: Vec<CMatrix>, tol: f64) -> std::result::Result<ReducingStructure, String> {
    let n = op.dim();
    let c = op.matrix();
    let cnorm = svd(c).largest().max(f64::MIN_POSITIVE);
    let n1 = op.b1().frobenius_norm().max(f64::MIN_POSITIVE);
    let n2 = op.b2().frobenius_norm().max(f64::MIN_POSITIVE);
    let projections: Vec<CMatrix> = bases.iter().map(|v| v.matmul(&v.adjoint())).collect();
    let mut total = CMatrix::zeros(n, n);
    for p in &projections {
        if (&p.matmul(p) - p).max_abs() > VERIFY_TOL || p.hermitian_defect() > VERIFY_TOL {
            return Err("block is not an orthogonal projection".into());
        }
        if op.b1().commutator(p).max_abs() > VERIFY_TOL * n1
            || op.b2().commutator(p).max_abs() > VERIFY_TOL * n2
        {
            return Err("block does not reduce b1 and b2".into());
        }
        total = &total + p;
    }
    if (&total - &CMatrix::identity(n)).max_abs() > VERIFY_TOL {
        return Err("blocks do not sum to the identity".into());
    }
    let block_eigenvalues: Vec<Option<C64>> = bases
        .iter()
        .map(|v| {
            if v.cols() != 1 {
                return None;
            }
            let x = v.column(0);
            Some(c.quadratic_form(&x))
        })
        .collect();
    for (v, lam) in bases.iter().zip(&block_eigenvalues) {
        if let Some(l) = lam {
            let x = v.column(0);
            let cx = c.mul_vec(&x);
            let res: f64 = cx.iter().zip(&x).map(|(a, b)| (a - b * l).norm_sqr()).sum::<f64>().sqrt();
            if res > 1e-8 * cnorm {
                return Err("rank-one block is not an eigenvector".into());
            }
        }
    }
    let mut merged: Vec<(C64, usize)> = Vec::new();
    for l in block_eigenvalues.iter().flatten() {
        match merged.iter_mut().find(|(m, _)| (m - l).norm() <= tol.max(1e-9) * cnorm) {
            Some(e) => e.1 += 1,
            None => merged.push((*l, 1)),
        }
    }
    merged.sort_by(|a, b| a.0.re.total_cmp(&b.0.re).then(a.0.im.total_cmp(&b.0.im)));
    Ok(ReducingStructure {
        block_dims: bases.iter().map(|v| v.cols()).collect(),
        projections,
        bases,
        reducing_eigenvalues: merged,
        block_eigenvalues,
    })
}

/// Whether `c x = lambda x` and `c* x = conj(lambda) x` have a common
/// solution, judged by the smallest singular value of the stacked system.
pub fn is_reducing_eigenvalue(op: &Operator, lambda: C64, tol: f64) -> bool {
    reducing_residual(op, lambda) <= tol
}

/// Smallest singular value of `[(c - lambda); (c* - conj(lambda))]` over `||c||`.
pub fn reducing_residual(op: &Operator, lambda: C64) -> f64 {
    let n = op.dim();
    let c = op.matrix();
    let cs = c.adjoint();
    let stacked = CMatrix::from_fn(2 * n, n, |i, j| {
        let diag = if i % n == j { 1.0 } else { 0.0 };
        if i < n {
            c[(i, j)] - lambda * diag
        } else {
            cs[(i - n, j)] - lambda.conj() * diag
        }
    });
    let cnorm = svd(c).largest();
    let smallest = svd(&stacked).smallest();
    if cnorm == 0.0 {
        return if smallest == 0.0 { 0.0 } else { f64::INFINITY };
    }
    smallest / cnorm
}

/// `tau(c (z+ - z-)) / tau(z+ - z-)` for projections `z- <= z+`.
pub fn complex_slope(op: &Operator, z_minus: &CMatrix, z_plus: &CMatrix) -> Result<C64> {
    let n = op.dim();
    for z in [z_minus, z_plus] {
        if z.rows() != n || z.cols() != n {
            return Err(Error::Dimension {
                rows: z.rows(),
                cols: z.cols(),
            });
        }
        if (&z.matmul(z) - z).max_abs() > VERIFY_TOL || z.hermitian_defect() > VERIFY_TOL {
            return Err(Error::Argument("expected orthogonal projections".into()));
        }
    }
    if (&z_plus.matmul(z_minus) - z_minus).max_abs() > VERIFY_TOL {
        return Err(Error::Argument("range of z- is not contained in range of z+".into()));
    }
    let z = z_plus - z_minus;
    if z.max_abs() <= VERIFY_TOL {
        return Err(Error::ZeroDenominator("z+ equals z-"));
    }
    Ok(op.matrix().matmul(&z).trace() / z.trace())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn jordan() -> Operator {
        Operator::new(CMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap()).unwrap()
    }

    fn example_2_4_first() -> Operator {
        Operator::new(
            CMatrix::from_rows(&[
                vec![c(1.0, 1.0), c(0.0, 0.0), c(0.0, 0.0)],
                vec![c(0.0, 0.0), c(1.0, 2.0), c(1.0, 0.0)],
                vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)],
            ])
            .unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn commutant_dimensions() {
        let zero = Operator::new(CMatrix::zeros(2, 2)).unwrap();
        assert_eq!(commutant_basis(&zero).len(), 4);
        let diag = Operator::from_parts(&CMatrix::diag_real(&[1.0, 2.0]), &CMatrix::diag_real(&[3.0, 5.0])).unwrap();
        assert_eq!(commutant_basis(&diag).len(), 2);
        assert!(commutant_basis(&example_2_4_first()).len() >= 2);
        assert_eq!(commutant_basis(&jordan()).len(), 1);
    }

    #[test]
    fn commutant_elements_commute() {
        let op = example_2_4_first();
        for x in commutant_basis(&op) {
            assert!(op.b1().commutator(&x).max_abs() < 1e-10);
            assert!(op.b2().commutator(&x).max_abs() < 1e-10);
            assert!((x.frobenius_norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn diagonal_operator_splits_completely() {
        let vals = [c(1.0, 0.0), c(0.0, 2.0), c(-1.0, 0.5)];
        let op = Operator::new(CMatrix::diag(&vals)).unwrap();
        let s = reducing_subspaces(&op, 1e-8, 7).unwrap();
        assert_eq!(s.block_dims, vec![1, 1, 1]);
        assert_eq!(s.reducing_eigenvalues.len(), 3);
        for v in vals {
            assert!(s.reducing_eigenvalues.iter().any(|(l, m)| (l - v).norm() < 1e-10 && *m == 1));
        }
    }

    #[test]
    fn jordan_block_is_irreducible() {
        let s = reducing_subspaces(&jordan(), 1e-8, 1).unwrap();
        assert_eq!(s.block_dims, vec![2]);
        assert!(s.reducing_eigenvalues.is_empty());
    }

    #[test]
    fn reducible_example_blocks() {
        let op = example_2_4_first();
        let s = reducing_subspaces(&op, 1e-8, 3).unwrap();
        let mut dims = s.block_dims.clone();
        dims.sort();
        assert_eq!(dims, vec![1, 2]);
        let one = s.block_dims.iter().position(|&d| d == 1).unwrap();
        assert!((&s.projections[one] - &CMatrix::diag_real(&[1.0, 0.0, 0.0])).max_abs() < 1e-9);
        assert_eq!(s.reducing_eigenvalues.len(), 1);
        assert!((s.reducing_eigenvalues[0].0 - c(1.0, 1.0)).norm() < 1e-10);
    }

    #[test]
    fn repeated_eigenvalue_multiplicity() {
        let op = Operator::new(CMatrix::diag(&[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 3.0)])).unwrap();
        let s = reducing_subspaces(&op, 1e-8, 0).unwrap();
        assert_eq!(s.block_dims.len(), 3);
        assert!(s
            .reducing_eigenvalues
            .iter()
            .any(|(l, m)| (l - c(1.0, 0.0)).norm() < 1e-10 && *m == 2));
    }

    #[test]
    fn reducing_eigenvalue_examples() {
        let op = Operator::new(CMatrix::diag_real(&[0.0, 1.0])).unwrap();
        assert!(is_reducing_eigenvalue(&op, c(0.0, 0.0), 1e-9));
        assert!(!is_reducing_eigenvalue(&jordan(), c(0.0, 0.0), 1e-7));
        assert!(is_reducing_eigenvalue(&example_2_4_first(), c(1.0, 1.0), 1e-9));
        assert!(!is_reducing_eigenvalue(&example_2_4_first(), c(1.0, 0.0), 1e-7));
    }

    #[test]
    fn slopes() {
        let op = example_2_4_first();
        let zero = CMatrix::zeros(3, 3);
        let one = CMatrix::identity(3);
        let s = complex_slope(&op, &zero, &one).unwrap();
        assert!((s - op.tau()).norm() < 1e-14);
        let e1 = CMatrix::diag_real(&[1.0, 0.0, 0.0]);
        assert!((complex_slope(&op, &zero, &e1).unwrap() - c(1.0, 1.0)).norm() < 1e-14);
        let d = Operator::new(CMatrix::diag(&[c(0.0, 2.0), c(0.0, 0.0)])).unwrap();
        let z = CMatrix::diag_real(&[1.0, 0.0]);
        assert!((complex_slope(&d, &CMatrix::zeros(2, 2), &z).unwrap() - c(0.0, 2.0)).norm() < 1e-14);
        assert!(matches!(complex_slope(&op, &e1, &e1), Err(Error::ZeroDenominator(_))));
        let e2 = CMatrix::diag_real(&[0.0, 1.0, 0.0]);
        assert!(matches!(complex_slope(&op, &e2, &e1), Err(Error::Argument(_))));
    }
}
