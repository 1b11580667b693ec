use serde::{Deserialize, Serialize};

use super::eig::{hermitian_eig, hermitian_eigenvalues, EigSystem};
use super::matrix::{CMatrix, C64, I};
use crate::error::{Error, Result};

/// A complex n x n operator together with its Cartesian decomposition
/// `c = b1 + i b2` and normalized trace.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Operator {
    c: CMatrix,
    b1: CMatrix,
    b2: CMatrix,
    tau: C64,
    norm: f64,
}

/// Splits `c` into its Hermitian parts.
pub fn decompose(c: &CMatrix) -> Result<Operator> {
    Operator::new(c.clone())
}

impl Operator {
    pub fn new(c: CMatrix) -> Result<Self> {
        if !c.is_square() {
            return Err(Error::Dimension {
                rows: c.rows(),
                cols: c.cols(),
            });
        }
        if c.rows() == 0 {
            return Err(Error::Empty);
        }
        for i in 0..c.rows() {
            for j in 0..c.cols() {
                let z = c[(i, j)];
                if !(z.re.is_finite() && z.im.is_finite()) {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
        }
        let b1 = c.hermitian_part();
        let b2 = c.skew_part();
        let tau = normalized_trace(&c)?;
        let r1 = hermitian_eigenvalues(&b1)?;
        let r2 = hermitian_eigenvalues(&b2)?;
        let radius = |v: &[f64]| v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        let norm = radius(&r1).max(radius(&r2));
        Ok(Self {
            c,
            b1,
            b2,
            tau,
            norm,
        })
    }

    /// Builds `b1 + i b2` from a Hermitian pair.
    pub fn from_parts(b1: &CMatrix, b2: &CMatrix) -> Result<Self> {
        if b1.rows() != b2.rows() || b1.cols() != b2.cols() {
            return Err(Error::Dimension {
                rows: b2.rows(),
                cols: b2.cols(),
            });
        }
        Self::new(b1 + &b2.scale(I))
    }

    pub fn dim(&self) -> usize {
        self.c.rows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.c
    }

    pub fn b1(&self) -> &CMatrix {
        &self.b1
    }

    pub fn b2(&self) -> &CMatrix {
        &self.b2
    }

    /// `tau(c) = tr(c) / n`.
    pub fn tau(&self) -> C64 {
        self.tau
    }

    /// Operator-norm estimate `max(||b1||, ||b2||)`, within a factor two of `||c||`.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// `max(norm, 1e-300)`, safe to divide by.
    pub fn scale(&self) -> f64 {
        self.norm.max(1e-300)
    }

    /// `b_t = t1 b1 + t2 b2`.
    pub fn pencil(&self, t1: f64, t2: f64) -> CMatrix {
        self.b1.combine(t1, &self.b2, t2)
    }

    /// `b_theta = Re(e^{-i theta} c) = cos(theta) b1 + sin(theta) b2`.
    pub fn b_theta(&self, theta: f64) -> CMatrix {
        let (s, c) = theta.sin_cos();
        self.pencil(c, s)
    }

    /// `Im(e^{-i theta} c) = cos(theta) b2 - sin(theta) b1`.
    pub fn im_theta(&self, theta: f64) -> CMatrix {
        let (s, c) = theta.sin_cos();
        self.b2.combine(c, &self.b1, -s)
    }

    pub fn eig_theta(&self, theta: f64) -> EigSystem {
        hermitian_eig(&self.b_theta(theta)).expect("pencil members are Hermitian")
    }

    pub fn eigenvalues_theta(&self, theta: f64) -> Vec<f64> {
        self.eig_theta(theta).values
    }

    /// `c - mu 1`.
    pub fn shifted(&self, mu: C64) -> Self {
        let mut c = self.c.clone();
        for i in 0..self.dim() {
            c[(i, i)] -= mu;
        }
        Self::new(c).expect("shift of a valid operator")
    }

    pub fn adjoint(&self) -> CMatrix {
        self.c.adjoint()
    }

    /// Frobenius norm of the self-commutator `c c* - c* c`.
    pub fn commutator_norm(&self) -> f64 {
        let cs = self.c.adjoint();
        self.c.commutator(&cs).frobenius_norm()
    }

    /// `||c c* - c* c|| <= 1e-10 ||c||^2`.
    pub fn is_normal(&self) -> bool {
        self.is_normal_within(1e-10)
    }

    pub fn is_normal_within(&self, rel: f64) -> bool {
        self.commutator_norm() <= rel * self.norm * self.norm
    }
}

pub fn normalized_trace(a: &CMatrix) -> Result<C64> {
    if !a.is_square() {
        return Err(Error::Dimension {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    if a.rows() == 0 {
        return Err(Error::Empty);
    }
    Ok(a.trace() / a.rows() as f64)
}

/// Sum of the first `k` entries of a descending list.
pub fn top_k_sum(values: &[f64], k: usize) -> Result<f64> {
    if k == 0 || k > values.len() {
        return Err(Error::KOutOfRange {
            k,
            n: values.len(),
        });
    }
    Ok(values[..k].iter().sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example_2_1() -> CMatrix {
        CMatrix::from_rows(&[
            vec![C64::new(1.0, 0.5), C64::new(0.0, 0.5)],
            vec![C64::new(0.0, 0.5), C64::new(0.0, 0.5)],
        ])
        .unwrap()
    }

    #[test]
    fn scalar_operator() {
        let op = decompose(&CMatrix::diag_real(&[2.0])).unwrap();
        assert_eq!(op.b1()[(0, 0)], C64::new(2.0, 0.0));
        assert_eq!(op.b2()[(0, 0)], C64::new(0.0, 0.0));
    }

    #[test]
    fn cartesian_parts_of_two_by_two_example() {
        let op = decompose(&example_2_1()).unwrap();
        let b1 = CMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, 0.0]]).unwrap();
        let b2 = CMatrix::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]]).unwrap();
        assert!((op.b1() - &b1).max_abs() < 1e-15);
        assert!((op.b2() - &b2).max_abs() < 1e-15);
        assert!((op.tau() - C64::new(0.5, 0.5)).norm() < 1e-15);
    }

    #[test]
    fn flat_spot_example_roundtrip() {
        let b1 = CMatrix::from_real_rows(&[&[1.0, 0.0, 1.0], &[0.0, 2.0, 1.0], &[1.0, 1.0, 3.0]])
            .unwrap();
        let b2 = CMatrix::diag_real(&[1.0, 1.0, 0.0]);
        let op = Operator::from_parts(&b1, &b2).unwrap();
        assert_eq!(op.b1(), &b1);
        assert_eq!(op.b2(), &b2);
    }

    #[test]
    fn normalized_traces() {
        assert_eq!(normalized_trace(&CMatrix::identity(4)).unwrap(), C64::new(1.0, 0.0));
        assert_eq!(
            normalized_trace(&CMatrix::diag_real(&[1.0, 2.0, 3.0])).unwrap(),
            C64::new(2.0, 0.0)
        );
        assert!((normalized_trace(&example_2_1()).unwrap() - C64::new(0.5, 0.5)).norm() < 1e-15);
    }

    #[test]
    fn top_k_sums() {
        assert_eq!(top_k_sum(&[3.0, 2.0, 1.0], 2).unwrap(), 5.0);
        assert_eq!(top_k_sum(&[1.0, 1.0, 1.0], 3).unwrap(), 3.0);
        assert_eq!(top_k_sum(&[2.0, 2.0, 0.0], 1).unwrap(), 2.0);
        assert!(matches!(top_k_sum(&[1.0], 0), Err(Error::KOutOfRange { .. })));
        assert!(matches!(top_k_sum(&[1.0], 2), Err(Error::KOutOfRange { .. })));
    }

    #[test]
    fn input_errors() {
        assert!(matches!(decompose(&CMatrix::zeros(2, 3)), Err(Error::Dimension { .. })));
        let mut m = CMatrix::identity(2);
        m[(1, 0)] = C64::new(f64::NAN, 0.0);
        assert!(matches!(decompose(&m), Err(Error::NonFinite { row: 1, col: 0 })));
    }
}
