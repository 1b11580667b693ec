//! Seeded matrix generators and sampling oracles.
//!
//! Random projections only ever land inside `W_k`, so the cloud checks here
//! are one-sided: they can refute an outer approximation, never certify a
//! boundary.

use std::f64::consts::TAU;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{orthonormalize, top_k_sum, CMatrix, Operator, C64};
use crate::par;
use crate::range::{classify, trace_boundary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatrixKind {
    /// Independent complex Gaussian entries.
    Ginibre,
    /// Hermitian part of a Ginibre matrix.
    Hermitian,
    /// Diagonal with complex Gaussian entries.
    Normal,
    /// `u d u*` with `u` Haar unitary and `d` complex Gaussian diagonal.
    UnitaryConjugatedDiagonal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomSpec {
    pub n: usize,
    pub kind: MatrixKind,
    pub seed: u64,
}

impl RandomSpec {
    pub fn new(n: usize, kind: MatrixKind, seed: u64) -> Self {
        Self { n, kind, seed }
    }

    pub fn matrix(&self) -> CMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let n = self.n;
        match self.kind {
            MatrixKind::Ginibre => ginibre(n, n, &mut rng),
            MatrixKind::Hermitian => ginibre(n, n, &mut rng).hermitian_part(),
            MatrixKind::Normal | MatrixKind::UnitaryConjugatedDiagonal => {
                let (d, u) = self.normal_parts().expect("normal kind");
                u.matmul(&CMatrix::diag(&d)).matmul(&u.adjoint())
            }
        }
    }

    /// The spectrum `d` and unitary `u` with `matrix() = u diag(d) u*`, for
    /// the normal kinds.
    pub fn normal_parts(&self) -> Option<(Vec<C64>, CMatrix)> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let d = gaussian_vec(self.n, &mut rng);
        match self.kind {
            MatrixKind::Normal => Some((d, CMatrix::identity(self.n))),
            MatrixKind::UnitaryConjugatedDiagonal => Some((d, haar_unitary(self.n, &mut rng))),
            _ => None,
        }
    }

    pub fn operator(&self) -> Result<Operator> {
        Operator::new(self.matrix())
    }
}

fn gaussian(rng: &mut ChaCha8Rng) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn gaussian_vec(n: usize, rng: &mut ChaCha8Rng) -> Vec<C64> {
    (0..n).map(|_| gaussian(rng)).collect()
}

/// `rows x cols` matrix of standard complex Gaussians.
pub fn ginibre(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

fn gaussian_frame(n: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<C64>> {
    let mut cols: Vec<Vec<C64>> = (0..k).map(|_| gaussian_vec(n, rng)).collect();
    // Gram-Schmidt leaves a positive diagonal in the triangular factor,
    // which is exactly the phase fix that makes the result Haar.
    orthonormalize(&mut cols);
    cols
}

/// Haar-distributed unitary.
pub fn haar_unitary(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    CMatrix::from_columns(n, &gaussian_frame(n, n, rng))
}

/// `q q*` for the first `k` columns of an orthonormalized Gaussian matrix.
pub fn random_rank_k_projection(n: usize, k: usize, seed: u64) -> Result<CMatrix> {
    if k > n {
        return Err(Error::KOutOfRange { k, n });
    }
    if k == n {
        return Ok(CMatrix::identity(n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = CMatrix::from_columns(n, &gaussian_frame(n, k, &mut rng));
    Ok(q.matmul(&q.adjoint()))
}

/// `(n/k) tau(c p)` for `count` independent random rank-`k` projections.
///
/// Sample `j` draws from stream `j` of the seeded generator, so the cloud
/// does not depend on thread scheduling.
pub fn sample_wk_cloud(op: &Operator, k: usize, count: usize, seed: u64) -> Result<Vec<C64>> {
    let n = op.dim();
    if k == 0 || k > n {
        return Err(Error::KOutOfRange { k, n });
    }
    let c = op.matrix();
    Ok(par::map_range(count, |j| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(j as u64);
        let frame = gaussian_frame(n, k, &mut rng);
        let sum: C64 = frame.iter().map(|q| c.quadratic_form(q)).sum();
        sum / k as f64
    }))
}

/// Comparison of a point cloud with the outer polygon cut out by the
/// support lines at `grid` equally spaced angles.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Sandwich {
    /// Largest `Re(e^{-i theta} w) - r_theta` over cloud points and angles.
    /// Non-positive when every point is inside.
    pub max_violation: f64,
    /// Largest `r_theta - max_w Re(e^{-i theta} w)`: the support-function
    /// distance from the cloud hull to the outer polygon.
    pub hausdorff: f64,
    /// `max_theta (r_theta + r_{theta + pi})`.
    pub diameter: f64,
}

pub fn sandwich(op: &Operator, k: usize, cloud: &[C64], grid: usize) -> Result<Sandwich> {
    let n = op.dim();
    if k == 0 || k > n {
        return Err(Error::KOutOfRange { k, n });
    }
    if grid < 2 || !grid.is_multiple_of(2) || cloud.is_empty() {
        return Err(Error::Argument("need an even grid and a non-empty cloud".into()));
    }
    let rows = par::map_range(grid, |i| {
        let theta = TAU * i as f64 / grid as f64;
        let r = top_k_sum(&op.eigenvalues_theta(theta), k).expect("k checked") / k as f64;
        let rot = C64::from_polar(1.0, -theta);
        let h = cloud.iter().map(|w| (rot * w).re).fold(f64::NEG_INFINITY, f64::max);
        (r, h)
    });
    let half = grid / 2;
    let mut out = Sandwich {
        max_violation: f64::NEG_INFINITY,
        hausdorff: 0.0,
        diameter: 0.0,
    };
    for (i, &(r, h)) in rows.iter().enumerate() {
        out.max_violation = out.max_violation.max(h - r);
        out.hausdorff = out.hausdorff.max(r - h);
        out.diameter = out.diameter.max(r + rows[(i + half) % grid].0);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanArm {
    /// Ginibre draws with numerically normal ones rejected.
    NonNormal,
    /// Haar-conjugated diagonal draws; every trial should be a polygon.
    NormalControl,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub seed: u64,
    pub matrix: Vec<Vec<C64>>,
    pub segment_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub grid: usize,
    pub arm: ScanArm,
    /// Trials whose half-rank range traced as a polygon.
    pub polygon_trials: usize,
    /// Non-normal trials that traced as a polygon. Always empty for the
    /// control arm.
    pub counterexamples: Vec<Counterexample>,
    /// Draws discarded as numerically normal.
    pub rejected_draws: usize,
    pub summary: String,
    /// Wall-clock seconds; the only field that varies between runs.
    pub elapsed: f64,
}

/// Relative commutator size below which a draw counts as normal.
pub const NORMAL_REJECT: f64 = 1e-6;

/// Traces `W_{n/2}` for `trials` random matrices and records those that
/// come out polygonal. Trial `t` uses seed `seed + t`.
pub fn half_rank_polygon_scan(n: usize, trials: usize, grid: usize, seed: u64, arm: ScanArm) -> Result<ScanReport> {
    if n == 0 || !n.is_multiple_of(2) {
        return Err(Error::Argument(format!("dimension must be even and positive, got {n}")));
    }
    if trials == 0 {
        return Err(Error::Argument("need at least one trial".into()));
    }
    let start = Instant::now();
    let k = n / 2;
    let outcomes = par::map_range(trials, |t| -> Result<(u64, CMatrix, usize, bool, usize)> {
        let trial_seed = seed.wrapping_add(t as u64);
        let mut rejected = 0;
        let c = match arm {
            ScanArm::NormalControl => RandomSpec::new(n, MatrixKind::UnitaryConjugatedDiagonal, trial_seed).matrix(),
            ScanArm::NonNormal => {
                let mut rng = ChaCha8Rng::seed_from_u64(trial_seed);
                loop {
                    let c = ginibre(n, n, &mut rng);
                    let comm = (&c.matmul(&c.adjoint()) - &c.adjoint().matmul(&c)).frobenius_norm();
                    let norm2 = c.frobenius_norm().powi(2);
                    if comm > NORMAL_REJECT * norm2 {
                        break c;
                    }
                    rejected += 1;
                }
            }
        };
        let op = Operator::new(c.clone())?;
        let boundary = trace_boundary(&op, k, grid, 1e-9)?;
        let cls = classify(&boundary, &op);
        Ok((trial_seed, c, cls.segment_count, cls.is_polygon, rejected))
    });
    let mut report = ScanReport {
        n,
        trials,
        seed,
        grid,
        arm,
        polygon_trials: 0,
        counterexamples: Vec::new(),
        rejected_draws: 0,
        summary: String::new(),
        elapsed: 0.0,
    };
    for o in outcomes {
        let (trial_seed, c, segment_count, is_polygon, rejected) = o?;
        report.rejected_draws += rejected;
        if is_polygon {
            report.polygon_trials += 1;
            if arm == ScanArm::NonNormal {
                report.counterexamples.push(Counterexample {
                    seed: trial_seed,
                    matrix: (0..n).map(|i| c.row(i).to_vec()).collect(),
                    segment_count,
                });
            }
        }
    }
    report.summary = match arm {
        ScanArm::NonNormal if report.counterexamples.is_empty() => format!(
            "no counterexample in {trials} trials (sampled search; absence is not a proof)"
        ),
        ScanArm::NonNormal => format!(
            "{} polygonal non-normal candidates in {trials} trials; resolution limited by grid {grid}",
            report.counterexamples.len()
        ),
        ScanArm::NormalControl => format!("{} of {trials} normal control trials traced as polygons", report.polygon_trials),
    };
    report.elapsed = start.elapsed().as_secs_f64();
    Ok(report)
}
