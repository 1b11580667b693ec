use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use super::support::{touch_from_eig, Touch, MERGE_REL};
use crate::error::{Error, Result};
use crate::linalg::{top_k_sum, Operator, C64};
use crate::par;
use crate::pencil::critical_angles;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub theta: f64,
    pub r: f64,
    pub touch: Touch,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub start: C64,
    pub end: C64,
    pub theta: f64,
}

/// A stationary touch point over the normal angles `(theta_lo, theta_hi)`.
/// `theta_hi` may exceed `2 pi` when the range wraps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Corner {
    pub lambda: C64,
    pub theta_lo: f64,
    pub theta_hi: f64,
}

/// A maximal run of normal angles along which the boundary is curved.
/// `theta_end` may exceed `2 pi` when the run wraps; `closed` marks a run
/// covering the whole circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Arc {
    pub theta_start: f64,
    pub theta_end: f64,
    pub closed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum BoundaryKind {
    /// Two-dimensional range.
    Region,
    /// The range is a line segment.
    Segment { start: C64, end: C64 },
    /// The range is a single point.
    Point { at: C64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RangeBoundary {
    pub k: usize,
    pub kind: BoundaryKind,
    pub samples: Vec<Sample>,
    pub segments: Vec<Segment>,
    pub corners: Vec<Corner>,
    pub arcs: Vec<Arc>,
    pub critical_angles: Vec<f64>,
    /// Length unit used for the geometric tolerances.
    pub scale: f64,
}

impl RangeBoundary {
    /// Every distinct touch point (segment endpoints included).
    pub fn touch_points(&self) -> Vec<C64> {
        self.samples.iter().flat_map(|s| s.touch.points()).collect()
    }

    /// Whether `w` satisfies every sampled support inequality, up to `slack`.
    pub fn contains(&self, w: C64, slack: f64) -> bool {
        self.samples
            .iter()
            .all(|s| (C64::from_polar(1.0, -s.theta) * w).re <= s.r + slack)
    }
}

/// Samples the boundary of `W_k` on `grid` equally spaced normal angles plus
/// the critical angles of the pencil, and splits it into segments, corners
/// and curved arcs.
///
/// `tol` is the relative tie tolerance for the `k`-th eigenvalue gap; ties
/// are declared when the gap is at most `tol * (1 + ||b_theta||)`.
pub fn trace_boundary(op: &Operator, k: usize, grid: usize, tol: f64) -> Result<RangeBoundary> {
    let n = op.dim();
    if k == 0 || k > n {
        return Err(Error::KOutOfRange { k, n });
    }
    if grid < 360 {
        return Err(Error::Argument(format!("grid must be at least 360, got {grid}")));
    }
    if !(tol > 0.0) {
        return Err(Error::Argument("tolerance must be positive".into()));
    }
    let mu = op.tau();
    let centred = op.shifted(mu);
    let scale = centred.norm().max(op.norm() * f64::EPSILON).max(1e-300);
    let grid_angles: Vec<f64> = (0..grid).map(|j| TAU * j as f64 / grid as f64).collect();

    let point_kind = k == n || centred.norm() <= 1e-14 * op.norm().max(1e-300);
    let crit = if point_kind {
        Vec::new()
    } else {
        critical_angles(&centred, grid, 1e-7)?.angles
    };
    let mut thetas = grid_angles;
    thetas.extend(crit.iter().copied());
    thetas.sort_by(f64::total_cmp);
    thetas.dedup_by(|a, b| (*a - *b).abs() < 1e-12);

    let samples: Vec<Sample> = par::map_slice(&thetas, |&t| {
        let rot = (C64::from_polar(1.0, -t) * mu).re;
        if point_kind {
            return Sample {
                theta: t,
                r: rot,
                touch: Touch::Point(mu),
            };
        }
        let eig = centred.eig_theta(t);
        let r = top_k_sum(&eig.values, k).expect("k checked") / k as f64;
        let tie = tol * (1.0 + eig.spectral_radius());
        Sample {
            theta: t,
            r: r + rot,
            touch: touch_from_eig(&centred, &eig, k, t, tie).shifted(mu),
        }
    });

    let merge = MERGE_REL * scale;
    if point_kind {
        return Ok(RangeBoundary {
            k,
            kind: BoundaryKind::Point { at: mu },
            samples,
            segments: Vec::new(),
            corners: vec![Corner {
                lambda: mu,
                theta_lo: 0.0,
                theta_hi: TAU,
            }],
            arcs: Vec::new(),
            critical_angles: crit,
            scale,
        });
    }
    if let Some((start, end)) = collinear_extent(&samples, merge) {
        return Ok(RangeBoundary {
            k,
            kind: BoundaryKind::Segment { start, end },
            segments: vec![Segment {
                start,
                end,
                theta: samples
                    .iter()
                    .find(|s| s.touch.is_segment())
                    .map_or(0.0, |s| s.theta),
            }],
            samples,
            corners: segment_end_corners(start, end),
            arcs: Vec::new(),
            critical_angles: crit,
            scale,
        });
    }

    let segments = dedup_segments(
        samples
            .iter()
            .filter_map(|s| match s.touch {
                Touch::Segment(a, b) => Some(Segment {
                    start: a,
                    end: b,
                    theta: s.theta,
                }),
                Touch::Point(_) => None,
            })
            .collect(),
        merge,
    );
    let (corners, in_corner) = find_corners(&samples, merge);
    let arcs = find_arcs(&samples, &in_corner, &crit);

    Ok(RangeBoundary {
        k,
        kind: BoundaryKind::Region,
        samples,
        segments,
        corners,
        arcs,
        critical_angles: crit,
        scale,
    })
}

/// Each end of a segment-shaped range is exposed by a half-circle of normals.
fn segment_end_corners(start: C64, end: C64) -> Vec<Corner> {
    let phi = (end - start).arg();
    let corner = |lambda, lo: f64| Corner {
        lambda,
        theta_lo: lo.rem_euclid(TAU),
        theta_hi: lo.rem_euclid(TAU) + PI,
    };
    vec![corner(end, phi - FRAC_PI_2), corner(start, phi + FRAC_PI_2)]
}

/// Endpoints of the touch-point cloud if it lies on a line.
fn collinear_extent(samples: &[Sample], tol: f64) -> Option<(C64, C64)> {
    let pts: Vec<C64> = samples.iter().flat_map(|s| s.touch.points()).collect();
    let a = pts[0];
    let b = *pts
        .iter()
        .max_by(|x, y| (*x - a).norm().total_cmp(&(*y - a).norm()))?;
    let c = *pts
        .iter()
        .max_by(|x, y| (*x - b).norm().total_cmp(&(*y - b).norm()))?;
    let len = (c - b).norm();
    if len <= tol {
        return None;
    }
    let dir = (c - b) / len;
    let off = pts
        .iter()
        .map(|p| ((p - b) * dir.conj()).im.abs())
        .fold(0.0_f64, f64::max);
    (off <= tol).then_some((b, c))
}

fn dedup_segments(segments: Vec<Segment>, tol: f64) -> Vec<Segment> {
    let mut out: Vec<Segment> = Vec::new();
    for s in segments {
        let dup = out.iter().any(|o| {
            ((o.start - s.start).norm() <= tol && (o.end - s.end).norm() <= tol)
                || ((o.start - s.end).norm() <= tol && (o.end - s.start).norm() <= tol)
        });
        if !dup {
            out.push(s);
        }
    }
    out
}

/// One entry of the boundary walk: a touch point and the sample it came from.
#[derive(Clone, Copy)]
struct Step {
    point: C64,
    sample: usize,
    /// Second endpoint of a segment sample (the run after it starts on a segment).
    after_segment: bool,
    /// First endpoint of a segment sample.
    before_segment: bool,
}

/// Corners are runs of the boundary walk with a stationary touch point that
/// either cover at least three samples or sit between two segments.
fn find_corners(samples: &[Sample], tol: f64) -> (Vec<Corner>, Vec<bool>) {
    let mut walk = Vec::with_capacity(samples.len() + 8);
    for (i, s) in samples.iter().enumerate() {
        match s.touch {
            Touch::Point(p) => walk.push(Step {
                point: p,
                sample: i,
                after_segment: false,
                before_segment: false,
            }),
            Touch::Segment(a, b) => {
                walk.push(Step {
                    point: a,
                    sample: i,
                    after_segment: false,
                    before_segment: true,
                });
                walk.push(Step {
                    point: b,
                    sample: i,
                    after_segment: true,
                    before_segment: false,
                });
            }
        }
    }
    let m = walk.len();
    let same = |i: usize, j: usize| (walk[i % m].point - walk[j % m].point).norm() <= tol;
    // Start the cyclic scan at a run boundary, if there is one.
    let Some(start) = (0..m).find(|&i| !same(i + m - 1, i)) else {
        // Constant touch point everywhere; the range is a point.
        return (Vec::new(), vec![true; samples.len()]);
    };
    let mut in_corner = vec![false; samples.len()];
    let mut corners = Vec::new();
    let mut i = 0;
    while i < m {
        let first = (start + i) % m;
        let mut len = 1;
        while len < m && same(start + i + len - 1, start + i + len) {
            len += 1;
        }
        let last = (start + i + len - 1) % m;
        let idx: Vec<usize> = (0..len).map(|d| walk[(first + d) % m].sample).collect();
        let mut distinct = idx.clone();
        distinct.dedup();
        let bracketed = walk[first].after_segment && walk[last].before_segment;
        if distinct.len() >= 3 || bracketed {
            let lo = samples[walk[first].sample].theta;
            let mut hi = samples[walk[last].sample].theta;
            if hi < lo {
                hi += TAU;
            }
            let mid = distinct[distinct.len() / 2];
            corners.push(Corner {
                lambda: match samples[mid].touch {
                    Touch::Point(p) => p,
                    _ => walk[first].point,
                },
                theta_lo: lo,
                theta_hi: hi,
            });
            for &s in &distinct {
                if !samples[s].touch.is_segment() {
                    in_corner[s] = true;
                }
            }
        }
        i += len;
    }
    corners.sort_by(|a, b| a.theta_lo.total_cmp(&b.theta_lo));
    (corners, in_corner)
}

/// Maximal runs of point samples outside corners, cut at critical angles.
fn find_arcs(samples: &[Sample], in_corner: &[bool], crit: &[f64]) -> Vec<Arc> {
    let m = samples.len();
    let is_cut = |s: &Sample| crit.iter().any(|c| (c - s.theta).abs() < 1e-12);
    let free: Vec<bool> = samples
        .iter()
        .zip(in_corner)
        .map(|(s, &c)| !c && !s.touch.is_segment() && !is_cut(s))
        .collect();
    if free.iter().all(|&f| f) {
        return vec![Arc {
            theta_start: 0.0,
            theta_end: TAU,
            closed: true,
        }];
    }
    let Some(start) = (0..m).find(|&i| !free[i]) else {
        return Vec::new();
    };
    let mut arcs = Vec::new();
    let mut i = 1;
    while i <= m {
        let j = (start + i) % m;
        if free[j] {
            let first = j;
            let mut len = 0;
            while free[(first + len) % m] {
                len += 1;
            }
            let last = (first + len - 1) % m;
            let lo = samples[first].theta;
            let mut hi = samples[last].theta;
            if hi < lo {
                hi += TAU;
            }
            arcs.push(Arc {
                theta_start: lo,
                theta_end: hi,
                closed: false,
            });
            i += len;
        } else {
            i += 1;
        }
    }
    arcs.sort_by(|a, b| a.theta_start.total_cmp(&b.theta_start));
    arcs
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CornerReport {
    pub lambda: C64,
    pub theta_lo: f64,
    pub theta_hi: f64,
    /// Distance to the nearest other sampled extreme point.
    pub nearest_extreme: f64,
    pub isolated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub is_polygon: bool,
    pub normal_flag: bool,
    /// `is_polygon == normal_flag`; only meaningful for `0 < k < n`.
    pub agreement: Option<bool>,
    pub corners: Vec<CornerReport>,
    pub segment_count: usize,
}

/// Polygon test, independent normality test, and corner isolation.
pub fn classify(boundary: &RangeBoundary, op: &Operator) -> Classification {
    let is_polygon = boundary.arcs.is_empty();
    let normal_flag = op.is_normal();
    let agreement = (boundary.k < op.dim()).then_some(is_polygon == normal_flag);
    let merge = MERGE_REL * boundary.scale;
    let grid = boundary.samples.len().max(1);
    let resolution = boundary.scale * TAU / grid as f64;
    let extremes = boundary.touch_points();
    let corners = boundary
        .corners
        .iter()
        .map(|c| {
            let nearest = extremes
                .iter()
                .map(|p| (p - c.lambda).norm())
                .filter(|&d| d > merge)
                .fold(f64::INFINITY, f64::min);
            CornerReport {
                lambda: c.lambda,
                theta_lo: c.theta_lo,
                theta_hi: c.theta_hi,
                nearest_extreme: nearest,
                isolated: nearest > resolution,
            }
        })
        .collect();
    Classification {
        is_polygon,
        normal_flag,
        agreement,
        corners,
        segment_count: boundary.segments.len(),
    }
}

/// Largest residual of least-squares polynomial fits of `values` against
/// `thetas` over sliding windows of `window` consecutive samples.
///
/// Windows never extend past the ends of the input, so the caller passes
/// one interval between critical angles at a time. Intervals shorter than
/// `degree + 2` samples are interpolated exactly and report zero.
pub fn local_fit_residual(thetas: &[f64], values: &[f64], degree: usize, window: usize) -> f64 {
    let m = thetas.len();
    let w = window.min(m);
    if w < degree + 2 {
        return 0.0;
    }
    let mut worst = 0.0_f64;
    for start in 0..=m - w {
        let ts = &thetas[start..start + w];
        let ys = &values[start..start + w];
        let centre = 0.5 * (ts[0] + ts[w - 1]);
        let half = (0.5 * (ts[w - 1] - ts[0])).max(f64::MIN_POSITIVE);
        // Legendre-like conditioning via Gram-Schmidt on scaled monomials.
        let mut basis: Vec<Vec<f64>> = (0..=degree)
            .map(|p| ts.iter().map(|t| ((t - centre) / half).powi(p as i32)).collect())
            .collect();
        for i in 0..basis.len() {
            for _ in 0..2 {
                for j in 0..i {
                    let d: f64 = basis[i].iter().zip(&basis[j]).map(|(a, b)| a * b).sum();
                    let bj = basis[j].clone();
                    for (a, b) in basis[i].iter_mut().zip(&bj) {
                        *a -= d * b;
                    }
                }
            }
            let nrm = basis[i].iter().map(|a| a * a).sum::<f64>().sqrt();
            if nrm > 0.0 {
                basis[i].iter_mut().for_each(|a| *a /= nrm);
            }
        }
        let mut resid = ys.to_vec();
        for q in &basis {
            let d: f64 = resid.iter().zip(q).map(|(a, b)| a * b).sum();
            for (a, b) in resid.iter_mut().zip(q) {
                *a -= d * b;
            }
        }
        worst = resid.iter().fold(worst, |m, r| m.max(r.abs()));
    }
    worst
}

/// Splits the samples of a boundary into the open intervals between
/// consecutive critical angles, as `(thetas, r values)` pairs in angle order.
pub fn analytic_pieces(boundary: &RangeBoundary) -> Vec<(Vec<f64>, Vec<f64>)> {
    let crit = &boundary.critical_angles;
    let is_cut = |t: f64| crit.iter().any(|c| (c - t).abs() < 1e-12);
    let s = &boundary.samples;
    let m = s.len();
    let start = (0..m).find(|&i| is_cut(s[i].theta)).unwrap_or(0);
    let mut pieces = Vec::new();
    let mut cur: (Vec<f64>, Vec<f64>) = (Vec::new(), Vec::new());
    let mut offset = 0.0;
    for d in 0..m {
        let i = (start + d) % m;
        if i == 0 && d > 0 {
            offset = TAU;
        }
        if is_cut(s[i].theta) {
            if !cur.0.is_empty() {
                pieces.push(std::mem::take(&mut cur));
            }
            continue;
        }
        cur.0.push(s[i].theta + offset);
        cur.1.push(s[i].r);
    }
    if !cur.0.is_empty() {
        pieces.push(cur);
    }
    pieces
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CMatrix;

    fn diag(v: &[C64]) -> Operator {
        Operator::new(CMatrix::diag(v)).unwrap()
    }

    fn triangle() -> Operator {
        diag(&[C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 1.0)])
    }

    fn example_2_1() -> Operator {
        Operator::new(
            CMatrix::from_rows(&[
                vec![C64::new(1.0, 0.5), C64::new(0.0, 0.5)],
                vec![C64::new(0.0, 0.5), C64::new(0.0, 0.5)],
            ])
            .unwrap(),
        )
        .unwrap()
    }

    fn has(points: &[C64], p: C64) -> bool {
        points.iter().any(|q| (q - p).norm() < 1e-9)
    }

    #[test]
    fn triangle_boundary() {
        let b = trace_boundary(&triangle(), 1, 3600, 1e-9).unwrap();
        assert_eq!(b.kind, BoundaryKind::Region);
        assert_eq!(b.segments.len(), 3, "{:?}", b.segments);
        assert_eq!(b.corners.len(), 3, "{:?}", b.corners);
        assert!(b.arcs.is_empty(), "{:?}", b.arcs);
        let ends: Vec<C64> = b.segments.iter().flat_map(|s| [s.start, s.end]).collect();
        let corners: Vec<C64> = b.corners.iter().map(|c| c.lambda).collect();
        for v in [C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 1.0)] {
            assert!(has(&ends, v) && has(&corners, v));
        }
        let cls = classify(&b, &triangle());
        assert!(cls.is_polygon && cls.normal_flag);
        assert!(cls.corners.iter().all(|c| c.isolated));
    }

    #[test]
    fn triangle_middle_level_is_polygon() {
        let b = trace_boundary(&triangle(), 2, 3600, 1e-9).unwrap();
        let cls = classify(&b, &triangle());
        assert!(cls.is_polygon);
        assert_eq!(b.segments.len(), 3);
    }

    #[test]
    fn disk_boundary() {
        let op = example_2_1();
        let b = trace_boundary(&op, 1, 3600, 1e-9).unwrap();
        assert!(b.segments.is_empty() && b.corners.is_empty());
        assert_eq!(b.arcs.len(), 1);
        assert!(b.arcs[0].closed);
        for s in &b.samples {
            let d = (s.touch.first() - C64::new(0.5, 0.5)).norm();
            assert!((d - 0.5).abs() < 1e-10);
        }
        let cls = classify(&b, &op);
        assert!(!cls.is_polygon && !cls.normal_flag);
    }

    #[test]
    fn nilpotent_boundary_is_circle() {
        let op = Operator::new(CMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap()).unwrap();
        let b = trace_boundary(&op, 1, 3600, 1e-9).unwrap();
        for s in &b.samples {
            assert!((s.touch.first().norm() - 0.5).abs() < 1e-10);
            assert!((s.r - 0.5).abs() < 1e-12);
        }
        let cls = classify(&b, &op);
        assert!(!cls.is_polygon && !cls.normal_flag);
    }

    #[test]
    fn degenerate_kinds() {
        let op = Operator::new(CMatrix::diag_real(&[1.0, 3.0])).unwrap();
        let b = trace_boundary(&op, 1, 360, 1e-9).unwrap();
        match b.kind {
            BoundaryKind::Segment { start, end } => {
                let mut xs = [start.re, end.re];
                xs.sort_by(f64::total_cmp);
                assert!((xs[0] - 1.0).abs() < 1e-12 && (xs[1] - 3.0).abs() < 1e-12);
            }
            k => panic!("{k:?}"),
        }
        let b = trace_boundary(&op, 2, 360, 1e-9).unwrap();
        assert!(matches!(b.kind, BoundaryKind::Point { at } if (at - C64::new(2.0, 0.0)).norm() < 1e-14));
        assert!(classify(&b, &op).is_polygon);
        assert_eq!(b.corners.len(), 1);
        let b = trace_boundary(&op, 1, 360, 1e-9).unwrap();
        let cls = classify(&b, &op);
        assert_eq!(cls.corners.len(), 2);
        assert!(cls.corners.iter().all(|c| c.isolated));
        for c in &b.corners {
            let mid = 0.5 * (c.theta_lo + c.theta_hi);
            let other = b.corners.iter().find(|o| o.lambda != c.lambda).unwrap().lambda;
            assert!((C64::from_polar(1.0, -mid) * (c.lambda - other)).re > 0.0);
        }
        let scalar = Operator::new(CMatrix::identity(3).scale(C64::new(0.0, 2.0))).unwrap();
        let b = trace_boundary(&scalar, 1, 360, 1e-9).unwrap();
        assert!(matches!(b.kind, BoundaryKind::Point { .. }));
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(matches!(trace_boundary(&triangle(), 0, 3600, 1e-9), Err(Error::KOutOfRange { .. })));
        assert!(trace_boundary(&triangle(), 1, 100, 1e-9).is_err());
    }

    #[test]
    fn polynomial_fit_of_smooth_data() {
        let ts: Vec<f64> = (0..200).map(|i| i as f64 * 0.002).collect();
        let ys: Vec<f64> = ts.iter().map(|t| (3.0 * t).sin() + t.cos()).collect();
        assert!(local_fit_residual(&ts, &ys, 8, 25) < 1e-12);
        let kinked: Vec<f64> = ts.iter().map(|t| (t - 0.2).abs()).collect();
        assert!(local_fit_residual(&ts, &kinked, 8, 25) > 1e-4);
    }
}
