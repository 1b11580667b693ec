//! Worked examples with known answers.

use std::f64::consts::{FRAC_1_SQRT_2, TAU};

use kscale::linalg::{CMatrix, Operator, C64};
use kscale::pencil::{char_poly_bivariate, critical_angles};
use kscale::range::{trace_boundary, BoundaryKind, Touch};
use kscale::scale::{body_hausdorff, build_scale, flat_faces, isotrace_slice, Point3};
use kscale::structure::{commutant_basis, complex_slope, reducing_subspaces};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn op(rows: &[Vec<C64>]) -> Operator {
    Operator::new(CMatrix::from_rows(rows).unwrap()).unwrap()
}

fn disk_example() -> Operator {
    op(&[vec![c(1.0, 0.5), c(0.0, 0.5)], vec![c(0.0, 0.5), c(0.0, 0.5)]])
}

fn flat_spot_example() -> Operator {
    let b1 = CMatrix::from_real_rows(&[&[1.0, 0.0, 1.0], &[0.0, 2.0, 1.0], &[1.0, 1.0, 3.0]]).unwrap();
    let b2 = CMatrix::diag_real(&[1.0, 1.0, 0.0]);
    Operator::from_parts(&b1, &b2).unwrap()
}

fn eight_face_example() -> Operator {
    let mut b1 = CMatrix::zeros(5, 5);
    let mut b2 = CMatrix::zeros(5, 5);
    for (i, j) in [(1, 3), (2, 4)] {
        b1[(i, j)] = c(1.0, 0.0);
        b1[(j, i)] = c(1.0, 0.0);
    }
    for (i, j) in [(0, 3), (1, 4)] {
        b2[(i, j)] = c(1.0, 0.0);
        b2[(j, i)] = c(1.0, 0.0);
    }
    Operator::from_parts(&b1, &b2).unwrap()
}

fn reducible_pair() -> (Operator, Operator) {
    let s = FRAC_1_SQRT_2;
    let first = op(&[
        vec![c(1.0, 1.0), c(0.0, 0.0), c(0.0, 0.0)],
        vec![c(0.0, 0.0), c(1.0, 2.0), c(1.0, 0.0)],
        vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)],
    ]);
    let second = op(&[
        vec![c(1.0, 0.0), c(s, 0.0), c(0.0, 0.0)],
        vec![c(s, 0.0), c(1.0, 1.0), c(s, 0.0)],
        vec![c(0.0, 0.0), c(s, 0.0), c(1.0, 2.0)],
    ]);
    (first, second)
}

fn close(a: Point3, b: Point3, tol: f64) -> bool {
    (0..3).all(|i| (a[i] - b[i]).abs() <= tol)
}

#[test]
fn disk_support_function() {
    let b = trace_boundary(&disk_example(), 1, 3600, 1e-9).unwrap();
    assert_eq!(b.kind, BoundaryKind::Region);
    assert!(b.corners.is_empty() && b.segments.is_empty());
    assert_eq!(b.arcs.len(), 1);
    assert!(b.arcs[0].closed);
    let center = c(0.5, 0.5);
    for s in &b.samples {
        let e = C64::from_polar(1.0, -s.theta);
        let want = (e * center).re + 0.5;
        assert!((s.r - want).abs() < 1e-12, "theta {}: {} vs {want}", s.theta, s.r);
        let Touch::Point(p) = s.touch else {
            panic!("segment touch on a disk");
        };
        assert!(((p - center).norm() - 0.5).abs() < 1e-12);
    }
}

#[test]
fn disk_has_no_critical_angles() {
    let set = critical_angles(&disk_example(), 3600, 1e-7).unwrap();
    assert!(set.angles.is_empty(), "{:?}", set.angles);
}

#[test]
fn disk_body_poles_and_slice() {
    let body = build_scale(&disk_example(), 2000, 1e-9).unwrap();
    assert!(body.vertices.iter().any(|&v| close(v, [0.0; 3], 1e-12)));
    assert!(body.vertices.iter().any(|&v| close(v, [1.0, 0.5, 0.5], 1e-12)));
    assert!(flat_faces(&body, 1e-7).is_empty());
    let slice = isotrace_slice(&disk_example(), 1, 720).unwrap();
    for p in &slice.polygon {
        assert!((p[0] - 0.5).abs() < 1e-15);
        let r = ((p[1] - 0.25).powi(2) + (p[2] - 0.25).powi(2)).sqrt();
        assert!((r - 0.25).abs() < 1e-12);
    }
}

#[test]
fn flat_spot_face_through_origin() {
    let body = build_scale(&flat_spot_example(), 2000, 1e-9).unwrap();
    let faces = flat_faces(&body, 1e-7);
    // the range projection of b2 is diag(1, 1, 0)
    let top = [2.0 / 3.0, 1.0, 2.0 / 3.0];
    let face = faces
        .iter()
        .find(|f| f.vertices.iter().any(|&v| close(v, [0.0; 3], 1e-9)))
        .expect("a flat face at the origin");
    assert!(face.vertices.iter().any(|&v| close(v, top, 1e-9)), "{:?}", face.vertices);
    assert!(face.area > 1e-3);
    assert!(face.levels.0 < 1e-12 && face.levels.1 > 0.5);
}

#[test]
fn eight_flat_faces() {
    let op = eight_face_example();
    for dirs in [2000, 6000] {
        let body = build_scale(&op, dirs, 1e-9).unwrap();
        let faces = flat_faces(&body, 1e-7);
        assert_eq!(faces.len(), 8, "{dirs} directions");
    }
}

#[test]
fn reducible_pair_shares_pencil_and_body() {
    let (a, b) = reducible_pair();
    let (fa, fb) = (char_poly_bivariate(&a), char_poly_bivariate(&b));
    assert!(fa.max_coeff_diff(&fb) < 1e-12);
    // the cubic factors as (y - 1 - z)(y^2 - 2y - 2zy + 2z), up to the y^3 sign
    for (z, y) in [(c(0.3, -0.2), c(1.1, 0.4)), (c(-1.0, 0.5), c(0.0, 2.0)), (c(2.0, 0.0), c(-0.5, 0.0))] {
        let want = -((y - 1.0 - z) * (y * y - y * 2.0 - z * y * 2.0 + z * 2.0));
        assert!((fa.eval(z, y) - want).norm() < 1e-12);
    }
    let (ba, bb) = (build_scale(&a, 2000, 1e-9).unwrap(), build_scale(&b, 2000, 1e-9).unwrap());
    assert!(body_hausdorff(&ba, &bb) < 1e-8);
}

#[test]
fn reducible_pair_structure() {
    let (a, b) = reducible_pair();
    assert_eq!(commutant_basis(&a).len(), 2);
    assert_eq!(commutant_basis(&b).len(), 1);

    let sa = reducing_subspaces(&a, 1e-8, 1).unwrap();
    let mut dims = sa.block_dims.clone();
    dims.sort_unstable();
    assert_eq!(dims, vec![1, 2]);
    assert_eq!(sa.reducing_eigenvalues.len(), 1);
    let (lambda, mult) = sa.reducing_eigenvalues[0];
    assert!((lambda - c(1.0, 1.0)).norm() < 1e-9 && mult == 1);

    let sb = reducing_subspaces(&b, 1e-8, 1).unwrap();
    assert_eq!(sb.block_dims, vec![3]);
    assert!(sb.reducing_eigenvalues.is_empty());

    let e0 = CMatrix::diag_real(&[1.0, 0.0, 0.0]);
    let slope = complex_slope(&a, &CMatrix::zeros(3, 3), &e0).unwrap();
    assert!((slope - c(1.0, 1.0)).norm() < 1e-12);
}

#[test]
fn reducible_pair_range_is_a_disk() {
    // the two-dimensional block is (1 + i) plus a nilpotent of norm 2, so the
    // reducing eigenvalue sits at the center rather than on a corner
    let (a, _) = reducible_pair();
    let b = trace_boundary(&a, 1, 3600, 1e-9).unwrap();
    assert!(b.corners.is_empty());
    for s in &b.samples {
        let want = (C64::from_polar(1.0, -s.theta) * c(1.0, 1.0)).re + 1.0;
        assert!((s.r - want).abs() < 1e-10);
    }
}

#[test]
fn jordan_block_disk() {
    let j = op(&[vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(0.0, 0.0), c(0.0, 0.0)]]);
    let b = trace_boundary(&j, 1, 720, 1e-9).unwrap();
    assert!(b.corners.is_empty());
    for s in &b.samples {
        assert!((s.r - 0.5).abs() < 1e-12);
    }
    let angles: Vec<f64> = b.samples.iter().map(|s| s.theta).collect();
    assert!((angles[1] - angles[0] - TAU / 720.0).abs() < 1e-12);
}
