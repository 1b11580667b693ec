//! Incremental 3D convex hull with conflict lists.
//!
//! Visibility tests use the adaptive-precision `orient3d` predicate for the
//! numerator of the point-to-plane distance, then compare against an
//! absolute tolerance. Points within the tolerance of the current hull are
//! dropped.

use std::collections::HashMap;

use robust::{orient3d, Coord3D};

pub type Point3 = [f64; 3];

#[derive(Debug, Clone, PartialEq)]
pub enum HullShape {
    /// Triangles, counterclockwise when seen from outside, indexing the input.
    Solid { faces: Vec<[usize; 3]> },
    /// All points within tolerance of a plane; boundary cycle in order.
    Planar { cycle: Vec<usize> },
    Segment { a: usize, b: usize },
    Point(usize),
}

pub fn sub(a: Point3, b: Point3) -> Point3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn dot3(a: Point3, b: Point3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross(a: Point3, b: Point3) -> Point3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn norm3(a: Point3) -> f64 {
    dot3(a, a).sqrt()
}

fn coord(p: Point3) -> Coord3D<f64> {
    Coord3D {
        x: p[0],
        y: p[1],
        z: p[2],
    }
}

struct Face {
    v: [usize; 3],
    /// `|(b - a) x (c - a)|`
    area2: f64,
    alive: bool,
    conflicts: Vec<usize>,
}

struct Builder<'a> {
    pts: &'a [Point3],
    tol: f64,
    faces: Vec<Face>,
    edges: HashMap<(usize, usize), usize>,
}

impl Builder<'_> {
    /// Signed distance of point `p` above face `f`.
    fn dist(&self, f: usize, p: usize) -> f64 {
        let face = &self.faces[f];
        if face.area2 == 0.0 {
            return 0.0;
        }
        let [a, b, c] = face.v;
        -orient3d(
            coord(self.pts[a]),
            coord(self.pts[b]),
            coord(self.pts[c]),
            coord(self.pts[p]),
        ) / face.area2
    }

    fn add_face(&mut self, v: [usize; 3]) -> usize {
        let [a, b, c] = v.map(|i| self.pts[i]);
        let area2 = norm3(cross(sub(b, a), sub(c, a)));
        let id = self.faces.len();
        self.faces.push(Face {
            v,
            area2,
            alive: true,
            conflicts: Vec::new(),
        });
        for e in 0..3 {
            self.edges.insert((v[e], v[(e + 1) % 3]), id);
        }
        id
    }

    fn neighbour(&self, f: usize, e: usize) -> Option<usize> {
        let v = self.faces[f].v;
        self.edges.get(&(v[(e + 1) % 3], v[e])).copied()
    }

    fn assign(&mut self, p: usize, candidates: &[usize]) {
        let mut best: Option<(usize, f64)> = None;
        for &f in candidates {
            let d = self.dist(f, p);
            if d > self.tol && best.is_none_or(|(_, bd)| d > bd) {
                best = Some((f, d));
            }
        }
        if let Some((f, _)) = best {
            self.faces[f].conflicts.push(p);
        }
    }

    fn add_point(&mut self, start: usize, p: usize) {
        // Visible region by flood fill from the face that owns `p`.
        let mut visible = vec![start];
        let mut seen = HashMap::new();
        seen.insert(start, true);
        let mut i = 0;
        while i < visible.len() {
            let f = visible[i];
            for e in 0..3 {
                if let Some(g) = self.neighbour(f, e) {
                    if seen.contains_key(&g) {
                        continue;
                    }
                    let vis = self.dist(g, p) > self.tol;
                    seen.insert(g, vis);
                    if vis {
                        visible.push(g);
                    }
                }
            }
            i += 1;
        }
        let mut horizon = Vec::new();
        for &f in &visible {
            for e in 0..3 {
                let g = self.neighbour(f, e);
                if g.is_none_or(|g| !seen.get(&g).copied().unwrap_or(false)) {
                    let v = self.faces[f].v;
                    horizon.push((v[e], v[(e + 1) % 3]));
                }
            }
        }
        let mut orphans = Vec::new();
        for &f in &visible {
            self.faces[f].alive = false;
            orphans.append(&mut self.faces[f].conflicts);
            let v = self.faces[f].v;
            for e in 0..3 {
                let key = (v[e], v[(e + 1) % 3]);
                if self.edges.get(&key) == Some(&f) {
                    self.edges.remove(&key);
                }
            }
        }
        let new: Vec<usize> = horizon
            .into_iter()
            .map(|(a, b)| self.add_face([a, b, p]))
            .collect();
        for q in orphans {
            if q != p {
                self.assign(q, &new);
            }
        }
    }
}

/// Convex hull of `points`, treating anything within `tol` of a face as on it.
pub fn convex_hull(points: &[Point3], tol: f64) -> HullShape {
    assert!(!points.is_empty(), "hull of an empty point set");
    let n = points.len();
    let p0 = (0..n)
        .min_by(|&i, &j| points[i].partial_cmp(&points[j]).unwrap_or(std::cmp::Ordering::Equal))
        .unwrap_or(0);
    let far = |from: &dyn Fn(Point3) -> f64| {
        (0..n)
            .map(|i| (i, from(points[i])))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap_or((0, 0.0))
    };
    let (p1, d1) = far(&|p| norm3(sub(p, points[p0])));
    if d1 <= tol {
        return HullShape::Point(p0);
    }
    let axis = sub(points[p1], points[p0]);
    let line_dist = |p: Point3| norm3(cross(sub(p, points[p0]), axis)) / norm3(axis);
    let (p2, d2) = far(&line_dist);
    if d2 <= tol {
        let along = |i: usize| dot3(sub(points[i], points[p0]), axis);
        let a = (0..n).min_by(|&i, &j| along(i).total_cmp(&along(j))).unwrap_or(p0);
        let b = (0..n).max_by(|&i, &j| along(i).total_cmp(&along(j))).unwrap_or(p1);
        return HullShape::Segment { a, b };
    }
    let normal = cross(axis, sub(points[p2], points[p0]));
    let nn = norm3(normal);
    let plane_dist = |p: Point3| dot3(sub(p, points[p0]), normal).abs() / nn;
    let (p3, d3) = far(&plane_dist);
    if d3 <= tol {
        return HullShape::Planar {
            cycle: planar_hull(points, points[p0], axis, normal, tol),
        };
    }

    let mut b = Builder {
        pts: points,
        tol,
        faces: Vec::new(),
        edges: HashMap::new(),
    };
    let simplex = [p0, p1, p2, p3];
    for skip in 0..4 {
        let mut v: Vec<usize> = simplex
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != skip)
            .map(|(_, &p)| p)
            .collect();
        let o = orient3d(
            coord(points[v[0]]),
            coord(points[v[1]]),
            coord(points[v[2]]),
            coord(points[simplex[skip]]),
        );
        // Opposite vertex must lie below the face: orient3d > 0.
        if o < 0.0 {
            v.swap(1, 2);
        }
        b.add_face([v[0], v[1], v[2]]);
    }
    let initial: Vec<usize> = (0..4).collect();
    for p in 0..n {
        if !simplex.contains(&p) {
            b.assign(p, &initial);
        }
    }
    loop {
        let next = b
            .faces
            .iter()
            .enumerate()
            .find(|(_, f)| f.alive && !f.conflicts.is_empty())
            .map(|(i, _)| i);
        let Some(f) = next else { break };
        let p = *b.faces[f]
            .conflicts
            .iter()
            .max_by(|&&x, &&y| b.dist(f, x).total_cmp(&b.dist(f, y)))
            .expect("non-empty");
        b.add_point(f, p);
    }
    HullShape::Solid {
        faces: b.faces.iter().filter(|f| f.alive).map(|f| f.v).collect(),
    }
}

/// Monotone-chain hull of points projected onto the plane through `origin`
/// spanned by `axis` and `normal x axis`.
fn planar_hull(points: &[Point3], origin: Point3, axis: Point3, normal: Point3, tol: f64) -> Vec<usize> {
    let u = axis.map(|x| x / norm3(axis));
    let w = cross(normal, u);
    let w = w.map(|x| x / norm3(w));
    let mut pts: Vec<(f64, f64, usize)> = points
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let d = sub(p, origin);
            (dot3(d, u), dot3(d, w), i)
        })
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let turn = |o: (f64, f64, usize), a: (f64, f64, usize), b: (f64, f64, usize)| {
        let cr = (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0);
        let len = ((b.0 - o.0).powi(2) + (b.1 - o.1).powi(2)).sqrt();
        cr > tol * len.max(f64::MIN_POSITIVE)
    };
    let mut lower: Vec<(f64, f64, usize)> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && !turn(lower[lower.len() - 2], lower[lower.len() - 1], p) {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<(f64, f64, usize)> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && !turn(upper[upper.len() - 2], upper[upper.len() - 1], p) {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower.into_iter().map(|p| p.2).collect()
}
