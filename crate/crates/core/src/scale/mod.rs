//! The spectral scale `B(c) = {(tau(a), tau(b1 a), tau(b2 a)) : 0 <= a <= 1}`.

pub mod hull;
mod mesh;

use std::collections::HashMap;
use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, hermitian_eigenvalues, CMatrix, Operator, C64};
use crate::par;
use crate::pencil::critical_angles;
use crate::range::{trace_boundary, Touch};
use hull::{convex_hull, cross, dot3, norm3, sub, HullShape};
pub use hull::Point3;

pub use mesh::{euler_characteristic, export_mesh, mesh_bytes, MeshFormat};

/// `tau((b_t - s)_+)`: the largest value of `<(-s, t1, t2), x>` over `x` in `B`.
pub fn scale_support(op: &Operator, s: f64, t1: f64, t2: f64) -> Result<f64> {
    if s == 0.0 && t1 == 0.0 && t2 == 0.0 {
        return Err(Error::Argument("support direction must be non-zero".into()));
    }
    let mu = hermitian_eigenvalues(&op.pencil(t1, t2))?;
    Ok(mu.iter().map(|m| (m - s).max(0.0)).sum::<f64>() / op.dim() as f64)
}

/// `Psi(p)` for `p` the spectral projection of `t1 b1 + t2 b2` onto the
/// eigenvalues above `s`, and the rank of `p`.
///
/// Fails with [`Error::NonExposedDirection`] when `s` is within `tol` of an
/// eigenvalue, where the maximizing face is not a single point.
pub fn extreme_point(op: &Operator, s: f64, t1: f64, t2: f64, tol: f64) -> Result<(Point3, usize)> {
    if s == 0.0 && t1 == 0.0 && t2 == 0.0 {
        return Err(Error::Argument("support direction must be non-zero".into()));
    }
    let eig = hermitian_eig(&op.pencil(t1, t2))?;
    let gap = eig
        .values
        .iter()
        .map(|m| (m - s).abs())
        .fold(f64::INFINITY, f64::min);
    if gap <= tol {
        return Err(Error::NonExposedDirection { s, gap });
    }
    let rank = eig.values.iter().filter(|&&m| m > s).count();
    Ok((psi_of_vectors(op, &eig.vectors[..rank]), rank))
}

/// `Psi` of the projection onto the span of orthonormal `vectors`.
fn psi_of_vectors(op: &Operator, vectors: &[Vec<C64>]) -> Point3 {
    let n = op.dim() as f64;
    let (mut x0, mut x1, mut x2) = (0.0, 0.0, 0.0);
    for v in vectors {
        x0 += v.iter().map(|z| z.norm_sqr()).sum::<f64>();
        x1 += op.b1().quadratic_form(v).re;
        x2 += op.b2().quadratic_form(v).re;
    }
    [x0 / n, x1 / n, x2 / n]
}

/// `Psi(1) = (1, tau(b1), tau(b2))`.
pub fn psi_one(op: &Operator) -> Point3 {
    let t = op.tau();
    [1.0, t.re, t.im]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Facet {
    pub v: [usize; 3],
    /// Outward unit normal.
    pub normal: Point3,
    /// `<normal, x>` on the facet plane.
    pub offset: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BodyKind {
    Solid,
    /// Vertices form a closed planar polygon, in order.
    Polygon,
    /// Two vertices.
    Segment,
    Point,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScaleBody {
    pub kind: BodyKind,
    pub vertices: Vec<Point3>,
    pub facets: Vec<Facet>,
    /// Direction `(s, t1, t2)` whose spectral projection produced each vertex.
    pub provenance: Vec<Point3>,
    /// Length unit: `max(1, ||b1||, ||b2||)`.
    pub scale: f64,
    /// Absolute hull tolerance.
    pub hull_tol: f64,
    #[serde(skip)]
    op: Option<Operator>,
}

impl ScaleBody {
    /// `max <d, v>` over the vertices.
    pub fn support(&self, d: Point3) -> f64 {
        self.vertices
            .iter()
            .map(|&v| dot3(d, v))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn operator(&self) -> Option<&Operator> {
        self.op.as_ref()
    }

    /// Vertex coordinates `x0` (trace levels), sorted and deduplicated.
    pub fn levels(&self) -> Vec<f64> {
        let mut l: Vec<f64> = self.vertices.iter().map(|v| v[0]).collect();
        l.sort_by(f64::total_cmp);
        l.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        l
    }

    /// Largest distance from a vertex `x0` to the nearest multiple of `1/n`.
    pub fn quantization_defect(&self, n: usize) -> f64 {
        self.vertices
            .iter()
            .map(|v| {
                let k = (v[0] * n as f64).round();
                (v[0] - k / n as f64).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Quasi-uniform unit vectors: a Fibonacci lattice of `count / 2` points
/// together with their antipodes, plus the six coordinate directions.
pub fn sphere_directions(count: usize) -> Vec<Point3> {
    let half = (count / 2).max(1);
    let golden = std::f64::consts::PI * (3.0 - 5.0_f64.sqrt());
    let mut dirs = Vec::with_capacity(2 * half + 6);
    for i in 0..half {
        let z = 1.0 - (2 * i + 1) as f64 / half as f64;
        let r = (1.0 - z * z).max(0.0).sqrt();
        let phi = golden * i as f64;
        let d = [z, r * phi.cos(), r * phi.sin()];
        dirs.push(d);
        dirs.push(d.map(|x| -x));
    }
    for axis in 0..3 {
        for sign in [1.0, -1.0] {
            let mut d = [0.0; 3];
            d[axis] = sign;
            dirs.push(d);
        }
    }
    dirs
}

/// Samples extreme points of `B` in quasi-uniform directions, adds the
/// exact vertices of the faces exposed at the pencil's critical angles, and
/// takes the convex hull.
///
/// `hull_tol` is relative to `max(1, ||b1||, ||b2||)`.
pub fn build_scale(op: &Operator, directions: usize, hull_tol: f64) -> Result<ScaleBody> {
    if directions < 100 {
        return Err(Error::Argument(format!(
            "need at least 100 directions, got {directions}"
        )));
    }
    if !(hull_tol > 0.0) {
        return Err(Error::Argument("hull tolerance must be positive".into()));
    }
    let scale = op.norm().max(1.0);
    let tol = hull_tol * scale;
    let dirs = sphere_directions(directions);
    let exposed_tol = 1e-12 * scale;
    let perturb = 1e-10 * scale;

    let mut cloud: Vec<(Point3, Point3)> = par::map_slice(&dirs, |&d| {
        let (s, t1, t2) = (-d[0], d[1], d[2]);
        match extreme_point(op, s, t1, t2, exposed_tol) {
            Ok((p, _)) => vec![(p, [s, t1, t2])],
            Err(_) => [s - perturb, s + perturb]
                .into_iter()
                .filter_map(|s| extreme_point(op, s, t1, t2, 0.0).ok().map(|(p, _)| (p, [s, t1, t2])))
                .collect(),
        }
    })
    .into_iter()
    .flatten()
    .collect();
    cloud.extend(face_vertices(op)?);

    let (points, provenance) = dedup_points(cloud, 1e-9 * scale);
    let shape = convex_hull(&points, tol);
    Ok(assemble(op, points, provenance, shape, scale, tol))
}

/// Completion points at every critical angle and trace level: the vertices
/// of the faces of `B` exposed where eigenvalues of `b_theta` collide.
fn face_vertices(op: &Operator) -> Result<Vec<(Point3, Point3)>> {
    let n = op.dim();
    if n < 2 {
        return Ok(Vec::new());
    }
    let angles = match critical_angles(op, 3600, 1e-7) {
        Ok(set) => set.angles,
        Err(Error::DegeneratePencil) => return Ok(Vec::new()),
        Err(e) => return Err(e),
    };
    let eps = 1e-7;
    let out = par::map_slice(&angles, |&theta| {
        let eig = op.eig_theta(theta);
        let tie = 1e-9 * (1.0 + eig.spectral_radius());
        let im = op.im_theta(theta);
        let mut pts = Vec::new();
        for m in 1..n {
            let mu = &eig.values;
            let mid = 0.5 * (mu[m - 1] + mu[m]);
            let dir = |t: f64| [mid, t.cos(), t.sin()];
            if mu[m - 1] - mu[m] > tie {
                pts.push((psi_of_vectors(op, &eig.vectors[..m]), dir(theta)));
                continue;
            }
            let mut lo = m - 1;
            while lo > 0 && mu[lo - 1] - mu[lo] <= tie {
                lo -= 1;
            }
            let mut hi = m;
            while hi + 1 < n && mu[hi] - mu[hi + 1] <= tie {
                hi += 1;
            }
            let need = m - lo;
            let basis = eig.basis(lo..hi + 1);
            let inner = hermitian_eig(&im.compress(&basis)).expect("Hermitian compression");
            let k = inner.dim();
            for (range, t) in [(0..need, theta + eps), (k - need..k, theta - eps)] {
                let mut vecs: Vec<Vec<C64>> = eig.vectors[..lo].to_vec();
                vecs.extend(inner.vectors[range].iter().map(|w| basis.mul_vec(w)));
                pts.push((psi_of_vectors(op, &vecs), dir(t)));
            }
        }
        pts
    });
    Ok(out.into_iter().flatten().collect())
}

fn dedup_points(cloud: Vec<(Point3, Point3)>, tol: f64) -> (Vec<Point3>, Vec<Point3>) {
    let cell = tol.max(f64::MIN_POSITIVE) * 4.0;
    let key = |p: Point3| p.map(|x| (x / cell).floor() as i64);
    let mut grid: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
    let mut points: Vec<Point3> = Vec::new();
    let mut prov = Vec::new();
    for (p, d) in cloud {
        let k = key(p);
        let mut dup = false;
        'search: for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(list) = grid.get(&[k[0] + dx, k[1] + dy, k[2] + dz]) {
                        if list.iter().any(|&i| norm3(sub(points[i], p)) <= tol) {
                            dup = true;
                            break 'search;
                        }
                    }
                }
            }
        }
        if !dup {
            grid.entry(k).or_default().push(points.len());
            points.push(p);
            prov.push(d);
        }
    }
    (points, prov)
}

fn assemble(
    op: &Operator,
    points: Vec<Point3>,
    provenance: Vec<Point3>,
    shape: HullShape,
    scale: f64,
    tol: f64,
) -> ScaleBody {
    let (kind, used, faces): (BodyKind, Vec<usize>, Vec<[usize; 3]>) = match shape {
        HullShape::Point(i) => (BodyKind::Point, vec![i], Vec::new()),
        HullShape::Segment { a, b } => (BodyKind::Segment, vec![a, b], Vec::new()),
        HullShape::Planar { cycle } => (BodyKind::Polygon, cycle, Vec::new()),
        HullShape::Solid { faces } => {
            let mut used: Vec<usize> = faces.iter().flatten().copied().collect();
            used.sort_unstable();
            used.dedup();
            (BodyKind::Solid, used, faces)
        }
    };
    let index: HashMap<usize, usize> = used.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let vertices: Vec<Point3> = used.iter().map(|&i| points[i]).collect();
    let facets = faces
        .iter()
        .map(|f| {
            let v = f.map(|i| index[&i]);
            let [a, b, c] = v.map(|i| vertices[i]);
            let nrm = cross(sub(b, a), sub(c, a));
            let len = norm3(nrm).max(f64::MIN_POSITIVE);
            let normal = nrm.map(|x| x / len);
            Facet {
                v,
                normal,
                offset: dot3(normal, a),
            }
        })
        .collect();
    ScaleBody {
        kind,
        vertices,
        facets,
        provenance: used.iter().map(|&i| provenance[i]).collect(),
        scale,
        hull_tol: tol,
        op: Some(op.clone()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsotraceSlice {
    pub t: f64,
    /// Boundary points `(t, x1, x2)` in angle order.
    pub polygon: Vec<Point3>,
}

/// The slice `x0 = k/n` of `B`, computed as the image of `W_k` under
/// `w -> (k/n, (k/n) w)`.
pub fn isotrace_slice(op: &Operator, k: usize, grid: usize) -> Result<IsotraceSlice> {
    let n = op.dim();
    if k > n {
        return Err(Error::KOutOfRange { k, n });
    }
    if k == 0 {
        return Ok(IsotraceSlice {
            t: 0.0,
            polygon: vec![[0.0; 3]],
        });
    }
    if k == n {
        return Ok(IsotraceSlice {
            t: 1.0,
            polygon: vec![psi_one(op)],
        });
    }
    let t = k as f64 / n as f64;
    let boundary = trace_boundary(op, k, grid.max(360), 1e-9)?;
    let mut polygon = Vec::with_capacity(boundary.samples.len() + 8);
    for s in &boundary.samples {
        let pts = match s.touch {
            Touch::Point(p) => vec![p],
            Touch::Segment(a, b) => vec![a, b],
        };
        for p in pts {
            polygon.push([t, t * p.re, t * p.im]);
        }
    }
    Ok(IsotraceSlice { t, polygon })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatFace {
    pub normal: Point3,
    pub offset: f64,
    /// Face vertices in boundary order.
    pub vertices: Vec<Point3>,
    pub area: f64,
    /// `(min x0, max x0)` over the face.
    pub levels: (f64, f64),
}

/// Two-dimensional faces: maximal clusters of adjacent, coplanar facets whose
/// plane is a genuine support plane of `B`, large enough, and transverse to
/// the isotrace planes.
pub fn flat_faces(body: &ScaleBody, tol: f64) -> Vec<FlatFace> {
    if body.kind != BodyKind::Solid || body.facets.is_empty() {
        return Vec::new();
    }
    let f = &body.facets;
    let m = f.len();
    let mut parent: Vec<usize> = (0..m).collect();
    fn root(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    let mut edge_owner: HashMap<(usize, usize), usize> = HashMap::new();
    for (i, facet) in f.iter().enumerate() {
        for e in 0..3 {
            edge_owner.insert((facet.v[e], facet.v[(e + 1) % 3]), i);
        }
    }
    for (i, facet) in f.iter().enumerate() {
        for e in 0..3 {
            if let Some(&j) = edge_owner.get(&(facet.v[(e + 1) % 3], facet.v[e])) {
                let dn = norm3(sub(facet.normal, f[j].normal));
                let doff = (facet.offset - f[j].offset).abs();
                if dn < tol && doff < tol * body.scale {
                    let (a, b) = (root(&mut parent, i), root(&mut parent, j));
                    if a != b {
                        parent[a] = b;
                    }
                }
            }
        }
    }
    let mut clusters: HashMap<usize, Vec<usize>> = HashMap::new();
    for i in 0..m {
        let r = root(&mut parent, i);
        clusters.entry(r).or_default().push(i);
    }
    let mut keys: Vec<usize> = clusters.keys().copied().collect();
    keys.sort_unstable();

    let mut faces = Vec::new();
    for key in keys {
        let members = &clusters[&key];
        let area: f64 = members
            .iter()
            .map(|&i| {
                let [a, b, c] = f[i].v.map(|v| body.vertices[v]);
                0.5 * norm3(cross(sub(b, a), sub(c, a)))
            })
            .sum();
        if area <= tol * body.scale * body.scale {
            continue;
        }
        let mut idx: Vec<usize> = members.iter().flat_map(|&i| f[i].v).collect();
        idx.sort_unstable();
        idx.dedup();
        let pts: Vec<Point3> = idx.iter().map(|&i| body.vertices[i]).collect();
        let lo = pts.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
        let hi = pts.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
        if hi - lo <= 1e-9 {
            continue;
        }
        // Area-weighted plane of the cluster.
        let mut nrm = [0.0; 3];
        for &i in members {
            let [a, b, c] = f[i].v.map(|v| body.vertices[v]);
            let c3 = cross(sub(b, a), sub(c, a));
            for k in 0..3 {
                nrm[k] += c3[k];
            }
        }
        let len = norm3(nrm);
        let normal = nrm.map(|x| x / len);
        let offset = pts.iter().map(|&p| dot3(normal, p)).fold(f64::NEG_INFINITY, f64::max);
        if let Some(op) = body.operator() {
            match scale_support(op, -normal[0], normal[1], normal[2]) {
                Ok(h) if (h - offset).abs() <= tol * body.scale => {}
                _ => continue,
            }
            if !spans_plane(op, normal, tol * body.scale) {
                continue;
            }
        }
        faces.push(FlatFace {
            normal,
            offset,
            vertices: order_in_plane(&pts, normal),
            area,
            levels: (lo, hi),
        });
    }
    faces
}

/// Whether the face of `B` exposed by `normal` is two-dimensional: the
/// kernel of `normal[0] + normal[1] b1 + normal[2] b2` must have dimension at
/// least two, with `b1` and `b2` not both scalar on it. Thin slivers of ruled
/// surface pass the coplanarity test but fail here.
fn spans_plane(op: &Operator, normal: Point3, tol: f64) -> bool {
    let n = op.dim();
    let h = op.pencil(normal[1], normal[2]).combine(1.0, &CMatrix::identity(n), normal[0]);
    let Ok(eig) = hermitian_eig(&h) else {
        return false;
    };
    let kernel: Vec<usize> = (0..n).filter(|&i| eig.values[i].abs() <= 10.0 * tol).collect();
    if kernel.len() < 2 {
        return false;
    }
    let q = eig.basis(kernel[0]..kernel[kernel.len() - 1] + 1);
    let m = q.cols();
    [op.b1(), op.b2()].iter().any(|b| {
        let a = b.compress(&q);
        let mean = a.trace() / m as f64;
        (&a - &CMatrix::identity(m).scale(mean)).max_abs() > tol
    })
}

fn order_in_plane(pts: &[Point3], normal: Point3) -> Vec<Point3> {
    let n = pts.len() as f64;
    let centre = pts.iter().fold([0.0; 3], |acc, p| [acc[0] + p[0] / n, acc[1] + p[1] / n, acc[2] + p[2] / n]);
    let seed = if normal[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let u = cross(normal, seed);
    let u = u.map(|x| x / norm3(u));
    let w = cross(normal, u);
    let mut with_angle: Vec<(f64, Point3)> = pts
        .iter()
        .map(|&p| {
            let d = sub(p, centre);
            (dot3(d, w).atan2(dot3(d, u)), p)
        })
        .collect();
    with_angle.sort_by(|a, b| a.0.total_cmp(&b.0));
    with_angle.into_iter().map(|(_, p)| p).collect()
}

/// Support-function estimate of the Hausdorff distance between the convex
/// hulls of two point sets, over `dirs`.
pub fn hausdorff_by_support(a: &[Point3], b: &[Point3], dirs: &[Point3]) -> f64 {
    let h = |set: &[Point3], d: Point3| set.iter().map(|&v| dot3(d, v)).fold(f64::NEG_INFINITY, f64::max);
    dirs.iter()
        .map(|&d| (h(a, d) - h(b, d)).abs())
        .fold(0.0, f64::max)
}

/// Hausdorff estimate between two bodies over both sets of facet normals and
/// a dense quasi-uniform direction set.
pub fn body_hausdorff(a: &ScaleBody, b: &ScaleBody) -> f64 {
    let mut dirs = sphere_directions(4000);
    dirs.extend(a.facets.iter().map(|f| f.normal));
    dirs.extend(b.facets.iter().map(|f| f.normal));
    hausdorff_by_support(&a.vertices, &b.vertices, &dirs)
}

/// Hausdorff estimate between `B` and its reflection `Psi(1) - B`.
pub fn symmetry_defect(body: &ScaleBody) -> f64 {
    let Some(op) = body.operator() else {
        return 0.0;
    };
    let one = psi_one(op);
    let mirrored: Vec<Point3> = body.vertices.iter().map(|&v| sub(one, v)).collect();
    let mut dirs = sphere_directions(4000);
    dirs.extend(body.facets.iter().map(|f| f.normal));
    hausdorff_by_support(&body.vertices, &mirrored, &dirs)
}

/// The section of the hull at `x0 = t`, as points: vertices on the plane
/// and crossings of edges through it.
pub fn hull_section(body: &ScaleBody, t: f64) -> Vec<Point3> {
    let on = 1e-12;
    let mut pts: Vec<Point3> = body
        .vertices
        .iter()
        .filter(|v| (v[0] - t).abs() <= on)
        .copied()
        .collect();
    let mut edges: Vec<(usize, usize)> = body
        .facets
        .iter()
        .flat_map(|f| (0..3).map(move |e| (f.v[e].min(f.v[(e + 1) % 3]), f.v[e].max(f.v[(e + 1) % 3]))))
        .collect();
    edges.sort_unstable();
    edges.dedup();
    for (i, j) in edges {
        let (a, b) = (body.vertices[i], body.vertices[j]);
        if (a[0] - t) * (b[0] - t) < 0.0 && (a[0] - t).abs() > on && (b[0] - t).abs() > on {
            let s = (t - a[0]) / (b[0] - a[0]);
            pts.push([t, a[1] + s * (b[1] - a[1]), a[2] + s * (b[2] - a[2])]);
        }
    }
    pts
}

/// Unit directions in the plane `x0 = const`, for comparing slices.
pub fn planar_directions(count: usize) -> Vec<Point3> {
    (0..count)
        .map(|j| {
            let a = TAU * j as f64 / count as f64;
            [0.0, a.cos(), a.sin()]
        })
        .collect()
}
