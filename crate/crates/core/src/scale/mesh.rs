use std::collections::HashSet;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use super::{BodyKind, ScaleBody};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Obj,
    Ply,
}

impl MeshFormat {
    /// Guesses the format from a file extension.
    pub fn from_path(path: &Path) -> Option<Self> {
        path.extension()
            .and_then(|e| e.to_str())
            .and_then(|e| e.parse().ok())
    }
}

impl FromStr for MeshFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "obj" => Ok(Self::Obj),
            "ply" => Ok(Self::Ply),
            other => Err(Error::Argument(format!("unknown mesh format {other:?}"))),
        }
    }
}

/// Polyline edges for lower-dimensional bodies: a closed loop for a
/// polygon, one edge for a segment, nothing for a point.
fn polyline(body: &ScaleBody) -> Vec<(usize, usize)> {
    let m = body.vertices.len();
    match body.kind {
        BodyKind::Polygon => (0..m).map(|i| (i, (i + 1) % m)).collect(),
        BodyKind::Segment => vec![(0, 1)],
        _ => Vec::new(),
    }
}

/// Serializes the hull as a triangle mesh, or a polyline for degenerate bodies.
pub fn mesh_bytes(body: &ScaleBody, format: MeshFormat) -> Vec<u8> {
    let mut out = Vec::new();
    let solid = body.kind == BodyKind::Solid;
    match format {
        MeshFormat::Obj => {
            for v in &body.vertices {
                writeln!(out, "v {} {} {}", v[0], v[1], v[2]).expect("in-memory write");
            }
            if solid {
                for f in &body.facets {
                    writeln!(out, "f {} {} {}", f.v[0] + 1, f.v[1] + 1, f.v[2] + 1).expect("in-memory write");
                }
            } else {
                let edges = polyline(body);
                if !edges.is_empty() {
                    let mut line = String::from("l");
                    let mut order: Vec<usize> = edges.iter().map(|e| e.0).collect();
                    if body.kind == BodyKind::Polygon {
                        order.push(0);
                    } else {
                        order.push(1);
                    }
                    for i in order {
                        line.push_str(&format!(" {}", i + 1));
                    }
                    writeln!(out, "{line}").expect("in-memory write");
                }
            }
        }
        MeshFormat::Ply => {
            let edges = if solid { Vec::new() } else { polyline(body) };
            let mut header = format!(
                "ply\nformat binary_little_endian 1.0\nelement vertex {}\nproperty double x\nproperty double y\nproperty double z\n",
                body.vertices.len()
            );
            if solid {
                header.push_str(&format!(
                    "element face {}\nproperty list uchar int vertex_indices\n",
                    body.facets.len()
                ));
            } else {
                header.push_str(&format!(
                    "element edge {}\nproperty int vertex1\nproperty int vertex2\n",
                    edges.len()
                ));
            }
            header.push_str("end_header\n");
            out.extend_from_slice(header.as_bytes());
            for v in &body.vertices {
                for x in v {
                    out.extend_from_slice(&x.to_le_bytes());
                }
            }
            if solid {
                for f in &body.facets {
                    out.push(3);
                    for i in f.v {
                        out.extend_from_slice(&(i as i32).to_le_bytes());
                    }
                }
            } else {
                for (a, b) in edges {
                    out.extend_from_slice(&(a as i32).to_le_bytes());
                    out.extend_from_slice(&(b as i32).to_le_bytes());
                }
            }
        }
    }
    out
}

/// Writes the mesh to `path`.
pub fn export_mesh(body: &ScaleBody, format: MeshFormat, path: &Path) -> Result<()> {
    std::fs::write(path, mesh_bytes(body, format))?;
    Ok(())
}

/// `V - E + F` of a triangle list, counting only referenced vertices.
pub fn euler_characteristic(faces: &[[usize; 3]]) -> i64 {
    let mut verts = HashSet::new();
    let mut edges = HashSet::new();
    for f in faces {
        for e in 0..3 {
            verts.insert(f[e]);
            let (a, b) = (f[e], f[(e + 1) % 3]);
            edges.insert((a.min(b), a.max(b)));
        }
    }
    verts.len() as i64 - edges.len() as i64 + faces.len() as i64
}
