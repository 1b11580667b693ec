//! Argument parsing, matrix ingestion and JSON output for the `kscale` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use kscale::linalg::{CMatrix, Operator, C64};
use kscale::oracle::{half_rank_polygon_scan, ScanArm};
use kscale::pencil::{char_poly_bivariate, critical_angles, discriminant_y, CriticalAngleSet, Discriminant};
use kscale::range::{classify, trace_boundary, Arc, BoundaryKind, CornerReport, Segment};
use kscale::scale::{build_scale, flat_faces, isotrace_slice, mesh_bytes, BodyKind, MeshFormat, Point3};
use kscale::structure::{complex_slope, reducing_subspaces};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_MALFORMED_INPUT: i32 = 2;
pub const EXIT_INVALID_FLAGS: i32 = 3;
pub const EXIT_DEGENERATE_PENCIL: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("malformed input {path}: {reason}")]
    MalformedInput { path: PathBuf, reason: String },
    #[error("{0}")]
    InvalidFlags(String),
    #[error("{0}")]
    Compute(#[from] kscale::Error),
    #[error("writing {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::MalformedInput { .. } => EXIT_MALFORMED_INPUT,
            CliError::InvalidFlags(_) => EXIT_INVALID_FLAGS,
            CliError::Compute(kscale::Error::DegeneratePencil) => EXIT_DEGENERATE_PENCIL,
            CliError::Compute(kscale::Error::KOutOfRange { .. }) => EXIT_INVALID_FLAGS,
            _ => EXIT_FAILURE,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "kscale", version, about = "k-numerical ranges and spectral scales of complex matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Trace the boundary of W_k and classify it.
    Range(RangeArgs),
    /// Build the spectral scale body and optionally export a mesh.
    Scale(ScaleArgs),
    /// The isotrace slice at level k/n.
    Slice(SliceArgs),
    /// Reducing structure, reducing eigenvalues, slopes and polygon flags.
    Analyze(AnalyzeArgs),
    /// Bivariate pencil polynomial, discriminant and critical angles.
    Pencil(PencilArgs),
    /// Random search for polygonal half-rank ranges of non-normal matrices.
    Conjecture(ConjectureArgs),
}

#[derive(Debug, Args)]
struct Io {
    /// Matrix file: {"n": N, "entries": [[[re, im], ...], ...]}.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct RangeArgs {
    #[command(flatten)]
    io: Io,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 3600)]
    grid: usize,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

#[derive(Debug, Args)]
struct ScaleArgs {
    #[command(flatten)]
    io: Io,
    #[arg(long, default_value_t = 2000)]
    directions: usize,
    /// Relative hull tolerance.
    #[arg(long, default_value_t = 1e-9)]
    hull_tol: f64,
    /// Relative tolerance for reporting two-dimensional faces.
    #[arg(long, default_value_t = 1e-7)]
    face_tol: f64,
    /// Mesh output; the format follows the extension unless --mesh-format is given.
    #[arg(long)]
    mesh: Option<PathBuf>,
    #[arg(long, requires = "mesh")]
    mesh_format: Option<String>,
}

#[derive(Debug, Args)]
struct SliceArgs {
    #[command(flatten)]
    io: Io,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 3600)]
    grid: usize,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    io: Io,
    #[arg(long, default_value_t = 3600)]
    grid: usize,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct PencilArgs {
    #[command(flatten)]
    io: Io,
    #[arg(long, default_value_t = 3600)]
    grid: usize,
    #[arg(long, default_value_t = 1e-7)]
    tol: f64,
}

#[derive(Debug, Args)]
struct ConjectureArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 3600)]
    grid: usize,
    /// Run the normal control arm instead of the non-normal search.
    #[arg(long)]
    control: bool,
    #[arg(long)]
    out: PathBuf,
}

/// On-disk matrix: `n` and row-major `[re, im]` entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub n: usize,
    pub entries: Vec<Vec<C64>>,
}

impl MatrixFile {
    pub fn from_matrix(c: &CMatrix) -> Self {
        Self {
            n: c.rows(),
            entries: (0..c.rows()).map(|i| c.row(i).to_vec()).collect(),
        }
    }

    pub fn to_matrix(&self) -> std::result::Result<CMatrix, String> {
        if self.n == 0 {
            return Err("n must be at least 1".into());
        }
        if self.entries.len() != self.n || self.entries.iter().any(|r| r.len() != self.n) {
            return Err(format!("entries must be {0}x{0}", self.n));
        }
        if let Some((i, j)) = self
            .entries
            .iter()
            .enumerate()
            .flat_map(|(i, r)| r.iter().enumerate().map(move |(j, z)| ((i, j), z)))
            .find(|(_, z)| !z.is_finite())
            .map(|(ij, _)| ij)
        {
            return Err(format!("non-finite entry at ({i}, {j})"));
        }
        CMatrix::from_rows(&self.entries).map_err(|e| e.to_string())
    }
}

pub fn read_matrix(path: &Path) -> CliResult<Operator> {
    let malformed = |reason: String| CliError::MalformedInput {
        path: path.to_path_buf(),
        reason,
    };
    let text = std::fs::read_to_string(path).map_err(|e| malformed(e.to_string()))?;
    let file: MatrixFile = serde_json::from_str(&text).map_err(|e| malformed(e.to_string()))?;
    let c = file.to_matrix().map_err(malformed)?;
    Operator::new(c).map_err(|e| malformed(e.to_string()))
}

/// `[theta, r, re1, im1, re2, im2]`: the first and last touch points.
pub type SampleRow = [f64; 6];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RangeOutput {
    pub n: usize,
    pub k: usize,
    pub grid: usize,
    pub tol: f64,
    pub scale: f64,
    pub kind: BoundaryKind,
    pub is_polygon: bool,
    pub normal_flag: bool,
    pub segments: Vec<Segment>,
    pub corners: Vec<CornerReport>,
    pub arcs: Vec<Arc>,
    pub critical_angles: Vec<f64>,
    pub samples: Vec<SampleRow>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FaceSummary {
    pub normal: Point3,
    pub offset: f64,
    pub area: f64,
    pub levels: (f64, f64),
    pub vertices: Vec<Point3>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScaleOutput {
    pub n: usize,
    pub directions: usize,
    pub kind: BodyKind,
    pub scale: f64,
    pub vertex_count: usize,
    pub facet_count: usize,
    pub vertices: Vec<Point3>,
    pub provenance: Vec<Point3>,
    pub levels: Vec<f64>,
    pub quantization_defect: f64,
    pub flat_faces: Vec<FaceSummary>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlockReport {
    pub dim: usize,
    pub projection: CMatrix,
    /// Scalar by which `c` acts on the block, for rank-one blocks.
    pub eigenvalue: Option<C64>,
    /// Complex slope from 0 to this block's projection.
    pub slope: C64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolygonFlag {
    pub k: usize,
    pub is_polygon: bool,
    pub segment_count: usize,
    pub corner_count: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalyzeOutput {
    pub n: usize,
    pub seed: u64,
    pub commutator_norm: f64,
    pub normal_flag: bool,
    pub blocks: Vec<BlockReport>,
    pub reducing_eigenvalues: Vec<(C64, usize)>,
    pub polygon_flags: Vec<PolygonFlag>,
    /// Whether every `0 < k < n` polygon flag equals `normal_flag`.
    pub flags_agree: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PencilOutput {
    pub n: usize,
    /// `coefficients[j][k]` multiplies `z^j y^k`.
    pub coefficients: Vec<Vec<C64>>,
    /// Ascending coefficients in `z`; `null` when the discriminant vanishes identically.
    pub discriminant: Option<Vec<C64>>,
    pub discriminant_vanishes: bool,
    pub critical_angles: CriticalAngleSet,
}

/// Parses `argv` (including the program name), runs the subcommand, writes
/// outputs and returns the process exit code. Errors go to standard error.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID_FLAGS } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(std::io::stderr(), "error: {e}");
            e.exit_code()
        }
    }
}

fn run(cmd: Command) -> CliResult<()> {
    match cmd {
        Command::Range(a) => {
            let op = read_matrix(&a.io.input)?;
            check_k(a.k, op.dim(), false)?;
            check_grid(a.grid)?;
            if !(a.tol > 0.0) {
                return Err(CliError::InvalidFlags("--tol must be positive".into()));
            }
            let out = range_output(&op, a.k, a.grid, a.tol)?;
            write_outputs(&[(&a.io.out, to_json(&out))])
        }
        Command::Scale(a) => {
            let op = read_matrix(&a.io.input)?;
            if a.directions < 8 {
                return Err(CliError::InvalidFlags("--directions must be at least 8".into()));
            }
            if !(a.hull_tol > 0.0) || !(a.face_tol > 0.0) {
                return Err(CliError::InvalidFlags("tolerances must be positive".into()));
            }
            let format = match (&a.mesh, &a.mesh_format) {
                (None, _) => None,
                (Some(_), Some(f)) => Some(f.parse::<MeshFormat>().map_err(|e| CliError::InvalidFlags(e.to_string()))?),
                (Some(p), None) => Some(MeshFormat::from_path(p).ok_or_else(|| {
                    CliError::InvalidFlags(format!("cannot infer mesh format from {}", p.display()))
                })?),
            };
            let body = build_scale(&op, a.directions, a.hull_tol)?;
            let faces = flat_faces(&body, a.face_tol)
                .into_iter()
                .map(|f| FaceSummary {
                    normal: f.normal,
                    offset: f.offset,
                    area: f.area,
                    levels: f.levels,
                    vertices: f.vertices,
                })
                .collect();
            let out = ScaleOutput {
                n: op.dim(),
                directions: a.directions,
                kind: body.kind,
                scale: body.scale,
                vertex_count: body.vertices.len(),
                facet_count: body.facets.len(),
                vertices: body.vertices.clone(),
                provenance: body.provenance.clone(),
                levels: body.levels(),
                quantization_defect: body.quantization_defect(op.dim()),
                flat_faces: faces,
            };
            let mut files = vec![(&a.io.out, to_json(&out))];
            if let (Some(path), Some(fmt)) = (&a.mesh, format) {
                files.push((path, mesh_bytes(&body, fmt)));
            }
            write_outputs(&files)
        }
        Command::Slice(a) => {
            let op = read_matrix(&a.io.input)?;
            check_k(a.k, op.dim(), true)?;
            check_grid(a.grid)?;
            let slice = isotrace_slice(&op, a.k, a.grid)?;
            write_outputs(&[(&a.io.out, to_json(&slice))])
        }
        Command::Analyze(a) => {
            let op = read_matrix(&a.io.input)?;
            check_grid(a.grid)?;
            if !(a.tol > 0.0) {
                return Err(CliError::InvalidFlags("--tol must be positive".into()));
            }
            let out = analyze_output(&op, a.grid, a.tol, a.seed)?;
            write_outputs(&[(&a.io.out, to_json(&out))])
        }
        Command::Pencil(a) => {
            let op = read_matrix(&a.io.input)?;
            check_grid(a.grid)?;
            if !(a.tol > 0.0) {
                return Err(CliError::InvalidFlags("--tol must be positive".into()));
            }
            let out = pencil_output(&op, a.grid, a.tol)?;
            write_outputs(&[(&a.io.out, to_json(&out))])
        }
        Command::Conjecture(a) => {
            if a.n == 0 || a.n % 2 != 0 {
                return Err(CliError::InvalidFlags("--n must be even and positive".into()));
            }
            if a.trials == 0 {
                return Err(CliError::InvalidFlags("--trials must be at least 1".into()));
            }
            check_grid(a.grid)?;
            let arm = if a.control { ScanArm::NormalControl } else { ScanArm::NonNormal };
            let report = half_rank_polygon_scan(a.n, a.trials, a.grid, a.seed, arm)?;
            write_outputs(&[(&a.out, to_json(&report))])
        }
    }
}

fn check_k(k: usize, n: usize, allow_zero: bool) -> CliResult<()> {
    let lo = if allow_zero { 0 } else { 1 };
    if k < lo || k > n {
        return Err(CliError::InvalidFlags(format!("--k must lie in {lo}..={n}, got {k}")));
    }
    Ok(())
}

fn check_grid(grid: usize) -> CliResult<()> {
    if grid < 360 {
        return Err(CliError::InvalidFlags(format!("--grid must be at least 360, got {grid}")));
    }
    Ok(())
}

pub fn range_output(op: &Operator, k: usize, grid: usize, tol: f64) -> CliResult<RangeOutput> {
    let b = trace_boundary(op, k, grid, tol)?;
    let cls = classify(&b, op);
    let samples = b
        .samples
        .iter()
        .map(|s| {
            let (p, q) = (s.touch.first(), s.touch.last());
            [s.theta, s.r, p.re, p.im, q.re, q.im]
        })
        .collect();
    Ok(RangeOutput {
        n: op.dim(),
        k,
        grid,
        tol,
        scale: b.scale,
        kind: b.kind,
        is_polygon: cls.is_polygon,
        normal_flag: cls.normal_flag,
        segments: b.segments,
        corners: cls.corners,
        arcs: b.arcs,
        critical_angles: b.critical_angles,
        samples,
    })
}

pub fn analyze_output(op: &Operator, grid: usize, tol: f64, seed: u64) -> CliResult<AnalyzeOutput> {
    let n = op.dim();
    let structure = reducing_subspaces(op, tol, seed)?;
    let zero = CMatrix::zeros(n, n);
    let mut blocks = Vec::new();
    for ((p, &dim), eig) in structure
        .projections
        .iter()
        .zip(&structure.block_dims)
        .zip(&structure.block_eigenvalues)
    {
        blocks.push(BlockReport {
            dim,
            projection: p.clone(),
            eigenvalue: *eig,
            slope: complex_slope(op, &zero, p)?,
        });
    }
    let normal_flag = op.is_normal();
    let mut polygon_flags = Vec::new();
    for k in 1..n {
        let b = trace_boundary(op, k, grid, 1e-9)?;
        let cls = classify(&b, op);
        polygon_flags.push(PolygonFlag {
            k,
            is_polygon: cls.is_polygon,
            segment_count: cls.segment_count,
            corner_count: cls.corners.len(),
        });
    }
    let flags_agree = polygon_flags.iter().all(|f| f.is_polygon == normal_flag);
    Ok(AnalyzeOutput {
        n,
        seed,
        commutator_norm: op.commutator_norm(),
        normal_flag,
        blocks,
        reducing_eigenvalues: structure.reducing_eigenvalues,
        polygon_flags,
        flags_agree,
    })
}

pub fn pencil_output(op: &Operator, grid: usize, tol: f64) -> CliResult<PencilOutput> {
    let f = char_poly_bivariate(op);
    let angles = critical_angles(op, grid, tol)?;
    let disc = discriminant_y(&f)?;
    let (discriminant, vanishes) = match &disc {
        Discriminant::Poly(p) => (Some(p.coeffs.clone()), false),
        Discriminant::VanishesIdentically => (None, true),
    };
    Ok(PencilOutput {
        n: op.dim(),
        coefficients: f.coeffs().to_vec(),
        discriminant,
        discriminant_vanishes: vanishes,
        critical_angles: angles,
    })
}

pub fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("output types serialize");
    bytes.push(b'\n');
    bytes
}

/// Stages every output in a temporary file beside its target, then renames
/// them into place; on failure nothing is left behind.
fn write_outputs(files: &[(&PathBuf, Vec<u8>)]) -> CliResult<()> {
    let mut staged = Vec::with_capacity(files.len());
    for (path, bytes) in files {
        let err = |source| CliError::Write {
            path: path.to_path_buf(),
            source,
        };
        let dir = match path.parent() {
            Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
            _ => PathBuf::from("."),
        };
        let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(err)?;
        tmp.write_all(bytes).map_err(err)?;
        tmp.as_file().sync_all().map_err(err)?;
        staged.push((path, tmp));
    }
    for (path, tmp) in staged {
        tmp.persist(path).map_err(|e| CliError::Write {
            path: path.to_path_buf(),
            source: e.error,
        })?;
    }
    Ok(())
}
