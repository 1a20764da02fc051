//! Continuous PCA command: exact moments of polygon or polyhedron bodies in
//! the four summary modes, plus a randomized facet-edit journal that checks
//! the closed-form delta updates against from-scratch recomputation.
//!
//! Each journal step either bumps a random primitive (replaces it by two or
//! three children covering a grown region) or undoes the most recent bump.
//! The maintained summary must track the exact summary of the final
//! primitive list to within 1e-8 relative error, or the command fails.

use crate::{load_cloud, print_box, ReportArgs, UsageError};
use anyhow::{ensure, Context, Result};
use clap::{Args, ValueEnum};
use dynpca::bbox::{build_box, ExtentSource};
use dynpca::cpca::{
    cpca_apply_delta, polygon_area_primitives, polygon_boundary_primitives,
    polyhedron_boundary_primitives, polyhedron_volume_primitives, summarize_primitives, BodyMode,
    ContinuousSummary, Primitive,
};
use dynpca::geometry::Polygon;
use dynpca::io::{load_mesh, LoadedPoints, MeshFormat, Report, ReportRow};
use dynpca::linalg;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::PathBuf;
use std::time::Instant;

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CpcaMode {
    PolygonArea,
    PolygonBoundary,
    PolyhedronVolume,
    PolyhedronBoundary,
}

impl CpcaMode {
    fn body_mode(self) -> BodyMode {
        match self {
            CpcaMode::PolygonArea => BodyMode::PolygonArea,
            CpcaMode::PolygonBoundary => BodyMode::PolygonBoundary,
            CpcaMode::PolyhedronVolume => BodyMode::PolyhedronVolume,
            CpcaMode::PolyhedronBoundary => BodyMode::PolyhedronBoundary,
        }
    }

    fn is_planar(self) -> bool {
        matches!(self, CpcaMode::PolygonArea | CpcaMode::PolygonBoundary)
    }
}

#[derive(Args)]
pub struct CpcaArgs {
    /// Mesh file (.off/.obj) for polyhedron modes, or a 2D point file
    /// (.xyz/.csv, vertices in boundary order) for polygon modes.
    #[arg(long)]
    input: PathBuf,
    /// Restrict to one mode; default runs both modes the input supports.
    #[arg(long, value_enum)]
    mode: Option<CpcaMode>,
    /// Explicit interior point "x,y,z" for the volume decomposition, for
    /// star-shaped bodies whose surface centroid lies outside the kernel.
    #[arg(long, value_parser = parse_kernel)]
    kernel: Option<Kernel>,
    /// Facet-edit journal length per mode.
    #[arg(long, default_value_t = 100)]
    reps: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    report: ReportArgs,
}

// clap needs a named type for the parsed value
#[derive(Clone, Copy)]
pub struct Kernel([f64; 3]);

fn parse_kernel(s: &str) -> Result<Kernel, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(format!("expected x,y,z, found {s:?}"));
    }
    let mut k = [0.0f64; 3];
    for (slot, part) in k.iter_mut().zip(&parts) {
        *slot = part
            .trim()
            .parse()
            .map_err(|_| format!("{part:?} is not a number"))?;
    }
    if !k.iter().all(|x| x.is_finite()) {
        return Err("kernel point must be finite".into());
    }
    Ok(Kernel(k))
}

pub fn cmd_cpca(args: CpcaArgs) -> Result<()> {
    let path = &args.input;
    let mesh_format = match path.extension().and_then(|e| e.to_str()) {
        Some("off") => Some(MeshFormat::Off),
        Some("obj") => Some(MeshFormat::Obj),
        _ => None,
    };
    let mut report = Report::new();
    if let Some(format) = mesh_format {
        if let Some(mode) = args.mode {
            if mode.is_planar() {
                return Err(UsageError(format!(
                    "mesh input supports polyhedron modes, not {:?}",
                    mode.body_mode().name()
                ))
                .into());
            }
        }
        let mesh = load_mesh(path, format)
            .with_context(|| format!("loading mesh from {}", path.display()))?;
        let modes = args
            .mode
            .map(|m| vec![m])
            .unwrap_or(vec![CpcaMode::PolyhedronVolume, CpcaMode::PolyhedronBoundary]);
        for mode in modes {
            let prims = match mode {
                CpcaMode::PolyhedronVolume => {
                    polyhedron_volume_primitives(&mesh, args.kernel.map(|k| k.0))?.0
                }
                CpcaMode::PolyhedronBoundary => polyhedron_boundary_primitives(&mesh),
                _ => unreachable!(),
            };
            run_mode(&mut report, &args, mode.body_mode(), prims)?;
        }
    } else {
        if let Some(mode) = args.mode {
            if !mode.is_planar() {
                return Err(UsageError(format!(
                    "point input supports polygon modes, not {:?}",
                    mode.body_mode().name()
                ))
                .into());
            }
        }
        let LoadedPoints::D2(vertices) = load_cloud(path)? else {
            return Err(UsageError(
                "polygon input must be 2-dimensional (x y per line)".into(),
            )
            .into());
        };
        let polygon = Polygon::new(vertices)?;
        let modes = args
            .mode
            .map(|m| vec![m])
            .unwrap_or(vec![CpcaMode::PolygonArea, CpcaMode::PolygonBoundary]);
        for mode in modes {
            let prims = match mode {
                CpcaMode::PolygonArea => polygon_area_primitives(&polygon)?,
                CpcaMode::PolygonBoundary => polygon_boundary_primitives(&polygon),
                _ => unreachable!(),
            };
            run_mode(&mut report, &args, mode.body_mode(), prims)?;
        }
    }
    args.report.write(&report)
}

fn print_summary<const D: usize>(mode: BodyMode, s: &ContinuousSummary<D>) -> Result<()> {
    println!("== {} ==", mode.name());
    println!("  measure: {}", s.measure());
    let centroid: Vec<String> = s.centroid().iter().map(|x| format!("{x}")).collect();
    println!("  centroid: [{}]", centroid.join(", "));
    for i in 0..D {
        let row: Vec<String> = (0..D).map(|j| format!("{}", s.cov().get(i, j))).collect();
        println!("  cov[{i}]: [{}]", row.join(", "));
    }
    let spectrum = linalg::jacobi_eigendecompose(s.cov())?;
    let eigs: Vec<String> = spectrum.eigenvalues.iter().map(|x| format!("{x}")).collect();
    println!("  eigenvalues: [{}]", eigs.join(", "));
    Ok(())
}

fn run_mode<const D: usize>(
    report: &mut Report,
    args: &CpcaArgs,
    mode: BodyMode,
    mut prims: Vec<Primitive<D>>,
) -> Result<()> {
    let t0 = Instant::now();
    let base = summarize_primitives(&prims, mode)?;
    let static_seconds = t0.elapsed().as_secs_f64();
    print_summary(mode, &base)?;

    let vertices = all_vertices(&prims);
    let bx = build_box(&base, ExtentSource::Points(&vertices))?;
    print_box(&format!("{} box", mode.name()), &bx);
    report.push(ReportRow {
        algo: mode.name().into(),
        op: "static".into(),
        n: prims.len() as u64,
        m: 0,
        epsilon: 0.0,
        seconds: args.report.seconds(static_seconds),
        volume: bx.volume(),
        candidates: vertices.len() as u64,
    })?;

    // facet-edit journal: maintain the summary through deltas, then compare
    // with the exact summary of the final primitive list
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    rng.set_stream(match mode {
        BodyMode::PolygonArea => 0,
        BodyMode::PolygonBoundary => 1,
        BodyMode::PolyhedronVolume => 2,
        BodyMode::PolyhedronBoundary => 3,
    });
    let mut summary = base;
    // stack of (start index of children, parent), LIFO undo
    let mut bumps: Vec<(usize, Primitive<D>)> = Vec::new();
    let t0 = Instant::now();
    for _ in 0..args.reps {
        if !bumps.is_empty() && rng.gen_bool(0.5) {
            let (at, parent) = bumps.pop().expect("stack checked non-empty");
            let children: Vec<Primitive<D>> = prims.split_off(at);
            summary = cpca_apply_delta(&summary, &[parent], &children)?;
            prims.push(parent);
        } else {
            let at = rng.gen_range(0..prims.len());
            let parent = prims.swap_remove(at);
            let children = bump(&parent, rng.gen_range(0.05..0.5));
            summary = cpca_apply_delta(&summary, &children, &[parent])?;
            bumps.push((prims.len(), parent));
            prims.extend(children);
        }
    }
    let journal_seconds = t0.elapsed().as_secs_f64();

    let scratch = summarize_primitives(&prims, mode)?;
    let error = relative_gap(&summary, &scratch);
    println!(
        "  journal: {} edits, delta error {error:e}",
        args.reps
    );
    ensure!(
        error <= 1e-8,
        "delta summary drifted from scratch recomputation: {error:e}"
    );
    let verts_after = all_vertices(&prims);
    let bx_after = build_box(&summary, ExtentSource::Points(&verts_after))?;
    report.push(ReportRow {
        algo: mode.name().into(),
        op: "journal".into(),
        n: prims.len() as u64,
        m: args.reps,
        epsilon: 0.0,
        seconds: args.report.seconds(journal_seconds),
        volume: bx_after.volume(),
        candidates: verts_after.len() as u64,
    })?;
    Ok(())
}

fn all_vertices<const D: usize>(prims: &[Primitive<D>]) -> Vec<[f64; D]> {
    let mut out = Vec::new();
    for p in prims {
        match p {
            Primitive::Segment(v) => out.extend_from_slice(v),
            Primitive::Triangle(v) => out.extend_from_slice(v),
            Primitive::Tetra(v) => out.extend_from_slice(v),
        }
    }
    out
}

fn relative_gap<const D: usize>(a: &ContinuousSummary<D>, b: &ContinuousSummary<D>) -> f64 {
    let v = (a.measure() - b.measure()).abs() / b.measure().abs().max(1.0);
    let c = linalg::distance(a.centroid(), b.centroid()) / linalg::norm(b.centroid()).max(1.0);
    let s = a.cov().sub_matrix(b.cov()).frobenius_norm() / b.cov().frobenius_norm().max(1.0);
    v.max(c).max(s)
}

/// Replaces a primitive by children covering it plus a grown sliver: the
/// far edge or face is pushed outward through its midpoint.
fn bump<const D: usize>(parent: &Primitive<D>, tau: f64) -> Vec<Primitive<D>> {
    match parent {
        Primitive::Segment([a, b]) => {
            // push the midpoint out along the left normal (2D only)
            let mid = midpoint(&[*a, *b]);
            let mut q = mid;
            if D == 2 {
                let n = [-(b[1] - a[1]), b[0] - a[0]];
                for i in 0..D {
                    q[i] = mid[i] + tau * n[i];
                }
            }
            vec![Primitive::Segment([*a, q]), Primitive::Segment([q, *b])]
        }
        Primitive::Triangle([p0, p1, p2]) => {
            // grow past the edge opposite p0
            let mid = midpoint(&[*p1, *p2]);
            let q = std::array::from_fn(|i| mid[i] + tau * (mid[i] - p0[i]));
            vec![
                Primitive::Triangle([*p0, *p1, q]),
                Primitive::Triangle([*p0, q, *p2]),
            ]
        }
        Primitive::Tetra([t0, t1, t2, o]) => {
            // grow past the face opposite the shared anchor o
            let c = midpoint(&[*t0, *t1, *t2]);
            let q = std::array::from_fn(|i| c[i] + tau * (c[i] - o[i]));
            vec![
                Primitive::Tetra([*t0, *t1, q, *o]),
                Primitive::Tetra([*t1, *t2, q, *o]),
                Primitive::Tetra([*t2, *t0, q, *o]),
            ]
        }
    }
}

fn midpoint<const D: usize, const K: usize>(pts: &[[f64; D]; K]) -> [f64; D] {
    std::array::from_fn(|i| pts.iter().map(|p| p[i]).sum::<f64>() / K as f64)
}
