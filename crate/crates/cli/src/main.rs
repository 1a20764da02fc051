//! `dynpca`: PCA oriented bounding boxes from point clouds and meshes, with
//! benchmark drivers for the closed-form dynamic update path.
//!
//! Exit codes: 0 on success, 2 on usage errors (bad flags or values),
//! 1 on data errors (unreadable files, degenerate geometry, failed checks).

mod bench;
mod cpca_cmd;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use dynpca::bbox::{build_box, ExtentSource, OrientedBox};
use dynpca::geometry::{normalize_to_unit_diameter, PointCloud};
use dynpca::grid::OccupancyGrid;
use dynpca::io::{
    load_points, write_report, LoadedPoints, PointFormat, Report, ReportFormat, ReportRow,
};
use dynpca::moments::summarize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "dynpca", version, about = "dynamic PCA bounding boxes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute one PCA bounding box for a point cloud.
    Box(BoxArgs),
    /// Benchmark static recomputation against closed-form dynamic updates.
    Bench(bench::BenchArgs),
    /// Continuous PCA of polygons and polyhedra, with facet-edit checking.
    Cpca(cpca_cmd::CpcaArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoxMode {
    /// Exact extremal scan over all points.
    Ap,
    /// Conservative scan over occupied grid-cell corners.
    Agp,
    /// Conservative scan over per-column extremal grid corners.
    Egp,
    /// Cell centers expanded by half the cell diagonal (off the default
    /// benchmark path; the speedup over corners is negligible).
    Centers,
}

impl BoxMode {
    pub fn tag(self) -> &'static str {
        match self {
            BoxMode::Ap => "ap",
            BoxMode::Agp => "agp",
            BoxMode::Egp => "egp",
            BoxMode::Centers => "centers",
        }
    }

    fn needs_grid(self) -> bool {
        !matches!(self, BoxMode::Ap)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl From<OutputFormat> for ReportFormat {
    fn from(f: OutputFormat) -> ReportFormat {
        match f {
            OutputFormat::Csv => ReportFormat::Csv,
            OutputFormat::Json => ReportFormat::Json,
        }
    }
}

/// Flags shared by every subcommand that emits a report.
#[derive(Args)]
pub struct ReportArgs {
    /// Report destination; stdout gets a human-readable summary either way.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: OutputFormat,
    /// Zero the seconds column, making the report reproducible byte for
    /// byte under a fixed seed.
    #[arg(long)]
    no_timing: bool,
}

impl ReportArgs {
    pub fn seconds(&self, measured: f64) -> f64 {
        if self.no_timing {
            0.0
        } else {
            measured
        }
    }

    pub fn has_out(&self) -> bool {
        self.out.is_some()
    }

    pub fn write(&self, report: &Report) -> Result<()> {
        if let Some(path) = &self.out {
            write_report(report, path, self.format.into())
                .with_context(|| format!("writing report to {}", path.display()))?;
        }
        Ok(())
    }
}

/// Semantic flag misuse detected after clap parsing; mapped to the same
/// exit code clap uses for syntactic usage errors.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Args)]
struct BoxArgs {
    /// Point cloud file (.xyz whitespace or .csv comma separated).
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "ap")]
    mode: BoxMode,
    /// Grid cell size; repeatable, required for grid modes.
    #[arg(long, value_parser = parse_positive)]
    epsilon: Vec<f64>,
    /// Rescale the cloud to unit diameter before processing, so epsilon is
    /// a fraction of the model size.
    #[arg(long)]
    normalize: bool,
    #[command(flatten)]
    report: ReportArgs,
}

pub fn parse_positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(format!("{v} is not a positive finite number"))
    }
}

pub fn load_cloud(path: &Path) -> Result<LoadedPoints> {
    let format = match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => PointFormat::Csv,
        _ => PointFormat::Xyz,
    };
    load_points(path, format).with_context(|| format!("loading points from {}", path.display()))
}

fn main() -> ExitCode {
    // Rust ignores SIGPIPE, so `dynpca ... | head` would panic mid-println
    // once the reader hangs up; restore the default so the process just dies
    // like any other pipeline stage.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    let run = match cli.command {
        Command::Box(args) => cmd_box(args),
        Command::Bench(args) => bench::cmd_bench(args),
        Command::Cpca(args) => cpca_cmd::cmd_cpca(args),
    };
    match run {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) if err.downcast_ref::<UsageError>().is_some() => {
            eprintln!("usage error: {err:#}");
            ExitCode::from(2)
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

pub fn print_box<const D: usize>(label: &str, bx: &OrientedBox<D>) {
    println!("{label}");
    for (k, axis) in bx.frame.axes.iter().enumerate() {
        let parts: Vec<String> = axis.iter().map(|x| format!("{x}")).collect();
        println!("  axis {k}: [{}]", parts.join(", "));
    }
    for i in 0..D {
        println!(
            "  extent {i}: [{}, {}]  width {}",
            bx.extents.lo[i],
            bx.extents.hi[i],
            bx.extents.hi[i] - bx.extents.lo[i]
        );
    }
    println!("  volume: {}", bx.volume());
}

fn cmd_box(args: BoxArgs) -> Result<()> {
    if args.mode.needs_grid() && args.epsilon.is_empty() {
        return Err(UsageError(format!(
            "mode {} needs at least one --epsilon",
            args.mode.tag()
        ))
        .into());
    }
    match load_cloud(&args.input)? {
        LoadedPoints::D2(pts) => box_dispatch(&pts, &args),
        LoadedPoints::D3(pts) => box_dispatch(&pts, &args),
    }
}

fn box_dispatch<const D: usize>(points: &[[f64; D]], args: &BoxArgs) -> Result<()> {
    let cloud = PointCloud::new(points.to_vec())?;
    let points = if args.normalize {
        let (scaled, scale) = normalize_to_unit_diameter(&cloud)?;
        println!("normalized by {scale}");
        scaled.points().to_vec()
    } else {
        cloud.points().to_vec()
    };
    let mut report = Report::new();
    let summary = summarize(&points)?;
    if args.mode == BoxMode::Ap {
        let t0 = Instant::now();
        let bx = build_box(&summary, ExtentSource::Points(&points))?;
        let seconds = t0.elapsed().as_secs_f64();
        print_box("pca-ap box", &bx);
        report.push(ReportRow {
            algo: "ap".into(),
            op: "box".into(),
            n: points.len() as u64,
            m: 0,
            epsilon: 0.0,
            seconds: args.report.seconds(seconds),
            volume: bx.volume(),
            candidates: points.len() as u64,
        })?;
    } else {
        for &eps in &args.epsilon {
            let grid = OccupancyGrid::build(&points, eps, false)?;
            let source = match args.mode {
                BoxMode::Agp => ExtentSource::GridCorners(&grid),
                BoxMode::Egp => ExtentSource::GridColumns(&grid),
                BoxMode::Centers => ExtentSource::CellCentersExpanded(&grid),
                BoxMode::Ap => unreachable!(),
            };
            let t0 = Instant::now();
            let bx = build_box(&summary, source)?;
            let seconds = t0.elapsed().as_secs_f64();
            let candidates = match args.mode {
                BoxMode::Agp => grid.candidate_corners()?.len(),
                BoxMode::Egp => grid.column_extremal_corners()?.len(),
                _ => grid.occupied_cell_count(),
            };
            print_box(&format!("pca-{} box, epsilon {eps}", args.mode.tag()), &bx);
            report.push(ReportRow {
                algo: args.mode.tag().into(),
                op: "box".into(),
                n: points.len() as u64,
                m: 0,
                epsilon: eps,
                seconds: args.report.seconds(seconds),
                volume: bx.volume(),
                candidates: candidates as u64,
            })?;
        }
    }
    args.report.write(&report)
}
