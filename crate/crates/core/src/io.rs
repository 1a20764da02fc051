//! File input and report output: whitespace or comma separated point
//! clouds, ASCII OFF/OBJ triangle meshes (vertices and faces only, larger
//! faces fan-triangulated), and benchmark reports in CSV or JSON.
//!
//! Report numbers are written with Rust's shortest round-trip float
//! formatting, so write/read cycles reproduce every finite double exactly.

use crate::geometry::{GeometryError, TriMesh};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {detail}")]
    Parse { line: usize, detail: String },
    #[error("line {line}: row has {found} coordinates, expected {expected}")]
    DimensionMismatch {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("points have {found} coordinates; only 2 or 3 are supported")]
    UnsupportedDimension { found: usize },
    #[error("line {line}: vertex index {index} out of range for {vertex_count} vertices")]
    IndexOutOfRange {
        line: usize,
        index: usize,
        vertex_count: usize,
    },
    #[error("invalid report row: {detail}")]
    InvalidRow { detail: String },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointFormat {
    /// Whitespace-separated coordinates, one point per line, `#` comments.
    Xyz,
    /// Comma-separated coordinates; a non-numeric first row is a header.
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Off,
    Obj,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

/// A loaded cloud, dimension decided by the file contents.
#[derive(Debug, Clone, PartialEq)]
pub enum LoadedPoints {
    D2(Vec<[f64; 2]>),
    D3(Vec<[f64; 3]>),
}

impl LoadedPoints {
    pub fn len(&self) -> usize {
        match self {
            LoadedPoints::D2(v) => v.len(),
            LoadedPoints::D3(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        match self {
            LoadedPoints::D2(_) => 2,
            LoadedPoints::D3(_) => 3,
        }
    }
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(at) => &line[..at],
        None => line,
    }
}

fn parse_coord(field: &str, line: usize) -> Result<f64, IoError> {
    field.trim().parse::<f64>().map_err(|_| IoError::Parse {
        line,
        detail: format!("expected a number, found {field:?}"),
    })
}

fn rows_to_points(rows: Vec<(usize, Vec<f64>)>) -> Result<LoadedPoints, IoError> {
    let Some((_, first)) = rows.first() else {
        return Err(IoError::Parse {
            line: 0,
            detail: "no data rows".into(),
        });
    };
    let expected = first.len();
    for (line, row) in &rows {
        if row.len() != expected {
            return Err(IoError::DimensionMismatch {
                line: *line,
                expected,
                found: row.len(),
            });
        }
    }
    match expected {
        2 => Ok(LoadedPoints::D2(
            rows.iter().map(|(_, r)| [r[0], r[1]]).collect(),
        )),
        3 => Ok(LoadedPoints::D3(
            rows.iter().map(|(_, r)| [r[0], r[1], r[2]]).collect(),
        )),
        found => Err(IoError::UnsupportedDimension { found }),
    }
}

pub fn load_points(path: impl AsRef<Path>, format: PointFormat) -> Result<LoadedPoints, IoError> {
    let text = std::fs::read_to_string(path)?;
    parse_points(&text, format)
}

pub fn parse_points(text: &str, format: PointFormat) -> Result<LoadedPoints, IoError> {
    let mut rows = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let body = strip_comment(raw).trim();
        if body.is_empty() {
            continue;
        }
        let fields: Vec<&str> = match format {
            PointFormat::Xyz => body.split_whitespace().collect(),
            PointFormat::Csv => body.split(',').collect(),
        };
        if format == PointFormat::Csv && rows.is_empty() {
            // header row: any field that is not a number
            if fields.iter().any(|f| f.trim().parse::<f64>().is_err()) {
                continue;
            }
        }
        let row = fields
            .iter()
            .map(|f| parse_coord(f, line))
            .collect::<Result<Vec<f64>, _>>()?;
        rows.push((line, row));
    }
    rows_to_points(rows)
}

pub fn load_mesh(path: impl AsRef<Path>, format: MeshFormat) -> Result<TriMesh, IoError> {
    let text = std::fs::read_to_string(path)?;
    parse_mesh(&text, format)
}

pub fn parse_mesh(text: &str, format: MeshFormat) -> Result<TriMesh, IoError> {
    match format {
        MeshFormat::Off => parse_off(text),
        MeshFormat::Obj => parse_obj(text),
    }
}

fn push_fan(
    triangles: &mut Vec<[usize; 3]>,
    face: &[usize],
    line: usize,
    vertex_count: usize,
) -> Result<(), IoError> {
    if face.len() < 3 {
        return Err(IoError::Parse {
            line,
            detail: format!("face needs at least 3 vertices, found {}", face.len()),
        });
    }
    for &i in face {
        if i >= vertex_count {
            return Err(IoError::IndexOutOfRange {
                line,
                index: i,
                vertex_count,
            });
        }
    }
    for k in 1..face.len() - 1 {
        triangles.push([face[0], face[k], face[k + 1]]);
    }
    Ok(())
}

fn parse_off(text: &str) -> Result<TriMesh, IoError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, raw)| (k + 1, strip_comment(raw).trim()))
        .filter(|(_, body)| !body.is_empty());
    let (first_line, first) = lines.next().ok_or(IoError::Parse {
        line: 0,
        detail: "empty OFF file".into(),
    })?;
    let counts_line = if first.eq_ignore_ascii_case("off") {
        lines.next().ok_or(IoError::Parse {
            line: first_line,
            detail: "missing OFF counts line".into(),
        })?
    } else {
        (first_line, first)
    };
    let counts: Vec<usize> = counts_line
        .1
        .split_whitespace()
        .map(|f| {
            f.parse::<usize>().map_err(|_| IoError::Parse {
                line: counts_line.0,
                detail: format!("expected a count, found {f:?}"),
            })
        })
        .collect::<Result<_, _>>()?;
    if counts.len() < 2 {
        return Err(IoError::Parse {
            line: counts_line.0,
            detail: "OFF counts line needs vertex and face counts".into(),
        });
    }
    let (nv, nf) = (counts[0], counts[1]);
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (line, body) = lines.next().ok_or(IoError::Parse {
            line: 0,
            detail: format!("expected {nv} vertex lines"),
        })?;
        let fields: Vec<&str> = body.split_whitespace().collect();
        if fields.len() < 3 {
            return Err(IoError::Parse {
                line,
                detail: format!("vertex needs 3 coordinates, found {}", fields.len()),
            });
        }
        // trailing fields (e.g. vertex colors) are ignored
        vertices.push([
            parse_coord(fields[0], line)?,
            parse_coord(fields[1], line)?,
            parse_coord(fields[2], line)?,
        ]);
    }
    let mut triangles = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (line, body) = lines.next().ok_or(IoError::Parse {
            line: 0,
            detail: format!("expected {nf} face lines"),
        })?;
        let fields: Vec<&str> = body.split_whitespace().collect();
        let arity: usize = fields[0].parse().map_err(|_| IoError::Parse {
            line,
            detail: format!("expected a face arity, found {:?}", fields[0]),
        })?;
        if fields.len() < arity + 1 {
            return Err(IoError::Parse {
                line,
                detail: format!("face lists {} indices, expected {arity}", fields.len() - 1),
            });
        }
        let face: Vec<usize> = fields[1..=arity]
            .iter()
            .map(|f| {
                f.parse::<usize>().map_err(|_| IoError::Parse {
                    line,
                    detail: format!("expected a vertex index, found {f:?}"),
                })
            })
            .collect::<Result<_, _>>()?;
        push_fan(&mut triangles, &face, line, nv)?;
    }
    Ok(TriMesh::new(vertices, triangles)?)
}

fn parse_obj(text: &str) -> Result<TriMesh, IoError> {
    let mut vertices: Vec<[f64; 3]> = Vec::new();
    let mut triangles: Vec<[usize; 3]> = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let body = strip_comment(raw).trim();
        let mut fields = body.split_whitespace();
        match fields.next() {
            Some("v") => {
                let coords: Vec<&str> = fields.collect();
                if coords.len() < 3 {
                    return Err(IoError::Parse {
                        line,
                        detail: format!("vertex needs 3 coordinates, found {}", coords.len()),
                    });
                }
                vertices.push([
                    parse_coord(coords[0], line)?,
                    parse_coord(coords[1], line)?,
                    parse_coord(coords[2], line)?,
                ]);
            }
            Some("f") => {
                let face: Vec<usize> = fields
                    .map(|entry| {
                        // `i`, `i/t`, `i//n`, `i/t/n`; 1-based positive only
                        let head = entry.split('/').next().unwrap_or("");
                        let idx: usize = head.parse().map_err(|_| IoError::Parse {
                            line,
                            detail: format!("expected a positive vertex index, found {entry:?}"),
                        })?;
                        if idx == 0 {
                            return Err(IoError::Parse {
                                line,
                                detail: "OBJ indices are 1-based".into(),
                            });
                        }
                        Ok(idx - 1)
                    })
                    .collect::<Result<_, _>>()?;
                push_fan(&mut triangles, &face, line, usize::MAX)?;
            }
            // normals, texture coords, groups, materials: ignored
            _ => {}
        }
    }
    // index range check deferred until all `v` lines are read (faces may
    // legally precede vertices in concatenated files)
    let nv = vertices.len();
    for t in &triangles {
        for &i in t {
            if i >= nv {
                return Err(IoError::IndexOutOfRange {
                    line: 0,
                    index: i,
                    vertex_count: nv,
                });
            }
        }
    }
    Ok(TriMesh::new(vertices, triangles)?)
}

// ---------------------------------------------------------------------------
// benchmark reports

/// One measurement row. Field order is the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub algo: String,
    pub op: String,
    pub n: u64,
    pub m: u64,
    pub epsilon: f64,
    pub seconds: f64,
    pub volume: f64,
    pub candidates: u64,
}

pub const REPORT_HEADER: &str = "algo,op,n,m,epsilon,seconds,volume,candidates";

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    rows: Vec<ReportRow>,
}

impl Report {
    pub fn new() -> Self {
        Report::default()
    }

    pub fn rows(&self) -> &[ReportRow] {
        &self.rows
    }

    /// Appends a row after checking the invariants: numeric fields finite
    /// and non-negative, tags non-empty and free of CSV structure.
    pub fn push(&mut self, row: ReportRow) -> Result<(), IoError> {
        for (name, value) in [
            ("epsilon", row.epsilon),
            ("seconds", row.seconds),
            ("volume", row.volume),
        ] {
            if !value.is_finite() || value < 0.0 {
                return Err(IoError::InvalidRow {
                    detail: format!("{name} = {value} (must be finite and >= 0)"),
                });
            }
        }
        for (name, tag) in [("algo", &row.algo), ("op", &row.op)] {
            if tag.is_empty() || tag.contains([',', '\n', '\r', '"']) {
                return Err(IoError::InvalidRow {
                    detail: format!("{name} tag {tag:?} is empty or contains CSV structure"),
                });
            }
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(REPORT_HEADER);
        out.push('\n');
        for r in &self.rows {
            // f64 Display is the shortest representation that parses back
            // to the identical bits, so the round trip is lossless
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.algo, r.op, r.n, r.m, r.epsilon, r.seconds, r.volume, r.candidates
            );
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, IoError> {
        let mut lines = text.lines().enumerate();
        let Some((_, header)) = lines.next() else {
            return Err(IoError::Parse {
                line: 0,
                detail: "empty report".into(),
            });
        };
        if header.trim() != REPORT_HEADER {
            return Err(IoError::Parse {
                line: 1,
                detail: format!("unexpected header {header:?}"),
            });
        }
        let mut report = Report::new();
        for (k, raw) in lines {
            let line = k + 1;
            if raw.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = raw.split(',').collect();
            if f.len() != 8 {
                return Err(IoError::Parse {
                    line,
                    detail: format!("expected 8 columns, found {}", f.len()),
                });
            }
            let int = |field: &str| -> Result<u64, IoError> {
                field.trim().parse().map_err(|_| IoError::Parse {
                    line,
                    detail: format!("expected an integer, found {field:?}"),
                })
            };
            report.push(ReportRow {
                algo: f[0].to_string(),
                op: f[1].to_string(),
                n: int(f[2])?,
                m: int(f[3])?,
                epsilon: parse_coord(f[4], line)?,
                seconds: parse_coord(f[5], line)?,
                volume: parse_coord(f[6], line)?,
                candidates: int(f[7])?,
            })?;
        }
        Ok(report)
    }

    pub fn to_json(&self) -> Result<String, IoError> {
        Ok(serde_json::to_string_pretty(&self.rows)?)
    }

    pub fn from_json(text: &str) -> Result<Self, IoError> {
        let rows: Vec<ReportRow> = serde_json::from_str(text)?;
        let mut report = Report::new();
        for row in rows {
            report.push(row)?;
        }
        Ok(report)
    }
}

pub fn write_report(
    report: &Report,
    path: impl AsRef<Path>,
    format: ReportFormat,
) -> Result<(), IoError> {
    let text = match format {
        ReportFormat::Csv => report.to_csv(),
        ReportFormat::Json => {
            let mut t = report.to_json()?;
            t.push('\n');
            t
        }
    };
    std::fs::write(path, text)?;
    Ok(())
}

pub fn read_report(path: impl AsRef<Path>, format: ReportFormat) -> Result<Report, IoError> {
    let text = std::fs::read_to_string(path)?;
    match format {
        ReportFormat::Csv => Report::from_csv(&text),
        ReportFormat::Json => Report::from_json(&text),
    }
}
