//! Continuous principal component analysis: exact first and second moments
//! of bodies assembled from simplex primitives (boundary segments and
//! triangles, solid triangles and tetrahedra), with closed-form updates when
//! facets are added or removed.
//!
//! # Per-primitive moments
//!
//! For a non-degenerate simplex with vertices `x_1 .. x_r`, any reference
//! point `c`, displacements `d_j = x_j - c` and their sum `S`, the
//! measure-normalized integral of `(x - c)(x - c)^T` over the simplex has
//! the closed form
//!
//! ```text
//! cov_c = (S S^T + sum_j d_j d_j^T) / (r (r + 1))
//! ```
//!
//! with `r (r + 1)` equal to 6 for segments, 12 for triangles and 20 for
//! tetrahedra. The centroid is the vertex average, and moving the reference
//! point obeys the parallel-axis identity
//!
//! ```text
//! cov_c = cov_mu + (mu - c)(mu - c)^T
//! ```
//!
//! exactly (in real arithmetic), where `mu` is the primitive centroid.
//!
//! # Body summaries and facet deltas
//!
//! A body summary is the measure-weighted mix of its primitives' covariances
//! taken about the global centroid. When an edit adds primitive set `A` and
//! removes set `R` (measures `v_k`, centroids `mu_k`) from a body with
//! measure `v`, centroid `mu` and covariance `cov`, the new measure and
//! centroid follow from linearity of the underlying integrals:
//!
//! ```text
//! v'  = v + sum_A v_k - sum_R v_k
//! mu' = (v mu + sum_A v_k mu_k - sum_R v_k mu_k) / v'
//! ```
//!
//! and, with `delta = mu' - mu`, applying the parallel-axis identity to
//! re-reference the old body at the new centroid gives
//!
//! ```text
//! cov' = (v / v') (cov + delta delta^T)
//!      + (sum_A v_k cov_k(mu') - sum_R v_k cov_k(mu')) / v'
//! ```
//!
//! where each `cov_k(mu')` is the edited primitive's covariance about the
//! new centroid. Every term touches edited primitives only, so an edit costs
//! O(|A| + |R|) regardless of how many primitives make up the body. The
//! update is algebraically exact: the acceptance suite drives long random
//! edit journals and compares against full recomputation.

use crate::geometry::{
    self, is_inside, select_interior_point, star_tetrahedralize, GeometryError, Polygon, TriMesh,
};
use crate::linalg::{self, SymMatrix};
use std::cell::Cell;
use thiserror::Error;

/// Primitives at or below this measure (length/area/volume in model units)
/// are rejected as degenerate rather than silently skipped.
pub const DEGENERATE_MEASURE: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CpcaError {
    #[error("degenerate primitive or body: {what}")]
    Degenerate { what: &'static str },
    #[error("primitive kind does not fit the summary: expected {expected}, found {found}")]
    KindMismatch {
        expected: &'static str,
        found: &'static str,
    },
    #[error("edit removes the entire body (non-positive resulting measure)")]
    EmptyResult,
    #[error("non-finite coordinate or summary entry")]
    NonFinite,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

thread_local! {
    static PRIMITIVE_EVALS: Cell<u64> = const { Cell::new(0) };
}

/// Number of per-primitive covariance evaluations performed by this thread
/// since [`reset_primitive_evals`]. Instrumentation for cost assertions and
/// the benchmark report's candidate counts; it never affects results.
pub fn primitive_evals() -> u64 {
    PRIMITIVE_EVALS.with(|c| c.get())
}

pub fn reset_primitive_evals() {
    PRIMITIVE_EVALS.with(|c| c.set(0));
}

fn count_eval() {
    PRIMITIVE_EVALS.with(|c| c.set(c.get() + 1));
}

// ---------------------------------------------------------------------------
// primitives

/// A simplex primitive in `D` dimensions. The four combinations used by the
/// body modes are segments and triangles in the plane and triangles and
/// tetrahedra in space; tetrahedra are only meaningful at `D == 3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Primitive<const D: usize> {
    Segment([[f64; D]; 2]),
    Triangle([[f64; D]; 3]),
    Tetra([[f64; D]; 4]),
}

impl<const D: usize> Primitive<D> {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Primitive::Segment(_) => "segment",
            Primitive::Triangle(_) => "triangle",
            Primitive::Tetra(_) => "tetrahedron",
        }
    }

    fn vertices(&self) -> &[[f64; D]] {
        match self {
            Primitive::Segment(v) => v,
            Primitive::Triangle(v) => v,
            Primitive::Tetra(v) => v,
        }
    }

    /// Centroid (vertex average) and measure (length, area or volume).
    /// Degenerate primitives (measure at or below [`DEGENERATE_MEASURE`])
    /// are errors, as are tetrahedra outside dimension 3.
    pub fn centroid_measure(&self) -> Result<([f64; D], f64), CpcaError> {
        let verts = self.vertices();
        for v in verts {
            if !linalg::is_finite_vec(v) {
                return Err(CpcaError::NonFinite);
            }
        }
        let measure = match self {
            Primitive::Segment([a, b]) => linalg::distance(a, b),
            Primitive::Triangle([a, b, c]) => geometry::triangle_area(a, b, c),
            Primitive::Tetra([a, b, c, d]) => {
                if D != 3 {
                    return Err(CpcaError::KindMismatch {
                        expected: "a 3-dimensional body",
                        found: "tetrahedron in another dimension",
                    });
                }
                tetra_volume_generic(a, b, c, d)
            }
        };
        if measure <= DEGENERATE_MEASURE {
            return Err(CpcaError::Degenerate {
                what: "primitive has (near-)zero measure",
            });
        }
        let r = verts.len() as f64;
        let mut centroid = [0.0; D];
        for v in verts {
            for i in 0..D {
                centroid[i] += v[i] / r;
            }
        }
        Ok((centroid, measure))
    }

    /// Measure-normalized second moment about the reference point `c`:
    /// `(S S^T + sum d_j d_j^T) / (r (r + 1))` with `d_j = x_j - c`.
    pub fn covariance_about(&self, c: &[f64; D]) -> SymMatrix<D> {
        count_eval();
        let verts = self.vertices();
        let r = verts.len();
        let denom = (r * (r + 1)) as f64;
        let mut s = [0.0; D];
        let mut acc = [[0.0; D]; D];
        for v in verts {
            let d = linalg::sub(v, c);
            for i in 0..D {
                s[i] += d[i];
                for j in i..D {
                    acc[i][j] += d[i] * d[j];
                }
            }
        }
        SymMatrix::from_fn(|i, j| (s[i] * s[j] + acc[i][j]) / denom)
    }
}

fn tetra_volume_generic<const D: usize>(a: &[f64; D], b: &[f64; D], c: &[f64; D], d: &[f64; D]) -> f64 {
    // Only called with D == 3 (guarded above); written via the 3x3
    // determinant of edge vectors.
    let u = linalg::sub(b, a);
    let v = linalg::sub(c, a);
    let w = linalg::sub(d, a);
    let det = u[0] * (v[1] * w[2] - v[2] * w[1]) - u[1] * (v[0] * w[2] - v[2] * w[0])
        + u[2] * (v[0] * w[1] - v[1] * w[0]);
    det.abs() / 6.0
}

// ---------------------------------------------------------------------------
// body summaries

/// Which integral a summary describes; decides both the accepted primitive
/// kind and the dimensionality of the measure (length, area or volume).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BodyMode {
    /// Interior of a polygon, fanned into triangles (D = 2).
    PolygonArea,
    /// Boundary curve of a polygon as segments (D = 2).
    PolygonBoundary,
    /// Solid polyhedron as apex tetrahedra (D = 3).
    PolyhedronVolume,
    /// Surface of a polyhedron as triangles (D = 3).
    PolyhedronBoundary,
}

impl BodyMode {
    pub fn name(self) -> &'static str {
        match self {
            BodyMode::PolygonArea => "polygon_area",
            BodyMode::PolygonBoundary => "polygon_boundary",
            BodyMode::PolyhedronVolume => "polyhedron_volume",
            BodyMode::PolyhedronBoundary => "polyhedron_boundary",
        }
    }

    fn accepted_kind(self) -> &'static str {
        match self {
            BodyMode::PolygonArea => "triangle",
            BodyMode::PolygonBoundary => "segment",
            BodyMode::PolyhedronVolume => "tetrahedron",
            BodyMode::PolyhedronBoundary => "triangle",
        }
    }

    fn accepts<const D: usize>(self, p: &Primitive<D>) -> bool {
        p.kind_name() == self.accepted_kind()
    }
}

/// Exact measure, centroid and covariance of a body, tagged with the mode
/// that produced it so delta updates can reject foreign primitives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuousSummary<const D: usize> {
    measure: f64,
    centroid: [f64; D],
    cov: SymMatrix<D>,
    mode: BodyMode,
}

impl<const D: usize> ContinuousSummary<D> {
    pub fn measure(&self) -> f64 {
        self.measure
    }

    pub fn centroid(&self) -> &[f64; D] {
        &self.centroid
    }

    pub fn cov(&self) -> &SymMatrix<D> {
        &self.cov
    }

    pub fn mode(&self) -> BodyMode {
        self.mode
    }

    fn checked(measure: f64, centroid: [f64; D], cov: SymMatrix<D>, mode: BodyMode) -> Result<Self, CpcaError> {
        if !measure.is_finite() || !linalg::is_finite_vec(&centroid) || !cov.is_finite() {
            return Err(CpcaError::NonFinite);
        }
        Ok(Self {
            measure,
            centroid,
            cov,
            mode,
        })
    }
}

/// Measure-weighted mix of the primitives' moments about their common
/// centroid. This is the from-scratch path; every delta update must agree
/// with it.
pub fn summarize_primitives<const D: usize>(
    prims: &[Primitive<D>],
    mode: BodyMode,
) -> Result<ContinuousSummary<D>, CpcaError> {
    if prims.is_empty() {
        return Err(CpcaError::EmptyResult);
    }
    let mut total = 0.0;
    let mut weighted = [0.0; D];
    let mut parts = Vec::with_capacity(prims.len());
    for p in prims {
        if !mode.accepts(p) {
            return Err(CpcaError::KindMismatch {
                expected: mode.accepted_kind(),
                found: p.kind_name(),
            });
        }
        let (centroid, measure) = p.centroid_measure()?;
        total += measure;
        for i in 0..D {
            weighted[i] += measure * centroid[i];
        }
        parts.push(measure);
    }
    if total <= DEGENERATE_MEASURE {
        return Err(CpcaError::EmptyResult);
    }
    let centroid = std::array::from_fn(|i| weighted[i] / total);
    let mut cov = SymMatrix::zero();
    for (p, &measure) in prims.iter().zip(&parts) {
        cov = cov.add_matrix(&p.covariance_about(&centroid).scaled(measure / total));
    }
    ContinuousSummary::checked(total, centroid, cov, mode)
}

// ---------------------------------------------------------------------------
// primitive lists for the four static modes

/// Triangles fanned from the polygon's boundary centroid. Valid for convex
/// polygons and for star-shaped ones whose kernel contains that centroid.
pub fn polygon_area_primitives(poly: &Polygon) -> Result<Vec<Primitive<2>>, CpcaError> {
    let o = poly.boundary_centroid()?;
    Ok((0..poly.edge_count())
        .map(|k| {
            let (a, b) = poly.edge(k);
            Primitive::Triangle([o, a, b])
        })
        .collect())
}

pub fn polygon_boundary_primitives(poly: &Polygon) -> Vec<Primitive<2>> {
    (0..poly.edge_count())
        .map(|k| {
            let (a, b) = poly.edge(k);
            Primitive::Segment([a, b])
        })
        .collect()
}

/// Apex tetrahedra of a star-shaped solid. With `kernel == None` the apex is
/// the surface centroid ([`select_interior_point`]); pass an explicit kernel
/// point for bodies whose surface centroid falls outside the kernel.
/// Also returns the apex actually used.
pub fn polyhedron_volume_primitives(
    mesh: &TriMesh,
    kernel: Option<[f64; 3]>,
) -> Result<(Vec<Primitive<3>>, [f64; 3]), CpcaError> {
    let o = match kernel {
        Some(o) => o,
        None => select_interior_point(mesh)?,
    };
    let st = star_tetrahedralize(mesh, &o)?;
    let prims = st
        .base_triangles()
        .iter()
        .map(|t| Primitive::Tetra([t[0], t[1], t[2], *st.apex()]))
        .collect();
    Ok((prims, o))
}

pub fn polyhedron_boundary_primitives(mesh: &TriMesh) -> Vec<Primitive<3>> {
    (0..mesh.triangles().len())
        .map(|k| Primitive::Triangle(mesh.triangle_vertices(k)))
        .collect()
}

pub fn cpca_static_polygon_area(poly: &Polygon) -> Result<ContinuousSummary<2>, CpcaError> {
    summarize_primitives(&polygon_area_primitives(poly)?, BodyMode::PolygonArea)
}

pub fn cpca_static_polygon_boundary(poly: &Polygon) -> Result<ContinuousSummary<2>, CpcaError> {
    summarize_primitives(&polygon_boundary_primitives(poly), BodyMode::PolygonBoundary)
}

pub fn cpca_static_polyhedron_volume(
    mesh: &TriMesh,
    kernel: Option<[f64; 3]>,
) -> Result<ContinuousSummary<3>, CpcaError> {
    let (prims, _) = polyhedron_volume_primitives(mesh, kernel)?;
    summarize_primitives(&prims, BodyMode::PolyhedronVolume)
}

pub fn cpca_static_polyhedron_boundary(mesh: &TriMesh) -> Result<ContinuousSummary<3>, CpcaError> {
    summarize_primitives(&polyhedron_boundary_primitives(mesh), BodyMode::PolyhedronBoundary)
}

// ---------------------------------------------------------------------------
// delta updates

/// Applies a facet edit to a summary in O(|added| + |removed|): see the
/// module documentation for the algebra. Primitives must match the summary's
/// mode; degenerate primitives are rejected, not skipped. Removing more
/// measure than the body has is [`CpcaError::EmptyResult`].
///
/// The removed primitives must describe regions actually contained in the
/// body (with multiplicity, for soups): that precondition is the caller's,
/// exactly like deleting never-inserted points from a discrete summary.
pub fn cpca_apply_delta<const D: usize>(
    base: &ContinuousSummary<D>,
    added: &[Primitive<D>],
    removed: &[Primitive<D>],
) -> Result<ContinuousSummary<D>, CpcaError> {
    let mut measure = base.measure;
    let mut weighted: [f64; D] = std::array::from_fn(|i| base.measure * base.centroid[i]);
    // (signed weight, centroid, primitive) per edit
    let mut edits: Vec<(f64, Primitive<D>)> = Vec::with_capacity(added.len() + removed.len());
    for (list, sign) in [(added, 1.0), (removed, -1.0)] {
        for p in list {
            if !base.mode.accepts(p) {
                return Err(CpcaError::KindMismatch {
                    expected: base.mode.accepted_kind(),
                    found: p.kind_name(),
                });
            }
            let (centroid, m) = p.centroid_measure()?;
            measure += sign * m;
            for i in 0..D {
                weighted[i] += sign * m * centroid[i];
            }
            edits.push((sign * m, *p));
        }
    }
    if measure <= DEGENERATE_MEASURE {
        return Err(CpcaError::EmptyResult);
    }
    let centroid: [f64; D] = std::array::from_fn(|i| weighted[i] / measure);
    let delta = linalg::sub(&centroid, &base.centroid);
    let carry = base.measure / measure;
    let mut cov = base
        .cov
        .add_matrix(&SymMatrix::outer(&delta))
        .scaled(carry);
    for (w, p) in &edits {
        cov = cov.add_matrix(&p.covariance_about(&centroid).scaled(w / measure));
    }
    ContinuousSummary::checked(measure, centroid, cov, base.mode)
}

/// Result of a deletion against a solid-body summary: the new summary, the
/// apex it is star-tetrahedralized around, and whether the fast delta path
/// sufficed or a full rebuild ran.
#[derive(Debug, Clone, PartialEq)]
pub struct DeleteOutcome {
    pub summary: ContinuousSummary<3>,
    pub apex: [f64; 3],
    pub rebuilt: bool,
}

/// Deletion step for solid bodies whose tetrahedra share the apex `o`.
///
/// If `o` is still strictly inside the edited body, the provided facet delta
/// is applied in O(|added| + |removed|) and the apex is kept: this is always
/// the case in pinned-anchor setups where `o` is derived from a vertex that
/// is never deleted. Otherwise unsigned apex tetrahedra no longer tile the
/// body, so a new interior point is selected and the summary is rebuilt from
/// scratch in O(faces). Nothing is rebuilt silently: the outcome reports
/// which path ran.
pub fn cpca_delete_with_rebuild(
    base: &ContinuousSummary<3>,
    mesh_after: &TriMesh,
    o: &[f64; 3],
    added: &[Primitive<3>],
    removed: &[Primitive<3>],
) -> Result<DeleteOutcome, CpcaError> {
    if base.mode != BodyMode::PolyhedronVolume {
        return Err(CpcaError::KindMismatch {
            expected: "polyhedron_volume summary",
            found: base.mode.name(),
        });
    }
    if is_inside(mesh_after, o) {
        let summary = cpca_apply_delta(base, added, removed)?;
        return Ok(DeleteOutcome {
            summary,
            apex: *o,
            rebuilt: false,
        });
    }
    let (prims, apex) = polyhedron_volume_primitives(mesh_after, None)?;
    let summary = summarize_primitives(&prims, BodyMode::PolyhedronVolume)?;
    Ok(DeleteOutcome {
        summary,
        apex,
        rebuilt: true,
    })
}
