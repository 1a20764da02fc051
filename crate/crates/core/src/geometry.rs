//! Geometric containers and the predicates the continuous-moment machinery
//! needs: validated point clouds, triangle meshes, polygons, and
//! tetrahedralizations of star-shaped bodies from an interior apex.
//!
//! Conventions used throughout:
//!
//! * Triangle winding is meaningful. A closed mesh is expected to be
//!   consistently wound with outward normals; [`TriMesh::with_outward_orientation`]
//!   repairs orientation for convex inputs after loading.
//! * `is_inside` is strict: points on the boundary count as outside, with a
//!   `1e-12` tolerance band pushed outward.
//! * Degeneracy thresholds are absolute in model units; inputs are expected
//!   to be near unit scale (see [`normalize_to_unit_diameter`]).

use crate::linalg::{self, cross, dot, scale, sub};
use thiserror::Error;

/// Pairwise-exact diameter search is O(n^2); above this many points the
/// axis-aligned bounding-box diagonal is used instead (an upper bound within
/// a factor of sqrt(d) of the true diameter).
pub const EXACT_DIAMETER_LIMIT: usize = 10_000;

/// Minimum triangle area accepted by mesh validation, in squared model units.
pub const MIN_TRIANGLE_AREA: f64 = 1e-12;

/// Signed tetra volumes past this far on the wrong side of zero mean the
/// apex is outside the body; magnitudes at or below it mean a degenerate
/// (flat) tetrahedron.
pub const APEX_VOLUME_TOLERANCE: f64 = 1e-12;

/// Strict-inside tolerance for [`is_inside`]: boundary points, and anything
/// within this distance outside a face plane, are not inside.
pub const INSIDE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("non-finite coordinate")]
    NonFinite,
    #[error("degenerate geometry: {what}")]
    Degenerate { what: &'static str },
    #[error("apex lies outside the body; supply a kernel point of the star-shaped region instead")]
    ApexOutside,
    #[error("invalid mesh: {detail}")]
    InvalidMesh { detail: String },
    #[error("mesh is not a closed surface: {detail}")]
    NotClosed { detail: String },
}

// ---------------------------------------------------------------------------
// point clouds

/// Finite-checked list of d-dimensional points. The container is immutable;
/// edits happen at the summary level, not in the stored data.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud<const D: usize> {
    points: Vec<[f64; D]>,
}

impl<const D: usize> PointCloud<D> {
    pub fn new(points: Vec<[f64; D]>) -> Result<Self, GeometryError> {
        if points.iter().any(|p| !linalg::is_finite_vec(p)) {
            return Err(GeometryError::NonFinite);
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[[f64; D]] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Component-wise (min, max) bounds; zeros for an empty cloud.
    pub fn aabb(&self) -> ([f64; D], [f64; D]) {
        aabb_of(&self.points)
    }
}

pub(crate) fn aabb_of<const D: usize>(points: &[[f64; D]]) -> ([f64; D], [f64; D]) {
    let Some(first) = points.first() else {
        return ([0.0; D], [0.0; D]);
    };
    let mut lo = *first;
    let mut hi = *first;
    for p in points {
        for i in 0..D {
            lo[i] = lo[i].min(p[i]);
            hi[i] = hi[i].max(p[i]);
        }
    }
    (lo, hi)
}

fn diameter_of<const D: usize>(points: &[[f64; D]]) -> f64 {
    if points.len() <= EXACT_DIAMETER_LIMIT {
        let mut best = 0.0f64;
        for (k, p) in points.iter().enumerate() {
            for q in &points[k + 1..] {
                best = best.max(linalg::distance(p, q));
            }
        }
        best
    } else {
        let (lo, hi) = aabb_of(points);
        linalg::distance(&lo, &hi)
    }
}

fn scale_points<const D: usize>(points: &[[f64; D]], s: f64) -> Vec<[f64; D]> {
    points.iter().map(|p| scale(p, s)).collect()
}

fn unit_diameter_scale<const D: usize>(points: &[[f64; D]]) -> Result<f64, GeometryError> {
    let d = diameter_of(points);
    if d <= 0.0 {
        return Err(GeometryError::Degenerate {
            what: "all points coincide, diameter is zero",
        });
    }
    Ok(1.0 / d)
}

/// Rescales a cloud about the origin so its diameter becomes 1 and returns
/// the applied scale factor. Exact pairwise diameter up to
/// [`EXACT_DIAMETER_LIMIT`] points, AABB-diagonal estimate beyond.
/// Applying the function to its own output is the identity up to 1e-12.
pub fn normalize_to_unit_diameter<const D: usize>(
    cloud: &PointCloud<D>,
) -> Result<(PointCloud<D>, f64), GeometryError> {
    let s = unit_diameter_scale(&cloud.points)?;
    Ok((
        PointCloud {
            points: scale_points(&cloud.points, s),
        },
        s,
    ))
}

/// Mesh variant of [`normalize_to_unit_diameter`]; scales vertices, keeps
/// connectivity.
pub fn normalize_mesh_to_unit_diameter(mesh: &TriMesh) -> Result<(TriMesh, f64), GeometryError> {
    let s = unit_diameter_scale(&mesh.vertices)?;
    Ok((
        TriMesh {
            vertices: scale_points(&mesh.vertices, s),
            triangles: mesh.triangles.clone(),
        },
        s,
    ))
}

// ---------------------------------------------------------------------------
// polygons

/// Planar polygon given by its boundary vertices in order (closing edge from
/// the last vertex back to the first is implicit). Simplicity is the
/// caller's contract; debug builds verify it with the O(n^2) segment test.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    vertices: Vec<[f64; 2]>,
}

impl Polygon {
    pub fn new(vertices: Vec<[f64; 2]>) -> Result<Self, GeometryError> {
        if vertices.iter().any(|p| !linalg::is_finite_vec(p)) {
            return Err(GeometryError::NonFinite);
        }
        if vertices.len() < 3 {
            return Err(GeometryError::Degenerate {
                what: "polygon needs at least 3 vertices",
            });
        }
        let poly = Self { vertices };
        debug_assert!(poly.is_simple(), "self-intersecting polygon");
        Ok(poly)
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn edge_count(&self) -> usize {
        self.vertices.len()
    }

    /// Endpoints of edge `k`, edges numbered along the boundary.
    pub fn edge(&self, k: usize) -> ([f64; 2], [f64; 2]) {
        let n = self.vertices.len();
        (self.vertices[k % n], self.vertices[(k + 1) % n])
    }

    /// Shoelace area; positive for counter-clockwise boundaries.
    pub fn signed_area(&self) -> f64 {
        let n = self.vertices.len();
        let mut s = 0.0;
        for k in 0..n {
            let a = self.vertices[k];
            let b = self.vertices[(k + 1) % n];
            s += a[0] * b[1] - b[0] * a[1];
        }
        s / 2.0
    }

    pub fn perimeter(&self) -> f64 {
        (0..self.edge_count())
            .map(|k| {
                let (a, b) = self.edge(k);
                linalg::distance(&a, &b)
            })
            .sum()
    }

    /// Length-weighted average of edge midpoints: the centroid of the
    /// boundary curve. Interior for convex polygons, and the reference apex
    /// used when fanning a polygon into triangles.
    pub fn boundary_centroid(&self) -> Result<[f64; 2], GeometryError> {
        let mut total = 0.0;
        let mut acc = [0.0; 2];
        for k in 0..self.edge_count() {
            let (a, b) = self.edge(k);
            let len = linalg::distance(&a, &b);
            total += len;
            acc[0] += len * (a[0] + b[0]) / 2.0;
            acc[1] += len * (a[1] + b[1]) / 2.0;
        }
        if total <= 0.0 {
            return Err(GeometryError::Degenerate {
                what: "polygon boundary has zero length",
            });
        }
        Ok([acc[0] / total, acc[1] / total])
    }

    /// O(n^2) proper-intersection check between non-adjacent edges.
    pub fn is_simple(&self) -> bool {
        let n = self.edge_count();
        for i in 0..n {
            let (a, b) = self.edge(i);
            for j in (i + 1)..n {
                // Skip adjacent edges (they share a vertex by construction).
                if j == i + 1 || (i == 0 && j == n - 1) {
                    continue;
                }
                let (c, d) = self.edge(j);
                if segments_properly_intersect(&a, &b, &c, &d) {
                    return false;
                }
            }
        }
        true
    }
}

fn orient2d(a: &[f64; 2], b: &[f64; 2], c: &[f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn segments_properly_intersect(a: &[f64; 2], b: &[f64; 2], c: &[f64; 2], d: &[f64; 2]) -> bool {
    let d1 = orient2d(c, d, a);
    let d2 = orient2d(c, d, b);
    let d3 = orient2d(a, b, c);
    let d4 = orient2d(a, b, d);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

// ---------------------------------------------------------------------------
// triangle meshes

/// Indexed triangle surface. Validation checks index range, finiteness and
/// non-degenerate triangle areas; closedness is a separate, optional check
/// because open fans are legitimate inputs for pure boundary summaries.
#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    vertices: Vec<[f64; 3]>,
    triangles: Vec<[usize; 3]>,
}

impl TriMesh {
    pub fn new(vertices: Vec<[f64; 3]>, triangles: Vec<[usize; 3]>) -> Result<Self, GeometryError> {
        if vertices.iter().any(|p| !linalg::is_finite_vec(p)) {
            return Err(GeometryError::NonFinite);
        }
        for (k, t) in triangles.iter().enumerate() {
            for &i in t {
                if i >= vertices.len() {
                    return Err(GeometryError::InvalidMesh {
                        detail: format!(
                            "triangle {k} references vertex {i}, but only {} vertices exist",
                            vertices.len()
                        ),
                    });
                }
            }
            if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(GeometryError::InvalidMesh {
                    detail: format!("triangle {k} repeats a vertex index"),
                });
            }
            let area = triangle_area(&vertices[t[0]], &vertices[t[1]], &vertices[t[2]]);
            if area <= MIN_TRIANGLE_AREA {
                return Err(GeometryError::InvalidMesh {
                    detail: format!("triangle {k} is degenerate (area {area:e})"),
                });
            }
        }
        Ok(Self { vertices, triangles })
    }

    pub fn vertices(&self) -> &[[f64; 3]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn triangle_vertices(&self, k: usize) -> [[f64; 3]; 3] {
        let t = self.triangles[k];
        [self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]]]
    }

    /// Verifies the surface is closed and edge-manifold: every undirected
    /// edge shared by exactly two triangles, traversed once in each
    /// direction, and Euler characteristic V - E + F == 2 (a topological
    /// sphere, which is what a star-shaped solid boundary must be).
    pub fn check_closed(&self) -> Result<(), GeometryError> {
        use std::collections::HashMap;
        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
        for t in &self.triangles {
            for e in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
                *directed.entry(e).or_insert(0) += 1;
            }
        }
        let mut undirected = std::collections::HashSet::new();
        for (&(a, b), &count) in &directed {
            if count != 1 {
                return Err(GeometryError::NotClosed {
                    detail: format!("directed edge ({a}, {b}) appears {count} times"),
                });
            }
            if directed.get(&(b, a)) != Some(&1) {
                return Err(GeometryError::NotClosed {
                    detail: format!("edge ({a}, {b}) has no opposite-direction twin"),
                });
            }
            undirected.insert((a.min(b), a.max(b)));
        }
        let v = self.vertices.len() as i64;
        let e = undirected.len() as i64;
        let f = self.triangles.len() as i64;
        if v - e + f != 2 {
            return Err(GeometryError::NotClosed {
                detail: format!("Euler characteristic {} != 2", v - e + f),
            });
        }
        Ok(())
    }

    /// Reorders the winding of every face so its normal points away from the
    /// vertex centroid. Correct for convex bodies only; use after loading
    /// files whose winding convention is unknown.
    pub fn with_outward_orientation(&self) -> Self {
        let n = self.vertices.len() as f64;
        let mut centroid = [0.0; 3];
        for v in &self.vertices {
            for i in 0..3 {
                centroid[i] += v[i] / n;
            }
        }
        let triangles = self
            .triangles
            .iter()
            .map(|t| {
                let [a, b, c] = [self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]]];
                let normal = cross(&sub(&b, &a), &sub(&c, &a));
                let face_mid = [
                    (a[0] + b[0] + c[0]) / 3.0,
                    (a[1] + b[1] + c[1]) / 3.0,
                    (a[2] + b[2] + c[2]) / 3.0,
                ];
                if dot(&normal, &sub(&face_mid, &centroid)) < 0.0 {
                    [t[0], t[2], t[1]]
                } else {
                    *t
                }
            })
            .collect();
        Self {
            vertices: self.vertices.clone(),
            triangles,
        }
    }
}

pub(crate) fn triangle_area<const D: usize>(a: &[f64; D], b: &[f64; D], c: &[f64; D]) -> f64 {
    // Gram-determinant form works in any dimension.
    let u = sub(b, a);
    let v = sub(c, a);
    let g = dot(&u, &u) * dot(&v, &v) - dot(&u, &v) * dot(&u, &v);
    g.max(0.0).sqrt() / 2.0
}

/// Volume of the tetrahedron spanned by a triangle and an apex, signed by
/// the triangle winding as seen from the apex.
pub fn signed_tetra_volume(tri: &[[f64; 3]; 3], apex: &[f64; 3]) -> f64 {
    let u = sub(&tri[0], apex);
    let v = sub(&tri[1], apex);
    let w = sub(&tri[2], apex);
    dot(&u, &cross(&v, &w)) / 6.0
}

/// Area-weighted centroid of the boundary triangles: the center of gravity
/// of the surface, which lies in the kernel of every convex body and close
/// to it for mildly non-convex ones. This is the default apex for
/// star-tetrahedralization.
pub fn select_interior_point(mesh: &TriMesh) -> Result<[f64; 3], GeometryError> {
    let mut total = 0.0;
    let mut acc = [0.0; 3];
    for k in 0..mesh.triangles().len() {
        let [a, b, c] = mesh.triangle_vertices(k);
        let area = triangle_area(&a, &b, &c);
        total += area;
        for i in 0..3 {
            acc[i] += area * (a[i] + b[i] + c[i]) / 3.0;
        }
    }
    if total <= 0.0 {
        return Err(GeometryError::Degenerate {
            what: "mesh has zero surface area",
        });
    }
    Ok([acc[0] / total, acc[1] / total, acc[2] / total])
}

/// One tetrahedron per boundary triangle, all sharing the apex.
/// `base_triangles[k]` is stored with a winding that makes
/// [`signed_tetra_volume`] non-negative, so `volumes[k]` is the plain
/// measure of tetra `k` and their sum is the body volume.
#[derive(Debug, Clone, PartialEq)]
pub struct StarTetra {
    apex: [f64; 3],
    base_triangles: Vec<[[f64; 3]; 3]>,
    volumes: Vec<f64>,
}

impl StarTetra {
    pub fn apex(&self) -> &[f64; 3] {
        &self.apex
    }

    pub fn base_triangles(&self) -> &[[[f64; 3]; 3]] {
        &self.base_triangles
    }

    pub fn volumes(&self) -> &[f64] {
        &self.volumes
    }

    pub fn total_volume(&self) -> f64 {
        self.volumes.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.base_triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.base_triangles.is_empty()
    }
}

/// Decomposes the solid bounded by a closed, consistently wound mesh into
/// tetrahedra spanned by each face and the apex `o`.
///
/// For an apex in the kernel of the body, every face spans a tetrahedron on
/// the same side, so all signed volumes share one sign (which one depends on
/// whether the mesh is wound outward or inward; both are accepted and
/// normalized away). A signed volume on the wrong side of
/// [`APEX_VOLUME_TOLERANCE`] means `o` can see that face from outside, i.e.
/// the apex is not interior; magnitudes at or below the tolerance mean `o`
/// lies in a face plane. Both are errors, never silent sign-flips.
pub fn star_tetrahedralize(mesh: &TriMesh, o: &[f64; 3]) -> Result<StarTetra, GeometryError> {
    if !linalg::is_finite_vec(o) {
        return Err(GeometryError::NonFinite);
    }
    if mesh.triangles().is_empty() {
        return Err(GeometryError::Degenerate {
            what: "mesh has no faces",
        });
    }
    let signed: Vec<f64> = (0..mesh.triangles().len())
        .map(|k| signed_tetra_volume(&mesh.triangle_vertices(k), o))
        .collect();
    let net: f64 = signed.iter().sum();
    let flip = net < 0.0; // inward-wound input: treat mirrored windings as canonical
    let mut base_triangles = Vec::with_capacity(signed.len());
    let mut volumes = Vec::with_capacity(signed.len());
    for (k, &sv) in signed.iter().enumerate() {
        let sv = if flip { -sv } else { sv };
        if sv < -APEX_VOLUME_TOLERANCE {
            return Err(GeometryError::ApexOutside);
        }
        if sv <= APEX_VOLUME_TOLERANCE {
            return Err(GeometryError::Degenerate {
                what: "apex lies in a face plane (zero-volume tetrahedron)",
            });
        }
        let [a, b, c] = mesh.triangle_vertices(k);
        base_triangles.push(if flip { [a, c, b] } else { [a, b, c] });
        volumes.push(sv);
    }
    Ok(StarTetra {
        apex: *o,
        base_triangles,
        volumes,
    })
}

/// Strict interior test against every face plane of a closed, convex,
/// outward-oriented mesh. Boundary points are outside by convention.
pub fn is_inside(mesh: &TriMesh, q: &[f64; 3]) -> bool {
    if !linalg::is_finite_vec(q) {
        return false;
    }
    for k in 0..mesh.triangles().len() {
        let [a, b, c] = mesh.triangle_vertices(k);
        let n = cross(&sub(&b, &a), &sub(&c, &a));
        let len = linalg::norm(&n);
        if len == 0.0 {
            continue;
        }
        let signed_dist = dot(&sub(q, &a), &n) / len;
        if signed_dist > -INSIDE_TOLERANCE {
            return false;
        }
    }
    true
}

// ---------------------------------------------------------------------------
// ready-made fixtures (shared by tests in several modules and by the CLI's
// self-checks)

/// Axis-aligned unit cube [0,1]^3 as 12 outward-wound triangles.
pub fn unit_cube_mesh() -> TriMesh {
    let v = vec![
        [0.0, 0.0, 0.0],
        [1.0, 0.0, 0.0],
        [1.0, 1.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, 0.0, 1.0],
        [1.0, 0.0, 1.0],
        [1.0, 1.0, 1.0],
        [0.0, 1.0, 1.0],
    ];
    let t = vec![
        // bottom (z = 0), normal -z
        [0, 2, 1],
        [0, 3, 2],
        // top (z = 1), normal +z
        [4, 5, 6],
        [4, 6, 7],
        // front (y = 0), normal -y
        [0, 1, 5],
        [0, 5, 4],
        // back (y = 1), normal +y
        [2, 3, 7],
        [2, 7, 6],
        // left (x = 0), normal -x
        [0, 4, 7],
        [0, 7, 3],
        // right (x = 1), normal +x
        [1, 2, 6],
        [1, 6, 5],
    ];
    TriMesh::new(v, t).expect("unit cube fixture is valid")
}

/// Regular octahedron with vertices at distance `r` along each axis from the
/// origin, outward-wound.
pub fn octahedron_mesh(r: f64) -> TriMesh {
    let v = vec![
        [r, 0.0, 0.0],
        [-r, 0.0, 0.0],
        [0.0, r, 0.0],
        [0.0, -r, 0.0],
        [0.0, 0.0, r],
        [0.0, 0.0, -r],
    ];
    let t = vec![
        [0, 2, 4],
        [2, 1, 4],
        [1, 3, 4],
        [3, 0, 4],
        [2, 0, 5],
        [1, 2, 5],
        [3, 1, 5],
        [0, 3, 5],
    ];
    TriMesh::new(v, t).expect("octahedron fixture is valid")
}
