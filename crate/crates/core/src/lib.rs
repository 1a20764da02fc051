//! Dynamic principal component analysis for point sets and simplex bodies.
//!
//! The crate keeps the first and second moments (mean and population
//! covariance) of a changing collection of points or geometric primitives in
//! closed form: inserting or deleting a batch updates the summary in O(d^2)
//! time instead of re-reading all n elements. From the covariance it derives
//! principal frames and oriented bounding boxes, either by exhaustively
//! projecting every point or by projecting the corners of a sparse occupancy
//! grid built over the data.
//!
//! Modules, bottom up:
//!
//! * [`linalg`]: exactly-symmetric matrices and a cyclic Jacobi eigensolver
//!   with a deterministic sign convention for the resulting frame.
//! * [`moments`]: discrete point-set summaries with closed-form batch
//!   add/delete updates.
//! * [`geometry`]: point clouds, triangle meshes, polygons, star-shaped
//!   tetrahedralizations and the predicates they need.
//! * [`cpca`]: continuous (integral) moments over segments, triangles and
//!   tetrahedra, with the same closed-form delta updates per edited facet.
//! * [`grid`]: uniform occupancy grids and the candidate corner sets used to
//!   accelerate extremal searches.
//! * [`bbox`]: oriented-box assembly from any covariance source plus the
//!   exhaustive, grid-corner and tight-refinement extent searches.
//! * [`io`]: point/mesh loaders and the benchmark report format.
//!
//! All value types are plain data: updates return new summaries instead of
//! mutating shared state, and every numeric tolerance is part of the
//! documented contract of the operation that uses it.

pub mod bbox;
pub mod cpca;
pub mod geometry;
pub mod grid;
pub mod io;
pub mod linalg;
pub mod moments;
