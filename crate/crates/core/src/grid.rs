//! Uniform ε-cell occupancy grid over a point set, with dynamic insertion
//! and removal. The grid is the candidate source for the conservative
//! oriented-box searches: all corners of occupied cells, or the per-column
//! extremal corners that cut the candidate count from O(1/ε^3) to O(1/ε^2).
//!
//! Cells are addressed by integer index tuples; the position of a cell's low
//! corner is `origin + epsilon * index`, computed identically everywhere so
//! corners shared between queries compare bitwise equal. The origin is
//! snapped to a whole multiple of ε at or below the build input's bounding
//! box minimum, which makes grids built at ε, 2ε, 4ε share cell boundaries
//! (each coarse cell is a union of fine cells as long as the ε values are
//! exactly representable, e.g. dyadic).

use std::collections::HashMap;
use thiserror::Error;

use crate::linalg;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum GridError {
    #[error("cell size must be positive and finite, got {epsilon}")]
    NonPositiveEpsilon { epsilon: f64 },
    #[error("non-finite point coordinate")]
    NonFinite,
    #[error("operation requires a non-empty grid")]
    EmptyGrid,
    #[error("removed point was never inserted (cell absent or exhausted)")]
    NotPresent,
}

/// Cell index of `p`: componentwise `floor((p - origin) / eps)`. Points
/// exactly on a cell boundary belong to the higher-index cell.
pub fn cell_of<const D: usize>(p: &[f64; D], eps: f64, origin: &[f64; D]) -> [i64; D] {
    std::array::from_fn(|i| ((p[i] - origin[i]) / eps).floor() as i64)
}

#[derive(Debug, Clone, PartialEq)]
struct Cell<const D: usize> {
    count: u64,
    /// Exact inserted coordinates; populated only when tracking points.
    points: Vec<[f64; D]>,
}

impl<const D: usize> Cell<D> {
    fn new() -> Self {
        Cell {
            count: 0,
            points: Vec::new(),
        }
    }
}

/// Occupancy grid: map from cell index to point count, plus the exact point
/// coordinates per cell when built with tracking (required by the tight-box
/// refinement, unnecessary for pure corner queries).
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid<const D: usize> {
    epsilon: f64,
    origin: [f64; D],
    cells: HashMap<[i64; D], Cell<D>>,
    track_points: bool,
    len: usize,
}

impl<const D: usize> OccupancyGrid<D> {
    /// Builds a grid over `points` with the origin snapped down to a whole
    /// multiple of `epsilon` below the bounding-box minimum.
    pub fn build(points: &[[f64; D]], epsilon: f64, track_points: bool) -> Result<Self, GridError> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(GridError::NonPositiveEpsilon { epsilon });
        }
        if points.is_empty() {
            return Err(GridError::EmptyGrid);
        }
        for p in points {
            if !linalg::is_finite_vec(p) {
                return Err(GridError::NonFinite);
            }
        }
        let origin = std::array::from_fn(|i| {
            let min = points.iter().map(|p| p[i]).fold(f64::INFINITY, f64::min);
            epsilon * (min / epsilon).floor()
        });
        let mut grid = OccupancyGrid {
            epsilon,
            origin,
            cells: HashMap::new(),
            track_points,
            len: 0,
        };
        for p in points {
            grid.insert_point(p);
        }
        Ok(grid)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn origin(&self) -> &[f64; D] {
        &self.origin
    }

    /// Total number of points currently inserted.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn occupied_cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn tracks_points(&self) -> bool {
        self.track_points
    }

    pub fn cell(&self, p: &[f64; D]) -> [i64; D] {
        cell_of(p, self.epsilon, &self.origin)
    }

    /// Position of a corner or cell low corner addressed by integer index.
    pub fn corner_position(&self, index: &[i64; D]) -> [f64; D] {
        std::array::from_fn(|i| self.origin[i] + self.epsilon * index[i] as f64)
    }

    pub fn occupied_cells(&self) -> impl Iterator<Item = &[i64; D]> {
        self.cells.keys()
    }

    /// Points stored in a cell; `None` when the cell is empty or the grid
    /// does not track points.
    pub fn cell_points(&self, index: &[i64; D]) -> Option<&[[f64; D]]> {
        if !self.track_points {
            return None;
        }
        self.cells.get(index).map(|c| c.points.as_slice())
    }

    pub fn cell_population(&self, index: &[i64; D]) -> u64 {
        self.cells.get(index).map_or(0, |c| c.count)
    }

    fn insert_point(&mut self, p: &[f64; D]) {
        let idx = self.cell(p);
        let cell = self.cells.entry(idx).or_insert_with(Cell::new);
        cell.count += 1;
        if self.track_points {
            cell.points.push(*p);
        }
        self.len += 1;
    }

    fn remove_point(&mut self, p: &[f64; D]) -> Result<(), GridError> {
        let idx = self.cell(p);
        let Some(cell) = self.cells.get_mut(&idx) else {
            return Err(GridError::NotPresent);
        };
        if self.track_points {
            let Some(at) = cell.points.iter().position(|q| q == p) else {
                return Err(GridError::NotPresent);
            };
            cell.points.swap_remove(at);
        }
        cell.count -= 1;
        if cell.count == 0 {
            self.cells.remove(&idx);
        }
        self.len -= 1;
        Ok(())
    }

    /// Applies a batch edit: insertions first, then removals. Cost is
    /// proportional to the number of changed points. Removing a point that
    /// was never inserted (absent cell, exhausted count, or no exact
    /// coordinate match when tracking) fails with `NotPresent`; insertions
    /// performed before the failing removal remain applied.
    pub fn update(&mut self, added: &[[f64; D]], removed: &[[f64; D]]) -> Result<(), GridError> {
        for p in added {
            if !linalg::is_finite_vec(p) {
                return Err(GridError::NonFinite);
            }
        }
        for p in added {
            self.insert_point(p);
        }
        for p in removed {
            self.remove_point(p)?;
        }
        Ok(())
    }

    fn sorted_corner_positions(&self, set: std::collections::HashSet<[i64; D]>) -> Vec<[f64; D]> {
        let mut indices: Vec<[i64; D]> = set.into_iter().collect();
        indices.sort_unstable();
        indices.iter().map(|c| self.corner_position(c)).collect()
    }

    /// All `2^D` corners of every occupied cell, deduplicated and in a
    /// deterministic (lexicographic index) order.
    pub fn candidate_corners(&self) -> Result<Vec<[f64; D]>, GridError> {
        if self.cells.is_empty() {
            return Err(GridError::EmptyGrid);
        }
        let mut set = std::collections::HashSet::with_capacity(self.cells.len() * (1 << D));
        for idx in self.cells.keys() {
            for mask in 0u32..(1 << D) {
                set.insert(std::array::from_fn(|i| idx[i] + ((mask >> i) & 1) as i64));
            }
        }
        Ok(self.sorted_corner_positions(set))
    }

    /// Per-column extremal corners: for every occupied column (cells sharing
    /// all indices but the last), the `2^(D-1)` bottom corners of its lowest
    /// occupied cell and the `2^(D-1)` top corners of its highest, then
    /// deduplicated. Any direction's extremal projection over these corners
    /// matches the full corner set: corners of a column differ only in the
    /// vertical coordinate, so the extreme is reached on the top or bottom
    /// cell of the column.
    pub fn column_extremal_corners(&self) -> Result<Vec<[f64; D]>, GridError> {
        if self.cells.is_empty() {
            return Err(GridError::EmptyGrid);
        }
        let up = D - 1;
        let mut columns: HashMap<[i64; D], (i64, i64)> = HashMap::new();
        for idx in self.cells.keys() {
            let mut key = *idx;
            key[up] = 0;
            let z = idx[up];
            columns
                .entry(key)
                .and_modify(|(lo, hi)| {
                    *lo = (*lo).min(z);
                    *hi = (*hi).max(z);
                })
                .or_insert((z, z));
        }
        let mut set = std::collections::HashSet::with_capacity(columns.len() * (1 << D));
        for (key, (lo, hi)) in &columns {
            for mask in 0u32..(1 << up) {
                let mut corner: [i64; D] = std::array::from_fn(|i| {
                    if i < up {
                        key[i] + ((mask >> i) & 1) as i64
                    } else {
                        0
                    }
                });
                corner[up] = *lo;
                set.insert(corner);
                corner[up] = hi + 1;
                set.insert(corner);
            }
        }
        Ok(self.sorted_corner_positions(set))
    }

    /// Centers of all occupied cells, deterministic order.
    pub fn cell_centers(&self) -> Result<Vec<[f64; D]>, GridError> {
        if self.cells.is_empty() {
            return Err(GridError::EmptyGrid);
        }
        let mut indices: Vec<[i64; D]> = self.cells.keys().copied().collect();
        indices.sort_unstable();
        Ok(indices
            .iter()
            .map(|idx| {
                std::array::from_fn(|i| self.origin[i] + self.epsilon * (idx[i] as f64 + 0.5))
            })
            .collect())
    }
}
