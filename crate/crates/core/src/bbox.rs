//! Oriented bounding boxes from principal frames: exact extremal projection
//! scans over raw points, conservative scans over occupied-cell corners or
//! per-column extremal corners, the expanded cell-center variant, and a
//! tight refinement that recovers the exact point extents while examining
//! only a slab's worth of points in the common case.

use crate::cpca::ContinuousSummary;
use crate::grid::{GridError, OccupancyGrid};
use crate::linalg::{self, Frame, LinalgError, SymMatrix};
use crate::moments::MomentSummary;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoxError {
    #[error("no points to scan")]
    EmptyInput,
    #[error("tight refinement needs a grid built with point tracking")]
    PointsNotTracked,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Per-axis projection intervals onto a frame's axes, stored as absolute
/// bounds so extents from different candidate sources compare directly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extents<const D: usize> {
    pub lo: [f64; D],
    pub hi: [f64; D],
}

impl<const D: usize> Extents<D> {
    pub fn widths(&self) -> [f64; D] {
        std::array::from_fn(|i| self.hi[i] - self.lo[i])
    }

    pub fn volume(&self) -> f64 {
        self.widths().iter().product()
    }

    /// Symmetric expansion of every side; `delta` must be non-negative.
    pub fn expanded(&self, delta: f64) -> Extents<D> {
        debug_assert!(delta >= 0.0);
        Extents {
            lo: std::array::from_fn(|i| self.lo[i] - delta),
            hi: std::array::from_fn(|i| self.hi[i] + delta),
        }
    }

    /// Per-axis union, for boxes covering several objects in one frame.
    pub fn union(&self, other: &Extents<D>) -> Extents<D> {
        Extents {
            lo: std::array::from_fn(|i| self.lo[i].min(other.lo[i])),
            hi: std::array::from_fn(|i| self.hi[i].max(other.hi[i])),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientedBox<const D: usize> {
    pub frame: Frame<D>,
    pub extents: Extents<D>,
}

impl<const D: usize> OrientedBox<D> {
    pub fn volume(&self) -> f64 {
        self.extents.volume()
    }

    /// The `2^D` corner positions, reconstructed from the frame axes.
    pub fn corners(&self) -> Vec<[f64; D]> {
        (0..1u32 << D)
            .map(|mask| {
                let mut p = [0.0; D];
                for i in 0..D {
                    let t = if (mask >> i) & 1 == 1 {
                        self.extents.hi[i]
                    } else {
                        self.extents.lo[i]
                    };
                    for k in 0..D {
                        p[k] += t * self.frame.axes[i][k];
                    }
                }
                p
            })
            .collect()
    }

    /// Projection containment test with an absolute tolerance per axis.
    pub fn contains(&self, p: &[f64; D], slack: f64) -> bool {
        (0..D).all(|i| {
            let t = linalg::dot(p, &self.frame.axes[i]);
            self.extents.lo[i] - slack <= t && t <= self.extents.hi[i] + slack
        })
    }
}

/// Exact per-axis projection extremes over every point.
///
/// Points are processed in blocks, transposed into coordinate-major buffers
/// first: the projection and the running min/max then run lane-parallel
/// across a block, which the compiler turns into vector code, instead of
/// serializing one min/max dependency chain over the whole cloud. min/max
/// are exact, so block and lane order cannot change the result.
pub fn extreme_scan<const D: usize>(
    points: &[[f64; D]],
    frame: &Frame<D>,
) -> Result<Extents<D>, BoxError> {
    if points.is_empty() {
        return Err(BoxError::EmptyInput);
    }
    const BLOCK: usize = 16;
    let axes = frame.axes;
    let mut lo = [[f64::INFINITY; BLOCK]; D];
    let mut hi = [[f64::NEG_INFINITY; BLOCK]; D];
    let mut coords = [[0.0f64; BLOCK]; D];
    let mut blocks = points.chunks_exact(BLOCK);
    for block in &mut blocks {
        for l in 0..BLOCK {
            for k in 0..D {
                coords[k][l] = block[l][k];
            }
        }
        for i in 0..D {
            let axis = axes[i];
            let (lo_i, hi_i) = (&mut lo[i], &mut hi[i]);
            for l in 0..BLOCK {
                let mut t = 0.0;
                for k in 0..D {
                    t += axis[k] * coords[k][l];
                }
                lo_i[l] = if t < lo_i[l] { t } else { lo_i[l] };
                hi_i[l] = if t > hi_i[l] { t } else { hi_i[l] };
            }
        }
    }
    let mut ext = Extents {
        lo: std::array::from_fn(|i| lo[i].iter().copied().fold(f64::INFINITY, f64::min)),
        hi: std::array::from_fn(|i| hi[i].iter().copied().fold(f64::NEG_INFINITY, f64::max)),
    };
    for p in blocks.remainder() {
        for i in 0..D {
            let t = linalg::dot(p, &axes[i]);
            ext.lo[i] = ext.lo[i].min(t);
            ext.hi[i] = ext.hi[i].max(t);
        }
    }
    Ok(ext)
}

/// Which conservative candidate set a grid scan uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridVariant {
    /// All corners of occupied cells.
    Corners,
    /// Per-column bottom/top extremal corners; same extents, fewer
    /// candidates.
    Columns,
}

/// Extremal projections over the grid's candidate corners. Both variants
/// return identical extents because a column's corners differ only in the
/// vertical coordinate.
pub fn extreme_grid<const D: usize>(
    grid: &OccupancyGrid<D>,
    frame: &Frame<D>,
    variant: GridVariant,
) -> Result<Extents<D>, BoxError> {
    let corners = match variant {
        GridVariant::Corners => grid.candidate_corners()?,
        GridVariant::Columns => grid.column_extremal_corners()?,
    };
    extreme_scan(&corners, frame)
}

/// Result of [`refine_tight`]: exact extents plus the number of point
/// projections it took to prove them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TightScan<const D: usize> {
    pub extents: Extents<D>,
    pub points_examined: usize,
}

/// Recovers the exact point extents from a conservative grid scan without
/// revisiting every point.
///
/// For each frame axis and each side, only points in cells intersecting the
/// slab between the extremal grid corner's supporting plane and the parallel
/// plane `sqrt(D)·ε/2` inside are scanned. The slab alone can miss the true
/// extreme point (its cell may project entirely below the slab while no
/// better point lives inside), so the scan continues through cells in
/// decreasing order of their best possible projection until the best point
/// found dominates every unscanned cell. That stopping rule makes the result
/// exactly `extreme_scan` over all points while typically touching a few
/// cells per side.
pub fn refine_tight<const D: usize>(
    grid: &OccupancyGrid<D>,
    frame: &Frame<D>,
    coarse: &Extents<D>,
) -> Result<TightScan<D>, BoxError> {
    if !grid.tracks_points() {
        return Err(BoxError::PointsNotTracked);
    }
    if grid.is_empty() {
        return Err(BoxError::EmptyInput);
    }
    let eps = grid.epsilon();
    let half_diag = (D as f64).sqrt() * eps / 2.0;
    let cells: Vec<[i64; D]> = grid.occupied_cells().copied().collect();
    let mut lo = [0.0; D];
    let mut hi = [0.0; D];
    let mut examined = 0usize;
    for i in 0..D {
        let axis = &frame.axes[i];
        // projection interval of each cell: base at the low corner, spread
        // from the axis component signs
        let neg: f64 = axis.iter().map(|a| a.min(0.0)).sum::<f64>() * eps;
        let pos: f64 = axis.iter().map(|a| a.max(0.0)).sum::<f64>() * eps;
        let mut spans: Vec<(f64, f64, usize)> = cells
            .iter()
            .enumerate()
            .map(|(slot, idx)| {
                let base = linalg::dot(&grid.corner_position(idx), axis);
                (base + neg, base + pos, slot)
            })
            .collect();

        // high side: descending by best possible projection
        spans.sort_unstable_by(|a, b| b.1.total_cmp(&a.1));
        let slab = coarse.hi[i] - half_diag;
        let mut best = f64::NEG_INFINITY;
        for &(_, cmax, slot) in &spans {
            if cmax < slab && cmax <= best {
                break;
            }
            for p in grid.cell_points(&cells[slot]).unwrap() {
                best = best.max(linalg::dot(p, axis));
                examined += 1;
            }
        }
        hi[i] = best;

        // low side: ascending by best possible projection
        spans.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
        let slab = coarse.lo[i] + half_diag;
        let mut best = f64::INFINITY;
        for &(cmin, _, slot) in &spans {
            if cmin > slab && cmin >= best {
                break;
            }
            for p in grid.cell_points(&cells[slot]).unwrap() {
                best = best.min(linalg::dot(p, axis));
                examined += 1;
            }
        }
        lo[i] = best;
    }
    Ok(TightScan {
        extents: Extents { lo, hi },
        points_examined: examined,
    })
}

/// Anything that exposes a covariance matrix a frame can be derived from.
pub trait CovarianceSource<const D: usize> {
    fn covariance(&self) -> &SymMatrix<D>;
}

impl<const D: usize> CovarianceSource<D> for MomentSummary<D> {
    fn covariance(&self) -> &SymMatrix<D> {
        self.cov()
    }
}

impl<const D: usize> CovarianceSource<D> for ContinuousSummary<D> {
    fn covariance(&self) -> &SymMatrix<D> {
        self.cov()
    }
}

/// Where box extents come from once the frame is fixed.
#[derive(Debug, Clone, Copy)]
pub enum ExtentSource<'a, const D: usize> {
    /// Exact scan over the raw points.
    Points(&'a [[f64; D]]),
    /// Conservative scan over all occupied-cell corners.
    GridCorners(&'a OccupancyGrid<D>),
    /// Conservative scan over per-column extremal corners.
    GridColumns(&'a OccupancyGrid<D>),
    /// Scan over cell centers, expanded by `sqrt(D)·ε/2` to restore
    /// conservativeness.
    CellCentersExpanded(&'a OccupancyGrid<D>),
}

/// Diagonalizes the summary's covariance into a principal frame and scans
/// the chosen candidate source for extents.
pub fn build_box<const D: usize, S: CovarianceSource<D>>(
    summary: &S,
    source: ExtentSource<'_, D>,
) -> Result<OrientedBox<D>, BoxError> {
    let spectrum = linalg::jacobi_eigendecompose(summary.covariance())?;
    let frame = linalg::principal_frame(&spectrum);
    let extents = match source {
        ExtentSource::Points(points) => extreme_scan(points, &frame)?,
        ExtentSource::GridCorners(grid) => extreme_grid(grid, &frame, GridVariant::Corners)?,
        ExtentSource::GridColumns(grid) => extreme_grid(grid, &frame, GridVariant::Columns)?,
        ExtentSource::CellCentersExpanded(grid) => {
            let centers = grid.cell_centers()?;
            let raw = extreme_scan(&centers, &frame)?;
            raw.expanded((D as f64).sqrt() * grid.epsilon() / 2.0)
        }
    };
    Ok(OrientedBox { frame, extents })
}
