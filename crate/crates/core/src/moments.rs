//! Running mean and population covariance of a point multiset, with
//! closed-form batch insertion and deletion.
//!
//! A [`MomentSummary`] describes `n` points in O(d^2) space; it never stores
//! the points themselves. Merging two summaries (or deleting one from
//! another) is exact algebra on counts, means and covariances:
//!
//! * add, counts `n` and `m`, displacement `d = mu - mu_b`:
//!   `mu' = (n mu + m mu_b) / (n + m)` and
//!   `cov' = (n cov + m cov_b) / (n + m) + (n m / (n + m)^2) d d^T`
//! * delete (`m < n`):
//!   `mu' = (n mu - m mu_b) / (n - m)` and
//!   `cov' = (n cov - m cov_b) / (n - m) - (n m / (n - m)^2) d d^T`
//!
//! Deletion is the exact inverse of addition in real arithmetic, but in
//! floating point it reintroduces cancellation: long delete-heavy histories
//! can push the covariance slightly indefinite. The library never rebuilds
//! behind the caller's back; instead [`MomentSummary::drift_estimate`]
//! exposes the smallest eigenvalue and [`MomentSummary::rebuild_hinted`]
//! trips after [`REBUILD_HINT_UPDATES`] closed-form updates so callers can
//! decide when to resummarize from the points they own.

use crate::linalg::{self, LinalgError, SymMatrix};
use thiserror::Error;

/// Number of closed-form updates after which [`MomentSummary::rebuild_hinted`]
/// suggests resummarizing from scratch.
pub const REBUILD_HINT_UPDATES: u64 = 1_000_000;

/// Unit-direction tolerance for [`MomentSummary::variance_along`].
pub const UNIT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MomentsError {
    /// An input point or a computed summary entry is NaN or infinite.
    #[error("non-finite value in points or resulting summary")]
    NonFinite,
    /// The operation would delete every described point (or more).
    #[error("deletion would leave no points in the summary")]
    EmptyResult,
    /// Direction passed to `variance_along` is not unit length.
    #[error("direction norm {norm} is not 1 within {UNIT_TOLERANCE:e}")]
    NotUnit { norm: f64 },
}

/// Count, mean and population covariance (`1/n` normalization) of a point
/// multiset. Immutable: every update returns a new summary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentSummary<const D: usize> {
    count: u64,
    mean: [f64; D],
    cov: SymMatrix<D>,
    updates: u64,
}

/// Two-pass summary of a point slice: mean first, then covariance about the
/// mean. An empty slice yields the empty summary (count 0, zeros), which is
/// the identity for [`MomentSummary::apply_add`].
pub fn summarize<const D: usize>(points: &[[f64; D]]) -> Result<MomentSummary<D>, MomentsError> {
    if points.is_empty() {
        return Ok(MomentSummary::empty());
    }
    for p in points {
        if !linalg::is_finite_vec(p) {
            return Err(MomentsError::NonFinite);
        }
    }
    let n = points.len() as f64;
    let mut mean = [0.0; D];
    for p in points {
        for i in 0..D {
            mean[i] += p[i];
        }
    }
    for x in &mut mean {
        *x /= n;
    }
    let mut acc = [[0.0; D]; D];
    for p in points {
        let d = linalg::sub(p, &mean);
        for i in 0..D {
            for j in i..D {
                acc[i][j] += d[i] * d[j];
            }
        }
    }
    let cov = SymMatrix::from_fn(|i, j| acc[i][j] / n);
    MomentSummary::checked(points.len() as u64, mean, cov, 0)
}

impl<const D: usize> MomentSummary<D> {
    /// Summary of zero points.
    pub fn empty() -> Self {
        Self {
            count: 0,
            mean: [0.0; D],
            cov: SymMatrix::zero(),
            updates: 0,
        }
    }

    fn checked(count: u64, mean: [f64; D], cov: SymMatrix<D>, updates: u64) -> Result<Self, MomentsError> {
        if !linalg::is_finite_vec(&mean) || !cov.is_finite() {
            return Err(MomentsError::NonFinite);
        }
        Ok(Self {
            count,
            mean,
            cov,
            updates,
        })
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> &[f64; D] {
        &self.mean
    }

    pub fn cov(&self) -> &SymMatrix<D> {
        &self.cov
    }

    /// Closed-form updates applied since the summary was last built from
    /// points.
    pub fn updates_applied(&self) -> u64 {
        self.updates
    }

    /// True once enough closed-form updates have accumulated that a caller
    /// holding the underlying points should consider resummarizing.
    pub fn rebuild_hinted(&self) -> bool {
        self.updates >= REBUILD_HINT_UPDATES
    }

    /// Smallest covariance eigenvalue. Meaningfully negative values signal
    /// accumulated cancellation from deletions.
    pub fn drift_estimate(&self) -> Result<f64, LinalgError> {
        let sp = linalg::jacobi_eigendecompose(&self.cov)?;
        Ok(sp.eigenvalues[D - 1])
    }

    /// Merges a batch summary into this one.
    pub fn apply_add(&self, batch: &Self) -> Result<Self, MomentsError> {
        if batch.count == 0 {
            return Ok(*self);
        }
        if self.count == 0 {
            let mut out = *batch;
            out.updates = self.updates.saturating_add(batch.updates).saturating_add(1);
            return Ok(out);
        }
        let n = self.count as f64;
        let m = batch.count as f64;
        let t = n + m;
        let mean = std::array::from_fn(|i| (n * self.mean[i] + m * batch.mean[i]) / t);
        let d = linalg::sub(&self.mean, &batch.mean);
        let w = n * m / (t * t);
        let cov = SymMatrix::from_fn(|i, j| {
            (n * self.cov.get(i, j) + m * batch.cov.get(i, j)) / t + w * d[i] * d[j]
        });
        Self::checked(
            self.count + batch.count,
            mean,
            cov,
            self.updates.saturating_add(batch.updates).saturating_add(1),
        )
    }

    /// Removes a batch summary from this one. The batch must describe a
    /// sub-multiset of the summarized points; that precondition is the
    /// caller's (only its count is checkable here, and violating the rest
    /// surfaces as covariance drift, see [`Self::drift_estimate`]).
    pub fn apply_delete(&self, batch: &Self) -> Result<Self, MomentsError> {
        if batch.count == 0 {
            return Ok(*self);
        }
        if batch.count >= self.count {
            return Err(MomentsError::EmptyResult);
        }
        let n = self.count as f64;
        let m = batch.count as f64;
        let r = n - m;
        let mean = std::array::from_fn(|i| (n * self.mean[i] - m * batch.mean[i]) / r);
        let d = linalg::sub(&self.mean, &batch.mean);
        let w = n * m / (r * r);
        let cov = SymMatrix::from_fn(|i, j| {
            (n * self.cov.get(i, j) - m * batch.cov.get(i, j)) / r - w * d[i] * d[j]
        });
        let out = Self::checked(
            self.count - batch.count,
            mean,
            cov,
            self.updates.saturating_add(batch.updates).saturating_add(1),
        )?;
        out.debug_check_psd();
        Ok(out)
    }

    /// Single-point insertion: the batch-add formulas specialized to a batch
    /// of one (whose own covariance is zero), saving the intermediate
    /// summary.
    pub fn add_one(&self, p: &[f64; D]) -> Result<Self, MomentsError> {
        if !linalg::is_finite_vec(p) {
            return Err(MomentsError::NonFinite);
        }
        if self.count == 0 {
            return Self::checked(1, *p, SymMatrix::zero(), self.updates.saturating_add(1));
        }
        let n = self.count as f64;
        let t = n + 1.0;
        let mean = std::array::from_fn(|i| (n * self.mean[i] + p[i]) / t);
        let d = linalg::sub(p, &self.mean);
        let w = n / (t * t);
        let cov = SymMatrix::from_fn(|i, j| (n / t) * self.cov.get(i, j) + w * d[i] * d[j]);
        Self::checked(self.count + 1, mean, cov, self.updates.saturating_add(1))
    }

    /// Single-point deletion; `n` below is the count before deletion.
    pub fn delete_one(&self, p: &[f64; D]) -> Result<Self, MomentsError> {
        if !linalg::is_finite_vec(p) {
            return Err(MomentsError::NonFinite);
        }
        if self.count <= 1 {
            return Err(MomentsError::EmptyResult);
        }
        let n = self.count as f64;
        let r = n - 1.0;
        let mean = std::array::from_fn(|i| (n * self.mean[i] - p[i]) / r);
        let d = linalg::sub(p, &self.mean);
        let w = n / (r * r);
        let cov = SymMatrix::from_fn(|i, j| (n / r) * self.cov.get(i, j) - w * d[i] * d[j]);
        let out = Self::checked(self.count - 1, mean, cov, self.updates.saturating_add(1))?;
        out.debug_check_psd();
        Ok(out)
    }

    /// Variance of the described points along a unit direction: `v^T cov v`.
    /// May be as low as `-1e-12` after heavy cancellation.
    pub fn variance_along(&self, v: &[f64; D]) -> Result<f64, MomentsError> {
        let norm = linalg::norm(v);
        if (norm - 1.0).abs() > UNIT_TOLERANCE {
            return Err(MomentsError::NotUnit { norm });
        }
        Ok(self.cov.quadratic_form(v))
    }

    /// Deletions on summaries that honor the sub-multiset precondition keep
    /// the covariance positive semidefinite up to rounding; a clearly
    /// negative eigenvalue in a debug build means the caller deleted points
    /// that were never added.
    fn debug_check_psd(&self) {
        #[cfg(debug_assertions)]
        {
            if let Ok(min) = self.drift_estimate() {
                debug_assert!(
                    min >= -1e-9 * 1.0f64.max(self.cov.norm_inf()),
                    "covariance drifted indefinite: min eigenvalue {min:e}"
                );
            }
        }
    }
}
