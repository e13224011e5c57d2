//! Deterministic reduction helpers shared by the quadrature and statistics
//! code.
//!
//! All bulk reductions in this crate go through [`pairwise_sum`] (or the
//! map/collect wrappers below) so that results are bit-identical regardless
//! of how many worker threads evaluate the terms: terms are materialized in
//! index order first, and the summation tree depends only on the length of
//! the slice.

use rayon::prelude::*;

/// Threshold below which summation is a plain sequential fold.
const PAIRWISE_LEAF: usize = 32;

/// Fixed-order pairwise (cascade) summation.
///
/// Deterministic for a given slice regardless of thread count, and much
/// better conditioned than a naive left fold for the long, mildly varying
/// term lists produced by quadrature grids.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= PAIRWISE_LEAF {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Evaluate `f` on `0..n` in parallel, then sum the results in fixed order.
pub fn par_sum_indexed<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let terms: Vec<f64> = (0..n).into_par_iter().map(f).collect();
    pairwise_sum(&terms)
}

/// Evaluate `f` on `0..n` in parallel and take the maximum in index order.
///
/// `max` is associative and commutative over totally ordered values, so the
/// result is thread-count independent; NaN terms are treated as "no value".
pub fn par_max_indexed<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let terms: Vec<f64> = (0..n).into_par_iter().map(f).collect();
    terms
        .into_iter()
        .filter(|v| !v.is_nan())
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Maximum of a slice ignoring NaN entries; `-inf` when empty.
pub fn max_ignoring_nan(xs: &[f64]) -> f64 {
    xs.iter()
        .copied()
        .filter(|v| !v.is_nan())
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Relative drift `|a - b| / max(|a|, |b|)`, with `0/0 = 0`.
///
/// Used by every refinement-stability check: a statistic is considered
/// stable when its drift under doubled quadrature resolution stays below a
/// stated threshold.
pub fn relative_drift(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}
