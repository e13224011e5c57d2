//! Admissible radial weights.
//!
//! A weight `σ(z) = σ(|z|)` is *admissible* when it is positive,
//! non-increasing in `|z|`, and `σ(r) (1 - r)^{-(1+δ)}` is non-decreasing
//! for some `δ > 0`. The second condition caps how fast `σ` may decay at the
//! boundary: decay is allowed, but no faster than `(1 - r)^{1+δ}` up to a
//! monotone factor.
//!
//! The *standard* family is `σ_α(z) = (α + 1)(1 - |z|²)^α` for `α ≥ 0`,
//! normalized so that `∫_D σ_α dA = 1` (recall `dA` has total mass 1). It is
//! admissible with `δ = max(α - 1, 10⁻³)`, and it is the weight family whose
//! reproducing kernels have the closed form used in [`crate::kernels`]:
//! the exponent `α` (not `α + 2`) is the one for which
//! `∫ |K^α(z, ·)|² σ_α dA = K^α(z, z)` closes; a unit test pins this down.
//!
//! Admissibility of arbitrary profiles is checked numerically on a geometric
//! grid refined toward `r = 1` by [`validate_admissible`].

use num_complex::Complex64;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

/// Innermost grid distance to the boundary used by the admissibility check.
const GRID_FLOOR: f64 = 1e-8;

/// Relative slack tolerated in the monotonicity comparisons; absorbs
/// floating-point noise in profiles that are exactly constant or exactly on
/// a monotonicity boundary.
const MONOTONE_SLACK: f64 = 1e-12;

/// Which family a weight belongs to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightKind {
    /// `σ_α(z) = (α + 1)(1 - |z|²)^α`.
    Standard { alpha: f64 },
    /// A user-supplied radial profile.
    Custom,
}

/// Errors from weight constructors.
#[derive(Debug, Error)]
pub enum WeightError {
    /// Standard weights are restricted to `α ≥ 0`.
    #[error("standard weight exponent alpha = {0} is outside [0, ∞)")]
    AlphaOutOfRange(f64),
    /// `δ` must be strictly positive.
    #[error("admissibility margin delta = {0} must be > 0")]
    DeltaOutOfRange(f64),
    /// The profile failed the admissibility audit.
    #[error("profile is not admissible: {0}")]
    NotAdmissible(#[from] AdmissibilityViolation),
}

/// Which admissibility clause failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    /// `σ(r) > 0` failed.
    NonPositive,
    /// `σ` increased between two grid points.
    Increasing,
    /// `σ(r)(1 - r)^{-(1+δ)}` decreased between two grid points.
    DecayTooFast,
}

/// A counterexample report from [`validate_admissible`]: the first grid pair
/// at which a clause fails, with the witnessing values.
#[derive(Debug, Clone, Error)]
pub struct AdmissibilityViolation {
    pub kind: ViolationKind,
    pub r_lo: f64,
    pub r_hi: f64,
    pub value_lo: f64,
    pub value_hi: f64,
}

impl fmt::Display for AdmissibilityViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let clause = match self.kind {
            ViolationKind::NonPositive => "positivity",
            ViolationKind::Increasing => "monotone decrease",
            ViolationKind::DecayTooFast => "decay cap sigma(r)(1-r)^{-(1+delta)} non-decreasing",
        };
        write!(
            f,
            "{clause} fails on [{}, {}]: values {} -> {}",
            self.r_lo, self.r_hi, self.value_lo, self.value_hi
        )
    }
}

/// Certificate that a profile passed the admissibility audit.
#[derive(Debug, Clone, Copy)]
pub struct AdmissibilityCertificate {
    /// The margin for which the decay cap was verified.
    pub delta: f64,
    /// Number of radial grid points audited.
    pub grid_size: usize,
    /// Innermost audited distance to the boundary.
    pub boundary_gap: f64,
}

/// An admissible radial weight.
#[derive(Clone)]
pub struct AdmissibleWeight {
    profile: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    /// Admissibility margin `δ > 0`.
    pub delta: f64,
    /// Family tag.
    pub kind: WeightKind,
    /// Scalar multiplier applied on top of the profile.
    pub normalization: f64,
}

impl fmt::Debug for AdmissibleWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AdmissibleWeight")
            .field("delta", &self.delta)
            .field("kind", &self.kind)
            .field("normalization", &self.normalization)
            .finish()
    }
}

impl AdmissibleWeight {
    /// Radial profile value `σ(r)` before normalization.
    pub fn profile(&self, r: f64) -> f64 {
        (self.profile)(r)
    }

    /// Weight value at a point of the disk.
    pub fn eval(&self, z: Complex64) -> f64 {
        self.normalization * (self.profile)(z.norm())
    }

    /// Weight value at radius `r = |z|`.
    pub fn eval_radius(&self, r: f64) -> f64 {
        self.normalization * (self.profile)(r)
    }

    /// The exponent for standard weights, if this is one.
    pub fn alpha(&self) -> Option<f64> {
        match self.kind {
            WeightKind::Standard { alpha } => Some(alpha),
            WeightKind::Custom => None,
        }
    }

    /// Wrap a custom radial profile, auditing admissibility on a grid of
    /// `grid_size` points first.
    pub fn custom<F>(profile: F, delta: f64, grid_size: usize) -> Result<Self, WeightError>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(WeightError::DeltaOutOfRange(delta));
        }
        validate_admissible(&profile, delta, grid_size)?;
        Ok(AdmissibleWeight {
            profile: Arc::new(profile),
            delta,
            kind: WeightKind::Custom,
            normalization: 1.0,
        })
    }
}

/// Build the standard weight `σ_α(z) = (α + 1)(1 - |z|²)^α`, `α ≥ 0`.
///
/// The `(α + 1)` factor makes `∫_D σ_α dA = 1` exactly (Beta integral), so
/// `normalization = 1`. The admissibility margin is `δ = max(α - 1, 10⁻³)`.
pub fn make_standard_weight(alpha: f64) -> Result<AdmissibleWeight, WeightError> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(WeightError::AlphaOutOfRange(alpha));
    }
    let delta = (alpha - 1.0).max(1e-3);
    // (1 - r)(1 + r) instead of 1 - r² keeps full relative precision near
    // the boundary, where the admissibility audit compares adjacent values.
    let profile = move |r: f64| (alpha + 1.0) * ((1.0 - r) * (1.0 + r)).powf(alpha);
    debug_assert!(validate_admissible(&profile, delta, 512).is_ok());
    Ok(AdmissibleWeight {
        profile: Arc::new(profile),
        delta,
        kind: WeightKind::Standard { alpha },
        normalization: 1.0,
    })
}

/// Audit a radial profile for admissibility with margin `delta` on a
/// geometric grid of `grid_size` points refined toward `r = 1`.
///
/// Checks, in order: positivity at every grid point, monotone decrease of
/// the profile, and monotone increase of `σ(r)(1 - r)^{-(1+δ)}`. The first
/// failing pair is reported as an [`AdmissibilityViolation`].
pub fn validate_admissible(
    profile: &(impl Fn(f64) -> f64 + ?Sized),
    delta: f64,
    grid_size: usize,
) -> Result<AdmissibilityCertificate, AdmissibilityViolation> {
    let n = grid_size.max(8);
    // r_i = 1 - GRID_FLOOR^{i/(n-1)}: starts at 0, accumulates geometrically
    // toward the boundary where the decay cap actually bites.
    let grid: Vec<f64> = (0..n)
        .map(|i| 1.0 - GRID_FLOOR.powf(i as f64 / (n - 1) as f64))
        .collect();

    let mut prev_sigma = f64::INFINITY;
    let mut prev_capped = 0.0;
    let mut prev_r = 0.0;
    for (i, &r) in grid.iter().enumerate() {
        let sigma = profile(r);
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(AdmissibilityViolation {
                kind: ViolationKind::NonPositive,
                r_lo: r,
                r_hi: r,
                value_lo: sigma,
                value_hi: sigma,
            });
        }
        let capped = sigma * (1.0 - r).powf(-(1.0 + delta));
        if i > 0 {
            if sigma > prev_sigma * (1.0 + MONOTONE_SLACK) {
                return Err(AdmissibilityViolation {
                    kind: ViolationKind::Increasing,
                    r_lo: prev_r,
                    r_hi: r,
                    value_lo: prev_sigma,
                    value_hi: sigma,
                });
            }
            if capped < prev_capped * (1.0 - MONOTONE_SLACK) {
                return Err(AdmissibilityViolation {
                    kind: ViolationKind::DecayTooFast,
                    r_lo: prev_r,
                    r_hi: r,
                    value_lo: prev_capped,
                    value_hi: capped,
                });
            }
        }
        prev_sigma = sigma;
        prev_capped = capped;
        prev_r = r;
    }
    Ok(AdmissibilityCertificate {
        delta,
        grid_size: n,
        boundary_gap: GRID_FLOOR,
    })
}
