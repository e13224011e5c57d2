//! Reproducing kernels of the standard weighted Bergman spaces.
//!
//! For exponent `α`, the kernel is
//!
//! ```text
//! K^α(z, w) = (1 - w̄ z)^{-(α+2)}        (principal branch),
//! ```
//!
//! with diagonal `K^α(z, z) = (1 - |z|²)^{-(α+2)}` and normalized sections
//! `k^α_z(·) = K^α(z, ·) / K^α(z, z)^{1/2}`. The base `1 - w̄ z` has strictly
//! positive real part on the bidisk, so the principal branch is continuous
//! and the usual algebraic identities hold exactly.
//!
//! Two estimate-style facts are exposed numerically:
//!
//! - a growth bound: point evaluations of `f ∈ A^p_σ` are controlled by
//!   `|f(z)|^p ≤ C ‖f‖^p / (σ(z)(1 - |z|²)²)` ([`growth_bound_check`]
//!   reports the observed constant);
//! - a closed-form comparison target for kernel norms,
//!   `1 / (σ(z)^{1/p} (1 - |z|²)^{(α+2) - 2/p})` ([`kernel_norm_estimate`]).
//!   For constant weights this matches the true norm up to bounded factors;
//!   the calibration `α = 0, p = 2, σ ≡ 1` is exact.

use num_complex::Complex64;

use crate::geometry::DiskPoint;
use crate::measure::{integrate, Measure, MeasureError, QuadratureSpec};
use crate::weights::AdmissibleWeight;

/// `K^α(z, w) = (1 - w̄ z)^{-(α+2)}`, principal branch.
pub fn kernel(alpha: f64, z: DiskPoint, w: DiskPoint) -> Complex64 {
    kernel_raw(alpha, z.to_complex(), w.to_complex())
}

pub(crate) fn kernel_raw(alpha: f64, z: Complex64, w: Complex64) -> Complex64 {
    (Complex64::new(1.0, 0.0) - w.conj() * z).powf(-(alpha + 2.0))
}

/// Normalized kernel section `k^α_z(w) = K^α(z, w) (1 - |z|²)^{(α+2)/2}`.
pub fn normalized_kernel(alpha: f64, z: DiskPoint, w: DiskPoint) -> Complex64 {
    let nz = 1.0 - z.to_complex().norm_sqr();
    kernel(alpha, z, w) * nz.powf((alpha + 2.0) / 2.0)
}

/// Precomputed evaluator for `|k^α_z(w)|^t` (or `|K^α(z, w)|^t`), the hot
/// inner loop of every Berezin-type quadrature.
///
/// Only the modulus is needed, so the complex power collapses to one real
/// `powf` of `|1 - z̄ w|²`.
#[derive(Debug, Clone, Copy)]
pub struct KernelPow {
    z_conj: Complex64,
    /// Exponent applied to `|1 - z̄ w|²`.
    half_exp: f64,
    prefactor: f64,
}

impl KernelPow {
    /// Evaluator for `|k^α_z(·)|^t` (normalized section).
    pub fn normalized(alpha: f64, t: f64, z: Complex64) -> Self {
        let s = t * (alpha + 2.0);
        KernelPow {
            z_conj: z.conj(),
            half_exp: -s / 2.0,
            prefactor: (1.0 - z.norm_sqr()).powf(s / 2.0),
        }
    }

    /// Evaluator for `|K^α(z, ·)|^t` (plain kernel power).
    pub fn plain(alpha: f64, t: f64, z: Complex64) -> Self {
        let s = t * (alpha + 2.0);
        KernelPow {
            z_conj: z.conj(),
            half_exp: -s / 2.0,
            prefactor: 1.0,
        }
    }

    /// Evaluate at `w`.
    #[inline]
    pub fn eval(&self, w: Complex64) -> f64 {
        let d = Complex64::new(1.0, 0.0) - self.z_conj * w;
        self.prefactor * d.norm_sqr().powf(self.half_exp)
    }
}

/// Closed-form comparison target for `‖K^α(z, ·)‖_{A^p_σ}`:
///
/// ```text
/// 1 / ( σ(z)^{1/p} (1 - |z|²)^{(α+2) - 2/p} ).
/// ```
///
/// This is the estimate side of the norm comparison, not the true norm; it
/// is exact for `σ ≡ 1, α = 0, p = 2` and band-accurate for constant
/// weights.
pub fn kernel_norm_estimate(alpha: f64, p: f64, w: &AdmissibleWeight, z: DiskPoint) -> f64 {
    let nz = 1.0 - z.to_complex().norm_sqr();
    1.0 / (w.eval(z.to_complex()).powf(1.0 / p) * nz.powf(alpha + 2.0 - 2.0 / p))
}

/// Observed growth-bound constant: computes `‖f‖^p_{A^p_σ}` by quadrature
/// and returns the maximum over `probes` of
///
/// ```text
/// |f(z)|^p σ(z) (1 - |z|²)² / ‖f‖^p,
/// ```
///
/// the ratio that the point-evaluation bound asserts is bounded by a
/// constant independent of `f` and `z`.
pub fn growth_bound_check(
    f: &(dyn Fn(Complex64) -> Complex64 + Sync),
    p: f64,
    w: &AdmissibleWeight,
    probes: &[DiskPoint],
    q: &QuadratureSpec,
) -> Result<f64, MeasureError> {
    let weight = w.clone();
    let density = Measure::density(move |z| weight.eval(z));
    let norm_p = integrate(&density, |z| f(z).norm().powf(p), q)?.value;
    if !(norm_p > 0.0) {
        return Err(MeasureError::NumericalFailure(
            "growth bound check needs a nonzero function".into(),
        ));
    }
    let mut worst = 0.0f64;
    for &z in probes {
        let zc = z.to_complex();
        let nz = 1.0 - zc.norm_sqr();
        let ratio = f(zc).norm().powf(p) * w.eval(zc) * nz * nz / norm_p;
        worst = worst.max(ratio);
    }
    Ok(worst)
}
