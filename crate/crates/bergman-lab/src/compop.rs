//! Weighted composition operators, their iterates, and power diagnostics.
//!
//! For an analytic self-map `φ` of the disk, a multiplier `ψ`, and a measure
//! `Ω`, the weighted composition operator and its powers are
//!
//! ```text
//! C_{ψ,φ} f = ψ · (f ∘ φ),        C^n_{ψ,φ} f = ⟨ψ,φ,n⟩ · (f ∘ φ_n),
//! ```
//!
//! where `φ_n` is the `n`-fold iterate and `⟨ψ,φ,n⟩ = Π_{j=0}^{n-1} ψ ∘ φ_j`
//! is the iterated weight product (`φ_0` the identity). The `n`-th power's
//! action on `L^p(Ω)` is captured by the pull-back measure `Ω_n`, defined by
//! the change-of-variables identity
//!
//! ```text
//! ‖C^n f‖^p_{L^p(Ω)} = ∫ |f|^p dΩ_n,
//! ∫ f dΩ_n = ∫ |⟨ψ,φ,n⟩(z)|^p f(φ_n(z)) dΩ(z),
//! ```
//!
//! so `C^n : A^p_σ → L^p(Ω)` is bounded exactly when `Ω_n` is a
//! `(p, p, σ)`-Carleson measure. The operator is **power bounded** when the
//! Carleson statistics of the family `{Ω_n}` are uniformly bounded in `n`,
//! and **power compact** (in the evidence sense computed here) when their
//! boundary profiles decay uniformly. [`power_diagnostic`] tracks, per `n`,
//!
//! * `Q₂(n)`: the Berezin-criterion sup of `Ω_n`,
//! * `Q₃(n)`: the disk-average criterion sup of `Ω_n`,
//! * `Q₄(n)`: the largest lattice entry `γ_{n,k}` of `Ω_n`,
//!
//! plus a [`VanishingProfile`] per `n`, and turns their growth per step into
//! a verdict.
//!
//! # Numerical notes
//!
//! * Weight products are accumulated as log-magnitude plus phase, so
//!   `|⟨ψ,φ,n⟩|` may span hundreds of orders of magnitude without overflow.
//! * Pull-back integrals always run over the base measure via the identity
//!   above; `φ_n` is never inverted.
//! * The per-`n` diagnostic iterates a single discretization of `Ω` (orbit
//!   positions plus accumulated log-weights), so the cost of step `n + 1` is
//!   one `φ`/`ψ` evaluation per cell, not a fresh `n`-fold composition.
//! * Disk-average statistics of the discretized orbit are trusted only while
//!   `E(z, R)` spans at least two angular cells of the cloud (the membership
//!   trust region); kernel statistics use the same trust rule as the
//!   Carleson module. Boundary mass growth of `Ω₁` is screened instead by
//!   annular Carleson ratios, whose numerator and denominator are bucketed
//!   on the same grid so cell quantization cancels.

use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::carleson::{
    averaging_ratio_with, berezin_ratio_with, lattice_sequence_with, vanishing_profile_with,
    CarlesonError, CarlesonParams, VanishingProfile,
};
use crate::expr::{eval as expr_eval, parse as expr_parse, Expr, ExprError};
use crate::geometry::{mobius_raw, DiskPoint, GeometryError};
use crate::measure::{discretize, integrate, total_mass, Measure, MeasureError, QuadratureSpec};
use crate::numerics::max_ignoring_nan;
use crate::weights::AdmissibleWeight;

/// Points on the audit circle used to verify a self-map.
const AUDIT_POINTS: usize = 4096;

/// Audit circle radius; by the maximum principle a circle audit bounds the
/// map on the whole disk of that radius.
const AUDIT_RADIUS: f64 = 0.999;

/// Margin demanded of the sampled maximum modulus.
const AUDIT_MARGIN: f64 = 1e-6;

/// Spot-check iterates appended beyond `n_max` to confirm trends.
const SPOT_CHECKS: [usize; 2] = [16, 24];

/// Steps ignored before the growth trend is measured.
const BURN_IN: usize = 2;

/// Minimum number of angular cell arcs a pseudo-disk must span for its
/// membership count over the discretized orbit to be meaningful.
const MEMBERSHIP_MARGIN: f64 = 2.0;

/// Refusal threshold of the boundary screen: an annular Carleson ratio this
/// many times the bulk ratio flags the `n = 1` operator as unbounded.
const BOUNDARY_SCREEN_FACTOR: f64 = 8.0;

/// Errors from self-map verification, operator evaluation, and diagnostics.
#[derive(Debug, Error)]
pub enum CompOpError {
    /// A parameter violates its stated range.
    #[error("invalid operator spec: {0}")]
    InvalidSpec(String),
    /// The candidate map failed (or an iterate escaped) the self-map audit.
    #[error("self-map verification failed: {0}")]
    Verification(String),
    /// Failure parsing or evaluating an expression.
    #[error(transparent)]
    Expr(#[from] ExprError),
    /// Failure raised by the quadrature engine.
    #[error(transparent)]
    Measure(#[from] MeasureError),
    /// Failure raised by a Carleson statistic.
    #[error(transparent)]
    Carleson(#[from] CarlesonError),
    /// Failure constructing probe geometry.
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    /// The `n = 1` operator is not bounded, so power diagnostics refuse.
    #[error("operator unbounded at n = 1: {0}")]
    Unbounded(String),
}

/// The concrete function underlying a [`SelfMap`].
#[derive(Clone, Debug)]
enum MapKind {
    /// `z ↦ λz`, `|λ| ≤ 1`.
    Scale(Complex64),
    /// The disk automorphism `z ↦ (a - z)/(1 - āz)`.
    Mobius(Complex64),
    /// Finite Blaschke product with the given zeros.
    Blaschke(Vec<Complex64>),
    /// An arbitrary analytic expression in `z`.
    Analytic(Expr),
}

/// A verified analytic self-map of the disk.
///
/// Construction runs a 4096-point maximum-modulus audit on the circle
/// `|z| = 0.999` and requires the sampled maximum to stay below
/// `1 - 10⁻⁶`; only maps that pass are handed out.
#[derive(Clone, Debug)]
pub struct SelfMap {
    kind: MapKind,
    verified: bool,
}

impl SelfMap {
    /// The identity map.
    pub fn identity() -> Self {
        SelfMap {
            kind: MapKind::Scale(Complex64::new(1.0, 0.0)),
            verified: true,
        }
    }

    /// `z ↦ λz` with `|λ| ≤ 1`.
    pub fn scale(lambda: Complex64) -> Result<Self, CompOpError> {
        SelfMap {
            kind: MapKind::Scale(lambda),
            verified: false,
        }
        .verify()
    }

    /// The involutive disk automorphism exchanging `0` and `a`.
    pub fn mobius(a: Complex64) -> Result<Self, CompOpError> {
        if a.norm() >= 1.0 {
            return Err(CompOpError::Verification(format!(
                "automorphism parameter |a| = {} must be < 1",
                a.norm()
            )));
        }
        SelfMap {
            kind: MapKind::Mobius(a),
            verified: false,
        }
        .verify()
    }

    /// Finite Blaschke product with the given zeros (all `|a_j| < 1`).
    pub fn blaschke(zeros: Vec<Complex64>) -> Result<Self, CompOpError> {
        if zeros.is_empty() {
            return Err(CompOpError::Verification("empty Blaschke product".into()));
        }
        if let Some(a) = zeros.iter().find(|a| a.norm() >= 1.0) {
            return Err(CompOpError::Verification(format!(
                "Blaschke zero |{a}| must be < 1"
            )));
        }
        SelfMap {
            kind: MapKind::Blaschke(zeros),
            verified: false,
        }
        .verify()
    }

    /// Parse an expression in `z` and verify it maps the disk into itself.
    pub fn analytic(src: &str) -> Result<Self, CompOpError> {
        let expr = expr_parse(src)?;
        SelfMap {
            kind: MapKind::Analytic(expr),
            verified: false,
        }
        .verify()
    }

    /// Whether the construction audit passed (always true for handed-out
    /// maps; kept as data so specs can be serialized and re-audited).
    pub fn verified(&self) -> bool {
        self.verified
    }

    /// Evaluate the map at an arbitrary complex argument.
    pub fn eval(&self, z: Complex64) -> Result<Complex64, CompOpError> {
        match &self.kind {
            MapKind::Scale(l) => Ok(l * z),
            MapKind::Mobius(a) => Ok(mobius_raw(*a, z)),
            MapKind::Blaschke(zeros) => {
                let mut acc = Complex64::new(1.0, 0.0);
                for &a in zeros {
                    let factor = if a.norm() == 0.0 {
                        z
                    } else {
                        (a.norm() / a) * mobius_raw(a, z)
                    };
                    acc *= factor;
                }
                Ok(acc)
            }
            MapKind::Analytic(e) => Ok(expr_eval(e, z)?),
        }
    }

    /// Run the maximum-modulus audit, consuming and returning the map.
    fn verify(mut self) -> Result<Self, CompOpError> {
        let mut worst = 0.0f64;
        for k in 0..AUDIT_POINTS {
            let z = Complex64::from_polar(AUDIT_RADIUS, TAU * k as f64 / AUDIT_POINTS as f64);
            let w = self.eval(z)?;
            if !w.re.is_finite() || !w.im.is_finite() {
                return Err(CompOpError::Verification(format!(
                    "map not finite at audit point {z}"
                )));
            }
            worst = worst.max(w.norm());
        }
        if worst > 1.0 - AUDIT_MARGIN {
            return Err(CompOpError::Verification(format!(
                "sampled max |φ| = {worst} on the audit circle exceeds 1 - 1e-6"
            )));
        }
        self.verified = true;
        Ok(self)
    }
}

/// A weighted composition operator together with the ambient structure.
#[derive(Clone)]
pub struct CompOpSpec {
    /// Multiplier `ψ`.
    pub psi: Expr,
    /// Self-map `φ`.
    pub phi: SelfMap,
    /// Exponent of the target space `L^p(Ω)`.
    pub p: f64,
    /// Weight of the source Bergman space.
    pub weight: AdmissibleWeight,
    /// Kernel parameter of the source space.
    pub alpha: f64,
    /// The measure `Ω` (defaults to `σ dA`).
    pub base_measure: Measure,
}

impl std::fmt::Debug for CompOpSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CompOpSpec")
            .field("phi", &self.phi)
            .field("p", &self.p)
            .field("alpha", &self.alpha)
            .field("base_measure", &self.base_measure)
            .finish()
    }
}

impl CompOpSpec {
    /// Build a spec with base measure `σ dA`.
    pub fn new(
        psi_src: &str,
        phi: SelfMap,
        p: f64,
        weight: AdmissibleWeight,
        alpha: f64,
    ) -> Result<Self, CompOpError> {
        let w = weight.clone();
        let base = Measure::density(move |z| w.eval(z));
        Self::with_base_measure(psi_src, phi, p, weight, alpha, base)
    }

    /// Build a spec with an explicit base measure `Ω`.
    pub fn with_base_measure(
        psi_src: &str,
        phi: SelfMap,
        p: f64,
        weight: AdmissibleWeight,
        alpha: f64,
        base_measure: Measure,
    ) -> Result<Self, CompOpError> {
        if !(p > 0.0 && p.is_finite()) {
            return Err(CompOpError::InvalidSpec(format!(
                "p = {p} must be positive and finite"
            )));
        }
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(CompOpError::InvalidSpec(format!(
                "alpha = {alpha} must be ≥ 0"
            )));
        }
        if !phi.verified() {
            return Err(CompOpError::InvalidSpec("unverified self-map".into()));
        }
        let psi = expr_parse(psi_src)?;
        Ok(CompOpSpec {
            psi,
            phi,
            p,
            weight,
            alpha,
            base_measure,
        })
    }
}

/// Iterate on raw complex arguments, flagging escape from the closed disk.
fn iterate_c(phi: &SelfMap, n: usize, z: Complex64) -> Result<Complex64, CompOpError> {
    let mut w = z;
    for _ in 0..n {
        w = phi.eval(w)?;
        if !(w.norm() < 1.0) {
            return Err(CompOpError::Verification(format!(
                "iterate escaped the disk: |φ_k(z)| = {}",
                w.norm()
            )));
        }
    }
    Ok(w)
}

/// `φ_n(z)`, the `n`-fold iterate (`n = 0` is the identity).
pub fn iterate_phi(phi: &SelfMap, n: usize, z: DiskPoint) -> Result<DiskPoint, CompOpError> {
    if !phi.verified() {
        return Err(CompOpError::InvalidSpec("unverified self-map".into()));
    }
    let w = iterate_c(phi, n, z.to_complex())?;
    DiskPoint::from_complex(w).map_err(CompOpError::Geometry)
}

/// Log-magnitude and phase of `⟨ψ,φ,n⟩(z) = Π_{j=0}^{n-1} ψ(φ_j(z))`.
fn weight_product_parts(
    psi: &Expr,
    phi: &SelfMap,
    n: usize,
    z: Complex64,
) -> Result<(f64, f64), CompOpError> {
    let mut w = z;
    let mut log_mag = 0.0f64;
    let mut phase = 0.0f64;
    for j in 0..n {
        let val = expr_eval(psi, w)?;
        log_mag += val.norm().ln();
        phase += val.arg();
        if j + 1 < n {
            w = phi.eval(w)?;
            if !(w.norm() < 1.0) {
                return Err(CompOpError::Verification(format!(
                    "iterate escaped the disk: |φ_k(z)| = {}",
                    w.norm()
                )));
            }
        }
    }
    Ok((log_mag, phase))
}

/// The iterated weight product `⟨ψ,φ,n⟩(z)` for `n ≥ 1`, accumulated in
/// log-magnitude/phase form.
pub fn weight_product(
    psi: &Expr,
    phi: &SelfMap,
    n: usize,
    z: DiskPoint,
) -> Result<Complex64, CompOpError> {
    if n == 0 {
        return Err(CompOpError::InvalidSpec(
            "weight product needs n ≥ 1".into(),
        ));
    }
    let (log_mag, phase) = weight_product_parts(psi, phi, n, z.to_complex())?;
    Ok(Complex64::from_polar(log_mag.exp(), phase))
}

/// The pull-back measure `Ω_n`: a single pull-back layer whose weight is
/// `|⟨ψ,φ,n⟩|^p` and whose transport map is `φ_n` (computed on the fly; the
/// layer count never grows with `n`).
pub fn pullback_measure(spec: &CompOpSpec, n: usize) -> Result<Measure, CompOpError> {
    if n == 0 {
        return Err(CompOpError::InvalidSpec(
            "pull-back measure needs n ≥ 1".into(),
        ));
    }
    let psi = spec.psi.clone();
    let phi = spec.phi.clone();
    let p = spec.p;
    let weight_fn = move |z: Complex64| -> f64 {
        match weight_product_parts(&psi, &phi, n, z) {
            Ok((log_mag, _)) => (p * log_mag).exp(),
            Err(_) => f64::NAN,
        }
    };
    let phi = spec.phi.clone();
    let map_fn = move |z: Complex64| -> Complex64 {
        iterate_c(&phi, n, z).unwrap_or(Complex64::new(f64::NAN, f64::NAN))
    };
    Ok(Measure::pullback(
        spec.base_measure.clone(),
        weight_fn,
        map_fn,
    )?)
}

/// The result of applying `C^n_{ψ,φ}` to a function.
pub struct AppliedOperator {
    /// The function `C^n f = ⟨ψ,φ,n⟩ · (f ∘ φ_n)`.
    pub func: Arc<dyn Fn(Complex64) -> Result<Complex64, CompOpError> + Send + Sync>,
    /// `‖C^n f‖_{L^p(Ω)}` by direct quadrature of `|C^n f|^p`.
    pub norm: f64,
    /// The same norm by integrating `|f|^p` against the pull-back measure.
    pub norm_via_pullback: f64,
    /// Combined quadrature error estimate on `norm^p`.
    pub error: f64,
}

/// Apply `C^n_{ψ,φ}` to `f` and compute `‖C^n f‖_{L^p(Ω)}` along both
/// routes of the change-of-variables identity.
pub fn apply_operator<F>(
    spec: &CompOpSpec,
    n: usize,
    f: F,
    quad: &QuadratureSpec,
) -> Result<AppliedOperator, CompOpError>
where
    F: Fn(Complex64) -> Complex64 + Send + Sync + 'static,
{
    let f = Arc::new(f);
    let psi = spec.psi.clone();
    let phi = spec.phi.clone();
    let fc = f.clone();
    let func = move |z: Complex64| -> Result<Complex64, CompOpError> {
        if n == 0 {
            return Ok(fc(z));
        }
        let (log_mag, phase) = weight_product_parts(&psi, &phi, n, z)?;
        let w = iterate_c(&phi, n, z)?;
        Ok(Complex64::from_polar(log_mag.exp(), phase) * fc(w))
    };
    let func: Arc<dyn Fn(Complex64) -> Result<Complex64, CompOpError> + Send + Sync> =
        Arc::new(func);

    let p = spec.p;
    let direct_fn = func.clone();
    let direct = integrate(
        &spec.base_measure,
        move |z| match direct_fn(z) {
            Ok(v) => v.norm().powf(p),
            Err(_) => f64::NAN,
        },
        quad,
    )?;
    let pulled = pullback_measure(spec, n.max(1))?;
    let fp = f.clone();
    let via_pullback = if n == 0 {
        integrate(&spec.base_measure, move |z| fp(z).norm().powf(p), quad)?
    } else {
        integrate(&pulled, move |z| fp(z).norm().powf(p), quad)?
    };
    Ok(AppliedOperator {
        func,
        norm: direct.value.max(0.0).powf(1.0 / p),
        norm_via_pullback: via_pullback.value.max(0.0).powf(1.0 / p),
        error: direct.error + via_pullback.error,
    })
}

/// Boundedness verdicts for the power family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerVerdict {
    /// All statistics finite with per-step growth ≤ 1.05 beyond burn-in.
    PowerBounded,
    /// Some statistic grows ≥ 1.25 per step beyond burn-in.
    NotPowerBounded,
    /// Mixed or unstable evidence.
    Inconclusive,
}

/// Per-`n` Carleson statistics of the pull-back family `{Ω_n}`.
#[derive(Clone, Debug, Serialize)]
pub struct PowerDiagnostic {
    /// The iterates examined (contiguous up to `n_max`, plus spot checks).
    pub n_values: Vec<usize>,
    /// Berezin-criterion sup of `Ω_n`, aligned with `n_values`.
    pub q2: Vec<f64>,
    /// Disk-average criterion sup of `Ω_n`.
    pub q3: Vec<f64>,
    /// Largest lattice entry `γ_{n,k}` of `Ω_n`.
    pub q4: Vec<f64>,
    /// Boundary decay profile of `Ω_n`.
    pub profiles: Vec<VanishingProfile>,
    /// Geometric-mean growth of the worst statistic family per step,
    /// measured beyond the burn-in.
    pub growth_per_step: f64,
    /// Boundedness verdict.
    pub verdict: PowerVerdict,
    /// Whether some profile satisfied the decay rule.
    pub compact_evidence: bool,
}

/// Orbit state of the discretized base measure: one position and one
/// accumulated log-weight per quadrature cell.
struct OrbitState {
    positions: Vec<Complex64>,
    log_weights: Vec<f64>,
    base_weights: Vec<f64>,
}

impl OrbitState {
    /// Advance from `Ω_n` to `Ω_{n+1}`: absorb `ψ` at the current positions,
    /// then transport the positions by `φ`.
    fn step(&mut self, psi: &Expr, phi: &SelfMap) -> Result<(), CompOpError> {
        for (w, lw) in self.positions.iter_mut().zip(&mut self.log_weights) {
            let val = expr_eval(psi, *w)?;
            *lw += val.norm().ln();
            *w = phi.eval(*w)?;
            if !(w.norm() < 1.0) {
                return Err(CompOpError::Verification(format!(
                    "iterate escaped the disk: |φ_k| = {}",
                    w.norm()
                )));
            }
        }
        Ok(())
    }

    /// Masses of the atomic surrogate: base cell mass times `|⟨ψ,φ,n⟩|^p`.
    fn masses(&self, p: f64) -> Vec<f64> {
        self.log_weights
            .iter()
            .zip(&self.base_weights)
            .map(|(lw, b)| b * (p * lw).exp())
            .collect()
    }

    /// The atomic surrogate of `Ω_n` for the current state.
    fn measure(&self, p: f64) -> Result<Measure, CompOpError> {
        let all = self.masses(p);
        let mut points = Vec::with_capacity(self.positions.len());
        let mut masses = Vec::with_capacity(self.positions.len());
        for (w, mass) in self.positions.iter().zip(all) {
            if mass > 0.0 {
                points.push(DiskPoint::from_complex(*w).map_err(CompOpError::Geometry)?);
                masses.push(mass);
            }
        }
        Ok(Measure::atomic(points, masses)?)
    }
}

/// Largest probe radius at which pseudo-disk membership over the orbit
/// cloud is resolved: the Euclidean radius of `E(z, R)` must cover at least
/// [`MEMBERSHIP_MARGIN`] angular cell arcs (conservative closed form).
fn membership_cap(big_r: f64, angular_nodes: usize) -> f64 {
    let mt = MEMBERSHIP_MARGIN * TAU;
    let rn = big_r * angular_nodes as f64;
    let cap = (-mt + (mt * mt + 4.0 * rn * rn).sqrt()) / (2.0 * rn);
    cap.clamp(0.3, 0.99)
}

/// Necessary-condition screen for boundedness of the `n = 1` operator: the
/// pull-back's Carleson ratio on boundary annuli must stay comparable to
/// the bulk ratio. Both sides are bucketed from clouds on the same grid, so
/// cell quantization cancels. Returns a description of the violation.
fn boundary_screen(
    omega_pts: &[Complex64],
    omega_mass: &[f64],
    sigma_pts: &[Complex64],
    sigma_mass: &[f64],
) -> Option<String> {
    const EDGES: [f64; 7] = [0.0, 0.8, 0.9, 0.95, 0.975, 0.99, 1.0];
    let bucket = |pts: &[Complex64], ms: &[f64]| -> [f64; 6] {
        let mut out = [0.0; 6];
        for (p, m) in pts.iter().zip(ms) {
            let r = p.norm();
            let k = EDGES
                .windows(2)
                .position(|w| r >= w[0] && r < w[1])
                .unwrap_or(5);
            out[k] += m;
        }
        out
    };
    let om = bucket(omega_pts, omega_mass);
    let sg = bucket(sigma_pts, sigma_mass);
    let ratios: Vec<f64> = om
        .iter()
        .zip(&sg)
        .map(|(o, s)| if *s > 0.0 { o / s } else { 0.0 })
        .collect();
    let mut scale = ratios[0].max(ratios[1]);
    if scale == 0.0 {
        scale = ratios.iter().copied().find(|r| *r > 0.0).unwrap_or(0.0);
    }
    if scale == 0.0 {
        return None;
    }
    for (k, r) in ratios.iter().enumerate().skip(2) {
        if !r.is_finite() || *r > BOUNDARY_SCREEN_FACTOR * scale {
            return Some(format!(
                "annulus [{}, {}) carries {:.3e}× the bulk Carleson ratio",
                EDGES[k],
                EDGES[k + 1],
                r / scale
            ));
        }
    }
    None
}

/// Run the power-boundedness / power-compactness diagnostic at default
/// resolution.
pub fn power_diagnostic(
    spec: &CompOpSpec,
    n_max: usize,
    params: &CarlesonParams,
) -> Result<PowerDiagnostic, CompOpError> {
    power_diagnostic_with(
        spec,
        n_max,
        params,
        &QuadratureSpec {
            radial_shells: 48,
            angular_nodes: 48,
            boundary_cutoff: 0.999,
            ..QuadratureSpec::default()
        },
    )
}

/// [`power_diagnostic`] with an explicit resolution for the base-measure
/// discretization and the per-probe quadratures.
pub fn power_diagnostic_with(
    spec: &CompOpSpec,
    n_max: usize,
    params: &CarlesonParams,
    quad: &QuadratureSpec,
) -> Result<PowerDiagnostic, CompOpError> {
    params.validate()?;
    if params.q != params.p {
        return Err(CompOpError::InvalidSpec(format!(
            "power diagnostics require q = p, got p = {}, q = {}",
            params.p, params.q
        )));
    }
    if (params.p - spec.p).abs() > 1e-12 || (params.alpha - spec.alpha).abs() > 1e-12 {
        return Err(CompOpError::InvalidSpec(
            "criterion parameters must match the operator spec (p, alpha)".into(),
        ));
    }
    if n_max == 0 {
        return Err(CompOpError::InvalidSpec("n_max must be ≥ 1".into()));
    }
    total_mass(&spec.base_measure, quad)?;

    // Necessary condition for n = 1 boundedness: the first pull-back must
    // not pile mass on boundary annuli faster than the reference σ dA. Both
    // clouds live on the same fine grid (fine enough to resolve a symbol
    // singularity at the boundary), so cell quantization cancels.
    let screen_quad = QuadratureSpec {
        radial_shells: quad.radial_shells.max(64),
        angular_nodes: quad.angular_nodes.max(512),
        ..*quad
    };
    let base_fine = discretize(&spec.base_measure, &screen_quad)?;
    let mut probe = OrbitState {
        positions: base_fine.points.clone(),
        log_weights: vec![0.0; base_fine.points.len()],
        base_weights: base_fine.weights,
    };
    probe.step(&spec.psi, &spec.phi)?;
    let w = spec.weight.clone();
    let sigma_fine = discretize(&Measure::density(move |z| w.eval(z)), &screen_quad)?;
    if let Some(msg) = boundary_screen(
        &probe.positions,
        &probe.masses(spec.p),
        &sigma_fine.points,
        &sigma_fine.weights,
    ) {
        return Err(CompOpError::Unbounded(format!(
            "the n = 1 pull-back measure fails the boundary screen: {msg}"
        )));
    }

    let cloud = discretize(&spec.base_measure, quad)?;
    let mut state = OrbitState {
        positions: cloud.points.clone(),
        log_weights: vec![0.0; cloud.points.len()],
        base_weights: cloud.weights.clone(),
    };
    let mut n_values: Vec<usize> = (1..=n_max).collect();
    for spot in SPOT_CHECKS {
        if n_max >= 12 && spot > n_max {
            n_values.push(spot);
        }
    }

    // Probe sets (fixed across n). Kernel probes stay inside the radius the
    // cell resolution supports; averaging and lattice probes stay inside
    // the radius at which pseudo-disk membership over the cloud resolves.
    let kernel_cap = (1.0 - 5.0 / quad.angular_nodes as f64).max(0.5);
    let kernel_probes: Vec<DiskPoint> = polar_probes(8, 16, kernel_cap);
    let avg_cap = membership_cap(params.big_r, quad.angular_nodes).min(0.99);
    let mut avg_probes = polar_probes(12, 16, avg_cap);
    avg_probes.extend(
        params
            .lattice
            .nodes
            .iter()
            .filter(|z| z.abs() <= avg_cap)
            .copied(),
    );
    let lat_cap = membership_cap(params.lattice.r, quad.angular_nodes);

    let mut q2 = Vec::with_capacity(n_values.len());
    let mut q3 = Vec::with_capacity(n_values.len());
    let mut q4 = Vec::with_capacity(n_values.len());
    let mut profiles = Vec::with_capacity(n_values.len());
    let mut current_n = 0usize;
    for &n in &n_values {
        while current_n < n {
            state.step(&spec.psi, &spec.phi)?;
            current_n += 1;
        }
        let omega_n = state.measure(spec.p)?;
        let b: Vec<f64> = kernel_probes
            .par_iter()
            .map(|&z| berezin_ratio_with(&omega_n, params, z, quad))
            .collect::<Result<_, _>>()?;
        let a: Vec<f64> = avg_probes
            .par_iter()
            .map(|&z| averaging_ratio_with(&omega_n, params, z, quad))
            .collect::<Result<_, _>>()?;
        let l = lattice_sequence_with(&omega_n, params, quad)?;
        let l_capped: Vec<f64> = l
            .iter()
            .zip(&params.lattice.nodes)
            .filter(|(_, z)| z.abs() <= lat_cap)
            .map(|(v, _)| *v)
            .collect();
        q2.push(clean_sup(max_ignoring_nan(&b)));
        q3.push(clean_sup(max_ignoring_nan(&a)));
        q4.push(clean_sup(max_ignoring_nan(&l_capped)));
        profiles.push(vanishing_profile_with(&omega_n, params, 5, quad)?);
    }

    let growth_per_step = [&q2, &q3, &q4]
        .iter()
        .map(|qs| trend_growth(&n_values, qs))
        .fold(0.0f64, f64::max);
    let finite = q2
        .iter()
        .chain(&q3)
        .chain(&q4)
        .all(|v| v.is_finite());
    let verdict = if growth_per_step >= 1.25 {
        PowerVerdict::NotPowerBounded
    } else if finite && growth_per_step <= 1.05 {
        PowerVerdict::PowerBounded
    } else {
        PowerVerdict::Inconclusive
    };
    let compact_evidence = profiles.iter().any(|p| p.vanishing);
    Ok(PowerDiagnostic {
        n_values,
        q2,
        q3,
        q4,
        profiles,
        growth_per_step,
        verdict,
        compact_evidence,
    })
}

/// Polar probe set: origin plus rings, outermost at `max_radius`.
fn polar_probes(radial: usize, angular: usize, max_radius: f64) -> Vec<DiskPoint> {
    let mut pts = vec![DiskPoint::origin()];
    for i in 1..=radial {
        let r = max_radius * i as f64 / radial as f64;
        for k in 0..angular {
            let z = Complex64::from_polar(r, TAU * k as f64 / angular as f64);
            pts.push(DiskPoint::from_complex(z).expect("probe inside the disk"));
        }
    }
    pts
}

/// Replace the empty-sup sentinel by zero.
fn clean_sup(v: f64) -> f64 {
    if v == f64::NEG_INFINITY {
        0.0
    } else {
        v
    }
}

/// Per-step geometric growth of a statistic beyond the burn-in: with
/// endpoints `Q(n₀)` and `Q(n₁)`, returns `(Q(n₁)/Q(n₀))^{1/(n₁-n₀)}`.
fn trend_growth(n_values: &[usize], qs: &[f64]) -> f64 {
    let start = n_values.iter().position(|&n| n >= BURN_IN).unwrap_or(0);
    let (n0, q0) = (n_values[start], qs[start]);
    let (n1, q1) = (*n_values.last().unwrap(), *qs.last().unwrap());
    if n1 <= n0 {
        return 1.0;
    }
    if q0 == 0.0 {
        return if q1 > 0.0 { f64::INFINITY } else { 1.0 };
    }
    if !q0.is_finite() || !q1.is_finite() {
        return f64::INFINITY;
    }
    (q1 / q0).powf(1.0 / (n1 - n0) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::make_lattice;
    use crate::measure::monte_carlo_integrate;
    use crate::weights::make_standard_weight;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn dp(re: f64, im: f64) -> DiskPoint {
        DiskPoint::new(re, im).unwrap()
    }

    fn flat_spec(psi: &str, phi: SelfMap, p: f64) -> CompOpSpec {
        CompOpSpec::new(psi, phi, p, make_standard_weight(0.0).unwrap(), 0.0).unwrap()
    }

    fn diag_params(lat_r: f64, trunc: f64) -> CarlesonParams {
        CarlesonParams {
            p: 2.0,
            q: 2.0,
            t: 2.0,
            big_r: 0.4,
            weight: make_standard_weight(0.0).unwrap(),
            alpha: 0.0,
            lattice: make_lattice(lat_r, trunc).unwrap(),
        }
    }

    fn diag_quad() -> QuadratureSpec {
        QuadratureSpec {
            radial_shells: 24,
            angular_nodes: 24,
            boundary_cutoff: 0.999,
            ..QuadratureSpec::default()
        }
    }

    #[test]
    fn self_map_audit_accepts_and_rejects() {
        assert!(SelfMap::scale(c(0.5, 0.0)).unwrap().verified());
        assert!(SelfMap::scale(c(0.0, 1.0)).unwrap().verified()); // rotation
        assert!(SelfMap::scale(c(1.2, 0.0)).is_err());
        assert!(SelfMap::mobius(c(0.3, 0.2)).unwrap().verified());
        assert!(SelfMap::mobius(c(0.9999, 0.0)).is_err()); // margin violation
        assert!(SelfMap::blaschke(vec![c(0.3, 0.0), c(0.0, 0.5)]).unwrap().verified());
        assert!(SelfMap::analytic("z^2").unwrap().verified());
        assert!(SelfMap::analytic("(1 + z)/2").unwrap().verified());
        assert!(SelfMap::analytic("2*z").is_err());
    }

    #[test]
    fn iterates_satisfy_closed_forms_and_the_semigroup_law() {
        let phi = SelfMap::scale(c(0.5, 0.0)).unwrap();
        let z = dp(0.4, -0.3);
        let w = iterate_phi(&phi, 3, z).unwrap().to_complex();
        assert!((w - 0.125 * z.to_complex()).norm() < 1e-15);
        assert_eq!(iterate_phi(&phi, 0, z).unwrap().to_complex(), z.to_complex());

        let a = c(0.3, 0.2);
        let inv = SelfMap::mobius(a).unwrap();
        let back = iterate_phi(&inv, 2, z).unwrap().to_complex();
        assert!((back - z.to_complex()).norm() < 1e-12);

        let phi = SelfMap::blaschke(vec![c(0.4, 0.0), c(0.0, -0.3)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let z = dp(rng.gen_range(-0.7..0.7), rng.gen_range(-0.7..0.7));
            let lhs = iterate_phi(&phi, 5, z).unwrap().to_complex();
            let mid = iterate_phi(&phi, 3, z).unwrap();
            let rhs = iterate_phi(&phi, 2, mid).unwrap().to_complex();
            assert!((lhs - rhs).norm() < 1e-10, "semigroup law broke at {z:?}");
        }
    }

    #[test]
    fn weight_product_constant_single_and_telescoping() {
        let phi = SelfMap::scale(c(0.8, 0.0)).unwrap();
        let psi = expr_parse("0.7").unwrap();
        let v = weight_product(&psi, &phi, 5, dp(0.2, 0.1)).unwrap();
        assert!((v - c(0.7f64.powi(5), 0.0)).norm() < 1e-12);

        let psi = expr_parse("z^2 + 0.1").unwrap();
        let z = dp(0.3, -0.2);
        let v = weight_product(&psi, &phi, 1, z).unwrap();
        let direct = z.to_complex() * z.to_complex() + 0.1;
        assert!((v - direct).norm() < 1e-14);
        assert!(weight_product(&psi, &phi, 0, z).is_err());

        // ψ(z) = z, φ = λz: the product telescopes to λ^{n(n-1)/2} zⁿ.
        let psi = expr_parse("z").unwrap();
        let lambda = c(0.8, 0.0);
        let z = dp(0.3, 0.4);
        for n in 1..=5usize {
            let v = weight_product(&psi, &phi, n, z).unwrap();
            let expect = lambda.powu((n * (n - 1) / 2) as u32) * z.to_complex().powu(n as u32);
            assert!((v - expect).norm() < 1e-12 * expect.norm(), "n = {n}");
        }
    }

    #[test]
    fn weight_product_satisfies_the_cocycle_law() {
        let phi = SelfMap::mobius(c(0.4, -0.1)).unwrap();
        let psi = expr_parse("1 + 0.5*z").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..20 {
            let z = dp(rng.gen_range(-0.7..0.7), rng.gen_range(-0.7..0.7));
            let (m, n) = (3usize, 2usize);
            let lhs = weight_product(&psi, &phi, m + n, z).unwrap();
            let wn = weight_product(&psi, &phi, n, z).unwrap();
            let phin = iterate_phi(&phi, n, z).unwrap();
            let wm = weight_product(&psi, &phi, m, phin).unwrap();
            let rhs = wn * wm;
            assert!(
                (lhs - rhs).norm() < 1e-10 * rhs.norm().max(1.0),
                "cocycle law broke at {z:?}"
            );
        }
    }

    #[test]
    fn pullback_measure_identity_and_constant_multiplier() {
        let quad = diag_quad();
        let spec = flat_spec("1", SelfMap::identity(), 2.0);
        let base = spec.base_measure.clone();
        let om1 = pullback_measure(&spec, 3).unwrap();
        let panel: [&(dyn Fn(Complex64) -> f64 + Sync); 4] = [
            &|_| 1.0,
            &|z: Complex64| z.norm_sqr(),
            &|z: Complex64| z.re + 2.0,
            &|z: Complex64| (-z.norm_sqr()).exp(),
        ];
        for f in panel {
            let a = integrate(&om1, f, &quad).unwrap().value;
            let b = integrate(&base, f, &quad).unwrap().value;
            assert!((a - b).abs() <= 1e-14 * b.abs());
        }

        let spec = flat_spec("0.8", SelfMap::identity(), 2.0);
        let om3 = pullback_measure(&spec, 3).unwrap();
        let factor = 0.8f64.powi(6); // |c|^{np} = 0.8^{3·2}
        for f in panel {
            let a = integrate(&om3, f, &quad).unwrap().value;
            let b = integrate(&spec.base_measure, f, &quad).unwrap().value;
            assert!((a - factor * b).abs() <= 1e-12 * b.abs());
        }
    }

    #[test]
    fn pullback_measure_contraction_transports_mass() {
        let spec = CompOpSpec::with_base_measure(
            "1",
            SelfMap::scale(c(0.5, 0.0)).unwrap(),
            2.0,
            make_standard_weight(0.0).unwrap(),
            0.0,
            Measure::lebesgue(),
        )
        .unwrap();
        let om = pullback_measure(&spec, 1).unwrap();
        let quad = QuadratureSpec::default();
        let mass = integrate(&om, |_| 1.0, &quad).unwrap().value;
        let base_mass = total_mass(&Measure::lebesgue(), &quad).unwrap().value;
        assert!((mass - base_mass).abs() < 1e-12);

        // ∫ |0.5 z|² dA = 1/8 up to the boundary-cutoff deficit.
        let second = integrate(&om, |z| z.norm_sqr(), &quad).unwrap();
        assert!((second.value - 0.125).abs() < 5e-4, "{}", second.value);
        let (mc, se) = monte_carlo_integrate(&om, |z| z.norm_sqr(), 400_000, 5).unwrap();
        assert!((second.value - mc).abs() < 3.0 * se + 1e-6);
    }

    #[test]
    fn apply_operator_multiplication_and_contraction_norms() {
        let quad = QuadratureSpec::default();
        let spec = flat_spec("1", SelfMap::identity(), 2.0);
        let app = apply_operator(&spec, 4, |_| c(1.0, 0.0), &quad).unwrap();
        let mass = total_mass(&spec.base_measure, &quad).unwrap().value;
        assert!((app.norm - mass.sqrt()).abs() < 1e-12);
        assert!((app.norm - app.norm_via_pullback).abs() < 1e-12);
        let v = (app.func)(c(0.3, 0.2)).unwrap();
        assert!((v - c(1.0, 0.0)).norm() < 1e-15);

        // ψ ≡ 2, φ = id, p = 2: the n-th power multiplies by 2ⁿ.
        let spec = flat_spec("2", SelfMap::identity(), 2.0);
        let app = apply_operator(&spec, 3, |_| c(1.0, 0.0), &quad).unwrap();
        assert!((app.norm - 8.0).abs() < 8.0 * 2e-3, "{}", app.norm);
        assert!(
            (app.norm - app.norm_via_pullback).abs() < 1e-10 * app.norm,
            "cross-path disagreement"
        );

        // ψ ≡ 1, φ = z/2, f = z, n = 2: ‖C² f‖² = ∫ |z/4|² dA = 1/32.
        let spec = flat_spec("1", SelfMap::scale(c(0.5, 0.0)).unwrap(), 2.0);
        let app = apply_operator(&spec, 2, |z| z, &quad).unwrap();
        assert!((app.norm.powi(2) - 1.0 / 32.0).abs() < 1e-4, "{}", app.norm);
        assert!((app.norm - app.norm_via_pullback).abs() < 1e-12 * app.norm);
    }

    #[test]
    fn cross_path_identity_holds_on_a_panel() {
        let quad = QuadratureSpec {
            radial_shells: 96,
            angular_nodes: 96,
            ..QuadratureSpec::default()
        };
        let spec = flat_spec("1 - 0.3*z", SelfMap::mobius(c(0.4, 0.0)).unwrap(), 2.0);
        let panel: [&(dyn Fn(Complex64) -> Complex64 + Sync); 5] = [
            &|_| c(1.0, 0.0),
            &|z| z,
            &|z| z * z,
            &|z| (0.3 * z).exp(),
            &|z| 1.0 / (1.0 - 0.5 * z),
        ];
        for (i, f) in panel.iter().enumerate() {
            for n in [1usize, 2, 4] {
                let g = *f;
                let app = apply_operator(&spec, n, g, &quad).unwrap();
                let diff = (app.norm.powi(2) - app.norm_via_pullback.powi(2)).abs();
                assert!(
                    diff <= app.error.max(1e-12 * app.norm.powi(2)),
                    "cross-path identity failed for f #{i}, n = {n}: {diff}"
                );
            }
        }
    }

    #[test]
    fn power_diagnostic_identity_operator_is_bounded() {
        let spec = flat_spec("1", SelfMap::identity(), 2.0);
        let params = diag_params(0.5, 0.9);
        let d = power_diagnostic_with(&spec, 4, &params, &diag_quad()).unwrap();
        assert_eq!(d.n_values, vec![1, 2, 3, 4]);
        assert_eq!(d.q2.len(), 4);
        assert_eq!(d.profiles.len(), 4);
        // Ω_n = Ω for every n: the statistics are constant in n.
        for qs in [&d.q2, &d.q3, &d.q4] {
            for v in qs {
                assert!((v - qs[0]).abs() < 1e-12 * qs[0].abs());
            }
        }
        assert!(d.q3[0] > 0.5 && d.q3[0] < 2.0, "{}", d.q3[0]);
        assert_eq!(d.verdict, PowerVerdict::PowerBounded);
        assert!(!d.compact_evidence);
        assert!((d.growth_per_step - 1.0).abs() < 1e-9);
        // Corollary surrogate: the three statistic families are comparable.
        let maxes = [
            max_ignoring_nan(&d.q2),
            max_ignoring_nan(&d.q3),
            max_ignoring_nan(&d.q4),
        ];
        for a in maxes {
            for b in maxes {
                assert!(a / b > 0.02 && a / b < 50.0, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn power_diagnostic_doubling_multiplier_diverges() {
        let spec = flat_spec("2", SelfMap::identity(), 2.0);
        let params = diag_params(0.5, 0.9);
        let d = power_diagnostic_with(&spec, 4, &params, &diag_quad()).unwrap();
        // Multiplication by 2 scales Ω_n by 4ⁿ: exact geometric growth.
        assert!((d.growth_per_step - 4.0).abs() < 1e-9 * 4.0, "{}", d.growth_per_step);
        assert_eq!(d.verdict, PowerVerdict::NotPowerBounded);
        assert!(!d.compact_evidence);
    }

    #[test]
    fn power_diagnostic_contraction_shows_compact_evidence() {
        let spec = flat_spec("0.5", SelfMap::scale(c(0.5, 0.0)).unwrap(), 2.0);
        let params = diag_params(0.5, 0.9);
        let d = power_diagnostic_with(&spec, 4, &params, &diag_quad()).unwrap();
        assert_eq!(d.verdict, PowerVerdict::PowerBounded);
        assert!(d.compact_evidence);
        assert!(d.growth_per_step > 0.15 && d.growth_per_step < 0.45, "{}", d.growth_per_step);
        // Mass contracts: every statistic decays with n.
        for qs in [&d.q2, &d.q3, &d.q4] {
            assert!(qs.windows(2).all(|w| w[1] < w[0]), "{qs:?}");
        }
    }

    #[test]
    fn power_diagnostic_preconditions_are_enforced() {
        let spec = flat_spec("1", SelfMap::identity(), 2.0);
        let mut params = diag_params(0.5, 0.9);
        params.q = 1.0;
        assert!(matches!(
            power_diagnostic_with(&spec, 4, &params, &diag_quad()),
            Err(CompOpError::InvalidSpec(_))
        ));

        // Multiplier blowing up at the boundary: Ω_1 fails the Carleson
        // check, so the diagnostic refuses.
        let spec = flat_spec("1/(1 - 0.9999*z)", SelfMap::identity(), 2.0);
        let params = diag_params(0.5, 0.9);
        let err = power_diagnostic_with(&spec, 4, &params, &diag_quad()).unwrap_err();
        assert!(matches!(err, CompOpError::Unbounded(_)), "{err}");
    }
}
