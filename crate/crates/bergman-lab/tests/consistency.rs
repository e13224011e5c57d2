//! Cross-module consistency: identities that tie the measure layer, the
//! Carleson criteria and the composition-operator pull-backs together. Each
//! test checks a relation that holds by construction on one route and is
//! recomputed on an independent route.

use bergman_lab::carleson::{
    carleson_check_with, lattice_sequence_with, vanishing_profile_with, CarlesonParams,
    ProbeConfig, Verdict,
};
use bergman_lab::compop::{pullback_measure, CompOpSpec, SelfMap};
use bergman_lab::geometry::{make_lattice, DiskPoint};
use bergman_lab::measure::{discretize, integrate, total_mass, Measure, QuadratureSpec};
use bergman_lab::transforms::{averaging, berezin_t};
use bergman_lab::weights::make_standard_weight;
use num_complex::Complex64;

fn quad(radial: usize, angular: usize, cutoff: f64) -> QuadratureSpec {
    QuadratureSpec {
        radial_shells: radial,
        angular_nodes: angular,
        boundary_cutoff: cutoff,
        ..QuadratureSpec::default()
    }
}

fn light_params(alpha: f64) -> CarlesonParams {
    CarlesonParams {
        p: 2.0,
        q: 2.0,
        t: 3.0,
        big_r: 0.4,
        weight: make_standard_weight(alpha).unwrap(),
        alpha,
        lattice: make_lattice(0.4, 0.99).unwrap(),
    }
}

fn light_config() -> ProbeConfig {
    ProbeConfig {
        grid_radial: 12,
        grid_angular: 12,
        lattice_stride: 16,
        base_truncation: 0.95,
        extended_truncation: 0.99,
        sup_spec: quad(32, 32, 0.9995),
    }
}

/// The mass of the order-`n` pull-back measure must equal the direct
/// integral of the accumulated symbol weight, and for `n = 1` over the
/// unweighted disk it has the closed form `∫ |1 - 0.3 z|² dA = 1.045`.
#[test]
fn pullback_mass_matches_direct_symbol_integral() {
    let w = make_standard_weight(0.0).unwrap();
    let phi = SelfMap::mobius(Complex64::new(0.4, 0.0)).unwrap();
    let spec = CompOpSpec::new("1 - 0.3*z", phi, 2.0, w, 0.0).unwrap();
    let q = quad(256, 256, 0.9995);

    // n = 1: transported mass vs. the same integral written out by hand.
    let omega1 = pullback_measure(&spec, 1).unwrap();
    let via_pullback = total_mass(&omega1, &q).unwrap();
    let direct = integrate(
        &Measure::lebesgue(),
        |z| (Complex64::new(1.0, 0.0) - 0.3 * z).norm_sqr(),
        &q,
    )
    .unwrap();
    assert!(
        (via_pullback.value - direct.value).abs() <= 1e-12 * direct.value,
        "transported mass {} vs direct integral {}",
        via_pullback.value,
        direct.value
    );
    let analytic = 1.045;
    assert!(
        (via_pullback.value - analytic).abs() < 3e-3,
        "mass {} vs closed form {analytic}",
        via_pullback.value
    );

    // n = 2: the weight is |ψ(z) ψ(φ(z))|², the map is φ∘φ.
    let omega2 = pullback_measure(&spec, 2).unwrap();
    let via_pullback2 = total_mass(&omega2, &q).unwrap();
    let psi = |z: Complex64| Complex64::new(1.0, 0.0) - 0.3 * z;
    let phi_map = |z: Complex64| (Complex64::new(0.4, 0.0) - z) / (1.0 - 0.4 * z);
    let direct2 = integrate(
        &Measure::lebesgue(),
        move |z| psi(z).norm_sqr() * psi(phi_map(z)).norm_sqr(),
        &q,
    )
    .unwrap();
    assert!(
        (via_pullback2.value - direct2.value).abs() <= 1e-12 * direct2.value,
        "order-2 transported mass {} vs direct integral {}",
        via_pullback2.value,
        direct2.value
    );
}

/// Every power of a strict contraction pulls the base measure into a compact
/// subdisk, so each pull-back must show a vanishing boundary profile and must
/// not be flagged as failing the embedding.
#[test]
fn contraction_pullbacks_vanish_at_every_power() {
    let w = make_standard_weight(0.0).unwrap();
    let phi = SelfMap::scale(Complex64::new(0.5, 0.0)).unwrap();
    let spec = CompOpSpec::new("0.5", phi, 2.0, w, 0.0).unwrap();
    let params = light_params(0.0);
    let cfg = light_config();
    let q = quad(48, 48, 0.999);

    for n in 1..=3 {
        let omega = pullback_measure(&spec, n).unwrap();
        let profile = vanishing_profile_with(&omega, &params, 6, &q).unwrap();
        assert!(
            profile.vanishing,
            "order-{n} pull-back should vanish at the boundary: sups {:?}",
            profile.shell_sups
        );
        let report = carleson_check_with(&omega, &params, &cfg).unwrap();
        assert!(
            report.verdict != Verdict::NotCarleson,
            "order-{n} pull-back is compactly supported but was rejected"
        );
    }
}

/// The lattice criterion sequence must agree entry by entry with the
/// averaging transform divided by the weight denominator, recomputed from
/// public pieces at the same nodes.
#[test]
fn lattice_sequence_matches_manual_averaging_ratios() {
    let params = light_params(1.0);
    let m = Measure::density(|z| 2.0 * (1.0 - z.norm_sqr()));
    let q = quad(64, 64, 0.999);
    let seq = lattice_sequence_with(&m, &params, &q).unwrap();
    assert_eq!(seq.len(), params.lattice.nodes.len());

    for (k, &zk) in params.lattice.nodes.iter().enumerate().take(12) {
        let avg = averaging(&m, params.lattice.r, zk, &q).unwrap();
        let manual = avg.value / params.weight.eval(zk.to_complex());
        assert!(
            (seq[k] - manual).abs() <= 1e-12 * manual.abs().max(1.0),
            "node {k}: sequence {} vs manual ratio {manual}",
            seq[k]
        );
    }
}

/// Replacing a density by its quadrature cloud must leave interior Berezin
/// values nearly unchanged: the cloud is the quadrature rule, so the two
/// routes differ only through the continuity of the kernel across one cell.
#[test]
fn atomic_cloud_surrogate_matches_density_berezin() {
    let density = Measure::density(|z| 2.0 * (1.0 - z.norm_sqr()));
    let grid = quad(128, 128, 0.9995);
    let cloud = discretize(&density, &grid).unwrap();
    let points: Vec<DiskPoint> = cloud
        .points
        .iter()
        .map(|&p| DiskPoint::from_complex(p).unwrap())
        .collect();
    let atoms = Measure::atomic(points, cloud.weights.clone()).unwrap();

    let q = quad(128, 128, 0.9995);
    for &(re, im) in &[(0.0, 0.0), (0.3, 0.2), (-0.5, 0.1), (0.0, 0.7)] {
        let z = DiskPoint::new(re, im).unwrap();
        let dv = berezin_t(&density, 2.0, 1.0, z, &q).unwrap().value;
        let av = berezin_t(&atoms, 2.0, 1.0, z, &q).unwrap().value;
        assert!(
            (dv - av).abs() <= 1e-2 * dv.abs().max(1.0),
            "berezin at {re}+{im}i: density {dv} vs cloud {av}"
        );
    }
}

/// A measure accepted by the embedding check must have a tame boundary
/// profile, and a measure rejected for boundary mass growth must show a
/// growing profile; the two diagnostics must not contradict each other.
#[test]
fn verdicts_and_boundary_profiles_agree() {
    let params = light_params(0.0);
    let cfg = light_config();
    let q = quad(48, 48, 0.999);

    let flat = Measure::lebesgue();
    let report = carleson_check_with(&flat, &params, &cfg).unwrap();
    let profile = vanishing_profile_with(&flat, &params, 6, &q).unwrap();
    assert_eq!(report.verdict, Verdict::Carleson);
    assert!(!profile.vanishing);
    assert!(
        profile.trend > 0.2 && profile.trend < 5.0,
        "flat measure should have a flat profile, trend {}",
        profile.trend
    );

    let atoms: Vec<DiskPoint> = (1..=9)
        .map(|j| DiskPoint::new(1.0 - 0.5_f64.powi(j), 0.0).unwrap())
        .collect();
    let masses: Vec<f64> = atoms
        .iter()
        .enumerate()
        .map(|(i, z)| 2f64.powi(i as i32 + 1) * (1.0 - z.to_complex().norm_sqr()))
        .collect();
    let heavy = Measure::atomic(atoms, masses).unwrap();
    let report = carleson_check_with(&heavy, &params, &cfg).unwrap();
    let profile = vanishing_profile_with(&heavy, &params, 6, &q).unwrap();
    assert_eq!(report.verdict, Verdict::NotCarleson);
    assert!(!profile.vanishing);
    assert!(
        profile.trend > 5.0,
        "divergent atoms should show a growing profile, trend {}",
        profile.trend
    );
}
