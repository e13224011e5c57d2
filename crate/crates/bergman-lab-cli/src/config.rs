//! Run configuration: one JSON document, overridden field-for-field by
//! command-line flags, then turned into library objects.
//!
//! Every field has a default, so `{}` is a valid document and flags alone
//! can drive a run. Unknown keys are rejected. The defaults:
//!
//! | field                | default     | meaning                                      |
//! |----------------------|-------------|----------------------------------------------|
//! | weight.kind          | `standard`  | `standard` (1+α)(1-|z|²)^α or `custom`       |
//! | weight.alpha         | `0.0`       | exponent; also the kernel parameter α        |
//! | weight.profile       | —           | radial profile expr in `u = |z|²` (custom)   |
//! | weight.delta         | `1e-3`      | admissibility margin for custom profiles     |
//! | measure.variant      | `lebesgue`  | `lebesgue`, `density`, `atomic`, `compop`    |
//! | measure.density      | —           | radial density expr in `u = |z|²`            |
//! | measure.atoms        | —           | list of `{re, im, mass}`                     |
//! | p, q, t              | `2, 2, 3`   | exponents of the embedding criteria          |
//! | R                    | `0.4`       | averaging radius                             |
//! | lattice_r            | `0.4`       | lattice mesh                                 |
//! | truncation_radius    | `0.999`     | lattice / probe truncation                   |
//! | quadrature.shells    | `256`       | radial shells                                |
//! | quadrature.angular   | `256`       | angular nodes                                |
//! | quadrature.cutoff    | `0.9995`    | integration truncation                       |
//! | quadrature.seed      | `42`        | Monte Carlo seed                             |
//! | compop.psi           | `"1"`       | multiplier expression                        |
//! | compop.phi           | `identity`  | self-map: see [`parse_self_map`]             |
//! | compop.n_max         | `6`         | largest operator power examined              |
//! | output.path          | stdout      | output destination                           |
//! | output.format        | `csv`       | `csv` or `json`                              |

use std::str::FromStr;

use bergman_lab::carleson::CarlesonParams;
use bergman_lab::compop::{pullback_measure, CompOpSpec, SelfMap};
use bergman_lab::expr;
use bergman_lab::geometry::{make_lattice, DiskPoint};
use bergman_lab::measure::{Measure, QuadratureSpec};
use bergman_lab::weights::{make_standard_weight, AdmissibleWeight};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Output encodings.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}` (expected csv|json)")),
        }
    }
}

/// Weight families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightKind {
    Standard,
    Custom,
}

impl FromStr for WeightKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "standard" => Ok(WeightKind::Standard),
            "custom" => Ok(WeightKind::Custom),
            other => Err(format!(
                "unknown weight kind `{other}` (expected standard|custom)"
            )),
        }
    }
}

/// Measure families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasureVariant {
    Lebesgue,
    Density,
    Atomic,
    Compop,
}

impl FromStr for MeasureVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "lebesgue" => Ok(MeasureVariant::Lebesgue),
            "density" => Ok(MeasureVariant::Density),
            "atomic" => Ok(MeasureVariant::Atomic),
            "compop" => Ok(MeasureVariant::Compop),
            other => Err(format!(
                "unknown measure variant `{other}` (expected lebesgue|density|atomic|compop)"
            )),
        }
    }
}

/// Weight section.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct WeightConfig {
    pub kind: WeightKind,
    pub alpha: f64,
    pub profile: Option<String>,
    pub delta: Option<f64>,
}

impl Default for WeightConfig {
    fn default() -> Self {
        WeightConfig {
            kind: WeightKind::Standard,
            alpha: 0.0,
            profile: None,
            delta: None,
        }
    }
}

/// One atom of an atomic measure.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct AtomConfig {
    pub re: f64,
    pub im: f64,
    pub mass: f64,
}

/// Measure section.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeasureConfig {
    pub variant: MeasureVariant,
    pub density: Option<String>,
    pub atoms: Option<Vec<AtomConfig>>,
}

impl Default for MeasureConfig {
    fn default() -> Self {
        MeasureConfig {
            variant: MeasureVariant::Lebesgue,
            density: None,
            atoms: None,
        }
    }
}

/// Quadrature section.
#[derive(Clone, Copy, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureConfig {
    pub shells: usize,
    pub angular: usize,
    pub cutoff: f64,
    pub seed: u64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            shells: 256,
            angular: 256,
            cutoff: 0.9995,
            seed: 42,
        }
    }
}

/// Composition-operator section.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct CompOpConfig {
    pub psi: String,
    pub phi: String,
    pub n_max: usize,
}

impl Default for CompOpConfig {
    fn default() -> Self {
        CompOpConfig {
            psi: "1".to_string(),
            phi: "identity".to_string(),
            n_max: 6,
        }
    }
}

/// Output section.
#[derive(Clone, Debug, Deserialize, Serialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub path: Option<String>,
    pub format: Option<Format>,
}

/// The whole run configuration.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub weight: WeightConfig,
    pub measure: MeasureConfig,
    pub p: f64,
    pub q: f64,
    pub t: f64,
    #[serde(rename = "R")]
    pub big_r: f64,
    pub lattice_r: f64,
    pub truncation_radius: f64,
    pub quadrature: QuadratureConfig,
    pub compop: CompOpConfig,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            weight: WeightConfig::default(),
            measure: MeasureConfig::default(),
            p: 2.0,
            q: 2.0,
            t: 3.0,
            big_r: 0.4,
            lattice_r: 0.4,
            truncation_radius: 0.999,
            quadrature: QuadratureConfig::default(),
            compop: CompOpConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

impl RunConfig {
    /// Parse a JSON document, rejecting unknown keys.
    pub fn from_json(src: &str) -> Result<Self, String> {
        serde_json::from_str(src).map_err(|e| format!("config: {e}"))
    }

    /// The quadrature spec for this run.
    pub fn quad(&self) -> Result<QuadratureSpec, String> {
        let q = QuadratureSpec {
            radial_shells: self.quadrature.shells,
            angular_nodes: self.quadrature.angular,
            boundary_cutoff: self.quadrature.cutoff,
            seed: self.quadrature.seed,
        };
        q.validate().map_err(|e| e.to_string())?;
        Ok(q)
    }

    /// Build the weight, auditing custom profiles for admissibility.
    pub fn weight(&self) -> Result<AdmissibleWeight, String> {
        match self.weight.kind {
            WeightKind::Standard => {
                make_standard_weight(self.weight.alpha).map_err(|e| e.to_string())
            }
            WeightKind::Custom => {
                let src = self
                    .weight
                    .profile
                    .as_deref()
                    .ok_or("weight.kind = custom requires weight.profile")?;
                let e = expr::parse_radial(src).map_err(|e| e.to_string())?;
                let delta = self.weight.delta.unwrap_or(1e-3);
                let profile =
                    move |r: f64| expr::eval_radial(&e, r * r).unwrap_or(f64::NAN);
                AdmissibleWeight::custom(profile, delta, 512).map_err(|e| e.to_string())
            }
        }
    }

    /// Build the measure under study.
    pub fn measure(&self) -> Result<Measure, String> {
        match self.measure.variant {
            MeasureVariant::Lebesgue => Ok(Measure::lebesgue()),
            MeasureVariant::Density => {
                let src = self
                    .measure
                    .density
                    .as_deref()
                    .ok_or("measure.variant = density requires measure.density")?;
                let e = expr::parse_radial(src).map_err(|e| e.to_string())?;
                // Surface evaluation errors now rather than as NaN mid-run.
                for u in [0.0, 0.25, 0.5, 0.9, 0.999] {
                    expr::eval_radial(&e, u).map_err(|e| e.to_string())?;
                }
                Ok(Measure::density(move |z| {
                    expr::eval_radial(&e, z.norm_sqr()).unwrap_or(f64::NAN)
                }))
            }
            MeasureVariant::Atomic => {
                let atoms = self
                    .measure
                    .atoms
                    .as_deref()
                    .ok_or("measure.variant = atomic requires measure.atoms")?;
                let mut points = Vec::with_capacity(atoms.len());
                let mut masses = Vec::with_capacity(atoms.len());
                for a in atoms {
                    points.push(DiskPoint::new(a.re, a.im).map_err(|e| e.to_string())?);
                    masses.push(a.mass);
                }
                Measure::atomic(points, masses).map_err(|e| e.to_string())
            }
            MeasureVariant::Compop => {
                let spec = self.compop_spec()?;
                if self.compop.n_max == 0 {
                    return Err("compop.n_max must be ≥ 1".to_string());
                }
                pullback_measure(&spec, self.compop.n_max).map_err(|e| e.to_string())
            }
        }
    }

    /// Build the weighted composition operator spec.
    pub fn compop_spec(&self) -> Result<CompOpSpec, String> {
        let phi = parse_self_map(&self.compop.phi)?;
        CompOpSpec::new(
            &self.compop.psi,
            phi,
            self.p,
            self.weight()?,
            self.weight.alpha,
        )
        .map_err(|e| e.to_string())
    }

    /// Build and validate the Carleson criterion parameters.
    pub fn carleson_params(&self) -> Result<CarlesonParams, String> {
        let lattice =
            make_lattice(self.lattice_r, self.truncation_radius).map_err(|e| e.to_string())?;
        let params = CarlesonParams {
            p: self.p,
            q: self.q,
            t: self.t,
            big_r: self.big_r,
            weight: self.weight()?,
            alpha: self.weight.alpha,
            lattice,
        };
        params.validate().map_err(|e| e.to_string())?;
        Ok(params)
    }
}

/// Evaluate a constant complex expression such as `0.5` or `0.3+0.2i`.
fn const_complex(src: &str) -> Result<Complex64, String> {
    let e = expr::parse(src).map_err(|e| e.to_string())?;
    let a = expr::eval(&e, Complex64::new(0.0, 0.0)).map_err(|e| e.to_string())?;
    let b = expr::eval(&e, Complex64::new(0.4, 0.3)).map_err(|e| e.to_string())?;
    if (a - b).norm() > 1e-12 * (1.0 + a.norm()) {
        return Err(format!("`{src}` must be a constant expression"));
    }
    Ok(a)
}

/// Parse a self-map of the disk.
///
/// Accepted forms: `identity` (alias `z`), `scale(c)`, `mobius(c)`,
/// `blaschke(c1; c2; ...)`, or a plain linear expression `λ*z`; the
/// arguments are constant complex expressions.
pub fn parse_self_map(src: &str) -> Result<SelfMap, String> {
    let s = src.trim();
    if s == "identity" || s == "z" {
        return Ok(SelfMap::identity());
    }
    if let Some(arg) = call_argument(s, "scale") {
        return SelfMap::scale(const_complex(arg)?).map_err(|e| e.to_string());
    }
    if let Some(arg) = call_argument(s, "mobius") {
        return SelfMap::mobius(const_complex(arg)?).map_err(|e| e.to_string());
    }
    if let Some(arg) = call_argument(s, "blaschke") {
        let zeros = arg
            .split(';')
            .map(|p| const_complex(p.trim()))
            .collect::<Result<Vec<_>, _>>()?;
        return SelfMap::blaschke(zeros).map_err(|e| e.to_string());
    }
    // Fall back to a linear map λ·z.
    let e = expr::parse(s).map_err(|e| e.to_string())?;
    let at = |z: Complex64| expr::eval(&e, z).map_err(|e| e.to_string());
    let zero = at(Complex64::new(0.0, 0.0))?;
    let w1 = Complex64::new(0.5, 0.0);
    let w2 = Complex64::new(0.2, 0.3);
    let lambda = at(w1)? / w1;
    let linear = zero.norm() <= 1e-12 && (at(w2)? - lambda * w2).norm() <= 1e-12;
    if !linear {
        return Err(format!(
            "`{src}` is not a supported self-map (expected identity | scale(c) | mobius(c) | blaschke(c1; ...) | λ*z)"
        ));
    }
    SelfMap::scale(lambda).map_err(|e| e.to_string())
}

/// `call_argument("mobius(0.4)", "mobius") = Some("0.4")`.
fn call_argument<'a>(s: &'a str, name: &str) -> Option<&'a str> {
    s.strip_prefix(name)?
        .trim_start()
        .strip_prefix('(')?
        .strip_suffix(')')
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_the_default_config() {
        let cfg = RunConfig::from_json("{}").unwrap();
        assert_eq!(cfg.p, 2.0);
        assert_eq!(cfg.quadrature.shells, 256);
        assert_eq!(cfg.compop.phi, "identity");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = RunConfig::from_json("{\"radius\": 0.5}").unwrap_err();
        assert!(err.contains("unknown field"), "{err}");
        let err = RunConfig::from_json("{\"quadrature\": {\"shellz\": 4}}").unwrap_err();
        assert!(err.contains("unknown field"), "{err}");
    }

    #[test]
    fn self_map_grammar_accepts_the_documented_forms() {
        for src in ["identity", "z", "scale(0.5)", "0.5*z", "(0.1+0.2i)*z"] {
            parse_self_map(src).unwrap();
        }
        parse_self_map("mobius(0.4)").unwrap();
        parse_self_map("blaschke(0.3; 0.1+0.2i)").unwrap();
        assert!(parse_self_map("z^2").is_err());
        assert!(parse_self_map("scale(z)").is_err());
        assert!(parse_self_map("scale(1.5)").is_err());
    }

    #[test]
    fn invalid_parameters_fail_at_build_time() {
        let cfg = RunConfig {
            lattice_r: 1.5,
            ..RunConfig::default()
        };
        assert!(cfg.carleson_params().is_err());
        let cfg = RunConfig {
            measure: MeasureConfig {
                variant: MeasureVariant::Density,
                ..MeasureConfig::default()
            },
            ..RunConfig::default()
        };
        assert!(cfg.measure().is_err());
        let mut cfg = RunConfig::default();
        cfg.quadrature.cutoff = 1.5;
        assert!(cfg.quad().is_err());
    }
}
