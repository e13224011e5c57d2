//! Experiment harness for the disk-analysis toolkit.
//!
//! A run is described by one JSON config document (see [`config`] for the
//! schema and defaults); every scalar field can be overridden by the flag of
//! the same name, so short experiments need no file at all. Results are
//! emitted as RFC-4180 CSV (17-significant-digit floats, error columns next
//! to every estimated quantity) or as JSON with a stable key order, to
//! stdout or to `output.path`.
//!
//! Subcommands: `lattice`, `carleson`, `vanishing`, `power`, `berezin`,
//! `averaging`, `selftest`.
//!
//! Exit codes: `0` success, `2` configuration or parameter error, `3`
//! inconclusive verdict under `--strict`, `4` numerical failure (including
//! self-test failures). The environment variable `BERGMAN_LAB_THREADS` caps
//! the worker pool; outputs are byte-identical across runs and thread
//! counts.

mod config;
mod emit;

use std::path::PathBuf;

use bergman_lab::carleson::{
    carleson_check_with, vanishing_profile_with, CarlesonReport, ProbeConfig, VanishingProfile,
    Verdict,
};
use bergman_lab::compop::{power_diagnostic_with, PowerDiagnostic, PowerVerdict};
use bergman_lab::geometry::{covering_multiplicity, make_lattice, rho, DiskPoint};
use bergman_lab::measure::Estimate;
use bergman_lab::numerics::relative_drift;
use bergman_lab::selftest::{run_suite, suite_passed, Level};
use bergman_lab::transforms::{averaging, berezin_t};
use clap::{Args, Parser, Subcommand};
use config::{Format, RunConfig};
use emit::{csv_document, fmt_float, json_document};
use rayon::prelude::*;
use serde::Serialize;

/// Numerical experiments on weighted Bergman spaces of the unit disk.
#[derive(Parser, Debug)]
#[command(name = "bergman-lab", version, about)]
struct Cli {
    /// Path to a JSON run configuration; flags override its fields.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(flatten)]
    overrides: Overrides,

    #[command(subcommand)]
    cmd: Cmd,
}

/// Field-for-field overrides of the run configuration.
#[derive(Args, Debug)]
struct Overrides {
    /// Weight kind: standard | custom.
    #[arg(long, global = true, value_name = "KIND")]
    weight_kind: Option<String>,

    /// Weight exponent α (also the kernel parameter).
    #[arg(long, global = true)]
    alpha: Option<f64>,

    /// Custom radial weight profile, an expression in u = |z|².
    #[arg(long, global = true, value_name = "EXPR")]
    weight_profile: Option<String>,

    /// Admissibility margin δ for custom profiles.
    #[arg(long, global = true)]
    weight_delta: Option<f64>,

    /// Measure variant: lebesgue | density | atomic | compop.
    #[arg(long, global = true, value_name = "VARIANT")]
    measure: Option<String>,

    /// Radial density expression in u = |z|².
    #[arg(long, global = true, value_name = "EXPR")]
    density: Option<String>,

    /// Atoms as `re,im,mass` triples joined by `;`.
    #[arg(long, global = true, value_name = "ATOMS")]
    atoms: Option<String>,

    /// Bergman-space exponent p.
    #[arg(long, global = true)]
    p: Option<f64>,

    /// Target exponent q.
    #[arg(long, global = true)]
    q: Option<f64>,

    /// Kernel exponent t of the Berezin criterion.
    #[arg(long, global = true)]
    t: Option<f64>,

    /// Averaging radius R.
    #[arg(long, global = true)]
    big_r: Option<f64>,

    /// Lattice mesh r.
    #[arg(long, global = true)]
    lattice_r: Option<f64>,

    /// Lattice and probe truncation radius.
    #[arg(long, global = true)]
    truncation: Option<f64>,

    /// Radial shells of the quadrature grid.
    #[arg(long, global = true)]
    shells: Option<usize>,

    /// Angular nodes of the quadrature grid.
    #[arg(long, global = true)]
    angular: Option<usize>,

    /// Quadrature boundary cutoff.
    #[arg(long, global = true)]
    cutoff: Option<f64>,

    /// Monte Carlo seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Multiplier expression ψ.
    #[arg(long, global = true, value_name = "EXPR")]
    psi: Option<String>,

    /// Self-map φ: identity | scale(c) | mobius(c) | blaschke(c1; ...) | λ*z.
    #[arg(long, global = true, value_name = "MAP")]
    phi: Option<String>,

    /// Largest operator power examined.
    #[arg(long, global = true)]
    n_max: Option<usize>,

    /// Output path (defaults to stdout).
    #[arg(long, global = true, value_name = "PATH")]
    output: Option<PathBuf>,

    /// Output format: csv | json.
    #[arg(long, global = true, value_name = "FMT")]
    format: Option<String>,
}

impl Overrides {
    /// Apply every present flag to the config.
    fn apply(&self, cfg: &mut RunConfig) -> Result<(), CliError> {
        if let Some(k) = &self.weight_kind {
            cfg.weight.kind = k.parse().map_err(config_error)?;
        }
        if let Some(a) = self.alpha {
            cfg.weight.alpha = a;
        }
        if let Some(p) = &self.weight_profile {
            cfg.weight.profile = Some(p.clone());
        }
        if let Some(d) = self.weight_delta {
            cfg.weight.delta = Some(d);
        }
        if let Some(v) = &self.measure {
            cfg.measure.variant = v.parse().map_err(config_error)?;
        }
        if let Some(d) = &self.density {
            cfg.measure.density = Some(d.clone());
        }
        if let Some(a) = &self.atoms {
            cfg.measure.atoms = Some(parse_atoms(a)?);
        }
        if let Some(p) = self.p {
            cfg.p = p;
        }
        if let Some(q) = self.q {
            cfg.q = q;
        }
        if let Some(t) = self.t {
            cfg.t = t;
        }
        if let Some(r) = self.big_r {
            cfg.big_r = r;
        }
        if let Some(r) = self.lattice_r {
            cfg.lattice_r = r;
        }
        if let Some(tr) = self.truncation {
            cfg.truncation_radius = tr;
        }
        if let Some(s) = self.shells {
            cfg.quadrature.shells = s;
        }
        if let Some(a) = self.angular {
            cfg.quadrature.angular = a;
        }
        if let Some(c) = self.cutoff {
            cfg.quadrature.cutoff = c;
        }
        if let Some(s) = self.seed {
            cfg.quadrature.seed = s;
        }
        if let Some(psi) = &self.psi {
            cfg.compop.psi = psi.clone();
        }
        if let Some(phi) = &self.phi {
            cfg.compop.phi = phi.clone();
        }
        if let Some(n) = self.n_max {
            cfg.compop.n_max = n;
        }
        if let Some(path) = &self.output {
            cfg.output.path = Some(path.display().to_string());
        }
        if let Some(f) = &self.format {
            cfg.output.format = Some(f.parse().map_err(config_error)?);
        }
        Ok(())
    }
}

/// `re,im,mass` triples joined by `;`.
fn parse_atoms(src: &str) -> Result<Vec<config::AtomConfig>, CliError> {
    src.split(';')
        .map(|triple| {
            let parts: Vec<&str> = triple.split(',').map(str::trim).collect();
            if parts.len() != 3 {
                return Err(config_error(format!(
                    "atom `{triple}` is not a re,im,mass triple"
                )));
            }
            let nums: Vec<f64> = parts
                .iter()
                .map(|p| p.parse::<f64>().map_err(|e| config_error(format!("atom `{triple}`: {e}"))))
                .collect::<Result<_, _>>()?;
            Ok(config::AtomConfig {
                re: nums[0],
                im: nums[1],
                mass: nums[2],
            })
        })
        .collect()
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Emit the lattice node table with per-node covering counts.
    Lattice {
        /// Random samples for the covering audit.
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
    },
    /// Run the Carleson embedding check on the configured measure.
    Carleson {
        /// Exit 3 when the verdict is inconclusive.
        #[arg(long)]
        strict: bool,
    },
    /// Per-shell boundary profile of the averaging criterion ratio.
    Vanishing {
        /// Number of boundary shells in the profile.
        #[arg(long, default_value_t = 6)]
        profile_shells: usize,
    },
    /// Power-family diagnostics of the configured composition operator.
    Power {
        /// Exit 3 when the verdict is inconclusive.
        #[arg(long)]
        strict: bool,
    },
    /// Berezin transform of the measure on a polar probe grid.
    Berezin {
        #[command(flatten)]
        probes: ProbeGrid,
    },
    /// Averaging transform of the measure on a polar probe grid.
    Averaging {
        #[command(flatten)]
        probes: ProbeGrid,
    },
    /// Run the oracle-backed acceptance suite.
    Selftest {
        /// Resolution: fast | full.
        #[arg(long, default_value = "fast")]
        level: String,
    },
}

/// Deterministic polar probe grid for the transform subcommands.
#[derive(Args, Debug)]
struct ProbeGrid {
    /// Number of probe radii.
    #[arg(long, default_value_t = 6)]
    probe_radial: usize,

    /// Number of probe angles.
    #[arg(long, default_value_t = 8)]
    probe_angular: usize,

    /// Largest probe modulus.
    #[arg(long, default_value_t = 0.9)]
    probe_rmax: f64,
}

impl ProbeGrid {
    /// The probe points `(r_i, θ_j)`, radius-major.
    fn points(&self) -> Result<Vec<DiskPoint>, CliError> {
        if self.probe_radial == 0 || self.probe_angular == 0 {
            return Err(config_error("probe counts must be ≥ 1"));
        }
        if !(self.probe_rmax > 0.0 && self.probe_rmax < 1.0) {
            return Err(config_error(format!(
                "probe_rmax = {} not in (0, 1)",
                self.probe_rmax
            )));
        }
        let mut points = Vec::with_capacity(self.probe_radial * self.probe_angular);
        for i in 0..self.probe_radial {
            let r = self.probe_rmax * (i + 1) as f64 / self.probe_radial as f64;
            for j in 0..self.probe_angular {
                let theta = std::f64::consts::TAU * j as f64 / self.probe_angular as f64;
                points.push(
                    DiskPoint::new(r * theta.cos(), r * theta.sin()).map_err(config_error)?,
                );
            }
        }
        Ok(points)
    }
}

/// An error with the exit code it maps to.
struct CliError {
    code: u8,
    message: String,
}

fn config_error(msg: impl std::fmt::Display) -> CliError {
    CliError {
        code: 2,
        message: msg.to_string(),
    }
}

fn numerical_error(msg: impl std::fmt::Display) -> CliError {
    CliError {
        code: 4,
        message: msg.to_string(),
    }
}

/// A finished run: the document to emit and the exit code.
struct RunOutput {
    document: String,
    path: Option<String>,
    exit: u8,
}

fn main() {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            let write = match &out.path {
                Some(path) => std::fs::write(path, out.document.as_bytes())
                    .map_err(|e| numerical_error(format!("writing {path}: {e}"))),
                None => {
                    print!("{}", out.document);
                    Ok(())
                }
            };
            if let Err(e) = write {
                eprintln!("error: {}", e.message);
                std::process::exit(e.code as i32);
            }
            std::process::exit(out.exit as i32);
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            std::process::exit(e.code as i32);
        }
    }
}

fn run(cli: &Cli) -> Result<RunOutput, CliError> {
    configure_threads()?;
    let mut cfg = match &cli.config {
        Some(path) => {
            let src = std::fs::read_to_string(path)
                .map_err(|e| config_error(format!("reading {}: {e}", path.display())))?;
            RunConfig::from_json(&src).map_err(config_error)?
        }
        None => RunConfig::default(),
    };
    cli.overrides.apply(&mut cfg)?;
    let format = cfg.output.format.unwrap_or(Format::Csv);

    let (document, exit) = match &cli.cmd {
        Cmd::Lattice { samples } => cmd_lattice(&cfg, *samples, format)?,
        Cmd::Carleson { strict } => cmd_carleson(&cfg, *strict, format)?,
        Cmd::Vanishing { profile_shells } => cmd_vanishing(&cfg, *profile_shells, format)?,
        Cmd::Power { strict } => cmd_power(&cfg, *strict, format)?,
        Cmd::Berezin { probes } => cmd_berezin(&cfg, probes, format)?,
        Cmd::Averaging { probes } => cmd_averaging(&cfg, probes, format)?,
        Cmd::Selftest { level } => cmd_selftest(level, format)?,
    };
    Ok(RunOutput {
        document,
        path: cfg.output.path.clone(),
        exit,
    })
}

/// Apply `BERGMAN_LAB_THREADS` to the global worker pool.
fn configure_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("BERGMAN_LAB_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| config_error(format!("BERGMAN_LAB_THREADS = `{v}` is not a count")))?;
        if n == 0 {
            return Err(config_error("BERGMAN_LAB_THREADS must be ≥ 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| config_error(format!("thread pool: {e}")))?;
    }
    Ok(())
}

/// The snake_case tag of a serializable enum value.
fn tag<T: Serialize>(v: &T) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|x| x.as_str().map(String::from))
        .unwrap_or_default()
}

#[derive(Serialize)]
struct NodeRow {
    k: usize,
    re: f64,
    im: f64,
    modulus: f64,
    covering_count: usize,
}

#[derive(Serialize)]
struct LatticeOutput {
    r: f64,
    truncation_radius: f64,
    node_count: usize,
    multiplicity_bound: usize,
    covering_samples: usize,
    covering_min: usize,
    covering_max: usize,
    nodes: Vec<NodeRow>,
}

fn cmd_lattice(cfg: &RunConfig, samples: usize, format: Format) -> Result<(String, u8), CliError> {
    let lat = make_lattice(cfg.lattice_r, cfg.truncation_radius).map_err(config_error)?;
    let (covering_min, covering_max) = covering_multiplicity(&lat, samples).map_err(config_error)?;
    if covering_min < 1 {
        return Err(numerical_error(
            "covering audit found a sample outside every lattice disk",
        ));
    }
    let radius = (1.0 + lat.r) / 2.0;
    let rows: Vec<NodeRow> = lat
        .nodes
        .par_iter()
        .enumerate()
        .map(|(k, &zk)| {
            let covering_count = lat.nodes.iter().filter(|&&zj| rho(zk, zj) < radius).count();
            let z = zk.to_complex();
            NodeRow {
                k,
                re: z.re,
                im: z.im,
                modulus: z.norm(),
                covering_count,
            }
        })
        .collect();
    eprintln!(
        "lattice r = {}, truncation = {}: {} nodes, recorded multiplicity bound {}, covering counts in [{covering_min}, {covering_max}] over {samples} samples",
        lat.r,
        lat.truncation_radius,
        rows.len(),
        lat.multiplicity_bound,
    );
    let document = match format {
        Format::Csv => csv_document(
            &["k", "re", "im", "modulus", "covering_count"],
            &rows
                .iter()
                .map(|n| {
                    vec![
                        n.k.to_string(),
                        fmt_float(n.re),
                        fmt_float(n.im),
                        fmt_float(n.modulus),
                        n.covering_count.to_string(),
                    ]
                })
                .collect::<Vec<_>>(),
        ),
        Format::Json => json_document(&LatticeOutput {
            r: lat.r,
            truncation_radius: lat.truncation_radius,
            node_count: rows.len(),
            multiplicity_bound: lat.multiplicity_bound,
            covering_samples: samples,
            covering_min,
            covering_max,
            nodes: rows,
        })
        .map_err(numerical_error)?,
    };
    Ok((document, 0))
}

/// Probe layout shared by `carleson` runs: library defaults, with the
/// truncation radii and the sup-statistic quadrature taken from the config.
fn probe_config(cfg: &RunConfig) -> Result<ProbeConfig, CliError> {
    let quad = cfg.quad().map_err(config_error)?;
    let defaults = ProbeConfig::default();
    Ok(ProbeConfig {
        base_truncation: defaults
            .base_truncation
            .min(cfg.truncation_radius * 0.995),
        extended_truncation: cfg.truncation_radius,
        sup_spec: quad,
        ..defaults
    })
}

fn cmd_carleson(cfg: &RunConfig, strict: bool, format: Format) -> Result<(String, u8), CliError> {
    let params = cfg.carleson_params().map_err(config_error)?;
    let m = cfg.measure().map_err(config_error)?;
    let probe_cfg = probe_config(cfg)?;
    let report: CarlesonReport =
        carleson_check_with(&m, &params, &probe_cfg).map_err(numerical_error)?;
    let off_diagonal: Vec<f64> = (0..4)
        .flat_map(|i| (0..4).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| report.mutual_ratios[i][j])
        .collect();
    let ratio_min = off_diagonal.iter().copied().fold(f64::INFINITY, f64::min);
    let ratio_max = off_diagonal
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let document = match format {
        Format::Csv => csv_document(
            &[
                "regime",
                "verdict",
                "q_berezin",
                "q_averaging",
                "q_lattice",
                "q_probe",
                "ratio_min",
                "ratio_max",
                "refinement_drift",
                "truncation_growth",
            ],
            &[vec![
                tag(&report.regime),
                tag(&report.verdict),
                fmt_float(report.q_berezin),
                fmt_float(report.q_averaging),
                fmt_float(report.q_lattice),
                fmt_float(report.q_probe),
                fmt_float(ratio_min),
                fmt_float(ratio_max),
                fmt_float(report.refinement_drift),
                fmt_float(report.truncation_growth),
            ]],
        ),
        Format::Json => json_document(&report).map_err(numerical_error)?,
    };
    let exit = if strict && report.verdict == Verdict::Inconclusive {
        3
    } else {
        0
    };
    Ok((document, exit))
}

#[derive(Serialize)]
struct VanishingOutput {
    profile: VanishingProfile,
    halved_drift: Vec<f64>,
}

fn cmd_vanishing(
    cfg: &RunConfig,
    profile_shells: usize,
    format: Format,
) -> Result<(String, u8), CliError> {
    let params = cfg.carleson_params().map_err(config_error)?;
    let m = cfg.measure().map_err(config_error)?;
    let quad = cfg.quad().map_err(config_error)?;
    let profile =
        vanishing_profile_with(&m, &params, profile_shells, &quad).map_err(numerical_error)?;
    let halved = vanishing_profile_with(&m, &params, profile_shells, &quad.halved())
        .map_err(numerical_error)?;
    let halved_drift: Vec<f64> = profile
        .shell_sups
        .iter()
        .zip(&halved.shell_sups)
        .map(|(&a, &b)| relative_drift(a, b))
        .collect();
    let document = match format {
        Format::Csv => csv_document(
            &[
                "k",
                "lower_edge",
                "upper_edge",
                "shell_sup",
                "halved_drift",
                "trend",
                "vanishing",
            ],
            &profile
                .shell_sups
                .iter()
                .enumerate()
                .map(|(k, &sup)| {
                    vec![
                        k.to_string(),
                        fmt_float(profile.shell_edges[k]),
                        fmt_float(profile.shell_edges[k + 1]),
                        fmt_float(sup),
                        fmt_float(halved_drift[k]),
                        fmt_float(profile.trend),
                        profile.vanishing.to_string(),
                    ]
                })
                .collect::<Vec<_>>(),
        ),
        Format::Json => json_document(&VanishingOutput {
            profile,
            halved_drift,
        })
        .map_err(numerical_error)?,
    };
    Ok((document, 0))
}

#[derive(Serialize)]
struct PowerOutput {
    diagnostic: PowerDiagnostic,
    q2_halved_drift: Vec<f64>,
    q3_halved_drift: Vec<f64>,
    q4_halved_drift: Vec<f64>,
}

fn cmd_power(cfg: &RunConfig, strict: bool, format: Format) -> Result<(String, u8), CliError> {
    let spec = cfg.compop_spec().map_err(config_error)?;
    let params = cfg.carleson_params().map_err(config_error)?;
    if cfg.compop.n_max == 0 {
        return Err(config_error("compop.n_max must be ≥ 1"));
    }
    let quad = cfg.quad().map_err(config_error)?;
    let diag = power_diagnostic_with(&spec, cfg.compop.n_max, &params, &quad)
        .map_err(numerical_error)?;
    let halved = power_diagnostic_with(&spec, cfg.compop.n_max, &params, &quad.halved())
        .map_err(numerical_error)?;
    let drift = |a: &[f64], b: &[f64]| -> Vec<f64> {
        a.iter()
            .zip(b)
            .map(|(&x, &y)| relative_drift(x, y))
            .collect()
    };
    let q2_halved_drift = drift(&diag.q2, &halved.q2);
    let q3_halved_drift = drift(&diag.q3, &halved.q3);
    let q4_halved_drift = drift(&diag.q4, &halved.q4);
    let document = match format {
        Format::Csv => csv_document(
            &[
                "n",
                "q2",
                "q2_halved_drift",
                "q3",
                "q3_halved_drift",
                "q4",
                "q4_halved_drift",
                "profile_tail",
                "growth_per_step",
                "verdict",
                "compact_evidence",
            ],
            &diag
                .n_values
                .iter()
                .enumerate()
                .map(|(i, &n)| {
                    vec![
                        n.to_string(),
                        fmt_float(diag.q2[i]),
                        fmt_float(q2_halved_drift[i]),
                        fmt_float(diag.q3[i]),
                        fmt_float(q3_halved_drift[i]),
                        fmt_float(diag.q4[i]),
                        fmt_float(q4_halved_drift[i]),
                        fmt_float(*diag.profiles[i].shell_sups.last().unwrap_or(&f64::NAN)),
                        fmt_float(diag.growth_per_step),
                        tag(&diag.verdict),
                        diag.compact_evidence.to_string(),
                    ]
                })
                .collect::<Vec<_>>(),
        ),
        Format::Json => json_document(&PowerOutput {
            diagnostic: diag.clone(),
            q2_halved_drift,
            q3_halved_drift,
            q4_halved_drift,
        })
        .map_err(numerical_error)?,
    };
    let exit = if strict && diag.verdict == PowerVerdict::Inconclusive {
        3
    } else {
        0
    };
    Ok((document, exit))
}

#[derive(Serialize)]
struct ProbeRow {
    re: f64,
    im: f64,
    value: f64,
    error: f64,
}

#[derive(Serialize)]
struct TransformOutput {
    transform: &'static str,
    parameter: f64,
    alpha: Option<f64>,
    probes: Vec<ProbeRow>,
}

/// Evaluate an `Estimate`-valued transform on the probe grid and emit
/// `re,im,value,error` rows.
fn transform_table<F>(
    points: &[DiskPoint],
    format: Format,
    meta: (&'static str, f64, Option<f64>),
    eval: F,
) -> Result<(String, u8), CliError>
where
    F: Fn(DiskPoint) -> Result<Estimate, CliError> + Sync,
{
    let rows: Vec<ProbeRow> = points
        .par_iter()
        .map(|&z| {
            let est = eval(z)?;
            let zc = z.to_complex();
            Ok(ProbeRow {
                re: zc.re,
                im: zc.im,
                value: est.value,
                error: est.error,
            })
        })
        .collect::<Result<_, CliError>>()?;
    let document = match format {
        Format::Csv => csv_document(
            &["re", "im", "value", "error"],
            &rows
                .iter()
                .map(|r| {
                    vec![
                        fmt_float(r.re),
                        fmt_float(r.im),
                        fmt_float(r.value),
                        fmt_float(r.error),
                    ]
                })
                .collect::<Vec<_>>(),
        ),
        Format::Json => {
            let (transform, parameter, alpha) = meta;
            json_document(&TransformOutput {
                transform,
                parameter,
                alpha,
                probes: rows,
            })
            .map_err(numerical_error)?
        }
    };
    Ok((document, 0))
}

fn cmd_berezin(cfg: &RunConfig, probes: &ProbeGrid, format: Format) -> Result<(String, u8), CliError> {
    if !(cfg.t > 0.0 && cfg.t.is_finite()) {
        return Err(config_error(format!("t = {} must be positive", cfg.t)));
    }
    if !(cfg.weight.alpha >= 0.0 && cfg.weight.alpha.is_finite()) {
        return Err(config_error(format!(
            "alpha = {} must be ≥ 0",
            cfg.weight.alpha
        )));
    }
    let m = cfg.measure().map_err(config_error)?;
    let quad = cfg.quad().map_err(config_error)?;
    let points = probes.points()?;
    transform_table(
        &points,
        format,
        ("berezin", cfg.t, Some(cfg.weight.alpha)),
        |z| berezin_t(&m, cfg.t, cfg.weight.alpha, z, &quad).map_err(numerical_error),
    )
}

fn cmd_averaging(
    cfg: &RunConfig,
    probes: &ProbeGrid,
    format: Format,
) -> Result<(String, u8), CliError> {
    if !(cfg.big_r > 0.0 && cfg.big_r < 1.0) {
        return Err(config_error(format!("R = {} not in (0, 1)", cfg.big_r)));
    }
    let m = cfg.measure().map_err(config_error)?;
    let quad = cfg.quad().map_err(config_error)?;
    let points = probes.points()?;
    transform_table(&points, format, ("averaging", cfg.big_r, None), |z| {
        averaging(&m, cfg.big_r, z, &quad).map_err(numerical_error)
    })
}

#[derive(Serialize)]
struct SelfTestRow {
    name: &'static str,
    passed: bool,
    detail: String,
}

#[derive(Serialize)]
struct SelfTestOutput {
    level: Level,
    passed: bool,
    checks: Vec<SelfTestRow>,
}

fn cmd_selftest(level: &str, format: Format) -> Result<(String, u8), CliError> {
    let level: Level = level.parse().map_err(config_error)?;
    let outcomes = run_suite(level);
    let passed = suite_passed(&outcomes);
    for o in &outcomes {
        eprintln!(
            "[{}] {} ({:.2} s)",
            if o.passed { "PASS" } else { "FAIL" },
            o.name,
            o.seconds
        );
    }
    let rows: Vec<SelfTestRow> = outcomes
        .iter()
        .map(|o| SelfTestRow {
            name: o.name,
            passed: o.passed,
            detail: o.detail.clone(),
        })
        .collect();
    let document = match format {
        Format::Csv => csv_document(
            &["name", "passed", "detail"],
            &rows
                .iter()
                .map(|r| vec![r.name.to_string(), r.passed.to_string(), r.detail.clone()])
                .collect::<Vec<_>>(),
        ),
        Format::Json => json_document(&SelfTestOutput {
            level,
            passed,
            checks: rows,
        })
        .map_err(numerical_error)?,
    };
    Ok((document, if passed { 0 } else { 4 }))
}
