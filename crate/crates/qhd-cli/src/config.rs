//! Configuration resolution. Three layers, later ones winning: a named
//! preset, a TOML file, command-line flags. The resolved structs carry
//! every number a stage needs, so the stages themselves read no input.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use qhd_core::contour::{DEFAULT_DELTA, DEFAULT_RATIO};
use qhd_core::evans::EvansOptions;
use qhd_core::model::ShockParams;
use qhd_core::presets;
use qhd_core::profile::ShootOptions;

use crate::run::Failure;

#[derive(Parser)]
#[command(
    name = "qhd",
    version,
    about = "dissipative-dispersive shock profiles and their spectral stability"
)]
pub struct Cli {
    #[command(subcommand)]
    pub cmd: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Compute a shock profile, classify it, and write the curve
    Profile(ProfileArgs),
    /// Trace the Evans function along a contour and judge the point spectrum
    Stability(StabilityArgs),
    /// Dispersion curves and resolvent audit for both end states
    Essential(EssentialArgs),
    /// Finite-difference eigenvalue check of the linearized operator
    Oracle(OracleArgs),
    /// Run every preset through the profile, stability and essential stages
    ReproducePaper(ReproduceArgs),
}

#[derive(Args, Clone)]
pub struct CommonArgs {
    /// named parameter set: fig1a, fig1b or sec53
    #[arg(long)]
    pub preset: Option<String>,
    /// TOML configuration file
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// output directory (overrides QHD_OUT_DIR; default ".")
    #[arg(long, value_name = "DIR")]
    pub out_dir: Option<PathBuf>,
    /// worker threads for the Evans sweep (default: machine parallelism)
    #[arg(long)]
    pub workers: Option<usize>,

    /// adiabatic exponent
    #[arg(long)]
    pub gamma: Option<f64>,
    /// viscosity coefficient
    #[arg(long)]
    pub mu: Option<f64>,
    /// dispersion coefficient
    #[arg(long)]
    pub k: Option<f64>,
    /// shock speed
    #[arg(long)]
    pub s: Option<f64>,
    /// left end state
    #[arg(long)]
    pub p_minus: Option<f64>,
    /// right end state
    #[arg(long)]
    pub p_plus: Option<f64>,
    /// mass-flux integration constant (alternative to end states)
    #[arg(long)]
    pub const_a: Option<f64>,
    /// momentum-flux integration constant (alternative to end states)
    #[arg(long)]
    pub const_b: Option<f64>,

    /// shooting offset along the unstable direction
    #[arg(long)]
    pub offset: Option<f64>,
    /// half-width of the computational window
    #[arg(long)]
    pub half_width: Option<f64>,
    /// resampled profile grid size
    #[arg(long)]
    pub n_grid: Option<usize>,
}

#[derive(Args)]
pub struct ProfileArgs {
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args)]
pub struct StabilityArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// contour shape
    #[arg(long, value_enum)]
    pub contour: Option<ContourChoice>,
    /// semicircle or small-arc radius
    #[arg(long)]
    pub radius: Option<f64>,
    /// annulus inner radius
    #[arg(long)]
    pub inner_radius: Option<f64>,
    /// annulus outer radius
    #[arg(long)]
    pub outer_radius: Option<f64>,
    /// node budget along the upper half of the contour
    #[arg(long)]
    pub nodes: Option<usize>,
    /// distance of the vertical segment from the imaginary axis
    #[arg(long)]
    pub delta: Option<f64>,
    /// geometric refinement ratio toward the real axis
    #[arg(long)]
    pub ratio: Option<f64>,
    /// real evaluation point for the Cauchy cross-check
    #[arg(long)]
    pub cauchy_point: Option<f64>,
    /// also run the finite-difference oracle and compare counts
    #[arg(long)]
    pub with_oracle: bool,
    /// full reference contour: annulus radii 5 and 1.9e4, 1e7 nodes
    #[arg(long)]
    pub full_scale: bool,
}

#[derive(Args)]
pub struct EssentialArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// half-width of the Fourier frequency range
    #[arg(long)]
    pub xi_max: Option<f64>,
    /// sample count across [-xi_max, xi_max]; must be odd
    #[arg(long)]
    pub xi_samples: Option<usize>,
}

#[derive(Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// coarse grid size (the fine grid doubles it)
    #[arg(long)]
    pub oracle_n: Option<usize>,
    /// real-part cutoff for unstable candidates
    #[arg(long)]
    pub cutoff: Option<f64>,
}

#[derive(Args)]
pub struct ReproduceArgs {
    /// output directory (overrides QHD_OUT_DIR; default ".")
    #[arg(long, value_name = "DIR")]
    pub out_dir: Option<PathBuf>,
    /// worker threads for the Evans sweeps
    #[arg(long)]
    pub workers: Option<usize>,
    /// include the full reference annulus (hours of compute)
    #[arg(long)]
    pub full_scale: bool,
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq, Debug)]
pub enum ContourChoice {
    Semicircle,
    Annulus,
    Small,
}

impl ContourChoice {
    pub fn label(self) -> &'static str {
        match self {
            ContourChoice::Semicircle => "semicircle",
            ContourChoice::Annulus => "annulus",
            ContourChoice::Small => "small_arc",
        }
    }

    fn parse(s: &str) -> Result<Self, Failure> {
        match s {
            "semicircle" => Ok(ContourChoice::Semicircle),
            "annulus" => Ok(ContourChoice::Annulus),
            "small" => Ok(ContourChoice::Small),
            other => Err(Failure::Config(format!(
                "unknown contour kind '{other}' (expected semicircle, annulus or small)"
            ))),
        }
    }
}

// ---------------------------------------------------------------- file --

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub preset: Option<String>,
    pub gamma: Option<f64>,
    pub mu: Option<f64>,
    pub k: Option<f64>,
    pub s: Option<f64>,
    pub p_minus: Option<f64>,
    pub p_plus: Option<f64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub out_dir: Option<PathBuf>,
    pub workers: Option<usize>,
    #[serde(default)]
    pub profile: ProfileSection,
    #[serde(default)]
    pub contour: ContourSection,
    #[serde(default)]
    pub tolerances: TolSection,
    #[serde(default)]
    pub oracle: OracleSection,
    #[serde(default)]
    pub essential: EssentialSection,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ProfileSection {
    pub offset: Option<f64>,
    pub half_width: Option<f64>,
    pub n_grid: Option<usize>,
    pub atol: Option<f64>,
    pub rtol: Option<f64>,
    pub residual_tol: Option<f64>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ContourSection {
    pub kind: Option<String>,
    pub radius: Option<f64>,
    pub inner: Option<f64>,
    pub outer: Option<f64>,
    pub nodes: Option<usize>,
    pub delta: Option<f64>,
    pub ratio: Option<f64>,
    pub cauchy_point: Option<f64>,
    pub cauchy_tol: Option<f64>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct TolSection {
    pub rtol: Option<f64>,
    pub atol: Option<f64>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    pub n: Option<usize>,
    pub cutoff: Option<f64>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct EssentialSection {
    pub xi_max: Option<f64>,
    pub samples: Option<usize>,
}

pub fn load_file(path: Option<&Path>) -> Result<FileConfig, Failure> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

// ------------------------------------------------------------ resolved --

#[derive(Debug)]
pub struct ShockSetup {
    pub params: ShockParams,
    pub shoot: ShootOptions,
    /// file-name stem: the preset name, or "custom"
    pub stem: String,
}

#[derive(Debug)]
pub struct ContourSetup {
    pub kind: ContourChoice,
    pub radius: f64,
    pub inner: f64,
    pub outer: f64,
    pub nodes: usize,
    pub delta: f64,
    pub ratio: f64,
    /// None disables the Cauchy cross-check (always None for small arcs)
    pub cauchy_point: Option<f64>,
    pub cauchy_tol: f64,
}

pub struct OracleSetup {
    pub n: usize,
    pub cutoff: f64,
}

pub struct EssentialSetup {
    pub xi_max: f64,
    pub samples: usize,
}

const MIN_CONTOUR_NODES: usize = 64;
pub const FULL_SCALE_OUTER: f64 = 1.9e4;
pub const FULL_SCALE_NODES: usize = 10_000_000;
pub const FULL_SCALE_CAUCHY_TOL: f64 = 5e-4;

fn cfg(msg: impl Into<String>) -> Failure {
    Failure::Config(msg.into())
}

fn require(v: Option<f64>, what: &str) -> Result<f64, Failure> {
    let x = v.ok_or_else(|| cfg(format!("{what} is required (preset, config file or flag)")))?;
    if !x.is_finite() {
        return Err(cfg(format!("{what} must be finite")));
    }
    Ok(x)
}

/// Both-or-neither pair, flag layer over file layer.
fn pair(
    flag: (Option<f64>, Option<f64>),
    file: (Option<f64>, Option<f64>),
    what: &str,
) -> Result<Option<(f64, f64)>, Failure> {
    match (flag.0.or(file.0), flag.1.or(file.1)) {
        (Some(x), Some(y)) => Ok(Some((x, y))),
        (None, None) => Ok(None),
        _ => Err(cfg(format!("{what} must be given together"))),
    }
}

pub fn resolve_shock(common: &CommonArgs, file: &FileConfig) -> Result<ShockSetup, Failure> {
    let preset_name = common.preset.as_deref().or(file.preset.as_deref());
    let preset = match preset_name {
        Some(name) => Some(presets::by_name(name).ok_or_else(|| {
            cfg(format!(
                "unknown preset '{name}' (expected fig1a, fig1b or sec53)"
            ))
        })?),
        None => None,
    };

    let gamma = common.gamma.or(file.gamma).or(preset.as_ref().map(|p| p.params.gamma));
    let mu = common.mu.or(file.mu).or(preset.as_ref().map(|p| p.params.mu));
    let k = common.k.or(file.k).or(preset.as_ref().map(|p| p.params.k));
    let s = common.s.or(file.s).or(preset.as_ref().map(|p| p.params.s));

    let ends = pair(
        (common.p_minus, common.p_plus),
        (file.p_minus, file.p_plus),
        "p_minus and p_plus",
    )?;
    let consts = pair(
        (common.const_a, common.const_b),
        (file.a, file.b),
        "the integration constants a and b",
    )?;

    let scalars_touched =
        common.gamma.or(file.gamma).is_some() || common.mu.or(file.mu).is_some()
            || common.k.or(file.k).is_some() || common.s.or(file.s).is_some();

    let params = match (&preset, ends, consts) {
        // untouched preset: use its parameters verbatim
        (Some(p), None, None) if !scalars_touched => p.params,
        // preset with scalar overrides: rebuild from its end states
        (Some(p), None, None) => presets::from_parts(
            require(gamma, "gamma")?,
            require(mu, "mu")?,
            require(k, "k")?,
            require(s, "s")?,
            Some((p.params.p_minus, p.params.p_plus)),
            None,
        )
        .map_err(|e| cfg(e.to_string()))?,
        // explicit route shadows whatever the preset carried
        (_, ends, consts) => presets::from_parts(
            require(gamma, "gamma")?,
            require(mu, "mu")?,
            require(k, "k")?,
            require(s, "s")?,
            ends,
            consts,
        )
        .map_err(|e| cfg(e.to_string()))?,
    };

    let mut shoot = preset.as_ref().map(|p| p.shoot).unwrap_or_default();
    let ps = &file.profile;
    for (slot, v) in [
        (&mut shoot.offset, common.offset.or(ps.offset)),
        (&mut shoot.half_width, common.half_width.or(ps.half_width)),
        (&mut shoot.atol, ps.atol),
        (&mut shoot.rtol, ps.rtol),
        (&mut shoot.residual_tol, ps.residual_tol),
    ] {
        if let Some(v) = v {
            *slot = v;
        }
    }
    if let Some(n) = common.n_grid.or(ps.n_grid) {
        shoot.n_grid = n;
    }
    if !(shoot.offset > 0.0) || !(shoot.half_width > 0.0) {
        return Err(cfg("offset and half_width must be positive"));
    }
    if shoot.n_grid < 2 {
        return Err(cfg("n_grid must be at least 2"));
    }
    if !(shoot.atol > 0.0) || !(shoot.rtol > 0.0) || !(shoot.residual_tol > 0.0) {
        return Err(cfg("profile tolerances must be positive"));
    }

    Ok(ShockSetup {
        params,
        shoot,
        stem: preset_name.unwrap_or("custom").to_string(),
    })
}

pub fn resolve_contour(args: &StabilityArgs, file: &FileConfig) -> Result<ContourSetup, Failure> {
    let c = &file.contour;
    let file_kind = c.kind.as_deref().map(ContourChoice::parse).transpose()?;
    let mut kind = args.contour.or(file_kind).unwrap_or(ContourChoice::Semicircle);

    if args.full_scale {
        if let Some(explicit) = args.contour.or(file_kind) {
            if explicit != ContourChoice::Annulus {
                return Err(cfg("--full-scale implies the annulus contour"));
            }
        }
        kind = ContourChoice::Annulus;
    }

    let radius = args.radius.or(c.radius).unwrap_or(match kind {
        ContourChoice::Small => 1e-6,
        _ => 10.0,
    });
    let mut inner = args.inner_radius.or(c.inner).unwrap_or(5.0);
    let mut outer = args.outer_radius.or(c.outer).unwrap_or(1000.0);
    let mut nodes = args.nodes.or(c.nodes).unwrap_or(match kind {
        ContourChoice::Semicircle => 10_000,
        ContourChoice::Annulus => 100_000,
        ContourChoice::Small => 1_000,
    });
    let delta = args.delta.or(c.delta).unwrap_or(DEFAULT_DELTA);
    let ratio = args.ratio.or(c.ratio).unwrap_or(DEFAULT_RATIO);
    let mut cauchy_tol = c.cauchy_tol.unwrap_or(1e-3);

    let mut cauchy_point = args.cauchy_point.or(c.cauchy_point);
    if args.full_scale {
        inner = args.inner_radius.unwrap_or(5.0);
        outer = args.outer_radius.unwrap_or(FULL_SCALE_OUTER);
        nodes = args.nodes.unwrap_or(FULL_SCALE_NODES);
        cauchy_point = Some(cauchy_point.unwrap_or(FULL_SCALE_OUTER - 20.0));
        cauchy_tol = FULL_SCALE_CAUCHY_TOL;
    }

    if nodes < MIN_CONTOUR_NODES {
        return Err(cfg(format!(
            "geometry error: the contour needs at least {MIN_CONTOUR_NODES} nodes (got {nodes})"
        )));
    }
    if !(ratio > 1.0) {
        return Err(cfg("ratio must exceed 1"));
    }
    if !(delta > 0.0) {
        return Err(cfg("delta must be positive"));
    }
    match kind {
        ContourChoice::Semicircle => {
            if !(radius > delta) {
                return Err(cfg("semicircle radius must exceed delta"));
            }
        }
        ContourChoice::Annulus => {
            if !(inner > delta) || !(outer > inner) {
                return Err(cfg("annulus needs delta < inner < outer"));
            }
        }
        ContourChoice::Small => {
            if !(radius > 0.0) {
                return Err(cfg("small-arc radius must be positive"));
            }
            if cauchy_point.is_some() {
                return Err(cfg("the small arc has no interior for a Cauchy check"));
            }
        }
    }

    let cauchy_point = match kind {
        ContourChoice::Small => None,
        ContourChoice::Semicircle => Some(cauchy_point.unwrap_or(radius / 2.0)),
        ContourChoice::Annulus => Some(cauchy_point.unwrap_or(outer / 2.0)),
    };
    if let Some(a) = cauchy_point {
        let (lo, hi) = match kind {
            ContourChoice::Semicircle => (delta, radius),
            ContourChoice::Annulus => (inner, outer),
            ContourChoice::Small => unreachable!(),
        };
        if !(a > lo && a < hi) {
            return Err(cfg(format!(
                "cauchy_point must lie strictly inside the contour on the real axis ({lo:e} .. {hi:e})"
            )));
        }
    }

    Ok(ContourSetup {
        kind,
        radius,
        inner,
        outer,
        nodes,
        delta,
        ratio,
        cauchy_point,
        cauchy_tol,
    })
}

pub fn resolve_evans(file: &FileConfig) -> Result<EvansOptions, Failure> {
    let mut opts = EvansOptions::default();
    if let Some(r) = file.tolerances.rtol {
        opts.rtol = r;
    }
    if let Some(a) = file.tolerances.atol {
        opts.atol = a;
    }
    if !(opts.rtol > 0.0) || !(opts.atol > 0.0) {
        return Err(cfg("integration tolerances must be positive"));
    }
    Ok(opts)
}

pub fn resolve_oracle(args: &OracleArgs, file: &FileConfig) -> Result<OracleSetup, Failure> {
    oracle_setup(args.oracle_n, args.cutoff, file)
}

pub fn oracle_setup(
    n: Option<usize>,
    cutoff: Option<f64>,
    file: &FileConfig,
) -> Result<OracleSetup, Failure> {
    let n = n.or(file.oracle.n).unwrap_or(150);
    let cutoff = cutoff.or(file.oracle.cutoff).unwrap_or(1e-2);
    if n < 8 {
        return Err(cfg("the oracle grid needs at least 8 interior nodes"));
    }
    if !(cutoff >= 0.0) || !cutoff.is_finite() {
        return Err(cfg("cutoff must be a finite nonnegative number"));
    }
    Ok(OracleSetup { n, cutoff })
}

pub fn resolve_essential(
    args: &EssentialArgs,
    file: &FileConfig,
) -> Result<EssentialSetup, Failure> {
    let xi_max = args.xi_max.or(file.essential.xi_max).unwrap_or(50.0);
    let samples = args.xi_samples.or(file.essential.samples).unwrap_or(2001);
    if !(xi_max > 0.0) {
        return Err(cfg("xi_max must be positive"));
    }
    if samples < 3 || samples % 2 == 0 {
        return Err(cfg("xi_samples must be an odd number of at least 3 so the zero frequency is sampled"));
    }
    Ok(EssentialSetup { xi_max, samples })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blank_common() -> CommonArgs {
        CommonArgs {
            preset: None,
            config: None,
            out_dir: None,
            workers: None,
            gamma: None,
            mu: None,
            k: None,
            s: None,
            p_minus: None,
            p_plus: None,
            const_a: None,
            const_b: None,
            offset: None,
            half_width: None,
            n_grid: None,
        }
    }

    fn blank_stability() -> StabilityArgs {
        StabilityArgs {
            common: blank_common(),
            contour: None,
            radius: None,
            inner_radius: None,
            outer_radius: None,
            nodes: None,
            delta: None,
            ratio: None,
            cauchy_point: None,
            with_oracle: false,
            full_scale: false,
        }
    }

    #[test]
    fn untouched_preset_is_used_verbatim() {
        let mut common = blank_common();
        common.preset = Some("sec53".into());
        let got = resolve_shock(&common, &FileConfig::default()).unwrap();
        let want = presets::by_name("sec53").unwrap().params;
        assert_eq!(got.params.a.to_bits(), want.a.to_bits());
        assert_eq!(got.params.b.to_bits(), want.b.to_bits());
        assert_eq!(got.stem, "sec53");
    }

    #[test]
    fn scalar_override_rebuilds_from_preset_end_states() {
        let mut common = blank_common();
        common.preset = Some("sec53".into());
        common.gamma = Some(1.6);
        let got = resolve_shock(&common, &FileConfig::default()).unwrap();
        let base = presets::by_name("sec53").unwrap().params;
        assert_eq!(got.params.gamma, 1.6);
        // end states survive, derived flux constants are recomputed
        assert_eq!(got.params.p_minus.to_bits(), base.p_minus.to_bits());
        assert_ne!(got.params.b.to_bits(), base.b.to_bits());
    }

    #[test]
    fn end_states_must_come_as_a_pair() {
        let mut common = blank_common();
        common.preset = Some("sec53".into());
        common.p_minus = Some(2.0);
        let err = resolve_shock(&common, &FileConfig::default()).unwrap_err();
        assert!(matches!(err, Failure::Config(m) if m.contains("together")));
    }

    #[test]
    fn flag_beats_file_scalar() {
        let mut file = FileConfig::default();
        file.preset = Some("sec53".into());
        file.gamma = Some(1.9);
        let mut common = blank_common();
        common.gamma = Some(2.5);
        let got = resolve_shock(&common, &file).unwrap();
        assert_eq!(got.params.gamma, 2.5);
    }

    #[test]
    fn contour_defaults_by_kind() {
        let semi = resolve_contour(&blank_stability(), &FileConfig::default()).unwrap();
        assert_eq!(semi.kind, ContourChoice::Semicircle);
        assert_eq!(semi.nodes, 10_000);
        assert_eq!(semi.cauchy_point, Some(5.0));

        let mut args = blank_stability();
        args.contour = Some(ContourChoice::Small);
        let small = resolve_contour(&args, &FileConfig::default()).unwrap();
        assert_eq!(small.cauchy_point, None);
    }

    #[test]
    fn tiny_node_budget_is_a_geometry_error() {
        let mut args = blank_stability();
        args.nodes = Some(32);
        let err = resolve_contour(&args, &FileConfig::default()).unwrap_err();
        assert!(matches!(err, Failure::Config(m) if m.contains("geometry error")));
    }

    #[test]
    fn full_scale_pins_the_annulus() {
        let mut args = blank_stability();
        args.full_scale = true;
        let c = resolve_contour(&args, &FileConfig::default()).unwrap();
        assert_eq!(c.kind, ContourChoice::Annulus);
        assert_eq!(c.outer, FULL_SCALE_OUTER);
        assert_eq!(c.nodes, FULL_SCALE_NODES);
        assert_eq!(c.cauchy_point, Some(FULL_SCALE_OUTER - 20.0));
        assert_eq!(c.cauchy_tol, FULL_SCALE_CAUCHY_TOL);

        args.contour = Some(ContourChoice::Small);
        assert!(resolve_contour(&args, &FileConfig::default()).is_err());
    }

    #[test]
    fn cauchy_point_must_be_interior() {
        let mut args = blank_stability();
        args.cauchy_point = Some(10.0); // on the semicircle rim
        assert!(resolve_contour(&args, &FileConfig::default()).is_err());

        let mut args = blank_stability();
        args.contour = Some(ContourChoice::Small);
        args.cauchy_point = Some(0.5);
        let err = resolve_contour(&args, &FileConfig::default()).unwrap_err();
        assert!(matches!(err, Failure::Config(m) if m.contains("no interior")));
    }
}
