//! Run configuration: one human-readable TOML tree, every leaf mirrored by a
//! command-line flag, with precedence defaults < file < flags.
//!
//! The documented defaults make the minimal config (an empty file, or no
//! file at all) a valid run: the canonical rough-regime model on a 16-point
//! time slice. [`parse_config`] performs all validation, including the
//! model-existence condition, so downstream tasks receive a config whose
//! model constructs cleanly.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use fracheat::{KernelFamily, ModelParams, QuadratureSpec, SampleMethod};
use serde::{Deserialize, Serialize};

/// Which pipeline stage a run executes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Covariance,
    Sample,
    Estimate,
    Verify,
    Report,
}

/// Spatial spectral-weight family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Kernel {
    Riesz,
    Bessel,
}

impl Kernel {
    pub fn to_core(self) -> KernelFamily {
        match self {
            Kernel::Riesz => KernelFamily::Riesz,
            Kernel::Bessel => KernelFamily::Bessel,
        }
    }
}

/// Which covariance law the grid indexes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum GridKind {
    /// Solution at a fixed point in space, indexed by time.
    TimeSlice,
    /// Solution at a fixed time, indexed by space.
    SpaceSlice,
    /// The pinned (restarted) component of the time slice.
    Pinned,
    /// Closed-form fractional Brownian reference law.
    Reference,
}

/// Sampling algorithm requested for ensemble generation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Cholesky,
    CirculantEmbedding,
    SpectralSeries,
}

impl Method {
    pub fn to_core(self) -> SampleMethod {
        match self {
            Method::Cholesky => SampleMethod::Cholesky,
            Method::CirculantEmbedding => SampleMethod::CirculantEmbedding,
            Method::SpectralSeries => SampleMethod::SpectralSeries,
        }
    }
}

/// Output serialization formats.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
    Binary,
}

/// Model parameters as plain leaves; validated into [`ModelParams`] by
/// [`RunConfig::model_params`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub h: f64,
    pub alpha: f64,
    pub d: u32,
    pub kernel: Kernel,
    pub t_horizon: f64,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            h: 0.7,
            alpha: 0.5,
            d: 1,
            kernel: Kernel::Riesz,
            t_horizon: 2.0,
        }
    }
}

/// Evaluation grid: `n_points` equally spaced points from `start` to `end`
/// inclusive. `slice_time` fixes the time of a space slice; `fbm_exponent`
/// overrides the reference law's exponent (default: the model's time
/// exponent).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub kind: GridKind,
    pub start: f64,
    pub end: f64,
    pub n_points: u32,
    pub slice_time: f64,
    pub fbm_exponent: Option<f64>,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            kind: GridKind::TimeSlice,
            start: 0.0625,
            end: 1.0,
            n_points: 16,
            slice_time: 1.0,
            fbm_exponent: None,
        }
    }
}

/// Monte Carlo controls. `master_seed` fixes every stream in the run;
/// repeating a run with the same seed reproduces all sampled data and all
/// derived reports bit for bit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McSection {
    pub n_paths: u32,
    pub master_seed: u64,
    pub method: Method,
}

impl Default for McSection {
    fn default() -> Self {
        Self {
            n_paths: 100,
            master_seed: 7,
            method: Method::Cholesky,
        }
    }
}

/// Where and how results are written.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub directory: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("fracheat-out"),
            formats: vec![Format::Json, Format::Csv],
        }
    }
}

/// Estimation-stage controls: the stored ensemble to analyze, the fit
/// tolerance, and optional explicit theory value and lag ladder.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimateSection {
    pub input: Option<PathBuf>,
    pub tolerance: f64,
    pub theory: Option<f64>,
    pub lags: Option<Vec<f64>>,
}

impl Default for EstimateSection {
    fn default() -> Self {
        Self {
            input: None,
            tolerance: 0.05,
            theory: None,
            lags: None,
        }
    }
}

/// The full run configuration tree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub task: Task,
    pub model: ModelSection,
    pub grid: GridSection,
    pub mc: McSection,
    pub quadrature: QuadratureSpec,
    pub output: OutputSection,
    pub estimate: EstimateSection,
}

impl Default for Task {
    fn default() -> Self {
        Task::Covariance
    }
}

/// Command-line overrides: one optional slot per config leaf. `None` means
/// "keep the file or default value".
#[derive(Clone, Debug, Default, clap::Args)]
pub struct Overrides {
    /// Hurst index of the temporal noise, in (1/2, 1)
    #[arg(long, global = true)]
    pub h: Option<f64>,
    /// Spectral weight exponent, in (0, d)
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    /// Spatial dimension (1, 2, or 3)
    #[arg(long, global = true)]
    pub d: Option<u32>,
    /// Spatial kernel family
    #[arg(long, global = true, value_enum)]
    pub kernel: Option<Kernel>,
    /// Largest admissible time coordinate
    #[arg(long, global = true)]
    pub t_horizon: Option<f64>,
    /// Covariance law the grid indexes
    #[arg(long, global = true, value_enum)]
    pub grid_kind: Option<GridKind>,
    /// First grid point
    #[arg(long, global = true)]
    pub grid_start: Option<f64>,
    /// Last grid point
    #[arg(long, global = true)]
    pub grid_end: Option<f64>,
    /// Number of equally spaced grid points (at least 2)
    #[arg(long, global = true)]
    pub n_points: Option<u32>,
    /// Fixed time of a space slice
    #[arg(long, global = true)]
    pub slice_time: Option<f64>,
    /// Exponent of the fractional Brownian reference law
    #[arg(long, global = true)]
    pub fbm_exponent: Option<f64>,
    /// Number of Monte Carlo paths (at least 1)
    #[arg(long, global = true)]
    pub n_paths: Option<u32>,
    /// Master seed fixing every random stream in the run
    #[arg(long, global = true)]
    pub master_seed: Option<u64>,
    /// Sampling algorithm
    #[arg(long, global = true, value_enum)]
    pub method: Option<Method>,
    /// Quadrature relative tolerance
    #[arg(long, global = true)]
    pub rel_tol: Option<f64>,
    /// Quadrature absolute floor
    #[arg(long, global = true)]
    pub abs_tol: Option<f64>,
    /// Quadrature refinement budget
    #[arg(long, global = true)]
    pub max_refinements: Option<u32>,
    /// Graded treatment of endpoint singularities (true/false)
    #[arg(long, global = true)]
    pub singularity_split: Option<bool>,
    /// Output directory
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Output formats, comma separated (csv,json,binary)
    #[arg(long, global = true, value_enum, value_delimiter = ',')]
    pub formats: Option<Vec<Format>>,
    /// Stored ensemble consumed by the estimate task
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Exponent-fit tolerance for the estimate task
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
    /// Explicit theory exponent for the estimate task
    #[arg(long, global = true)]
    pub theory: Option<f64>,
    /// Explicit variogram lags for the estimate task, comma separated
    #[arg(long, global = true, value_delimiter = ',')]
    pub lags: Option<Vec<f64>>,
}

/// A configuration or usage problem; maps to exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ConfigError {}

impl RunConfig {
    /// Constructs the validated model; the error text names the offending
    /// leaf, and an existence-condition violation reports both `d` and the
    /// value of `4H + alpha`.
    pub fn model_params(&self) -> Result<ModelParams, ConfigError> {
        ModelParams::new(
            self.model.h,
            self.model.alpha,
            self.model.d,
            self.model.kernel.to_core(),
            self.model.t_horizon,
        )
        .map_err(|e| ConfigError(format!("invalid [model] section: {e}")))
    }

    /// Cross-leaf validation beyond the model: grid shape, Monte Carlo
    /// sizes, output formats.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.model_params()?;
        let g = &self.grid;
        if g.n_points < 2 {
            return Err(ConfigError(format!(
                "grid.n_points must be at least 2, got {}",
                g.n_points
            )));
        }
        if !(g.start < g.end) || !g.start.is_finite() || !g.end.is_finite() {
            return Err(ConfigError(format!(
                "grid.start must be below grid.end, got [{}, {}]",
                g.start, g.end
            )));
        }
        if !(g.slice_time > 0.0) || !g.slice_time.is_finite() {
            return Err(ConfigError(format!(
                "grid.slice_time must be positive, got {}",
                g.slice_time
            )));
        }
        if let Some(e) = g.fbm_exponent {
            if !(e > 0.0 && e < 1.0) {
                return Err(ConfigError(format!(
                    "grid.fbm_exponent must lie in (0, 1), got {e}"
                )));
            }
        }
        if self.mc.n_paths < 1 {
            return Err(ConfigError("mc.n_paths must be at least 1".to_string()));
        }
        if self.output.formats.is_empty() {
            return Err(ConfigError(
                "output.formats must name at least one of csv, json, binary".to_string(),
            ));
        }
        if !(self.estimate.tolerance > 0.0) {
            return Err(ConfigError(format!(
                "estimate.tolerance must be positive, got {}",
                self.estimate.tolerance
            )));
        }
        Ok(())
    }

    /// The evaluation grid as explicit points, `start` and `end` inclusive.
    pub fn grid_points(&self) -> Vec<f64> {
        let n = self.grid.n_points as usize;
        let step = (self.grid.end - self.grid.start) / (n - 1) as f64;
        (0..n).map(|i| self.grid.start + i as f64 * step).collect()
    }

    /// Serializes the configuration to TOML. [`parse_config`] on the result
    /// reproduces the configuration exactly.
    pub fn emit(&self) -> String {
        toml::to_string_pretty(self).expect("a RunConfig always serializes")
    }
}

/// Applies command-line overrides on top of a (file- or default-derived)
/// configuration, returning one `leaf=value` string per override applied so
/// reports can echo where each value came from.
pub fn apply_overrides(cfg: &mut RunConfig, o: &Overrides) -> Vec<String> {
    let mut applied = Vec::new();
    let mut set = |name: &str, value: String| {
        let mut s = String::new();
        let _ = write!(s, "{name}={value}");
        applied.push(s);
    };
    macro_rules! leaf {
        ($slot:expr, $target:expr, $name:literal) => {
            if let Some(v) = &$slot {
                $target = v.clone();
                set($name, format!("{v:?}"));
            }
        };
    }
    leaf!(o.h, cfg.model.h, "model.h");
    leaf!(o.alpha, cfg.model.alpha, "model.alpha");
    leaf!(o.d, cfg.model.d, "model.d");
    leaf!(o.kernel, cfg.model.kernel, "model.kernel");
    leaf!(o.t_horizon, cfg.model.t_horizon, "model.t_horizon");
    leaf!(o.grid_kind, cfg.grid.kind, "grid.kind");
    leaf!(o.grid_start, cfg.grid.start, "grid.start");
    leaf!(o.grid_end, cfg.grid.end, "grid.end");
    leaf!(o.n_points, cfg.grid.n_points, "grid.n_points");
    leaf!(o.slice_time, cfg.grid.slice_time, "grid.slice_time");
    if let Some(v) = o.fbm_exponent {
        cfg.grid.fbm_exponent = Some(v);
        set("grid.fbm_exponent", format!("{v:?}"));
    }
    leaf!(o.n_paths, cfg.mc.n_paths, "mc.n_paths");
    leaf!(o.master_seed, cfg.mc.master_seed, "mc.master_seed");
    leaf!(o.method, cfg.mc.method, "mc.method");
    leaf!(o.rel_tol, cfg.quadrature.rel_tol, "quadrature.rel_tol");
    leaf!(o.abs_tol, cfg.quadrature.abs_tol, "quadrature.abs_tol");
    leaf!(
        o.max_refinements,
        cfg.quadrature.max_refinements,
        "quadrature.max_refinements"
    );
    leaf!(
        o.singularity_split,
        cfg.quadrature.singularity_split,
        "quadrature.singularity_split"
    );
    leaf!(o.out_dir, cfg.output.directory, "output.directory");
    leaf!(o.formats, cfg.output.formats, "output.formats");
    if let Some(v) = &o.input {
        cfg.estimate.input = Some(v.clone());
        set("estimate.input", format!("{v:?}"));
    }
    leaf!(o.tolerance, cfg.estimate.tolerance, "estimate.tolerance");
    if let Some(v) = o.theory {
        cfg.estimate.theory = Some(v);
        set("estimate.theory", format!("{v:?}"));
    }
    if let Some(v) = &o.lags {
        cfg.estimate.lags = Some(v.clone());
        set("estimate.lags", format!("{v:?}"));
    }
    applied
}

/// Builds the validated configuration from an optional TOML file plus
/// command-line overrides. Returns the configuration together with the
/// override echo list. File parse errors carry the offending line and
/// column; validation errors name the leaf.
pub fn parse_config(
    path: Option<&Path>,
    task: Task,
    overrides: &Overrides,
) -> Result<(RunConfig, Vec<String>), ConfigError> {
    let mut cfg = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| {
                ConfigError(format!("cannot read config {}: {e}", p.display()))
            })?;
            toml::from_str::<RunConfig>(&text).map_err(|e| {
                ConfigError(format!("cannot parse config {}: {e}", p.display()))
            })?
        }
        None => RunConfig::default(),
    };
    cfg.task = task;
    let mut applied = vec![format!("task={task:?}")];
    applied.extend(apply_overrides(&mut cfg, overrides));
    cfg.validate()?;
    Ok((cfg, applied))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn custom() -> RunConfig {
        let mut cfg = RunConfig::default();
        cfg.task = Task::Verify;
        cfg.model.h = 0.85;
        cfg.model.alpha = 1.25;
        cfg.model.d = 2;
        cfg.model.kernel = Kernel::Bessel;
        cfg.grid.kind = GridKind::SpaceSlice;
        cfg.grid.start = -1.0;
        cfg.grid.end = 1.0;
        cfg.grid.n_points = 33;
        cfg.grid.fbm_exponent = Some(0.3);
        cfg.mc.n_paths = 250;
        cfg.mc.master_seed = 99;
        cfg.mc.method = Method::SpectralSeries;
        cfg.quadrature.rel_tol = 1e-8;
        cfg.output.directory = PathBuf::from("elsewhere/deep");
        cfg.output.formats = vec![Format::Binary];
        cfg.estimate.input = Some(PathBuf::from("paths.bin"));
        cfg.estimate.theory = Some(0.42);
        cfg.estimate.lags = Some(vec![0.125, 0.25, 0.5]);
        cfg
    }

    #[test]
    fn emit_then_parse_is_identity() {
        for cfg in [RunConfig::default(), custom()] {
            let round: RunConfig = toml::from_str(&cfg.emit()).unwrap();
            assert_eq!(round, cfg);
        }
    }

    #[test]
    fn minimal_file_fills_documented_defaults() {
        let cfg: RunConfig = toml::from_str("").unwrap();
        assert_eq!(cfg, RunConfig::default());
        let partial: RunConfig = toml::from_str("[model]\nh = 0.6\n").unwrap();
        assert_eq!(partial.model.h, 0.6);
        assert_eq!(partial.model.alpha, 0.5);
        assert_eq!(partial.grid.n_points, 16);
    }

    #[test]
    fn unknown_keys_are_rejected_with_context() {
        let err = toml::from_str::<RunConfig>("[model]\nhh = 0.6\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line"), "message was: {msg}");
        assert!(msg.contains("hh"), "message was: {msg}");
    }

    #[test]
    fn flags_win_over_file_values_and_are_echoed() {
        let mut cfg = RunConfig::default();
        cfg.model.h = 0.6;
        let overrides = Overrides {
            h: Some(0.9),
            n_paths: Some(5),
            ..Overrides::default()
        };
        let applied = apply_overrides(&mut cfg, &overrides);
        assert_eq!(cfg.model.h, 0.9);
        assert_eq!(cfg.mc.n_paths, 5);
        assert!(applied.iter().any(|s| s == "model.h=0.9"));
        assert!(applied.iter().any(|s| s == "mc.n_paths=5"));
    }

    #[test]
    fn existence_violation_names_dimension_and_threshold() {
        let mut cfg = RunConfig::default();
        cfg.model.h = 0.6;
        cfg.model.alpha = 0.2;
        cfg.model.d = 3;
        let err = cfg.validate().unwrap_err().to_string();
        assert!(err.contains('3'), "message was: {err}");
        assert!(err.contains("2.6"), "message was: {err}");
    }

    #[test]
    fn shape_violations_are_rejected() {
        let mut small = RunConfig::default();
        small.grid.n_points = 1;
        assert!(small.validate().is_err());
        let mut empty = RunConfig::default();
        empty.output.formats.clear();
        assert!(empty.validate().is_err());
        let mut zero = RunConfig::default();
        zero.mc.n_paths = 0;
        assert!(zero.validate().is_err());
    }
}
