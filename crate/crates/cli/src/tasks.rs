//! Task runners: one function per subcommand.
//!
//! Every runner echoes what it did to stdout, writes the configured output
//! files, and returns the process exit code — `0` for success, `1` when a
//! judged result failed its comparison. Aborts are returned as
//! [`TaskFailure`] and split by exit code: configuration and usage problems
//! map to `2`, numerical failures inside the engines to `3`. A run killed
//! mid-battery still writes its partial report, flagged incomplete.

use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use fracheat::{
    empirical_variogram, fit_exponent, sample_fbm, sample_pinned_u, sample_space_slice,
    sample_time_slice, build_cov_matrix, CovKind, GridUnit, ModelParams, PathEnsemble,
    Verdict,
};

use crate::checks::{run_battery, CHECK_NAMES};
use crate::config::{ConfigError, Format, GridKind, RunConfig};
use crate::report::{
    ensure_out_dir, write_report, CheckResult, Comparison, ReportDocument,
};

/// Largest grid the dense (Cholesky-backed) paths will accept: an n x n
/// factorization gets slow and memory-hungry past a few thousand points.
const DENSE_CAP: usize = 2048;

/// Largest grid for the FFT- and series-backed samplers.
const FFT_CAP: usize = 1 << 20;

/// A task abort carrying its process exit code.
pub enum TaskFailure {
    /// Bad configuration or usage: exit 2.
    Config(String),
    /// A computation failed inside the engines: exit 3.
    Numerical(String),
}

impl TaskFailure {
    pub fn exit_code(&self) -> u8 {
        match self {
            TaskFailure::Config(_) => 2,
            TaskFailure::Numerical(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            TaskFailure::Config(m) | TaskFailure::Numerical(m) => m,
        }
    }
}

impl From<ConfigError> for TaskFailure {
    fn from(e: ConfigError) -> Self {
        TaskFailure::Config(e.0)
    }
}

impl From<fracheat::Error> for TaskFailure {
    fn from(e: fracheat::Error) -> Self {
        TaskFailure::Numerical(e.to_string())
    }
}

fn cap(n: usize, limit: usize, what: &str) -> Result<(), TaskFailure> {
    if n > limit {
        Err(TaskFailure::Config(format!(
            "{what} supports at most {limit} grid points, got {n}"
        )))
    } else {
        Ok(())
    }
}

fn print_row(r: &CheckResult) {
    let tag = if r.passed { "[PASS]" } else { "[FAIL]" };
    println!("{tag} {}: {}", r.name, r.detail);
}

fn finish(
    cfg: &RunConfig,
    overrides: &[String],
    results: Vec<CheckResult>,
    incomplete: bool,
    dir: &Path,
) -> Result<ReportDocument, TaskFailure> {
    let doc = ReportDocument::new(cfg, overrides, results, incomplete);
    let json_path = write_report(cfg, dir, &doc).map_err(|e| {
        TaskFailure::Config(format!("cannot write report under {}: {e}", dir.display()))
    })?;
    if let Some(p) = json_path {
        println!("wrote {}", p.display());
    }
    if cfg.output.formats.contains(&Format::Csv) {
        println!("wrote {}", dir.join("results.csv").display());
    }
    // The effective configuration, ready to rerun verbatim with --config.
    let echo_path = dir.join("config.toml");
    fs::write(&echo_path, cfg.emit()).map_err(|e| {
        TaskFailure::Config(format!("cannot write {}: {e}", echo_path.display()))
    })?;
    Ok(doc)
}

fn cov_kind(cfg: &RunConfig, params: &ModelParams) -> CovKind {
    match cfg.grid.kind {
        GridKind::TimeSlice => CovKind::TimeSlice,
        GridKind::SpaceSlice => CovKind::SpaceSlice(cfg.grid.slice_time),
        GridKind::Pinned => CovKind::PinnedU,
        GridKind::Reference => {
            CovKind::FbmRef(cfg.grid.fbm_exponent.unwrap_or_else(|| params.gamma()))
        }
    }
}

/// Tabulate the covariance matrix of the configured grid and judge its
/// positive semidefiniteness.
pub fn run_covariance(cfg: &RunConfig, overrides: &[String]) -> Result<u8, TaskFailure> {
    let params = cfg.model_params()?;
    let grid = cfg.grid_points();
    cap(grid.len(), DENSE_CAP, "the covariance task")?;
    let kind = cov_kind(cfg, &params);
    let cov = build_cov_matrix(kind, &params, &grid, &cfg.quadrature)?;

    let eigen = nalgebra::SymmetricEigen::new(cov.values().clone()).eigenvalues;
    let max = eigen.iter().cloned().fold(f64::MIN, f64::max);
    let min = eigen.iter().cloned().fold(f64::MAX, f64::min);
    let result = CheckResult::judged(
        "covariance_psd",
        "covariance matrices of the solution field are symmetric positive semidefinite",
        0.0,
        1e-10 * max.max(0.0),
        min,
        Comparison::LowerBound,
        true,
        format!(
            "{n} x {n} {kind:?} matrix, eigenvalues in [{min:.6e}, {max:.6e}]",
            n = grid.len()
        ),
    );
    print_row(&result);

    let dir = ensure_out_dir(cfg)?;
    if cfg.output.formats.contains(&Format::Csv) {
        let path = dir.join("covariance.csv");
        let mut out = String::from("i,j,arg_i,arg_j,value\n");
        for i in 0..grid.len() {
            for j in 0..grid.len() {
                out.push_str(&format!(
                    "{i},{j},{},{},{}\n",
                    grid[i],
                    grid[j],
                    cov.values()[(i, j)]
                ));
            }
        }
        fs::write(&path, out).map_err(|e| {
            TaskFailure::Config(format!("cannot write {}: {e}", path.display()))
        })?;
        println!("wrote {}", path.display());
    }
    let doc = finish(cfg, overrides, vec![result], false, &dir)?;
    Ok(if doc.verdicts.all_passed { 0 } else { 1 })
}

/// Draw a path ensemble on the configured grid and write it in the
/// configured formats.
pub fn run_sample(cfg: &RunConfig, overrides: &[String]) -> Result<u8, TaskFailure> {
    let params = cfg.model_params()?;
    let grid = cfg.grid_points();
    let q = &cfg.quadrature;
    let n_paths = cfg.mc.n_paths as usize;
    let seed = cfg.mc.master_seed;
    let method = cfg.mc.method.to_core();
    let dense = method == fracheat::SampleMethod::Cholesky;
    let (ens, label) = match cfg.grid.kind {
        GridKind::TimeSlice => {
            cap(grid.len(), DENSE_CAP, "the dense time-slice sampler")?;
            (
                sample_time_slice(&params, &grid, n_paths, seed, q)?,
                "time slice",
            )
        }
        GridKind::Pinned => {
            cap(grid.len(), if dense { DENSE_CAP } else { FFT_CAP }, "the pinned sampler")?;
            (
                sample_pinned_u(&params, &grid, n_paths, seed, method, q)?,
                "pinned component",
            )
        }
        GridKind::SpaceSlice => {
            cap(grid.len(), if dense { DENSE_CAP } else { FFT_CAP }, "the space-slice sampler")?;
            (
                sample_space_slice(&params, cfg.grid.slice_time, &grid, n_paths, seed, method, q)?,
                "space slice",
            )
        }
        GridKind::Reference => {
            cap(grid.len(), FFT_CAP, "the reference sampler")?;
            let g = cfg.grid.fbm_exponent.unwrap_or_else(|| params.gamma());
            (
                sample_fbm(g, &grid, n_paths, seed)?,
                "fractional Brownian reference",
            )
        }
    };

    let bias = ens.series_bias().unwrap_or(0.0);
    let result = CheckResult::judged(
        "sampler_bias",
        "spectral-series variance truncation stays below tolerance; exact-in-law samplers report zero",
        0.0,
        1e-3,
        bias.abs(),
        Comparison::UpperBound,
        true,
        format!(
            "{label}: {} paths x {} points, method {:?}, seed {}",
            ens.n_paths(),
            ens.n_grid(),
            ens.method(),
            ens.seed()
        ),
    );
    print_row(&result);

    let dir = ensure_out_dir(cfg)?;
    if cfg.output.formats.contains(&Format::Binary) {
        let path = dir.join("ensemble.bin");
        let file = fs::File::create(&path).map_err(|e| {
            TaskFailure::Config(format!("cannot write {}: {e}", path.display()))
        })?;
        ens.write_binary(BufWriter::new(file))?;
        println!("wrote {}", path.display());
    }
    if cfg.output.formats.contains(&Format::Csv) {
        let path = dir.join("ensemble.csv");
        let file = fs::File::create(&path).map_err(|e| {
            TaskFailure::Config(format!("cannot write {}: {e}", path.display()))
        })?;
        ens.write_csv(BufWriter::new(file))?;
        println!("wrote {}", path.display());
    }
    let doc = finish(cfg, overrides, vec![result], false, &dir)?;
    Ok(if doc.verdicts.all_passed { 0 } else { 1 })
}

/// Dyadic-ish lag ladder on the ensemble's own grid: multiples of the
/// finest spacing, capped at a quarter of the span so every lag has many
/// disjoint increments, and at twelve entries.
fn lag_ladder(grid: &[f64]) -> Result<Vec<f64>, TaskFailure> {
    if grid.len() < 2 {
        return Err(TaskFailure::Config(
            "the stored ensemble grid has fewer than 2 points".to_string(),
        ));
    }
    let step = grid
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::MAX, f64::min);
    let span = grid[grid.len() - 1] - grid[0];
    let multipliers = [
        1.0, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0, 24.0, 32.0, 48.0, 64.0, 96.0, 128.0, 192.0,
        256.0,
    ];
    let lags: Vec<f64> = multipliers
        .iter()
        .map(|m| m * step)
        .filter(|&l| l <= span / 4.0)
        .take(12)
        .collect();
    if lags.len() < 5 {
        return Err(TaskFailure::Config(format!(
            "the grid only supports {} lags below a quarter of its span; the exponent fit \
             needs at least 5 spanning 3 octaves — store a longer ensemble or pass --lags",
            lags.len()
        )));
    }
    Ok(lags)
}

/// Fit a variogram exponent to a stored ensemble and judge it against the
/// configured (or model-derived) theory value.
pub fn run_estimate(cfg: &RunConfig, overrides: &[String]) -> Result<u8, TaskFailure> {
    let params = cfg.model_params()?;
    let path = cfg.estimate.input.as_ref().ok_or_else(|| {
        TaskFailure::Config(
            "the estimate task needs --input pointing at an ensemble binary written by the \
             sample task"
                .to_string(),
        )
    })?;
    let file = fs::File::open(path).map_err(|e| {
        TaskFailure::Config(format!("cannot open ensemble {}: {e}", path.display()))
    })?;
    let ens = PathEnsemble::read_binary(BufReader::new(file))?;
    let lags = match &cfg.estimate.lags {
        Some(lags) => lags.clone(),
        None => lag_ladder(ens.grid())?,
    };
    let theory = cfg.estimate.theory.unwrap_or_else(|| match ens.unit() {
        GridUnit::Time => params.gamma(),
        GridUnit::Space => params.beta(),
    });
    let table = empirical_variogram(&ens, &lags)?;
    let fit = fit_exponent(&table, theory, cfg.estimate.tolerance)?;
    let result = CheckResult::judged(
        "exponent_fit",
        "half the variogram log-log slope recovers the regularity exponent of the sampled axis",
        theory,
        cfg.estimate.tolerance,
        fit.estimate,
        Comparison::TwoSided,
        fit.verdict == Verdict::Pass,
        format!(
            "{} paths x {} points on the {:?} axis: fit {:.4} +- {:.4} over {} lags",
            ens.n_paths(),
            ens.n_grid(),
            ens.unit(),
            fit.estimate,
            fit.stderr,
            lags.len()
        ),
    );
    print_row(&result);

    let dir = ensure_out_dir(cfg)?;
    if cfg.output.formats.contains(&Format::Csv) {
        let path = dir.join("variogram.csv");
        let file = fs::File::create(&path).map_err(|e| {
            TaskFailure::Config(format!("cannot write {}: {e}", path.display()))
        })?;
        let mut out = BufWriter::new(file);
        let write = |out: &mut BufWriter<fs::File>| -> std::io::Result<()> {
            writeln!(out, "lag,value,stderr")?;
            for i in 0..table.lags.len() {
                writeln!(out, "{},{},{}", table.lags[i], table.values[i], table.stderrs[i])?;
            }
            Ok(())
        };
        write(&mut out).map_err(|e| {
            TaskFailure::Config(format!("cannot write {}: {e}", path.display()))
        })?;
        println!("wrote {}", path.display());
    }
    let doc = finish(cfg, overrides, vec![result], false, &dir)?;
    Ok(if doc.verdicts.all_passed { 0 } else { 1 })
}

/// Run the fourteen-check battery, optionally corrupting one check's theory
/// value to exercise the failure path, and write the full report.
pub fn run_verify(
    cfg: &RunConfig,
    overrides: &[String],
    corrupt: Option<&str>,
) -> Result<u8, TaskFailure> {
    if let Some(name) = corrupt {
        if !CHECK_NAMES.contains(&name) {
            return Err(TaskFailure::Config(format!(
                "unknown check name {name:?}; expected one of: {}",
                CHECK_NAMES.join(", ")
            )));
        }
    }
    let params = cfg.model_params()?;
    let outcome = run_battery(cfg, &params);
    let mut results = outcome.results;
    if let Some(name) = corrupt {
        if let Some(row) = results.iter_mut().find(|r| r.name == name) {
            row.corrupt_theory();
        }
    }
    for r in &results {
        print_row(r);
    }
    let incomplete = outcome.error.is_some();
    let dir = ensure_out_dir(cfg)?;
    let doc = finish(cfg, overrides, results, incomplete, &dir)?;
    println!(
        "verdict: {}/{} passed{}",
        doc.verdicts.passed,
        doc.verdicts.total,
        if incomplete { " (incomplete)" } else { "" }
    );
    if let Some((name, e)) = outcome.error {
        return Err(TaskFailure::Numerical(format!(
            "battery aborted at check {name}: {e} (partial report written)"
        )));
    }
    Ok(if doc.verdicts.all_passed { 0 } else { 1 })
}

/// Merge earlier run reports into one document, prefixing each result with
/// its source path.
pub fn run_report(
    cfg: &RunConfig,
    overrides: &[String],
    inputs: &[PathBuf],
) -> Result<u8, TaskFailure> {
    let mut combined = Vec::new();
    let mut incomplete = false;
    for path in inputs {
        let text = fs::read_to_string(path).map_err(|e| {
            TaskFailure::Config(format!("cannot read report {}: {e}", path.display()))
        })?;
        let doc: ReportDocument = serde_json::from_str(&text).map_err(|e| {
            TaskFailure::Config(format!("cannot parse report {}: {e}", path.display()))
        })?;
        println!(
            "{}: {}/{} passed{}",
            path.display(),
            doc.verdicts.passed,
            doc.verdicts.total,
            if doc.verdicts.incomplete {
                " (incomplete)"
            } else {
                ""
            }
        );
        incomplete |= doc.verdicts.incomplete;
        let source = path.with_extension("");
        for mut r in doc.results {
            r.name = format!("{}:{}", source.display(), r.name);
            combined.push(r);
        }
    }
    let dir = ensure_out_dir(cfg)?;
    let doc = finish(cfg, overrides, combined, incomplete, &dir)?;
    println!(
        "verdict: {}/{} passed{}",
        doc.verdicts.passed,
        doc.verdicts.total,
        if incomplete { " (incomplete)" } else { "" }
    );
    Ok(if doc.verdicts.all_passed { 0 } else { 1 })
}
