//! Report documents: the self-contained record of a run.
//!
//! Every task emits one [`ReportDocument`]: the full configuration echo
//! (with the list of command-line overrides that produced it), the build
//! and timestamp environment, one [`CheckResult`] per computed quantity,
//! and the aggregated verdicts. Reruns from the echoed configuration
//! reproduce every field except `environment.timestamp`, so two reports
//! from the same seed are byte-identical modulo that one line.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::{Format, RunConfig};

/// JSON schema version of [`ReportDocument`]; bumped on breaking layout
/// changes.
pub const SCHEMA_VERSION: u32 = 1;

/// How `observed` is judged against `theory_value`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Comparison {
    /// Passes iff `|observed - theory_value| <= tolerance`.
    TwoSided,
    /// Passes iff `observed <= theory_value + tolerance`.
    UpperBound,
    /// Passes iff `observed >= theory_value - tolerance`.
    LowerBound,
}

/// One verified quantity: the theory it targets, the tolerance granted,
/// what was observed, and the verdict.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    /// Human-readable statement of the property being checked.
    pub theory_ref: String,
    pub theory_value: f64,
    pub tolerance: f64,
    pub observed: f64,
    pub comparison: Comparison,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    /// Builds a result, deriving the verdict from the comparison. Auxiliary
    /// conditions that are not captured by the scalar comparison (grid
    /// positivity, matrix eigenvalue floors) enter through `auxiliary_ok`
    /// and must be explained in `detail`.
    #[allow(clippy::too_many_arguments)]
    pub fn judged(
        name: &str,
        theory_ref: &str,
        theory_value: f64,
        tolerance: f64,
        observed: f64,
        comparison: Comparison,
        auxiliary_ok: bool,
        detail: String,
    ) -> Self {
        let passed = auxiliary_ok && Self::compare(comparison, theory_value, tolerance, observed);
        Self {
            name: name.to_string(),
            theory_ref: theory_ref.to_string(),
            theory_value,
            tolerance,
            observed,
            comparison,
            passed,
            detail,
        }
    }

    fn compare(comparison: Comparison, theory: f64, tolerance: f64, observed: f64) -> bool {
        match comparison {
            Comparison::TwoSided => (observed - theory).abs() <= tolerance,
            Comparison::UpperBound => observed <= theory + tolerance,
            Comparison::LowerBound => observed >= theory - tolerance,
        }
    }

    /// Replaces the theory value with one the observation cannot satisfy
    /// and re-derives the verdict. Exercises the verdict plumbing: a wrong
    /// theory constant must flip the check and the process exit code.
    pub fn corrupt_theory(&mut self) {
        let shift = 1e3 * (self.tolerance + self.theory_value.abs() + self.observed.abs() + 1.0);
        self.theory_value = match self.comparison {
            Comparison::TwoSided | Comparison::LowerBound => self.theory_value + shift,
            Comparison::UpperBound => self.theory_value - shift,
        };
        self.passed =
            Self::compare(self.comparison, self.theory_value, self.tolerance, self.observed);
        self.detail = format!("theory value deliberately corrupted; {}", self.detail);
    }
}

/// Aggregated verdicts over all results in a document.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Verdicts {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub all_passed: bool,
    pub failing: Vec<String>,
    /// True when a stage aborted and the results list is partial.
    pub incomplete: bool,
}

impl Verdicts {
    pub fn over(results: &[CheckResult], incomplete: bool) -> Self {
        let failing: Vec<String> = results
            .iter()
            .filter(|r| !r.passed)
            .map(|r| r.name.clone())
            .collect();
        Self {
            total: results.len(),
            passed: results.len() - failing.len(),
            failed: failing.len(),
            all_passed: failing.is_empty() && !incomplete,
            failing,
            incomplete,
        }
    }
}

/// Configuration echo: the final merged configuration plus the list of
/// command-line overrides applied on top of the file or defaults.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub config: RunConfig,
    pub overrides: Vec<String>,
}

/// Build and host context of a run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Environment {
    pub build: String,
    pub timestamp: String,
    pub threads: usize,
}

impl Environment {
    pub fn current() -> Self {
        Self {
            build: format!("fracheat-cli {}", env!("CARGO_PKG_VERSION")),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
            threads: rayon::current_num_threads(),
        }
    }
}

/// The self-contained record of one run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReportDocument {
    pub schema_version: u32,
    pub config_echo: ConfigEcho,
    pub environment: Environment,
    pub results: Vec<CheckResult>,
    pub verdicts: Verdicts,
}

impl ReportDocument {
    pub fn new(
        config: &RunConfig,
        overrides: &[String],
        results: Vec<CheckResult>,
        incomplete: bool,
    ) -> Self {
        let verdicts = Verdicts::over(&results, incomplete);
        Self {
            schema_version: SCHEMA_VERSION,
            config_echo: ConfigEcho {
                config: config.clone(),
                overrides: overrides.to_vec(),
            },
            environment: Environment::current(),
            results,
            verdicts,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports always serialize");
        s.push('\n');
        s
    }
}

/// Quotes a CSV field when it contains a delimiter, quote, or newline.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Writes the per-check results table. Column order is fixed:
/// `name,theory_ref,theory_value,tolerance,observed,comparison,passed`.
pub fn write_results_csv<W: Write>(mut out: W, results: &[CheckResult]) -> std::io::Result<()> {
    writeln!(
        out,
        "name,theory_ref,theory_value,tolerance,observed,comparison,passed"
    )?;
    for r in results {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            csv_field(&r.name),
            csv_field(&r.theory_ref),
            r.theory_value,
            r.tolerance,
            r.observed,
            match r.comparison {
                Comparison::TwoSided => "two-sided",
                Comparison::UpperBound => "upper-bound",
                Comparison::LowerBound => "lower-bound",
            },
            r.passed
        )?;
    }
    Ok(())
}

/// Materializes the output directory and returns it.
pub fn ensure_out_dir(cfg: &RunConfig) -> Result<PathBuf, crate::config::ConfigError> {
    let dir = cfg.output.directory.clone();
    fs::create_dir_all(&dir).map_err(|e| {
        crate::config::ConfigError(format!(
            "output directory {} is not writable: {e}",
            dir.display()
        ))
    })?;
    Ok(dir)
}

/// Writes the report JSON (when requested) and the results CSV (when
/// requested), returning the JSON path if one was written.
pub fn write_report(
    cfg: &RunConfig,
    dir: &Path,
    doc: &ReportDocument,
) -> std::io::Result<Option<PathBuf>> {
    let mut json_path = None;
    if cfg.output.formats.contains(&Format::Json) {
        let path = dir.join("report.json");
        fs::write(&path, doc.to_json())?;
        json_path = Some(path);
    }
    if cfg.output.formats.contains(&Format::Csv) {
        let file = fs::File::create(dir.join("results.csv"))?;
        write_results_csv(file, &doc.results)?;
    }
    Ok(json_path)
}
