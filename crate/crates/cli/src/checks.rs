//! The `verify` battery: fourteen checks, each judging one advertised
//! guarantee of the library and yielding a [`CheckResult`] row for the run
//! report.
//!
//! The battery reads the model from the run configuration wherever the
//! underlying statement is parameter-uniform (oracle agreement, the pinned
//! reduction, exponent and scaling laws, the sampler law). Checks that
//! certify a specific regime — the rough/boundary/smooth spatial
//! trichotomy, the conditional-variance floor, the path-modulus constants —
//! pin their canonical parameter sets instead, because their frozen
//! thresholds were calibrated there and a configured model need not sit in
//! the regime the statement is about. Time-axis engines require the
//! scale-free spectral weight, so a configured Bessel model is verified
//! through its Riesz twin (same roughness indices and dimension); every
//! affected check says so in its detail line.
//!
//! Each check compares one observed scalar against one theory value under a
//! declared comparison mode, so a report row is self-describing: rerunning
//! the battery with the same master seed reproduces the observation
//! bit-for-bit.

use std::cell::RefCell;

use fracheat::constants::{alpha_h, gaussian_radial_constant, inv_two_pi_pow};
use fracheat::covariance::pinned::{
    c0_constant, pinned_spectral_density, y_derivative_variogram, DensityBackend,
};
use fracheat::covariance::reference::{bifbm_covariance, white_noise_solution_covariance};
use fracheat::covariance::spatial::{heat_time_integral, spatial_variogram};
use fracheat::covariance::temporal::{temporal_covariance, temporal_variogram};
use fracheat::quad::{adaptive_gk, power_weight_integral, QuadratureSpec};
use fracheat::{
    build_cov_matrix, empirical_variogram, fit_exponent, modulus_statistic, sample_fbm,
    sample_gaussian, sample_pinned_u, sample_space_slice, sample_time_slice,
    self_similarity_check, slnd_conditional_variance, smoothness_check, whitening_report,
    CovKind, CovMatrix, GridUnit, KernelFamily, ModelParams, ModulusNormalizer, PathEnsemble,
    SampleMethod, VariogramEstimate, Verdict,
};

use crate::config::RunConfig;
use crate::report::{CheckResult, Comparison};

/// Battery checks in execution order. `verify --corrupt` accepts exactly
/// these names.
pub const CHECK_NAMES: [&str; 14] = [
    "backend_oracle",
    "spectral_slope",
    "pinned_fbm_reduction",
    "temporal_exponent",
    "spatial_exponent",
    "boundary_log_band",
    "smooth_regime",
    "sandwich",
    "slnd",
    "y_smooth_bound",
    "self_similarity",
    "modulus_stability",
    "sampler_law",
    "reference_identities",
];

/// Conditional-variance floor: 0.95 x the minimum ratio measured across the
/// full 768-configuration enumeration on the reference machine.
const SLND_FLOOR: f64 = 0.2417;

/// Envelope-spread ceiling for the heat-time integral, valid across the
/// whole admissible roughness range (the spread grows from about 2.6 near
/// h = 0.55 to about 13.7 near h = 0.95).
const SANDWICH_SPREAD_CEILING: f64 = 16.0;

/// Two-sided normal threshold at significance 1e-3.
const Z_LIMIT: f64 = 3.2905;

/// What the battery produced: the completed rows, plus the error that
/// interrupted it, if any. A present error means `results` is partial and
/// the enclosing report must be flagged incomplete.
pub struct BatteryOutcome {
    pub results: Vec<CheckResult>,
    pub error: Option<(&'static str, fracheat::Error)>,
}

/// Run the battery in declaration order, stopping at the first check that
/// fails to compute (a failing comparison is a result, not an error).
pub fn run_battery(cfg: &RunConfig, params: &ModelParams) -> BatteryOutcome {
    let battery = Battery::new(cfg, params);
    let checks: [(&'static str, fn(&Battery) -> Result<CheckResult, fracheat::Error>); 14] = [
        ("backend_oracle", Battery::backend_oracle),
        ("spectral_slope", Battery::spectral_slope),
        ("pinned_fbm_reduction", Battery::pinned_fbm_reduction),
        ("temporal_exponent", Battery::temporal_exponent),
        ("spatial_exponent", Battery::spatial_exponent),
        ("boundary_log_band", Battery::boundary_log_band),
        ("smooth_regime", Battery::smooth_regime),
        ("sandwich", Battery::sandwich),
        ("slnd", Battery::slnd),
        ("y_smooth_bound", Battery::y_smooth_bound),
        ("self_similarity", Battery::self_similarity),
        ("modulus_stability", Battery::modulus_stability),
        ("sampler_law", Battery::sampler_law),
        ("reference_identities", Battery::reference_identities),
    ];
    let mut results = Vec::with_capacity(checks.len());
    for (name, check) in checks {
        match check(&battery) {
            Ok(result) => results.push(result),
            Err(e) => {
                return BatteryOutcome {
                    results,
                    error: Some((name, e)),
                }
            }
        }
    }
    BatteryOutcome {
        results,
        error: None,
    }
}

struct Battery {
    /// Riesz twin of the configured model: identical roughness indices,
    /// dimension, and horizon, with the scale-free spectral weight.
    twin: ModelParams,
    /// Suffix appended to detail lines of twin-evaluated checks when the
    /// configured kernel had to be substituted.
    twin_note: &'static str,
    master_seed: u64,
    q: QuadratureSpec,
}

impl Battery {
    fn new(cfg: &RunConfig, params: &ModelParams) -> Self {
        let (twin, twin_note) = if params.kernel() == KernelFamily::Riesz {
            (*params, "")
        } else {
            let twin = ModelParams::new(
                params.h(),
                params.alpha(),
                params.d(),
                KernelFamily::Riesz,
                params.t_horizon(),
            )
            .expect("the Riesz twin shares the validated existence condition");
            (twin, "; evaluated on the Riesz twin of the configured Bessel model")
        };
        Battery {
            twin,
            twin_note,
            master_seed: cfg.mc.master_seed,
            q: cfg.quadrature,
        }
    }

    fn seed(&self, offset: u64) -> u64 {
        self.master_seed.wrapping_add(offset)
    }

    /// Exact temporal covariance against the literal nested double
    /// integral, sharing nothing with the production reduction except the
    /// adaptive quadrature primitives. The oracle runs at a relative
    /// tolerance two decades below its 1e-4 target rather than at the
    /// production tolerance: near the roughness floor the nested form
    /// develops diagonal boundary layers that exhaust refinement long after
    /// the digits that matter have converged.
    fn backend_oracle(&self) -> Result<CheckResult, fracheat::Error> {
        let m = &self.twin;
        let horizon = m.t_horizon();
        let q_oracle = QuadratureSpec {
            rel_tol: self.q.rel_tol.max(1e-7),
            ..self.q
        };
        let times: Vec<f64> = (1..=5).map(|k| k as f64 * horizon / 5.0).collect();
        let mut worst = 0f64;
        for &t in &times {
            for &s in &times {
                let reduced = temporal_covariance(m, t, s, &self.q)?;
                let oracle = oracle_temporal(m, t, s, &q_oracle)?;
                worst = worst.max((reduced - oracle).abs() / oracle.abs());
            }
        }
        Ok(CheckResult::judged(
            "backend_oracle",
            "the temporal covariance reduction agrees with its defining nested double integral",
            0.0,
            1e-4,
            worst,
            Comparison::UpperBound,
            true,
            format!(
                "25 grid pairs spanning the horizon, worst relative error {worst:.3e}{}",
                self.twin_note
            ),
        ))
    }

    /// Log-log slope of the pinned spectral density over ten octaves, for
    /// the configured roughness and two fixed companions spanning the
    /// admissible range.
    fn spectral_slope(&self) -> Result<CheckResult, fracheat::Error> {
        let companions = [
            ModelParams::new(0.6, 0.3, 1, KernelFamily::Riesz, 1.0)?,
            ModelParams::new(0.85, 1.2, 2, KernelFamily::Riesz, 1.0)?,
        ];
        let mut worst = 0f64;
        let mut detail = Vec::new();
        for m in [&self.twin, &companions[0], &companions[1]] {
            let pts: Vec<(f64, f64)> = (0..=10)
                .map(|k| {
                    let tau = 2f64.powi(k);
                    pinned_spectral_density(m, tau, DensityBackend::Quadrature, &self.q)
                        .map(|f| (tau.ln(), f.ln()))
                })
                .collect::<Result<_, _>>()?;
            let slope = ols_slope(&pts);
            let theory = -(m.beta_raw() + 1.0);
            worst = worst.max((slope - theory).abs());
            detail.push(format!(
                "({},{},{}): slope {slope:.6} vs {theory:.6}",
                m.h(),
                m.alpha(),
                m.d()
            ));
        }
        Ok(CheckResult::judged(
            "spectral_slope",
            "the pinned spectral density decays with log-log slope -(2H - (d - alpha)/2 + 1)",
            0.0,
            1e-3,
            worst,
            Comparison::UpperBound,
            true,
            format!("{}{}", detail.join(", "), self.twin_note),
        ))
    }

    /// The pinned component is a constant multiple of fractional Brownian
    /// motion: its covariance matrix matches C0^2 times the reference
    /// entrywise on a 64-point horizon-spanning grid.
    fn pinned_fbm_reduction(&self) -> Result<CheckResult, fracheat::Error> {
        let m = &self.twin;
        let horizon = m.t_horizon();
        let grid: Vec<f64> = (1..=64).map(|i| i as f64 * horizon / 64.0).collect();
        let pinned = build_cov_matrix(CovKind::PinnedU, m, &grid, &self.q)?;
        let fbm = build_cov_matrix(CovKind::FbmRef(m.gamma()), m, &grid, &self.q)?;
        let scale = c0_constant(m, &self.q)?.powi(2);
        let mut worst = 0f64;
        for i in 0..grid.len() {
            for j in 0..grid.len() {
                let want = scale * fbm.values()[(i, j)];
                let got = pinned.values()[(i, j)];
                worst = worst.max((got - want).abs() / want.abs());
            }
        }
        Ok(CheckResult::judged(
            "pinned_fbm_reduction",
            "the pinned component equals C0 times fractional Brownian motion with exponent H - (d - alpha)/4",
            0.0,
            1e-3,
            worst,
            Comparison::UpperBound,
            true,
            format!(
                "64x64 horizon grid, worst entrywise relative error {worst:.3e} against C0^2 = {scale:.6} times the reference{}",
                self.twin_note
            ),
        ))
    }

    /// Time-slice regularity exponent, measured twice: analytically from
    /// exact variograms averaged over interior positions, and empirically
    /// from a 200-path pinned ensemble (the remainder term is continuously
    /// differentiable, so the pinned term carries the slice's roughness).
    fn temporal_exponent(&self) -> Result<CheckResult, fracheat::Error> {
        let m = &self.twin;
        let gamma = m.gamma();
        let w = m.t_horizon().min(1.0);
        let lags: Vec<f64> = dyadic_lags(11, 4).iter().map(|&l| l * w).collect();

        let values = lags
            .iter()
            .map(|&lag| {
                let mut sum = 0.0;
                for i in 1..=14 {
                    let t = i as f64 * w / 16.0;
                    sum += temporal_variogram(m, t + lag, t, &self.q)?;
                }
                Ok(sum / 14.0)
            })
            .collect::<Result<Vec<f64>, fracheat::Error>>()?;
        let table = VariogramEstimate {
            lags: lags.clone(),
            values,
            stderrs: vec![0.0; lags.len()],
        };
        let analytic = fit_exponent(&table, gamma, 0.03)?;

        let grid: Vec<f64> = (0..=4096).map(|i| i as f64 * w / 4096.0).collect();
        let ens = sample_pinned_u(
            m,
            &grid,
            200,
            self.seed(11),
            SampleMethod::CirculantEmbedding,
            &self.q,
        )?;
        let empirical = fit_exponent(&empirical_variogram(&ens, &lags)?, gamma, 0.03)?;

        let observed = if (analytic.estimate - gamma).abs() >= (empirical.estimate - gamma).abs() {
            analytic.estimate
        } else {
            empirical.estimate
        };
        Ok(CheckResult::judged(
            "temporal_exponent",
            "the time slice has variogram exponent H - (d - alpha)/4",
            gamma,
            0.03,
            observed,
            Comparison::TwoSided,
            analytic.verdict == Verdict::Pass && empirical.verdict == Verdict::Pass,
            format!(
                "analytic fit {:.4}, 200-path fit {:.4} +- {:.4} (reporting the leg farther from theory){}",
                analytic.estimate, empirical.estimate, empirical.stderr, self.twin_note
            ),
        ))
    }

    /// Space-slice regularity in the rough regime: the canonical model's
    /// analytic variogram is pinched over lag^(2 beta) across eight dyadic
    /// octaves, and a 200-path spectral-series ensemble reproduces the
    /// exponent. Pinned to the regime the statement is about.
    fn spatial_exponent(&self) -> Result<CheckResult, fracheat::Error> {
        let m = ModelParams::new(0.6, 0.5, 1, KernelFamily::Riesz, 1.0)?;
        let two_beta = 2.0 * m.beta();
        let mut lo = f64::MAX;
        let mut hi = f64::MIN;
        for k in 3..=10 {
            let z = 2f64.powi(-k);
            let ratio = spatial_variogram(&m, 1.0, z, &self.q)? / z.powf(two_beta);
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
        let band_ok = lo > 0.0 && lo.is_finite() && hi.is_finite() && hi / lo <= 3.0;

        let grid: Vec<f64> = (0..=32768).map(|i| i as f64 / 65536.0).collect();
        let ens = sample_space_slice(
            &m,
            1.0,
            &grid,
            200,
            self.seed(12),
            SampleMethod::SpectralSeries,
            &self.q,
        )?;
        let report = fit_exponent(&empirical_variogram(&ens, &dyadic_lags(15, 8))?, 0.95, 0.05)?;
        Ok(CheckResult::judged(
            "spatial_exponent",
            "below the smooth threshold the space slice has variogram exponent min(1, 2H - (d - alpha)/2)",
            0.95,
            0.05,
            report.estimate,
            Comparison::TwoSided,
            band_ok,
            format!(
                "canonical rough model (0.6, 0.5, 1): analytic band [{lo:.3}, {hi:.3}] (spread {:.2} <= 3), 200-path fit {:.4} +- {:.4}",
                hi / lo,
                report.estimate,
                report.stderr
            ),
        ))
    }

    /// At the smoothness boundary the spatial variogram carries a log
    /// correction: the ratio to lag^2 log(1/lag) is pinched across eight
    /// dyadic octaves. Pinned to a boundary parameter set.
    fn boundary_log_band(&self) -> Result<CheckResult, fracheat::Error> {
        let m = ModelParams::new(0.75, 1.0, 2, KernelFamily::Riesz, 1.0)?;
        let mut lo = f64::MAX;
        let mut hi = f64::MIN;
        for k in 3..=10 {
            let z = 2f64.powi(-k);
            let ratio = spatial_variogram(&m, 1.0, z, &self.q)? / (z * z * (1.0 / z).ln());
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
        Ok(CheckResult::judged(
            "boundary_log_band",
            "on the smoothness boundary the spatial variogram scales as lag^2 log(1/lag)",
            3.0,
            0.0,
            hi / lo,
            Comparison::UpperBound,
            lo > 0.0,
            format!(
                "boundary model (0.75, 1.0, 2): variogram over lag^2 log(1/lag) in [{lo:.4}, {hi:.4}], spread {:.3} (a log-free gauge would drift by 3.33)",
                hi / lo
            ),
        ))
    }

    /// Above the smoothness threshold the spatial derivative field has
    /// variogram exponent 2H - (d - alpha)/2 - 1 in the increment sense.
    /// Pinned to a smooth-regime parameter set.
    fn smooth_regime(&self) -> Result<CheckResult, fracheat::Error> {
        let m = ModelParams::new(0.9, 0.5, 1, KernelFamily::Riesz, 1.0)?;
        let theory = m.beta_raw() - 1.0;
        let grid: Vec<f64> = (0..=4096).map(|i| i as f64 / 4096.0).collect();
        let ens = sample_space_slice(
            &m,
            1.0,
            &grid,
            200,
            self.seed(13),
            SampleMethod::SpectralSeries,
            &self.q,
        )?;
        let report = smoothness_check(&m, &ens, &dyadic_lags(11, 5), 0.07)?;
        Ok(CheckResult::judged(
            "smooth_regime",
            "above the smooth threshold the spatial derivative field has variogram exponent 2H - (d - alpha)/2 - 1",
            theory,
            0.07,
            report.estimate,
            Comparison::TwoSided,
            report.verdict == Verdict::Pass,
            format!(
                "smooth model (0.9, 0.5, 1): derivative-field exponent {:.4} +- {:.4}",
                report.estimate, report.stderr
            ),
        ))
    }

    /// The heat-kernel time integral is pinched between the two printed
    /// envelopes over five decades of spatial scale, at the configured
    /// roughness. The spread ceiling holds across the whole admissible
    /// range of h.
    fn sandwich(&self) -> Result<CheckResult, fracheat::Error> {
        let h = self.twin.h();
        let mut low = Vec::new();
        let mut high = Vec::new();
        for &t in &[0.5, 1.0, 2.0] {
            for k in 0..=24 {
                let r = 0.1 * 10f64.powf(k as f64 / 8.0);
                let w = r * r;
                let integral = heat_time_integral(h, t, w, &self.q)?;
                let shape = (1.0 + w).powf(-2.0 * h);
                low.push(integral / (t.powf(2.0 * h).min(1.0) * shape));
                high.push(integral / ((t.powf(2.0 * h) + 1.0) * shape));
            }
        }
        let c1 = low.iter().cloned().fold(f64::MAX, f64::min);
        let spread_low = low.iter().cloned().fold(f64::MIN, f64::max) / c1;
        let c2 = high.iter().cloned().fold(f64::MIN, f64::max);
        let spread_high = c2 / high.iter().cloned().fold(f64::MAX, f64::min);
        Ok(CheckResult::judged(
            "sandwich",
            "the heat-kernel time integral sits between c1 and c2 times (t^2H min 1)(1 + r^2)^-2H and (t^2H + 1)(1 + r^2)^-2H",
            SANDWICH_SPREAD_CEILING,
            0.0,
            spread_low.max(spread_high),
            Comparison::UpperBound,
            c1 > 0.0,
            format!(
                "h = {h}: fitted constants c1 {c1:.4}, c2 {c2:.4}; within-envelope spreads {spread_low:.2}/{spread_high:.2} over 75 (t, r) pairs"
            ),
        ))
    }

    /// Strong local nondeterminism: the conditional variance of the
    /// canonical rough space slice given any nearby lattice configuration
    /// stays above the frozen floor times the smallest distance to the
    /// conditioning set (origin included) raised to 4H + alpha - d.
    fn slnd(&self) -> Result<CheckResult, fracheat::Error> {
        let m = ModelParams::new(0.6, 0.5, 1, KernelFamily::Riesz, 1.0)?;
        let grid: Vec<f64> = (-16..=16).map(|i| i as f64 / 16.0).collect();
        let cov = build_cov_matrix(CovKind::SpaceSlice(1.0), &m, &grid, &self.q)?;
        let exponent = 4.0 * m.h() + m.alpha() - m.d() as f64;
        let mut count = 0usize;
        let mut min_ratio = f64::MAX;
        for i in 0..grid.len() {
            for stride in [1usize, 2, 4] {
                for n in 1..=8usize {
                    let mut cond = Vec::new();
                    let mut step = 1usize;
                    while cond.len() < n && step <= 2 * n {
                        let off = step.div_ceil(2) * stride;
                        let idx = if step % 2 == 1 {
                            i.checked_sub(off)
                        } else {
                            i.checked_add(off).filter(|&j| j < grid.len())
                        };
                        if let Some(j) = idx {
                            cond.push(j);
                        }
                        step += 1;
                    }
                    if cond.len() < n {
                        continue;
                    }
                    let var = slnd_conditional_variance(&cov, i, &cond)?;
                    let x = grid[i];
                    let dist = cond
                        .iter()
                        .map(|&j| (x - grid[j]).abs())
                        .fold(x.abs(), f64::min);
                    count += 1;
                    if dist == 0.0 {
                        continue;
                    }
                    min_ratio = min_ratio.min(var / dist.powf(exponent));
                }
            }
        }
        Ok(CheckResult::judged(
            "slnd",
            "conditional variance given any finite conditioning set is at least c times the smallest distance to the set (origin included) to the power 4H + alpha - d",
            SLND_FLOOR,
            0.0,
            min_ratio,
            Comparison::LowerBound,
            count == 768,
            format!(
                "canonical rough model, {count} conditioning configurations, min variance/distance^{exponent} ratio {min_ratio:.4}"
            ),
        ))
    }

    /// The remainder term of the pinned decomposition has a continuously
    /// differentiable time derivative: its increment variogram is bounded
    /// by a fitted constant times the squared gap, with 20% slack, across
    /// a horizon-scaled ladder of positions and dyadic gaps.
    fn y_smooth_bound(&self) -> Result<CheckResult, fracheat::Error> {
        let m = &self.twin;
        let horizon = m.t_horizon();
        let base = horizon / 4.0;
        let c_fit =
            y_derivative_variogram(m, base, base + horizon / 40.0, &self.q)? / (horizon / 40.0).powi(2);
        let mut worst = 0f64;
        for j in 0..5 {
            let s = horizon * (0.25 + 0.125 * j as f64);
            for k in 2..=6 {
                let gap = horizon * 2f64.powi(-k);
                if s + gap > horizon {
                    continue;
                }
                let v = y_derivative_variogram(m, s, s + gap, &self.q)?;
                worst = worst.max(v / (c_fit * gap * gap));
            }
        }
        Ok(CheckResult::judged(
            "y_smooth_bound",
            "the remainder derivative has increment variogram bounded by C |t - s|^2",
            1.2,
            0.0,
            worst,
            Comparison::UpperBound,
            c_fit > 0.0,
            format!(
                "C_fit {c_fit:.4} from the coarsest pair; worst variogram/(C_fit gap^2) ratio {worst:.4} over 25 horizon-scaled (s, gap) pairs (20% slack){}",
                self.twin_note
            ),
        ))
    }

    /// Under the scale-free weight the time slice is self-similar with
    /// exponent H - (d - alpha)/4: covariances on a horizon-scaled grid
    /// transported by factors 2 and 4 agree to quadrature accuracy.
    fn self_similarity(&self) -> Result<CheckResult, fracheat::Error> {
        let m = &self.twin;
        let horizon = m.t_horizon();
        let grid: Vec<f64> = [0.025, 0.05, 0.1, 0.175, 0.25]
            .iter()
            .map(|&x| x * horizon)
            .collect();
        let mut worst = 0f64;
        let mut detail = Vec::new();
        for &c in &[2.0, 4.0] {
            let dev = self_similarity_check(m, c, &grid, &self.q)?;
            worst = worst.max(dev);
            detail.push(format!("c={c}: deviation {dev:.2e}"));
        }
        Ok(CheckResult::judged(
            "self_similarity",
            "the time slice is self-similar with exponent H - (d - alpha)/4 under the scale-free weight",
            0.0,
            1e-3,
            worst,
            Comparison::UpperBound,
            true,
            format!("{}{}", detail.join(", "), self.twin_note),
        ))
    }

    /// Path-modulus statistics settle to constants under the uniform-log,
    /// local log-log, and lower log-log gauges, on the canonical rough
    /// carriers for both axes (the gauges are calibrated to the rough
    /// regime, so the models are pinned). Each gauge carries its own
    /// stability ceiling — the lower (Chung) gauge converges through
    /// higher-order log corrections and drifts more at any finite
    /// resolution — and the row reports the worst stability-to-ceiling
    /// ratio, so the battery stays seed-robust at full sensitivity on the
    /// fast gauges.
    fn modulus_stability(&self) -> Result<CheckResult, fracheat::Error> {
        let eps: Vec<f64> = (5..=8).map(|k| 2f64.powi(-k)).collect();
        let gauges = [
            (ModulusNormalizer::UniformLog, 0.15),
            (ModulusNormalizer::LocalLogLog, 0.15),
            (ModulusNormalizer::ChungLogLog, 0.25),
        ];
        let tp = ModelParams::new(0.7, 0.5, 1, KernelFamily::Riesz, 1.0)?;
        let tgrid: Vec<f64> = (1..=2048).map(|i| i as f64 / 2048.0).collect();
        let tens = sample_time_slice(&tp, &tgrid, 500, self.seed(14), &self.q)?;
        let sp = ModelParams::new(0.6, 0.5, 1, KernelFamily::Riesz, 1.0)?;
        let sgrid: Vec<f64> = (0..=4096).map(|i| i as f64 / 4096.0).collect();
        let sens = sample_space_slice(
            &sp,
            1.0,
            &sgrid,
            500,
            self.seed(15),
            SampleMethod::SpectralSeries,
            &self.q,
        )?;
        let mut worst = 0f64;
        let mut detail = Vec::new();
        for (label, ens, g) in [("time", &tens, tp.gamma()), ("space", &sens, sp.beta())] {
            for (norm, limit) in gauges {
                let origin = if norm == ModulusNormalizer::UniformLog {
                    None
                } else {
                    Some(0.5)
                };
                let report = modulus_statistic(ens, norm, g, &eps, origin)?;
                worst = worst.max(report.stability / limit);
                detail.push(format!("{label} {norm:?} {:.3}/{limit}", report.stability));
            }
        }
        Ok(CheckResult::judged(
            "modulus_stability",
            "path-modulus statistics settle to constants under the uniform-log, local log-log, and lower log-log gauges, each within its per-gauge stability ceiling",
            1.0,
            0.0,
            worst,
            Comparison::UpperBound,
            true,
            format!(
                "canonical carriers, 500-path median stability/ceiling across the 4 finest scales: {}",
                detail.join(", ")
            ),
        ))
    }

    /// Every sampler reproduces its target Gaussian law: whitened ensemble
    /// coordinates are standard normal at significance 1e-3, and all four
    /// covariance matrices are positive semidefinite.
    fn sampler_law(&self) -> Result<CheckResult, fracheat::Error> {
        let m = &self.twin;
        let w = m.t_horizon().min(1.0);
        let grid: Vec<f64> = (1..=16).map(|i| i as f64 * w / 16.0).collect();
        let n_paths = 10_000;
        let seed = self.seed(16);
        let gamma = m.gamma();

        let ts_cov = build_cov_matrix(CovKind::TimeSlice, m, &grid, &self.q)?;
        let fbm_cov = build_cov_matrix(CovKind::FbmRef(gamma), m, &grid, &self.q)?;
        let pu_cov = build_cov_matrix(CovKind::PinnedU, m, &grid, &self.q)?;
        let ss_cov = build_cov_matrix(CovKind::SpaceSlice(w), m, &grid, &self.q)?;

        let mut psd_ok = true;
        for cov in [&ts_cov, &fbm_cov, &pu_cov, &ss_cov] {
            let eigen = nalgebra::SymmetricEigen::new(cov.values().clone()).eigenvalues;
            let max = eigen.iter().cloned().fold(f64::MIN, f64::max);
            let min = eigen.iter().cloned().fold(f64::MAX, f64::min);
            psd_ok &= min >= -1e-10 * max;
        }

        let mut worst = 0f64;
        let mut detail = Vec::new();
        let mut check = |label: String,
                         ens: PathEnsemble,
                         cov: &CovMatrix|
         -> Result<(), fracheat::Error> {
            let z = whitening_report(&ens, cov)?.z_score;
            worst = worst.max(z.abs());
            detail.push(format!("{label} z {z:+.2}"));
            Ok(())
        };
        check(
            "dense-factor".into(),
            sample_gaussian(&ts_cov, n_paths, seed, GridUnit::Time)?,
            &ts_cov,
        )?;
        check(
            "time-slice".into(),
            sample_time_slice(m, &grid, n_paths, seed, &self.q)?,
            &ts_cov,
        )?;
        check(
            "reference".into(),
            sample_fbm(gamma, &grid, n_paths, seed)?,
            &fbm_cov,
        )?;
        for method in [SampleMethod::Cholesky, SampleMethod::CirculantEmbedding] {
            check(
                format!("pinned/{method:?}"),
                sample_pinned_u(m, &grid, n_paths, seed, method, &self.q)?,
                &pu_cov,
            )?;
        }
        for method in [
            SampleMethod::Cholesky,
            SampleMethod::CirculantEmbedding,
            SampleMethod::SpectralSeries,
        ] {
            check(
                format!("space/{method:?}"),
                sample_space_slice(m, w, &grid, n_paths, seed, method, &self.q)?,
                &ss_cov,
            )?;
        }
        Ok(CheckResult::judged(
            "sampler_law",
            "every sampler reproduces its target Gaussian law: whitened coordinates are standard normal at significance 1e-3",
            Z_LIMIT,
            0.0,
            worst,
            Comparison::UpperBound,
            psd_ok,
            format!(
                "PSD holds on all 4 matrices; 8 ensembles x 10^4 paths whiten with {}{}",
                detail.join(", "),
                self.twin_note
            ),
        ))
    }

    /// Closed-form reference covariances hit their exact values, and the
    /// white-noise solution is a constant multiple of the bifractional
    /// reference across the whole time quadrant.
    fn reference_identities(&self) -> Result<CheckResult, fracheat::Error> {
        let pairs = [
            (bifbm_covariance(0.5, 1.0, 1.0, 1.0)?, 1.0),
            (bifbm_covariance(0.5, 1.0, 1.5, 0.7)?, 0.7),
            (bifbm_covariance(0.7, 0.5, 1.0, 1.0)?, 1.0),
            (
                white_noise_solution_covariance(1.0, 1.0)?,
                0.5641895835477563,
            ),
        ];
        let mut worst = 0f64;
        for &(got, want) in &pairs {
            worst = worst.max((got - want).abs() / want.abs());
        }
        let times = [0.3, 0.7, 1.1, 1.9];
        let mut ratios = Vec::new();
        for &t in &times {
            for &s in &times {
                ratios
                    .push(white_noise_solution_covariance(t, s)? / bifbm_covariance(0.5, 0.5, t, s)?);
            }
        }
        let lo = ratios.iter().cloned().fold(f64::MAX, f64::min);
        let hi = ratios.iter().cloned().fold(f64::MIN, f64::max);
        let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
        let spread = (hi - lo) / mean;
        worst = worst.max(spread);
        Ok(CheckResult::judged(
            "reference_identities",
            "closed-form reference covariances, and constancy of the white-noise/bifractional ratio",
            0.0,
            1e-12,
            worst,
            Comparison::UpperBound,
            true,
            format!(
                "4 closed forms and a 16-point ratio table; ratio {mean:.12} with relative spread {spread:.2e}"
            ),
        ))
    }
}

/// Dyadic lags `2^-fine .. 2^-coarse` in increasing order.
fn dyadic_lags(fine: i32, coarse: i32) -> Vec<f64> {
    (coarse..=fine).rev().map(|k| 2f64.powi(-k)).collect()
}

fn ols_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    sxy / sxx
}

/// Brute-force evaluation of the forced-solution temporal covariance as the
/// literal nested integral
///
/// `prefactor * int_0^t du int_0^s dv |u-v|^(2H-2) ((t-u)+(s-v))^(-(d-alpha)/2)`,
///
/// sharing nothing with the production reduction except the adaptive
/// quadrature primitives. The inner integral is split at the diagonal and
/// each piece is integrated against its `|u-v|^(2H-2)` weight exactly; the
/// outer integral treats the diagonal crossing as a breakpoint. Inner
/// failures are stashed in a cell (the quadrature interface is plain
/// `f64 -> f64`) and surface as the oracle's own error.
fn oracle_temporal(
    params: &ModelParams,
    t: f64,
    s: f64,
    q: &QuadratureSpec,
) -> Result<f64, fracheat::Error> {
    let (t, s) = if t >= s { (t, s) } else { (s, t) };
    let g = 2.0 * params.h() - 2.0;
    let p = 0.5 * (params.d() as f64 - params.alpha());
    let prefactor = alpha_h(params.h())
        * inv_two_pi_pow(params.d())
        * gaussian_radial_constant(params.d(), params.alpha());
    let failure: RefCell<Option<fracheat::Error>> = RefCell::new(None);
    let record = |r: Result<f64, fracheat::Error>| -> f64 {
        match r {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        }
    };
    let inner = |u: f64| -> f64 {
        if u <= s {
            let below = record(power_weight_integral(
                |z| (t + s - 2.0 * u + z).powf(-p),
                u,
                g,
                false,
                &[],
                q,
            ));
            let above = if s > u {
                record(power_weight_integral(
                    |w| (t + s - 2.0 * u - w).powf(-p),
                    s - u,
                    g,
                    false,
                    &[],
                    q,
                ))
            } else {
                0.0
            };
            below + above
        } else {
            record(adaptive_gk(
                |v| (u - v).powf(g) * (t + s - u - v).powf(-p),
                0.0,
                s,
                &[],
                q,
            ))
        }
    };
    let outer = adaptive_gk(inner, 0.0, t, &[s], q);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(prefactor * outer?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::RunConfig;

    #[test]
    fn check_names_match_battery_order() {
        let cfg = RunConfig::default();
        let params = cfg.model_params().unwrap();
        let battery = Battery::new(&cfg, &params);
        let cheap = [
            battery.sandwich().unwrap(),
            battery.reference_identities().unwrap(),
        ];
        assert_eq!(cheap[0].name, "sandwich");
        assert_eq!(cheap[1].name, "reference_identities");
        assert!(CHECK_NAMES.contains(&cheap[0].name.as_str()));
    }

    #[test]
    fn bessel_models_run_on_their_riesz_twin() {
        let mut cfg = RunConfig::default();
        cfg.model.kernel = crate::config::Kernel::Bessel;
        let params = cfg.model_params().unwrap();
        let battery = Battery::new(&cfg, &params);
        assert_eq!(battery.twin.kernel(), KernelFamily::Riesz);
        assert!(!battery.twin_note.is_empty());
        let result = battery.self_similarity().unwrap();
        assert!(result.passed, "twin substitution must keep exactness");
        assert!(result.detail.contains("Riesz twin"));
    }

    #[test]
    fn master_seed_moves_every_statistical_leg() {
        let cfg = RunConfig::default();
        let params = cfg.model_params().unwrap();
        let a = Battery::new(&cfg, &params);
        let mut cfg_b = cfg.clone();
        cfg_b.mc.master_seed = cfg.mc.master_seed + 1;
        let b = Battery::new(&cfg_b, &params);
        assert_ne!(a.seed(11), b.seed(11));
        assert_eq!(a.seed(11), a.master_seed.wrapping_add(11));
    }
}
