//! Config-driven `check`, `solve` and `verify` commands.
//!
//! Each command returns a [`Status`] whose code is the process exit code.
//! Output is a pure function of the config and seed.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use log::{info, warn};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::contraction::{verify_contraction_sampled, ContractionTriple, PairSlack};
use crate::engine::{
    check_mixed_monotone_sampled, solve, IterationConfig, IterationReport, MixedMonotoneReport,
    SolveError, SolveOptions,
};
use crate::error::{Error, Result};
use crate::hammerstein::{
    check_assumption_d, check_assumption_e, check_exp_inequality, check_finite_samples,
    collapsed_residual, default_band_samples, example_forcing, example_initial_point, ln_shift,
    log_kernel, neg_ln_product, AssumptionDReport, AssumptionEReport, ForcingFn,
    HammersteinOperator, HammersteinProblem, KernelFn, NonlinearityFn, CHECK_SLACK,
};
use crate::order::{ProductPoint, Upsilon};
use crate::sampling::{monotone_samples, ordered_pair};
use crate::space::{
    make_quadrature, sup_metric, write_csv, Grid, GridFunction, GridKind, GridSpace, QuadratureKind,
};

pub const DEFAULT_SEED: u64 = 42;

/// Width of the sampling box `[floor, floor + SAMPLE_WIDTH]`.
pub const SAMPLE_WIDTH: f64 = 9.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    CheckFailed,
    ConfigError,
    NotConverged,
}

impl Status {
    pub fn code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::CheckFailed => 1,
            Status::ConfigError => 2,
            Status::NotConverged => 3,
        }
    }

    fn from_pass(ok: bool) -> Self {
        if ok {
            Status::Ok
        } else {
            Status::CheckFailed
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemKind {
    PaperExample,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Intervals (uniform) or panels (Gauss–Legendre).
    pub n: usize,
    pub kind: GridKind,
    #[serde(default = "default_points")]
    pub points: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            n: 200,
            kind: GridKind::Uniform,
            points: default_points(),
        }
    }
}

fn default_points() -> usize {
    8
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureConfig {
    pub panels: usize,
    pub points: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            panels: 32,
            points: 8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub step: f64,
    pub residual: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        let d = IterationConfig::default();
        Tolerances {
            step: d.tol_step,
            residual: d.tol_residual,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "kebab-case", deny_unknown_fields)]
pub enum KernelSpec {
    /// `1 / (2 ln T · t s)`.
    Paper,
    Constant {
        value: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlinearitySpec {
    pub id: NonlinearityId,
    #[serde(default = "one")]
    pub scale: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NonlinearityId {
    /// `ln(s + x)`
    LnShift,
    /// `−(ln s + ln x)`
    NegLnProduct,
    /// `x`
    Linear,
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ForcingSpec {
    Paper { alpha: f64 },
    Linear { slope: f64, intercept: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialSpec {
    Linear { slope: f64, intercept: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomProblem {
    pub kernel: KernelSpec,
    pub nonlinearities: Vec<NonlinearitySpec>,
    pub forcing: ForcingSpec,
    #[serde(default = "one")]
    pub domain_floor: f64,
    /// Starting tuple; defaults to the example's `(max(αt/2, 1), 3αt/2)`
    /// when the forcing is `paper` and `m = 1`.
    #[serde(default)]
    pub initial: Option<Vec<InitialSpec>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemKind,
    #[serde(rename = "T", default = "default_t")]
    pub t_end: f64,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default = "default_m")]
    pub m: usize,
    #[serde(default)]
    pub eta: Option<Vec<f64>>,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    /// Sample count for the sampled property checks.
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub custom: Option<CustomProblem>,
}

fn one() -> f64 {
    1.0
}

fn default_t() -> f64 {
    2.0
}

fn default_m() -> usize {
    1
}

fn default_max_iters() -> usize {
    IterationConfig::default().max_iters
}

fn default_samples() -> usize {
    200
}

const DEFAULT_ALPHA: f64 = 2.0;

impl RunConfig {
    /// The paper example with defaults.
    pub fn paper_example(alpha: f64, t_end: f64) -> Self {
        RunConfig {
            problem: ProblemKind::PaperExample,
            t_end,
            alpha: Some(alpha),
            m: 1,
            eta: None,
            grid: GridConfig::default(),
            quadrature: QuadratureConfig::default(),
            tolerances: Tolerances::default(),
            max_iters: default_max_iters(),
            samples: default_samples(),
            custom: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::invalid(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::invalid(format!("cannot read {}: {e}", path.display())))?;
        RunConfig::from_json(&text)
    }

    /// Applies the `--alpha` / `--T` shortcuts, which win over the file.
    pub fn with_overrides(mut self, alpha: Option<f64>, t_end: Option<f64>) -> Self {
        if alpha.is_some() {
            self.alpha = alpha;
        }
        if let Some(t) = t_end {
            self.t_end = t;
        }
        self
    }

    pub fn iteration_config(&self) -> IterationConfig {
        IterationConfig {
            tol_step: self.tolerances.step,
            tol_residual: self.tolerances.residual,
            max_iters: self.max_iters,
            ..IterationConfig::default()
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha.unwrap_or(DEFAULT_ALPHA)
    }

    /// Builds and validates everything a command needs.
    pub fn prepare(&self) -> Result<Prepared> {
        self.iteration_config().validate()?;
        if self.samples == 0 {
            return Err(Error::invalid("samples must be positive"));
        }
        let grid = Grid::new(self.grid.kind, self.t_end, self.grid.n, self.grid.points)?;
        let rule = make_quadrature(
            QuadratureKind::GaussLegendre {
                panels: self.quadrature.panels,
                points: self.quadrature.points,
            },
            self.t_end,
        )?;
        let (problem, initial, substituted, exact_alpha) = match self.problem {
            ProblemKind::PaperExample => {
                if self.m != 1 {
                    return Err(Error::invalid(format!(
                        "the paper example has m = 1, got m = {}",
                        self.m
                    )));
                }
                if self.custom.is_some() {
                    return Err(Error::invalid(
                        "`custom` is only allowed with problem = \"custom\"",
                    ));
                }
                let alpha = self.alpha();
                let problem = HammersteinProblem::paper_example(alpha, self.t_end)?;
                let (y0, substituted) = example_initial_point(alpha, &grid)?;
                (problem, y0, substituted, Some(alpha))
            }
            ProblemKind::Custom => {
                let custom = self.custom.as_ref().ok_or_else(|| {
                    Error::invalid("problem = \"custom\" needs a `custom` section")
                })?;
                self.build_custom(custom, &grid)?
            }
        };
        let problem = match &self.eta {
            Some(etas) => problem.with_etas(etas.clone())?,
            None => problem,
        };
        if substituted {
            info!("alpha < 2: lower start component floored at the domain boundary 1");
        }
        let upsilon = Upsilon::cyclic_shift(problem.m())?;
        let op = HammersteinOperator::new(problem, grid, rule)?;
        Ok(Prepared {
            op,
            upsilon,
            initial,
            substituted,
            exact_alpha,
        })
    }

    fn build_custom(
        &self,
        custom: &CustomProblem,
        grid: &Arc<Grid>,
    ) -> Result<(
        HammersteinProblem,
        ProductPoint<GridFunction>,
        bool,
        Option<f64>,
    )> {
        let k = 2 * self.m;
        if custom.nonlinearities.len() != k {
            return Err(Error::invalid(format!(
                "m = {} needs {k} nonlinearities, got {}",
                self.m,
                custom.nonlinearities.len()
            )));
        }
        let t_end = self.t_end;
        let kernel: KernelFn = match custom.kernel {
            KernelSpec::Paper => log_kernel(t_end),
            KernelSpec::Constant { value } => Arc::new(move |_, _| value),
        };
        let nonlinearities: Vec<NonlinearityFn> = custom
            .nonlinearities
            .iter()
            .map(|spec| {
                let c = spec.scale;
                let f: NonlinearityFn = match spec.id {
                    NonlinearityId::LnShift => Arc::new(move |s, x| c * ln_shift(s, x)),
                    NonlinearityId::NegLnProduct => Arc::new(move |s, x| c * neg_ln_product(s, x)),
                    NonlinearityId::Linear => Arc::new(move |_, x| c * x),
                    NonlinearityId::Zero => Arc::new(|_, _| 0.0),
                };
                f
            })
            .collect();
        let (forcing, forcing_alpha): (ForcingFn, Option<f64>) = match custom.forcing {
            ForcingSpec::Paper { alpha } => {
                if !(alpha.is_finite() && alpha > 1.0) {
                    return Err(Error::domain(format!("alpha = {alpha} must exceed 1")));
                }
                (example_forcing(alpha, t_end), Some(alpha))
            }
            ForcingSpec::Linear { slope, intercept } => {
                (Arc::new(move |t| slope * t + intercept), None)
            }
        };
        let problem = HammersteinProblem::new(
            "custom",
            t_end,
            kernel,
            nonlinearities,
            forcing,
            vec![1.0; k],
            custom.domain_floor,
        )?;
        let (initial, substituted) = match (&custom.initial, forcing_alpha) {
            (Some(specs), _) => {
                if specs.len() != k {
                    return Err(Error::invalid(format!(
                        "need {k} initial components, got {}",
                        specs.len()
                    )));
                }
                let comps = specs
                    .iter()
                    .map(|InitialSpec::Linear { slope, intercept }| {
                        GridFunction::sample(grid, |t| slope * t + intercept)
                    })
                    .collect::<Result<Vec<_>>>()?;
                (ProductPoint::new(comps), false)
            }
            (None, Some(alpha)) if self.m == 1 => example_initial_point(alpha, grid)?,
            (None, _) => return Err(Error::invalid("custom problem needs `initial`")),
        };
        Ok((problem, initial, substituted, None))
    }
}

/// A validated problem ready to run.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub op: HammersteinOperator,
    pub upsilon: Upsilon,
    pub initial: ProductPoint<GridFunction>,
    pub substituted: bool,
    /// `α` when the exact solution `αt` is known.
    pub exact_alpha: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AssumptionReport {
    pub problem: String,
    #[serde(rename = "T")]
    pub t_end: f64,
    pub m: usize,
    pub passed: bool,
    pub kernel_bound: f64,
    pub finite_samples: bool,
    pub assumption_d: AssumptionDReport,
    pub assumption_e: AssumptionEReport,
    pub mixed_monotone: MixedMonotoneReport,
    /// `(2 + 3α)/(1 + α) < e^α`, for the example only.
    pub exp_inequality: Option<bool>,
    pub start_point_substituted: bool,
}

fn mixed_monotone(prep: &Prepared, seed: u64, count: usize) -> Result<MixedMonotoneReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let floor = prep.op.problem().domain_floor();
    let k = prep.upsilon.k();
    let samples = monotone_samples(
        &mut rng,
        prep.op.grid(),
        k,
        floor,
        floor + SAMPLE_WIDTH,
        count,
    )?;
    check_mixed_monotone_sampled(
        &GridSpace::default(),
        &prep.op,
        prep.upsilon.partition(),
        &samples,
    )
}

pub fn assumption_report(prep: &Prepared, seed: u64, samples: usize) -> Result<AssumptionReport> {
    let problem = prep.op.problem();
    let (pairs, s) = default_band_samples(problem);
    let d = check_assumption_d(&prep.op, &pairs, &s)?;
    let e = check_assumption_e(&prep.op, &prep.initial, CHECK_SLACK)?;
    let finite_samples = check_finite_samples(&prep.op);
    let mm = mixed_monotone(prep, seed, samples)?;
    let exp_inequality = prep.exact_alpha.map(check_exp_inequality);
    let passed =
        d.passed && e.passed && finite_samples && mm.passed && exp_inequality.unwrap_or(true);
    Ok(AssumptionReport {
        problem: problem.name().to_string(),
        t_end: problem.t_end(),
        m: problem.m(),
        passed,
        kernel_bound: d.kernel_bound,
        finite_samples,
        assumption_d: d,
        assumption_e: e,
        mixed_monotone: mm,
        exp_inequality,
        start_point_substituted: prep.substituted,
    })
}

/// Prints the assumption report as JSON; `Ok` iff every check passes.
pub fn cmd_check(config: &RunConfig, seed: u64, out: &mut dyn Write) -> Result<Status> {
    let prep = config.prepare()?;
    let report = assumption_report(&prep, seed, config.samples)?;
    write_json(out, &report)?;
    Ok(Status::from_pass(report.passed))
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub config: RunConfig,
    pub converged: bool,
    pub iterations: usize,
    pub final_residual: f64,
    /// `sup |x₁ − 𝔸(x₁, …, x₁)|` of the exported solution.
    pub collapsed_residual: f64,
    pub collapsed: bool,
    pub collapsed_spread: f64,
    pub monotone_ok: bool,
    pub first_monotone_violation: Option<crate::engine::MonotoneViolation>,
    pub contraction_violations: Vec<usize>,
    /// `sup |x₁(t) − αt|` when the exact solution is known.
    pub sup_error: Option<f64>,
    pub start_point_substituted: bool,
    pub step_history: Vec<f64>,
    pub residual_history: Vec<Vec<f64>>,
    pub spread_history: Vec<f64>,
}

impl SolveReport {
    fn new(
        config: &RunConfig,
        prep: &Prepared,
        rep: &IterationReport<GridFunction>,
    ) -> Result<Self> {
        let x = &rep.fixed_point[0];
        let sup_error = match prep.exact_alpha {
            Some(alpha) => Some(sup_metric(
                x,
                &GridFunction::sample(x.grid(), |t| alpha * t)?,
            )?),
            None => None,
        };
        Ok(SolveReport {
            config: config.clone(),
            converged: rep.converged,
            iterations: rep.iterations,
            final_residual: rep.final_residual(),
            collapsed_residual: collapsed_residual(&prep.op, x)?,
            collapsed: rep.collapsed,
            collapsed_spread: rep.collapsed_spread,
            monotone_ok: rep.monotone_ok,
            first_monotone_violation: rep.first_monotone_violation.clone(),
            contraction_violations: rep.contraction_violations.clone(),
            sup_error,
            start_point_substituted: prep.substituted,
            step_history: rep.step_history.clone(),
            residual_history: rep.residual_history.clone(),
            spread_history: rep.spread_history.clone(),
        })
    }
}

/// Solves and writes `solution.csv`, `trace.csv` and `report.json` into
/// `out_dir`. A failed check blocks the solve unless `force` is set.
pub fn cmd_solve(config: &RunConfig, out_dir: &Path, force: bool, seed: u64) -> Result<Status> {
    let prep = config.prepare()?;
    let checks = assumption_report(&prep, seed, config.samples)?;
    if !checks.passed {
        if force {
            warn!("assumption checks failed; solving anyway because --force is set");
        } else {
            warn!("assumption checks failed; rerun `check` for details or pass --force");
            return Ok(Status::CheckFailed);
        }
    }
    let result = solve(
        &GridSpace::default(),
        &prep.op,
        &prep.upsilon,
        prep.initial.clone(),
        &config.iteration_config(),
        &ContractionTriple::log(),
        SolveOptions { force },
    );
    let (rep, status) = match result {
        Ok(rep) => (rep, Status::Ok),
        Err(SolveError::NotConverged(rep)) => (*rep, Status::NotConverged),
        Err(SolveError::InitialCondition(r)) => {
            warn!(
                "starting point violates the initial condition at {:?}",
                r.failures
            );
            return Ok(Status::CheckFailed);
        }
        Err(SolveError::Failed(e)) => return Err(e),
    };
    fs::create_dir_all(out_dir).map_err(io_error)?;
    let mut csv = Vec::new();
    write_csv(&rep.fixed_point[0], &mut csv).map_err(io_error)?;
    fs::write(out_dir.join("solution.csv"), csv).map_err(io_error)?;
    fs::write(out_dir.join("trace.csv"), rep.trace_csv()).map_err(io_error)?;
    let summary = SolveReport::new(config, &prep, &rep)?;
    let mut json = Vec::new();
    write_json(&mut json, &summary)?;
    fs::write(out_dir.join("report.json"), json).map_err(io_error)?;
    if status == Status::NotConverged {
        warn!(
            "no convergence after {} sweeps; partial trace written",
            rep.iterations
        );
    }
    Ok(status)
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub passed: bool,
    pub contraction_passed: bool,
    pub pairs: usize,
    pub min_slack: f64,
    pub contraction_violations: Vec<PairSlack>,
    pub mixed_monotone: MixedMonotoneReport,
}

/// Seeded sampled checks of the contraction inequality (log triple) and of
/// mixed monotonicity.
pub fn verify(prep: &Prepared, seed: u64, samples: usize) -> Result<VerifyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let floor = prep.op.problem().domain_floor();
    let partition = prep.upsilon.partition();
    let pairs = (0..samples)
        .map(|_| {
            ordered_pair(
                &mut rng,
                prep.op.grid(),
                partition,
                floor,
                floor + SAMPLE_WIDTH,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let contraction = verify_contraction_sampled(
        &GridSpace::default(),
        &prep.op,
        partition,
        &pairs,
        &ContractionTriple::log(),
        1e-8,
    )?;
    let mm = mixed_monotone(prep, seed.wrapping_add(1), samples)?;
    Ok(VerifyReport {
        seed,
        passed: contraction.passed && mm.passed,
        contraction_passed: contraction.passed,
        pairs: contraction.slacks.len(),
        min_slack: contraction.min_slack,
        contraction_violations: contraction.violations,
        mixed_monotone: mm,
    })
}

pub fn cmd_verify(config: &RunConfig, seed: u64, out: &mut dyn Write) -> Result<Status> {
    let prep = config.prepare()?;
    let report = verify(&prep, seed, config.samples)?;
    write_json(out, &report)?;
    Ok(Status::from_pass(report.passed))
}

fn write_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)
        .map_err(|e| Error::Numerical(format!("json: {e}")))?;
    writeln!(out).map_err(io_error)
}

fn io_error(e: std::io::Error) -> Error {
    Error::invalid(format!("i/o: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coarse(alpha: f64, t_end: f64) -> RunConfig {
        let mut c = RunConfig::paper_example(alpha, t_end);
        c.grid.n = 40;
        c.samples = 16;
        c
    }

    #[test]
    fn config_parsing_defaults() {
        let c = RunConfig::from_json(r#"{"problem": "paper-example"}"#).unwrap();
        assert_eq!(c.t_end, 2.0);
        assert_eq!(c.alpha(), 2.0);
        assert_eq!(c.grid, GridConfig::default());
        assert_eq!(c.max_iters, 100_000);
        assert!(RunConfig::from_json("{").is_err());
        assert!(RunConfig::from_json(r#"{"problem": "paper-example", "bogus": 1}"#).is_err());
        assert!(RunConfig::from_json(r#"{"problem": "other"}"#).is_err());
    }

    #[test]
    fn overrides_win() {
        let c = RunConfig::paper_example(3.0, 5.0).with_overrides(Some(4.0), None);
        assert_eq!((c.alpha(), c.t_end), (4.0, 5.0));
    }

    #[test]
    fn invalid_configs_are_rejected_before_running() {
        let mut c = coarse(2.0, 2.0);
        c.m = 2;
        assert!(c.prepare().is_err());
        let mut c = coarse(0.5, 2.0);
        assert!(c.prepare().is_err());
        c.alpha = Some(2.0);
        c.t_end = 1.0;
        assert!(c.prepare().is_err());
        let mut c = coarse(2.0, 2.0);
        c.problem = ProblemKind::Custom;
        assert!(c.prepare().is_err());
    }

    #[test]
    fn check_passes_on_example_and_fails_with_large_eta() {
        let mut sink = Vec::new();
        assert_eq!(
            cmd_check(&coarse(2.0, 2.0), 1, &mut sink).unwrap(),
            Status::Ok
        );
        let mut c = coarse(2.0, 2.0);
        c.eta = Some(vec![5.0, 1.0]);
        let mut sink = Vec::new();
        assert_eq!(cmd_check(&c, 1, &mut sink).unwrap(), Status::CheckFailed);
        let v: serde_json::Value = serde_json::from_slice(&sink).unwrap();
        assert_eq!(v["assumption_d"]["eta_ok"], false);
    }

    #[test]
    fn custom_problem_matching_the_example() {
        let text = r#"{
            "problem": "custom", "T": 2.0,
            "grid": {"n": 40, "kind": "uniform"}, "samples": 16,
            "custom": {
                "kernel": {"id": "paper"},
                "nonlinearities": [{"id": "ln-shift"}, {"id": "neg-ln-product"}],
                "forcing": {"id": "paper", "alpha": 2.0}
            }
        }"#;
        let c = RunConfig::from_json(text).unwrap();
        let mut sink = Vec::new();
        assert_eq!(cmd_check(&c, 1, &mut sink).unwrap(), Status::Ok);
    }

    #[test]
    fn status_codes() {
        let codes: Vec<i32> = [
            Status::Ok,
            Status::CheckFailed,
            Status::ConfigError,
            Status::NotConverged,
        ]
        .iter()
        .map(|s| s.code())
        .collect();
        assert_eq!(codes, vec![0, 1, 2, 3]);
    }
}
