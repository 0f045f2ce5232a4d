//! Υ-fixed-point Picard iteration.
//!
//! One sweep maps `x` to `y` with `yᵢ = F(x_{σᵢ(1)}, …, x_{σᵢ(k)})` for every
//! component simultaneously (Jacobi style). Started from a point satisfying
//! `x⁰ᵢ ⪯ F(x⁰ ∘ σᵢ)` on `A` and `⪰` on `B`, a mixed-monotone `F` produces a
//! `⪯_k`-nondecreasing sequence; the contraction triple bounds the
//! displacements.

use log::{debug, warn};
use serde::Serialize;
use thiserror::Error;

use crate::contraction::ContractionTriple;
use crate::error::{check_len, Error, Result};
use crate::order::{max_metric, product_leq, OrderedMetricSpace, Partition, ProductPoint, Upsilon};

/// `F : X^k → X`.
///
/// Implementations must be pure: equal inputs give equal outputs.
pub trait ProductOperator<P> {
    fn arity(&self) -> usize;

    fn apply(&self, args: &[&P]) -> Result<P>;
}

impl<P, T: ProductOperator<P> + ?Sized> ProductOperator<P> for &T {
    fn arity(&self) -> usize {
        (**self).arity()
    }

    fn apply(&self, args: &[&P]) -> Result<P> {
        (**self).apply(args)
    }
}

/// Adapts a closure into a [`ProductOperator`].
pub struct FnOperator<F> {
    k: usize,
    f: F,
}

impl<F> FnOperator<F> {
    pub fn new(k: usize, f: F) -> Self {
        FnOperator { k, f }
    }
}

impl<P, F> ProductOperator<P> for FnOperator<F>
where
    F: Fn(&[&P]) -> Result<P>,
{
    fn arity(&self) -> usize {
        self.k
    }

    fn apply(&self, args: &[&P]) -> Result<P> {
        check_len(self.k, args.len())?;
        (self.f)(args)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterationConfig {
    /// Threshold on `d_k(xⁿ⁺¹, xⁿ)`.
    pub tol_step: f64,
    /// Threshold on the largest component residual.
    pub tol_residual: f64,
    pub max_iters: usize,
    pub check_monotone: bool,
    pub check_contraction_each_step: bool,
}

impl Default for IterationConfig {
    fn default() -> Self {
        IterationConfig {
            tol_step: 1e-10,
            tol_residual: 1e-8,
            max_iters: 100_000,
            check_monotone: true,
            check_contraction_each_step: true,
        }
    }
}

impl IterationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol_step > 0.0 && self.tol_step.is_finite()) {
            return Err(Error::invalid(format!(
                "tol_step = {} must be positive",
                self.tol_step
            )));
        }
        if !(self.tol_residual > 0.0 && self.tol_residual.is_finite()) {
            return Err(Error::invalid(format!(
                "tol_residual = {} must be positive",
                self.tol_residual
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::invalid("max_iters must be at least 1"));
        }
        Ok(())
    }
}

/// Where the product order first failed between consecutive iterates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotoneViolation {
    /// Sweep number `n`, comparing `xⁿ⁻¹` with `xⁿ`.
    pub iteration: usize,
    /// 1-based component.
    pub component: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationReport<P> {
    pub iterations: usize,
    pub converged: bool,
    /// `d_k(xⁿ, xⁿ⁻¹)` for `n = 1 ..= iterations`.
    pub step_history: Vec<f64>,
    /// Component residuals of `xⁿ` for `n = 1 ..= iterations`.
    pub residual_history: Vec<Vec<f64>>,
    /// Largest pairwise component distance of `xⁿ`.
    pub spread_history: Vec<f64>,
    pub monotone_ok: bool,
    pub first_monotone_violation: Option<MonotoneViolation>,
    /// Steps `n ≥ 2` with `ψ(dₙ) > θ(dₙ₋₁) − φ(dₙ₋₁) + slack`.
    pub contraction_violations: Vec<usize>,
    pub collapsed: bool,
    pub collapsed_spread: f64,
    pub fixed_point: ProductPoint<P>,
}

impl<P> IterationReport<P> {
    pub fn final_residual(&self) -> f64 {
        self.residual_history
            .last()
            .map(|r| r.iter().copied().fold(0.0, f64::max))
            .unwrap_or(f64::INFINITY)
    }

    /// `iter,step_dk,max_residual,collapsed_spread` rows.
    pub fn trace_csv(&self) -> String {
        use crate::space::fmt_f64;
        let mut out = String::from("iter,step_dk,max_residual,collapsed_spread\n");
        for n in 0..self.iterations {
            let res = self.residual_history[n].iter().copied().fold(0.0, f64::max);
            out.push_str(&format!(
                "{},{},{},{}\n",
                n + 1,
                fmt_f64(self.step_history[n]),
                fmt_f64(res),
                fmt_f64(self.spread_history[n])
            ));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError<P> {
    #[error("starting point violates the initial condition at component(s) {:?}", .0.failures)]
    InitialCondition(InitialConditionReport),

    #[error("no convergence after {} iterations (last step {:e})", .0.iterations, .0.step_history.last().copied().unwrap_or(f64::NAN))]
    NotConverged(Box<IterationReport<P>>),

    #[error(transparent)]
    Failed(#[from] Error),
}

/// `y` with `yᵢ = F(x ∘ σᵢ)`.
pub fn iterate_step<P, F>(op: &F, upsilon: &Upsilon, x: &ProductPoint<P>) -> Result<ProductPoint<P>>
where
    F: ProductOperator<P> + ?Sized,
{
    check_len(upsilon.k(), x.k())?;
    check_len(upsilon.k(), op.arity())?;
    (0..upsilon.k())
        .map(|i| {
            op.apply(&upsilon.permuted(i, x))
                .map_err(|e| e.in_component(i + 1))
        })
        .collect::<Result<Vec<P>>>()
        .map(ProductPoint::new)
}

/// `d(xᵢ, F(x ∘ σᵢ))` for every component.
pub fn residual<S, F>(
    space: &S,
    op: &F,
    upsilon: &Upsilon,
    x: &ProductPoint<S::Point>,
) -> Result<Vec<f64>>
where
    S: OrderedMetricSpace,
    F: ProductOperator<S::Point> + ?Sized,
{
    let y = iterate_step(op, upsilon, x)?;
    component_distances(space, x, &y)
}

fn component_distances<S: OrderedMetricSpace>(
    space: &S,
    x: &ProductPoint<S::Point>,
    y: &ProductPoint<S::Point>,
) -> Result<Vec<f64>> {
    x.iter()
        .zip(y.iter())
        .map(|(a, b)| space.distance(a, b))
        .collect()
}

/// `max_{i,j} d(xᵢ, xⱼ)`.
pub fn component_spread<S: OrderedMetricSpace>(
    space: &S,
    x: &ProductPoint<S::Point>,
) -> Result<f64> {
    let mut best = 0.0_f64;
    for i in 0..x.k() {
        for j in i + 1..x.k() {
            best = best.max(space.distance(&x[i], &x[j])?);
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InitialConditionReport {
    pub ok: bool,
    /// 1-based components where the condition fails.
    pub failures: Vec<usize>,
}

/// `x⁰ᵢ ⪯ F(x⁰ ∘ σᵢ)` for `i ∈ A`, `x⁰ᵢ ⪰ F(x⁰ ∘ σᵢ)` for `i ∈ B`.
pub fn check_initial_condition<S, F>(
    space: &S,
    op: &F,
    upsilon: &Upsilon,
    x0: &ProductPoint<S::Point>,
) -> Result<InitialConditionReport>
where
    S: OrderedMetricSpace,
    F: ProductOperator<S::Point> + ?Sized,
{
    let y = iterate_step(op, upsilon, x0)?;
    let partition = upsilon.partition();
    let mut failures = Vec::new();
    for i in 0..upsilon.k() {
        let ok = if partition.is_a(i) {
            space.leq(&x0[i], &y[i])?
        } else {
            space.geq(&x0[i], &y[i])?
        };
        if !ok {
            failures.push(i + 1);
        }
    }
    Ok(InitialConditionReport {
        ok: failures.is_empty(),
        failures,
    })
}

/// A single-coordinate move: `base` with coordinate `coordinate` (0-based)
/// replaced by `raised`, where `base[coordinate] ⪯ raised`.
#[derive(Debug, Clone)]
pub struct MonotoneSample<P> {
    pub base: ProductPoint<P>,
    pub coordinate: usize,
    pub raised: P,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotoneViolationSample {
    /// 0-based position in the sample list.
    pub sample: usize,
    /// 1-based coordinate.
    pub coordinate: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixedMonotoneReport {
    pub passed: bool,
    pub checked: usize,
    pub violations: Vec<MonotoneViolationSample>,
}

/// Nondecreasing in `A`-coordinates, nonincreasing in `B`-coordinates,
/// sampled on single-coordinate moves.
pub fn check_mixed_monotone_sampled<S, F>(
    space: &S,
    op: &F,
    partition: &Partition,
    samples: &[MonotoneSample<S::Point>],
) -> Result<MixedMonotoneReport>
where
    S: OrderedMetricSpace,
    F: ProductOperator<S::Point> + ?Sized,
{
    let mut violations = Vec::new();
    for (n, s) in samples.iter().enumerate() {
        check_len(partition.k(), s.base.k())?;
        if s.coordinate >= partition.k() {
            return Err(Error::invalid(format!(
                "sample {n}: coordinate {} is outside 1..={}",
                s.coordinate + 1,
                partition.k()
            )));
        }
        if !space.leq(&s.base[s.coordinate], &s.raised)? {
            return Err(Error::invalid(format!(
                "sample {n}: perturbation of coordinate {} is not ordered",
                s.coordinate + 1
            )));
        }
        let mut moved = s.base.components().to_vec();
        moved[s.coordinate] = s.raised.clone();
        let lo = op.apply(&s.base.iter().collect::<Vec<_>>())?;
        let hi = op.apply(&moved.iter().collect::<Vec<_>>())?;
        let ok = if partition.is_a(s.coordinate) {
            space.leq(&lo, &hi)?
        } else {
            space.geq(&lo, &hi)?
        };
        if !ok {
            violations.push(MonotoneViolationSample {
                sample: n,
                coordinate: s.coordinate + 1,
            });
        }
    }
    Ok(MixedMonotoneReport {
        passed: violations.is_empty(),
        checked: samples.len(),
        violations,
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolveOptions {
    /// Skip the initial-condition precondition (logged).
    pub force: bool,
}

/// Slack allowed in the per-step contraction diagnostic.
pub const STEP_CONTRACTION_SLACK: f64 = 1e-8;

/// Runs the Picard sweep from `x0` until both the step and the residual are
/// below tolerance.
pub fn solve<S, F>(
    space: &S,
    op: &F,
    upsilon: &Upsilon,
    x0: ProductPoint<S::Point>,
    config: &IterationConfig,
    triple: &ContractionTriple,
    options: SolveOptions,
) -> Result<IterationReport<S::Point>, SolveError<S::Point>>
where
    S: OrderedMetricSpace,
    F: ProductOperator<S::Point> + ?Sized,
{
    solve_observed(space, op, upsilon, x0, config, triple, options, |_, _| {})
}

/// [`solve`] with a callback receiving `(n, xⁿ)` for `n = 0, 1, …`.
#[allow(clippy::too_many_arguments)]
pub fn solve_observed<S, F, O>(
    space: &S,
    op: &F,
    upsilon: &Upsilon,
    x0: ProductPoint<S::Point>,
    config: &IterationConfig,
    triple: &ContractionTriple,
    options: SolveOptions,
    mut observe: O,
) -> Result<IterationReport<S::Point>, SolveError<S::Point>>
where
    S: OrderedMetricSpace,
    F: ProductOperator<S::Point> + ?Sized,
    O: FnMut(usize, &ProductPoint<S::Point>),
{
    config.validate()?;
    check_len(upsilon.k(), x0.k())?;
    if !triple.declared().all() {
        warn!(
            "contraction triple `{}` has undeclared analytic properties; semi-continuity is not verified",
            triple.name()
        );
    }

    let initial = check_initial_condition(space, op, upsilon, &x0)?;
    if !initial.ok {
        if options.force {
            warn!(
                "initial condition fails at component(s) {:?}; continuing because force is set",
                initial.failures
            );
        } else {
            return Err(SolveError::InitialCondition(initial));
        }
    }

    let partition = upsilon.partition();
    let mut step_history = Vec::new();
    let mut residual_history = Vec::new();
    let mut spread_history = Vec::new();
    let mut monotone_ok = true;
    let mut first_monotone_violation = None;
    let mut contraction_violations = Vec::new();

    observe(0, &x0);
    let mut current = x0;
    let mut next = iterate_step(op, upsilon, &current)?;
    let mut n = 0;
    loop {
        n += 1;
        observe(n, &next);
        let step = max_metric(space, &current, &next)?;
        let after = iterate_step(op, upsilon, &next)?;
        let res = component_distances(space, &next, &after)?;
        let max_res = res.iter().copied().fold(0.0, f64::max);
        let spread = component_spread(space, &next)?;

        if config.check_monotone && monotone_ok && !product_leq(space, partition, &current, &next)?
        {
            monotone_ok = false;
            let component = first_unordered_component(space, partition, &current, &next)?;
            warn!("iterates stop being ordered at sweep {n}, component {component}");
            first_monotone_violation = Some(MonotoneViolation {
                iteration: n,
                component,
            });
        }
        if config.check_contraction_each_step {
            if let Some(&prev) = step_history.last() {
                if triple.psi(step) > triple.budget(prev) + STEP_CONTRACTION_SLACK {
                    debug!("step {n}: displacement {step:e} exceeds the contraction budget");
                    contraction_violations.push(n);
                }
            }
        }

        step_history.push(step);
        residual_history.push(res);
        spread_history.push(spread);

        let converged = step <= config.tol_step && max_res <= config.tol_residual;
        if converged || n >= config.max_iters {
            let report = IterationReport {
                iterations: n,
                converged,
                step_history,
                residual_history,
                spread_history,
                monotone_ok,
                first_monotone_violation,
                contraction_violations,
                collapsed: spread <= config.tol_residual,
                collapsed_spread: spread,
                fixed_point: next,
            };
            return if converged {
                debug!("converged after {n} sweeps, residual {max_res:e}");
                Ok(report)
            } else {
                Err(SolveError::NotConverged(Box::new(report)))
            };
        }
        current = next;
        next = after;
    }
}

fn first_unordered_component<S: OrderedMetricSpace>(
    space: &S,
    partition: &Partition,
    x: &ProductPoint<S::Point>,
    y: &ProductPoint<S::Point>,
) -> Result<usize> {
    for i in 0..partition.k() {
        let ok = if partition.is_a(i) {
            space.leq(&x[i], &y[i])?
        } else {
            space.geq(&x[i], &y[i])?
        };
        if !ok {
            return Ok(i + 1);
        }
    }
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::order::RealLine;

    fn midpoint() -> FnOperator<impl Fn(&[&f64]) -> Result<f64>> {
        FnOperator::new(2, |a: &[&f64]| Ok((a[0] + a[1]) / 2.0))
    }

    fn pp(v: &[f64]) -> ProductPoint<f64> {
        ProductPoint::new(v.to_vec())
    }

    #[test]
    fn iterate_step_midpoint() {
        let u = Upsilon::coupled();
        let y = iterate_step(&midpoint(), &u, &pp(&[0.0, 1.0])).unwrap();
        assert_eq!(y, pp(&[0.5, 0.5]));
        let fixed = pp(&[0.5, 0.5]);
        assert_eq!(iterate_step(&midpoint(), &u, &fixed).unwrap(), fixed);
        assert!(iterate_step(&midpoint(), &u, &pp(&[0.0])).is_err());
    }

    #[test]
    fn iterate_step_tags_failing_component() {
        let u = Upsilon::coupled();
        let op = FnOperator::new(2, |a: &[&f64]| {
            if *a[0] > 0.5 {
                Err(Error::domain("too big"))
            } else {
                Ok(*a[0])
            }
        });
        let err = iterate_step(&op, &u, &pp(&[0.0, 1.0])).unwrap_err();
        assert!(matches!(err, Error::Component { component: 2, .. }));
    }

    #[test]
    fn residual_examples() {
        let r = RealLine::default();
        let u = Upsilon::coupled();
        assert_eq!(
            residual(&r, &midpoint(), &u, &pp(&[0.0, 1.0])).unwrap(),
            vec![0.5, 0.5]
        );
        assert_eq!(
            residual(&r, &midpoint(), &u, &pp(&[0.3, 0.3])).unwrap(),
            vec![0.0, 0.0]
        );
    }

    #[test]
    fn initial_condition_directions() {
        let r = RealLine::default();
        let u = Upsilon::coupled();
        // F(a, b) = (a - b)/4 + 1 has fixed point (1, 1) of the coupled system.
        let op = FnOperator::new(2, |a: &[&f64]| Ok((a[0] - a[1]) / 4.0 + 1.0));
        assert!(
            check_initial_condition(&r, &op, &u, &pp(&[1.0, 1.0]))
                .unwrap()
                .ok
        );
        // Lower start below, upper start above.
        assert!(
            check_initial_condition(&r, &op, &u, &pp(&[0.0, 2.0]))
                .unwrap()
                .ok
        );
        let rep = check_initial_condition(&r, &op, &u, &pp(&[2.0, 0.0])).unwrap();
        assert_eq!(rep.failures, vec![1, 2]);
    }

    #[test]
    fn mixed_monotone_examples() {
        let r = RealLine::default();
        let diff = FnOperator::new(2, |a: &[&f64]| Ok(a[0] - a[1]));
        let constant = FnOperator::new(2, |_: &[&f64]| Ok(7.0));
        let samples: Vec<MonotoneSample<f64>> = (0..2)
            .flat_map(|c| {
                [(-1.0, 0.5), (0.0, 3.0), (2.0, 2.0)]
                    .into_iter()
                    .map(move |(lo, hi)| MonotoneSample {
                        base: pp(&[lo, lo]),
                        coordinate: c,
                        raised: hi,
                    })
            })
            .collect();
        let p = Partition::new(2, &[1]).unwrap();
        assert!(
            check_mixed_monotone_sampled(&r, &constant, &p, &samples)
                .unwrap()
                .passed
        );
        assert!(
            check_mixed_monotone_sampled(&r, &diff, &p, &samples)
                .unwrap()
                .passed
        );

        let flipped = Partition::new(2, &[2]).unwrap();
        let rep = check_mixed_monotone_sampled(&r, &diff, &flipped, &samples).unwrap();
        assert!(!rep.passed);
        let coords: std::collections::BTreeSet<usize> =
            rep.violations.iter().map(|v| v.coordinate).collect();
        assert_eq!(coords.into_iter().collect::<Vec<_>>(), vec![1, 2]);

        let bad = vec![MonotoneSample {
            base: pp(&[1.0, 1.0]),
            coordinate: 0,
            raised: 0.0,
        }];
        assert!(check_mixed_monotone_sampled(&r, &diff, &p, &bad).is_err());
        let bad = vec![MonotoneSample {
            base: pp(&[1.0, 1.0]),
            coordinate: 2,
            raised: 3.0,
        }];
        assert!(check_mixed_monotone_sampled(&r, &diff, &p, &bad).is_err());
    }

    #[test]
    fn solve_from_fixed_point_takes_one_sweep() {
        let r = RealLine::default();
        let rep = solve(
            &r,
            &midpoint(),
            &Upsilon::coupled(),
            pp(&[0.25, 0.25]),
            &IterationConfig::default(),
            &ContractionTriple::log(),
            SolveOptions::default(),
        )
        .unwrap();
        assert_eq!(rep.iterations, 1);
        assert_eq!(rep.step_history, vec![0.0]);
        assert!(rep.collapsed);
    }

    #[test]
    fn solve_midpoint_converges() {
        let r = RealLine::default();
        let rep = solve(
            &r,
            &midpoint(),
            &Upsilon::coupled(),
            pp(&[0.0, 1.0]),
            &IterationConfig::default(),
            &ContractionTriple::log(),
            SolveOptions::default(),
        )
        .unwrap();
        assert_eq!(rep.fixed_point, pp(&[0.5, 0.5]));
        // The first sweep lands on the fixed point; the second confirms a zero step.
        assert_eq!(rep.iterations, 2);
        assert!(rep.converged && rep.collapsed && rep.monotone_ok);
        assert_eq!(rep.step_history.len(), rep.iterations);
    }

    #[test]
    fn solve_respects_max_iters_and_initial_condition() {
        let r = RealLine::default();
        let op = FnOperator::new(2, |a: &[&f64]| Ok((a[0] - a[1]) / 4.0 + 1.0));
        let cfg = IterationConfig {
            max_iters: 1,
            ..IterationConfig::default()
        };
        let err = solve(
            &r,
            &op,
            &Upsilon::coupled(),
            pp(&[0.0, 2.0]),
            &cfg,
            &ContractionTriple::log(),
            SolveOptions::default(),
        )
        .unwrap_err();
        match err {
            SolveError::NotConverged(rep) => {
                assert_eq!(rep.iterations, 1);
                assert!(!rep.converged);
            }
            other => panic!("unexpected {other:?}"),
        }

        let err = solve(
            &r,
            &op,
            &Upsilon::coupled(),
            pp(&[2.0, 0.0]),
            &IterationConfig::default(),
            &ContractionTriple::log(),
            SolveOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, SolveError::InitialCondition(_)));

        let rep = solve(
            &r,
            &op,
            &Upsilon::coupled(),
            pp(&[2.0, 0.0]),
            &IterationConfig::default(),
            &ContractionTriple::log(),
            SolveOptions { force: true },
        )
        .unwrap();
        assert!((rep.fixed_point[0] - 1.0).abs() < 1e-9);
        assert!(!rep.monotone_ok);
    }

    #[test]
    fn solve_rejects_bad_config() {
        let cfg = IterationConfig {
            tol_step: 0.0,
            ..IterationConfig::default()
        };
        let err = solve(
            &RealLine::default(),
            &midpoint(),
            &Upsilon::coupled(),
            pp(&[0.0, 1.0]),
            &cfg,
            &ContractionTriple::log(),
            SolveOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, SolveError::Failed(Error::Invalid(_))));
    }

    #[test]
    fn steps_obey_the_majorant_on_a_synthetic_operator() {
        // Mixed monotone and contractive with constant 1/2 on the reals.
        let r = RealLine::default();
        let op = FnOperator::new(2, |a: &[&f64]| Ok((a[0] - a[1]) / 4.0 + 1.0));
        let rep = solve(
            &r,
            &op,
            &Upsilon::coupled(),
            pp(&[-3.0, 5.0]),
            &IterationConfig::default(),
            &ContractionTriple::log(),
            SolveOptions::default(),
        )
        .unwrap();
        assert!(rep.monotone_ok);
        assert!(rep.contraction_violations.is_empty());
        let bound = ContractionTriple::log()
            .gain_bound_sequence(rep.step_history[0], rep.iterations - 1)
            .unwrap();
        for (s, b) in rep.step_history.iter().zip(&bound) {
            assert!(*s <= b + 1e-12);
        }
        let trace = rep.trace_csv();
        assert!(trace.starts_with("iter,step_dk,max_residual,collapsed_spread\n"));
        assert_eq!(trace.lines().count(), rep.iterations + 1);
    }

    #[test]
    fn solve_is_deterministic() {
        let r = RealLine::default();
        let op = FnOperator::new(2, |a: &[&f64]| Ok((a[0] - a[1]).sin() / 3.0 + 0.1));
        let run = || {
            solve(
                &r,
                &op,
                &Upsilon::coupled(),
                pp(&[-1.0, 1.0]),
                &IterationConfig::default(),
                &ContractionTriple::log(),
                SolveOptions::default(),
            )
            .unwrap()
        };
        assert_eq!(run(), run());
    }
}
