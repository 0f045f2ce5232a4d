//! Hammerstein equations `x(t) = ∫₁^T G(t,s) Σᵢ fᵢ(s, x(s)) ds + p(t)` with
//! `2m` nonlinearities, odd-indexed ones nondecreasing and even-indexed ones
//! nonincreasing in `x`.
//!
//! [`HammersteinOperator`] discretises the product operator
//! `𝔸(x₁, …, x₂ₘ)(t) = ∫ G(t,s) Σᵢ fᵢ(s, xᵢ(s)) ds + p(t)` on a collocation
//! grid. Its Υ-fixed point for the cyclic shift collapses to the solution.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::engine::{iterate_step, ProductOperator};
use crate::error::{check_len, Error, Result};
use crate::order::{ProductPoint, Upsilon};
use crate::space::{sup_metric, Grid, GridFunction, QuadratureRule};

pub type KernelFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type NonlinearityFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type ForcingFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Absolute slack used by the band and initial-point checks.
pub const CHECK_SLACK: f64 = 1e-12;

/// Relative slack on `max η · kernel_bound ≤ 1`. The example saturates this
/// bound exactly, so the computed bound is only equal to 1 up to roundoff.
pub const ETA_BOUND_RTOL: f64 = 1e-10;

#[derive(Clone)]
pub struct HammersteinProblem {
    name: String,
    t_end: f64,
    kernel: KernelFn,
    nonlinearities: Vec<NonlinearityFn>,
    forcing: ForcingFn,
    etas: Vec<f64>,
    domain_floor: f64,
}

impl fmt::Debug for HammersteinProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HammersteinProblem")
            .field("name", &self.name)
            .field("t_end", &self.t_end)
            .field("m", &self.m())
            .field("etas", &self.etas)
            .field("domain_floor", &self.domain_floor)
            .finish()
    }
}

impl HammersteinProblem {
    pub fn new(
        name: impl Into<String>,
        t_end: f64,
        kernel: KernelFn,
        nonlinearities: Vec<NonlinearityFn>,
        forcing: ForcingFn,
        etas: Vec<f64>,
        domain_floor: f64,
    ) -> Result<Self> {
        if !(t_end.is_finite() && t_end > 1.0) {
            return Err(Error::invalid(format!("T = {t_end} must exceed 1")));
        }
        let count = nonlinearities.len();
        if count < 2 || !count.is_multiple_of(2) {
            return Err(Error::invalid(format!(
                "need 2m >= 2 nonlinearities, got {count}"
            )));
        }
        check_len(count, etas.len())?;
        if let Some(e) = etas.iter().find(|e| !(e.is_finite() && **e > 0.0)) {
            return Err(Error::invalid(format!("eta = {e} must be positive")));
        }
        if domain_floor.is_nan() {
            return Err(Error::invalid("domain floor is NaN"));
        }
        Ok(HammersteinProblem {
            name: name.into(),
            t_end,
            kernel,
            nonlinearities,
            forcing,
            etas,
            domain_floor,
        })
    }

    /// `x(t) = (1 / (2 ln T)) ∫₁^T (1/(ts)) ln((s + x(s)) / (s x(s))) ds
    ///        + αt − ln((1+α) / (α√T)) / (2t)`,
    /// split as `f₁(s,x) = ln(s + x)`, `f₂(s,x) = −(ln s + ln x)`,
    /// `G(t,s) = 1/(2 ln T · ts)`. Exact solution `x(t) = αt`.
    pub fn paper_example(alpha: f64, t_end: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 1.0) {
            return Err(Error::domain(format!("alpha = {alpha} must exceed 1")));
        }
        HammersteinProblem::new(
            "paper-example",
            t_end,
            log_kernel(t_end),
            vec![Arc::new(ln_shift), Arc::new(neg_ln_product)],
            example_forcing(alpha, t_end),
            vec![1.0, 1.0],
            1.0,
        )
    }

    pub fn with_etas(mut self, etas: Vec<f64>) -> Result<Self> {
        check_len(self.nonlinearities.len(), etas.len())?;
        if let Some(e) = etas.iter().find(|e| !(e.is_finite() && **e > 0.0)) {
            return Err(Error::invalid(format!("eta = {e} must be positive")));
        }
        self.etas = etas;
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn m(&self) -> usize {
        self.nonlinearities.len() / 2
    }

    pub fn etas(&self) -> &[f64] {
        &self.etas
    }

    pub fn domain_floor(&self) -> f64 {
        self.domain_floor
    }

    pub fn kernel(&self, t: f64, s: f64) -> f64 {
        (self.kernel)(t, s)
    }

    /// `fᵢ(s, x)` for 0-based `i`.
    pub fn nonlinearity(&self, i: usize, s: f64, x: f64) -> f64 {
        (self.nonlinearities[i])(s, x)
    }

    pub fn forcing(&self, t: f64) -> f64 {
        (self.forcing)(t)
    }
}

/// `f(s, x) = ln(s + x)`.
pub fn ln_shift(s: f64, x: f64) -> f64 {
    (s + x).ln()
}

/// `f(s, x) = −(ln s + ln x)`.
pub fn neg_ln_product(s: f64, x: f64) -> f64 {
    -(s.ln() + x.ln())
}

/// `G(t, s) = 1 / (2 ln T · t s)`.
pub fn log_kernel(t_end: f64) -> KernelFn {
    let c = 0.5 / t_end.ln();
    Arc::new(move |t, s| c / (t * s))
}

/// `p(t) = αt − ln((1+α) / (α√T)) / (2t)`.
pub fn example_forcing(alpha: f64, t_end: f64) -> ForcingFn {
    let c = ((1.0 + alpha) / (alpha * t_end.sqrt())).ln();
    Arc::new(move |t| alpha * t - 0.5 * c / t)
}

/// The discretised operator `𝔸` on a collocation grid.
#[derive(Clone)]
pub struct HammersteinOperator {
    problem: HammersteinProblem,
    grid: Arc<Grid>,
    rule: QuadratureRule,
    /// Row `j` holds `w_q G(t_j, s_q)`.
    weighted_kernel: Vec<f64>,
    forcing: Vec<f64>,
}

impl fmt::Debug for HammersteinOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HammersteinOperator")
            .field("problem", &self.problem)
            .field("nodes", &self.grid.len())
            .field("quadrature_nodes", &self.rule.len())
            .finish()
    }
}

impl HammersteinOperator {
    /// Tabulates kernel and forcing. The kernel must be finite and
    /// nonnegative at every (collocation, quadrature) node pair.
    pub fn new(problem: HammersteinProblem, grid: Arc<Grid>, rule: QuadratureRule) -> Result<Self> {
        let t_end = problem.t_end();
        if grid.t_end() != t_end {
            return Err(Error::invalid(format!(
                "grid ends at {}, problem at {t_end}",
                grid.t_end()
            )));
        }
        if rule.bounds() != (1.0, t_end) {
            return Err(Error::invalid(format!(
                "quadrature covers {:?}, expected [1, {t_end}]",
                rule.bounds()
            )));
        }
        let mut weighted_kernel = Vec::with_capacity(grid.len() * rule.len());
        for &t in grid.nodes() {
            for (&s, &w) in rule.nodes().iter().zip(rule.weights()) {
                let g = problem.kernel(t, s);
                if !g.is_finite() || g < 0.0 {
                    return Err(Error::invalid(format!(
                        "kernel G({t}, {s}) = {g} is not a finite nonnegative value"
                    )));
                }
                weighted_kernel.push(w * g);
            }
        }
        let forcing: Vec<f64> = grid.nodes().iter().map(|&t| problem.forcing(t)).collect();
        if let Some(j) = forcing.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!(
                "forcing p({}) is not finite",
                grid.nodes()[j]
            )));
        }
        Ok(HammersteinOperator {
            problem,
            grid,
            rule,
            weighted_kernel,
            forcing,
        })
    }

    pub fn problem(&self) -> &HammersteinProblem {
        &self.problem
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    /// `2m · max_j ∫₁^T G(t_j, s) ds`.
    pub fn kernel_bound(&self) -> f64 {
        let q = self.rule.len();
        let best = self
            .weighted_kernel
            .chunks(q)
            .map(|row| row.iter().sum::<f64>())
            .fold(0.0, f64::max);
        2.0 * self.problem.m() as f64 * best
    }

    /// `∫ G(t_j, s) h(s) ds + p(t_j)` for `h` sampled at the quadrature nodes.
    pub fn integrate_with_forcing(&self, h: &[f64]) -> Result<GridFunction> {
        check_len(self.rule.len(), h.len())?;
        let values = self
            .weighted_kernel
            .chunks(h.len())
            .zip(&self.forcing)
            .map(|(row, p)| row.iter().zip(h).map(|(k, v)| k * v).sum::<f64>() + p)
            .collect();
        GridFunction::new(self.grid.clone(), values)
    }

    /// `Σᵢ f_{nl[i]}(s_q, x_{arg[i]}(s_q))` at every quadrature node, where
    /// the pairing of nonlinearities with components is given by `args`
    /// (`args[i]` is the 0-based component fed to `fᵢ`).
    fn integrand(&self, components: &[&GridFunction], args: &[usize]) -> Result<Vec<f64>> {
        let floor = self.problem.domain_floor();
        let mut sampled = Vec::with_capacity(components.len());
        for (c, u) in components.iter().enumerate() {
            if !Arc::ptr_eq(u.grid(), &self.grid) && **u.grid() != *self.grid {
                return Err(Error::GridMismatch);
            }
            if let Some(j) = u.values().iter().position(|&v| v.is_nan() || v < floor) {
                return Err(Error::domain(format!(
                    "component {} is {} at node {j} (t = {}), below the domain floor {floor}",
                    c + 1,
                    u.values()[j],
                    self.grid.nodes()[j]
                )));
            }
            let at_quad = u.interpolant().eval_many(self.rule.nodes())?;
            if let Some(q) = at_quad.iter().position(|&v| v.is_nan() || v < floor) {
                return Err(Error::domain(format!(
                    "component {} interpolates to {} at s = {}, below the domain floor {floor}",
                    c + 1,
                    at_quad[q],
                    self.rule.nodes()[q]
                )));
            }
            sampled.push(at_quad);
        }
        let mut h = vec![0.0; self.rule.len()];
        for (i, &a) in args.iter().enumerate() {
            for (q, &s) in self.rule.nodes().iter().enumerate() {
                h[q] += self.problem.nonlinearity(i, s, sampled[a][q]);
            }
        }
        if let Some(q) = h.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!(
                "integrand is {} at s = {}",
                h[q],
                self.rule.nodes()[q]
            )));
        }
        Ok(h)
    }

    /// `𝔸(x₁, …, x₂ₘ)` on the collocation grid.
    pub fn apply_a(&self, x: &[&GridFunction]) -> Result<GridFunction> {
        let k = 2 * self.problem.m();
        check_len(k, x.len())?;
        let args: Vec<usize> = (0..k).collect();
        let h = self.integrand(x, &args)?;
        self.integrate_with_forcing(&h)
    }

    /// `H_r` (1-based `r`) with the index scheme
    /// `H₁ = ∫G Σᵢ fᵢ(s, y⁰ᵢ) + p` and, for `r ≥ 2`,
    /// `H_r = ∫G [Σ_{i=1}^{2m−r+1} fᵢ(s, y⁰_{i+r−1}) + Σ_{ℓ=0}^{r−2} f_{2m−ℓ}(s, y⁰_{r−1−ℓ})] + p`.
    pub fn h_indexed(&self, y0: &ProductPoint<GridFunction>, r: usize) -> Result<GridFunction> {
        let k = 2 * self.problem.m();
        check_len(k, y0.k())?;
        let args = h_argument_indices(k, r)?;
        let h = self.integrand(&y0.iter().collect::<Vec<_>>(), &args)?;
        self.integrate_with_forcing(&h)
    }

    /// `𝔸(y⁰ ∘ σ_r)` for the cyclic shift.
    pub fn h_cyclic(&self, y0: &ProductPoint<GridFunction>, r: usize) -> Result<GridFunction> {
        let k = 2 * self.problem.m();
        check_len(k, y0.k())?;
        if r == 0 || r > k {
            return Err(Error::invalid(format!("r = {r} is outside 1..={k}")));
        }
        let u = Upsilon::cyclic_shift(self.problem.m())?;
        self.apply_a(&u.permuted(r - 1, y0))
    }
}

impl ProductOperator<GridFunction> for HammersteinOperator {
    fn arity(&self) -> usize {
        2 * self.problem.m()
    }

    fn apply(&self, args: &[&GridFunction]) -> Result<GridFunction> {
        self.apply_a(args)
    }
}

/// 0-based component indices fed to `f₁ … f₂ₘ` in `H_r`.
pub fn h_argument_indices(k: usize, r: usize) -> Result<Vec<usize>> {
    if r == 0 || r > k {
        return Err(Error::invalid(format!("r = {r} is outside 1..={k}")));
    }
    let mut args = vec![usize::MAX; k];
    if r == 1 {
        return Ok((0..k).collect());
    }
    for i in 1..=k - r + 1 {
        args[i - 1] = i + r - 1 - 1;
    }
    for l in 0..=r - 2 {
        // r − 1 − ℓ ranges over r−1, …, 1.
        let comp = r - 1 - l;
        let nl = k - l;
        if comp < 1 || comp > k || args[nl - 1] != usize::MAX {
            return Err(Error::invalid(format!(
                "index scheme for H_{r} is inconsistent at l = {l}"
            )));
        }
        args[nl - 1] = comp - 1;
    }
    if args.contains(&usize::MAX) {
        return Err(Error::invalid(format!(
            "index scheme for H_{r} leaves a gap"
        )));
    }
    Ok(args)
}

/// Closed forms of the example's `H₁`, `H₂` at `t`, for the start
/// `y⁰₁ = αt/2`, `y⁰₂ = 3αt/2`:
/// `H₁ = αt + ln((2+α)/(3(1+α)))/(2t)`, `H₂ = αt + ln((2+3α)/(1+α))/(2t)`.
pub fn closed_h_formulas(alpha: f64, t: f64) -> Result<(f64, f64)> {
    if !(alpha.is_finite() && alpha > 1.0) {
        return Err(Error::domain(format!("alpha = {alpha} must exceed 1")));
    }
    if !(t >= 1.0 && t.is_finite()) {
        return Err(Error::domain(format!("t = {t} must be at least 1")));
    }
    let h1 = alpha * t + ((2.0 + alpha) / (3.0 * (1.0 + alpha))).ln() / (2.0 * t);
    let h2 = alpha * t + ((2.0 + 3.0 * alpha) / (1.0 + alpha)).ln() / (2.0 * t);
    Ok((h1, h2))
}

/// `k(α) = e^α − (2 + 3α)/(1 + α)`.
pub fn exp_inequality_gap(alpha: f64) -> f64 {
    alpha.exp() - (2.0 + 3.0 * alpha) / (1.0 + alpha)
}

/// Whether `(2 + 3α)/(1 + α) < e^α`.
pub fn check_exp_inequality(alpha: f64) -> bool {
    exp_inequality_gap(alpha) > 0.0
}

/// Starting point `(max(αt/2, 1), 3αt/2)` and whether the floor at 1 had to
/// be applied (only for `α < 2`).
pub fn example_initial_point(
    alpha: f64,
    grid: &Arc<Grid>,
) -> Result<(ProductPoint<GridFunction>, bool)> {
    let lower = GridFunction::sample(grid, |t| (0.5 * alpha * t).max(1.0))?;
    let upper = GridFunction::sample(grid, |t| 1.5 * alpha * t)?;
    let substituted = grid.nodes().iter().any(|&t| 0.5 * alpha * t < 1.0);
    Ok((ProductPoint::new(vec![lower, upper]), substituted))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BandSide {
    Lower,
    Upper,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandViolation {
    /// 1-based nonlinearity index.
    pub nonlinearity: usize,
    pub s: f64,
    pub x: f64,
    pub y: f64,
    pub difference: f64,
    pub band: f64,
    pub side: BandSide,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionDReport {
    pub passed: bool,
    pub kernel_bound: f64,
    pub eta_max: f64,
    pub eta_ok: bool,
    pub checked: usize,
    pub violations: Vec<BandViolation>,
}

/// `max η ≤ 1 / kernel_bound` up to [`ETA_BOUND_RTOL`].
pub fn eta_within_bound(eta_max: f64, kernel_bound: f64) -> bool {
    eta_max * kernel_bound <= 1.0 + ETA_BOUND_RTOL
}

/// Checks `0 ≤ f_{2i−1}(s,y) − f_{2i−1}(s,x) ≤ η ln(1+y−x)` and
/// `−η ln(1+y−x) ≤ f_{2i}(s,y) − f_{2i}(s,x) ≤ 0` at every sample, and the
/// `η` bound against the kernel.
pub fn check_assumption_d(
    op: &HammersteinOperator,
    pairs: &[(f64, f64)],
    s_samples: &[f64],
) -> Result<AssumptionDReport> {
    let problem = op.problem();
    let floor = problem.domain_floor();
    for &(x, y) in pairs {
        if !(x >= floor && y >= x && y.is_finite()) {
            return Err(Error::invalid(format!(
                "sample pair ({x}, {y}) must satisfy y >= x >= {floor}"
            )));
        }
    }
    for &s in s_samples {
        if !(1.0..=problem.t_end()).contains(&s) {
            return Err(Error::invalid(format!("sample s = {s} is outside [1, T]")));
        }
    }
    let mut violations = Vec::new();
    let mut checked = 0;
    for i in 0..2 * problem.m() {
        let eta = problem.etas()[i];
        let nondecreasing = i % 2 == 0;
        for &s in s_samples {
            for &(x, y) in pairs {
                checked += 1;
                let difference = problem.nonlinearity(i, s, y) - problem.nonlinearity(i, s, x);
                let band = eta * (y - x).ln_1p();
                let (lo, hi) = if nondecreasing {
                    (0.0, band)
                } else {
                    (-band, 0.0)
                };
                let side = if difference.is_nan() || difference < lo - CHECK_SLACK {
                    Some(BandSide::Lower)
                } else if difference > hi + CHECK_SLACK {
                    Some(BandSide::Upper)
                } else {
                    None
                };
                if let Some(side) = side {
                    violations.push(BandViolation {
                        nonlinearity: i + 1,
                        s,
                        x,
                        y,
                        difference,
                        band,
                        side,
                    });
                }
            }
        }
    }
    let kernel_bound = op.kernel_bound();
    let eta_max = problem.etas().iter().copied().fold(0.0, f64::max);
    let eta_ok = eta_within_bound(eta_max, kernel_bound);
    Ok(AssumptionDReport {
        passed: eta_ok && violations.is_empty(),
        kernel_bound,
        eta_max,
        eta_ok,
        checked,
        violations,
    })
}

/// Default samples for [`check_assumption_d`]: nine equispaced `s` values and
/// all ordered pairs from `floor + {0, 1e-3, 0.1, 0.5, 1, 2, 5, 10, 100}`.
pub fn default_band_samples(problem: &HammersteinProblem) -> (Vec<(f64, f64)>, Vec<f64>) {
    let floor = problem.domain_floor();
    let offsets = [0.0, 1e-3, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 100.0];
    let mut pairs = Vec::new();
    for (a, &dx) in offsets.iter().enumerate() {
        for &dy in &offsets[a..] {
            pairs.push((floor + dx, floor + dy));
        }
    }
    let t_end = problem.t_end();
    let s = (0..9)
        .map(|i| 1.0 + (t_end - 1.0) * i as f64 / 8.0)
        .collect();
    (pairs, s)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InitialPointFailure {
    /// 1-based `r`.
    pub r: usize,
    pub node: usize,
    pub t: f64,
    pub y0: f64,
    pub h: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AssumptionEReport {
    pub passed: bool,
    #[serde(skip)]
    pub h: Vec<GridFunction>,
    pub failures: Vec<InitialPointFailure>,
    /// Largest sup-distance between the indexed `H_r` and the cyclic
    /// rotation `𝔸(y⁰ ∘ σ_r)`.
    pub cyclic_discrepancy: f64,
}

/// Computes `H₁ … H₂ₘ` and checks `y⁰_r ≤ H_r` (odd `r`), `y⁰_r ≥ H_r`
/// (even `r`) at every node, with slack `tol`.
pub fn check_assumption_e(
    op: &HammersteinOperator,
    y0: &ProductPoint<GridFunction>,
    tol: f64,
) -> Result<AssumptionEReport> {
    let k = 2 * op.problem().m();
    check_len(k, y0.k())?;
    let mut h = Vec::with_capacity(k);
    let mut failures = Vec::new();
    let mut cyclic_discrepancy = 0.0_f64;
    for r in 1..=k {
        let hr = op.h_indexed(y0, r)?;
        let cyc = op.h_cyclic(y0, r)?;
        cyclic_discrepancy = cyclic_discrepancy.max(sup_metric(&hr, &cyc)?);
        let y = &y0[r - 1];
        for (node, (&yv, &hv)) in y.values().iter().zip(hr.values()).enumerate() {
            let ok = if r % 2 == 1 {
                yv <= hv + tol
            } else {
                yv + tol >= hv
            };
            if !ok {
                failures.push(InitialPointFailure {
                    r,
                    node,
                    t: op.grid().nodes()[node],
                    y0: yv,
                    h: hv,
                });
            }
        }
        h.push(hr);
    }
    Ok(AssumptionEReport {
        passed: failures.is_empty(),
        h,
        failures,
        cyclic_discrepancy,
    })
}

/// Finite-sample sanity of continuity assumptions (a)–(c): every
/// nonlinearity, the forcing and the kernel produce finite values, and the
/// kernel is nonnegative, on the discretisation nodes.
pub fn check_finite_samples(op: &HammersteinOperator) -> bool {
    let problem = op.problem();
    let floor = problem.domain_floor();
    let xs = [floor, floor + 0.5, floor + 1.0, floor + 10.0];
    let nl_ok = (0..2 * problem.m()).all(|i| {
        op.rule().nodes().iter().all(|&s| {
            xs.iter()
                .all(|&x| problem.nonlinearity(i, s, x).is_finite())
        })
    });
    // The kernel and forcing were validated when the operator was tabulated.
    nl_ok
}

/// Residual of the collapsed equation `x = 𝔸(x, …, x)` at a single grid
/// function.
pub fn collapsed_residual(op: &HammersteinOperator, x: &GridFunction) -> Result<f64> {
    let k = 2 * op.problem().m();
    let args: Vec<&GridFunction> = std::iter::repeat_n(x, k).collect();
    let ax = op.apply_a(&args)?;
    sup_metric(&ax, x)
}

/// One Υ-sweep of `𝔸` with the cyclic shift.
pub fn cyclic_sweep(
    op: &HammersteinOperator,
    x: &ProductPoint<GridFunction>,
) -> Result<ProductPoint<GridFunction>> {
    let u = Upsilon::cyclic_shift(op.problem().m())?;
    iterate_step(op, &u, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{make_quadrature, QuadratureKind};
    use std::f64::consts::E;

    fn example_op(alpha: f64, t_end: f64) -> HammersteinOperator {
        let problem = HammersteinProblem::paper_example(alpha, t_end).unwrap();
        let grid = Grid::uniform(t_end, 200).unwrap();
        let rule = make_quadrature(QuadratureKind::default(), t_end).unwrap();
        HammersteinOperator::new(problem, grid, rule).unwrap()
    }

    #[test]
    fn closed_forms() {
        let (h1, h2) = closed_h_formulas(2.0, 1.0).unwrap();
        assert!((h2 - 2.490_414_626_505_863).abs() < 1e-12);
        assert!((h1 - 1.594_534_891_891_835_6).abs() < 1e-12);
        for alpha in [1.01, 1.5, 2.0, 7.0] {
            for t in [1.0, 1.7, 4.0] {
                let (h1, h2) = closed_h_formulas(alpha, t).unwrap();
                assert!(h1 < alpha * t && alpha * t < h2);
            }
        }
        assert!(matches!(closed_h_formulas(1.0, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn exp_inequality() {
        assert!((exp_inequality_gap(1.0) - (E - 2.5)).abs() < 1e-15);
        assert!((exp_inequality_gap(1.0) - 0.218_281_828_459_045_1).abs() < 1e-15);
        assert!((exp_inequality_gap(2.0) - 4.722_389_432_263_984).abs() < 1e-12);
        assert!(exp_inequality_gap(1.5) > exp_inequality_gap(1.0));
        assert!(check_exp_inequality(1.0));
        assert!(check_exp_inequality(1.2));
        assert!(check_exp_inequality(20.0));
    }

    #[test]
    fn example_forcing_value() {
        let p = HammersteinProblem::paper_example(2.0, E).unwrap();
        assert!((p.forcing(1.0) - 2.047_267_445_945_917_7).abs() < 1e-12);
        assert_eq!(p.m(), 1);
        assert_eq!(p.etas(), &[1.0, 1.0]);
        assert_eq!(p.domain_floor(), 1.0);
        assert!(HammersteinProblem::paper_example(1.0, 2.0).is_err());
        assert!(HammersteinProblem::paper_example(2.0, 1.0).is_err());
    }

    #[test]
    fn kernel_bound_examples() {
        for t_end in [1.5, 2.0, E, 10.0] {
            let op = example_op(2.0, t_end);
            assert!((op.kernel_bound() - 1.0).abs() < 1e-10, "T = {t_end}");
        }
        let grid = Grid::uniform(3.0, 16).unwrap();
        let rule = make_quadrature(QuadratureKind::default(), 3.0).unwrap();
        let base = HammersteinProblem::paper_example(2.0, 3.0).unwrap();
        let zero = HammersteinProblem::new(
            "zero",
            3.0,
            Arc::new(|_, _| 0.0),
            vec![Arc::new(ln_shift), Arc::new(neg_ln_product)],
            Arc::new(|_| 0.0),
            vec![1.0, 1.0],
            1.0,
        )
        .unwrap();
        assert_eq!(
            HammersteinOperator::new(zero, grid.clone(), rule.clone())
                .unwrap()
                .kernel_bound(),
            0.0
        );
        let flat = HammersteinProblem::new(
            "flat",
            3.0,
            Arc::new(|_, _| 0.5),
            vec![Arc::new(ln_shift), Arc::new(neg_ln_product)],
            Arc::new(|_| 0.0),
            vec![1.0, 1.0],
            1.0,
        )
        .unwrap();
        assert!(
            (HammersteinOperator::new(flat, grid.clone(), rule.clone())
                .unwrap()
                .kernel_bound()
                - 2.0)
                .abs()
                < 1e-12
        );
        assert!(HammersteinOperator::new(base, grid, rule).is_ok());
    }

    #[test]
    fn kernel_bound_is_refinement_stable() {
        for t_end in [2.0, 10.0] {
            let problem = HammersteinProblem::paper_example(2.0, t_end).unwrap();
            let grid = Grid::uniform(t_end, 50).unwrap();
            let coarse = make_quadrature(
                QuadratureKind::GaussLegendre {
                    panels: 32,
                    points: 8,
                },
                t_end,
            )
            .unwrap();
            let fine = make_quadrature(
                QuadratureKind::GaussLegendre {
                    panels: 64,
                    points: 8,
                },
                t_end,
            )
            .unwrap();
            let a = HammersteinOperator::new(problem.clone(), grid.clone(), coarse)
                .unwrap()
                .kernel_bound();
            let b = HammersteinOperator::new(problem, grid, fine)
                .unwrap()
                .kernel_bound();
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn negative_kernel_is_rejected() {
        let grid = Grid::uniform(2.0, 16).unwrap();
        let rule = make_quadrature(QuadratureKind::default(), 2.0).unwrap();
        let bad = HammersteinProblem::new(
            "neg",
            2.0,
            Arc::new(|t, s| t - s),
            vec![Arc::new(ln_shift), Arc::new(neg_ln_product)],
            Arc::new(|_| 0.0),
            vec![1.0, 1.0],
            1.0,
        )
        .unwrap();
        assert!(HammersteinOperator::new(bad, grid, rule).is_err());
    }

    #[test]
    fn apply_a_examples() {
        let alpha = 2.0;
        let op = example_op(alpha, 2.0);
        let exact = GridFunction::sample(op.grid(), |t| alpha * t).unwrap();
        let ax = op.apply_a(&[&exact, &exact]).unwrap();
        assert!(sup_metric(&ax, &exact).unwrap() < 1e-10);

        let (y0, substituted) = example_initial_point(alpha, op.grid()).unwrap();
        assert!(!substituted);
        let h = op.apply_a(&[&y0[0], &y0[1]]).unwrap();
        for (&t, &v) in op.grid().nodes().iter().zip(h.values()) {
            assert!((v - closed_h_formulas(alpha, t).unwrap().0).abs() < 1e-10);
        }

        let zero_nl = HammersteinProblem::new(
            "zero-nl",
            2.0,
            log_kernel(2.0),
            vec![Arc::new(|_, _| 0.0), Arc::new(|_, _| 0.0)],
            example_forcing(alpha, 2.0),
            vec![1.0, 1.0],
            1.0,
        )
        .unwrap();
        let op0 = HammersteinOperator::new(zero_nl, op.grid().clone(), op.rule().clone()).unwrap();
        let p = GridFunction::sample(op.grid(), |t| op.problem().forcing(t)).unwrap();
        assert_eq!(op0.apply_a(&[&exact, &exact]).unwrap(), p);
    }

    #[test]
    fn apply_a_enforces_domain_floor() {
        let op = example_op(2.0, 2.0);
        let low = GridFunction::sample(op.grid(), |t| t - 0.5).unwrap();
        let ok = GridFunction::sample(op.grid(), |t| 2.0 * t).unwrap();
        let err = op.apply_a(&[&ok, &low]).unwrap_err();
        match err {
            Error::Domain(msg) => assert!(msg.contains("component 2") && msg.contains("node 0")),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(op.apply_a(&[&ok]), Err(Error::Dimension { .. })));
    }

    #[test]
    fn fixed_point_identity_across_parameters() {
        for alpha in [1.5, 2.0, 5.0] {
            for t_end in [1.5, 2.0, E, 10.0] {
                let op = example_op(alpha, t_end);
                let exact = GridFunction::sample(op.grid(), |t| alpha * t).unwrap();
                let r = collapsed_residual(&op, &exact).unwrap();
                assert!(r < 1e-9, "alpha {alpha}, T {t_end}: {r}");
            }
        }
    }

    #[test]
    fn h_index_scheme_matches_rotation() {
        for k in [2, 4, 6, 8] {
            let u = Upsilon::cyclic_shift(k / 2).unwrap();
            for r in 1..=k {
                assert_eq!(
                    h_argument_indices(k, r).unwrap(),
                    u.map(r - 1),
                    "k {k} r {r}"
                );
            }
            assert!(h_argument_indices(k, 0).is_err());
            assert!(h_argument_indices(k, k + 1).is_err());
        }
    }

    #[test]
    fn assumption_d_examples() {
        let op = example_op(2.0, 2.0);
        let (pairs, s) = default_band_samples(op.problem());
        let rep = check_assumption_d(&op, &pairs, &s).unwrap();
        assert!(rep.passed, "{:?}", rep.violations.first());
        assert!(rep.eta_ok);

        let rep = check_assumption_d(&op, &[(3.0, 3.0)], &[1.5]).unwrap();
        assert!(rep.passed);

        // f(s, x) = 2x declared as the nondecreasing member with eta = 1.
        let linear = HammersteinProblem::new(
            "linear",
            2.0,
            log_kernel(2.0),
            vec![Arc::new(|_, x| 2.0 * x), Arc::new(neg_ln_product)],
            Arc::new(|_| 0.0),
            vec![1.0, 1.0],
            0.0,
        )
        .unwrap();
        let op2 = HammersteinOperator::new(linear, op.grid().clone(), op.rule().clone()).unwrap();
        let rep = check_assumption_d(&op2, &[(0.0, 1.0)], &[1.0]).unwrap();
        assert!(!rep.passed);
        let v = &rep.violations[0];
        assert_eq!((v.nonlinearity, v.side), (1, BandSide::Upper));
        assert_eq!(v.difference, 2.0);
        assert!((v.band - 2f64.ln()).abs() < 1e-15);

        let wide = op.problem().clone().with_etas(vec![5.0, 1.0]).unwrap();
        let op3 = HammersteinOperator::new(wide, op.grid().clone(), op.rule().clone()).unwrap();
        let rep = check_assumption_d(&op3, &pairs, &s).unwrap();
        assert!(!rep.eta_ok && !rep.passed && rep.violations.is_empty());

        assert!(check_assumption_d(&op, &[(2.0, 1.5)], &[1.0]).is_err());
        assert!(check_assumption_d(&op, &[(0.5, 1.5)], &[1.0]).is_err());
        assert!(check_assumption_d(&op, &[(1.0, 1.5)], &[3.0]).is_err());
    }

    #[test]
    fn assumption_e_examples() {
        let alpha = 2.0;
        let op = example_op(alpha, 2.0);
        let (y0, _) = example_initial_point(alpha, op.grid()).unwrap();
        let rep = check_assumption_e(&op, &y0, 0.0).unwrap();
        assert!(rep.passed);
        assert!(rep.cyclic_discrepancy == 0.0);
        for (&t, (h1, h2)) in op
            .grid()
            .nodes()
            .iter()
            .zip(rep.h[0].values().iter().zip(rep.h[1].values()))
        {
            let (c1, c2) = closed_h_formulas(alpha, t).unwrap();
            assert!((h1 - c1).abs() < 1e-10 && (h2 - c2).abs() < 1e-10);
        }

        let exact = GridFunction::sample(op.grid(), |t| alpha * t).unwrap();
        let rep = check_assumption_e(
            &op,
            &ProductPoint::new(vec![exact.clone(), exact.clone()]),
            1e-10,
        )
        .unwrap();
        assert!(rep.passed);

        let high = GridFunction::sample(op.grid(), |t| 2.0 * alpha * t).unwrap();
        let rep =
            check_assumption_e(&op, &ProductPoint::new(vec![high, y0[1].clone()]), 0.0).unwrap();
        assert!(!rep.passed);
        assert_eq!((rep.failures[0].r, rep.failures[0].node), (1, 0));
    }

    #[test]
    fn assumption_e_general_m_uses_the_rotation() {
        // m = 2: ln-shift / neg-ln-product pairs, kernel scaled to keep 4·max∫G = 1.
        let t_end: f64 = 2.0;
        let c = 0.25 / t_end.ln();
        let alpha = 3.0;
        let problem = HammersteinProblem::new(
            "m2",
            t_end,
            Arc::new(move |t, s| c / (t * s)),
            vec![
                Arc::new(ln_shift),
                Arc::new(neg_ln_product),
                Arc::new(ln_shift),
                Arc::new(neg_ln_product),
            ],
            Arc::new(move |t| alpha * t),
            vec![1.0; 4],
            1.0,
        )
        .unwrap();
        let grid = Grid::uniform(t_end, 32).unwrap();
        let rule = make_quadrature(QuadratureKind::default(), t_end).unwrap();
        let op = HammersteinOperator::new(problem, grid.clone(), rule).unwrap();
        assert!((op.kernel_bound() - 1.0).abs() < 1e-10);
        let y0 = ProductPoint::new(
            [1.0, 4.0, 1.5, 5.0]
                .iter()
                .map(|&a| GridFunction::sample(&grid, |t| a * t).unwrap())
                .collect(),
        );
        let rep = check_assumption_e(&op, &y0, 0.0).unwrap();
        assert_eq!(rep.cyclic_discrepancy, 0.0);
        assert_eq!(rep.h.len(), 4);
    }
}
