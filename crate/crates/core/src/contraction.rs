//! Contraction triples `(ψ, θ, φ)`.
//!
//! A triple certifies `ψ(d(F(x), F(y))) ≤ θ(d_k(x, y)) − φ(d_k(x, y))` for
//! ordered `x ⪯_k y`, where `ψ` is an altering distance function, `θ` is
//! upper and `φ` lower semi-continuous, all three vanish at zero, and
//! `ψ(t) − θ(t) + φ(t) > 0` for `t > 0`.
//!
//! Semi-continuity cannot be decided from samples, so every triple carries
//! [`DeclaredProperties`] set by whoever built it. Only the pointwise facts
//! are checked.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::engine::ProductOperator;
use crate::error::{Error, Result};
use crate::order::{max_metric, product_leq, OrderedMetricSpace, Partition, PointPair};

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Default slack for [`verify_contraction_sampled`].
pub const DEFAULT_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DeclaredProperties {
    pub psi_altering: bool,
    pub theta_usc: bool,
    pub phi_lsc: bool,
    pub zero_at_zero: bool,
}

impl DeclaredProperties {
    pub const ALL: DeclaredProperties = DeclaredProperties {
        psi_altering: true,
        theta_usc: true,
        phi_lsc: true,
        zero_at_zero: true,
    };

    pub const NONE: DeclaredProperties = DeclaredProperties {
        psi_altering: false,
        theta_usc: false,
        phi_lsc: false,
        zero_at_zero: false,
    };

    pub fn all(&self) -> bool {
        self.psi_altering && self.theta_usc && self.phi_lsc && self.zero_at_zero
    }
}

#[derive(Clone)]
pub struct ContractionTriple {
    name: String,
    psi: ScalarFn,
    theta: ScalarFn,
    phi: ScalarFn,
    psi_is_identity: bool,
    declared: DeclaredProperties,
}

impl fmt::Debug for ContractionTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ContractionTriple")
            .field("name", &self.name)
            .field("psi_is_identity", &self.psi_is_identity)
            .field("declared", &self.declared)
            .finish()
    }
}

impl ContractionTriple {
    /// `ψ(t) = t`, `θ(t) = ln(1 + t)`, `φ = 0`.
    pub fn log() -> Self {
        ContractionTriple {
            name: "log".into(),
            psi: Arc::new(|t| t),
            theta: Arc::new(f64::ln_1p),
            phi: Arc::new(|_| 0.0),
            psi_is_identity: true,
            declared: DeclaredProperties::ALL,
        }
    }

    /// Banach contraction with constant `q ∈ [0, 1)`: `ψ(t) = t`,
    /// `θ(t) = t`, `φ(t) = (1 − q) t`.
    pub fn linear(q: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&q) {
            return Err(Error::invalid(format!(
                "contraction constant {q} not in [0, 1)"
            )));
        }
        Ok(ContractionTriple {
            name: format!("linear({q})"),
            psi: Arc::new(|t| t),
            theta: Arc::new(|t| t),
            phi: Arc::new(move |t| (1.0 - q) * t),
            psi_is_identity: true,
            declared: DeclaredProperties::ALL,
        })
    }

    /// A user triple. `declared` is taken on trust.
    pub fn custom(
        name: impl Into<String>,
        psi: ScalarFn,
        theta: ScalarFn,
        phi: ScalarFn,
        declared: DeclaredProperties,
    ) -> Self {
        ContractionTriple {
            name: name.into(),
            psi,
            theta,
            phi,
            psi_is_identity: false,
            declared,
        }
    }

    /// Marks `ψ` as the identity, which enables [`Self::gain_bound_sequence`].
    /// The caller vouches for it.
    pub fn with_identity_psi(mut self) -> Self {
        self.psi_is_identity = true;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn declared(&self) -> DeclaredProperties {
        self.declared
    }

    pub fn psi(&self, t: f64) -> f64 {
        (self.psi)(t)
    }

    pub fn theta(&self, t: f64) -> f64 {
        (self.theta)(t)
    }

    pub fn phi(&self, t: f64) -> f64 {
        (self.phi)(t)
    }

    /// `ψ(t) − θ(t) + φ(t)`.
    pub fn gap(&self, t: f64) -> f64 {
        self.psi(t) - self.theta(t) + self.phi(t)
    }

    /// Right-hand side `θ(t) − φ(t)` of the contraction inequality.
    pub fn budget(&self, t: f64) -> f64 {
        self.theta(t) - self.phi(t)
    }

    /// Logarithmic grid on `[1e-8, 1e4]` with 121 points.
    pub fn default_grid() -> Vec<f64> {
        (0..121)
            .map(|i| 10f64.powf(-8.0 + 12.0 * i as f64 / 120.0))
            .collect()
    }

    /// Checks the zero conditions, sampled monotonicity of `ψ` and positivity
    /// of the gap on `xs`.
    pub fn check_on_grid(&self, xs: &[f64]) -> Result<TripleReport> {
        if xs.is_empty() {
            return Err(Error::invalid("sample grid is empty"));
        }
        if let Some(&x) = xs.iter().find(|&&x| x.is_nan() || x <= 0.0) {
            return Err(Error::invalid(format!("sample {x} is not positive")));
        }
        let zero_ok = self.psi(0.0) == 0.0 && self.theta(0.0) == 0.0 && self.phi(0.0) == 0.0;
        let mut violations = Vec::new();
        let mut min_gap = f64::INFINITY;
        for &x in xs {
            let g = self.gap(x);
            if g.is_nan() || g <= 0.0 {
                violations.push(GapViolation { x, gap: g });
            }
            if g < min_gap || g.is_nan() {
                min_gap = g;
            }
        }
        let mut sorted = xs.to_vec();
        sorted.sort_by(f64::total_cmp);
        let psi_monotone = sorted.windows(2).all(|w| self.psi(w[0]) <= self.psi(w[1]));
        Ok(TripleReport {
            passed: zero_ok && psi_monotone && violations.is_empty(),
            zero_at_zero: zero_ok,
            psi_monotone,
            min_gap,
            violations,
        })
    }

    /// A-priori majorant `d_{n+1} = θ(d_n) − φ(d_n)` of length `n + 1`,
    /// available when `ψ` is the identity.
    pub fn gain_bound_sequence(&self, d0: f64, n: usize) -> Result<Vec<f64>> {
        if !self.psi_is_identity {
            return Err(Error::Unsupported(
                "gain bound needs the inverse of psi; only identity psi is supported".into(),
            ));
        }
        if d0.is_nan() || d0 < 0.0 {
            return Err(Error::invalid(format!("initial distance {d0} is negative")));
        }
        let mut out = Vec::with_capacity(n + 1);
        let mut d = d0;
        out.push(d);
        for _ in 0..n {
            d = self.budget(d).max(0.0);
            out.push(d);
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapViolation {
    pub x: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TripleReport {
    pub passed: bool,
    pub zero_at_zero: bool,
    pub psi_monotone: bool,
    pub min_gap: f64,
    pub violations: Vec<GapViolation>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairSlack {
    /// 0-based position in the input pair list.
    pub index: usize,
    pub d_k: f64,
    pub d_image: f64,
    /// `θ(d_k) − φ(d_k) − ψ(d(F(x), F(z)))`.
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContractionReport {
    pub passed: bool,
    pub tol_slack: f64,
    pub slacks: Vec<PairSlack>,
    /// Pairs whose slack fell below `-tol_slack`.
    pub violations: Vec<PairSlack>,
    /// Indices of pairs that were not ordered and so never evaluated.
    pub unordered: Vec<usize>,
    pub min_slack: f64,
}

/// Evaluates the contraction inequality on ordered pairs `x ⪯_k z`.
pub fn verify_contraction_sampled<S, F>(
    space: &S,
    op: &F,
    partition: &Partition,
    pairs: &[PointPair<S::Point>],
    triple: &ContractionTriple,
    tol_slack: f64,
) -> Result<ContractionReport>
where
    S: OrderedMetricSpace,
    F: ProductOperator<S::Point> + ?Sized,
{
    let mut slacks = Vec::new();
    let mut unordered = Vec::new();
    for (index, (x, z)) in pairs.iter().enumerate() {
        if !product_leq(space, partition, x, z)? {
            unordered.push(index);
            continue;
        }
        let d_k = max_metric(space, x, z)?;
        let fx = op.apply(&x.iter().collect::<Vec<_>>())?;
        let fz = op.apply(&z.iter().collect::<Vec<_>>())?;
        let d_image = space.distance(&fx, &fz)?;
        let slack = triple.budget(d_k) - triple.psi(d_image);
        slacks.push(PairSlack {
            index,
            d_k,
            d_image,
            slack,
        });
    }
    let violations: Vec<PairSlack> = slacks
        .iter()
        .filter(|s| s.slack.is_nan() || s.slack < -tol_slack)
        .cloned()
        .collect();
    let min_slack = slacks.iter().map(|s| s.slack).fold(f64::INFINITY, f64::min);
    Ok(ContractionReport {
        passed: violations.is_empty(),
        tol_slack,
        slacks,
        violations,
        unordered,
        min_slack,
    })
}
