//! Discretised `C[1, T]`.
//!
//! Solutions live on a collocation [`Grid`]; integrals are evaluated with a
//! separate [`QuadratureRule`] whose nodes are reached through a monotone
//! cubic Hermite [`Interpolant`].

use std::io::{BufRead, Write};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::order::OrderedMetricSpace;

/// Minimum number of intervals of a collocation grid.
pub const MIN_INTERVALS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridKind {
    Uniform,
    GaussLegendre,
}

/// Collocation nodes on `[1, T]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    t_end: f64,
    nodes: Vec<f64>,
    kind: GridKind,
}

impl Grid {
    /// `intervals + 1` equispaced nodes with endpoints exactly `1` and `T`.
    pub fn uniform(t_end: f64, intervals: usize) -> Result<Arc<Self>> {
        check_interval(t_end)?;
        if intervals < MIN_INTERVALS {
            return Err(Error::invalid(format!(
                "grid needs at least {MIN_INTERVALS} intervals, got {intervals}"
            )));
        }
        let h = (t_end - 1.0) / intervals as f64;
        let mut nodes: Vec<f64> = (0..=intervals).map(|i| 1.0 + h * i as f64).collect();
        nodes[intervals] = t_end;
        Ok(Arc::new(Grid {
            t_end,
            nodes,
            kind: GridKind::Uniform,
        }))
    }

    /// Nodes of the composite Gauss–Legendre rule; all lie strictly inside
    /// `(1, T)`.
    pub fn gauss_legendre(t_end: f64, panels: usize, points: usize) -> Result<Arc<Self>> {
        let rule = QuadratureRule::gauss_legendre(1.0, t_end, panels, points)?;
        if rule.nodes.len() < MIN_INTERVALS + 1 {
            return Err(Error::invalid(format!(
                "grid needs at least {} nodes, got {}",
                MIN_INTERVALS + 1,
                rule.nodes.len()
            )));
        }
        Ok(Arc::new(Grid {
            t_end,
            nodes: rule.nodes,
            kind: GridKind::GaussLegendre,
        }))
    }

    pub fn new(kind: GridKind, t_end: f64, n: usize, points: usize) -> Result<Arc<Self>> {
        match kind {
            GridKind::Uniform => Grid::uniform(t_end, n),
            GridKind::GaussLegendre => Grid::gauss_legendre(t_end, n, points),
        }
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }
}

fn check_interval(t_end: f64) -> Result<()> {
    if t_end.is_finite() && t_end > 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "interval end T = {t_end} must exceed 1"
        )))
    }
}

/// An element of `C[1, T]` stored by its values at the grid nodes.
#[derive(Debug, Clone)]
pub struct GridFunction {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl PartialEq for GridFunction {
    fn eq(&self, other: &Self) -> bool {
        same_grid(&self.grid, &other.grid) && self.values == other.values
    }
}

fn same_grid(a: &Arc<Grid>, b: &Arc<Grid>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl GridFunction {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        check_len(grid.len(), values.len())?;
        if let Some(j) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!(
                "value {} at node {} (t = {}) is not finite",
                values[j], j, grid.nodes[j]
            )));
        }
        Ok(GridFunction { grid, values })
    }

    pub fn sample(grid: &Arc<Grid>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.nodes.iter().map(|&t| f(t)).collect();
        GridFunction::new(grid.clone(), values)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn ensure_same_grid(&self, other: &GridFunction) -> Result<()> {
        if same_grid(&self.grid, &other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Pointwise maximum, the common upper bound of two functions.
    pub fn pointwise_max(&self, other: &GridFunction) -> Result<GridFunction> {
        self.ensure_same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.max(*b))
            .collect();
        Ok(GridFunction {
            grid: self.grid.clone(),
            values,
        })
    }

    pub fn interpolant(&self) -> Interpolant<'_> {
        Interpolant::new(self)
    }

    pub fn interpolate(&self, t: f64) -> Result<f64> {
        self.interpolant().eval(t)
    }
}

/// `max_j |u(t_j) − v(t_j)|`.
pub fn sup_metric(u: &GridFunction, v: &GridFunction) -> Result<f64> {
    u.ensure_same_grid(v)?;
    Ok(u.values
        .iter()
        .zip(&v.values)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

/// `u(t_j) ≤ v(t_j) + tol` at every node.
pub fn pointwise_leq(u: &GridFunction, v: &GridFunction, tol: f64) -> Result<bool> {
    Ok(first_order_violation(u, v, tol)?.is_none())
}

/// Index of the first node where `u(t_j) > v(t_j) + tol`.
pub fn first_order_violation(
    u: &GridFunction,
    v: &GridFunction,
    tol: f64,
) -> Result<Option<usize>> {
    u.ensure_same_grid(v)?;
    Ok(u.values
        .iter()
        .zip(&v.values)
        .position(|(a, b)| *a > *b + tol))
}

/// `C[1, T]` with the sup metric and the pointwise order with slack `tol`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GridSpace {
    pub tol: f64,
}

impl GridSpace {
    pub fn with_tol(tol: f64) -> Self {
        GridSpace { tol }
    }
}

impl OrderedMetricSpace for GridSpace {
    type Point = GridFunction;

    fn distance(&self, a: &GridFunction, b: &GridFunction) -> Result<f64> {
        sup_metric(a, b)
    }

    fn leq(&self, a: &GridFunction, b: &GridFunction) -> Result<bool> {
        pointwise_leq(a, b, self.tol)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum QuadratureKind {
    GaussLegendre { panels: usize, points: usize },
    Simpson { intervals: usize },
}

impl Default for QuadratureKind {
    fn default() -> Self {
        QuadratureKind::GaussLegendre {
            panels: 32,
            points: 8,
        }
    }
}

/// `∫_a^b f ≈ Σ wⱼ f(sⱼ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    a: f64,
    b: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    /// `panels` equal panels with a `points`-point Gauss–Legendre rule each;
    /// exact for polynomials of degree `2·points − 1`.
    pub fn gauss_legendre(a: f64, b: f64, panels: usize, points: usize) -> Result<Self> {
        check_bounds(a, b)?;
        if panels == 0 {
            return Err(Error::invalid("at least one panel is required"));
        }
        if !(2..=16).contains(&points) {
            return Err(Error::invalid(format!(
                "Gauss-Legendre points per panel must be in 2..=16, got {points}"
            )));
        }
        let (ref_nodes, ref_weights) = legendre_nodes_weights(points);
        let width = (b - a) / panels as f64;
        let mut nodes = Vec::with_capacity(panels * points);
        let mut weights = Vec::with_capacity(panels * points);
        for p in 0..panels {
            let left = a + width * p as f64;
            let mid = left + 0.5 * width;
            for (x, w) in ref_nodes.iter().zip(&ref_weights) {
                nodes.push(mid + 0.5 * width * x);
                weights.push(0.5 * width * w);
            }
        }
        QuadratureRule::checked(a, b, nodes, weights)
    }

    /// Composite Simpson on an even number of subintervals.
    pub fn simpson(a: f64, b: f64, intervals: usize) -> Result<Self> {
        check_bounds(a, b)?;
        if intervals < 2 || !intervals.is_multiple_of(2) {
            return Err(Error::invalid(format!(
                "Simpson needs an even number of subintervals, got {intervals}"
            )));
        }
        let h = (b - a) / intervals as f64;
        let mut nodes: Vec<f64> = (0..=intervals).map(|i| a + h * i as f64).collect();
        nodes[intervals] = b;
        let weights = (0..=intervals)
            .map(|i| {
                let c = if i == 0 || i == intervals {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                c * h / 3.0
            })
            .collect();
        QuadratureRule::checked(a, b, nodes, weights)
    }

    fn checked(a: f64, b: f64, nodes: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        let sum: f64 = weights.iter().sum();
        if (sum - (b - a)).abs() > 1e-12 * (b - a) {
            return Err(Error::Numerical(format!(
                "weights sum to {sum}, expected {}",
                b - a
            )));
        }
        Ok(QuadratureRule {
            a,
            b,
            nodes,
            weights,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `Σ wⱼ fⱼ` for an integrand sampled at the rule's nodes.
    pub fn integrate(&self, values: &[f64]) -> Result<f64> {
        check_len(self.nodes.len(), values.len())?;
        Ok(self.weights.iter().zip(values).map(|(w, f)| w * f).sum())
    }

    pub fn integrate_fn(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&s, w)| w * f(s))
            .sum()
    }
}

fn check_bounds(a: f64, b: f64) -> Result<()> {
    if a.is_finite() && b.is_finite() && b > a {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "invalid integration bounds [{a}, {b}]"
        )))
    }
}

/// Quadrature rule on `[1, T]`.
pub fn make_quadrature(kind: QuadratureKind, t_end: f64) -> Result<QuadratureRule> {
    check_interval(t_end)?;
    match kind {
        QuadratureKind::GaussLegendre { panels, points } => {
            QuadratureRule::gauss_legendre(1.0, t_end, panels, points)
        }
        QuadratureKind::Simpson { intervals } => QuadratureRule::simpson(1.0, t_end, intervals),
    }
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`,
/// by Newton iteration on `P_n`.
pub fn legendre_nodes_weights(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Piecewise cubic Hermite interpolant with limited slopes.
///
/// Slopes start from the three-point (quadratic-exact) derivative estimate
/// and are clamped to `3·min(|δ_{k−1}|, |δ_k|)`, zeroed at local extrema.
/// This keeps every piece monotone on monotone data while reproducing
/// linear data exactly.
#[derive(Debug, Clone)]
pub struct Interpolant<'a> {
    nodes: &'a [f64],
    values: &'a [f64],
    slopes: Vec<f64>,
    lo: f64,
    hi: f64,
}

impl<'a> Interpolant<'a> {
    pub fn new(u: &'a GridFunction) -> Self {
        let nodes = u.grid.nodes.as_slice();
        let values = u.values.as_slice();
        Interpolant {
            nodes,
            values,
            slopes: limited_slopes(nodes, values),
            lo: 1.0,
            hi: u.grid.t_end,
        }
    }

    /// Value at `t ∈ [1, T]`. Outside the node range (Gauss–Legendre grids)
    /// the end pieces are extended.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t >= self.lo && t <= self.hi) {
            return Err(Error::domain(format!(
                "t = {t} is outside [{}, {}]",
                self.lo, self.hi
            )));
        }
        let n = self.nodes.len();
        let k = self.nodes.partition_point(|&x| x <= t).clamp(1, n - 1) - 1;
        let (x0, x1) = (self.nodes[k], self.nodes[k + 1]);
        if t == x0 {
            return Ok(self.values[k]);
        }
        let h = x1 - x0;
        let s = (t - x0) / h;
        let (y0, y1) = (self.values[k], self.values[k + 1]);
        let (m0, m1) = (self.slopes[k], self.slopes[k + 1]);
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        Ok(h00 * y0 + h10 * h * m0 + h01 * y1 + h11 * h * m1)
    }

    pub fn eval_many(&self, ts: &[f64]) -> Result<Vec<f64>> {
        ts.iter().map(|&t| self.eval(t)).collect()
    }
}

fn limited_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
    let mut m = vec![0.0; n];
    if n == 2 {
        m[0] = delta[0];
        m[1] = delta[0];
        return m;
    }
    for k in 1..n - 1 {
        let (dl, dr) = (delta[k - 1], delta[k]);
        if dl * dr <= 0.0 {
            continue;
        }
        let est = (h[k] * dl + h[k - 1] * dr) / (h[k - 1] + h[k]);
        let cap = 3.0 * dl.abs().min(dr.abs());
        m[k] = est.signum() * est.abs().min(cap);
    }
    m[0] = end_slope(h[0], h[1], delta[0], delta[1]);
    m[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    m
}

fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let est = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if d0 == 0.0 || est.signum() != d0.signum() {
        0.0
    } else {
        est.signum() * est.abs().min(3.0 * d0.abs())
    }
}

/// Writes `t,value` rows at 17 significant digits.
pub fn write_csv<W: Write>(u: &GridFunction, mut w: W) -> std::io::Result<()> {
    writeln!(w, "t,value")?;
    for (t, v) in u.grid.nodes.iter().zip(&u.values) {
        writeln!(w, "{},{}", fmt_f64(*t), fmt_f64(*v))?;
    }
    Ok(())
}

/// Reads `t,value` rows written by [`write_csv`].
pub fn read_csv<R: BufRead>(r: R) -> Result<Vec<(f64, f64)>> {
    let mut lines = r.lines();
    match lines.next() {
        Some(Ok(header)) if header.trim() == "t,value" => {}
        _ => return Err(Error::invalid("missing `t,value` header")),
    }
    let mut rows = Vec::new();
    for (n, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::invalid(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let mut field = || -> Result<f64> {
            parts
                .next()
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| Error::invalid(format!("malformed row {}: {line}", n + 2)))
        };
        let t = field()?;
        let v = field()?;
        rows.push((t, v));
    }
    Ok(rows)
}

/// Scientific notation with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}
