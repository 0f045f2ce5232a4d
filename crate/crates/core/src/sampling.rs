//! Seeded generators of smooth grid functions and ordered product pairs for
//! sampled property checks.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::Rng;

use crate::engine::MonotoneSample;
use crate::error::Result;
use crate::order::{Partition, PointPair, ProductPoint};
use crate::space::{Grid, GridFunction};

/// Values of a random trigonometric blend in `[-1, 1]` at `u ∈ [0, 1]`.
fn blend<R: Rng + ?Sized>(rng: &mut R) -> impl Fn(f64) -> f64 {
    let terms: Vec<(f64, f64, f64)> = (1..=3)
        .map(|k| {
            (
                rng.gen_range(-1.0..1.0),
                k as f64 * PI,
                rng.gen_range(0.0..2.0 * PI),
            )
        })
        .collect();
    let offset: f64 = rng.gen_range(-1.0..1.0);
    let norm = offset.abs() + terms.iter().map(|t| t.0.abs()).sum::<f64>();
    move |u| {
        if norm == 0.0 {
            return 0.0;
        }
        let v = offset
            + terms
                .iter()
                .map(|(a, w, ph)| a * (w * u + ph).sin())
                .sum::<f64>();
        (v / norm).clamp(-1.0, 1.0)
    }
}

/// A smooth function on the grid with values in `[lo, hi]`.
pub fn smooth_function<R: Rng + ?Sized>(
    rng: &mut R,
    grid: &Arc<Grid>,
    lo: f64,
    hi: f64,
) -> Result<GridFunction> {
    let g = blend(rng);
    let t_end = grid.t_end();
    GridFunction::sample(grid, |t| {
        let u = (t - 1.0) / (t_end - 1.0);
        (lo + (hi - lo) * (0.5 + 0.5 * g(u))).clamp(lo, hi)
    })
}

/// A smooth function `r` with values in `[0, 1]`, scaled by a random factor
/// that is occasionally zero.
fn smooth_fraction<R: Rng + ?Sized>(rng: &mut R, grid: &Arc<Grid>) -> Result<GridFunction> {
    let scale = if rng.gen_bool(0.1) {
        0.0
    } else {
        rng.gen_range(0.0..1.0)
    };
    let r = smooth_function(rng, grid, 0.0, 1.0)?;
    GridFunction::new(grid.clone(), r.values().iter().map(|v| v * scale).collect())
}

/// `x ⪯_k z` with every component in `[lo, hi]`: `A`-components are raised
/// towards `hi`, `B`-components lowered towards `lo`.
///
/// One pair in four is instead a uniform shift by `δ` of functions within 1
/// of `lo`, where log-type nonlinearities are steepest.
pub fn ordered_pair<R: Rng + ?Sized>(
    rng: &mut R,
    grid: &Arc<Grid>,
    partition: &Partition,
    lo: f64,
    hi: f64,
) -> Result<PointPair<GridFunction>> {
    if rng.gen_bool(0.25) {
        return shifted_pair(rng, grid, partition, lo, hi);
    }
    let mut xs = Vec::with_capacity(partition.k());
    let mut zs = Vec::with_capacity(partition.k());
    for i in 0..partition.k() {
        let x = smooth_function(rng, grid, lo, hi)?;
        let r = smooth_fraction(rng, grid)?;
        let values = x
            .values()
            .iter()
            .zip(r.values())
            .map(|(&v, &f)| {
                if partition.is_a(i) {
                    v + f * (hi - v)
                } else {
                    v - f * (v - lo)
                }
            })
            .collect();
        zs.push(GridFunction::new(grid.clone(), values)?);
        xs.push(x);
    }
    Ok((ProductPoint::new(xs), ProductPoint::new(zs)))
}

fn shifted_pair<R: Rng + ?Sized>(
    rng: &mut R,
    grid: &Arc<Grid>,
    partition: &Partition,
    lo: f64,
    hi: f64,
) -> Result<PointPair<GridFunction>> {
    let width = rng.gen_range(0.0..1.0f64).min(0.5 * (hi - lo));
    let delta = rng.gen_range(0.0..1.0) * (hi - lo - width).min(1.0);
    let mut xs = Vec::with_capacity(partition.k());
    let mut zs = Vec::with_capacity(partition.k());
    for i in 0..partition.k() {
        let (base, shift) = if partition.is_a(i) {
            (lo, delta)
        } else {
            (lo + delta, -delta)
        };
        let x = smooth_function(rng, grid, base, base + width)?;
        let z = GridFunction::new(
            grid.clone(),
            x.values()
                .iter()
                .map(|v| (v + shift).clamp(lo, hi))
                .collect(),
        )?;
        xs.push(x);
        zs.push(z);
    }
    Ok((ProductPoint::new(xs), ProductPoint::new(zs)))
}

/// Single-coordinate upward moves inside `[lo, hi]`.
pub fn monotone_samples<R: Rng + ?Sized>(
    rng: &mut R,
    grid: &Arc<Grid>,
    k: usize,
    lo: f64,
    hi: f64,
    count: usize,
) -> Result<Vec<MonotoneSample<GridFunction>>> {
    (0..count)
        .map(|n| {
            let base: Vec<GridFunction> = (0..k)
                .map(|_| smooth_function(rng, grid, lo, hi))
                .collect::<Result<_>>()?;
            let coordinate = n % k;
            let r = smooth_fraction(rng, grid)?;
            let raised = GridFunction::new(
                grid.clone(),
                base[coordinate]
                    .values()
                    .iter()
                    .zip(r.values())
                    .map(|(&v, &f)| v + f * (hi - v))
                    .collect(),
            )?;
            Ok(MonotoneSample {
                base: ProductPoint::new(base),
                coordinate,
                raised,
            })
        })
        .collect()
}
