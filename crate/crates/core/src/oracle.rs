//! Brute-force ground truth on small finite ordered metric spaces.
//!
//! Every candidate point of `X^k` is enumerated, so results are exact and
//! independent of the iteration engine. The random instance generator
//! favours mixed-monotone table maps because uniformly random tables almost
//! never satisfy the hypotheses.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::contraction::ContractionTriple;
use crate::engine::ProductOperator;
use crate::error::{check_len, Error, Result};
use crate::order::{OrderedMetricSpace, Partition, ProductPoint, Upsilon};

/// Largest `|X|^k` the enumerators accept.
pub const ENUMERATION_GUARD: u128 = 1_000_000;

/// Largest number of ordered pairs the contraction check visits.
pub const PAIR_GUARD: u128 = 100_000_000;

/// Slack for the exhaustive contraction check.
pub const HYPOTHESIS_SLACK: f64 = 1e-12;

/// `(X, d, ⪯)` on `{0, …, n−1}` given by tables.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiniteSpace {
    distance: Vec<Vec<f64>>,
    order: Vec<Vec<bool>>,
}

impl FiniteSpace {
    /// Checks metric axioms and partial-order axioms exhaustively.
    pub fn new(distance: Vec<Vec<f64>>, order: Vec<Vec<bool>>) -> Result<Self> {
        let n = distance.len();
        if n == 0 {
            return Err(Error::invalid("finite space needs at least one element"));
        }
        check_len(n, order.len())?;
        for (d_row, o_row) in distance.iter().zip(&order) {
            check_len(n, d_row.len())?;
            check_len(n, o_row.len())?;
        }
        for a in 0..n {
            if distance[a][a] != 0.0 {
                return Err(Error::invalid(format!("d({a}, {a}) is not zero")));
            }
            if !order[a][a] {
                return Err(Error::invalid(format!("order is not reflexive at {a}")));
            }
            for b in 0..n {
                let d = distance[a][b];
                if !d.is_finite() || d < 0.0 {
                    return Err(Error::invalid(format!(
                        "d({a}, {b}) = {d} is not a distance"
                    )));
                }
                if a != b && d == 0.0 {
                    return Err(Error::invalid(format!(
                        "d({a}, {b}) = 0 for distinct points"
                    )));
                }
                if d != distance[b][a] {
                    return Err(Error::invalid(format!(
                        "distance is not symmetric at ({a}, {b})"
                    )));
                }
                if a != b && order[a][b] && order[b][a] {
                    return Err(Error::invalid(format!(
                        "order is not antisymmetric at ({a}, {b})"
                    )));
                }
                for c in 0..n {
                    if d > distance[a][c] + distance[c][b] {
                        return Err(Error::invalid(format!(
                            "triangle inequality fails for ({a}, {c}, {b})"
                        )));
                    }
                    if order[a][b] && order[b][c] && !order[a][c] {
                        return Err(Error::invalid(format!(
                            "order is not transitive at ({a}, {b}, {c})"
                        )));
                    }
                }
            }
        }
        Ok(FiniteSpace { distance, order })
    }

    /// The one-point space.
    pub fn singleton() -> Self {
        FiniteSpace {
            distance: vec![vec![0.0]],
            order: vec![vec![true]],
        }
    }

    /// `{0, …, n−1}` with `|a − b|` and the usual order.
    pub fn chain(n: usize) -> Result<Self> {
        let distance = (0..n)
            .map(|a| (0..n).map(|b| (a as f64 - b as f64).abs()).collect())
            .collect();
        let order = (0..n).map(|a| (0..n).map(|b| a <= b).collect()).collect();
        FiniteSpace::new(distance, order)
    }

    pub fn len(&self) -> usize {
        self.distance.len()
    }

    pub fn is_empty(&self) -> bool {
        self.distance.is_empty()
    }

    pub fn le(&self, a: usize, b: usize) -> bool {
        self.order[a][b]
    }

    pub fn d(&self, a: usize, b: usize) -> f64 {
        self.distance[a][b]
    }
}

impl OrderedMetricSpace for FiniteSpace {
    type Point = usize;

    fn distance(&self, a: &usize, b: &usize) -> Result<f64> {
        self.check_label(*a)?;
        self.check_label(*b)?;
        Ok(self.distance[*a][*b])
    }

    fn leq(&self, a: &usize, b: &usize) -> Result<bool> {
        self.check_label(*a)?;
        self.check_label(*b)?;
        Ok(self.order[*a][*b])
    }
}

impl FiniteSpace {
    fn check_label(&self, a: usize) -> Result<()> {
        if a < self.len() {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "label {a} is not in a space of size {}",
                self.len()
            )))
        }
    }
}

/// `F : X^k → X` stored as a table indexed by `Σ xᵢ nⁱ`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TabulatedMap {
    n: usize,
    k: usize,
    table: Vec<usize>,
}

impl TabulatedMap {
    pub fn new(n: usize, k: usize, table: Vec<usize>) -> Result<Self> {
        let size = candidate_count(n, k)?;
        check_len(size, table.len())?;
        if let Some(v) = table.iter().find(|&&v| v >= n) {
            return Err(Error::invalid(format!(
                "table value {v} is outside the space"
            )));
        }
        Ok(TabulatedMap { n, k, table })
    }

    pub fn from_fn(n: usize, k: usize, f: impl Fn(&[usize]) -> usize) -> Result<Self> {
        let size = candidate_count(n, k)?;
        let table = (0..size).map(|code| f(&decode(code, n, k))).collect();
        TabulatedMap::new(n, k, table)
    }

    pub fn constant(n: usize, k: usize, c: usize) -> Result<Self> {
        TabulatedMap::from_fn(n, k, |_| c)
    }

    pub fn eval(&self, x: &[usize]) -> usize {
        self.table[encode(x, self.n)]
    }

    pub fn is_constant(&self) -> bool {
        self.table.iter().all(|&v| v == self.table[0])
    }
}

impl ProductOperator<usize> for TabulatedMap {
    fn arity(&self) -> usize {
        self.k
    }

    fn apply(&self, args: &[&usize]) -> Result<usize> {
        check_len(self.k, args.len())?;
        if let Some(a) = args.iter().find(|&&&a| a >= self.n) {
            return Err(Error::invalid(format!(
                "label {a} is not in a space of size {}",
                self.n
            )));
        }
        let x: Vec<usize> = args.iter().map(|&&a| a).collect();
        Ok(self.eval(&x))
    }
}

fn candidate_count(n: usize, k: usize) -> Result<usize> {
    let size = (n as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
    if size > ENUMERATION_GUARD {
        return Err(Error::TooLarge {
            size,
            limit: ENUMERATION_GUARD,
        });
    }
    Ok(size as usize)
}

fn encode(x: &[usize], n: usize) -> usize {
    x.iter().rev().fold(0, |acc, &v| acc * n + v)
}

fn decode(mut code: usize, n: usize, k: usize) -> Vec<usize> {
    let mut x = Vec::with_capacity(k);
    for _ in 0..k {
        x.push(code % n);
        code /= n;
    }
    x
}

fn apply_permuted<F: ProductOperator<usize> + ?Sized>(
    f: &F,
    sigma: &[usize],
    x: &[usize],
) -> Result<usize> {
    let args: Vec<&usize> = sigma.iter().map(|&j| &x[j]).collect();
    f.apply(&args)
}

/// Every `x ∈ X^k` with `F(x ∘ σᵢ) = xᵢ` for all `i`, in enumeration order.
pub fn enumerate_upsilon_fixed_points<F: ProductOperator<usize> + ?Sized>(
    space: &FiniteSpace,
    f: &F,
    upsilon: &Upsilon,
) -> Result<Vec<ProductPoint<usize>>> {
    let (n, k) = (space.len(), upsilon.k());
    check_len(k, f.arity())?;
    let size = candidate_count(n, k)?;
    let mut out = Vec::new();
    'candidates: for code in 0..size {
        let x = decode(code, n, k);
        for (i, &xi) in x.iter().enumerate() {
            if apply_permuted(f, upsilon.map(i), &x)? != xi {
                continue 'candidates;
            }
        }
        out.push(ProductPoint::new(x));
    }
    Ok(out)
}

fn product_le(space: &FiniteSpace, partition: &Partition, x: &[usize], y: &[usize]) -> bool {
    (0..x.len()).all(|i| {
        if partition.is_a(i) {
            space.le(x[i], y[i])
        } else {
            space.le(y[i], x[i])
        }
    })
}

fn d_k(space: &FiniteSpace, x: &[usize], y: &[usize]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(&a, &b)| space.d(a, b))
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Conclusion {
    /// (i)–(iii) hold: at least one Υ-fixed point must exist; with (v),
    /// exactly one.
    Applicable {
        expected_unique: bool,
        confirmed: bool,
    },
    /// Some hypothesis failed; nothing is claimed.
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub contraction: bool,
    /// First counterexample `(x, y)` to the contraction inequality.
    pub contraction_witness: Option<(Vec<usize>, Vec<usize>)>,
    pub initial_point: Option<ProductPoint<usize>>,
    pub mixed_monotone: bool,
    /// Every map on a finite metric space is continuous.
    pub continuous: bool,
    pub upper_bounds: bool,
    pub fixed_points: Vec<ProductPoint<usize>>,
    pub conclusion: Conclusion,
}

impl HypothesisReport {
    pub fn all_pass(&self) -> bool {
        self.contraction
            && self.initial_point.is_some()
            && self.mixed_monotone
            && self.continuous
            && self.upper_bounds
    }
}

/// Exhaustively evaluates hypotheses (i), (ii), (iii), (v) and cross-checks
/// the conclusion against [`enumerate_upsilon_fixed_points`].
pub fn check_theorem_hypotheses<F: ProductOperator<usize> + ?Sized>(
    space: &FiniteSpace,
    f: &F,
    upsilon: &Upsilon,
    triple: &ContractionTriple,
) -> Result<HypothesisReport> {
    let (n, k) = (space.len(), upsilon.k());
    check_len(k, f.arity())?;
    let size = candidate_count(n, k)?;
    let pairs = (size as u128) * (size as u128);
    if pairs > PAIR_GUARD {
        return Err(Error::TooLarge {
            size: pairs,
            limit: PAIR_GUARD,
        });
    }
    let partition = upsilon.partition();
    let points: Vec<Vec<usize>> = (0..size).map(|c| decode(c, n, k)).collect();
    let values: Vec<usize> = points
        .iter()
        .map(|x| f.apply(&x.iter().collect::<Vec<_>>()))
        .collect::<Result<_>>()?;

    // (i)
    let mut contraction_witness = None;
    'outer: for (a, x) in points.iter().enumerate() {
        for (b, y) in points.iter().enumerate() {
            if !product_le(space, partition, x, y) {
                continue;
            }
            let lhs = triple.psi(space.d(values[a], values[b]));
            if lhs > triple.budget(d_k(space, x, y)) + HYPOTHESIS_SLACK {
                contraction_witness = Some((x.clone(), y.clone()));
                break 'outer;
            }
        }
    }

    // (ii)
    let initial_point = points
        .iter()
        .find(|x| {
            (0..k).all(|i| {
                let img =
                    values[encode(&upsilon.map(i).iter().map(|&j| x[j]).collect::<Vec<_>>(), n)];
                if partition.is_a(i) {
                    space.le(x[i], img)
                } else {
                    space.le(img, x[i])
                }
            })
        })
        .map(|x| ProductPoint::new(x.clone()));

    // (iii)
    let mut mixed_monotone = true;
    'mono: for (a, x) in points.iter().enumerate() {
        for j in 0..k {
            for v in 0..n {
                if v == x[j] || !space.le(x[j], v) {
                    continue;
                }
                let mut moved = x.clone();
                moved[j] = v;
                let hi = values[encode(&moved, n)];
                let ok = if partition.is_a(j) {
                    space.le(values[a], hi)
                } else {
                    space.le(hi, values[a])
                };
                if !ok {
                    mixed_monotone = false;
                    break 'mono;
                }
            }
        }
    }

    // (v) The product order is componentwise, so a common ⪯_k upper bound
    // exists iff every A-coordinate pair has a common upper bound and every
    // B-coordinate pair a common lower bound in X.
    let needs_upper = !partition.a().is_empty();
    let needs_lower = !partition.b().is_empty();
    let upper_bounds = (0..n).all(|a| {
        (0..n).all(|b| {
            (!needs_upper || (0..n).any(|z| space.le(a, z) && space.le(b, z)))
                && (!needs_lower || (0..n).any(|z| space.le(z, a) && space.le(z, b)))
        })
    });

    let fixed_points = enumerate_upsilon_fixed_points(space, f, upsilon)?;
    let contraction = contraction_witness.is_none();
    let conclusion = if contraction && initial_point.is_some() && mixed_monotone {
        Conclusion::Applicable {
            expected_unique: upper_bounds,
            confirmed: if upper_bounds {
                fixed_points.len() == 1
            } else {
                !fixed_points.is_empty()
            },
        }
    } else {
        Conclusion::NotApplicable
    };
    Ok(HypothesisReport {
        contraction,
        contraction_witness,
        initial_point,
        mixed_monotone,
        continuous: true,
        upper_bounds,
        fixed_points,
        conclusion,
    })
}

/// A random instance for oracle comparisons.
#[derive(Debug, Clone)]
pub struct FiniteInstance {
    pub space: FiniteSpace,
    pub map: TabulatedMap,
    pub upsilon: Upsilon,
}

/// Random poset on `n` points (a chain half of the time) with distances
/// drawn from `{1, 2}` off the diagonal and closed under shortest paths.
#[allow(clippy::needless_range_loop)]
pub fn random_finite_space<R: Rng + ?Sized>(rng: &mut R, n: usize) -> FiniteSpace {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let chain = rng.gen_bool(0.5);
    let mut order = vec![vec![false; n]; n];
    for (a, row) in order.iter_mut().enumerate() {
        row[a] = true;
    }
    for i in 0..n {
        for j in i + 1..n {
            if chain || rng.gen_bool(0.5) {
                order[perm[i]][perm[j]] = true;
            }
        }
    }
    for m in 0..n {
        for a in 0..n {
            for b in 0..n {
                if order[a][m] && order[m][b] {
                    order[a][b] = true;
                }
            }
        }
    }
    let mut distance = vec![vec![0.0; n]; n];
    for a in 0..n {
        for b in a + 1..n {
            let d = if rng.gen_bool(0.3) { 1.0 } else { 2.0 };
            distance[a][b] = d;
            distance[b][a] = d;
        }
    }
    for m in 0..n {
        for a in 0..n {
            for b in 0..n {
                let via = distance[a][m] + distance[m][b];
                if via < distance[a][b] {
                    distance[a][b] = via;
                }
            }
        }
    }
    FiniteSpace::new(distance, order).expect("generated tables satisfy the axioms")
}

/// Random partition with nonempty `A` and random conforming index maps.
pub fn random_upsilon<R: Rng + ?Sized>(rng: &mut R, k: usize) -> Upsilon {
    let mut mask: Vec<bool> = (0..k).map(|_| rng.gen_bool(0.5)).collect();
    if !mask.iter().any(|&a| a) {
        let i = rng.gen_range(0..k);
        mask[i] = true;
    }
    let partition = Partition::from_mask(mask).expect("k >= 2");
    let a: Vec<usize> = partition.a();
    let b: Vec<usize> = partition.b();
    let maps = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| {
                    let same = partition.is_a(i) == partition.is_a(j);
                    let pool = if same { &a } else { &b };
                    *pool
                        .choose(rng)
                        .expect("pool is nonempty for conforming maps")
                })
                .collect()
        })
        .collect();
    Upsilon::validate(partition, maps).expect("generated maps conform")
}

/// Longest strict chain ending at each element; strictly order-preserving.
fn heights(space: &FiniteSpace) -> Vec<i64> {
    let n = space.len();
    let mut h = vec![0i64; n];
    for _ in 0..n {
        for a in 0..n {
            for b in 0..n {
                if a != b && space.le(a, b) && h[b] < h[a] + 1 {
                    h[b] = h[a] + 1;
                }
            }
        }
    }
    h
}

/// `F(x) = c_{q(s(x))}` where `s` adds heights of selected `A`-coordinates
/// and subtracts those of selected `B`-coordinates, `q` is a nondecreasing
/// step function and `c` is a chain in `X`. Mixed monotone by construction.
pub fn random_monotone_map<R: Rng + ?Sized>(
    rng: &mut R,
    space: &FiniteSpace,
    partition: &Partition,
) -> TabulatedMap {
    let (n, k) = (space.len(), partition.k());
    if rng.gen_bool(0.25) {
        return TabulatedMap::constant(n, k, rng.gen_range(0..n)).expect("small table");
    }
    let h = heights(space);
    // Greedy chain from a random start, following random covers upward.
    let mut chain = vec![rng.gen_range(0..n)];
    loop {
        let last = *chain.last().unwrap();
        let above: Vec<usize> = (0..n).filter(|&b| b != last && space.le(last, b)).collect();
        match above.choose(rng) {
            Some(&b) if rng.gen_bool(0.7) => chain.push(b),
            _ => break,
        }
    }
    let weights: Vec<i64> = (0..k).map(|_| i64::from(rng.gen_bool(0.5))).collect();
    let hmax = h.iter().copied().max().unwrap_or(0);
    let span = (k as i64) * hmax;
    let mut thresholds: Vec<i64> = (1..chain.len())
        .map(|_| rng.gen_range(-span..=span.max(-span)))
        .collect();
    thresholds.sort_unstable();
    TabulatedMap::from_fn(n, k, |x| {
        let s: i64 = (0..k)
            .map(|j| {
                let v = weights[j] * h[x[j]];
                if partition.is_a(j) {
                    v
                } else {
                    -v
                }
            })
            .sum();
        let level = thresholds.iter().filter(|&&t| s >= t).count();
        chain[level]
    })
    .expect("small table")
}

/// Proper nonempty subsets of `X` that are up-closed (`up`) or
/// down-closed and contain, with each member, every point at distance 1.
fn admissible_sets(space: &FiniteSpace, up: bool) -> Vec<Vec<bool>> {
    let n = space.len();
    (1..(1u32 << n) - 1)
        .map(|mask| (0..n).map(|a| mask >> a & 1 == 1).collect::<Vec<bool>>())
        .filter(|m| {
            (0..n).all(|a| {
                !m[a]
                    || (0..n).all(|b| {
                        let linked =
                            space.d(a, b) < 1.5 || if up { space.le(a, b) } else { space.le(b, a) };
                        !linked || m[b]
                    })
            })
        })
        .collect()
}

/// Two-valued map `F(x) = c₁` if every selected coordinate lies in its
/// set, else `c₀`, with `c₀ ⪯ c₁` at distance 1. The sets are up-closed
/// (`A`) or down-closed (`B`) unions of classes linked by distance 1, so
/// ordered pairs at distance 1 have equal images.
pub fn random_threshold_map<R: Rng + ?Sized>(
    rng: &mut R,
    space: &FiniteSpace,
    partition: &Partition,
) -> TabulatedMap {
    let (n, k) = (space.len(), partition.k());
    let outputs: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| (0..n).map(move |b| (a, b)))
        .filter(|&(a, b)| a != b && space.le(a, b) && space.d(a, b) == 1.0)
        .collect();
    let Some(&(c0, c1)) = outputs.choose(rng) else {
        return TabulatedMap::constant(n, k, rng.gen_range(0..n)).expect("small table");
    };
    let ups = admissible_sets(space, true);
    let downs = admissible_sets(space, false);
    let mut sets: Vec<Option<Vec<bool>>> = (0..k)
        .map(|j| {
            let pool = if partition.is_a(j) { &ups } else { &downs };
            if rng.gen_bool(0.5) {
                pool.choose(rng).cloned()
            } else {
                None
            }
        })
        .collect();
    if sets.iter().all(Option::is_none) {
        let j = rng.gen_range(0..k);
        let pool = if partition.is_a(j) { &ups } else { &downs };
        sets[j] = pool.choose(rng).cloned();
    }
    TabulatedMap::from_fn(n, k, |x| {
        let inside = sets
            .iter()
            .zip(x)
            .all(|(set, &v)| set.as_ref().is_none_or(|m| m[v]));
        if inside {
            c1
        } else {
            c0
        }
    })
    .expect("small table")
}

/// Draws a conforming Υ, then a space and a map: score-based
/// ([`random_monotone_map`], sometimes constant) or two-valued
/// ([`random_threshold_map`]). For the two-valued family the space is
/// redrawn a few times until the map is not constant.
pub fn random_instance<R: Rng + ?Sized>(rng: &mut R, k: usize, n: usize) -> FiniteInstance {
    let upsilon = random_upsilon(rng, k);
    if rng.gen_bool(0.6) {
        for _ in 0..20 {
            let space = random_finite_space(rng, n);
            let map = random_threshold_map(rng, &space, upsilon.partition());
            if !map.is_constant() {
                return FiniteInstance {
                    space,
                    map,
                    upsilon,
                };
            }
        }
    }
    let space = random_finite_space(rng, n);
    let map = random_monotone_map(rng, &space, upsilon.partition());
    FiniteInstance {
        space,
        map,
        upsilon,
    }
}
