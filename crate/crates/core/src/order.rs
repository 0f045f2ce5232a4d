//! Partially ordered metric structure on `X^k`.
//!
//! A [`Partition`] splits the index set `{1, …, k}` into blocks `A` and `B`.
//! The product order compares `A`-coordinates with `⪯` and `B`-coordinates
//! with `⪰`; the product metric is the maximum of componentwise distances.
//! An [`Upsilon`] tuple holds one index map `σᵢ` per component; component `i`
//! of a Υ-fixed point satisfies `F(x_{σᵢ(1)}, …, x_{σᵢ(k)}) = xᵢ`.
//!
//! Index convention: constructors and reports use 1-based indices, storage
//! and accessors are 0-based.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::error::{check_len, Error, Result};

/// A base space `(X, d, ⪯)` given by its two capabilities.
///
/// Both methods are fallible so that spaces with structural constraints
/// (grid functions on a common grid, labels of a finite table) can reject
/// incompatible operands instead of panicking.
pub trait OrderedMetricSpace {
    type Point: Clone;

    fn distance(&self, a: &Self::Point, b: &Self::Point) -> Result<f64>;

    /// `a ⪯ b` under the space's comparison policy.
    fn leq(&self, a: &Self::Point, b: &Self::Point) -> Result<bool>;

    fn geq(&self, a: &Self::Point, b: &Self::Point) -> Result<bool> {
        self.leq(b, a)
    }
}

/// The real line with `|a - b|` and `a ≤ b + tol`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RealLine {
    pub tol: f64,
}

impl RealLine {
    pub fn with_tol(tol: f64) -> Self {
        RealLine { tol }
    }
}

impl OrderedMetricSpace for RealLine {
    type Point = f64;

    fn distance(&self, a: &f64, b: &f64) -> Result<f64> {
        Ok((a - b).abs())
    }

    fn leq(&self, a: &f64, b: &f64) -> Result<bool> {
        Ok(*a <= *b + self.tol)
    }
}

/// `Λ_k = A ∪ B` with `A ∩ B = ∅`, `k ≥ 2`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Partition {
    in_a: Vec<bool>,
}

impl Partition {
    /// Builds the partition from the 1-based members of `A`; every other
    /// index belongs to `B`.
    pub fn new(k: usize, a: &[usize]) -> Result<Self> {
        if k < 2 {
            return Err(Error::invalid(format!("k must be at least 2, got {k}")));
        }
        let mut in_a = vec![false; k];
        for &i in a {
            if i == 0 || i > k {
                return Err(Error::invalid(format!("index {i} is outside 1..={k}")));
            }
            if in_a[i - 1] {
                return Err(Error::invalid(format!("index {i} listed twice in A")));
            }
            in_a[i - 1] = true;
        }
        Ok(Partition { in_a })
    }

    /// Builds the partition from both blocks, checking that they cover
    /// `{1, …, k}` and are disjoint.
    pub fn from_blocks(k: usize, a: &[usize], b: &[usize]) -> Result<Self> {
        let p = Partition::new(k, a)?;
        let mut seen_b = vec![false; k];
        for &i in b {
            if i == 0 || i > k {
                return Err(Error::invalid(format!("index {i} is outside 1..={k}")));
            }
            if p.in_a[i - 1] {
                return Err(Error::invalid(format!("index {i} is in both A and B")));
            }
            if seen_b[i - 1] {
                return Err(Error::invalid(format!("index {i} listed twice in B")));
            }
            seen_b[i - 1] = true;
        }
        if let Some(i) = (0..k).find(|&i| !p.in_a[i] && !seen_b[i]) {
            return Err(Error::invalid(format!(
                "index {} is in neither A nor B",
                i + 1
            )));
        }
        Ok(p)
    }

    /// `A` = odd indices, `B` = even indices (1-based).
    pub fn alternating(k: usize) -> Result<Self> {
        let a: Vec<usize> = (1..=k).step_by(2).collect();
        Partition::new(k, &a)
    }

    pub fn from_mask(in_a: Vec<bool>) -> Result<Self> {
        if in_a.len() < 2 {
            return Err(Error::invalid(format!(
                "k must be at least 2, got {}",
                in_a.len()
            )));
        }
        Ok(Partition { in_a })
    }

    pub fn k(&self) -> usize {
        self.in_a.len()
    }

    /// Whether 0-based index `i` is in `A`.
    pub fn is_a(&self, i: usize) -> bool {
        self.in_a[i]
    }

    /// 1-based members of `A`.
    pub fn a(&self) -> Vec<usize> {
        (0..self.k())
            .filter(|&i| self.in_a[i])
            .map(|i| i + 1)
            .collect()
    }

    /// 1-based members of `B`.
    pub fn b(&self) -> Vec<usize> {
        (0..self.k())
            .filter(|&i| !self.in_a[i])
            .map(|i| i + 1)
            .collect()
    }
}

/// A point of `X^k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProductPoint<P>(Vec<P>);

/// An `(x, z)` pair of product points.
pub type PointPair<P> = (ProductPoint<P>, ProductPoint<P>);

impl<P> ProductPoint<P> {
    pub fn new(components: Vec<P>) -> Self {
        ProductPoint(components)
    }

    pub fn k(&self) -> usize {
        self.0.len()
    }

    pub fn components(&self) -> &[P] {
        &self.0
    }

    pub fn into_components(self) -> Vec<P> {
        self.0
    }

    pub fn get(&self, i: usize) -> &P {
        &self.0[i]
    }

    pub fn iter(&self) -> std::slice::Iter<'_, P> {
        self.0.iter()
    }
}

impl<P> From<Vec<P>> for ProductPoint<P> {
    fn from(v: Vec<P>) -> Self {
        ProductPoint(v)
    }
}

impl<P> std::ops::Index<usize> for ProductPoint<P> {
    type Output = P;

    fn index(&self, i: usize) -> &P {
        &self.0[i]
    }
}

/// `d_k(x, y) = max_i d(xᵢ, yᵢ)`.
pub fn max_metric<S: OrderedMetricSpace>(
    space: &S,
    x: &ProductPoint<S::Point>,
    y: &ProductPoint<S::Point>,
) -> Result<f64> {
    check_len(x.k(), y.k())?;
    let mut best = 0.0_f64;
    for (a, b) in x.iter().zip(y.iter()) {
        best = best.max(space.distance(a, b)?);
    }
    Ok(best)
}

/// `x ⪯_k y`: `xᵢ ⪯ yᵢ` for `i ∈ A` and `xᵢ ⪰ yᵢ` for `i ∈ B`.
pub fn product_leq<S: OrderedMetricSpace>(
    space: &S,
    partition: &Partition,
    x: &ProductPoint<S::Point>,
    y: &ProductPoint<S::Point>,
) -> Result<bool> {
    check_len(partition.k(), x.k())?;
    check_len(partition.k(), y.k())?;
    for i in 0..partition.k() {
        let ok = if partition.is_a(i) {
            space.leq(&x[i], &y[i])?
        } else {
            space.geq(&x[i], &y[i])?
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Which block a σ-image was required to land in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Block {
    A,
    B,
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Block::A => f.write_str("A"),
            Block::B => f.write_str("B"),
        }
    }
}

/// One failed Ω/Ω′ membership condition: `σᵢ(j)` landed outside `expected`.
/// All indices are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MembershipViolation {
    pub i: usize,
    pub j: usize,
    pub image: usize,
    pub expected: Block,
}

impl fmt::Display for MembershipViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "sigma_{}({}) = {} is not in {}",
            self.i, self.j, self.image, self.expected
        )
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum UpsilonError {
    #[error("expected {expected} maps, got {got}")]
    WrongCount { expected: usize, got: usize },

    #[error("sigma_{i} has {got} entries, expected {expected}")]
    WrongLength {
        i: usize,
        expected: usize,
        got: usize,
    },

    #[error("sigma_{i}({j}) = {value} is outside 1..={k}")]
    OutOfRange {
        i: usize,
        j: usize,
        value: usize,
        k: usize,
    },

    /// The maps are well formed but violate Ω/Ω′ membership.
    #[error("{} membership violation(s), first: {}", .0.len(), .0[0])]
    Membership(Vec<MembershipViolation>),
}

impl UpsilonError {
    pub fn is_structural(&self) -> bool {
        !matches!(self, UpsilonError::Membership(_))
    }
}

/// `Υ = (σ₁, …, σ_k)` with `σᵢ ∈ Ω_{A,B}` for `i ∈ A` and `σᵢ ∈ Ω′_{A,B}`
/// for `i ∈ B`. The maps need not be bijective.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Upsilon {
    partition: Partition,
    maps: Vec<Vec<usize>>,
}

impl Upsilon {
    /// Validates 1-based index maps against the partition.
    pub fn validate(partition: Partition, maps: Vec<Vec<usize>>) -> Result<Self, UpsilonError> {
        let k = partition.k();
        if maps.len() != k {
            return Err(UpsilonError::WrongCount {
                expected: k,
                got: maps.len(),
            });
        }
        for (i, sigma) in maps.iter().enumerate() {
            if sigma.len() != k {
                return Err(UpsilonError::WrongLength {
                    i: i + 1,
                    expected: k,
                    got: sigma.len(),
                });
            }
            if let Some((j, &value)) = sigma.iter().enumerate().find(|(_, &v)| v == 0 || v > k) {
                return Err(UpsilonError::OutOfRange {
                    i: i + 1,
                    j: j + 1,
                    value,
                    k,
                });
            }
        }
        let zero_based: Vec<Vec<usize>> = maps
            .into_iter()
            .map(|sigma| sigma.into_iter().map(|v| v - 1).collect())
            .collect();
        let violations = membership_violations(&partition, &zero_based);
        if !violations.is_empty() {
            return Err(UpsilonError::Membership(violations));
        }
        Ok(Upsilon {
            partition,
            maps: zero_based,
        })
    }

    /// The `2m`-component cyclic shift `σᵢ(j) = ((i + j - 2) mod 2m) + 1`
    /// with `A` the odd and `B` the even indices.
    pub fn cyclic_shift(m: usize) -> Result<Self> {
        if m < 1 {
            return Err(Error::invalid("cyclic shift needs m >= 1"));
        }
        let k = 2 * m;
        let partition = Partition::alternating(k)?;
        let maps = (1..=k)
            .map(|i| (1..=k).map(|j| (i + j - 2) % k + 1).collect())
            .collect();
        Upsilon::validate(partition, maps).map_err(|e| Error::invalid(e.to_string()))
    }

    /// The coupled-fixed-point tuple `σ₁ = id`, `σ₂ = swap` on `A = {1}`,
    /// `B = {2}`.
    pub fn coupled() -> Self {
        Upsilon::cyclic_shift(1).expect("m = 1 is valid")
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn k(&self) -> usize {
        self.partition.k()
    }

    /// 0-based images of `σᵢ` for 0-based `i`.
    pub fn map(&self, i: usize) -> &[usize] {
        &self.maps[i]
    }

    /// 1-based rows, as written in matrix form.
    pub fn one_based(&self) -> Vec<Vec<usize>> {
        self.maps
            .iter()
            .map(|s| s.iter().map(|v| v + 1).collect())
            .collect()
    }

    /// `(x_{σᵢ(1)}, …, x_{σᵢ(k)})` for 0-based `i`.
    pub fn permuted<'a, P>(&self, i: usize, x: &'a ProductPoint<P>) -> Vec<&'a P> {
        self.maps[i].iter().map(|&j| &x[j]).collect()
    }
}

/// Direct check of Ω/Ω′ membership on 0-based maps.
pub(crate) fn membership_violations(
    partition: &Partition,
    maps: &[Vec<usize>],
) -> Vec<MembershipViolation> {
    let mut out = Vec::new();
    for (i, sigma) in maps.iter().enumerate() {
        let preserve = partition.is_a(i);
        for (j, &image) in sigma.iter().enumerate() {
            let source_in_a = partition.is_a(j);
            let want_a = source_in_a == preserve;
            if partition.is_a(image) != want_a {
                out.push(MembershipViolation {
                    i: i + 1,
                    j: j + 1,
                    image: image + 1,
                    expected: if want_a { Block::A } else { Block::B },
                });
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Nondecreasing,
    Nonincreasing,
}

/// Checks the regularity conclusion on finite data: every term of a
/// nondecreasing sequence lies below `limit`, every term of a nonincreasing
/// one above it. The comparison slack is the space's own policy.
pub fn is_regular_witness<S: OrderedMetricSpace>(
    space: &S,
    sequence: &[S::Point],
    limit: &S::Point,
    direction: Direction,
) -> Result<bool> {
    if sequence.is_empty() {
        return Err(Error::invalid(
            "regularity witness needs a nonempty sequence",
        ));
    }
    for term in sequence {
        let ok = match direction {
            Direction::Nondecreasing => space.leq(term, limit)?,
            Direction::Nonincreasing => space.geq(term, limit)?,
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Product-space version of [`is_regular_witness`], using `⪯_k`.
pub fn is_regular_witness_product<S: OrderedMetricSpace>(
    space: &S,
    partition: &Partition,
    sequence: &[ProductPoint<S::Point>],
    limit: &ProductPoint<S::Point>,
    direction: Direction,
) -> Result<bool> {
    if sequence.is_empty() {
        return Err(Error::invalid(
            "regularity witness needs a nonempty sequence",
        ));
    }
    for term in sequence {
        let ok = match direction {
            Direction::Nondecreasing => product_leq(space, partition, term, limit)?,
            Direction::Nonincreasing => product_leq(space, partition, limit, term)?,
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pp(v: &[f64]) -> ProductPoint<f64> {
        ProductPoint::new(v.to_vec())
    }

    #[test]
    fn max_metric_examples() {
        let r = RealLine::default();
        assert_eq!(
            max_metric(&r, &pp(&[1.0, 5.0]), &pp(&[1.0, 5.0])).unwrap(),
            0.0
        );
        assert_eq!(
            max_metric(&r, &pp(&[1.0, 5.0]), &pp(&[3.0, 4.0])).unwrap(),
            2.0
        );
        assert_eq!(
            max_metric(&r, &pp(&[0.0, 0.0, 0.0]), &pp(&[1.0, 2.0, 3.0])).unwrap(),
            3.0
        );
        assert!(matches!(
            max_metric(&r, &pp(&[0.0, 0.0]), &pp(&[1.0, 2.0, 3.0])),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn product_leq_examples() {
        let r = RealLine::default();
        let p = Partition::new(2, &[1]).unwrap();
        assert!(product_leq(&r, &p, &pp(&[0.0, 5.0]), &pp(&[0.0, 5.0])).unwrap());
        assert!(product_leq(&r, &p, &pp(&[0.0, 5.0]), &pp(&[1.0, 3.0])).unwrap());
        assert!(!product_leq(&r, &p, &pp(&[0.0, 5.0]), &pp(&[1.0, 7.0])).unwrap());
        assert!(product_leq(&r, &p, &pp(&[0.0]), &pp(&[1.0])).is_err());
    }

    #[test]
    fn partition_constructors() {
        assert!(Partition::new(1, &[1]).is_err());
        assert!(Partition::new(3, &[4]).is_err());
        let p = Partition::from_blocks(3, &[1, 3], &[2]).unwrap();
        assert_eq!(p.a(), vec![1, 3]);
        assert_eq!(p.b(), vec![2]);
        assert!(Partition::from_blocks(3, &[1], &[1, 2, 3]).is_err());
        assert!(Partition::from_blocks(3, &[1], &[2]).is_err());
        // Either block may be empty.
        assert_eq!(Partition::new(2, &[]).unwrap().b(), vec![1, 2]);
        assert_eq!(Partition::new(2, &[1, 2]).unwrap().b(), Vec::<usize>::new());
    }

    #[test]
    fn validate_upsilon_examples() {
        let p = Partition::new(2, &[1]).unwrap();
        assert!(Upsilon::validate(p.clone(), vec![vec![1, 2], vec![2, 1]]).is_ok());

        let err = Upsilon::validate(p.clone(), vec![vec![1, 2], vec![1, 2]]).unwrap_err();
        match err {
            UpsilonError::Membership(v) => {
                assert!(v.iter().all(|x| x.i == 2));
                assert_eq!(v.len(), 2);
            }
            other => panic!("unexpected {other:?}"),
        }

        let err = Upsilon::validate(p.clone(), vec![vec![1, 3], vec![2, 1]]).unwrap_err();
        assert!(err.is_structural());
        assert_eq!(
            err,
            UpsilonError::OutOfRange {
                i: 1,
                j: 2,
                value: 3,
                k: 2
            }
        );
        assert!(Upsilon::validate(p, vec![vec![1, 2]])
            .unwrap_err()
            .is_structural());
    }

    #[test]
    fn non_bijective_maps_are_allowed() {
        // σ₁ sends everything in A to 1 and everything in B to 2.
        let p = Partition::new(4, &[1, 3]).unwrap();
        let maps = vec![
            vec![1, 2, 1, 2],
            vec![2, 1, 2, 1],
            vec![3, 4, 3, 4],
            vec![4, 3, 4, 3],
        ];
        assert!(Upsilon::validate(p, maps).is_ok());
    }

    #[test]
    fn cyclic_shift_rows() {
        let u = Upsilon::cyclic_shift(1).unwrap();
        assert_eq!(u.one_based(), vec![vec![1, 2], vec![2, 1]]);
        let u = Upsilon::cyclic_shift(2).unwrap();
        assert_eq!(u.one_based()[2], vec![3, 4, 1, 2]);
        assert_eq!(u.one_based()[3], vec![4, 1, 2, 3]);
        for m in 1..=8 {
            let u = Upsilon::cyclic_shift(m).unwrap();
            assert_eq!(u.one_based()[0], (1..=2 * m).collect::<Vec<_>>());
        }
        assert!(Upsilon::cyclic_shift(0).is_err());
    }

    #[test]
    fn cyclic_shift_class_behaviour_is_exhaustive() {
        for m in 1..=8 {
            let u = Upsilon::cyclic_shift(m).unwrap();
            for (i, row) in u.one_based().iter().enumerate() {
                let i = i + 1;
                for (j, &image) in row.iter().enumerate() {
                    let j = j + 1;
                    if i % 2 == 1 {
                        assert_eq!(image % 2, j % 2);
                    } else {
                        assert_ne!(image % 2, j % 2);
                    }
                }
            }
        }
    }

    #[test]
    fn permuted_picks_components() {
        let u = Upsilon::cyclic_shift(2).unwrap();
        let x = pp(&[10.0, 20.0, 30.0, 40.0]);
        let got: Vec<f64> = u.permuted(2, &x).into_iter().copied().collect();
        assert_eq!(got, vec![30.0, 40.0, 10.0, 20.0]);
    }

    #[test]
    fn regular_witness_examples() {
        let r = RealLine::default();
        let constant = vec![3.0; 5];
        assert!(is_regular_witness(&r, &constant, &3.0, Direction::Nondecreasing).unwrap());
        let up: Vec<f64> = (1..50).map(|n| 1.0 - 1.0 / n as f64).collect();
        assert!(is_regular_witness(&r, &up, &1.0, Direction::Nondecreasing).unwrap());
        let down: Vec<f64> = (1..50).map(|n| 1.0 + 1.0 / n as f64).collect();
        assert!(!is_regular_witness(&r, &down, &1.0, Direction::Nondecreasing).unwrap());
        assert!(is_regular_witness(&r, &down, &1.0, Direction::Nonincreasing).unwrap());
        assert!(is_regular_witness(&r, &[], &1.0, Direction::Nondecreasing).is_err());
    }

    #[test]
    fn regular_witness_on_product() {
        let r = RealLine::default();
        let p = Partition::new(2, &[1]).unwrap();
        let seq: Vec<_> = (1..20)
            .map(|n| pp(&[1.0 - 1.0 / n as f64, 1.0 + 1.0 / n as f64]))
            .collect();
        let limit = pp(&[1.0, 1.0]);
        assert!(
            is_regular_witness_product(&r, &p, &seq, &limit, Direction::Nondecreasing).unwrap()
        );
        assert!(
            !is_regular_witness_product(&r, &p, &seq, &limit, Direction::Nonincreasing).unwrap()
        );
    }

    fn triple(k: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>)> {
        let v = || proptest::collection::vec(-100.0..100.0_f64, k);
        (v(), v(), v())
    }

    proptest! {
        #[test]
        fn max_metric_axioms((x, y, z) in (2usize..6).prop_flat_map(triple)) {
            let r = RealLine::default();
            let (x, y, z) = (pp(&x), pp(&y), pp(&z));
            let dxy = max_metric(&r, &x, &y).unwrap();
            prop_assert!(dxy >= 0.0);
            prop_assert_eq!(dxy, max_metric(&r, &y, &x).unwrap());
            prop_assert_eq!(max_metric(&r, &x, &x).unwrap(), 0.0);
            prop_assert_eq!(dxy == 0.0, x == y);
            let bound = max_metric(&r, &x, &z).unwrap() + max_metric(&r, &z, &y).unwrap();
            prop_assert!(dxy <= bound * (1.0 + 1e-15));
        }

        #[test]
        fn product_order_is_a_partial_order(
            (x, y, z) in (2usize..6).prop_flat_map(|k| {
                let v = move || proptest::collection::vec(-3i32..3, k);
                (v(), v(), v())
            }),
            mask in proptest::collection::vec(any::<bool>(), 6),
        ) {
            let r = RealLine::default();
            let k = x.len();
            let p = Partition::from_mask(mask[..k].to_vec()).unwrap();
            let f = |v: &Vec<i32>| ProductPoint::new(v.iter().map(|&a| a as f64).collect::<Vec<_>>());
            let (x, y, z) = (f(&x), f(&y), f(&z));
            prop_assert!(product_leq(&r, &p, &x, &x).unwrap());
            if product_leq(&r, &p, &x, &y).unwrap() && product_leq(&r, &p, &y, &z).unwrap() {
                prop_assert!(product_leq(&r, &p, &x, &z).unwrap());
            }
            if product_leq(&r, &p, &x, &y).unwrap() && product_leq(&r, &p, &y, &x).unwrap() {
                prop_assert_eq!(x, y);
            }
        }

        /// Componentwise-Cauchy sequences are Cauchy in `d_k` with the same modulus.
        #[test]
        fn componentwise_cauchy_is_product_cauchy(
            starts in proptest::collection::vec(-5.0..5.0_f64, 2..5),
            rates in proptest::collection::vec(0.1..0.9_f64, 5),
        ) {
            let r = RealLine::default();
            let k = starts.len();
            // Component i: x_n = s_i * rate_i^n, so |x_n - x_p| <= |s_i| rate_i^min(n,p).
            let seq: Vec<ProductPoint<f64>> = (0..30)
                .map(|n| pp(&(0..k).map(|i| starts[i] * rates[i].powi(n)).collect::<Vec<_>>()))
                .collect();
            let modulus = |n: usize| (0..k)
                .map(|i| starts[i].abs() * rates[i].powi(n as i32))
                .fold(0.0, f64::max);
            for n in 0..seq.len() {
                for p in n..seq.len() {
                    prop_assert!(max_metric(&r, &seq[n], &seq[p]).unwrap() <= modulus(n) + 1e-15);
                }
            }
        }
    }
}
