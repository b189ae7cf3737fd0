//! Truncated power series in `t` with exact rational coefficients, and the
//! Poincaré series of classifying spaces of products of `GL`, `O` and `Sp`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `Σ_{k ≤ N} c_k t^k` with `c_k ∈ ℚ`. Coefficients above `N` are discarded by
/// every operation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TruncatedSeries {
    degree: u32,
    coeffs: Vec<BigRational>,
}

impl TruncatedSeries {
    pub fn zero(degree: u32) -> Self {
        TruncatedSeries {
            degree,
            coeffs: vec![BigRational::zero(); degree as usize + 1],
        }
    }

    pub fn one(degree: u32) -> Self {
        Self::monomial(degree, 0, BigRational::one())
    }

    /// `c·t^k`, or zero when `k` exceeds the truncation degree.
    pub fn monomial(degree: u32, k: u32, c: BigRational) -> Self {
        let mut s = Self::zero(degree);
        if k <= degree {
            s.coeffs[k as usize] = c;
        }
        s
    }

    /// Series with integer coefficients `coeffs[k]` at `t^k`; extra entries are truncated.
    pub fn from_integers(degree: u32, coeffs: &[i64]) -> Self {
        let mut s = Self::zero(degree);
        for (k, &c) in coeffs.iter().enumerate().take(degree as usize + 1) {
            s.coeffs[k] = BigRational::from_integer(c.into());
        }
        s
    }

    /// Builds a series from sparse `(exponent, coefficient)` pairs.
    pub fn from_terms(degree: u32, terms: impl IntoIterator<Item = (u32, BigRational)>) -> Result<Self> {
        let mut s = Self::zero(degree);
        for (k, c) in terms {
            if k > degree {
                return Err(Error::domain(format!(
                    "exponent {k} exceeds truncation degree {degree}"
                )));
            }
            s.coeffs[k as usize] += c;
        }
        Ok(s)
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn coeff(&self, k: u32) -> BigRational {
        self.coeffs
            .get(k as usize)
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// Nonzero terms in increasing exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (u32, &BigRational)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| (k as u32, c))
    }

    /// Coefficients as integers, if they all are.
    pub fn integer_coeffs(&self) -> Option<Vec<BigInt>> {
        self.coeffs
            .iter()
            .map(|c| c.is_integer().then(|| c.to_integer()))
            .collect()
    }

    fn check_degree(&self, other: &Self) -> Result<()> {
        if self.degree != other.degree {
            return Err(Error::domain(format!(
                "truncation degrees differ: {} vs {}",
                self.degree, other.degree
            )));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_degree(other)?;
        Ok(TruncatedSeries {
            degree: self.degree,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.try_add(&-other)
    }

    /// Cauchy product truncated at the common degree.
    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_degree(other)?;
        let n = self.degree as usize;
        let mut out = vec![BigRational::zero(); n + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs[..=n - i].iter().enumerate() {
                if !b.is_zero() {
                    out[i + j] += a * b;
                }
            }
        }
        Ok(TruncatedSeries {
            degree: self.degree,
            coeffs: out,
        })
    }

    /// Multiplies by `t^k`, dropping whatever falls above the degree.
    pub fn shift(&self, k: u32) -> Self {
        let mut out = Self::zero(self.degree);
        for (i, c) in self.coeffs.iter().enumerate() {
            let j = i + k as usize;
            if j <= self.degree as usize {
                out.coeffs[j] = c.clone();
            }
        }
        out
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        TruncatedSeries {
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
        }
    }

    /// Multiplicative inverse; requires a nonzero constant term.
    pub fn inverse(&self) -> Result<Self> {
        let c0 = &self.coeffs[0];
        if c0.is_zero() {
            return Err(Error::domain("series with zero constant term is not invertible"));
        }
        let n = self.degree as usize;
        let mut inv = vec![BigRational::zero(); n + 1];
        inv[0] = c0.recip();
        for k in 1..=n {
            let mut acc = BigRational::zero();
            for j in 1..=k {
                if !self.coeffs[j].is_zero() {
                    acc += &self.coeffs[j] * &inv[k - j];
                }
            }
            inv[k] = -acc / c0;
        }
        Ok(TruncatedSeries {
            degree: self.degree,
            coeffs: inv,
        })
    }

    pub fn has_nonnegative_integer_coeffs(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_integer() && !c.is_negative())
    }
}

impl Add for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn add(self, rhs: Self) -> TruncatedSeries {
        self.try_add(rhs).expect("truncation degree mismatch")
    }
}

impl Sub for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn sub(self, rhs: Self) -> TruncatedSeries {
        self.try_sub(rhs).expect("truncation degree mismatch")
    }
}

impl Mul for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn mul(self, rhs: Self) -> TruncatedSeries {
        self.try_mul(rhs).expect("truncation degree mismatch")
    }
}

impl Neg for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn neg(self) -> TruncatedSeries {
        TruncatedSeries {
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl fmt::Display for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.terms() {
            let (neg, abs) = (c.is_negative(), c.abs());
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            let show_coeff = k == 0 || !abs.is_one();
            if show_coeff {
                write!(f, "{abs}")?;
            }
            match k {
                0 => {}
                1 => write!(f, "t")?,
                _ => write!(f, "t^{k}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O(t^{})", self.degree + 1)
    }
}

/// `1/(1 - t^k)` truncated at `degree`. `k` must be positive and even.
pub fn geometric(k: u32, degree: u32) -> Result<TruncatedSeries> {
    if k == 0 || k % 2 == 1 {
        return Err(Error::domain(format!(
            "geometric series step must be positive and even, got {k}"
        )));
    }
    let mut s = TruncatedSeries::zero(degree);
    for j in (0..=degree).step_by(k as usize) {
        s.coeffs[j as usize] = BigRational::one();
    }
    Ok(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GroupKind {
    GL,
    O,
    Sp,
}

/// A product of classical groups, e.g. `GL(2) × O(3)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct GroupSpec {
    pub factors: Vec<(GroupKind, u32)>,
}

impl GroupSpec {
    pub fn new(factors: Vec<(GroupKind, u32)>) -> Self {
        GroupSpec { factors }
    }

    pub fn gl(n: u32) -> Self {
        GroupSpec::new(vec![(GroupKind::GL, n)])
    }

    pub fn product(&self, other: &GroupSpec) -> GroupSpec {
        let mut factors = self.factors.clone();
        factors.extend_from_slice(&other.factors);
        GroupSpec { factors }
    }

    /// Drops rank-zero factors, which are trivial groups.
    pub fn reduced(&self) -> GroupSpec {
        GroupSpec {
            factors: self.factors.iter().copied().filter(|&(_, n)| n > 0).collect(),
        }
    }

    /// Complex dimension.
    pub fn dimension(&self) -> u64 {
        self.factors
            .iter()
            .map(|&(kind, n)| {
                let n = n as u64;
                match kind {
                    GroupKind::GL => n * n,
                    GroupKind::O => n * n.saturating_sub(1) / 2,
                    GroupKind::Sp => n * (2 * n + 1),
                }
            })
            .sum()
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let reduced = self.reduced();
        if reduced.factors.is_empty() {
            return write!(f, "1");
        }
        for (i, (kind, n)) in reduced.factors.iter().enumerate() {
            if i > 0 {
                write!(f, " x ")?;
            }
            write!(f, "{kind:?}({n})")?;
        }
        Ok(())
    }
}

/// Rational Poincaré series of `BG`:
/// `BGL(n) = ∏_{i≤n} 1/(1-t^{2i})`, `BO(n) = ∏_{i≤⌊n/2⌋} 1/(1-t^{4i})`,
/// `BSp(n) = ∏_{i≤n} 1/(1-t^{4i})`.
pub fn classifying_series(g: &GroupSpec, degree: u32) -> Result<TruncatedSeries> {
    if degree % 2 == 1 {
        return Err(Error::domain(format!(
            "truncation degree must be even, got {degree}"
        )));
    }
    let mut out = TruncatedSeries::one(degree);
    for &(kind, n) in &g.factors {
        let steps: Vec<u32> = match kind {
            GroupKind::GL => (1..=n).map(|i| 2 * i).collect(),
            GroupKind::O => (1..=n / 2).map(|i| 4 * i).collect(),
            GroupKind::Sp => (1..=n).map(|i| 4 * i).collect(),
        };
        for k in steps {
            if k <= degree {
                out = out.try_mul(&geometric(k, degree)?)?;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s(n: u32, c: &[i64]) -> TruncatedSeries {
        TruncatedSeries::from_integers(n, c)
    }

    #[test]
    fn addition() {
        assert_eq!(&s(4, &[1, 0, 1]) + &s(4, &[1, 0, -1]), s(4, &[2]));
        let a = s(4, &[3, 1, 4, 1, 5]);
        assert_eq!(&a + &TruncatedSeries::zero(4), a);
        assert_eq!(&s(4, &[0, 0, 1]) + &s(4, &[0, 0, 1]), s(4, &[0, 0, 2]));
        assert!(s(4, &[1]).try_add(&s(6, &[1])).is_err());
    }

    #[test]
    fn multiplication() {
        assert_eq!(&s(4, &[1, 0, 1]) * &s(4, &[1, 0, -1]), s(4, &[1, 0, 0, 0, -1]));
        let a = s(6, &[2, 0, 7, 0, 1]);
        assert_eq!(&a * &TruncatedSeries::one(6), a);
        assert_eq!(&s(2, &[1, 0, 1]) * &s(2, &[1, 0, 1]), s(2, &[1, 0, 2]));
        assert!(s(4, &[1]).try_mul(&s(2, &[1])).is_err());
    }

    #[test]
    fn geometric_series() {
        assert_eq!(geometric(2, 6).unwrap(), s(6, &[1, 0, 1, 0, 1, 0, 1]));
        assert_eq!(geometric(4, 6).unwrap(), s(6, &[1, 0, 0, 0, 1]));
        for n in [0, 2, 8, 20] {
            assert_eq!(
                &geometric(2, n).unwrap() * &s(n, &[1, 0, -1]),
                TruncatedSeries::one(n)
            );
        }
        assert!(geometric(3, 6).is_err());
        assert!(geometric(0, 6).is_err());
    }

    #[test]
    fn classifying_examples() {
        let gl = |n| GroupSpec::gl(n);
        assert_eq!(
            classifying_series(&gl(1), 6).unwrap(),
            s(6, &[1, 0, 1, 0, 1, 0, 1])
        );
        assert_eq!(
            classifying_series(&gl(2), 8).unwrap(),
            s(8, &[1, 0, 1, 0, 2, 0, 2, 0, 3])
        );
        let o1 = GroupSpec::new(vec![(GroupKind::O, 1)]);
        assert_eq!(classifying_series(&o1, 8).unwrap(), TruncatedSeries::one(8));
        let sp1 = GroupSpec::new(vec![(GroupKind::Sp, 1)]);
        assert_eq!(
            classifying_series(&sp1, 8).unwrap(),
            s(8, &[1, 0, 0, 0, 1, 0, 0, 0, 1])
        );
        assert!(classifying_series(&gl(1), 7).is_err());
    }

    #[test]
    fn inverse_of_geometric() {
        let g = geometric(2, 10).unwrap();
        assert_eq!(g.inverse().unwrap(), s(10, &[1, 0, -1]));
        assert!(TruncatedSeries::zero(4).inverse().is_err());
    }

    #[test]
    fn display() {
        assert_eq!(s(4, &[1, 0, 2, 0, -1]).to_string(), "1 + 2t^2 - t^4 + O(t^5)");
        assert_eq!(TruncatedSeries::zero(2).to_string(), "0 + O(t^3)");
    }

    /// Partitions of `k` into parts of size at most `n`, counted by direct recursion.
    fn partitions(k: u32, n: u32) -> u64 {
        if k == 0 {
            return 1;
        }
        if n == 0 {
            return 0;
        }
        (0..=k / n).map(|j| partitions(k - j * n, n - 1)).sum()
    }

    #[test]
    fn gl_series_counts_partitions() {
        for n in 0..=4 {
            let series = classifying_series(&GroupSpec::gl(n), 24).unwrap();
            for k in 0..=12 {
                let expected = BigRational::from_integer(partitions(k, n).into());
                assert_eq!(series.coeff(2 * k), expected, "GL({n}), t^{}", 2 * k);
                assert!(series.coeff(2 * k + 1).is_zero());
            }
        }
    }

    fn series_strategy() -> impl Strategy<Value = TruncatedSeries> {
        proptest::collection::vec(-3i64..4, 0..7).prop_map(|c| TruncatedSeries::from_integers(6, &c))
    }

    proptest! {
        #[test]
        fn ring_axioms(a in series_strategy(), b in series_strategy(), c in series_strategy()) {
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert_eq!(&a * &b, &b * &a);
        }

        #[test]
        fn gl1_inverse_any_degree(half in 0u32..15) {
            let n = 2 * half;
            let p = classifying_series(&GroupSpec::gl(1), n).unwrap();
            prop_assert_eq!(&p * &TruncatedSeries::from_integers(n, &[1, 0, -1]), TruncatedSeries::one(n));
        }
    }
}
