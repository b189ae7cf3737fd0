//! Harder-Narasimhan types of classical quiver representations, codimensions
//! of their strata, and the inductive formula
//!
//! ```text
//! P^G(Rep^ss) = P(BG) - Σ_{types ≠ [d]} t^{2·codim} ∏_k P^{G_k}(Rep(d^k)^ss)
//! ```
//!
//! for the equivariant Poincaré series of the semistable locus.

use std::collections::HashMap;
use std::fmt;
use std::sync::Mutex;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quiver::{check_admissible, cmp_slope, euler_form, DimensionVector, Quiver, StabilityParam};
use crate::series::{classifying_series, GroupSpec, TruncatedSeries};

/// Dimension vectors of the subquotients of a HN filtration, listed from the
/// maximal destabilizing piece down. Slopes strictly decrease along the list.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HNType(pub Vec<DimensionVector>);

impl HNType {
    pub fn trivial(d: DimensionVector) -> Self {
        HNType(vec![d])
    }

    /// Checks the HN-type invariants against `theta` and the ambient vector.
    pub fn new(pieces: Vec<DimensionVector>, theta: &StabilityParam, ambient: &DimensionVector) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::domain("HN type has no pieces"));
        }
        let mut sum = DimensionVector::zero(ambient.len());
        for p in &pieces {
            if p.len() != ambient.len() || theta.0.len() != ambient.len() {
                return Err(Error::structural("HN piece has wrong length"));
            }
            if p.is_zero() {
                return Err(Error::domain("HN type contains a zero piece"));
            }
            sum = sum.add(p);
        }
        if &sum != ambient {
            return Err(Error::domain(format!("HN pieces sum to {sum}, expected {ambient}")));
        }
        for w in pieces.windows(2) {
            if cmp_slope(&theta.0, &w[0], &w[1]) != std::cmp::Ordering::Greater {
                return Err(Error::domain(format!(
                    "slopes of {} and {} are not strictly decreasing",
                    w[0], w[1]
                )));
            }
        }
        Ok(HNType(pieces))
    }

    pub fn pieces(&self) -> &[DimensionVector] {
        &self.0
    }

    pub fn is_trivial(&self) -> bool {
        self.0.len() == 1
    }

    pub fn total(&self) -> DimensionVector {
        let n = self.0.first().map_or(0, |p| p.len());
        self.0.iter().fold(DimensionVector::zero(n), |a, p| a.add(p))
    }
}

impl fmt::Display for HNType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " > ")?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StratumRecord {
    pub hn_type: HNType,
    pub codim: i64,
    pub levi: GroupSpec,
}

/// Every HN type for `d` under `theta`, in lexicographic order of the piece lists.
pub fn enumerate_hn_types(q: &Quiver, d: &DimensionVector, theta: &StabilityParam) -> Result<Vec<HNType>> {
    q.check_len(d.len())?;
    q.check_len(theta.0.len())?;
    if !check_admissible(theta, d) {
        return Err(Error::domain(format!(
            "stability parameter {:?} is not admissible for {d}",
            theta.0
        )));
    }
    if d.is_zero() {
        return Err(Error::domain("HN types of the zero dimension vector"));
    }
    Ok(slope_ordered_types(d, theta))
}

/// All tuples of nonzero vectors summing to `d` with strictly decreasing
/// slopes. No admissibility requirement: slopes make sense for any `θ`.
pub(crate) fn slope_ordered_types(d: &DimensionVector, theta: &StabilityParam) -> Vec<HNType> {
    let candidates: Vec<DimensionVector> = d.sub_vectors().into_iter().filter(|e| !e.is_zero()).collect();
    let mut out = Vec::new();
    let mut prefix = Vec::new();
    extend_types(&candidates, &theta.0, d, &mut prefix, &mut out);
    out
}

fn extend_types(
    candidates: &[DimensionVector],
    theta: &[i64],
    remaining: &DimensionVector,
    prefix: &mut Vec<DimensionVector>,
    out: &mut Vec<HNType>,
) {
    for e in candidates {
        if !e.fits_in(remaining) {
            continue;
        }
        if let Some(last) = prefix.last() {
            if cmp_slope(theta, e, last) != std::cmp::Ordering::Less {
                continue;
            }
        }
        prefix.push(e.clone());
        if e == remaining {
            out.push(HNType(prefix.clone()));
        } else {
            let rest = remaining.checked_sub(e).expect("e fits in remaining");
            extend_types(candidates, theta, &rest, prefix, out);
        }
        prefix.pop();
    }
}

/// Codimension of the stratum of type `t`:
/// `Σ_{k<l} (Σ_a d^k_{t(a)} d^l_{h(a)} - Σ_i d^k_i d^l_i) = -Σ_{k<l} ⟨d^k, d^l⟩`.
pub fn codim(q: &Quiver, t: &HNType) -> Result<i64> {
    let pieces = t.pieces();
    if pieces.is_empty() || pieces.iter().any(|p| p.is_zero()) {
        return Err(Error::domain("invalid HN type"));
    }
    let mut total = 0;
    for k in 0..pieces.len() {
        for l in k + 1..pieces.len() {
            total -= euler_form(q, &pieces[k], &pieces[l])?;
        }
    }
    Ok(total)
}

/// `∏_i GL(d_i)`.
pub fn gl_of(d: &DimensionVector) -> GroupSpec {
    GroupSpec::new(d.iter().map(|&n| (crate::series::GroupKind::GL, n)).collect())
}

/// Levi factor `∏_k ∏_i GL(d^k_i)` of the parabolic attached to `t`.
pub fn levi(t: &HNType) -> GroupSpec {
    t.pieces()
        .iter()
        .fold(GroupSpec::default(), |g, p| g.product(&gl_of(p)))
        .reduced()
}

pub fn strata(q: &Quiver, d: &DimensionVector, theta: &StabilityParam) -> Result<Vec<StratumRecord>> {
    enumerate_hn_types(q, d, theta)?
        .into_iter()
        .map(|t| {
            Ok(StratumRecord {
                codim: codim(q, &t)?,
                levi: levi(&t),
                hn_type: t,
            })
        })
        .collect()
}

/// Reduces an admissible parameter to a canonical representative of its
/// stability class on `d`: weights on vertices outside the support are zeroed
/// and the rest divided by their gcd.
pub fn normalize_theta(theta: &StabilityParam, d: &DimensionVector) -> StabilityParam {
    let masked: Vec<i64> = theta
        .0
        .iter()
        .zip(d.iter())
        .map(|(&t, &n)| if n == 0 { 0 } else { t })
        .collect();
    let g = masked.iter().fold(0i64, |g, &x| g.gcd(&x));
    if g == 0 {
        return StabilityParam(masked);
    }
    StabilityParam(masked.into_iter().map(|x| x / g).collect())
}

type MemoKey = (DimensionVector, StabilityParam, u32);

/// Runs the inductive formula over one quiver, caching results per
/// `(d, normalized θ, N)`.
pub struct HnRecursion<'q> {
    quiver: &'q Quiver,
    memo: Mutex<HashMap<MemoKey, TruncatedSeries>>,
}

impl<'q> HnRecursion<'q> {
    pub fn new(quiver: &'q Quiver) -> Self {
        HnRecursion {
            quiver,
            memo: Mutex::new(HashMap::new()),
        }
    }

    pub fn cache_len(&self) -> usize {
        self.memo.lock().expect("memo poisoned").len()
    }

    /// `P_t^{G_d}(Rep(Q, d)^{θ-ss})` truncated at `degree`.
    pub fn equivariant_ss_series(&self, d: &DimensionVector, theta: &StabilityParam, degree: u32) -> Result<TruncatedSeries> {
        let q = self.quiver;
        q.check_len(d.len())?;
        q.check_len(theta.0.len())?;
        if !check_admissible(theta, d) {
            return Err(Error::domain(format!(
                "stability parameter {:?} is not admissible for {d}",
                theta.0
            )));
        }
        let theta = normalize_theta(theta, d);
        let key = (d.clone(), theta.clone(), degree);
        if let Some(hit) = self.memo.lock().expect("memo poisoned").get(&key) {
            return Ok(hit.clone());
        }

        let mut result = classifying_series(&gl_of(d), degree)?;
        for t in enumerate_hn_types(q, d, &theta)? {
            if t.is_trivial() {
                continue;
            }
            let mut product = TruncatedSeries::one(degree);
            for piece in t.pieces() {
                let piece_theta = theta.shifted_to(piece)?;
                product = product.try_mul(&self.equivariant_ss_series(piece, &piece_theta, degree)?)?;
                if product.is_zero() {
                    break;
                }
            }
            if product.is_zero() {
                // empty stratum
                continue;
            }
            let c = codim(q, &t)?;
            if c < 0 {
                return Err(Error::Consistency(format!(
                    "nonempty stratum {t} has negative codimension {c}"
                )));
            }
            result = result.try_sub(&product.shift(2 * c as u32))?;
        }

        self.memo
            .lock()
            .expect("memo poisoned")
            .insert(key, result.clone());
        Ok(result)
    }

    /// Poincaré series of the moduli space, assuming every semistable point is
    /// stable: the equivariant series times `1 - t²`.
    pub fn moduli_series(&self, d: &DimensionVector, theta: &StabilityParam, degree: u32) -> Result<TruncatedSeries> {
        let q = self.quiver;
        if !q.is_connected() {
            return Err(Error::domain("moduli series requires a connected quiver"));
        }
        let ss = self.equivariant_ss_series(d, theta, degree)?;
        let out = ss.try_mul(&TruncatedSeries::from_integers(degree, &[1, 0, -1]))?;
        if !out.has_nonnegative_integer_coeffs() {
            return Err(Error::Consistency(format!(
                "moduli series {out} has negative or fractional coefficients: stable != semistable or convention bug"
            )));
        }
        // Real dimension of the moduli space bounds the top degree.
        let dim = q.rep_dimension(d)? as i64 - gl_of(d).dimension() as i64 + 1;
        let top = 2 * dim.max(0) as u64;
        if let Some((k, _)) = out.terms().last() {
            if (k as u64) > top {
                return Err(Error::Consistency(format!(
                    "moduli series {out} has a term above degree {top}: stable != semistable or convention bug"
                )));
            }
        }
        Ok(out)
    }
}

/// One-shot wrapper around [`HnRecursion::equivariant_ss_series`].
pub fn equivariant_ss_series(q: &Quiver, d: &DimensionVector, theta: &StabilityParam, degree: u32) -> Result<TruncatedSeries> {
    HnRecursion::new(q).equivariant_ss_series(d, theta, degree)
}

pub fn moduli_series(q: &Quiver, d: &DimensionVector, theta: &StabilityParam, degree: u32) -> Result<TruncatedSeries> {
    HnRecursion::new(q).moduli_series(d, theta, degree)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dv(v: &[u32]) -> DimensionVector {
        DimensionVector(v.to_vec())
    }

    fn th(v: &[i64]) -> StabilityParam {
        StabilityParam(v.to_vec())
    }

    fn types(v: &[&[&[u32]]]) -> Vec<HNType> {
        v.iter().map(|t| HNType(t.iter().map(|p| dv(p)).collect())).collect()
    }

    #[test]
    fn kronecker_types() {
        for m in 0..4 {
            let q = Quiver::kronecker(m);
            let got = enumerate_hn_types(&q, &dv(&[1, 1]), &th(&[1, -1])).unwrap();
            assert_eq!(got, types(&[&[&[1, 0], &[0, 1]], &[&[1, 1]]]));
        }
    }

    #[test]
    fn single_support_has_one_type() {
        let q = Quiver::kronecker(2);
        let got = enumerate_hn_types(&q, &dv(&[2, 0]), &th(&[0, -1])).unwrap();
        assert_eq!(got, types(&[&[&[2, 0]]]));
        let l = Quiver::one_loop();
        for n in 1..5 {
            let got = enumerate_hn_types(&l, &dv(&[n]), &th(&[0])).unwrap();
            assert_eq!(got, vec![HNType::trivial(dv(&[n]))]);
        }
    }

    #[test]
    fn inadmissible_rejected() {
        let q = Quiver::kronecker(2);
        assert!(matches!(
            enumerate_hn_types(&q, &dv(&[2, 1]), &th(&[1, -1])),
            Err(Error::Domain(_))
        ));
        assert!(equivariant_ss_series(&q, &dv(&[2, 1]), &th(&[1, -1]), 4).is_err());
    }

    #[test]
    fn codims() {
        for m in 1..5 {
            let q = Quiver::kronecker(m);
            let t = HNType(vec![dv(&[1, 0]), dv(&[0, 1])]);
            assert_eq!(codim(&q, &t).unwrap(), m as i64);
        }
        let q = Quiver::kronecker(1);
        assert_eq!(codim(&q, &HNType::trivial(dv(&[3, 2]))).unwrap(), 0);
        assert_eq!(codim(&q, &HNType(vec![dv(&[1, 0]), dv(&[0, 2])])).unwrap(), 2);
    }

    #[test]
    fn levi_factors() {
        let t = HNType(vec![dv(&[1, 0]), dv(&[1, 2])]);
        assert_eq!(levi(&t).to_string(), "GL(1) x GL(1) x GL(2)");
    }

    #[test]
    fn hn_type_validation() {
        let theta = th(&[1, -1]);
        let d = dv(&[1, 1]);
        assert!(HNType::new(vec![dv(&[1, 0]), dv(&[0, 1])], &theta, &d).is_ok());
        assert!(HNType::new(vec![dv(&[0, 1]), dv(&[1, 0])], &theta, &d).is_err());
        assert!(HNType::new(vec![dv(&[1, 0])], &theta, &d).is_err());
        assert_eq!(HNType(vec![dv(&[1, 0]), dv(&[0, 1])]).to_string(), "(1,0) > (0,1)");
    }

    #[test]
    fn kronecker_series() {
        let q = Quiver::kronecker(1);
        let got = equivariant_ss_series(&q, &dv(&[1, 1]), &th(&[1, -1]), 8).unwrap();
        assert_eq!(got, TruncatedSeries::from_integers(8, &[1, 0, 1, 0, 1, 0, 1, 0, 1]));
        let q = Quiver::kronecker(2);
        let got = equivariant_ss_series(&q, &dv(&[1, 1]), &th(&[1, -1]), 6).unwrap();
        assert_eq!(got, TruncatedSeries::from_integers(6, &[1, 0, 2, 0, 2, 0, 2]));
    }

    #[test]
    fn zero_theta_gives_classifying_series() {
        let q = Quiver::from_edges(2, &[(0, 1), (1, 0), (0, 0)]).unwrap();
        for d in [dv(&[1, 2]), dv(&[2, 2]), dv(&[3, 0])] {
            let got = equivariant_ss_series(&q, &d, &th(&[0, 0]), 10).unwrap();
            assert_eq!(got, classifying_series(&gl_of(&d), 10).unwrap());
        }
    }

    #[test]
    fn moduli_examples() {
        let cases: [(usize, &[i64]); 3] = [(2, &[1, 0, 1]), (3, &[1, 0, 1, 0, 1]), (1, &[1])];
        for (m, expected) in cases {
            let q = Quiver::kronecker(m);
            let got = moduli_series(&q, &dv(&[1, 1]), &th(&[1, -1]), 12).unwrap();
            assert_eq!(got, TruncatedSeries::from_integers(12, expected), "m = {m}");
        }
    }

    #[test]
    fn moduli_detects_strictly_semistable() {
        // d = (2,2) on the 2-Kronecker has strictly semistable points.
        let q = Quiver::kronecker(2);
        let err = moduli_series(&q, &dv(&[2, 2]), &th(&[1, -1]), 16).unwrap_err();
        assert!(matches!(err, Error::Consistency(_)), "{err}");
    }

    #[test]
    fn memo_does_not_change_results() {
        let q = Quiver::kronecker(3);
        let rec = HnRecursion::new(&q);
        let warm: Vec<_> = [dv(&[1, 1]), dv(&[2, 2]), dv(&[1, 2]), dv(&[2, 2])]
            .iter()
            .map(|d| {
                let theta = StabilityParam(vec![d[1] as i64, -(d[0] as i64)]);
                rec.equivariant_ss_series(d, &theta, 12).unwrap()
            })
            .collect();
        assert!(rec.cache_len() > 0);
        for (d, w) in [dv(&[1, 1]), dv(&[2, 2]), dv(&[1, 2]), dv(&[2, 2])].iter().zip(&warm) {
            let theta = StabilityParam(vec![d[1] as i64, -(d[0] as i64)]);
            let cold = equivariant_ss_series(&q, d, &theta, 12).unwrap();
            assert_eq!(&cold, w);
        }
    }

    #[test]
    fn scaled_theta_same_series() {
        let q = Quiver::kronecker(3);
        let a = equivariant_ss_series(&q, &dv(&[1, 2]), &th(&[2, -1]), 10).unwrap();
        let b = equivariant_ss_series(&q, &dv(&[1, 2]), &th(&[6, -3]), 10).unwrap();
        assert_eq!(a, b);
    }
}
