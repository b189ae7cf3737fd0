mod common;

use common::*;
use nalgebra::DMatrix;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::ToPrimitive;
use proptest::prelude::*;
use quiver_moduli::flow::{energy, gradient, CMat, CRep};
use quiver_moduli::hn::{codim, enumerate_hn_types, moduli_series, HnRecursion};
use quiver_moduli::quiver::{slope, DimensionVector, Quiver, StabilityParam};
use quiver_moduli::series::{classifying_series, GroupSpec, TruncatedSeries};
use quiver_moduli::Error;

fn dv(v: &[u32]) -> DimensionVector {
    DimensionVector(v.to_vec())
}

fn cmat(rows: usize, cols: usize, entries: &[(f64, f64)]) -> CMat {
    DMatrix::from_fn(rows, cols, |i, j| {
        let (re, im) = entries[(i * cols + j) % entries.len()];
        Complex64::new(re, im)
    })
}

fn entries() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 16)
}

/// Unitary factor of a complex matrix built from `e`, shifted to be invertible.
fn unitary(n: usize, e: &[(f64, f64)]) -> CMat {
    let m = cmat(n, n, e) + CMat::identity(n, n) * Complex64::new(3.0, 0.0);
    m.qr().q()
}

fn rep(q: &Quiver, d: &[u32], e: &[(f64, f64)]) -> CRep {
    let maps = q
        .arrows()
        .iter()
        .enumerate()
        .map(|(k, a)| {
            let shifted: Vec<_> = e.iter().cycle().skip(k * 5).take(e.len()).copied().collect();
            cmat(d[a.head] as usize, d[a.tail] as usize, &shifted)
        })
        .collect();
    CRep::new(q, dv(d), maps).unwrap()
}

fn two_vertex_quiver() -> impl Strategy<Value = Quiver> {
    prop::collection::vec(prop::sample::select(vec![(0, 0), (0, 1), (1, 0), (1, 1)]), 0..=3)
        .prop_map(|edges| Quiver::from_edges(2, &edges).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn energy_is_unitarily_invariant(e in entries(), u in entries(), w in entries(), loops in any::<bool>()) {
        let (q, d): (Quiver, Vec<u32>) = if loops { (Quiver::one_loop(), vec![3]) } else { (Quiver::kronecker(2), vec![2, 3]) };
        let theta = StabilityParam(if loops { vec![0] } else { vec![3, -2] });
        let r = rep(&q, &d, &e);
        let g: Vec<CMat> = d.iter().enumerate().map(|(i, &n)| unitary(n as usize, if i == 0 { &u } else { &w })).collect();
        let moved = r.act(&q, &g).unwrap();
        let (a, b) = (energy(&q, &r, &theta).unwrap(), energy(&q, &moved, &theta).unwrap());
        prop_assert!((a - b).abs() <= 1e-10 * a.max(1.0), "{a} vs {b}");
    }

    #[test]
    fn gradient_matches_central_differences(e in entries()) {
        let q = Quiver::kronecker(2);
        let theta = StabilityParam(vec![1, -1]);
        let r = rep(&q, &[1, 2], &e);
        let g = gradient(&q, &r, &theta).unwrap();
        let h = 1e-5;
        for a in 0..r.maps.len() {
            for i in 0..r.maps[a].nrows() {
                for j in 0..r.maps[a].ncols() {
                    let mut parts = [0.0; 2];
                    for (k, dir) in [Complex64::new(h, 0.0), Complex64::new(0.0, h)].into_iter().enumerate() {
                        let (mut p, mut m) = (r.clone(), r.clone());
                        p.maps[a][(i, j)] += dir;
                        m.maps[a][(i, j)] -= dir;
                        parts[k] = (energy(&q, &p, &theta).unwrap() - energy(&q, &m, &theta).unwrap()) / (2.0 * h);
                    }
                    let fd = Complex64::new(parts[0], parts[1]);
                    prop_assert!((g[a][(i, j)] - fd).norm() <= 1e-6 * fd.norm().max(1.0));
                }
            }
        }
    }

    #[test]
    fn strata_partition_classifying_series(q in two_vertex_quiver(), a in 0u32..=3, b in 0u32..=3, t0 in -2i64..=2, t1 in -2i64..=2) {
        prop_assume!(a + b > 0);
        let d = dv(&[a, b]);
        let theta = StabilityParam(vec![t0, t1]).shifted_to(&d).unwrap();
        let n = 12u32;
        let rec = HnRecursion::new(&q);
        let mut sum = Poly::zero(n as usize);
        for t in enumerate_hn_types(&q, &d, &theta).unwrap() {
            let mut prod = Poly::one(n as usize);
            for p in t.pieces() {
                let s = rec.equivariant_ss_series(p, &theta.shifted_to(p).unwrap(), n).unwrap();
                let ints = s.integer_coeffs().expect("integral series");
                prod = prod.mul(&Poly(ints.iter().map(|x| x.to_i64().unwrap()).collect()));
            }
            let c = codim(&q, &t).unwrap();
            if prod.0.iter().any(|&x| x != 0) {
                prop_assert!(c >= 0);
                sum = sum.add(&prod.shift(2 * c as usize));
            }
        }
        prop_assert_eq!(sum, bgl_oracle(&d.0, n as usize));
    }

    #[test]
    fn memo_does_not_change_results(q in two_vertex_quiver(), a in 1u32..=3, b in 0u32..=3, t0 in -2i64..=2) {
        let d = dv(&[a, b]);
        let theta = StabilityParam(vec![t0, -t0]).shifted_to(&d).unwrap();
        let warm = HnRecursion::new(&q);
        for e in d.sub_vectors() {
            if !e.is_zero() {
                warm.equivariant_ss_series(&e, &theta.shifted_to(&e).unwrap(), 10).unwrap();
            }
        }
        let cached = warm.equivariant_ss_series(&d, &theta, 10).unwrap();
        let cold = HnRecursion::new(&q).equivariant_ss_series(&d, &theta, 10).unwrap();
        prop_assert_eq!(cached, cold);
    }

    #[test]
    fn hn_types_are_deterministic_and_ordered(q in two_vertex_quiver(), a in 0u32..=4, b in 0u32..=4, t0 in -3i64..=3, t1 in -3i64..=3) {
        prop_assume!(a + b > 0);
        let d = dv(&[a, b]);
        let theta = StabilityParam(vec![t0, t1]).shifted_to(&d).unwrap();
        let first = enumerate_hn_types(&q, &d, &theta).unwrap();
        prop_assert_eq!(&first, &enumerate_hn_types(&q, &d, &theta).unwrap());
        prop_assert_eq!(first.len(), hn_types_oracle(&d.0, &theta.0).len());
        for t in &first {
            prop_assert_eq!(t.total(), d.clone());
            for w in t.pieces().windows(2) {
                prop_assert!(slope(&theta, &w[0]).unwrap() > slope(&theta, &w[1]).unwrap());
            }
        }
    }

    #[test]
    fn coprime_kronecker_moduli_are_honest(m in 1usize..=3, a in 1u32..=3, b in 1u32..=3) {
        prop_assume!(a.gcd(&b) == 1);
        let q = Quiver::kronecker(m);
        let d = dv(&[a, b]);
        let theta = StabilityParam(vec![b as i64, -(a as i64)]);
        match moduli_series(&q, &d, &theta, 24) {
            Ok(s) => prop_assert!(s.has_nonnegative_integer_coeffs()),
            // an empty moduli space is reported as such, never as negative counts
            Err(e) => prop_assert!(!matches!(e, Error::Consistency(_)), "{e}"),
        }
    }
}

#[test]
fn gl1_series_inverts_one_minus_t2() {
    let s = classifying_series(&GroupSpec::gl(1), 30).unwrap();
    let one_minus = TruncatedSeries::from_integers(30, &[1, 0, -1]);
    assert_eq!(s.try_mul(&one_minus).unwrap(), TruncatedSeries::one(30));
}

#[test]
fn kronecker_closed_form_oracle_agrees_with_library() {
    for m in 1..=4 {
        let q = Quiver::kronecker(m);
        let s = HnRecursion::new(&q)
            .equivariant_ss_series(&dv(&[1, 1]), &StabilityParam(vec![1, -1]), 16)
            .unwrap();
        let ints: Vec<i64> = s.integer_coeffs().unwrap().iter().map(|x| x.to_i64().unwrap()).collect();
        assert_eq!(Poly(ints), kronecker_closed_form(m, 16));
    }
}
