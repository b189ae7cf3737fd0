//! Independent oracles shared by the integration tests. Nothing here calls
//! the code it is used to check.
#![allow(dead_code)]

use quiver_moduli::quiver::{DimensionVector, Quiver};

/// Partitions of `k` into parts of size at most `n`.
pub fn partitions_bounded(k: usize, n: usize) -> u64 {
    // p[j] over parts 1..=n, classic coin-change table
    let mut p = vec![0u64; k + 1];
    p[0] = 1;
    for part in 1..=n {
        for j in part..=k {
            p[j] += p[j - part];
        }
    }
    p[k]
}

/// Integer power series truncated at degree `n` (inclusive).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly(pub Vec<i64>);

impl Poly {
    pub fn one(n: usize) -> Poly {
        let mut c = vec![0; n + 1];
        c[0] = 1;
        Poly(c)
    }

    pub fn zero(n: usize) -> Poly {
        Poly(vec![0; n + 1])
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        let n = self.0.len() - 1;
        let mut c = vec![0; n + 1];
        for (i, &a) in self.0.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in o.0.iter().enumerate().take(n + 1 - i) {
                c[i + j] += a * b;
            }
        }
        Poly(c)
    }

    pub fn add(&self, o: &Poly) -> Poly {
        Poly(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }

    pub fn shift(&self, k: usize) -> Poly {
        let n = self.0.len() - 1;
        let mut c = vec![0; n + 1];
        for i in 0..=n {
            if i + k <= n {
                c[i + k] = self.0[i];
            }
        }
        Poly(c)
    }

    /// `1 / (1 - t^k)` by listing its terms.
    pub fn geometric(k: usize, n: usize) -> Poly {
        Poly((0..=n).map(|i| i64::from(i % k == 0)).collect())
    }
}

/// `P(BGL(d_1) × … × BGL(d_r))` as a product of geometric series.
pub fn bgl_oracle(d: &[u32], n: usize) -> Poly {
    let mut out = Poly::one(n);
    for &di in d {
        for j in 1..=di as usize {
            out = out.mul(&Poly::geometric(2 * j, n));
        }
    }
    out
}

/// `(1 - t^{2m}) / (1 - t²)²`, by long multiplication of its factors.
pub fn kronecker_closed_form(m: usize, n: usize) -> Poly {
    let mut num = Poly::one(n);
    if 2 * m <= n {
        num.0[2 * m] -= 1;
    }
    num.mul(&Poly::geometric(2, n)).mul(&Poly::geometric(2, n))
}

fn slope_gt(theta: &[i64], a: &[u32], b: &[u32]) -> bool {
    let v = |d: &[u32]| -> (i128, i128) {
        (
            theta.iter().zip(d).map(|(&t, &x)| t as i128 * x as i128).sum(),
            d.iter().map(|&x| x as i128).sum(),
        )
    };
    let (va, na) = v(a);
    let (vb, nb) = v(b);
    va * nb > vb * na
}

/// Every ordered decomposition of `d` into nonzero pieces with strictly
/// decreasing `θ`-slope.
pub fn hn_types_oracle(d: &[u32], theta: &[i64]) -> Vec<Vec<Vec<u32>>> {
    fn boxes(d: &[u32]) -> Vec<Vec<u32>> {
        let mut out = vec![vec![]];
        for &x in d {
            out = out
                .into_iter()
                .flat_map(|p: Vec<u32>| (0..=x).map(move |y| [p.clone(), vec![y]].concat()))
                .collect();
        }
        out.into_iter().filter(|p| p.iter().any(|&y| y > 0)).collect()
    }
    fn go(rest: &[u32], theta: &[i64], prev: Option<&[u32]>, acc: &mut Vec<Vec<u32>>, out: &mut Vec<Vec<Vec<u32>>>) {
        if rest.iter().all(|&x| x == 0) {
            out.push(acc.clone());
            return;
        }
        for e in boxes(rest) {
            if prev.is_some_and(|p| !slope_gt(theta, p, &e)) {
                continue;
            }
            let next: Vec<u32> = rest.iter().zip(&e).map(|(a, b)| a - b).collect();
            acc.push(e.clone());
            go(&next, theta, Some(&e), acc, out);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    go(d, theta, None, &mut Vec::new(), &mut out);
    out
}

/// Blocks of `Rep` mapping an earlier piece into a later one, minus the
/// matching blocks of `gl`.
pub fn codim_oracle(q: &Quiver, pieces: &[Vec<u32>]) -> i64 {
    let mut c = 0i64;
    for k in 0..pieces.len() {
        for l in k + 1..pieces.len() {
            for a in q.arrows() {
                c += pieces[k][a.tail] as i64 * pieces[l][a.head] as i64;
            }
            for i in 0..q.num_vertices() {
                c -= pieces[k][i] as i64 * pieces[l][i] as i64;
            }
        }
    }
    c
}

/// Weights of a one-parameter subgroup on a vertex space, one per basis vector.
pub type Weights = Vec<i64>;

/// `dim` of the negative-weight part of `Hom(V_s, V_t)`.
pub fn negative_hom(source: &Weights, target: &Weights) -> i64 {
    source
        .iter()
        .map(|&ws| target.iter().filter(|&&wt| wt - ws < 0).count() as i64)
        .sum()
}

/// `dim` of the negative-weight part of `Λ²V ≅ so(V)`.
pub fn negative_wedge2(v: &Weights) -> i64 {
    let mut c = 0;
    for a in 0..v.len() {
        for b in a + 1..v.len() {
            if v[a] + v[b] < 0 {
                c += 1;
            }
        }
    }
    c
}

/// Codimension of the isotropic stratum of the orthogonal example with
/// dimension vector `(1,1,n)`, by counting weight blocks:
/// `dim(Rep ∩ u⁻) - dim u⁻` for `G = GL(1) × GL(1) × O(n)`, where
/// `Rep = Hom(V2,V1) ⊕ Hom(V3,V2) ⊕ so(V3)` (the mirrored arrows are
/// determined by the form). The isotropic subspace of `V3` has weight `+1`,
/// its orthogonal complement modulo itself weight `0`, the rest `-1`.
pub fn supermixed_codim_oracle(n: u32, n1: u32, theta1_lt_theta2: bool) -> i64 {
    let n2 = n - 2 * n1;
    let mut v3 = vec![1i64; n1 as usize];
    v3.extend(vec![0; n2 as usize]);
    v3.extend(vec![-1; n1 as usize]);
    let (v1, v2) = if theta1_lt_theta2 { (vec![0], vec![1]) } else { (vec![1], vec![0]) };
    let rep = negative_hom(&v2, &v1) + negative_hom(&v3, &v2) + negative_wedge2(&v3);
    let group = negative_hom(&v1, &v1) + negative_hom(&v2, &v2) + negative_wedge2(&v3);
    rep - group
}

pub fn all_vectors(n: usize, max_total: u32) -> Vec<DimensionVector> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|p: Vec<u32>| {
                let used: u32 = p.iter().sum();
                (0..=max_total - used).map(move |x| [p.clone(), vec![x]].concat())
            })
            .collect();
    }
    out.into_iter()
        .filter(|v| v.iter().any(|&x| x > 0))
        .map(DimensionVector)
        .collect()
}
