//! Linear algebra over prime fields `F_q`, sized for exhaustive enumeration:
//! dense matrices with `u32` entries and every subspace of `F_q^n` listed in
//! reduced row echelon form.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ambient spaces larger than this many vectors are not enumerated.
pub const MAX_AMBIENT_SIZE: u64 = 1 << 16;

pub fn is_prime(q: u32) -> bool {
    q >= 2 && (2..q).take_while(|p| p * p <= q).all(|p| q % p != 0)
}

pub fn inv_mod(a: u32, q: u32) -> u32 {
    debug_assert!(a % q != 0);
    // q is prime: a^(q-2)
    let mut result = 1u64;
    let mut base = (a % q) as u64;
    let mut e = q - 2;
    while e > 0 {
        if e & 1 == 1 {
            result = result * base % q as u64;
        }
        base = base * base % q as u64;
        e >>= 1;
    }
    result as u32
}

/// Row-major `rows × cols` matrix over `F_q`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FMat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<u32>,
}

impl FMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        FMat {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<u32>], cols: usize, q: u32) -> Result<Self> {
        let mut m = Self::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(Error::structural(format!(
                    "matrix row {i} has {} entries, expected {cols}",
                    r.len()
                )));
            }
            for (j, &x) in r.iter().enumerate() {
                m.data[i * cols + j] = x % q;
            }
        }
        Ok(m)
    }

    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, x: u32) {
        self.data[i * self.cols + j] = x;
    }

    pub fn to_rows(&self) -> Vec<Vec<u32>> {
        (0..self.rows)
            .map(|i| self.data[i * self.cols..(i + 1) * self.cols].to_vec())
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    /// `self · v` for a column vector `v`.
    pub fn apply(&self, v: &[u32], q: u32) -> Vec<u32> {
        debug_assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                let row = &self.data[i * self.cols..(i + 1) * self.cols];
                (row.iter().zip(v).map(|(&a, &b)| a as u64 * b as u64).sum::<u64>() % q as u64) as u32
            })
            .collect()
    }

    pub fn mul(&self, other: &FMat, q: u32) -> FMat {
        debug_assert_eq!(self.cols, other.rows);
        let mut out = FMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k) as u64;
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let idx = i * other.cols + j;
                    out.data[idx] = ((out.data[idx] as u64 + a * other.get(k, j) as u64) % q as u64) as u32;
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> FMat {
        let mut out = FMat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    pub fn neg(&self, q: u32) -> FMat {
        FMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| (q - x) % q).collect(),
        }
    }
}

/// Encodes `v ∈ F_q^n` as `Σ v_i q^i`.
pub fn encode(v: &[u32], q: u32) -> usize {
    v.iter().rev().fold(0usize, |acc, &x| acc * q as usize + x as usize)
}

pub fn decode(mut code: usize, n: usize, q: u32) -> Vec<u32> {
    (0..n)
        .map(|_| {
            let x = (code % q as usize) as u32;
            code /= q as usize;
            x
        })
        .collect()
}

/// Reduces `rows` to reduced row echelon form in place and drops zero rows.
/// Returns the pivot columns.
pub fn rref(rows: &mut Vec<Vec<u32>>, q: u32) -> Vec<usize> {
    let cols = rows.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows.len()).find(|&i| rows[i][c] != 0) else {
            continue;
        };
        rows.swap(r, p);
        let inv = inv_mod(rows[r][c], q);
        for x in rows[r].iter_mut() {
            *x = (*x as u64 * inv as u64 % q as u64) as u32;
        }
        for i in 0..rows.len() {
            if i != r && rows[i][c] != 0 {
                let f = rows[i][c] as u64;
                for j in 0..cols {
                    let sub = f * rows[r][j] as u64 % q as u64;
                    rows[i][j] = ((rows[i][j] as u64 + q as u64 - sub) % q as u64) as u32;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    rows.truncate(r);
    pivots
}

pub fn rank(rows: &[Vec<u32>], q: u32) -> usize {
    let mut m = rows.to_vec();
    rref(&mut m, q).len()
}

/// A subspace of `F_q^n` with its RREF basis and the set of its elements.
#[derive(Debug, Clone)]
pub struct Subspace {
    pub n: usize,
    pub basis: Vec<Vec<u32>>,
    pub pivots: Vec<usize>,
    /// [`encode`]d basis vectors.
    pub(crate) basis_codes: Vec<usize>,
    members: Vec<u64>,
}

impl Subspace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn contains(&self, v: &[u32], q: u32) -> bool {
        let code = encode(v, q);
        self.members[code / 64] >> (code % 64) & 1 == 1
    }

    pub fn contains_code(&self, code: usize) -> bool {
        self.members[code / 64] >> (code % 64) & 1 == 1
    }

    /// `v` minus its component along the pivot coordinates; zero iff `v` lies in the subspace.
    pub fn reduce(&self, v: &[u32], q: u32) -> Vec<u32> {
        let mut out = v.to_vec();
        for (row, &p) in self.basis.iter().zip(&self.pivots) {
            let f = out[p] as u64;
            if f == 0 {
                continue;
            }
            for (o, &b) in out.iter_mut().zip(row) {
                *o = ((*o as u64 + q as u64 - f * b as u64 % q as u64) % q as u64) as u32;
            }
        }
        out
    }

    /// Non-pivot coordinates: a basis of the complement used for quotients.
    pub fn free_columns(&self) -> Vec<usize> {
        (0..self.n).filter(|c| !self.pivots.contains(c)).collect()
    }

    /// Coordinates of a member in the RREF basis (its pivot entries).
    pub fn coordinates(&self, v: &[u32]) -> Vec<u32> {
        self.pivots.iter().map(|&p| v[p]).collect()
    }

    pub fn from_spanning(rows: Vec<Vec<u32>>, n: usize, q: u32) -> Result<Subspace> {
        check_ambient(n, q)?;
        let mut rows: Vec<Vec<u32>> = rows.into_iter().map(|r| r.into_iter().map(|x| x % q).collect()).collect();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::structural(format!("spanning vector length differs from {n}")));
        }
        let pivots = rref(&mut rows, q);
        Ok(Self::build(n, rows, pivots, q))
    }

    fn build(n: usize, basis: Vec<Vec<u32>>, pivots: Vec<usize>, q: u32) -> Subspace {
        let size = (q as usize).pow(n as u32);
        let mut members = vec![0u64; size.div_ceil(64)];
        let k = basis.len();
        for c in 0..(q as usize).pow(k as u32) {
            let coeffs = decode(c, k, q);
            let mut v = vec![0u64; n];
            for (a, row) in coeffs.iter().zip(&basis) {
                for (x, &b) in v.iter_mut().zip(row) {
                    *x += *a as u64 * b as u64;
                }
            }
            let v: Vec<u32> = v.into_iter().map(|x| (x % q as u64) as u32).collect();
            let code = encode(&v, q);
            members[code / 64] |= 1 << (code % 64);
        }
        Subspace {
            n,
            basis_codes: basis.iter().map(|b| encode(b, q)).collect(),
            basis,
            pivots,
            members,
        }
    }

    /// Sort key: dimension first, then the flattened RREF basis.
    pub fn key(&self) -> (usize, Vec<u32>) {
        (self.dim(), self.basis.concat())
    }
}

fn check_ambient(n: usize, q: u32) -> Result<()> {
    if !is_prime(q) {
        return Err(Error::domain(format!("field order {q} is not prime")));
    }
    let size = (q as u64).checked_pow(n as u32).unwrap_or(u64::MAX);
    if size > MAX_AMBIENT_SIZE {
        return Err(Error::Budget {
            what: format!("vectors of F_{q}^{n}"),
            required: size as u128,
            budget: MAX_AMBIENT_SIZE as u128,
        });
    }
    Ok(())
}

/// Every subspace of `F_q^n`, sorted by [`Subspace::key`].
pub fn all_subspaces(n: usize, q: u32) -> Result<Arc<Vec<Subspace>>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, u32), Arc<Vec<Subspace>>>>> = OnceLock::new();
    check_ambient(n, q)?;
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(hit) = cache.lock().expect("subspace cache poisoned").get(&(n, q)) {
        return Ok(hit.clone());
    }
    let mut out = Vec::new();
    for k in 0..=n {
        for pivots in combinations(n, k) {
            // free slots: (row r, column c) with c > pivots[r] and c not a pivot
            let slots: Vec<(usize, usize)> = (0..k)
                .flat_map(|r| {
                    let pivots = &pivots;
                    (pivots[r] + 1..n).filter(move |c| !pivots.contains(c)).map(move |c| (r, c))
                })
                .collect();
            for fill in 0..(q as usize).pow(slots.len() as u32) {
                let values = decode(fill, slots.len(), q);
                let mut basis = vec![vec![0u32; n]; k];
                for (r, &p) in pivots.iter().enumerate() {
                    basis[r][p] = 1;
                }
                for (&(r, c), &x) in slots.iter().zip(&values) {
                    basis[r][c] = x;
                }
                out.push(Subspace::build(n, basis, pivots.clone(), q));
            }
        }
    }
    out.sort_by_key(|a| a.key());
    let out = Arc::new(out);
    cache
        .lock()
        .expect("subspace cache poisoned")
        .insert((n, q), out.clone());
    Ok(out)
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Gaussian binomial `[n choose k]_q`: the number of `k`-dimensional subspaces of `F_q^n`.
pub fn gaussian_binomial(n: u32, k: u32, q: u32) -> u128 {
    if k > n {
        return 0;
    }
    let q = q as u128;
    let mut num = 1u128;
    let mut den = 1u128;
    for i in 0..k {
        num *= q.pow(n - i) - 1;
        den *= q.pow(i + 1) - 1;
    }
    num / den
}

/// Number of flags in `F_q^n` with successive quotient dimensions `parts`.
pub fn flag_count(parts: &[u32], q: u32) -> u128 {
    let mut remaining: u32 = parts.iter().sum();
    let mut out = 1u128;
    for &p in parts {
        out *= gaussian_binomial(remaining, p, q);
        remaining -= p;
    }
    out
}
