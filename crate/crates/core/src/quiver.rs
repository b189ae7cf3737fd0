//! Quivers, dimension vectors, stability parameters and the slope arithmetic
//! built on them.
//!
//! Vertices are addressed by their position in the quiver's vertex list; a
//! [`DimensionVector`] or [`StabilityParam`] is a plain vector in that order.
//! All arithmetic here is exact.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Arrow {
    pub name: String,
    pub tail: usize,
    pub head: usize,
}

/// A finite directed multigraph with named vertices and arrows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Quiver {
    vertices: Vec<String>,
    arrows: Vec<Arrow>,
}

impl Quiver {
    /// Builds a quiver from vertex names and `(name, tail, head)` triples.
    pub fn new<S: AsRef<str>>(vertices: &[S], arrows: &[(S, S, S)]) -> Result<Self> {
        let vertices: Vec<String> = vertices.iter().map(|v| v.as_ref().to_string()).collect();
        let mut seen = HashSet::new();
        for v in &vertices {
            if !seen.insert(v.as_str()) {
                return Err(Error::structural(format!("duplicate vertex id '{v}'")));
            }
        }
        let lookup = |id: &str, arrow: &str| {
            vertices.iter().position(|v| v == id).ok_or_else(|| {
                Error::structural(format!("arrow '{arrow}' references unknown vertex '{id}'"))
            })
        };
        let mut names = HashSet::new();
        let mut out = Vec::with_capacity(arrows.len());
        for (name, tail, head) in arrows {
            let name = name.as_ref();
            if !names.insert(name.to_string()) {
                return Err(Error::structural(format!("duplicate arrow id '{name}'")));
            }
            out.push(Arrow {
                name: name.to_string(),
                tail: lookup(tail.as_ref(), name)?,
                head: lookup(head.as_ref(), name)?,
            });
        }
        Ok(Quiver {
            vertices,
            arrows: out,
        })
    }

    /// Quiver on vertices `"1".."n"` with unnamed arrows given by index pairs.
    pub fn from_edges(n_vertices: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let vertices: Vec<String> = (1..=n_vertices).map(|i| i.to_string()).collect();
        let arrows: Vec<(String, String, String)> = edges
            .iter()
            .enumerate()
            .map(|(k, &(t, h))| {
                let name = |i: usize| vertices.get(i).cloned().unwrap_or_else(|| format!("#{i}"));
                (format!("a{}", k + 1), name(t), name(h))
            })
            .collect();
        Quiver::new(&vertices, &arrows)
    }

    /// The `m`-Kronecker quiver: two vertices, `m` parallel arrows `1 -> 2`.
    pub fn kronecker(m: usize) -> Self {
        Quiver::from_edges(2, &vec![(0, 1); m]).expect("valid by construction")
    }

    /// One vertex with a single loop.
    pub fn one_loop() -> Self {
        Quiver::from_edges(1, &[(0, 0)]).expect("valid by construction")
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn arrows(&self) -> &[Arrow] {
        &self.arrows
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertex_index(&self, id: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v == id)
    }

    pub fn arrow_index(&self, name: &str) -> Option<usize> {
        self.arrows.iter().position(|a| a.name == name)
    }

    /// Dimension of the representation space `⊕ Hom(V_t, V_h)`.
    pub fn rep_dimension(&self, d: &DimensionVector) -> Result<u64> {
        self.check_len(d.len())?;
        Ok(self
            .arrows
            .iter()
            .map(|a| d[a.tail] as u64 * d[a.head] as u64)
            .sum())
    }

    /// True if the underlying undirected graph is connected.
    pub fn is_connected(&self) -> bool {
        let n = self.vertices.len();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for a in &self.arrows {
                for (x, y) in [(a.tail, a.head), (a.head, a.tail)] {
                    if x == v && !seen[y] {
                        seen[y] = true;
                        stack.push(y);
                    }
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Errors unless `len` equals the number of vertices.
    pub fn check_len(&self, len: usize) -> Result<()> {
        if len != self.vertices.len() {
            return Err(Error::structural(format!(
                "vector has {len} entries, quiver has {} vertices",
                self.vertices.len()
            )));
        }
        Ok(())
    }
}

/// Nonnegative integer per vertex, in vertex order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DimensionVector(pub Vec<u32>);

impl DimensionVector {
    pub fn new(entries: Vec<u32>) -> Self {
        DimensionVector(entries)
    }

    pub fn zero(n: usize) -> Self {
        DimensionVector(vec![0; n])
    }

    pub fn total(&self) -> u64 {
        self.0.iter().map(|&x| x as u64).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }

    /// Entrywise `self <= other`.
    pub fn fits_in(&self, other: &DimensionVector) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn checked_sub(&self, other: &DimensionVector) -> Option<DimensionVector> {
        if self.0.len() != other.0.len() {
            return None;
        }
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Vec<_>>>()
            .map(DimensionVector)
    }

    pub fn add(&self, other: &DimensionVector) -> DimensionVector {
        DimensionVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn scale(&self, k: u32) -> DimensionVector {
        DimensionVector(self.0.iter().map(|a| a * k).collect())
    }

    /// Every dimension vector `e` with `0 <= e <= self`, in lexicographic order.
    pub fn sub_vectors(&self) -> Vec<DimensionVector> {
        let mut out = vec![Vec::with_capacity(self.0.len())];
        for &bound in &self.0 {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    (0..=bound).map(move |x| {
                        let mut p = prefix.clone();
                        p.push(x);
                        p
                    })
                })
                .collect();
        }
        out.into_iter().map(DimensionVector).collect()
    }
}

impl std::ops::Deref for DimensionVector {
    type Target = [u32];
    fn deref(&self) -> &[u32] {
        &self.0
    }
}

impl From<Vec<u32>> for DimensionVector {
    fn from(v: Vec<u32>) -> Self {
        DimensionVector(v)
    }
}

impl fmt::Display for DimensionVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

/// Integer weight `θ_i` per vertex. Defines the character `∏ det(g_i)^{θ_i}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StabilityParam(pub Vec<i64>);

impl StabilityParam {
    pub fn new(weights: Vec<i64>) -> Self {
        StabilityParam(weights)
    }

    pub fn zero(n: usize) -> Self {
        StabilityParam(vec![0; n])
    }

    pub fn weights(&self) -> &[i64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }

    /// The parameter `|d|·θ - θ(d)·dim`, which vanishes on `d` and defines the
    /// same slope ordering as `θ`.
    pub fn shifted_to(&self, d: &DimensionVector) -> Result<StabilityParam> {
        let value = theta_value(self, d)?;
        let total = d.total() as i64;
        Ok(StabilityParam(
            self.0.iter().map(|&t| total * t - value).collect(),
        ))
    }
}

/// `Σ θ_i d_i`.
pub fn theta_value(theta: &StabilityParam, d: &DimensionVector) -> Result<i64> {
    if theta.0.len() != d.len() {
        return Err(Error::structural(format!(
            "stability parameter has {} entries, dimension vector has {}",
            theta.0.len(),
            d.len()
        )));
    }
    Ok(theta.0.iter().zip(d.iter()).map(|(&t, &x)| t * x as i64).sum())
}

/// `θ(d) / Σ d_i` as an exact rational.
pub fn slope(theta: &StabilityParam, d: &DimensionVector) -> Result<BigRational> {
    let value = theta_value(theta, d)?;
    if d.is_zero() {
        return Err(Error::domain("slope of the zero dimension vector"));
    }
    Ok(BigRational::new(
        BigInt::from(value),
        BigInt::from(d.total()),
    ))
}

/// Compares the slopes of two nonzero dimension vectors without allocating.
pub(crate) fn cmp_slope(theta: &[i64], a: &[u32], b: &[u32]) -> Ordering {
    let value = |d: &[u32]| -> (i128, i128) {
        let v: i128 = theta.iter().zip(d).map(|(&t, &x)| t as i128 * x as i128).sum();
        let n: i128 = d.iter().map(|&x| x as i128).sum();
        (v, n)
    };
    let (va, na) = value(a);
    let (vb, nb) = value(b);
    (va * nb).cmp(&(vb * na))
}

/// `⟨d, e⟩ = Σ_i d_i e_i - Σ_a d_{t(a)} e_{h(a)}`.
pub fn euler_form(q: &Quiver, d: &DimensionVector, e: &DimensionVector) -> Result<i64> {
    q.check_len(d.len())?;
    q.check_len(e.len())?;
    let diag: i64 = d.iter().zip(e.iter()).map(|(&x, &y)| x as i64 * y as i64).sum();
    let off: i64 = q
        .arrows()
        .iter()
        .map(|a| d[a.tail] as i64 * e[a.head] as i64)
        .sum();
    Ok(diag - off)
}

/// True iff `θ(d) = 0`, the condition for `χ_θ` to be trivial on the kernel of
/// the action. A length mismatch is reported as inadmissible.
pub fn check_admissible(theta: &StabilityParam, d: &DimensionVector) -> bool {
    matches!(theta_value(theta, d), Ok(0))
}

/// Graded pieces of the flag induced by a one-parameter subgroup, listed from
/// the innermost step outwards.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiltrationWeights {
    pieces: Vec<DimensionVector>,
}

impl FiltrationWeights {
    pub fn new(pieces: Vec<DimensionVector>, ambient: &DimensionVector) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::domain("filtration has no steps"));
        }
        let mut sum = DimensionVector::zero(ambient.len());
        for p in &pieces {
            if p.len() != ambient.len() {
                return Err(Error::structural("filtration piece has wrong length"));
            }
            if p.is_zero() {
                return Err(Error::domain("filtration piece is zero"));
            }
            sum = sum.add(p);
        }
        if &sum != ambient {
            return Err(Error::domain(format!(
                "filtration pieces sum to {sum}, expected {ambient}"
            )));
        }
        Ok(FiltrationWeights { pieces })
    }

    pub fn pieces(&self) -> &[DimensionVector] {
        &self.pieces
    }

    /// The steps `M_1 ⊂ M_2 ⊂ ... ⊂ M_s`, as partial sums of the pieces.
    pub fn steps(&self) -> Vec<DimensionVector> {
        let mut acc = DimensionVector::zero(self.pieces[0].len());
        self.pieces
            .iter()
            .map(|p| {
                acc = acc.add(p);
                acc.clone()
            })
            .collect()
    }
}

/// Hilbert-Mumford pairing `Σ_j θ(M_j)` over the steps of the filtration.
pub fn hm_pairing(theta: &StabilityParam, f: &FiltrationWeights) -> Result<i64> {
    f.steps().iter().map(|m| theta_value(theta, m)).sum()
}
