//! Supermixed quivers: an involution `σ` on vertices and arrows plus signs
//! `ε`, isotropic slope stability, and the orthogonal example
//!
//! ```text
//! 1 <-α- 2 <-β- 3 <-σβ- σ2 <-σα- σ1        γ: 3 -> 3
//! ```
//!
//! with dimension vector `(1,1,n)` on `G ∪ O = {1,2} ∪ {3}`.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ff::{is_prime, rref, FMat};
use crate::quiver::{DimensionVector, Quiver, StabilityParam};
use crate::replab::{FFRep, SubrepWitness};
use crate::series::{classifying_series, GroupKind, GroupSpec, TruncatedSeries};

/// `σ` and `ε` on a quiver, by vertex and arrow index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymmetricStructure {
    pub vertex_involution: Vec<usize>,
    pub arrow_involution: Vec<usize>,
    pub vertex_signs: Vec<i8>,
    pub arrow_signs: Vec<i8>,
}

impl SymmetricStructure {
    /// The dual dimension vector `i ↦ d_{σ(i)}`.
    pub fn dual(&self, d: &DimensionVector) -> DimensionVector {
        DimensionVector(self.vertex_involution.iter().map(|&j| d[j]).collect())
    }

    pub fn is_compatible(&self, d: &DimensionVector) -> bool {
        d.len() == self.vertex_involution.len() && self.dual(d) == *d
    }
}

/// Every violated condition, each naming the offending vertex or arrow.
pub fn validate_supermixed(q: &Quiver, s: &SymmetricStructure) -> std::result::Result<(), Vec<String>> {
    let nv = q.num_vertices();
    let na = q.arrows().len();
    let mut out = Vec::new();
    for (what, len, want) in [
        ("vertex_involution", s.vertex_involution.len(), nv),
        ("vertex_signs", s.vertex_signs.len(), nv),
        ("arrow_involution", s.arrow_involution.len(), na),
        ("arrow_signs", s.arrow_signs.len(), na),
    ] {
        if len != want {
            out.push(format!("{what} has {len} entries, expected {want}"));
        }
    }
    if !out.is_empty() {
        return Err(out);
    }
    let vname = |i: usize| q.vertices()[i].clone();
    let aname = |a: usize| q.arrows()[a].name.clone();
    for (i, &j) in s.vertex_involution.iter().enumerate() {
        if j >= nv {
            out.push(format!("vertex {}: involution target {j} out of range", vname(i)));
        }
    }
    for (a, &b) in s.arrow_involution.iter().enumerate() {
        if b >= na {
            out.push(format!("arrow {}: involution target {b} out of range", aname(a)));
        }
    }
    if !out.is_empty() {
        return Err(out);
    }
    let sv = &s.vertex_involution;
    let sa = &s.arrow_involution;
    for i in 0..nv {
        if sv[sv[i]] != i {
            out.push(format!("vertex {}: σ(σ({})) = {}", vname(i), vname(i), vname(sv[sv[i]])));
        }
        match s.vertex_signs[i] {
            1 | -1 => {
                if s.vertex_signs[sv[i]].abs() == 1 && s.vertex_signs[i] * s.vertex_signs[sv[i]] != 1 {
                    out.push(format!("vertex {}: ε·ε_σ = -1", vname(i)));
                }
            }
            e => out.push(format!("vertex {}: sign {e} is not ±1", vname(i))),
        }
    }
    for a in 0..na {
        let arrow = &q.arrows()[a];
        let image = &q.arrows()[sa[a]];
        if sa[sa[a]] != a {
            out.push(format!("arrow {}: σ(σ({})) = {}", aname(a), aname(a), aname(sa[sa[a]])));
        }
        if sv[arrow.tail] != image.head {
            out.push(format!("arrow {}: σt = {} but hσ = {}", aname(a), vname(sv[arrow.tail]), vname(image.head)));
        }
        if sv[arrow.head] != image.tail {
            out.push(format!("arrow {}: σh = {} but tσ = {}", aname(a), vname(sv[arrow.head]), vname(image.tail)));
        }
        if arrow.tail == sv[arrow.head] && sa[a] != a {
            out.push(format!("arrow {}: t = σh but the arrow is not fixed", aname(a)));
        }
        match s.arrow_signs[a] {
            1 | -1 => {
                if s.arrow_signs[sa[a]].abs() == 1 && s.arrow_signs[a] * s.arrow_signs[sa[a]] != 1 {
                    out.push(format!("arrow {}: ε·ε_σ = -1", aname(a)));
                }
            }
            e => out.push(format!("arrow {}: sign {e} is not ±1", aname(a))),
        }
    }
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

/// Fixed vertices split by sign, plus one representative (the smaller index)
/// per swapped pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexClassification {
    pub o: Vec<usize>,
    pub s: Vec<usize>,
    pub g: Vec<usize>,
}

impl VertexClassification {
    pub fn new(s: &SymmetricStructure) -> Self {
        let mut cls = VertexClassification {
            o: Vec::new(),
            s: Vec::new(),
            g: Vec::new(),
        };
        for (i, &j) in s.vertex_involution.iter().enumerate() {
            if i == j {
                if s.vertex_signs[i] > 0 {
                    cls.o.push(i);
                } else {
                    cls.s.push(i);
                }
            } else if i < j {
                cls.g.push(i);
            }
        }
        cls
    }

    /// `dim'(d) = Σ_{i∈G} d_i`.
    pub fn dim_prime(&self, d: &DimensionVector) -> u64 {
        self.g.iter().map(|&i| d[i] as u64).sum()
    }

    /// The symmetry group `∏_O O(d_i) × ∏_S Sp(d_i/2) × ∏_G GL(d_i)`.
    pub fn group(&self, d: &DimensionVector) -> GroupSpec {
        let mut f = Vec::new();
        f.extend(self.o.iter().map(|&i| (GroupKind::O, d[i])));
        f.extend(self.s.iter().map(|&i| (GroupKind::Sp, d[i] / 2)));
        f.extend(self.g.iter().map(|&i| (GroupKind::GL, d[i])));
        GroupSpec::new(f)
    }
}

/// `θ(d)/dim'(d)` summed over `G` only.
pub fn isotropic_slope(theta: &StabilityParam, cls: &VertexClassification, d: &DimensionVector) -> Result<BigRational> {
    let theta = theta.weights();
    let n = cls.o.len() + cls.s.len() + 2 * cls.g.len();
    if theta.len() != n || d.len() != n {
        return Err(Error::structural(format!(
            "expected vectors of length {n}, got θ of length {} and d of length {}",
            theta.len(),
            d.len()
        )));
    }
    if let Some(&i) = cls.o.iter().chain(&cls.s).find(|&&i| theta[i] != 0) {
        return Err(Error::domain(format!("θ must vanish on fixed vertices, θ[{i}] = {}", theta[i])));
    }
    let den = cls.dim_prime(d);
    if den == 0 {
        return Err(Error::domain(format!("dim' of {d} is zero, slope undefined")));
    }
    let num: i64 = cls.g.iter().map(|&i| theta[i] * d[i] as i64).sum();
    Ok(BigRational::new(BigInt::from(num), BigInt::from(den)))
}

/// Isotropic HN pieces `d¹,…,dˡ` and the self-dual residue `d^∞` with
/// `d = Σ_k (dᵏ + dᵏ*) + d^∞`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IsotropicHNType {
    pub pieces: Vec<DimensionVector>,
    pub residue: DimensionVector,
}

impl IsotropicHNType {
    pub fn new(
        pieces: Vec<DimensionVector>,
        residue: DimensionVector,
        theta: &StabilityParam,
        s: &SymmetricStructure,
        ambient: &DimensionVector,
    ) -> Result<Self> {
        let cls = VertexClassification::new(s);
        if pieces.is_empty() {
            return Err(Error::domain("isotropic HN type needs at least one piece"));
        }
        let mut total = residue.clone();
        for p in &pieces {
            total = total.add(p).add(&s.dual(p));
        }
        if total != *ambient {
            return Err(Error::domain(format!("pieces and residue sum to {total}, not {ambient}")));
        }
        if s.dual(&residue) != residue {
            return Err(Error::domain(format!("residue {residue} is not self-dual")));
        }
        let mut prev = isotropic_slope(theta, &cls, ambient)?;
        for p in pieces.iter().rev() {
            let sp = isotropic_slope(theta, &cls, p)?;
            if sp <= prev {
                return Err(Error::domain(format!("slope of {p} does not exceed the next slope")));
            }
            prev = sp;
        }
        Ok(IsotropicHNType { pieces, residue })
    }
}

impl fmt::Display for IsotropicHNType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.pieces {
            write!(f, "{p} > ")?;
        }
        write!(f, "[{}]", self.residue)
    }
}

/// The example quiver with vertices `1, 2, 3, s2, s1` and arrows
/// `alpha, beta, gamma, sbeta, salpha`; `3` is orthogonal.
pub fn example_quiver() -> (Quiver, SymmetricStructure) {
    let q = Quiver::new(
        &["1", "2", "3", "s2", "s1"],
        &[
            ("alpha", "2", "1"),
            ("beta", "3", "2"),
            ("gamma", "3", "3"),
            ("sbeta", "s2", "3"),
            ("salpha", "s1", "s2"),
        ],
    )
    .expect("example quiver is well formed");
    let s = SymmetricStructure {
        vertex_involution: vec![4, 3, 2, 1, 0],
        arrow_involution: vec![4, 3, 2, 1, 0],
        vertex_signs: vec![1; 5],
        arrow_signs: vec![1; 5],
    };
    (q, s)
}

pub fn example_dimension(n: u32) -> DimensionVector {
    DimensionVector(vec![1, 1, n, 1, 1])
}

pub fn example_theta(theta1: i64, theta2: i64) -> StabilityParam {
    StabilityParam(vec![theta1, theta2, 0, 0, 0])
}

/// `d(n₁,n₂) = (n²+n+2)/2 - n₁² - n₁ - n₂(n₂-1)/2 - 1` with `n₂ = n - 2n₁`.
pub fn example_codim(n: u32, n1: u32) -> Result<i64> {
    if n1 < 1 || 2 * n1 > n {
        return Err(Error::domain(format!("need 1 ≤ n1 and 2·n1 ≤ n, got n = {n}, n1 = {n1}")));
    }
    let (n, n1) = (n as i64, n1 as i64);
    let n2 = n - 2 * n1;
    Ok((n * n + n + 2) / 2 - n1 * n1 - n1 - n2 * (n2 - 1) / 2 - 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StratumFamily {
    /// `Rep(Q',1,n₁) ⊕ Rep₀^st(Q'',n₂)`, regime `θ₁ < θ₂`.
    Z1,
    /// `Rep(Q'',n₁) ⊕ Rep₀^st(Q',1,n₂)`, regime `θ₁ < θ₂`.
    Z2,
    /// The single family of the regime `θ₁ > θ₂`.
    Z,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupermixedStratum {
    pub family: StratumFamily,
    pub n1: u32,
    pub n2: u32,
    pub hn_type: IsotropicHNType,
    pub codim: i64,
    pub levi: GroupSpec,
}

/// One stratum per `n₁ ∈ [1, ⌊n/2⌋]`, doubled when `θ₁ < θ₂`.
pub fn example_strata(n: u32, theta1: i64, theta2: i64) -> Result<Vec<SupermixedStratum>> {
    if n < 1 {
        return Err(Error::domain("n must be at least 1"));
    }
    if theta1 == theta2 {
        return Err(Error::domain("trivial character, no strata"));
    }
    let (_, s) = example_quiver();
    let theta = example_theta(theta1, theta2);
    let d = example_dimension(n);
    let families: &[StratumFamily] = if theta1 < theta2 {
        &[StratumFamily::Z1, StratumFamily::Z2]
    } else {
        &[StratumFamily::Z]
    };
    let mut out = Vec::new();
    for n1 in 1..=n / 2 {
        let n2 = n - 2 * n1;
        let (piece, residue) = if theta1 < theta2 {
            (vec![0, 1, n1, 0, 0], vec![1, 0, n2, 0, 1])
        } else {
            (vec![1, 0, n1, 0, 0], vec![0, 1, n2, 1, 0])
        };
        let hn_type = IsotropicHNType::new(vec![DimensionVector(piece)], DimensionVector(residue), &theta, &s, &d)?;
        let codim = example_codim(n, n1)?;
        let levi = GroupSpec::new(vec![(GroupKind::GL, 1), (GroupKind::GL, n1), (GroupKind::O, n2)]);
        for &family in families {
            out.push(SupermixedStratum {
                family,
                n1,
                n2,
                hn_type: hn_type.clone(),
                codim,
                levi: levi.clone(),
            });
        }
    }
    Ok(out)
}

/// Supplies `P_t^{L(n₁)}(Z(n₁))` for a stratum; `None` means unknown.
pub trait BaseCaseProvider: Sync {
    fn base_case(&self, stratum: &SupermixedStratum, degree: u32) -> Result<Option<TruncatedSeries>>;
}

/// Every stratum contributes zero.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroBase;

impl BaseCaseProvider for ZeroBase {
    fn base_case(&self, _: &SupermixedStratum, degree: u32) -> Result<Option<TruncatedSeries>> {
        Ok(Some(TruncatedSeries::zero(degree)))
    }
}

/// Knows nothing.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoBase;

impl BaseCaseProvider for NoBase {
    fn base_case(&self, _: &SupermixedStratum, _: u32) -> Result<Option<TruncatedSeries>> {
        Ok(None)
    }
}

impl<F> BaseCaseProvider for F
where
    F: Fn(&SupermixedStratum, u32) -> Option<TruncatedSeries> + Sync,
{
    fn base_case(&self, stratum: &SupermixedStratum, degree: u32) -> Result<Option<TruncatedSeries>> {
        Ok(self(stratum, degree))
    }
}

/// `P(BG) - Σ_strata t^{2·codim} · base(stratum)` for `G = GL(1)² × O(n)`.
pub fn example_series(n: u32, theta1: i64, theta2: i64, degree: u32, base: &dyn BaseCaseProvider) -> Result<TruncatedSeries> {
    let strata = example_strata(n, theta1, theta2)?;
    let (_, s) = example_quiver();
    let g = VertexClassification::new(&s).group(&example_dimension(n));
    let mut out = classifying_series(&g, degree)?;
    for st in &strata {
        let b = base.base_case(st, degree)?.ok_or_else(|| Error::UnresolvedBase {
            n1: st.n1,
            group: GroupSpec::new(vec![(GroupKind::GL, st.n1), (GroupKind::O, st.n2)]).to_string(),
        })?;
        if b.degree() != degree {
            return Err(Error::domain(format!(
                "base case truncated at {}, expected {degree}",
                b.degree()
            )));
        }
        out = out.try_sub(&b.shift(2 * st.codim as u32))?;
    }
    Ok(out)
}

fn check_odd_field(field: u32) -> Result<()> {
    if field == 2 || !is_prime(field) {
        return Err(Error::domain(format!("split forms need an odd prime field, got {field}")));
    }
    Ok(())
}

fn offsets(d: &DimensionVector) -> Vec<usize> {
    let mut off = vec![0usize; d.len() + 1];
    for (i, &x) in d.iter().enumerate() {
        off[i + 1] = off[i] + x as usize;
    }
    off
}

/// Gram matrix of the split form on `⊕ V_i`: antidiagonal on orthogonal
/// vertices, signed antidiagonal on symplectic ones, and `δ_ab` between
/// `V_i` and `V_{σ(i)}` for `i ∈ G` (with `C(v', v) = ε_i C(v, v')`).
pub fn split_form(s: &SymmetricStructure, d: &DimensionVector, field: u32) -> Result<FMat> {
    check_odd_field(field)?;
    if !s.is_compatible(d) {
        return Err(Error::domain(format!("dimension vector {d} is not σ-compatible")));
    }
    let off = offsets(d);
    let mut c = FMat::zeros(off[d.len()], off[d.len()]);
    let minus_one = field - 1;
    for (i, &j) in s.vertex_involution.iter().enumerate() {
        let m = d[i] as usize;
        if i == j {
            if s.vertex_signs[i] < 0 && m % 2 == 1 {
                return Err(Error::domain(format!("symplectic vertex {i} has odd dimension {m}")));
            }
            for a in 0..m {
                let x = if s.vertex_signs[i] < 0 && 2 * a >= m { minus_one } else { 1 };
                c.set(off[i] + a, off[i] + m - 1 - a, x);
            }
        } else if i < j {
            let back = if s.vertex_signs[i] < 0 { minus_one } else { 1 };
            for a in 0..m {
                c.set(off[i] + a, off[j] + a, 1);
                c.set(off[j] + a, off[i] + a, back);
            }
        }
    }
    Ok(c)
}

fn total_map(q: &Quiver, r: &FFRep, arrow: usize, off: &[usize]) -> FMat {
    let n = *off.last().unwrap();
    let a = &q.arrows()[arrow];
    let m = &r.maps[arrow];
    let mut out = FMat::zeros(n, n);
    for i in 0..m.rows {
        for j in 0..m.cols {
            out.set(off[a.head] + i, off[a.tail] + j, m.get(i, j));
        }
    }
    out
}

fn add(a: &FMat, b: &FMat, q: u32) -> FMat {
    let mut out = a.clone();
    for i in 0..a.rows {
        for j in 0..a.cols {
            out.set(i, j, (a.get(i, j) + b.get(i, j)) % q);
        }
    }
    out
}

/// `C(φ_α v, w) + C(v, φ_{σ(α)} w) = 0` for every arrow.
pub fn is_form_compatible(q: &Quiver, s: &SymmetricStructure, r: &FFRep) -> Result<bool> {
    r.validate(q)?;
    let c = split_form(s, &r.dims, r.field)?;
    let off = offsets(&r.dims);
    for a in 0..q.arrows().len() {
        let x = total_map(q, r, a, &off);
        let y = total_map(q, r, s.arrow_involution[a], &off);
        let lhs = add(&x.transpose().mul(&c, r.field), &c.mul(&y, r.field), r.field);
        if !lhs.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

fn witness_rows(w: &SubrepWitness, d: &DimensionVector, off: &[usize], field: u32) -> Result<Vec<Vec<u32>>> {
    if w.dims.len() != d.len() || w.bases.len() != d.len() {
        return Err(Error::structural(format!("flag step has {} vertices, expected {}", w.bases.len(), d.len())));
    }
    let n = *off.last().unwrap();
    let mut rows = Vec::new();
    for (i, basis) in w.bases.iter().enumerate() {
        if basis.len() != w.dims[i] as usize || w.dims[i] > d[i] {
            return Err(Error::structural(format!("flag step at vertex {i} has inconsistent dimension")));
        }
        for b in basis {
            if b.len() != d[i] as usize {
                return Err(Error::structural(format!(
                    "basis vector of length {} at vertex {i}, expected {}",
                    b.len(),
                    d[i]
                )));
            }
            let mut v = vec![0u32; n];
            for (k, &x) in b.iter().enumerate() {
                v[off[i] + k] = x % field;
            }
            rows.push(v);
        }
    }
    let pivots = rref(&mut rows, field);
    if pivots.len() != w.dims.total() as usize {
        return Err(Error::structural("flag step basis is linearly dependent"));
    }
    Ok(rows)
}

/// Basis of `{x : rows · x = 0}` in reduced form.
fn kernel(rows: &[Vec<u32>], n: usize, q: u32) -> Vec<Vec<u32>> {
    let mut m = rows.to_vec();
    let pivots = rref(&mut m, q);
    let mut out = Vec::new();
    for free in (0..n).filter(|c| !pivots.contains(c)) {
        let mut v = vec![0u32; n];
        v[free] = 1;
        for (row, &p) in m.iter().zip(&pivots) {
            v[p] = (q - row[free]) % q;
        }
        out.push(v);
    }
    rref(&mut out, q);
    out
}

fn contains(space: &[Vec<u32>], v: &[u32], q: u32) -> bool {
    let mut m = space.to_vec();
    let r = rref(&mut m, q).len();
    m.push(v.to_vec());
    rref(&mut m, q).len() == r
}

/// Whether `0 ⊂ V¹ ⊂ … ⊂ V^{r-1} ⊂ V` is a `φ`-stable flag with
/// `(Vᵏ)^⊥ = V^{r-k}` for the split form. The trivial flag is the empty list.
pub fn check_isotropic_flag(q: &Quiver, s: &SymmetricStructure, r: &FFRep, flag: &[SubrepWitness]) -> Result<bool> {
    r.validate(q)?;
    let field = r.field;
    let c = split_form(s, &r.dims, field)?;
    let off = offsets(&r.dims);
    let n = *off.last().unwrap();
    let mut steps: Vec<Vec<Vec<u32>>> = vec![Vec::new()];
    for w in flag {
        steps.push(witness_rows(w, &r.dims, &off, field)?);
    }
    steps.push((0..n).map(|i| (0..n).map(|j| u32::from(i == j)).collect()).collect());
    for pair in steps.windows(2) {
        if pair[0].iter().any(|v| !contains(&pair[1], v, field)) {
            return Ok(false);
        }
    }
    let maps: Vec<FMat> = (0..q.arrows().len()).map(|a| total_map(q, r, a, &off)).collect();
    for step in &steps {
        for v in step {
            if maps.iter().any(|m| !contains(step, &m.apply(v, field), field)) {
                return Ok(false);
            }
        }
    }
    let k = steps.len() - 1;
    for (i, step) in steps.iter().enumerate() {
        // rows of B·C: the functionals w ↦ C(b, w)
        let functionals: Vec<Vec<u32>> = step
            .iter()
            .map(|b| (0..n).map(|j| ((0..n).map(|l| b[l] as u64 * c.get(l, j) as u64).sum::<u64>() % field as u64) as u32).collect())
            .collect();
        let perp = kernel(&functionals, n, field);
        let mut other = steps[k - i].clone();
        rref(&mut other, field);
        if perp != other {
            return Ok(false);
        }
    }
    Ok(true)
}
