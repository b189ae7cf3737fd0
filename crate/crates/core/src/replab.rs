//! Brute-force oracle over small prime fields.
//!
//! Every representation of a tiny dimension vector is enumerated, its
//! subrepresentations are found by exhaustive subspace search, and the
//! resulting HN types are tallied against the count predicted by the
//! fibration of each stratum over a flag variety:
//!
//! ```text
//! |S_t| = |G/P_t| · q^{dim(Rep ∩ u_P)} · ∏_k |Rep(d^k)^ss|
//! ```

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ff::{all_subspaces, decode, encode, flag_count, is_prime, FMat, Subspace};
use crate::hn::{codim, slope_ordered_types, HNType};
use crate::quiver::{cmp_slope, DimensionVector, Quiver, StabilityParam};

pub const DEFAULT_BUDGET: u128 = 1_000_000;

/// A representation over `F_q`: one `d_{h(a)} × d_{t(a)}` matrix per arrow.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FFRep {
    pub field: u32,
    pub dims: DimensionVector,
    pub maps: Vec<FMat>,
}

impl FFRep {
    pub fn new(q: &Quiver, field: u32, dims: DimensionVector, maps: Vec<FMat>) -> Result<Self> {
        let r = FFRep { field, dims, maps };
        r.validate(q)?;
        Ok(r)
    }

    pub fn zero(q: &Quiver, field: u32, dims: DimensionVector) -> Result<Self> {
        let maps = q
            .arrows()
            .iter()
            .map(|a| FMat::zeros(dims.get(a.head).copied().unwrap_or(0) as usize, dims.get(a.tail).copied().unwrap_or(0) as usize))
            .collect();
        FFRep::new(q, field, dims, maps)
    }

    pub fn validate(&self, q: &Quiver) -> Result<()> {
        if !is_prime(self.field) {
            return Err(Error::domain(format!("field order {} is not prime", self.field)));
        }
        q.check_len(self.dims.len())?;
        if self.maps.len() != q.arrows().len() {
            return Err(Error::structural(format!(
                "representation has {} maps, quiver has {} arrows",
                self.maps.len(),
                q.arrows().len()
            )));
        }
        for (m, a) in self.maps.iter().zip(q.arrows()) {
            let (rows, cols) = (self.dims[a.head] as usize, self.dims[a.tail] as usize);
            if m.rows != rows || m.cols != cols || m.data.len() != rows * cols {
                return Err(Error::structural(format!(
                    "map for arrow '{}' is {}x{}, expected {rows}x{cols}",
                    a.name, m.rows, m.cols
                )));
            }
            if m.data.iter().any(|&x| x >= self.field) {
                return Err(Error::domain(format!(
                    "map for arrow '{}' has entries outside F_{}",
                    a.name, self.field
                )));
            }
        }
        Ok(())
    }
}

/// Per-vertex RREF bases of a `φ`-stable subspace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubrepWitness {
    pub dims: DimensionVector,
    pub bases: Vec<Vec<Vec<u32>>>,
}

/// How ties between equally good subrepresentations are broken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieBreak {
    /// Lexicographically smallest reduced-echelon basis.
    #[default]
    LexSmallest,
    LexLargest,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusEntry {
    pub hn_type: HNType,
    pub observed: u128,
    pub predicted: u128,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusReport {
    pub field: u32,
    pub dims: DimensionVector,
    pub theta: StabilityParam,
    pub entries: Vec<CensusEntry>,
    pub total: u128,
    pub matches: bool,
}

impl CensusReport {
    pub fn observed_total(&self) -> u128 {
        self.entries.iter().map(|e| e.observed).sum()
    }
}

/// Subspace lattices of one representation, one table per vertex.
struct Lattice {
    tables: Vec<Arc<Vec<Subspace>>>,
}

impl Lattice {
    fn new(r: &FFRep) -> Result<Self> {
        let tables = r
            .dims
            .iter()
            .map(|&n| all_subspaces(n as usize, r.field))
            .collect::<Result<_>>()?;
        Ok(Lattice { tables })
    }

    /// Calls `f` with the per-vertex subspace indices of every `φ`-stable tuple.
    fn for_each_subrep(&self, q: &Quiver, r: &FFRep, mut f: impl FnMut(&[usize])) {
        // images[a][c]: code of φ_a applied to the vector with code c at t(a)
        let images: Vec<Vec<usize>> = r.maps.iter().map(|m| image_codes(m, r.field)).collect();
        // arrows to check once vertex v is assigned: those whose later endpoint is v
        let n = q.num_vertices();
        let mut checks: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, a) in q.arrows().iter().enumerate() {
            checks[a.tail.max(a.head)].push(i);
        }
        let mut choice = vec![0usize; n];
        self.descend(q, 0, &checks, &images, &mut choice, &mut f);
    }

    fn descend(
        &self,
        q: &Quiver,
        v: usize,
        checks: &[Vec<usize>],
        images: &[Vec<usize>],
        choice: &mut Vec<usize>,
        f: &mut impl FnMut(&[usize]),
    ) {
        if v == choice.len() {
            f(choice);
            return;
        }
        'outer: for s in 0..self.tables[v].len() {
            choice[v] = s;
            for &ai in &checks[v] {
                let a = &q.arrows()[ai];
                let source = &self.tables[a.tail][choice[a.tail]];
                let target = &self.tables[a.head][choice[a.head]];
                if !source.basis_codes.iter().all(|&c| target.contains_code(images[ai][c])) {
                    continue 'outer;
                }
            }
            self.descend(q, v + 1, checks, images, choice, f);
        }
    }

    /// Visits every `φ`-stable tuple whose dimension vector `e` has
    /// `key(e) = Some(k)` with `k` at least the largest key seen so far,
    /// skipping whole dimension blocks whose best completion falls short.
    /// Vertices with few subspaces are assigned first; blocks are tried in
    /// decreasing order of their bound so a good key is found early.
    fn search<K: Ord + Clone>(
        &self,
        q: &Quiver,
        r: &FFRep,
        key: impl Fn(&[u32]) -> Option<K>,
        mut visit: impl FnMut(&[usize], &[u32], &K),
    ) {
        let field = r.field;
        let n = q.num_vertices();
        let images: Vec<Vec<usize>> = r.maps.iter().map(|m| image_codes(m, field)).collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&v| self.tables[v].len());
        let mut pos = vec![0; n];
        for (i, &v) in order.iter().enumerate() {
            pos[v] = i;
        }
        let mut checks: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, a) in q.arrows().iter().enumerate() {
            checks[pos[a.tail].max(pos[a.head])].push(i);
        }
        // blocks[v][k]: index range of the k-dimensional subspaces at v
        let blocks: Vec<Vec<(usize, usize)>> = self
            .tables
            .iter()
            .map(|t| {
                let top = t.last().map_or(0, |s| s.dim());
                (0..=top)
                    .map(|k| (t.partition_point(|s| s.dim() < k), t.partition_point(|s| s.dim() <= k)))
                    .collect()
            })
            .collect();
        let st = SearchState {
            q,
            order: &order,
            checks: &checks,
            images: &images,
            blocks: &blocks,
            full: r.dims.0.clone(),
        };
        let mut choice = vec![0usize; n];
        let mut dims = vec![0u32; n];
        let mut best: Option<K> = None;
        self.search_level(&st, 0, &key, &mut visit, &mut choice, &mut dims, &mut best);
    }

    #[allow(clippy::too_many_arguments)]
    fn search_level<K: Ord + Clone>(
        &self,
        st: &SearchState<'_>,
        level: usize,
        key: &impl Fn(&[u32]) -> Option<K>,
        visit: &mut impl FnMut(&[usize], &[u32], &K),
        choice: &mut Vec<usize>,
        dims: &mut Vec<u32>,
        best: &mut Option<K>,
    ) {
        if level == st.order.len() {
            if let Some(k) = key(dims) {
                if best.as_ref().is_none_or(|b| k >= *b) {
                    visit(choice, dims, &k);
                    *best = Some(k);
                }
            }
            return;
        }
        let v = st.order[level];
        let rest = &st.order[level + 1..];
        let mut ranked: Vec<(Option<K>, usize)> = (0..st.blocks[v].len())
            .map(|k| {
                dims[v] = k as u32;
                (completion_bound(dims, rest, &st.full, key), k)
            })
            .filter(|(b, _)| b.is_some())
            .collect();
        ranked.sort_by(|a, b| b.0.cmp(&a.0));
        for (bound, k) in ranked {
            if best.as_ref().is_some_and(|b| bound.as_ref().is_some_and(|x| x < b)) {
                break;
            }
            dims[v] = k as u32;
            let (lo, hi) = st.blocks[v][k];
            'outer: for s in lo..hi {
                choice[v] = s;
                for &ai in &st.checks[level] {
                    let a = &st.q.arrows()[ai];
                    let source = &self.tables[a.tail][choice[a.tail]];
                    let target = &self.tables[a.head][choice[a.head]];
                    if !source.basis_codes.iter().all(|&c| target.contains_code(st.images[ai][c])) {
                        continue 'outer;
                    }
                }
                self.search_level(st, level + 1, key, visit, choice, dims, best);
            }
        }
        dims[v] = 0;
    }

    fn dims_of(&self, choice: &[usize]) -> DimensionVector {
        DimensionVector(
            choice
                .iter()
                .zip(&self.tables)
                .map(|(&s, t)| t[s].dim() as u32)
                .collect(),
        )
    }

    fn key_of(&self, choice: &[usize]) -> Vec<(usize, Vec<u32>)> {
        choice.iter().zip(&self.tables).map(|(&s, t)| t[s].key()).collect()
    }

    fn witness(&self, choice: &[usize]) -> SubrepWitness {
        SubrepWitness {
            dims: self.dims_of(choice),
            bases: choice
                .iter()
                .zip(&self.tables)
                .map(|(&s, t)| t[s].basis.clone())
                .collect(),
        }
    }

    fn subspaces(&self, choice: &[usize]) -> Vec<&Subspace> {
        choice.iter().zip(&self.tables).map(|(&s, t)| &t[s]).collect()
    }
}

/// Codes of `m·v` for every `v` in the source space, indexed by the code of
/// `v`. Each vector differs from an earlier one by a basis vector, so the
/// table is filled by one column addition per entry.
fn image_codes(m: &FMat, field: u32) -> Vec<usize> {
    let (rows, cols) = (m.rows, m.cols);
    let size = (field as usize).pow(cols as u32);
    let mut vecs = vec![0u32; size * rows];
    let mut out = vec![0usize; size];
    for c in 1..size {
        let (mut j, mut rest) = (0, c);
        while rest % field as usize == 0 {
            rest /= field as usize;
            j += 1;
        }
        let prev = c - (field as usize).pow(j as u32);
        for i in 0..rows {
            vecs[c * rows + i] = (vecs[prev * rows + i] + m.get(i, j)) % field;
        }
        out[c] = encode(&vecs[c * rows..(c + 1) * rows], field);
    }
    out
}

struct SearchState<'a> {
    q: &'a Quiver,
    order: &'a [usize],
    checks: &'a [Vec<usize>],
    images: &'a [Vec<usize>],
    blocks: &'a [Vec<(usize, usize)>],
    full: Vec<u32>,
}

/// Largest key over all ways of filling the vertices in `rest`.
fn completion_bound<K: Ord>(dims: &mut [u32], rest: &[usize], full: &[u32], key: &impl Fn(&[u32]) -> Option<K>) -> Option<K> {
    let Some((&v, tail)) = rest.split_first() else {
        return key(dims);
    };
    let mut out = None;
    for k in 0..=full[v] {
        dims[v] = k;
        out = out.max(completion_bound(dims, tail, full, key));
    }
    dims[v] = 0;
    out
}

/// `θ(e)/|e|` compared exactly by cross-multiplication.
#[derive(Debug, Clone, Copy)]
struct Slope {
    value: i128,
    total: i128,
}

impl Slope {
    fn new(theta: &[i64], e: &[u32]) -> Slope {
        Slope {
            value: theta.iter().zip(e).map(|(&t, &x)| t as i128 * x as i128).sum(),
            total: e.iter().map(|&x| x as i128).sum(),
        }
    }
}

impl Ord for Slope {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.value * other.total).cmp(&(other.value * self.total))
    }
}

impl PartialEq for Slope {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Slope {}

impl PartialOrd for Slope {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Restriction of `r` to a stable subspace tuple, in the RREF bases.
fn restrict(q: &Quiver, r: &FFRep, subs: &[&Subspace]) -> FFRep {
    let field = r.field;
    let maps = q
        .arrows()
        .iter()
        .zip(&r.maps)
        .map(|(a, m)| {
            let (src, dst) = (subs[a.tail], subs[a.head]);
            let mut out = FMat::zeros(dst.dim(), src.dim());
            for (j, b) in src.basis.iter().enumerate() {
                let coords = dst.coordinates(&m.apply(b, field));
                for (i, x) in coords.into_iter().enumerate() {
                    out.set(i, j, x);
                }
            }
            out
        })
        .collect();
    FFRep {
        field,
        dims: DimensionVector(subs.iter().map(|s| s.dim() as u32).collect()),
        maps,
    }
}

/// Quotient of `r` by a stable subspace tuple, in the coordinates complementary
/// to the pivot columns.
fn quotient(q: &Quiver, r: &FFRep, subs: &[&Subspace]) -> FFRep {
    let field = r.field;
    let free: Vec<Vec<usize>> = subs.iter().map(|s| s.free_columns()).collect();
    let maps = q
        .arrows()
        .iter()
        .zip(&r.maps)
        .map(|(a, m)| {
            let (src, dst) = (&free[a.tail], &free[a.head]);
            let mut out = FMat::zeros(dst.len(), src.len());
            for (j, &c) in src.iter().enumerate() {
                let column: Vec<u32> = (0..m.rows).map(|i| m.get(i, c)).collect();
                let reduced = subs[a.head].reduce(&column, field);
                for (i, &p) in dst.iter().enumerate() {
                    out.set(i, j, reduced[p]);
                }
            }
            out
        })
        .collect();
    FFRep {
        field,
        dims: DimensionVector(free.iter().map(|f| f.len() as u32).collect()),
        maps,
    }
}

/// Exhaustive finite-field experiments on one quiver.
#[derive(Debug, Clone)]
pub struct Lab<'q> {
    quiver: &'q Quiver,
    field: u32,
    budget: u128,
}

impl<'q> Lab<'q> {
    pub fn new(quiver: &'q Quiver, field: u32) -> Result<Self> {
        if !is_prime(field) {
            return Err(Error::domain(format!("field order {field} is not prime")));
        }
        Ok(Lab {
            quiver,
            field,
            budget: DEFAULT_BUDGET,
        })
    }

    pub fn with_budget(mut self, budget: u128) -> Self {
        self.budget = budget;
        self
    }

    pub fn field(&self) -> u32 {
        self.field
    }

    /// `q^{dim Rep(Q, d)}`.
    pub fn rep_count(&self, d: &DimensionVector) -> Result<u128> {
        let dim = self.quiver.rep_dimension(d)?;
        Ok((self.field as u128).checked_pow(dim as u32).unwrap_or(u128::MAX))
    }

    /// Every representation of dimension `d`, each exactly once, in the order
    /// of the base-`q` counter over the concatenated matrix entries.
    pub fn enumerate_reps(&self, d: &DimensionVector) -> Result<RepIter<'q>> {
        let required = self.rep_count(d)?;
        if required > self.budget {
            return Err(Error::Budget {
                what: format!("representations of dimension {d} over F_{}", self.field),
                required,
                budget: self.budget,
            });
        }
        Ok(RepIter {
            quiver: self.quiver,
            field: self.field,
            dims: d.clone(),
            entries: self.quiver.rep_dimension(d)? as usize,
            next: 0,
            end: required,
        })
    }

    /// Dimension vectors of all stable subspace tuples, one witness each
    /// (the first in RREF order).
    pub fn subrep_dims(&self, r: &FFRep) -> Result<Vec<(DimensionVector, SubrepWitness)>> {
        r.validate(self.quiver)?;
        let lattice = Lattice::new(r)?;
        let mut found: BTreeMap<DimensionVector, SubrepWitness> = BTreeMap::new();
        lattice.for_each_subrep(self.quiver, r, |choice| {
            let dims = lattice.dims_of(choice);
            found.entry(dims).or_insert_with(|| lattice.witness(choice));
        });
        Ok(found.into_iter().collect())
    }

    /// HN type by repeatedly splitting off the subrepresentation of maximal
    /// slope and, among those, maximal dimension. Witnesses after the first are
    /// expressed in the coordinates of the successive quotients.
    pub fn hn_type(&self, r: &FFRep, theta: &StabilityParam) -> Result<(HNType, Vec<SubrepWitness>)> {
        r.validate(self.quiver)?;
        self.quiver.check_len(theta.0.len())?;
        if r.dims.is_zero() {
            return Err(Error::domain("HN type of the zero representation"));
        }
        let mut pieces = Vec::new();
        let mut witnesses = Vec::new();
        let mut current = r.clone();
        loop {
            let lattice = Lattice::new(&current)?;
            // key: slope as a fraction, then total dimension
            let key = |e: &[u32]| -> Option<(Slope, u32)> {
                let total: u32 = e.iter().sum();
                (total > 0).then(|| (Slope::new(&theta.0, e), total))
            };
            let mut best: Option<(Vec<u32>, Vec<usize>)> = None;
            let mut best_key = None;
            let mut ties = 0usize;
            lattice.search(self.quiver, &current, key, |choice, dims, k| {
                if best_key.as_ref() == Some(k) {
                    ties += 1;
                } else {
                    best = Some((dims.to_vec(), choice.to_vec()));
                    best_key = Some(k.clone());
                    ties = 1;
                }
            });
            let (dims, choice) = best.expect("the whole space is a nonzero subrepresentation");
            let dims = DimensionVector(dims);
            if ties != 1 {
                return Err(Error::Consistency(format!(
                    "{ties} distinct subrepresentations of dimension {dims} maximize slope then dimension"
                )));
            }
            if dims == current.dims {
                pieces.push(dims);
                break;
            }
            witnesses.push(lattice.witness(&choice));
            pieces.push(dims);
            current = quotient(self.quiver, &current, &lattice.subspaces(&choice));
        }
        Ok((HNType(pieces), witnesses))
    }

    pub fn is_semistable(&self, r: &FFRep, theta: &StabilityParam) -> Result<bool> {
        Ok(self.hn_type(r, theta)?.0.is_trivial())
    }

    /// Jordan-Hölder graded pieces of a semistable representation: repeatedly
    /// split off a minimal-dimensional subrepresentation of the same slope.
    pub fn jh_graded(&self, r: &FFRep, theta: &StabilityParam, tie: TieBreak) -> Result<Vec<(DimensionVector, FFRep)>> {
        if !self.is_semistable(r, theta)? {
            return Err(Error::domain("Jordan-Hölder filtration requested for an unstable representation"));
        }
        let mut out = Vec::new();
        let mut current = r.clone();
        loop {
            let lattice = Lattice::new(&current)?;
            // same slope as the whole, then as small as possible
            let key = |e: &[u32]| -> Option<Reverse<u32>> {
                let total: u32 = e.iter().sum();
                (total > 0 && cmp_slope(&theta.0, e, &current.dims) == Ordering::Equal).then_some(Reverse(total))
            };
            let mut best: Option<(Reverse<u32>, Vec<(usize, Vec<u32>)>, Vec<usize>)> = None;
            lattice.search(self.quiver, &current, key, |choice, _, k| {
                let key = lattice.key_of(choice);
                let better = match &best {
                    None => true,
                    Some((bt, bk, _)) => match k.cmp(bt) {
                        Ordering::Greater => true,
                        Ordering::Less => false,
                        Ordering::Equal => match tie {
                            TieBreak::LexSmallest => key < *bk,
                            TieBreak::LexLargest => key > *bk,
                        },
                    },
                };
                if better {
                    best = Some((*k, key, choice.to_vec()));
                }
            });
            let (_, _, choice) = best.expect("the whole space has its own slope");
            let subs = lattice.subspaces(&choice);
            let piece = restrict(self.quiver, &current, &subs);
            if piece.dims == current.dims {
                out.push((piece.dims.clone(), piece));
                break;
            }
            let next = quotient(self.quiver, &current, &subs);
            out.push((piece.dims.clone(), piece));
            current = next;
        }
        Ok(out)
    }

    /// Tallies HN types over every representation of dimension `d` and
    /// compares with the flag-variety prediction.
    pub fn census(&self, d: &DimensionVector, theta: &StabilityParam) -> Result<CensusReport> {
        let mut ss_counts = HashMap::new();
        self.census_inner(d, theta, &mut ss_counts)
    }

    fn census_inner(
        &self,
        d: &DimensionVector,
        theta: &StabilityParam,
        ss_counts: &mut HashMap<DimensionVector, u128>,
    ) -> Result<CensusReport> {
        self.quiver.check_len(d.len())?;
        self.quiver.check_len(theta.0.len())?;
        if d.is_zero() {
            return Err(Error::domain("census of the zero dimension vector"));
        }
        let total = self.rep_count(d)?;
        let mut observed: BTreeMap<HNType, u128> = BTreeMap::new();
        for r in self.enumerate_reps(d)? {
            let (t, _) = self.hn_type(&r, theta)?;
            *observed.entry(t).or_default() += 1;
        }
        ss_counts.insert(d.clone(), observed.get(&HNType::trivial(d.clone())).copied().unwrap_or(0));

        let types = slope_ordered_types(d, theta);
        let mut predicted: BTreeMap<HNType, u128> = BTreeMap::new();
        for t in types.iter().filter(|t| !t.is_trivial()) {
            let p = self.predicted_count(t, d, theta, ss_counts)?;
            predicted.insert(t.clone(), p);
        }
        let nontrivial: u128 = predicted.values().sum();
        let trivial = HNType::trivial(d.clone());
        let mut matches = nontrivial <= total;
        predicted.insert(trivial, total.saturating_sub(nontrivial));

        let mut entries = Vec::new();
        for t in types {
            let o = observed.remove(&t).unwrap_or(0);
            let p = predicted.get(&t).copied().unwrap_or(0);
            matches &= o == p;
            entries.push(CensusEntry {
                hn_type: t,
                observed: o,
                predicted: p,
            });
        }
        // anything observed that is not a slope-ordered type is a bug
        for (t, o) in observed {
            matches = false;
            entries.push(CensusEntry {
                hn_type: t,
                observed: o,
                predicted: 0,
            });
        }
        matches &= entries.iter().map(|e| e.observed).sum::<u128>() == total;
        Ok(CensusReport {
            field: self.field,
            dims: d.clone(),
            theta: theta.clone(),
            entries,
            total,
            matches,
        })
    }

    fn predicted_count(
        &self,
        t: &HNType,
        d: &DimensionVector,
        theta: &StabilityParam,
        ss_counts: &mut HashMap<DimensionVector, u128>,
    ) -> Result<u128> {
        let q = self.quiver;
        let mut semistable = 1u128;
        for piece in t.pieces() {
            let count = match ss_counts.get(piece) {
                Some(&c) => c,
                None => {
                    self.census_inner(piece, theta, ss_counts)?;
                    ss_counts[piece]
                }
            };
            semistable *= count;
        }
        if semistable == 0 {
            return Ok(0);
        }
        let pieces = t.pieces();
        let flags: u128 = (0..d.len())
            .map(|i| flag_count(&pieces.iter().map(|p| p[i]).collect::<Vec<_>>(), self.field))
            .product();
        let mut flag_dim = 0i64;
        for k in 0..pieces.len() {
            for l in k + 1..pieces.len() {
                flag_dim += pieces[k].iter().zip(pieces[l].iter()).map(|(&a, &b)| a as i64 * b as i64).sum::<i64>();
            }
        }
        let levi_rep: i64 = pieces.iter().map(|p| q.rep_dimension(p).map(|x| x as i64)).sum::<Result<i64>>()?;
        let upper = q.rep_dimension(d)? as i64 - levi_rep - codim(q, t)? - flag_dim;
        if upper < 0 {
            return Err(Error::Consistency(format!(
                "stratum {t} would need {upper} free off-diagonal coordinates"
            )));
        }
        Ok(flags * (self.field as u128).pow(upper as u32) * semistable)
    }
}

pub struct RepIter<'q> {
    quiver: &'q Quiver,
    field: u32,
    dims: DimensionVector,
    entries: usize,
    next: u128,
    end: u128,
}

impl Iterator for RepIter<'_> {
    type Item = FFRep;

    fn next(&mut self) -> Option<FFRep> {
        if self.next >= self.end {
            return None;
        }
        let digits = decode(self.next as usize, self.entries, self.field);
        self.next += 1;
        let mut offset = 0;
        let maps = self
            .quiver
            .arrows()
            .iter()
            .map(|a| {
                let (rows, cols) = (self.dims[a.head] as usize, self.dims[a.tail] as usize);
                let m = FMat {
                    rows,
                    cols,
                    data: digits[offset..offset + rows * cols].to_vec(),
                };
                offset += rows * cols;
                m
            })
            .collect();
        Some(FFRep {
            field: self.field,
            dims: self.dims.clone(),
            maps,
        })
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = (self.end - self.next) as usize;
        (n, Some(n))
    }
}

/// A representation over `ℚ`, row-major `d_h × d_t` matrices per arrow.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QRep {
    pub dims: DimensionVector,
    pub maps: Vec<Vec<Vec<BigRational>>>,
}

fn q_rank(mut rows: Vec<Vec<BigRational>>) -> usize {
    let cols = rows.first().map_or(0, |r| r.len());
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let pivot = rows[r][c].clone();
        for i in r + 1..rows.len() {
            if rows[i][c].is_zero() {
                continue;
            }
            let f = &rows[i][c] / &pivot;
            for j in c..cols {
                let sub = &f * &rows[r][j];
                rows[i][j] -= sub;
            }
        }
        r += 1;
    }
    r
}

/// Checks a claimed destabilizing subrepresentation over `ℚ`: the per-vertex
/// bases must be independent, `φ`-stable, and of slope above that of `r`.
/// Semistability itself is never decided over infinite fields.
pub fn certify_destabilizing(q: &Quiver, r: &QRep, bases: &[Vec<Vec<BigRational>>], theta: &StabilityParam) -> Result<bool> {
    q.check_len(r.dims.len())?;
    if r.maps.len() != q.arrows().len() || bases.len() != r.dims.len() {
        return Err(Error::structural("certificate does not match the quiver"));
    }
    for (a, m) in q.arrows().iter().zip(&r.maps) {
        let (h, t) = (r.dims[a.head] as usize, r.dims[a.tail] as usize);
        if m.len() != h || m.iter().any(|row| row.len() != t) {
            return Err(Error::structural(format!("map of arrow {} is not {h}x{t}", a.name)));
        }
    }
    for (i, b) in bases.iter().enumerate() {
        if b.iter().any(|v| v.len() != r.dims[i] as usize) {
            return Err(Error::structural(format!("basis vector at vertex {i} has the wrong length")));
        }
        if q_rank(b.clone()) != b.len() {
            return Err(Error::structural(format!("basis at vertex {i} is dependent")));
        }
    }
    for (a, m) in q.arrows().iter().zip(&r.maps) {
        for v in &bases[a.tail] {
            let image: Vec<BigRational> = m
                .iter()
                .map(|row| row.iter().zip(v).fold(BigRational::zero(), |acc, (x, y)| acc + x * y))
                .collect();
            let mut span = bases[a.head].clone();
            let before = span.len();
            span.push(image);
            if q_rank(span) != before {
                return Ok(false);
            }
        }
    }
    let sub = DimensionVector(bases.iter().map(|b| b.len() as u32).collect());
    if sub.is_zero() || sub == r.dims {
        return Ok(false);
    }
    Ok(cmp_slope(theta.weights(), &sub, &r.dims) == Ordering::Greater)
}
