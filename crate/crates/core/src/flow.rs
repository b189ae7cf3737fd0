//! Gradient flow of `f = ‖μ_θ‖²` on complex representation spaces.
//!
//! The shifted moment map is `μ_i = Σ_{h(a)=i} φ_a φ_a† - Σ_{t(a)=i} φ_a† φ_a + θ_i I`.
//! With the real inner product `Re tr(X Y†)` the gradient of `f` is
//! `4 (μ_{h(a)} φ_a - φ_a μ_{t(a)})`. Limits of the flow are critical points
//! whose `μ` eigenvalues are the slopes of the HN pieces.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hn::HNType;
use crate::quiver::{DimensionVector, Quiver, StabilityParam};

pub type CMat = DMatrix<Complex64>;

/// A representation over `ℂ`: one `d_{h(a)} × d_{t(a)}` complex matrix per arrow.
#[derive(Debug, Clone, PartialEq)]
pub struct CRep {
    pub dims: DimensionVector,
    pub maps: Vec<CMat>,
}

impl CRep {
    pub fn new(q: &Quiver, dims: DimensionVector, maps: Vec<CMat>) -> Result<Self> {
        let r = CRep { dims, maps };
        r.validate(q)?;
        Ok(r)
    }

    pub fn zero(q: &Quiver, dims: DimensionVector) -> Result<Self> {
        q.check_len(dims.len())?;
        let maps = q
            .arrows()
            .iter()
            .map(|a| CMat::zeros(dims[a.head] as usize, dims[a.tail] as usize))
            .collect();
        Ok(CRep { dims, maps })
    }

    pub fn validate(&self, q: &Quiver) -> Result<()> {
        q.check_len(self.dims.len())?;
        if self.maps.len() != q.arrows().len() {
            return Err(Error::structural(format!(
                "representation has {} maps, quiver has {} arrows",
                self.maps.len(),
                q.arrows().len()
            )));
        }
        for (m, a) in self.maps.iter().zip(q.arrows()) {
            let shape = (self.dims[a.head] as usize, self.dims[a.tail] as usize);
            if m.shape() != shape {
                return Err(Error::structural(format!(
                    "map for arrow '{}' is {:?}, expected {shape:?}",
                    a.name,
                    m.shape()
                )));
            }
            if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::domain(format!("map for arrow '{}' has non-finite entries", a.name)));
            }
        }
        Ok(())
    }

    pub fn norm(&self) -> f64 {
        self.maps.iter().map(|m| m.norm_squared()).sum::<f64>().sqrt()
    }

    /// `φ_a ↦ k_{h(a)} φ_a k_{t(a)}^{-1}`.
    pub fn act(&self, q: &Quiver, g: &[CMat]) -> Result<CRep> {
        q.check_len(g.len())?;
        let maps = q
            .arrows()
            .iter()
            .zip(&self.maps)
            .map(|(a, m)| {
                let inv = g[a.tail]
                    .clone()
                    .try_inverse()
                    .ok_or_else(|| Error::domain("group element is not invertible"))?;
                Ok(&g[a.head] * m * inv)
            })
            .collect::<Result<_>>()?;
        Ok(CRep {
            dims: self.dims.clone(),
            maps,
        })
    }

    /// `φ_a ↦ e^{-cμ_{h(a)}} φ_a e^{cμ_{t(a)}}`: a step of length `c` along
    /// the complexified orbit in the direction `-(μ_h φ - φ μ_t)`, taken up to
    /// a unitary change of basis. Writing `e^{-cμ_i} = Q_i R_i`, the maps become
    /// `R_h φ_a R_t^{-1}`; triangular factors keep every flag of coordinate
    /// subspaces that is preserved by `φ` preserved exactly, in floating point.
    fn orbit_step(&self, q: &Quiver, mu: &MomentValue, c: f64) -> CRep {
        let r: Vec<CMat> = mu.0.iter().map(|m| hermitian_exp(m, -c).qr().r()).collect();
        let r_inv: Vec<CMat> = r
            .iter()
            .map(|m| {
                m.solve_upper_triangular(&CMat::identity(m.nrows(), m.ncols()))
                    .expect("triangular factor of an invertible matrix")
            })
            .collect();
        CRep {
            dims: self.dims.clone(),
            maps: q
                .arrows()
                .iter()
                .zip(&self.maps)
                .map(|(a, m)| &r[a.head] * m * &r_inv[a.tail])
                .collect(),
        }
    }
}

/// `exp(c·m)` for hermitian `m`.
fn hermitian_exp(m: &CMat, c: f64) -> CMat {
    if m.nrows() == 0 {
        return m.clone();
    }
    let eig = SymmetricEigen::new(m.clone());
    let d = CMat::from_diagonal(&eig.eigenvalues.map(|x| Complex64::new((c * x).exp(), 0.0)));
    &eig.eigenvectors * d * eig.eigenvectors.adjoint()
}

/// Per-vertex hermitian matrices `μ_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentValue(pub Vec<CMat>);

impl MomentValue {
    pub fn norm_squared(&self) -> f64 {
        self.0.iter().map(|m| m.norm_squared()).sum()
    }

    /// Eigenvalues of each `μ_i`, sorted in decreasing order.
    pub fn spectra(&self) -> Vec<Vec<f64>> {
        self.0
            .iter()
            .map(|m| {
                if m.nrows() == 0 {
                    return Vec::new();
                }
                let mut ev: Vec<f64> = SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect();
                ev.sort_by(|a, b| b.total_cmp(a));
                ev
            })
            .collect()
    }
}

pub fn moment_value(q: &Quiver, r: &CRep, theta: &StabilityParam) -> Result<MomentValue> {
    r.validate(q)?;
    q.check_len(theta.0.len())?;
    let mut mu: Vec<CMat> = r
        .dims
        .iter()
        .zip(&theta.0)
        .map(|(&n, &t)| CMat::identity(n as usize, n as usize) * Complex64::new(t as f64, 0.0))
        .collect();
    for (a, m) in q.arrows().iter().zip(&r.maps) {
        let adj = m.adjoint();
        mu[a.head] += m * &adj;
        mu[a.tail] -= &adj * m;
    }
    for m in &mut mu {
        *m = (&*m + m.adjoint()) * Complex64::new(0.5, 0.0);
    }
    Ok(MomentValue(mu))
}

/// `Σ_i ‖μ_i‖²_F`.
pub fn energy(q: &Quiver, r: &CRep, theta: &StabilityParam) -> Result<f64> {
    Ok(moment_value(q, r, theta)?.norm_squared())
}

/// `μ_{h(a)} φ_a - φ_a μ_{t(a)}` for every arrow.
fn commutators(q: &Quiver, r: &CRep, mu: &MomentValue) -> Vec<CMat> {
    q.arrows()
        .iter()
        .zip(&r.maps)
        .map(|(a, m)| &mu.0[a.head] * m - m * &mu.0[a.tail])
        .collect()
}

/// Gradient of [`energy`] under the real inner product `Re tr(X Y†)`.
pub fn gradient(q: &Quiver, r: &CRep, theta: &StabilityParam) -> Result<Vec<CMat>> {
    let mu = moment_value(q, r, theta)?;
    Ok(commutators(q, r, &mu)
        .into_iter()
        .map(|c| c * Complex64::new(4.0, 0.0))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowOptions {
    /// Initial trial step for the line search.
    pub step: f64,
    pub max_iters: usize,
    /// Stop once the gradient norm falls below this.
    pub tol: f64,
    /// ... or below `rel_tol·(‖φ‖² + ‖θ‖)‖φ‖` (never less than `64ε` times
    /// that scale). HN critical points are saddles, so running on past this
    /// lets roundoff carry the flow into the open stratum.
    pub rel_tol: f64,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions {
            step: 0.1,
            max_iters: 100_000,
            tol: 1e-20,
            rel_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    Converged,
    MaxIters,
    /// The line search could not decrease the energy further.
    Stalled,
}

#[derive(Debug, Clone)]
pub struct FlowResult {
    pub limit: CRep,
    pub energy_trace: Vec<f64>,
    /// `(Σ_a ‖μ_{h(a)} φ_a - φ_a μ_{t(a)}‖²)^{1/2}` at the limit.
    pub residual: f64,
    pub beta_spectrum: Vec<Vec<f64>>,
    pub termination: Termination,
    pub iterations: usize,
}

impl FlowResult {
    pub fn converged(&self) -> bool {
        self.termination == Termination::Converged
    }

    pub fn final_energy(&self) -> f64 {
        *self.energy_trace.last().expect("trace starts with the initial energy")
    }
}

const ARMIJO: f64 = 1e-4;
/// Largest `log κ` allowed for the group element of one step.
const MAX_LOG_CONDITION: f64 = 1.0;

/// Steepest descent on `‖μ_θ‖²` with a backtracking (Armijo) line search.
/// A step of size `s` moves by `exp(-4sμ)` in the complexified group, which
/// agrees with `x - s∇f` to first order and never leaves the orbit, so
/// orbit invariants such as characteristic polynomials of loops are kept
/// exactly. The iterate is only defined up to unitary change of basis, which
/// changes none of the reported quantities. The trial step doubles after
/// each accepted step, capped so that the step's group element has condition
/// number at most `e`; the energy trace is non-increasing by construction.
pub fn flow_to_critical(q: &Quiver, r: &CRep, theta: &StabilityParam, opts: &FlowOptions) -> Result<FlowResult> {
    r.validate(q)?;
    q.check_len(theta.0.len())?;
    if !(opts.step > 0.0 && opts.tol >= 0.0 && opts.rel_tol >= 0.0) {
        return Err(Error::domain("flow step must be positive and tolerance nonnegative"));
    }
    let mut x = r.clone();
    let mut f = energy(q, &x, theta)?;
    let mut trace = vec![f];
    let mut step = opts.step;
    let mut termination = Termination::MaxIters;
    let mut iterations = 0;
    let theta_norm = theta.0.iter().map(|&t| (t * t) as f64).sum::<f64>().sqrt();
    while iterations < opts.max_iters {
        let mu = moment_value(q, &x, theta)?;
        let gnorm2: f64 = 16.0 * commutators(q, &x, &mu).iter().map(|m| m.norm_squared()).sum::<f64>();
        let n = x.norm();
        let floor = opts.rel_tol.max(64.0 * f64::EPSILON) * (n * n + theta_norm) * n;
        if gnorm2.sqrt() < opts.tol.max(floor) {
            termination = Termination::Converged;
            break;
        }
        // keep e^{-4sμ} well conditioned, otherwise roundoff leaves the orbit
        let spread = mu
            .spectra()
            .iter()
            .flatten()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
        if spread.1 > spread.0 {
            step = step.min(MAX_LOG_CONDITION / (4.0 * (spread.1 - spread.0)));
        }
        let mut accepted = None;
        while step > f64::MIN_POSITIVE {
            let trial = x.orbit_step(q, &mu, 4.0 * step);
            let ft = energy(q, &trial, theta)?;
            if ft <= f - ARMIJO * step * gnorm2 {
                accepted = Some((trial, ft));
                break;
            }
            step *= 0.5;
        }
        let Some((next, fnext)) = accepted else {
            termination = Termination::Stalled;
            break;
        };
        x = next;
        f = fnext;
        trace.push(f);
        step *= 2.0;
        iterations += 1;
    }
    let mu = moment_value(q, &x, theta)?;
    let residual = commutators(q, &x, &mu)
        .iter()
        .map(|c| c.norm_squared())
        .sum::<f64>()
        .sqrt();
    Ok(FlowResult {
        beta_spectrum: mu.spectra(),
        limit: x,
        energy_trace: trace,
        residual,
        termination,
        iterations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalClassification {
    pub hn_type: HNType,
    /// Mean eigenvalue of each cluster, in the order of the HN pieces.
    pub cluster_values: Vec<f64>,
}

/// Reads a HN type off the spectrum of `μ` at a critical point: eigenvalues
/// within `cluster_tol` of their neighbour form one piece, whose per-vertex
/// multiplicities give its dimension vector. Pieces are ordered by decreasing
/// eigenvalue.
pub fn classify_critical(f: &FlowResult, residual_tol: f64, cluster_tol: f64) -> Result<CriticalClassification> {
    if !(f.residual <= residual_tol) {
        return Err(Error::domain(format!(
            "residual {:.3e} exceeds {residual_tol:.3e}; not a critical point",
            f.residual
        )));
    }
    let n = f.beta_spectrum.len();
    let mut all: Vec<(f64, usize)> = f
        .beta_spectrum
        .iter()
        .enumerate()
        .flat_map(|(v, ev)| ev.iter().map(move |&x| (x, v)))
        .collect();
    if all.is_empty() {
        return Err(Error::domain("empty spectrum"));
    }
    all.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut pieces = Vec::new();
    let mut values = Vec::new();
    let mut current = vec![0u32; n];
    let mut sum = 0.0;
    let mut count = 0usize;
    for (i, &(x, v)) in all.iter().enumerate() {
        if i > 0 && all[i - 1].0 - x > cluster_tol {
            pieces.push(DimensionVector(std::mem::replace(&mut current, vec![0; n])));
            values.push(sum / count as f64);
            sum = 0.0;
            count = 0;
        }
        current[v] += 1;
        sum += x;
        count += 1;
    }
    pieces.push(DimensionVector(current));
    values.push(sum / count as f64);
    Ok(CriticalClassification {
        hn_type: HNType(pieces),
        cluster_values: values,
    })
}

/// Assembles a block upper-triangular representation from `pieces`, listed
/// from the first (innermost) step of the filtration outwards. The block of
/// arrow `a` mapping piece `l` into piece `k < l` comes from `off_diagonal`.
pub fn assemble_block_triangular(
    q: &Quiver,
    pieces: &[CRep],
    mut off_diagonal: impl FnMut(usize, usize, usize, usize, usize) -> CMat,
) -> Result<CRep> {
    if pieces.is_empty() {
        return Err(Error::domain("no pieces to assemble"));
    }
    for p in pieces {
        p.validate(q)?;
    }
    let n = q.num_vertices();
    let dims = pieces
        .iter()
        .fold(DimensionVector::zero(n), |acc, p| acc.add(&p.dims));
    // offsets[k][i]: start of piece k inside vertex i
    let mut offsets = vec![vec![0usize; n]; pieces.len()];
    for k in 1..pieces.len() {
        for i in 0..n {
            offsets[k][i] = offsets[k - 1][i] + pieces[k - 1].dims[i] as usize;
        }
    }
    let mut out = CRep::zero(q, dims)?;
    for (ai, a) in q.arrows().iter().enumerate() {
        for k in 0..pieces.len() {
            for l in k..pieces.len() {
                let rows = pieces[k].dims[a.head] as usize;
                let cols = pieces[l].dims[a.tail] as usize;
                if rows == 0 || cols == 0 {
                    continue;
                }
                let block = if k == l {
                    pieces[k].maps[ai].clone()
                } else {
                    off_diagonal(ai, k, l, rows, cols)
                };
                if block.shape() != (rows, cols) {
                    return Err(Error::structural("off-diagonal block has the wrong shape"));
                }
                out.maps[ai]
                    .view_mut((offsets[k][a.head], offsets[l][a.tail]), (rows, cols))
                    .copy_from(&block);
            }
        }
    }
    Ok(out)
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

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn scalar(q: &Quiver, x: f64) -> CRep {
        CRep::new(q, dv(&[1, 1]), vec![CMat::from_element(1, 1, c(x))]).unwrap()
    }

    fn loop_rep(entries: [f64; 4]) -> CRep {
        let m = CMat::from_row_slice(2, 2, &entries.map(c));
        CRep::new(&Quiver::one_loop(), dv(&[2]), vec![m]).unwrap()
    }

    #[test]
    fn moment_examples() {
        let q = Quiver::kronecker(1);
        let mu = moment_value(&q, &scalar(&q, 1.0), &th(&[1, -1])).unwrap();
        assert!(mu.norm_squared() < 1e-30);
        let mu = moment_value(&q, &scalar(&q, 0.0), &th(&[1, -1])).unwrap();
        assert_eq!(mu.spectra(), vec![vec![1.0], vec![-1.0]]);

        let l = Quiver::one_loop();
        // normal, non-hermitian
        let rot = loop_rep([0.0, -2.0, 2.0, 0.0]);
        assert!(moment_value(&l, &rot, &th(&[0])).unwrap().norm_squared() < 1e-24);
    }

    #[test]
    fn energy_examples() {
        let q = Quiver::kronecker(1);
        assert_eq!(energy(&q, &scalar(&q, 0.0), &th(&[1, -1])).unwrap(), 2.0);
        assert!(energy(&q, &scalar(&q, 1.0), &th(&[1, -1])).unwrap().abs() < 1e-30);
        let k3 = Quiver::kronecker(3);
        let zero = CRep::zero(&k3, dv(&[2, 3])).unwrap();
        assert_eq!(energy(&k3, &zero, &th(&[0, 0])).unwrap(), 0.0);
    }

    #[test]
    fn kronecker_flow_reaches_unit_circle() {
        let q = Quiver::kronecker(1);
        let res = flow_to_critical(&q, &scalar(&q, 2.0), &th(&[1, -1]), &FlowOptions::default()).unwrap();
        assert!(res.converged());
        assert!((res.limit.maps[0][(0, 0)].norm() - 1.0).abs() < 1e-8);
        assert!(res.final_energy() < 1e-12);
        assert!(res.residual < 1e-8);
    }

    #[test]
    fn nilpotent_flows_to_zero() {
        let l = Quiver::one_loop();
        let opts = FlowOptions {
            tol: 1e-20,
            ..FlowOptions::default()
        };
        let res = flow_to_critical(&l, &loop_rep([0.0, 1.0, 0.0, 0.0]), &th(&[0]), &opts).unwrap();
        assert!(res.limit.norm() < 1e-6, "{}", res.limit.norm());
    }

    #[test]
    fn triangular_flows_to_diagonal() {
        let l = Quiver::one_loop();
        let res = flow_to_critical(&l, &loop_rep([1.0, 1.0, 0.0, 2.0]), &th(&[0]), &FlowOptions::default()).unwrap();
        assert!(res.converged());
        assert!(res.final_energy() < 1e-12);
        let a = &res.limit.maps[0];
        // normal with eigenvalues 1, 2: trace 3, det 2, and [A, A†] = 0
        let tr = a[(0, 0)] + a[(1, 1)];
        let det = a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)];
        assert!((tr - c(3.0)).norm() < 1e-8);
        assert!((det - c(2.0)).norm() < 1e-8);
        let comm = a * a.adjoint() - a.adjoint() * a;
        assert!(comm.norm() < 1e-5);
    }

    #[test]
    fn trace_is_monotone() {
        let q = Quiver::kronecker(2);
        let r = CRep::new(
            &q,
            dv(&[1, 2]),
            vec![
                CMat::from_column_slice(2, 1, &[c(3.0), Complex64::new(0.5, -1.0)]),
                CMat::from_column_slice(2, 1, &[c(0.2), c(-0.7)]),
            ],
        )
        .unwrap();
        let res = flow_to_critical(&q, &r, &th(&[2, -1]), &FlowOptions::default()).unwrap();
        assert!(res.energy_trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn classify_examples() {
        let q = Quiver::kronecker(1);
        let res = flow_to_critical(&q, &scalar(&q, 0.0), &th(&[1, -1]), &FlowOptions::default()).unwrap();
        let cls = classify_critical(&res, 1e-6, 1e-4).unwrap();
        assert_eq!(cls.hn_type, HNType(vec![dv(&[1, 0]), dv(&[0, 1])]));
        assert_eq!(cls.cluster_values, vec![1.0, -1.0]);

        let res = flow_to_critical(&q, &scalar(&q, 0.5), &th(&[1, -1]), &FlowOptions::default()).unwrap();
        let cls = classify_critical(&res, 1e-6, 1e-4).unwrap();
        assert_eq!(cls.hn_type, HNType::trivial(dv(&[1, 1])));
    }

    #[test]
    fn classify_refuses_large_residual() {
        let q = Quiver::kronecker(1);
        let opts = FlowOptions {
            max_iters: 0,
            ..FlowOptions::default()
        };
        let res = flow_to_critical(&q, &scalar(&q, 2.0), &th(&[1, -1]), &opts).unwrap();
        assert_eq!(res.termination, Termination::MaxIters);
        assert!(matches!(classify_critical(&res, 1e-6, 1e-4), Err(Error::Domain(_))));
    }

    #[test]
    fn assembly_places_blocks() {
        let q = Quiver::kronecker(1);
        let p1 = CRep::new(&q, dv(&[1, 0]), vec![CMat::zeros(0, 1)]).unwrap();
        let p2 = CRep::new(&q, dv(&[1, 1]), vec![CMat::from_element(1, 1, c(5.0))]).unwrap();
        let r = assemble_block_triangular(&q, &[p1, p2], |_, _, _, rows, cols| CMat::from_element(rows, cols, c(7.0))).unwrap();
        assert_eq!(r.dims, dv(&[2, 1]));
        // head block of piece 0 at vertex 2 is empty, so only the diagonal survives
        assert_eq!(r.maps[0], CMat::from_row_slice(1, 2, &[c(0.0), c(5.0)]));
    }
}
