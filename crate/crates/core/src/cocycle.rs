//! Periodic cocycles over a cyclic orbit and their linear reduction.
//!
//! A cocycle of period p assigns to each orbit point x_i a map from the
//! fiber at x_i to the fiber at x_(i+1 mod p). [`oseledec_reduce`] finds
//! linear changes of coordinates C_i turning a contracting linear cocycle
//! into a constant block diagonal map whose blocks contract within the
//! two-sided bounds e^(Lambda_j +- eps): the periodic-orbit version of the
//! reduction to regular contracting form.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::jets::PolyMapJet;
use crate::linalg::{vec_dot, vec_norm, CMat, ONE, ZERO};
use crate::spectrum::{ContractionSpectrum, SpectralBlock};

/// Relative modulus gap below which two eigenvalues share an Oseledec block.
const MODULUS_CLUSTER_TOL: f64 = 1e-8;

/// Relative gap below which grouping eigenvalues by value is safe even for
/// defective spectra (multiple roots are located to about 1e-5).
const VALUE_GROUP_TOL: f64 = 1e-4;

#[derive(Clone, Debug)]
pub struct PeriodicLinearCocycle {
    mats: Vec<CMat>,
}

impl PeriodicLinearCocycle {
    pub fn new(mats: Vec<CMat>) -> Result<Self> {
        if mats.is_empty() {
            return Err(Error::InvalidCocycle("empty cocycle".into()));
        }
        let k = mats[0].rows();
        if k == 0 || k > crate::jets::MAX_DIM {
            return Err(Error::InvalidCocycle("fiber dimension must be 1..=3".into()));
        }
        for m in &mats {
            if !m.is_square() || m.rows() != k {
                return Err(Error::DimensionMismatch { expected: k, got: m.rows() });
            }
            let d = m.det().norm();
            if d < 1e-250 {
                return Err(Error::InvalidCocycle("non-invertible step".into()));
            }
        }
        Ok(PeriodicLinearCocycle { mats })
    }

    pub fn period(&self) -> usize {
        self.mats.len()
    }

    pub fn dim(&self) -> usize {
        self.mats[0].rows()
    }

    /// Step matrix at orbit index i (cyclic).
    pub fn mat(&self, i: usize) -> &CMat {
        &self.mats[i % self.mats.len()]
    }

    pub fn mats(&self) -> &[CMat] {
        &self.mats
    }

    /// D_(start+n-1) ... D_(start+1) D_(start).
    pub fn partial_product(&self, start: usize, n: usize) -> CMat {
        let mut acc = CMat::identity(self.dim());
        for s in 0..n {
            acc = self.mat(start + s).mul(&acc);
        }
        acc
    }

    /// Full-cycle product based at `start`.
    pub fn monodromy(&self, start: usize) -> CMat {
        self.partial_product(start, self.period())
    }
}

#[derive(Clone, Debug)]
pub struct PeriodicGermCocycle {
    germs: Vec<PolyMapJet>,
}

impl PeriodicGermCocycle {
    pub fn new(germs: Vec<PolyMapJet>) -> Result<Self> {
        if germs.is_empty() {
            return Err(Error::InvalidCocycle("empty cocycle".into()));
        }
        let (dim, degree) = (germs[0].dim(), germs[0].degree());
        for g in &germs {
            if g.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: g.dim() });
            }
            if g.degree() != degree {
                return Err(Error::InvalidCocycle("mixed truncation degrees".into()));
            }
        }
        Ok(PeriodicGermCocycle { germs })
    }

    pub fn period(&self) -> usize {
        self.germs.len()
    }

    pub fn dim(&self) -> usize {
        self.germs[0].dim()
    }

    pub fn degree(&self) -> usize {
        self.germs[0].degree()
    }

    pub fn germ(&self, i: usize) -> &PolyMapJet {
        &self.germs[i % self.germs.len()]
    }

    pub fn germs(&self) -> &[PolyMapJet] {
        &self.germs
    }

    pub fn linear(&self) -> Result<PeriodicLinearCocycle> {
        PeriodicLinearCocycle::new(self.germs.iter().map(|g| g.linear_part()).collect())
    }

    /// Jet of F_(start+n-1) o ... o F_(start).
    pub fn compose_steps(&self, start: usize, n: usize) -> Result<PolyMapJet> {
        let mut acc = PolyMapJet::identity(self.dim(), self.degree());
        for s in 0..n {
            acc = self.germ(start + s).compose(&acc)?;
        }
        Ok(acc)
    }

    /// Full-cycle return germ based at `start`.
    pub fn monodromy_germ(&self, start: usize) -> Result<PolyMapJet> {
        self.compose_steps(start, self.period())
    }

    /// Conjugated cocycle G_i = C_(i+1) o F_i o C_i^(-1) for linear changes
    /// of coordinates, one per orbit point.
    pub fn conjugate(&self, changes: &[CMat]) -> Result<PeriodicGermCocycle> {
        let p = self.period();
        if changes.len() != p {
            return Err(Error::InvalidCocycle("one change of coordinates per orbit point".into()));
        }
        let mut out = Vec::with_capacity(p);
        for i in 0..p {
            let c_next = PolyMapJet::from_linear(&changes[(i + 1) % p], self.degree())?;
            let c_inv = PolyMapJet::from_linear(&changes[i].inverse()?, self.degree())?;
            out.push(c_next.compose(self.germ(i))?.compose(&c_inv)?);
        }
        PeriodicGermCocycle::new(out)
    }
}

/// A positive function on the orbit, indexed cyclically.
#[derive(Clone, Debug, PartialEq)]
pub struct OrbitFunction {
    values: Vec<f64>,
}

impl OrbitFunction {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidCocycle("empty orbit function".into()));
        }
        if values.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
            return Err(Error::InvalidCocycle("orbit function values must be positive".into()));
        }
        Ok(OrbitFunction { values })
    }

    pub fn period(&self) -> usize {
        self.values.len()
    }

    pub fn value(&self, i: usize) -> f64 {
        self.values[i % self.values.len()]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// e^(-eps) <= r_(i+1)/r_i <= e^(eps) around the whole cycle.
    pub fn is_slow(&self, eps: f64) -> bool {
        let p = self.period();
        (0..p).all(|i| {
            let ratio = self.value(i + 1) / self.value(i);
            ratio.ln().abs() <= eps + 1e-15
        })
    }

    /// Largest eps-slow function bounded above by this one:
    /// r_i = min_j rho_j e^(eps d(i,j)) with d the cyclic distance. The scan
    /// is exact, not iterative.
    pub fn slow_envelope(&self, eps: f64) -> OrbitFunction {
        assert!(eps >= 0.0);
        let p = self.values.len();
        let mut out = Vec::with_capacity(p);
        for i in 0..p {
            let mut best = f64::INFINITY;
            for (j, &v) in self.values.iter().enumerate() {
                let d = i.abs_diff(j).min(p - i.abs_diff(j)) as f64;
                best = best.min(v * (eps * d).exp());
            }
            out.push(best);
        }
        OrbitFunction { values: out }
    }

    pub fn scale(&self, s: f64) -> Result<OrbitFunction> {
        OrbitFunction::new(self.values.iter().map(|v| v * s).collect())
    }
}

/// Outcome of the linear reduction: C_(i+1) D_i C_i^(-1) = `normal_linear`
/// for every i, with `normal_linear` block diagonal and regular contracting
/// for `spectrum`.
#[derive(Clone, Debug)]
pub struct ReductionResult {
    pub spectrum: ContractionSpectrum,
    pub normal_linear: CMat,
    pub changes: Vec<CMat>,
    pub changes_inv: Vec<CMat>,
    /// Relative max-entry defect of the conjugacy identities.
    pub residual: f64,
    /// max_i of the larger of the operator norms of C_i and its inverse.
    pub distortion: f64,
    pub epsilon_used: f64,
}

/// Block diagonal with every block's singular values inside
/// [e^(Lambda_j - eps), e^(Lambda_j + eps)].
pub fn is_regular_contracting(a: &CMat, spec: &ContractionSpectrum, off_block_tol: f64) -> bool {
    if !a.is_square() || a.rows() != spec.dim() {
        return false;
    }
    let eps = spec.epsilon();
    let mut start = 0;
    let mut ok = true;
    for b in spec.blocks() {
        let k = b.multiplicity;
        let sub = a.block(start, start, k, k);
        let sv = sub.singular_values();
        let hi = (b.rate + eps).exp();
        let lo = (b.rate - eps).exp();
        if sv[0] > hi * (1.0 + 1e-12) || sv[k - 1] < lo * (1.0 - 1e-12) {
            ok = false;
        }
        start += k;
    }
    // Off-block entries must vanish.
    let scale = a.max_abs().max(1e-300);
    for i in 0..a.rows() {
        let bi = spec.block_of_component(i);
        for j in 0..a.cols() {
            if spec.block_of_component(j) != bi && a[(i, j)].norm() > off_block_tol * scale {
                ok = false;
            }
        }
    }
    ok
}

/// One Jordan chain for a distinct eigenvalue: vectors v_1, .., v_r with
/// (M - mu) v_(k+1) = v_k and (M - mu) v_1 = 0.
struct Chain {
    mu: Complex64,
    vectors: Vec<Vec<Complex64>>,
}

/// Groups the raw eigenvalue list into distinct values with multiplicities,
/// refining each multiple value by a multiplicity-aware Newton step on the
/// characteristic polynomial (plain Newton stalls at multiple roots).
fn distinct_eigenvalues(m: &CMat, eigs: &[Complex64]) -> Vec<(Complex64, usize)> {
    let scale = eigs.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
    let tol = VALUE_GROUP_TOL * scale;
    let mut groups: Vec<(Complex64, usize)> = Vec::new();
    for &e in eigs {
        match groups.iter_mut().find(|(rep, _)| (*rep - e).norm() <= tol) {
            Some((rep, count)) => {
                // Running mean keeps the representative centered.
                *rep = (*rep * Complex64::new(*count as f64, 0.0) + e)
                    / Complex64::new(*count as f64 + 1.0, 0.0);
                *count += 1;
            }
            None => groups.push((e, 1)),
        }
    }
    for (mu, count) in groups.iter_mut() {
        if *count >= 2 {
            for _ in 0..6 {
                let (p, dp) = m.char_eval(*mu);
                if dp.norm() < 1e-30 {
                    break;
                }
                let step = p / dp * Complex64::new(*count as f64, 0.0);
                *mu -= step;
                if step.norm() <= 1e-16 * scale {
                    break;
                }
            }
        }
    }
    groups
}

/// Jordan chains of M for the distinct eigenvalue mu of multiplicity m,
/// for fibers of dimension at most 3.
fn jordan_chains(m_mat: &CMat, mu: Complex64, m: usize) -> Result<Vec<Chain>> {
    let n = m_mat.rows();
    let mut b = m_mat.clone();
    for i in 0..n {
        b[(i, i)] -= mu;
    }
    let null_basis = |mat: &CMat| -> Vec<Vec<Complex64>> {
        for tol in [1e-10, 1e-8, 1e-6, 1e-4] {
            let ns = mat.null_space(tol);
            if !ns.is_empty() {
                return ns;
            }
        }
        Vec::new()
    };
    let ns1 = null_basis(&b);
    let g = ns1.len().min(m);
    if ns1.is_empty() {
        return Err(Error::InvalidCocycle("eigenvector detection failed".into()));
    }
    let chain1 = |v: Vec<Complex64>| Chain { mu, vectors: vec![v] };
    if g == m {
        return Ok(ns1.into_iter().take(m).map(chain1).collect());
    }
    match (m, g) {
        (2, 1) => {
            // One 2-chain: v2 in ker B^2 outside ker B, v1 = B v2.
            let b2 = b.mul(&b);
            let ns2 = null_basis(&b2);
            let v2 = ns2
                .into_iter()
                .max_by(|x, y| vec_norm(&b.mul_vec(x)).total_cmp(&vec_norm(&b.mul_vec(y))))
                .ok_or_else(|| Error::InvalidCocycle("generalized eigenvector missing".into()))?;
            let v1 = b.mul_vec(&v2);
            Ok(vec![normalize_chain(mu, vec![v1, v2])])
        }
        (3, 1) => {
            // Full 3-chain: seed with the axis vector B^2 moves the most.
            let b2 = b.mul(&b);
            let mut v3 = vec![ZERO; n];
            let mut best = -1.0;
            for i in 0..n {
                let mut e = vec![ZERO; n];
                e[i] = ONE;
                let r = vec_norm(&b2.mul_vec(&e));
                if r > best {
                    best = r;
                    v3 = e;
                }
            }
            let v2 = b.mul_vec(&v3);
            let v1 = b.mul_vec(&v2);
            Ok(vec![normalize_chain(mu, vec![v1, v2, v3])])
        }
        (3, 2) => {
            // A 2-chain plus a spare eigenvector. B^2 = 0 here, so seed the
            // chain with the axis vector B moves the most.
            let mut v2 = vec![ZERO; n];
            let mut best = -1.0;
            for i in 0..n {
                let mut e = vec![ZERO; n];
                e[i] = ONE;
                let r = vec_norm(&b.mul_vec(&e));
                if r > best {
                    best = r;
                    v2 = e;
                }
            }
            let v1 = b.mul_vec(&v2);
            let mut v1_hat = v1.clone();
            crate::linalg::vec_normalize(&mut v1_hat);
            // Spare eigenvector: the kernel direction farthest from v1.
            let mut spare = None;
            let mut best = -1.0;
            for w in &ns1 {
                let proj = vec_dot(&v1_hat, w);
                let mut rem = w.clone();
                for (r, h) in rem.iter_mut().zip(&v1_hat) {
                    *r -= proj * h;
                }
                let r = vec_norm(&rem);
                if r > best {
                    best = r;
                    crate::linalg::vec_normalize(&mut rem);
                    spare = Some(rem);
                }
            }
            let spare =
                spare.ok_or_else(|| Error::InvalidCocycle("eigenvector detection failed".into()))?;
            Ok(vec![normalize_chain(mu, vec![v1, v2]), chain1(spare)])
        }
        _ => Err(Error::InvalidCocycle("unrecognized eigenstructure".into())),
    }
}

/// Scales a whole chain by a common factor so the lead eigenvector is unit.
/// Per-vector normalization would break the chain relation.
fn normalize_chain(mu: Complex64, vectors: Vec<Vec<Complex64>>) -> Chain {
    let lead = vec_norm(&vectors[0]).max(1e-300);
    let inv = Complex64::new(1.0 / lead, 0.0);
    Chain {
        mu,
        vectors: vectors
            .into_iter()
            .map(|v| v.into_iter().map(|z| z * inv).collect())
            .collect(),
    }
}

/// Reduces a contracting periodic linear cocycle to constant regular
/// contracting form: produces invertible C_i with
/// C_(i+1 mod p) D_i C_i^(-1) = A for all i, where A is block diagonal,
/// each block contracting within e^(Lambda_j +- eps).
///
/// The accuracy actually used is min(epsilon, |Lambda_1| / 10); Jordan
/// off-diagonals are scaled until every block passes the two-sided singular
/// value bounds, so smaller eps costs conditioning in the C_i, not
/// correctness.
pub fn oseledec_reduce(coc: &PeriodicLinearCocycle, epsilon: f64) -> Result<ReductionResult> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::InvalidSpectrum("requested accuracy must be positive".into()));
    }
    let p = coc.period();
    let k = coc.dim();
    let monodromy = coc.monodromy(0);
    let eigs = monodromy.eigenvalues();
    let max_mod = eigs.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max_mod >= 1.0 {
        return Err(Error::NonContracting { modulus: max_mod });
    }
    if eigs.iter().any(|z| z.norm() < 1e-200) {
        return Err(Error::InvalidCocycle("monodromy is numerically singular".into()));
    }

    // Jordan chains per distinct eigenvalue, then Oseledec clusters by
    // modulus, most expanded first.
    let distinct = distinct_eigenvalues(&monodromy, &eigs);
    let mut chains: Vec<Chain> = Vec::new();
    for &(mu, m) in &distinct {
        chains.extend(jordan_chains(&monodromy, mu, m)?);
    }
    chains.sort_by(|a, b| b.mu.norm().total_cmp(&a.mu.norm()));
    let mut clusters: Vec<Vec<Chain>> = Vec::new();
    for ch in chains {
        let split = match clusters.last() {
            None => true,
            Some(cl) => {
                let prev = cl[0].mu.norm();
                let rel_gap = (prev - ch.mu.norm()) / prev;
                if rel_gap > MODULUS_CLUSTER_TOL && rel_gap < 100.0 * MODULUS_CLUSTER_TOL {
                    return Err(Error::ClusterSeparation { gap: rel_gap });
                }
                rel_gap > MODULUS_CLUSTER_TOL
            }
        };
        if split {
            clusters.push(vec![ch]);
        } else {
            clusters.last_mut().unwrap().push(ch);
        }
    }

    // Per-step rates; the accuracy is capped by the validity gate of the
    // spectrum itself.
    let rates: Vec<f64> = clusters
        .iter()
        .map(|cl| {
            let (mut s, mut n) = (0.0, 0usize);
            for ch in cl {
                s += ch.mu.norm().ln() * ch.vectors.len() as f64;
                n += ch.vectors.len();
            }
            s / (p as f64 * n as f64)
        })
        .collect();
    let eps_used = epsilon.min(rates[0].abs() / 10.0);
    let blocks: Vec<SpectralBlock> = clusters
        .iter()
        .zip(&rates)
        .map(|(cl, &rate)| SpectralBlock {
            rate,
            multiplicity: cl.iter().map(|ch| ch.vectors.len()).sum(),
        })
        .collect();
    let spectrum = ContractionSpectrum::new(blocks, eps_used)?;

    // Shrink the Jordan off-diagonal until every cluster block of the p-th
    // root passes the two-sided bounds.
    let root_exp = 1.0 / p as f64;
    let mut t_scale = (eps_used / 2.0).exp_m1().min(0.5);
    let mut attempt = 0;
    let (s_mat, a_mat) = loop {
        let mut columns: Vec<Vec<Complex64>> = Vec::with_capacity(k);
        let mut a_mat = CMat::zeros(k, k);
        let mut offset = 0;
        for cl in &clusters {
            let delta = t_scale * cl[0].mu.norm();
            for ch in cl {
                let r = ch.vectors.len();
                let mu = ch.mu;
                let root = mu.powf(root_exp);
                // (mu I + delta N)^(1/p) = root (I + s y N + s(s-1)/2 y^2 N^2),
                // y = delta / mu, s = 1/p; N is nilpotent of order <= 3.
                let y = Complex64::new(delta, 0.0) / mu;
                let s = root_exp;
                let c1 = root * y * s;
                let c2 = root * y * y * Complex64::new(s * (s - 1.0) / 2.0, 0.0);
                for d in 0..r {
                    a_mat[(offset + d, offset + d)] = root;
                    if d + 1 < r {
                        a_mat[(offset + d, offset + d + 1)] = c1;
                    }
                    if d + 2 < r {
                        a_mat[(offset + d, offset + d + 2)] = c2;
                    }
                }
                let mut w_scale = 1.0;
                for v in &ch.vectors {
                    columns.push(v.iter().map(|z| z * w_scale).collect());
                    w_scale *= delta;
                }
                offset += r;
            }
        }
        if is_regular_contracting(&a_mat, &spectrum, 1e-14) {
            break (CMat::from_columns(&columns), a_mat);
        }
        attempt += 1;
        if attempt > 80 {
            let sv = a_mat.singular_values();
            let achievable = sv
                .iter()
                .map(|s| (s.ln() - rates[0]).abs())
                .fold(0.0, f64::max);
            return Err(Error::EpsilonNotAchievable { requested: epsilon, achievable });
        }
        t_scale /= 4.0;
    };

    // C_i = A^i C_0 P_i^(-1) with C_0 = S^(-1): then C_(i+1) D_i C_i^(-1)
    // collapses to A for every step, including the wrap, since
    // A^p = C_0 M C_0^(-1).
    let c0 = s_mat.inverse()?;
    let mut changes = Vec::with_capacity(p);
    let mut a_pow = CMat::identity(k);
    for i in 0..p {
        let pi = coc.partial_product(0, i);
        changes.push(a_pow.mul(&c0).mul(&pi.inverse()?));
        a_pow = a_mat.mul(&a_pow);
    }

    // A common scalar on all C_i leaves the conjugacy identities intact;
    // balance the two norm families.
    let m1 = changes.iter().map(CMat::op_norm).fold(0.0, f64::max);
    let mut changes_inv = Vec::with_capacity(p);
    for c in &changes {
        changes_inv.push(c.inverse()?);
    }
    let m2 = changes_inv.iter().map(CMat::op_norm).fold(0.0, f64::max);
    let s = (m2 / m1).sqrt();
    let sc = Complex64::new(s, 0.0);
    let sc_inv = Complex64::new(1.0 / s, 0.0);
    for c in changes.iter_mut() {
        *c = c.scale(sc);
    }
    for c in changes_inv.iter_mut() {
        *c = c.scale(sc_inv);
    }
    let distortion = changes
        .iter()
        .chain(&changes_inv)
        .map(CMat::op_norm)
        .fold(0.0, f64::max);

    let mut residual = 0.0f64;
    let mut scale = 1e-300f64;
    for i in 0..p {
        let lhs = changes[(i + 1) % p].mul(coc.mat(i));
        let rhs = a_mat.mul(&changes[i]);
        residual = residual.max(lhs.sub(&rhs).max_abs());
        scale = scale.max(rhs.max_abs());
    }

    Ok(ReductionResult {
        spectrum,
        normal_linear: a_mat,
        changes,
        changes_inv,
        residual: residual / scale,
        distortion,
        epsilon_used: eps_used,
    })
}
