//! Truncated polynomial map jets.
//!
//! A [`PolyMapJet`] is a polynomial self-map germ of (C^k, 0) stored as a
//! sparse coefficient table, truncated at a fixed total degree. There is no
//! constant term by construction (germs fix the origin), and the ambient
//! dimension is at most 3. Composition, formal inversion, evaluation and the
//! coefficient-based norm estimates used by the normalization pipeline all
//! live here.
//!
//! [`ScalarPoly`] is the scalar companion (constant terms allowed); it backs
//! composition internally and represents homogeneous lift components and
//! chart numerators elsewhere in the crate.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{CMat, ZERO};

pub const MAX_DIM: usize = 3;

/// Exponent vector of a monomial. Length equals the ambient dimension; the
/// order is the total degree.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct MultiIndex {
    dim: u8,
    entries: [u16; MAX_DIM],
}

impl MultiIndex {
    pub fn new(entries: &[usize]) -> Result<Self> {
        let dim = entries.len();
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::InvalidJet(format!("multi-index dimension {dim} not in 1..=3")));
        }
        let mut e = [0u16; MAX_DIM];
        for (slot, &v) in e.iter_mut().zip(entries) {
            if v > u16::MAX as usize {
                return Err(Error::InvalidJet(format!("exponent {v} out of range")));
            }
            *slot = v as u16;
        }
        Ok(MultiIndex { dim: dim as u8, entries: e })
    }

    pub fn zero(dim: usize) -> Self {
        MultiIndex::new(&vec![0; dim]).unwrap()
    }

    /// The i-th coordinate monomial z_i.
    pub fn unit(dim: usize, i: usize) -> Self {
        let mut entries = vec![0; dim];
        entries[i] = 1;
        MultiIndex::new(&entries).unwrap()
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn entry(&self, i: usize) -> usize {
        assert!(i < self.dim());
        self.entries[i] as usize
    }

    pub fn entries(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries[..self.dim()].iter().map(|&e| e as usize)
    }

    /// Total degree |alpha|.
    pub fn order(&self) -> usize {
        self.entries[..self.dim()].iter().map(|&e| e as usize).sum()
    }

    /// Componentwise sum (monomial product).
    pub fn plus(&self, other: &MultiIndex) -> MultiIndex {
        assert_eq!(self.dim, other.dim);
        let mut e = self.entries;
        for i in 0..self.dim() {
            e[i] += other.entries[i];
        }
        MultiIndex { dim: self.dim, entries: e }
    }

    /// alpha - e_i when alpha_i > 0 (monomial derivative support).
    fn minus_unit(&self, i: usize) -> Option<MultiIndex> {
        if self.entries[i] == 0 {
            return None;
        }
        let mut e = self.entries;
        e[i] -= 1;
        Some(MultiIndex { dim: self.dim, entries: e })
    }
}

/// Sparse truncated scalar polynomial (constant term allowed).
#[derive(Clone, Debug, PartialEq, Default)]
pub struct ScalarPoly {
    dim: usize,
    terms: BTreeMap<MultiIndex, Complex64>,
}

impl ScalarPoly {
    pub fn zero(dim: usize) -> Self {
        ScalarPoly { dim, terms: BTreeMap::new() }
    }

    pub fn constant(dim: usize, c: Complex64) -> Self {
        let mut p = ScalarPoly::zero(dim);
        p.add_term(MultiIndex::zero(dim), c);
        p
    }

    pub fn variable(dim: usize, i: usize) -> Self {
        let mut p = ScalarPoly::zero(dim);
        p.add_term(MultiIndex::unit(dim, i), Complex64::new(1.0, 0.0));
        p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Complex64)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, mi: &MultiIndex) -> Complex64 {
        self.terms.get(mi).copied().unwrap_or(ZERO)
    }

    /// Adds into the table, pruning exact zeros so absence always means zero.
    pub fn add_term(&mut self, mi: MultiIndex, c: Complex64) {
        assert_eq!(mi.dim(), self.dim, "multi-index dimension");
        if c == ZERO {
            return;
        }
        let entry = self.terms.entry(mi).or_insert(ZERO);
        *entry += c;
        if *entry == ZERO {
            self.terms.remove(&mi);
        }
    }

    pub fn add(&self, other: &ScalarPoly) -> ScalarPoly {
        assert_eq!(self.dim, other.dim);
        let mut out = self.clone();
        for (mi, c) in &other.terms {
            out.add_term(*mi, *c);
        }
        out
    }

    pub fn sub(&self, other: &ScalarPoly) -> ScalarPoly {
        assert_eq!(self.dim, other.dim);
        let mut out = self.clone();
        for (mi, c) in &other.terms {
            out.add_term(*mi, -*c);
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> ScalarPoly {
        let mut out = ScalarPoly::zero(self.dim);
        for (mi, c) in &self.terms {
            out.add_term(*mi, *c * s);
        }
        out
    }

    /// Product with all terms beyond total degree `max_deg` dropped.
    pub fn mul_truncated(&self, other: &ScalarPoly, max_deg: usize) -> ScalarPoly {
        assert_eq!(self.dim, other.dim);
        let mut out = ScalarPoly::zero(self.dim);
        for (ma, ca) in &self.terms {
            let oa = ma.order();
            if oa > max_deg {
                continue;
            }
            for (mb, cb) in &other.terms {
                if oa + mb.order() > max_deg {
                    continue;
                }
                out.add_term(ma.plus(mb), ca * cb);
            }
        }
        out
    }

    pub fn truncated(&self, max_deg: usize) -> ScalarPoly {
        let mut out = ScalarPoly::zero(self.dim);
        for (mi, c) in &self.terms {
            if mi.order() <= max_deg {
                out.add_term(*mi, *c);
            }
        }
        out
    }

    /// Keeps only terms of total degree exactly `deg`.
    pub fn homogeneous_part(&self, deg: usize) -> ScalarPoly {
        let mut out = ScalarPoly::zero(self.dim);
        for (mi, c) in &self.terms {
            if mi.order() == deg {
                out.add_term(*mi, *c);
            }
        }
        out
    }

    pub fn max_order(&self) -> usize {
        self.terms.keys().map(|mi| mi.order()).max().unwrap_or(0)
    }

    pub fn evaluate(&self, v: &[Complex64]) -> Complex64 {
        assert_eq!(v.len(), self.dim);
        let max_deg = self.max_order();
        let powers = power_table(v, max_deg);
        let mut acc = ZERO;
        for (mi, c) in &self.terms {
            acc += *c * monomial_value(&powers, mi);
        }
        acc
    }

    pub fn derivative(&self, var: usize) -> ScalarPoly {
        let mut out = ScalarPoly::zero(self.dim);
        for (mi, c) in &self.terms {
            if let Some(lower) = mi.minus_unit(var) {
                out.add_term(lower, *c * (mi.entry(var) as f64));
            }
        }
        out
    }

    /// Series reciprocal through total degree `max_deg`; the constant term
    /// must be away from zero.
    pub fn recip_truncated(&self, max_deg: usize) -> Result<ScalarPoly> {
        let c0 = self.coeff(&MultiIndex::zero(self.dim));
        if c0.norm() < 1e-300 {
            return Err(Error::SingularLinearPart { sigma_min: c0.norm() });
        }
        // self = c0 (1 - u), u with no constant term; 1/self = (1/c0) sum u^t.
        let c0_inv = Complex64::new(1.0, 0.0) / c0;
        let mut u = self.scale(-c0_inv).truncated(max_deg);
        u.add_term(MultiIndex::zero(self.dim), Complex64::new(1.0, 0.0));
        // u now equals 1 - self/c0, which has no constant term.
        let one = ScalarPoly::constant(self.dim, Complex64::new(1.0, 0.0));
        let mut acc = one.clone();
        for _ in 0..max_deg {
            acc = one.add(&u.mul_truncated(&acc, max_deg));
        }
        Ok(acc.scale(c0_inv))
    }

    pub fn max_coeff_norm(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

fn power_table(v: &[Complex64], max_deg: usize) -> Vec<Vec<Complex64>> {
    v.iter()
        .map(|&z| {
            let mut pw = Vec::with_capacity(max_deg + 1);
            pw.push(Complex64::new(1.0, 0.0));
            for e in 1..=max_deg {
                let prev = pw[e - 1];
                pw.push(prev * z);
            }
            pw
        })
        .collect()
}

fn monomial_value(powers: &[Vec<Complex64>], mi: &MultiIndex) -> Complex64 {
    let mut m = Complex64::new(1.0, 0.0);
    for (j, e) in mi.entries().enumerate() {
        if e > 0 {
            m *= powers[j][e];
        }
    }
    m
}

/// Two-sided estimate of sup_{|v|=1} |K^(m)(v)| in the componentwise-max
/// output norm: `upper` is the coefficient-sum bound (valid per component),
/// `lower` the best sampled value. `lower <= upper` always holds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HomogNormEstimate {
    pub degree: usize,
    pub lower: f64,
    pub upper: f64,
}

/// Polynomial map jet: sparse coefficients (component, multi-index) -> C,
/// orders 1..=degree, no constant term.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyMapJet {
    dim: usize,
    degree: usize,
    coeffs: BTreeMap<(usize, MultiIndex), Complex64>,
}

impl PolyMapJet {
    pub fn new(dim: usize, degree: usize) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::InvalidJet(format!("dimension {dim} not in 1..=3")));
        }
        if degree == 0 {
            return Err(Error::InvalidJet(String::from("truncation degree must be >= 1")));
        }
        Ok(PolyMapJet { dim, degree, coeffs: BTreeMap::new() })
    }

    pub fn identity(dim: usize, degree: usize) -> Self {
        let mut jet = PolyMapJet::new(dim, degree).unwrap();
        for i in 0..dim {
            jet.set_coeff(i, MultiIndex::unit(dim, i), Complex64::new(1.0, 0.0)).unwrap();
        }
        jet
    }

    /// Jet of the linear map v -> mat v.
    pub fn from_linear(mat: &CMat, degree: usize) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::InvalidJet(String::from("linear part must be square")));
        }
        let dim = mat.rows();
        let mut jet = PolyMapJet::new(dim, degree)?;
        for i in 0..dim {
            for j in 0..dim {
                jet.set_coeff(i, MultiIndex::unit(dim, j), mat[(i, j)])?;
            }
        }
        Ok(jet)
    }

    pub fn from_coeffs(
        dim: usize,
        degree: usize,
        entries: impl IntoIterator<Item = (usize, MultiIndex, Complex64)>,
    ) -> Result<Self> {
        let mut jet = PolyMapJet::new(dim, degree)?;
        for (i, mi, c) in entries {
            jet.add_coeff(i, mi, c)?;
        }
        Ok(jet)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn num_coeffs(&self) -> usize {
        self.coeffs.len()
    }

    fn check_key(&self, component: usize, mi: &MultiIndex) -> Result<()> {
        if component >= self.dim {
            return Err(Error::InvalidJet(format!(
                "component {component} out of range for dimension {}",
                self.dim
            )));
        }
        if mi.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: mi.dim() });
        }
        let ord = mi.order();
        if ord == 0 {
            return Err(Error::InvalidJet(String::from("jets carry no constant term")));
        }
        if ord > self.degree {
            return Err(Error::InvalidJet(format!(
                "order {ord} exceeds truncation degree {}",
                self.degree
            )));
        }
        Ok(())
    }

    pub fn set_coeff(&mut self, component: usize, mi: MultiIndex, c: Complex64) -> Result<()> {
        self.check_key(component, &mi)?;
        if c == ZERO {
            self.coeffs.remove(&(component, mi));
        } else {
            self.coeffs.insert((component, mi), c);
        }
        Ok(())
    }

    pub fn add_coeff(&mut self, component: usize, mi: MultiIndex, c: Complex64) -> Result<()> {
        self.check_key(component, &mi)?;
        let entry = self.coeffs.entry((component, mi)).or_insert(ZERO);
        *entry += c;
        if *entry == ZERO {
            self.coeffs.remove(&(component, mi));
        }
        Ok(())
    }

    pub fn coeff(&self, component: usize, mi: &MultiIndex) -> Complex64 {
        self.coeffs.get(&(component, *mi)).copied().unwrap_or(ZERO)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, MultiIndex, Complex64)> + '_ {
        self.coeffs.iter().map(|(&(i, mi), &c)| (i, mi, c))
    }

    pub fn component(&self, i: usize) -> ScalarPoly {
        let mut p = ScalarPoly::zero(self.dim);
        for (&(comp, mi), &c) in &self.coeffs {
            if comp == i {
                p.add_term(mi, c);
            }
        }
        p
    }

    /// Assembles a jet from scalar components, which must have no constant
    /// term and order at most `degree`.
    pub fn from_components(components: &[ScalarPoly], degree: usize) -> Result<Self> {
        let dim = components.len();
        let mut jet = PolyMapJet::new(dim, degree)?;
        for (i, p) in components.iter().enumerate() {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: p.dim() });
            }
            for (mi, c) in p.terms() {
                jet.set_coeff(i, *mi, *c)?;
            }
        }
        Ok(jet)
    }

    pub fn linear_part(&self) -> CMat {
        let mut m = CMat::zeros(self.dim, self.dim);
        for j in 0..self.dim {
            let mi = MultiIndex::unit(self.dim, j);
            for i in 0..self.dim {
                m[(i, j)] = self.coeff(i, &mi);
            }
        }
        m
    }

    /// Jet with only the order-m coefficients (same truncation degree).
    pub fn homogeneous_part(&self, m: usize) -> PolyMapJet {
        let mut jet = PolyMapJet::new(self.dim, self.degree).unwrap();
        for (&(i, mi), &c) in &self.coeffs {
            if mi.order() == m {
                jet.coeffs.insert((i, mi), c);
            }
        }
        jet
    }

    pub fn is_homogeneous(&self, m: usize) -> bool {
        self.coeffs.keys().all(|(_, mi)| mi.order() == m)
    }

    /// Drops coefficients beyond `new_degree` and lowers the truncation order.
    pub fn truncated(&self, new_degree: usize) -> Result<PolyMapJet> {
        let mut jet = PolyMapJet::new(self.dim, new_degree)?;
        for (&(i, mi), &c) in &self.coeffs {
            if mi.order() <= new_degree {
                jet.coeffs.insert((i, mi), c);
            }
        }
        Ok(jet)
    }

    /// Reinterprets the jet at a higher truncation degree (no new data).
    pub fn extended(&self, new_degree: usize) -> PolyMapJet {
        assert!(new_degree >= self.degree);
        let mut jet = self.clone();
        jet.degree = new_degree;
        jet
    }

    pub fn add(&self, other: &PolyMapJet) -> Result<PolyMapJet> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: other.dim });
        }
        let degree = self.degree.min(other.degree);
        let mut out = self.truncated(degree)?;
        for (&(i, mi), &c) in &other.coeffs {
            if mi.order() <= degree {
                out.add_coeff(i, mi, c)?;
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &PolyMapJet) -> Result<PolyMapJet> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: Complex64) -> PolyMapJet {
        let mut out = PolyMapJet::new(self.dim, self.degree).unwrap();
        if s == ZERO {
            return out;
        }
        for (&(i, mi), &c) in &self.coeffs {
            out.coeffs.insert((i, mi), c * s);
        }
        out
    }

    pub fn max_coeff_norm(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Largest coefficient distance between two jets (union of supports,
    /// through the smaller truncation degree).
    pub fn max_coeff_distance(&self, other: &PolyMapJet) -> f64 {
        let degree = self.degree.min(other.degree);
        let mut d: f64 = 0.0;
        for (&(i, mi), &c) in &self.coeffs {
            if mi.order() <= degree {
                d = d.max((c - other.coeff(i, &mi)).norm());
            }
        }
        for (&(i, mi), &c) in &other.coeffs {
            if mi.order() <= degree {
                d = d.max((self.coeff(i, &mi) - c).norm());
            }
        }
        d
    }

    /// Composition self o inner, truncated at min(self.degree, inner.degree).
    pub fn compose(&self, inner: &PolyMapJet) -> Result<PolyMapJet> {
        if self.dim != inner.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: inner.dim });
        }
        let degree = self.degree.min(inner.degree);
        let dim = self.dim;
        // Truncated powers of the inner components. Inner has no constant
        // term, so inner_j^e has order >= e and exponents above degree die.
        let inner_comps: Vec<ScalarPoly> =
            (0..dim).map(|j| inner.component(j).truncated(degree)).collect();
        let mut powers: Vec<Vec<ScalarPoly>> = Vec::with_capacity(dim);
        for j in 0..dim {
            let mut pw = vec![ScalarPoly::constant(dim, Complex64::new(1.0, 0.0))];
            let mut needed = 0;
            for (_, mi) in self.coeffs.keys() {
                needed = needed.max(mi.entry(j));
            }
            for e in 1..=needed.min(degree) {
                let next = pw[e - 1].mul_truncated(&inner_comps[j], degree);
                pw.push(next);
            }
            powers.push(pw);
        }
        let mut components = vec![ScalarPoly::zero(dim); dim];
        for (&(i, mi), &c) in &self.coeffs {
            if mi.order() > degree {
                continue;
            }
            let mut term = ScalarPoly::constant(dim, c);
            for (j, e) in mi.entries().enumerate() {
                if e > 0 {
                    term = term.mul_truncated(&powers[j][e], degree);
                }
            }
            components[i] = components[i].add(&term);
        }
        PolyMapJet::from_components(&components, degree)
    }

    /// Formal inverse through the truncation degree, with the default
    /// smallest-singular-value floor of 1e-12 on the linear part.
    pub fn formal_inverse(&self) -> Result<PolyMapJet> {
        self.formal_inverse_with(1e-12)
    }

    pub fn formal_inverse_with(&self, sigma_floor: f64) -> Result<PolyMapJet> {
        let a = self.linear_part();
        let sv = a.singular_values();
        let sigma_min = sv.last().copied().unwrap_or(0.0);
        if sigma_min < sigma_floor {
            return Err(Error::SingularLinearPart { sigma_min });
        }
        let a_inv = a.inverse()?;
        let degree = self.degree;
        let higher = {
            let mut h = self.clone();
            for j in 0..self.dim {
                let mi = MultiIndex::unit(self.dim, j);
                for i in 0..self.dim {
                    h.set_coeff(i, mi, ZERO)?;
                }
            }
            h
        };
        // Degree-by-degree: A g_m = -[higher(g_{<m})]_m.
        let mut g = PolyMapJet::from_linear(&a_inv, degree)?;
        for m in 2..=degree {
            let pushed = higher.compose(&g)?;
            let residual_m = pushed.homogeneous_part(m);
            let mut correction = PolyMapJet::new(self.dim, degree)?;
            for (comp, mi, c) in residual_m.iter() {
                // Map the coefficient vector through -A^{-1} componentwise.
                for i in 0..self.dim {
                    correction.add_coeff(i, mi, -a_inv[(i, comp)] * c)?;
                }
            }
            g = g.add(&correction)?;
        }
        Ok(g)
    }

    pub fn evaluate(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: v.len() });
        }
        let powers = power_table(v, self.degree);
        let mut out = vec![ZERO; self.dim];
        for (&(i, mi), &c) in &self.coeffs {
            out[i] += c * monomial_value(&powers, &mi);
        }
        Ok(out)
    }

    /// Exact Jacobian at v.
    pub fn derivative_at(&self, v: &[Complex64]) -> Result<CMat> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: v.len() });
        }
        let powers = power_table(v, self.degree);
        let mut jac = CMat::zeros(self.dim, self.dim);
        for (&(i, mi), &c) in &self.coeffs {
            for j in 0..self.dim {
                if let Some(lower) = mi.minus_unit(j) {
                    jac[(i, j)] += c * (mi.entry(j) as f64) * monomial_value(&powers, &lower);
                }
            }
        }
        Ok(jac)
    }

    /// Two-sided sup estimate for the order-m homogeneous part on the unit
    /// sphere (componentwise-max output norm). The lower bound samples the
    /// axis directions, the diagonal direction and `samples` seeded random
    /// unit vectors.
    pub fn homogeneous_norm(&self, m: usize, samples: usize, seed: u64) -> HomogNormEstimate {
        let mut sums = vec![0.0f64; self.dim];
        for (&(i, mi), &c) in &self.coeffs {
            if mi.order() == m {
                sums[i] += c.norm();
            }
        }
        let upper = sums.iter().copied().fold(0.0, f64::max);

        let part = self.homogeneous_part(m);
        let mut lower = 0.0f64;
        let mut probe = |v: &[Complex64]| {
            if let Ok(img) = part.evaluate(v) {
                for z in img {
                    lower = lower.max(z.norm());
                }
            }
        };
        for j in 0..self.dim {
            let mut v = vec![ZERO; self.dim];
            v[j] = Complex64::new(1.0, 0.0);
            probe(&v);
        }
        let diag = Complex64::new(1.0 / (self.dim as f64).sqrt(), 0.0);
        probe(&vec![diag; self.dim]);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..samples {
            let v = random_unit_vector(self.dim, &mut rng);
            probe(&v);
        }
        HomogNormEstimate { degree: m, lower: lower.min(upper), upper }
    }

    /// Sum over orders m of m * upper(K^(m)) * r^(m-1): a componentwise
    /// Lipschitz bound on the closed ball of radius r.
    pub fn lipschitz_bound_on_ball(&self, r: f64) -> f64 {
        let mut bound = 0.0;
        for m in 1..=self.degree {
            let mut sums = vec![0.0f64; self.dim];
            for (&(i, mi), &c) in &self.coeffs {
                if mi.order() == m {
                    sums[i] += c.norm();
                }
            }
            let upper = sums.iter().copied().fold(0.0, f64::max);
            if upper > 0.0 {
                bound += (m as f64) * upper * r.powi(m as i32 - 1);
            }
        }
        bound
    }
}

/// Sampled point uniform on the unit sphere of C^dim (complex Gaussian,
/// normalized).
pub fn random_unit_vector(dim: usize, rng: &mut impl rand::Rng) -> Vec<Complex64> {
    loop {
        let v: Vec<Complex64> = (0..dim)
            .map(|_| {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                Complex64::new(re, im)
            })
            .collect();
        let n = crate::linalg::vec_norm(&v);
        if n > 1e-6 {
            return v.iter().map(|z| z / Complex64::new(n, 0.0)).collect();
        }
    }
}

/// Working truncation degree used by the normalization pipeline.
pub fn default_degree(q_tilde: usize) -> usize {
    (q_tilde + 1).max(8)
}

/// All exponent vectors of the given total degree, lexicographically sorted.
pub fn multi_indices_of_order(dim: usize, order: usize) -> Vec<MultiIndex> {
    assert!(dim >= 1 && dim <= MAX_DIM);
    let mut out = Vec::new();
    let mut current = vec![0usize; dim];
    fn rec(dim: usize, pos: usize, left: usize, current: &mut Vec<usize>, out: &mut Vec<MultiIndex>) {
        if pos == dim - 1 {
            current[pos] = left;
            out.push(MultiIndex::new(current).unwrap());
            return;
        }
        for take in 0..=left {
            current[pos] = take;
            rec(dim, pos + 1, left - take, current, out);
        }
    }
    rec(dim, 0, order, &mut current, &mut out);
    out.sort();
    out
}
