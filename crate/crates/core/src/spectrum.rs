//! Contraction spectra and resonance classification.
//!
//! A [`ContractionSpectrum`] records the block structure of a regular
//! contracting linear part: distinct rates Lambda_l < ... < Lambda_1 < 0 with
//! multiplicities, together with the accuracy epsilon of the two-sided bounds
//! e^(Lambda_j - eps) <= |A v|/|v| <= e^(Lambda_j + eps) on each block.
//!
//! A monomial degree (j, alpha) with |alpha| >= 2 compares alpha . lambda
//! against Lambda_j: equality is resonant, below is sub-resonant (killable by
//! a backward series), above is super-resonant (killable by a forward
//! series). The margin constant zeta > 0 makes both homological series
//! geometrically convergent with ratio e^(-zeta).

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::jets::{multi_indices_of_order, MultiIndex, PolyMapJet};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralBlock {
    /// Contraction rate Lambda_j < 0.
    pub rate: f64,
    /// Block dimension k_j >= 1.
    pub multiplicity: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContractionSpectrum {
    blocks: Vec<SpectralBlock>,
    epsilon: f64,
}

impl ContractionSpectrum {
    /// Blocks ordered from least contracted (Lambda_1, closest to 0) to most
    /// contracted. Rates must be strictly decreasing and negative; epsilon
    /// must satisfy 0 < eps <= |Lambda_1| / 10.
    pub fn new(blocks: Vec<SpectralBlock>, epsilon: f64) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InvalidSpectrum("no blocks".into()));
        }
        let mut total = 0usize;
        let mut prev = 0.0f64;
        for (j, b) in blocks.iter().enumerate() {
            if !b.rate.is_finite() || b.rate >= 0.0 {
                return Err(Error::InvalidSpectrum(format!(
                    "rate {} of block {} is not negative",
                    b.rate,
                    j + 1
                )));
            }
            if j > 0 && b.rate >= prev {
                return Err(Error::InvalidSpectrum(format!(
                    "rates must be strictly decreasing (block {} rate {} >= previous {})",
                    j + 1,
                    b.rate,
                    prev
                )));
            }
            if b.multiplicity == 0 {
                return Err(Error::InvalidSpectrum(format!("block {} has multiplicity 0", j + 1)));
            }
            total += b.multiplicity;
            prev = b.rate;
        }
        if total > crate::jets::MAX_DIM {
            return Err(Error::InvalidSpectrum(format!("total dimension {total} exceeds 3")));
        }
        let gate = blocks[0].rate.abs() / 10.0;
        if !(epsilon > 0.0 && epsilon <= gate) {
            return Err(Error::InvalidSpectrum(format!(
                "epsilon {epsilon} outside (0, |Lambda_1|/10 = {gate}]"
            )));
        }
        Ok(ContractionSpectrum { blocks, epsilon })
    }

    /// Single-rate convenience constructor.
    pub fn single(rate: f64, multiplicity: usize, epsilon: f64) -> Result<Self> {
        ContractionSpectrum::new(vec![SpectralBlock { rate, multiplicity }], epsilon)
    }

    pub fn blocks(&self) -> &[SpectralBlock] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Total fiber dimension k.
    pub fn dim(&self) -> usize {
        self.blocks.iter().map(|b| b.multiplicity).sum()
    }

    /// Rate of block j (1-based, matching the Lambda_j notation).
    pub fn rate(&self, j: usize) -> f64 {
        self.blocks[j - 1].rate
    }

    /// The rate vector lambda: Lambda_1 repeated k_1 times, then Lambda_2, ...
    pub fn lambda_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.dim());
        for b in &self.blocks {
            for _ in 0..b.multiplicity {
                v.push(b.rate);
            }
        }
        v
    }

    /// Block index (1-based) containing the 0-based component i.
    pub fn block_of_component(&self, i: usize) -> usize {
        let mut acc = 0;
        for (j, b) in self.blocks.iter().enumerate() {
            acc += b.multiplicity;
            if i < acc {
                return j + 1;
            }
        }
        panic!("component {i} out of range for dimension {}", self.dim());
    }

    /// Offset of the first component of block j (0-based).
    pub fn block_start(&self, j: usize) -> usize {
        self.blocks[..j - 1].iter().map(|b| b.multiplicity).sum()
    }

    /// Entire part of Lambda_l / Lambda_1 >= 1. Degrees above q_tilde are
    /// uniformly sub-resonant.
    pub fn q_tilde(&self) -> usize {
        let ratio = self.blocks.last().unwrap().rate / self.blocks[0].rate;
        // Guard against representation noise just below an integer ratio.
        (ratio + 1e-12).floor() as usize
    }

    /// Default dead band for resonance detection.
    pub fn default_delta_res(&self) -> f64 {
        1e-9 * self.blocks[0].rate.abs()
    }

    /// alpha . lambda for a degree alpha of the fiber dimension.
    pub fn weighted_degree(&self, alpha: &MultiIndex) -> f64 {
        let lambda = self.lambda_vec();
        alpha
            .entries()
            .zip(lambda.iter())
            .map(|(a, &l)| a as f64 * l)
            .sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ResonanceClass {
    Resonant,
    Sub,
    Super,
}

impl fmt::Display for ResonanceClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ResonanceClass::Resonant => "resonant",
            ResonanceClass::Sub => "sub",
            ResonanceClass::Super => "super",
        };
        f.write_str(s)
    }
}

/// Part selector for the coefficient partition of a jet.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JetPart {
    Linear,
    Resonant,
    Sub,
    Super,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Classification {
    pub class: ResonanceClass,
    /// alpha . lambda - Lambda_j.
    pub gap: f64,
    /// Set when 0 < |gap| < 10 * delta_res: the classification stands but is
    /// numerically fragile.
    pub near_resonance: bool,
}

/// Classifies the degree (j, alpha) with the spectrum's default dead band.
pub fn classify_degree(spec: &ContractionSpectrum, j: usize, alpha: &MultiIndex) -> Classification {
    classify_degree_with(spec, j, alpha, spec.default_delta_res())
}

pub fn classify_degree_with(
    spec: &ContractionSpectrum,
    j: usize,
    alpha: &MultiIndex,
    delta_res: f64,
) -> Classification {
    assert!(j >= 1 && j <= spec.num_blocks(), "block index out of range");
    assert!(alpha.order() >= 2, "classification applies to orders >= 2");
    let gap = spec.weighted_degree(alpha) - spec.rate(j);
    let class = if gap.abs() <= delta_res {
        ResonanceClass::Resonant
    } else if gap < 0.0 {
        ResonanceClass::Sub
    } else {
        ResonanceClass::Super
    };
    let near_resonance = gap != 0.0 && gap.abs() < 10.0 * delta_res;
    Classification { class, gap, near_resonance }
}

/// One entry of the resonance table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TableEntry {
    /// Block index, 1-based.
    pub block: usize,
    pub alpha: MultiIndex,
    pub class: ResonanceClass,
    pub gap: f64,
    pub near_resonance: bool,
}

/// Exhaustive classification of degrees 2 <= |alpha| <= q_tilde for every
/// block, plus the margin constant.
#[derive(Clone, Debug)]
pub struct ResonanceTable {
    spec: ContractionSpectrum,
    delta_res: f64,
    entries: Vec<TableEntry>,
    zeta: f64,
}

impl ResonanceTable {
    pub fn spec(&self) -> &ContractionSpectrum {
        &self.spec
    }

    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    pub fn delta_res(&self) -> f64 {
        self.delta_res
    }

    pub fn entries(&self) -> &[TableEntry] {
        &self.entries
    }

    /// Classification of any degree (j, alpha) with |alpha| >= 2; degrees
    /// beyond the stored range are classified arithmetically (they are always
    /// sub-resonant).
    pub fn class_of(&self, j: usize, alpha: &MultiIndex) -> ResonanceClass {
        if alpha.order() <= self.spec.q_tilde() {
            for e in &self.entries {
                if e.block == j && &e.alpha == alpha {
                    return e.class;
                }
            }
        }
        classify_degree_with(&self.spec, j, alpha, self.delta_res).class
    }

    pub fn resonant_entries(&self) -> impl Iterator<Item = &TableEntry> {
        self.entries.iter().filter(|e| e.class == ResonanceClass::Resonant)
    }

    pub fn near_resonant_entries(&self) -> impl Iterator<Item = &TableEntry> {
        self.entries.iter().filter(|e| e.near_resonance)
    }

    /// True when the coefficient (component i, alpha) lies in the resonant
    /// support. Order-1 coefficients are the linear part and never count.
    pub fn is_resonant_coeff(&self, component: usize, alpha: &MultiIndex) -> bool {
        alpha.order() >= 2
            && self.class_of(self.spec.block_of_component(component), alpha)
                == ResonanceClass::Resonant
    }
}

/// Margin constant: the infimum over all non-resonant degrees (j, alpha),
/// |alpha| >= 2, of the distance |alpha . lambda - Lambda_j| - (|alpha|+2) eps.
/// The infimum over the infinite sub-resonant family is attained by
/// |alpha| <= q_tilde + 1 (the lower envelope grows linearly beyond), so the
/// scan stops there.
pub fn zeta_margin(spec: &ContractionSpectrum) -> f64 {
    zeta_margin_with(spec, spec.default_delta_res())
}

pub fn zeta_margin_with(spec: &ContractionSpectrum, delta_res: f64) -> f64 {
    let k = spec.dim();
    let q = spec.q_tilde();
    let eps = spec.epsilon();
    let mut zeta = f64::INFINITY;
    for order in 2..=(q + 1) {
        for alpha in multi_indices_of_order(k, order) {
            for j in 1..=spec.num_blocks() {
                let cls = classify_degree_with(spec, j, &alpha, delta_res);
                match cls.class {
                    ResonanceClass::Resonant => continue,
                    ResonanceClass::Sub | ResonanceClass::Super => {
                        let margin = cls.gap.abs() - (order as f64 + 2.0) * eps;
                        zeta = zeta.min(margin);
                    }
                }
            }
        }
    }
    zeta
}

/// Builds the table, failing when the margin constant is not positive.
pub fn build_table(spec: &ContractionSpectrum) -> Result<ResonanceTable> {
    build_table_with(spec, spec.default_delta_res())
}

pub fn build_table_with(spec: &ContractionSpectrum, delta_res: f64) -> Result<ResonanceTable> {
    let zeta = zeta_margin_with(spec, delta_res);
    if !(zeta > 0.0) {
        return Err(Error::NonPositiveMargin { zeta });
    }
    let k = spec.dim();
    let q = spec.q_tilde();
    let mut entries = Vec::new();
    for order in 2..=q {
        for alpha in multi_indices_of_order(k, order) {
            for j in 1..=spec.num_blocks() {
                let cls = classify_degree_with(spec, j, &alpha, delta_res);
                entries.push(TableEntry {
                    block: j,
                    alpha,
                    class: cls.class,
                    gap: cls.gap,
                    near_resonance: cls.near_resonance,
                });
            }
        }
    }
    Ok(ResonanceTable { spec: spec.clone(), delta_res, entries, zeta })
}

/// Extracts one part of the coefficient partition of `f`: the linear part,
/// or the resonant / sub-resonant / super-resonant coefficients of orders
/// >= 2 (classified by the block of the target component). The four parts
/// sum to `f` exactly.
pub fn project(f: &PolyMapJet, table: &ResonanceTable, part: JetPart) -> Result<PolyMapJet> {
    let spec = table.spec();
    if f.dim() != spec.dim() {
        return Err(Error::DimensionMismatch { expected: spec.dim(), got: f.dim() });
    }
    let mut out = PolyMapJet::new(f.dim(), f.degree())?;
    for (i, alpha, c) in f.iter() {
        let selected = if alpha.order() == 1 {
            part == JetPart::Linear
        } else {
            let class = table.class_of(spec.block_of_component(i), &alpha);
            match part {
                JetPart::Linear => false,
                JetPart::Resonant => class == ResonanceClass::Resonant,
                JetPart::Sub => class == ResonanceClass::Sub,
                JetPart::Super => class == ResonanceClass::Super,
            }
        };
        if selected {
            out.set_coeff(i, alpha, c)?;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use num_complex::Complex64;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn spec2(l1: f64, l2: f64, eps: f64) -> ContractionSpectrum {
        ContractionSpectrum::new(
            vec![
                SpectralBlock { rate: l1, multiplicity: 1 },
                SpectralBlock { rate: l2, multiplicity: 1 },
            ],
            eps,
        )
        .unwrap()
    }

    fn mi(e: &[usize]) -> MultiIndex {
        MultiIndex::new(e).unwrap()
    }

    #[test]
    fn q_tilde_values() {
        assert_eq!(spec2(-1.0, -2.0, 0.01).q_tilde(), 2);
        assert_eq!(spec2(-1.0, -2.5, 0.01).q_tilde(), 2);
        assert_eq!(ContractionSpectrum::single(-1.0, 1, 0.05).unwrap().q_tilde(), 1);
        let s3 = ContractionSpectrum::new(
            vec![
                SpectralBlock { rate: -1.0, multiplicity: 1 },
                SpectralBlock { rate: -2.0, multiplicity: 1 },
                SpectralBlock { rate: -3.0, multiplicity: 1 },
            ],
            0.01,
        )
        .unwrap();
        assert_eq!(s3.q_tilde(), 3);
    }

    #[test]
    fn validation_gates() {
        assert!(ContractionSpectrum::single(-1.0, 1, 0.2).is_err()); // eps too big
        assert!(ContractionSpectrum::single(1.0, 1, 0.05).is_err()); // positive rate
        assert!(ContractionSpectrum::new(
            vec![
                SpectralBlock { rate: -2.0, multiplicity: 1 },
                SpectralBlock { rate: -1.0, multiplicity: 1 },
            ],
            0.01,
        )
        .is_err()); // wrong order
        assert!(ContractionSpectrum::new(
            vec![SpectralBlock { rate: -1.0, multiplicity: 4 }],
            0.01
        )
        .is_err()); // dimension > 3
    }

    #[test]
    fn table_two_blocks_resonant() {
        let spec = spec2(-1.0, -2.0, 0.01);
        let table = build_table(&spec).unwrap();
        let resonant: Vec<_> = table.resonant_entries().collect();
        assert_eq!(resonant.len(), 1);
        assert_eq!(resonant[0].block, 2);
        assert_eq!(resonant[0].alpha, mi(&[2, 0]));
        // Everything else at order 2 is sub-resonant.
        for e in table.entries() {
            if e.class != ResonanceClass::Resonant {
                assert_eq!(e.class, ResonanceClass::Sub);
            }
        }
    }

    #[test]
    fn table_two_blocks_super() {
        let spec = spec2(-1.0, -2.5, 0.01);
        let table = build_table(&spec).unwrap();
        assert_eq!(table.resonant_entries().count(), 0);
        let supers: Vec<_> =
            table.entries().iter().filter(|e| e.class == ResonanceClass::Super).collect();
        assert_eq!(supers.len(), 1);
        assert_eq!(supers[0].block, 2);
        assert_eq!(supers[0].alpha, mi(&[2, 0]));
    }

    #[test]
    fn table_three_blocks() {
        let spec = ContractionSpectrum::new(
            vec![
                SpectralBlock { rate: -1.0, multiplicity: 1 },
                SpectralBlock { rate: -2.0, multiplicity: 1 },
                SpectralBlock { rate: -3.0, multiplicity: 1 },
            ],
            0.01,
        )
        .unwrap();
        let table = build_table(&spec).unwrap();
        let mut r2 = vec![];
        let mut r3 = vec![];
        for e in table.resonant_entries() {
            match e.block {
                2 => r2.push(e.alpha),
                3 => r3.push(e.alpha),
                _ => panic!("resonant entry in block 1"),
            }
        }
        assert_eq!(r2, vec![mi(&[2, 0, 0])]);
        r3.sort();
        assert_eq!(r3, vec![mi(&[1, 1, 0]), mi(&[3, 0, 0])]);
    }

    /// Brute-force margin over a much deeper degree range; the production
    /// scan (through q_tilde + 1) must agree, confirming the envelope
    /// argument that caps the scan.
    fn zeta_brute(spec: &ContractionSpectrum, max_order: usize) -> f64 {
        let mut zeta = f64::INFINITY;
        for order in 2..=max_order {
            for alpha in multi_indices_of_order(spec.dim(), order) {
                for j in 1..=spec.num_blocks() {
                    let cls = classify_degree(spec, j, &alpha);
                    if cls.class != ResonanceClass::Resonant {
                        zeta = zeta.min(cls.gap.abs() - (order as f64 + 2.0) * spec.epsilon());
                    }
                }
            }
        }
        zeta
    }

    #[test]
    fn zeta_two_blocks() {
        let spec = spec2(-1.0, -2.0, 0.01);
        let z = zeta_margin(&spec);
        // Attained at the sub-resonant pair (j=2, alpha=(3,0)):
        // (-2 + 3) - 5 * 0.01.
        assert!((z - 0.95).abs() < 1e-12, "zeta = {z}");
        assert!((zeta_brute(&spec, spec.q_tilde() + 5) - z).abs() < 1e-12);
    }

    #[test]
    fn zeta_single_block() {
        let spec = ContractionSpectrum::single(-1.0, 1, 0.05).unwrap();
        let z = zeta_margin(&spec);
        assert!((z - 0.8).abs() < 1e-12, "zeta = {z}");
        assert!((zeta_brute(&spec, 7) - z).abs() < 1e-12);
    }

    #[test]
    fn zeta_positive_implies_margins() {
        let spec = spec2(-0.7, -1.9, 0.03);
        let table = build_table(&spec).unwrap();
        let zeta = table.zeta();
        assert!(zeta > 0.0);
        // Re-verify the margin inequalities by direct deep scan.
        for order in 2..=spec.q_tilde() + 4 {
            for alpha in multi_indices_of_order(spec.dim(), order) {
                for j in 1..=spec.num_blocks() {
                    let cls = classify_degree(&spec, j, &alpha);
                    let dist = (order as f64 + 2.0) * spec.epsilon();
                    match cls.class {
                        ResonanceClass::Sub => assert!(cls.gap + dist <= -zeta + 1e-12),
                        ResonanceClass::Super => assert!(cls.gap - dist >= zeta - 1e-12),
                        ResonanceClass::Resonant => {}
                    }
                }
            }
        }
    }

    #[test]
    fn build_table_fails_on_nonpositive_margin() {
        // Nearly resonant but outside the dead band: gap 1e-7 at (j=2,(2,0))
        // while (4 * eps) = 0.04, so the super margin is negative.
        let spec = spec2(-1.0, -2.0000001, 0.01);
        match build_table(&spec) {
            Err(Error::NonPositiveMargin { zeta }) => assert!(zeta < 0.0),
            other => panic!("expected NonPositiveMargin, got {other:?}"),
        }
    }

    #[test]
    fn near_resonance_warning() {
        let spec = spec2(-1.0, -2.000000003, 0.01);
        let cls = classify_degree(&spec, 2, &mi(&[2, 0]));
        // gap = +3e-9: outside the dead band (1e-9), inside the warning band.
        assert_eq!(cls.class, ResonanceClass::Super);
        assert!(cls.near_resonance);
    }

    #[test]
    fn first_block_never_resonant_and_support_restricted() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..500 {
            let n_blocks = rng.gen_range(1..=3usize);
            let mut rates = vec![];
            let mut r = -rng.gen_range(0.3..1.5f64);
            for _ in 0..n_blocks {
                rates.push(r);
                r -= rng.gen_range(0.3..2.0f64);
            }
            let mut mults = vec![1usize; n_blocks];
            let extra = 3 - n_blocks;
            for _ in 0..rng.gen_range(0..=extra) {
                let idx = rng.gen_range(0..n_blocks);
                mults[idx] += 1;
            }
            let blocks: Vec<SpectralBlock> = rates
                .iter()
                .zip(&mults)
                .map(|(&rate, &multiplicity)| SpectralBlock { rate, multiplicity })
                .collect();
            let eps = rates[0].abs() / 20.0;
            let spec = match ContractionSpectrum::new(blocks, eps) {
                Ok(s) => s,
                Err(_) => continue,
            };
            let table = match build_table(&spec) {
                Ok(t) => t,
                Err(_) => continue,
            };
            for e in table.resonant_entries() {
                assert!(e.block > 1, "resonant degree in the first block");
                // Support restriction: alpha_i = 0 on block j and beyond.
                let start = spec.block_start(e.block);
                for (i, a) in e.alpha.entries().enumerate() {
                    if i >= start {
                        assert_eq!(a, 0, "resonant support leaks into block {}", e.block);
                    }
                }
            }
        }
    }

    #[test]
    fn classification_invariant_under_integer_power() {
        let spec = spec2(-1.0, -2.0, 0.01);
        let table = build_table(&spec).unwrap();
        for n in 2..=4 {
            let scaled = spec2(-1.0 * n as f64, -2.0 * n as f64, 0.01);
            let table_n = build_table(&scaled).unwrap();
            assert_eq!(table.entries().len(), table_n.entries().len());
            for (a, b) in table.entries().iter().zip(table_n.entries()) {
                assert_eq!((a.block, a.alpha, a.class), (b.block, b.alpha, b.class));
            }
        }
    }

    #[test]
    fn projection_partitions_exactly() {
        let spec = spec2(-1.0, -2.0, 0.01);
        let table = build_table(&spec).unwrap();
        let c = |re: f64| Complex64::new(re, 0.0);
        let mut f = PolyMapJet::new(2, 3).unwrap();
        f.set_coeff(0, mi(&[1, 0]), c(0.5)).unwrap();
        f.set_coeff(1, mi(&[0, 1]), c(0.25)).unwrap();
        f.set_coeff(1, mi(&[2, 0]), c(1.0)).unwrap(); // resonant
        f.set_coeff(0, mi(&[0, 2]), c(2.0)).unwrap(); // sub for block 1
        f.set_coeff(1, mi(&[3, 0]), c(-1.0)).unwrap(); // order 3 > q~: sub
        let lin = project(&f, &table, JetPart::Linear).unwrap();
        let res = project(&f, &table, JetPart::Resonant).unwrap();
        let sub = project(&f, &table, JetPart::Sub).unwrap();
        let sup = project(&f, &table, JetPart::Super).unwrap();
        assert_eq!(res.num_coeffs(), 1);
        assert_eq!(res.coeff(1, &mi(&[2, 0])), c(1.0));
        assert_eq!(sup.num_coeffs(), 0);
        assert_eq!(sub.num_coeffs(), 2);
        let sum = lin.add(&res).unwrap().add(&sub).unwrap().add(&sup).unwrap();
        assert_eq!(sum.max_coeff_distance(&f), 0.0);
    }

    #[test]
    fn projection_example_sub_block_one() {
        let spec = spec2(-1.0, -2.0, 0.01);
        let table = build_table(&spec).unwrap();
        let mut f = PolyMapJet::new(2, 2).unwrap();
        f.set_coeff(0, mi(&[0, 2]), Complex64::new(1.0, 0.0)).unwrap();
        let sub = project(&f, &table, JetPart::Sub).unwrap();
        assert_eq!(sub.coeff(0, &mi(&[0, 2])), Complex64::new(1.0, 0.0));
    }
}
