//! Config sections to library objects.

use dulac::cocycle::{PeriodicGermCocycle, PeriodicLinearCocycle};
use dulac::jets::{MultiIndex, PolyMapJet, ScalarPoly};
use dulac::linalg::CMat;
use dulac::projective::ProjectiveEndomorphism;
use dulac::spectrum::{build_table, build_table_with, ContractionSpectrum, ResonanceTable, SpectralBlock};
use num_complex::Complex64;

use crate::config::{CocycleConfig, LinearConfig, MapConfig, SpectrumConfig};
use crate::error::CliError;

pub fn build_map(cfg: &MapConfig) -> Result<ProjectiveEndomorphism, CliError> {
    match cfg.kind.as_str() {
        "one_var" => {
            let numer = cfg
                .numer
                .as_ref()
                .ok_or_else(|| CliError::Config("config: map.numer is required for kind one_var".into()))?;
            let p: Vec<Complex64> = numer.iter().map(|c| c.to_complex()).collect();
            let q: Vec<Complex64> = match &cfg.denom {
                Some(d) => d.iter().map(|c| c.to_complex()).collect(),
                None => vec![Complex64::new(1.0, 0.0)],
            };
            Ok(ProjectiveEndomorphism::from_affine_one_var(&p, &q)?)
        }
        "product" => {
            let first = cfg
                .first
                .as_ref()
                .ok_or_else(|| CliError::Config("config: map.first is required for kind product".into()))?;
            let second = cfg
                .second
                .as_ref()
                .ok_or_else(|| CliError::Config("config: map.second is required for kind product".into()))?;
            let f1 = build_map(first)?;
            let f2 = build_map(second)?;
            Ok(ProjectiveEndomorphism::product(&f1, &f2)?)
        }
        "homogeneous" => {
            let dim = cfg
                .dim
                .ok_or_else(|| CliError::Config("config: map.dim is required for kind homogeneous".into()))?;
            let degree = cfg
                .degree
                .ok_or_else(|| CliError::Config("config: map.degree is required for kind homogeneous".into()))?;
            let comps_cfg = cfg.component.as_ref().ok_or_else(|| {
                CliError::Config("config: [[map.component]] tables are required for kind homogeneous".into())
            })?;
            if comps_cfg.len() != dim + 1 {
                return Err(CliError::Config(format!(
                    "config: map.component needs dim+1 = {} tables, got {}",
                    dim + 1,
                    comps_cfg.len()
                )));
            }
            let mut comps = Vec::with_capacity(dim + 1);
            for cc in comps_cfg {
                let mut poly = ScalarPoly::zero(dim + 1);
                for t in &cc.terms {
                    if t.alpha.len() != dim + 1 {
                        return Err(CliError::Config(format!(
                            "config: map component term alpha needs dim+1 = {} entries, got {:?}",
                            dim + 1,
                            t.alpha
                        )));
                    }
                    poly.add_term(MultiIndex::new(&t.alpha)?, t.c.to_complex());
                }
                comps.push(poly);
            }
            Ok(ProjectiveEndomorphism::new(dim, degree, comps)?)
        }
        other => Err(CliError::Config(format!(
            "config: map.kind must be one_var, product or homogeneous, got {other:?}"
        ))),
    }
}

pub fn build_spectrum(cfg: &SpectrumConfig) -> Result<ContractionSpectrum, CliError> {
    if cfg.blocks.is_empty() {
        return Err(CliError::Config("config: spectrum.blocks must not be empty".into()));
    }
    let blocks = cfg
        .blocks
        .iter()
        .map(|b| SpectralBlock { rate: b.rate, multiplicity: b.multiplicity })
        .collect();
    Ok(ContractionSpectrum::new(blocks, cfg.epsilon)?)
}

pub fn build_resonance_table(cfg: &SpectrumConfig) -> Result<ResonanceTable, CliError> {
    let spec = build_spectrum(cfg)?;
    match cfg.delta_res {
        Some(d) => Ok(build_table_with(&spec, d)?),
        None => Ok(build_table(&spec)?),
    }
}

pub fn build_cocycle(cfg: &CocycleConfig) -> Result<PeriodicGermCocycle, CliError> {
    if cfg.germ.is_empty() {
        return Err(CliError::Config("config: cocycle needs at least one [[germ]] table".into()));
    }
    let mut jets = Vec::with_capacity(cfg.germ.len());
    for g in &cfg.germ {
        let mut jet = PolyMapJet::new(cfg.dim, cfg.degree)?;
        for t in &g.terms {
            if t.alpha.len() != cfg.dim {
                return Err(CliError::Config(format!(
                    "config: cocycle term alpha needs dim = {} entries, got {:?}",
                    cfg.dim, t.alpha
                )));
            }
            jet.set_coeff(t.comp, MultiIndex::new(&t.alpha)?, t.c.to_complex())?;
        }
        jets.push(jet);
    }
    Ok(PeriodicGermCocycle::new(jets)?)
}

pub fn build_linear_cocycle(cfg: &LinearConfig) -> Result<PeriodicLinearCocycle, CliError> {
    if cfg.matrix.is_empty() {
        return Err(CliError::Config("config: linear needs at least one [[matrix]] table".into()));
    }
    let mut mats = Vec::with_capacity(cfg.matrix.len());
    for m in &cfg.matrix {
        let rows: Vec<Vec<Complex64>> =
            m.rows.iter().map(|r| r.iter().map(|c| c.to_complex()).collect()).collect();
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(CliError::Config(format!(
                "config: linear matrix rows must form a square table, got {n} rows of lengths {:?}",
                rows.iter().map(|r| r.len()).collect::<Vec<_>>()
            )));
        }
        let row_refs: Vec<&[Complex64]> = rows.iter().map(|r| r.as_slice()).collect();
        mats.push(CMat::from_rows(&row_refs));
    }
    Ok(PeriodicLinearCocycle::new(mats)?)
}
