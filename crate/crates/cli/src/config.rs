//! The experiment file: one TOML document whose sections describe the input
//! objects ([map], [spectrum], [cocycle], [target], [linear]) and one
//! parameter section per subcommand. Each subcommand validates exactly the
//! sections it uses; unknown keys anywhere are rejected so typos surface as
//! config errors naming the field.

use num_complex::Complex64;
use serde::Deserialize;

use crate::error::CliError;

/// A coefficient in the config: a plain float (real) or a `[re, im]` pair.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
pub enum Coeff {
    Re(f64),
    Pair([f64; 2]),
}

impl Coeff {
    pub fn to_complex(self) -> Complex64 {
        match self {
            Coeff::Re(x) => Complex64::new(x, 0.0),
            Coeff::Pair([re, im]) => Complex64::new(re, im),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub map: Option<MapConfig>,
    pub spectrum: Option<SpectrumConfig>,
    pub cocycle: Option<CocycleConfig>,
    /// Renormalization target (the candidate normal form N).
    pub target: Option<CocycleConfig>,
    pub linear: Option<LinearConfig>,
    pub normalize: Option<NormalizeParams>,
    pub renorm: Option<RenormParams>,
    pub reduce: Option<ReduceParams>,
    pub cycles: Option<CyclesParams>,
    pub birkhoff: Option<BirkhoffParams>,
    pub verify_nt: Option<VerifyNtParams>,
    pub density: Option<DensityParams>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("config parse: {e}")))
    }
}

/// kind = "one_var" (affine p/q on the line), "product" (two one-variable
/// factors acting on the plane), or "homogeneous" (dim + degree + one
/// component table per homogeneous coordinate).
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapConfig {
    pub kind: String,
    /// one_var: coefficients of p, ascending powers.
    pub numer: Option<Vec<Coeff>>,
    /// one_var: coefficients of q, ascending powers. Defaults to [1].
    pub denom: Option<Vec<Coeff>>,
    pub first: Option<Box<MapConfig>>,
    pub second: Option<Box<MapConfig>>,
    pub dim: Option<usize>,
    pub degree: Option<usize>,
    pub component: Option<Vec<ComponentConfig>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentConfig {
    pub terms: Vec<HomTermConfig>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HomTermConfig {
    /// Exponents in the dim+1 homogeneous coordinates.
    pub alpha: Vec<usize>,
    pub c: Coeff,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumConfig {
    pub blocks: Vec<BlockConfig>,
    pub epsilon: f64,
    pub delta_res: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockConfig {
    pub rate: f64,
    pub multiplicity: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CocycleConfig {
    pub dim: usize,
    pub degree: usize,
    /// One table per step of the orbit, in order.
    pub germ: Vec<GermConfig>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GermConfig {
    pub terms: Vec<TermConfig>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermConfig {
    /// Component index, 0-based.
    pub comp: usize,
    pub alpha: Vec<usize>,
    pub c: Coeff,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearConfig {
    /// One matrix per step of the orbit, in order.
    pub matrix: Vec<MatrixConfig>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixConfig {
    pub rows: Vec<Vec<Coeff>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormalizeParams {
    pub epsilon: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RenormParams {
    pub max_iter: usize,
    pub tol: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReduceParams {
    pub epsilon: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CyclesParams {
    /// Defaults to 1.
    pub n_min: Option<usize>,
    pub n_max: usize,
    /// Seeds the sphere sample behind the Gamma bound and, for plane maps,
    /// the Newton start grid.
    pub seed: u64,
    /// Sample count for the Gamma bound. Defaults to 200.
    pub gamma_samples: Option<usize>,
    pub grid: Option<GridConfig>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub samples: usize,
    pub max_iter: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BirkhoffParams {
    /// Exterior order s.
    pub s: usize,
    pub transient: usize,
    pub average: usize,
    pub samples: usize,
    pub seed: u64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyNtParams {
    pub period: usize,
    /// Base point of the cycle: dim entries (affine chart) or dim+1 entries
    /// (homogeneous representative).
    pub point: Vec<Coeff>,
    pub n_max: usize,
    /// Exactly one of eps / eps_fraction. eps_fraction scales the cycle's
    /// smallest per-step exponent chi_1.
    pub eps: Option<f64>,
    pub eps_fraction: Option<f64>,
    /// Jet degree for the normalizing coordinate. Defaults to 8.
    pub degree: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityParams {
    /// Defaults to 1.
    pub n_min: Option<usize>,
    pub n_max: usize,
    pub eps: f64,
    /// Exterior order s of the phi_n being compared.
    pub s: usize,
    /// Exactly one of sigma_ref / sigma_from_n. sigma_from_n = n0 takes the
    /// reference from the repulsive-cycle estimate at period n0.
    pub sigma_ref: Option<f64>,
    pub sigma_from_n: Option<usize>,
}

pub fn require<'a, T>(opt: &'a Option<T>, section: &str, sub: &str) -> Result<&'a T, CliError> {
    opt.as_ref().ok_or_else(|| {
        CliError::Config(format!("config: [{section}] section is required by the {sub} subcommand"))
    })
}

pub fn positive(x: f64, field: &str) -> Result<f64, CliError> {
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(CliError::Config(format!("config: {field} must be a positive finite number, got {x}")))
    }
}

pub fn at_least(n: usize, min: usize, field: &str) -> Result<usize, CliError> {
    if n >= min {
        Ok(n)
    } else {
        Err(CliError::Config(format!("config: {field} must be at least {min}, got {n}")))
    }
}
