//! JSON configuration schemas of the subcommands and their resolution into
//! core types. Every default is made explicit during resolution so the
//! provenance block records the exact run parameters.

use std::collections::BTreeMap;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use cdde_core::bounds::{moduli_from_m_bounds, BoundResolution, ModuliOptions};
use cdde_core::model::{Modulus, ModulusSet, Rational, RationalInterval, SampledPath, VectorField};
use cdde_core::solver::{c1p_modulus_tau, InitialHistory, SolverParams};
use cdde_core::topologies::{SeminormEnumeration, SeminormKind, SeminormResolution};
use cdde_core::Expr;

fn default_true() -> bool {
    true
}

/// `[q1, q2]` with entries that are integers or `[num, den]` pairs.
pub fn parse_interval(v: &Value) -> Result<RationalInterval> {
    let arr = v.as_array().context("interval must be an array [q1, q2]")?;
    if arr.len() != 2 {
        bail!("interval must have exactly two endpoints");
    }
    let rat = |x: &Value| -> Result<Rational> {
        if let Some(n) = x.as_i64() {
            return Ok(Rational::integer(n));
        }
        if let Some(pair) = x.as_array() {
            if pair.len() == 2 {
                let n = pair[0].as_i64().context("numerator must be an integer")?;
                let d = pair[1].as_i64().context("denominator must be an integer")?;
                return Ok(Rational::new(n, d));
            }
        }
        bail!("rational endpoint must be an integer or a [num, den] pair")
    };
    Ok(RationalInterval::new(rat(&arr[0])?, rat(&arr[1])?)?)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModulusCfg {
    Linear { c: f64 },
    Power { c: f64, alpha: f64, cap: f64 },
    Table { s: Vec<f64>, theta: Vec<f64> },
}

impl ModulusCfg {
    pub fn build(&self) -> Result<Modulus> {
        Ok(match self {
            ModulusCfg::Linear { c } => Modulus::linear(*c)?,
            ModulusCfg::Power { c, alpha, cap } => Modulus::power(*c, *alpha, *cap)?,
            ModulusCfg::Table { s, theta } => Modulus::table(s.clone(), theta.clone())?,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModulusSetCfg {
    /// One modulus for every index.
    Uniform { modulus: ModulusCfg },
    /// One modulus per radius index `j`.
    PerIndex { entries: BTreeMap<u32, ModulusCfg> },
    /// Built from the `m`-bounds of the configured field family.
    FromMBounds {
        j_list: Vec<u32>,
        intervals: Vec<Value>,
        #[serde(default = "FromMBoundsDefaults::spatial_step")]
        spatial_step: f64,
        #[serde(default = "FromMBoundsDefaults::time_step")]
        time_step: f64,
    },
    /// The Hölder envelopes of the Sobolev balls, per index.
    Tau { p: u32, j_list: Vec<u32> },
}

struct FromMBoundsDefaults;
impl FromMBoundsDefaults {
    fn spatial_step() -> f64 {
        0.25
    }
    fn time_step() -> f64 {
        1.0 / 128.0
    }
}

impl ModulusSetCfg {
    pub fn build(&self, family: &[VectorField]) -> Result<ModulusSet> {
        Ok(match self {
            ModulusSetCfg::Uniform { modulus } => ModulusSet::uniform(modulus.build()?),
            ModulusSetCfg::PerIndex { entries } => {
                let mut map = BTreeMap::new();
                for (j, m) in entries {
                    map.insert(*j, m.build()?);
                }
                ModulusSet::per_index(map)
            }
            ModulusSetCfg::FromMBounds {
                j_list,
                intervals,
                spatial_step,
                time_step,
            } => {
                if family.is_empty() {
                    bail!("from_m_bounds modulus set needs at least one field");
                }
                let intervals = intervals
                    .iter()
                    .map(parse_interval)
                    .collect::<Result<Vec<_>>>()?;
                moduli_from_m_bounds(
                    family,
                    j_list,
                    &intervals,
                    &BoundResolution {
                        spatial_step: *spatial_step,
                        time_step: *time_step,
                        refine: false,
                    },
                    &ModuliOptions::default(),
                )?
            }
            ModulusSetCfg::Tau { p, j_list } => {
                let mut map = BTreeMap::new();
                for j in j_list {
                    map.insert(*j, c1p_modulus_tau(*j, *p)?);
                }
                ModulusSet::per_index(map)
            }
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ResolutionCfg {
    pub time_step: f64,
    pub lattice_step: f64,
    pub direction_count: usize,
}

impl Default for ResolutionCfg {
    fn default() -> Self {
        ResolutionCfg {
            time_step: 1.0 / 256.0,
            lattice_step: 0.25,
            direction_count: 16,
        }
    }
}

impl ResolutionCfg {
    pub fn build(&self) -> SeminormResolution {
        SeminormResolution {
            time_step: self.time_step,
            lattice_step: self.lattice_step,
            direction_count: self.direction_count,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct EnumerationCfg {
    pub max_radius: u32,
    pub max_index: u32,
    pub dense_points: Vec<Vec<f64>>,
    pub exponent: u32,
}

impl Default for EnumerationCfg {
    fn default() -> Self {
        EnumerationCfg {
            max_radius: 1,
            max_index: 2,
            dense_points: vec![vec![0.0, 0.0]],
            exponent: 1,
        }
    }
}

impl EnumerationCfg {
    pub fn build(&self) -> SeminormEnumeration {
        SeminormEnumeration {
            max_radius: self.max_radius,
            max_index: self.max_index,
            dense_points: self.dense_points.clone(),
            exponent: self.exponent,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundsConfig {
    pub field: Value,
    #[serde(default)]
    pub family: Vec<Value>,
    #[serde(default = "BoundsConfig::default_kinds")]
    pub kinds: Vec<String>,
    #[serde(default = "BoundsConfig::default_j_list")]
    pub j_list: Vec<u32>,
    pub interval: Value,
    #[serde(default = "BoundsConfig::default_spatial")]
    pub spatial_step: f64,
    #[serde(default = "BoundsConfig::default_time")]
    pub time_step: f64,
    #[serde(default = "default_true")]
    pub refine: bool,
    /// Optional family report: `L^p`-boundedness and equicontinuity.
    pub report: Option<FamilyReportCfg>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilyReportCfg {
    pub r_list: Vec<f64>,
    #[serde(default = "FamilyReportCfg::default_p")]
    pub p: u32,
    pub eps_list: Vec<f64>,
}

impl FamilyReportCfg {
    fn default_p() -> u32 {
        1
    }
}

impl BoundsConfig {
    fn default_kinds() -> Vec<String> {
        vec!["m".into(), "l".into(), "l1".into(), "l2".into()]
    }
    fn default_j_list() -> Vec<u32> {
        vec![1, 2]
    }
    fn default_spatial() -> f64 {
        0.25
    }
    fn default_time() -> f64 {
        1.0 / 64.0
    }

    pub fn resolution(&self) -> BoundResolution {
        BoundResolution {
            spatial_step: self.spatial_step,
            time_step: self.time_step,
            refine: self.refine,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeminormIndexCfg {
    pub kind: String,
    pub interval: Value,
    pub j: u32,
    #[serde(default = "SeminormIndexCfg::default_p")]
    pub p: u32,
    pub point: Option<Vec<f64>>,
    /// Optional subinterval `[p1, p2]` the objective integrates over while
    /// the path constraints keep acting on the full interval.
    pub clip: Option<Value>,
}

impl SeminormIndexCfg {
    fn default_p() -> u32 {
        1
    }

    pub fn build(&self) -> Result<cdde_core::topologies::SeminormIndex> {
        let kind = SeminormKind::parse(&self.kind)?;
        let interval = parse_interval(&self.interval)?;
        let mut idx = cdde_core::topologies::SeminormIndex::new(kind, interval, self.j, self.p);
        if let Some(point) = &self.point {
            idx = idx.with_point(point.clone());
        }
        if let Some(clip) = &self.clip {
            idx = idx.with_clip(parse_interval(clip)?);
        }
        Ok(idx)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeminormConfig {
    pub field: Value,
    #[serde(default)]
    pub family: Vec<Value>,
    pub indices: Vec<SeminormIndexCfg>,
    pub theta: Option<ModulusSetCfg>,
    pub theta_hat: Option<ModulusSetCfg>,
    #[serde(default)]
    pub resolution: ResolutionCfg,
    /// Evaluate the alternative (unshifted) generating form instead.
    #[serde(default)]
    pub alternative: bool,
    #[serde(default = "default_true")]
    pub write_argmax: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DistanceConfig {
    pub field_a: Value,
    pub field_b: Value,
    pub kind: String,
    #[serde(default = "DistanceConfig::default_k_max")]
    pub k_max: usize,
    #[serde(default)]
    pub enumeration: EnumerationCfg,
    pub theta: Option<ModulusSetCfg>,
    pub theta_hat: Option<ModulusSetCfg>,
    #[serde(default)]
    pub resolution: ResolutionCfg,
}

impl DistanceConfig {
    fn default_k_max() -> usize {
        4
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhiCfg {
    Constant { value: Vec<f64> },
    Expr {
        expr: Value,
        derivative: Option<Value>,
        #[serde(default = "PhiCfg::default_cells")]
        cells: usize,
    },
}

impl PhiCfg {
    fn default_cells() -> usize {
        256
    }

    pub fn build(&self) -> Result<InitialHistory> {
        match self {
            PhiCfg::Constant { value } => Ok(InitialHistory::constant(value.clone())?),
            PhiCfg::Expr {
                expr,
                derivative,
                cells,
            } => {
                let e = Expr::from_json(expr)?;
                if e.max_component().is_some() {
                    bail!("initial data expressions may reference only t");
                }
                let sample = |ex: &Expr| -> Result<SampledPath> {
                    let cells = (*cells).max(2);
                    let times: Vec<f64> =
                        (0..=cells).map(|i| -1.0 + i as f64 / cells as f64).collect();
                    let values = times
                        .iter()
                        .map(|&t| Ok(vec![ex.eval(t, &[], &[])?]))
                        .collect::<Result<Vec<_>>>()?;
                    Ok(SampledPath::new(times, values)?)
                };
                let path = sample(&e)?;
                let deriv = match derivative {
                    Some(d) => Some(sample(&Expr::from_json(d)?)?),
                    None => None,
                };
                Ok(InitialHistory::new(path, deriv)?)
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveConfig {
    pub field: Value,
    pub phi: PhiCfg,
    pub horizon: f64,
    #[serde(default = "SolveConfig::default_step")]
    pub step: f64,
    #[serde(default = "SolveConfig::default_picard_tol")]
    pub picard_tol: f64,
    #[serde(default = "SolveConfig::default_picard_max")]
    pub picard_max: usize,
    #[serde(default = "SolveConfig::default_sub_quadrature")]
    pub sub_quadrature: usize,
    #[serde(default = "SolveConfig::default_escape")]
    pub escape_radius: f64,
}

impl SolveConfig {
    fn default_step() -> f64 {
        1e-3
    }
    fn default_picard_tol() -> f64 {
        1e-10
    }
    fn default_picard_max() -> usize {
        50
    }
    fn default_sub_quadrature() -> usize {
        4
    }
    fn default_escape() -> f64 {
        1e6
    }

    pub fn params(&self) -> SolverParams {
        SolverParams {
            step: self.step,
            picard_tol: self.picard_tol,
            picard_max: self.picard_max,
            sub_quadrature: self.sub_quadrature,
            escape_radius: self.escape_radius,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HullConfig {
    pub field: Value,
    pub times: Vec<f64>,
    pub kind: String,
    #[serde(default = "DistanceConfig::default_k_max")]
    pub k_max: usize,
    #[serde(default)]
    pub enumeration: EnumerationCfg,
    pub theta: Option<ModulusSetCfg>,
    pub theta_hat: Option<ModulusSetCfg>,
    #[serde(default)]
    pub resolution: ResolutionCfg,
}

pub fn parse_field(v: &Value) -> Result<VectorField> {
    Ok(VectorField::from_json(v)?)
}

pub fn parse_family(field: &Value, family: &[Value]) -> Result<Vec<VectorField>> {
    let mut out = vec![parse_field(field)?];
    for v in family {
        out.push(parse_field(v)?);
    }
    Ok(out)
}
