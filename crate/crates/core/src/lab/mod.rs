//! Experiment harness: finite hull samples, translation-flow continuity,
//! continuous dependence, topology equivalence, bound propagation, the
//! weak/strong separation, the ordering chain, and skew-product orbits.
//! Each scenario has a built-in desk-scale configuration that a caller can
//! override; reports are bit-reproducible for a fixed config and seed.

pub mod dependence;
pub mod equivalence;
pub mod hull;
pub mod propagation;
pub mod report;
pub mod skewproduct;

pub use dependence::{
    c1p_dependence_experiment, continuous_dependence_experiment, gronwall_constant,
    trajectory_difference_c1p, weak_vs_strong_experiment, DataSequence, DependenceConfig,
    FieldSequence,
};
pub use equivalence::{equivalence_experiment, EquivalenceConfig};
pub use hull::{hull_sample, translation_continuity_experiment, HullSample};
pub use propagation::{bound_propagation_check, PropagationReport};
pub use report::{decay_verdict, DecayRow, ExperimentReport, Verdict};
pub use skewproduct::{cocycle_gap, skewproduct_orbit, CocycleCheck, OrbitReport, OrbitRow};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::bounds::{moduli_from_m_bounds, BoundKind, BoundResolution, ModuliOptions};
use crate::error::{CoreError, Result};
use crate::model::interval::RationalInterval;
use crate::model::modulus::{shared_modulus, Modulus, ModulusSet};
use crate::model::{Expr, VectorField};
use crate::solver::integrate::SolverParams;
use crate::solver::trajectory::InitialHistory;
use crate::topologies::metric::SeminormEnumeration;
use crate::topologies::ordering::{ordering_check, OrderingReport};
use crate::topologies::seminorm::{SeminormContext, SeminormKind, SeminormResolution};

/// `f_n = u + 1/n` with limit `u`: the hand-solvable strong-convergence
/// family.
pub fn offset_family(ns: &[f64]) -> FieldSequence {
    let members = ns
        .iter()
        .map(|&n| {
            (
                n,
                VectorField::scalar(Expr::add(Expr::delayed(0), Expr::constant(1.0 / n)))
                    .expect("offset member"),
            )
        })
        .collect();
    FieldSequence {
        members,
        limit: VectorField::scalar(Expr::delayed(0)).expect("offset limit"),
    }
}

/// `f_n = sin(n t)(x + u)` with limit `0`: converges weakly by oscillation
/// but keeps its strong seminorms fat.
pub fn oscillating_family(ns: &[f64]) -> FieldSequence {
    let members = ns
        .iter()
        .map(|&n| {
            (
                n,
                VectorField::scalar(Expr::mul(
                    Expr::sin(Expr::mul(Expr::constant(n), Expr::time())),
                    Expr::add(Expr::state(0), Expr::delayed(0)),
                ))
                .expect("oscillating member"),
            )
        })
        .collect();
    FieldSequence {
        members,
        limit: VectorField::scalar(Expr::constant(0.0)).expect("zero limit"),
    }
}

/// `f_n = (1 - 1/n) x` with limit `x`: the scaling family whose bound
/// integrals extrapolate exactly in `1/n`.
pub fn scaling_family(ns: &[f64]) -> Vec<(f64, VectorField)> {
    ns.iter()
        .map(|&n| {
            (
                n,
                VectorField::scalar(Expr::mul(Expr::constant(1.0 - 1.0 / n), Expr::state(0)))
                    .expect("scaling member"),
            )
        })
        .collect()
}

/// Builds a labelled field sequence from a JSON field template over the
/// parameter `n` and a JSON limit field.
pub fn family_from_template(
    template: &serde_json::Value,
    limit: &serde_json::Value,
    ns: &[f64],
) -> Result<FieldSequence> {
    let tpl = crate::model::FieldTemplate::from_json(template)?;
    let members = ns
        .iter()
        .map(|&n| Ok((n, tpl.instantiate(n)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(FieldSequence {
        members,
        limit: VectorField::from_json(limit)?,
    })
}

fn sample_history_expr(
    expr: &Expr,
    derivative: Option<&Expr>,
    cells: usize,
) -> Result<InitialHistory> {
    if expr.max_component().is_some() {
        return Err(CoreError::Config(
            "initial-data expressions may reference only t (and n in templates)".into(),
        ));
    }
    let cells = cells.max(2);
    let sample = |e: &Expr| -> Result<crate::model::SampledPath> {
        let times: Vec<f64> = (0..=cells).map(|i| -1.0 + i as f64 / cells as f64).collect();
        let values = times
            .iter()
            .map(|&t| Ok(vec![e.eval(t, &[], &[])?]))
            .collect::<Result<Vec<_>>>()?;
        crate::model::SampledPath::new(times, values)
    };
    let path = sample(expr)?;
    let deriv = derivative.map(sample).transpose()?;
    InitialHistory::new(path, deriv)
}

/// Builds the initial-data sequence from the override templates, or the
/// constant fallback when none are configured.
pub fn data_from_templates(
    o: &ScenarioOverrides,
    ns: &[f64],
    fallback: &InitialHistory,
) -> Result<DataSequence> {
    let (Some(tpl_json), Some(limit_json)) = (&o.phi_template, &o.phi_limit) else {
        return Ok(DataSequence::constant(fallback.clone()));
    };
    let tpl = Expr::from_json(tpl_json)?;
    let dtpl = o
        .phi_derivative_template
        .as_ref()
        .map(Expr::from_json)
        .transpose()?;
    let mut members = Vec::with_capacity(ns.len());
    for &n in ns {
        let e = tpl.substitute_param(n)?;
        let d = dtpl.as_ref().map(|x| x.substitute_param(n)).transpose()?;
        members.push(sample_history_expr(&e, d.as_ref(), o.phi_cells)?);
    }
    let limit_expr = Expr::from_json(limit_json)?;
    let limit_deriv = o
        .phi_limit_derivative
        .as_ref()
        .map(Expr::from_json)
        .transpose()?;
    let limit = sample_history_expr(&limit_expr, limit_deriv.as_ref(), o.phi_cells)?;
    Ok(DataSequence { members, limit })
}

/// A random scalar delay field from a fixed Lipschitz-friendly basis:
/// `a0 + a1 x + a2 u + a3 sin(w1 t) x + a4 cos(w2 t) u + a5 x u`, plus an
/// optional piecewise-in-`t` step factor.
pub fn random_field(rng: &mut StdRng) -> VectorField {
    let coeff = |rng: &mut StdRng| rng.gen_range(-1.5..1.5);
    let a0 = coeff(rng);
    let a1 = coeff(rng);
    let a2 = coeff(rng);
    let a3 = coeff(rng);
    let a4 = coeff(rng);
    let a5 = coeff(rng);
    let w1 = rng.gen_range(0.5..6.0);
    let w2 = rng.gen_range(0.5..6.0);
    let mut expr = Expr::add(
        Expr::add(
            Expr::add(
                Expr::constant(a0),
                Expr::mul(Expr::constant(a1), Expr::state(0)),
            ),
            Expr::add(
                Expr::mul(Expr::constant(a2), Expr::delayed(0)),
                Expr::mul(
                    Expr::constant(a3),
                    Expr::mul(Expr::sin(Expr::mul(Expr::constant(w1), Expr::time())), Expr::state(0)),
                ),
            ),
        ),
        Expr::add(
            Expr::mul(
                Expr::constant(a4),
                Expr::mul(Expr::cos(Expr::mul(Expr::constant(w2), Expr::time())), Expr::delayed(0)),
            ),
            Expr::mul(
                Expr::constant(a5),
                Expr::mul(Expr::state(0), Expr::delayed(0)),
            ),
        ),
    );
    if rng.gen_bool(0.4) {
        let cut = rng.gen_range(0.1..0.9);
        let lo = rng.gen_range(0.2..1.0);
        let hi = rng.gen_range(0.2..1.0);
        let pw = Expr::piecewise(vec![cut], vec![Expr::constant(lo), Expr::constant(hi)])
            .expect("two-branch piecewise");
        expr = Expr::mul(pw, expr);
    }
    VectorField::scalar(expr).expect("random field from safe basis")
}

/// The named scenarios of the experiment harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScenarioKind {
    #[serde(rename = "dependence_TB")]
    DependenceTB,
    #[serde(rename = "dependence_TD")]
    DependenceTD,
    #[serde(rename = "dependence_sigmaD")]
    DependenceSigmaD,
    #[serde(rename = "dependence_TThetaB")]
    DependenceTThetaB,
    #[serde(rename = "dependence_sigmaThetaD")]
    DependenceSigmaThetaD,
    #[serde(rename = "dependence_C1p")]
    DependenceC1p,
    #[serde(rename = "dependence_C11")]
    DependenceC11,
    #[serde(rename = "equivalence_lbounds")]
    EquivalenceLBounds,
    #[serde(rename = "equivalence_l2bounds")]
    EquivalenceL2Bounds,
    #[serde(rename = "translation_continuity")]
    TranslationContinuity,
    #[serde(rename = "bound_propagation")]
    BoundPropagation,
    #[serde(rename = "weak_vs_strong")]
    WeakVsStrong,
    #[serde(rename = "ordering_chain")]
    OrderingChain,
}

impl ScenarioKind {
    pub fn parse(name: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(name.to_string()))
            .map_err(|_| CoreError::Config(format!("unknown scenario `{name}`")))
    }

    pub fn name(&self) -> String {
        serde_json::to_value(self)
            .expect("scenario serializes")
            .as_str()
            .expect("scenario name is a string")
            .to_string()
    }
}

/// Overridable knobs of the built-in scenario configurations.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioOverrides {
    pub n_values: Option<Vec<f64>>,
    /// Custom field family: a field template over the parameter `n`
    /// (JSON field schema whose expressions may reference `{"var": "n"}`)
    /// plus the limit field. Both must be present to replace a scenario's
    /// built-in family.
    pub family_template: Option<serde_json::Value>,
    pub limit_field: Option<serde_json::Value>,
    /// Custom initial data: expressions of `t` and `n` (members) and of `t`
    /// (limit), with optional derivative expressions for Sobolev scenarios.
    pub phi_template: Option<serde_json::Value>,
    pub phi_derivative_template: Option<serde_json::Value>,
    pub phi_limit: Option<serde_json::Value>,
    pub phi_limit_derivative: Option<serde_json::Value>,
    pub phi_cells: usize,
    pub horizon: f64,
    pub solver_step: f64,
    pub time_step: Option<f64>,
    pub lattice_step: f64,
    pub direction_count: usize,
    pub k_max: usize,
    pub max_index: u32,
    pub max_radius: u32,
    pub dense_points: Vec<Vec<f64>>,
    pub error_threshold: f64,
    pub decay_ratio: f64,
    pub strong_floor: f64,
    pub seed: u64,
    pub random_fields: usize,
    pub phi_constant: Vec<f64>,
    pub bound_spatial_step: f64,
    pub bound_time_step: f64,
}

impl Default for ScenarioOverrides {
    fn default() -> Self {
        ScenarioOverrides {
            n_values: None,
            family_template: None,
            limit_field: None,
            phi_template: None,
            phi_derivative_template: None,
            phi_limit: None,
            phi_limit_derivative: None,
            phi_cells: 256,
            horizon: 1.0,
            solver_step: 1e-3,
            time_step: None,
            lattice_step: 0.25,
            direction_count: 8,
            k_max: 4,
            max_index: 2,
            max_radius: 1,
            dense_points: vec![vec![0.0]],
            error_threshold: 0.05,
            decay_ratio: 0.1,
            strong_floor: 0.5,
            seed: 7,
            random_fields: 20,
            phi_constant: vec![1.0],
            bound_spatial_step: 0.25,
            bound_time_step: 1.0 / 128.0,
        }
    }
}

/// What a scenario run produces; the CLI serializes this to `report.json`
/// and extracts `decay.csv` rows where present.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ScenarioOutput {
    Experiment(ExperimentReport),
    Ordering {
        reports: Vec<OrderingReport>,
        all_hold: bool,
    },
    Propagation(PropagationReport),
}

impl ScenarioOutput {
    pub fn passed(&self) -> bool {
        match self {
            ScenarioOutput::Experiment(r) => r.passed,
            ScenarioOutput::Ordering { all_hold, .. } => *all_hold,
            ScenarioOutput::Propagation(r) => r.holds,
        }
    }

    pub fn decay_rows(&self) -> &[DecayRow] {
        match self {
            ScenarioOutput::Experiment(r) => &r.rows,
            _ => &[],
        }
    }
}

fn default_ns(kind: ScenarioKind, o: &ScenarioOverrides) -> Vec<f64> {
    if let Some(ns) = &o.n_values {
        return ns.clone();
    }
    match kind {
        ScenarioKind::WeakVsStrong
        | ScenarioKind::DependenceSigmaD
        | ScenarioKind::DependenceSigmaThetaD => vec![4.0, 16.0, 64.0, 256.0],
        ScenarioKind::BoundPropagation => vec![32.0, 64.0, 128.0, 256.0],
        _ => vec![1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0, 256.0],
    }
}

fn seminorm_resolution(kind: ScenarioKind, o: &ScenarioOverrides) -> SeminormResolution {
    let time_step = o.time_step.unwrap_or(match kind {
        // oscillatory scenarios must resolve sin(256 t)
        ScenarioKind::WeakVsStrong
        | ScenarioKind::DependenceSigmaD
        | ScenarioKind::DependenceSigmaThetaD => 1.0 / 1024.0,
        _ => 1.0 / 256.0,
    });
    SeminormResolution {
        time_step,
        lattice_step: o.lattice_step,
        direction_count: o.direction_count,
    }
}

fn enumeration(o: &ScenarioOverrides) -> SeminormEnumeration {
    SeminormEnumeration {
        max_radius: o.max_radius,
        max_index: o.max_index,
        dense_points: o.dense_points.clone(),
        exponent: 1,
    }
}

fn bound_res(o: &ScenarioOverrides) -> BoundResolution {
    BoundResolution {
        spatial_step: o.bound_spatial_step,
        time_step: o.bound_time_step,
        refine: false,
    }
}

/// Resolution adapted to an oscillation frequency `n`: the layer spacing
/// resolves `sin(n t)` (sixteen layers per period) while staying coarse
/// enough that a path can cross at least one lattice cell per layer under
/// `theta` - otherwise the relaxation freezes every path and weak seminorms
/// of odd integrands collapse to cancellation noise instead of measuring
/// oscillatory decay.
pub fn adapted_oscillation_resolution(
    n: f64,
    theta: &ModulusSet,
    interval: &RationalInterval,
    base: &SeminormResolution,
) -> Result<SeminormResolution> {
    let period = std::f64::consts::TAU / n.max(1.0);
    let time_step = (period / 12.0).clamp(1.0 / 2048.0, 0.125);
    let theta1 = theta.entry(interval, 1)?;
    // 5% margin: landing the uniform grid on the interval end can shrink
    // the actual layer gap slightly below the requested step, and the cell
    // must stay reachable under theta at the actual gap
    let lattice_step = (0.95 * theta1.eval(time_step)).clamp(1.0 / 1024.0, 0.25);
    Ok(SeminormResolution {
        time_step,
        lattice_step,
        direction_count: base.direction_count,
    })
}

/// Builds the moduli generated by the family's `m`-bounds, then widens them
/// with the shared modulus of the initial data (zero for constant data, so
/// the widening is the identity there).
pub fn theta_for_sequence(
    fields: &FieldSequence,
    phis: &[&InitialHistory],
    o: &ScenarioOverrides,
) -> Result<ModulusSet> {
    let all: Vec<VectorField> = fields
        .members
        .iter()
        .map(|(_, f)| f.clone())
        .chain([fields.limit.clone()])
        .collect();
    let intervals: Vec<RationalInterval> = (1..=o.max_radius.max(1) as i64)
        .map(|r| RationalInterval::integers(-r, r))
        .collect();
    let j_list: Vec<u32> = (1..=(2 * o.max_index).max(2)).collect();
    let theta = moduli_from_m_bounds(
        &all,
        &j_list,
        &intervals,
        &bound_res(o),
        &ModuliOptions::default(),
    )?;
    if phis.is_empty() {
        return Ok(theta);
    }
    let paths: Vec<_> = phis.iter().map(|p| p.path.clone()).collect();
    let theta0 = shared_modulus(&paths, 64)?;
    theta.merge_with(&theta0)
}

/// Runs a named scenario with its built-in family and the given overrides.
pub fn run_scenario(kind: ScenarioKind, o: &ScenarioOverrides) -> Result<ScenarioOutput> {
    let ns = default_ns(kind, o);
    let res = seminorm_resolution(kind, o);
    let e = enumeration(o);
    let solver = SolverParams {
        step: o.solver_step,
        ..SolverParams::default()
    };
    let phi = InitialHistory::constant(o.phi_constant.clone())?;
    let data = data_from_templates(o, &ns, &phi)?;
    let custom_family = |default: FieldSequence| -> Result<FieldSequence> {
        match (&o.family_template, &o.limit_field) {
            (Some(t), Some(l)) => family_from_template(t, l, &ns),
            _ => Ok(default),
        }
    };
    let phi_refs: Vec<&InitialHistory> = data.members.iter().chain([&data.limit]).collect();

    fn make_dep_cfg<'a>(
        scenario: String,
        skind: SeminormKind,
        ctx: SeminormContext<'a>,
        e: &SeminormEnumeration,
        o: &ScenarioOverrides,
        solver: SolverParams,
    ) -> DependenceConfig<'a> {
        DependenceConfig {
            scenario,
            kind: skind,
            enumeration: e.clone(),
            k_max: o.k_max,
            ctx,
            horizon: o.horizon,
            solver,
            error_threshold: o.error_threshold,
            adapt_to_oscillation: false,
        }
    }
    macro_rules! dep_cfg {
        ($scenario:expr, $skind:expr, $ctx:expr) => {
            make_dep_cfg($scenario.into(), $skind, $ctx, &e, o, solver)
        };
    }

    match kind {
        ScenarioKind::DependenceTB | ScenarioKind::DependenceTD => {
            let fields = custom_family(offset_family(&ns))?;
            let skind = if kind == ScenarioKind::DependenceTB {
                SeminormKind::TB
            } else {
                SeminormKind::TD
            };
            let mut en = e.clone();
            if skind == SeminormKind::TD {
                en.dense_points = vec![vec![0.0, 0.0]];
            }
            let ctx = SeminormContext::new(res);
            let mut cfg = dep_cfg!(kind.name(), skind, ctx);
            cfg.enumeration = en;
            let report = continuous_dependence_experiment(&fields, &data, &cfg)?;
            Ok(ScenarioOutput::Experiment(report))
        }
        ScenarioKind::DependenceTThetaB => {
            let fields = custom_family(offset_family(&ns))?;
            let theta = theta_for_sequence(&fields, &phi_refs, o)?;
            let ctx = SeminormContext::new(res).with_theta(&theta);
            let report =
                continuous_dependence_experiment(&fields, &data, &dep_cfg!(kind.name(), SeminormKind::TThetaB, ctx))?;
            Ok(ScenarioOutput::Experiment(report))
        }
        ScenarioKind::DependenceSigmaD | ScenarioKind::DependenceSigmaThetaD => {
            let fields = custom_family(oscillating_family(&ns))?;
            let theta = theta_for_sequence(&fields, &phi_refs, o)?;
            let skind = if kind == ScenarioKind::DependenceSigmaD {
                SeminormKind::SigmaD
            } else {
                SeminormKind::SigmaThetaD
            };
            let mut en = e.clone();
            // the sigma defaults measure the j = 1 seminorm so the
            // oscillation-adapted lattices stay desk sized
            en.max_index = en.max_index.min(1);
            if skind == SeminormKind::SigmaD {
                en.dense_points = vec![vec![0.25, 0.25]];
            }
            let ctx = SeminormContext::new(res).with_theta(&theta);
            let mut cfg = dep_cfg!(kind.name(), skind, ctx);
            cfg.enumeration = en;
            cfg.adapt_to_oscillation = skind == SeminormKind::SigmaThetaD;
            let report = continuous_dependence_experiment(&fields, &data, &cfg)?;
            Ok(ScenarioOutput::Experiment(report))
        }
        ScenarioKind::DependenceC1p => {
            let fields = custom_family(offset_family(&ns))?;
            let ctx = SeminormContext::new(res);
            let report = c1p_dependence_experiment(
                &fields,
                &data,
                2,
                -1.0,
                &dep_cfg!(kind.name(), SeminormKind::TB, ctx),
            )?;
            Ok(ScenarioOutput::Experiment(report))
        }
        ScenarioKind::DependenceC11 => {
            let fields = custom_family(offset_family(&ns))?;
            let theta = theta_for_sequence(&fields, &phi_refs, o)?;
            let mut en = e.clone();
            en.dense_points = vec![vec![0.0]];
            let ctx = SeminormContext::new(res).with_theta(&theta);
            let mut cfg = dep_cfg!(kind.name(), SeminormKind::TThetaD, ctx);
            cfg.enumeration = en;
            let report = c1p_dependence_experiment(&fields, &data, 1, -1.0, &cfg)?;
            Ok(ScenarioOutput::Experiment(report))
        }
        ScenarioKind::EquivalenceLBounds => {
            let fields = custom_family(oscillating_family(&ns))?;
            let theta = theta_for_sequence(&fields, &[], o)?;
            let ctx = SeminormContext::new(res).with_theta(&theta);
            let cfg = EquivalenceConfig {
                scenario: kind.name(),
                weaker: SeminormKind::SigmaD,
                stronger: SeminormKind::SigmaTheta,
                hypothesis_bound: BoundKind::L,
                j: 1,
                r: o.max_radius as f64,
                p: 1,
                bound_res: bound_res(o),
                enumeration: SeminormEnumeration {
                    dense_points: vec![vec![0.25, 0.25]],
                    ..e.clone()
                },
                k_max: o.k_max,
                ctx,
                decay_ratio: o.decay_ratio.max(0.4),
                growth_tolerance: 2.0,
            };
            Ok(ScenarioOutput::Experiment(equivalence_experiment(&fields, &cfg)?))
        }
        ScenarioKind::EquivalenceL2Bounds => {
            let fields = custom_family(offset_family(&ns))?;
            let theta = theta_for_sequence(&fields, &phi_refs, o)?;
            let ctx = SeminormContext::new(res).with_theta(&theta);
            let cfg = EquivalenceConfig {
                scenario: kind.name(),
                weaker: SeminormKind::TThetaD,
                stronger: SeminormKind::TThetaB,
                hypothesis_bound: BoundKind::L2,
                j: 1,
                r: o.max_radius as f64,
                p: 1,
                bound_res: bound_res(o),
                enumeration: SeminormEnumeration {
                    dense_points: vec![vec![0.0]],
                    ..e.clone()
                },
                k_max: o.k_max,
                ctx,
                decay_ratio: o.decay_ratio.max(0.4),
                growth_tolerance: 2.0,
            };
            Ok(ScenarioOutput::Experiment(equivalence_experiment(&fields, &cfg)?))
        }
        ScenarioKind::TranslationContinuity => {
            let f = match &o.limit_field {
                Some(l) => VectorField::from_json(l)?,
                None => VectorField::scalar(Expr::mul(
                    Expr::sin(Expr::mul(Expr::constant(std::f64::consts::TAU), Expr::time())),
                    Expr::state(0),
                ))?,
            };
            let theta = ModulusSet::uniform(Modulus::linear(2.0 * std::f64::consts::TAU)?);
            let ctx = SeminormContext::new(res).with_theta(&theta);
            let t = 0.3;
            let seq: Vec<f64> = (1..=8).map(|n| t + 0.5_f64.powi(n)).collect();
            let report = translation_continuity_experiment(
                &f,
                t,
                &seq,
                SeminormKind::TThetaB,
                &e,
                o.k_max,
                &ctx,
                o.decay_ratio,
            )?;
            Ok(ScenarioOutput::Experiment(report))
        }
        ScenarioKind::BoundPropagation => {
            let (family, limit) = match (&o.family_template, &o.limit_field) {
                (Some(t), Some(l)) => {
                    let fs = family_from_template(t, l, &ns)?;
                    (fs.members, fs.limit)
                }
                _ => (scaling_family(&ns), VectorField::scalar(Expr::state(0))?),
            };
            let report = bound_propagation_check(
                &family,
                std::slice::from_ref(&limit),
                1,
                1.0,
                &BoundResolution {
                    refine: true,
                    ..bound_res(o)
                },
                1e-6,
            )?;
            Ok(ScenarioOutput::Propagation(report))
        }
        ScenarioKind::WeakVsStrong => {
            let fields = custom_family(oscillating_family(&ns))?;
            let theta = theta_for_sequence(&fields, &phi_refs, o)?;
            let ctx = SeminormContext::new(res).with_theta(&theta);
            let report = weak_vs_strong_experiment(
                &fields,
                SeminormKind::SigmaThetaD,
                SeminormKind::TThetaD,
                &SeminormEnumeration {
                    max_index: e.max_index.min(1),
                    ..e.clone()
                },
                o.k_max,
                &ctx,
                true,
                o.decay_ratio,
                o.strong_floor,
            )?;
            Ok(ScenarioOutput::Experiment(report))
        }
        ScenarioKind::OrderingChain => {
            let mut rng = StdRng::seed_from_u64(o.seed);
            let interval = RationalInterval::integers(0, 1);
            let mut reports = Vec::new();
            let mut all_hold = true;
            for _ in 0..o.random_fields.max(1) {
                let f = random_field(&mut rng);
                let c = rng.gen_range(0.5..2.0);
                let theta = ModulusSet::uniform(Modulus::linear(c)?);
                let theta_hat =
                    ModulusSet::uniform(Modulus::linear(c * rng.gen_range(1.0..2.0))?);
                let report = ordering_check(
                    &f,
                    &interval,
                    1,
                    1,
                    &theta,
                    &theta_hat,
                    &[0.0, 0.0],
                    &res,
                )?;
                all_hold &= report.all_hold;
                reports.push(report);
            }
            Ok(ScenarioOutput::Ordering { reports, all_hold })
        }
    }
}
