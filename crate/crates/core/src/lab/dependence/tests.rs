use super::*;
use crate::bounds::{moduli_from_m_bounds, ModuliOptions};
use crate::lab::{offset_family, oscillating_family};
use crate::model::Expr;
use crate::topologies::seminorm::SeminormResolution;

fn quick_cfg<'a>(
    scenario: &str,
    kind: SeminormKind,
    ctx: SeminormContext<'a>,
    horizon: f64,
    threshold: f64,
) -> DependenceConfig<'a> {
    DependenceConfig {
        scenario: scenario.into(),
        kind,
        enumeration: SeminormEnumeration::default(),
        k_max: 2,
        ctx,
        horizon,
        solver: SolverParams {
            step: 1e-3,
            ..SolverParams::default()
        },
        error_threshold: threshold,
        adapt_to_oscillation: false,
    }
}

#[test]
fn identical_sequence_has_zero_errors() {
    let f = VectorField::scalar(Expr::delayed(0)).unwrap();
    let fields = FieldSequence {
        members: vec![(1.0, f.clone()), (2.0, f.clone())],
        limit: f,
    };
    let data = DataSequence::constant(InitialHistory::constant(vec![1.0]).unwrap());
    let res = SeminormResolution {
        time_step: 1.0 / 32.0,
        lattice_step: 0.5,
        direction_count: 4,
    };
    let cfg = quick_cfg("dependence_TB", SeminormKind::TB, SeminormContext::new(res), 1.0, 0.05);
    let report = continuous_dependence_experiment(&fields, &data, &cfg).unwrap();
    assert!(report.passed, "{:#?}", report.verdicts);
    for row in &report.rows {
        assert_eq!(row.field_distance, 0.0);
        assert_eq!(row.solution_error, 0.0);
    }
}

#[test]
fn offset_sequence_error_matches_hand_solution() {
    // x_n(t) = 1 + t + t/n on [0, 1]: sup error over [-1, 1] is exactly 1/n
    let ns: Vec<f64> = (1..=8).map(f64::from).collect();
    let fields = offset_family(&ns);
    let data = DataSequence::constant(InitialHistory::constant(vec![1.0]).unwrap());
    let res = SeminormResolution {
        time_step: 1.0 / 64.0,
        lattice_step: 0.5,
        direction_count: 4,
    };
    let cfg = quick_cfg("dependence_TB", SeminormKind::TB, SeminormContext::new(res), 1.0, 0.2);
    let report = continuous_dependence_experiment(&fields, &data, &cfg).unwrap();
    let h = cfg.solver.step;
    for (row, n) in report.rows.iter().zip(&ns) {
        assert!(
            (row.solution_error - 1.0 / n).abs() <= 5.0 * h,
            "n = {n}: error {} vs 1/n = {}",
            row.solution_error,
            1.0 / n
        );
        // TB distance of the constant difference 1/n on [-1, 1] is
        // normalized 2/n; just require decay proportional to 1/n
        assert!(row.field_distance > 0.0);
    }
    assert!(report.passed, "{:#?}", report.verdicts);
}

#[test]
fn blowing_up_limit_requests_smaller_horizon() {
    let sq = VectorField::scalar(Expr::mul(Expr::state(0), Expr::state(0))).unwrap();
    let fields = FieldSequence {
        members: vec![(1.0, sq.clone())],
        limit: sq,
    };
    let data = DataSequence::constant(InitialHistory::constant(vec![1.0]).unwrap());
    let res = SeminormResolution {
        time_step: 1.0 / 32.0,
        lattice_step: 0.5,
        direction_count: 4,
    };
    let cfg = quick_cfg("dependence_TB", SeminormKind::TB, SeminormContext::new(res), 2.0, 0.05);
    assert!(matches!(
        continuous_dependence_experiment(&fields, &data, &cfg),
        Err(CoreError::HorizonPastBlowUp { .. })
    ));
}

#[test]
fn oscillating_scenario_under_sigma_theta_d() {
    // small-n smoke version of the weak-dependence scenario
    let ns = [4.0, 16.0, 64.0];
    let fields = oscillating_family(&ns);
    let all: Vec<VectorField> = fields
        .members
        .iter()
        .map(|(_, f)| f.clone())
        .chain([fields.limit.clone()])
        .collect();
    let theta = moduli_from_m_bounds(
        &all,
        &[1, 2],
        &[RationalInterval::integers(-1, 1)],
        &BoundResolution {
            spatial_step: 0.25,
            time_step: 1.0 / 128.0,
            refine: false,
        },
        &ModuliOptions::default(),
    )
    .unwrap();
    let res = SeminormResolution {
        time_step: 1.0 / 512.0,
        lattice_step: 0.25,
        direction_count: 4,
    };
    let ctx = SeminormContext::new(res).with_theta(&theta);
    let mut cfg = quick_cfg(
        "dependence_sigmaThetaD",
        SeminormKind::SigmaThetaD,
        ctx,
        1.0,
        0.25,
    );
    cfg.adapt_to_oscillation = true;
    let data = DataSequence::constant(InitialHistory::constant(vec![1.0]).unwrap());
    let report = continuous_dependence_experiment(&fields, &data, &cfg).unwrap();
    // field distances decay and the solution error follows
    let d: Vec<f64> = report.rows.iter().map(|r| r.field_distance).collect();
    assert!(d[2] < d[0], "distances {d:?}");
    assert!(report.passed, "{:#?} rows {:#?}", report.verdicts, report.rows);
}

#[test]
fn c1p_error_of_offset_sequence_is_two_over_n() {
    // derivative gap 1/n on [0,1] plus sup gap 1/n gives C^{1,2} error 2/n
    let ns: Vec<f64> = vec![1.0, 2.0, 4.0, 8.0];
    let fields = offset_family(&ns);
    let data = DataSequence::constant(InitialHistory::constant(vec![1.0]).unwrap());
    let res = SeminormResolution {
        time_step: 1.0 / 64.0,
        lattice_step: 0.5,
        direction_count: 4,
    };
    let cfg = quick_cfg("dependence_C1p", SeminormKind::TB, SeminormContext::new(res), 1.0, 0.5);
    let report = c1p_dependence_experiment(&fields, &data, 2, -1.0, &cfg).unwrap();
    let h = cfg.solver.step;
    for (row, n) in report.rows.iter().zip(&ns) {
        assert!(
            (row.solution_error - 2.0 / n).abs() <= 10.0 * h,
            "n = {n}: C12 error {} vs {}",
            row.solution_error,
            2.0 / n
        );
    }
}

#[test]
fn c1p_variant_on_positive_times_ignores_rough_initial_data() {
    // phi_n = cos(n t) / n converges uniformly while its derivative
    // -sin(n t) does not converge at all; the [0, T] norm still decays
    let f = VectorField::scalar(Expr::state(0)).unwrap();
    let ns = [4.0, 16.0, 64.0];
    let mut members = Vec::new();
    for &n in &ns {
        let phi = InitialHistory::from_fns(
            256,
            |t| vec![(n * t).cos() / n],
            Some(|t: f64| vec![-(n * t).sin()]),
        )
        .unwrap();
        members.push(phi);
    }
    let limit_phi = InitialHistory::constant(vec![0.0]).unwrap();
    let fields = FieldSequence {
        members: ns.iter().map(|&n| (n, f.clone())).collect(),
        limit: f.clone(),
    };
    let data = DataSequence {
        members,
        limit: limit_phi,
    };
    let res = SeminormResolution {
        time_step: 1.0 / 32.0,
        lattice_step: 0.5,
        direction_count: 4,
    };
    let cfg = quick_cfg("dependence_C1p_0T", SeminormKind::TB, SeminormContext::new(res), 1.0, 0.1);
    let report = c1p_dependence_experiment(&fields, &data, 2, 0.0, &cfg).unwrap();
    let errs: Vec<f64> = report.rows.iter().map(|r| r.solution_error).collect();
    assert!(errs[2] < errs[0], "errors {errs:?}");
    assert!(errs[2] < 0.1, "final error {}", errs[2]);
}

#[test]
fn gronwall_bound_covers_pure_data_continuity() {
    // f_n = f, phi_n -> phi: error <= exp(int l) * ||phi_n - phi|| + grid slack
    let f = VectorField::scalar(Expr::add(
        Expr::mul(Expr::constant(0.5), Expr::state(0)),
        Expr::mul(Expr::constant(0.25), Expr::delayed(0)),
    ))
    .unwrap();
    let horizon = 2.0;
    let solver = SolverParams { step: 1e-3, ..SolverParams::default() };
    let limit_phi = InitialHistory::constant(vec![1.0]).unwrap();
    let limit_traj = solve(&f, &limit_phi, horizon, &solver).unwrap();
    let c = gronwall_constant(
        &f,
        2,
        horizon,
        &BoundResolution {
            spatial_step: 0.25,
            time_step: 1.0 / 64.0,
            refine: true,
        },
    )
    .unwrap();
    for eps in [0.5, 0.1, 0.01] {
        let phi = InitialHistory::constant(vec![1.0 + eps]).unwrap();
        let traj = solve(&f, &phi, horizon, &solver).unwrap();
        let err = sup_error_on(-1.0, horizon, &traj, &limit_traj).unwrap();
        assert!(
            err <= c * eps + 10.0 * solver.step,
            "eps = {eps}: error {err} vs gronwall {c} * eps = {}",
            c * eps
        );
    }
}

#[test]
fn weak_vs_strong_separation_smoke() {
    let ns = [4.0, 16.0, 64.0];
    let fields = oscillating_family(&ns);
    let all: Vec<VectorField> = fields
        .members
        .iter()
        .map(|(_, f)| f.clone())
        .chain([fields.limit.clone()])
        .collect();
    let theta = moduli_from_m_bounds(
        &all,
        &[1, 2],
        &[RationalInterval::integers(-1, 1)],
        &BoundResolution {
            spatial_step: 0.25,
            time_step: 1.0 / 128.0,
            refine: false,
        },
        &ModuliOptions::default(),
    )
    .unwrap();
    let res = SeminormResolution {
        time_step: 1.0 / 512.0,
        lattice_step: 0.25,
        direction_count: 4,
    };
    let ctx = SeminormContext::new(res).with_theta(&theta);
    let report = weak_vs_strong_experiment(
        &fields,
        SeminormKind::SigmaThetaD,
        SeminormKind::TThetaD,
        &SeminormEnumeration {
            max_index: 1,
            dense_points: vec![vec![0.0]],
            ..SeminormEnumeration::default()
        },
        2,
        &ctx,
        true,
        0.35,
        0.5,
    )
    .unwrap();
    assert!(report.passed, "{:#?}", report.verdicts);
}

