//! The embedded self-test corpus: quick closed-form checks of every module,
//! printed one line each.

use anyhow::{bail, Result};

use cdde_core::model::{merge_moduli, shared_modulus, Modulus, ModulusSet, SampledPath};
use cdde_core::model::{Expr, RationalInterval, VectorField};
use cdde_core::solver::{solve, InitialHistory, SolverParams};
use cdde_core::topologies::{
    metric, seminorm, SeminormContext, SeminormEnumeration, SeminormIndex, SeminormKind,
    SeminormResolution,
};

type Check = (&'static str, fn() -> Result<()>);

fn approx(a: f64, b: f64, tol: f64, what: &str) -> Result<()> {
    if (a - b).abs() > tol {
        bail!("{what}: {a} vs {b} (tolerance {tol})");
    }
    Ok(())
}

fn projection_evaluates() -> Result<()> {
    let f = VectorField::scalar(Expr::delayed(0))?;
    approx(f.eval(0.3, &[2.0], &[5.0])?[0], 5.0, 0.0, "f = u at u = 5")
}

fn sum_evaluates() -> Result<()> {
    let f = VectorField::scalar(Expr::add(Expr::state(0), Expr::delayed(0)))?;
    approx(f.eval(0.0, &[1.0], &[1.0])?[0], 2.0, 0.0, "f = x + u")
}

fn branch_selects() -> Result<()> {
    let pw = Expr::piecewise(vec![0.5], vec![Expr::constant(1.0), Expr::constant(2.0)])?;
    let f = VectorField::scalar(Expr::mul(pw, Expr::delayed(0)))?;
    approx(f.eval(0.7, &[0.0], &[3.0])?[0], 6.0, 0.0, "piecewise branch")
}

fn translate_identity() -> Result<()> {
    let f = VectorField::scalar(Expr::mul(Expr::cos(Expr::time()), Expr::state(0)))?;
    let g = f.translate(0.0);
    for k in 0..10 {
        let t = k as f64 * 0.37 - 1.5;
        approx(
            f.eval(t, &[0.4], &[0.0])?[0],
            g.eval(t, &[0.4], &[0.0])?[0],
            0.0,
            "translate(f, 0)",
        )?;
    }
    Ok(())
}

fn difference_vanishes() -> Result<()> {
    let f = VectorField::scalar(Expr::mul(Expr::sin(Expr::time()), Expr::delayed(0)))?;
    let d = f.difference(&f)?;
    approx(d.eval(1.2, &[0.3], &[-0.7])?[0], 0.0, 0.0, "f - f")
}

fn merge_is_idempotent() -> Result<()> {
    let m = Modulus::linear(1.5)?;
    let merged = merge_moduli(&m, &m)?;
    approx(merged.eval(0.5), 0.75, 1e-12, "merge(theta, theta)(0.5)")
}

fn shared_modulus_of_constant_is_zero() -> Result<()> {
    let p = SampledPath::constant(0.0, 1.0, vec![3.0])?;
    let theta0 = shared_modulus(&[p], 8)?;
    approx(theta0.eval(0.7), 0.0, 0.0, "theta0 of a constant path")
}

fn zero_field_seminorms_vanish() -> Result<()> {
    let f = VectorField::scalar(Expr::constant(0.0))?;
    let theta = ModulusSet::uniform(Modulus::linear(1.0)?);
    let ctx = SeminormContext::new(SeminormResolution {
        time_step: 1.0 / 16.0,
        lattice_step: 0.5,
        direction_count: 2,
    })
    .with_theta(&theta);
    let idx = SeminormIndex::new(SeminormKind::TTheta, RationalInterval::integers(0, 1), 1, 1);
    approx(seminorm(&f, &idx, &ctx)?.value, 0.0, 0.0, "p(0)")
}

fn solver_keeps_constants() -> Result<()> {
    let f = VectorField::scalar(Expr::constant(0.0))?;
    let phi = InitialHistory::constant(vec![4.0])?;
    let traj = solve(&f, &phi, 1.0, &SolverParams { step: 0.05, ..SolverParams::default() })?;
    approx(traj.path.at(1.0)?[0], 4.0, 0.0, "x' = 0")
}

fn segment_at_zero_is_phi() -> Result<()> {
    let f = VectorField::scalar(Expr::delayed(0))?;
    let phi = InitialHistory::constant(vec![1.0])?;
    let traj = solve(&f, &phi, 1.0, &SolverParams { step: 0.05, ..SolverParams::default() })?;
    let seg = traj.segment(0.0)?;
    approx(seg.at(-0.5)?[0], 1.0, 1e-9, "segment(0) = phi")
}

fn metric_of_identical_fields_is_zero() -> Result<()> {
    let f = VectorField::scalar(Expr::mul(Expr::sin(Expr::time()), Expr::state(0)))?;
    let theta = ModulusSet::uniform(Modulus::linear(1.0)?);
    let ctx = SeminormContext::new(SeminormResolution {
        time_step: 1.0 / 16.0,
        lattice_step: 0.5,
        direction_count: 2,
    })
    .with_theta(&theta);
    let d = metric(
        &f,
        &f,
        SeminormKind::TTheta,
        &SeminormEnumeration::default(),
        2,
        &ctx,
    )?;
    approx(d.value, 0.0, 0.0, "d(f, f)")
}

pub fn run() -> Result<()> {
    let checks: &[Check] = &[
        ("evaluate projection", projection_evaluates),
        ("evaluate sum", sum_evaluates),
        ("evaluate piecewise branch", branch_selects),
        ("translate identity", translate_identity),
        ("difference of field with itself", difference_vanishes),
        ("merge moduli idempotence", merge_is_idempotent),
        ("shared modulus of constant path", shared_modulus_of_constant_is_zero),
        ("seminorms of the zero field", zero_field_seminorms_vanish),
        ("solver keeps constants", solver_keeps_constants),
        ("segment at zero is the initial data", segment_at_zero_is_phi),
        ("metric of identical fields", metric_of_identical_fields_is_zero),
    ];
    let mut failures = 0;
    for (name, check) in checks {
        match check() {
            Ok(()) => println!("selftest {name}: PASS"),
            Err(e) => {
                println!("selftest {name}: FAIL ({e})");
                failures += 1;
            }
        }
    }
    if failures > 0 {
        bail!("{failures} selftest checks failed");
    }
    Ok(())
}
