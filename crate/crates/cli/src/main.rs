//! `cdde`: bounds, seminorms, metrics, delay solves and experiments for
//! Lipschitz Carathéodory vector fields, from JSON configs to CSV/JSON
//! artifacts.

mod config;
mod output;
mod selftest;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use serde_json::Value;

use cdde_core::bounds::{
    family_report, optimal_l1_bound, optimal_l2_bound, optimal_l_bound, optimal_m_bound,
    BoundFunction,
};
use cdde_core::lab::{run_scenario, ScenarioKind, ScenarioOverrides};
use cdde_core::solver::solve;
use cdde_core::topologies::{
    metric, seminorm, seminorm_alternative, SeminormContext, SeminormKind,
};

use config::{
    parse_family, parse_field, parse_interval, BoundsConfig, DistanceConfig, HullConfig,
    SeminormConfig, SolveConfig,
};
use output::{config_hash, fmt_f64, OutputDir};

#[derive(Parser)]
#[command(
    name = "cdde",
    version,
    about = "Integral seminorm topologies and unit-delay dynamics for Caratheodory vector fields"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (default `out/`).
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads for the parallel parts; 0 keeps the library default.
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    /// Seed override for randomized scenarios.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Resolution override: time step of the subcommand's primary grid.
    #[arg(long, global = true)]
    resolution: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Optimal m/l/l1/l2 bounds of a field on balls, plus family reports.
    Bounds,
    /// Seminorm values (and argmax paths) for a list of indices.
    Seminorm,
    /// The truncated Fréchet metric between two fields.
    Distance,
    /// Solve the unit-delay problem by the method of steps.
    Solve,
    /// Pairwise metric matrix of finitely many time translates.
    Hull,
    /// Run a named experiment scenario.
    Experiment {
        #[arg(long)]
        scenario: String,
    },
    /// Run the embedded example corpus.
    Selftest,
}

enum Failure {
    Validation(anyhow::Error),
    Numerical(anyhow::Error),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.workers > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.workers)
            .build_global()
        {
            eprintln!("error: cannot configure {} workers: {e}", cli.workers);
            return ExitCode::from(2);
        }
    }
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(e)) => {
            eprintln!("validation error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(e)) => {
            eprintln!("numerical failure: {e:#}");
            ExitCode::from(3)
        }
    }
}

fn load_config(cli: &Cli) -> Result<Value> {
    let path = cli
        .config
        .as_ref()
        .context("this subcommand requires --config <path>")?;
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("invalid JSON in {}", path.display()))
}

fn dispatch(cli: &Cli) -> std::result::Result<(), Failure> {
    match &cli.command {
        Command::Selftest => selftest::run().map_err(Failure::Numerical),
        Command::Bounds => run_bounds(cli),
        Command::Seminorm => run_seminorm(cli),
        Command::Distance => run_distance(cli),
        Command::Solve => run_solve(cli),
        Command::Hull => run_hull(cli),
        Command::Experiment { scenario } => run_experiment(cli, scenario),
    }
}

fn resolved_json<T: serde::Serialize>(cfg: &T) -> Value {
    serde_json::to_value(cfg).expect("resolved config serializes")
}

fn run_bounds(cli: &Cli) -> std::result::Result<(), Failure> {
    let started = Instant::now();
    let raw = load_config(cli).map_err(Failure::Validation)?;
    let mut cfg: BoundsConfig = serde_json::from_value(raw).map_err(|e| {
        Failure::Validation(anyhow::anyhow!("bounds config does not match the schema: {e}"))
    })?;
    if let Some(h) = cli.resolution {
        cfg.time_step = h;
    }
    let field = parse_field(&cfg.field).map_err(Failure::Validation)?;
    let interval = parse_interval(&cfg.interval).map_err(Failure::Validation)?;
    let res = cfg.resolution();
    let resolved = resolved_json(&cfg);
    let out = OutputDir::create(&cli.out, config_hash(&resolved)).map_err(Failure::Validation)?;

    let mut rows: Vec<Vec<String>> = Vec::new();
    for kind in &cfg.kinds {
        for &j in &cfg.j_list {
            let bound: BoundFunction = match kind.as_str() {
                "m" => optimal_m_bound(&field, j, &interval, &res),
                "l" => optimal_l_bound(&field, j, &interval, &res),
                "l1" => optimal_l1_bound(&field, j, &interval, &res),
                "l2" => optimal_l2_bound(&field, j, &interval, &res),
                other => {
                    return Err(Failure::Validation(anyhow::anyhow!(
                        "unknown bound kind `{other}` (use m, l, l1, l2)"
                    )))
                }
            }
            .map_err(|e| Failure::Numerical(e.into()))?;
            for (t, v) in bound.times.iter().zip(&bound.values) {
                rows.push(vec![
                    kind.clone(),
                    j.to_string(),
                    fmt_f64(*t),
                    fmt_f64(*v),
                ]);
            }
        }
    }
    out.write_csv("bounds.csv", &["kind", "j", "t", "value"], &rows)
        .map_err(Failure::Numerical)?;

    // family_report.json is always emitted; defaults cover the single field
    let family = parse_family(&cfg.field, &cfg.family).map_err(Failure::Validation)?;
    let (r_list, p, eps_list) = match &cfg.report {
        Some(rc) => (rc.r_list.clone(), rc.p, rc.eps_list.clone()),
        None => (vec![1.0], field.regularity().p, vec![0.5]),
    };
    let report = family_report(&family, &cfg.j_list, &r_list, p, &eps_list, &res)
        .map_err(|e| Failure::Numerical(e.into()))?;
    out.write_json("family_report.json", &report)
        .map_err(Failure::Numerical)?;
    out.write_provenance("bounds", &resolved, started, cli.seed)
        .map_err(Failure::Numerical)?;
    println!("bounds: wrote {} rows", rows.len());
    Ok(())
}

fn run_seminorm(cli: &Cli) -> std::result::Result<(), Failure> {
    let started = Instant::now();
    let raw = load_config(cli).map_err(Failure::Validation)?;
    let mut cfg: SeminormConfig = serde_json::from_value(raw).map_err(|e| {
        Failure::Validation(anyhow::anyhow!("seminorm config does not match the schema: {e}"))
    })?;
    if let Some(h) = cli.resolution {
        cfg.resolution.time_step = h;
    }
    let field = parse_field(&cfg.field).map_err(Failure::Validation)?;
    let family = parse_family(&cfg.field, &cfg.family).map_err(Failure::Validation)?;
    let theta = cfg
        .theta
        .as_ref()
        .map(|t| t.build(&family))
        .transpose()
        .map_err(Failure::Validation)?;
    let theta_hat = cfg
        .theta_hat
        .as_ref()
        .map(|t| t.build(&family))
        .transpose()
        .map_err(Failure::Validation)?;
    let resolved = resolved_json(&cfg);
    let out = OutputDir::create(&cli.out, config_hash(&resolved)).map_err(Failure::Validation)?;

    let mut ctx = SeminormContext::new(cfg.resolution.build());
    if let Some(t) = &theta {
        ctx = ctx.with_theta(t);
    }
    if let Some(t) = &theta_hat {
        ctx = ctx.with_theta_hat(t);
    }

    let mut rows = Vec::new();
    for (i, idx_cfg) in cfg.indices.iter().enumerate() {
        let idx = idx_cfg.build().map_err(Failure::Validation)?;
        let value = if cfg.alternative {
            seminorm_alternative(&field, &idx, &ctx)
        } else {
            seminorm(&field, &idx, &ctx)
        }
        .map_err(|e| Failure::Numerical(e.into()))?;
        let argmax_file = if cfg.write_argmax && !value.argmax.is_empty() {
            let name = format!("argmax_{i:03}.csv");
            let path = &value.argmax[0];
            let mut prows = Vec::with_capacity(path.times.len());
            for (k, t) in path.times.iter().enumerate() {
                let mut row = vec![fmt_f64(*t)];
                row.extend(path.x[k].iter().map(|v| fmt_f64(*v)));
                row.extend(path.u[k].iter().map(|v| fmt_f64(*v)));
                prows.push(row);
            }
            let mut header: Vec<String> = vec!["t".into()];
            let nx = path.x.first().map_or(0, Vec::len);
            let nu = path.u.first().map_or(0, Vec::len);
            header.extend((1..=nx).map(|d| format!("x{d}")));
            header.extend((1..=nu).map(|d| format!("u{d}")));
            let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
            out.write_csv(&name, &header_refs, &prows)
                .map_err(Failure::Numerical)?;
            name
        } else {
            String::new()
        };
        let interval = parse_interval(&idx_cfg.interval).map_err(Failure::Validation)?;
        rows.push(vec![
            idx_cfg.kind.clone(),
            format!("[{}..{}]", interval.q1, interval.q2),
            idx_cfg.j.to_string(),
            idx_cfg.p.to_string(),
            idx_cfg
                .point
                .as_ref()
                .map(|p| {
                    p.iter()
                        .map(|v| fmt_f64(*v))
                        .collect::<Vec<_>>()
                        .join(";")
                })
                .unwrap_or_default(),
            fmt_f64(value.value),
            argmax_file,
        ]);
    }
    out.write_csv(
        "seminorms.csv",
        &["kind", "I", "j", "p", "x_point", "value", "argmax_path"],
        &rows,
    )
    .map_err(Failure::Numerical)?;
    out.write_provenance("seminorm", &resolved, started, cli.seed)
        .map_err(Failure::Numerical)?;
    println!("seminorm: wrote {} values", rows.len());
    Ok(())
}

fn run_distance(cli: &Cli) -> std::result::Result<(), Failure> {
    let started = Instant::now();
    let raw = load_config(cli).map_err(Failure::Validation)?;
    let mut cfg: DistanceConfig = serde_json::from_value(raw).map_err(|e| {
        Failure::Validation(anyhow::anyhow!("distance config does not match the schema: {e}"))
    })?;
    if let Some(h) = cli.resolution {
        cfg.resolution.time_step = h;
    }
    let fa = parse_field(&cfg.field_a).map_err(Failure::Validation)?;
    let fb = parse_field(&cfg.field_b).map_err(Failure::Validation)?;
    let kind = SeminormKind::parse(&cfg.kind).map_err(|e| Failure::Validation(e.into()))?;
    let family = vec![fa.clone(), fb.clone()];
    let theta = cfg
        .theta
        .as_ref()
        .map(|t| t.build(&family))
        .transpose()
        .map_err(Failure::Validation)?;
    let theta_hat = cfg
        .theta_hat
        .as_ref()
        .map(|t| t.build(&family))
        .transpose()
        .map_err(Failure::Validation)?;
    let resolved = resolved_json(&cfg);
    let out = OutputDir::create(&cli.out, config_hash(&resolved)).map_err(Failure::Validation)?;

    let mut ctx = SeminormContext::new(cfg.resolution.build());
    if let Some(t) = &theta {
        ctx = ctx.with_theta(t);
    }
    if let Some(t) = &theta_hat {
        ctx = ctx.with_theta_hat(t);
    }
    let value = metric(&fa, &fb, kind, &cfg.enumeration.build(), cfg.k_max, &ctx)
        .map_err(|e| Failure::Numerical(e.into()))?;
    out.write_json(
        "distance.json",
        &serde_json::json!({
            "kind": cfg.kind,
            "k_max": cfg.k_max,
            "value": value.value,
            "terms": value.terms,
        }),
    )
    .map_err(Failure::Numerical)?;
    out.write_provenance("distance", &resolved, started, cli.seed)
        .map_err(Failure::Numerical)?;
    println!("distance: {}", value.value);
    Ok(())
}

fn run_solve(cli: &Cli) -> std::result::Result<(), Failure> {
    let started = Instant::now();
    let raw = load_config(cli).map_err(Failure::Validation)?;
    let mut cfg: SolveConfig = serde_json::from_value(raw).map_err(|e| {
        Failure::Validation(anyhow::anyhow!("solve config does not match the schema: {e}"))
    })?;
    if let Some(h) = cli.resolution {
        cfg.step = h;
    }
    let field = parse_field(&cfg.field).map_err(Failure::Validation)?;
    let phi = cfg.phi.build().map_err(Failure::Validation)?;
    let resolved = resolved_json(&cfg);
    let out = OutputDir::create(&cli.out, config_hash(&resolved)).map_err(Failure::Validation)?;

    let traj = solve(&field, &phi, cfg.horizon, &cfg.params())
        .map_err(|e| Failure::Numerical(e.into()))?;

    let dim = traj.dim();
    let mut header: Vec<String> = vec!["t".into()];
    header.extend((1..=dim).map(|d| format!("x{d}")));
    header.extend((1..=dim).map(|d| format!("dx{d}")));
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut rows = Vec::with_capacity(traj.path.times().len());
    for (t, v) in traj.path.times().iter().zip(traj.path.values()) {
        let mut row = vec![fmt_f64(*t)];
        row.extend(v.iter().map(|c| fmt_f64(*c)));
        let deriv: Option<Vec<f64>> = if *t >= 0.0 {
            traj.derivative.at(*t).ok()
        } else {
            traj.history_derivative.as_ref().and_then(|d| d.at(*t).ok())
        };
        match deriv {
            Some(d) => row.extend(d.iter().map(|c| fmt_f64(*c))),
            None => row.extend(std::iter::repeat_n(String::new(), dim)),
        }
        rows.push(row);
    }
    out.write_csv("trajectory.csv", &header_refs, &rows)
        .map_err(Failure::Numerical)?;
    out.write_json(
        "solve_report.json",
        &serde_json::json!({
            "blow_up": traj.blow_up.is_some(),
            "b_estimate": traj.blow_up.as_ref().map(|b| b.t_estimate),
            "escape_radius": cfg.escape_radius,
            "t_reached": traj.t_reached(),
            "residual_max": traj.stats.residual_max,
            "picard_total": traj.stats.picard_total,
            "step": traj.stats.step,
        }),
    )
    .map_err(Failure::Numerical)?;
    out.write_provenance("solve", &resolved, started, cli.seed)
        .map_err(Failure::Numerical)?;
    println!(
        "solve: reached t = {}, blow_up = {}",
        traj.t_reached(),
        traj.blow_up.is_some()
    );
    Ok(())
}

fn run_hull(cli: &Cli) -> std::result::Result<(), Failure> {
    let started = Instant::now();
    let raw = load_config(cli).map_err(Failure::Validation)?;
    let mut cfg: HullConfig = serde_json::from_value(raw).map_err(|e| {
        Failure::Validation(anyhow::anyhow!("hull config does not match the schema: {e}"))
    })?;
    if let Some(h) = cli.resolution {
        cfg.resolution.time_step = h;
    }
    let field = parse_field(&cfg.field).map_err(Failure::Validation)?;
    let kind = SeminormKind::parse(&cfg.kind).map_err(|e| Failure::Validation(e.into()))?;
    let family = vec![field.clone()];
    let theta = cfg
        .theta
        .as_ref()
        .map(|t| t.build(&family))
        .transpose()
        .map_err(Failure::Validation)?;
    let theta_hat = cfg
        .theta_hat
        .as_ref()
        .map(|t| t.build(&family))
        .transpose()
        .map_err(Failure::Validation)?;
    let resolved = resolved_json(&cfg);
    let out = OutputDir::create(&cli.out, config_hash(&resolved)).map_err(Failure::Validation)?;

    let mut ctx = SeminormContext::new(cfg.resolution.build());
    if let Some(t) = &theta {
        ctx = ctx.with_theta(t);
    }
    if let Some(t) = &theta_hat {
        ctx = ctx.with_theta_hat(t);
    }
    let sample = cdde_core::lab::hull_sample(
        &field,
        &cfg.times,
        kind,
        &cfg.enumeration.build(),
        cfg.k_max,
        &ctx,
    )
    .map_err(|e| Failure::Numerical(e.into()))?;
    out.write_json("hull.json", &sample).map_err(Failure::Numerical)?;
    out.write_provenance("hull", &resolved, started, cli.seed)
        .map_err(Failure::Numerical)?;
    println!("hull: {} translates", sample.times.len());
    Ok(())
}

fn run_experiment(cli: &Cli, scenario: &str) -> std::result::Result<(), Failure> {
    let started = Instant::now();
    let kind = ScenarioKind::parse(scenario).map_err(|e| Failure::Validation(e.into()))?;
    let mut overrides: ScenarioOverrides = match &cli.config {
        Some(_) => {
            let raw = load_config(cli).map_err(Failure::Validation)?;
            serde_json::from_value(raw).map_err(|e| {
                Failure::Validation(anyhow::anyhow!("experiment config does not match the schema: {e}"))
            })?
        }
        None => ScenarioOverrides::default(),
    };
    if let Some(seed) = cli.seed {
        overrides.seed = seed;
    }
    if let Some(h) = cli.resolution {
        overrides.solver_step = h;
    }
    let resolved = serde_json::json!({
        "scenario": scenario,
        "overrides": overrides,
    });
    let out = OutputDir::create(&cli.out, config_hash(&resolved)).map_err(Failure::Validation)?;

    let output = run_scenario(kind, &overrides).map_err(|e| Failure::Numerical(e.into()))?;
    let rows: Vec<Vec<String>> = output
        .decay_rows()
        .iter()
        .map(|r| {
            vec![
                fmt_f64(r.n),
                fmt_f64(r.field_distance),
                fmt_f64(r.data_distance),
                fmt_f64(r.solution_error),
                r.norm_kind.clone(),
            ]
        })
        .collect();
    out.write_csv(
        "decay.csv",
        &["n", "field_distance", "data_distance", "solution_error", "norm_kind"],
        &rows,
    )
    .map_err(Failure::Numerical)?;
    out.write_json("report.json", &output).map_err(Failure::Numerical)?;
    out.write_provenance("experiment", &resolved, started, Some(overrides.seed))
        .map_err(Failure::Numerical)?;
    println!(
        "experiment {scenario}: {} ({} decay rows)",
        if output.passed() { "PASS" } else { "FAIL" },
        rows.len()
    );
    Ok(())
}
