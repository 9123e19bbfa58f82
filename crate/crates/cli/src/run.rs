//! Executes a validated config by composing the library modules.

use serde_json::{json, Value};

use lie_homog::effective::{check_projection_validity, peter_weyl_check, EffectiveGenerator};
use lie_homog::reductive::{casimir, invariant_components, isotypic_decompose, IsotypicComponent};
use lie_homog::sim::{
    check_budget, fit_step, integrate_fast_h, integrate_group_sde, integrate_slow_ode_stream,
    simulate_effective, step_rule, MultiscaleSystem, SimConfig, TrajectoryBatch, DEFAULT_H,
};
use lie_homog::verify::{
    batch_moments, battery, centring_check, effective_for, pathwise_split_test, rate_sweep,
    LimitExperiment,
};
use lie_homog::{make_group, AlgebraVector, Error, GroupId, GroupSpec};

use crate::config::{ExperimentConfig, Generators, Kind, SchemeName, Store};
use crate::report::{count, estimate, exact, exact_list, mc, Cell, Csv, Obj};

/// Default Haar sample count for coefficients, centring and orthogonality.
pub const DEFAULT_SAMPLES: usize = 100_000;

/// Default step of the effective simulation.
pub const DEFAULT_EFFECTIVE_DT: f64 = 1e-3;

/// Smallest per-step ratio of the split test that counts as convergence.
pub const SPLIT_MIN_RATIO: f64 = 1.3;

pub struct Outcome {
    pub report: Value,
    pub verdict: bool,
    pub tables: Vec<Csv>,
    /// Human-readable summary for stdout.
    pub summary: String,
}

#[derive(Debug)]
pub enum RunError {
    Config(String),
    Budget(String),
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        match e {
            Error::BudgetExceeded { .. } | Error::HorizonGuard { .. } => {
                RunError::Budget(e.to_string())
            }
            other => RunError::Config(other.to_string()),
        }
    }
}

type Res<T> = Result<T, RunError>;

fn missing(key: &str) -> RunError {
    RunError::Config(format!("missing required key: {key}"))
}

fn group(name: &str) -> Res<GroupSpec> {
    Ok(make_group(GroupId::parse(name)?)?)
}

fn single_group(cfg: &ExperimentConfig) -> Res<GroupSpec> {
    group(cfg.group.names()[0])
}

fn generators(cfg: &ExperimentConfig, spec: &GroupSpec) -> Res<Vec<AlgebraVector>> {
    match &cfg.generators {
        None | Some(Generators::Named(_)) => {
            Ok((0..spec.dim_h()).map(|i| spec.basis_vector(i)).collect())
        }
        Some(Generators::Indices(idx)) => idx
            .iter()
            .map(|&i| {
                if i < spec.dim_h() {
                    Ok(spec.basis_vector(i))
                } else {
                    Err(RunError::Config(format!(
                        "generator index {i} out of range for dim h = {}",
                        spec.dim_h()
                    )))
                }
            })
            .collect(),
    }
}

fn system(cfg: &ExperimentConfig, spec: &GroupSpec, epsilon: f64) -> Res<MultiscaleSystem> {
    let y0 = spec.m_vector(cfg.y0.as_deref().ok_or_else(|| missing("Y0"))?)?;
    let a0 = cfg.a0.as_deref().map(|c| spec.h_vector(c)).transpose()?;
    let gens = generators(cfg, spec)?;
    Ok(MultiscaleSystem::new(
        spec.clone(),
        epsilon,
        gens,
        a0,
        y0,
        None,
    )?)
}

fn samples(cfg: &ExperimentConfig) -> usize {
    cfg.samples.unwrap_or(DEFAULT_SAMPLES)
}

fn h_rule(cfg: &ExperimentConfig) -> f64 {
    cfg.dt_rule.map_or(DEFAULT_H, |r| r.h)
}

fn matrix(m: &nalgebra::DMatrix<f64>, cell: impl Fn(usize, usize) -> Value) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| cell(i, j)).collect()))
            .collect(),
    )
}

pub fn run(cfg: &ExperimentConfig) -> Res<Outcome> {
    let mut out = match cfg.experiment {
        Kind::Decompose => decompose(cfg)?,
        Kind::Coeffs => coeffs(cfg)?,
        Kind::Simulate => simulate(cfg)?,
        Kind::VerifyLimit => verify_limit(cfg)?,
        Kind::SplitTest => split_test(cfg)?,
        Kind::Rate => rate(cfg)?,
    };
    out.report = Obj::new()
        .put("experiment", cfg.experiment.as_str())
        .put("seed", count(cfg.seed as usize))
        .put("verdict", out.verdict)
        .put("result", out.report)
        .done();
    Ok(out)
}

fn component_json(c: &IsotypicComponent) -> Value {
    Obj::new()
        .put("lambda", exact(c.lambda))
        .put("dim", count(c.dim()))
        .put("is_fixed_space", c.is_fixed_space)
        .put(
            "basis",
            Value::Array(c.basis.iter().map(|v| exact_list(v.as_slice())).collect()),
        )
        .done()
}

fn decompose(cfg: &ExperimentConfig) -> Res<Outcome> {
    let names = cfg.group.names();
    if cfg.y0.is_some() && names.len() > 1 {
        return Err(RunError::Config("Y0 needs a single group".into()));
    }
    let n = samples(cfg);
    let mut verdict = true;
    let mut groups = Vec::new();
    let mut table = Csv::new(
        "components",
        &["group", "component", "lambda", "dim", "is_fixed_space"],
    );
    let mut summary = format!(
        "{:<20} {:>22} {:>5} {:>6}\n",
        "group", "lambda", "dim", "fixed"
    );
    for name in names {
        let spec = group(name)?;
        let full = matches!(cfg.generators, None | Some(Generators::Named(_))) && cfg.a0.is_none();
        let comps = if full {
            invariant_components(&spec)?
        } else {
            let gens = generators(cfg, &spec)?;
            let drift = cfg.a0.as_deref().map(|c| spec.h_vector(c)).transpose()?;
            isotypic_decompose(&casimir(&gens, drift.as_ref(), &spec)?)?
        };
        for (k, c) in comps.iter().enumerate() {
            table.row(&[
                Cell::S(&spec.name()),
                Cell::U(k),
                Cell::F(c.lambda),
                Cell::U(c.dim()),
                Cell::S(if c.is_fixed_space { "true" } else { "false" }),
            ]);
            summary += &format!(
                "{:<20} {:>22.17} {:>5} {:>6}\n",
                spec.name(),
                c.lambda,
                c.dim(),
                c.is_fixed_space
            );
        }
        let mut entry = Obj::new().put("group", spec.name()).put(
            "components",
            Value::Array(comps.iter().map(component_json).collect()),
        );
        if let Some(y0) = &cfg.y0 {
            let y0 = spec.m_vector(y0)?;
            let c = centring_check(&y0, &spec, n, cfg.seed)?;
            verdict &= c.pass;
            summary += &format!(
                "centring: deviation {:.3e}, bound {:.3e}, exact {}, pass {}\n",
                c.deviation, c.bound, c.exact, c.pass
            );
            entry = entry.put(
                "centring",
                Obj::new()
                    .put(
                        "mean",
                        Value::Array(c.mean.iter().map(|&e| estimate(e)).collect()),
                    )
                    .put("expected", exact_list(&c.expected))
                    .put("deviation", exact(c.deviation))
                    .put("bound", exact(c.bound))
                    .put("exact", c.exact)
                    .put("pass", c.pass)
                    .done(),
            );
        }
        if cfg.peter_weyl.unwrap_or(false) {
            let tol = 4.0 / (n as f64).sqrt();
            let mut checks = Vec::new();
            for c in comps.iter().filter(|c| !c.is_fixed_space) {
                let r = peter_weyl_check(c, &spec, n, cfg.seed);
                let pass = r.max_deviation <= tol;
                verdict &= pass;
                summary += &format!(
                    "orthogonality (dim {}): max deviation {:.3e}, tolerance {:.3e}, pass {}\n",
                    r.dim, r.max_deviation, tol, pass
                );
                checks.push(
                    Obj::new()
                        .put("lambda", exact(c.lambda))
                        .put("dim", count(r.dim))
                        .put("samples", count(r.samples))
                        .put("max_deviation", exact(r.max_deviation))
                        .put("tolerance", exact(tol))
                        .put("pass", pass)
                        .done(),
                );
            }
            entry = entry.put("peter_weyl", Value::Array(checks));
        }
        groups.push(entry.done());
    }
    Ok(Outcome {
        report: json!({ "groups": groups }),
        verdict,
        tables: vec![table],
        summary,
    })
}

fn generator_json(gen: &EffectiveGenerator, spec: &GroupSpec) -> Value {
    let validity: Vec<Value> = gen
        .components
        .iter()
        .map(|c| {
            let v = check_projection_validity(spec, c);
            Obj::new()
                .put("lambda", exact(c.lambda))
                .put("trace_ad_zero", v.trace_ad_zero)
                .put("naturally_reductive", v.naturally_reductive)
                .put("u_trace_zero", v.u_trace_zero)
                .put("max_trace_ad", exact(v.max_trace_ad))
                .put("max_reductive_defect", exact(v.max_reductive_defect))
                .put("max_u_trace", exact(v.max_u_trace))
                .done()
        })
        .collect();
    let d = gen.dim();
    // scale 2c = 2 tr(a)/d, so its SE is that of the trace
    let scale = gen.projected_scale.map(|s| match gen.trace.se {
        None => exact(s),
        Some(se) => mc(s, 2.0 * se / d as f64),
    });
    Obj::new()
        .put("route", serde_json::to_value(gen.route).unwrap())
        .put("classification", classification_json(gen))
        .put("a", matrix(&gen.a, |i, j| estimate(gen.entry(i, j))))
        .put(
            "a_raw",
            matrix(&gen.a_raw, |i, j| estimate(gen.raw_entry(i, j))),
        )
        .put(
            "basis",
            matrix(&gen.basis.transpose(), |i, j| exact(gen.basis[(j, i)])),
        )
        .put("lambdas", exact_list(&gen.lambdas))
        .put("y0_coords", exact_list(gen.y0_coords.as_slice()))
        .put("trace", estimate(gen.trace))
        .put("predicted_trace", exact(gen.predicted_trace()))
        .put("projected_scale", scale.unwrap_or(Value::Null))
        .put("samples", count(gen.samples))
        .put("validity", Value::Array(validity))
        .done()
}

fn classification_json(gen: &EffectiveGenerator) -> Value {
    use lie_homog::effective::Classification::*;
    match gen.classification {
        Isotropic { c } => json!({ "kind": "isotropic", "c": exact(c) }),
        Diagonal => json!({ "kind": "diagonal" }),
        General => json!({ "kind": "general" }),
    }
}

fn coefficient_table(gen: &EffectiveGenerator) -> Csv {
    let mut t = Csv::new("coefficients", &["i", "j", "a", "se", "a_raw", "se_raw"]);
    for i in 0..gen.dim() {
        for j in 0..gen.dim() {
            let (e, r) = (gen.entry(i, j), gen.raw_entry(i, j));
            t.row(&[
                Cell::U(i),
                Cell::U(j),
                Cell::F(e.value),
                Cell::F(e.se_or_zero()),
                Cell::F(r.value),
                Cell::F(r.se_or_zero()),
            ]);
        }
    }
    t
}

fn coeffs(cfg: &ExperimentConfig) -> Res<Outcome> {
    let spec = single_group(cfg)?;
    let sys = system(cfg, &spec, 1.0)?;
    let (gen, _sde) = effective_for(&sys, samples(cfg), cfg.seed)?;
    let verdict = gen.trace.within(gen.predicted_trace(), 4.0);
    let summary = format!(
        "route {:?}, classification {:?}\na = {}trace {:.6} (predicted {:.6}), pass {}\n",
        gen.route,
        gen.classification,
        gen.a,
        gen.trace.value,
        gen.predicted_trace(),
        verdict
    );
    Ok(Outcome {
        report: generator_json(&gen, &spec),
        verdict,
        tables: vec![coefficient_table(&gen)],
        summary,
    })
}

fn record_times(cfg: &ExperimentConfig, horizon: f64) -> Vec<f64> {
    let mut rec = vec![0.0];
    for &t in cfg.t_list.as_deref().unwrap_or(&[]) {
        if t > 0.0 && t < horizon {
            rec.push(t);
        }
    }
    rec.push(horizon);
    rec.sort_by(f64::total_cmp);
    rec.dedup();
    rec
}

fn simulate(cfg: &ExperimentConfig) -> Res<Outcome> {
    let spec = single_group(cfg)?;
    let eps = cfg.epsilon.ok_or_else(|| missing("epsilon"))?;
    let horizon = cfg.horizon.ok_or_else(|| missing("T"))?;
    let n_traj = cfg.n_traj.ok_or_else(|| missing("n_traj"))?;
    let scheme = cfg.scheme.ok_or_else(|| missing("scheme"))?;
    let store = cfg.store.unwrap_or_default();
    let sys = system(cfg, &spec, eps)?;
    let rec = record_times(cfg, horizon);
    let h = h_rule(cfg);
    // multiscale schemes integrate to T/ε and report at slow times
    let slow = |dt: f64| -> Res<SimConfig> {
        let scaled: Vec<f64> = rec.iter().map(|t| t / eps).collect();
        Ok(
            SimConfig::new(fit_step(dt, &scaled), horizon / eps, n_traj, cfg.seed)
                .record(&scaled)
                .store_group(store == Store::Group),
        )
    };
    let budget =
        |c: &SimConfig| -> Res<()> { Ok(check_budget(c.steps()? as f64 * n_traj as f64)?) };
    let batch: TrajectoryBatch = match scheme {
        SchemeName::GroupSde | SchemeName::SlowOde | SchemeName::SlowOdeMidpoint => {
            let c = slow(step_rule(eps, h))?;
            budget(&c)?;
            let b = match scheme {
                SchemeName::GroupSde => integrate_group_sde(&sys, &c)?,
                SchemeName::SlowOde => integrate_slow_ode_stream(&sys, &c, false)?,
                _ => integrate_slow_ode_stream(&sys, &c, true)?,
            };
            b.rescale_time(eps)
        }
        SchemeName::Effective => {
            let (_, sde) = effective_for(&sys, samples(cfg), cfg.seed)?;
            let c = SimConfig::new(
                fit_step(cfg.effective_dt.unwrap_or(DEFAULT_EFFECTIVE_DT), &rec),
                horizon,
                n_traj,
                cfg.seed,
            )
            .record(&rec)
            .store_group(store == Store::Group);
            budget(&c)?;
            simulate_effective(&sde, &spec, &sys.g0, &c)?
        }
        SchemeName::FastH => {
            let c = SimConfig::new(fit_step(step_rule(1.0, h), &rec), horizon, n_traj, cfg.seed)
                .record(&rec)
                .store_group(store == Store::Group);
            budget(&c)?;
            integrate_fast_h(&spec, &sys.generators, &sys.a0, &c)?
        }
    };

    let fns = battery(batch.width);
    let mut moments = Vec::new();
    let mut mtable = Csv::new("moments", &["t", "function", "mean", "se"]);
    for (ti, &t) in batch.times.iter().enumerate() {
        let est = batch_moments(&batch, ti, &fns);
        let mut row = Obj::new().put("t", exact(t));
        for (f, e) in fns.iter().zip(&est) {
            row = row.put(&f.name(), estimate(*e));
            mtable.row(&[
                Cell::F(t),
                Cell::S(&f.name()),
                Cell::F(e.value),
                Cell::F(e.se_or_zero()),
            ]);
        }
        moments.push(row.done());
    }
    let mut tables = vec![mtable];
    if store != Store::Summary {
        let mut header = vec!["traj".to_string(), "t".to_string()];
        header.extend((0..batch.width).map(|i| format!("x{i}")));
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        let mut tr = Csv::new("trajectories", &header);
        for traj in 0..batch.n_traj {
            for (ti, &t) in batch.times.iter().enumerate() {
                let mut cells = vec![Cell::U(traj), Cell::F(t)];
                cells.extend(batch.point(traj, ti).iter().map(|&x| Cell::F(x)));
                tr.row(&cells);
            }
        }
        tables.push(tr);
    }
    if store == Store::Group {
        let n = spec.ambient_dim();
        let mut header = vec!["traj".to_string(), "t".to_string()];
        for i in 0..n {
            for j in 0..n {
                header.push(format!("g{i}{j}_re"));
                header.push(format!("g{i}{j}_im"));
            }
        }
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        let mut gt = Csv::new("group", &header);
        for traj in 0..batch.n_traj {
            for (ti, &t) in batch.times.iter().enumerate() {
                let g = batch.group_point(traj, ti).expect("group points stored");
                let mut cells = vec![Cell::U(traj), Cell::F(t)];
                for i in 0..n {
                    for j in 0..n {
                        cells.push(Cell::F(g[(i, j)].re));
                        cells.push(Cell::F(g[(i, j)].im));
                    }
                }
                gt.row(&cells);
            }
        }
        tables.push(gt);
    }
    let report = Obj::new()
        .put("scheme", serde_json::to_value(batch.scheme).unwrap())
        .put("dt", exact(batch.dt))
        .put("n_traj", count(batch.n_traj))
        .put("times", exact_list(&batch.times))
        .put("max_residual", exact(batch.max_residual))
        .put("max_defect", exact(batch.max_defect))
        .put("moments", Value::Array(moments))
        .done();
    let summary = format!(
        "{:?}: {} trajectories, dt {:e}, max residual {:.3e}, max defect {:.3e}\n",
        batch.scheme, batch.n_traj, batch.dt, batch.max_residual, batch.max_defect
    );
    Ok(Outcome {
        report,
        verdict: true,
        tables,
        summary,
    })
}

fn limit_experiment(cfg: &ExperimentConfig, t_list: &[f64], n_traj: usize) -> LimitExperiment {
    let mut exp = LimitExperiment::new(t_list, n_traj, cfg.seed);
    exp.h = h_rule(cfg);
    exp.coeff_samples = samples(cfg);
    if let Some(dt) = cfg.effective_dt {
        exp.effective_dt = dt;
    }
    if let Some(r) = cfg.route {
        exp.route = r;
    }
    exp
}

fn verify_limit(cfg: &ExperimentConfig) -> Res<Outcome> {
    let spec = single_group(cfg)?;
    let eps = cfg.epsilon.ok_or_else(|| missing("epsilon"))?;
    let t_list = cfg.t_list.clone().ok_or_else(|| missing("t_list"))?;
    let n_traj = cfg.n_traj.ok_or_else(|| missing("n_traj"))?;
    let sys = system(cfg, &spec, eps)?;
    let exp = limit_experiment(cfg, &t_list, n_traj);
    let out = exp.run(&sys)?;
    let r = &out.report;
    let mut table = Csv::new(
        "limit",
        &[
            "t",
            "function",
            "multiscale",
            "multiscale_se",
            "effective",
            "effective_se",
            "z",
        ],
    );
    let rows: Vec<Value> = r
        .rows
        .iter()
        .map(|row| {
            table.row(&[
                Cell::F(row.t),
                Cell::S(&row.function),
                Cell::F(row.a.value),
                Cell::F(row.a.se_or_zero()),
                Cell::F(row.b.value),
                Cell::F(row.b.se_or_zero()),
                Cell::F(row.z),
            ]);
            Obj::new()
                .put("t", exact(row.t))
                .put("function", row.function.clone())
                .put("multiscale", estimate(row.a))
                .put("effective", estimate(row.b))
                .put("z", exact(row.z))
                .done()
        })
        .collect();
    let meta = |m: &lie_homog::verify::BatchMeta| {
        Obj::new()
            .put("n_traj", count(m.n_traj))
            .put("dt", exact(m.dt))
            .put("time_scale", exact(m.time_scale))
            .done()
    };
    let report = Obj::new()
        .put("epsilon", exact(eps))
        .put("generator", generator_json(&out.generator, &spec))
        .put("rows", Value::Array(rows))
        .put("threshold", exact(r.threshold))
        .put("max_abs_z", exact(r.max_abs_z()))
        .put("multiscale", meta(&r.meta_a))
        .put("effective", meta(&r.meta_b))
        .put(
            "max_residual",
            exact(out.multiscale.max_residual.max(out.effective.max_residual)),
        )
        .put(
            "max_defect",
            exact(out.multiscale.max_defect.max(out.effective.max_defect)),
        )
        .done();
    let summary = format!(
        "{} rows, max |z| = {:.3} (threshold {}), pass {}\n",
        r.rows.len(),
        r.max_abs_z(),
        r.threshold,
        r.verdict
    );
    Ok(Outcome {
        report,
        verdict: r.verdict,
        tables: vec![table],
        summary,
    })
}

fn split_test(cfg: &ExperimentConfig) -> Res<Outcome> {
    let spec = single_group(cfg)?;
    let dts = cfg.dt_list.clone().ok_or_else(|| missing("dt_list"))?;
    let horizon = cfg.horizon.ok_or_else(|| missing("T"))?;
    let n_traj = cfg.n_traj.ok_or_else(|| missing("n_traj"))?;
    let sys = system(cfg, &spec, cfg.epsilon.unwrap_or(1.0))?;
    let fine = dts.iter().copied().fold(f64::INFINITY, f64::min);
    check_budget(horizon / fine * n_traj as f64)?;
    let t = pathwise_split_test(&sys, &dts, horizon, n_traj, cfg.seed)?;
    let verdict = t.strictly_decreasing() && t.min_ratio() >= SPLIT_MIN_RATIO;
    let mut table = Csv::new("split", &["dt", "max_deviation"]);
    for (dt, d) in t.dts.iter().zip(&t.max_deviation) {
        table.row(&[Cell::F(*dt), Cell::F(*d)]);
    }
    let report = Obj::new()
        .put("epsilon", exact(sys.epsilon))
        .put("T", exact(t.horizon))
        .put("n_traj", count(t.n_traj))
        .put("dt", exact_list(&t.dts))
        .put("max_deviation", exact_list(&t.max_deviation))
        .put("ratios", exact_list(&t.ratios))
        .put("min_ratio_required", exact(SPLIT_MIN_RATIO))
        .put("strictly_decreasing", t.strictly_decreasing())
        .done();
    let summary = format!(
        "max deviations {:?}, ratios {:?}, pass {}\n",
        t.max_deviation, t.ratios, verdict
    );
    Ok(Outcome {
        report,
        verdict,
        tables: vec![table],
        summary,
    })
}

fn rate(cfg: &ExperimentConfig) -> Res<Outcome> {
    let spec = single_group(cfg)?;
    let eps_list = cfg
        .epsilon_list
        .clone()
        .ok_or_else(|| missing("epsilon_list"))?;
    let horizon = cfg.horizon.ok_or_else(|| missing("T"))?;
    let n_traj = cfg.n_traj.ok_or_else(|| missing("n_traj"))?;
    let f = cfg.test_function.ok_or_else(|| missing("test_function"))?;
    let sys = system(cfg, &spec, eps_list[0])?;
    let exp = limit_experiment(cfg, &[horizon], n_traj);
    let total: f64 = eps_list
        .iter()
        .map(|&e| {
            (horizon / e / fit_step(step_rule(e, exp.h), &[horizon / e])).round() * n_traj as f64
        })
        .sum();
    check_budget(total)?;
    let t = rate_sweep(&sys, &eps_list, f, horizon, &exp)?;
    let mut table = Csv::new(
        "rate",
        &[
            "epsilon",
            "multiscale",
            "multiscale_se",
            "gap",
            "gap_se",
            "steps",
        ],
    );
    let rows: Vec<Value> = t
        .rows
        .iter()
        .map(|r| {
            table.row(&[
                Cell::F(r.epsilon),
                Cell::F(r.multiscale.value),
                Cell::F(r.multiscale.se_or_zero()),
                Cell::F(r.gap),
                Cell::F(r.se),
                Cell::U(r.steps),
            ]);
            Obj::new()
                .put("epsilon", exact(r.epsilon))
                .put("multiscale", estimate(r.multiscale))
                .put("gap", mc(r.gap, r.se))
                .put("steps", count(r.steps))
                .done()
        })
        .collect();
    let report = Obj::new()
        .put("function", t.function.clone())
        .put("T", exact(t.t))
        .put("effective", estimate(t.effective))
        .put("rows", Value::Array(rows))
        .put("monotone", t.monotone)
        .put("slope", t.slope.map(exact).unwrap_or(Value::Null))
        .done();
    let summary = format!(
        "{} at t = {}: gaps {:?}, monotone {}, slope {:?}\n",
        t.function,
        t.t,
        t.rows.iter().map(|r| r.gap).collect::<Vec<_>>(),
        t.monotone,
        t.slope
    );
    Ok(Outcome {
        report,
        verdict: t.monotone,
        tables: vec![table],
        summary,
    })
}
