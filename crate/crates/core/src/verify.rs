//! Statistical checks: Haar-integral oracle, two-ensemble moment
//! comparison, centring, the pathwise split test, the ε-sweep and the
//! end-to-end limit experiment.

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::effective::{
    build_effective_sde, coeffs_closed_form, coeffs_spectral, EffectiveGenerator, EffectiveSde,
};
use crate::error::{Error, Result};
use crate::lie::{GroupSpec, Mat};
use crate::reductive::{invariant_components, mean_ad};
use crate::rng::{substream, Purpose};
use crate::sim::{
    check_budget, check_fast_step, fit_step, integrate_group_sde, integrate_slow_ode_stream,
    simulate_effective, split_with_increments, step_rule, MultiscaleSystem, SimConfig,
    TrajectoryBatch,
};
use crate::stats::{haar_mc, Estimate, Moments};

/// Pass threshold on |z| for simulation-vs-simulation comparisons.
pub const Z_THRESHOLD: f64 = 3.0;

/// Polynomial test function of the projected point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", deny_unknown_fields)]
pub enum TestFunction {
    Constant { value: f64 },
    Coordinate { i: usize },
    Monomial { i: usize, j: usize },
}

impl TestFunction {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match *self {
            TestFunction::Constant { value } => value,
            TestFunction::Coordinate { i } => x[i],
            TestFunction::Monomial { i, j } => x[i] * x[j],
        }
    }

    pub fn name(&self) -> String {
        match *self {
            TestFunction::Constant { value } => format!("{value}"),
            TestFunction::Coordinate { i } => format!("x{i}"),
            TestFunction::Monomial { i, j } => format!("x{i}*x{j}"),
        }
    }
}

/// All coordinates followed by all monomials x_i x_j, i ≤ j.
pub fn battery(width: usize) -> Vec<TestFunction> {
    let mut out: Vec<TestFunction> = (0..width).map(|i| TestFunction::Coordinate { i }).collect();
    for i in 0..width {
        for j in i..width {
            out.push(TestFunction::Monomial { i, j });
        }
    }
    out
}

/// Mean and SE of each test function over a batch at one time index.
pub fn batch_moments(batch: &TrajectoryBatch, ti: usize, fns: &[TestFunction]) -> Vec<Estimate> {
    let mut m = Moments::new(fns.len());
    let mut buf = vec![0.0; fns.len()];
    for traj in 0..batch.n_traj {
        let x = batch.point(traj, ti);
        for (b, f) in buf.iter_mut().zip(fns) {
            *b = f.eval(x);
        }
        m.push(&buf);
    }
    (0..fns.len()).map(|i| m.estimate(i)).collect()
}

/// Two-sample z statistic; zero when both SEs vanish and the means agree.
pub fn z_score(a: Estimate, b: Estimate) -> f64 {
    let diff = a.value - b.value;
    let se = (a.se_or_zero().powi(2) + b.se_or_zero().powi(2)).sqrt();
    if se == 0.0 {
        if diff == 0.0 {
            0.0
        } else {
            diff.signum() * f64::INFINITY
        }
    } else {
        diff / se
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BatchMeta {
    pub seed: u64,
    pub n_traj: usize,
    pub dt: f64,
    pub time_scale: f64,
}

impl BatchMeta {
    fn of(b: &TrajectoryBatch) -> BatchMeta {
        BatchMeta {
            seed: b.seed,
            n_traj: b.n_traj,
            dt: b.dt,
            time_scale: b.time_scale,
        }
    }
}

/// One row per (time, test function).
#[derive(Clone, Debug, Serialize)]
pub struct StatRow {
    pub t: f64,
    pub function: String,
    pub a: Estimate,
    pub b: Estimate,
    pub z: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct StatReport {
    pub rows: Vec<StatRow>,
    pub threshold: f64,
    pub verdict: bool,
    pub meta_a: BatchMeta,
    pub meta_b: BatchMeta,
}

impl StatReport {
    pub fn max_abs_z(&self) -> f64 {
        self.rows.iter().map(|r| r.z.abs()).fold(0.0, f64::max)
    }

    /// Verdict recomputed from the stored estimates.
    pub fn recompute_verdict(&self) -> bool {
        self.rows
            .iter()
            .all(|r| z_score(r.a, r.b).abs() <= self.threshold)
    }
}

/// Compares the test battery of two batches at the given reporting times.
pub fn moment_compare(
    a: &TrajectoryBatch,
    b: &TrajectoryBatch,
    t_list: &[f64],
) -> Result<StatReport> {
    if a.manifold != b.manifold {
        return Err(Error::MismatchedManifold(
            format!("{:?}", a.manifold),
            format!("{:?}", b.manifold),
        ));
    }
    let fns = battery(a.width);
    let mut rows = Vec::new();
    for &t in t_list {
        let (ia, ib) = match (a.time_index(t), b.time_index(t)) {
            (Some(ia), Some(ib)) => (ia, ib),
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "time {t} not stored in both batches"
                )))
            }
        };
        let ma = batch_moments(a, ia, &fns);
        let mb = batch_moments(b, ib, &fns);
        for (k, f) in fns.iter().enumerate() {
            rows.push(StatRow {
                t,
                function: f.name(),
                a: ma[k],
                b: mb[k],
                z: z_score(ma[k], mb[k]),
            });
        }
    }
    let verdict = rows.iter().all(|r| r.z.abs() <= Z_THRESHOLD);
    Ok(StatReport {
        rows,
        threshold: Z_THRESHOLD,
        verdict,
        meta_a: BatchMeta::of(a),
        meta_b: BatchMeta::of(b),
    })
}

/// (1/N) Σ f(h_i) over Haar samples of H.
pub fn haar_integral_oracle<F>(f: F, spec: &GroupSpec, n: usize, seed: u64) -> Estimate
where
    F: Fn(&Mat) -> f64 + Sync,
{
    let m = haar_mc(spec, n, seed, Purpose::Oracle, 1, |h, out| out[0] = f(h));
    m.estimate(0)
}

#[derive(Clone, Debug, Serialize)]
pub struct CentringReport {
    /// Estimated ∫ Ad(h)Y₀ dh in full-basis coordinates.
    pub mean: Vec<Estimate>,
    /// Exact value: the projection of Y₀ onto the fixed space.
    pub expected: Vec<f64>,
    pub deviation: f64,
    pub bound: f64,
    pub exact: bool,
    pub pass: bool,
}

/// Checks ∫ Ad(h)Y₀ dh against the projection of Y₀ on m₀: equality when
/// Y₀ ∈ m₀, and a deviation within 4·‖SE‖ otherwise.
pub fn centring_check(
    y0: &crate::lie::AlgebraVector,
    spec: &GroupSpec,
    n: usize,
    seed: u64,
) -> Result<CentringReport> {
    let est = mean_ad(y0, spec, n, seed)?;
    let v = y0.m_coords(spec);
    let mut fixed = DVector::zeros(v.len());
    for c in invariant_components(spec)? {
        if c.is_fixed_space {
            fixed += c.project(&v);
        }
    }
    let mut expected = vec![0.0; spec.dim()];
    expected[spec.dim_h()..].copy_from_slice(fixed.as_slice());
    let deviation = est
        .mean
        .iter()
        .zip(&expected)
        .map(|(m, e)| (m - e).powi(2))
        .sum::<f64>()
        .sqrt();
    let (bound, pass) = if est.exact {
        (0.0, est.mean.as_slice() == y0.coeffs().as_slice())
    } else {
        let b = 4.0 * est.se.norm();
        (b, deviation <= b)
    };
    Ok(CentringReport {
        mean: est.estimates(),
        expected,
        deviation,
        bound,
        exact: est.exact,
        pass,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SplitTable {
    pub dts: Vec<f64>,
    pub max_deviation: Vec<f64>,
    /// deviation[i] / deviation[i+1].
    pub ratios: Vec<f64>,
    pub horizon: f64,
    pub n_traj: usize,
}

impl SplitTable {
    pub fn strictly_decreasing(&self) -> bool {
        self.max_deviation.windows(2).all(|w| w[1] < w[0])
    }

    pub fn min_ratio(&self) -> f64 {
        self.ratios.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// max_t ‖g_t − u_t a_t‖_F per step size, on nested Brownian increments:
/// the finest level draws them and coarser levels sum consecutive blocks.
pub fn pathwise_split_test(
    sys: &MultiscaleSystem,
    dt_list: &[f64],
    horizon: f64,
    n_traj: usize,
    seed: u64,
) -> Result<SplitTable> {
    if dt_list.len() < 2 || dt_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument(
            "dt_list must be decreasing with at least 2 entries".into(),
        ));
    }
    let fine = *dt_list.last().unwrap();
    let mut factors = Vec::new();
    for &dt in dt_list {
        check_fast_step(dt, sys.epsilon)?;
        let m = (dt / fine).round();
        if (m * fine - dt).abs() > 1e-9 * dt {
            return Err(Error::InvalidArgument(format!(
                "{dt} is not a multiple of {fine}"
            )));
        }
        factors.push(m as usize);
    }
    let coarse_cfg = SimConfig::new(dt_list[0], horizon, 1, seed);
    let coarse_steps = coarse_cfg.steps()?;
    let fine_steps = coarse_steps * factors[0];
    check_budget((fine_steps * n_traj * 2) as f64)?;
    let k = sys.generators.len();
    let per_traj: Result<Vec<Vec<f64>>> = (0..n_traj)
        .into_par_iter()
        .map(|traj| {
            let mut rngs: Vec<_> = (0..k)
                .map(|d| substream(seed, Purpose::Split, traj as u64, d as u64))
                .collect();
            let sd = fine.sqrt();
            let mut incs = vec![0.0; fine_steps * k];
            for n in 0..fine_steps {
                for d in 0..k {
                    let xi: f64 = rand::Rng::sample(&mut rngs[d], rand_distr::StandardNormal);
                    incs[n * k + d] = sd * xi;
                }
            }
            let mut devs = Vec::with_capacity(dt_list.len());
            for (&dt, &m) in dt_list.iter().zip(&factors) {
                let steps = fine_steps / m;
                let mut summed = vec![0.0; steps * k];
                for n in 0..steps {
                    for j in 0..m {
                        for d in 0..k {
                            summed[n * k + d] += incs[(n * m + j) * k + d];
                        }
                    }
                }
                let p = split_with_increments(sys, dt, steps, &summed, &[])?;
                devs.push(p.max_deviation);
            }
            Ok(devs)
        })
        .collect();
    let per_traj = per_traj?;
    let max_deviation: Vec<f64> = (0..dt_list.len())
        .map(|i| per_traj.iter().map(|d| d[i]).fold(0.0, f64::max))
        .collect();
    let ratios = max_deviation.windows(2).map(|w| w[0] / w[1]).collect();
    Ok(SplitTable {
        dts: dt_list.to_vec(),
        max_deviation,
        ratios,
        horizon,
        n_traj,
    })
}

/// Effective generator for a system: closed form when the generators are
/// the full orthonormal basis of h and Y₀ sits in one component, Monte
/// Carlo otherwise.
pub fn effective_for(
    sys: &MultiscaleSystem,
    samples: usize,
    seed: u64,
) -> Result<(EffectiveGenerator, EffectiveSde)> {
    let spec = &sys.spec;
    let full = sys.generators.len() == spec.dim_h()
        && sys.generators.iter().enumerate().all(|(i, a)| {
            sys.generators
                .iter()
                .enumerate()
                .all(|(j, b)| (a.dot(b) - if i == j { 1.0 } else { 0.0 }).abs() < 1e-12)
        });
    if !sys.a0.is_zero() {
        return Err(Error::InvalidArgument(
            "effective generator requires A0 = 0".into(),
        ));
    }
    let gen = if full {
        match coeffs_closed_form(&sys.y0, spec) {
            Ok(g) => g,
            Err(Error::MixedComponentInput { .. } | Error::ReducibleComponent { .. }) => {
                coeffs_spectral(&sys.y0, &sys.generators, spec, samples, seed)?
            }
            Err(e) => return Err(e),
        }
    } else {
        coeffs_spectral(&sys.y0, &sys.generators, spec, samples, seed)?
    };
    let sde = build_effective_sde(&gen, spec)?;
    Ok((gen, sde))
}

/// Which simulation of the multiscale system is compared to the limit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LimitRoute {
    /// Full SDE on G.
    GroupSde,
    /// Slow random ODE with midpoint sampling of the fast process.
    SlowOde,
}

/// Multiscale system read at slow times t/ε against the effective diffusion
/// read at t.
#[derive(Clone, Debug)]
pub struct LimitExperiment {
    pub t_list: Vec<f64>,
    pub n_traj: usize,
    /// h of the step rule dt = min(h·ε, h).
    pub h: f64,
    pub effective_dt: f64,
    pub route: LimitRoute,
    pub coeff_samples: usize,
    pub seed: u64,
}

impl LimitExperiment {
    pub fn new(t_list: &[f64], n_traj: usize, seed: u64) -> LimitExperiment {
        LimitExperiment {
            t_list: t_list.to_vec(),
            n_traj,
            h: crate::sim::DEFAULT_H,
            effective_dt: 1e-3,
            route: LimitRoute::SlowOde,
            coeff_samples: 100_000,
            seed,
        }
    }

    fn slow_record(&self, eps: f64) -> Vec<f64> {
        let mut rec = vec![0.0];
        rec.extend(self.t_list.iter().map(|t| t / eps));
        rec
    }

    fn horizon(&self) -> f64 {
        self.t_list.iter().copied().fold(0.0, f64::max)
    }

    /// Simulates the multiscale system, rescaled to slow times.
    pub fn multiscale(&self, sys: &MultiscaleSystem) -> Result<TrajectoryBatch> {
        let eps = sys.epsilon;
        let rec = self.slow_record(eps);
        let dt = fit_step(step_rule(eps, self.h), &rec);
        let cfg = SimConfig::new(dt, self.horizon() / eps, self.n_traj, self.seed).record(&rec);
        check_budget(cfg.steps()? as f64 * self.n_traj as f64)?;
        let batch = match self.route {
            LimitRoute::GroupSde => integrate_group_sde(sys, &cfg)?,
            LimitRoute::SlowOde => integrate_slow_ode_stream(sys, &cfg, true)?,
        };
        Ok(batch.rescale_time(eps))
    }

    pub fn effective(&self, sys: &MultiscaleSystem, sde: &EffectiveSde) -> Result<TrajectoryBatch> {
        let mut rec = vec![0.0];
        rec.extend(&self.t_list);
        let cfg = SimConfig::new(
            fit_step(self.effective_dt, &rec),
            self.horizon(),
            self.n_traj,
            self.seed,
        )
        .record(&rec);
        simulate_effective(sde, &sys.spec, &sys.g0, &cfg)
    }

    pub fn run(&self, sys: &MultiscaleSystem) -> Result<LimitOutcome> {
        let (generator, sde) = effective_for(sys, self.coeff_samples, self.seed)?;
        let multiscale = self.multiscale(sys)?;
        let effective = self.effective(sys, &sde)?;
        let report = moment_compare(&multiscale, &effective, &self.t_list)?;
        Ok(LimitOutcome {
            generator,
            report,
            multiscale,
            effective,
        })
    }
}

#[derive(Clone, Debug)]
pub struct LimitOutcome {
    pub generator: EffectiveGenerator,
    pub report: StatReport,
    pub multiscale: TrajectoryBatch,
    pub effective: TrajectoryBatch,
}

#[derive(Clone, Debug, Serialize)]
pub struct RateRow {
    pub epsilon: f64,
    pub multiscale: Estimate,
    pub gap: f64,
    pub se: f64,
    pub steps: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct RateTable {
    pub rows: Vec<RateRow>,
    pub effective: Estimate,
    pub function: String,
    pub t: f64,
    /// gaps non-increasing within 2 combined SE.
    pub monotone: bool,
    /// Least-squares slope of log gap against log ε; reported only.
    pub slope: Option<f64>,
}

/// |E f(x^ε_{t/ε}) − E f(x̄_t)| over a decreasing list of ε; the effective
/// estimate is shared by all rows.
pub fn rate_sweep(
    template: &MultiscaleSystem,
    epsilon_list: &[f64],
    f: TestFunction,
    t: f64,
    exp: &LimitExperiment,
) -> Result<RateTable> {
    if epsilon_list.is_empty() || epsilon_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument(
            "epsilon_list must be decreasing".into(),
        ));
    }
    let mut exp = exp.clone();
    exp.t_list = vec![t];
    let mut total = 0.0;
    for &eps in epsilon_list {
        total +=
            (t / eps / fit_step(step_rule(eps, exp.h), &[t / eps])).round() * exp.n_traj as f64;
    }
    check_budget(total)?;

    let (_, sde) = effective_for(template, exp.coeff_samples, exp.seed)?;
    let eff = exp.effective(template, &sde)?;
    let eff_est = batch_moments(&eff, eff.time_index(t).unwrap(), &[f])[0];

    let mut rows = Vec::new();
    for &eps in epsilon_list {
        let sys = template.with_epsilon(eps)?;
        let batch = exp.multiscale(&sys)?;
        let est = batch_moments(&batch, batch.time_index(t).unwrap(), &[f])[0];
        let se = (est.se_or_zero().powi(2) + eff_est.se_or_zero().powi(2)).sqrt();
        rows.push(RateRow {
            epsilon: eps,
            multiscale: est,
            gap: (est.value - eff_est.value).abs(),
            se,
            steps: (t / eps / fit_step(step_rule(eps, exp.h), &[t / eps])).round() as usize,
        });
    }
    let monotone = rows
        .windows(2)
        .all(|w| w[1].gap <= w[0].gap + 2.0 * (w[0].se.powi(2) + w[1].se.powi(2)).sqrt());
    Ok(RateTable {
        slope: fit_slope(&rows),
        rows,
        effective: eff_est,
        function: f.name(),
        t,
        monotone,
    })
}

fn fit_slope(rows: &[RateRow]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.gap > 0.0)
        .map(|r| (r.epsilon.ln(), r.gap.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::{haar_rotation, make_group, GroupId};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn oracle_constant_is_exact() {
        let spec = make_group(GroupId::Sphere { n: 3 }).unwrap();
        let e = haar_integral_oracle(|_| 1.0, &spec, 5000, 1);
        assert_eq!(e.value, 1.0);
        assert_eq!(e.se, Some(0.0));
    }

    #[test]
    fn oracle_column_square() {
        let spec = make_group(GroupId::Sphere { n: 3 }).unwrap();
        let e = haar_integral_oracle(|h| h[(0, 0)].re.powi(2), &spec, 100_000, 2);
        assert!(e.within(1.0 / 3.0, 4.0), "{e:?}");
    }

    #[test]
    fn oracle_cross_alpha_vanishes() {
        let spec = make_group(GroupId::Sphere { n: 3 }).unwrap();
        let y0 = spec.m_basis_vector(0).matrix().clone();
        let (y1, y2) = (spec.m_basis()[1].clone(), spec.m_basis()[2].clone());
        let e = haar_integral_oracle(
            |h| {
                let v = spec.conjugate(h, &y0);
                spec.inner(&v, &y1) * spec.inner(&v, &y2)
            },
            &spec,
            100_000,
            3,
        );
        assert!(e.within(0.0, 4.0), "{e:?}");
    }

    #[test]
    fn grassmann_cross_term_vanishes() {
        // ∫ r11² q11 q12 dR dQ over SO(2) × SO(3)
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let mut m = Moments::new(1);
        for _ in 0..100_000 {
            let r = haar_rotation(2, &mut rng);
            let q = haar_rotation(3, &mut rng);
            m.push(&[r[(0, 0)].powi(2) * q[(0, 0)] * q[(0, 1)]]);
        }
        assert!(m.estimate(0).within(0.0, 4.0));
    }

    #[test]
    fn z_score_edge_cases() {
        assert_eq!(z_score(Estimate::mc(1.0, 0.0), Estimate::mc(1.0, 0.0)), 0.0);
        assert!(z_score(Estimate::mc(1.0, 0.0), Estimate::mc(0.0, 0.0)).is_infinite());
        assert!((z_score(Estimate::mc(1.0, 0.3), Estimate::mc(0.0, 0.4)) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn battery_size() {
        assert_eq!(battery(3).len(), 9);
        assert_eq!(battery(4).len(), 14);
    }

    #[test]
    fn centring_cases() {
        let spec = make_group(GroupId::Sphere { n: 3 }).unwrap();
        let y0 = spec.m_vector(&[0.2, -0.5, 0.9]).unwrap();
        assert!(centring_check(&y0, &spec, 20_000, 4).unwrap().pass);
        let spec = make_group(GroupId::Stiefel { n: 4, k: 2 }).unwrap();
        let mut c = vec![0.0; spec.dim_m()];
        c[0] = 1.3;
        let r = centring_check(&spec.m_vector(&c).unwrap(), &spec, 1000, 4).unwrap();
        assert!(r.exact && r.pass);
    }

    #[test]
    fn mixed_stiefel_centring_recovers_fixed_part() {
        let spec = make_group(GroupId::Stiefel { n: 4, k: 2 }).unwrap();
        let c: Vec<f64> = (0..spec.dim_m()).map(|i| 0.3 + 0.1 * i as f64).collect();
        let r = centring_check(&spec.m_vector(&c).unwrap(), &spec, 20_000, 5).unwrap();
        assert!(!r.exact);
        assert!(r.pass, "{r:?}");
        assert!((r.expected[spec.dim_h()] - 0.3).abs() < 1e-12);
    }

    #[test]
    fn split_without_generators_is_exact() {
        let spec = make_group(GroupId::Su2Hopf).unwrap();
        let sys = MultiscaleSystem::new(
            spec.clone(),
            1.0,
            vec![],
            None,
            spec.m_basis_vector(0),
            None,
        )
        .unwrap();
        let t = pathwise_split_test(&sys, &[1e-2, 5e-3], 1.0, 2, 1).unwrap();
        assert!(t.max_deviation.iter().all(|&d| d < 1e-13), "{t:?}");
    }

    #[test]
    fn rate_sweep_constant_gap_is_zero() {
        let spec = make_group(GroupId::Su2Hopf).unwrap();
        let sys = MultiscaleSystem::new(
            spec.clone(),
            0.4,
            vec![spec.basis_vector(0)],
            None,
            spec.m_basis_vector(0),
            None,
        )
        .unwrap();
        let mut exp = LimitExperiment::new(&[0.2], 50, 3);
        exp.effective_dt = 1e-2;
        let t = rate_sweep(
            &sys,
            &[0.4, 0.2],
            TestFunction::Constant { value: 0.7 },
            0.2,
            &exp,
        )
        .unwrap();
        assert!(t.rows.iter().all(|r| r.gap == 0.0));
        assert!(t.monotone);
        assert!(t.slope.is_none());
    }
}
