use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::{
    check_fast_step, fields_commute, MultiscaleSystem, Scheme, SimConfig, TrajectoryBatch,
};
use crate::effective::EffectiveSde;
use crate::error::{Error, Result};
use crate::lie::expm::expm;
use crate::lie::{AlgebraVector, GroupElement, GroupSpec, Mat};
use crate::rng::{substream, Purpose};

fn streams(seed: u64, purpose: Purpose, traj: usize, k: usize) -> Vec<ChaCha8Rng> {
    (0..k)
        .map(|d| substream(seed, purpose, traj as u64, d as u64))
        .collect()
}

fn cx(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// `base + Σ c_k M_k`.
fn combine(base: &Mat, coeffs: &[f64], mats: &[Mat]) -> Mat {
    let mut out = base.clone();
    for (c, m) in coeffs.iter().zip(mats) {
        out += m * cx(*c);
    }
    out
}

fn matrices(v: &[AlgebraVector]) -> Vec<Mat> {
    v.iter().map(|a| a.matrix().clone()).collect()
}

/// Increments of the multiscale system for a fixed dt, split into the fast
/// H-part and the slow Y₀-part so that every scheme sharing Brownian
/// increments forms identical matrices.
struct Increments {
    gens: Vec<Mat>,
    inv_sqrt_eps: f64,
    fast_drift: Mat,
    slow: Mat,
}

impl Increments {
    fn new(sys: &MultiscaleSystem, dt: f64) -> Increments {
        Increments {
            gens: matrices(&sys.generators),
            inv_sqrt_eps: 1.0 / sys.epsilon.sqrt(),
            fast_drift: sys.a0.matrix() * cx(dt / sys.epsilon),
            slow: sys.y0.matrix() * cx(dt),
        }
    }

    /// Σ_k ΔB_k ε^{-1/2} A_k + (dt/ε) A₀.
    fn fast(&self, db: &[f64]) -> Mat {
        let c: Vec<f64> = db.iter().map(|b| b * self.inv_sqrt_eps).collect();
        combine(&self.fast_drift, &c, &self.gens)
    }

    fn full(&self, db: &[f64]) -> Mat {
        self.fast(db) + &self.slow
    }
}

fn brownian_steps(rngs: &mut [ChaCha8Rng], sqrt_dt: f64, out: &mut [f64]) {
    for (o, r) in out.iter_mut().zip(rngs.iter_mut()) {
        let xi: f64 = r.sample(StandardNormal);
        *o = sqrt_dt * xi;
    }
}

/// Records the matrix when step `n` is the next recorded one.
struct Recorder<'a> {
    steps: &'a [usize],
    next: usize,
    out: Vec<Mat>,
}

impl<'a> Recorder<'a> {
    fn new(steps: &'a [usize]) -> Recorder<'a> {
        Recorder {
            steps,
            next: 0,
            out: Vec::with_capacity(steps.len()),
        }
    }

    fn wants(&self, n: usize) -> bool {
        self.next < self.steps.len() && self.steps[self.next] == n
    }

    fn offer(&mut self, n: usize, g: &Mat) {
        if self.wants(n) {
            self.out.push(g.clone());
            self.next += 1;
        }
    }
}

/// Exponential Euler scheme for the full multiscale SDE:
/// g ← g·exp(√(dt/ε) Σ ξ_k A_k + dt(A₀/ε + Y₀)).
pub fn integrate_group_sde(sys: &MultiscaleSystem, cfg: &SimConfig) -> Result<TrajectoryBatch> {
    check_fast_step(cfg.dt, sys.epsilon)?;
    let steps = cfg.steps()?;
    let rec = cfg.record_steps()?;
    let inc = Increments::new(sys, cfg.dt);
    let k = sys.generators.len();
    let sqrt_dt = cfg.dt.sqrt();
    let paths: Vec<Vec<Mat>> = (0..cfg.n_traj)
        .into_par_iter()
        .map(|traj| {
            let mut rngs = streams(cfg.seed, Purpose::Drivers, traj, k);
            let mut db = vec![0.0; k];
            let mut g = sys.g0.matrix().clone();
            let mut r = Recorder::new(&rec);
            r.offer(0, &g);
            for n in 0..steps {
                brownian_steps(&mut rngs, sqrt_dt, &mut db);
                g = &g * expm(&inc.full(&db));
                r.offer(n + 1, &g);
            }
            r.out
        })
        .collect();
    TrajectoryBatch::assemble(&sys.spec, cfg, Scheme::GroupSde, paths)
}

/// State of the fast H-process; exact for commuting fields.
struct FastState {
    gens: Vec<Mat>,
    a0: Mat,
    abelian: bool,
    /// Brownian sums and elapsed time, abelian case.
    b: Vec<f64>,
    tau: f64,
    /// Current element, general case.
    h: Mat,
}

impl FastState {
    fn new(spec: &GroupSpec, gens: &[AlgebraVector], a0: &AlgebraVector) -> FastState {
        let n = spec.ambient_dim();
        FastState {
            gens: matrices(gens),
            a0: a0.matrix().clone(),
            abelian: fields_commute(gens, a0),
            b: vec![0.0; gens.len()],
            tau: 0.0,
            h: Mat::identity(n, n),
        }
    }

    /// Advances by `dtau` with the given Brownian increments.
    fn step(&mut self, db: &[f64], dtau: f64) {
        if self.abelian {
            for (b, d) in self.b.iter_mut().zip(db) {
                *b += d;
            }
            self.tau += dtau;
        } else {
            let x = combine(&(&self.a0 * cx(dtau)), db, &self.gens);
            self.h = &self.h * expm(&x);
        }
    }

    fn current(&self) -> Mat {
        if self.abelian {
            expm(&combine(&(&self.a0 * cx(self.tau)), &self.b, &self.gens))
        } else {
            self.h.clone()
        }
    }
}

/// Fast process dh = Σ A_k(h)∘db^k + A₀(h)dt on H, stored at the recorded
/// times. Commuting fields use h_t = exp(Σ b_k(t) A_k + t A₀) exactly.
pub fn integrate_fast_h(
    spec: &GroupSpec,
    generators: &[AlgebraVector],
    a0: &AlgebraVector,
    cfg: &SimConfig,
) -> Result<TrajectoryBatch> {
    for a in generators {
        spec.require_h(a)?;
    }
    spec.require_h(a0)?;
    check_fast_step(cfg.dt, 1.0)?;
    let steps = cfg.steps()?;
    let rec = cfg.record_steps()?;
    let k = generators.len();
    let sqrt_dt = cfg.dt.sqrt();
    let paths: Vec<Vec<Mat>> = (0..cfg.n_traj)
        .into_par_iter()
        .map(|traj| {
            let mut rngs = streams(cfg.seed, Purpose::Drivers, traj, k);
            let mut db = vec![0.0; k];
            let mut state = FastState::new(spec, generators, a0);
            let mut r = Recorder::new(&rec);
            if r.wants(0) {
                r.offer(0, &state.current());
            }
            for n in 0..steps {
                brownian_steps(&mut rngs, sqrt_dt, &mut db);
                state.step(&db, cfg.dt);
                if r.wants(n + 1) {
                    r.offer(n + 1, &state.current());
                }
            }
            r.out
        })
        .collect();
    TrajectoryBatch::assemble(spec, cfg, Scheme::FastH, paths)
}

/// A single fast path stored at every step of width `dt`.
#[derive(Clone, Debug)]
pub struct HPath {
    pub dt: f64,
    pub points: Vec<Mat>,
}

impl HPath {
    pub fn horizon(&self) -> f64 {
        self.dt * (self.points.len().saturating_sub(1)) as f64
    }

    /// Element at fast time `tau`, which must lie on the grid.
    pub fn at(&self, tau: f64) -> Result<&Mat> {
        let k = (tau / self.dt).round();
        if k < 0.0 || (k * self.dt - tau).abs() > 1e-9 * tau.abs().max(self.dt) {
            return Err(Error::InsufficientHResolution(format!(
                "fast time {tau} is not on the grid of width {}",
                self.dt
            )));
        }
        self.points.get(k as usize).ok_or_else(|| {
            Error::InsufficientHResolution(format!(
                "fast time {tau} beyond stored horizon {}",
                self.horizon()
            ))
        })
    }
}

/// Fast path number `traj` of the stream `seed`, all steps stored.
pub fn fast_h_path(
    spec: &GroupSpec,
    generators: &[AlgebraVector],
    a0: &AlgebraVector,
    dt: f64,
    steps: usize,
    seed: u64,
    traj: usize,
) -> Result<HPath> {
    for a in generators {
        spec.require_h(a)?;
    }
    spec.require_h(a0)?;
    check_fast_step(dt, 1.0)?;
    let k = generators.len();
    let mut rngs = streams(seed, Purpose::Drivers, traj, k);
    let mut db = vec![0.0; k];
    let mut state = FastState::new(spec, generators, a0);
    let mut points = Vec::with_capacity(steps + 1);
    points.push(state.current());
    for _ in 0..steps {
        brownian_steps(&mut rngs, dt.sqrt(), &mut db);
        state.step(&db, dt);
        points.push(state.current());
    }
    Ok(HPath { dt, points })
}

/// Slow random ODE u̇ = (Ad(h_{s/ε})Y₀)(u) along given fast paths, one per
/// trajectory: u ← u·exp(dt·Ad(h)Y₀) with h read at s_n/ε, or at
/// (s_n + dt/2)/ε when `midpoint`.
pub fn integrate_slow_ode(
    spec: &GroupSpec,
    y0: &AlgebraVector,
    u0: &GroupElement,
    paths: &[HPath],
    epsilon: f64,
    cfg: &SimConfig,
    midpoint: bool,
) -> Result<TrajectoryBatch> {
    spec.require_m(y0)?;
    check_fast_step(cfg.dt, epsilon)?;
    if paths.len() != cfg.n_traj {
        return Err(Error::DimensionMismatch {
            expected: cfg.n_traj,
            got: paths.len(),
        });
    }
    let steps = cfg.steps()?;
    let rec = cfg.record_steps()?;
    let shift = if midpoint { 0.5 * cfg.dt } else { 0.0 };
    let ydt = y0.matrix() * cx(cfg.dt);
    let out: Result<Vec<Vec<Mat>>> = paths
        .par_iter()
        .map(|path| {
            let mut u = u0.matrix().clone();
            let mut r = Recorder::new(&rec);
            r.offer(0, &u);
            for n in 0..steps {
                let s = n as f64 * cfg.dt + shift;
                let h = path.at(s / epsilon)?;
                u = &u * expm(&spec.conjugate(h, &ydt));
                r.offer(n + 1, &u);
            }
            Ok(r.out)
        })
        .collect();
    let scheme = if midpoint {
        Scheme::SlowOdeMidpoint
    } else {
        Scheme::SlowOde
    };
    TrajectoryBatch::assemble(spec, cfg, scheme, out?)
}

/// Slow random ODE with the fast process generated alongside, from the
/// driver streams of `cfg.seed`. With `midpoint` the fast process advances
/// in two half steps per slow step and h is read in between.
pub fn integrate_slow_ode_stream(
    sys: &MultiscaleSystem,
    cfg: &SimConfig,
    midpoint: bool,
) -> Result<TrajectoryBatch> {
    check_fast_step(cfg.dt, sys.epsilon)?;
    let steps = cfg.steps()?;
    let rec = cfg.record_steps()?;
    let spec = &sys.spec;
    let k = sys.generators.len();
    let dtau = cfg.dt / sys.epsilon;
    let ydt = sys.y0.matrix() * cx(cfg.dt);
    let paths: Vec<Vec<Mat>> = (0..cfg.n_traj)
        .into_par_iter()
        .map(|traj| {
            let mut rngs = streams(cfg.seed, Purpose::Drivers, traj, k);
            let mut db = vec![0.0; k];
            let mut fast = FastState::new(spec, &sys.generators, &sys.a0);
            let mut u = sys.g0.matrix().clone();
            let mut r = Recorder::new(&rec);
            r.offer(0, &u);
            for n in 0..steps {
                if midpoint {
                    brownian_steps(&mut rngs, (0.5 * dtau).sqrt(), &mut db);
                    fast.step(&db, 0.5 * dtau);
                    let h = fast.current();
                    u = &u * expm(&spec.conjugate(&h, &ydt));
                    brownian_steps(&mut rngs, (0.5 * dtau).sqrt(), &mut db);
                    fast.step(&db, 0.5 * dtau);
                } else {
                    let h = fast.current();
                    u = &u * expm(&spec.conjugate(&h, &ydt));
                    brownian_steps(&mut rngs, dtau.sqrt(), &mut db);
                    fast.step(&db, dtau);
                }
                r.offer(n + 1, &u);
            }
            r.out
        })
        .collect();
    let scheme = if midpoint {
        Scheme::SlowOdeMidpoint
    } else {
        Scheme::SlowOde
    };
    TrajectoryBatch::assemble(spec, cfg, scheme, paths)
}

/// One trajectory of the coupled split system with its reference path.
#[derive(Clone, Debug)]
pub struct SplitPath {
    /// max over steps of ‖g − u·a‖_F.
    pub max_deviation: f64,
    pub u: Vec<Mat>,
    pub a: Vec<Mat>,
    pub g: Vec<Mat>,
}

/// Runs u ← u·exp(dt·Ad(a)Y₀), a ← a·exp(fast increment) and the reference
/// g ← g·exp(fast increment + dt·Y₀) on the given Brownian increments
/// (`increments[n*K + k]` is ΔB_k of step n).
pub fn split_with_increments(
    sys: &MultiscaleSystem,
    dt: f64,
    steps: usize,
    increments: &[f64],
    record_steps: &[usize],
) -> Result<SplitPath> {
    let k = sys.generators.len();
    if increments.len() != steps * k {
        return Err(Error::DimensionMismatch {
            expected: steps * k,
            got: increments.len(),
        });
    }
    let inc = Increments::new(sys, dt);
    let spec = &sys.spec;
    let mut g = sys.g0.matrix().clone();
    let mut u = sys.g0.matrix().clone();
    let n = spec.ambient_dim();
    let mut a = Mat::identity(n, n);
    let mut out = SplitPath {
        max_deviation: 0.0,
        u: Vec::new(),
        a: Vec::new(),
        g: Vec::new(),
    };
    let mut next = 0;
    let mut record = |step: usize, u: &Mat, a: &Mat, g: &Mat, out: &mut SplitPath| {
        if next < record_steps.len() && record_steps[next] == step {
            out.u.push(u.clone());
            out.a.push(a.clone());
            out.g.push(g.clone());
            next += 1;
        }
    };
    record(0, &u, &a, &g, &mut out);
    for step in 0..steps {
        let db = &increments[step * k..(step + 1) * k];
        let fast = inc.fast(db);
        let full = &fast + &inc.slow;
        u = &u * expm(&spec.conjugate(&a, &inc.slow));
        a = &a * expm(&fast);
        g = &g * expm(&full);
        let dev = (&g - &u * &a).norm();
        out.max_deviation = out.max_deviation.max(dev);
        record(step + 1, &u, &a, &g, &mut out);
    }
    Ok(out)
}

/// Split paths for an ensemble.
#[derive(Clone, Debug)]
pub struct SplitBatch {
    pub dt: f64,
    pub times: Vec<f64>,
    pub paths: Vec<SplitPath>,
}

impl SplitBatch {
    pub fn max_deviation(&self) -> f64 {
        self.paths
            .iter()
            .map(|p| p.max_deviation)
            .fold(0.0, f64::max)
    }
}

/// Coupled (u, a) system with the reference g on shared noise. The g path
/// coincides bit for bit with [`integrate_group_sde`] for the same config.
pub fn integrate_split(sys: &MultiscaleSystem, cfg: &SimConfig) -> Result<SplitBatch> {
    check_fast_step(cfg.dt, sys.epsilon)?;
    let steps = cfg.steps()?;
    let rec = cfg.record_steps()?;
    let k = sys.generators.len();
    let sqrt_dt = cfg.dt.sqrt();
    let paths: Result<Vec<SplitPath>> = (0..cfg.n_traj)
        .into_par_iter()
        .map(|traj| {
            let mut rngs = streams(cfg.seed, Purpose::Drivers, traj, k);
            let mut incs = vec![0.0; steps * k];
            if k > 0 {
                for chunk in incs.chunks_mut(k) {
                    brownian_steps(&mut rngs, sqrt_dt, chunk);
                }
            }
            split_with_increments(sys, cfg.dt, steps, &incs, &rec)
        })
        .collect();
    Ok(SplitBatch {
        dt: cfg.dt,
        times: cfg.record.clone(),
        paths: paths?,
    })
}

/// Effective SDE dū = Σ V_k(ū)∘dB^k + V₀(ū)dt by ū ← ū·exp(√dt Σ ξ_k V_k + dt V₀).
pub fn simulate_effective(
    sde: &EffectiveSde,
    spec: &GroupSpec,
    u0: &GroupElement,
    cfg: &SimConfig,
) -> Result<TrajectoryBatch> {
    let steps = cfg.steps()?;
    let rec = cfg.record_steps()?;
    let k = sde.fields.len();
    let fields = matrices(&sde.fields);
    let drift = sde.drift.matrix() * cx(cfg.dt);
    let sqrt_dt = cfg.dt.sqrt();
    let paths: Vec<Vec<Mat>> = (0..cfg.n_traj)
        .into_par_iter()
        .map(|traj| {
            let mut rngs = streams(cfg.seed, Purpose::Effective, traj, k);
            let mut db = vec![0.0; k];
            let mut u = u0.matrix().clone();
            let mut r = Recorder::new(&rec);
            r.offer(0, &u);
            for n in 0..steps {
                brownian_steps(&mut rngs, sqrt_dt, &mut db);
                u = &u * expm(&combine(&drift, &db, &fields));
                r.offer(n + 1, &u);
            }
            r.out
        })
        .collect();
    TrajectoryBatch::assemble(spec, cfg, Scheme::Effective, paths)
}
