//! Group-preserving time stepping for the multiscale system, its fast and
//! slow parts, the coupled split system and the effective SDE.

mod batch;
mod schemes;

pub use batch::{Scheme, TrajectoryBatch};
pub use schemes::{
    fast_h_path, integrate_fast_h, integrate_group_sde, integrate_slow_ode,
    integrate_slow_ode_stream, integrate_split, simulate_effective, split_with_increments, HPath,
    SplitBatch, SplitPath,
};

use crate::error::{Error, Result};
use crate::lie::{AlgebraVector, GroupElement, GroupSpec};

/// Largest admissible ratio dt/ε.
pub const MAX_STEP_RATIO: f64 = 0.05;

/// Largest admissible number of steps on one path.
pub const MAX_STEPS: f64 = 1e9;

/// Largest admissible total step count of an experiment.
pub const STEP_BUDGET: f64 = 1e9;

/// Default h of the step rule.
pub const DEFAULT_H: f64 = 1e-2;

/// Residual bound enforced at every stored point.
pub const STORED_RESIDUAL_TOL: f64 = 1e-8;

/// dt = min(h·ε, h).
pub fn step_rule(epsilon: f64, h: f64) -> f64 {
    (h * epsilon).min(h)
}

fn on_grid(t: f64, dt: f64) -> bool {
    let k = (t / dt).round();
    (k * dt - t).abs() <= 1e-9 * t.abs().max(dt)
}

/// Largest step not above `dt_max` whose grid contains every time in `times`.
/// Returns `dt_max` unchanged when it already fits; falls back to it when no
/// step of the form T/K with K ≤ 64·T/dt_max does.
pub fn fit_step(dt_max: f64, times: &[f64]) -> f64 {
    if times.iter().all(|&t| on_grid(t, dt_max)) {
        return dt_max;
    }
    let horizon = times.iter().copied().fold(0.0, f64::max);
    if !(horizon > 0.0) || !(dt_max > 0.0) {
        return dt_max;
    }
    let k0 = (horizon / dt_max * (1.0 - 1e-12)).ceil().max(1.0) as u64;
    (k0..=64 * k0)
        .map(|k| horizon / k as f64)
        .find(|&dt| times.iter().all(|&t| on_grid(t, dt)))
        .unwrap_or(dt_max)
}

/// The data of the multiscale system
/// dg = ε^{-1/2} Σ A_k(g)∘db^k + ε^{-1} A₀(g) dt + Y₀(g) dt.
#[derive(Clone, Debug)]
pub struct MultiscaleSystem {
    pub spec: GroupSpec,
    pub epsilon: f64,
    pub generators: Vec<AlgebraVector>,
    pub a0: AlgebraVector,
    pub y0: AlgebraVector,
    pub g0: GroupElement,
}

impl MultiscaleSystem {
    pub fn new(
        spec: GroupSpec,
        epsilon: f64,
        generators: Vec<AlgebraVector>,
        a0: Option<AlgebraVector>,
        y0: AlgebraVector,
        g0: Option<GroupElement>,
    ) -> Result<MultiscaleSystem> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "epsilon must be positive, got {epsilon}"
            )));
        }
        for a in &generators {
            spec.require_h(a)?;
        }
        let a0 = a0.unwrap_or_else(|| spec.zero_vector());
        spec.require_h(&a0)?;
        spec.require_m(&y0)?;
        let g0 = match g0 {
            Some(g) => spec.element(g.into_matrix())?,
            None => spec.identity(),
        };
        Ok(MultiscaleSystem {
            spec,
            epsilon,
            generators,
            a0,
            y0,
            g0,
        })
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<MultiscaleSystem> {
        MultiscaleSystem::new(
            self.spec.clone(),
            epsilon,
            self.generators.clone(),
            Some(self.a0.clone()),
            self.y0.clone(),
            Some(self.g0.clone()),
        )
    }

    pub fn with_start(&self, g0: GroupElement) -> Result<MultiscaleSystem> {
        MultiscaleSystem::new(
            self.spec.clone(),
            self.epsilon,
            self.generators.clone(),
            Some(self.a0.clone()),
            self.y0.clone(),
            Some(g0),
        )
    }

    /// True when the fast fields commute pairwise, so the fast process is
    /// exp of its driving Brownian motions.
    pub fn fast_is_abelian(&self) -> bool {
        fields_commute(&self.generators, &self.a0)
    }
}

pub(crate) fn fields_commute(gens: &[AlgebraVector], a0: &AlgebraVector) -> bool {
    let mut all: Vec<&AlgebraVector> = gens.iter().collect();
    if !a0.is_zero() {
        all.push(a0);
    }
    for i in 0..all.len() {
        for j in i + 1..all.len() {
            let (x, y) = (all[i].matrix(), all[j].matrix());
            if (x * y - y * x).norm() > 1e-14 * (1.0 + x.norm() * y.norm()) {
                return false;
            }
        }
    }
    true
}

/// Step size, horizon, ensemble size, seed and what to record.
#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub dt: f64,
    pub horizon: f64,
    pub n_traj: usize,
    pub seed: u64,
    /// Times (in the integration clock) at which points are stored.
    pub record: Vec<f64>,
    pub store_group: bool,
}

impl SimConfig {
    /// Records only the start and the end.
    pub fn new(dt: f64, horizon: f64, n_traj: usize, seed: u64) -> SimConfig {
        SimConfig {
            dt,
            horizon,
            n_traj,
            seed,
            record: vec![0.0, horizon],
            store_group: false,
        }
    }

    pub fn record(mut self, times: &[f64]) -> SimConfig {
        self.record = times.to_vec();
        self
    }

    pub fn store_group(mut self, yes: bool) -> SimConfig {
        self.store_group = yes;
        self
    }

    pub fn steps(&self) -> Result<usize> {
        if !(self.dt > 0.0) || !(self.horizon >= 0.0) {
            return Err(Error::InvalidArgument(
                "dt must be positive and horizon non-negative".into(),
            ));
        }
        let steps = self.horizon / self.dt;
        if steps > MAX_STEPS {
            return Err(Error::HorizonGuard { steps });
        }
        self.step_index(self.horizon)
    }

    /// Step count reaching `t`, which must be a multiple of dt.
    pub fn step_index(&self, t: f64) -> Result<usize> {
        let k = (t / self.dt).round();
        if k < 0.0 || (k * self.dt - t).abs() > 1e-9 * t.abs().max(self.dt) {
            return Err(Error::InvalidArgument(format!(
                "time {t} is not a multiple of dt = {}",
                self.dt
            )));
        }
        Ok(k as usize)
    }

    /// Sorted step indices of the recorded times.
    pub fn record_steps(&self) -> Result<Vec<usize>> {
        let last = self.steps()?;
        let mut out = Vec::with_capacity(self.record.len());
        for &t in &self.record {
            let k = self.step_index(t)?;
            if k > last {
                return Err(Error::InvalidArgument(format!(
                    "record time {t} beyond horizon"
                )));
            }
            out.push(k);
        }
        if out.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(
                "record times must be strictly increasing".into(),
            ));
        }
        Ok(out)
    }
}

/// Rejects steps that do not resolve the fast scale.
pub fn check_fast_step(dt: f64, epsilon: f64) -> Result<()> {
    let max = MAX_STEP_RATIO * epsilon;
    if dt > max * (1.0 + 1e-12) {
        return Err(Error::StepTooLarge { dt, max });
    }
    Ok(())
}

/// Rejects experiments whose total step count exceeds [`STEP_BUDGET`].
pub fn check_budget(steps: f64) -> Result<()> {
    if steps > STEP_BUDGET {
        return Err(Error::BudgetExceeded { steps });
    }
    Ok(())
}
