use serde::Serialize;

use super::{SimConfig, STORED_RESIDUAL_TOL};
use crate::error::{Error, Result};
use crate::lie::{GroupSpec, Manifold, Mat};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    GroupSde,
    FastH,
    SlowOde,
    SlowOdeMidpoint,
    Split,
    Effective,
}

/// Ensemble of paths stored at a common list of times.
///
/// Projected points are always kept; group points only on request.
/// `times` are reporting times, i.e. integration times multiplied by
/// `time_scale`.
#[derive(Clone, Debug)]
pub struct TrajectoryBatch {
    pub times: Vec<f64>,
    pub time_scale: f64,
    pub dt: f64,
    pub seed: u64,
    pub scheme: Scheme,
    pub manifold: Manifold,
    pub n_traj: usize,
    pub width: usize,
    points: Vec<f64>,
    group: Option<Vec<Mat>>,
    pub max_residual: f64,
    pub max_defect: f64,
}

impl TrajectoryBatch {
    /// Builds a batch from per-trajectory matrices at the recorded times.
    pub(crate) fn assemble(
        spec: &GroupSpec,
        cfg: &SimConfig,
        scheme: Scheme,
        paths: Vec<Vec<Mat>>,
    ) -> Result<TrajectoryBatch> {
        let width = spec.manifold().ambient_len();
        let n_times = cfg.record.len();
        let mut points = Vec::with_capacity(paths.len() * n_times * width);
        let mut max_residual: f64 = 0.0;
        let mut max_defect: f64 = 0.0;
        for path in &paths {
            debug_assert_eq!(path.len(), n_times);
            for g in path {
                max_residual = max_residual.max(spec.residual(g));
                let x = spec.project_matrix(g);
                max_defect = max_defect.max(spec.manifold().defect(&x));
                points.extend(x.iter());
            }
        }
        if max_residual.is_nan() || max_residual > STORED_RESIDUAL_TOL {
            return Err(Error::NotInGroup {
                residual: max_residual,
                tol: STORED_RESIDUAL_TOL,
            });
        }
        let group = cfg
            .store_group
            .then(|| paths.into_iter().flatten().collect());
        Ok(TrajectoryBatch {
            times: cfg.record.clone(),
            time_scale: 1.0,
            dt: cfg.dt,
            seed: cfg.seed,
            scheme,
            manifold: spec.manifold().clone(),
            n_traj: cfg.n_traj,
            width,
            points,
            group,
            max_residual,
            max_defect,
        })
    }

    /// Projected point of trajectory `traj` at time index `ti`.
    pub fn point(&self, traj: usize, ti: usize) -> &[f64] {
        let start = (traj * self.times.len() + ti) * self.width;
        &self.points[start..start + self.width]
    }

    pub fn group_point(&self, traj: usize, ti: usize) -> Option<&Mat> {
        self.group
            .as_ref()
            .map(|g| &g[traj * self.times.len() + ti])
    }

    pub fn has_group(&self) -> bool {
        self.group.is_some()
    }

    /// Multiplies the reporting times by `scale` (ε for multiscale runs read
    /// at slow times).
    pub fn rescale_time(mut self, scale: f64) -> TrajectoryBatch {
        for t in &mut self.times {
            *t *= scale;
        }
        self.time_scale *= scale;
        self
    }

    /// Index of reporting time `t`, matched to 1e-9 relative.
    pub fn time_index(&self, t: f64) -> Option<usize> {
        self.times
            .iter()
            .position(|&s| (s - t).abs() <= 1e-9 * t.abs().max(1e-12))
    }
}
