//! Running moments, standard errors and the deterministic parallel Haar
//! Monte Carlo driver.

use rayon::prelude::*;
use serde::Serialize;

use crate::lie::{GroupSpec, Mat};
use crate::rng::{substream, Purpose};

/// Number of samples per independent substream in Monte Carlo loops.
/// Fixed so that results do not depend on the thread count.
pub const CHUNK: usize = 4096;

/// A value with its Monte Carlo standard error; `se == None` marks an
/// exact value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub se: Option<f64>,
}

impl Estimate {
    pub fn exact(value: f64) -> Estimate {
        Estimate { value, se: None }
    }

    pub fn mc(value: f64, se: f64) -> Estimate {
        Estimate {
            value,
            se: Some(se),
        }
    }

    pub fn se_or_zero(&self) -> f64 {
        self.se.unwrap_or(0.0)
    }

    /// |value - target| ≤ k·SE, with a 1e-12 relative floor for rounding
    /// (all that is left for exact values and zero-variance estimates).
    pub fn within(&self, target: f64, k: f64) -> bool {
        let tol = k * self.se_or_zero() + 1e-12 * (1.0 + target.abs());
        (self.value - target).abs() <= tol
    }
}

/// Welford accumulator over vectors of fixed width.
#[derive(Clone, Debug)]
pub struct Moments {
    count: u64,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Moments {
    pub fn new(width: usize) -> Moments {
        Moments {
            count: 0,
            mean: vec![0.0; width],
            m2: vec![0.0; width],
        }
    }

    pub fn push(&mut self, x: &[f64]) {
        self.count += 1;
        let n = self.count as f64;
        for ((m, s), &v) in self.mean.iter_mut().zip(self.m2.iter_mut()).zip(x) {
            let d = v - *m;
            *m += d / n;
            *s += d * (v - *m);
        }
    }

    /// Chan's pairwise combination.
    pub fn merge(&mut self, other: &Moments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = other.clone();
            return;
        }
        let na = self.count as f64;
        let nb = other.count as f64;
        let n = na + nb;
        for i in 0..self.mean.len() {
            let d = other.mean[i] - self.mean[i];
            self.mean[i] += d * nb / n;
            self.m2[i] += other.m2[i] + d * d * na * nb / n;
        }
        self.count += other.count;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn variance(&self, i: usize) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2[i] / (self.count - 1) as f64
        }
    }

    /// Sample standard deviation over √N.
    pub fn se(&self, i: usize) -> f64 {
        if self.count == 0 {
            return f64::INFINITY;
        }
        (self.variance(i) / self.count as f64).sqrt()
    }

    pub fn ses(&self) -> Vec<f64> {
        (0..self.mean.len()).map(|i| self.se(i)).collect()
    }

    pub fn estimate(&self, i: usize) -> Estimate {
        Estimate::mc(self.mean[i], self.se(i))
    }
}

/// Merges a list of accumulators in a fixed binary-tree order.
pub fn merge_pairwise(mut parts: Vec<Moments>, width: usize) -> Moments {
    if parts.is_empty() {
        return Moments::new(width);
    }
    while parts.len() > 1 {
        let mut next = Vec::with_capacity(parts.len().div_ceil(2));
        let mut it = parts.into_iter();
        while let Some(mut a) = it.next() {
            if let Some(b) = it.next() {
                a.merge(&b);
            }
            next.push(a);
        }
        parts = next;
    }
    parts.pop().unwrap()
}

/// Averages `f(h)` over `n` Haar samples of H.
///
/// Samples are split into chunks of [`CHUNK`], chunk `c` drawing from
/// substream `(purpose, c)`; chunks run in parallel and merge in index
/// order, so the result is a deterministic function of `(seed, n)`.
pub fn haar_mc<F>(
    spec: &GroupSpec,
    n: usize,
    seed: u64,
    purpose: Purpose,
    width: usize,
    f: F,
) -> Moments
where
    F: Fn(&Mat, &mut [f64]) + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    let parts: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = substream(seed, purpose, c as u64, 0);
            let count = CHUNK.min(n - c * CHUNK);
            let mut acc = Moments::new(width);
            let mut buf = vec![0.0; width];
            for _ in 0..count {
                let h = spec.haar_matrix(&mut rng);
                f(&h, &mut buf);
                acc.push(&buf);
            }
            acc
        })
        .collect();
    merge_pairwise(parts, width)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn merge_matches_sequential(xs in prop::collection::vec(-10.0f64..10.0, 2..200), split in 1usize..199) {
            let split = split.min(xs.len() - 1);
            let mut whole = Moments::new(1);
            xs.iter().for_each(|&x| whole.push(&[x]));
            let mut a = Moments::new(1);
            let mut b = Moments::new(1);
            xs[..split].iter().for_each(|&x| a.push(&[x]));
            xs[split..].iter().for_each(|&x| b.push(&[x]));
            a.merge(&b);
            prop_assert!((a.mean()[0] - whole.mean()[0]).abs() < 1e-10);
            prop_assert!((a.variance(0) - whole.variance(0)).abs() < 1e-8 * (1.0 + whole.variance(0)));
        }
    }

    #[test]
    fn se_of_constant_is_zero() {
        let mut m = Moments::new(2);
        for _ in 0..10 {
            m.push(&[1.0, 2.0]);
        }
        assert_eq!(m.se(0), 0.0);
        assert_eq!(m.mean(), &[1.0, 2.0]);
    }

    #[test]
    fn estimate_within() {
        assert!(Estimate::mc(1.0, 0.1).within(1.35, 4.0));
        assert!(!Estimate::mc(1.0, 0.1).within(1.5, 4.0));
        assert!(Estimate::exact(0.25).within(0.25, 4.0));
        assert!(!Estimate::exact(0.25).within(0.2500001, 4.0));
    }
}
