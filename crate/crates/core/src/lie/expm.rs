//! Matrix exponential for small complex matrices.
//!
//! Closed forms cover 2×2 matrices (traceless part squares to a scalar) and
//! matrices with X³ = sX for a real s: rank-two skew matrices (Rodrigues)
//! and Lorentz boosts. Everything else goes through scaling and squaring
//! with an adaptively truncated Taylor series.

use num_complex::Complex64;

use super::Mat;

/// Norm threshold reached before the series is summed.
pub const SCALING_THRESHOLD: f64 = 0.5;

const MAX_TERMS: usize = 40;

/// `exp(x)` for a square complex matrix.
pub fn expm(x: &Mat) -> Mat {
    let n = x.nrows();
    debug_assert_eq!(n, x.ncols());
    match n {
        0 => Mat::zeros(0, 0),
        1 => Mat::from_element(1, 1, x[(0, 0)].exp()),
        2 => expm_2x2(x),
        _ => expm_cubic(x).unwrap_or_else(|| expm_taylor(x)),
    }
}

fn expm_2x2(x: &Mat) -> Mat {
    let mu = (x[(0, 0)] + x[(1, 1)]) * 0.5;
    let a = x[(0, 0)] - mu;
    let b = x[(0, 1)];
    let c = x[(1, 0)];
    // traceless part Y satisfies Y² = (a² + bc)·I
    let delta = a * a + b * c;
    let (ch, sh_over_s) = if delta.norm() < 1e-6 {
        let d2 = delta * delta;
        (
            Complex64::new(1.0, 0.0) + delta / 2.0 + d2 / 24.0 + d2 * delta / 720.0,
            Complex64::new(1.0, 0.0) + delta / 6.0 + d2 / 120.0 + d2 * delta / 5040.0,
        )
    } else {
        let s = delta.sqrt();
        (s.cosh(), s.sinh() / s)
    };
    let scale = if mu == Complex64::new(0.0, 0.0) {
        Complex64::new(1.0, 0.0)
    } else {
        mu.exp()
    };
    let mut out = Mat::zeros(2, 2);
    out[(0, 0)] = scale * (ch + sh_over_s * a);
    out[(1, 1)] = scale * (ch - sh_over_s * a);
    out[(0, 1)] = scale * sh_over_s * b;
    out[(1, 0)] = scale * sh_over_s * c;
    out
}

/// Closed form when X³ = sX with s real, so that
/// exp(X) = I + f(s)·X + g(s)·X² with f, g from the sine/sinh series.
fn expm_cubic(x: &Mat) -> Option<Mat> {
    let n2 = x.norm_squared();
    if n2 == 0.0 {
        return Some(Mat::identity(x.nrows(), x.nrows()));
    }
    let x2 = x * x;
    let x3 = &x2 * x;
    let s = super::inner_product(&x3, x) / n2;
    if (&x3 - x * Complex64::new(s, 0.0)).norm() > 1e-14 * n2 * n2.sqrt() {
        return None;
    }
    let (f, g) = if s.abs() < 1e-8 {
        (
            1.0 + s / 6.0 + s * s / 120.0,
            0.5 + s / 24.0 + s * s / 720.0,
        )
    } else if s < 0.0 {
        let t = (-s).sqrt();
        (t.sin() / t, (1.0 - t.cos()) / -s)
    } else {
        let t = s.sqrt();
        (t.sinh() / t, (t.cosh() - 1.0) / s)
    };
    let n = x.nrows();
    Some(Mat::identity(n, n) + x * Complex64::new(f, 0.0) + x2 * Complex64::new(g, 0.0))
}

/// Scaling and squaring around a truncated Taylor series.
pub fn expm_taylor(x: &Mat) -> Mat {
    let n = x.nrows();
    let norm = x.norm();
    let squarings = if norm > SCALING_THRESHOLD {
        (norm / SCALING_THRESHOLD).log2().ceil() as i32
    } else {
        0
    };
    let scaled = if squarings > 0 {
        x * Complex64::new(2f64.powi(-squarings), 0.0)
    } else {
        x.clone()
    };

    let mut sum = Mat::identity(n, n);
    let mut term = Mat::identity(n, n);
    for k in 1..=MAX_TERMS {
        term = &term * &scaled * Complex64::new(1.0 / k as f64, 0.0);
        sum += &term;
        if term.norm() < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}
