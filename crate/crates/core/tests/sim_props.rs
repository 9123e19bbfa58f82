use num_complex::Complex64;
use proptest::prelude::*;

use lie_homog::effective::{build_effective_sde, coeffs_closed_form};
use lie_homog::sim::{
    fit_step, integrate_group_sde, integrate_slow_ode_stream, integrate_split, simulate_effective,
    MultiscaleSystem, SimConfig,
};
use lie_homog::verify::{moment_compare, pathwise_split_test};
use lie_homog::{make_group, GroupId, GroupSpec, Mat};

fn full(spec: &GroupSpec) -> Vec<lie_homog::AlgebraVector> {
    (0..spec.dim_h()).map(|i| spec.basis_vector(i)).collect()
}

fn system(id: GroupId, eps: f64) -> MultiscaleSystem {
    let spec = make_group(id).unwrap();
    MultiscaleSystem::new(
        spec.clone(),
        eps,
        full(&spec),
        None,
        spec.m_basis_vector(0),
        None,
    )
    .unwrap()
}

/// Signed permutation matrix of determinant one, from a permutation index
/// and sign bits. Left multiplication by it is exact.
fn signed_permutation(n: usize, perm_seed: usize, signs: u32) -> Mat {
    let mut order: Vec<usize> = (0..n).collect();
    let mut s = perm_seed;
    for i in (1..n).rev() {
        order.swap(i, s % (i + 1));
        s /= i + 1;
    }
    let mut k = Mat::zeros(n, n);
    for (i, &j) in order.iter().enumerate() {
        let sign = if signs >> i & 1 == 1 { -1.0 } else { 1.0 };
        k[(i, j)] = Complex64::new(sign, 0.0);
    }
    let det: f64 = k.map(|z| z.re).determinant();
    if det < 0.0 {
        k.row_mut(0).neg_mut();
    }
    k
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn left_translation_is_exact(
        n in 2usize..5,
        perm in any::<usize>(),
        signs in any::<u32>(),
        seed in any::<u64>(),
    ) {
        let sys = system(GroupId::Sphere { n }, 0.2);
        let k = signed_permutation(n + 1, perm, signs);
        let moved = sys.with_start(sys.spec.element(k.clone()).unwrap()).unwrap();
        let cfg = SimConfig::new(1e-2, 0.5, 2, seed).record(&[0.0, 0.25, 0.5]).store_group(true);
        for (a, b) in [
            (integrate_group_sde(&sys, &cfg).unwrap(), integrate_group_sde(&moved, &cfg).unwrap()),
            (
                integrate_slow_ode_stream(&sys, &cfg, true).unwrap(),
                integrate_slow_ode_stream(&moved, &cfg, true).unwrap(),
            ),
        ] {
            for tr in 0..2 {
                for ti in 0..3 {
                    prop_assert!(&k * a.group_point(tr, ti).unwrap() == *b.group_point(tr, ti).unwrap());
                }
            }
        }
    }

    #[test]
    fn su2_left_translation_is_exact(seed in any::<u64>(), power in 0u32..4) {
        let sys = system(GroupId::Su2Hopf, 0.2);
        let i = Complex64::new(0.0, 1.0);
        let mut k = Mat::zeros(2, 2);
        k[(0, 0)] = i.powu(power);
        k[(1, 1)] = (-i).powu(power);
        let moved = sys.with_start(sys.spec.element(k.clone()).unwrap()).unwrap();
        let cfg = SimConfig::new(1e-2, 0.5, 2, seed).record(&[0.0, 0.5]).store_group(true);
        let a = integrate_group_sde(&sys, &cfg).unwrap();
        let b = integrate_group_sde(&moved, &cfg).unwrap();
        for tr in 0..2 {
            for ti in 0..2 {
                prop_assert!(&k * a.group_point(tr, ti).unwrap() == *b.group_point(tr, ti).unwrap());
            }
        }
    }

    #[test]
    fn fiber_is_conserved_without_drift(
        id in prop::sample::select(vec![GroupId::Su2Hopf, GroupId::Sphere { n: 3 }, GroupId::Stiefel { n: 4, k: 2 }, GroupId::Hyperbolic { n: 2 }]),
        start in prop::collection::vec(-1.0f64..1.0, 10),
        seed in any::<u64>(),
    ) {
        let spec = make_group(id).unwrap();
        let g0 = spec.exp(&spec.vector(&start[..spec.dim()]).unwrap(), 1.0);
        let sys = MultiscaleSystem::new(spec.clone(), 0.1, full(&spec), None, spec.zero_vector(), Some(g0.clone()))
            .unwrap();
        let cfg = SimConfig::new(1e-3, 0.5, 2, seed).record(&[0.0, 0.1, 0.5]);
        let b = integrate_group_sde(&sys, &cfg).unwrap();
        let x0 = spec.project(&g0);
        for tr in 0..2 {
            for ti in 0..3 {
                let x = b.point(tr, ti);
                let d = x.iter().zip(x0.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                prop_assert!(d <= 1e-9, "{d}");
            }
        }
    }
}

#[test]
fn split_g_path_matches_group_sde() {
    let sys = system(GroupId::Sphere { n: 3 }, 0.5);
    let cfg = SimConfig::new(1e-2, 1.0, 3, 17)
        .record(&[0.0, 0.5, 1.0])
        .store_group(true);
    let split = integrate_split(&sys, &cfg).unwrap();
    let sde = integrate_group_sde(&sys, &cfg).unwrap();
    for (tr, path) in split.paths.iter().enumerate() {
        for ti in 0..3 {
            assert!(path.g[ti] == *sde.group_point(tr, ti).unwrap());
        }
    }
}

/// Residual stays below 1e-8 over 10⁶ steps without re-projection.
#[test]
fn long_runs_stay_in_the_group() {
    let rec: Vec<f64> = (0..=4).map(|i| 250.0 * i as f64).collect();
    let cfg = SimConfig::new(1e-3, 1000.0, 1, 23).record(&rec);
    // the hyperboloid walk drifts off at linear speed and cosh overflows by
    // t = 1000, so the non-compact case takes its 10⁶ steps over t = 10
    let short = SimConfig::new(1e-5, 10.0, 1, 23).record(&[0.0, 5.0, 10.0]);
    let hyp = system(GroupId::Hyperbolic { n: 3 }, 1.0);
    let b = integrate_group_sde(&hyp, &short).unwrap();
    assert!(b.max_residual <= 1e-8, "{}", b.max_residual);

    let sphere = system(GroupId::Sphere { n: 3 }, 1.0);
    let b = integrate_group_sde(&sphere, &cfg).unwrap();
    assert!(b.max_residual <= 1e-8, "{}", b.max_residual);

    let hopf = system(GroupId::Su2Hopf, 1.0);
    let b = integrate_slow_ode_stream(&hopf, &cfg, true).unwrap();
    assert!(b.max_residual <= 1e-8, "{}", b.max_residual);

    let gen = coeffs_closed_form(&sphere.y0, &sphere.spec).unwrap();
    let sde = build_effective_sde(&gen, &sphere.spec).unwrap();
    let b = simulate_effective(&sde, &sphere.spec, &sphere.g0, &cfg).unwrap();
    assert!(b.max_residual <= 1e-8, "{}", b.max_residual);
}

#[test]
fn split_error_has_positive_order() {
    let sys = system(GroupId::Su2Hopf, 1.0);
    let dts = [4e-3, 2e-3, 1e-3];
    let t = pathwise_split_test(&sys, &dts, 0.5, 4, 29).unwrap();
    let order = (t.max_deviation[0] / t.max_deviation[2]).ln() / (dts[0] / dts[2]).ln();
    assert!(order >= 0.4, "{order}: {:?}", t.max_deviation);
}

/// Moments of the effective simulation are stable under dt halving.
#[test]
fn effective_statistics_self_converge() {
    let sys = system(GroupId::Sphere { n: 2 }, 1.0);
    let gen = coeffs_closed_form(&sys.y0, &sys.spec).unwrap();
    let sde = build_effective_sde(&gen, &sys.spec).unwrap();
    let coarse = SimConfig::new(2e-2, 1.0, 2000, 31);
    let fine = SimConfig::new(1e-2, 1.0, 2000, 37);
    let a = simulate_effective(&sde, &sys.spec, &sys.g0, &coarse).unwrap();
    let b = simulate_effective(&sde, &sys.spec, &sys.g0, &fine).unwrap();
    let r = moment_compare(&a, &b, &[1.0]).unwrap();
    assert!(r.verdict, "max |z| {}", r.max_abs_z());
}

#[test]
fn step_is_fitted_to_record_times() {
    // 1.25 / 0.004 = 312.5 steps, so the step shrinks to 1.25 / 313
    assert_eq!(fit_step(0.004, &[0.0, 1.25]), 1.25 / 313.0);
    assert_eq!(fit_step(0.01, &[0.0, 0.5, 1.0]), 0.01);
    let dt = fit_step(0.03, &[0.7, 1.1]);
    assert!(dt <= 0.03);
    for t in [0.7, 1.1] {
        let k = (t / dt).round();
        assert!((k * dt - t).abs() <= 1e-9);
    }
}
