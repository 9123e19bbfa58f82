use lie_homog::effective::{build_effective_sde, coeffs_closed_form};
use lie_homog::sim::{simulate_effective, MultiscaleSystem, SimConfig};
use lie_homog::verify::{haar_integral_oracle, moment_compare, LimitExperiment};
use lie_homog::{make_group, GroupId};

fn hopf(eps: f64) -> MultiscaleSystem {
    let spec = make_group(GroupId::Su2Hopf).unwrap();
    MultiscaleSystem::new(
        spec.clone(),
        eps,
        vec![spec.basis_vector(0)],
        None,
        spec.m_basis_vector(0),
        None,
    )
    .unwrap()
}

#[test]
fn limit_report_is_deterministic_across_thread_counts() {
    let sys = hopf(0.2);
    let exp = LimitExperiment::new(&[0.5], 40, 99);
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| exp.run(&sys).unwrap())
    };
    let a = run(1);
    let b = run(3);
    assert_eq!(a.report.rows.len(), b.report.rows.len());
    for (x, y) in a.report.rows.iter().zip(&b.report.rows) {
        assert_eq!(x.a.value.to_bits(), y.a.value.to_bits());
        assert_eq!(x.b.value.to_bits(), y.b.value.to_bits());
        assert_eq!(x.z.to_bits(), y.z.to_bits());
    }
}

/// Two batches of the same law with different seeds pass the 3σ battery
/// in at least 95 of 100 repetitions.
#[test]
fn z_test_is_calibrated_on_null_pairs() {
    let sys = hopf(1.0);
    let gen = coeffs_closed_form(&sys.y0, &sys.spec).unwrap();
    let sde = build_effective_sde(&gen, &sys.spec).unwrap();
    let mut passes = 0;
    for rep in 0..100u64 {
        let a = simulate_effective(
            &sde,
            &sys.spec,
            &sys.g0,
            &SimConfig::new(0.05, 0.5, 300, 2 * rep),
        )
        .unwrap();
        let b = simulate_effective(
            &sde,
            &sys.spec,
            &sys.g0,
            &SimConfig::new(0.05, 0.5, 300, 2 * rep + 1),
        )
        .unwrap();
        if moment_compare(&a, &b, &[0.5]).unwrap().verdict {
            passes += 1;
        }
    }
    assert!(passes >= 95, "{passes}/100");
}

#[test]
fn oracle_se_scales_as_inverse_root_n() {
    let spec = make_group(GroupId::Sphere { n: 3 }).unwrap();
    let y = spec.m_basis()[0].clone();
    let f = |h: &lie_homog::Mat| spec.inner(&spec.conjugate(h, &y), &y).powi(2);
    let se: Vec<f64> = [10_000, 100_000, 1_000_000]
        .iter()
        .map(|&n| haar_integral_oracle(f, &spec, n, 41).se.unwrap())
        .collect();
    for w in se.windows(2) {
        let ratio = w[0] / w[1] / 10f64.sqrt();
        assert!((1.0 / 1.5..=1.5).contains(&ratio), "{se:?}");
    }
}
