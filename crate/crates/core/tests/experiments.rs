use diffusense::experiments::{
    run_sweep, run_transition, CovarianceMode, Metric, SweepResult, SweepSpec,
};
use diffusense::{Correlation, Error, Estimator};

fn small(mode: CovarianceMode) -> SweepSpec {
    SweepSpec {
        orders: vec![1, 2],
        q_values: vec![1, 2, 5],
        beta_values: vec![0.0, 0.5, 1.0],
        samples: 256,
        seeds: 3,
        covariance_mode: mode,
        ..SweepSpec::default()
    }
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(f)
}

#[test]
fn one_record_per_grid_point() {
    let spec = small(CovarianceMode::Empirical);
    let result = run_sweep(&spec).unwrap();
    assert_eq!(result.records.len(), 3 * 2 * 3 * 3);
    for r in &result.records {
        assert!((0.0..=1.0).contains(&r.mean), "{r:?}");
        assert!(r.std >= 0.0);
    }
    for e in Estimator::ALL {
        for l in [1, 2] {
            for q in [1, 2, 5] {
                for b in [0.0, 0.5, 1.0] {
                    assert!(result.find(Metric::Estimator(e), l, q, b).is_some());
                }
            }
        }
    }
    assert_eq!(result.panels().len(), 6);
}

#[test]
fn sweeps_are_reproducible() {
    let analytic = small(CovarianceMode::Analytic);
    assert_eq!(run_sweep(&analytic).unwrap(), run_sweep(&analytic).unwrap());
    let empirical = small(CovarianceMode::Empirical);
    let a = run_sweep(&empirical).unwrap();
    assert_eq!(a, run_sweep(&empirical).unwrap());
    let shifted = SweepSpec {
        base_seed: 1,
        ..empirical
    };
    assert_ne!(a, run_sweep(&shifted).unwrap());
}

#[test]
fn sequential_and_parallel_agree() {
    let spec = small(CovarianceMode::Empirical);
    let seq: SweepResult = in_pool(1, || run_sweep(&spec).unwrap());
    let par: SweepResult = in_pool(4, || run_sweep(&spec).unwrap());
    assert_eq!(seq, par);
    let t1 = in_pool(1, || {
        run_transition(&[1, 3], &[1, 4, 9], 256, 2, 7).unwrap()
    });
    let t4 = in_pool(4, || {
        run_transition(&[1, 3], &[1, 4, 9], 256, 2, 7).unwrap()
    });
    assert_eq!(t1, t4);
}

#[test]
fn analytic_mode_ignores_samples_and_seeds() {
    let a = small(CovarianceMode::Analytic);
    let b = SweepSpec {
        samples: 17,
        seeds: 1,
        ..a.clone()
    };
    let (ra, rb) = (run_sweep(&a).unwrap(), run_sweep(&b).unwrap());
    for (x, y) in ra.records.iter().zip(&rb.records) {
        assert_eq!((x.mean, x.std), (y.mean, y.std));
        assert_eq!(x.std, 0.0);
    }
}

/// Long empirical blocks land close to the analytic surface on a thinned
/// version of the standard grid.
#[test]
fn empirical_approaches_analytic() {
    let base = SweepSpec {
        orders: vec![1, 2, 3],
        q_values: vec![1, 2, 3, 5, 8, 12, 17, 25, 36],
        beta_values: vec![0.0, 0.2, 0.4, 0.6, 0.8, 1.0],
        samples: 16384,
        seeds: 10,
        ..SweepSpec::default()
    };
    let empirical = run_sweep(&base).unwrap();
    let analytic = run_sweep(&SweepSpec {
        covariance_mode: CovarianceMode::Analytic,
        ..base
    })
    .unwrap();
    let mut worst = (0.0, None);
    for (e, a) in empirical.records.iter().zip(&analytic.records) {
        assert_eq!(
            (e.metric, e.order, e.q, e.beta),
            (a.metric, a.order, a.q, a.beta)
        );
        let gap = (e.mean - a.mean).abs();
        if gap > worst.0 {
            worst = (gap, Some(e.clone()));
        }
    }
    assert!(worst.0 <= 0.05, "gap {} at {:?}", worst.0, worst.1);
}

#[test]
fn correlated_sweep_comedie_tracks_beta() {
    let spec = SweepSpec {
        estimators: vec![Estimator::Comedie],
        correlation: Correlation::Identical,
        covariance_mode: CovarianceMode::Analytic,
        ..small(CovarianceMode::Analytic)
    };
    for r in run_sweep(&spec).unwrap().records {
        assert!((r.mean - r.beta).abs() < 1e-12, "{r:?}");
    }
}

#[test]
fn invalid_specs() {
    let empty_q = SweepSpec {
        q_values: vec![],
        ..SweepSpec::default()
    };
    assert!(matches!(run_sweep(&empty_q), Err(Error::EmptyAxis(ref a)) if a == "q_values"));
    let bad_beta = SweepSpec {
        beta_values: vec![0.5, 1.5],
        ..SweepSpec::default()
    };
    assert!(
        matches!(run_sweep(&bad_beta), Err(Error::Config { ref field, .. }) if field == "beta_values")
    );
    assert!(matches!(
        run_transition(&[], &[1], 16, 1, 0),
        Err(Error::EmptyAxis(_))
    ));
    assert!(run_transition(&[1], &[1], 16, 0, 0).is_err());
}

#[test]
fn csv_layouts() {
    let result = run_sweep(&small(CovarianceMode::Analytic)).unwrap();
    let long = result.to_long_csv();
    assert!(long.starts_with("estimator,L,Q,beta,mean,std\n"));
    assert_eq!(long.lines().count(), 1 + result.records.len());
    let m = result.matrix_csv(Metric::Estimator(Estimator::Comedie), 2);
    let lines: Vec<&str> = m.lines().collect();
    assert_eq!(lines[0], "beta,1,2,5");
    assert_eq!(lines.len(), 4);
    let t = run_transition(&[1, 2], &[1, 4], 64, 1, 0).unwrap();
    let tm = t.transition_matrix_csv();
    assert_eq!(tm.lines().next(), Some("L,1,4"));
    assert_eq!(tm.lines().count(), 3);
}
