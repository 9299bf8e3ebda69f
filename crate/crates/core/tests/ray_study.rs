//! A short pole sweep on a coarse mesh and the preconditions of the driver.

use abpole_core::crack::{solve_limit_profile, CrackProblemSpec, LadderOptions};
use abpole_core::eigen::EigenOptions;
use abpole_core::ray::{reference_solution, run_ray, verify_theorem, ModelProblem, RayMeshOptions, RayOptions};
use abpole_core::{Direction, Error};

fn coarse() -> RayOptions {
    RayOptions {
        mesh: RayMeshOptions {
            h_global: 0.08,
            origin_factor: 1.0 / 10.0,
            pole_factor: 1.0 / 100.0,
            ..Default::default()
        },
        ..Default::default()
    }
}

#[test]
fn first_eigenvalue_sweep_follows_the_limit_problem() {
    let model = ModelProblem::half_disk(1).unwrap();
    let opts = coarse();
    let reference = reference_solution(&model, &opts.mesh, &EigenOptions::default(), 0.05).unwrap();
    assert_eq!(reference.j(), 1);
    let d = Direction::new(0.0).unwrap();
    let ts: Vec<f64> = (0..5).map(|k| 0.1 * 0.7f64.powi(k)).collect();
    let study = run_ray(&model, &reference, &d, &ts, &opts).unwrap();
    for s in &study.samples {
        assert!(s.lambda_a > s.lambda_ref, "t = {}", s.t);
        assert!(s.hardy.unwrap() <= 1.0);
        assert!(s.poincare.iter().all(|&(_, r)| r <= 1e-6));
    }
    let profile = solve_limit_profile(&CrackProblemSpec::new(d, 1), &LadderOptions::default()).unwrap();
    let report = verify_theorem(&study, &profile, 0.15, 0.10).unwrap();
    assert!(report.pass(), "{report:?}");

    let other = solve_limit_profile(&CrackProblemSpec::new(Direction::new(0.3).unwrap(), 1), &LadderOptions::default())
        .unwrap();
    assert!(matches!(verify_theorem(&study, &other, 0.15, 0.1), Err(Error::InvalidArgument(_))));
}

#[test]
fn sweep_preconditions() {
    let model = ModelProblem::half_disk(1).unwrap();
    let opts = coarse();
    let reference = reference_solution(&model, &opts.mesh, &EigenOptions::default(), 0.05).unwrap();
    let d = Direction::new(0.0).unwrap();
    assert!(run_ray(&model, &reference, &d, &[0.4, 0.2], &opts).is_err());
    assert!(run_ray(&model, &reference, &d, &[0.1, 0.09], &opts).is_err());
    assert!(run_ray(&model, &reference, &d, &[], &opts).is_err());
}

#[test]
fn reference_detects_vanishing_order_two() {
    let model = ModelProblem::half_disk(2).unwrap();
    let opts = coarse();
    let r = reference_solution(&model, &opts.mesh, &EigenOptions::default(), 0.05).unwrap();
    assert_eq!(r.j(), 2);
    let o = model.oracle.unwrap();
    assert!((r.beta() - o.beta).abs() / o.beta < 0.05);
}
