//! Half-disk spectrum against Bessel zeros, same-mesh differencing and cut independence.

use std::sync::Arc;

use abpole_core::eigen::{solve_assembly, EigenOptions};
use abpole_core::fe::{FeOrder, FeSpace};
use abpole_core::gauge::{assemble, TransmissionMode, WeightField};
use abpole_core::mesh::{build_half_disk_mesh, insert_slit, Grading, MeshOptions};
use abpole_core::ray::{pole_eigenvalues, CutKind, ModelProblem, RayMeshOptions, RayOptions};
use abpole_core::{Direction, Point};

// j_{1,1}², j_{2,1}², j_{3,1}², j_{1,2}²
const ORACLE: [f64; 4] = [14.681970642123893, 26.374616427163390, 40.706465818200316, 49.218456321694600];

#[test]
fn lowest_four_match_bessel_zeros() {
    let opts = MeshOptions::new(1.0, 0.05).with_grading(Grading::new(Point::ORIGIN, 0.02, 0.0));
    let space = Arc::new(FeSpace::new(build_half_disk_mesh(&opts).unwrap(), FeOrder::P2));
    let asm = assemble(space, None, &WeightField::default(), TransmissionMode::Continuous).unwrap();
    let slice = solve_assembly(&asm, 4, &EigenOptions::default()).unwrap();
    for (got, want) in slice.values().iter().zip(ORACLE) {
        assert!((got - want).abs() / want < 1e-3, "{got} vs {want}");
    }
    for p in &slice.pairs {
        assert!(p.residual <= 1e-9);
    }
}

#[test]
fn glued_slit_reproduces_the_unslit_spectrum() {
    let a = Point::new(0.3, 0.1);
    let end = Point::new(0.3, (1.0f64 - 0.09).sqrt());
    let opts = MeshOptions::new(1.0, 0.1).with_grading(Grading::new(a, 0.01, 0.0)).with_constraint(vec![a, end]);
    let mesh = build_half_disk_mesh(&opts).unwrap();
    let (slit_mesh, slit) = insert_slit(&mesh, &[a, end]).unwrap();
    let q = WeightField::default();
    let plain = assemble(Arc::new(FeSpace::new(mesh, FeOrder::P2)), None, &q, TransmissionMode::Continuous).unwrap();
    let glued = assemble(Arc::new(FeSpace::new(slit_mesh, FeOrder::P2)), Some(&slit), &q, TransmissionMode::Continuous)
        .unwrap();
    let opts = EigenOptions { tol: 1e-11, ..Default::default() };
    let l0 = solve_assembly(&plain, 3, &opts).unwrap().values();
    let l1 = solve_assembly(&glued, 3, &opts).unwrap().values();
    for (x, y) in l0.iter().zip(&l1) {
        assert!((x - y).abs() / x < 1e-10, "{x} vs {y}");
    }
}

#[test]
fn pole_spectrum_does_not_depend_on_the_cut() {
    let model = ModelProblem::half_disk(1).unwrap();
    let opts = RayOptions { mesh: RayMeshOptions { h_global: 0.08, ..Default::default() }, ..Default::default() };
    let a = Direction::new(0.4).unwrap().at(0.1);
    let radial = pole_eigenvalues(&model, a, CutKind::Radial, 2, &opts).unwrap();
    let vertical = pole_eigenvalues(&model, a, CutKind::Vertical, 2, &opts).unwrap();
    for (x, y) in radial.iter().zip(&vertical) {
        assert!((x - y).abs() / x < 5e-3, "{x} vs {y}");
    }
    // the pole raises the first eigenvalue
    assert!(radial[0] > ORACLE[0]);
}

#[test]
fn weighted_problem_scales_the_spectrum() {
    let opts = MeshOptions::new(1.0, 0.1);
    let space = Arc::new(FeSpace::new(build_half_disk_mesh(&opts).unwrap(), FeOrder::P2));
    let one = assemble(space.clone(), None, &WeightField::default(), TransmissionMode::Continuous).unwrap();
    let two = assemble(space, None, &WeightField::constant(2.0), TransmissionMode::Continuous).unwrap();
    let l1 = solve_assembly(&one, 2, &EigenOptions::default()).unwrap().values();
    let l2 = solve_assembly(&two, 2, &EigenOptions::default()).unwrap().values();
    for (x, y) in l1.iter().zip(&l2) {
        assert!((x - 2.0 * y).abs() / x < 1e-9);
    }
}
