//! Limit-system tests against an independently coded 2D Euler reference.

mod common;

use common::EulerRef;

use mhd3s_core::field::ScalarField;
use mhd3s_core::grid::GridSpec;
use mhd3s_core::limit::{run_limit, LimitState};

fn taylor_green(grid: &std::sync::Arc<GridSpec>) -> (ScalarField, ScalarField) {
    (
        ScalarField::from_fn(grid, |x, y, _| x.sin() * y.cos()),
        ScalarField::from_fn(grid, |x, y, _| -(x.cos() * y.sin())),
    )
}

/// With b̄_h = 0 and μ_lim = 0 the horizontal velocity obeys 2D
/// incompressible Euler; compare against the vorticity-streamfunction
/// reference on the same grid and clock.
fn euler_agreement(perturbed: bool) -> f64 {
    let grid = GridSpec::new_2d(64, 64).unwrap();
    let (mut u1, mut u2) = taylor_green(&grid);
    if perturbed {
        // Break the steady state so the comparison exercises real dynamics;
        // the projection keeps the field solenoidal.
        let s1 = ScalarField::from_fn(&grid, |x, y, _| 0.3 * (2.0 * x + y).sin());
        let s2 = ScalarField::from_fn(&grid, |x, y, _| 0.2 * (x - y).cos());
        u1.axpy(1.0, &s1).unwrap();
        u2.axpy(1.0, &s2).unwrap();
        let (p1, p2) = mhd3s_core::field::leray_h(&u1, &u2).unwrap();
        u1 = p1;
        u2 = p2;
    }

    let mut init = LimitState::zeros(&grid);
    init.uh = [u1.clone(), u2.clone()];
    init.r = ScalarField::from_fn(&grid, |x, y, _| 0.2 * (x + y).cos());
    init.u3 = ScalarField::from_fn(&grid, |x, _, _| 0.1 * x.sin());
    init.r_mean0 = 0.0;
    init.b3_mean0 = 0.0;

    let t_end = 0.5;
    let mut reference = EulerRef::from_velocity(&u1, &u2);
    let mut sampled = Vec::new();
    run_limit(init, 0.0, t_end, 0.2, 11, |_, t, l| {
        sampled.push((t, l.uh[0].clone(), l.uh[1].clone()));
    })
    .unwrap();

    // March the reference over each sample interval with a finer step than
    // the limit run uses, so its own error is negligible in the comparison.
    let interval = sampled[1].0 - sampled[0].0;
    let mut worst = 0.0f64;
    for (_, lu1, lu2) in sampled.iter().skip(1) {
        let steps = 16;
        for _ in 0..steps {
            reference.step(interval / steps as f64);
        }
        let (r1, r2) = reference.velocity();
        let d1 = lu1.sub(&r1).unwrap();
        let d2 = lu2.sub(&r2).unwrap();
        worst = worst.max((d1.sobolev_norm_sq(1) + d2.sobolev_norm_sq(1)).sqrt());
    }
    worst
}

#[test]
fn euler_reference_agreement_taylor_green() {
    let err = euler_agreement(false);
    assert!(err < 1e-6, "H¹ deviation from Euler reference: {err:.3e}");
}

#[test]
fn euler_reference_agreement_perturbed() {
    let err = euler_agreement(true);
    assert!(err < 1e-6, "H¹ deviation from Euler reference: {err:.3e}");
}

#[test]
fn zero_initial_data_stays_zero() {
    let grid = GridSpec::new_2d(32, 32).unwrap();
    let init = LimitState::zeros(&grid);
    let out = run_limit(init, 0.3, 0.2, 0.4, 5, |_, _, l| {
        assert_eq!(l.quadratic_energy(0.3), 0.0);
    })
    .unwrap();
    assert_eq!(out.quadratic_energy(0.3), 0.0);
}

#[test]
fn passive_norm_invariants_under_advection() {
    // For div-free advection the L² norms of the advected scalars are
    // conserved; RK4 and dealiasing only leave integration-order drift.
    let grid = GridSpec::new_2d(64, 64).unwrap();
    let (u1, u2) = taylor_green(&grid);
    let mut init = LimitState::zeros(&grid);
    init.uh = [u1, u2];
    init.r = ScalarField::from_fn(&grid, |x, y, _| 0.25 * (x.cos() + (2.0 * y).sin()));
    init.u3 = ScalarField::from_fn(&grid, |x, y, _| 0.25 * (x + y).sin());
    init.r_mean0 = 0.0;
    let n0 = (init.r.l2_norm(), init.u3.l2_norm());
    let out = run_limit(init, 0.0, 0.5, 0.4, 6, |_, _, _| {}).unwrap();
    assert!((out.r.l2_norm() - n0.0).abs() < 1e-7);
    assert!((out.u3.l2_norm() - n0.1).abs() < 1e-7);
}
