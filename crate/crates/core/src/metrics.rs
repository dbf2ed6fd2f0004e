//! The error functionals measured against the limit solution.
//!
//! Per sample time, with `μ = ε_A/ε_M`:
//!
//! ```text
//! fast(j)   = ‖(1-P_h^div⟨·⟩_z)u_h‖_j + ‖(1-⟨·⟩_z)b_h‖_j
//!             + ‖b₃ - ⟨⟨b̄₃⁰⟩⟩ + μ(⟨r⟩_z - ⟨⟨r̄⁰⟩⟩)‖_j
//! int(j)    = ‖(1-⟨·⟩_z)r‖_j + ‖(1-⟨·⟩_z)u₃‖_j
//! slow_h    = ‖P_h^div⟨u_h⟩_z - ū_h‖_(n-2) + ‖⟨b_h⟩_z - b̄_h‖_(n-2)
//! slow_v    = ‖⟨r⟩_z - r̄‖_(n-2) + ‖⟨u₃⟩_z - ū₃‖_(n-2)
//! slow_v_cor= slow_v with r̄ + (μ-μ_lim)/(1+μ²)·r_c and ū₃ + (μ-μ_lim)·u₃_c
//! ```
//!
//! The projections are the same ones the mode decomposition uses, so the two
//! evaluation routes agree to rounding.

use serde::Serialize;

use crate::corrector::CorrectorState;
use crate::error::Result;
use crate::field::{leray_h, ScalarField};
use crate::limit::LimitState;
use crate::params::ScaleParams;
use crate::state::StateVector;

/// All error functionals at one time.
#[derive(Debug, Clone, Serialize)]
pub struct ErrorMetrics {
    pub t: f64,
    /// Indexed by Sobolev order j = 0..n-1.
    pub fast: Vec<f64>,
    /// Indexed by Sobolev order j = 0..n-1.
    pub intermediate: Vec<f64>,
    pub slow_h: f64,
    pub slow_v: f64,
    pub slow_v_cor: f64,
}

fn vec2_norm(a: &ScalarField, b: &ScalarField, j: usize) -> f64 {
    (a.sobolev_norm_sq(j) + b.sobolev_norm_sq(j)).sqrt()
}

/// Evaluate every metric from co-temporal snapshots. The 2D fields must live
/// on the horizontal restriction of the 3D grid.
pub fn error_metrics(
    full: &StateVector,
    limit: &LimitState,
    corrector: &CorrectorState,
    params: &ScaleParams,
    t: f64,
) -> Result<ErrorMetrics> {
    let grid2d = limit.grid();
    let n = params.n;

    // Fast projections of the full state.
    let avg_u1 = full.u[0].vertical_average();
    let avg_u2 = full.u[1].vertical_average();
    let (su1, su2) = leray_h(&avg_u1, &avg_u2)?;
    let uf1 = full.u[0].sub(&su1)?;
    let uf2 = full.u[1].sub(&su2)?;
    let bf1 = full.b[0].remove_vertical_average();
    let bf2 = full.b[1].remove_vertical_average();
    let mut b3_term = full.b[2].add_constant(-limit.b3_mean0);
    let r_avg_fluct = full.r.vertical_average().add_constant(-limit.r_mean0);
    b3_term.axpy(params.mu, &r_avg_fluct)?;

    let ri = full.r.remove_vertical_average();
    let u3i = full.u[2].remove_vertical_average();

    let mut fast = Vec::with_capacity(n);
    let mut intermediate = Vec::with_capacity(n);
    for j in 0..n {
        fast.push(vec2_norm(&uf1, &uf2, j) + vec2_norm(&bf1, &bf2, j) + b3_term.sobolev_norm(j));
        intermediate.push(ri.sobolev_norm(j) + u3i.sobolev_norm(j));
    }

    // Slow comparisons on the horizontal grid.
    let jn = n - 2;
    let du1 = su1.restrict_2d(grid2d)?.sub(&limit.uh[0])?;
    let du2 = su2.restrict_2d(grid2d)?.sub(&limit.uh[1])?;
    let db1 = full.b[0]
        .vertical_average()
        .restrict_2d(grid2d)?
        .sub(&limit.bh[0])?;
    let db2 = full.b[1]
        .vertical_average()
        .restrict_2d(grid2d)?
        .sub(&limit.bh[1])?;
    let slow_h = vec2_norm(&du1, &du2, jn) + vec2_norm(&db1, &db2, jn);

    let r_avg = full.r.vertical_average().restrict_2d(grid2d)?;
    let u3_avg = full.u[2].vertical_average().restrict_2d(grid2d)?;
    let dr = r_avg.sub(&limit.r)?;
    let du3 = u3_avg.sub(&limit.u3)?;
    let slow_v = dr.sobolev_norm(jn) + du3.sobolev_norm(jn);

    let wr = (params.mu - params.mu_lim) / (1.0 + params.mu * params.mu);
    let wu = params.mu - params.mu_lim;
    let mut dr_c = dr;
    dr_c.axpy(-wr, &corrector.r)?;
    let mut du3_c = du3;
    du3_c.axpy(-wu, &corrector.u3)?;
    let slow_v_cor = dr_c.sobolev_norm(jn) + du3_c.sobolev_norm(jn);

    Ok(ErrorMetrics {
        t,
        fast,
        intermediate,
        slow_h,
        slow_v,
        slow_v_cor,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Axis;
    use crate::grid::GridSpec;
    use crate::init::{build_slow_parts, build_well_prepared, InitSpec};
    use crate::synth::{random_state, seeded_rng};

    fn setup() -> (
        std::sync::Arc<GridSpec>,
        std::sync::Arc<GridSpec>,
        ScaleParams,
    ) {
        (
            GridSpec::new(16, 16, 16).unwrap(),
            GridSpec::new_2d(16, 16).unwrap(),
            ScaleParams::from_eps_m_nu(0.1, 0.5, 0.0, 5.0 / 3.0, 3).unwrap(),
        )
    }

    #[test]
    fn lift_of_limit_state_has_zero_metrics() {
        // With μ = μ_lim and data that is exactly a slow lift of the limit
        // state, every metric vanishes at t = 0.
        let grid3 = GridSpec::new(16, 16, 16).unwrap();
        let grid2 = GridSpec::new_2d(16, 16).unwrap();
        let params = ScaleParams::from_eps(0.1, 0.05, 0.5, 5.0 / 3.0, 3).unwrap();
        let spec = InitSpec {
            kcut: 4.0,
            amp_r_int: 0.0,
            amp_u3_int: 0.0,
            amp_uh_fast: 0.0,
            amp_b_fast: 0.0,
            ..InitSpec::default()
        };
        let full = build_well_prepared(&spec, &params, &grid3).unwrap();
        let slow = build_slow_parts(&spec, &grid3).unwrap();
        let limit = LimitState::from_slow_parts(&slow, &grid2).unwrap();
        let corr = CorrectorState::zeros(&grid2);
        let m = error_metrics(&full, &limit, &corr, &params, 0.0).unwrap();
        for j in 0..params.n {
            assert!(m.fast[j] < 1e-12, "fast[{j}] = {}", m.fast[j]);
            assert!(m.intermediate[j] < 1e-12);
        }
        assert!(m.slow_h < 1e-12 && m.slow_v < 1e-12 && m.slow_v_cor < 1e-12);
    }

    #[test]
    fn pure_gradient_velocity_hits_only_the_fast_metric() {
        let (grid3, grid2, params) = setup();
        let spec = InitSpec {
            kcut: 4.0,
            amp_r_int: 0.0,
            amp_u3_int: 0.0,
            amp_uh_fast: 0.0,
            amp_b_fast: 0.0,
            ..InitSpec::default()
        };
        let mut full = build_well_prepared(&spec, &params, &grid3).unwrap();
        let slow = build_slow_parts(&spec, &grid3).unwrap();
        let limit = LimitState::from_slow_parts(&slow, &grid2).unwrap();
        let corr = CorrectorState::zeros(&grid2);
        let base = error_metrics(&full, &limit, &corr, &params, 0.0).unwrap();
        let phi = ScalarField::from_fn(&grid3, |x, y, _| (x + 2.0 * y).sin());
        let g1 = phi.derivative(Axis::X);
        let g2 = phi.derivative(Axis::Y);
        full.u[0].axpy(1.0, &g1).unwrap();
        full.u[1].axpy(1.0, &g2).unwrap();
        let m = error_metrics(&full, &limit, &corr, &params, 0.0).unwrap();
        for j in 0..params.n {
            let expect = (g1.sobolev_norm_sq(j) + g2.sobolev_norm_sq(j)).sqrt();
            assert!(
                (m.fast[j] - base.fast[j] - expect).abs() < 1e-10,
                "fast[{j}] gained {} expected {}",
                m.fast[j] - base.fast[j],
                expect
            );
            assert!((m.intermediate[j] - base.intermediate[j]).abs() < 1e-12);
        }
        assert!((m.slow_h - base.slow_h).abs() < 1e-12);
        assert!((m.slow_v - base.slow_v).abs() < 1e-12);
    }

    #[test]
    fn metrics_match_independent_spectral_evaluation() {
        let (grid3, grid2, params) = setup();
        let mut rng = seeded_rng(191);
        let full = random_state(&grid3, &mut rng, 5.0);
        let mut limit = LimitState::zeros(&grid2);
        limit.r = crate::synth::random_field(&grid2, &mut rng, 5.0);
        limit.u3 = crate::synth::random_field(&grid2, &mut rng, 5.0);
        let corr = CorrectorState::zeros(&grid2);
        let m = error_metrics(&full, &limit, &corr, &params, 0.0).unwrap();

        // Independent route through the mode decomposition.
        let modes = crate::modes::decompose_modes_tol(&full, 1e-6).unwrap();
        for j in 0..params.n {
            let uf = (modes.fast.u[0].sobolev_norm_sq(j) + modes.fast.u[1].sobolev_norm_sq(j)).sqrt();
            let bf = (modes.fast.b[0].sobolev_norm_sq(j) + modes.fast.b[1].sobolev_norm_sq(j)).sqrt();
            let mut b3_term = full.b[2].add_constant(-limit.b3_mean0);
            b3_term
                .axpy(
                    params.mu,
                    &full.r.vertical_average().add_constant(-limit.r_mean0),
                )
                .unwrap();
            let expect = uf + bf + b3_term.sobolev_norm(j);
            assert!((m.fast[j] - expect).abs() < 1e-10 * expect.max(1.0));
            let expect_int = modes.intermediate.r.sobolev_norm(j)
                + modes.intermediate.u[2].sobolev_norm(j);
            assert!((m.intermediate[j] - expect_int).abs() < 1e-10 * expect_int.max(1.0));
        }
        // Slow-vertical against a by-hand spectral difference.
        let jn = params.n - 2;
        let dr = full
            .r
            .vertical_average()
            .restrict_2d(&grid2)
            .unwrap()
            .sub(&limit.r)
            .unwrap();
        let du3 = full
            .u[2]
            .vertical_average()
            .restrict_2d(&grid2)
            .unwrap()
            .sub(&limit.u3)
            .unwrap();
        let expect = dr.sobolev_norm(jn) + du3.sobolev_norm(jn);
        assert!((m.slow_v - expect).abs() < 1e-10 * expect.max(1.0));
    }
}
