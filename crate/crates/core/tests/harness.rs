//! Harness-level behavior: uniform boundedness across resolutions and the
//! degenerate sweep where the limit system carries the μ-coefficient
//! dynamics.

mod common;

use mhd3s_core::grid::GridSpec;
use mhd3s_core::init::{build_well_prepared, InitSpec};
use mhd3s_core::params::ScaleParams;
use mhd3s_core::solver::{run, SolverConfig};
use mhd3s_core::sweep::{sweep, SweepConfig};

#[test]
fn uniform_boundedness_is_resolution_independent() {
    // Same spectral data run at 32³ and injected into 48³: the H³ history
    // must stay bounded and agree across resolutions within 10%. The cutoff
    // keeps the quadratic band inside both dealiasing masks, so the coarse
    // grid already resolves the dominant interactions.
    let p = ScaleParams::from_eps_m_nu(0.1, 0.5, 0.0, 5.0 / 3.0, 3).unwrap();
    let spec = InitSpec {
        kcut: 4.0,
        amp_r_slow: 0.25,
        amp_uh_slow: 0.25,
        amp_u3_slow: 0.25,
        amp_bh_slow: 0.25,
        amp_r_int: 0.25,
        amp_u3_int: 0.25,
        amp_uh_fast: 0.25,
        amp_b_fast: 0.25,
        ..InitSpec::default()
    };
    let coarse = GridSpec::new(32, 32, 32).unwrap();
    let init_coarse = build_well_prepared(&spec, &p, &coarse).unwrap();
    let fine = GridSpec::new(48, 48, 48).unwrap();
    let init_fine = common::inject_state(&init_coarse, &fine);
    let n0 = init_coarse.sobolev_norm(3);
    assert!((init_fine.sobolev_norm(3) - n0).abs() < 1e-10 * n0);

    let cfg = SolverConfig {
        t_end: 0.5,
        snapshots: 6,
        ..SolverConfig::default()
    };
    let sup = |init| {
        let out = run(init, p, cfg, |_, _, _, _| {}).unwrap();
        assert!(out.status.is_completed());
        out.diagnostics
            .iter()
            .map(|d| d.norm_hn)
            .fold(0.0f64, f64::max)
    };
    let sup_coarse = sup(init_coarse);
    let sup_fine = sup(init_fine);
    assert!(
        sup_coarse < 10.0 * n0,
        "H³ grew beyond 10x: {sup_coarse} vs {n0}"
    );
    let rel = (sup_fine - sup_coarse).abs() / sup_coarse;
    assert!(rel < 0.10, "resolution dependence {rel:.3}");
}

fn degenerate_config(mu_lim: f64) -> SweepConfig {
    let mut cfg = SweepConfig {
        grid_n: 16,
        eps_m_list: vec![0.1],
        nu: 0.5,
        mu_lim,
        ..SweepConfig::default()
    };
    cfg.solver.t_end = 0.1;
    cfg.solver.snapshots = 3;
    cfg.init.kcut = 4.0;
    cfg.init.amp_r_int = 0.0;
    cfg.init.amp_u3_int = 0.0;
    cfg.init.amp_uh_fast = 0.0;
    cfg.init.amp_b_fast = 0.0;
    cfg
}

#[test]
fn degenerate_sweep_drops_the_ratio_error_term() {
    // Slow-only data with μ_lim = μ: the |μ - μ_lim| term is absent, so the
    // slow-vertical error collapses to the ε_M-order residue, and the
    // corrector contributes exactly nothing.
    let mu = 0.1f64.powf(0.5);
    let degen = sweep(&degenerate_config(mu), |_| {}).unwrap();
    let plain = sweep(&degenerate_config(0.0), |_| {}).unwrap();
    assert!(degen.failures.is_empty() && plain.failures.is_empty());

    let sv_degen = degen.sup_series("slow_v", None)[0].1;
    let sv_plain = plain.sup_series("slow_v", None)[0].1;
    assert!(
        sv_degen < 0.25 * sv_plain,
        "degenerate slow_v {sv_degen:.3e} not far below {sv_plain:.3e}"
    );
    // (μ - μ_lim) = 0 makes the corrected and uncorrected metrics identical.
    let svc = degen.sup_series("slow_v_cor", None)[0].1;
    assert!(
        (svc - sv_degen).abs() <= 1e-12 * sv_degen.max(1e-300),
        "corrector contributed despite zero prefactor"
    );
    // What remains is the ε_M-order quasilinear residue, far below the
    // slow-field scale.
    let sh = degen.sup_series("slow_h", None)[0].1;
    assert!(sh < 0.1, "slow_h residue {sh:.3e}");
}
