//! Construction and validation of well-prepared initial data.
//!
//! The data is assembled mode by mode in the canonical form
//!
//! ```text
//! r⁰   = r^(0,S) + ε_M r^(0,I)
//! u_h⁰ = u_h^(0,S) + ε_A u_h^(0,F)      u₃⁰ = u₃^(0,S) + ε_M u₃^(0,I)
//! b_h⁰ = b_h^(0,S) + ε_A b_h^(0,F)
//! b₃⁰  = ⟨⟨b₃⁰⟩⟩ - μ (1-⟨⟨·⟩⟩) r^(0,S) + ε_A b₃^(0,F)
//! ```
//!
//! with each piece generated inside the subspace its mode occupies: slow
//! parts z-independent (u_h projected solenoidal), intermediate parts with
//! zero vertical mean, fast parts in the complement of the slow projection.
//! The fast magnetic pair comes from the curl of a random vector potential,
//! so `∇_h·b_h^(0,F) + ∂_z b₃^(0,F) = 0` holds exactly. Slow pieces draw from
//! their own seeded streams, independent of the small parameters, so a sweep
//! shares bit-identical slow data across ε.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{leray_h, Axis, ScalarField};
use crate::grid::GridSpec;
use crate::modes::apply_large;
use crate::params::ScaleParams;
use crate::state::StateVector;
use crate::synth::{random_field_filtered, seeded_rng, AmpProfile, ZFilter};

/// Target `L²` amplitudes of the data pieces plus the spectral profile.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InitSpec {
    pub seed: u64,
    /// Plateau edge of the per-|k| profile (flat below, power decay above).
    pub profile_plateau: f64,
    /// Decay power beyond the plateau.
    pub profile_decay: f64,
    /// Hard spectral cutoff.
    pub kcut: f64,
    pub amp_r_slow: f64,
    pub amp_uh_slow: f64,
    pub amp_u3_slow: f64,
    pub amp_bh_slow: f64,
    /// The constant ⟨⟨b₃⁰⟩⟩.
    pub b3_mean: f64,
    pub amp_r_int: f64,
    pub amp_u3_int: f64,
    pub amp_uh_fast: f64,
    pub amp_b_fast: f64,
}

impl Default for InitSpec {
    fn default() -> Self {
        // Amplitudes of the reference rate experiment: strong slow fields so
        // the O(ε_M) error terms dominate the corrected slow-vertical metric
        // over the desk-scale sweep window, modest injected fast and
        // intermediate parts (their slopes are amplitude-independent).
        InitSpec {
            seed: 1,
            profile_plateau: 4.0,
            profile_decay: 4.0,
            kcut: 8.0,
            amp_r_slow: 0.8,
            amp_uh_slow: 0.8,
            amp_u3_slow: 0.8,
            amp_bh_slow: 0.8,
            b3_mean: 0.2,
            amp_r_int: 0.05,
            amp_u3_int: 0.05,
            amp_uh_fast: 0.05,
            amp_b_fast: 0.05,
        }
    }
}

impl InitSpec {
    fn profile(&self) -> AmpProfile {
        AmpProfile {
            plateau: self.profile_plateau,
            decay: self.profile_decay,
            kcut: self.kcut,
        }
    }
}

fn normalized(f: ScalarField, target: f64) -> ScalarField {
    let n = f.l2_norm();
    if n > 0.0 {
        f.scale(target / n)
    } else {
        f
    }
}

/// The ε-independent pieces of the data. These seed the limit system.
#[derive(Clone, Debug)]
pub struct SlowParts {
    pub r: ScalarField,
    pub uh: [ScalarField; 2],
    pub u3: ScalarField,
    pub bh: [ScalarField; 2],
    pub b3_mean: f64,
}

/// Generate the slow parts from streams keyed only by the seed.
pub fn build_slow_parts(spec: &InitSpec, grid: &Arc<GridSpec>) -> Result<SlowParts> {
    let profile = spec.profile();
    let gen = |stream: u64, amp: f64| -> ScalarField {
        let mut rng = seeded_rng(spec.seed.wrapping_mul(1000).wrapping_add(stream));
        normalized(
            random_field_filtered(grid, &mut rng, &profile, ZFilter::ZIndependent),
            amp,
        )
    };
    let r = gen(1, spec.amp_r_slow);
    let (w1, w2) = (gen(2, 1.0), gen(3, 1.0));
    let (p1, p2) = leray_h(&w1, &w2)?;
    let scale = (p1.sobolev_norm_sq(0) + p2.sobolev_norm_sq(0)).sqrt();
    let uh = if scale > 0.0 {
        [
            p1.scale(spec.amp_uh_slow / scale),
            p2.scale(spec.amp_uh_slow / scale),
        ]
    } else {
        [p1, p2]
    };
    let u3 = gen(4, spec.amp_u3_slow);
    let (v1, v2) = (gen(5, 1.0), gen(6, 1.0));
    let (q1, q2) = leray_h(&v1, &v2)?;
    let scale = (q1.sobolev_norm_sq(0) + q2.sobolev_norm_sq(0)).sqrt();
    let bh = if scale > 0.0 {
        [
            q1.scale(spec.amp_bh_slow / scale),
            q2.scale(spec.amp_bh_slow / scale),
        ]
    } else {
        [q1, q2]
    };
    Ok(SlowParts {
        r,
        uh,
        u3,
        bh,
        b3_mean: spec.b3_mean,
    })
}

/// Assemble the full initial state for the given parameters.
pub fn build_well_prepared(
    spec: &InitSpec,
    params: &ScaleParams,
    grid: &Arc<GridSpec>,
) -> Result<StateVector> {
    if grid.is_2d() {
        return Err(Error::InvalidGrid("well-prepared data needs a 3D grid".into()));
    }
    if spec.kcut > grid.ax.dealias_kmax.min(grid.az.dealias_kmax) as f64 {
        return Err(Error::InvalidGrid(format!(
            "spectral cutoff {} exceeds the dealiased band of a {}x{}x{} grid",
            spec.kcut, grid.nx, grid.ny, grid.nz
        )));
    }
    let profile = spec.profile();
    let slow = build_slow_parts(spec, grid)?;

    // Fast and intermediate pieces use streams disjoint from the slow ones.
    let mut rng = seeded_rng(spec.seed.wrapping_mul(1000).wrapping_add(101));

    let r_int = normalized(
        random_field_filtered(grid, &mut rng, &profile, ZFilter::ZeroVerticalMean),
        spec.amp_r_int,
    );
    let u3_int = normalized(
        random_field_filtered(grid, &mut rng, &profile, ZFilter::ZeroVerticalMean),
        spec.amp_u3_int,
    );

    // Fast horizontal velocity: zero vertical mean puts the piece in the
    // range of (1 - P_h^div ⟨·⟩_z) with an exactly empty k₃ = 0 plane, so the
    // assembled slow component stays bit-identical across the sweep.
    let uh_fast = {
        let f1 = random_field_filtered(grid, &mut rng, &profile, ZFilter::ZeroVerticalMean);
        let f2 = random_field_filtered(grid, &mut rng, &profile, ZFilter::ZeroVerticalMean);
        let scale = (f1.sobolev_norm_sq(0) + f2.sobolev_norm_sq(0)).sqrt();
        if scale > 0.0 {
            [
                f1.scale(spec.amp_uh_fast / scale),
                f2.scale(spec.amp_uh_fast / scale),
            ]
        } else {
            [f1, f2]
        }
    };

    // Fast magnetic pieces from a vector potential: b_h = (∂_y ψ₃ - ∂_z ψ₂,
    // ∂_z ψ₁ - ∂_x ψ₃), b₃ = ∂_x ψ₂ - ∂_y ψ₁. ψ₃ carries no k₃ = 0 content so
    // b_h^(0,F) has zero vertical mean.
    let (bh_fast, b3_fast) = {
        let psi1 = random_field_filtered(grid, &mut rng, &profile, ZFilter::All);
        let psi2 = random_field_filtered(grid, &mut rng, &profile, ZFilter::All);
        let psi3 = random_field_filtered(grid, &mut rng, &profile, ZFilter::ZeroVerticalMean);
        let bh1 = psi3.derivative(Axis::Y).sub(&psi2.derivative(Axis::Z))?;
        let bh2 = psi1.derivative(Axis::Z).sub(&psi3.derivative(Axis::X))?;
        let b3 = psi2.derivative(Axis::X).sub(&psi1.derivative(Axis::Y))?;
        let scale =
            (bh1.sobolev_norm_sq(0) + bh2.sobolev_norm_sq(0) + b3.sobolev_norm_sq(0)).sqrt();
        let s = if scale > 0.0 {
            spec.amp_b_fast / scale
        } else {
            1.0
        };
        ([bh1.scale(s), bh2.scale(s)], b3.scale(s))
    };

    let mut v = StateVector::zeros(grid);
    v.r = slow.r.clone();
    v.r.axpy(params.eps_m, &r_int)?;
    for c in 0..2 {
        v.u[c] = slow.uh[c].clone();
        v.u[c].axpy(params.eps_a, &uh_fast[c])?;
        v.b[c] = slow.bh[c].clone();
        v.b[c].axpy(params.eps_a, &bh_fast[c])?;
    }
    v.u[2] = slow.u3.clone();
    v.u[2].axpy(params.eps_m, &u3_int)?;
    let r_slow_fluct = slow.r.add_constant(-slow.r.full_average());
    v.b[2] = r_slow_fluct.scale(-params.mu).add_constant(slow.b3_mean);
    v.b[2].axpy(params.eps_a, &b3_fast)?;
    Ok(v)
}

/// Well-preparedness report of an initial state.
#[derive(Debug, Clone, Serialize)]
pub struct WellPrepReport {
    /// ‖(L_A/ε_A + L_M/ε_M) V⁰‖_{n-1}
    pub large_norm: f64,
    /// ‖V⁰‖_n
    pub data_norm: f64,
    /// ‖∇·b⁰‖₀
    pub div_b: f64,
    /// Whether `large_norm` exceeds the configured bound.
    pub flagged: bool,
    pub bound: f64,
}

/// Evaluate the well-preparedness residual.
pub fn validate_initial(v: &StateVector, params: &ScaleParams, bound: f64) -> WellPrepReport {
    let large_norm = apply_large(v, params).sobolev_norm(params.n - 1);
    WellPrepReport {
        large_norm,
        data_norm: v.sobolev_norm(params.n),
        div_b: crate::solver::div_b_l2(v),
        flagged: large_norm > bound,
        bound,
    }
}
