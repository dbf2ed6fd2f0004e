//! The Alfvén and Mach operators, the orthogonal projections onto their
//! nullspace structure, and the fast/intermediate/slow mode decomposition.
//!
//! The projections act component-wise through vertical averages, the full
//! average and the horizontal Leray projection, so they commute with
//! derivatives and are orthogonal in every `H^j`.

use crate::error::Result;
use crate::field::{leray_h, Axis};
use crate::params::ScaleParams;
use crate::state::StateVector;

/// Alfvén operator: rows `(0, (-∇_h b₃ + ∂_z b_h, 0), (∂_z u_h, -∇_h·u_h))`.
pub fn apply_alfven(v: &StateVector) -> StateVector {
    let mut out = StateVector::zeros(v.grid());
    let dzb1 = v.b[0].derivative(Axis::Z);
    let dzb2 = v.b[1].derivative(Axis::Z);
    let dxb3 = v.b[2].derivative(Axis::X);
    let dyb3 = v.b[2].derivative(Axis::Y);
    out.u[0] = dzb1.sub(&dxb3).expect("same grid");
    out.u[1] = dzb2.sub(&dyb3).expect("same grid");
    out.b[0] = v.u[0].derivative(Axis::Z);
    out.b[1] = v.u[1].derivative(Axis::Z);
    let divh_u = v.u[0]
        .derivative(Axis::X)
        .add(&v.u[1].derivative(Axis::Y))
        .expect("same grid");
    out.b[2] = divh_u.scale(-1.0);
    out
}

/// Mach operator: rows `(-∇·u, -∇r, 0)`.
pub fn apply_mach(v: &StateVector) -> StateVector {
    let mut out = StateVector::zeros(v.grid());
    let mut div_u = v.u[0].derivative(Axis::X);
    div_u.axpy(1.0, &v.u[1].derivative(Axis::Y)).expect("same grid");
    div_u.axpy(1.0, &v.u[2].derivative(Axis::Z)).expect("same grid");
    out.r = div_u.scale(-1.0);
    out.u[0] = v.r.derivative(Axis::X).scale(-1.0);
    out.u[1] = v.r.derivative(Axis::Y).scale(-1.0);
    out.u[2] = v.r.derivative(Axis::Z).scale(-1.0);
    out
}

/// The large operator `(1/ε_A) L_A + (1/ε_M) L_M`.
pub fn apply_large(v: &StateVector, params: &ScaleParams) -> StateVector {
    let mut out = apply_alfven(v).scale(1.0 / params.eps_a);
    out.axpy(1.0 / params.eps_m, &apply_mach(v)).expect("same grid");
    out
}

/// `L_A + μ L_M`, the unscaled combination whose eigenstructure is analyzed
/// per mode.
pub fn apply_combined(v: &StateVector, mu: f64) -> StateVector {
    let mut out = apply_alfven(v);
    out.axpy(mu, &apply_mach(v)).expect("same grid");
    out
}

/// Projection onto the nullspace of the Alfvén operator:
/// `diag(1, (P_h^div ⟨·⟩_z, 1), (⟨·⟩_z I₂, ⟨⟨·⟩⟩))`.
pub fn apply_p0(v: &StateVector) -> StateVector {
    let mut out = v.clone();
    let (u1, u2) = leray_h(&v.u[0].vertical_average(), &v.u[1].vertical_average())
        .expect("components share a grid");
    out.u[0] = u1;
    out.u[1] = u2;
    out.b[0] = v.b[0].vertical_average();
    out.b[1] = v.b[1].vertical_average();
    let mut b3 = crate::field::ScalarField::zeros(v.grid());
    b3.spectral_mut()[0] = v.b[2].spectral()[0];
    out.b[2] = b3;
    out
}

/// Projection onto the nullspace of `P⁰ L_M P⁰`:
/// `diag(⟨·⟩_z, (I₂, ⟨·⟩_z), I₃)`.
pub fn apply_p1(v: &StateVector) -> StateVector {
    let mut out = v.clone();
    out.r = v.r.vertical_average();
    out.u[2] = v.u[2].vertical_average();
    out
}

/// Slow projection `P = P⁰ P¹`.
pub fn apply_p(v: &StateVector) -> StateVector {
    apply_p0(&apply_p1(v))
}

/// Fast/intermediate/slow decomposition of a state.
#[derive(Clone, Debug)]
pub struct ModeTriple {
    pub fast: StateVector,
    pub intermediate: StateVector,
    pub slow: StateVector,
}

impl ModeTriple {
    pub fn sum(&self) -> StateVector {
        self.fast
            .add(&self.intermediate)
            .and_then(|s| s.add(&self.slow))
            .expect("parts share a grid")
    }
}

/// Split a state into `V^F = (I-P⁰)V`, `V^I = (I-P¹)V`, `V^S = P V`, using
/// the component formulas of the projections. Requires a spectrally
/// divergence-free magnetic part.
pub fn decompose_modes(v: &StateVector) -> Result<ModeTriple> {
    decompose_modes_tol(v, 1e-8)
}

pub fn decompose_modes_tol(v: &StateVector, div_tol: f64) -> Result<ModeTriple> {
    v.check_div_b(div_tol)?;
    let grid = v.grid();

    let mut slow = StateVector::zeros(grid);
    slow.r = v.r.vertical_average();
    let (s1, s2) = leray_h(&v.u[0].vertical_average(), &v.u[1].vertical_average())?;
    slow.u[0] = s1;
    slow.u[1] = s2;
    slow.u[2] = v.u[2].vertical_average();
    slow.b[0] = v.b[0].vertical_average();
    slow.b[1] = v.b[1].vertical_average();
    slow.b[2].spectral_mut()[0] = v.b[2].spectral()[0];

    let mut intermediate = StateVector::zeros(grid);
    intermediate.r = v.r.remove_vertical_average();
    intermediate.u[2] = v.u[2].remove_vertical_average();

    let mut fast = StateVector::zeros(grid);
    fast.u[0] = v.u[0].sub(&slow.u[0])?;
    fast.u[1] = v.u[1].sub(&slow.u[1])?;
    fast.b[0] = v.b[0].sub(&slow.b[0])?;
    fast.b[1] = v.b[1].sub(&slow.b[1])?;
    fast.b[2] = v.b[2].add_constant(-v.b[2].full_average());

    Ok(ModeTriple {
        fast,
        intermediate,
        slow,
    })
}
