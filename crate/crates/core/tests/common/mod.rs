//! Shared helpers for integration tests: independent oracles kept deliberately
//! separate from the implementation paths they check.
//!
//! Each test binary uses its own subset of these helpers.
#![allow(dead_code)]

use std::sync::Arc;

use nalgebra::SMatrix;
use num_complex::Complex64;

use mhd3s_core::field::{leray_h, Axis, ScalarField};
use mhd3s_core::grid::GridSpec;
use mhd3s_core::state::StateVector;
use mhd3s_core::synth::{random_field, seeded_rng};

pub type CMat7 = SMatrix<Complex64, 7, 7>;

/// Matrix exponential by scaling and squaring of the Taylor series; an
/// independent route to the propagator's per-mode exponential.
pub fn expm(a: &CMat7) -> CMat7 {
    let norm: f64 = a.iter().map(|v| v.norm()).fold(0.0, f64::max) * 7.0;
    let s = norm.log2().ceil().max(0.0) as u32 + 2;
    let scaled = a.map(|v| v / (2.0f64.powi(s as i32)));
    let mut term = CMat7::identity();
    let mut sum = CMat7::identity();
    for k in 1..24 {
        term = (term * scaled).map(|v| v / (k as f64));
        sum += term;
    }
    let mut out = sum;
    for _ in 0..s {
        out = out * out;
    }
    out
}

/// A vorticity–streamfunction 2D incompressible Euler solver, coded
/// independently of the primitive-variable limit solver. RK4 in time,
/// pseudo-spectral with 2/3 dealiasing.
pub struct EulerRef {
    pub omega: ScalarField,
}

impl EulerRef {
    pub fn from_velocity(u1: &ScalarField, u2: &ScalarField) -> Self {
        let omega = u2.derivative(Axis::X).sub(&u1.derivative(Axis::Y)).unwrap();
        EulerRef { omega }
    }

    /// Velocity from the streamfunction: u = (∂_y ψ, -∂_x ψ), ψ = -Δ⁻¹ω...
    /// with the sign convention ω = ∂_x u2 - ∂_y u1.
    pub fn velocity(&self) -> (ScalarField, ScalarField) {
        let psi = self.omega.inverse_laplacian(true).scale(-1.0);
        (
            psi.derivative(Axis::Y),
            psi.derivative(Axis::X).scale(-1.0),
        )
    }

    fn rhs(&self, omega: &ScalarField) -> ScalarField {
        let psi = omega.inverse_laplacian(true).scale(-1.0);
        let u1 = psi.derivative(Axis::Y);
        let u2 = psi.derivative(Axis::X).scale(-1.0);
        let mut adv = mhd3s_core::field::product(&u1, &omega.derivative(Axis::X)).unwrap();
        adv.axpy(
            1.0,
            &mhd3s_core::field::product(&u2, &omega.derivative(Axis::Y)).unwrap(),
        )
        .unwrap();
        adv.scale(-1.0)
    }

    pub fn step(&mut self, dt: f64) {
        let k1 = self.rhs(&self.omega);
        let mut w = self.omega.clone();
        w.axpy(0.5 * dt, &k1).unwrap();
        let k2 = self.rhs(&w);
        let mut w = self.omega.clone();
        w.axpy(0.5 * dt, &k2).unwrap();
        let k3 = self.rhs(&w);
        let mut w = self.omega.clone();
        w.axpy(dt, &k3).unwrap();
        let k4 = self.rhs(&w);
        self.omega.axpy(dt / 6.0, &k1).unwrap();
        self.omega.axpy(dt / 3.0, &k2).unwrap();
        self.omega.axpy(dt / 3.0, &k3).unwrap();
        self.omega.axpy(dt / 6.0, &k4).unwrap();
    }
}

/// Independent passive-scalar advection by a prescribed solenoidal velocity
/// supplier, RK4 with the same clock.
pub struct ScalarRef {
    pub field: ScalarField,
}

impl ScalarRef {
    fn rhs(f: &ScalarField, u: &(ScalarField, ScalarField)) -> ScalarField {
        let mut adv = mhd3s_core::field::product(&u.0, &f.derivative(Axis::X)).unwrap();
        adv.axpy(
            1.0,
            &mhd3s_core::field::product(&u.1, &f.derivative(Axis::Y)).unwrap(),
        )
        .unwrap();
        adv.scale(-1.0)
    }

    /// One RK4 step given the velocity at the stage times (t, t+dt/2, t+dt).
    pub fn step(
        &mut self,
        dt: f64,
        u0: &(ScalarField, ScalarField),
        uh: &(ScalarField, ScalarField),
        u1: &(ScalarField, ScalarField),
    ) {
        let k1 = Self::rhs(&self.field, u0);
        let mut w = self.field.clone();
        w.axpy(0.5 * dt, &k1).unwrap();
        let k2 = Self::rhs(&w, uh);
        let mut w = self.field.clone();
        w.axpy(0.5 * dt, &k2).unwrap();
        let k3 = Self::rhs(&w, uh);
        let mut w = self.field.clone();
        w.axpy(dt, &k3).unwrap();
        let k4 = Self::rhs(&w, u1);
        self.field.axpy(dt / 6.0, &k1).unwrap();
        self.field.axpy(dt / 3.0, &k2).unwrap();
        self.field.axpy(dt / 3.0, &k3).unwrap();
        self.field.axpy(dt / 6.0, &k4).unwrap();
    }
}

/// Band-limited random state with divergence-free b.
pub fn test_state(grid: &Arc<GridSpec>, seed: u64) -> StateVector {
    let mut rng = seeded_rng(seed);
    mhd3s_core::synth::random_state(grid, &mut rng, 5.0)
}

/// Random state lying exactly in the kernel of the large operator:
/// z-independent, horizontally solenoidal u_h, b₃ = ⟨⟨b₃⟩⟩ - μ(r - ⟨⟨r⟩⟩).
pub fn kernel_state(grid: &Arc<GridSpec>, mu: f64, seed: u64) -> StateVector {
    let mut rng = seeded_rng(seed);
    let mut v = StateVector::zeros(grid);
    v.r = random_field(grid, &mut rng, 5.0).vertical_average();
    let (u1, u2) = leray_h(
        &random_field(grid, &mut rng, 5.0).vertical_average(),
        &random_field(grid, &mut rng, 5.0).vertical_average(),
    )
    .unwrap();
    v.u[0] = u1;
    v.u[1] = u2;
    v.u[2] = random_field(grid, &mut rng, 5.0).vertical_average();
    let psi = random_field(grid, &mut rng, 5.0).vertical_average();
    v.b[0] = psi.derivative(Axis::Y);
    v.b[1] = psi.derivative(Axis::X).scale(-1.0);
    let mean = 0.3;
    v.b[2] = v
        .r
        .add_constant(-v.r.full_average())
        .scale(-mu)
        .add_constant(mean);
    v
}

/// Inject a state spectrally into a finer grid (zero-padding high modes), for
/// resolution-independence comparisons.
#[allow(clippy::needless_range_loop)]
pub fn inject_state(v: &StateVector, fine: &Arc<GridSpec>) -> StateVector {
    let coarse = v.grid().clone();
    assert!(fine.nx >= coarse.nx && fine.ny >= coarse.ny && fine.nz >= coarse.nz);
    let mut out = StateVector::zeros(fine);
    for c in 0..7 {
        let src = v.component(c).spectral();
        let dst = out.component_mut(c).spectral_mut();
        for idx in 0..coarse.len() {
            let (kx, ky, kz) = coarse.wavenumber(idx);
            if coarse.is_nyquist(idx) {
                continue;
            }
            let to_index = |n: usize, k: i64| -> usize {
                if k >= 0 {
                    k as usize
                } else {
                    (n as i64 + k) as usize
                }
            };
            let j = fine.idx(
                to_index(fine.nx, kx),
                to_index(fine.ny, ky),
                to_index(fine.nz, kz),
            );
            dst[j] = src[idx];
        }
    }
    out
}
