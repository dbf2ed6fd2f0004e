//! Pointwise evaluation of the non-stiff part of the tendency.
//!
//! The quasilinear matrix multiplying the time derivative is diagonal with
//! scalar entries `(a(ε_M r), ρ(ε_M r) I₃, I₃)`, so each equation is divided
//! pointwise by its coefficient. What remains after subtracting the
//! constant-coefficient stiff part `(1/ε_A)L_A + (1/ε_M)L_M` is
//!
//! ```text
//! r_t = -(u·∇)r - r ∇·u
//! u_t = -(u·∇)u - ((a-1)/ε_M)∇r - (1/ρ)(∇|b|²/2 - (b·∇)b)
//!       + ((1/ρ-1)/ε_A)(∂_z b - ∇b₃)
//! b_t = -(u·∇)b - (∇·u) b + (b·∇)u
//! ```
//!
//! with the variable-coefficient stiff residuals evaluated in cancellation-free
//! form: `(ρ-1)/ε_M = r` exactly and `(a-1)/ε_M = r·((1+s)^(γ-2)-1)/s`.
//! Quadratic products are dealiased through the 2/3-rule mask.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exec;
use crate::field::{Axis, ScalarField};
use crate::params::{PressureLaw, ScaleParams};
use crate::state::StateVector;

/// Physical-space samples of a state and its first derivatives.
struct PhysState {
    r: Vec<f64>,
    u: [Vec<f64>; 3],
    b: [Vec<f64>; 3],
    dr: [Vec<f64>; 3],
    /// `du[i][j] = ∂_j u_i`
    du: [[Vec<f64>; 3]; 3],
    db: [[Vec<f64>; 3]; 3],
}

fn derivatives(f: &ScalarField) -> [Vec<f64>; 3] {
    [
        f.derivative(Axis::X).to_physical(),
        f.derivative(Axis::Y).to_physical(),
        f.derivative(Axis::Z).to_physical(),
    ]
}

fn to_phys(v: &StateVector) -> PhysState {
    PhysState {
        r: v.r.to_physical(),
        u: [
            v.u[0].to_physical(),
            v.u[1].to_physical(),
            v.u[2].to_physical(),
        ],
        b: [
            v.b[0].to_physical(),
            v.b[1].to_physical(),
            v.b[2].to_physical(),
        ],
        dr: derivatives(&v.r),
        du: [
            derivatives(&v.u[0]),
            derivatives(&v.u[1]),
            derivatives(&v.u[2]),
        ],
        db: [
            derivatives(&v.b[0]),
            derivatives(&v.b[1]),
            derivatives(&v.b[2]),
        ],
    }
}

/// Tendency minus the constant-coefficient stiff part.
///
/// Fails with a blow-up error when the density `1 + ε_M r` loses positivity
/// anywhere; the error carries the offending extrema.
#[allow(clippy::needless_range_loop)]
pub fn nonstiff_rhs(
    v: &StateVector,
    params: &ScaleParams,
    law: &PressureLaw,
    dealias: bool,
) -> Result<StateVector> {
    let grid = v.grid().clone();
    let n = grid.len();
    let p = to_phys(v);

    let mut min_rho = f64::INFINITY;
    for &r in &p.r {
        min_rho = min_rho.min(1.0 + params.eps_m * r);
    }
    if min_rho <= 0.0 {
        let rmax = p.r.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let rmin = p.r.iter().cloned().fold(f64::INFINITY, f64::min);
        return Err(Error::BlowUp {
            t: f64::NAN,
            detail: format!(
                "density positivity lost: min(1+eps_m r) = {min_rho:.3e}, r in [{rmin:.3e}, {rmax:.3e}]"
            ),
        });
    }

    let mut r_t = vec![0.0f64; n];
    let mut u_t = [vec![0.0f64; n], vec![0.0f64; n], vec![0.0f64; n]];
    let mut b_t = [vec![0.0f64; n], vec![0.0f64; n], vec![0.0f64; n]];

    exec::fill_indexed(&mut r_t, |i| {
        let div_u = p.du[0][0][i] + p.du[1][1][i] + p.du[2][2][i];
        let adv = p.u[0][i] * p.dr[0][i] + p.u[1][i] * p.dr[1][i] + p.u[2][i] * p.dr[2][i];
        -adv - p.r[i] * div_u
    });

    for c in 0..3 {
        let p = &p;
        exec::fill_indexed(&mut u_t[c], |i| {
            let s = params.eps_m * p.r[i];
            let rho = law.rho(s);
            let adv =
                p.u[0][i] * p.du[c][0][i] + p.u[1][i] * p.du[c][1][i] + p.u[2][i] * p.du[c][2][i];
            // ∇(|b|²/2)_c = Σ_j b_j ∂_c b_j, (b·∇)b_c = Σ_j b_j ∂_j b_c
            let grad_mag =
                p.b[0][i] * p.db[0][c][i] + p.b[1][i] * p.db[1][c][i] + p.b[2][i] * p.db[2][c][i];
            let b_adv =
                p.b[0][i] * p.db[c][0][i] + p.b[1][i] * p.db[c][1][i] + p.b[2][i] * p.db[c][2][i];
            let pressure = law.a_minus_one_over_s(s) * p.r[i] * p.dr[c][i];
            let stiff_resid = if c < 2 {
                // (∂_z b - ∇b₃)_c, weighted by (1/ρ-1)/ε_A = -r/(ρ μ)
                let lorentz = p.db[c][2][i] - p.db[2][c][i];
                -p.r[i] / (rho * params.mu) * lorentz
            } else {
                0.0
            };
            -adv - pressure - (grad_mag - b_adv) / rho + stiff_resid
        });
    }

    for c in 0..3 {
        let p = &p;
        exec::fill_indexed(&mut b_t[c], |i| {
            let div_u = p.du[0][0][i] + p.du[1][1][i] + p.du[2][2][i];
            let adv =
                p.u[0][i] * p.db[c][0][i] + p.u[1][i] * p.db[c][1][i] + p.u[2][i] * p.db[c][2][i];
            let stretch =
                p.b[0][i] * p.du[c][0][i] + p.b[1][i] * p.du[c][1][i] + p.b[2][i] * p.du[c][2][i];
            -adv - div_u * p.b[c][i] + stretch
        });
    }

    let mut out = StateVector::zeros(&grid);
    out.r = ScalarField::from_physical(&grid, &r_t)?;
    for c in 0..3 {
        out.u[c] = ScalarField::from_physical(&grid, &u_t[c])?;
        out.b[c] = ScalarField::from_physical(&grid, &b_t[c])?;
    }
    if dealias {
        out.dealias_in_place();
    }
    Ok(out)
}

/// Full tendency: non-stiff part plus the large operator.
pub fn full_rhs(
    v: &StateVector,
    params: &ScaleParams,
    law: &PressureLaw,
    dealias: bool,
) -> Result<StateVector> {
    let mut out = nonstiff_rhs(v, params, law, dealias)?;
    out.axpy(1.0, &crate::modes::apply_large(v, params))?;
    Ok(out)
}

/// Largest pointwise velocity component magnitude, for the advective CFL.
pub fn max_velocity(v: &StateVector) -> f64 {
    let mut m = 0.0f64;
    for c in 0..3 {
        m = m.max(v.u[c].max_abs());
    }
    m
}

/// Per-mode symbol application of the large operator, kept as an independent
/// route for cross-checks: `out^(k) = i·H(k)·V^(k)`.
pub fn apply_large_symbolwise(v: &StateVector, params: &ScaleParams) -> StateVector {
    let grid = v.grid().clone();
    let comps: Vec<&[Complex64]> = (0..7).map(|c| v.component(c).spectral()).collect();
    let mut out_hat: Vec<Vec<Complex64>> = (0..7)
        .map(|_| vec![Complex64::default(); grid.len()])
        .collect();
    for idx in 0..grid.len() {
        let (kx, ky, kz) = grid.wavenumber_eff(idx);
        if (kx, ky, kz) == (0, 0, 0) {
            continue;
        }
        let h = crate::symbol::symbol_matrix(kx, ky, kz, 1.0 / params.eps_a, 1.0 / params.eps_m);
        let mut vin = [Complex64::default(); 7];
        for c in 0..7 {
            vin[c] = comps[c][idx];
        }
        for row in 0..7 {
            let mut acc = Complex64::default();
            for col in 0..7 {
                acc += h[(row, col)] * vin[col];
            }
            out_hat[row][idx] = Complex64::new(0.0, 1.0) * acc;
        }
    }
    let mut out = StateVector::zeros(&grid);
    for (c, hat) in out_hat.into_iter().enumerate() {
        *out.component_mut(c) = ScalarField::from_spectral(&grid, hat).expect("sized");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::synth::{random_state, seeded_rng};

    fn setup() -> (std::sync::Arc<GridSpec>, ScaleParams, PressureLaw) {
        let grid = GridSpec::new(16, 16, 16).unwrap();
        let params = ScaleParams::from_eps_m_nu(0.1, 0.5, 0.0, 5.0 / 3.0, 3).unwrap();
        let law = PressureLaw::new(params.gamma);
        (grid, params, law)
    }

    #[test]
    fn zero_state_gives_zero_tendency() {
        let (grid, params, law) = setup();
        let v = StateVector::zeros(&grid);
        let out = nonstiff_rhs(&v, &params, &law, true).unwrap();
        assert_eq!(out.l2_norm(), 0.0);
    }

    #[test]
    fn uniform_rest_state_is_steady() {
        let (grid, params, law) = setup();
        let mut v = StateVector::zeros(&grid);
        v.r = crate::field::ScalarField::zeros(&grid).add_constant(0.5);
        v.b[2] = crate::field::ScalarField::zeros(&grid).add_constant(1.0);
        let out = nonstiff_rhs(&v, &params, &law, true).unwrap();
        assert!(out.l2_norm() < 1e-14);
    }

    #[test]
    fn blow_up_guard_triggers() {
        let (grid, params, law) = setup();
        let mut v = StateVector::zeros(&grid);
        // eps_m = 0.1 so r = -11 drives 1 + eps_m r < 0.
        v.r = crate::field::ScalarField::zeros(&grid).add_constant(-11.0);
        assert!(matches!(
            nonstiff_rhs(&v, &params, &law, true),
            Err(Error::BlowUp { .. })
        ));
    }

    #[test]
    fn large_operator_matches_symbol_route() {
        let (grid, params, _) = setup();
        let mut rng = seeded_rng(113);
        let v = random_state(&grid, &mut rng, 5.0);
        let a = crate::modes::apply_large(&v, &params);
        let b = apply_large_symbolwise(&v, &params);
        let err = a.sub(&b).unwrap().l2_norm();
        assert!(err < 1e-10 * a.l2_norm().max(1.0), "route mismatch {err}");
    }

    #[test]
    fn split_matches_direct_equation_evaluation() {
        // Independent oracle: evaluate each equation of the system directly in
        // physical space (no stiff/nonstiff split) and solve for the tendency.
        let (grid, params, law) = setup();
        let mut rng = seeded_rng(127);
        let mut v = random_state(&grid, &mut rng, 4.0);
        v.scale_in_place(0.1);
        v.project_b_div_free();

        let split = full_rhs(&v, &params, &law, false).unwrap();

        let r = v.r.to_physical();
        let u: Vec<Vec<f64>> = (0..3).map(|c| v.u[c].to_physical()).collect();
        let b: Vec<Vec<f64>> = (0..3).map(|c| v.b[c].to_physical()).collect();
        let dr = derivatives(&v.r);
        let du: Vec<[Vec<f64>; 3]> = (0..3).map(|c| derivatives(&v.u[c])).collect();
        let db: Vec<[Vec<f64>; 3]> = (0..3).map(|c| derivatives(&v.b[c])).collect();
        let n = grid.len();
        let mut rt = vec![0.0; n];
        let mut ut = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        let mut bt = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        for i in 0..n {
            let s = params.eps_m * r[i];
            let (a_c, rho) = (law.a(s), law.rho(s));
            let div_u = du[0][0][i] + du[1][1][i] + du[2][2][i];
            // a(∂t r + u·∇r) + (aρ/εM)∇·u = 0
            rt[i] = -(u[0][i] * dr[0][i] + u[1][i] * dr[1][i] + u[2][i] * dr[2][i])
                - rho / params.eps_m * div_u;
            for c in 0..3 {
                let adv = u[0][i] * du[c][0][i] + u[1][i] * du[c][1][i] + u[2][i] * du[c][2][i];
                let grad_mag = b[0][i] * db[0][c][i] + b[1][i] * db[1][c][i] + b[2][i] * db[2][c][i];
                let b_adv = b[0][i] * db[c][0][i] + b[1][i] * db[c][1][i] + b[2][i] * db[c][2][i];
                let lorentz = if c < 2 { db[c][2][i] - db[2][c][i] } else { 0.0 };
                // ρ(∂t u + u·∇u) + (aρ/εM)∇r + ∇|b|²/2 - (b·∇)b = (∂z b - ∇b₃)/εA
                ut[c][i] = -adv - a_c / params.eps_m * dr[c][i]
                    + (-grad_mag + b_adv + lorentz / params.eps_a) / rho;
                let stretch =
                    b[0][i] * du[c][0][i] + b[1][i] * du[c][1][i] + b[2][i] * du[c][2][i];
                let lin = if c < 2 {
                    du[c][2][i]
                } else {
                    du[2][2][i] - div_u
                };
                bt[c][i] = -(u[0][i] * db[c][0][i] + u[1][i] * db[c][1][i] + u[2][i] * db[c][2][i])
                    - div_u * b[c][i]
                    + stretch
                    + lin / params.eps_a;
            }
        }
        let mut direct = StateVector::zeros(&grid);
        direct.r = ScalarField::from_physical(&grid, &rt).unwrap();
        for c in 0..3 {
            direct.u[c] = ScalarField::from_physical(&grid, &ut[c]).unwrap();
            direct.b[c] = ScalarField::from_physical(&grid, &bt[c]).unwrap();
        }
        let err = split.sub(&direct).unwrap().l2_norm();
        let scale = direct.l2_norm().max(1.0);
        assert!(err < 1e-8 * scale, "split vs direct {err:.3e} (scale {scale:.3e})");
    }
}
