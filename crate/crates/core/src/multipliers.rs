//! Exact μ-dependent Fourier multipliers of the intermediate eigenstructure.
//!
//! Per lattice mode `(k,l,m)` with `s = m²/(k²+l²+m²)`:
//!
//! ```text
//! Q = √2 / √(1+μ² + √((1+μ²)² - 4μ²s))
//! C = -Q / (1 - μ² s Q²),   A = -C/Q,   B = s C Q,   D = 1/Q
//! ```
//!
//! `D` also has an algebraically equivalent form whose constant term is
//! `√(1+μ²)`; both are evaluated and must agree to 1e-12, which pins the
//! implementation against sign or convention slips. At `m = 0` the continuous
//! limits apply: `C = -Q`, `B = 0`. Only `0 ≤ μ < 1` is accepted; the radical
//! can vanish at `μ = 1`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::params::ScaleParams;
use crate::state::StateVector;

/// Values of the five multipliers at one lattice mode.
#[derive(Debug, Clone, Copy)]
pub struct MultiplierSet {
    pub q: f64,
    pub c: f64,
    pub a: f64,
    pub b: f64,
    pub d: f64,
    /// `D` evaluated through the alternative expanded expression.
    pub d_alt: f64,
}

/// Evaluate the multipliers at mode `(k,l,m)`.
pub fn multipliers(k: i64, l: i64, m: i64, mu: f64) -> Result<MultiplierSet> {
    if (k, l, m) == (0, 0, 0) {
        return Err(Error::ZeroMode);
    }
    if !(0.0..1.0).contains(&mu) {
        return Err(Error::InvalidParams(format!("mu = {mu} must lie in [0,1)")));
    }
    let k2 = (k * k + l * l + m * m) as f64;
    let s = (m * m) as f64 / k2;
    Ok(multipliers_at_ratio(s, mu))
}

/// Multipliers as functions of `s = m²/|k|²` and μ.
pub fn multipliers_at_ratio(s: f64, mu: f64) -> MultiplierSet {
    let mu2 = mu * mu;
    let one = 1.0 + mu2;
    let radical = (one * one - 4.0 * mu2 * s).sqrt();
    let q = (2.0 / (one + radical)).sqrt();
    let c = -q / (1.0 - mu2 * s * q * q);
    let a = -c / q;
    let b = s * c * q;
    let d = 1.0 / q;
    let d_alt = one.sqrt()
        - 4.0 * mu2 * s
            / ((radical + one)
                * (std::f64::consts::SQRT_2 * (radical + one).sqrt() + 2.0 * one.sqrt()));
    MultiplierSet {
        q,
        c,
        a,
        b,
        d,
        d_alt,
    }
}

impl MultiplierSet {
    /// Largest violation of the defining algebraic relations, including the
    /// alternative form of `D`. Zero up to rounding for every mode.
    pub fn relation_residual(&self, s: f64) -> f64 {
        let r1 = (self.d * self.q - 1.0).abs();
        let r2 = (self.a + self.c / self.q).abs();
        let r3 = (self.b - s * self.c * self.q).abs();
        let r4 = (self.d - self.d_alt).abs();
        r1.max(r2).max(r3).max(r4)
    }
}

/// The diagnostic variables built from the exact intermediate eigenvectors:
///
/// ```text
/// α = (1-⟨·⟩_z)(r - μ b₃ + μ³ C Q Δ⁻¹∂_z² b₃)
/// β = (1-⟨·⟩_z)(D u₃ + μ² C Δ⁻¹ ∂_z ∇_h·u_h)
/// ```
///
/// Both have zero vertical average by construction.
pub fn alpha_beta(v: &StateVector, mu: f64) -> Result<(ScalarField, ScalarField)> {
    if !(0.0..1.0).contains(&mu) {
        return Err(Error::InvalidParams(format!("mu = {mu} must lie in [0,1)")));
    }
    let grid = v.grid().clone();
    let n = grid.len();
    let mu3 = mu * mu * mu;
    let (r, u1, u2, u3, b3) = (
        v.r.spectral(),
        v.u[0].spectral(),
        v.u[1].spectral(),
        v.u[2].spectral(),
        v.b[2].spectral(),
    );
    let mut alpha_hat = vec![Complex64::default(); n];
    let mut beta_hat = vec![Complex64::default(); n];
    {
        let g = grid.clone();
        crate::exec::fill_indexed(&mut alpha_hat, |idx| {
            let (kx, ky, kz) = g.wavenumber_eff(idx);
            if kz == 0 {
                return Complex64::default(); // (1-⟨·⟩_z) annihilates m = 0
            }
            let k2 = (kx * kx + ky * ky + kz * kz) as f64;
            let s = (kz * kz) as f64 / k2;
            let ms = multipliers_at_ratio(s, mu);
            r[idx] - mu * b3[idx] + mu3 * ms.c * ms.q * s * b3[idx]
        });
    }
    {
        let g = grid.clone();
        crate::exec::fill_indexed(&mut beta_hat, |idx| {
            let (kx, ky, kz) = g.wavenumber_eff(idx);
            if kz == 0 {
                return Complex64::default();
            }
            let k2 = (kx * kx + ky * ky + kz * kz) as f64;
            let s = (kz * kz) as f64 / k2;
            let ms = multipliers_at_ratio(s, mu);
            // Δ⁻¹ ∂_z ∇_h·u_h has symbol (m/|k|²)(k û₁ + l û₂).
            let divh = (kx as f64) * u1[idx] + (ky as f64) * u2[idx];
            ms.d * u3[idx] + mu * mu * ms.c * (kz as f64) / k2 * divh
        });
    }
    Ok((
        ScalarField::from_spectral(&grid, alpha_hat)?,
        ScalarField::from_spectral(&grid, beta_hat)?,
    ))
}

/// Per-mode values of the eigenvector multiplier 7-vectors `V_α` (including
/// its gradient part in the magnetic slots) and `V_β`.
pub fn eigvec_components(k: i64, l: i64, m: i64, mu: f64) -> Result<([f64; 7], [f64; 7])> {
    let ms = multipliers(k, l, m, mu)?;
    let k2 = (k * k + l * l + m * m) as f64;
    let (kf, lf, mf) = (k as f64, l as f64, m as f64);
    // V_α: r-slot 1; b-slots μ A Δ⁻¹∂_z∇ plus (-μ + μ³B) e₃.
    let grad = mf / k2; // symbol of Δ⁻¹∂_z∇ divided by the k-component
    let mut va = [0.0; 7];
    va[0] = 1.0;
    va[4] = mu * ms.a * grad * kf;
    va[5] = mu * ms.a * grad * lf;
    va[6] = mu * ms.a * grad * mf + (-mu + mu * mu * mu * ms.b);
    // V_β: u_h-slots μ² C Δ⁻¹∂_z∇_h; u₃-slot D.
    let mut vb = [0.0; 7];
    vb[1] = mu * mu * ms.c * grad * kf;
    vb[2] = mu * mu * ms.c * grad * lf;
    vb[3] = ms.d;
    Ok((va, vb))
}

/// Contract a 7-vector of per-mode multipliers against a state:
/// `Σ_c P_c[Ṽ_c]` evaluated mode-wise. Used to check the eigenvector
/// identities at field level.
fn contract(
    v: &StateVector,
    mu: f64,
    weights: impl Fn(i64, i64, i64) -> [Complex64; 7] + Sync,
) -> ScalarField {
    let grid = v.grid().clone();
    let comps: Vec<&[Complex64]> = (0..7).map(|c| v.component(c).spectral()).collect();
    let mut hat = vec![Complex64::default(); grid.len()];
    let g = grid.clone();
    crate::exec::fill_indexed(&mut hat, |idx| {
        let (kx, ky, kz) = g.wavenumber_eff(idx);
        if (kx, ky, kz) == (0, 0, 0) {
            return Complex64::default();
        }
        let w = weights(kx, ky, kz);
        let mut acc = Complex64::default();
        for c in 0..7 {
            acc += w[c] * comps[c][idx];
        }
        acc
    });
    let _ = mu;
    ScalarField::from_spectral(&grid, hat).expect("sized to grid")
}

/// Residual norms of the two eigenvector identities
/// `(L_A+μL_M)V_α·Ṽ + μ Q ∂_z V_β·Ṽ = 0` and the same with α and β swapped,
/// evaluated against a test state through the actual field operators.
pub fn vab_identity_residuals(test: &StateVector, mu: f64) -> Result<(f64, f64)> {
    if !(0.0..1.0).contains(&mu) {
        return Err(Error::InvalidParams(format!("mu = {mu} must lie in [0,1)")));
    }
    let lv = crate::modes::apply_combined(test, mu);

    let weights_alpha = |k: i64, l: i64, m: i64| {
        let (va, _) = eigvec_components(k, l, m, mu).expect("nonzero mode");
        va.map(|x| Complex64::new(x, 0.0))
    };
    let weights_beta = |k: i64, l: i64, m: i64| {
        let (_, vb) = eigvec_components(k, l, m, mu).expect("nonzero mode");
        vb.map(|x| Complex64::new(x, 0.0))
    };
    // μ Q ∂_z applied after the contraction: both mode-diagonal, so the order
    // against the component weights is immaterial.
    let weights_qz_beta = |k: i64, l: i64, m: i64| {
        let (_, vb) = eigvec_components(k, l, m, mu).expect("nonzero mode");
        let q = multipliers(k, l, m, mu).expect("nonzero mode").q;
        let factor = Complex64::new(0.0, mu * q * m as f64);
        vb.map(|x| factor * x)
    };
    let weights_qz_alpha = |k: i64, l: i64, m: i64| {
        let (va, _) = eigvec_components(k, l, m, mu).expect("nonzero mode");
        let q = multipliers(k, l, m, mu).expect("nonzero mode").q;
        let factor = Complex64::new(0.0, mu * q * m as f64);
        va.map(|x| factor * x)
    };

    let res1 = contract(&lv, mu, weights_alpha)
        .add(&contract(test, mu, weights_qz_beta))?
        .l2_norm();
    let res2 = contract(&lv, mu, weights_beta)
        .add(&contract(test, mu, weights_qz_alpha))?
        .l2_norm();
    Ok((res1, res2))
}

/// Convenience: the multipliers at the parameter ratio of `params`.
pub fn multipliers_for(params: &ScaleParams, k: i64, l: i64, m: i64) -> Result<MultiplierSet> {
    multipliers(k, l, m, params.mu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::synth::{random_state, seeded_rng};

    #[test]
    fn q_collapses_on_pure_vertical_modes() {
        let ms = multipliers(0, 0, 1, 0.5).unwrap();
        assert!((ms.q - 1.0).abs() < 1e-15);
        let ms = multipliers(0, 0, 3, 0.9).unwrap();
        assert!((ms.q - 1.0).abs() < 1e-14);
    }

    #[test]
    fn q_on_horizontal_modes() {
        for mu in [0.0, 0.3, 0.7] {
            let ms = multipliers(1, 0, 0, mu).unwrap();
            assert!((ms.q - 1.0 / (1.0 + mu * mu).sqrt()).abs() < 1e-15);
            assert!((ms.c + ms.q).abs() < 1e-15, "C = -Q at m = 0");
            assert!(ms.b.abs() < 1e-15, "B = 0 at m = 0");
        }
        assert!((multipliers(1, 0, 0, 0.0).unwrap().q - 1.0).abs() < 1e-15);
    }

    #[test]
    fn q_generic_mode_value() {
        // Frozen from an independent high-precision evaluation of the
        // defining formula at (1,1,1), μ = 1/2, s = 1/3.
        let ms = multipliers(1, 1, 1, 0.5).unwrap();
        assert!((ms.q - 0.920_832_586_399_376_2).abs() < 1e-12, "q = {}", ms.q);
    }

    #[test]
    fn q_tends_to_one_as_mu_vanishes() {
        for (k, l, m) in [(1, 2, 3), (4, 0, 1), (2, 2, 0)] {
            let mut prev = (multipliers(k, l, m, 0.4).unwrap().q - 1.0).abs();
            for mu in [0.2, 0.1, 0.05] {
                let d = (multipliers(k, l, m, mu).unwrap().q - 1.0).abs();
                assert!(d <= prev + 1e-15);
                prev = d;
            }
            assert!((multipliers(k, l, m, 0.0).unwrap().q - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn algebraic_relations_hold_per_mode() {
        let mut worst = 0.0f64;
        for &mu in &[0.05, 0.3, 0.6, 0.9] {
            for k in -4i64..=4 {
                for l in -4i64..=4 {
                    for m in -4i64..=4 {
                        if (k, l, m) == (0, 0, 0) {
                            continue;
                        }
                        let s = (m * m) as f64 / ((k * k + l * l + m * m) as f64);
                        let ms = multipliers(k, l, m, mu).unwrap();
                        worst = worst.max(ms.relation_residual(s));
                    }
                }
            }
        }
        assert!(worst < 1e-12, "worst relation residual {worst}");
    }

    #[test]
    fn rejects_zero_mode_and_large_mu() {
        assert!(matches!(multipliers(0, 0, 0, 0.5), Err(Error::ZeroMode)));
        assert!(multipliers(1, 1, 1, 1.0).is_err());
    }

    #[test]
    fn alpha_beta_degenerate_cases() {
        let grid = GridSpec::new(16, 16, 16).unwrap();
        let mut rng = seeded_rng(97);
        let v = random_state(&grid, &mut rng, 5.0);

        // z-independent state: both vanish.
        let mut zi = v.clone();
        for c in 0..7 {
            *zi.component_mut(c) = v.component(c).vertical_average();
        }
        let (a, b) = alpha_beta(&zi, 0.4).unwrap();
        assert!(a.l2_norm() < 1e-14 && b.l2_norm() < 1e-14);

        // μ = 0: α = (1-⟨·⟩_z) r, β = (1-⟨·⟩_z) u₃.
        let (a0, b0) = alpha_beta(&v, 0.0).unwrap();
        assert!(a0.sub(&v.r.remove_vertical_average()).unwrap().l2_norm() < 1e-13);
        assert!(b0.sub(&v.u[2].remove_vertical_average()).unwrap().l2_norm() < 1e-13);
    }

    #[test]
    fn alpha_close_to_intermediate_density() {
        // ‖α - r^I‖_j ≤ (μ + μ³)·‖b₃‖_j since the extra terms carry μ b₃.
        let grid = GridSpec::new(16, 16, 16).unwrap();
        let mut rng = seeded_rng(101);
        let v = random_state(&grid, &mut rng, 5.0);
        let mu = 0.3;
        let (a, _) = alpha_beta(&v, mu).unwrap();
        let ri = v.r.remove_vertical_average();
        for j in 0..3 {
            let diff = a.sub(&ri).unwrap().sobolev_norm(j);
            let bound = (mu + mu.powi(3)) * v.b[2].sobolev_norm(j);
            assert!(diff <= bound * (1.0 + 1e-12), "j={j}: {diff} vs {bound}");
        }
    }

    #[test]
    fn alpha_beta_have_zero_vertical_average() {
        let grid = GridSpec::new(16, 16, 16).unwrap();
        let mut rng = seeded_rng(103);
        let v = random_state(&grid, &mut rng, 5.0);
        let (a, b) = alpha_beta(&v, 0.6).unwrap();
        assert!(a.vertical_average().l2_norm() < 1e-15);
        assert!(b.vertical_average().l2_norm() < 1e-15);
    }

    #[test]
    fn eigvec_identities_at_field_level() {
        let grid = GridSpec::new(16, 16, 16).unwrap();
        let mut rng = seeded_rng(107);
        let v = random_state(&grid, &mut rng, 5.0);
        let scale = v.sobolev_norm(1);
        for mu in [0.0, 0.5] {
            let (r1, r2) = vab_identity_residuals(&v, mu).unwrap();
            assert!(r1 < 1e-10 * scale, "mu={mu}: residual {r1}");
            assert!(r2 < 1e-10 * scale, "mu={mu}: residual {r2}");
        }
        // z-independent test state: identically zero.
        let mut zi = v.clone();
        for c in 0..7 {
            *zi.component_mut(c) = v.component(c).vertical_average();
        }
        let (r1, r2) = vab_identity_residuals(&zi, 0.5).unwrap();
        assert!(r1 < 1e-14 && r2 < 1e-14);
    }
}
