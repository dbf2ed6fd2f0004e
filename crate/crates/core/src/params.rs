//! Scaling parameters and the normalized pressure law.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The two small parameters and derived quantities.
///
/// `eps_m` is the Mach number, `eps_a` the Alfvén number, `mu = eps_a/eps_m`
/// their ratio and `nu` the power relating them via `eps_a = eps_m^(1+nu)`.
/// Only `mu < 1` is supported.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ScaleParams {
    pub eps_m: f64,
    pub eps_a: f64,
    pub mu: f64,
    pub nu: f64,
    /// Ratio limit used by the limit system (0 in the main regime of interest).
    pub mu_lim: f64,
    /// Pressure exponent, > 1.
    pub gamma: f64,
    /// Sobolev order of the analysis, ≥ 3.
    pub n: usize,
}

impl ScaleParams {
    /// Construct from `(eps_m, nu)` with `eps_a = eps_m^(1+nu)`.
    pub fn from_eps_m_nu(eps_m: f64, nu: f64, mu_lim: f64, gamma: f64, n: usize) -> Result<Self> {
        if !(eps_m > 0.0 && eps_m <= 1.0) {
            return Err(Error::InvalidParams(format!("eps_m = {eps_m} not in (0,1]")));
        }
        if nu <= 0.0 {
            return Err(Error::InvalidParams(format!("nu = {nu} must be positive")));
        }
        let eps_a = eps_m.powf(1.0 + nu);
        Self::build(eps_m, eps_a, nu, mu_lim, gamma, n)
    }

    /// Construct from both small parameters; `nu` is derived.
    pub fn from_eps(eps_m: f64, eps_a: f64, mu_lim: f64, gamma: f64, n: usize) -> Result<Self> {
        if !(eps_m > 0.0 && eps_m <= 1.0) {
            return Err(Error::InvalidParams(format!("eps_m = {eps_m} not in (0,1]")));
        }
        if !(eps_a > 0.0 && eps_a < eps_m) {
            return Err(Error::InvalidParams(format!(
                "eps_a = {eps_a} not in (0, eps_m = {eps_m})"
            )));
        }
        let mu = eps_a / eps_m;
        let nu = (1.0 / mu).ln() / (1.0 / eps_m).ln();
        Self::build(eps_m, eps_a, nu, mu_lim, gamma, n)
    }

    fn build(eps_m: f64, eps_a: f64, nu: f64, mu_lim: f64, gamma: f64, n: usize) -> Result<Self> {
        let mu = eps_a / eps_m;
        if mu >= 1.0 {
            return Err(Error::InvalidParams(format!(
                "mu = eps_a/eps_m = {mu} must be < 1"
            )));
        }
        if gamma <= 1.0 {
            return Err(Error::InvalidParams(format!("gamma = {gamma} must be > 1")));
        }
        if n < 3 {
            return Err(Error::InvalidParams(format!("Sobolev order n = {n} must be ≥ 3")));
        }
        if !(0.0..1.0).contains(&mu_lim) {
            return Err(Error::InvalidParams(format!(
                "mu_lim = {mu_lim} must lie in [0,1)"
            )));
        }
        let p = ScaleParams {
            eps_m,
            eps_a,
            mu,
            nu,
            mu_lim,
            gamma,
            n,
        };
        debug_assert!((p.eps_a - p.eps_m.powf(1.0 + p.nu)).abs() <= 1e-12 * p.eps_a);
        Ok(p)
    }

    /// Whether `eps_a ≥ c · eps_m^(1 + 1/(n-1))`, the scaling region in which
    /// every predicted rate exponent stays positive.
    pub fn in_scaling_region(&self, c: f64) -> bool {
        self.eps_a >= c * self.eps_m.powf(1.0 + 1.0 / (self.n as f64 - 1.0)) - 1e-14
    }

    /// The geometric ladder `ε_j = eps_m^(1+ν-jν)`; `ε₀ = eps_a`, `ε₁ = eps_m`.
    pub fn epsilon_j(&self, j: usize) -> f64 {
        self.eps_m.powf(1.0 + self.nu - j as f64 * self.nu)
    }
}

/// Isentropic pressure law normalized so that `p'(1) = 1`:
/// `p(ρ) = ρ^γ/γ`, giving `a(s) = (1+s)^(γ-2)` and `ρ(s) = 1+s`.
#[derive(Debug, Clone, Copy)]
pub struct PressureLaw {
    pub gamma: f64,
}

impl PressureLaw {
    pub fn new(gamma: f64) -> Self {
        PressureLaw { gamma }
    }

    /// `a(s) = p'(1+s)/(1+s) = (1+s)^(γ-2)`.
    pub fn a(&self, s: f64) -> f64 {
        (1.0 + s).powf(self.gamma - 2.0)
    }

    /// `ρ(s) = 1+s`.
    pub fn rho(&self, s: f64) -> f64 {
        1.0 + s
    }

    /// `(a(s) - 1)/s`, stable for small `s`; tends to `γ-2` at `s = 0`.
    pub fn a_minus_one_over_s(&self, s: f64) -> f64 {
        if s == 0.0 {
            self.gamma - 2.0
        } else {
            ((self.gamma - 2.0) * s.ln_1p()).exp_m1() / s
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eps_relation_round_trips() {
        let p = ScaleParams::from_eps_m_nu(0.1, 0.5, 0.0, 5.0 / 3.0, 3).unwrap();
        assert!((p.eps_a - 0.1f64.powf(1.5)).abs() < 1e-15);
        let q = ScaleParams::from_eps(p.eps_m, p.eps_a, 0.0, 5.0 / 3.0, 3).unwrap();
        assert!((q.nu - 0.5).abs() < 1e-12);
        assert!((p.mu - p.eps_m.powf(p.nu)).abs() < 1e-14);
    }

    #[test]
    fn epsilon_ladder() {
        let p = ScaleParams::from_eps_m_nu(0.05, 0.5, 0.0, 5.0 / 3.0, 3).unwrap();
        assert!((p.epsilon_j(0) - p.eps_a).abs() < 1e-15);
        assert!((p.epsilon_j(1) - p.eps_m).abs() < 1e-15);
        for j in 0..4 {
            let ratio = p.epsilon_j(j) / p.epsilon_j(j + 1);
            assert!((ratio - p.mu).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(ScaleParams::from_eps_m_nu(0.0, 0.5, 0.0, 5.0 / 3.0, 3).is_err());
        assert!(ScaleParams::from_eps(0.1, 0.2, 0.0, 5.0 / 3.0, 3).is_err());
        assert!(ScaleParams::from_eps_m_nu(0.1, 0.5, 0.0, 0.9, 3).is_err());
        assert!(ScaleParams::from_eps_m_nu(0.1, 0.5, 0.0, 5.0 / 3.0, 2).is_err());
    }

    #[test]
    fn scaling_region_boundary() {
        // n = 3 makes the boundary exponent 1.5; nu = 0.5 sits exactly on it.
        let p = ScaleParams::from_eps_m_nu(0.1, 0.5, 0.0, 5.0 / 3.0, 3).unwrap();
        assert!(p.in_scaling_region(1.0));
        let q = ScaleParams::from_eps_m_nu(0.1, 0.7, 0.0, 5.0 / 3.0, 3).unwrap();
        assert!(!q.in_scaling_region(1.0));
    }

    #[test]
    fn pressure_law_normalization() {
        let law = PressureLaw::new(5.0 / 3.0);
        assert!((law.a(0.0) - 1.0).abs() < 1e-15);
        // p'(ρ) = ρ^(γ-1): a(s)·ρ(s) = p'(1+s).
        let s = 0.3;
        assert!((law.a(s) * law.rho(s) - (1.0f64 + s).powf(law.gamma - 1.0)).abs() < 1e-14);
        // Stable small-s quotient.
        let tiny = 1e-13;
        assert!((law.a_minus_one_over_s(tiny) - (law.gamma - 2.0)).abs() < 1e-10);
        let s = 0.2;
        assert!((law.a_minus_one_over_s(s) * s - (law.a(s) - 1.0)).abs() < 1e-15);
    }
}
