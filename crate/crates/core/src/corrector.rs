//! The linear corrector system driven by the limit solution.
//!
//! `(r_c, u₃_c)` solve, from zero initial data,
//!
//! ```text
//! ∂_t r_c + (ū_h·∇_h) r_c + μ (b̄_h·∇_h) u₃_c
//!     = -(b̄_h·∇_h) ū₃ - (μ+μ_lim) (∂_t + ū_h·∇_h) r̄
//! ∂_t u₃_c + (ū_h·∇_h) u₃_c + (μ/(1+μ²)) (b̄_h·∇_h) r_c
//!     = -((1-μ μ_lim)/((1+μ²)(1+μ_lim²))) (b̄_h·∇_h)((1+μ²) r̄ - μ²⟨⟨r̄⁰⟩⟩)
//! ```
//!
//! The material derivative of `r̄` is substituted algebraically from the limit
//! density equation, `(∂_t + ū_h·∇_h) r̄ = -μ_lim (b̄_h·∇_h) ū₃/(1+μ_lim²)`,
//! so no time differencing enters the forcing. The `(μ-μ_lim)`-weighted
//! combination of the corrector with the limit solution removes the dominant
//! slow-vertical error term.

use std::sync::Arc;

use crate::error::Result;
use crate::field::ScalarField;
use crate::grid::GridSpec;
use crate::limit::{advect_h, LimitState};

/// Corrector fields on the 2D grid. Initial data is identically zero.
#[derive(Clone, Debug)]
pub struct CorrectorState {
    pub r: ScalarField,
    pub u3: ScalarField,
}

impl CorrectorState {
    pub fn zeros(grid: &Arc<GridSpec>) -> Self {
        CorrectorState {
            r: ScalarField::zeros(grid),
            u3: ScalarField::zeros(grid),
        }
    }

    pub fn axpy(&mut self, a: f64, other: &Self) -> Result<()> {
        self.r.axpy(a, &other.r)?;
        self.u3.axpy(a, &other.u3)
    }
}

#[derive(Clone, Debug)]
pub struct CorrectorTendency {
    pub r: ScalarField,
    pub u3: ScalarField,
}

/// Tendency of the corrector given the co-temporal limit state.
pub fn corrector_rhs(
    c: &CorrectorState,
    l: &LimitState,
    mu: f64,
    mu_lim: f64,
) -> Result<CorrectorTendency> {
    // (∂_t + ū_h·∇_h) r̄ via the limit density equation.
    let dt_r_lim = advect_h(&l.bh, &l.u3)?.scale(-mu_lim / (1.0 + mu_lim * mu_lim));

    let mut r_t = advect_h(&l.uh, &c.r)?.scale(-1.0);
    r_t.axpy(-mu, &advect_h(&l.bh, &c.u3)?)?;
    r_t.axpy(-1.0, &advect_h(&l.bh, &l.u3)?)?;
    r_t.axpy(-(mu + mu_lim), &dt_r_lim)?;

    let combo = l
        .r
        .scale(1.0 + mu * mu)
        .add_constant(-mu * mu * l.r_mean0);
    let coef = (1.0 - mu * mu_lim) / ((1.0 + mu * mu) * (1.0 + mu_lim * mu_lim));
    let mut u3_t = advect_h(&l.uh, &c.u3)?.scale(-1.0);
    u3_t.axpy(-mu / (1.0 + mu * mu), &advect_h(&l.bh, &c.r)?)?;
    u3_t.axpy(-coef, &advect_h(&l.bh, &combo)?)?;

    Ok(CorrectorTendency { r: r_t, u3: u3_t })
}
