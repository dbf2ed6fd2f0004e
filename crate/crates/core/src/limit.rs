//! The z-independent limit system on the horizontal torus and its
//! co-integrated corrector.
//!
//! ```text
//! (1+μ²)[∂_t r̄ + (ū_h·∇_h) r̄] + μ (b̄_h·∇_h) ū₃ = 0
//! P_h^div(∂_t ū_h + (ū_h·∇_h) ū_h - (b̄_h·∇_h) b̄_h) = 0,   ∇_h·ū_h = 0
//! ∂_t ū₃ + (ū_h·∇_h) ū₃ + μ (b̄_h·∇_h) r̄ = 0
//! ∂_t b̄_h + (ū_h·∇_h) b̄_h - (b̄_h·∇_h) ū_h = 0,            ∇_h·b̄_h = 0
//! b̄₃ = ⟨⟨b̄₃⁰⟩⟩ - μ (r̄ - ⟨⟨r̄⁰⟩⟩)
//! ```
//!
//! with `μ = μ_lim`. The third magnetic component is algebraic and never
//! integrated. Time stepping is RK4 with the Leray projection applied to the
//! horizontal tendencies at every stage.

use std::sync::Arc;

use crate::corrector::{corrector_rhs, CorrectorState, CorrectorTendency};
use crate::error::{Error, Result};
use crate::field::{leray_h, product, Axis, ScalarField};
use crate::grid::GridSpec;
use crate::init::SlowParts;

/// `(v·∇_h) f`, dealiased.
pub fn advect_h(v: &[ScalarField; 2], f: &ScalarField) -> Result<ScalarField> {
    let mut out = product(&v[0], &f.derivative(Axis::X))?;
    out.axpy(1.0, &product(&v[1], &f.derivative(Axis::Y))?)?;
    Ok(out)
}

/// State of the limit system on a 2D grid. `b̄₃` is derived on demand.
#[derive(Clone, Debug)]
pub struct LimitState {
    pub r: ScalarField,
    pub uh: [ScalarField; 2],
    pub u3: ScalarField,
    pub bh: [ScalarField; 2],
    /// ⟨⟨b̄₃⁰⟩⟩
    pub b3_mean0: f64,
    /// ⟨⟨r̄⁰⟩⟩
    pub r_mean0: f64,
}

impl LimitState {
    pub fn grid(&self) -> &Arc<GridSpec> {
        self.r.grid()
    }

    pub fn zeros(grid: &Arc<GridSpec>) -> Self {
        LimitState {
            r: ScalarField::zeros(grid),
            uh: [ScalarField::zeros(grid), ScalarField::zeros(grid)],
            u3: ScalarField::zeros(grid),
            bh: [ScalarField::zeros(grid), ScalarField::zeros(grid)],
            b3_mean0: 0.0,
            r_mean0: 0.0,
        }
    }

    /// Restrict ε-independent slow data to the horizontal grid.
    pub fn from_slow_parts(slow: &SlowParts, grid2d: &Arc<GridSpec>) -> Result<Self> {
        Ok(LimitState {
            r: slow.r.restrict_2d(grid2d)?,
            uh: [
                slow.uh[0].restrict_2d(grid2d)?,
                slow.uh[1].restrict_2d(grid2d)?,
            ],
            u3: slow.u3.restrict_2d(grid2d)?,
            bh: [
                slow.bh[0].restrict_2d(grid2d)?,
                slow.bh[1].restrict_2d(grid2d)?,
            ],
            b3_mean0: slow.b3_mean,
            r_mean0: slow.r.full_average(),
        })
    }

    /// The algebraic third magnetic component.
    pub fn b3(&self, mu_lim: f64) -> ScalarField {
        self.r
            .add_constant(-self.r_mean0)
            .scale(-mu_lim)
            .add_constant(self.b3_mean0)
    }

    pub fn axpy(&mut self, a: f64, other: &LimitTendency) -> Result<()> {
        self.r.axpy(a, &other.r)?;
        self.uh[0].axpy(a, &other.uh[0])?;
        self.uh[1].axpy(a, &other.uh[1])?;
        self.u3.axpy(a, &other.u3)?;
        self.bh[0].axpy(a, &other.bh[0])?;
        self.bh[1].axpy(a, &other.bh[1])
    }

    pub fn max_horizontal_divergence(&self) -> f64 {
        let du = self.uh[0]
            .derivative(Axis::X)
            .add(&self.uh[1].derivative(Axis::Y))
            .expect("same grid");
        let db = self.bh[0]
            .derivative(Axis::X)
            .add(&self.bh[1].derivative(Axis::Y))
            .expect("same grid");
        du.l2_norm().max(db.l2_norm())
    }

    /// The quadratic invariant `(1+μ²)‖r̄‖₀² + ‖ū_h‖₀² + ‖ū₃‖₀² + ‖b̄_h‖₀²`.
    pub fn quadratic_energy(&self, mu_lim: f64) -> f64 {
        (1.0 + mu_lim * mu_lim) * self.r.sobolev_norm_sq(0)
            + self.uh[0].sobolev_norm_sq(0)
            + self.uh[1].sobolev_norm_sq(0)
            + self.u3.sobolev_norm_sq(0)
            + self.bh[0].sobolev_norm_sq(0)
            + self.bh[1].sobolev_norm_sq(0)
    }

    pub fn max_velocity(&self) -> f64 {
        self.uh[0].max_abs().max(self.uh[1].max_abs())
    }
}

#[derive(Clone, Debug)]
pub struct LimitTendency {
    pub r: ScalarField,
    pub uh: [ScalarField; 2],
    pub u3: ScalarField,
    pub bh: [ScalarField; 2],
}

/// Tendency of the limit system at ratio `mu_lim`.
pub fn limit_rhs(l: &LimitState, mu_lim: f64) -> Result<LimitTendency> {
    let one = 1.0 + mu_lim * mu_lim;
    let mut r_t = advect_h(&l.uh, &l.r)?.scale(-1.0);
    r_t.axpy(-mu_lim / one, &advect_h(&l.bh, &l.u3)?)?;

    let mut uh1_t = advect_h(&l.uh, &l.uh[0])?.scale(-1.0);
    uh1_t.axpy(1.0, &advect_h(&l.bh, &l.bh[0])?)?;
    let mut uh2_t = advect_h(&l.uh, &l.uh[1])?.scale(-1.0);
    uh2_t.axpy(1.0, &advect_h(&l.bh, &l.bh[1])?)?;
    let (uh1_t, uh2_t) = leray_h(&uh1_t, &uh2_t)?;

    let mut u3_t = advect_h(&l.uh, &l.u3)?.scale(-1.0);
    u3_t.axpy(-mu_lim, &advect_h(&l.bh, &l.r)?)?;

    let mut bh1_t = advect_h(&l.uh, &l.bh[0])?.scale(-1.0);
    bh1_t.axpy(1.0, &advect_h(&l.bh, &l.uh[0])?)?;
    let mut bh2_t = advect_h(&l.uh, &l.bh[1])?.scale(-1.0);
    bh2_t.axpy(1.0, &advect_h(&l.bh, &l.uh[1])?)?;
    let (bh1_t, bh2_t) = leray_h(&bh1_t, &bh2_t)?;

    Ok(LimitTendency {
        r: r_t,
        uh: [uh1_t, uh2_t],
        u3: u3_t,
        bh: [bh1_t, bh2_t],
    })
}

/// Limit system and corrector advanced together on one RK4 clock, so the
/// corrector forcing needs no interpolation.
pub struct LimitRun {
    pub limit: LimitState,
    pub corrector: CorrectorState,
    pub mu: f64,
    pub mu_lim: f64,
    dt: f64,
    step_count: usize,
}

impl LimitRun {
    pub fn new(init: LimitState, mu: f64, mu_lim: f64, dt: f64) -> Result<Self> {
        if dt <= 0.0 {
            return Err(Error::InvalidConfig("dt must be positive".into()));
        }
        let grid = init.grid().clone();
        Ok(LimitRun {
            limit: init,
            corrector: CorrectorState::zeros(&grid),
            mu,
            mu_lim,
            dt,
            step_count: 0,
        })
    }

    pub fn t(&self) -> f64 {
        self.step_count as f64 * self.dt
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn stage(&self, l: &LimitState, c: &CorrectorState) -> Result<(LimitTendency, CorrectorTendency)> {
        Ok((
            limit_rhs(l, self.mu_lim)?,
            corrector_rhs(c, l, self.mu, self.mu_lim)?,
        ))
    }

    /// One RK4 step of the coupled pair.
    pub fn step(&mut self) -> Result<()> {
        let dt = self.dt;
        let (k1l, k1c) = self.stage(&self.limit, &self.corrector)?;
        let mut l2 = self.limit.clone();
        let mut c2 = self.corrector.clone();
        l2.axpy(0.5 * dt, &k1l)?;
        c2.axpy(0.5 * dt, &tendency_as_state(&k1c))?;
        let (k2l, k2c) = self.stage(&l2, &c2)?;
        let mut l3 = self.limit.clone();
        let mut c3 = self.corrector.clone();
        l3.axpy(0.5 * dt, &k2l)?;
        c3.axpy(0.5 * dt, &tendency_as_state(&k2c))?;
        let (k3l, k3c) = self.stage(&l3, &c3)?;
        let mut l4 = self.limit.clone();
        let mut c4 = self.corrector.clone();
        l4.axpy(dt, &k3l)?;
        c4.axpy(dt, &tendency_as_state(&k3c))?;
        let (k4l, k4c) = self.stage(&l4, &c4)?;

        self.limit.axpy(dt / 6.0, &k1l)?;
        self.limit.axpy(dt / 3.0, &k2l)?;
        self.limit.axpy(dt / 3.0, &k3l)?;
        self.limit.axpy(dt / 6.0, &k4l)?;
        self.corrector.axpy(dt / 6.0, &tendency_as_state(&k1c))?;
        self.corrector.axpy(dt / 3.0, &tendency_as_state(&k2c))?;
        self.corrector.axpy(dt / 3.0, &tendency_as_state(&k3c))?;
        self.corrector.axpy(dt / 6.0, &tendency_as_state(&k4c))?;
        self.step_count += 1;
        Ok(())
    }
}

fn tendency_as_state(t: &CorrectorTendency) -> CorrectorState {
    CorrectorState {
        r: t.r.clone(),
        u3: t.u3.clone(),
    }
}

/// Standalone limit integration to `t_end` with a CFL-chosen fixed step;
/// samples at `snapshots` uniform times through the callback.
pub fn run_limit<F>(
    init: LimitState,
    mu_lim: f64,
    t_end: f64,
    cfl: f64,
    snapshots: usize,
    mut on_sample: F,
) -> Result<LimitState>
where
    F: FnMut(usize, f64, &LimitState),
{
    if t_end <= 0.0 || snapshots < 2 {
        return Err(Error::InvalidConfig("need t_end > 0 and ≥ 2 samples".into()));
    }
    let grid = init.grid().clone();
    let dx = std::f64::consts::TAU / grid.nx.max(grid.ny) as f64;
    let dt_policy = cfl * dx / (init.max_velocity() + init.bh[0].max_abs() + 1.0);
    let intervals = snapshots - 1;
    let per = ((t_end / dt_policy).ceil() as usize).div_ceil(intervals).max(1);
    let dt = t_end / (per * intervals) as f64;
    let mut run = LimitRun::new(init, mu_lim, mu_lim, dt)?;
    on_sample(0, 0.0, &run.limit);
    for s in 1..=intervals {
        for _ in 0..per {
            run.step()?;
        }
        on_sample(s, run.t(), &run.limit);
    }
    Ok(run.limit)
}
