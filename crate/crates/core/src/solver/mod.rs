//! Time integration of the full scaled system.
//!
//! The default scheme treats the constant-coefficient stiff operator exactly:
//! a Strang split advances the non-stiff vector field for half a step (RK4 on
//! the sub-flow), applies the unitary per-mode exponential for the full step,
//! and finishes with another non-stiff half step. An explicit RK4 on the full
//! right-hand side is retained as a cross-check; its step size is limited by
//! the stiff frequencies.
//!
//! The magnetic field is re-projected onto its divergence-free part after
//! every step to remove integrator drift.

mod propagator;
mod rhs;

pub use propagator::StiffPropagator;
pub use rhs::{apply_large_symbolwise, full_rhs, max_velocity, nonstiff_rhs};

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::diag::DiagRow;
use crate::error::{Error, Result};
use crate::field::{leray_h, ScalarField};
use crate::grid::GridSpec;
use crate::params::{PressureLaw, ScaleParams};
use crate::state::StateVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Integrator {
    ExpStrang,
    Rk4Explicit,
}

impl std::str::FromStr for Integrator {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exp-strang" => Ok(Integrator::ExpStrang),
            "rk4-explicit" => Ok(Integrator::Rk4Explicit),
            other => Err(Error::InvalidConfig(format!(
                "unknown integrator '{other}' (expected exp-strang or rk4-explicit)"
            ))),
        }
    }
}

impl std::fmt::Display for Integrator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Integrator::ExpStrang => write!(f, "exp-strang"),
            Integrator::Rk4Explicit => write!(f, "rk4-explicit"),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SolverConfig {
    pub integrator: Integrator,
    /// Advective CFL number; dt ≤ cfl·Δx/(‖u‖_∞+1).
    pub cfl: f64,
    /// Stiff step cap for the split scheme: dt ≤ stiff_factor·ε_M.
    pub stiff_factor: f64,
    pub t_end: f64,
    pub dealias: bool,
    /// Number of uniformly spaced sample times including both endpoints.
    pub snapshots: usize,
    /// Run aborts when ‖V‖_n exceeds this.
    pub blowup_norm: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            integrator: Integrator::ExpStrang,
            cfl: 0.4,
            stiff_factor: 0.5,
            t_end: 0.5,
            dealias: true,
            snapshots: 20,
            blowup_norm: 1e6,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.t_end <= 0.0 {
            return Err(Error::InvalidConfig("t_end must be positive".into()));
        }
        if self.cfl <= 0.0 || self.stiff_factor <= 0.0 {
            return Err(Error::InvalidConfig("dt policy factors must be positive".into()));
        }
        if self.snapshots < 2 {
            return Err(Error::InvalidConfig("need at least 2 sample times".into()));
        }
        Ok(())
    }
}

/// Classic RK4 on an autonomous right-hand side.
fn rk4_step<F>(y: &StateVector, dt: f64, f: &F) -> Result<StateVector>
where
    F: Fn(&StateVector) -> Result<StateVector>,
{
    let k1 = f(y)?;
    let mut y2 = y.clone();
    y2.axpy(0.5 * dt, &k1)?;
    let k2 = f(&y2)?;
    let mut y3 = y.clone();
    y3.axpy(0.5 * dt, &k2)?;
    let k3 = f(&y3)?;
    let mut y4 = y.clone();
    y4.axpy(dt, &k3)?;
    let k4 = f(&y4)?;
    let mut out = y.clone();
    out.axpy(dt / 6.0, &k1)?;
    out.axpy(dt / 3.0, &k2)?;
    out.axpy(dt / 3.0, &k3)?;
    out.axpy(dt / 6.0, &k4)?;
    Ok(out)
}

/// How a run ended.
#[derive(Debug, Clone, Serialize)]
pub enum RunStatus {
    Completed,
    BlownUp { t: f64, detail: String },
}

impl RunStatus {
    pub fn is_completed(&self) -> bool {
        matches!(self, RunStatus::Completed)
    }
}

/// Stepping driver holding the state, the cached propagator and the
/// time-integrated fast-mode accumulators.
pub struct MhdRun {
    pub state: StateVector,
    params: ScaleParams,
    law: PressureLaw,
    config: SolverConfig,
    propagator: StiffPropagator,
    dt: f64,
    steps_per_sample: usize,
    n_steps: usize,
    step_count: usize,
    grid2d: Arc<GridSpec>,
    a_accum: [ScalarField; 2],
    b3_accum: ScalarField,
    prev_a: [ScalarField; 2],
    prev_b3: ScalarField,
    initial_l2: f64,
}

impl MhdRun {
    pub fn new(
        init: StateVector,
        params: ScaleParams,
        config: SolverConfig,
    ) -> Result<Self> {
        config.validate()?;
        let law = PressureLaw::new(params.gamma);
        let grid = init.grid().clone();
        let propagator = StiffPropagator::new(&grid, &params);

        let dx = std::f64::consts::TAU / grid.nx.max(grid.ny).max(grid.nz) as f64;
        let umax = max_velocity(&init);
        let adv = config.cfl * dx / (umax + 1.0);
        let dt_policy = match config.integrator {
            Integrator::ExpStrang => adv.min(config.stiff_factor * params.eps_m),
            Integrator::Rk4Explicit => {
                let freq = if config.dealias {
                    propagator.max_frequency_dealias()
                } else {
                    propagator.max_frequency()
                };
                adv.min(2.2 / freq.max(1e-12))
            }
        };
        let intervals = config.snapshots - 1;
        let raw_steps = (config.t_end / dt_policy).ceil() as usize;
        let steps_per_sample = raw_steps.div_ceil(intervals).max(1);
        let n_steps = steps_per_sample * intervals;
        let dt = config.t_end / n_steps as f64;

        let grid2d = GridSpec::new_2d(grid.nx, grid.ny)?;
        let accum_zero = [ScalarField::zeros(&grid2d), ScalarField::zeros(&grid2d)];
        let accum_b3 = ScalarField::zeros(&grid2d);
        let (a0, b0) = integrands(&init, &params, &grid2d)?;
        let initial_l2 = init.l2_norm();
        Ok(MhdRun {
            state: init,
            params,
            law,
            config,
            propagator,
            dt,
            steps_per_sample,
            n_steps,
            step_count: 0,
            grid2d,
            a_accum: accum_zero,
            b3_accum: accum_b3,

            prev_a: a0,
            prev_b3: b0,
            initial_l2,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn steps_per_sample(&self) -> usize {
        self.steps_per_sample
    }

    pub fn t(&self) -> f64 {
        self.step_count as f64 * self.dt
    }

    pub fn params(&self) -> &ScaleParams {
        &self.params
    }

    pub fn finished(&self) -> bool {
        self.step_count >= self.n_steps
    }

    fn attach_time(&self, e: Error) -> Error {
        match e {
            Error::BlowUp { detail, .. } => Error::BlowUp { t: self.t(), detail },
            other => other,
        }
    }

    /// Advance one fixed step.
    pub fn step(&mut self) -> Result<()> {
        let dt = self.dt;
        let params = self.params;
        let law = self.law;
        let dealias = self.config.dealias;
        let next = match self.config.integrator {
            Integrator::ExpStrang => {
                let f = |y: &StateVector| nonstiff_rhs(y, &params, &law, dealias);
                let mut y = rk4_step(&self.state, 0.5 * dt, &f).map_err(|e| self.attach_time(e))?;
                self.propagator.apply(&mut y, dt);
                rk4_step(&y, 0.5 * dt, &f).map_err(|e| self.attach_time(e))?
            }
            Integrator::Rk4Explicit => {
                let f = |y: &StateVector| full_rhs(y, &params, &law, dealias);
                rk4_step(&self.state, dt, &f).map_err(|e| self.attach_time(e))?
            }
        };
        self.state = next;
        self.state.project_b_div_free();
        self.step_count += 1;

        // Trapezoidal accumulation of the time-integrated fast averages.
        let (a_now, b3_now) = integrands(&self.state, &self.params, &self.grid2d)?;
        #[allow(clippy::needless_range_loop)]
        for c in 0..2 {
            self.a_accum[c].axpy(0.5 * dt, &self.prev_a[c])?;
            self.a_accum[c].axpy(0.5 * dt, &a_now[c])?;
        }
        self.b3_accum.axpy(0.5 * dt, &self.prev_b3)?;
        self.b3_accum.axpy(0.5 * dt, &b3_now)?;
        self.prev_a = a_now;
        self.prev_b3 = b3_now;

        let hn = self.state.sobolev_norm(self.params.n);
        if !hn.is_finite() || hn > self.config.blowup_norm {
            return Err(Error::BlowUp {
                t: self.t(),
                detail: format!("H^{} norm reached {hn:.3e}", self.params.n),
            });
        }
        Ok(())
    }

    /// Full diagnostics at the current time (evaluates the tendency).
    pub fn diag_row(&self) -> Result<DiagRow> {
        let n = self.params.n;
        let vt = full_rhs(&self.state, &self.params, &self.law, self.config.dealias)?;
        let vt_norms: Vec<f64> = (0..n).map(|j| vt.sobolev_norm(j)).collect();
        let large = crate::modes::apply_large(&self.state, &self.params);
        let a_int_norm =
            (self.a_accum[0].sobolev_norm_sq(n) + self.a_accum[1].sobolev_norm_sq(n)).sqrt();
        Ok(DiagRow {
            t: self.t(),
            norm_hn: self.state.sobolev_norm(n),
            vt_norms,
            large_nm1: large.sobolev_norm(n - 1),
            div_b: div_b_l2(&self.state),
            mean_r: self.state.r.full_average(),
            mean_b3: self.state.b[2].full_average(),
            a_int_norm,
            b3_int_norm: self.b3_accum.sobolev_norm(n),
            umax: max_velocity(&self.state),
            energy_ratio: self.state.l2_norm() / self.initial_l2.max(f64::MIN_POSITIVE),
        })
    }
}

/// `L²` norm of the spectral divergence of b.
pub fn div_b_l2(v: &StateVector) -> f64 {
    let grid = v.grid();
    let (b1, b2, b3) = (
        v.b[0].spectral(),
        v.b[1].spectral(),
        v.b[2].spectral(),
    );
    let mut sum = 0.0;
    for idx in 0..grid.len() {
        let (kx, ky, kz) = grid.wavenumber(idx);
        let d = (kx as f64) * b1[idx] + (ky as f64) * b2[idx] + (kz as f64) * b3[idx];
        sum += d.norm_sqr();
    }
    sum.sqrt()
}

/// The two time-integral integrands: `⟨u_h^F⟩_z` and
/// `⟨b₃^F + μ Δ⁻¹Δ_h r^S⟩_z`, both as 2D fields.
fn integrands(
    v: &StateVector,
    params: &ScaleParams,
    grid2d: &Arc<GridSpec>,
) -> Result<([ScalarField; 2], ScalarField)> {
    let a1 = v.u[0].vertical_average().restrict_2d(grid2d)?;
    let a2 = v.u[1].vertical_average().restrict_2d(grid2d)?;
    let (p1, p2) = leray_h(&a1, &a2)?;
    let fast = [a1.sub(&p1)?, a2.sub(&p2)?];

    let b3avg = v.b[2].vertical_average().restrict_2d(grid2d)?;
    let b3f = b3avg.add_constant(-v.b[2].full_average());
    let rs = v.r.vertical_average().restrict_2d(grid2d)?;
    // Δ⁻¹Δ_h on a z-independent field is the mean-free part.
    let rsm = rs.add_constant(-rs.full_average());
    let mut second = b3f;
    second.axpy(params.mu, &rsm)?;
    Ok((fast, second))
}

/// Outcome of a completed (or aborted) run.
#[derive(Debug)]
pub struct RunOutcome {
    pub status: RunStatus,
    pub dt: f64,
    pub steps_taken: usize,
    pub diagnostics: Vec<DiagRow>,
}

/// Integrate to `t_end`, invoking `on_sample` at each of the uniformly spaced
/// sample times (including t = 0). Blow-up ends the run early and is reported
/// in the outcome together with the diagnostics gathered so far.
pub fn run<F>(
    init: StateVector,
    params: ScaleParams,
    config: SolverConfig,
    mut on_sample: F,
) -> Result<RunOutcome>
where
    F: FnMut(usize, f64, &StateVector, &DiagRow),
{
    let mut driver = MhdRun::new(init, params, config)?;
    let mut diagnostics = Vec::with_capacity(config.snapshots);
    let row = driver.diag_row()?;
    on_sample(0, 0.0, &driver.state, &row);
    diagnostics.push(row);
    let mut sample_idx = 1;
    while !driver.finished() {
        for _ in 0..driver.steps_per_sample() {
            match driver.step() {
                Ok(()) => {}
                Err(Error::BlowUp { t, detail }) => {
                    return Ok(RunOutcome {
                        status: RunStatus::BlownUp { t, detail },
                        dt: driver.dt(),
                        steps_taken: driver.step_count,
                        diagnostics,
                    });
                }
                Err(other) => return Err(other),
            }
        }
        let row = driver.diag_row()?;
        on_sample(sample_idx, driver.t(), &driver.state, &row);
        diagnostics.push(row);
        sample_idx += 1;
    }
    Ok(RunOutcome {
        status: RunStatus::Completed,
        dt: driver.dt(),
        steps_taken: driver.step_count,
        diagnostics,
    })
}
