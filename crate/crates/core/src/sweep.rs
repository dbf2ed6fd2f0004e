//! Parameter sweeps: run the full model, the limit system and the corrector
//! across a list of Mach numbers at fixed ν, and collect every error metric
//! and monitor per sample time.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::diag::fmt_f64;
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::init::{build_slow_parts, build_well_prepared, validate_initial, InitSpec};
use crate::limit::{LimitRun, LimitState};
use crate::metrics::error_metrics;
use crate::params::ScaleParams;
use crate::solver::{MhdRun, SolverConfig};
use crate::state::StateVector;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepConfig {
    pub nu: f64,
    pub eps_m_list: Vec<f64>,
    /// Cube resolution of the 3D runs; the 2D runs share the horizontal grid.
    pub grid_n: usize,
    pub gamma: f64,
    /// Sobolev order of the analysis.
    pub n: usize,
    pub mu_lim: f64,
    pub solver: SolverConfig,
    pub init: InitSpec,
    /// Constant of the scaling-region check ε_A ≥ c ε_M^(1+1/(n-1)).
    pub scaling_region_c: f64,
    /// Bound for flagging the well-preparedness residual.
    pub wellprep_bound: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        // Rate measurement needs the explicit integrator: the split scheme is
        // stable at dt ~ ε_M but its fast-mode phase errors pollute the
        // phase-sensitive error functionals.
        let solver = SolverConfig {
            integrator: crate::solver::Integrator::Rk4Explicit,
            ..SolverConfig::default()
        };
        SweepConfig {
            nu: 0.5,
            eps_m_list: vec![0.2, 0.1, 0.05, 0.025],
            grid_n: 32,
            gamma: 5.0 / 3.0,
            n: 3,
            mu_lim: 0.0,
            solver,
            init: InitSpec::default(),
            scaling_region_c: 1.0,
            wellprep_bound: 1e3,
        }
    }
}

/// One measured value: metric `metric` (order `j` where applicable) at time
/// `t` for the run at `eps_m`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RateRow {
    pub eps_m: f64,
    pub nu: f64,
    pub metric: String,
    pub j: Option<usize>,
    pub t: f64,
    pub value: f64,
}

/// Scalar monitor recorded once per sweep point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MonitorRow {
    pub eps_m: f64,
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JobFailure {
    pub eps_m: f64,
    pub t: f64,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepResult {
    pub config: SweepConfig,
    pub rows: Vec<RateRow>,
    pub monitors: Vec<MonitorRow>,
    pub failures: Vec<JobFailure>,
}

impl SweepResult {
    /// Per-ε supremum over the sampled times of one metric. Sweep points that
    /// blew up are omitted.
    pub fn sup_series(&self, metric: &str, j: Option<usize>) -> Vec<(f64, f64)> {
        self.series(metric, j, f64::max)
    }

    /// Final-time value of one metric per ε.
    pub fn final_series(&self, metric: &str, j: Option<usize>) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for &eps in &self.config.eps_m_list {
            if self.failures.iter().any(|f| f.eps_m == eps) {
                continue;
            }
            let last = self
                .rows
                .iter()
                .filter(|r| r.eps_m == eps && r.metric == metric && r.j == j)
                .max_by(|a, b| a.t.partial_cmp(&b.t).unwrap());
            if let Some(r) = last {
                out.push((eps, r.value));
            }
        }
        out
    }

    fn series(&self, metric: &str, j: Option<usize>, fold: fn(f64, f64) -> f64) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for &eps in &self.config.eps_m_list {
            if self.failures.iter().any(|f| f.eps_m == eps) {
                continue;
            }
            let vals: Vec<f64> = self
                .rows
                .iter()
                .filter(|r| r.eps_m == eps && r.metric == metric && r.j == j)
                .map(|r| r.value)
                .collect();
            if !vals.is_empty() {
                out.push((eps, vals.into_iter().fold(f64::NEG_INFINITY, fold)));
            }
        }
        out
    }

    pub fn monitor_series(&self, name: &str) -> Vec<(f64, f64)> {
        self.monitors
            .iter()
            .filter(|m| m.name == name)
            .map(|m| (m.eps_m, m.value))
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("eps_m,nu,metric,j,t,value\n");
        for r in &self.rows {
            let j = r.j.map(|v| v.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                fmt_f64(r.eps_m),
                fmt_f64(r.nu),
                r.metric,
                j,
                fmt_f64(r.t),
                fmt_f64(r.value)
            ));
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(self.to_csv().as_bytes())?;
        Ok(())
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        serde_json::to_writer_pretty(&mut f, self)
            .map_err(|e| Error::InvalidConfig(format!("serialize sweep result: {e}")))?;
        f.write_all(b"\n")?;
        Ok(())
    }

    pub fn from_json(path: &Path) -> Result<Self> {
        let data = std::fs::read_to_string(path)?;
        serde_json::from_str(&data)
            .map_err(|e| Error::InvalidConfig(format!("parse sweep result: {e}")))
    }
}

/// Run the whole sweep. `progress` receives one line per finished job.
pub fn sweep(cfg: &SweepConfig, mut progress: impl FnMut(&str)) -> Result<SweepResult> {
    let grid3 = GridSpec::new(cfg.grid_n, cfg.grid_n, cfg.grid_n)?;
    let grid2 = GridSpec::new_2d(cfg.grid_n, cfg.grid_n)?;
    let mut result = SweepResult {
        config: cfg.clone(),
        rows: Vec::new(),
        monitors: Vec::new(),
        failures: Vec::new(),
    };

    for &eps_m in &cfg.eps_m_list {
        let params = ScaleParams::from_eps_m_nu(eps_m, cfg.nu, cfg.mu_lim, cfg.gamma, cfg.n)?;
        match sweep_job(cfg, &params, &grid3, &grid2, &mut result) {
            Ok(()) => progress(&format!("eps_m = {eps_m}: done")),
            Err(Error::BlowUp { t, detail }) => {
                progress(&format!("eps_m = {eps_m}: blow-up at t = {t:.4} ({detail})"));
                result.failures.push(JobFailure {
                    eps_m,
                    t,
                    detail,
                });
            }
            Err(other) => return Err(other),
        }
    }
    Ok(result)
}

fn sweep_job(
    cfg: &SweepConfig,
    params: &ScaleParams,
    grid3: &std::sync::Arc<GridSpec>,
    grid2: &std::sync::Arc<GridSpec>,
    result: &mut SweepResult,
) -> Result<()> {
    let eps_m = params.eps_m;
    let init = build_well_prepared(&cfg.init, params, grid3)?;
    let wellprep = validate_initial(&init, params, cfg.wellprep_bound);
    let slow = build_slow_parts(&cfg.init, grid3)?;
    let limit_init = LimitState::from_slow_parts(&slow, grid2)?;

    let mut mhd = MhdRun::new(init, *params, cfg.solver)?;
    let mut lim = LimitRun::new(limit_init, params.mu, params.mu_lim, mhd.dt())?;

    let push_monitor = |result: &mut SweepResult, name: &str, value: f64| {
        result.monitors.push(MonitorRow {
            eps_m,
            name: name.to_string(),
            value,
        });
    };
    push_monitor(result, "dt", mhd.dt());
    push_monitor(result, "wellprep_residual", wellprep.large_norm);
    push_monitor(result, "init_norm_hn", wellprep.data_norm);
    push_monitor(
        result,
        "in_scaling_region",
        params.in_scaling_region(cfg.scaling_region_c) as i64 as f64,
    );

    let snapshots = cfg.solver.snapshots;
    let mut sup_vt_mu = vec![0.0f64; cfg.n];
    let mut sup_a_scaled = 0.0f64;
    let mut sup_b3_scaled = 0.0f64;
    let mut sup_div_b = 0.0f64;
    let mut sup_energy = 0.0f64;
    let mut drift_mean_r = 0.0f64;
    let mut drift_mean_b3 = 0.0f64;
    let mut sup_cons = (0.0f64, 0.0f64);
    let (mut mean_r0, mut mean_b30) = (0.0, 0.0);

    let record = |result: &mut SweepResult,
                      s: usize,
                      t: f64,
                      state: &StateVector,
                      lim: &LimitRun|
     -> Result<()> {
        let m = error_metrics(state, &lim.limit, &lim.corrector, params, t)?;
        for (j, v) in m.fast.iter().enumerate() {
            result.rows.push(RateRow {
                eps_m,
                nu: params.nu,
                metric: "fast".into(),
                j: Some(j),
                t,
                value: *v,
            });
        }
        for (j, v) in m.intermediate.iter().enumerate() {
            result.rows.push(RateRow {
                eps_m,
                nu: params.nu,
                metric: "int".into(),
                j: Some(j),
                t,
                value: *v,
            });
        }
        for (name, v) in [
            ("slow_h", m.slow_h),
            ("slow_v", m.slow_v),
            ("slow_v_cor", m.slow_v_cor),
        ] {
            result.rows.push(RateRow {
                eps_m,
                nu: params.nu,
                metric: name.into(),
                j: None,
                t,
                value: v,
            });
        }
        let _ = s;
        Ok(())
    };

    let mut observe = |row: &crate::diag::DiagRow, s: usize| {
        if s == 0 {
            mean_r0 = row.mean_r;
            mean_b30 = row.mean_b3;
        }
        for (j, vt) in row.vt_norms.iter().enumerate() {
            sup_vt_mu[j] = sup_vt_mu[j].max(params.mu.powi(j as i32) * vt);
        }
        sup_a_scaled = sup_a_scaled.max(row.a_int_norm / params.eps_m.powf(1.0 + params.nu));
        sup_b3_scaled = sup_b3_scaled.max(row.b3_int_norm / params.eps_m.powf(1.0 + params.nu));
        sup_div_b = sup_div_b.max(row.div_b);
        sup_energy = sup_energy.max(row.energy_ratio);
        drift_mean_r = drift_mean_r.max((row.mean_r - mean_r0).abs());
        drift_mean_b3 = drift_mean_b3.max((row.mean_b3 - mean_b30).abs());
    };

    let row = mhd.diag_row()?;
    observe(&row, 0);
    let (c1, c2) = crate::diag::conservation_residuals(&mhd.state, params)?;
    sup_cons = (sup_cons.0.max(c1), sup_cons.1.max(c2));
    record(result, 0, 0.0, &mhd.state, &lim)?;

    for s in 1..snapshots {
        for _ in 0..mhd.steps_per_sample() {
            mhd.step()?;
            lim.step()?;
        }
        let row = mhd.diag_row()?;
        observe(&row, s);
        let (c1, c2) = crate::diag::conservation_residuals(&mhd.state, params)?;
        sup_cons = (sup_cons.0.max(c1), sup_cons.1.max(c2));
        record(result, s, mhd.t(), &mhd.state, &lim)?;
    }

    for (j, v) in sup_vt_mu.iter().enumerate() {
        push_monitor(result, &format!("vt_mu_{j}"), *v);
    }
    push_monitor(result, "a_int_scaled", sup_a_scaled);
    push_monitor(result, "b3_int_scaled", sup_b3_scaled);
    push_monitor(result, "div_b", sup_div_b);
    push_monitor(result, "energy_ratio", sup_energy);
    push_monitor(result, "mean_r_drift", drift_mean_r);
    push_monitor(result, "mean_b3_drift", drift_mean_b3);
    push_monitor(result, "cons_residual_r", sup_cons.0);
    push_monitor(result, "cons_residual_rmub3", sup_cons.1);
    Ok(())
}
