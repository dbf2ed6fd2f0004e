//! Flat key=value run configuration and the run manifest.
//!
//! The config file is a plain list of `key = value` lines (`#` comments
//! allowed), mirrored one-to-one by CLI flags. It round-trips losslessly:
//! floats are written in shortest round-trip form. Every run writes a
//! manifest embedding the resolved config and its content hash.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::init::InitSpec;
use crate::params::ScaleParams;
use crate::solver::{Integrator, SolverConfig};
use crate::sweep::SweepConfig;

#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub eps_m: f64,
    pub nu: f64,
    /// When set, overrides `nu` via eps_a = eps_m^(1+nu).
    pub eps_a: Option<f64>,
    pub gamma: f64,
    pub n: usize,
    pub mu_lim: f64,
    pub grid_nx: usize,
    pub grid_ny: usize,
    pub grid_nz: usize,
    pub integrator: Integrator,
    /// Integrator used by `sweep` jobs (rate measurement wants rk4-explicit).
    pub sweep_integrator: Integrator,
    pub cfl: f64,
    pub stiff_factor: f64,
    pub t_end: f64,
    pub dealias: bool,
    pub snapshots: usize,
    pub blowup_norm: f64,
    pub seed: u64,
    pub init_kcut: f64,
    pub init_profile_plateau: f64,
    pub init_profile_decay: f64,
    pub init_amp_r_slow: f64,
    pub init_amp_uh_slow: f64,
    pub init_amp_u3_slow: f64,
    pub init_amp_bh_slow: f64,
    pub init_b3_mean: f64,
    pub init_amp_r_int: f64,
    pub init_amp_u3_int: f64,
    pub init_amp_uh_fast: f64,
    pub init_amp_b_fast: f64,
    pub sweep_eps_m: Vec<f64>,
    pub scaling_region_c: f64,
    pub wellprep_bound: f64,
    pub report_floor_abs: f64,
    pub report_monitor_spread: f64,
    pub report_slope_tol: f64,
    pub report_slow_v_tol: f64,
    pub log_level: String,
    /// 0 means use all available cores.
    pub threads: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let s = SolverConfig::default();
        let i = InitSpec::default();
        RunConfig {
            eps_m: 0.1,
            nu: 0.5,
            eps_a: None,
            gamma: 5.0 / 3.0,
            n: 3,
            mu_lim: 0.0,
            grid_nx: 32,
            grid_ny: 32,
            grid_nz: 32,
            integrator: s.integrator,
            sweep_integrator: Integrator::Rk4Explicit,
            cfl: s.cfl,
            stiff_factor: s.stiff_factor,
            t_end: s.t_end,
            dealias: s.dealias,
            snapshots: s.snapshots,
            blowup_norm: s.blowup_norm,
            seed: i.seed,
            init_kcut: i.kcut,
            init_profile_plateau: i.profile_plateau,
            init_profile_decay: i.profile_decay,
            init_amp_r_slow: i.amp_r_slow,
            init_amp_uh_slow: i.amp_uh_slow,
            init_amp_u3_slow: i.amp_u3_slow,
            init_amp_bh_slow: i.amp_bh_slow,
            init_b3_mean: i.b3_mean,
            init_amp_r_int: i.amp_r_int,
            init_amp_u3_int: i.amp_u3_int,
            init_amp_uh_fast: i.amp_uh_fast,
            init_amp_b_fast: i.amp_b_fast,
            sweep_eps_m: vec![0.2, 0.1, 0.05, 0.025],
            scaling_region_c: 1.0,
            wellprep_bound: 1e3,
            report_floor_abs: 1e-8,
            report_monitor_spread: 50.0,
            report_slope_tol: 0.3,
            report_slow_v_tol: 0.2,
            log_level: "info".into(),
            threads: 0,
        }
    }
}

fn fmt_list(v: &[f64]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidConfig(format!("bad float '{p}'")))
        })
        .collect()
}

impl RunConfig {
    /// Serialize as the canonical key=value block (fixed key order).
    pub fn to_kv(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        kv("eps_m", self.eps_m.to_string());
        kv("nu", self.nu.to_string());
        kv(
            "eps_a",
            self.eps_a.map(|v| v.to_string()).unwrap_or_else(|| "auto".into()),
        );
        kv("gamma", self.gamma.to_string());
        kv("n", self.n.to_string());
        kv("mu_lim", self.mu_lim.to_string());
        kv("grid_nx", self.grid_nx.to_string());
        kv("grid_ny", self.grid_ny.to_string());
        kv("grid_nz", self.grid_nz.to_string());
        kv("integrator", self.integrator.to_string());
        kv("sweep_integrator", self.sweep_integrator.to_string());
        kv("cfl", self.cfl.to_string());
        kv("stiff_factor", self.stiff_factor.to_string());
        kv("t_end", self.t_end.to_string());
        kv("dealias", self.dealias.to_string());
        kv("snapshots", self.snapshots.to_string());
        kv("blowup_norm", self.blowup_norm.to_string());
        kv("seed", self.seed.to_string());
        kv("init_kcut", self.init_kcut.to_string());
        kv("init_profile_plateau", self.init_profile_plateau.to_string());
        kv("init_profile_decay", self.init_profile_decay.to_string());
        kv("init_amp_r_slow", self.init_amp_r_slow.to_string());
        kv("init_amp_uh_slow", self.init_amp_uh_slow.to_string());
        kv("init_amp_u3_slow", self.init_amp_u3_slow.to_string());
        kv("init_amp_bh_slow", self.init_amp_bh_slow.to_string());
        kv("init_b3_mean", self.init_b3_mean.to_string());
        kv("init_amp_r_int", self.init_amp_r_int.to_string());
        kv("init_amp_u3_int", self.init_amp_u3_int.to_string());
        kv("init_amp_uh_fast", self.init_amp_uh_fast.to_string());
        kv("init_amp_b_fast", self.init_amp_b_fast.to_string());
        kv("sweep_eps_m", fmt_list(&self.sweep_eps_m));
        kv("scaling_region_c", self.scaling_region_c.to_string());
        kv("wellprep_bound", self.wellprep_bound.to_string());
        kv("report_floor_abs", self.report_floor_abs.to_string());
        kv("report_monitor_spread", self.report_monitor_spread.to_string());
        kv("report_slope_tol", self.report_slope_tol.to_string());
        kv("report_slow_v_tol", self.report_slow_v_tol.to_string());
        kv("log_level", self.log_level.clone());
        kv("threads", self.threads.to_string());
        out
    }

    /// Apply a single key=value assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |what: &str| Error::InvalidConfig(format!("bad {what} '{value}' for key {key}"));
        let f = || value.parse::<f64>().map_err(|_| bad("float"));
        let u = || value.parse::<usize>().map_err(|_| bad("integer"));
        match key {
            "eps_m" => self.eps_m = f()?,
            "nu" => self.nu = f()?,
            "eps_a" => {
                self.eps_a = if value == "auto" {
                    None
                } else {
                    Some(f()?)
                }
            }
            "gamma" => self.gamma = f()?,
            "n" => self.n = u()?,
            "mu_lim" => self.mu_lim = f()?,
            "grid_nx" => self.grid_nx = u()?,
            "grid_ny" => self.grid_ny = u()?,
            "grid_nz" => self.grid_nz = u()?,
            "integrator" => self.integrator = value.parse()?,
            "sweep_integrator" => self.sweep_integrator = value.parse()?,
            "cfl" => self.cfl = f()?,
            "stiff_factor" => self.stiff_factor = f()?,
            "t_end" => self.t_end = f()?,
            "dealias" => self.dealias = value.parse().map_err(|_| bad("bool"))?,
            "snapshots" => self.snapshots = u()?,
            "blowup_norm" => self.blowup_norm = f()?,
            "seed" => self.seed = value.parse().map_err(|_| bad("integer"))?,
            "init_kcut" => self.init_kcut = f()?,
            "init_profile_plateau" => self.init_profile_plateau = f()?,
            "init_profile_decay" => self.init_profile_decay = f()?,
            "init_amp_r_slow" => self.init_amp_r_slow = f()?,
            "init_amp_uh_slow" => self.init_amp_uh_slow = f()?,
            "init_amp_u3_slow" => self.init_amp_u3_slow = f()?,
            "init_amp_bh_slow" => self.init_amp_bh_slow = f()?,
            "init_b3_mean" => self.init_b3_mean = f()?,
            "init_amp_r_int" => self.init_amp_r_int = f()?,
            "init_amp_u3_int" => self.init_amp_u3_int = f()?,
            "init_amp_uh_fast" => self.init_amp_uh_fast = f()?,
            "init_amp_b_fast" => self.init_amp_b_fast = f()?,
            "sweep_eps_m" => self.sweep_eps_m = parse_list(value)?,
            "scaling_region_c" => self.scaling_region_c = f()?,
            "wellprep_bound" => self.wellprep_bound = f()?,
            "report_floor_abs" => self.report_floor_abs = f()?,
            "report_monitor_spread" => self.report_monitor_spread = f()?,
            "report_slope_tol" => self.report_slope_tol = f()?,
            "report_slow_v_tol" => self.report_slow_v_tol = f()?,
            "log_level" => self.log_level = value.to_string(),
            "threads" => self.threads = u()?,
            other => {
                return Err(Error::InvalidConfig(format!("unknown config key '{other}'")))
            }
        }
        Ok(())
    }

    /// Parse a key=value block on top of the defaults.
    pub fn from_kv(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        cfg.merge_kv(text)?;
        Ok(cfg)
    }

    pub fn merge_kv(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::InvalidConfig(format!("line {}: expected key = value", lineno + 1))
            })?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_kv(&std::fs::read_to_string(path)?)
    }

    pub fn params(&self) -> Result<ScaleParams> {
        match self.eps_a {
            Some(eps_a) => ScaleParams::from_eps(self.eps_m, eps_a, self.mu_lim, self.gamma, self.n),
            None => ScaleParams::from_eps_m_nu(self.eps_m, self.nu, self.mu_lim, self.gamma, self.n),
        }
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            integrator: self.integrator,
            cfl: self.cfl,
            stiff_factor: self.stiff_factor,
            t_end: self.t_end,
            dealias: self.dealias,
            snapshots: self.snapshots,
            blowup_norm: self.blowup_norm,
        }
    }

    pub fn init_spec(&self) -> InitSpec {
        InitSpec {
            seed: self.seed,
            profile_plateau: self.init_profile_plateau,
            profile_decay: self.init_profile_decay,
            kcut: self.init_kcut,
            amp_r_slow: self.init_amp_r_slow,
            amp_uh_slow: self.init_amp_uh_slow,
            amp_u3_slow: self.init_amp_u3_slow,
            amp_bh_slow: self.init_amp_bh_slow,
            b3_mean: self.init_b3_mean,
            amp_r_int: self.init_amp_r_int,
            amp_u3_int: self.init_amp_u3_int,
            amp_uh_fast: self.init_amp_uh_fast,
            amp_b_fast: self.init_amp_b_fast,
        }
    }

    pub fn sweep_config(&self) -> SweepConfig {
        let solver = SolverConfig {
            integrator: self.sweep_integrator,
            ..self.solver_config()
        };
        SweepConfig {
            nu: self.nu,
            eps_m_list: self.sweep_eps_m.clone(),
            grid_n: self.grid_nx,
            gamma: self.gamma,
            n: self.n,
            mu_lim: self.mu_lim,
            solver,
            init: self.init_spec(),
            scaling_region_c: self.scaling_region_c,
            wellprep_bound: self.wellprep_bound,
        }
    }

    pub fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.to_kv().as_bytes());
        hex_string(&hasher.finalize())
    }

    /// Manifest JSON embedding the resolved config, its hash, and any
    /// run-specific extras.
    pub fn manifest_json(&self, extras: &BTreeMap<String, String>) -> String {
        #[derive(Serialize)]
        struct Manifest<'a> {
            tool: &'a str,
            version: &'a str,
            config_hash: String,
            config: &'a RunConfig,
            extras: &'a BTreeMap<String, String>,
        }
        serde_json::to_string_pretty(&Manifest {
            tool: "mhd3s",
            version: env!("CARGO_PKG_VERSION"),
            config_hash: self.content_hash(),
            config: self,
            extras,
        })
        .expect("manifest serializes")
    }
}

fn hex_string(bytes: &[u8]) -> String {
    let mut s = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        s.push_str(&format!("{b:02x}"));
    }
    s
}
