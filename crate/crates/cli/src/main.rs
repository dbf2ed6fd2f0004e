//! Command-line entry point: `verify-operators`, `run`, `run-limit`,
//! `sweep`, `report`.
//!
//! Exit codes: 0 success, 1 validation/usage error, 2 numerical failure
//! (blow-up), 3 acceptance failure in `report`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rand::Rng;

use mhd3s_core::config::RunConfig;
use mhd3s_core::diag::DiagRow;
use mhd3s_core::error::Error;
use mhd3s_core::grid::GridSpec;
use mhd3s_core::init::{build_slow_parts, build_well_prepared, validate_initial};
use mhd3s_core::limit::{run_limit, LimitState};
use mhd3s_core::multipliers::{multipliers, vab_identity_residuals};
use mhd3s_core::report::{build_report, ReportOptions};
use mhd3s_core::snapshot::Snapshot;
use mhd3s_core::solver::{run, RunStatus};
use mhd3s_core::sweep::{sweep, SweepResult};
use mhd3s_core::symbol::verify_eigenstructure;
use mhd3s_core::synth::{random_state, seeded_rng};

#[derive(Parser)]
#[command(
    name = "mhd3s",
    version,
    about = "Pseudo-spectral toolkit for the two-parameter scaled MHD system: \
             simulation, operator verification and convergence-rate measurement"
)]
struct Cli {
    /// Flat key=value config file; flags override its entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Parallelism cap (0 = all cores); MHD3S_THREADS works too.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Verify per-mode eigenstructure, multiplier identities and eigenvector
    /// relations; emits a JSON report array and a pass/fail summary line.
    VerifyOperators {
        #[arg(long, default_value_t = 0.3)]
        mu: f64,
        /// Number of random lattice modes.
        #[arg(long, default_value_t = 200)]
        modes: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Largest |component| of sampled modes.
        #[arg(long, default_value_t = 16)]
        kmax: i64,
        /// Grid used for the identity checks on random states.
        #[arg(long, default_value_t = 16)]
        grid: usize,
        /// Output directory for eigen_report.json (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate the full system; writes diagnostics.csv, snapshots and
    /// manifest.json under --out.
    Run {
        #[arg(long = "epsM")]
        eps_m: Option<f64>,
        #[arg(long)]
        nu: Option<f64>,
        #[arg(long = "epsA")]
        eps_a: Option<f64>,
        #[arg(long)]
        gamma: Option<f64>,
        /// Cube resolution.
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long = "T")]
        t_end: Option<f64>,
        #[arg(long)]
        integrator: Option<String>,
        #[arg(long = "dt-cfl")]
        dt_cfl: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Integrate the 2D limit system; snapshots use the field format with
    /// nz = 1.
    RunLimit {
        #[arg(long = "mu-lim")]
        mu_lim: Option<f64>,
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long = "T")]
        t_end: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the (ε_M, ν) sweep: full model, limit model and corrector per
    /// point; writes rate_table.csv, rate_table.json and manifest.json.
    Sweep {
        #[arg(long)]
        nu: Option<f64>,
        /// Comma-separated Mach numbers.
        #[arg(long = "epsM-list")]
        eps_m_list: Option<String>,
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long = "T")]
        t_end: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long = "mu-lim")]
        mu_lim: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit slopes of a sweep table against the predicted exponents; writes
    /// report.json and prints the verdict table.
    Report {
        /// rate_table.json produced by `sweep`.
        #[arg(long)]
        table: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help/version requests are not errors.
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e.downcast_ref::<Error>() {
                Some(Error::BlowUp { .. }) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn setup_threads(cli_threads: Option<usize>, cfg_threads: usize) {
    let n = cli_threads
        .or_else(|| {
            std::env::var("MHD3S_THREADS")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or(cfg_threads);
    if n == 1 {
        mhd3s_core::exec::set_parallel(false);
    }
    #[cfg(feature = "parallel")]
    if n > 1 {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let _ = n;
}

fn base_config(path: &Option<PathBuf>) -> anyhow::Result<RunConfig> {
    Ok(match path {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    })
}

fn write_manifest(
    cfg: &RunConfig,
    out: &Path,
    extras: BTreeMap<String, String>,
) -> anyhow::Result<()> {
    std::fs::create_dir_all(out)?;
    std::fs::write(out.join("manifest.json"), cfg.manifest_json(&extras) + "\n")?;
    Ok(())
}

fn dispatch(cli: Cli) -> anyhow::Result<ExitCode> {
    let mut cfg = base_config(&cli.config)?;
    match cli.cmd {
        Cmd::VerifyOperators {
            mu,
            modes,
            seed,
            kmax,
            grid,
            out,
        } => {
            setup_threads(cli.threads, cfg.threads);
            verify_operators(mu, modes, seed, kmax, grid, out)
        }
        Cmd::Run {
            eps_m,
            nu,
            eps_a,
            gamma,
            grid,
            t_end,
            integrator,
            dt_cfl,
            seed,
            out,
        } => {
            if let Some(v) = eps_m {
                cfg.eps_m = v;
            }
            if let Some(v) = nu {
                cfg.nu = v;
            }
            cfg.eps_a = eps_a.or(cfg.eps_a);
            if let Some(v) = gamma {
                cfg.gamma = v;
            }
            if let Some(v) = grid {
                cfg.grid_nx = v;
                cfg.grid_ny = v;
                cfg.grid_nz = v;
            }
            if let Some(v) = t_end {
                cfg.t_end = v;
            }
            if let Some(v) = integrator {
                cfg.set("integrator", &v)?;
            }
            if let Some(v) = dt_cfl {
                cfg.cfl = v;
            }
            if let Some(v) = seed {
                cfg.seed = v;
            }
            setup_threads(cli.threads, cfg.threads);
            run_full(&cfg, &out)
        }
        Cmd::RunLimit {
            mu_lim,
            grid,
            t_end,
            seed,
            out,
        } => {
            if let Some(v) = mu_lim {
                cfg.mu_lim = v;
            }
            if let Some(v) = grid {
                cfg.grid_nx = v;
                cfg.grid_ny = v;
            }
            if let Some(v) = t_end {
                cfg.t_end = v;
            }
            if let Some(v) = seed {
                cfg.seed = v;
            }
            setup_threads(cli.threads, cfg.threads);
            run_limit_cmd(&cfg, &out)
        }
        Cmd::Sweep {
            nu,
            eps_m_list,
            grid,
            t_end,
            seed,
            n,
            gamma,
            mu_lim,
            out,
        } => {
            if let Some(v) = nu {
                cfg.nu = v;
            }
            if let Some(v) = eps_m_list {
                cfg.set("sweep_eps_m", &v)?;
            }
            if let Some(v) = grid {
                cfg.grid_nx = v;
                cfg.grid_ny = v;
                cfg.grid_nz = v;
            }
            if let Some(v) = t_end {
                cfg.t_end = v;
            }
            if let Some(v) = seed {
                cfg.seed = v;
            }
            if let Some(v) = n {
                cfg.n = v;
            }
            if let Some(v) = gamma {
                cfg.gamma = v;
            }
            if let Some(v) = mu_lim {
                cfg.mu_lim = v;
            }
            setup_threads(cli.threads, cfg.threads);
            sweep_cmd(&cfg, &out)
        }
        Cmd::Report { table, out } => {
            setup_threads(cli.threads, cfg.threads);
            report_cmd(&cfg, &table, out)
        }
    }
}

fn verify_operators(
    mu: f64,
    modes: usize,
    seed: u64,
    kmax: i64,
    grid_n: usize,
    out: Option<PathBuf>,
) -> anyhow::Result<ExitCode> {
    let mut rng = seeded_rng(seed);
    let mut reports = Vec::with_capacity(modes);
    let mut failed = 0usize;
    let mut worst_relation = 0.0f64;
    while reports.len() < modes {
        let k = rng.gen_range(-kmax..=kmax);
        let l = rng.gen_range(-kmax..=kmax);
        let m = rng.gen_range(-kmax..=kmax);
        if (k, l, m) == (0, 0, 0) {
            continue;
        }
        let rep = verify_eigenstructure(k, l, m, mu)?;
        if !rep.pass {
            failed += 1;
        }
        let s = (m * m) as f64 / ((k * k + l * l + m * m) as f64);
        worst_relation = worst_relation.max(multipliers(k, l, m, mu)?.relation_residual(s));
        reports.push(rep);
    }

    // Eigenvector identities against random band-limited states.
    let grid = GridSpec::new(grid_n, grid_n, grid_n)?;
    let mut worst_vab = 0.0f64;
    for i in 0..5 {
        let v = random_state(&grid, &mut seeded_rng(seed.wrapping_add(1 + i)), 5.0);
        let (r1, r2) = vab_identity_residuals(&v, mu)?;
        worst_vab = worst_vab.max(r1.max(r2) / v.sobolev_norm(1));
    }

    let json = serde_json::to_string_pretty(&reports)?;
    if let Some(dir) = &out {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("eigen_report.json"), json + "\n")?;
    } else {
        println!("{json}");
    }
    let pass = failed == 0 && worst_relation < 1e-10 && worst_vab < 1e-10;
    println!(
        "verify-operators: modes = {}, failed = {}, max multiplier residual = {:.3e}, \
         max eigenvector identity residual = {:.3e} -> {}",
        reports.len(),
        failed,
        worst_relation,
        worst_vab,
        if pass { "PASS" } else { "FAIL" }
    );
    Ok(if pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn run_full(cfg: &RunConfig, out: &Path) -> anyhow::Result<ExitCode> {
    let params = cfg.params()?;
    let grid = GridSpec::new(cfg.grid_nx, cfg.grid_ny, cfg.grid_nz)?;
    let init = build_well_prepared(&cfg.init_spec(), &params, &grid)?;
    let prep = validate_initial(&init, &params, cfg.wellprep_bound);
    std::fs::create_dir_all(out)?;
    println!(
        "run: eps_m = {}, eps_a = {:.6e}, grid = {}^3, wellprep residual = {:.3e}{}",
        params.eps_m,
        params.eps_a,
        cfg.grid_nx,
        prep.large_norm,
        if prep.flagged { " (FLAGGED)" } else { "" }
    );

    let mut rows: Vec<DiagRow> = Vec::new();
    let outcome = run(init, params, cfg.solver_config(), |s, t, state, row| {
        rows.push(row.clone());
        let snap = Snapshot::from_state(state).expect("state snapshot");
        let path = out.join(format!("snapshot_{s:04}.mhd3s"));
        snap.write_file(&path).expect("write snapshot");
        println!(
            "  t = {t:.4}: |V|_n = {:.6e}, |V_t|_0 = {:.6e}, div b = {:.3e}",
            row.norm_hn, row.vt_norms[0], row.div_b
        );
    })?;

    let mut csv = DiagRow::csv_header(params.n) + "\n";
    for row in &rows {
        csv.push_str(&row.csv_row());
        csv.push('\n');
    }
    std::fs::write(out.join("diagnostics.csv"), csv)?;

    let mut extras = BTreeMap::new();
    extras.insert("command".into(), "run".into());
    extras.insert("dt".into(), outcome.dt.to_string());
    extras.insert("steps".into(), outcome.steps_taken.to_string());
    extras.insert(
        "status".into(),
        match &outcome.status {
            RunStatus::Completed => "completed".to_string(),
            RunStatus::BlownUp { t, detail } => format!("blow-up at t = {t}: {detail}"),
        },
    );
    write_manifest(cfg, out, extras)?;

    match outcome.status {
        RunStatus::Completed => {
            println!("run completed: {} steps, dt = {:.6e}", outcome.steps_taken, outcome.dt);
            Ok(ExitCode::SUCCESS)
        }
        RunStatus::BlownUp { t, detail } => {
            eprintln!("run blew up at t = {t:.4}: {detail}");
            Ok(ExitCode::from(2))
        }
    }
}

fn run_limit_cmd(cfg: &RunConfig, out: &Path) -> anyhow::Result<ExitCode> {
    let grid3 = GridSpec::new(cfg.grid_nx, cfg.grid_ny, 2)?;
    let grid2 = GridSpec::new_2d(cfg.grid_nx, cfg.grid_ny)?;
    let slow = build_slow_parts(&cfg.init_spec(), &grid3)?;
    let init = LimitState::from_slow_parts(&slow, &grid2)?;
    std::fs::create_dir_all(out)?;
    let mu_lim = cfg.mu_lim;
    let mut energy = Vec::new();
    run_limit(
        init,
        mu_lim,
        cfg.t_end,
        cfg.cfl,
        cfg.snapshots,
        |s, t, l| {
            let b3 = l.b3(mu_lim);
            let snap = Snapshot::from_fields(
                &["r", "u1", "u2", "u3", "b1", "b2", "b3"],
                &[&l.r, &l.uh[0], &l.uh[1], &l.u3, &l.bh[0], &l.bh[1], &b3],
            )
            .expect("limit snapshot");
            snap.write_file(&out.join(format!("limit_{s:04}.mhd3s")))
                .expect("write limit snapshot");
            energy.push((t, l.quadratic_energy(mu_lim)));
            println!(
                "  t = {t:.4}: energy = {:.9e}, div = {:.3e}",
                l.quadratic_energy(mu_lim),
                l.max_horizontal_divergence()
            );
        },
    )?;
    let mut csv = String::from("t,quadratic_energy\n");
    for (t, e) in &energy {
        csv.push_str(&format!(
            "{},{}\n",
            mhd3s_core::diag::fmt_f64(*t),
            mhd3s_core::diag::fmt_f64(*e)
        ));
    }
    std::fs::write(out.join("limit_diagnostics.csv"), csv)?;
    let mut extras = BTreeMap::new();
    extras.insert("command".into(), "run-limit".into());
    write_manifest(cfg, out, extras)?;
    println!("run-limit completed");
    Ok(ExitCode::SUCCESS)
}

fn sweep_cmd(cfg: &RunConfig, out: &Path) -> anyhow::Result<ExitCode> {
    std::fs::create_dir_all(out)?;
    let scfg = cfg.sweep_config();
    let result = sweep(&scfg, |line| println!("  {line}"))?;
    result.write_csv(&out.join("rate_table.csv"))?;
    result.write_json(&out.join("rate_table.json"))?;
    let mut extras = BTreeMap::new();
    extras.insert("command".into(), "sweep".into());
    extras.insert("failures".into(), result.failures.len().to_string());
    write_manifest(cfg, out, extras)?;
    println!(
        "sweep finished: {} points, {} blow-up(s); table written to {}",
        scfg.eps_m_list.len(),
        result.failures.len(),
        out.display()
    );
    if !result.failures.is_empty() && result.failures.len() == scfg.eps_m_list.len() {
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

fn report_cmd(cfg: &RunConfig, table: &Path, out: Option<PathBuf>) -> anyhow::Result<ExitCode> {
    let result = SweepResult::from_json(table)?;
    let report = build_report(
        &result,
        ReportOptions {
            floor_abs: cfg.report_floor_abs,
            monitor_spread: cfg.report_monitor_spread,
            slope_tol: cfg.report_slope_tol,
            slow_v_tol: cfg.report_slow_v_tol,
        },
    );
    print!("{}", report.render_text());
    if let Some(dir) = out {
        std::fs::create_dir_all(&dir)?;
        report.write_json(&dir.join("report.json"))?;
    }
    Ok(if report.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(3)
    })
}
