//! Experiment orchestration: config in, CSV files and a JSON manifest out.

mod config;

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::json;

pub use config::{
    default_rate_times, parse_config, Experiment, LawKind, SimConfig, WaveSpec, DEFAULT_KAPPA0, DEFAULT_MU0, KEYS,
};

use crate::error::{Result, VpbError};
use crate::field::SpatialGrid;
use crate::fluid::{FluidExperiment, TransportLaw};
use crate::kinetic::{HomogeneousSetup, InhomogeneousSetup, KineticDiagnostics, Operators, CLIP_BUDGET};
use crate::linearized::{transport_coefficients, SOLVER_CAP, SOLVER_TOL};
use crate::params::Species;
use crate::waves::{stability_sweep, wave_decay_rates};

/// Environment variable holding the worker-thread count.
pub const THREADS_ENV: &str = "VPB_THREADS";

/// Headers of the emitted CSV files.
pub const WAVE_HEADER: &str = "t,x,n,u1,theta,w";
pub const RATES_HEADER: &str = "p,slope_n,slope_u1,slope_theta,expected";
pub const FAN_HEADER: &str = "t,sup_dist_fan";
pub const MATRIX_HEADER: &str = "q_ratio,mass_ratio,n,d11,d22,d33,d44,posdef";
pub const FLUID_SNAPSHOT_HEADER: &str = "t,x,n_i,n_e,u1,u2,u3,theta,phi";
pub const FLUID_DIAGNOSTICS_HEADER: &str = "t,sup_dist_fan,l2_dist_fan,quasineutral_defect,eta_tilde";
pub const KINETIC_HEADER: &str = "t,mass_i,mass_e,momentum,energy,H,du,dtheta,g_norm,quasineutral_defect";
pub const REDUCED_HEADER: &str = "x,xi1,f";
pub const TRANSPORT_HEADER: &str = "theta,mu_i,kappa_i,mu_e,kappa_e,mu,kappa";

/// Process exit status for an error.
pub fn exit_code(e: &VpbError) -> i32 {
    match e {
        VpbError::Config(_) | VpbError::Configuration(_) | VpbError::Cfl(_) => 2,
        VpbError::Budget(_) => 4,
        _ => 3,
    }
}

/// Worker threads from the environment; unset means one.
pub fn threads_from_env() -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(1),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(VpbError::Configuration(format!("{THREADS_ENV} must be a positive integer, got '{v}'"))),
        },
    }
}

/// Runs `f` on a dedicated pool of `threads` workers.
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| VpbError::Configuration(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_csv(dir: &Path, name: &str, header: &str, rows: &[Vec<String>]) -> Result<PathBuf> {
    let path = dir.join(name);
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(header);
    out.push('\n');
    for r in rows {
        out.push_str(&r.join(","));
        out.push('\n');
    }
    fs::File::create(&path)?.write_all(out.as_bytes())?;
    Ok(path)
}

fn numeric_rows(rows: impl IntoIterator<Item = Vec<f64>>) -> Vec<Vec<String>> {
    rows.into_iter().map(|r| r.into_iter().map(fmt_f64).collect()).collect()
}

fn kinetic_rows(d: &[KineticDiagnostics]) -> Vec<Vec<String>> {
    numeric_rows(d.iter().map(|r| {
        vec![r.t, r.mass_i, r.mass_e, r.momentum, r.energy, r.h, r.du, r.dtheta, r.g_norm, r.quasineutral_defect]
    }))
}

/// Files written by a run and its experiment-specific summary.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub files: Vec<PathBuf>,
    pub summary: serde_json::Value,
}

/// Runs the configured experiment on the current thread pool, writing CSVs and
/// `manifest.json` into `out`.
pub fn run_experiment(cfg: &SimConfig, out: &Path) -> Result<RunOutcome> {
    fs::create_dir_all(out)?;
    let start = Instant::now();
    let (mut files, summary) = match cfg.experiment {
        Experiment::Relax => run_relax(cfg, out)?,
        Experiment::Kinetic => run_kinetic(cfg, out)?,
        Experiment::Fluid => run_fluid(cfg, out)?,
        Experiment::Wave => run_wave(cfg, out)?,
        Experiment::Transport => run_transport(cfg, out)?,
        Experiment::Matrix => run_matrix(cfg, out)?,
    };
    let manifest = json!({
        "experiment": cfg.experiment.as_str(),
        "version": env!("CARGO_PKG_VERSION"),
        "seed": cfg.seed,
        "threads": rayon::current_num_threads(),
        "wall_seconds": start.elapsed().as_secs_f64(),
        "config_text": cfg.to_text(),
        "config": cfg,
        "constants": {
            "solver_tol": SOLVER_TOL,
            "solver_cap": SOLVER_CAP,
            "clip_budget": CLIP_BUDGET,
            "csv_significant_digits": 17,
        },
        "files": files.iter().map(|p| p.file_name().map(|s| s.to_string_lossy().into_owned())).collect::<Vec<_>>(),
        "summary": summary,
    });
    let path = out.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| VpbError::Numerical(format!("manifest: {e}")))?;
    fs::write(&path, text)?;
    files.push(path);
    Ok(RunOutcome { files, summary })
}

type Runner = Result<(Vec<PathBuf>, serde_json::Value)>;

fn run_relax(cfg: &SimConfig, out: &Path) -> Runner {
    let setup = HomogeneousSetup {
        params: cfg.params()?,
        n_v: cfg.n_v,
        ion: (cfg.ion_n, [cfg.ion_u1, 0.0, 0.0], cfg.ion_theta),
        electron: (cfg.electron_n, [cfg.electron_u1, 0.0, 0.0], cfg.electron_theta),
        dt: cfg.dt,
        steps: cfg.steps,
        well_balanced: cfg.well_balanced,
    };
    let run = setup.run(&cfg.collision_config()?)?;
    let path = write_csv(out, "diagnostics.csv", KINETIC_HEADER, &kinetic_rows(&run.diagnostics))?;
    let (first, last) = (run.diagnostics[0], run.diagnostics[run.diagnostics.len() - 1]);
    let h_increase = run.diagnostics.windows(2).map(|w| w[1].h - w[0].h).fold(f64::NEG_INFINITY, f64::max);
    let summary = json!({
        "predicted_u": run.predicted_u,
        "final_u": run.final_u,
        "max_invariant_step": run.max_invariant_step,
        "du_ratio": last.du / first.du,
        "dtheta_ratio": last.dtheta / first.dtheta,
        "max_h_increase": h_increase,
        "clipped_mass": run.reports.iter().map(|r| r.clipped_mass).sum::<f64>(),
    });
    Ok((vec![path], summary))
}

fn run_kinetic(cfg: &SimConfig, out: &Path) -> Runner {
    let setup = InhomogeneousSetup {
        params: cfg.params()?,
        wave: cfg.rarefaction()?,
        n_x: cfg.n_x,
        half_length: cfg.half_length,
        n_v: cfg.n_v,
        sphere: cfg.collision_config()?.sphere,
        t0: cfg.t0,
        dt: cfg.dt,
        steps: cfg.steps,
        diag_every: cfg.diag_every,
        operators: Operators { transport: cfg.transport, field: cfg.field, collision: cfg.collisions },
        well_balanced: cfg.well_balanced,
        theta_star: cfg.theta_star()?,
        budget_seconds: cfg.budget_seconds,
        threads: rayon::current_num_threads(),
    };
    eprintln!(
        "kinetic: estimated {:.3e} FLOPs, about {:.0} s on {} thread(s) (budget {} s)",
        setup.estimated_flops(),
        setup.estimated_seconds(),
        setup.threads,
        setup.budget_seconds
    );
    let run = setup.run()?;
    let mut files = vec![write_csv(out, "diagnostics.csv", KINETIC_HEADER, &kinetic_rows(&run.diagnostics))?];
    let xs = run.solver.space.xs();
    for sp in Species::BOTH {
        let g = run.solver.grids[sp];
        let reduced = run.solver.reduced_distribution(&run.final_state, sp);
        let rows = numeric_rows(
            (0..xs.len())
                .flat_map(|j| (0..g.n).map(move |i| (j, i)))
                .map(|(j, i)| vec![xs[j], g.coord(0, i), reduced[j * g.n + i]]),
        );
        let name = match sp {
            Species::Ion => "reduced_ion.csv",
            Species::Electron => "reduced_electron.csv",
        };
        files.push(write_csv(out, name, REDUCED_HEADER, &rows)?);
    }
    let summary = json!({
        "estimated_flops": run.estimated_flops,
        "mass_defect": run.mass_defect,
        "clipped_mass": run.clipped_mass,
        "theta_star": setup.theta_star,
        "max_g_norm": run.diagnostics.iter().map(|d| d.g_norm).fold(0.0, f64::max),
    });
    Ok((files, summary))
}

fn run_fluid(cfg: &SimConfig, out: &Path) -> Runner {
    let params = cfg.params()?;
    let law = match cfg.transport_law {
        LawKind::Sqrt => TransportLaw::Sqrt { mu0: cfg.mu0, kappa0: cfg.kappa0 },
        LawKind::Calibrated => TransportLaw::calibrated(&params, cfg.n_v, &cfg.collision_config()?)?,
        LawKind::Off => TransportLaw::Off,
    };
    let ex = FluidExperiment {
        wave: cfg.rarefaction()?,
        grid: SpatialGrid::new(cfg.n_x, cfg.half_length)?,
        eps0: cfg.eps0,
        bump_centers: [cfg.bump_center_i, cfg.bump_center_e],
        bump_width: cfg.bump_width,
        t0: cfg.t0,
        t_end: cfg.t_end,
        diag_every: cfg.diag_interval,
        snapshot_times: cfg.snapshot_times.clone(),
        law: law.clone(),
    };
    let tr = ex.run()?;
    let xs = ex.grid.xs();
    let snaps = numeric_rows(tr.snapshots.iter().flat_map(|(t, s)| {
        xs.iter()
            .enumerate()
            .map(move |(j, &x)| vec![*t, x, s.n_i[j], s.n_e[j], s.u[j][0], s.u[j][1], s.u[j][2], s.theta[j], s.phi[j]])
    }));
    let diags = numeric_rows(
        tr.diagnostics.iter().map(|d| vec![d.t, d.sup_dist_fan, d.l2_dist_fan, d.quasineutral_defect, d.eta_tilde]),
    );
    let files = vec![
        write_csv(out, "snapshots.csv", FLUID_SNAPSHOT_HEADER, &snaps)?,
        write_csv(out, "diagnostics.csv", FLUID_DIAGNOSTICS_HEADER, &diags)?,
    ];
    let marks: Vec<_> = cfg
        .snapshot_times
        .iter()
        .filter_map(|&t| tr.at(t).map(|d| json!({"t": t, "sup_dist_fan": d.sup_dist_fan})))
        .collect();
    Ok((files, json!({ "steps": tr.steps, "law": law, "sup_dist_at_snapshots": marks })))
}

fn run_wave(cfg: &SimConfig, out: &Path) -> Runner {
    let wave = cfg.rarefaction()?;
    let n = cfg.n_x;
    let mut rows = Vec::with_capacity(cfg.times.len() * n);
    for &t in &cfg.times {
        for k in 0..n {
            let x = -cfg.half_length + 2.0 * cfg.half_length * k as f64 / (n - 1) as f64;
            let s = wave.smooth_wave(t, x)?;
            rows.push(vec![t, x, s.n, s.u1, s.theta, wave.burgers_w(t, x)?]);
        }
    }
    let report = wave_decay_rates(&wave, &cfg.p_values, &cfg.rate_times, &cfg.times)?;
    let rates = numeric_rows(
        report.p_values.iter().zip(&report.slopes).map(|(&p, s)| vec![p, s.n, s.u1, s.theta, -1.0 + 1.0 / p]),
    );
    let fan = numeric_rows(report.fan_times.iter().zip(&report.fan_distances).map(|(&t, &d)| vec![t, d]));
    let files = vec![
        write_csv(out, "profile.csv", WAVE_HEADER, &numeric_rows(rows))?,
        write_csv(out, "rates.csv", RATES_HEADER, &rates)?,
        write_csv(out, "fan_distance.csv", FAN_HEADER, &fan)?,
    ];
    let summary = json!({
        "left": [wave.left.n, wave.left.u1, wave.left.theta],
        "right": [wave.right.n, wave.right.u1, wave.right.theta],
        "w_minus": wave.w_minus,
        "w_plus": wave.w_plus,
        "delta_r": wave.delta_r,
        "min_ux": report.min_ux,
        "bounds_hold": report.bounds_hold,
    });
    Ok((files, summary))
}

fn run_transport(cfg: &SimConfig, out: &Path) -> Runner {
    let params = cfg.params()?;
    let cc = cfg.collision_config()?;
    let mut rows = Vec::new();
    for &theta in &cfg.theta_values {
        let tc = transport_coefficients(&params, theta, [cfg.transport_u1, 0.0, 0.0], cfg.n_v, &cc)?;
        rows.push(vec![
            theta,
            tc.ion.mu,
            tc.ion.kappa,
            tc.electron.mu,
            tc.electron.kappa,
            tc.ion.mu + tc.electron.mu,
            tc.ion.kappa + tc.electron.kappa,
        ]);
    }
    let path = write_csv(out, "transport.csv", TRANSPORT_HEADER, &numeric_rows(rows))?;
    Ok((vec![path], json!({ "n_v": cfg.n_v })))
}

fn run_matrix(cfg: &SimConfig, out: &Path) -> Runner {
    let sweep = stability_sweep(&cfg.q_ratios, &cfg.mass_ratios, &cfg.densities, cfg.wave_a())?;
    let rows: Vec<Vec<String>> = sweep
        .iter()
        .map(|p| {
            let mut r: Vec<String> = [p.q_ratio, p.mass_ratio, p.n].into_iter().chain(p.minors).map(fmt_f64).collect();
            r.push(p.posdef.to_string());
            r
        })
        .collect();
    let path = write_csv(out, "matrix.csv", MATRIX_HEADER, &rows)?;
    let failures = sweep.iter().filter(|p| !p.posdef).count();
    Ok((vec![path], json!({ "points": sweep.len(), "not_positive_definite": failures })))
}
