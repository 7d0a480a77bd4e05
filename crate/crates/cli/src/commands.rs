//! Scenario commands. Each resolves defaults into the config (so the header
//! echoes every parameter used) and returns one table.

use std::fs::File;
use std::io::BufWriter;

use qle_core::bath::{discretize_bath, BathSpec, SystemSpec};
use qle_core::fdt::{density_integral, pk_density, pp_density, weak_limit_correlation, Density, Fdt, QuadratureConfig};
use qle_core::markovian::{stationary_moments_analytic, simulate_sde, MarkovParams, Scheme, SdeRun};
use qle_core::microbath::{
    discrete_noise_correlation, integrate_gle, sample_initial_conditions, run_ensemble, write_trajectory_csv,
    MicrobathRun, TrajectoryGrid,
};
use qle_core::rwa::{rwa_stationary_analytic, simulate_rwa, RwaParams};

use crate::config::{RunConfig, SchemeArg};
use crate::error::CliError;
use crate::output::Table;

pub const FIG_GAMMAS: [f64; 4] = [1.0, 0.5, 0.125, 0.0125];

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 {
        Ok(v)
    } else {
        Err(invalid(format!("{name} must be > 0, got {v}")))
    }
}

fn fill_system(cfg: &mut RunConfig) -> Result<SystemSpec, CliError> {
    let mass = *cfg.mass.get_or_insert(1.0);
    let omega0 = *cfg.omega0.get_or_insert(1.0);
    let temp = *cfg.temp.get_or_insert(1.0);
    let hbar = *cfg.hbar.get_or_insert(1.0);
    let kb = *cfg.kb.get_or_insert(1.0);
    Ok(SystemSpec::new(mass, omega0, temp)?.with_hbar(hbar)?.with_kb(kb)?)
}

fn gammas(cfg: &mut RunConfig, default: &[f64]) -> Result<Vec<f64>, CliError> {
    let g = cfg.gamma.get_or_insert_with(|| default.to_vec()).clone();
    for &x in &g {
        positive("gamma", x)?;
    }
    Ok(g)
}

/// Strict Ohmic unless a cutoff is configured.
fn bath_for(cfg: &RunConfig, gamma: f64, sys: &SystemSpec) -> Result<BathSpec, CliError> {
    Ok(match cfg.cutoff {
        Some(w) => BathSpec::cutoff_ohmic_with_gamma(gamma, positive("cutoff", w)?, 1.0, sys.mass)?,
        None => BathSpec::strict_ohmic(gamma)?,
    })
}

fn quad_config(cfg: &mut RunConfig) -> Result<QuadratureConfig, CliError> {
    let q = QuadratureConfig::default();
    if cfg.cutoff.is_some() && cfg.omega_max.is_none() {
        return Ok(q);
    }
    let w = *cfg.omega_max.get_or_insert(1e3);
    Ok(q.with_omega_max(positive("omega-max", w)?)?)
}

/// Dimensionless frequency distributions on a uniform Lambda grid.
pub fn dist(cfg: &mut RunConfig) -> Result<Table, CliError> {
    let gs = gammas(cfg, &FIG_GAMMAS)?;
    let n = *cfg.grid.get_or_insert(2000);
    let lmax = positive("lambda-max", *cfg.lambda_max.get_or_insert(10.0))?;
    if n < 2 {
        return Err(invalid("grid needs at least 2 points"));
    }
    let mut t = Table::new("dist", vec!["Gamma", "Lambda", "P_k", "P_p"], "Gamma = gamma/omega0, Lambda = omega/omega0; densities per unit Lambda");
    let q = QuadratureConfig::default();
    for &g in &gs {
        let head = density_integral(Density::Kinetic, 0, g, Some(lmax), &q)?.value;
        t.notes.push(format!("Gamma {g}: P_k mass beyond Lambda = {lmax} is {:.6e}", 1.0 - head));
        for i in 0..n {
            let l = lmax * i as f64 / (n - 1) as f64;
            t.push(vec![g, l, pk_density(l, g)?, pp_density(l, g)?]);
        }
    }
    Ok(t)
}

/// Correlation functions on a tau grid with the weak-coupling overlay.
pub fn corr(cfg: &mut RunConfig) -> Result<Table, CliError> {
    let sys = fill_system(cfg)?;
    let gs = gammas(cfg, &[1e-4])?;
    let q = quad_config(cfg)?;
    let n = *cfg.grid.get_or_insert(201);
    let tmax = positive("tau-max", *cfg.tau_max.get_or_insert(10.0))?;
    if n < 2 {
        return Err(invalid("grid needs at least 2 points"));
    }
    let mut t = Table::new(
        "corr",
        vec!["gamma", "tau", "C_x", "C_v", "C_x_weak", "C_v_weak", "dev_x", "dev_v"],
        "tau in 1/omega0 units of the input; C_x in length^2, C_v in length^2/time^2; dev = |C - C_weak| / C_weak(0)",
    );
    let (cx0, cv0) = weak_limit_correlation(0.0, &sys);
    for &g in &gs {
        let f = Fdt::new(sys, bath_for(cfg, g, &sys)?, q)?;
        for i in 0..n {
            let tau = tmax * i as f64 / (n - 1) as f64;
            let cx = f.position_correlation(tau)?.value;
            let cv = f.velocity_correlation(tau)?.value;
            let (wx, wv) = weak_limit_correlation(tau, &sys);
            t.push(vec![g, tau, cx, cv, wx, wv, (cx - wx).abs() / cx0, (cv - wv).abs() / cv0]);
        }
    }
    Ok(t)
}

/// Mean kinetic and potential energies across a damping sweep.
pub fn energy(cfg: &mut RunConfig) -> Result<Table, CliError> {
    let sys = fill_system(cfg)?;
    let gs = gammas(cfg, &FIG_GAMMAS)?;
    let q = quad_config(cfg)?;
    let mut t = Table::new("energy", vec!["gamma", "E_k", "E_p", "E_k_over_E_p", "E_weak"], "energies in units of hbar omega0 times the input scale");
    let ew = sys.weak_coupling_energy();
    for &g in &gs {
        let e = Fdt::new(sys, bath_for(cfg, g, &sys)?, q)?.mean_energies()?;
        t.push(vec![g, e.kinetic, e.potential, e.kinetic / e.potential, ew]);
    }
    Ok(t)
}

fn sde_run(cfg: &mut RunConfig, gamma: f64, omega0: f64, default_traj: usize, default_samples: usize) -> Result<SdeRun, CliError> {
    let scheme = *cfg.scheme.get_or_insert(SchemeArg::Exact);
    let n_traj = *cfg.traj.get_or_insert(default_traj);
    let n_samples = *cfg.steps.get_or_insert(default_samples);
    let seed = *cfg.seed.get_or_insert(2024);
    let (scheme, dt) = match scheme {
        SchemeArg::Exact => (Scheme::Exact, cfg.dt.unwrap_or(1.0 / gamma)),
        SchemeArg::Euler => {
            let d = if omega0 > 0.0 { 0.01 / omega0 } else { 0.01 / gamma };
            (Scheme::EulerMaruyama, *cfg.dt.get_or_insert(d))
        }
    };
    positive("dt", dt)?;
    let every = ((1.0 / (gamma * dt)).round() as usize).max(1);
    let burn = (10.0 / (gamma * dt)).ceil() as usize;
    Ok(SdeRun {
        dt,
        n_samples,
        sample_every: every,
        burn_in_steps: burn,
        n_traj,
        seed,
        scheme,
    })
}

/// Markovian ensemble moments against the closed form.
pub fn sde(cfg: &mut RunConfig) -> Result<Table, CliError> {
    let sys = fill_system(cfg)?;
    let gs = gammas(cfg, &[0.1])?;
    let mut t = Table::new(
        "sde",
        vec!["gamma", "x2", "x2_se", "v2", "v2_se", "x2_exact", "v2_exact", "z_x", "z_v"],
        "x2 in length^2, v2 in length^2/time^2; z in combined standard errors",
    );
    for &g in &gs {
        let p = MarkovParams::new(sys, g)?;
        let run = sde_run(cfg, g, sys.omega0, 100_000, 1000)?;
        let r = simulate_sde(&p, &run)?;
        let (x2, v2) = stationary_moments_analytic(&p)?;
        t.push(vec![g, r.x2.mean, r.x2.std_error, r.y2.mean, r.y2.std_error, x2, v2, r.x2.z_against(x2), r.y2.z_against(v2)]);
    }
    Ok(t)
}

/// Rotating-wave ensemble moments and the Ehrenfest residual.
pub fn rwa(cfg: &mut RunConfig) -> Result<Table, CliError> {
    let sys = fill_system(cfg)?;
    let gs = gammas(cfg, &[0.01])?;
    let mut t = Table::new(
        "rwa",
        vec!["gamma", "x2", "x2_se", "p2", "p2_se", "x2_exact", "p2_exact", "ehrenfest", "ehrenfest_se", "weak"],
        "x2 in length^2, p2 in momentum^2; ehrenfest = <(dx/dt - p/m)^2> over one step; weak = 1 when gamma <= 0.1 omega0",
    );
    for &g in &gs {
        let p = RwaParams::new(sys, g)?;
        let run = sde_run(cfg, g, sys.omega0, 10_000, 1000)?;
        let r = simulate_rwa(&p, &run)?;
        let (x2, p2) = rwa_stationary_analytic(&p)?;
        let e = r.ehrenfest_residual.expect("reported by simulate_rwa");
        t.push(vec![
            g,
            r.x2.mean,
            r.x2.std_error,
            r.y2.mean,
            r.y2.std_error,
            x2,
            p2,
            e.mean,
            e.std_error,
            if p.weak { 1.0 } else { 0.0 },
        ]);
    }
    Ok(t)
}

/// Finite-bath noise statistics and memory-equation moments.
pub fn microbath(cfg: &mut RunConfig) -> Result<Table, CliError> {
    let sys = fill_system(cfg)?;
    let gs = gammas(cfg, &[0.5])?;
    if gs.len() != 1 {
        return Err(invalid("microbath takes a single gamma"));
    }
    let g = gs[0];
    let cutoff = positive("cutoff", *cfg.cutoff.get_or_insert(3.0))?;
    let n_modes = *cfg.modes.get_or_insert(1000);
    let n_real = *cfg.traj.get_or_insert(1000);
    let seed = *cfg.seed.get_or_insert(2024);
    let dt = positive("dt", *cfg.dt.get_or_insert(0.03))?;
    let tau_max = positive("tau-max", *cfg.tau_max.get_or_insert(5.0))?;
    let steps = *cfg.steps.get_or_insert(((20.0 / g) / dt).ceil() as usize);
    let bath = BathSpec::cutoff_ohmic_with_gamma(g, cutoff, 1.0, sys.mass)?;
    let modes = discretize_bath(&bath, n_modes)?;
    let grid = TrajectoryGrid::new(dt, steps)?;
    let mut run = MicrobathRun::new(grid, n_real, seed);
    run.noise_lags = ((tau_max / dt).floor() as usize).min(steps);
    let rep = run_ensemble(&modes, &sys, &run)?;
    let fdt = Fdt::new(sys, bath, QuadratureConfig::default())?;

    let mut t = Table::new(
        "microbath",
        vec!["tau", "C_f", "C_f_se", "C_f_quadrature", "C_f_discrete"],
        "tau in time units; C_f = (1/2)<{f(t), f(t+tau)}> in force^2",
    );
    for (tau, est) in &rep.noise_acf {
        t.push(vec![
            *tau,
            est.mean,
            est.std_error,
            fdt.symmetric_noise_correlation(*tau)?.value,
            discrete_noise_correlation(modes.modes(), &sys, *tau),
        ]);
    }
    let cx = fdt.position_correlation(0.0)?.value;
    let (x2, v2) = (rep.x2.expect("moments"), rep.v2.expect("moments"));
    t.notes.push(format!("x2 = {} +- {} (quadrature {cx})", x2.mean, x2.std_error));
    t.notes.push(format!("v2 = {} +- {}", v2.mean, v2.std_error));

    if let Some(path) = &cfg.dump {
        let ics = sample_initial_conditions(&modes, &sys, 0.0, seed)?;
        let tr = integrate_gle(modes.modes(), &ics, &sys, &grid, 0.0)?;
        let f = File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        write_trajectory_csv(&tr, BufWriter::new(f))?;
    }
    Ok(t)
}
