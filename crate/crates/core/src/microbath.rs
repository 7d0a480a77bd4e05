//! Finite-N bath realization.
//!
//! Bath coordinates are drawn from the thermal state displaced around the
//! system's initial position, which makes the noise
//!
//! ```text
//! f(t) = sum_j c_j [ s_j cos(w_j t) + p_j / (m_j w_j) sin(w_j t) ],
//! s_j  = q_j(0) - c_j x(0) / (m_j w_j^2)
//! ```
//!
//! stationary with `<s_j^2> = (hbar / 2 m_j w_j) coth(hbar w_j / 2kT)` and
//! `<p_j^2> = (hbar m_j w_j / 2) coth(hbar w_j / 2kT)`. Only this symmetric
//! covariance is sampled; the `i hbar / 2` cross moment has no c-number
//! representation and enters only through [`noise_commutator`].
//!
//! The memory equation `m x'' + int_0^t mu(t - t') x'(t') dt' + m w0^2 x = f(t)`
//! is integrated with RK4. The memory integral is a trapezoid sum over the
//! stored velocity history, linearly extrapolated across each step.

use std::io::Write;

use ndarray::{s, Array1, Array2, ArrayView2};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::bath::{BathMode, ModeSet, SystemSpec};
use crate::error::{require_positive, Error, Result};
use crate::stats::{realization_rng, Estimate, Welford};

/// Uniform time grid starting at 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryGrid {
    pub dt: f64,
    pub n_steps: usize,
}

impl TrajectoryGrid {
    pub fn new(dt: f64, n_steps: usize) -> Result<Self> {
        require_positive("dt", dt)?;
        if n_steps == 0 {
            return Err(Error::domain("grid needs at least one step"));
        }
        Ok(Self { dt, n_steps })
    }

    /// Grid covering `[0, t_end]` with step at most `dt`.
    pub fn covering(t_end: f64, dt: f64) -> Result<Self> {
        require_positive("t_end", t_end)?;
        require_positive("dt", dt)?;
        let n = (t_end / dt).ceil() as usize;
        Self::new(t_end / n as f64, n)
    }

    pub fn t_end(&self) -> f64 {
        self.dt * self.n_steps as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.n_steps).map(|k| self.time(k)).collect()
    }

    /// Requires `dt * w < 0.1` for the fastest frequency `w`.
    pub fn check_resolves(&self, omega: f64) -> Result<()> {
        if self.dt * omega >= 0.1 {
            return Err(Error::domain(format!(
                "dt = {} does not resolve frequency {omega}; need dt * omega < 0.1",
                self.dt
            )));
        }
        Ok(())
    }
}

/// Sampled initial bath state.
#[derive(Debug, Clone, PartialEq)]
pub struct BathInitialConditions {
    /// `s_j = q_j(0) - c_j x(0) / (m_j w_j^2)`
    pub displaced: Vec<f64>,
    pub momenta: Vec<f64>,
    /// System position `x(0)` the bath was displaced around.
    pub x0: f64,
}

impl BathInitialConditions {
    /// Undisplaced `q_j(0)`.
    pub fn positions(&self, modes: &[BathMode]) -> Vec<f64> {
        modes
            .iter()
            .zip(&self.displaced)
            .map(|(m, s)| s + m.coupling * self.x0 / (m.mass * m.omega * m.omega))
            .collect()
    }
}

/// `(<s_j^2>, <p_j^2>)` for one mode.
pub fn mode_variances(mode: &BathMode, system: &SystemSpec) -> (f64, f64) {
    let e = system.mode_energy(mode.omega);
    (e / (mode.mass * mode.omega * mode.omega), mode.mass * e)
}

pub fn sample_initial_conditions_with<R: Rng + ?Sized>(
    modes: &[BathMode],
    system: &SystemSpec,
    x0: f64,
    rng: &mut R,
) -> BathInitialConditions {
    let mut displaced = Vec::with_capacity(modes.len());
    let mut momenta = Vec::with_capacity(modes.len());
    for m in modes {
        let (vs, vp) = mode_variances(m, system);
        let a: f64 = rng.sample(StandardNormal);
        let b: f64 = rng.sample(StandardNormal);
        displaced.push(vs.sqrt() * a);
        momenta.push(vp.sqrt() * b);
    }
    BathInitialConditions { displaced, momenta, x0 }
}

/// Independent zero-mean Gaussians per mode with the thermal variances.
pub fn sample_initial_conditions(modes: &ModeSet, system: &SystemSpec, x0: f64, seed: u64) -> Result<BathInitialConditions> {
    let system = system.validated()?;
    if !x0.is_finite() {
        return Err(Error::domain("x0 must be finite"));
    }
    let mut rng = realization_rng(seed, 0);
    Ok(sample_initial_conditions_with(modes.modes(), &system, x0, &mut rng))
}

/// `f(t)` by direct summation over modes.
pub fn noise_at(modes: &[BathMode], ics: &BathInitialConditions, t: f64) -> f64 {
    modes
        .iter()
        .zip(ics.displaced.iter().zip(&ics.momenta))
        .map(|(m, (s, p))| {
            let (sin, cos) = (m.omega * t).sin_cos();
            m.coupling * (s * cos + p / (m.mass * m.omega) * sin)
        })
        .sum()
}

/// `f(t)` on the grid, `O(N n_steps)`.
pub fn noise_trajectory(modes: &[BathMode], ics: &BathInitialConditions, grid: &TrajectoryGrid) -> Vec<f64> {
    (0..=grid.n_steps).map(|k| noise_at(modes, ics, grid.time(k))).collect()
}

/// Noise `g(t)` built from the undisplaced `q_j(0)`.
pub fn bare_noise_trajectory(modes: &[BathMode], ics: &BathInitialConditions, grid: &TrajectoryGrid) -> Vec<f64> {
    let q = ics.positions(modes);
    (0..=grid.n_steps)
        .map(|k| {
            let t = grid.time(k);
            modes
                .iter()
                .zip(q.iter().zip(&ics.momenta))
                .map(|(m, (q, p))| {
                    let (sin, cos) = (m.omega * t).sin_cos();
                    m.coupling * (q * cos + p / (m.mass * m.omega) * sin)
                })
                .sum()
        })
        .collect()
}

/// `mu(t) x0`, with `mu(t) = sum_j c_j^2 / (m_j w_j^2) cos(w_j t)`.
pub fn initial_slip(modes: &[BathMode], x0: f64, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::domain("initial slip needs t >= 0"));
    }
    Ok(x0 * modes.iter().map(|m| m.kernel_weight() * (m.omega * t).cos()).sum::<f64>())
}

/// Exact ensemble value `(1/2)<{f(t+tau), f(t)}> = sum_j c_j^2 eps_j / (m_j w_j^2) cos(w_j tau)`
/// for the finite bath, `eps_j = (hbar w_j / 2) coth(hbar w_j / 2kT)`.
pub fn discrete_noise_correlation(modes: &[BathMode], system: &SystemSpec, tau: f64) -> f64 {
    modes
        .iter()
        .map(|m| m.kernel_weight() * system.mode_energy(m.omega) * (m.omega * tau).cos())
        .sum()
}

/// `<[f(t), f(t')]> = -i hbar sum_j c_j^2 / (m_j w_j) sin(w_j (t - t'))`, with `tau = t - t'`.
pub fn noise_commutator(modes: &[BathMode], hbar: f64, tau: f64) -> Complex64 {
    let s: f64 = modes
        .iter()
        .map(|m| m.coupling * m.coupling / (m.mass * m.omega) * (m.omega * tau).sin())
        .sum();
    Complex64::new(0.0, -hbar * s)
}

/// A single integrated realization.
#[derive(Debug, Clone, PartialEq)]
pub struct GleTrajectory {
    pub t: Vec<f64>,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    pub f: Vec<f64>,
}

/// CSV with columns `t,x,v,f`.
pub fn write_trajectory_csv<W: Write>(traj: &GleTrajectory, mut out: W) -> std::io::Result<()> {
    writeln!(out, "t,x,v,f")?;
    for i in 0..traj.t.len() {
        writeln!(out, "{},{},{},{}", traj.t[i], traj.x[i], traj.v[i], traj.f[i])?;
    }
    Ok(())
}

fn check_gle_grid(modes: &[BathMode], system: &SystemSpec, grid: &TrajectoryGrid, gamma_hint: f64) -> Result<()> {
    let fastest = modes
        .iter()
        .map(|m| m.omega)
        .fold(system.omega0.max(gamma_hint), f64::max);
    grid.check_resolves(fastest)
}

/// `h mu(k h)` for `k = 0..=n`.
fn kernel_samples(modes: &[BathMode], grid: &TrajectoryGrid) -> Vec<f64> {
    (0..=grid.n_steps)
        .map(|k| {
            let t = grid.time(k);
            grid.dt * modes.iter().map(|m| m.kernel_weight() * (m.omega * t).cos()).sum::<f64>()
        })
        .collect()
}

/// Integrates a batch of realizations sharing one kernel. `noise` holds
/// `f` at the half-step times `i dt / 2`, one column per realization.
/// `observe(k, x, v)` sees the state at every grid point.
fn integrate_batch<F: FnMut(usize, &[f64], &[f64])>(
    kernel: &[f64],
    noise: ArrayView2<f64>,
    x0: &[f64],
    v0: &[f64],
    system: &SystemSpec,
    grid: &TrajectoryGrid,
    mut observe: F,
) -> Result<()> {
    let n = grid.n_steps;
    let b = x0.len();
    let h = grid.dt;
    let inv_m = 1.0 / system.mass;
    let w2 = system.omega0 * system.omega0;
    let mut x = x0.to_vec();
    let mut v = v0.to_vec();
    let mut hist = Array2::<f64>::zeros((n + 1, b));
    hist.row_mut(0).assign(&Array1::from(v.clone()));
    let mut m_prev = vec![0.0; b];
    let mut m_cur = vec![0.0; b];
    let mut weights = Vec::with_capacity(n + 1);
    let (mut k1x, mut k1v) = (vec![0.0; b], vec![0.0; b]);
    let (mut k2x, mut k2v) = (vec![0.0; b], vec![0.0; b]);
    let (mut k3x, mut k3v) = (vec![0.0; b], vec![0.0; b]);
    let (mut xt, mut vt) = (vec![0.0; b], vec![0.0; b]);
    observe(0, &x, &v);
    for k in 0..n {
        if k > 0 {
            weights.clear();
            weights.extend((0..=k).map(|j| kernel[k - j]));
            weights[0] *= 0.5;
            weights[k] *= 0.5;
            let w = ndarray::ArrayView1::from(&weights[..]);
            let m = w.dot(&hist.slice(s![0..=k, ..]));
            m_cur.copy_from_slice(m.as_slice().expect("contiguous"));
        }
        let f0 = noise.row(2 * k);
        let fh = noise.row(2 * k + 1);
        let f1 = noise.row(2 * k + 2);
        let acc = |f: f64, mem: f64, x: f64| (f - mem) * inv_m - w2 * x;
        for r in 0..b {
            let d = m_cur[r] - m_prev[r];
            let (x0, v0) = (x[r], v[r]);
            let mh = m_cur[r] + 0.5 * d;
            let m1 = m_cur[r] + d;
            let a1 = acc(f0[r], m_cur[r], x0);
            k1x[r] = v0;
            k1v[r] = a1;
            let (x2, v2) = (x0 + 0.5 * h * k1x[r], v0 + 0.5 * h * k1v[r]);
            k2x[r] = v2;
            k2v[r] = acc(fh[r], mh, x2);
            let (x3, v3) = (x0 + 0.5 * h * k2x[r], v0 + 0.5 * h * k2v[r]);
            k3x[r] = v3;
            k3v[r] = acc(fh[r], mh, x3);
            let (x4, v4) = (x0 + h * k3x[r], v0 + h * k3v[r]);
            let k4x = v4;
            let k4v = acc(f1[r], m1, x4);
            xt[r] = x0 + h / 6.0 * (k1x[r] + 2.0 * k2x[r] + 2.0 * k3x[r] + k4x);
            vt[r] = v0 + h / 6.0 * (k1v[r] + 2.0 * k2v[r] + 2.0 * k3v[r] + k4v);
        }
        std::mem::swap(&mut x, &mut xt);
        std::mem::swap(&mut v, &mut vt);
        std::mem::swap(&mut m_prev, &mut m_cur);
        // m_cur now holds stale data; restored at the top of the next step
        m_cur.copy_from_slice(&m_prev);
        hist.row_mut(k + 1).assign(&ndarray::ArrayView1::from(&v[..]));
        if (k + 1) % 64 == 0 || k + 1 == n {
            if x.iter().chain(&v).any(|z| !z.is_finite() || z.abs() > 1e100) {
                return Err(Error::Instability {
                    time: grid.time(k + 1),
                    hint: "energy blew up; reduce dt",
                });
            }
        }
        observe(k + 1, &x, &v);
    }
    Ok(())
}

/// Solves the memory equation for one realization starting from
/// `x(0) = ics.x0`, `x'(0) = v0`. An empty mode slice gives the bare oscillator.
pub fn integrate_gle(
    modes: &[BathMode],
    ics: &BathInitialConditions,
    system: &SystemSpec,
    grid: &TrajectoryGrid,
    v0: f64,
) -> Result<GleTrajectory> {
    let system = system.validated()?;
    check_gle_grid(modes, &system, grid, 0.0)?;
    if ics.displaced.len() != modes.len() || ics.momenta.len() != modes.len() {
        return Err(Error::domain("initial conditions do not match the mode count"));
    }
    let half = TrajectoryGrid {
        dt: grid.dt / 2.0,
        n_steps: 2 * grid.n_steps,
    };
    let noise_half = noise_trajectory(modes, ics, &half);
    let noise = Array2::from_shape_vec((2 * grid.n_steps + 1, 1), noise_half.clone()).expect("shape");
    let kernel = kernel_samples(modes, grid);
    let mut xs = Vec::with_capacity(grid.n_steps + 1);
    let mut vs = Vec::with_capacity(grid.n_steps + 1);
    integrate_batch(&kernel, noise.view(), &[ics.x0], &[v0], &system, grid, |_, x, v| {
        xs.push(x[0]);
        vs.push(v[0]);
    })?;
    Ok(GleTrajectory {
        t: grid.times(),
        x: xs,
        v: vs,
        f: noise_half.into_iter().step_by(2).collect(),
    })
}

/// Ensemble settings for [`run_ensemble`].
#[derive(Debug, Clone, PartialEq)]
pub struct MicrobathRun {
    pub grid: TrajectoryGrid,
    pub n_realizations: usize,
    pub seed: u64,
    /// System initial position; the bath is displaced around it.
    pub x0: f64,
    pub v0: f64,
    /// Trailing fraction of the run averaged for stationary moments.
    pub window: f64,
    /// Noise autocorrelation lags `0..=noise_lags` in grid steps; 0 disables.
    pub noise_lags: usize,
    /// Grid indices at which the noise mean is recorded.
    pub noise_probes: Vec<usize>,
    /// Skip the memory-equation integration and report noise statistics only.
    pub noise_only: bool,
    /// Realizations integrated together.
    pub batch: usize,
}

impl MicrobathRun {
    pub fn new(grid: TrajectoryGrid, n_realizations: usize, seed: u64) -> Self {
        Self {
            grid,
            n_realizations,
            seed,
            x0: 0.0,
            v0: 0.0,
            window: 0.25,
            noise_lags: 0,
            noise_probes: Vec::new(),
            noise_only: false,
            batch: 500,
        }
    }
}

/// Ensemble averages from [`run_ensemble`].
#[derive(Debug, Clone, PartialEq)]
pub struct MicrobathReport {
    /// Time-window averages of `x^2`, `x'^2`, `x x'`; absent when `noise_only`.
    pub x2: Option<Estimate>,
    pub v2: Option<Estimate>,
    pub xv: Option<Estimate>,
    /// `(t, <f(t)>)` at the probe indices.
    pub noise_mean: Vec<(f64, Estimate)>,
    /// `(tau, <f(t) f(t + tau)>)` averaged over time origins and realizations.
    pub noise_acf: Vec<(f64, Estimate)>,
    pub n_realizations: usize,
    pub seed: u64,
}

struct BatchStats {
    moments: [Welford; 3],
    means: Vec<Welford>,
    acf: Vec<Welford>,
}

/// Samples, builds the noise for and integrates `n_realizations` independent
/// realizations. Realization `r` draws from stream `(seed, r)`.
pub fn run_ensemble(modes: &ModeSet, system: &SystemSpec, run: &MicrobathRun) -> Result<MicrobathReport> {
    let system = system.validated()?;
    let grid = run.grid;
    let modes = modes.modes();
    if !run.noise_only {
        check_gle_grid(modes, &system, &grid, 0.0)?;
    }
    if run.n_realizations == 0 || run.batch == 0 {
        return Err(Error::domain("n_realizations and batch must be positive"));
    }
    if !(run.window > 0.0 && run.window <= 1.0) {
        return Err(Error::domain("window must lie in (0, 1]"));
    }
    if run.noise_lags > grid.n_steps || run.noise_probes.iter().any(|&p| p > grid.n_steps) {
        return Err(Error::domain("noise lags and probes must lie on the grid"));
    }
    let n = grid.n_steps;
    let n_modes = modes.len();
    // cos/sin basis at the half-step times
    let mut basis = Array2::<f64>::zeros((2 * n + 1, 2 * n_modes));
    for i in 0..=2 * n {
        let t = 0.5 * grid.dt * i as f64;
        for (j, m) in modes.iter().enumerate() {
            let (sin, cos) = (m.omega * t).sin_cos();
            basis[(i, j)] = cos;
            basis[(i, n_modes + j)] = sin;
        }
    }
    let kernel = kernel_samples(modes, &grid);
    let first_sample = (((1.0 - run.window) * n as f64).ceil() as usize).min(n);
    let n_window = (n - first_sample + 1) as f64;

    let n_batches = run.n_realizations.div_ceil(run.batch);
    let batches: Vec<Result<BatchStats>> = (0..n_batches)
        .into_par_iter()
        .map(|bi| {
            let lo = bi * run.batch;
            let hi = (lo + run.batch).min(run.n_realizations);
            let b = hi - lo;
            let mut coeff = Array2::<f64>::zeros((2 * n_modes, b));
            for r in 0..b {
                let mut rng = realization_rng(run.seed, (lo + r) as u64);
                let ics = sample_initial_conditions_with(modes, &system, run.x0, &mut rng);
                for (j, m) in modes.iter().enumerate() {
                    coeff[(j, r)] = m.coupling * ics.displaced[j];
                    coeff[(n_modes + j, r)] = m.coupling * ics.momenta[j] / (m.mass * m.omega);
                }
            }
            let noise = basis.dot(&coeff);

            let mut means = vec![Welford::new(); run.noise_probes.len()];
            let mut acf = vec![Welford::new(); if run.noise_lags > 0 { run.noise_lags + 1 } else { 0 }];
            let mut column = vec![0.0; n + 1];
            for r in 0..b {
                for (k, c) in column.iter_mut().enumerate() {
                    *c = noise[(2 * k, r)];
                }
                for (w, &p) in means.iter_mut().zip(&run.noise_probes) {
                    w.push(column[p]);
                }
                for (lag, w) in acf.iter_mut().enumerate() {
                    let cnt = n + 1 - lag;
                    let s: f64 = column[..cnt].iter().zip(&column[lag..]).map(|(a, b)| a * b).sum();
                    w.push(s / cnt as f64);
                }
            }

            let mut moments = [Welford::new(); 3];
            if !run.noise_only {
                let mut sxx = vec![0.0; b];
                let mut svv = vec![0.0; b];
                let mut sxv = vec![0.0; b];
                let x0 = vec![run.x0; b];
                let v0 = vec![run.v0; b];
                integrate_batch(&kernel, noise.view(), &x0, &v0, &system, &grid, |k, x, v| {
                    if k >= first_sample {
                        for r in 0..b {
                            sxx[r] += x[r] * x[r];
                            svv[r] += v[r] * v[r];
                            sxv[r] += x[r] * v[r];
                        }
                    }
                })?;
                for r in 0..b {
                    moments[0].push(sxx[r] / n_window);
                    moments[1].push(svv[r] / n_window);
                    moments[2].push(sxv[r] / n_window);
                }
            }
            Ok(BatchStats { moments, means, acf })
        })
        .collect();

    let mut moments = [Welford::new(); 3];
    let mut means = vec![Welford::new(); run.noise_probes.len()];
    let mut acf = vec![Welford::new(); if run.noise_lags > 0 { run.noise_lags + 1 } else { 0 }];
    for b in batches {
        let b = b?;
        for (t, s) in moments.iter_mut().zip(&b.moments) {
            t.merge(s);
        }
        for (t, s) in means.iter_mut().zip(&b.means) {
            t.merge(s);
        }
        for (t, s) in acf.iter_mut().zip(&b.acf) {
            t.merge(s);
        }
    }
    let est = |w: &Welford| (!run.noise_only).then(|| w.estimate());
    Ok(MicrobathReport {
        x2: est(&moments[0]),
        v2: est(&moments[1]),
        xv: est(&moments[2]),
        noise_mean: run
            .noise_probes
            .iter()
            .zip(&means)
            .map(|(&p, w)| (grid.time(p), w.estimate()))
            .collect(),
        noise_acf: acf.iter().enumerate().map(|(l, w)| (grid.time(l), w.estimate())).collect(),
        n_realizations: run.n_realizations,
        seed: run.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::{discretize_bath, BathSpec};

    fn small_bath(n: usize) -> ModeSet {
        let spec = BathSpec::cutoff_ohmic_with_gamma(0.5, 3.0, 1.0, 1.0).unwrap();
        discretize_bath(&spec, n).unwrap()
    }

    #[test]
    fn variances_limits() {
        let mode = BathMode { omega: 2.0, mass: 0.5, coupling: 1.0 };
        let classical = SystemSpec::default().with_hbar(1e-7).unwrap().with_temperature(0.3).unwrap();
        let (vs, vp) = mode_variances(&mode, &classical);
        assert!((vs / (0.3 / (0.5 * 4.0)) - 1.0).abs() < 1e-10);
        assert!((vp / (0.5 * 0.3) - 1.0).abs() < 1e-10);
        let cold = SystemSpec::default().with_temperature(1e-3).unwrap();
        let (vs, _) = mode_variances(&mode, &cold);
        assert!((vs - 1.0 / (2.0 * 0.5 * 2.0)).abs() < 1e-12);
    }

    #[test]
    fn sampled_variances_match() {
        let mode = BathMode { omega: 1.3, mass: 0.8, coupling: 0.4 };
        let sys = SystemSpec::default().with_temperature(0.7).unwrap();
        let (vs, vp) = mode_variances(&mode, &sys);
        let modes = vec![mode; 1000];
        let mut ws = Welford::new();
        let mut wp = Welford::new();
        for r in 0..1000 {
            let mut rng = realization_rng(21, r);
            let ics = sample_initial_conditions_with(&modes, &sys, 0.0, &mut rng);
            ics.displaced.iter().for_each(|s| ws.push(s * s));
            ics.momenta.iter().for_each(|p| wp.push(p * p));
        }
        assert!(ws.estimate().z_against(vs) < 4.0, "{:?} {vs}", ws.estimate());
        assert!(wp.estimate().z_against(vp) < 4.0, "{:?} {vp}", wp.estimate());
    }

    #[test]
    fn single_mode_noise_is_cosine() {
        let modes = [BathMode { omega: 1.7, mass: 1.0, coupling: 0.6 }];
        let ics = BathInitialConditions { displaced: vec![1.0], momenta: vec![0.0], x0: 0.3 };
        let grid = TrajectoryGrid::new(0.01, 500).unwrap();
        let f = noise_trajectory(&modes, &ics, &grid);
        for (k, v) in f.iter().enumerate() {
            assert!((v - 0.6 * (1.7 * grid.time(k)).cos()).abs() < 1e-14);
        }
    }

    #[test]
    fn slip_identity_is_exact() {
        let modes = small_bath(200);
        let sys = SystemSpec::default().with_temperature(0.5).unwrap();
        let ics = sample_initial_conditions(&modes, &sys, 0.8, 3).unwrap();
        let grid = TrajectoryGrid::new(0.02, 1000).unwrap();
        let f = noise_trajectory(modes.modes(), &ics, &grid);
        let g = bare_noise_trajectory(modes.modes(), &ics, &grid);
        let scale = f.iter().map(|v| v.abs()).fold(0.0, f64::max);
        for k in 0..=grid.n_steps {
            let slip = initial_slip(modes.modes(), 0.8, grid.time(k)).unwrap();
            assert!((f[k] - (g[k] - slip)).abs() < 1e-12 * scale.max(1.0));
        }
        assert_eq!(initial_slip(modes.modes(), 0.0, 1.3).unwrap(), 0.0);
        let w: f64 = modes.iter().map(|m| m.kernel_weight()).sum();
        assert!((initial_slip(modes.modes(), 2.0, 0.0).unwrap() - 2.0 * w).abs() < 1e-12 * w);
    }

    #[test]
    fn commutator_is_odd_and_imaginary() {
        let modes = small_bath(50);
        let c = noise_commutator(modes.modes(), 1.0, 0.7);
        assert_eq!(c.re, 0.0);
        assert_eq!(noise_commutator(modes.modes(), 1.0, -0.7), -c);
        assert_eq!(noise_commutator(modes.modes(), 1.0, 0.0), Complex64::new(0.0, 0.0));
        // continuum: -(2i hbar / pi) int_0^W m gamma w sin(w tau) dw
        let (g, w, tau) = (0.5, 3.0, 0.7);
        let fine = small_bath(20_000);
        let exact = -2.0 / std::f64::consts::PI * g * (((w * tau) as f64).sin() / (tau * tau) - w * (w * tau).cos() / tau);
        let got = noise_commutator(fine.modes(), 1.0, tau).im;
        assert!((got - exact).abs() < 1e-3 * exact.abs(), "{got} {exact}");
    }

    #[test]
    fn bare_oscillator_is_cosine() {
        let ics = BathInitialConditions { displaced: vec![], momenta: vec![], x0: 1.0 };
        let grid = TrajectoryGrid::new(0.01, 2000).unwrap();
        let tr = integrate_gle(&[], &ics, &SystemSpec::default(), &grid, 0.0).unwrap();
        for (t, x) in tr.t.iter().zip(&tr.x) {
            assert!((x - t.cos()).abs() < 1e-8);
        }
    }

    /// Independent oracle: the full linear system of oscillator plus modes,
    /// with the counterterm, integrated by fine-step RK4.
    fn full_system_x(modes: &[BathMode], q0: &[f64], p0: &[f64], x0: f64, sys: &SystemSpec, t_end: f64, h: f64) -> Vec<(f64, f64)> {
        let n = modes.len();
        let dim = 2 + 2 * n;
        let rhs = |y: &[f64], out: &mut [f64]| {
            let (x, v) = (y[0], y[1]);
            let mut force = -sys.mass * sys.omega0 * sys.omega0 * x;
            for (j, m) in modes.iter().enumerate() {
                let q = y[2 + j];
                force += m.coupling * (q - m.coupling * x / (m.mass * m.omega * m.omega));
                out[2 + j] = y[2 + n + j] / m.mass;
                out[2 + n + j] = -m.mass * m.omega * m.omega * q + m.coupling * x;
            }
            out[0] = v;
            out[1] = force / sys.mass;
        };
        let mut y = vec![0.0; dim];
        y[0] = x0;
        y[2..2 + n].copy_from_slice(q0);
        y[2 + n..].copy_from_slice(p0);
        let steps = (t_end / h).round() as usize;
        let mut out = vec![(0.0, x0)];
        let mut k = [vec![0.0; dim], vec![0.0; dim], vec![0.0; dim], vec![0.0; dim]];
        let mut tmp = vec![0.0; dim];
        for s in 0..steps {
            rhs(&y, &mut k[0]);
            for i in 0..dim { tmp[i] = y[i] + 0.5 * h * k[0][i]; }
            rhs(&tmp, &mut k[1]);
            for i in 0..dim { tmp[i] = y[i] + 0.5 * h * k[1][i]; }
            rhs(&tmp, &mut k[2]);
            for i in 0..dim { tmp[i] = y[i] + h * k[2][i]; }
            rhs(&tmp, &mut k[3]);
            for i in 0..dim {
                y[i] += h / 6.0 * (k[0][i] + 2.0 * k[1][i] + 2.0 * k[2][i] + k[3][i]);
            }
            out.push(((s + 1) as f64 * h, y[0]));
        }
        out
    }

    #[test]
    fn memory_equation_matches_full_system() {
        let modes = small_bath(20);
        let sys = SystemSpec::default().with_temperature(0.5).unwrap();
        let ics = sample_initial_conditions(&modes, &sys, 0.7, 5).unwrap();
        let grid = TrajectoryGrid::new(0.01, 2000).unwrap();
        let tr = integrate_gle(modes.modes(), &ics, &sys, &grid, 0.0).unwrap();
        let q0 = ics.positions(modes.modes());
        let full = full_system_x(modes.modes(), &q0, &ics.momenta, 0.7, &sys, 20.0, 0.001);
        let scale = tr.x.iter().map(|x| x.abs()).fold(0.0, f64::max);
        for k in (0..=2000).step_by(100) {
            let (t, xf) = full[k * 10];
            assert!((t - tr.t[k]).abs() < 1e-9);
            assert!((xf - tr.x[k]).abs() < 1e-3 * scale, "t={t}: {xf} vs {}", tr.x[k]);
        }
    }

    #[test]
    fn coarse_grid_rejected() {
        let modes = small_bath(10);
        let ics = sample_initial_conditions(&modes, &SystemSpec::default(), 0.0, 0).unwrap();
        let grid = TrajectoryGrid::new(0.05, 10).unwrap();
        assert!(integrate_gle(modes.modes(), &ics, &SystemSpec::default(), &grid, 0.0).is_err());
    }

    #[test]
    fn batched_noise_matches_direct_sum_and_is_deterministic() {
        let modes = small_bath(100);
        let sys = SystemSpec::default().with_temperature(0.5).unwrap();
        let grid = TrajectoryGrid::new(0.03, 300).unwrap();
        let mut run = MicrobathRun::new(grid, 7, 99);
        run.noise_probes = vec![0, 150, 300];
        run.batch = 3;
        let rep = run_ensemble(&modes, &sys, &run).unwrap();
        // realization streams reproduce the batched means
        let mut w = Welford::new();
        for r in 0..7 {
            let mut rng = realization_rng(99, r);
            let ics = sample_initial_conditions_with(modes.modes(), &sys, 0.0, &mut rng);
            w.push(noise_at(modes.modes(), &ics, grid.time(150)));
        }
        assert!((rep.noise_mean[1].1.mean - w.mean()).abs() < 1e-12);
        assert_eq!(rep, run_ensemble(&modes, &sys, &run).unwrap());
    }

    #[test]
    fn ensemble_single_realization_matches_integrate_gle() {
        let modes = small_bath(50);
        let sys = SystemSpec::default().with_temperature(0.5).unwrap();
        let grid = TrajectoryGrid::new(0.03, 400).unwrap();
        let mut run = MicrobathRun::new(grid, 1, 4);
        run.window = 1.0 / 400.0;
        let rep = run_ensemble(&modes, &sys, &run).unwrap();
        let mut rng = realization_rng(4, 0);
        let ics = sample_initial_conditions_with(modes.modes(), &sys, 0.0, &mut rng);
        let tr = integrate_gle(modes.modes(), &ics, &sys, &grid, 0.0).unwrap();
        let x_last = tr.x[400];
        let x2 = rep.x2.unwrap().mean;
        let expect = 0.5 * (tr.x[399].powi(2) + x_last * x_last);
        assert!((x2 - expect).abs() < 1e-9 * expect.max(1e-12), "{x2} {expect}");
    }

    #[test]
    fn trajectory_csv_layout() {
        let tr = GleTrajectory { t: vec![0.0, 0.5], x: vec![1.0, 0.5], v: vec![0.0, -1.0], f: vec![0.1, 0.2] };
        let mut buf = Vec::new();
        write_trajectory_csv(&tr, &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s, "t,x,v,f\n0,1,0,0.1\n0.5,0.5,-1,0.2\n");
    }
}
