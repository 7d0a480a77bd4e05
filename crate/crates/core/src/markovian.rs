//! Weak-coupling Markovian Langevin equation
//! `x'' + gamma x' + w0^2 x = f(t)/m`, `<{f(t), f(t')}> = Gamma delta(t - t')`,
//! with `Gamma = 2 m gamma hbar w0 coth(hbar w0 / 2kT)`.
//!
//! # Noise convention
//!
//! Every classical simulator here drives the dynamics with the *symmetrized*
//! correlation `S(t - t') = <{f, f'}>/2 = (Gamma/2) delta(t - t')`. Using it in
//! `<x^2> = (1/m^2) int int G(t - t1) G(t - t2) S(t1 - t2) dt1 dt2` gives
//!
//! ```text
//! <x^2>  = hbar / (2 m w0) coth(hbar w0 / 2kT)
//! <x'^2> = hbar w0 / (2 m) coth(hbar w0 / 2kT)
//! ```
//!
//! which are the weak-coupling fluctuation–dissipation values. Inserting the
//! full anticommutator `Gamma delta` instead doubles both moments. The
//! [`brute_force_variances`] audit evaluates the double integral on a grid with
//! a nascent delta of width `sigma` and lands on the values above.

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;

use crate::bath::SystemSpec;
use crate::error::{require_positive, Error, Result};
pub use crate::linear::Scheme;
use crate::linear::{lyapunov, Propagator};
use crate::stats::{parallel_accumulate, realization_rng, Coordinate, EnsembleResult};

/// Noise intensity `Gamma` of `<{f(t), f(t')}> = Gamma delta(t - t')`.
///
/// At `w0 = 0` this is the free-particle value `4 m gamma kT`.
pub fn noise_intensity(system: &SystemSpec, gamma: f64) -> f64 {
    2.0 * system.mass * gamma * 2.0 * system.mode_energy(system.omega0)
}

/// Parameters of the Markovian equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkovParams {
    pub system: SystemSpec,
    pub gamma: f64,
    pub noise: f64,
}

impl MarkovParams {
    pub fn new(system: SystemSpec, gamma: f64) -> Result<Self> {
        let system = system.validated()?;
        require_positive("gamma", gamma)?;
        Ok(Self {
            system,
            gamma,
            noise: noise_intensity(&system, gamma),
        })
    }

    /// Overrides the noise intensity (e.g. zero for deterministic decay).
    pub fn with_noise_intensity(self, noise: f64) -> Result<Self> {
        if !(noise >= 0.0) || !noise.is_finite() {
            return Err(Error::domain("noise intensity must be >= 0"));
        }
        Ok(Self { noise, ..self })
    }

    pub fn underdamped(&self) -> bool {
        self.gamma < 2.0 * self.system.omega0
    }

    pub fn roots(&self) -> CharRoots {
        char_roots(self.gamma, self.system.omega0)
    }

    pub(crate) fn drift(&self) -> Matrix2<f64> {
        let w0 = self.system.omega0;
        Matrix2::new(0.0, 1.0, -w0 * w0, -self.gamma)
    }

    /// Diffusion of `(x, v)` under the symmetric convention.
    pub(crate) fn diffusion(&self) -> Matrix2<f64> {
        let m = self.system.mass;
        Matrix2::new(0.0, 0.0, 0.0, 0.5 * self.noise / (m * m))
    }
}

/// Roots `w+-` of `s^2 + gamma s + w0^2 = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharRoots {
    pub plus: Complex64,
    pub minus: Complex64,
}

pub fn char_roots(gamma: f64, omega0: f64) -> CharRoots {
    let disc = gamma * gamma - 4.0 * omega0 * omega0;
    let half = -gamma / 2.0;
    if disc >= 0.0 {
        // avoid cancellation in the small root
        let q = -0.5 * (gamma + disc.sqrt());
        let big = q;
        let small = if q != 0.0 { omega0 * omega0 / q } else { 0.0 };
        CharRoots {
            plus: Complex64::new(small, 0.0),
            minus: Complex64::new(big, 0.0),
        }
    } else {
        let wd = 0.5 * (-disc).sqrt();
        CharRoots {
            plus: Complex64::new(half, wd),
            minus: Complex64::new(half, -wd),
        }
    }
}

/// Green's function `G(t) = (e^{w+ t} - e^{w- t}) / (w+ - w-)`, zero for `t < 0`.
pub fn greens_solution_kernel(roots: &CharRoots, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let (p, m) = (roots.plus, roots.minus);
    let split = (p - m).norm();
    let scale = p.norm().max(m.norm()).max(f64::MIN_POSITIVE);
    if split <= 1e-7 * scale {
        let a = 0.5 * (p.re + m.re);
        return t * (a * t).exp();
    }
    if p.im != 0.0 {
        let wd = p.im;
        return (p.re * t).exp() * (wd * t).sin() / wd;
    }
    ((p.re * t).exp() - (m.re * t).exp()) / (p.re - m.re)
}

/// `dG/dt`.
pub fn greens_kernel_derivative(roots: &CharRoots, t: f64) -> f64 {
    if t <= 0.0 {
        return if t == 0.0 { 1.0 } else { 0.0 };
    }
    let (p, m) = (roots.plus, roots.minus);
    let split = (p - m).norm();
    let scale = p.norm().max(m.norm()).max(f64::MIN_POSITIVE);
    if split <= 1e-7 * scale {
        let a = 0.5 * (p.re + m.re);
        return (1.0 + a * t) * (a * t).exp();
    }
    if p.im != 0.0 {
        let wd = p.im;
        return (p.re * t).exp() * ((wd * t).cos() + p.re / wd * (wd * t).sin());
    }
    (p.re * (p.re * t).exp() - m.re * (m.re * t).exp()) / (p.re - m.re)
}

/// Stationary `(<x^2>, <x'^2>)` from the closed-form Green's integrals
/// `int G^2 = 1/(2 gamma w0^2)`, `int G'^2 = 1/(2 gamma)`.
pub fn stationary_moments_analytic(params: &MarkovParams) -> Result<(f64, f64)> {
    if params.gamma == 0.0 {
        return Err(Error::NoStationaryState("gamma = 0 has no stationary state"));
    }
    let w0 = params.system.omega0;
    if w0 == 0.0 {
        return Err(Error::NoStationaryState("a free particle has no stationary position variance"));
    }
    let m = params.system.mass;
    let s = 0.5 * params.noise / (m * m);
    Ok((s / (2.0 * params.gamma * w0 * w0), s / (2.0 * params.gamma)))
}

/// Stationary `<x'^2>` for the free particle, `kT/m` in the classical chain.
pub fn free_particle_velocity_variance(params: &MarkovParams) -> f64 {
    let m = params.system.mass;
    0.5 * params.noise / (m * m) / (2.0 * params.gamma)
}

/// Stationary covariance of `(x, v)` from the Lyapunov equation.
pub fn stationary_covariance(params: &MarkovParams) -> Result<Matrix2<f64>> {
    lyapunov(&params.drift(), &params.diffusion())
}

/// Brute-force `(<x^2>, <x'^2>)` at time `t_end` from the Green's double
/// integral with `S(s) = (Gamma/2) delta_sigma(s)`, `delta_sigma` a unit
/// Gaussian of width `sigma` renormalized to unit mass on `[0, t_end]`. The grid step is `sigma / points_per_sigma`.
pub fn brute_force_variances(params: &MarkovParams, t_end: f64, sigma: f64, points_per_sigma: usize) -> Result<(f64, f64)> {
    require_positive("t_end", t_end)?;
    require_positive("sigma", sigma)?;
    if points_per_sigma < 2 {
        return Err(Error::domain("need at least two points per sigma"));
    }
    let roots = params.roots();
    let h = sigma / points_per_sigma as f64;
    let n = (t_end / h).round() as usize;
    let h = t_end / n as f64;
    let band = (6.0 * sigma / h).ceil() as usize;
    let norm = 1.0 / (sigma * (2.0 * std::f64::consts::PI).sqrt());
    let delta: Vec<f64> = (0..=band)
        .map(|k| {
            let s = k as f64 * h / sigma;
            norm * (-0.5 * s * s).exp()
        })
        .collect();
    // trapezoid weights on [0, t_end]
    let w = |i: usize| if i == 0 || i == n { 0.5 * h } else { h };
    let g: Vec<f64> = (0..=n).map(|i| greens_solution_kernel(&roots, t_end - i as f64 * h)).collect();
    let gd: Vec<f64> = (0..=n).map(|i| greens_kernel_derivative(&roots, t_end - i as f64 * h)).collect();
    let (mut sx, mut sv) = (0.0, 0.0);
    for i in 0..=n {
        let wi = w(i);
        let lo = i.saturating_sub(band);
        let hi = (i + band).min(n);
        let (mut ax, mut av, mut mass) = (0.0, 0.0, 0.0);
        for j in lo..=hi {
            let k = w(j) * delta[i.abs_diff(j)];
            ax += g[j] * k;
            av += gd[j] * k;
            mass += k;
        }
        // unit mass inside [0, t_end] so G' (which jumps at the endpoint) keeps its full weight
        sx += wi * g[i] * ax / mass;
        sv += wi * gd[i] * av / mass;
    }
    let m = params.system.mass;
    let s = 0.5 * params.noise / (m * m);
    Ok((s * sx, s * sv))
}

/// Ensemble run settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdeRun {
    pub dt: f64,
    /// Post-burn-in samples per trajectory.
    pub n_samples: usize,
    /// Steps between samples.
    pub sample_every: usize,
    /// Steps discarded before sampling.
    pub burn_in_steps: usize,
    pub n_traj: usize,
    pub seed: u64,
    pub scheme: Scheme,
}

impl SdeRun {
    /// Exact stepping at the sampling interval `1/gamma` with `10/gamma` burn-in.
    pub fn standard(gamma: f64, n_samples: usize, n_traj: usize, seed: u64) -> Result<Self> {
        require_positive("gamma", gamma)?;
        Ok(Self {
            dt: 1.0 / gamma,
            n_samples,
            sample_every: 1,
            burn_in_steps: 10,
            n_traj,
            seed,
            scheme: Scheme::Exact,
        })
    }

    /// Euler–Maruyama with step `dt`, sampling every `1/gamma` after `10/gamma`.
    pub fn euler(gamma: f64, dt: f64, n_samples: usize, n_traj: usize, seed: u64) -> Result<Self> {
        require_positive("gamma", gamma)?;
        require_positive("dt", dt)?;
        let every = ((1.0 / gamma) / dt).round().max(1.0) as usize;
        Ok(Self {
            dt,
            n_samples,
            sample_every: every,
            burn_in_steps: 10 * every,
            n_traj,
            seed,
            scheme: Scheme::EulerMaruyama,
        })
    }

    pub(crate) fn validate(&self, gamma: f64, omega0: f64) -> Result<()> {
        require_positive("dt", self.dt)?;
        if self.n_traj == 0 || self.n_samples == 0 || self.sample_every == 0 {
            return Err(Error::domain("n_traj, n_samples and sample_every must be positive"));
        }
        let burn = self.burn_in_steps as f64 * self.dt;
        if burn < 10.0 / gamma * (1.0 - 1e-12) {
            return Err(Error::domain(format!("burn-in {burn} shorter than 10/gamma")));
        }
        if self.scheme == Scheme::EulerMaruyama && self.dt * omega0 > 0.01 {
            return Err(Error::domain("Euler-Maruyama needs dt * omega0 <= 0.01"));
        }
        Ok(())
    }
}

pub(crate) fn check_finite(z: &Vector2<f64>, time: f64) -> Result<()> {
    if z.iter().all(|v| v.is_finite() && v.abs() < 1e150) {
        Ok(())
    } else {
        Err(Error::Instability {
            time,
            hint: "trajectory diverged; reduce dt",
        })
    }
}

/// Ensemble of trajectories started at rest; returns stationary moments with
/// standard errors over per-trajectory time averages.
pub fn simulate_sde(params: &MarkovParams, run: &SdeRun) -> Result<EnsembleResult> {
    run.validate(params.gamma, params.system.omega0)?;
    let stepper = Propagator::new(&params.drift(), &params.diffusion(), run.dt, run.scheme)?;
    let work = |i: u64| -> Result<[f64; 3]> {
        let mut rng = realization_rng(run.seed, i);
        let mut z = Vector2::zeros();
        for _ in 0..run.burn_in_steps {
            stepper.step(&mut z, &mut rng);
        }
        check_finite(&z, run.burn_in_steps as f64 * run.dt)?;
        let (mut sxx, mut svv, mut sxv) = (0.0, 0.0, 0.0);
        for _ in 0..run.n_samples {
            for _ in 0..run.sample_every {
                stepper.step(&mut z, &mut rng);
            }
            sxx += z[0] * z[0];
            svv += z[1] * z[1];
            sxv += z[0] * z[1];
        }
        check_finite(&z, (run.burn_in_steps + run.n_samples * run.sample_every) as f64 * run.dt)?;
        let k = 1.0 / run.n_samples as f64;
        Ok([sxx * k, svv * k, sxv * k])
    };
    let [x2, v2, xv] = parallel_accumulate(run.n_traj, work)?;
    Ok(EnsembleResult {
        x2: x2.estimate(),
        y2: v2.estimate(),
        xy: xv.estimate(),
        coordinate: Coordinate::Velocity,
        ehrenfest_residual: None,
        seed: run.seed,
        n_traj: run.n_traj,
        samples_per_traj: run.n_samples,
    })
}

/// A single recorded trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct SdePath {
    pub dt: f64,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    /// Velocity kicks `dW_k / m` applied on step `k` (Euler–Maruyama only).
    pub kicks: Vec<f64>,
}

/// One Euler–Maruyama trajectory from rest, recording the noise it used.
pub fn simulate_path(params: &MarkovParams, dt: f64, n_steps: usize, seed: u64, index: u64) -> Result<SdePath> {
    require_positive("dt", dt)?;
    if dt * params.system.omega0 > 0.01 {
        return Err(Error::domain("Euler-Maruyama needs dt * omega0 <= 0.01"));
    }
    let stepper = Propagator::new(&params.drift(), &params.diffusion(), dt, Scheme::EulerMaruyama)?;
    let mut rng = realization_rng(seed, index);
    let mut z = Vector2::zeros();
    let mut path = SdePath {
        dt,
        x: Vec::with_capacity(n_steps + 1),
        v: Vec::with_capacity(n_steps + 1),
        kicks: Vec::with_capacity(n_steps),
    };
    path.x.push(0.0);
    path.v.push(0.0);
    for k in 0..n_steps {
        path.kicks.push(stepper.step(&mut z, &mut rng)[1]);
        path.x.push(z[0]);
        path.v.push(z[1]);
        if k % 1024 == 0 {
            check_finite(&z, k as f64 * dt)?;
        }
    }
    Ok(path)
}

/// `x(t_n) = sum_k G(t_n - t_k) dW_k / m` over the recorded kicks.
pub fn convolve_kicks(roots: &CharRoots, kicks: &[f64], dt: f64, n: usize) -> f64 {
    kicks[..n.min(kicks.len())]
        .iter()
        .enumerate()
        .map(|(k, dw)| greens_solution_kernel(roots, (n - k) as f64 * dt) * dw)
        .sum()
}
