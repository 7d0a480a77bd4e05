//! Rotating-wave sector: couplings `lambda_j`, the two-noise Langevin pair
//!
//! ```text
//! x' = -gamma x + p/m + f_x
//! p' = -m w0^2 x - gamma p + f_p
//! ```
//!
//! with `<{f_x, f_x'}> = I_x delta`, `<{f_p, f_p'}> = I_p delta`, and the
//! Ehrenfest residual `x' - p/m` that the extra position channel produces.
//! The two noises are taken independent. As in [`crate::markovian`], the
//! simulators use the symmetric intensities `I_x/2`, `I_p/2`.

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;

use crate::bath::SystemSpec;
use crate::error::{require_positive, Error, Result};
use crate::linear::{lyapunov, Propagator};
use crate::markovian::{check_finite, SdeRun};
use crate::stats::{parallel_accumulate, realization_rng, Coordinate, EnsembleResult};

/// `lambda_j = hbar c_j / (2 sqrt(m m_j w0 w_j))`.
pub fn rwa_coupling(hbar: f64, coupling: f64, mass: f64, mode_mass: f64, omega0: f64, omega_j: f64) -> Result<f64> {
    for (n, v) in [("hbar", hbar), ("coupling", coupling), ("mass", mass), ("mode_mass", mode_mass), ("omega0", omega0), ("omega_j", omega_j)] {
        require_positive(n, v)?;
    }
    Ok(hbar * coupling / (2.0 * (mass * mode_mass * omega0 * omega_j).sqrt()))
}

/// Coefficients of `x q_j` and `p p_j` in the rotating-wave interaction,
/// `c_j/2` and `c_j / (2 m w0 m_j w_j)`.
pub fn rwa_hamiltonian_split(coupling: f64, mass: f64, mode_mass: f64, omega0: f64, omega_j: f64) -> Result<(f64, f64)> {
    for (n, v) in [("coupling", coupling), ("mass", mass), ("mode_mass", mode_mass), ("omega0", omega0), ("omega_j", omega_j)] {
        require_positive(n, v)?;
    }
    Ok((0.5 * coupling, 0.5 * coupling / (mass * omega0 * mode_mass * omega_j)))
}

/// Parameters of the rotating-wave Langevin pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RwaParams {
    pub system: SystemSpec,
    pub gamma: f64,
    /// `I_x = 2 gamma hbar / (m w0) coth(hbar w0 / 2kT)`
    pub i_x: f64,
    /// `I_p = 2 m gamma hbar w0 coth(hbar w0 / 2kT)`
    pub i_p: f64,
    /// `gamma <= 0.1 w0`, where the approximation is meant to hold.
    pub weak: bool,
}

impl RwaParams {
    pub fn new(system: SystemSpec, gamma: f64) -> Result<Self> {
        let system = system.validated()?;
        require_positive("gamma", gamma)?;
        if system.omega0 <= 0.0 {
            return Err(Error::domain("rotating-wave dynamics needs omega0 > 0"));
        }
        let (m, w0) = (system.mass, system.omega0);
        // hbar w0 coth = 2 eps(w0)
        let e2 = 2.0 * system.mode_energy(w0);
        Ok(Self {
            system,
            gamma,
            i_x: 2.0 * gamma * e2 / (m * w0 * w0),
            i_p: 2.0 * m * gamma * e2,
            weak: gamma <= 0.1 * w0,
        })
    }

    pub fn with_noise(self, i_x: f64, i_p: f64) -> Result<Self> {
        if !(i_x >= 0.0 && i_p >= 0.0) {
            return Err(Error::domain("noise intensities must be >= 0"));
        }
        Ok(Self { i_x, i_p, ..self })
    }

    pub fn drift(&self) -> Matrix2<f64> {
        let (m, w0, g) = (self.system.mass, self.system.omega0, self.gamma);
        Matrix2::new(-g, 1.0 / m, -m * w0 * w0, -g)
    }

    pub(crate) fn diffusion(&self) -> Matrix2<f64> {
        Matrix2::new(0.5 * self.i_x, 0.0, 0.0, 0.5 * self.i_p)
    }

    /// Eigenvalues of the drift, `-gamma +- i w0`.
    pub fn drift_eigenvalues(&self) -> (Complex64, Complex64) {
        let a = self.drift();
        let half_tr = 0.5 * a.trace();
        let disc = half_tr * half_tr - a.determinant();
        let s = Complex64::new(disc, 0.0).sqrt();
        (half_tr + s, half_tr - s)
    }
}

/// Stationary `(<x^2>, <p^2>)` from the Lyapunov equation of the pair.
pub fn rwa_stationary_analytic(params: &RwaParams) -> Result<(f64, f64)> {
    let s = rwa_stationary_covariance(params)?;
    Ok((s[(0, 0)], s[(1, 1)]))
}

pub fn rwa_stationary_covariance(params: &RwaParams) -> Result<Matrix2<f64>> {
    lyapunov(&params.drift(), &params.diffusion())
}

/// Relative deviation of `(m w0^2 <x^2>, <p^2>/m)` from `(hbar w0/2) coth`.
pub fn rwa_energy_deviation(params: &RwaParams) -> Result<(f64, f64)> {
    let (x2, p2) = rwa_stationary_analytic(params)?;
    let (m, w0) = (params.system.mass, params.system.omega0);
    let e = params.system.weak_coupling_energy();
    Ok(((m * w0 * w0 * x2 / e - 1.0).abs(), (p2 / m / e - 1.0).abs()))
}

/// Ensemble of the rotating-wave pair started at rest.
///
/// The Ehrenfest residual is `((x_{n+1} - x_n)/dt - p_n/m)^2` over the last
/// step before each sample; for white `f_x` it grows like `(I_x/2)/dt`.
pub fn simulate_rwa(params: &RwaParams, run: &SdeRun) -> Result<EnsembleResult> {
    run.validate(params.gamma, params.system.omega0)?;
    let stepper = Propagator::new(&params.drift(), &params.diffusion(), run.dt, run.scheme)?;
    let m = params.system.mass;
    let work = |i: u64| -> Result<[f64; 4]> {
        let mut rng = realization_rng(run.seed, i);
        let mut z = Vector2::zeros();
        for _ in 0..run.burn_in_steps {
            stepper.step(&mut z, &mut rng);
        }
        check_finite(&z, run.burn_in_steps as f64 * run.dt)?;
        let (mut sxx, mut spp, mut sxp, mut res) = (0.0, 0.0, 0.0, 0.0);
        for _ in 0..run.n_samples {
            for _ in 0..run.sample_every - 1 {
                stepper.step(&mut z, &mut rng);
            }
            let before = z;
            stepper.step(&mut z, &mut rng);
            let r = (z[0] - before[0]) / run.dt - before[1] / m;
            res += r * r;
            sxx += z[0] * z[0];
            spp += z[1] * z[1];
            sxp += z[0] * z[1];
        }
        check_finite(&z, (run.burn_in_steps + run.n_samples * run.sample_every) as f64 * run.dt)?;
        let k = 1.0 / run.n_samples as f64;
        Ok([sxx * k, spp * k, sxp * k, res * k])
    };
    let [x2, p2, xp, res] = parallel_accumulate(run.n_traj, work)?;
    Ok(EnsembleResult {
        x2: x2.estimate(),
        y2: p2.estimate(),
        xy: xp.estimate(),
        coordinate: Coordinate::Momentum,
        ehrenfest_residual: Some(res.estimate()),
        seed: run.seed,
        n_traj: run.n_traj,
        samples_per_traj: run.n_samples,
    })
}

/// Noise-free evolution from `(x0, p0)` over time `t`.
pub fn rwa_deterministic(params: &RwaParams, x0: f64, p0: f64, t: f64) -> Result<(f64, f64)> {
    let phi = (params.drift() * t).exp();
    let z = phi * Vector2::new(x0, p0);
    Ok((z[0], z[1]))
}
