//! Fourier-domain friction and the generalized susceptibility
//! `alpha(w) = 1 / (m (w0^2 - w^2) - i w mu~(w))`.
//!
//! `mu~(w) = int_0^inf mu(t) e^{i w t} dt`. For the strict Ohmic bath this is
//! the constant `m gamma` (half of the `2 m gamma` delta mass lies on
//! `t >= 0`). For the cutoff bath the half-range transform of the sinc kernel
//! is computed by oscillatory quadrature over `[0, T]` plus the asymptotic
//! tail of the sine and cosine integrals beyond `T`.

use num_complex::Complex64;

use crate::bath::{BathKind, BathSpec, SystemSpec};
use crate::error::{Error, Result};
use crate::quadrature::{integrate, Tolerance};

/// Default `W * T_max` for the cutoff transform.
pub const DEFAULT_CUTOFF_PERIODS: f64 = 1e3;

/// Asymptotic auxiliary functions of the sine/cosine integrals,
/// `pi/2 - Si(z) = f cos z + g sin z` and `-Ci(z) = g cos z - f sin z`.
fn si_ci_aux(z: f64) -> (f64, f64) {
    let z2 = z * z;
    let f = (1.0 - 2.0 / z2 + 24.0 / (z2 * z2) - 720.0 / (z2 * z2 * z2)) / z;
    let g = (1.0 - 6.0 / z2 + 120.0 / (z2 * z2) - 5040.0 / (z2 * z2 * z2)) / z2;
    (f, g)
}

/// `int_T^inf sin(a t)/t dt` for `|a| T` large.
fn sine_tail(a: f64, t: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    let z = a.abs() * t;
    let (f, g) = si_ci_aux(z);
    a.signum() * (f * z.cos() + g * z.sin())
}

/// `int_T^inf cos(a t)/t dt` for `|a| T` large.
fn cosine_tail(a: f64, t: f64) -> f64 {
    let z = a.abs() * t;
    let (f, g) = si_ci_aux(z);
    g * z.cos() - f * z.sin()
}

/// Half-range Fourier transform of the sinc kernel by quadrature, with
/// `cutoff * t_max = periods`.
fn sinc_transform(amplitude: f64, cutoff: f64, omega: f64, periods: f64) -> Result<Complex64> {
    let sum = cutoff + omega.abs();
    let diff = (cutoff - omega.abs()).abs();
    if diff == 0.0 {
        return Err(Error::domain("transform of the sinc kernel is log-singular at |omega| = cutoff"));
    }
    let base = periods / cutoff;
    // keep both beat frequencies at least 20 radians into their tails
    let t_max = base.max(20.0 / diff).min(100.0 * base);
    let panel = std::f64::consts::PI / sum;
    let n = ((t_max / panel).ceil() as usize).max(1);
    let t_max = n as f64 * panel;
    let pts: Vec<f64> = (0..=n).map(|k| k as f64 * panel).collect();
    let tol = Tolerance {
        rel: 1e-10,
        abs: 1e-12,
        max_panels: 50 * n + 1000,
    };
    let sinc = |t: f64| {
        let x = cutoff * t;
        if x.abs() < 1e-8 {
            cutoff
        } else {
            x.sin() / t
        }
    };
    let re = integrate(|t| sinc(t) * (omega * t).cos(), &pts, &tol)?.value;
    let im = integrate(|t| sinc(t) * (omega * t).sin(), &pts, &tol)?.value;

    let (a_sum, a_diff) = (cutoff + omega, cutoff - omega);
    let mut re_tail = 0.0;
    let mut im_tail = 0.0;
    for a in [a_sum, a_diff] {
        if a.abs() * t_max >= 5.0 {
            re_tail += 0.5 * sine_tail(a, t_max);
        }
    }
    if a_diff.abs() * t_max >= 5.0 {
        im_tail += 0.5 * cosine_tail(a_diff, t_max);
    }
    if a_sum.abs() * t_max >= 5.0 {
        im_tail -= 0.5 * cosine_tail(a_sum, t_max);
    }
    Ok(Complex64::new(amplitude * (re + re_tail), amplitude * (im + im_tail)))
}

/// Fourier-domain friction `mu~(w)` with the default truncation.
pub fn mu_fourier(bath: &BathSpec, system: &SystemSpec, omega: f64) -> Result<Complex64> {
    mu_fourier_truncated(bath, system, omega, DEFAULT_CUTOFF_PERIODS)
}

/// As [`mu_fourier`], with the cutoff transform truncated at `t_max = periods / W`.
pub fn mu_fourier_truncated(bath: &BathSpec, system: &SystemSpec, omega: f64, periods: f64) -> Result<Complex64> {
    if !omega.is_finite() {
        return Err(Error::domain("omega must be finite"));
    }
    match bath.kind() {
        BathKind::StrictOhmic => Ok(Complex64::new(system.mass * bath.gamma(), 0.0)),
        BathKind::CutoffOhmic => {
            let amp = bath.sinc_amplitude().expect("cutoff bath");
            sinc_transform(amp, bath.cutoff().expect("cutoff bath"), omega, periods)
        }
        BathKind::Discrete => Err(Error::Unsupported(
            "friction transform of a discrete bath is a delta comb; not pointwise",
        )),
    }
}

/// Cached `mu~` on a frequency grid covering `[0, W)`, linearly interpolated.
#[derive(Debug, Clone)]
struct MuTable {
    cutoff: f64,
    nodes: Vec<f64>,
    values: Vec<Complex64>,
}

impl MuTable {
    fn build(bath: &BathSpec, system: &SystemSpec) -> Result<Self> {
        let cutoff = bath.cutoff().expect("cutoff bath");
        let gamma = bath.gamma();
        let coarse = cutoff / 256.0;
        let mut nodes: Vec<f64> = (0..256).map(|k| k as f64 * coarse).collect();
        // resolution <= gamma/10 around the resonance
        let step = gamma / 10.0;
        let lo = (system.omega0 - 20.0 * gamma).max(0.0);
        let hi = (system.omega0 + 20.0 * gamma).min(cutoff);
        if hi > lo {
            let n = ((hi - lo) / step).ceil().min(20_000.0) as usize;
            let h = (hi - lo) / n.max(1) as f64;
            nodes.extend((0..=n).map(|k| lo + k as f64 * h));
        }
        // geometric approach to the log singularity at the cutoff
        nodes.extend((1..=24).map(|k| cutoff - coarse * 0.5f64.powi(k)));
        nodes.retain(|&w| w >= 0.0 && w < cutoff);
        nodes.sort_by(f64::total_cmp);
        nodes.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * cutoff);
        let values = nodes
            .iter()
            .map(|&w| mu_fourier(bath, system, w))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { cutoff, nodes, values })
    }

    fn lookup(&self, omega: f64) -> Option<Complex64> {
        let w = omega.abs();
        if w >= self.cutoff {
            return None;
        }
        let idx = self.nodes.partition_point(|&x| x <= w);
        let v = if idx == 0 {
            self.values[0]
        } else if idx >= self.nodes.len() {
            *self.values.last().expect("non-empty table")
        } else {
            let (x0, x1) = (self.nodes[idx - 1], self.nodes[idx]);
            let s = (w - x0) / (x1 - x0);
            self.values[idx - 1] * (1.0 - s) + self.values[idx] * s
        };
        Some(if omega < 0.0 { v.conj() } else { v })
    }
}

/// Generalized susceptibility of the oscillator coupled to a continuum bath.
#[derive(Debug, Clone)]
pub struct Susceptibility {
    system: SystemSpec,
    bath: BathSpec,
    table: Option<MuTable>,
}

impl Susceptibility {
    pub fn new(system: SystemSpec, bath: BathSpec) -> Result<Self> {
        let table = match bath.kind() {
            BathKind::StrictOhmic => None,
            BathKind::CutoffOhmic => Some(MuTable::build(&bath, &system)?),
            BathKind::Discrete => {
                return Err(Error::Unsupported("susceptibility needs a continuum bath"));
            }
        };
        Ok(Self { system, bath, table })
    }

    pub fn system(&self) -> &SystemSpec {
        &self.system
    }

    pub fn bath(&self) -> &BathSpec {
        &self.bath
    }

    /// Upper end of the frequency support of `Im alpha`, if finite.
    pub fn support_end(&self) -> Option<f64> {
        self.bath.cutoff()
    }

    pub fn mu(&self, omega: f64) -> Result<Complex64> {
        match &self.table {
            None => mu_fourier(&self.bath, &self.system, omega),
            Some(t) => match t.lookup(omega) {
                Some(v) => Ok(v),
                None => mu_fourier(&self.bath, &self.system, omega),
            },
        }
    }

    /// `m (w0^2 - w^2) - i w mu~(w)`.
    pub fn denominator(&self, omega: f64) -> Result<Complex64> {
        let m = self.system.mass;
        let w0 = self.system.omega0;
        let mu = self.mu(omega)?;
        let restoring = m * (w0 - omega) * (w0 + omega);
        Ok(Complex64::new(restoring, 0.0) - Complex64::new(0.0, omega) * mu)
    }

    pub fn eval(&self, omega: f64) -> Result<Complex64> {
        let d = self.denominator(omega)?;
        if d.norm_sqr() == 0.0 {
            return Err(Error::UndampedResonance { omega });
        }
        Ok(d.inv())
    }

    /// `Im alpha(w) / w = Re mu~(w) / |D(w)|^2`, finite at `w = 0`.
    pub fn im_over_omega(&self, omega: f64) -> Result<f64> {
        if self.bath.kind() == BathKind::StrictOhmic {
            let m = self.system.mass;
            let g = self.bath.gamma();
            let w0 = self.system.omega0;
            let a = (w0 - omega) * (w0 + omega);
            let den = a * a + omega * omega * g * g;
            if den == 0.0 {
                return Err(Error::UndampedResonance { omega });
            }
            return Ok(g / (m * den));
        }
        if let Some(w) = self.support_end() {
            if omega.abs() >= w {
                return Ok(0.0);
            }
        }
        let d = self.denominator(omega)?;
        let n = d.norm_sqr();
        if n == 0.0 {
            return Err(Error::UndampedResonance { omega });
        }
        Ok(self.mu(omega)?.re / n)
    }

    /// `Im alpha(w)`, non-negative for `w >= 0`.
    pub fn im(&self, omega: f64) -> Result<f64> {
        Ok(omega * self.im_over_omega(omega)?)
    }
}

/// One-shot `alpha(w)`; build a [`Susceptibility`] when evaluating many frequencies.
pub fn susceptibility(system: &SystemSpec, bath: &BathSpec, omega: f64) -> Result<Complex64> {
    Susceptibility::new(*system, bath.clone())?.eval(omega)
}
