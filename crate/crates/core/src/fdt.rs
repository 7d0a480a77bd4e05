//! Callen–Welton fluctuation–dissipation quadrature.
//!
//! Symmetrized equilibrium correlations of the damped oscillator,
//!
//! ```text
//! C_x(tau)  = (hbar/pi) int_0^inf      Im alpha(w) coth(hbar w / 2kT) cos(w tau) dw
//! C_xd(tau) = (hbar/pi) int_0^inf w^2  Im alpha(w) coth(hbar w / 2kT) cos(w tau) dw
//! ```
//!
//! are evaluated as `(1/pi) int (Im alpha / w) * 2 eps(w) * cos(w tau)` with
//! `eps(w) = (hbar w / 2) coth(hbar w / 2kT)`, which is regular at `w = 0`.
//! The resonance is bracketed by breakpoints at `w0 (1 +- k Gamma 4^i)` so a
//! peak of relative width 1e-4 is never missed.
//!
//! For strict Ohmic damping the velocity integrand decays only as `1/w`, so
//! `C_xd(0)` diverges logarithmically; velocity correlations therefore need an
//! explicit `omega_max` and report the cutoff they used.

use std::f64::consts::PI;

use crate::bath::{BathKind, BathSpec, SystemSpec};
use crate::error::{require_positive, Error, Result};
use crate::quadrature::{integrate, integrate_oscillatory_tail, integrate_to_infinity, Integral, Tolerance};
use crate::response::Susceptibility;

/// Quadrature settings for the correlation integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Half-width of the resonance window in units of `gamma`.
    pub peak_halfwidths: f64,
    /// Upper frequency cutoff; `None` integrates to infinity where that converges.
    pub omega_max: Option<f64>,
    pub max_panels: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-12,
            peak_halfwidths: 20.0,
            omega_max: None,
            max_panels: 200_000,
        }
    }
}

impl QuadratureConfig {
    pub fn with_omega_max(self, omega_max: f64) -> Result<Self> {
        require_positive("omega_max", omega_max)?;
        Ok(Self {
            omega_max: Some(omega_max),
            ..self
        })
    }

    pub fn with_rel_tol(self, rel_tol: f64) -> Result<Self> {
        require_positive("rel_tol", rel_tol)?;
        Ok(Self { rel_tol, ..self })
    }

    pub fn validate(&self, system: &SystemSpec) -> Result<()> {
        require_positive("rel_tol", self.rel_tol)?;
        if !(self.abs_tol >= 0.0) {
            return Err(Error::domain("abs_tol must be >= 0"));
        }
        if !(self.peak_halfwidths >= 1.0) {
            return Err(Error::domain("peak window must be at least one half-width"));
        }
        if let Some(w) = self.omega_max {
            require_positive("omega_max", w)?;
            if w <= system.omega0 {
                return Err(Error::domain("omega_max must exceed omega0"));
            }
        }
        if self.max_panels < 16 {
            return Err(Error::domain("max_panels must be at least 16"));
        }
        Ok(())
    }

    pub fn tolerance(&self) -> Tolerance {
        Tolerance {
            rel: self.rel_tol,
            abs: self.abs_tol,
            max_panels: self.max_panels,
        }
    }
}

/// Mean kinetic `m C_xd(0)` and potential `m w0^2 C_x(0)` energies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergySplit {
    pub kinetic: f64,
    pub potential: f64,
    pub kinetic_error: f64,
    pub potential_error: f64,
    /// Frequency cutoff used for the kinetic integral.
    pub omega_max: Option<f64>,
}

/// A correlation value with its quadrature error bound and the cutoff it used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correlation {
    pub value: f64,
    pub error: f64,
    pub omega_max: Option<f64>,
    pub panels: usize,
}

/// Which of the two frequency distributions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Density {
    Kinetic,
    Potential,
}

fn check_density_args(lambda: f64, gamma: f64) -> Result<()> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::domain(format!("Lambda must be >= 0, got {lambda}")));
    }
    require_positive("Gamma", gamma).map(|_| ())
}

/// Dimensionless kinetic distribution `(2/pi) L^2 G / ((1 - L^2)^2 + (L G)^2)`.
pub fn pk_density(lambda: f64, gamma: f64) -> Result<f64> {
    check_density_args(lambda, gamma)?;
    Ok(lambda * lambda * pp_core(lambda, gamma))
}

/// Dimensionless potential distribution `(2/pi) G / ((1 - L^2)^2 + (L G)^2)`.
pub fn pp_density(lambda: f64, gamma: f64) -> Result<f64> {
    check_density_args(lambda, gamma)?;
    Ok(pp_core(lambda, gamma))
}

fn pp_core(lambda: f64, gamma: f64) -> f64 {
    let a = (1.0 - lambda) * (1.0 + lambda);
    2.0 / PI * gamma / (a * a + lambda * lambda * gamma * gamma)
}

impl Density {
    pub fn eval(self, lambda: f64, gamma: f64) -> Result<f64> {
        match self {
            Density::Kinetic => pk_density(lambda, gamma),
            Density::Potential => pp_density(lambda, gamma),
        }
    }
}

/// Breakpoints bracketing a resonance at `center` with half-width `width`:
/// `center (1 +- k g 4^i)` clipped to `(lo, hi)`.
fn peak_breakpoints(center: f64, rel_width: f64, k: f64, lo: f64, hi: f64) -> Vec<f64> {
    let mut pts = vec![lo, center];
    let mut d = k * rel_width;
    for _ in 0..40 {
        let below = center * (1.0 - d);
        let above = center * (1.0 + d);
        if below > lo {
            pts.push(below);
        }
        if above < hi {
            pts.push(above);
        }
        if below <= lo && (above >= hi || d > 64.0) {
            break;
        }
        d *= 4.0;
    }
    if hi.is_finite() {
        pts.push(hi);
    }
    pts.retain(|&p| p >= lo && p <= hi);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// `int_0^{upper} L^n P(L) dL` with `upper = None` meaning infinity.
///
/// The kinetic density decays as `1/L^2`, so its first and second moments
/// only exist over a finite window.
pub fn density_integral(
    density: Density,
    moment: u32,
    gamma: f64,
    upper: Option<f64>,
    cfg: &QuadratureConfig,
) -> Result<Integral> {
    require_positive("Gamma", gamma)?;
    let decay = match density {
        Density::Kinetic => 2,
        Density::Potential => 4,
    };
    if upper.is_none() && moment + 1 >= decay {
        return Err(Error::domain("moment diverges on [0, inf); give a finite upper limit"));
    }
    let tol = cfg.tolerance();
    let f = |l: f64| l.powi(moment as i32) * density.eval(l, gamma).unwrap_or(0.0);
    match upper {
        Some(u) => {
            require_positive("upper limit", u)?;
            let pts = peak_breakpoints(1.0, gamma, cfg.peak_halfwidths, 0.0, u);
            integrate(f, &pts, &tol)
        }
        None => {
            let split = (1.0 + cfg.peak_halfwidths * gamma).max(2.0);
            let pts = peak_breakpoints(1.0, gamma, cfg.peak_halfwidths, 0.0, split);
            let head = integrate(f, &pts, &tol)?;
            let tail = integrate_to_infinity(f, split, &[], &tol)?;
            Ok(Integral {
                value: head.value + tail.value,
                error: head.error + tail.error,
                panels: head.panels + tail.panels,
            })
        }
    }
}

/// `P_k(w) = (2 m w / pi) Im alpha(w)`.
pub fn pk_dimensional(omega: f64, chi: &Susceptibility) -> Result<f64> {
    if !(omega >= 0.0) {
        return Err(Error::domain("omega must be >= 0"));
    }
    let m = chi.system().mass;
    Ok(2.0 * m * omega * omega / PI * chi.im_over_omega(omega)?)
}

/// `P_p(w) = (2 m w0^2 / (w pi)) Im alpha(w)`.
pub fn pp_dimensional(omega: f64, chi: &Susceptibility) -> Result<f64> {
    if !(omega >= 0.0) {
        return Err(Error::domain("omega must be >= 0"));
    }
    let s = chi.system();
    Ok(2.0 * s.mass * s.omega0 * s.omega0 / PI * chi.im_over_omega(omega)?)
}

/// Weak-coupling closed forms `(C_x, C_xd)` at lag `tau`.
pub fn weak_limit_correlation(tau: f64, system: &SystemSpec) -> (f64, f64) {
    let e = system.weak_coupling_energy();
    let c = (system.omega0 * tau).cos();
    let m = system.mass;
    let w0 = system.omega0;
    (e / (m * w0 * w0) * c, e / m * c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Channel {
    Position,
    Velocity,
}

/// Correlation evaluator holding the susceptibility and the quadrature settings.
#[derive(Debug, Clone)]
pub struct Fdt {
    chi: Susceptibility,
    cfg: QuadratureConfig,
}

impl Fdt {
    pub fn new(system: SystemSpec, bath: BathSpec, cfg: QuadratureConfig) -> Result<Self> {
        cfg.validate(&system)?;
        Ok(Self {
            chi: Susceptibility::new(system, bath)?,
            cfg,
        })
    }

    pub fn susceptibility(&self) -> &Susceptibility {
        &self.chi
    }

    pub fn config(&self) -> &QuadratureConfig {
        &self.cfg
    }

    fn upper_limit(&self) -> Option<f64> {
        match (self.chi.support_end(), self.cfg.omega_max) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }

    fn correlation(&self, tau: f64, channel: Channel) -> Result<Correlation> {
        if !tau.is_finite() {
            return Err(Error::domain("tau must be finite"));
        }
        let tau = tau.abs();
        let sys = *self.chi.system();
        let gamma = self.chi.bath().gamma();
        if channel == Channel::Position && sys.omega0 == 0.0 {
            return Err(Error::NoStationaryState("a free particle has no stationary position variance"));
        }
        let upper = self.upper_limit();
        if channel == Channel::Velocity && upper.is_none() {
            return Err(Error::UvDivergent);
        }

        let hbar = sys.hbar;
        let kt = sys.thermal_energy();
        let chi = &self.chi;
        let mut failure = None;
        let mut integrand = |w: f64| -> f64 {
            let r = chi.im_over_omega(w).map(|g| {
                let weight = match channel {
                    Channel::Position => 1.0,
                    Channel::Velocity => w * w,
                };
                weight * g * 2.0 * crate::thermal::mode_energy(w, hbar, kt) * (w * tau).cos() / PI
            });
            match r {
                Ok(v) => v,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            }
        };

        let (center, rel) = if sys.omega0 > 0.0 {
            (sys.omega0, gamma / sys.omega0)
        } else {
            (gamma, 1.0)
        };
        let tol = self.cfg.tolerance();
        let k = self.cfg.peak_halfwidths;
        let result = match upper {
            Some(top) => {
                let mut pts = peak_breakpoints(center, rel, k, 0.0, top);
                add_oscillation_breakpoints(&mut pts, tau, self.cfg.max_panels / 4);
                integrate(&mut integrand, &pts, &tol)?
            }
            None => {
                let split = (center * (1.0 + k * rel)).max(2.0 * center);
                let mut pts = peak_breakpoints(center, rel, k, 0.0, split);
                add_oscillation_breakpoints(&mut pts, tau, self.cfg.max_panels / 4);
                let head = integrate(&mut integrand, &pts, &tol)?;
                let tail = if tau == 0.0 {
                    integrate_to_infinity(&mut integrand, split, &[], &tol)?
                } else {
                    integrate_oscillatory_tail(&mut integrand, split, PI / tau, &tol)?
                };
                Integral {
                    value: head.value + tail.value,
                    error: head.error + tail.error,
                    panels: head.panels + tail.panels,
                }
            }
        };
        if let Some(e) = failure {
            return Err(e);
        }
        Ok(Correlation {
            value: result.value,
            error: result.error,
            omega_max: upper,
            panels: result.panels,
        })
    }

    /// Symmetrized position autocorrelation `C_x(tau)`.
    pub fn position_correlation(&self, tau: f64) -> Result<Correlation> {
        self.correlation(tau, Channel::Position)
    }

    /// Symmetrized velocity autocorrelation `C_xd(tau)`, truncated at the cutoff.
    pub fn velocity_correlation(&self, tau: f64) -> Result<Correlation> {
        self.correlation(tau, Channel::Velocity)
    }

    pub fn mean_energies(&self) -> Result<EnergySplit> {
        let sys = self.chi.system();
        let cx = self.position_correlation(0.0)?;
        let cv = self.velocity_correlation(0.0)?;
        let pot = sys.mass * sys.omega0 * sys.omega0;
        Ok(EnergySplit {
            kinetic: sys.mass * cv.value,
            potential: pot * cx.value,
            kinetic_error: sys.mass * cv.error,
            potential_error: pot * cx.error,
            omega_max: cv.omega_max,
        })
    }

    /// Symmetric noise correlation `(hbar/pi) int J(w) coth(hbar w/2kT) cos(w tau) dw`,
    /// i.e. half the anticommutator `<{f(t), f(t+tau)}>`.
    pub fn symmetric_noise_correlation(&self, tau: f64) -> Result<Correlation> {
        let sys = *self.chi.system();
        let bath = self.chi.bath();
        let Some(top) = self.upper_limit() else {
            return Err(Error::UvDivergent);
        };
        let hbar = sys.hbar;
        let kt = sys.thermal_energy();
        let f = |w: f64| {
            // J(w) hbar coth = (J/w) 2 eps(w); J/w = m gamma on the support
            let j_over_w = match bath.kind() {
                BathKind::Discrete => 0.0,
                _ => sys.mass * bath.gamma(),
            };
            j_over_w * 2.0 * crate::thermal::mode_energy(w, hbar, kt) * (w * tau).cos() / PI
        };
        let mut pts = vec![0.0, top];
        add_oscillation_breakpoints(&mut pts, tau.abs(), self.cfg.max_panels / 4);
        let r = integrate(f, &pts, &self.cfg.tolerance())?;
        Ok(Correlation {
            value: r.value,
            error: r.error,
            omega_max: Some(top),
            panels: r.panels,
        })
    }
}

fn add_oscillation_breakpoints(pts: &mut Vec<f64>, tau: f64, budget: usize) {
    if tau == 0.0 || pts.len() < 2 {
        return;
    }
    let lo = pts[0];
    let hi = *pts.last().expect("non-empty");
    let step = PI / tau;
    let n = ((hi - lo) / step) as usize;
    if n < 2 || n > budget {
        return;
    }
    pts.extend((1..=n).map(|i| lo + i as f64 * step).filter(|&p| p < hi));
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-13 * a.abs().max(1.0));
}

pub fn position_correlation(tau: f64, system: &SystemSpec, bath: &BathSpec, cfg: &QuadratureConfig) -> Result<Correlation> {
    Fdt::new(*system, bath.clone(), *cfg)?.position_correlation(tau)
}

pub fn velocity_correlation(tau: f64, system: &SystemSpec, bath: &BathSpec, cfg: &QuadratureConfig) -> Result<Correlation> {
    Fdt::new(*system, bath.clone(), *cfg)?.velocity_correlation(tau)
}

pub fn mean_energies(system: &SystemSpec, bath: &BathSpec, cfg: &QuadratureConfig) -> Result<EnergySplit> {
    Fdt::new(*system, bath.clone(), *cfg)?.mean_energies()
}

/// Polynomial (Neville) extrapolation of `(x, y)` samples to `x = 0`.
///
/// Used to take the `gamma -> 0+` limit from a few finite-damping quadratures.
pub fn extrapolate_to_zero(samples: &[(f64, f64)]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::domain("need at least one sample"));
    }
    let xs: Vec<f64> = samples.iter().map(|s| s.0).collect();
    for i in 0..xs.len() {
        for j in 0..i {
            if xs[i] == xs[j] {
                return Err(Error::domain("extrapolation abscissae must be distinct"));
            }
        }
    }
    let mut p: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let n = p.len();
    for level in 1..n {
        for i in 0..n - level {
            let (xi, xj) = (xs[i], xs[i + level]);
            p[i] = (xj * p[i] - xi * p[i + 1]) / (xj - xi);
        }
    }
    Ok(p[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thermal::coth;
    use proptest::prelude::*;

    const FIG_GAMMAS: [f64; 4] = [1.0, 0.5, 0.125, 0.0125];

    fn strict_fdt(gamma: f64, cfg: QuadratureConfig) -> Fdt {
        Fdt::new(SystemSpec::default(), BathSpec::strict_ohmic(gamma).unwrap(), cfg).unwrap()
    }

    #[test]
    fn density_point_values() {
        assert!((pk_density(1.0, 1.0).unwrap() - 2.0 / PI).abs() < 1e-15);
        assert_eq!(pk_density(0.0, 0.3).unwrap(), 0.0);
        assert!((pp_density(1.0, 1.0).unwrap() - 2.0 / PI).abs() < 1e-15);
        assert!((pp_density(0.0, 0.5).unwrap() - 1.0 / PI).abs() < 1e-15);
        assert!(pk_density(1.0, 0.0).is_err());
        assert!(pp_density(-1.0, 1.0).is_err());
    }

    #[test]
    fn densities_are_normalized() {
        let cfg = QuadratureConfig::default();
        for g in FIG_GAMMAS {
            for d in [Density::Kinetic, Density::Potential] {
                let r = density_integral(d, 0, g, None, &cfg).unwrap();
                assert!((r.value - 1.0).abs() < 1e-6, "{d:?} {g}: {}", r.value);
            }
        }
    }

    #[test]
    fn divergent_moments_need_a_window() {
        let cfg = QuadratureConfig::default();
        assert!(density_integral(Density::Kinetic, 1, 0.1, None, &cfg).is_err());
        assert!(density_integral(Density::Potential, 1, 0.1, None, &cfg).is_ok());
    }

    #[test]
    fn dimensional_forms_rescale() {
        let w0 = 2.5;
        let g = 0.4;
        let sys = SystemSpec::default().with_omega0(w0).unwrap().with_mass(1.7).unwrap();
        let chi = Susceptibility::new(sys, BathSpec::strict_ohmic(g).unwrap()).unwrap();
        for i in 0..100 {
            let lam = 0.03 * i as f64 + 0.001;
            let pk = pk_dimensional(w0 * lam, &chi).unwrap();
            let pp = pp_dimensional(w0 * lam, &chi).unwrap();
            assert!((w0 * pk - pk_density(lam, g / w0).unwrap()).abs() < 1e-14);
            assert!((w0 * pp - pp_density(lam, g / w0).unwrap()).abs() < 1e-14);
            assert!((pk / pp - lam * lam).abs() < 1e-12 * lam * lam.max(1.0));
        }
        let tol = Tolerance::default();
        let head = integrate(|w| pk_dimensional(w, &chi).unwrap(), &[0.0, 2.0, 2.5, 3.0, 10.0], &tol).unwrap();
        let tail = integrate_to_infinity(|w| pk_dimensional(w, &chi).unwrap(), 10.0, &[], &tol).unwrap();
        assert!((head.value + tail.value - 1.0).abs() < 1e-6);
    }

    #[test]
    fn weak_limit_closed_forms() {
        let sys = SystemSpec::default().with_temperature(0.7).unwrap().with_mass(2.0).unwrap();
        let (cx, cv) = weak_limit_correlation(0.0, &sys);
        assert!((cx - 0.5 / 2.0 * coth(0.5 / 0.7)).abs() < 1e-15);
        assert!((cv - 0.5 / 2.0 * coth(0.5 / 0.7)).abs() < 1e-15);
        let cold = SystemSpec::default().with_temperature(1e-3).unwrap();
        let (_, cv) = weak_limit_correlation(0.0, &cold);
        assert!((cv / 0.5 - 1.0).abs() < 1e-6);
        let (cx, cv) = weak_limit_correlation(PI / 2.0, &SystemSpec::default());
        assert!(cx.abs() < 1e-16 && cv.abs() < 1e-16);
    }

    #[test]
    fn position_variance_weak_coupling() {
        let f = strict_fdt(1e-4, QuadratureConfig::default());
        let cx = f.position_correlation(0.0).unwrap();
        let target = 0.5 * coth(0.5);
        assert!((cx.value / target - 1.0).abs() < 1e-3, "{}", cx.value);
    }

    #[test]
    fn classical_equipartition() {
        let sys = SystemSpec::default().with_hbar(1e-6).unwrap().with_temperature(1.3).unwrap();
        let f = Fdt::new(sys, BathSpec::strict_ohmic(0.2).unwrap(), QuadratureConfig::default()).unwrap();
        let cx = f.position_correlation(0.0).unwrap();
        assert!((cx.value / 1.3 - 1.0).abs() < 5e-3, "{}", cx.value);
    }

    #[test]
    fn weak_coupling_tau_dependence_tracks_cosine() {
        let f = strict_fdt(1e-4, QuadratureConfig::default());
        let c0 = f.position_correlation(0.0).unwrap().value;
        for i in 0..=40 {
            let tau = 10.0 * i as f64 / 40.0;
            let c = f.position_correlation(tau).unwrap().value / c0;
            assert!((c - tau.cos()).abs() < 0.02, "tau={tau}: {c}");
        }
    }

    #[test]
    fn correlation_is_even_in_tau() {
        let f = strict_fdt(0.3, QuadratureConfig::default());
        for tau in [0.3, 2.0, 7.5] {
            assert_eq!(f.position_correlation(tau).unwrap().value, f.position_correlation(-tau).unwrap().value);
        }
    }

    #[test]
    fn velocity_needs_cutoff_for_strict_ohmic() {
        let f = strict_fdt(0.1, QuadratureConfig::default());
        assert_eq!(f.velocity_correlation(0.0), Err(Error::UvDivergent));
        let g = strict_fdt(0.1, QuadratureConfig::default().with_omega_max(100.0).unwrap());
        let c = g.velocity_correlation(0.0).unwrap();
        assert_eq!(c.omega_max, Some(100.0));
    }

    #[test]
    fn cutoff_bath_velocity_uses_bath_cutoff() {
        let b = BathSpec::cutoff_ohmic_with_gamma(0.1, 8.0, 1.0, 1.0).unwrap();
        let f = Fdt::new(SystemSpec::default(), b, QuadratureConfig::default()).unwrap();
        let c = f.velocity_correlation(0.0).unwrap();
        assert_eq!(c.omega_max, Some(8.0));
        assert!(c.value > 0.0);
    }

    #[test]
    fn strong_coupling_kinetic_exceeds_potential() {
        let cfg = QuadratureConfig::default().with_omega_max(1e3).unwrap();
        let e = strict_fdt(1.0, cfg).mean_energies().unwrap();
        assert!(e.kinetic - e.potential > 0.0, "{e:?}");
    }

    #[test]
    fn energy_sweep_approaches_weak_limit() {
        let cfg = QuadratureConfig::default().with_omega_max(1e3).unwrap();
        let target = SystemSpec::default().weak_coupling_energy();
        let mut last = f64::INFINITY;
        for g in FIG_GAMMAS {
            let e = strict_fdt(g, cfg).mean_energies().unwrap();
            let dev = (e.potential - target).abs();
            assert!(dev < last, "Gamma={g}: {dev} !< {last}");
            last = dev;
        }
    }

    #[test]
    fn tightening_tolerance_stays_within_error_bound() {
        for g in [0.5, 0.01] {
            let loose = strict_fdt(g, QuadratureConfig::default().with_rel_tol(1e-7).unwrap());
            let tight = strict_fdt(g, QuadratureConfig::default().with_rel_tol(5e-8).unwrap());
            let a = loose.position_correlation(0.0).unwrap();
            let b = tight.position_correlation(0.0).unwrap();
            assert!((a.value - b.value).abs() <= a.error, "{a:?} {b:?}");
        }
    }

    #[test]
    fn neville_recovers_polynomial_intercept() {
        let p = |x: f64| 3.0 - 2.0 * x + 0.5 * x * x;
        let v = extrapolate_to_zero(&[(0.1, p(0.1)), (0.2, p(0.2)), (0.4, p(0.4))]).unwrap();
        assert!((v - 3.0).abs() < 1e-13);
        assert!(extrapolate_to_zero(&[(0.1, 1.0), (0.1, 2.0)]).is_err());
    }

    #[test]
    fn config_validation() {
        let sys = SystemSpec::default();
        assert!(QuadratureConfig::default().with_omega_max(0.5).unwrap().validate(&sys).is_err());
        let bad = QuadratureConfig { peak_halfwidths: 0.5, ..Default::default() };
        assert!(bad.validate(&sys).is_err());
    }

    proptest! {
        #[test]
        fn densities_are_non_negative(l in 0.0f64..50.0, g in 1e-4f64..20.0) {
            prop_assert!(pk_density(l, g).unwrap() >= 0.0);
            prop_assert!(pp_density(l, g).unwrap() >= 0.0);
        }
    }
}
