//! Bath models for the independent-oscillator (Caldeira–Leggett) picture.
//!
//! A bath is either the memoryless *strict Ohmic* limit, characterised only
//! by its damping rate, the *cutoff Ohmic* bath with density of states
//! `g(w) = 3 w^2 / W^3` below the cutoff `W`, or an explicit finite set of
//! oscillators. Only parameters live here; there is no operator algebra.

use std::f64::consts::PI;

use crate::error::{require_non_negative, require_positive, Error, Result};
use crate::thermal;

/// Oscillator parameters plus the unit constants. Natural units by default:
/// `m = omega0 = hbar = kB = 1` and `T = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemSpec {
    pub mass: f64,
    /// Bare oscillator frequency; zero selects the free particle.
    pub omega0: f64,
    pub temperature: f64,
    pub hbar: f64,
    pub kb: f64,
}

impl Default for SystemSpec {
    fn default() -> Self {
        Self {
            mass: 1.0,
            omega0: 1.0,
            temperature: 1.0,
            hbar: 1.0,
            kb: 1.0,
        }
    }
}

impl SystemSpec {
    pub fn new(mass: f64, omega0: f64, temperature: f64) -> Result<Self> {
        Self {
            mass,
            omega0,
            temperature,
            ..Self::default()
        }
        .validated()
    }

    pub fn with_hbar(self, hbar: f64) -> Result<Self> {
        Self { hbar, ..self }.validated()
    }

    pub fn with_kb(self, kb: f64) -> Result<Self> {
        Self { kb, ..self }.validated()
    }

    pub fn with_temperature(self, temperature: f64) -> Result<Self> {
        Self { temperature, ..self }.validated()
    }

    pub fn with_omega0(self, omega0: f64) -> Result<Self> {
        Self { omega0, ..self }.validated()
    }

    pub fn with_mass(self, mass: f64) -> Result<Self> {
        Self { mass, ..self }.validated()
    }

    /// Checks every invariant; constructors funnel through here.
    pub fn validated(self) -> Result<Self> {
        require_positive("mass", self.mass)?;
        require_non_negative("omega0", self.omega0)?;
        require_positive("temperature", self.temperature)?;
        require_positive("hbar", self.hbar)?;
        require_positive("kB", self.kb)?;
        Ok(self)
    }

    pub fn thermal_energy(&self) -> f64 {
        self.kb * self.temperature
    }

    pub fn beta(&self) -> f64 {
        1.0 / self.thermal_energy()
    }

    /// `coth(hbar w / 2 kB T)`.
    pub fn coth_factor(&self, omega: f64) -> f64 {
        thermal::coth(self.hbar * omega / (2.0 * self.thermal_energy()))
    }

    /// `(hbar w / 2) coth(hbar w / 2 kB T)`, the mean energy of a mode at `omega`.
    pub fn mode_energy(&self, omega: f64) -> f64 {
        thermal::mode_energy(omega, self.hbar, self.thermal_energy())
    }

    /// The weak-coupling oscillator energy `(hbar w0 / 2) coth(hbar w0 / 2 kB T)`.
    pub fn weak_coupling_energy(&self) -> f64 {
        self.mode_energy(self.omega0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BathKind {
    StrictOhmic,
    CutoffOhmic,
    Discrete,
}

/// One bath oscillator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathMode {
    pub omega: f64,
    pub mass: f64,
    /// Linear coupling to the system coordinate.
    pub coupling: f64,
}

impl BathMode {
    /// `c^2 / (m w^2)`, the mode's weight in the friction kernel.
    pub fn kernel_weight(&self) -> f64 {
        self.coupling * self.coupling / (self.mass * self.omega * self.omega)
    }
}

/// A finite, non-empty list of bath oscillators with positive frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSet {
    modes: Vec<BathMode>,
}

impl ModeSet {
    pub fn new(modes: Vec<BathMode>) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::domain("a mode set needs at least one mode"));
        }
        for m in &modes {
            require_positive("mode frequency", m.omega)?;
            require_positive("mode mass", m.mass)?;
            if !m.coupling.is_finite() {
                return Err(Error::domain("mode coupling must be finite"));
            }
        }
        Ok(Self { modes })
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn modes(&self) -> &[BathMode] {
        &self.modes
    }

    pub fn iter(&self) -> std::slice::Iter<'_, BathMode> {
        self.modes.iter()
    }

    pub fn max_frequency(&self) -> f64 {
        self.modes.iter().map(|m| m.omega).fold(0.0, f64::max)
    }

    /// `sum_j c_j^2 / (m_j w_j^2) cos(w_j t)` for `t >= 0`, zero before.
    pub fn kernel(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        self.modes
            .iter()
            .map(|m| m.kernel_weight() * (m.omega * t).cos())
            .sum()
    }
}

impl<'a> IntoIterator for &'a ModeSet {
    type Item = &'a BathMode;
    type IntoIter = std::slice::Iter<'a, BathMode>;
    fn into_iter(self) -> Self::IntoIter {
        self.modes.iter()
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Model {
    StrictOhmic,
    CutoffOhmic {
        cutoff: f64,
        mode_mass: f64,
        mode_coupling: f64,
    },
    Discrete(ModeSet),
}

/// A bath model together with its damping rate `gamma`.
///
/// For the cutoff model `gamma = 3 pi c~^2 / (2 m m~ W^3)` is derived from the
/// microscopic parameters and the system mass it was built against. A
/// discrete bath carries the nominal `gamma` of whatever it approximates.
#[derive(Debug, Clone, PartialEq)]
pub struct BathSpec {
    gamma: f64,
    system_mass: Option<f64>,
    model: Model,
}

impl BathSpec {
    pub fn strict_ohmic(gamma: f64) -> Result<Self> {
        require_positive("gamma", gamma)?;
        Ok(Self {
            gamma,
            system_mass: None,
            model: Model::StrictOhmic,
        })
    }

    /// Cutoff Ohmic bath from microscopic parameters.
    pub fn cutoff_ohmic(mode_coupling: f64, mode_mass: f64, cutoff: f64, system_mass: f64) -> Result<Self> {
        let gamma = gamma_from_micro(mode_coupling, mode_mass, cutoff, system_mass)?;
        Ok(Self {
            gamma,
            system_mass: Some(system_mass),
            model: Model::CutoffOhmic {
                cutoff,
                mode_mass,
                mode_coupling,
            },
        })
    }

    /// Cutoff Ohmic bath with a prescribed damping rate; the mode coupling is
    /// chosen so that the microscopic formula reproduces `gamma`.
    pub fn cutoff_ohmic_with_gamma(gamma: f64, cutoff: f64, mode_mass: f64, system_mass: f64) -> Result<Self> {
        require_positive("gamma", gamma)?;
        require_positive("cutoff", cutoff)?;
        require_positive("mode mass", mode_mass)?;
        require_positive("system mass", system_mass)?;
        let coupling = (2.0 * gamma * system_mass * mode_mass * cutoff.powi(3) / (3.0 * PI)).sqrt();
        Self::cutoff_ohmic(coupling, mode_mass, cutoff, system_mass)
    }

    pub fn discrete(modes: ModeSet, gamma: f64) -> Result<Self> {
        require_positive("gamma", gamma)?;
        Ok(Self {
            gamma,
            system_mass: None,
            model: Model::Discrete(modes),
        })
    }

    pub fn kind(&self) -> BathKind {
        match self.model {
            Model::StrictOhmic => BathKind::StrictOhmic,
            Model::CutoffOhmic { .. } => BathKind::CutoffOhmic,
            Model::Discrete(_) => BathKind::Discrete,
        }
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn cutoff(&self) -> Option<f64> {
        match self.model {
            Model::CutoffOhmic { cutoff, .. } => Some(cutoff),
            _ => None,
        }
    }

    pub fn mode_mass(&self) -> Option<f64> {
        match self.model {
            Model::CutoffOhmic { mode_mass, .. } => Some(mode_mass),
            _ => None,
        }
    }

    pub fn mode_coupling(&self) -> Option<f64> {
        match self.model {
            Model::CutoffOhmic { mode_coupling, .. } => Some(mode_coupling),
            _ => None,
        }
    }

    /// System mass a cutoff bath was constructed against.
    pub fn system_mass(&self) -> Option<f64> {
        self.system_mass
    }

    pub fn modes(&self) -> Option<&ModeSet> {
        match &self.model {
            Model::Discrete(m) => Some(m),
            _ => None,
        }
    }

    /// Prefactor `3 c~^2 / (m~ W^3)` of the sinc kernel.
    pub(crate) fn sinc_amplitude(&self) -> Option<f64> {
        match self.model {
            Model::CutoffOhmic {
                cutoff,
                mode_mass,
                mode_coupling,
            } => Some(3.0 * mode_coupling * mode_coupling / (mode_mass * cutoff.powi(3))),
            _ => None,
        }
    }
}

/// Ohmic density of states `3 w^2 / W^3` below the cutoff, zero at and above it.
pub fn ohmic_dos(omega: f64, cutoff: f64) -> Result<f64> {
    require_non_negative("omega", omega)?;
    require_positive("cutoff", cutoff)?;
    if omega < cutoff {
        Ok(3.0 * omega * omega / cutoff.powi(3))
    } else {
        Ok(0.0)
    }
}

/// Friction kernel `mu(t)`, zero for `t < 0`.
///
/// The strict Ohmic kernel is a delta distribution and has no pointwise value.
pub fn friction_kernel(spec: &BathSpec, t: f64) -> Result<f64> {
    if t.is_nan() {
        return Err(Error::domain("t must not be NaN"));
    }
    match &spec.model {
        Model::StrictOhmic => Err(Error::Unsupported("kernel is distributional; use gamma directly")),
        Model::CutoffOhmic { cutoff, .. } => {
            if t < 0.0 {
                return Ok(0.0);
            }
            let amp = spec.sinc_amplitude().expect("cutoff bath");
            let x = cutoff * t;
            // sin(Wt)/t = W (1 - x^2/6 + ...)
            let sinc = if x.abs() < 1e-8 {
                cutoff * (1.0 - x * x / 6.0)
            } else {
                x.sin() / t
            };
            Ok(amp * sinc)
        }
        Model::Discrete(modes) => Ok(modes.kernel(t)),
    }
}

/// Damping rate `3 pi c~^2 / (2 m m~ W^3)` of the cutoff Ohmic bath.
pub fn gamma_from_micro(mode_coupling: f64, mode_mass: f64, cutoff: f64, system_mass: f64) -> Result<f64> {
    require_positive("mode coupling", mode_coupling)?;
    require_positive("mode mass", mode_mass)?;
    require_positive("cutoff", cutoff)?;
    require_positive("system mass", system_mass)?;
    Ok(3.0 * PI * mode_coupling * mode_coupling / (2.0 * system_mass * mode_mass * cutoff.powi(3)))
}

/// Spectral density `J(w)`.
///
/// Strict Ohmic: `m gamma w`. Cutoff Ohmic: `(pi/2)(c~^2/m~) g(w)/w`, which
/// equals `m gamma w` below the cutoff and vanishes above it. A discrete bath
/// is a comb of delta functions and has no pointwise value.
pub fn spectral_density(spec: &BathSpec, system: &SystemSpec, omega: f64) -> Result<f64> {
    require_non_negative("omega", omega)?;
    match &spec.model {
        Model::StrictOhmic => Ok(system.mass * spec.gamma * omega),
        Model::CutoffOhmic {
            cutoff,
            mode_mass,
            mode_coupling,
        } => {
            if omega >= *cutoff {
                return Ok(0.0);
            }
            // g(w)/w = 3 w / W^3, written out to stay finite at w = 0
            Ok(0.5 * PI * mode_coupling * mode_coupling / mode_mass * 3.0 * omega / cutoff.powi(3))
        }
        Model::Discrete(_) => Err(Error::Unsupported("spectral density is a delta comb; not pointwise")),
    }
}

/// Replaces a cutoff Ohmic continuum by `n` oscillators of mass `m~` and
/// coupling `c~/sqrt(n)` placed at the midpoint quantiles of `g`:
/// `w_j = W ((j - 1/2)/n)^(1/3)`.
pub fn discretize_bath(spec: &BathSpec, n: usize) -> Result<ModeSet> {
    let Model::CutoffOhmic {
        cutoff,
        mode_mass,
        mode_coupling,
    } = spec.model
    else {
        return Err(Error::Unsupported("only a cutoff Ohmic bath can be discretized"));
    };
    if n == 0 {
        return Err(Error::domain("need at least one mode"));
    }
    let coupling = mode_coupling / (n as f64).sqrt();
    let modes = (1..=n)
        .map(|j| BathMode {
            omega: cutoff * ((j as f64 - 0.5) / n as f64).cbrt(),
            mass: mode_mass,
            coupling,
        })
        .collect();
    ModeSet::new(modes)
}

/// Discretizes a cutoff bath and wraps the result as a discrete [`BathSpec`]
/// carrying the parent's `gamma`.
pub fn discretized(spec: &BathSpec, n: usize) -> Result<BathSpec> {
    BathSpec::discrete(discretize_bath(spec, n)?, spec.gamma())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate, Tolerance};
    use proptest::prelude::*;

    fn cutoff_bath() -> BathSpec {
        BathSpec::cutoff_ohmic(1.3, 0.7, 4.0, 1.0).unwrap()
    }

    #[test]
    fn dos_values() {
        let w = 2.0;
        assert!((ohmic_dos(w / 2.0, w).unwrap() - 0.75 / w).abs() < 1e-15);
        assert_eq!(ohmic_dos(2.0 * w, w).unwrap(), 0.0);
        assert!(ohmic_dos(-1.0, w).is_err());
        assert!(ohmic_dos(1.0, 0.0).is_err());
    }

    #[test]
    fn dos_is_normalized() {
        let w = 3.0;
        let r = integrate(|x| ohmic_dos(x, w).unwrap(), &[0.0, w], &Tolerance::default()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gamma_formula() {
        let g = gamma_from_micro(1.0, 1.0, 1.0, 1.0).unwrap();
        assert!((g - 1.5 * PI).abs() < 1e-15);
        assert!((gamma_from_micro(1.0, 1.0, 1.0, 2.0).unwrap() - g / 2.0).abs() < 1e-15);
        // c~ scaling as W^(3/2) holds gamma fixed
        for w in [1.0f64, 10.0, 1e3] {
            let gw = gamma_from_micro(w.powf(1.5), 1.0, w, 1.0).unwrap();
            assert!((gw / g - 1.0).abs() < 1e-12);
        }
        assert!(gamma_from_micro(0.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn cutoff_with_gamma_roundtrips() {
        let b = BathSpec::cutoff_ohmic_with_gamma(0.37, 12.0, 2.0, 1.5).unwrap();
        assert!((b.gamma() - 0.37).abs() < 1e-14);
    }

    #[test]
    fn kernel_at_origin_and_single_mode() {
        let b = cutoff_bath();
        let (c, m, w) = (1.3, 0.7, 4.0);
        let k0 = friction_kernel(&b, 0.0).unwrap();
        assert!((k0 - 3.0 * c * c / (m * w * w)).abs() < 1e-13);
        // continuity across the series switch
        let k_small = friction_kernel(&b, 2e-9 / w).unwrap();
        assert!((k_small - k0).abs() < 1e-12 * k0);

        let mode = BathMode { omega: 1.7, mass: 0.4, coupling: 0.9 };
        let single = BathSpec::discrete(ModeSet::new(vec![mode]).unwrap(), 0.1).unwrap();
        let t: f64 = 0.83;
        let expected = 0.81 / (0.4 * 1.7 * 1.7) * (1.7 * t).cos();
        assert!((friction_kernel(&single, t).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn strict_kernel_is_distributional() {
        let b = BathSpec::strict_ohmic(0.1).unwrap();
        assert_eq!(
            friction_kernel(&b, 0.0),
            Err(Error::Unsupported("kernel is distributional; use gamma directly"))
        );
    }

    #[test]
    fn half_line_kernel_integral_is_m_gamma() {
        // Only half of the 2 m gamma delta mass sits on t >= 0.
        let w = 50.0;
        let b = BathSpec::cutoff_ohmic_with_gamma(0.2, w, 1.0, 1.0).unwrap();
        let t_end = 200.0 / w;
        let pts: Vec<f64> = (0..=400).map(|k| k as f64 * t_end / 400.0).collect();
        let r = integrate(|t| friction_kernel(&b, t).unwrap(), &pts, &Tolerance::default()).unwrap();
        // sinc tail beyond W t = 200 is bounded by 1/200
        assert!((r.value / (1.0 * 0.2) - 1.0).abs() < 1.0 / 200.0 + 1e-9, "{}", r.value);
    }

    #[test]
    fn spectral_density_slope_is_m_gamma() {
        let sys = SystemSpec::default().with_mass(1.0).unwrap();
        let b = cutoff_bath();
        for w in [1e-3, 0.5, 1.0, 3.9] {
            let j = spectral_density(&b, &sys, w).unwrap();
            assert!((j / (sys.mass * b.gamma() * w) - 1.0).abs() < 1e-12);
        }
        assert_eq!(spectral_density(&b, &sys, 4.0).unwrap(), 0.0);
        assert_eq!(spectral_density(&b, &sys, 0.0).unwrap(), 0.0);
        let strict = BathSpec::strict_ohmic(0.3).unwrap();
        assert!((spectral_density(&strict, &sys, 1.0).unwrap() - 0.3).abs() < 1e-15);
        let disc = discretized(&b, 10).unwrap();
        assert!(spectral_density(&disc, &sys, 1.0).is_err());
    }

    #[test]
    fn discretization_layout() {
        let b = cutoff_bath();
        let one = discretize_bath(&b, 1).unwrap();
        assert!((one.modes()[0].omega - 4.0 * 0.5f64.cbrt()).abs() < 1e-14);
        let many = discretize_bath(&b, 64).unwrap();
        for m in &many {
            assert!((m.coupling - 1.3 / 8.0).abs() < 1e-15);
            assert_eq!(m.mass, 0.7);
            assert!(m.omega > 0.0 && m.omega < 4.0);
        }
        assert!(discretize_bath(&b, 0).is_err());
        assert!(discretize_bath(&BathSpec::strict_ohmic(1.0).unwrap(), 4).is_err());
    }

    fn sup_kernel_error(b: &BathSpec, n: usize) -> f64 {
        let modes = discretize_bath(b, n).unwrap();
        let w = b.cutoff().unwrap();
        let k0 = friction_kernel(b, 0.0).unwrap();
        (0..=500)
            .map(|i| {
                let t = 10.0 / w * i as f64 / 500.0;
                (modes.kernel(t) - friction_kernel(b, t).unwrap()).abs()
            })
            .fold(0.0, f64::max)
            / k0
    }

    #[test]
    fn discrete_kernel_converges_to_sinc() {
        let b = cutoff_bath();
        let e2 = sup_kernel_error(&b, 100);
        let e3 = sup_kernel_error(&b, 1_000);
        let e4 = sup_kernel_error(&b, 10_000);
        assert!(e2 > e3 && e3 > e4, "{e2} {e3} {e4}");
        assert!(e4 < 0.05, "{e4}");
    }

    #[test]
    fn system_spec_validation() {
        assert!(SystemSpec::new(1.0, 0.0, 1.0).is_ok());
        assert!(SystemSpec::new(0.0, 1.0, 1.0).is_err());
        assert!(SystemSpec::new(1.0, -1.0, 1.0).is_err());
        assert!(SystemSpec::new(1.0, 1.0, 0.0).is_err());
        assert!(SystemSpec::default().with_hbar(0.0).is_err());
    }

    proptest! {
        #[test]
        fn kernel_is_causal(t in -1e3f64..-1e-12) {
            let b = cutoff_bath();
            prop_assert_eq!(friction_kernel(&b, t).unwrap(), 0.0);
            let d = discretized(&b, 7).unwrap();
            prop_assert_eq!(friction_kernel(&d, t).unwrap(), 0.0);
        }

        #[test]
        fn spectral_density_ratio_is_unity(w in 1e-6f64..0.999_999) {
            let sys = SystemSpec::default();
            let b = BathSpec::cutoff_ohmic(0.8, 1.1, 1.0, 1.0).unwrap();
            let j = spectral_density(&b, &sys, w).unwrap();
            prop_assert!((j / (b.gamma() * w) - 1.0).abs() < 1e-12);
        }
    }
}
