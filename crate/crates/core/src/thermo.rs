//! Weak-coupling thermodynamics of the oscillator.
//!
//! The reduced partition function `Z = Tr e^{-beta H} / Tr_B e^{-beta H_B}`
//! factorizes for vanishing coupling into the bare oscillator's
//! `Z_wc = 1 / (2 sinh(beta hbar w0 / 2))`; only that limit is implemented.

use crate::error::{require_positive, Error, Result};
use crate::thermal::coth;

/// Which closed form a report came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Oscillator,
    FreeParticle,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermoReport {
    /// `Z_wc`; not defined for the free particle.
    pub partition: Option<f64>,
    pub energy: f64,
    pub regime: Regime,
}

fn check(beta: f64, omega0: f64, hbar: f64) -> Result<()> {
    require_positive("beta", beta)?;
    require_positive("hbar", hbar)?;
    if omega0 == 0.0 {
        return Err(Error::Unsupported("omega0 = 0 is the free particle; use free_particle_kinetic"));
    }
    require_positive("omega0", omega0).map(|_| ())
}

/// `Z_wc = 1 / (2 sinh(beta hbar w0 / 2))`.
pub fn partition_weak(beta: f64, omega0: f64, hbar: f64) -> Result<f64> {
    check(beta, omega0, hbar)?;
    Ok(1.0 / (2.0 * (0.5 * beta * hbar * omega0).sinh()))
}

/// `ln Z_wc`, stable at low temperature.
pub fn ln_partition_weak(beta: f64, omega0: f64, hbar: f64) -> Result<f64> {
    check(beta, omega0, hbar)?;
    let x = 0.5 * beta * hbar * omega0;
    // 2 sinh x = e^x (1 - e^{-2x})
    Ok(-x - (-(-2.0 * x).exp_m1()).ln())
}

/// `E_wc = -d ln Z / d beta = (hbar w0 / 2) coth(beta hbar w0 / 2)`.
pub fn mean_energy_weak(beta: f64, omega0: f64, hbar: f64) -> Result<f64> {
    check(beta, omega0, hbar)?;
    Ok(0.5 * hbar * omega0 * coth(0.5 * beta * hbar * omega0))
}

/// Mean kinetic energy of the free Brownian particle, `kT/2`.
pub fn free_particle_kinetic(kt: f64) -> Result<f64> {
    require_positive("kT", kt)?;
    Ok(0.5 * kt)
}

pub fn thermo_report(beta: f64, omega0: f64, hbar: f64) -> Result<ThermoReport> {
    if omega0 == 0.0 {
        require_positive("beta", beta)?;
        return Ok(ThermoReport {
            partition: None,
            energy: free_particle_kinetic(1.0 / beta)?,
            regime: Regime::FreeParticle,
        });
    }
    Ok(ThermoReport {
        partition: Some(partition_weak(beta, omega0, hbar)?),
        energy: mean_energy_weak(beta, omega0, hbar)?,
        regime: Regime::Oscillator,
    })
}

/// Central difference `-(ln Z(beta + d) - ln Z(beta - d)) / 2d` with `d = rel * beta`.
pub fn energy_by_finite_difference(beta: f64, omega0: f64, hbar: f64, rel: f64) -> Result<f64> {
    require_positive("rel", rel)?;
    let d = rel * beta;
    let up = ln_partition_weak(beta + d, omega0, hbar)?;
    let down = ln_partition_weak(beta - d, omega0, hbar)?;
    Ok(-(up - down) / (2.0 * d))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_special_points() {
        let b = 2.0 * 0.5f64.asinh();
        assert!((partition_weak(b, 1.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
        let big = 40.0;
        assert!((partition_weak(big, 1.0, 1.0).unwrap() / (-big / 2.0).exp() - 1.0).abs() < 1e-15);
        let small = 1e-4;
        assert!((partition_weak(small, 1.0, 1.0).unwrap() * small - 1.0).abs() < 1e-8);
        assert!(partition_weak(1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn ln_partition_matches_direct() {
        for b in [1e-3, 0.3, 1.0, 7.0, 30.0] {
            let z = partition_weak(b, 1.3, 0.9).unwrap();
            assert!((ln_partition_weak(b, 1.3, 0.9).unwrap() - z.ln()).abs() < 1e-13 * z.ln().abs().max(1.0));
        }
        assert!(ln_partition_weak(2000.0, 1.0, 1.0).unwrap().is_finite());
    }

    /// Independent oracle: `Z = sum_n e^{-beta hbar w0 (n + 1/2)}` truncated.
    fn level_sum(beta: f64, w0: f64, hbar: f64) -> (f64, f64) {
        let mut z = 0.0;
        let mut e = 0.0;
        for n in 0..20_000 {
            let en = hbar * w0 * (n as f64 + 0.5);
            let w = (-beta * en).exp();
            z += w;
            e += en * w;
        }
        (z, e / z)
    }

    #[test]
    fn matches_level_sum() {
        for b in [0.05, 0.5, 2.0, 10.0] {
            let (z, e) = level_sum(b, 1.1, 1.0);
            assert!((partition_weak(b, 1.1, 1.0).unwrap() / z - 1.0).abs() < 1e-10);
            assert!((mean_energy_weak(b, 1.1, 1.0).unwrap() / e - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn energy_is_log_derivative() {
        for b in [0.01, 0.1, 1.0, 5.0, 20.0] {
            let e = mean_energy_weak(b, 1.0, 1.0).unwrap();
            let fd = energy_by_finite_difference(b, 1.0, 1.0, 1e-6).unwrap();
            assert!((fd / e - 1.0).abs() < 1e-8, "{b}: {fd} {e}");
        }
    }

    #[test]
    fn energy_limits_and_monotonicity() {
        assert!((mean_energy_weak(1e3, 1.0, 1.0).unwrap() - 0.5).abs() < 1e-15);
        let kt = 1e3;
        assert!((mean_energy_weak(1.0 / kt, 1.0, 1.0).unwrap() / kt - 1.0).abs() < 1e-6);
        let mut last = 0.0;
        for k in 1..200 {
            let e = mean_energy_weak(1.0 / (0.05 * k as f64), 1.0, 1.0).unwrap();
            assert!(e >= last && e >= 0.5);
            last = e;
        }
    }

    #[test]
    fn free_particle_is_hbar_free() {
        assert_eq!(free_particle_kinetic(0.8).unwrap(), 0.4);
        let a = thermo_report(1.0 / 0.8, 0.0, 1.0).unwrap();
        let b = thermo_report(1.0 / 0.8, 0.0, 1e-3).unwrap();
        assert_eq!(a.energy.to_bits(), b.energy.to_bits());
        assert_eq!(a.regime, Regime::FreeParticle);
        assert!(a.partition.is_none());
    }
}
