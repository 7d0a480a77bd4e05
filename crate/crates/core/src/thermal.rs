//! Small thermal helpers shared by the correlation, sampling and thermodynamics code.

/// Hyperbolic cotangent.
pub fn coth(x: f64) -> f64 {
    1.0 / x.tanh()
}

/// `x * coth(x)`, finite at the origin where it tends to 1.
pub fn x_coth_x(x: f64) -> f64 {
    let ax = x.abs();
    if ax < 1e-4 {
        let x2 = x * x;
        1.0 + x2 / 3.0 - x2 * x2 / 45.0
    } else {
        ax / ax.tanh()
    }
}

/// Mean thermal energy `(hbar w / 2) coth(hbar w / 2 kT)` of a quantum oscillator
/// of frequency `omega`. At `omega = 0` this is the classical value `kT`.
pub fn mode_energy(omega: f64, hbar: f64, kt: f64) -> f64 {
    kt * x_coth_x(hbar * omega / (2.0 * kt))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn x_coth_x_is_continuous_across_the_series_switch() {
        let below = x_coth_x(0.999_999e-4);
        let above = x_coth_x(1.000_001e-4);
        assert!((below - above).abs() < 1e-12);
        assert_eq!(x_coth_x(0.0), 1.0);
        assert!((x_coth_x(-2.0) - 2.0 * coth(2.0)).abs() < 1e-15);
    }

    #[test]
    fn mode_energy_limits() {
        // zero point
        assert!((mode_energy(1.0, 1.0, 1e-3) - 0.5).abs() < 1e-12);
        // classical
        assert!((mode_energy(1.0, 1e-6, 2.0) - 2.0).abs() < 1e-12);
    }
}
