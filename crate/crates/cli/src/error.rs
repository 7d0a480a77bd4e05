use std::fmt;

/// Failure classes and their process exit codes.
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Numeric(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Numeric(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "invalid input: {m}"),
            CliError::Numeric(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<qle_core::Error> for CliError {
    fn from(e: qle_core::Error) -> Self {
        use qle_core::Error as E;
        match e {
            E::Domain(_) | E::Unsupported(_) | E::UvDivergent | E::NoStationaryState(_) => {
                CliError::Validation(e.to_string())
            }
            E::UndampedResonance { .. } | E::Quadrature { .. } | E::Instability { .. } => {
                CliError::Numeric(e.to_string())
            }
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use qle_core::Error as E;

    #[test]
    fn core_errors_map_to_classes() {
        assert_eq!(CliError::from(E::Domain("x".into())).exit_code(), 1);
        assert_eq!(CliError::from(E::UvDivergent).exit_code(), 1);
        assert_eq!(CliError::from(E::UndampedResonance { omega: 1.0 }).exit_code(), 2);
        assert_eq!(CliError::from(E::Instability { time: 0.5, hint: "dt" }).exit_code(), 2);
        let io = std::io::Error::new(std::io::ErrorKind::NotFound, "gone");
        assert_eq!(CliError::from(io).exit_code(), 3);
    }
}
