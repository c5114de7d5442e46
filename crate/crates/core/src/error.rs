use thiserror::Error;

/// Every failure the toolkit can report. The variant name doubles as the
/// machine-readable error kind surfaced by the command-line front end.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("matrix is not Hermitian (max |H - H^dagger| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("spectrum is degenerate: gap {gap:e} below threshold {threshold:e}{}", location_suffix(.theta, .varphi))]
    DegenerateGap {
        gap: f64,
        threshold: f64,
        theta: Option<f64>,
        varphi: Option<f64>,
    },

    #[error("eigenvalue to label assignment is ambiguous: {detail}")]
    AmbiguousMatch { detail: String },

    #[error("closed forms exist only for phase difference 0 or pi, got {phi}")]
    UnsupportedPhase { phi: f64 },

    #[error("result did not converge: {detail}")]
    NonConverged { detail: String },

    #[error("parameters lie on a topological transition: {detail}")]
    OnTransition { detail: String },

    #[error("operation requires a non-zero drive frequency")]
    ZeroFrequency,
}

fn location_suffix(theta: &Option<f64>, varphi: &Option<f64>) -> String {
    match (theta, varphi) {
        (Some(t), Some(p)) => format!(" at theta={t}, varphi={p}"),
        (Some(t), None) => format!(" at theta={t}"),
        _ => String::new(),
    }
}

impl Error {
    /// Taxonomy name of the error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter { .. } => "InvalidParameter",
            Error::NotHermitian { .. } => "NotHermitian",
            Error::DegenerateGap { .. } => "DegenerateGap",
            Error::AmbiguousMatch { .. } => "AmbiguousMatch",
            Error::UnsupportedPhase { .. } => "UnsupportedPhase",
            Error::NonConverged { .. } => "NonConverged",
            Error::OnTransition { .. } => "OnTransition",
            Error::ZeroFrequency => "ZeroFrequency",
        }
    }

    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn degenerate(gap: f64, threshold: f64) -> Self {
        Error::DegenerateGap {
            gap,
            threshold,
            theta: None,
            varphi: None,
        }
    }

    /// Attaches grid coordinates to a `DegenerateGap`; other variants pass through.
    pub(crate) fn at(self, theta: f64, varphi: Option<f64>) -> Self {
        match self {
            Error::DegenerateGap { gap, threshold, .. } => Error::DegenerateGap {
                gap,
                threshold,
                theta: Some(theta),
                varphi,
            },
            other => other,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kind_names_match_variants() {
        let e = Error::degenerate(1e-9, 2e-6).at(0.0, Some(1.0));
        assert_eq!(e.kind(), "DegenerateGap");
        assert!(e.to_string().contains("theta=0"));
        assert_eq!(Error::ZeroFrequency.kind(), "ZeroFrequency");
        assert_eq!(Error::UnsupportedPhase { phi: 1.0 }.kind(), "UnsupportedPhase");
    }
}
