use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A value failed construction-time validation.
    #[error("invalid input: {0}")]
    Invalid(String),

    /// A utility function was evaluated outside its payoff domain.
    #[error("{family} utility evaluated at {x} outside its domain [{lo}, {hi}]")]
    Domain {
        family: &'static str,
        x: f64,
        lo: f64,
        hi: f64,
    },

    /// An integrand produced NaN or an infinity.
    #[error("non-finite integrand value {value} at r = {abscissa}")]
    NonFinite { abscissa: f64, value: f64 },

    /// The objective has no sign change on the search interval.
    #[error(
        "no root for {target}: objective is {f_lo:.6e} at {lo} and {f_hi:.6e} at {hi}{}",
        note.as_deref().map(|n| format!(" ({n})")).unwrap_or_default()
    )]
    NoRoot {
        target: &'static str,
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
        note: Option<String>,
    },

    /// A mean-preserving spread was requested with invalid noise.
    #[error("noise precondition failed: {0}")]
    Precondition(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub fn is_no_root(&self) -> bool {
        matches!(self, Error::NoRoot { .. })
    }
}
