use alloc::string::String;

/// Invalid configuration or malformed input value.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("unsupported sub-carrier spacing {0} kHz (expected 15, 30 or 60)")]
    UnsupportedScs(u32),
    #[error("unsupported TTI size {0} symbols (expected 2, 4, 7 or 14)")]
    UnsupportedTti(u32),
    #[error("total PRB count must be positive")]
    NoPrbs,
    #[error("{field}: {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error("parse error: {0}")]
    Parse(String),
}

impl ConfigError {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        ConfigError::Invalid { field, reason: reason.into() }
    }
}
