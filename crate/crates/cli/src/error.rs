//! CLI-level error handling and exit-code mapping.
//!
//! Exit codes: 0 on success, 2 for usage/validation/configuration problems,
//! 3 for numerical failures inside the library (lost conservation, failed
//! eigendecompositions, and the like).  Errors are printed to standard error
//! as a single JSON object so scripted callers can parse them.

use qdg::Error as LibError;

#[derive(Debug)]
pub enum AppError {
    /// Bad flags, bad config file, unwritable output: the caller's problem.
    Usage(String),
    /// An error surfaced by the library; may be a parameter error
    /// (exit 2) or a numerical failure (exit 3).
    Lib(LibError),
}

impl AppError {
    pub fn usage(message: impl Into<String>) -> Self {
        AppError::Usage(message.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Usage(_) => 2,
            AppError::Lib(e) if e.is_numerical() => 3,
            AppError::Lib(_) => 2,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            AppError::Usage(_) => "validation",
            AppError::Lib(e) if e.is_numerical() => "numerical",
            AppError::Lib(_) => "validation",
        }
    }

    pub fn message(&self) -> String {
        match self {
            AppError::Usage(m) => m.clone(),
            AppError::Lib(e) => e.to_string(),
        }
    }

    /// One-line JSON rendering for standard error.
    pub fn to_json(&self) -> String {
        serde_json::json!({
            "error": self.message(),
            "kind": self.kind(),
        })
        .to_string()
    }
}

impl From<LibError> for AppError {
    fn from(e: LibError) -> Self {
        AppError::Lib(e)
    }
}
