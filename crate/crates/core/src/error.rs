use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid probability vector ({what}): {reason}")]
    InvalidDistribution { what: &'static str, reason: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("decomposition inconsistent with prior: max deviation {deviation:.3e}")]
    InconsistentDecomposition { deviation: f64 },

    #[error("instance too large: {0}")]
    TooLarge(String),

    #[error("cluster size degenerate: rho*d = {rho_d} (need rho*d >= 2)")]
    DegenerateCluster { rho_d: f64 },

    #[error("posterior {signal} is not uniform on its support")]
    NonUniformPosterior { signal: usize },

    #[error("linear program: {0}")]
    Lp(#[from] crate::lp::LpError),

    #[error("solver residual too large: gap {gap:.3e} (lower {lower}, upper {upper})")]
    Residual { gap: f64, lower: f64, upper: f64 },

    #[error("format error in {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            reason: reason.into(),
        }
    }
}

/// Checks that `v` is a probability vector within `tol`.
pub(crate) fn check_distribution(what: &'static str, v: &[f64], tol: f64) -> Result<()> {
    if v.is_empty() {
        return Err(Error::InvalidDistribution {
            what,
            reason: "empty".into(),
        });
    }
    let mut sum = 0.0;
    for (i, &p) in v.iter().enumerate() {
        if !p.is_finite() {
            return Err(Error::InvalidDistribution {
                what,
                reason: format!("entry {i} is not finite"),
            });
        }
        if p < -tol {
            return Err(Error::InvalidDistribution {
                what,
                reason: format!("entry {i} is negative ({p})"),
            });
        }
        sum += p;
    }
    if (sum - 1.0).abs() > tol {
        return Err(Error::InvalidDistribution {
            what,
            reason: format!("entries sum to {sum}"),
        });
    }
    Ok(())
}
