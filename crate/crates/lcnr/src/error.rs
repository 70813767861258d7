use std::path::{Path, PathBuf};

/// Failure of a pipeline step, mapped onto the process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Bad configuration; the message names the key.
    #[error("{0}")]
    Config(String),

    #[error("{0}")]
    Divergence(String),

    /// Input data or model files that do not validate.
    #[error("{0}")]
    Validation(String),

    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 2,
            CliError::Config(_) => 3,
            CliError::Divergence(_) => 4,
            CliError::Validation(_) => 5,
            CliError::Internal(_) => 1,
        }
    }

    pub fn io(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
        move |source| CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Prefixes the message with the file it came from.
    pub fn in_file(self, path: &Path) -> CliError {
        let p = path.display();
        match self {
            CliError::Config(m) => CliError::Config(format!("{p}: {m}")),
            CliError::Validation(m) => CliError::Validation(format!("{p}: {m}")),
            CliError::Divergence(m) => CliError::Divergence(format!("{p}: {m}")),
            other => other,
        }
    }
}

impl From<lcnr_core::Error> for CliError {
    fn from(e: lcnr_core::Error) -> Self {
        use lcnr_core::Error as E;
        match e {
            E::Config { .. } => CliError::Config(e.to_string()),
            E::Divergence { .. } => CliError::Divergence(e.to_string()),
            E::Internal(_) => CliError::Internal(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        let io = CliError::io(Path::new("x"))(std::io::Error::other("boom"));
        assert_eq!(io.exit_code(), 2);
        let cfg: CliError = lcnr_core::Error::Config {
            key: "epochs".into(),
            reason: "bad".into(),
        }
        .into();
        assert_eq!(cfg.exit_code(), 3);
        assert!(cfg.to_string().contains("epochs"));
        assert_eq!(CliError::from(lcnr_core::Error::Divergence { epoch: 3 }).exit_code(), 4);
        assert_eq!(CliError::from(lcnr_core::Error::Validation("x".into())).exit_code(), 5);
    }
}
