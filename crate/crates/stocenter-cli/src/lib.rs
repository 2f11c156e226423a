//! Command-line front-end for the stocenter library: instance generation,
//! benchmarking sweeps and the acceptance suite.

pub mod acceptance;
pub mod bench;
pub mod generate;

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::Serialize;
use serde_json::{json, Value};

/// Environment variable that takes precedence over `--threads`.
pub const THREADS_ENV: &str = "STOCENTER_THREADS";

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_GUARD: u8 = 3;
pub const EXIT_VERIFY: u8 = 4;

/// Bad input: missing files, malformed instances, invalid parameters.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

/// One or more checks failed.
#[derive(Debug, thiserror::Error)]
#[error("verification failed: {0}")]
pub struct VerificationFailed(pub String);

/// Fully resolved settings of a run, echoed in every output.
#[derive(Debug, Clone, Default, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub instance: Option<PathBuf>,
    pub k: Option<usize>,
    pub j: Option<usize>,
    pub eps: Option<f64>,
    pub seed: Option<u64>,
    pub strategy: Option<String>,
    pub threads: Option<usize>,
    pub output: Option<PathBuf>,
    pub guards: BTreeMap<&'static str, f64>,
    /// Command-specific settings.
    pub extra: BTreeMap<String, Value>,
}

impl RunConfig {
    pub fn new(command: &str) -> Self {
        RunConfig {
            command: command.to_string(),
            guards: guards(),
            ..Default::default()
        }
    }

    pub fn with(mut self, key: &str, v: impl Serialize) -> Self {
        self.extra.insert(key.to_string(), json!(v));
        self
    }
}

pub fn guards() -> BTreeMap<&'static str, f64> {
    use stocenter::*;
    BTreeMap::from([
        (
            "existential_enumeration_points",
            model::MAX_EXISTENTIAL_ENUM as f64,
        ),
        (
            "locational_enumeration_realizations",
            model::MAX_LOCATIONAL_ENUM as f64,
        ),
        (
            "center_combinations",
            grid_coreset::MAX_R_COMBINATIONS as f64,
        ),
        ("holant_states", partition_prob::MAX_HOLANT_STATES as f64),
        ("image_subsets", partition_prob::MAX_IMAGE_SUBSETS as f64),
        ("coreset_candidates", gkm::MAX_CANDIDATES),
        ("oracle_candidates", oracle::MAX_ORACLE_CANDIDATES as f64),
    ])
}

/// Thread count: the environment variable wins over the flag.
pub fn resolve_threads(flag: Option<usize>) -> Result<Option<usize>, UsageError> {
    match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&t| t > 0)
            .map(Some)
            .ok_or_else(|| UsageError(format!("{THREADS_ENV}={v} is not a positive integer"))),
        _ => Ok(flag),
    }
}

/// Installs the global thread pool size.
pub fn install_threads(threads: Option<usize>) {
    #[cfg(feature = "parallel")]
    if let Some(t) = threads {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global();
    }
    #[cfg(not(feature = "parallel"))]
    let _ = threads;
}

/// Process exit code for an error.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<VerificationFailed>().is_some() {
        return EXIT_VERIFY;
    }
    if err.downcast_ref::<UsageError>().is_some() {
        return EXIT_USAGE;
    }
    match err.downcast_ref::<stocenter::Error>() {
        Some(e) if e.is_guard() => EXIT_GUARD,
        Some(stocenter::Error::Io(_)) => 1,
        Some(_) => EXIT_USAGE,
        None => 1,
    }
}

/// Reads and parses an instance file.
pub fn load_instance(path: &std::path::Path) -> anyhow::Result<stocenter::model::Instance> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
    stocenter::io::parse_instance(&text)
        .map_err(|e| UsageError(format!("{}: {e}", path.display())).into())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(
            exit_code(&VerificationFailed("x".into()).into()),
            EXIT_VERIFY
        );
        assert_eq!(exit_code(&UsageError("x".into()).into()), EXIT_USAGE);
        let guard = stocenter::Error::InstanceTooLarge("n".into());
        assert_eq!(exit_code(&guard.into()), EXIT_GUARD);
    }

    #[test]
    fn missing_instance_is_usage_error() {
        let err = load_instance(std::path::Path::new("/nonexistent/instance.json")).unwrap_err();
        assert_eq!(exit_code(&err), EXIT_USAGE);
    }
}
