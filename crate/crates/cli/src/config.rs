//! Flat TOML configuration file merged under command-line flags.
//!
//! Every key is optional and mirrors a flag of the same name with dashes
//! replaced by underscores. Unknown keys are rejected.
//!
//! ```toml
//! function = "rastrigin"
//! dim = 15
//! method = "asga"
//! n0 = 500
//! n = 100
//! generations = 15
//! active_dim = "1"      # or "auto"
//! backward = 2
//! seed = 7
//! out_dir = "results"
//! ```

use std::fmt;
use std::path::{Path, PathBuf};

use serde::Deserialize;

/// A problem with user-supplied configuration; maps to exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub function: Option<String>,
    pub dim: Option<usize>,
    pub method: Option<String>,
    pub n0: Option<usize>,
    pub n: Option<usize>,
    pub generations: Option<usize>,
    pub active_dim: Option<String>,
    pub backward: Option<usize>,
    pub burn_in: Option<usize>,
    pub seed: Option<u64>,
    pub mate_probability: Option<f64>,
    pub mutation_probability: Option<f64>,
    pub blx_alpha: Option<f64>,
    pub mutation_sigma2: Option<f64>,
    pub dataset: Option<PathBuf>,
    pub penalty: Option<f64>,
    pub kernel: Option<String>,
    pub shape: Option<f64>,
    pub plan: Option<String>,
    pub runs: Option<usize>,
    pub samples: Option<usize>,
    pub n_boot: Option<usize>,
    pub out_dir: Option<PathBuf>,
    pub threads: Option<usize>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, ConfigError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read config file {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| ConfigError(format!("config file {}: {}", path.display(), e.message())))
    }
}

/// Parses a textual option, reporting failures against `field`.
pub fn parse_field<T>(field: &str, value: &str) -> Result<T, ConfigError>
where
    T: std::str::FromStr,
    T::Err: fmt::Display,
{
    value.parse().map_err(|e| ConfigError(format!("invalid {field}: {e}")))
}
