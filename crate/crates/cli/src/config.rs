//! Campaign configuration files (TOML).
//!
//! ```toml
//! presets = ["paper-table1"]          # optional built-in scenarios
//!
//! [output]                            # optional
//! csv = "results.csv"
//! dump = "runs.csv"
//! jobs = 4
//!
//! [[scenario]]
//! name = "ring"
//! source = [150.0, 0.0]
//! noise = { sigma_a = 0.2 }
//! n = [100, 1000]
//! estimators = ["PLS", "BELS+GN"]
//! runs = 200
//! base_seed = 1
//! array = { kind = "random-circle", radius = 100.0, center = [0.0, 0.0] }
//! ```

use std::path::PathBuf;

use aoa_core::harness::Scenario;
use aoa_core::presets;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputOptions {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dump: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDocument {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub presets: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputOptions>,
    #[serde(default, rename = "scenario", skip_serializing_if = "Vec::is_empty")]
    pub scenarios: Vec<Scenario>,
}

impl ConfigDocument {
    /// Parses and validates a document; `origin` names it in error messages.
    pub fn parse(text: &str, origin: &str) -> CliResult<Self> {
        let doc: ConfigDocument =
            toml::from_str(text).map_err(|e| CliError::Input(format!("{origin}: {}", e.to_string().trim_end())))?;
        for name in &doc.presets {
            if presets::preset(name).is_none() {
                return Err(CliError::Input(format!("{origin}: unknown preset `{name}`")));
            }
        }
        for s in &doc.scenarios {
            s.validate().map_err(|e| CliError::Input(format!("{origin}: {e}")))?;
        }
        Ok(doc)
    }

    pub fn to_toml(&self) -> CliResult<String> {
        toml::to_string(self).map_err(|e| CliError::Input(format!("cannot serialize configuration: {e}")))
    }

    /// Preset scenarios followed by the inline ones.
    pub fn all_scenarios(&self) -> Vec<Scenario> {
        let mut out: Vec<Scenario> =
            self.presets.iter().filter_map(|p| presets::preset(p)).flat_map(|p| p.scenarios).collect();
        out.extend(self.scenarios.iter().cloned());
        out
    }
}
