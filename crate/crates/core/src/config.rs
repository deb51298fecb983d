//! TOML configuration files. Every field is optional; command-line flags
//! take precedence over the file, which takes precedence over defaults.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BinarySection {
    pub epsilon: Option<f64>,
    pub n: Option<u64>,
    pub d: Option<u64>,
    pub s: Option<f64>,
    pub p: Option<f64>,
    pub mode: Option<crate::binary::ParamMode>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RealSection {
    pub epsilon: Option<f64>,
    pub n: Option<u64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HistogramSection {
    pub epsilon: Option<f64>,
    pub n: Option<u64>,
    pub buckets: Option<u32>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    /// `all-zeros`, `all-ones`, `uniform-random` or a comma-separated list.
    pub inputs: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrecisionSection {
    pub precision_bits: Option<u32>,
    pub grid_points: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchSection {
    pub d_candidates: Option<Vec<u64>>,
    pub bisection_steps: Option<u32>,
    pub support_ceiling: Option<u64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub binary: BinarySection,
    #[serde(default)]
    pub real: RealSection,
    #[serde(default)]
    pub histogram: HistogramSection,
    #[serde(default)]
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub precision: PrecisionSection,
    #[serde(default)]
    pub search: SearchSection,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        ConfigFile::parse(&text)
    }
}

/// `flag`, else `file`, else `default`.
pub fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections() {
        let c = ConfigFile::parse(
            "[binary]\nepsilon = 0.5\nd = 7\nmode = \"engineering\"\n[experiment]\ntrials = 10\n[search]\nd_candidates = [15, 31]\n",
        )
        .unwrap();
        assert_eq!(c.binary.epsilon, Some(0.5));
        assert_eq!(c.binary.mode, Some(crate::binary::ParamMode::Engineering));
        assert_eq!(c.experiment.trials, Some(10));
        assert_eq!(c.search.d_candidates, Some(vec![15, 31]));
        assert_eq!(c.real, RealSection::default());
    }

    #[test]
    fn rejects_unknown_keys() {
        assert!(ConfigFile::parse("[binary]\nepsilon = 1\nbogus = 2\n").is_err());
        assert!(ConfigFile::parse("[nope]\nx = 1\n").is_err());
    }

    #[test]
    fn precedence() {
        assert_eq!(pick(Some(1), Some(2), 3), 1);
        assert_eq!(pick(None, Some(2), 3), 2);
        assert_eq!(pick(None::<u32>, None, 3), 3);
    }
}
