//! TOML configuration. Values resolve as flags over config file over
//! defaults; each command echoes the part it used into its output header.

use std::path::Path;

use btdiv_core::decodelab::{DecoderConfig, NGramConfig};
use btdiv_core::grouper::FinetuneSetSpec;
use btdiv_core::lexdiv::{BleuConfig, ChrfConfig};
use btdiv_core::synkernel::KernelConfig;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::files::sha256_hex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Bleu,
    Chrf,
    Kernel,
}

impl Metric {
    pub fn column(self) -> &'static str {
        match self {
            Metric::Bleu => "i_bleu",
            Metric::Chrf => "i_chrf",
            Metric::Kernel => "kernel_diff",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    #[default]
    Tsv,
    Jsonl,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiversitySection {
    /// Metrics to run; unset means BLEU and chrF, plus the kernel when a
    /// tree file is given.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metrics: Option<Vec<Metric>>,
    /// Score a uniform sample of this many groups instead of all of them.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample_n: Option<usize>,
    pub sample_seed: u64,
    pub format: ReportFormat,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StatsSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub neologism_cap: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub diversity: DiversitySection,
    pub stats: StatsSection,
    pub bleu: BleuConfig,
    pub chrf: ChrfConfig,
    pub kernel: KernelConfig,
    pub decoder: DecoderConfig,
    pub ngram: NGramConfig,
    pub group: FinetuneSetSpec,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| CliError::read(path, e))?;
        toml::from_str(&text).map_err(|e| CliError::validation(format!("{}: {e}", path.display())))
    }
}

/// Canonical JSON of an effective configuration and its SHA-256.
pub fn fingerprint<T: Serialize>(effective: &T) -> (serde_json::Value, String) {
    let value = serde_json::to_value(effective).expect("configuration serializes");
    let hash = sha256_hex(value.to_string().as_bytes());
    (value, hash)
}

#[cfg(test)]
mod tests {
    use super::*;
    use btdiv_core::decodelab::Strategy;

    #[test]
    fn partial_file_keeps_defaults() {
        let c: FileConfig =
            toml::from_str("[decoder]\nstrategy = \"beam\"\n[diversity]\nmetrics = [\"chrf\"]\nsample_n = 10\n")
                .unwrap();
        assert_eq!(c.decoder.strategy, Strategy::Beam);
        assert_eq!(c.decoder.beam_size, DecoderConfig::default().beam_size);
        assert_eq!(c.diversity.metrics, Some(vec![Metric::Chrf]));
        assert_eq!(c.bleu, BleuConfig::default());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<FileConfig>("[diversity]\nmetric = []\n").is_err());
    }

    #[test]
    fn fingerprint_is_stable() {
        let (_, a) = fingerprint(&FileConfig::default());
        let (_, b) = fingerprint(&FileConfig::default());
        assert_eq!(a, b);
        let mut other = FileConfig::default();
        other.diversity.sample_seed = 1;
        assert_ne!(fingerprint(&other).1, a);
    }
}
