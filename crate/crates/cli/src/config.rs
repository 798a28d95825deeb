//! TOML run configuration. Every section is optional; missing keys take the
//! defaults of the corresponding library type.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use matchnet::baselines::PageRankOptions;
use matchnet::pipeline::{ApmConfig, ModelConfig, PipelineConfig};
use matchnet::{EmbedConfig, IngestOptions, SplitSpec, SynthConfig, WalkConfig};
use serde::Deserialize;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    /// Master seed, used by every section that does not set its own.
    pub seed: u64,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataSection {
    pub input: Option<PathBuf>,
    pub min_minutes: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("runs"),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RatingSection {
    /// `team,wins,losses` CSV to correlate team ratings with.
    pub records: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub run: RunSection,
    pub data: DataSection,
    pub output: OutputSection,
    pub walk: WalkConfig,
    pub embed: EmbedConfig,
    pub model: ModelConfig,
    pub pagerank: PageRankOptions,
    pub apm: ApmConfig,
    pub split: SplitSpec,
    pub synth: SynthConfig,
    pub rating: RatingSection,
}

const SEEDED: [&str; 4] = ["walk", "embed", "split", "synth"];

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
                toml::from_str::<toml::Table>(&text).with_context(|| format!("parsing config {}", p.display()))?
            }
            None => toml::Table::new(),
        };
        let mut cfg: Config = toml::Value::Table(table.clone()).try_into().with_context(|| {
            format!(
                "invalid config {}",
                path.map_or("<default>".into(), |p| p.display().to_string())
            )
        })?;
        let explicit = |section: &str| {
            table
                .get(section)
                .and_then(|s| s.as_table())
                .is_some_and(|s| s.contains_key("seed"))
        };
        let unset: Vec<&str> = SEEDED.into_iter().filter(|s| !explicit(s)).collect();
        cfg.apply_master_seed(&unset);
        Ok(cfg)
    }

    /// Copies `run.seed` into the listed sections.
    pub fn apply_master_seed(&mut self, sections: &[&str]) {
        let seed = self.run.seed;
        for s in sections {
            match *s {
                "walk" => self.walk.seed = seed,
                "embed" => self.embed.seed = seed,
                "split" => self.split.seed = seed,
                "synth" => self.synth.seed = seed,
                _ => {}
            }
        }
    }

    pub fn pipeline(&self) -> PipelineConfig {
        PipelineConfig {
            walk: self.walk.clone(),
            embed: self.embed.clone(),
            model: self.model,
            pagerank: self.pagerank,
            apm: self.apm,
        }
    }

    pub fn ingest_options(&self) -> IngestOptions {
        IngestOptions {
            min_minutes: self.data.min_minutes,
        }
    }

    pub fn input(&self) -> Result<&Path> {
        self.data
            .input
            .as_deref()
            .context("missing config key data.input (or pass --input)")
    }
}
