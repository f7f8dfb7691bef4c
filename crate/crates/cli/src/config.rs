//! Run configuration: a TOML file, overridden by command-line flags.

use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Args, ValueEnum};
use kflow::attribution::check_threshold;
use kflow::{BalassaMode, CorpusPaths, DualGainWeight, GainScope, LoadOptions, Weight};
use serde::{Deserialize, Serialize};

/// A problem with the configuration rather than the input data.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn config_error(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Directory holding publications.jsonl, citations.csv, gazetteer.csv and scmap.csv.
    pub corpus_dir: Option<PathBuf>,
    pub publications: Option<PathBuf>,
    pub citations: Option<PathBuf>,
    pub gazetteer: Option<PathBuf>,
    pub scmap: Option<PathBuf>,
    pub domestic_country: String,
    pub cited_year_min: Option<i32>,
    pub cited_year_max: Option<i32>,
    /// Made-in threshold as a fraction, e.g. "1/2".
    pub threshold: String,
    pub dual_gain_weight: DualGainWeight,
    pub balassa_mode: BalassaMode,
    pub index_scope: GainScope,
    pub output_dir: PathBuf,
    /// Chunks for the parallel flows stage; 0 picks one per worker thread.
    pub partitions: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            corpus_dir: None,
            publications: None,
            citations: None,
            gazetteer: None,
            scmap: None,
            domestic_country: "IT".into(),
            cited_year_min: None,
            cited_year_max: None,
            threshold: "1/2".into(),
            dual_gain_weight: DualGainWeight::Full,
            balassa_mode: BalassaMode::ExcludeFocal,
            index_scope: GainScope::All,
            output_dir: PathBuf::from("kflow-out"),
            partitions: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum DualArg {
    Full,
    Half,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ModeArg {
    #[value(name = "exclude_focal")]
    ExcludeFocal,
    #[value(name = "include_focal")]
    IncludeFocal,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ScopeArg {
    All,
    #[value(name = "extra_only")]
    ExtraOnly,
}

/// Settings shared by every subcommand. Flags override the config file.
#[derive(Args, Debug, Default)]
pub struct ConfigArgs {
    /// TOML run configuration; relative paths inside it resolve against its directory
    #[arg(long, short = 'c', global = true)]
    pub config: Option<PathBuf>,
    /// Corpus directory with the four conventionally named input files
    #[arg(long, global = true)]
    pub corpus: Option<PathBuf>,
    /// Publications file [default: <corpus>/publications.jsonl]
    #[arg(long, global = true)]
    pub publications: Option<PathBuf>,
    /// Citations file [default: <corpus>/citations.csv]
    #[arg(long, global = true)]
    pub citations: Option<PathBuf>,
    /// Gazetteer file [default: <corpus>/gazetteer.csv]
    #[arg(long, global = true)]
    pub gazetteer: Option<PathBuf>,
    /// Subject-category map [default: <corpus>/scmap.csv]
    #[arg(long, global = true)]
    pub scmap: Option<PathBuf>,
    /// Country whose regions are analysed [default: IT]
    #[arg(long, global = true)]
    pub domestic_country: Option<String>,
    /// First publication year of cited publications (inclusive) [default: none]
    #[arg(long, global = true)]
    pub cited_year_min: Option<i32>,
    /// Last publication year of cited publications (inclusive) [default: none]
    #[arg(long, global = true)]
    pub cited_year_max: Option<i32>,
    /// Made-in threshold as a fraction in (0, 1] [default: 1/2]
    #[arg(long, global = true)]
    pub threshold: Option<String>,
    /// Weight of gains from publications made in two regions [default: full]
    #[arg(long, value_enum, global = true)]
    pub dual_gain_weight: Option<DualArg>,
    /// Balassa reference sums [default: exclude_focal]
    #[arg(long, value_enum, global = true)]
    pub balassa_mode: Option<ModeArg>,
    /// Gains counted in the specialization tensors [default: all]
    #[arg(long, value_enum, global = true)]
    pub index_scope: Option<ScopeArg>,
    /// Directory for every export [default: kflow-out]
    #[arg(long, short = 'o', global = true)]
    pub output_dir: Option<PathBuf>,
    /// Chunks for the parallel flows stage, 0 = one per thread [default: 0]
    #[arg(long, global = true)]
    pub partitions: Option<usize>,
}

/// Fully validated settings.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub config: RunConfig,
    pub paths: CorpusPaths,
    pub load: LoadOptions,
    pub threshold: Weight,
}

fn rebase(base: &Path, p: &mut Option<PathBuf>) {
    if let Some(path) = p {
        if path.is_relative() {
            *path = base.join(&*path);
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_error(format!("{}: {e}", path.display())))?;
        let mut cfg: RunConfig = toml::from_str(&text)
            .map_err(|e| config_error(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [
            &mut cfg.corpus_dir,
            &mut cfg.publications,
            &mut cfg.citations,
            &mut cfg.gazetteer,
            &mut cfg.scmap,
        ] {
            rebase(base, p);
        }
        if cfg.output_dir.is_relative() {
            cfg.output_dir = base.join(&cfg.output_dir);
        }
        Ok(cfg)
    }

    pub fn apply(&mut self, args: &ConfigArgs) {
        let set = |dst: &mut Option<PathBuf>, src: &Option<PathBuf>| {
            if src.is_some() {
                dst.clone_from(src);
            }
        };
        set(&mut self.corpus_dir, &args.corpus);
        set(&mut self.publications, &args.publications);
        set(&mut self.citations, &args.citations);
        set(&mut self.gazetteer, &args.gazetteer);
        set(&mut self.scmap, &args.scmap);
        if let Some(c) = &args.domestic_country {
            self.domestic_country.clone_from(c);
        }
        if args.cited_year_min.is_some() {
            self.cited_year_min = args.cited_year_min;
        }
        if args.cited_year_max.is_some() {
            self.cited_year_max = args.cited_year_max;
        }
        if let Some(t) = &args.threshold {
            self.threshold.clone_from(t);
        }
        if let Some(d) = args.dual_gain_weight {
            self.dual_gain_weight = match d {
                DualArg::Full => DualGainWeight::Full,
                DualArg::Half => DualGainWeight::Half,
            };
        }
        if let Some(m) = args.balassa_mode {
            self.balassa_mode = match m {
                ModeArg::ExcludeFocal => BalassaMode::ExcludeFocal,
                ModeArg::IncludeFocal => BalassaMode::IncludeFocal,
            };
        }
        if let Some(s) = args.index_scope {
            self.index_scope = match s {
                ScopeArg::All => GainScope::All,
                ScopeArg::ExtraOnly => GainScope::ExtraOnly,
            };
        }
        if let Some(o) = &args.output_dir {
            self.output_dir.clone_from(o);
        }
        if let Some(p) = args.partitions {
            self.partitions = p;
        }
    }

    pub fn resolve(self) -> anyhow::Result<Resolved> {
        let pick = |explicit: &Option<PathBuf>, name: &str| -> anyhow::Result<PathBuf> {
            match (explicit, &self.corpus_dir) {
                (Some(p), _) => Ok(p.clone()),
                (None, Some(dir)) => Ok(dir.join(name)),
                (None, None) => Err(config_error(format!(
                    "no path for {name}: set corpus_dir or the file path"
                ))),
            }
        };
        let paths = CorpusPaths {
            publications: pick(&self.publications, "publications.jsonl")?,
            citations: pick(&self.citations, "citations.csv")?,
            gazetteer: pick(&self.gazetteer, "gazetteer.csv")?,
            scmap: pick(&self.scmap, "scmap.csv")?,
        };
        if self.domestic_country.trim().is_empty() {
            return Err(config_error("domestic_country is empty"));
        }
        let cited_years = match (self.cited_year_min, self.cited_year_max) {
            (None, None) => None,
            (lo, hi) => {
                let (lo, hi) = (lo.unwrap_or(i32::MIN), hi.unwrap_or(i32::MAX));
                if lo > hi {
                    return Err(config_error(format!("empty cited-year range {lo}..={hi}")));
                }
                Some((lo, hi))
            }
        };
        let threshold: Weight = self
            .threshold
            .trim()
            .parse()
            .map_err(|_| config_error(format!("threshold `{}` is not a fraction", self.threshold)))?;
        check_threshold(threshold).map_err(|e| config_error(e.to_string()))?;
        let load = LoadOptions {
            domestic_country: self.domestic_country.trim().to_owned(),
            cited_years,
        };
        Ok(Resolved {
            config: self,
            paths,
            load,
            threshold,
        })
    }
}

/// Config file (if any) plus flag overrides, validated.
pub fn load(args: &ConfigArgs) -> anyhow::Result<Resolved> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::from_file(path).context("reading run configuration")?,
        None => RunConfig::default(),
    };
    cfg.apply(args);
    cfg.resolve()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("run.toml");
        std::fs::write(
            &file,
            "corpus_dir = \"data\"\nthreshold = \"2/3\"\nbalassa_mode = \"include_focal\"\n",
        )
        .unwrap();
        let args = ConfigArgs {
            config: Some(file),
            threshold: Some("3/5".into()),
            ..ConfigArgs::default()
        };
        let r = load(&args).unwrap();
        assert_eq!(r.threshold, Weight::new(3, 5));
        assert_eq!(r.config.balassa_mode, BalassaMode::IncludeFocal);
        assert_eq!(r.paths.citations, dir.path().join("data").join("citations.csv"));
    }

    #[test]
    fn rejects_bad_settings() {
        for args in [
            ConfigArgs::default(),
            ConfigArgs {
                corpus: Some("x".into()),
                threshold: Some("3/2".into()),
                ..ConfigArgs::default()
            },
            ConfigArgs {
                corpus: Some("x".into()),
                threshold: Some("half".into()),
                ..ConfigArgs::default()
            },
            ConfigArgs {
                corpus: Some("x".into()),
                cited_year_min: Some(2012),
                cited_year_max: Some(2010),
                ..ConfigArgs::default()
            },
        ] {
            let err = load(&args).unwrap_err();
            assert!(err.downcast_ref::<ConfigError>().is_some(), "{err}");
        }
    }

    #[test]
    fn unknown_keys_are_config_errors() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("run.toml");
        std::fs::write(&file, "thresold = \"1/2\"\n").unwrap();
        let err = RunConfig::from_file(&file).unwrap_err();
        assert!(err.downcast_ref::<ConfigError>().is_some());
    }
}
