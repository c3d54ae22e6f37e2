//! Run configuration: declarative TOML file, overridden by `NAMESIFT_*`
//! environment variables, overridden by command-line flags.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, ValueEnum};
use namesift_core::baselines::KMeansConfig;
use namesift_core::corpus::Tokenizer;
use namesift_core::features::{FeatureConfig, IdfNumerator, IntersectionSemantics};
use namesift_core::math::LogBase;
use namesift_core::models::{LaplaceDenominator, ModelConfig, ModelKind, NoiseMode};
use serde::{Deserialize, Serialize};

use crate::corpus_io::LoadOptions;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {}: {source}", .path.display())]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid config {}: {source}", .path.display())]
    Parse {
        path: PathBuf,
        #[source]
        source: toml::de::Error,
    },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Tsv,
    Json,
}

/// Every tunable of a run. Missing file keys take the defaults below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub idf_numerator: IdfNumerator,
    pub log_base: LogBase,
    /// Model of single-configuration runs (`classify`).
    pub model: ModelKind,
    /// Noise mode of single-configuration runs.
    pub noise: NoiseMode,
    /// Grid rows.
    pub models: Vec<ModelKind>,
    /// Grid columns.
    pub noise_modes: Vec<NoiseMode>,
    pub intersection_semantics: IntersectionSemantics,
    pub alpha: f64,
    pub lambda: f64,
    pub laplace_denominator: LaplaceDenominator,
    pub stopwords: bool,
    pub strip_html: bool,
    pub hac: bool,
    pub kmeans: bool,
    pub reps: usize,
    pub max_iterations: usize,
    /// Worker threads; 0 uses every core.
    pub jobs: usize,
    pub format: OutputFormat,
    /// Restricts the run to these task names; empty keeps all.
    pub tasks: Vec<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let model = ModelConfig::default();
        RunConfig {
            idf_numerator: model.features.idf_numerator,
            log_base: model.features.log_base,
            model: model.model,
            noise: model.noise,
            models: ModelKind::ALL.to_vec(),
            noise_modes: NoiseMode::ALL.to_vec(),
            intersection_semantics: model.intersection_semantics,
            alpha: model.alpha,
            lambda: model.lambda,
            laplace_denominator: model.laplace_denominator,
            stopwords: false,
            strip_html: false,
            hac: true,
            kmeans: true,
            reps: 10,
            max_iterations: KMeansConfig::default().max_iterations,
            jobs: 0,
            format: OutputFormat::Tsv,
            tasks: Vec::new(),
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(s: &str, path: &Path) -> Result<Self, ConfigError> {
        toml::from_str(s).map_err(|source| ConfigError::Parse {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let s = fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&s, path)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |m: &str| Err(ConfigError::Invalid(m.to_string()));
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return invalid("alpha must be a positive number");
        }
        if !(self.lambda > 0.0 && self.lambda < 1.0) {
            return invalid("lambda must lie strictly between 0 and 1");
        }
        if self.reps == 0 {
            return invalid("reps must be at least 1");
        }
        if self.max_iterations == 0 {
            return invalid("max_iterations must be at least 1");
        }
        Ok(())
    }

    /// Checks that a grid run has something to do.
    pub fn validate_grid(&self) -> Result<(), ConfigError> {
        self.validate()?;
        let has_cells = !self.models.is_empty() && !self.noise_modes.is_empty();
        if !has_cells && !self.hac && !self.kmeans {
            return Err(ConfigError::Invalid(
                "select at least one model and noise mode, or a baseline".into(),
            ));
        }
        Ok(())
    }

    pub fn features(&self) -> FeatureConfig {
        FeatureConfig {
            idf_numerator: self.idf_numerator,
            log_base: self.log_base,
        }
    }

    pub fn model_config(&self, model: ModelKind, noise: NoiseMode) -> ModelConfig {
        ModelConfig {
            model,
            alpha: self.alpha,
            lambda: self.lambda,
            noise,
            intersection_semantics: self.intersection_semantics,
            laplace_denominator: self.laplace_denominator,
            features: self.features(),
        }
    }

    pub fn load_options(&self) -> LoadOptions {
        LoadOptions {
            tokenizer: Tokenizer {
                stopwords: self.stopwords,
            },
            strip_html: self.strip_html,
        }
    }

    pub fn kmeans_config(&self) -> KMeansConfig {
        KMeansConfig {
            max_iterations: self.max_iterations,
        }
    }

    fn shared_fingerprint(&self, out: &mut String) {
        let _ = write!(
            out,
            "idf_numerator={};log_base={};stopwords={};strip_html={}",
            self.idf_numerator.as_str(),
            self.log_base.as_str(),
            self.stopwords,
            self.strip_html,
        );
    }

    /// Canonical `key=value` echo of every parameter a classification cell
    /// depends on.
    pub fn model_fingerprint(&self, model: ModelKind, noise: NoiseMode) -> String {
        let mut s = format!(
            "model={};noise={};intersection_semantics={};alpha={};lambda={};laplace_denominator={};",
            model.as_str(),
            noise.as_str(),
            self.intersection_semantics.as_str(),
            self.alpha,
            self.lambda,
            self.laplace_denominator.as_str(),
        );
        self.shared_fingerprint(&mut s);
        s
    }

    pub fn baseline_fingerprint(&self, method: &str) -> String {
        let mut s = format!("method={method};k=entities;");
        if method == "kmeans" {
            let _ = write!(
                s,
                "reps={};max_iterations={};",
                self.reps, self.max_iterations
            );
        }
        self.shared_fingerprint(&mut s);
        s
    }
}

fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| p.parse::<T>().map_err(|e| e.to_string()))
        .collect()
}

fn parse_models(s: &str) -> Result<Vec<ModelKind>, String> {
    parse_list(s)
}

fn parse_noise_modes(s: &str) -> Result<Vec<NoiseMode>, String> {
    parse_list(s)
}

fn parse_tasks(s: &str) -> Result<Vec<String>, String> {
    parse_list(s)
}

/// Flags mirroring the config keys. Each is optional and, when given
/// (directly or through its `NAMESIFT_*` variable), replaces the file value.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// TOML file with run settings.
    #[arg(long, env = "NAMESIFT_CONFIG", global = true)]
    pub config: Option<PathBuf>,
    /// `paper` or `corpus`.
    #[arg(long, env = "NAMESIFT_IDF_NUMERATOR", global = true)]
    pub idf_numerator: Option<IdfNumerator>,
    /// `e`, `2` or `10`.
    #[arg(long, env = "NAMESIFT_LOG_BASE", global = true)]
    pub log_base: Option<LogBase>,
    /// Model for `classify`: cosine, score, score-smoothed, nb-bernoulli or nb-multinomial.
    #[arg(long, env = "NAMESIFT_MODEL", global = true)]
    pub model: Option<ModelKind>,
    /// `none`, `union` or `intersection`.
    #[arg(long, env = "NAMESIFT_NOISE", global = true)]
    pub noise: Option<NoiseMode>,
    /// Comma-separated model list for the grid.
    #[arg(long, env = "NAMESIFT_MODELS", value_parser = parse_models, global = true)]
    pub models: Option<::std::vec::Vec<ModelKind>>,
    /// Comma-separated noise modes for the grid.
    #[arg(long, env = "NAMESIFT_NOISE_MODES", value_parser = parse_noise_modes, global = true)]
    pub noise_modes: Option<::std::vec::Vec<NoiseMode>>,
    /// `exists` or `forall`.
    #[arg(long, env = "NAMESIFT_INTERSECTION_SEMANTICS", global = true)]
    pub intersection_semantics: Option<IntersectionSemantics>,
    /// Laplace smoothing factor.
    #[arg(long, env = "NAMESIFT_ALPHA", global = true)]
    pub alpha: Option<f64>,
    /// Jelinek-Mercer background weight, in (0, 1).
    #[arg(long, env = "NAMESIFT_LAMBDA", global = true)]
    pub lambda: Option<f64>,
    /// `paper` or `per_feature`.
    #[arg(long, env = "NAMESIFT_LAPLACE_DENOMINATOR", global = true)]
    pub laplace_denominator: Option<LaplaceDenominator>,
    /// Drop English stop words.
    #[arg(long, env = "NAMESIFT_STOPWORDS", num_args = 0..=1, default_missing_value = "true", global = true)]
    pub stopwords: Option<bool>,
    /// Strip markup from bodies before tokenizing.
    #[arg(long, env = "NAMESIFT_STRIP_HTML", num_args = 0..=1, default_missing_value = "true", global = true)]
    pub strip_html: Option<bool>,
    /// Run complete-link HAC.
    #[arg(long, env = "NAMESIFT_HAC", num_args = 0..=1, default_missing_value = "true", global = true)]
    pub hac: Option<bool>,
    /// Run K-Means.
    #[arg(long, env = "NAMESIFT_KMEANS", num_args = 0..=1, default_missing_value = "true", global = true)]
    pub kmeans: Option<bool>,
    /// K-Means repetitions (seeds 1..=reps).
    #[arg(long, env = "NAMESIFT_REPS", global = true)]
    pub reps: Option<usize>,
    /// K-Means iteration cap.
    #[arg(long, env = "NAMESIFT_MAX_ITERATIONS", global = true)]
    pub max_iterations: Option<usize>,
    /// Worker threads; 0 uses every core.
    #[arg(long, env = "NAMESIFT_JOBS", global = true)]
    pub jobs: Option<usize>,
    /// Output format.
    #[arg(long, value_enum, env = "NAMESIFT_FORMAT", global = true)]
    pub format: Option<OutputFormat>,
    /// Comma-separated task names to keep.
    #[arg(long, env = "NAMESIFT_TASKS", value_parser = parse_tasks, global = true)]
    pub tasks: Option<::std::vec::Vec<String>>,
}

impl ConfigArgs {
    /// Loads the config file, if any, and applies the overrides.
    pub fn resolve(&self) -> Result<RunConfig, ConfigError> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        self.apply(&mut cfg);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply(&self, cfg: &mut RunConfig) {
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = &self.$field {
                    cfg.$field = v.clone();
                }
            )*};
        }
        set!(
            idf_numerator,
            log_base,
            model,
            noise,
            models,
            noise_modes,
            intersection_semantics,
            alpha,
            lambda,
            laplace_denominator,
            stopwords,
            strip_html,
            hac,
            kmeans,
            reps,
            max_iterations,
            jobs,
            format,
            tasks
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_default() {
        let cfg = RunConfig::from_toml_str("", Path::new("x.toml")).unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(
            cfg.model_config(cfg.model, cfg.noise),
            ModelConfig::default()
        );
    }

    #[test]
    fn parses_every_key() {
        let src = r#"
            idf_numerator = "paper"
            log_base = "2"
            model = "nb-multinomial"
            noise = "union"
            models = ["cosine", "score-smoothed"]
            noise_modes = ["none", "intersection"]
            intersection_semantics = "forall"
            alpha = 0.5
            lambda = 0.25
            laplace_denominator = "per_feature"
            stopwords = true
            strip_html = true
            hac = false
            kmeans = false
            reps = 3
            max_iterations = 7
            jobs = 2
            format = "json"
            tasks = ["a", "b"]
        "#;
        let cfg = RunConfig::from_toml_str(src, Path::new("x.toml")).unwrap();
        assert_eq!(cfg.idf_numerator, IdfNumerator::Paper);
        assert_eq!(cfg.log_base, LogBase::Two);
        assert_eq!(cfg.models, [ModelKind::Cosine, ModelKind::ScoreSmoothed]);
        assert_eq!(cfg.noise_modes, [NoiseMode::None, NoiseMode::Intersection]);
        assert_eq!(cfg.intersection_semantics, IntersectionSemantics::Forall);
        assert_eq!(cfg.laplace_denominator, LaplaceDenominator::PerFeature);
        assert_eq!(cfg.format, OutputFormat::Json);
        assert_eq!((cfg.reps, cfg.max_iterations, cfg.jobs), (3, 7, 2));
        assert!(cfg.stopwords && cfg.strip_html && !cfg.hac && !cfg.kmeans);
        cfg.validate().unwrap();
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(RunConfig::from_toml_str("colour = 1", Path::new("x")).is_err());
        assert!(RunConfig::from_toml_str("noise = \"some\"", Path::new("x")).is_err());
        for bad in ["lambda = 1.0", "lambda = 0.0", "alpha = 0.0", "reps = 0"] {
            let cfg = RunConfig::from_toml_str(bad, Path::new("x")).unwrap();
            assert!(cfg.validate().is_err(), "{bad}");
        }
    }

    #[test]
    fn grid_needs_work() {
        let cfg = RunConfig {
            models: vec![],
            hac: false,
            kmeans: false,
            ..Default::default()
        };
        assert!(cfg.validate_grid().is_err());
    }

    #[test]
    fn overrides_win() {
        let mut cfg = RunConfig::default();
        let args = ConfigArgs {
            alpha: Some(2.0),
            models: Some(vec![ModelKind::Score]),
            ..Default::default()
        };
        args.apply(&mut cfg);
        assert_eq!(cfg.alpha, 2.0);
        assert_eq!(cfg.models, [ModelKind::Score]);
        assert_eq!(cfg.lambda, 0.5);
    }

    #[test]
    fn list_parsers() {
        assert_eq!(
            parse_models("cosine, nb-bernoulli").unwrap(),
            [ModelKind::Cosine, ModelKind::NbBernoulliLaplace]
        );
        assert!(parse_noise_modes("none,bogus").is_err());
    }

    #[test]
    fn fingerprints_distinguish_cells() {
        let cfg = RunConfig::default();
        let a = cfg.model_fingerprint(ModelKind::Score, NoiseMode::None);
        let b = cfg.model_fingerprint(ModelKind::Score, NoiseMode::Union);
        assert_ne!(a, b);
        assert!(a.starts_with("model=score;noise=none;"));
        assert!(cfg.baseline_fingerprint("kmeans").contains("reps=10"));
    }
}
