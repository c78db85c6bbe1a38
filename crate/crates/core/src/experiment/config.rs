use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::attack::AttackConfig;
use crate::dataset::FeatureSchema;
use crate::error::{Error, Result};
use crate::models::{ModelKind, TrainConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DatasetId {
    A,
    B,
}

impl DatasetId {
    pub fn default_file(self) -> &'static str {
        match self {
            DatasetId::A => "student-mat.csv",
            DatasetId::B => "data.csv",
        }
    }

    pub fn builtin_schema(self) -> FeatureSchema {
        match self {
            DatasetId::A => FeatureSchema::student_performance(),
            DatasetId::B => FeatureSchema::student_dropout(),
        }
    }

    pub fn default_binarize(self) -> Option<Binarize> {
        match self {
            DatasetId::A => Some(Binarize {
                column: "G3".into(),
                threshold: 10,
            }),
            DatasetId::B => None,
        }
    }

    /// Data rows in the published file.
    pub fn expected_rows(self) -> usize {
        match self {
            DatasetId::A => 395,
            DatasetId::B => 4424,
        }
    }
}

impl fmt::Display for DatasetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DatasetId::A => "A",
            DatasetId::B => "B",
        })
    }
}

impl FromStr for DatasetId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(DatasetId::A),
            "B" | "b" => Ok(DatasetId::B),
            other => Err(Error::InvalidConfig(format!("unknown dataset {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Binarize {
    pub column: String,
    pub threshold: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub id: DatasetId,
    pub path: PathBuf,
    /// Schema file; the builtin schema for `id` when absent.
    #[serde(default)]
    pub schema: Option<PathBuf>,
    /// Grade binarization; the default for `id` when absent.
    #[serde(default)]
    pub binarize: Option<Binarize>,
}

impl DatasetSpec {
    pub fn new(id: DatasetId, path: impl Into<PathBuf>) -> Self {
        DatasetSpec {
            id,
            path: path.into(),
            schema: None,
            binarize: None,
        }
    }

    pub fn load_schema(&self) -> Result<FeatureSchema> {
        match &self.schema {
            Some(p) => FeatureSchema::from_toml_file(p),
            None => Ok(self.id.builtin_schema()),
        }
    }

    pub fn binarize_rule(&self) -> Option<Binarize> {
        self.binarize.clone().or_else(|| self.id.default_binarize())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    CentralClean,
    CentralPoisoned,
    FlClean,
    FlPoisoned,
}

impl Condition {
    pub const ALL: [Condition; 4] = [
        Condition::CentralClean,
        Condition::FlClean,
        Condition::CentralPoisoned,
        Condition::FlPoisoned,
    ];

    pub fn is_federated(self) -> bool {
        matches!(self, Condition::FlClean | Condition::FlPoisoned)
    }

    pub fn is_poisoned(self) -> bool {
        matches!(self, Condition::CentralPoisoned | Condition::FlPoisoned)
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Condition::CentralClean => "central_clean",
            Condition::CentralPoisoned => "central_poisoned",
            Condition::FlClean => "fl_clean",
            Condition::FlPoisoned => "fl_poisoned",
        })
    }
}

impl FromStr for Condition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "central_clean" => Ok(Condition::CentralClean),
            "central_poisoned" => Ok(Condition::CentralPoisoned),
            "fl_clean" => Ok(Condition::FlClean),
            "fl_poisoned" => Ok(Condition::FlPoisoned),
            other => Err(Error::InvalidConfig(format!("unknown condition {other:?}"))),
        }
    }
}

/// How federated metrics are averaged "across rounds".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlAveraging {
    /// One run per round budget; mean of the final global models' metrics.
    #[default]
    RoundBudgets,
    /// One run with the largest budget; mean of the per-round global
    /// metrics it logged.
    RoundSnapshots,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportFormat {
    #[default]
    Delimited,
    Structured,
    Human,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "delimited" | "csv" => Ok(ReportFormat::Delimited),
            "structured" | "json" => Ok(ReportFormat::Structured),
            "human" | "human-readable" | "text" => Ok(ReportFormat::Human),
            other => Err(Error::InvalidConfig(format!("unknown report format {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct OutputConfig {
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: ReportFormat,
    /// JSON-lines file with one record per (cell, round budget, round).
    #[serde(default)]
    pub round_log: Option<PathBuf>,
}

/// Partial hyperparameters layered over a model's defaults.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainOverrides {
    pub learning_rate: Option<f64>,
    pub epochs: Option<usize>,
    pub l2: Option<f64>,
    pub n_trees: Option<usize>,
    pub max_depth: Option<usize>,
    pub min_leaf: Option<usize>,
}

impl TrainOverrides {
    pub fn apply(&self, mut cfg: TrainConfig) -> TrainConfig {
        if let Some(v) = self.learning_rate {
            cfg.learning_rate = v;
        }
        if let Some(v) = self.epochs {
            cfg.epochs = v;
        }
        if let Some(v) = self.l2 {
            cfg.l2 = v;
        }
        if let Some(v) = self.n_trees {
            cfg.n_trees = v;
        }
        if let Some(v) = self.max_depth {
            cfg.max_depth = v;
        }
        if let Some(v) = self.min_leaf {
            cfg.min_leaf = v;
        }
        cfg
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainingSection {
    #[serde(default)]
    pub forest: TrainOverrides,
    #[serde(default)]
    pub svm: TrainOverrides,
    #[serde(default)]
    pub logistic: TrainOverrides,
    /// Local epochs per federated round; `ceil(epochs / rounds)` when absent.
    #[serde(default)]
    pub local_epochs: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub datasets: Vec<DatasetSpec>,
    #[serde(default = "default_models")]
    pub models: Vec<ModelKind>,
    #[serde(default = "default_conditions")]
    pub conditions: Vec<Condition>,
    #[serde(default = "default_round_budgets")]
    pub round_budgets: Vec<usize>,
    #[serde(default = "default_clients")]
    pub n_clients: usize,
    #[serde(default = "default_test_fraction")]
    pub test_fraction: f64,
    #[serde(default)]
    pub attack: AttackConfig,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub fl_averaging: FlAveraging,
    #[serde(default)]
    pub training: TrainingSection,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_models() -> Vec<ModelKind> {
    ModelKind::ALL.to_vec()
}

fn default_conditions() -> Vec<Condition> {
    Condition::ALL.to_vec()
}

fn default_round_budgets() -> Vec<usize> {
    vec![2, 4, 6, 8, 10]
}

fn default_clients() -> usize {
    3
}

fn default_test_fraction() -> f64 {
    0.2
}

fn default_seeds() -> Vec<u64> {
    vec![1, 2, 3]
}

impl ExperimentConfig {
    /// Full grid over the given datasets with every default.
    pub fn with_datasets(datasets: Vec<DatasetSpec>) -> Self {
        ExperimentConfig {
            datasets,
            models: default_models(),
            conditions: default_conditions(),
            round_budgets: default_round_budgets(),
            n_clients: default_clients(),
            test_fraction: default_test_fraction(),
            attack: AttackConfig::default(),
            seeds: default_seeds(),
            fl_averaging: FlAveraging::default(),
            training: TrainingSection::default(),
            output: OutputConfig::default(),
        }
    }

    /// Parses a TOML config. Relative paths inside it are resolved against
    /// the config file's directory.
    pub fn from_toml_file(path: &Path) -> Result<Self> {
        // an unreadable config is a config error, not a data error
        let text = std::fs::read_to_string(path).map_err(|e| Error::ConfigParse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let mut cfg = Self::from_toml_str(&text).map_err(|e| match e {
            Error::ConfigParse { message, .. } => Error::ConfigParse {
                path: path.to_path_buf(),
                message,
            },
            other => other,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::ConfigParse {
            path: PathBuf::from("<inline>"),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for d in &mut self.datasets {
            fix(&mut d.path);
            if let Some(s) = &mut d.schema {
                fix(s);
            }
        }
        if let Some(p) = &mut self.output.path {
            fix(p);
        }
        if let Some(p) = &mut self.output.round_log {
            fix(p);
        }
    }

    pub fn validate(&self) -> Result<()> {
        let empty = |what: &str| Err(Error::InvalidConfig(format!("{what} must not be empty")));
        if self.datasets.is_empty() {
            return empty("datasets");
        }
        if self.models.is_empty() {
            return empty("models");
        }
        if self.conditions.is_empty() {
            return empty("conditions");
        }
        if self.round_budgets.is_empty() {
            return empty("round_budgets");
        }
        if self.seeds.is_empty() {
            return empty("seeds");
        }
        if self.round_budgets.contains(&0) {
            return Err(Error::InvalidConfig("round budgets must be >= 1".into()));
        }
        if self.n_clients == 0 {
            return Err(Error::InvalidConfig("n_clients must be >= 1".into()));
        }
        if self.training.local_epochs == Some(0) {
            return Err(Error::InvalidConfig("local_epochs must be >= 1".into()));
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::InvalidFraction(self.test_fraction));
        }
        self.attack.validate(self.n_clients)?;
        for kind in &self.models {
            self.train_config(*kind).validate()?;
        }
        Ok(())
    }

    pub fn train_config(&self, kind: ModelKind) -> TrainConfig {
        let overrides = match kind {
            ModelKind::Forest => &self.training.forest,
            ModelKind::Svm => &self.training.svm,
            ModelKind::Logistic => &self.training.logistic,
        };
        overrides.apply(TrainConfig::defaults_for(kind))
    }

    pub fn dataset(&self, id: DatasetId) -> Option<&DatasetSpec> {
        self.datasets.iter().find(|d| d.id == id)
    }
}
