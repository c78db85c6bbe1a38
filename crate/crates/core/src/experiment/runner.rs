use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attack::{flip_labels, AttackConfig};
use crate::dataset::{
    binarize_grade_target, build_client_partitions, build_pooled, load_table, plan_clients,
    target_labels, ClientRows, FeatureSchema, RawTable,
};
use crate::error::{Error, Result};
use crate::federation::{local_epochs_for, run_federated, ClientFlipMask, FederationConfig, RoundLog};
use crate::metrics::{evaluate, MetricsReport};
use crate::models::{self, ModelKind, TrainConfig};
use crate::seed;

use super::config::{Condition, DatasetId, DatasetSpec, ExperimentConfig, FlAveraging};
use super::report::ResultsTable;

/// A loaded table with its target already in class-name form.
#[derive(Debug, Clone)]
pub struct PreparedDataset {
    pub id: DatasetId,
    pub schema: FeatureSchema,
    pub raw: RawTable,
    pub labels: Vec<usize>,
}

impl PreparedDataset {
    pub fn load(spec: &DatasetSpec) -> Result<Self> {
        let schema = spec.load_schema()?;
        let raw = load_table(&spec.path, &schema)?;
        Self::from_raw(spec.id, schema, raw, spec.binarize_rule().as_ref())
    }

    /// `raw` holds the target as read from disk; `binarize` turns a grade
    /// column into pass/fail first.
    pub fn from_raw(
        id: DatasetId,
        schema: FeatureSchema,
        raw: RawTable,
        binarize: Option<&super::config::Binarize>,
    ) -> Result<Self> {
        let raw = match binarize {
            Some(rule) => binarize_grade_target(&raw, &rule.column, rule.threshold)?,
            None => raw,
        };
        let labels = target_labels(&raw, &schema)?;
        Ok(PreparedDataset {
            id,
            schema,
            raw,
            labels,
        })
    }

    pub fn n_classes(&self) -> usize {
        self.schema.n_classes()
    }

    pub fn plan(&self, cfg: &ExperimentConfig, master_seed: u64) -> Result<Vec<ClientRows>> {
        plan_clients(
            &self.labels,
            self.n_classes(),
            cfg.n_clients,
            cfg.test_fraction,
            master_seed,
        )
    }
}

/// One federated run inside a condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetOutcome {
    pub rounds: usize,
    pub report: MetricsReport,
    pub log: RoundLog,
    pub flip_masks: Vec<ClientFlipMask>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionOutcome {
    pub condition: Condition,
    /// Headline metrics; for federated conditions the mean over `budgets`.
    pub report: MetricsReport,
    pub budgets: Vec<BudgetOutcome>,
    /// Source-table rows relabelled by a centralized poisoning run.
    pub central_flipped_rows: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CellKey {
    pub dataset: DatasetId,
    pub model: ModelKind,
    pub condition: Condition,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct SuiteOutcome {
    pub table: ResultsTable,
    pub cells: Vec<(CellKey, ConditionOutcome)>,
}

/// Model seed for a repetition; shared by all four conditions so that they
/// differ only in what the condition changes.
pub fn training_seed(master_seed: u64) -> u64 {
    seed::derive(master_seed, seed::TRAIN)
}

/// Attack seed for a repetition.
pub fn attack_seed(cfg: &ExperimentConfig, master_seed: u64) -> u64 {
    seed::derive(master_seed ^ cfg.attack.seed, seed::ATTACK)
}

fn attack_for(cfg: &ExperimentConfig, master_seed: u64) -> AttackConfig {
    AttackConfig {
        seed: attack_seed(cfg, master_seed),
        ..cfg.attack.clone()
    }
}

fn train_config(cfg: &ExperimentConfig, model: ModelKind, master_seed: u64) -> TrainConfig {
    TrainConfig {
        seed: training_seed(master_seed),
        ..cfg.train_config(model)
    }
}

/// Runs one (model, condition) pair for one repetition seed.
pub fn run_condition(
    data: &PreparedDataset,
    cfg: &ExperimentConfig,
    model: ModelKind,
    condition: Condition,
    master_seed: u64,
) -> Result<ConditionOutcome> {
    cfg.validate()?;
    let plan = data.plan(cfg, master_seed)?;
    if condition.is_federated() {
        run_federated_condition(data, cfg, &plan, model, condition, master_seed)
    } else {
        run_central_condition(data, cfg, &plan, model, condition, master_seed)
    }
}

fn run_central_condition(
    data: &PreparedDataset,
    cfg: &ExperimentConfig,
    plan: &[ClientRows],
    model: ModelKind,
    condition: Condition,
    master_seed: u64,
) -> Result<ConditionOutcome> {
    let (mut train, test) = build_pooled(&data.raw, &data.schema, plan)?;
    let mut flipped = Vec::new();
    if condition.is_poisoned() {
        let outcome = flip_labels(&train.labels, train.n_classes, &attack_for(cfg, master_seed))?;
        // pooled order is client 0 train rows, then client 1, ...
        let source: Vec<usize> = plan.iter().flat_map(|c| c.train_rows.iter().copied()).collect();
        flipped = outcome.flipped_indices().into_iter().map(|i| source[i]).collect();
        flipped.sort_unstable();
        train = train.with_labels(outcome.labels)?;
    }
    let trained = models::train(model, &train, &train_config(cfg, model, master_seed), None)?;
    Ok(ConditionOutcome {
        condition,
        report: evaluate(&trained, &test)?,
        budgets: Vec::new(),
        central_flipped_rows: flipped,
    })
}

fn run_federated_condition(
    data: &PreparedDataset,
    cfg: &ExperimentConfig,
    plan: &[ClientRows],
    model: ModelKind,
    condition: Condition,
    master_seed: u64,
) -> Result<ConditionOutcome> {
    let partitions = build_client_partitions(&data.raw, &data.schema, plan)?;
    let train_cfg = train_config(cfg, model, master_seed);
    let attack = condition.is_poisoned().then(|| attack_for(cfg, master_seed));
    let budgets: Vec<usize> = match cfg.fl_averaging {
        FlAveraging::RoundBudgets => cfg.round_budgets.clone(),
        FlAveraging::RoundSnapshots => vec![*cfg.round_budgets.iter().max().expect("validated")],
    };
    let mut outcomes = Vec::with_capacity(budgets.len());
    for rounds in budgets {
        let fed = FederationConfig {
            n_clients: cfg.n_clients,
            rounds,
            local_epochs: cfg
                .training
                .local_epochs
                .unwrap_or_else(|| local_epochs_for(train_cfg.epochs, rounds)),
            model_kind: model,
            train_cfg: train_cfg.clone(),
            seed: train_cfg.seed,
        };
        let run = run_federated(&partitions, &fed, attack.as_ref())?;
        let report = match cfg.fl_averaging {
            FlAveraging::RoundBudgets => run
                .log
                .records
                .last()
                .map(|r| r.global_test)
                .ok_or_else(|| Error::Invariant("federated run logged no rounds".into()))?,
            FlAveraging::RoundSnapshots => {
                let snaps: Vec<MetricsReport> = run.log.records.iter().map(|r| r.global_test).collect();
                MetricsReport::mean(&snaps)?
            }
        };
        outcomes.push(BudgetOutcome {
            rounds,
            report,
            log: run.log,
            flip_masks: run.flip_masks,
        });
    }
    let reports: Vec<MetricsReport> = outcomes.iter().map(|o| o.report).collect();
    Ok(ConditionOutcome {
        condition,
        report: MetricsReport::mean(&reports)?,
        budgets: outcomes,
        central_flipped_rows: Vec::new(),
    })
}

/// Loads every configured dataset and runs the grid.
pub fn run_suite(cfg: &ExperimentConfig) -> Result<SuiteOutcome> {
    cfg.validate()?;
    let data = cfg
        .datasets
        .iter()
        .map(PreparedDataset::load)
        .collect::<Result<Vec<_>>>()?;
    run_suite_on(cfg, &data)
}

/// Runs every (dataset, model, condition, seed) cell in parallel. Cells are
/// independent and individually seeded, so the output does not depend on
/// scheduling.
pub fn run_suite_on(cfg: &ExperimentConfig, data: &[PreparedDataset]) -> Result<SuiteOutcome> {
    cfg.validate()?;
    let mut keys = Vec::new();
    for d in data {
        for &model in &cfg.models {
            for &condition in &cfg.conditions {
                for &seed in &cfg.seeds {
                    keys.push((d, CellKey {
                        dataset: d.id,
                        model,
                        condition,
                        seed,
                    }));
                }
            }
        }
    }
    let cells = keys
        .into_par_iter()
        .map(|(d, key)| {
            run_condition(d, cfg, key.model, key.condition, key.seed).map(|outcome| (key, outcome))
        })
        .collect::<Result<Vec<_>>>()?;
    let table = ResultsTable::from_cells(cfg, &cells)?;
    Ok(SuiteOutcome { table, cells })
}

/// Summary of a data file that passed [`check_dataset`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataCheck {
    pub id: DatasetId,
    pub rows: usize,
    /// `(class name, count)` in schema order.
    pub class_counts: Vec<(String, usize)>,
}

/// Loads a configured dataset and checks it is the published file: header
/// and cell types per schema, target classes known, and the published row
/// count.
pub fn check_dataset(spec: &DatasetSpec) -> Result<DataCheck> {
    let data = PreparedDataset::load(spec)?;
    let expected = spec.id.expected_rows();
    if data.labels.len() != expected {
        return Err(Error::UnexpectedRowCount {
            expected,
            found: data.labels.len(),
        });
    }
    let mut counts = vec![0usize; data.n_classes()];
    for &y in &data.labels {
        counts[y] += 1;
    }
    Ok(DataCheck {
        id: spec.id,
        rows: data.labels.len(),
        class_counts: data.schema.target_classes.iter().cloned().zip(counts).collect(),
    })
}
