//! The comparison grid: datasets × models × conditions × seeds, reduced to
//! one table.

mod config;
mod report;
mod runner;

pub use config::{
    Binarize, Condition, DatasetId, DatasetSpec, ExperimentConfig, FlAveraging, OutputConfig,
    ReportFormat, TrainOverrides, TrainingSection,
};
pub use report::{
    format_value, write_file, write_flip_masks, write_round_log, Metric, ResultsTable, TableRow, COLUMNS,
};
pub use runner::{
    attack_seed, check_dataset, run_condition, run_suite, run_suite_on, training_seed, BudgetOutcome, CellKey, DataCheck,
    ConditionOutcome, PreparedDataset, SuiteOutcome,
};
