use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::MetricsReport;
use crate::models::ModelKind;

use super::config::{Condition, DatasetId, ExperimentConfig, FlAveraging, ReportFormat};
use super::runner::{CellKey, ConditionOutcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Metric {
    Accuracy,
    Recall,
    #[serde(rename = "F1-Score")]
    F1,
    #[serde(rename = "AUCROC")]
    AucRoc,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::Accuracy, Metric::Recall, Metric::F1, Metric::AucRoc];

    pub fn label(self) -> &'static str {
        match self {
            Metric::Accuracy => "Accuracy",
            Metric::Recall => "Recall",
            Metric::F1 => "F1-Score",
            Metric::AucRoc => "AUCROC",
        }
    }

    /// Accuracy is a percentage and gets 2 decimals; the rest get 4.
    pub fn decimals(self) -> usize {
        match self {
            Metric::Accuracy => 2,
            _ => 4,
        }
    }

    pub fn of(self, r: &MetricsReport) -> f64 {
        match self {
            Metric::Accuracy => r.accuracy_pct,
            Metric::Recall => r.recall,
            Metric::F1 => r.f1,
            Metric::AucRoc => r.auc_roc,
        }
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.label() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown metric {s:?}")))
    }
}

/// One line of the comparison table. A column is `None` when its condition
/// was not part of the run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub dataset: DatasetId,
    pub model: ModelKind,
    pub metric: Metric,
    pub standard_ml: Option<f64>,
    pub fl: Option<f64>,
    /// `standard_ml - fl`; positive when centralized training scored higher.
    pub difference: Option<f64>,
    pub standard_poisoned: Option<f64>,
    pub poisoned_fl: Option<f64>,
    /// `|poisoned_fl - standard_poisoned|`.
    pub differences: Option<f64>,
}

impl TableRow {
    pub fn new(
        dataset: DatasetId,
        model: ModelKind,
        metric: Metric,
        standard_ml: Option<f64>,
        fl: Option<f64>,
        standard_poisoned: Option<f64>,
        poisoned_fl: Option<f64>,
    ) -> Self {
        TableRow {
            dataset,
            model,
            metric,
            standard_ml,
            fl,
            difference: standard_ml.zip(fl).map(|(s, f)| s - f),
            standard_poisoned,
            poisoned_fl,
            differences: poisoned_fl.zip(standard_poisoned).map(|(p, s)| (p - s).abs()),
        }
    }

    fn values(&self) -> [Option<f64>; 6] {
        [
            self.standard_ml,
            self.fl,
            self.difference,
            self.standard_poisoned,
            self.poisoned_fl,
            self.differences,
        ]
    }

    fn with_values(&self, v: [Option<f64>; 6]) -> Self {
        TableRow {
            standard_ml: v[0],
            fl: v[1],
            difference: v[2],
            standard_poisoned: v[3],
            poisoned_fl: v[4],
            differences: v[5],
            ..*self
        }
    }
}

pub const COLUMNS: [&str; 9] = [
    "dataset",
    "model",
    "metric",
    "standard_ml",
    "fl",
    "difference",
    "standard_poisoned",
    "poisoned_fl",
    "differences",
];

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ResultsTable {
    pub notes: Vec<String>,
    pub rows: Vec<TableRow>,
}

/// Fixed-precision text for a value; `-0` is printed as `0`.
pub fn format_value(v: f64, decimals: usize) -> String {
    let s = format!("{v:.decimals$}");
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

fn round_to(v: f64, decimals: usize) -> f64 {
    format_value(v, decimals).parse().expect("formatted float parses")
}

impl ResultsTable {
    /// Averages cell outcomes over seeds and lays them out dataset by
    /// dataset, model by model, metric by metric.
    pub fn from_cells(cfg: &ExperimentConfig, cells: &[(CellKey, ConditionOutcome)]) -> Result<Self> {
        let mut grouped: BTreeMap<(DatasetId, ModelKind, Condition), Vec<MetricsReport>> = BTreeMap::new();
        let mut datasets: Vec<DatasetId> = Vec::new();
        for (key, outcome) in cells {
            if !datasets.contains(&key.dataset) {
                datasets.push(key.dataset);
            }
            grouped
                .entry((key.dataset, key.model, key.condition))
                .or_default()
                .push(outcome.report);
        }
        let mut means = BTreeMap::new();
        for (k, reports) in grouped {
            means.insert(k, MetricsReport::mean(&reports)?);
        }
        let mut rows = Vec::new();
        for &dataset in &datasets {
            for &model in &cfg.models {
                let get = |c: Condition| means.get(&(dataset, model, c));
                if Condition::ALL.iter().all(|&c| get(c).is_none()) {
                    continue;
                }
                for metric in Metric::ALL {
                    let v = |c: Condition| get(c).map(|r| metric.of(r));
                    rows.push(TableRow::new(
                        dataset,
                        model,
                        metric,
                        v(Condition::CentralClean),
                        v(Condition::FlClean),
                        v(Condition::CentralPoisoned),
                        v(Condition::FlPoisoned),
                    ));
                }
            }
        }
        Ok(ResultsTable {
            notes: notes_for(cfg),
            rows,
        })
    }

    /// The table as it reads after a trip through a report file.
    pub fn rounded(&self) -> Self {
        ResultsTable {
            notes: self.notes.clone(),
            rows: self
                .rows
                .iter()
                .map(|r| {
                    let d = r.metric.decimals();
                    r.with_values(r.values().map(|v| v.map(|x| round_to(x, d))))
                })
                .collect(),
        }
    }

    pub fn find(&self, dataset: DatasetId, model: ModelKind, metric: Metric) -> Option<&TableRow> {
        self.rows
            .iter()
            .find(|r| r.dataset == dataset && r.model == model && r.metric == metric)
    }

    pub fn render(&self, format: ReportFormat) -> Result<String> {
        match format {
            ReportFormat::Delimited => Ok(self.to_delimited()),
            ReportFormat::Structured => self.to_structured(),
            ReportFormat::Human => Ok(self.to_human()),
        }
    }

    pub fn to_delimited(&self) -> String {
        let mut out = String::new();
        for note in &self.notes {
            writeln!(out, "# {note}").unwrap();
        }
        writeln!(out, "{}", COLUMNS.join(",")).unwrap();
        for r in &self.rows {
            let d = r.metric.decimals();
            let mut fields = vec![r.dataset.to_string(), r.model.to_string(), r.metric.label().to_string()];
            fields.extend(
                r.values()
                    .iter()
                    .map(|v| v.map(|x| format_value(x, d)).unwrap_or_default()),
            );
            writeln!(out, "{}", fields.join(",")).unwrap();
        }
        out
    }

    pub fn parse_delimited(text: &str) -> Result<Self> {
        let bad = |line: usize, msg: String| Error::InvalidConfig(format!("results line {line}: {msg}"));
        let mut notes = Vec::new();
        let mut rows = Vec::new();
        let mut saw_header = false;
        for (i, line) in text.lines().enumerate() {
            let n = i + 1;
            if let Some(note) = line.strip_prefix('#') {
                notes.push(note.strip_prefix(' ').unwrap_or(note).to_string());
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != COLUMNS.len() {
                return Err(bad(n, format!("expected {} fields, found {}", COLUMNS.len(), fields.len())));
            }
            if !saw_header {
                if fields != COLUMNS {
                    return Err(bad(n, "unexpected header".into()));
                }
                saw_header = true;
                continue;
            }
            let mut vals = [None; 6];
            for (slot, f) in vals.iter_mut().zip(&fields[3..]) {
                if !f.is_empty() {
                    *slot = Some(f.parse::<f64>().map_err(|e| bad(n, format!("{f:?}: {e}")))?);
                }
            }
            let base = TableRow::new(
                fields[0].parse()?,
                fields[1].parse()?,
                fields[2].parse()?,
                None,
                None,
                None,
                None,
            );
            rows.push(base.with_values(vals));
        }
        if !saw_header {
            return Err(bad(0, "missing header".into()));
        }
        Ok(ResultsTable { notes, rows })
    }

    pub fn to_structured(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Doc<'a> {
            format_version: u32,
            notes: &'a [String],
            rows: &'a [TableRow],
        }
        let rounded = self.rounded();
        let mut s = serde_json::to_string_pretty(&Doc {
            format_version: 1,
            notes: &rounded.notes,
            rows: &rounded.rows,
        })?;
        s.push('\n');
        Ok(s)
    }

    pub fn parse_structured(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Doc {
            format_version: u32,
            notes: Vec<String>,
            rows: Vec<TableRow>,
        }
        let doc: Doc = serde_json::from_str(text)?;
        if doc.format_version != 1 {
            return Err(Error::InvalidConfig(format!(
                "unsupported results format_version {}",
                doc.format_version
            )));
        }
        Ok(ResultsTable {
            notes: doc.notes,
            rows: doc.rows,
        })
    }

    pub fn to_human(&self) -> String {
        let headers = [
            "Dataset",
            "Model",
            "Metric",
            "Standard ML",
            "FL",
            "Difference",
            "Standard Poisoned",
            "Poisoned FL",
            "Differences",
        ];
        let mut table: Vec<Vec<String>> = vec![headers.iter().map(|s| s.to_string()).collect()];
        for r in &self.rows {
            let d = r.metric.decimals();
            let mut line = vec![r.dataset.to_string(), r.model.label().to_string(), r.metric.label().to_string()];
            line.extend(
                r.values()
                    .iter()
                    .map(|v| v.map(|x| format_value(x, d)).unwrap_or_else(|| "-".into())),
            );
            table.push(line);
        }
        let widths: Vec<usize> = (0..headers.len())
            .map(|c| table.iter().map(|l| l[c].len()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for note in &self.notes {
            writeln!(out, "{note}").unwrap();
        }
        if !self.notes.is_empty() {
            out.push('\n');
        }
        for (i, line) in table.iter().enumerate() {
            let cells: Vec<String> = line
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(c, (s, w))| if c < 3 { format!("{s:<w$}") } else { format!("{s:>w$}") })
                .collect();
            writeln!(out, "{}", cells.join("  ").trim_end()).unwrap();
            if i == 0 {
                let rule: usize = widths.iter().sum::<usize>() + 2 * (widths.len() - 1);
                writeln!(out, "{}", "-".repeat(rule)).unwrap();
            }
        }
        out
    }
}

fn notes_for(cfg: &ExperimentConfig) -> Vec<String> {
    let clients: Vec<String> = cfg.attack.malicious_clients.iter().map(|c| c.to_string()).collect();
    let averaging = match cfg.fl_averaging {
        FlAveraging::RoundBudgets => format!(
            "FL columns: mean over separate runs with round budgets {:?}",
            cfg.round_budgets
        ),
        FlAveraging::RoundSnapshots => format!(
            "FL columns: mean of per-round global metrics within one run of {} rounds",
            cfg.round_budgets.iter().max().copied().unwrap_or(0)
        ),
    };
    vec![
        "difference = standard_ml - fl (positive: centralized scored higher)".into(),
        "differences = |poisoned_fl - standard_poisoned| (unsigned)".into(),
        format!(
            "standard_poisoned flips {} of all pooled training labels; poisoned_fl flips {} of the training labels on client(s) {} only",
            cfg.attack.flip_fraction,
            cfg.attack.flip_fraction,
            clients.join(" ")
        ),
        averaging,
        format!(
            "clients: {}; test fraction per client: {}; seeds averaged: {:?}",
            cfg.n_clients, cfg.test_fraction, cfg.seeds
        ),
        "accuracy in percent (2 decimals); recall, f1 and auc are macro averages (4 decimals)".into(),
    ]
}

/// One JSON object per logged round of every federated run.
pub fn write_round_log(path: &Path, cells: &[(CellKey, ConditionOutcome)]) -> Result<()> {
    #[derive(Serialize)]
    struct Line<'a> {
        #[serde(flatten)]
        key: &'a CellKey,
        rounds: usize,
        round: usize,
        client_train_counts: &'a [usize],
        client_train_accuracy: &'a [f64],
        global_test: &'a MetricsReport,
    }
    let mut out = Vec::new();
    for (key, outcome) in cells {
        for b in &outcome.budgets {
            for r in &b.log.records {
                serde_json::to_writer(
                    &mut out,
                    &Line {
                        key,
                        rounds: b.rounds,
                        round: r.round,
                        client_train_counts: &r.client_train_counts,
                        client_train_accuracy: &r.client_train_accuracy,
                        global_test: &r.global_test,
                    },
                )?;
                out.push(b'\n');
            }
        }
    }
    write_file(path, &out)
}

/// One JSON object per poisoned training set: the source-table rows whose
/// labels were flipped. `client_id` is null for centralized poisoning.
pub fn write_flip_masks(path: &Path, cells: &[(CellKey, ConditionOutcome)]) -> Result<()> {
    #[derive(Serialize)]
    struct Line<'a> {
        #[serde(flatten)]
        key: &'a CellKey,
        rounds: Option<usize>,
        client_id: Option<usize>,
        source_rows: &'a [usize],
    }
    let mut out = Vec::new();
    let mut push = |line: &Line| -> Result<()> {
        serde_json::to_writer(&mut out, line)?;
        out.push(b'\n');
        Ok(())
    };
    for (key, outcome) in cells.iter().filter(|(k, _)| k.condition.is_poisoned()) {
        if !key.condition.is_federated() {
            push(&Line {
                key,
                rounds: None,
                client_id: None,
                source_rows: &outcome.central_flipped_rows,
            })?;
        }
        for b in &outcome.budgets {
            for m in &b.flip_masks {
                push(&Line {
                    key,
                    rounds: Some(b.rounds),
                    client_id: Some(m.client_id),
                    source_rows: &m.source_rows,
                })?;
            }
        }
    }
    write_file(path, &out)
}

/// Writes `bytes`, creating missing parent directories.
pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(bytes).map_err(|e| Error::io(path, e))
}
