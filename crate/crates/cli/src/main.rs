use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sha2::{Digest, Sha256};

use fedlearn_edu::experiment::{
    check_dataset, run_suite, write_file, write_flip_masks, write_round_log, Condition, DatasetId,
    DatasetSpec, ExperimentConfig, ReportFormat,
};
use fedlearn_edu::models::ModelKind;
use fedlearn_edu::{Error, Result};

#[derive(Parser)]
#[command(name = "fedlearn", version, about = "Centralized vs federated training under label flipping")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment grid and write the results table.
    Run(Box<RunArgs>),
    /// Check a config file and the data files it names, without training.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Verify the two data files in a directory and print their digests.
    FetchData {
        #[arg(long)]
        dest: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Keep only these datasets (A, B).
    #[arg(long, value_delimiter = ',')]
    dataset: Vec<DatasetId>,
    #[arg(long, value_delimiter = ',')]
    model: Vec<ModelKind>,
    #[arg(long, value_delimiter = ',')]
    condition: Vec<Condition>,
    /// Round budgets, e.g. `2,4,6,8,10`.
    #[arg(long, value_delimiter = ',')]
    rounds: Vec<usize>,
    #[arg(long)]
    clients: Option<usize>,
    #[arg(long)]
    flip_fraction: Option<f64>,
    /// Master seeds, e.g. `1,2,3`.
    #[arg(long, value_delimiter = ',')]
    seed: Vec<u64>,
    /// Results file; stdout when neither this nor the config sets one.
    #[arg(long)]
    output: Option<PathBuf>,
    /// delimited, structured or human.
    #[arg(long)]
    format: Option<ReportFormat>,
    /// JSON-lines file with one record per federated round.
    #[arg(long)]
    round_log: Option<PathBuf>,
    /// JSON-lines file listing the rows each attack relabelled.
    #[arg(long)]
    flip_masks: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Run(args) => run(*args),
        Command::Validate { config } => validate(&config),
        Command::FetchData { dest } => fetch_data(&dest),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn apply_overrides(cfg: &mut ExperimentConfig, args: &RunArgs) -> Result<()> {
    if !args.dataset.is_empty() {
        cfg.datasets.retain(|d| args.dataset.contains(&d.id));
        for id in &args.dataset {
            if cfg.dataset(*id).is_none() {
                return Err(Error::InvalidConfig(format!("dataset {id} is not in the config")));
            }
        }
    }
    if !args.model.is_empty() {
        cfg.models = args.model.clone();
    }
    if !args.condition.is_empty() {
        cfg.conditions = args.condition.clone();
    }
    if !args.rounds.is_empty() {
        cfg.round_budgets = args.rounds.clone();
    }
    if let Some(c) = args.clients {
        cfg.n_clients = c;
    }
    if let Some(p) = args.flip_fraction {
        cfg.attack.flip_fraction = p;
    }
    if !args.seed.is_empty() {
        cfg.seeds = args.seed.clone();
    }
    if let Some(o) = &args.output {
        cfg.output.path = Some(o.clone());
    }
    if let Some(f) = args.format {
        cfg.output.format = f;
    }
    if let Some(p) = &args.round_log {
        cfg.output.round_log = Some(p.clone());
    }
    cfg.validate()
}

fn run(args: RunArgs) -> Result<()> {
    let mut cfg = ExperimentConfig::from_toml_file(&args.config)?;
    apply_overrides(&mut cfg, &args)?;
    let outcome = run_suite(&cfg)?;
    let text = outcome.table.render(cfg.output.format)?;
    match &cfg.output.path {
        Some(path) => write_file(path, text.as_bytes())?,
        None => print!("{text}"),
    }
    if let Some(path) = &cfg.output.round_log {
        write_round_log(path, &outcome.cells)?;
    }
    if let Some(path) = &args.flip_masks {
        write_flip_masks(path, &outcome.cells)?;
    }
    Ok(())
}

fn validate(config: &Path) -> Result<()> {
    let cfg = ExperimentConfig::from_toml_file(config)?;
    for spec in &cfg.datasets {
        let schema = spec.load_schema()?;
        let table = fedlearn_edu::dataset::load_table(&spec.path, &schema)?;
        let data = fedlearn_edu::experiment::PreparedDataset::from_raw(
            spec.id,
            schema,
            table,
            spec.binarize_rule().as_ref(),
        )?;
        println!(
            "dataset {}: {} rows, {} classes, {}",
            spec.id,
            data.labels.len(),
            data.n_classes(),
            spec.path.display()
        );
    }
    println!(
        "config ok: {} dataset(s) x {} model(s) x {} condition(s) x {} seed(s)",
        cfg.datasets.len(),
        cfg.models.len(),
        cfg.conditions.len(),
        cfg.seeds.len()
    );
    Ok(())
}

const SOURCES: [(DatasetId, &str, &str); 2] = [
    (
        DatasetId::A,
        "https://archive.ics.uci.edu/dataset/320/student+performance",
        "student-mat.csv from the student.zip archive (';'-separated)",
    ),
    (
        DatasetId::B,
        "https://archive.ics.uci.edu/dataset/697/predict+students+dropout+and+academic+success",
        "data.csv (';'-separated)",
    ),
];

fn sha256_hex(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

fn fetch_data(dest: &Path) -> Result<()> {
    let mut missing = Vec::new();
    for (id, url, what) in SOURCES {
        let path = dest.join(id.default_file());
        if !path.is_file() {
            println!("dataset {id}: missing {}", path.display());
            println!("  download {url}");
            println!("  and place {what} at {}", path.display());
            missing.push(path);
            continue;
        }
        let check = check_dataset(&DatasetSpec::new(id, &path))?;
        let classes: Vec<String> = check
            .class_counts
            .iter()
            .map(|(name, n)| format!("{name}={n}"))
            .collect();
        println!(
            "dataset {id}: ok, {} rows, {}, sha256 {}",
            check.rows,
            classes.join(" "),
            sha256_hex(&path)?
        );
    }
    match missing.into_iter().next() {
        Some(path) => Err(Error::FileNotFound(path)),
        None => Ok(()),
    }
}
