//! Simulated federated training: local training on each client, server
//! aggregation, broadcast, repeat.
//!
//! Linear models are combined by FedAvg, a sample-count-weighted mean of
//! weights and biases, and each round warm-starts from the previous global
//! model. Forests cannot be averaged parameter-wise, so the global forest
//! for a round is the union of every client's freshly grown forest and
//! replaces the previous one.
//!
//! The only values that cross client boundaries are model contents and
//! training-sample counts.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attack::{flip_labels, AttackConfig};
use crate::dataset::{ClientPartition, EncodedDataset};
use crate::error::{Error, Result};
use crate::metrics::{self, MetricsReport};
use crate::models::{self, Forest, LinearModel, Model, ModelKind, TrainConfig};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FederationConfig {
    pub n_clients: usize,
    pub rounds: usize,
    pub local_epochs: usize,
    pub model_kind: ModelKind,
    pub train_cfg: TrainConfig,
    pub seed: u64,
}

impl FederationConfig {
    /// Defaults with the local epoch budget set so that
    /// `rounds * local_epochs` covers the centralized epoch budget.
    pub fn new(model_kind: ModelKind, rounds: usize, seed: u64) -> Self {
        let train_cfg = TrainConfig::defaults_for(model_kind);
        FederationConfig {
            n_clients: 3,
            rounds,
            local_epochs: local_epochs_for(train_cfg.epochs, rounds),
            model_kind,
            train_cfg,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_clients == 0 || self.rounds == 0 || self.local_epochs == 0 {
            return Err(Error::InvalidConfig(
                "n_clients, rounds and local_epochs must all be >= 1".into(),
            ));
        }
        self.train_cfg.validate()
    }
}

/// `ceil(total_epochs / rounds)`, at least 1.
pub fn local_epochs_for(total_epochs: usize, rounds: usize) -> usize {
    total_epochs.div_ceil(rounds.max(1)).max(1)
}

/// A client's view during a run. `train` holds poisoned labels on
/// malicious clients.
#[derive(Debug, Clone)]
pub struct ClientState {
    pub client_id: usize,
    pub train: EncodedDataset,
    pub test: EncodedDataset,
    pub local_model: Option<Model>,
    pub poisoned: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: usize,
    pub client_train_counts: Vec<usize>,
    pub client_train_accuracy: Vec<f64>,
    pub global_test: MetricsReport,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RoundLog {
    pub records: Vec<RoundRecord>,
}

impl RoundLog {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Which training rows of a malicious client were relabeled, both as
/// local indices and as original table rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClientFlipMask {
    pub client_id: usize,
    pub local_indices: Vec<usize>,
    pub source_rows: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct FederatedRun {
    pub global: Model,
    pub log: RoundLog,
    pub flip_masks: Vec<ClientFlipMask>,
}

/// FedAvg: element-wise mean of weights and biases, model `i` weighted by
/// `counts[i] / sum(counts)`.
pub fn aggregate_parametric(models: &[LinearModel], counts: &[usize]) -> Result<LinearModel> {
    let first = models.first().ok_or(Error::EmptyInput)?;
    if counts.len() != models.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} models but {} sample counts",
            models.len(),
            counts.len()
        )));
    }
    if counts.contains(&0) {
        return Err(Error::InvalidConfig("sample counts must be positive".into()));
    }
    for m in models {
        if m.kind != first.kind || m.n_classes != first.n_classes || m.weights.dim() != first.weights.dim() {
            return Err(Error::ShapeMismatch(
                "client models differ in kind or shape".into(),
            ));
        }
    }
    let total: usize = counts.iter().sum();
    let mut global = LinearModel::zeros(first.kind, first.n_classes, first.n_features());
    for (m, &c) in models.iter().zip(counts) {
        let share = c as f64 / total as f64;
        global.weights.scaled_add(share, &m.weights);
        global.bias.scaled_add(share, &m.bias);
    }
    Ok(global)
}

/// Union of all member trees; the merged forest's score is the mean over
/// every member tree.
pub fn aggregate_forests(forests: &[Forest]) -> Result<Forest> {
    let first = forests.first().ok_or(Error::EmptyInput)?;
    if forests
        .iter()
        .any(|f| f.n_classes != first.n_classes || f.n_features != first.n_features)
    {
        return Err(Error::ShapeMismatch(
            "client forests differ in class count or feature width".into(),
        ));
    }
    Ok(Forest {
        trees: forests.iter().flat_map(|f| f.trees.iter().cloned()).collect(),
        n_classes: first.n_classes,
        n_features: first.n_features,
    })
}

/// Aggregates models of one kind, weighting linear models by `counts`.
pub fn aggregate(models: &[Model], counts: &[usize]) -> Result<Model> {
    match models.first().ok_or(Error::EmptyInput)? {
        Model::Linear(_) => {
            let linear = models
                .iter()
                .map(|m| match m {
                    Model::Linear(l) => Ok(l.clone()),
                    Model::Forest(_) => Err(Error::ShapeMismatch("mixed model kinds".into())),
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Model::Linear(aggregate_parametric(&linear, counts)?))
        }
        Model::Forest(_) => {
            let forests = models
                .iter()
                .map(|m| match m {
                    Model::Forest(f) => Ok(f.clone()),
                    Model::Linear(_) => Err(Error::ShapeMismatch("mixed model kinds".into())),
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Model::Forest(aggregate_forests(&forests)?))
        }
    }
}

/// Pools every client's test split and scores `global` on it.
pub fn evaluate_global(global: &Model, partitions: &[ClientPartition]) -> Result<MetricsReport> {
    let tests: Vec<&EncodedDataset> = partitions.iter().map(|p| &p.test).collect();
    let pooled = EncodedDataset::concat(&tests)?;
    if pooled.n_features() != global.n_features() {
        return Err(Error::ShapeMismatch(format!(
            "global model has {} features, test data {}",
            global.n_features(),
            pooled.n_features()
        )));
    }
    metrics::evaluate(global, &pooled)
}

fn client_states(
    partitions: &[ClientPartition],
    attack: Option<&AttackConfig>,
) -> Result<(Vec<ClientState>, Vec<ClientFlipMask>)> {
    let mut states = Vec::with_capacity(partitions.len());
    let mut masks = Vec::new();
    for p in partitions {
        let mut train = p.train.clone();
        let mut poisoned = false;
        if let Some(attack) = attack.filter(|a| a.malicious_clients.contains(&p.client_id)) {
            let flipped = flip_labels(&train.labels, train.n_classes, &attack.for_client(p.client_id))?;
            let local_indices = flipped.flipped_indices();
            masks.push(ClientFlipMask {
                client_id: p.client_id,
                source_rows: local_indices.iter().map(|&i| p.rows.train_rows[i]).collect(),
                local_indices,
            });
            train = train.with_labels(flipped.labels)?;
            poisoned = true;
        }
        states.push(ClientState {
            client_id: p.client_id,
            train,
            test: p.test.clone(),
            local_model: None,
            poisoned,
        });
    }
    Ok((states, masks))
}

/// Runs `cfg.rounds` rounds of local training and aggregation. With an
/// attack, malicious clients' training labels are flipped once before the
/// first round and stay flipped.
pub fn run_federated(
    partitions: &[ClientPartition],
    cfg: &FederationConfig,
    attack: Option<&AttackConfig>,
) -> Result<FederatedRun> {
    cfg.validate()?;
    if partitions.len() != cfg.n_clients {
        return Err(Error::InvalidConfig(format!(
            "expected {} client partitions, got {}",
            cfg.n_clients,
            partitions.len()
        )));
    }
    let first = &partitions[0];
    for p in partitions {
        if p.train.n_features() != first.train.n_features() || p.train.n_classes != first.train.n_classes {
            return Err(Error::ShapeMismatch(format!(
                "client {} has width {} / {} classes, client {} has {} / {}",
                p.client_id,
                p.train.n_features(),
                p.train.n_classes,
                first.client_id,
                first.train.n_features(),
                first.train.n_classes
            )));
        }
    }
    if let Some(attack) = attack {
        let max_id = partitions.iter().map(|p| p.client_id).max().unwrap_or(0);
        attack.validate(max_id + 1)?;
    }

    let (mut clients, flip_masks) = client_states(partitions, attack)?;
    // aggregation order follows client ids, not list position
    clients.sort_by_key(|c| c.client_id);
    let counts: Vec<usize> = clients.iter().map(|c| c.train.n_samples()).collect();

    let mut global: Option<Model> = None;
    let mut log = RoundLog::default();
    for round in 0..cfg.rounds {
        let broadcast = global.as_ref().filter(|_| cfg.model_kind.is_parametric());
        let results: Vec<Result<(Model, f64)>> = clients
            .par_iter()
            .map(|client| {
                let local_cfg = TrainConfig {
                    epochs: cfg.local_epochs,
                    seed: seed::derive(seed::client(cfg.seed, client.client_id), round as u64),
                    ..cfg.train_cfg.clone()
                };
                let model = models::train(cfg.model_kind, &client.train, &local_cfg, broadcast)?;
                let predicted = models::predict_labels(&model, &client.train.features)?;
                let acc = metrics::accuracy(&predicted, &client.train.labels)?;
                Ok((model, acc))
            })
            .collect();
        let mut accuracies = Vec::with_capacity(clients.len());
        for (client, result) in clients.iter_mut().zip(results) {
            let (model, acc) = result?;
            client.local_model = Some(model);
            accuracies.push(acc);
        }
        let locals: Vec<Model> = clients
            .iter()
            .map(|c| c.local_model.clone().expect("trained this round"))
            .collect();
        let aggregated = aggregate(&locals, &counts)?;
        log.records.push(RoundRecord {
            round: round + 1,
            client_train_counts: counts.clone(),
            client_train_accuracy: accuracies,
            global_test: evaluate_global(&aggregated, partitions)?,
        });
        global = Some(aggregated);
    }

    Ok(FederatedRun {
        global: global.expect("rounds >= 1"),
        log,
        flip_masks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{LinearKind, TreeNode};
    use ndarray::array;

    fn linear(w: [f64; 2], b: f64) -> LinearModel {
        let mut m = LinearModel::zeros(LinearKind::Logistic, 2, 2);
        m.weights = array![[w[0], w[1]]];
        m.bias[0] = b;
        m
    }

    #[test]
    fn fedavg_examples() {
        let a = linear([0.0, 2.0], 0.0);
        let b = linear([2.0, 0.0], 0.0);
        let mid = aggregate_parametric(&[a, b], &[5, 5]).unwrap();
        assert_eq!(mid.weights, array![[1.0, 1.0]]);

        let a = linear([0.0, 0.0], 0.0);
        let b = linear([4.0, 4.0], 0.0);
        let m = aggregate_parametric(&[a, b], &[1, 3]).unwrap();
        assert_eq!(m.weights, array![[3.0, 3.0]]);

        let same = linear([0.3, -0.7], 0.1);
        let m = aggregate_parametric(&[same.clone(), same.clone()], &[2, 9]).unwrap();
        for (x, y) in m.weights.iter().zip(same.weights.iter()) {
            assert!((x - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn fedavg_errors() {
        assert!(matches!(aggregate_parametric(&[], &[]), Err(Error::EmptyInput)));
        let a = linear([0.0, 0.0], 0.0);
        let wide = LinearModel::zeros(LinearKind::Logistic, 2, 3);
        assert!(matches!(
            aggregate_parametric(&[a.clone(), wide], &[1, 1]),
            Err(Error::ShapeMismatch(_))
        ));
        assert!(aggregate_parametric(std::slice::from_ref(&a), &[1, 2]).is_err());
        assert!(aggregate_parametric(&[a], &[0]).is_err());
    }

    #[test]
    fn forest_union() {
        let leaf = |c: Vec<u64>| TreeNode::Leaf { class_counts: c };
        let f = |n: usize| Forest {
            trees: (0..n).map(|i| leaf(vec![i as u64 + 1, 1])).collect(),
            n_classes: 2,
            n_features: 1,
        };
        let merged = aggregate_forests(&[f(10), f(10), f(10)]).unwrap();
        assert_eq!(merged.trees.len(), 30);
        let single = aggregate_forests(&[f(4)]).unwrap();
        assert_eq!(single, f(4));
        let other = Forest {
            n_features: 2,
            ..f(1)
        };
        assert!(aggregate_forests(&[f(1), other]).is_err());
        assert!(matches!(aggregate_forests(&[]), Err(Error::EmptyInput)));
    }

    #[test]
    fn local_epoch_budget() {
        assert_eq!(local_epochs_for(300, 10), 30);
        assert_eq!(local_epochs_for(300, 8), 38);
        assert_eq!(local_epochs_for(300, 2), 150);
        assert_eq!(local_epochs_for(0, 4), 1);
    }
}
