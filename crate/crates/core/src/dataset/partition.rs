use serde::{Deserialize, Serialize};

use crate::dataset::encoding::{encode_rows, fit_encoding_stats, EncodedDataset};
use crate::dataset::schema::FeatureSchema;
use crate::dataset::split::{partition_clients, stratified_split_indices};
use crate::dataset::table::RawTable;
use crate::error::{Error, Result};
use crate::seed;

/// Which original rows a client trains and tests on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClientRows {
    pub client_id: usize,
    pub train_rows: Vec<usize>,
    pub test_rows: Vec<usize>,
}

/// One client's encoded local data. Each client fits its own encoding
/// statistics on its own training rows.
#[derive(Debug, Clone)]
pub struct ClientPartition {
    pub client_id: usize,
    pub train: EncodedDataset,
    pub test: EncodedDataset,
    pub rows: ClientRows,
}

/// Splits rows across clients (stratified IID), then splits each client's
/// rows into local train/test sets.
pub fn plan_clients(
    labels: &[usize],
    n_classes: usize,
    n_clients: usize,
    test_fraction: f64,
    master_seed: u64,
) -> Result<Vec<ClientRows>> {
    let assignments = partition_clients(
        labels,
        n_classes,
        n_clients,
        seed::derive(master_seed, seed::PARTITION),
    )?;
    assignments
        .into_iter()
        .enumerate()
        .map(|(client_id, rows)| {
            let local_labels: Vec<usize> = rows.iter().map(|&r| labels[r]).collect();
            let split_seed = seed::derive(seed::client(master_seed, client_id), seed::LOCAL_SPLIT);
            let (train, test) = local_split(&local_labels, n_classes, test_fraction, split_seed)?;
            Ok(ClientRows {
                client_id,
                train_rows: train.iter().map(|&i| rows[i]).collect(),
                test_rows: test.iter().map(|&i| rows[i]).collect(),
            })
        })
        .collect()
}

/// Stratified split over the classes actually present on the client; a
/// client can lack a class entirely when the data are tiny.
fn local_split(
    labels: &[usize],
    n_classes: usize,
    test_fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut present: Vec<usize> = labels.to_vec();
    present.sort_unstable();
    present.dedup();
    let remap: Vec<usize> = labels
        .iter()
        .map(|y| present.binary_search(y).expect("label is present"))
        .collect();
    debug_assert!(present.len() <= n_classes);
    stratified_split_indices(&remap, present.len(), test_fraction, seed)
}

pub fn build_client_partitions(
    raw: &RawTable,
    schema: &FeatureSchema,
    plan: &[ClientRows],
) -> Result<Vec<ClientPartition>> {
    let parts = plan
        .iter()
        .map(|rows| {
            let stats = fit_encoding_stats(raw, schema, &rows.train_rows)?;
            Ok(ClientPartition {
                client_id: rows.client_id,
                train: encode_rows(raw, schema, &stats, &rows.train_rows)?,
                test: encode_rows(raw, schema, &stats, &rows.test_rows)?,
                rows: rows.clone(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    check_plan(raw.n_rows(), plan)?;
    Ok(parts)
}

/// Centralized view of the same plan: every client's training rows pooled
/// and encoded with statistics fitted on the pool, and every client's test
/// rows pooled as the evaluation set.
pub fn build_pooled(
    raw: &RawTable,
    schema: &FeatureSchema,
    plan: &[ClientRows],
) -> Result<(EncodedDataset, EncodedDataset)> {
    check_plan(raw.n_rows(), plan)?;
    let train_rows: Vec<usize> = plan.iter().flat_map(|c| c.train_rows.iter().copied()).collect();
    let test_rows: Vec<usize> = plan.iter().flat_map(|c| c.test_rows.iter().copied()).collect();
    let stats = fit_encoding_stats(raw, schema, &train_rows)?;
    Ok((
        encode_rows(raw, schema, &stats, &train_rows)?,
        encode_rows(raw, schema, &stats, &test_rows)?,
    ))
}

/// Train/test sets are disjoint and all sets together cover each row once.
fn check_plan(n_rows: usize, plan: &[ClientRows]) -> Result<()> {
    let mut seen = vec![false; n_rows];
    for client in plan {
        for &r in client.train_rows.iter().chain(&client.test_rows) {
            if r >= n_rows || seen[r] {
                return Err(Error::Invariant(format!(
                    "row {r} assigned twice or out of range"
                )));
            }
            seen[r] = true;
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::Invariant("client plan does not cover every row".into()));
    }
    Ok(())
}
