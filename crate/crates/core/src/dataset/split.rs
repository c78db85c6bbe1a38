use rand::seq::SliceRandom;

use crate::dataset::encoding::EncodedDataset;
use crate::error::{Error, Result};
use crate::seed;

fn by_class(labels: &[usize], n_classes: usize) -> Result<Vec<Vec<usize>>> {
    let mut groups = vec![Vec::new(); n_classes];
    for (i, &y) in labels.iter().enumerate() {
        if y >= n_classes {
            return Err(Error::ShapeMismatch(format!(
                "label {y} out of range for {n_classes} classes"
            )));
        }
        groups[y].push(i);
    }
    Ok(groups)
}

/// Per-class test quotas: floor of the proportional share, then the
/// remaining slots go to the largest fractional remainders (ties to the
/// lower class) so the total is `round(test_fraction * n)`. No class may
/// be left without a training sample.
pub fn stratified_quotas(class_sizes: &[usize], test_fraction: f64) -> Result<Vec<usize>> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidFraction(test_fraction));
    }
    let n: usize = class_sizes.iter().sum();
    let target = (test_fraction * n as f64).round() as usize;
    let mut quotas = Vec::with_capacity(class_sizes.len());
    let mut remainders = Vec::new();
    for (c, &size) in class_sizes.iter().enumerate() {
        let share = test_fraction * size as f64;
        let base = share.floor() as usize;
        quotas.push(base);
        remainders.push((share - base as f64, c));
    }
    remainders.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));

    let mut missing = target.saturating_sub(quotas.iter().sum());
    for &(_, c) in &remainders {
        if missing == 0 {
            break;
        }
        if class_sizes[c] > 0 && quotas[c] + 1 < class_sizes[c] {
            quotas[c] += 1;
            missing -= 1;
        }
    }
    for (c, (&q, &size)) in quotas.iter().zip(class_sizes).enumerate() {
        if size > 0 && q >= size {
            return Err(Error::StratificationImpossible { class: c });
        }
    }
    if missing > 0 {
        let class = remainders.first().map(|r| r.1).unwrap_or(0);
        return Err(Error::StratificationImpossible { class });
    }
    Ok(quotas)
}

/// Returns `(train, test)` row indices, each sorted ascending.
pub fn stratified_split_indices(
    labels: &[usize],
    n_classes: usize,
    test_fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut groups = by_class(labels, n_classes)?;
    if let Some(c) = groups.iter().position(|g| g.is_empty()) {
        return Err(Error::StratificationImpossible { class: c });
    }
    let sizes: Vec<usize> = groups.iter().map(Vec::len).collect();
    let quotas = stratified_quotas(&sizes, test_fraction)?;

    let mut rng = seed::rng(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (group, quota) in groups.iter_mut().zip(quotas) {
        group.shuffle(&mut rng);
        test.extend_from_slice(&group[..quota]);
        train.extend_from_slice(&group[quota..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

pub fn stratified_split(
    data: &EncodedDataset,
    test_fraction: f64,
    seed: u64,
) -> Result<(EncodedDataset, EncodedDataset)> {
    let (train, test) = stratified_split_indices(&data.labels, data.n_classes, test_fraction, seed)?;
    Ok((data.select(&train), data.select(&test)))
}

/// Label-stratified IID assignment of rows to `n_clients` clients. Rows
/// are shuffled within each class, the classes laid end to end, and the
/// sequence dealt round-robin, so client sizes and per-class counts
/// differ by at most one. Each returned set is sorted.
pub fn partition_clients(
    labels: &[usize],
    n_classes: usize,
    n_clients: usize,
    seed: u64,
) -> Result<Vec<Vec<usize>>> {
    if n_clients == 0 || labels.len() < n_clients {
        return Err(Error::TooManyClients {
            clients: n_clients,
            rows: labels.len(),
        });
    }
    let mut groups = by_class(labels, n_classes)?;
    let mut rng = seed::rng(seed);
    let mut clients = vec![Vec::new(); n_clients];
    let mut next = 0;
    for group in groups.iter_mut() {
        group.shuffle(&mut rng);
        for &row in group.iter() {
            clients[next].push(row);
            next = (next + 1) % n_clients;
        }
    }
    for c in &mut clients {
        c.sort_unstable();
    }
    Ok(clients)
}
