//! Untargeted random label flipping.

use std::collections::BTreeSet;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AttackMode {
    #[default]
    UntargetedRandom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AttackConfig {
    pub flip_fraction: f64,
    pub malicious_clients: BTreeSet<usize>,
    pub seed: u64,
    pub mode: AttackMode,
}

impl Default for AttackConfig {
    fn default() -> Self {
        AttackConfig {
            flip_fraction: 0.5,
            malicious_clients: BTreeSet::from([0]),
            seed: 0,
            mode: AttackMode::UntargetedRandom,
        }
    }
}

impl AttackConfig {
    pub fn validate(&self, n_clients: usize) -> Result<()> {
        if !(0.0..=1.0).contains(&self.flip_fraction) {
            return Err(Error::InvalidFraction(self.flip_fraction));
        }
        if let Some(&bad) = self.malicious_clients.iter().find(|&&c| c >= n_clients) {
            return Err(Error::InvalidConfig(format!(
                "malicious client {bad} does not exist among {n_clients} clients"
            )));
        }
        Ok(())
    }

    /// The same attack with its seed moved to the stream for `client_id`.
    pub fn for_client(&self, client_id: usize) -> AttackConfig {
        AttackConfig {
            seed: seed::client(self.seed, client_id),
            ..self.clone()
        }
    }
}

/// Result of a flip: the poisoned labels and which indices changed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlipOutcome {
    pub labels: Vec<usize>,
    pub mask: Vec<bool>,
}

impl FlipOutcome {
    pub fn flipped_indices(&self) -> Vec<usize> {
        self.mask
            .iter()
            .enumerate()
            .filter(|(_, &m)| m)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Picks exactly `round(flip_fraction * n)` indices without replacement
/// and gives each a class drawn uniformly from the other `K - 1` classes.
pub fn flip_labels(labels: &[usize], n_classes: usize, cfg: &AttackConfig) -> Result<FlipOutcome> {
    if !(0.0..=1.0).contains(&cfg.flip_fraction) {
        return Err(Error::InvalidFraction(cfg.flip_fraction));
    }
    if n_classes < 2 {
        return Err(Error::SingleClass);
    }
    if let Some(&bad) = labels.iter().find(|&&y| y >= n_classes) {
        return Err(Error::ShapeMismatch(format!(
            "label {bad} out of range for {n_classes} classes"
        )));
    }
    let n = labels.len();
    let m = ((cfg.flip_fraction * n as f64).round() as usize).min(n);
    let mut rng = seed::rng(seed::derive(cfg.seed, seed::ATTACK));
    let chosen = index::sample(&mut rng, n, m);

    let mut poisoned = labels.to_vec();
    let mut mask = vec![false; n];
    for i in chosen.iter() {
        let draw = rng.random_range(0..n_classes - 1);
        poisoned[i] = if draw >= labels[i] { draw + 1 } else { draw };
        mask[i] = true;
    }
    Ok(FlipOutcome {
        labels: poisoned,
        mask,
    })
}
