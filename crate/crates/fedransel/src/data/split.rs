//! Train/test splitting and IID client partitioning over sample indices.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Disjoint train/test index sets plus a disjoint partition of the train set
/// into per-client shards whose union is exactly the train set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplitPlan {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    pub clients: Vec<Vec<usize>>,
}

impl SplitPlan {
    pub fn n_clients(&self) -> usize {
        self.clients.len()
    }
}

/// Shuffle `n` sample indices, cut train/test at `train_ratio`, and deal the
/// train side into `n_clients` near-equal IID shards.
pub fn make_split(
    n: usize,
    train_ratio: f64,
    n_clients: usize,
    rng: &mut impl Rng,
) -> Result<SplitPlan> {
    if !(0.0..1.0).contains(&train_ratio) || train_ratio == 0.0 {
        return Err(Error::config(format!(
            "train_ratio must be in (0,1), got {train_ratio}"
        )));
    }
    if n_clients == 0 {
        return Err(Error::config("need at least one client"));
    }
    let n_train = ((n as f64) * train_ratio).floor() as usize;
    if n_train < n_clients {
        return Err(Error::config(format!(
            "{n_train} training samples cannot be partitioned over {n_clients} clients"
        )));
    }
    if n_train >= n {
        return Err(Error::config("train split leaves no test samples"));
    }

    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let train = perm[..n_train].to_vec();
    let test = perm[n_train..].to_vec();

    // deal remainders to the first shards so sizes differ by at most one
    let base = n_train / n_clients;
    let rem = n_train % n_clients;
    let mut clients = Vec::with_capacity(n_clients);
    let mut cursor = 0;
    for c in 0..n_clients {
        let size = base + usize::from(c < rem);
        clients.push(train[cursor..cursor + size].to_vec());
        cursor += size;
    }

    Ok(SplitPlan {
        train,
        test,
        clients,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashSet;

    #[test]
    fn paper_scale_partition_arithmetic() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let plan = make_split(20_000, 2.0 / 3.0, 5, &mut rng).unwrap();
        assert!(
            plan.test.len() == 6666 || plan.test.len() == 6667,
            "test {}",
            plan.test.len()
        );
        for shard in &plan.clients {
            assert!(
                shard.len() == 2666 || shard.len() == 2667,
                "shard {}",
                shard.len()
            );
        }

        let train_set: HashSet<usize> = plan.train.iter().copied().collect();
        let test_set: HashSet<usize> = plan.test.iter().copied().collect();
        assert!(train_set.is_disjoint(&test_set));
        assert_eq!(train_set.len() + test_set.len(), 20_000);

        let mut union = HashSet::new();
        for shard in &plan.clients {
            for &i in shard {
                assert!(union.insert(i), "client shards overlap at {i}");
            }
        }
        assert_eq!(union, train_set);
    }

    #[test]
    fn single_client_gets_the_whole_train_split() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let plan = make_split(90, 2.0 / 3.0, 1, &mut rng).unwrap();
        assert_eq!(plan.clients.len(), 1);
        assert_eq!(plan.clients[0], plan.train);
    }

    #[test]
    fn too_few_samples_per_client_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        assert!(make_split(6, 0.5, 4, &mut rng).is_err());
    }

    #[test]
    fn shard_class_prevalence_tracks_global() {
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        let n = 10_000usize;
        // 30% positives, assigned to fixed indices
        let labels: Vec<u8> = (0..n).map(|i| u8::from(i % 10 < 3)).collect();
        let plan = make_split(n, 2.0 / 3.0, 5, &mut rng).unwrap();
        let global = 0.3;
        for shard in &plan.clients {
            let m = shard.len() as f64;
            let prevalence = shard.iter().filter(|&&i| labels[i] == 1).count() as f64 / m;
            // hypergeometric spread is below the binomial bound
            let sigma = (global * (1.0 - global) / m).sqrt();
            assert!(
                (prevalence - global).abs() < 3.0 * sigma,
                "shard prevalence {prevalence}"
            );
        }
    }
}
