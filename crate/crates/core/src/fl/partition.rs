use rand::seq::SliceRandom;

use super::{FlError, Result};
use crate::data::Dataset;
use crate::rng::stream;

const SHUFFLE_STREAM: u64 = 0x9A27;
const SPLIT_STREAM: u64 = 0x5917;

/// Share of every shard held out for hyperparameter validation (rounded up).
pub const VALIDATION_FRACTION: f64 = 0.2;

/// One client's local data with a fixed train/validation split.
#[derive(Debug, Clone, PartialEq)]
pub struct ClientShard {
    pub client_id: usize,
    pub data: Dataset,
    /// Sorted row indices into `data`; disjoint from `val_idx`.
    pub train_idx: Vec<usize>,
    pub val_idx: Vec<usize>,
}

impl ClientShard {
    /// Holds out `⌈20%⌉` of the rows, chosen by a stream keyed on `seed` and
    /// the client id. Needs at least two rows so both splits are nonempty.
    pub fn new(client_id: usize, data: Dataset, seed: u64) -> Result<Self> {
        if data.len() < 2 {
            return Err(FlError::NotEnoughData { needed: 2, available: data.len() });
        }
        let n_val = (data.len() as f64 * VALIDATION_FRACTION).ceil() as usize;
        let mut order: Vec<usize> = (0..data.len()).collect();
        order.shuffle(&mut stream(seed, &[SPLIT_STREAM, client_id as u64]));
        let mut val_idx = order[..n_val].to_vec();
        let mut train_idx = order[n_val..].to_vec();
        val_idx.sort_unstable();
        train_idx.sort_unstable();
        Ok(Self { client_id, data, train_idx, val_idx })
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn train_set(&self) -> Dataset {
        self.data.select(&self.train_idx)
    }

    pub fn val_set(&self) -> Dataset {
        self.data.select(&self.val_idx)
    }
}

/// Shuffles once and hands out consecutive slices of `shard_size` rows.
pub fn partition_iid(ds: &Dataset, clients: usize, shard_size: usize, seed: u64) -> Result<Vec<ClientShard>> {
    let needed = clients * shard_size;
    if needed > ds.len() {
        return Err(FlError::NotEnoughData { needed, available: ds.len() });
    }
    let mut order: Vec<usize> = (0..ds.len()).collect();
    order.shuffle(&mut stream(seed, &[SHUFFLE_STREAM]));
    order
        .chunks_exact(shard_size.max(1))
        .take(clients)
        .enumerate()
        .map(|(k, rows)| ClientShard::new(k, ds.select(rows), seed))
        .collect()
}

/// Label-skewed split.
///
/// A seeded permutation `π` of the classes is laid out cyclically: client
/// `k` receives classes `π[(k·c + j) mod M]` for `j < c`. Every client sees
/// `c` distinct classes, assignments are spread evenly over the classes, and
/// overlap is forced once `K·c > M`. Each shard draws `shard_size` rows
/// without replacement, split over its classes as evenly as possible.
pub fn partition_noniid(
    ds: &Dataset,
    clients: usize,
    classes_per_client: usize,
    shard_size: usize,
    seed: u64,
) -> Result<Vec<ClientShard>> {
    let m = ds.num_classes();
    if classes_per_client == 0 || classes_per_client > m {
        return Err(FlError::InvalidConfig(format!(
            "classes_per_client must be in [1, {m}], got {classes_per_client}"
        )));
    }
    let mut rng = stream(seed, &[SHUFFLE_STREAM]);
    let mut perm: Vec<usize> = (0..m).collect();
    perm.shuffle(&mut rng);
    let mut pools = ds.class_indices();
    for pool in &mut pools {
        pool.shuffle(&mut rng);
    }

    let c = classes_per_client;
    let mut shards = Vec::with_capacity(clients);
    for k in 0..clients {
        let mut rows = Vec::with_capacity(shard_size);
        for j in 0..c {
            let class = perm[(k * c + j) % m];
            let take = shard_size / c + usize::from(j < shard_size % c);
            let pool = &mut pools[class];
            if pool.len() < take {
                return Err(FlError::ClassExhausted { class, needed: take, available: pool.len() });
            }
            rows.extend(pool.drain(pool.len() - take..));
        }
        rows.sort_unstable();
        shards.push(ClientShard::new(k, ds.select(&rows), seed)?);
    }
    Ok(shards)
}
