//! Bounded partition cache.
//!
//! Only a handful of partitions stay resident; the rest live behind a
//! [`PartitionSource`] (in memory here, an application processor or network
//! link on an embedded target). When the cache is full the partition with
//! the fewest particles is replaced and the caller is told which one left so
//! it can resample the affected particles.

use std::sync::Arc;

use super::{MapError, MapModel, Partition};

/// Identifies a partition across floors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PartitionKey {
    pub floor: usize,
    pub partition: usize,
}

/// Supplies partitions on demand.
pub trait PartitionSource {
    fn load(&self, key: PartitionKey) -> Result<Arc<Partition>, MapError>;
}

impl PartitionSource for MapModel {
    fn load(&self, key: PartitionKey) -> Result<Arc<Partition>, MapError> {
        self.floor(key.floor)
            .and_then(|f| f.partitions.get(key.partition))
            .map(|p| Arc::new(p.clone()))
            .ok_or(MapError::LoadFailed {
                floor: key.floor,
                partition: key.partition,
            })
    }
}

/// Result of a cache fetch; `evicted` names the partition that was dropped
/// to make room, so its particles can be resampled.
#[derive(Debug, Clone)]
pub struct CacheFetch {
    pub partition: Arc<Partition>,
    pub evicted: Option<PartitionKey>,
}

/// Fixed-capacity partition cache.
#[derive(Debug, Clone)]
pub struct PartitionCache {
    capacity: usize,
    slots: Vec<(PartitionKey, Arc<Partition>)>,
}

impl PartitionCache {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity >= 1);
        PartitionCache {
            capacity,
            slots: Vec::with_capacity(capacity),
        }
    }

    pub fn resident_count(&self) -> usize {
        self.slots.len()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn resident_keys(&self) -> impl Iterator<Item = PartitionKey> + '_ {
        self.slots.iter().map(|(k, _)| *k)
    }

    pub fn get(&self, key: PartitionKey) -> Option<&Arc<Partition>> {
        self.slots.iter().find(|(k, _)| *k == key).map(|(_, p)| p)
    }

    /// Returns the partition for `key`, loading it if necessary.
    ///
    /// `occupancy` reports the current particle count per resident
    /// partition. On a full cache the minimum-occupancy resident (empty ones
    /// first by construction, ties broken by lowest key) is evicted.
    pub fn fetch(
        &mut self,
        key: PartitionKey,
        source: &dyn PartitionSource,
        occupancy: &dyn Fn(PartitionKey) -> usize,
    ) -> Result<CacheFetch, MapError> {
        if let Some(p) = self.get(key) {
            return Ok(CacheFetch {
                partition: Arc::clone(p),
                evicted: None,
            });
        }
        let partition = source.load(key)?;
        let evicted = if self.slots.len() >= self.capacity {
            let victim = self
                .slots
                .iter()
                .map(|(k, _)| (occupancy(*k), *k))
                .min()
                .map(|(_, k)| k)
                .expect("full cache has slots");
            self.slots.retain(|(k, _)| *k != victim);
            Some(victim)
        } else {
            None
        };
        self.slots.push((key, Arc::clone(&partition)));
        debug_assert!(self.slots.len() <= self.capacity);
        Ok(CacheFetch { partition, evicted })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{AxisBox, Point2};
    use std::collections::HashMap;

    /// Source with `n` synthetic empty partitions on one floor.
    struct FakeSource {
        n: usize,
    }

    impl PartitionSource for FakeSource {
        fn load(&self, key: PartitionKey) -> Result<Arc<Partition>, MapError> {
            if key.floor != 0 || key.partition >= self.n {
                return Err(MapError::LoadFailed {
                    floor: key.floor,
                    partition: key.partition,
                });
            }
            Ok(Arc::new(Partition {
                id: key.partition,
                bounds: AxisBox::new(Point2::new(0.0, 0.0), Point2::new(1.0, 1.0)),
                walls: vec![],
                zones: vec![],
            }))
        }
    }

    fn key(partition: usize) -> PartitionKey {
        PartitionKey {
            floor: 0,
            partition,
        }
    }

    #[test]
    fn resident_hit_has_no_eviction() {
        let source = FakeSource { n: 10 };
        let mut cache = PartitionCache::new(5);
        let occ = |_k: PartitionKey| 1usize;
        cache.fetch(key(3), &source, &occ).unwrap();
        let fetch = cache.fetch(key(3), &source, &occ).unwrap();
        assert!(fetch.evicted.is_none());
        assert_eq!(cache.resident_count(), 1);
    }

    #[test]
    fn empty_partition_evicted_first() {
        let source = FakeSource { n: 10 };
        let mut cache = PartitionCache::new(5);
        let counts: HashMap<usize, usize> =
            [(0, 4), (1, 0), (2, 7), (3, 2), (4, 9)].into_iter().collect();
        let occ = move |k: PartitionKey| counts[&k.partition];
        for i in 0..5 {
            cache.fetch(key(i), &source, &occ).unwrap();
        }
        let fetch = cache.fetch(key(7), &source, &occ).unwrap();
        assert_eq!(fetch.evicted, Some(key(1)));
        assert_eq!(cache.resident_count(), 5);
    }

    #[test]
    fn minimum_occupancy_evicted_when_none_empty() {
        let source = FakeSource { n: 10 };
        let mut cache = PartitionCache::new(5);
        let counts: HashMap<usize, usize> =
            [(0, 9), (1, 3), (2, 7), (3, 5), (4, 4), (5, 1)].into_iter().collect();
        let occ = move |k: PartitionKey| counts[&k.partition];
        for i in 0..5 {
            cache.fetch(key(i), &source, &occ).unwrap();
        }
        let fetch = cache.fetch(key(5), &source, &occ).unwrap();
        assert_eq!(fetch.evicted, Some(key(1)));
    }

    #[test]
    fn occupancy_ties_break_to_lowest_key() {
        let source = FakeSource { n: 10 };
        let mut cache = PartitionCache::new(3);
        let occ = |_k: PartitionKey| 5usize;
        for i in [2usize, 0, 1] {
            cache.fetch(key(i), &source, &occ).unwrap();
        }
        let fetch = cache.fetch(key(9), &source, &occ).unwrap();
        assert_eq!(fetch.evicted, Some(key(0)));
    }

    #[test]
    fn load_failure_propagates_and_leaves_cache_untouched() {
        let source = FakeSource { n: 4 };
        let mut cache = PartitionCache::new(5);
        let occ = |_k: PartitionKey| 0usize;
        cache.fetch(key(0), &source, &occ).unwrap();
        assert!(cache.fetch(key(99), &source, &occ).is_err());
        assert_eq!(cache.resident_count(), 1);
    }

    #[test]
    fn capacity_never_exceeded_under_random_ops() {
        let source = FakeSource { n: 40 };
        let mut cache = PartitionCache::new(5);
        let mut rng = crate::rng::Lcg::new(51);
        for _ in 0..100_000 {
            let id = rng.index(40);
            let seed = rng.next_u32();
            let occ = move |k: PartitionKey| {
                // Deterministic pseudo-occupancy per (op, partition).
                (crate::rng::lcg_next(seed ^ k.partition as u32).0 % 16) as usize
            };
            cache.fetch(key(id), &source, &occ).unwrap();
            assert!(cache.resident_count() <= 5);
        }
    }
}
