use std::collections::BTreeMap;

use crate::model::Model;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoolEntry<F> {
    pub mse: F,
    pub times_seen: u64,
    /// Iteration of the first visit (0 is the start model).
    pub first_seen: u64,
}

/// Deduplicated record of evaluated models.
///
/// Keys are ordered by size and then lexicographically, so all models of
/// one size are contiguous.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ModelPool<F> {
    entries: BTreeMap<Model, PoolEntry<F>>,
}

impl<F: Scalar> ModelPool<F> {
    pub fn new() -> Self {
        ModelPool {
            entries: BTreeMap::new(),
        }
    }

    pub fn record(&mut self, model: &Model, mse: F, at: u64) {
        self.entries
            .entry(model.clone())
            .and_modify(|e| {
                e.times_seen += 1;
                e.first_seen = e.first_seen.min(at);
            })
            .or_insert(PoolEntry {
                mse,
                times_seen: 1,
                first_seen: at,
            });
    }

    /// Inserts an entry verbatim, summing counts if the model is present.
    pub fn insert_entry(&mut self, model: Model, entry: PoolEntry<F>) {
        self.entries
            .entry(model)
            .and_modify(|e| {
                e.times_seen += entry.times_seen;
                e.first_seen = e.first_seen.min(entry.first_seen);
            })
            .or_insert(entry);
    }

    /// Union with `other`; associative and commutative.
    pub fn merge(&mut self, other: &ModelPool<F>) {
        for (m, e) in &other.entries {
            self.insert_entry(m.clone(), *e);
        }
    }

    pub fn get(&self, model: &Model) -> Option<&PoolEntry<F>> {
        self.entries.get(model)
    }

    pub fn contains(&self, model: &Model) -> bool {
        self.entries.contains_key(model)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Model, &PoolEntry<F>)> {
        self.entries.iter()
    }

    /// Models of size `kappa`, in index order.
    pub fn of_size(&self, kappa: usize) -> impl Iterator<Item = (&Model, &PoolEntry<F>)> {
        let lo = Model::new((0..kappa).collect()).expect("distinct");
        self.entries
            .range(lo..)
            .take_while(move |(m, _)| m.size() == kappa)
    }

    /// Distinct model sizes present.
    pub fn sizes(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self.entries.keys().map(Model::size).collect();
        out.dedup();
        out
    }

    /// Finite-MSE models of size `kappa`, best first, ties broken by index order.
    pub fn ranked(&self, kappa: usize) -> Vec<(Model, F)> {
        let mut v: Vec<(Model, F)> = self
            .of_size(kappa)
            .filter(|(_, e)| e.mse.is_finite())
            .map(|(m, e)| (m.clone(), e.mse))
            .collect();
        v.sort_by(|a, b| {
            a.1.partial_cmp(&b.1)
                .expect("finite")
                .then_with(|| a.0.cmp(&b.0))
        });
        v
    }
}

impl<F: Scalar> FromIterator<(Model, PoolEntry<F>)> for ModelPool<F> {
    fn from_iter<I: IntoIterator<Item = (Model, PoolEntry<F>)>>(iter: I) -> Self {
        let mut pool = ModelPool::new();
        for (m, e) in iter {
            pool.insert_entry(m, e);
        }
        pool
    }
}
