//! Flat exhaustive nearest-neighbor index over L2 distance. Corpus sizes
//! here (tens of thousands) make a linear scan with f64 accumulation the
//! simplest correct choice; ties break toward the lowest question id so
//! results never depend on insertion order.

use std::collections::HashSet;

use crate::embed::l2_distance;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub id: u64,
    pub distance: f64,
}

pub struct VectorIndex {
    dimension: usize,
    ids: Vec<u64>,
    vectors: Vec<Vec<f32>>,
    seen: HashSet<u64>,
}

impl VectorIndex {
    pub fn new(dimension: usize) -> Self {
        VectorIndex { dimension, ids: Vec::new(), vectors: Vec::new(), seen: HashSet::new() }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn insert(&mut self, id: u64, vector: Vec<f32>) -> Result<()> {
        if vector.len() != self.dimension {
            return Err(Error::DimensionMismatch { expected: self.dimension, got: vector.len() });
        }
        if !self.seen.insert(id) {
            return Err(Error::InconsistentRecord(format!("duplicate index id {id}")));
        }
        self.ids.push(id);
        self.vectors.push(vector);
        Ok(())
    }

    /// Closest stored vector; `None` when the index is empty. Equal
    /// distances resolve to the lowest id.
    pub fn nearest(&self, query: &[f32]) -> Option<Neighbor> {
        assert_eq!(query.len(), self.dimension, "query dimension mismatch");
        let mut best: Option<Neighbor> = None;
        for (id, v) in self.ids.iter().zip(self.vectors.iter()) {
            let d = l2_distance(query, v);
            let better = match best {
                None => true,
                Some(b) => d < b.distance || (d == b.distance && *id < b.id),
            };
            if better {
                best = Some(Neighbor { id: *id, distance: d });
            }
        }
        best
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, &[f32])> {
        self.ids.iter().copied().zip(self.vectors.iter().map(|v| v.as_slice()))
    }
}
