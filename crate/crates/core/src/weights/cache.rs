use std::collections::HashMap;
use std::sync::Mutex;

use super::{a_infty_char, a_pq_alpha_char, a_pq_char, Weight};
use crate::dyadic::ExponentParams;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Key {
    kind: &'static str,
    weights: [u64; 2],
    exponents: Vec<u64>,
    depth: u32,
}

/// Memo table for characteristics, keyed by weight fingerprints, exponents
/// and lattice depth. Values are computed outside the lock; concurrent
/// callers racing on one key insert the same number, and the first insert
/// wins.
#[derive(Debug, Default)]
pub struct CharacteristicCache {
    map: Mutex<HashMap<Key, f64>>,
}

impl CharacteristicCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.map.lock().expect("cache lock poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn get_or(&self, key: Key, compute: impl FnOnce() -> Result<f64>) -> Result<f64> {
        if let Some(v) = self.map.lock().expect("cache lock poisoned").get(&key) {
            return Ok(*v);
        }
        let v = compute()?;
        Ok(*self
            .map
            .lock()
            .expect("cache lock poisoned")
            .entry(key)
            .or_insert(v))
    }

    pub fn a_pq(&self, w: &Weight, p: f64, q: f64, depth: u32) -> Result<f64> {
        let key = Key {
            kind: "a_pq",
            weights: [w.fingerprint(), 0],
            exponents: vec![p.to_bits(), q.to_bits()],
            depth,
        };
        self.get_or(key, || a_pq_char(w, p, q, depth))
    }

    pub fn a_infty(&self, w: &Weight, depth: u32) -> Result<f64> {
        let key = Key {
            kind: "a_infty",
            weights: [w.fingerprint(), 0],
            exponents: vec![],
            depth,
        };
        self.get_or(key, || a_infty_char(w, depth))
    }

    pub fn a_pq_alpha(
        &self,
        w: &Weight,
        sigma: &Weight,
        prm: &ExponentParams,
        depth: u32,
    ) -> Result<f64> {
        let key = Key {
            kind: "a_pq_alpha",
            weights: [w.fingerprint(), sigma.fingerprint()],
            exponents: vec![prm.p().to_bits(), prm.q().to_bits(), prm.alpha().to_bits(), prm.d() as u64],
            depth,
        };
        self.get_or(key, || a_pq_alpha_char(w, sigma, prm, depth))
    }
}
