use std::collections::HashMap;
use std::sync::Arc;

use parking_lot::Mutex;

/// Bounded memo table keyed by the canonical request text. Values are
/// deterministic, so a racing insert of the same key is harmless.
#[derive(Debug)]
pub struct MemoCache<V> {
    capacity: usize,
    entries: Mutex<HashMap<String, Arc<V>>>,
}

impl<V> MemoCache<V> {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity,
            entries: Mutex::new(HashMap::new()),
        }
    }

    pub fn get(&self, key: &str) -> Option<Arc<V>> {
        self.entries.lock().get(key).cloned()
    }

    pub fn insert(&self, key: String, value: V) -> Arc<V> {
        let value = Arc::new(value);
        if self.capacity == 0 {
            return value;
        }
        let mut map = self.entries.lock();
        if map.len() >= self.capacity && !map.contains_key(&key) {
            // Any victim will do; entries are cheap to recompute.
            if let Some(victim) = map.keys().next().cloned() {
                map.remove(&victim);
            }
        }
        map.insert(key, value.clone());
        value
    }

    pub fn len(&self) -> usize {
        self.entries.lock().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
