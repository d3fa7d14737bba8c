//! Named-value reports emitted by bound evaluations and studies.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// A map of evaluated constants together with the inputs that produced
/// them. Keys are sorted for reproducible emission.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub values: BTreeMap<String, f64>,
    pub inputs: BTreeMap<String, f64>,
}

impl BoundReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_value(mut self, name: &str, v: f64) -> Self {
        self.values.insert(name.to_string(), v);
        self
    }

    pub fn with_input(mut self, name: &str, v: f64) -> Self {
        self.inputs.insert(name.to_string(), v);
        self
    }

    pub fn set(&mut self, name: &str, v: f64) {
        self.values.insert(name.to_string(), v);
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.values.get(name).copied()
    }

    /// True when every recorded value is finite.
    pub fn all_finite(&self) -> bool {
        self.values.values().all(|v| v.is_finite())
    }
}
