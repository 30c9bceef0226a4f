//! Fertilizer application rates.

use serde::{Deserialize, Serialize};

/// Nitrogen, phosphorus and potassium rates in kg/ha.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NpkRates {
    pub n: f64,
    pub p: f64,
    pub k: f64,
}

impl NpkRates {
    pub const ZERO: NpkRates = NpkRates { n: 0.0, p: 0.0, k: 0.0 };

    pub const fn new(n: f64, p: f64, k: f64) -> Self {
        NpkRates { n, p, k }
    }

    pub fn total(&self) -> f64 {
        self.n + self.p + self.k
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.n, self.p, self.k]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        NpkRates { n: a[0], p: a[1], k: a[2] }
    }
}
