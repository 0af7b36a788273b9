//! Fitted-constant reports for inequalities of the form `lhs <= C * rhs`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::scenario::csv::Table;

/// Relative tolerance used when deciding whether ratios keep growing.
pub const GROWTH_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateSample {
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs / rhs`; `None` when both sides vanish.
    pub ratio: Option<f64>,
}

impl EstimateSample {
    pub fn new(lhs: f64, rhs: f64) -> Self {
        let ratio = if lhs == 0.0 && rhs == 0.0 {
            None
        } else if rhs == 0.0 {
            Some(f64::INFINITY)
        } else {
            Some(lhs / rhs)
        };
        Self { lhs, rhs, ratio }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Bounded,
    Growing,
}

/// Samples ordered along a refinement axis (shrinking radius, finer mesh,
/// ...), their largest ratio, and whether the ratios appear to blow up.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub samples: Vec<EstimateSample>,
    pub fitted_constant: f64,
    pub verdict: Verdict,
    pub metadata: BTreeMap<String, String>,
}

impl EstimateReport {
    pub fn new(samples: Vec<EstimateSample>) -> Self {
        Self::with_tolerance(samples, GROWTH_TOLERANCE)
    }

    /// Growing iff there are at least three defined ratios and each one
    /// exceeds its predecessor by more than the relative `tolerance`.
    pub fn with_tolerance(samples: Vec<EstimateSample>, tolerance: f64) -> Self {
        let ratios: Vec<f64> = samples.iter().filter_map(|s| s.ratio).collect();
        let fitted_constant = ratios.iter().copied().fold(0.0, f64::max);
        let growing = ratios.len() >= 3
            && ratios
                .windows(2)
                .all(|w| w[1] > w[0] * (1.0 + tolerance) && w[1] > 0.0);
        Self {
            samples,
            fitted_constant,
            verdict: if growing { Verdict::Growing } else { Verdict::Bounded },
            metadata: BTreeMap::new(),
        }
    }

    pub fn from_pairs<I: IntoIterator<Item = (f64, f64)>>(pairs: I) -> Self {
        Self::new(pairs.into_iter().map(|(l, r)| EstimateSample::new(l, r)).collect())
    }

    pub fn with_meta(mut self, key: &str, value: impl ToString) -> Self {
        self.metadata.insert(key.to_string(), value.to_string());
        self
    }

    /// Whether `lhs <= c * rhs` holds for every sample.
    pub fn holds_with(&self, c: f64) -> bool {
        self.samples.iter().all(|s| s.lhs <= c * s.rhs)
    }

    /// Samples as a CSV table; undefined ratios are written as `nan`.
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(["index", "lhs", "rhs", "ratio"]);
        for (i, s) in self.samples.iter().enumerate() {
            t.push(vec![i as f64, s.lhs, s.rhs, s.ratio.unwrap_or(f64::NAN)]);
        }
        t
    }
}
