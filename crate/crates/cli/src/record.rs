//! Result records: one per grid point, written one JSON object per line.

use std::collections::BTreeMap;

use gaplab::bochner::MMatrixBound;
use gaplab::bounds::{BoundEntry, BoundReport};
use gaplab::spectral::Method;
use serde::{Deserialize, Serialize};

use crate::model::ModelDescriptor;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapRecord {
    pub value: f64,
    pub method: Method,
    pub residual: f64,
    pub null_residual: f64,
    pub spectrum_head: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertifiedRecord {
    pub k_star: f64,
    /// `2 k*`
    pub bound: f64,
}

/// The continuum bounds next to the grid model that approximates them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuumRecord {
    /// `int (1 - e^{-beta phi})` by quadrature
    pub eps: f64,
    pub eps_error: f64,
    /// grid analogue of `eps`
    pub eps_h: f64,
    /// how far the grid gap may fall below the continuum bounds
    pub slack: f64,
    pub bounds: Vec<BoundReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRecord {
    pub length: usize,
    pub diameter: f64,
    pub gap_diam2: f64,
    pub gap_length2: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    pub a2: Option<f64>,
    pub a3: Option<f64>,
    pub a4: Option<f64>,
    /// largest relative error over the random functions
    pub bochner_identity: Option<f64>,
    pub corollary1: Option<f64>,
    pub detailed_balance: Option<f64>,
    pub bakry_emery_violation: Option<f64>,
    pub bakry_emery_eigen_defect: Option<f64>,
}

/// One asserted inequality `lhs <= rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub passed: bool,
}

impl Check {
    pub fn le(name: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Self {
            name: name.into(),
            lhs,
            rhs,
            passed: lhs <= rhs,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub build_s: f64,
    pub verify_s: f64,
    pub gap_s: f64,
    pub bounds_s: f64,
    pub total_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub config_hash: String,
    pub point: BTreeMap<String, f64>,
    pub model: ModelDescriptor,
    pub gap: Option<GapRecord>,
    pub certified: Option<CertifiedRecord>,
    pub m_matrix: Option<MMatrixBound>,
    pub bounds: Vec<BoundEntry>,
    pub continuum: Option<ContinuumRecord>,
    pub scaling: Option<ScalingRecord>,
    pub residuals: Residuals,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    pub passed: bool,
    pub timings: Timings,
    pub version: String,
}

impl ResultRecord {
    pub fn bound(&self, name: &str) -> Option<&BoundReport> {
        self.bounds.iter().filter_map(BoundEntry::report).find(|r| r.name == name)
    }

    pub fn gap_value(&self) -> Option<f64> {
        self.gap.as_ref().map(|g| g.value)
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// The record with timing fields zeroed, for comparing reruns.
    pub fn without_timings(&self) -> Self {
        Self {
            timings: Timings::default(),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingSummary {
    pub sizes: Vec<usize>,
    pub min_gap_diam2: f64,
    pub max_gap_diam2: f64,
    /// `max / min`
    pub ratio: f64,
}
