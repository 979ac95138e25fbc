//! Greedy block recovery (BOMP, ICBOMP) and genie-aided baselines.

mod greedy;
mod oracle;

pub use greedy::{bomp, icbomp};
pub use oracle::{oracle_receiver, OracleMode};

use crate::model::{demodulate, Modulation, SystemConfig};
use crate::{CVector, Error, C64};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Bomp,
    Icbomp,
    OracleLs,
    IcMmse,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::Bomp,
        Algorithm::Icbomp,
        Algorithm::OracleLs,
        Algorithm::IcMmse,
    ];

    /// Stable numeric id, used when deriving random substreams.
    pub fn id(self) -> u64 {
        match self {
            Algorithm::Bomp => 1,
            Algorithm::Icbomp => 2,
            Algorithm::OracleLs => 3,
            Algorithm::IcMmse => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Bomp => "bomp",
            Algorithm::Icbomp => "icbomp",
            Algorithm::OracleLs => "oracle-ls",
            Algorithm::IcMmse => "ic-mmse",
        }
    }

    /// Whether the algorithm is told the true support.
    pub fn knows_support(self) -> bool {
        matches!(self, Algorithm::OracleLs | Algorithm::IcMmse)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == norm)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown algorithm {s:?}")))
    }
}

/// Loop controls shared by the greedy detectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecoveryConfig {
    /// Iteration budget `K`.
    pub k: usize,
    /// Stop once the residual norm drops below this value.
    pub early_stop: Option<f64>,
}

impl RecoveryConfig {
    pub fn new(k: usize) -> Self {
        Self { k, early_stop: None }
    }
}

impl From<&SystemConfig> for RecoveryConfig {
    fn from(cfg: &SystemConfig) -> Self {
        Self {
            k: cfg.k,
            early_stop: cfg.early_stop,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RecoveryFlags {
    pub rank_deficient: bool,
    pub dense_fallback: bool,
    pub early_stopped: bool,
}

impl RecoveryFlags {
    /// Trials with any of these set are counted separately in statistics.
    pub fn any(&self) -> bool {
        self.rank_deficient || self.early_stopped
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub selected: Option<usize>,
    /// Residual norm at the end of the iteration.
    pub residual_norm: f64,
    /// Blocks certified and cancelled in this iteration.
    pub cancelled: Vec<usize>,
    /// Number of unknowns in this iteration's least-squares solve.
    pub ls_dim: usize,
}

#[derive(Debug, Clone)]
pub struct RecoveryResult {
    pub algorithm: Algorithm,
    /// Blocks still held by least squares at the end, in selection order.
    pub support: Vec<usize>,
    /// Blocks removed by cancellation, in cancellation order.
    pub cancelled: Vec<usize>,
    /// Symbol estimates of every identified block. Cancelled blocks carry
    /// their certified value.
    pub estimates: BTreeMap<usize, Vec<C64>>,
    pub trace: Vec<IterationRecord>,
    pub flags: RecoveryFlags,
    pub residual: CVector,
}

impl RecoveryResult {
    /// `support ∪ cancelled`, ascending.
    pub fn identified(&self) -> Vec<usize> {
        self.estimates.keys().copied().collect()
    }

    pub fn is_identified(&self, j: usize) -> bool {
        self.estimates.contains_key(&j)
    }

    pub fn estimate(&self, j: usize) -> Option<&[C64]> {
        self.estimates.get(&j).map(|v| v.as_slice())
    }

    pub fn iterations(&self) -> usize {
        self.trace.len()
    }

    /// Stacked `Nd` symbol estimate, zero outside the identified blocks.
    pub fn to_vector(&self, n: usize, d: usize) -> CVector {
        let mut out = CVector::zeros(n * d);
        for (&j, block) in &self.estimates {
            out.rows_mut(j * d, d).copy_from_slice(block);
        }
        out
    }
}

/// Hard decisions for every identified block (all `d` symbols).
pub fn demodulate_result(result: &RecoveryResult, modulation: Modulation) -> BTreeMap<usize, Vec<bool>> {
    result
        .estimates
        .iter()
        .map(|(&j, block)| (j, demodulate(block, modulation)))
        .collect()
}

/// Index of the largest value among entries not skipped; ties go to the
/// lowest index.
pub(crate) fn argmax_unskipped(values: &[f64], skip: &[bool]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (j, &v) in values.iter().enumerate() {
        if skip[j] {
            continue;
        }
        match best {
            Some((_, b)) if v <= b => {}
            _ => best = Some((j, v)),
        }
    }
    best.map(|(j, _)| j)
}
