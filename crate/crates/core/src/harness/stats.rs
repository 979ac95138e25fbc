//! Error counting and per-point aggregation.

use crate::codec::count_bit_errors;
use crate::linalg::pairwise_sum;
use crate::model::{FrameInstance, SystemConfig};
use crate::recovery::{Algorithm, RecoveryResult};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ErrorCount {
    pub symbol_errors: u64,
    pub frame_errors: u64,
    pub bit_errors: u64,
}

/// Symbol and frame errors of one trial.
///
/// An active user missing from the detector output counts `d` symbol errors
/// and one frame error. Otherwise the first `L_i` symbols are sliced and
/// compared with the transmitted ones, and the frame is in error when the bit
/// errors exceed `t_c`. Inactive blocks the detector picked are not counted.
pub fn count_errors(result: &RecoveryResult, truth: &FrameInstance, cfg: &SystemConfig) -> ErrorCount {
    let threshold = cfg.t_c.frame_error_threshold();
    let mut out = ErrorCount::default();
    for user in &truth.users {
        let Some(est) = result.estimate(user.index) else {
            out.symbol_errors += cfg.d as u64;
            out.frame_errors += 1;
            out.bit_errors += user.bits.len() as u64;
            continue;
        };
        let bps = cfg.modulation.bits_per_symbol();
        let mut bits = 0usize;
        for k in 0..user.len {
            let e = count_bit_errors(&est[k..k + 1], &user.bits[k * bps..(k + 1) * bps], cfg.modulation);
            if e > 0 {
                out.symbol_errors += 1;
                bits += e;
            }
        }
        out.bit_errors += bits as u64;
        if threshold.is_some_and(|t| bits > t) {
            out.frame_errors += 1;
        }
    }
    out
}

/// Everything recorded about one trial of one algorithm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub errors: ErrorCount,
    pub n_active: usize,
    pub d: usize,
    pub iterations: usize,
    pub cancelled: usize,
    pub flagged: bool,
}

impl TrialOutcome {
    pub fn ser(&self) -> f64 {
        if self.n_active == 0 {
            0.0
        } else {
            self.errors.symbol_errors as f64 / (self.n_active * self.d) as f64
        }
    }

    pub fn fer(&self) -> f64 {
        if self.n_active == 0 {
            0.0
        } else {
            self.errors.frame_errors as f64 / self.n_active as f64
        }
    }
}

/// One row of experiment output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointStats {
    pub algorithm: String,
    pub axis: String,
    pub axis_value: f64,
    pub ser: f64,
    /// 95% normal-approximation half-width.
    pub ser_ci: f64,
    pub fer: f64,
    pub fer_ci: f64,
    pub throughput: f64,
    pub mean_iterations: f64,
    pub mean_cancelled: f64,
    pub trials: usize,
    pub flagged_trials: usize,
}

/// Mean and 95% half-width, summing pairwise in trial order.
pub fn mean_and_ci(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = pairwise_sum(xs) / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let dev: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = pairwise_sum(&dev) / (n - 1) as f64;
    (mean, 1.96 * (var / n as f64).sqrt())
}

pub fn aggregate(
    algorithm: Algorithm,
    axis: &str,
    axis_value: f64,
    cfg: &SystemConfig,
    trials: &[TrialOutcome],
) -> PointStats {
    let col = |f: &dyn Fn(&TrialOutcome) -> f64| -> Vec<f64> { trials.iter().map(f).collect() };
    let (ser, ser_ci) = mean_and_ci(&col(&|t| t.ser()));
    let (fer, fer_ci) = mean_and_ci(&col(&|t| t.fer()));
    let (mean_iterations, _) = mean_and_ci(&col(&|t| t.iterations as f64));
    let (mean_cancelled, _) = mean_and_ci(&col(&|t| t.cancelled as f64));
    PointStats {
        algorithm: algorithm.name().to_string(),
        axis: axis.to_string(),
        axis_value,
        ser,
        ser_ci,
        fer,
        fer_ci,
        throughput: crate::analysis::throughput(fer, cfg),
        mean_iterations,
        mean_cancelled,
        trials: trials.len(),
        flagged_trials: trials.iter().filter(|t| t.flagged).count(),
    }
}
