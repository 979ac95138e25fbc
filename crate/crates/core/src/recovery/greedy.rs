use super::{argmax_unskipped, Algorithm, IterationRecord, RecoveryConfig, RecoveryFlags, RecoveryResult};
use crate::codec::{DecodeOutcome, Genie};
use crate::operator::{BlockDictionary, IncrementalLs, LsSolution};
use crate::{CVector, Error, Result, C64};
use std::collections::BTreeMap;

/// Block orthogonal matching pursuit: `K` rounds of "pick the block most
/// correlated with the residual, re-fit all picked blocks by least squares".
pub fn bomp(dict: &BlockDictionary, y: &CVector, cfg: &RecoveryConfig) -> Result<RecoveryResult> {
    greedy(dict, y, cfg, None)
}

/// BOMP with a decode-and-cancel step after every least-squares fit. Blocks the
/// codec certifies are subtracted from the working observation and leave the
/// least-squares problem for good.
pub fn icbomp(
    dict: &BlockDictionary,
    y: &CVector,
    cfg: &RecoveryConfig,
    genie: &Genie<'_>,
) -> Result<RecoveryResult> {
    greedy(dict, y, cfg, Some(genie))
}

fn greedy(
    dict: &BlockDictionary,
    y: &CVector,
    cfg: &RecoveryConfig,
    genie: Option<&Genie<'_>>,
) -> Result<RecoveryResult> {
    let n = dict.blocks();
    let d = dict.block_len();
    if cfg.k == 0 || cfg.k * d > dict.rows() {
        return Err(Error::InvalidConfig(format!(
            "iteration budget K={} must be in 1..={}",
            cfg.k,
            dict.rows() / d
        )));
    }
    let gain = C64::new(dict.gain(), 0.0);
    let mut zeroed = vec![false; n];
    let mut ls = IncrementalLs::new(dict, y.clone());
    let mut residual = y.clone();
    let mut flags = RecoveryFlags::default();
    let mut trace = Vec::with_capacity(cfg.k);
    let mut certified: BTreeMap<usize, Vec<C64>> = BTreeMap::new();
    let mut cancel_order = Vec::new();
    let mut last: Option<LsSolution> = None;

    for _ in 0..cfg.k {
        if cfg.early_stop.is_some_and(|eps| residual.norm() < eps) {
            flags.early_stopped = true;
            break;
        }
        let norms = dict.correlation_norms(&residual, &zeroed);
        let Some(j) = argmax_unskipped(&norms, &zeroed) else {
            break;
        };
        zeroed[j] = true;
        ls.push(j)?;
        let sol = ls.solve();
        flags.rank_deficient |= sol.rank_deficient;
        flags.dense_fallback |= sol.dense_fallback;
        let ls_dim = ls.dim();

        let mut cancelled = Vec::new();
        residual = sol.residual.clone();
        if let Some(genie) = genie {
            let mut target = ls.target().clone();
            for (pos, &b) in sol.blocks.iter().enumerate() {
                let est = sol.symbols(dict, pos);
                if let DecodeOutcome::Certified(block) = genie.decode(b, &est) {
                    // residual keeps the other blocks' fit: swap this block's
                    // fitted contribution for its certified one, and take the
                    // certified one out of the working observation
                    let c = C64::new(dict.symbol_gain(b), 0.0);
                    let exact: Vec<C64> = block.iter().map(|v| v * c).collect();
                    let delta: Vec<C64> = sol
                        .block_coeffs(pos, d)
                        .iter()
                        .zip(&exact)
                        .map(|(f, e)| (f - e) * gain)
                        .collect();
                    dict.apply_block_into(b, &delta, residual.as_mut_slice());
                    let neg: Vec<C64> = exact.iter().map(|e| -e * gain).collect();
                    dict.apply_block_into(b, &neg, target.as_mut_slice());
                    cancelled.push(b);
                    certified.insert(b, block);
                }
            }
            if !cancelled.is_empty() {
                ls.retarget(target);
                ls.remove(&cancelled)?;
                cancel_order.extend_from_slice(&cancelled);
            }
        }
        trace.push(IterationRecord {
            selected: Some(j),
            residual_norm: residual.norm(),
            cancelled,
            ls_dim,
        });
        last = Some(sol);
    }

    let mut estimates = certified;
    if let Some(sol) = &last {
        for (pos, &b) in sol.blocks.iter().enumerate() {
            if ls.blocks().contains(&b) {
                estimates.insert(b, sol.symbols(dict, pos));
            }
        }
    }
    Ok(RecoveryResult {
        algorithm: if genie.is_some() {
            Algorithm::Icbomp
        } else {
            Algorithm::Bomp
        },
        support: ls.blocks().to_vec(),
        cancelled: cancel_order,
        estimates,
        trace,
        flags,
        residual,
    })
}
