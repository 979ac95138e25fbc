use super::{Algorithm, IterationRecord, RecoveryFlags, RecoveryResult};
use crate::codec::{DecodeOutcome, Genie};
use crate::linalg::BlockCholesky;
use crate::operator::{restricted_ls, BlockDictionary};
use crate::{CMatrix, CVector, Error, Result, C64};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMode {
    /// One least-squares fit on the true support.
    Ls,
    /// Repeated MMSE estimation with decode-and-cancel until a pass cancels
    /// nothing.
    IcMmse,
}

/// Receivers that are told the true active set.
pub fn oracle_receiver(
    dict: &BlockDictionary,
    y: &CVector,
    support: &[usize],
    genie: &Genie<'_>,
    mode: OracleMode,
) -> Result<RecoveryResult> {
    match mode {
        OracleMode::Ls => oracle_ls(dict, y, support),
        OracleMode::IcMmse => ic_mmse(dict, y, support, genie),
    }
}

fn oracle_ls(dict: &BlockDictionary, y: &CVector, support: &[usize]) -> Result<RecoveryResult> {
    let sol = restricted_ls(dict, y, support)?;
    let estimates = (0..support.len())
        .map(|pos| (sol.blocks[pos], sol.symbols(dict, pos)))
        .collect();
    let trace = vec![IterationRecord {
        selected: None,
        residual_norm: sol.residual.norm(),
        cancelled: Vec::new(),
        ls_dim: support.len() * dict.block_len(),
    }];
    Ok(RecoveryResult {
        algorithm: Algorithm::OracleLs,
        support: support.to_vec(),
        cancelled: Vec::new(),
        estimates,
        trace,
        flags: RecoveryFlags {
            rank_deficient: sol.rank_deficient,
            dense_fallback: sol.dense_fallback,
            early_stopped: false,
        },
        residual: sol.residual,
    })
}

/// MMSE estimate of the coordinates of `blocks`:
/// `(B_Λᴴ B_Λ + diag(1 / (ρ₀ M c_j²)))⁻¹ B_Λᴴ y / sqrt(ρ₀ M)`.
fn mmse_coords(dict: &BlockDictionary, y: &CVector, blocks: &[usize]) -> Result<CVector> {
    let d = dict.block_len();
    let n = blocks.len() * d;
    let snr = dict.gain() * dict.gain();
    let mut a = CMatrix::zeros(n, n);
    let mut rhs = CVector::zeros(n);
    for (p, &i) in blocks.iter().enumerate() {
        for (q, &j) in blocks.iter().enumerate().skip(p) {
            let g = dict.gram_block(i, j);
            a.view_mut((p * d, q * d), (d, d)).copy_from(&g);
            if q != p {
                a.view_mut((q * d, p * d), (d, d)).copy_from(&g.adjoint());
            }
        }
        let c = dict.symbol_gain(i);
        if c == 0.0 {
            return Err(Error::Selection(format!("block {i} has a zero channel")));
        }
        for k in 0..d {
            a[(p * d + k, p * d + k)] += C64::new(1.0 / (snr * c * c), 0.0);
        }
        rhs.rows_mut(p * d, d).copy_from(&dict.block_correlate(y, i));
    }
    let chol = BlockCholesky::factor(&a)
        .map_err(|_| Error::Selection("regularized Gram is not positive definite".into()))?;
    Ok(chol.solve(&rhs) / C64::new(dict.gain(), 0.0))
}

fn ic_mmse(
    dict: &BlockDictionary,
    y: &CVector,
    support: &[usize],
    genie: &Genie<'_>,
) -> Result<RecoveryResult> {
    let d = dict.block_len();
    let gain = C64::new(dict.gain(), 0.0);
    let mut remaining = support.to_vec();
    let mut target = y.clone();
    let mut estimates = BTreeMap::new();
    let mut cancel_order = Vec::new();
    let mut trace = Vec::new();
    let mut residual = y.clone();
    while !remaining.is_empty() {
        let coords = mmse_coords(dict, &target, &remaining)?;
        let ls_dim = remaining.len() * d;
        let mut cancelled = Vec::new();
        for (pos, &b) in remaining.iter().enumerate() {
            let c = dict.symbol_gain(b);
            let est: Vec<C64> = coords.as_slice()[pos * d..(pos + 1) * d]
                .iter()
                .map(|v| v / c)
                .collect();
            match genie.decode(b, &est) {
                DecodeOutcome::Certified(block) => {
                    let neg: Vec<C64> = block.iter().map(|v| -v * c * gain).collect();
                    dict.apply_block_into(b, &neg, target.as_mut_slice());
                    cancelled.push(b);
                    estimates.insert(b, block);
                }
                DecodeOutcome::Passthrough { .. } => {
                    estimates.insert(b, est);
                }
            }
        }
        let keep: Vec<usize> = remaining.iter().copied().filter(|b| !cancelled.contains(b)).collect();
        let kept_coords: Vec<C64> = remaining
            .iter()
            .enumerate()
            .filter(|(_, b)| !cancelled.contains(b))
            .flat_map(|(pos, _)| coords.as_slice()[pos * d..(pos + 1) * d].iter().copied())
            .collect();
        residual = &target - dict.apply_blocks(&keep, &kept_coords) * gain;
        let done = cancelled.is_empty();
        cancel_order.extend_from_slice(&cancelled);
        trace.push(IterationRecord {
            selected: None,
            residual_norm: residual.norm(),
            cancelled,
            ls_dim,
        });
        remaining = keep;
        if done {
            break;
        }
    }
    Ok(RecoveryResult {
        algorithm: Algorithm::IcMmse,
        support: remaining,
        cancelled: cancel_order,
        estimates,
        trace,
        flags: RecoveryFlags::default(),
        residual,
    })
}
