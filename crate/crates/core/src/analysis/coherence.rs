//! Realization-level coherence quantities of the block dictionary.

use crate::linalg;
use crate::operator::BlockDictionary;
use crate::rng;
use crate::{CVector, Error, Result, C64};

/// Coherence measurements on one realization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherenceProfile {
    /// `(1/d) max_{i≠j} ‖B_iᴴ B_j‖₂`.
    pub mu_b: f64,
    /// Largest `|b_kᴴ b_l|` between distinct columns of one block.
    pub nu: f64,
    /// Smallest active block norm, in dictionary coordinates.
    pub s_l: f64,
    /// Largest active block norm, in dictionary coordinates.
    pub s_u: f64,
    /// `max_j ‖B_jᴴ z‖₂` (or of the stated perturbation).
    pub tau: f64,
    /// Whether `mu_b` came from a random subset of pairs.
    pub subsampled: bool,
}

impl CoherenceProfile {
    /// A profile from supplied numbers rather than a realization.
    pub fn from_values(mu_b: f64, nu: f64, s_l: f64, s_u: f64, tau: f64) -> Self {
        Self {
            mu_b,
            nu,
            s_l,
            s_u,
            tau,
            subsampled: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherenceOptions {
    /// Largest number of block pairs scanned without sampling.
    pub max_pairs: usize,
    /// Scan this many random pairs (with the given seed) when the pair count
    /// exceeds `max_pairs`. Without it, oversized scans are an error.
    pub subsample: Option<(usize, u64)>,
}

impl Default for CoherenceOptions {
    fn default() -> Self {
        Self {
            max_pairs: 2_000_000,
            subsample: None,
        }
    }
}

/// `(1/d) max ‖B_iᴴ B_j‖₂` over distinct pairs of `blocks` (all blocks when
/// `None`), plus whether the scan was subsampled.
///
/// Each pair norm factors as `α_i α_j |h_iᴴ h_j| ‖P_iᴴ P_j‖₂`, bounded above by
/// the channel part times `σ(P_i) σ(P_j)`. Pairs are visited by decreasing
/// bound and the scan stops once no remaining bound can beat the running
/// maximum, so the result is exact without computing every spectral norm.
pub fn block_coherence(
    dict: &BlockDictionary,
    blocks: Option<&[usize]>,
    opts: &CoherenceOptions,
) -> Result<(f64, bool)> {
    let all: Vec<usize>;
    let blocks = match blocks {
        Some(b) => b,
        None => {
            all = (0..dict.blocks()).collect();
            &all
        }
    };
    let n = blocks.len();
    let total = n * n.saturating_sub(1) / 2;
    let bank = dict.precoders();
    let sigma: Vec<f64> = blocks.iter().map(|&j| bank.spectral_norm(j)).collect();
    let mut pairs: Vec<(usize, usize)>;
    let mut subsampled = false;
    if total > opts.max_pairs {
        let Some((count, seed)) = opts.subsample else {
            return Err(Error::SizeCap {
                what: "block pairs for coherence (enable subsampling)",
                requested: total,
                cap: opts.max_pairs,
            });
        };
        let mut r = rng::substream(seed, &[rng::TAG_ANALYSIS, n as u64]);
        pairs = (0..count)
            .map(|_| loop {
                let a = rng::below(&mut r, n as u64) as usize;
                let b = rng::below(&mut r, n as u64) as usize;
                if a != b {
                    break (a.min(b), a.max(b));
                }
            })
            .collect();
        pairs.sort_unstable();
        pairs.dedup();
        subsampled = true;
    } else {
        pairs = Vec::with_capacity(total);
        for a in 0..n {
            for b in a + 1..n {
                pairs.push((a, b));
            }
        }
    }
    let mut bounded: Vec<(f64, f64, usize, usize)> = pairs
        .into_iter()
        .map(|(a, b)| {
            let coupling = dict.channel_coupling(blocks[a], blocks[b]);
            (coupling * sigma[a] * sigma[b], coupling, a, b)
        })
        .collect();
    bounded.sort_by(|x, y| y.0.total_cmp(&x.0).then((x.2, x.3).cmp(&(y.2, y.3))));

    let exec = dict.execution();
    let batch = 4 * rayon_width(exec);
    let mut best = 0.0f64;
    let mut start = 0;
    while start < bounded.len() && bounded[start].0 > best {
        let end = (start + batch).min(bounded.len());
        let chunk = &bounded[start..end];
        let vals = exec.map(chunk.len(), |q| {
            let (bound, coupling, a, b) = chunk[q];
            if bound <= best || coupling == 0.0 {
                return 0.0;
            }
            coupling * linalg::spectral_norm(&bank.gram(blocks[a], blocks[b]))
        });
        best = vals.into_iter().fold(best, f64::max);
        start = end;
    }
    Ok((best / dict.block_len() as f64, subsampled))
}

fn rayon_width(exec: crate::Execution) -> usize {
    match exec {
        crate::Execution::Sequential => 1,
        crate::Execution::Parallel => std::thread::available_parallelism().map_or(1, |n| n.get()),
    }
}

/// Largest off-diagonal `|b_kᴴ b_l|` within any one block of `blocks`.
pub fn sub_coherence(dict: &BlockDictionary, blocks: Option<&[usize]>) -> f64 {
    if dict.precoders().is_orthogonal() {
        // P_jᴴ P_j = I exactly; the numerical residue is rounding noise
        return 0.0;
    }
    let all: Vec<usize>;
    let blocks = match blocks {
        Some(b) => b,
        None => {
            all = (0..dict.blocks()).collect();
            &all
        }
    };
    let d = dict.block_len();
    let vals = dict.execution().map(blocks.len(), |q| {
        let g = dict.gram_block(blocks[q], blocks[q]);
        let mut m = 0.0f64;
        for k in 0..d {
            for l in 0..k {
                m = m.max(g[(k, l)].norm());
            }
        }
        m
    });
    vals.into_iter().fold(0.0, f64::max)
}

/// `(min, max)` of `‖c_j s_j‖₂` over `support`.
pub fn active_block_norms(dict: &BlockDictionary, s: &CVector, support: &[usize]) -> (f64, f64) {
    let d = dict.block_len();
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for &j in support {
        let norm = s.rows(j * d, d).norm() * dict.symbol_gain(j);
        lo = lo.min(norm);
        hi = hi.max(norm);
    }
    if support.is_empty() {
        lo = 0.0;
    }
    (lo, hi)
}

/// `max_j ‖B_jᴴ v‖₂` over `blocks` (all blocks when `None`).
pub fn max_correlation(dict: &BlockDictionary, v: &CVector, blocks: Option<&[usize]>) -> f64 {
    let mut skip = vec![blocks.is_some(); dict.blocks()];
    if let Some(b) = blocks {
        for &j in b {
            skip[j] = false;
        }
    }
    dict.correlation_norms(v, &skip).into_iter().fold(0.0, f64::max)
}

/// Profile of a realization with symbols `s`, noise `z` and active set
/// `support`.
pub fn coherence_profile(
    dict: &BlockDictionary,
    s: &CVector,
    z: &CVector,
    support: &[usize],
    opts: &CoherenceOptions,
) -> Result<CoherenceProfile> {
    let (mu_b, subsampled) = block_coherence(dict, None, opts)?;
    let (s_l, s_u) = active_block_norms(dict, s, support);
    Ok(CoherenceProfile {
        mu_b,
        nu: sub_coherence(dict, None),
        s_l,
        s_u,
        tau: max_correlation(dict, z, None),
        subsampled,
    })
}

/// Profile for one ICBOMP iteration: every quantity is restricted to the
/// blocks outside `cancelled ∪ unidentified`, and the perturbation is the
/// noise plus the signal of the still-unidentified active users.
pub fn iteration_profile(
    dict: &BlockDictionary,
    s: &CVector,
    z: &CVector,
    in_ls: &[usize],
    cancelled: &[usize],
    unidentified: &[usize],
    opts: &CoherenceOptions,
) -> Result<CoherenceProfile> {
    let keep: Vec<usize> = (0..dict.blocks())
        .filter(|j| !cancelled.contains(j) && !unidentified.contains(j))
        .collect();
    let d = dict.block_len();
    let gain = dict.gain();
    let mut perturbation = z.clone();
    for &j in unidentified {
        let c = C64::new(dict.symbol_gain(j) * gain, 0.0);
        let coords: Vec<C64> = s.rows(j * d, d).iter().map(|v| v * c).collect();
        dict.apply_block_into(j, &coords, perturbation.as_mut_slice());
    }
    let (mu_b, subsampled) = block_coherence(dict, Some(&keep), opts)?;
    let (s_l, s_u) = active_block_norms(dict, s, in_ls);
    Ok(CoherenceProfile {
        mu_b,
        nu: sub_coherence(dict, Some(&keep)),
        s_l,
        s_u,
        tau: max_correlation(dict, &perturbation, Some(&keep)),
        subsampled,
    })
}
