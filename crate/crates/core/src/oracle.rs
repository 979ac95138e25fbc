//! Dense reference computations for small instances.
//!
//! Everything here is built from explicit matrices with textbook formulas and
//! no shared code with the matrix-free operator, so the two can check each
//! other. Sizes are not guarded; keep instances tiny.

use crate::model::{ChannelRealization, Normalization, PrecoderBank};
use crate::{CMatrix, CVector, C64};

/// `[B_1, ..., B_N]` with `B_n = α_n (P_n ⊗ h_n)` built by Kronecker products.
pub fn dense_dictionary(
    precoders: &PrecoderBank,
    channels: &ChannelRealization,
    normalization: Normalization,
) -> CMatrix {
    let m = channels.antennas();
    let blocks: Vec<CMatrix> = (0..precoders.len())
        .map(|n| {
            let h = channels.user(n).clone_owned();
            let alpha = match normalization {
                Normalization::Statistical => 1.0 / (m as f64).sqrt(),
                Normalization::Exact => 1.0 / h.norm(),
            };
            precoders.get(n).kronecker(&h) * C64::new(alpha, 0.0)
        })
        .collect();
    let rows = blocks[0].nrows();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = CMatrix::zeros(rows, cols);
    let mut at = 0;
    for b in &blocks {
        out.columns_mut(at, b.ncols()).copy_from(b);
        at += b.ncols();
    }
    out
}

/// Columns of `dense` belonging to `blocks`, in that order.
pub fn select_blocks(dense: &CMatrix, d: usize, blocks: &[usize]) -> CMatrix {
    let mut out = CMatrix::zeros(dense.nrows(), blocks.len() * d);
    for (pos, &j) in blocks.iter().enumerate() {
        out.columns_mut(pos * d, d).copy_from(&dense.columns(j * d, d));
    }
    out
}

/// `A⁺ y` with the pseudo-inverse formed explicitly from an SVD.
pub fn pinv_solve(a: &CMatrix, y: &CVector) -> CVector {
    let smax = a.clone().singular_values().max();
    let eps = a.nrows().max(a.ncols()) as f64 * f64::EPSILON * smax;
    let pinv = a.clone().pseudo_inverse(eps).expect("non-negative tolerance");
    pinv * y
}

/// Support of size `k` minimizing the least-squares residual, by trying all
/// `C(N, k)` subsets. Ties keep the lexicographically first subset.
pub fn brute_force_support(dense: &CMatrix, d: usize, y: &CVector, k: usize) -> Vec<usize> {
    let n = dense.ncols() / d;
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut subset: Vec<usize> = (0..k).collect();
    loop {
        let a = select_blocks(dense, d, &subset);
        let x = pinv_solve(&a, y);
        let r = (y - &a * x).norm();
        if best.as_ref().is_none_or(|(b, _)| r < *b) {
            best = Some((r, subset.clone()));
        }
        // next k-combination in lexicographic order
        let mut i = k;
        loop {
            if i == 0 {
                return best.map(|(_, s)| s).unwrap_or_default();
            }
            i -= 1;
            if subset[i] < n - k + i {
                subset[i] += 1;
                for q in i + 1..k {
                    subset[q] = subset[q - 1] + 1;
                }
                break;
            }
        }
    }
}

/// `log₂ det(I_MT + ρ₀ B B ᴴ)` through an LU determinant of the full
/// `MT × MT` matrix.
pub fn direct_log2_det(b: &CMatrix, rho0: f64) -> f64 {
    let n = b.nrows();
    let a = CMatrix::identity(n, n) + b * b.adjoint() * C64::new(rho0, 0.0);
    a.determinant().norm().log2()
}

/// Largest singular value via a full SVD.
pub fn spectral_norm_svd(a: &CMatrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.clone().singular_values().max()
}

/// `(1/d) max_{i≠j} ‖B_iᴴ B_j‖₂` by computing every pair with an SVD.
pub fn block_coherence_dense(dense: &CMatrix, d: usize) -> f64 {
    let n = dense.ncols() / d;
    let mut best = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let g = dense.columns(i * d, d).ad_mul(&dense.columns(j * d, d));
                best = best.max(spectral_norm_svd(&g));
            }
        }
    }
    best / d as f64
}
