//! The block dictionary `B = [B_1, ..., B_N]` with `B_n = α_n (P_n ⊗ h_n)`,
//! applied without ever forming the `MT × Nd` matrix.
//!
//! `vec` is column-major over the `M×T` receive matrix, so `(B_n x)[m + M t] =
//! α_n h_n[m] (P_n x)[t]` and `B_nᴴ r = α_n P_nᴴ (R^T conj(h_n))`-style
//! contractions cost `O(MT + Td)` per block.

mod ls;

pub use ls::{restricted_ls, IncrementalLs, LsSolution, COND_LIMIT};

use crate::model::{ChannelRealization, Normalization, PrecoderBank};
use crate::{CMatrix, CVector, Error, Execution, Result, C64};
use std::sync::Arc;

/// Default cap on explicitly materialized entries.
pub const MATERIALIZE_CAP: usize = 10_000_000;

#[derive(Debug, Clone)]
pub struct BlockDictionary {
    precoders: Arc<PrecoderBank>,
    channels: ChannelRealization,
    m: usize,
    t: usize,
    d: usize,
    rho0: f64,
    normalization: Normalization,
    alpha: Vec<f64>,
    exec: Execution,
}

/// Which blocks to materialize.
#[derive(Debug, Clone, Copy)]
pub enum Selection<'a> {
    All,
    Blocks(&'a [usize]),
}

impl BlockDictionary {
    pub fn new(
        precoders: Arc<PrecoderBank>,
        channels: ChannelRealization,
        rho0: f64,
        normalization: Normalization,
    ) -> Result<Self> {
        let (t, d) = (precoders.frame_len(), precoders.block_len());
        let m = channels.antennas();
        if channels.users() != precoders.len() {
            return Err(Error::InvalidConfig(format!(
                "{} channels for {} precoders",
                channels.users(),
                precoders.len()
            )));
        }
        let alpha = (0..channels.users())
            .map(|n| match normalization {
                Normalization::Statistical => 1.0 / (m as f64).sqrt(),
                Normalization::Exact => {
                    let norm = channels.user(n).norm();
                    if norm > 0.0 {
                        1.0 / norm
                    } else {
                        0.0
                    }
                }
            })
            .collect();
        Ok(Self {
            precoders,
            channels,
            m,
            t,
            d,
            rho0,
            normalization,
            alpha,
            exec: Execution::default(),
        })
    }

    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    pub fn execution(&self) -> Execution {
        self.exec
    }

    pub fn antennas(&self) -> usize {
        self.m
    }

    pub fn frame_len(&self) -> usize {
        self.t
    }

    pub fn block_len(&self) -> usize {
        self.d
    }

    pub fn blocks(&self) -> usize {
        self.alpha.len()
    }

    /// `MT`.
    pub fn rows(&self) -> usize {
        self.m * self.t
    }

    pub fn rho0(&self) -> f64 {
        self.rho0
    }

    /// Measurement gain `sqrt(rho0 * M)` in `y = gain * B * c + z`.
    pub fn gain(&self) -> f64 {
        (self.rho0 * self.m as f64).sqrt()
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn precoders(&self) -> &PrecoderBank {
        &self.precoders
    }

    pub fn precoder_bank(&self) -> &Arc<PrecoderBank> {
        &self.precoders
    }

    pub fn channels(&self) -> &ChannelRealization {
        &self.channels
    }

    /// Column scale `α_j` of block `j`.
    pub fn column_scale(&self, j: usize) -> f64 {
        self.alpha[j]
    }

    /// Factor `c_j = 1 / (α_j sqrt(M))` mapping symbols to dictionary
    /// coordinates: block `j` of the unknown is `c_j s_j`. Equals 1 under
    /// statistical normalization and `‖h_j‖ / sqrt(M)` under exact normalization.
    pub fn symbol_gain(&self, j: usize) -> f64 {
        let a = self.alpha[j];
        if a == 0.0 {
            0.0
        } else {
            1.0 / (a * (self.m as f64).sqrt())
        }
    }

    /// `out += B_j x`.
    pub fn apply_block_into(&self, j: usize, x: &[C64], out: &mut [C64]) {
        debug_assert_eq!(x.len(), self.d);
        debug_assert_eq!(out.len(), self.rows());
        let p = self.precoders.get(j);
        let h = self.channels.user(j);
        let a = self.alpha[j];
        for slot in 0..self.t {
            let mut u = C64::new(0.0, 0.0);
            for (k, xk) in x.iter().enumerate() {
                u += p[(slot, k)] * xk;
            }
            let u = u * a;
            let base = slot * self.m;
            for (ant, hm) in h.iter().enumerate() {
                out[base + ant] += hm * u;
            }
        }
    }

    /// `B x` for a full `Nd` coefficient vector.
    pub fn apply(&self, x: &CVector) -> CVector {
        let mut out = CVector::zeros(self.rows());
        for j in 0..self.blocks() {
            let block = &x.as_slice()[j * self.d..(j + 1) * self.d];
            if block.iter().any(|v| *v != C64::new(0.0, 0.0)) {
                self.apply_block_into(j, block, out.as_mut_slice());
            }
        }
        out
    }

    /// `B_Λ c` for coefficients stacked in `blocks` order.
    pub fn apply_blocks(&self, blocks: &[usize], coeffs: &[C64]) -> CVector {
        let mut out = CVector::zeros(self.rows());
        for (pos, &j) in blocks.iter().enumerate() {
            self.apply_block_into(j, &coeffs[pos * self.d..(pos + 1) * self.d], out.as_mut_slice());
        }
        out
    }

    /// `B_jᴴ r` (length `d`).
    pub fn block_correlate(&self, r: &CVector, j: usize) -> CVector {
        let rs = r.as_slice();
        let h = self.channels.user(j);
        let p = self.precoders.get(j);
        let a = self.alpha[j];
        // w_t = h_jᴴ R[:, t]
        let w: Vec<C64> = (0..self.t)
            .map(|slot| {
                let col = &rs[slot * self.m..(slot + 1) * self.m];
                h.iter().zip(col).map(|(hm, rm)| hm.conj() * rm).sum()
            })
            .collect();
        CVector::from_fn(self.d, |k, _| {
            let pk = p.column(k);
            let acc: C64 = pk.iter().zip(&w).map(|(pt, wt)| pt.conj() * wt).sum();
            acc * a
        })
    }

    /// `Bᴴ r` (length `Nd`).
    pub fn adjoint(&self, r: &CVector) -> CVector {
        let parts = self.exec.map(self.blocks(), |j| self.block_correlate(r, j));
        let mut out = CVector::zeros(self.blocks() * self.d);
        for (j, part) in parts.into_iter().enumerate() {
            out.rows_mut(j * self.d, self.d).copy_from(&part);
        }
        out
    }

    /// `‖B_jᴴ r‖₂` for every block; entries with `skip[j]` set are reported as 0.
    pub fn correlation_norms(&self, r: &CVector, skip: &[bool]) -> Vec<f64> {
        self.exec.map(self.blocks(), |j| {
            if skip.get(j).copied().unwrap_or(false) {
                0.0
            } else {
                self.block_correlate(r, j).norm()
            }
        })
    }

    /// `B_iᴴ B_j = α_i α_j (h_iᴴ h_j) P_iᴴ P_j` (d×d).
    pub fn gram_block(&self, i: usize, j: usize) -> CMatrix {
        let hh = self.channels.user(i).dotc(&self.channels.user(j));
        let scale = hh * (self.alpha[i] * self.alpha[j]);
        self.precoders.gram(i, j).as_ref() * scale
    }

    /// `α_i α_j |h_iᴴ h_j|`, the channel part of `‖B_iᴴ B_j‖`.
    pub fn channel_coupling(&self, i: usize, j: usize) -> f64 {
        self.channels.user(i).dotc(&self.channels.user(j)).norm() * self.alpha[i] * self.alpha[j]
    }

    /// Explicit `MT × (|sel| d)` matrix, refusing more than `cap` entries.
    pub fn materialize_capped(&self, sel: Selection<'_>, cap: usize) -> Result<CMatrix> {
        let all: Vec<usize>;
        let blocks = match sel {
            Selection::All => {
                all = (0..self.blocks()).collect();
                &all[..]
            }
            Selection::Blocks(b) => b,
        };
        let requested = self.rows().saturating_mul(blocks.len() * self.d);
        if requested > cap {
            return Err(Error::SizeCap {
                what: "materialized dictionary",
                requested,
                cap,
            });
        }
        if let Some(&bad) = blocks.iter().find(|&&j| j >= self.blocks()) {
            return Err(Error::Selection(format!("block {bad} out of range")));
        }
        let mut out = CMatrix::zeros(self.rows(), blocks.len() * self.d);
        for (pos, &j) in blocks.iter().enumerate() {
            let p = self.precoders.get(j);
            let h = self.channels.user(j);
            let a = self.alpha[j];
            for k in 0..self.d {
                let mut col = out.column_mut(pos * self.d + k);
                for slot in 0..self.t {
                    for ant in 0..self.m {
                        col[ant + self.m * slot] = h[ant] * p[(slot, k)] * a;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn materialize(&self, sel: Selection<'_>) -> Result<CMatrix> {
        self.materialize_capped(sel, MATERIALIZE_CAP)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{generate_channels, generate_precoders, SystemConfig};
    use crate::rng;

    fn tiny(normalization: Normalization) -> BlockDictionary {
        let cfg = SystemConfig {
            m: 2,
            n: 4,
            d: 2,
            t: 6,
            k: 2,
            n_active: 2,
            precoding_orthogonal: false,
            ..SystemConfig::desk()
        };
        let p = generate_precoders(&cfg, &mut rng::substream(1, &[1])).unwrap();
        let h = generate_channels(&cfg, &mut rng::substream(1, &[2]));
        BlockDictionary::new(Arc::new(p), h, cfg.rho0, normalization).unwrap()
    }

    #[test]
    fn correlate_of_zero_is_zero() {
        let dict = tiny(Normalization::Statistical);
        let r = CVector::zeros(dict.rows());
        assert_eq!(dict.block_correlate(&r, 2).norm(), 0.0);
    }

    #[test]
    fn exact_normalization_gives_unit_columns() {
        let dict = tiny(Normalization::Exact);
        let b = dict.materialize(Selection::All).unwrap();
        for col in b.column_iter() {
            assert!((col.norm() - 1.0).abs() < 1e-12);
        }
        let stat = tiny(Normalization::Statistical);
        for j in 0..4 {
            let expect = stat.channels().user(j).norm() / 2f64.sqrt();
            assert!((dict.symbol_gain(j) - expect).abs() < 1e-12);
            assert!((stat.symbol_gain(j) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn gram_block_matches_materialized_product() {
        let dict = tiny(Normalization::Statistical);
        let b = dict.materialize(Selection::All).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let explicit = b.columns(i * 2, 2).ad_mul(&b.columns(j * 2, 2));
                assert!((dict.gram_block(i, j) - explicit).camax() < 1e-12);
            }
        }
    }

    #[test]
    fn cap_and_range_errors() {
        let dict = tiny(Normalization::Statistical);
        assert!(matches!(
            dict.materialize_capped(Selection::All, 10),
            Err(Error::SizeCap { requested: 96, .. })
        ));
        assert!(matches!(
            dict.materialize(Selection::Blocks(&[7])),
            Err(Error::Selection(_))
        ));
    }
}
