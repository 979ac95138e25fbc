//! Least squares restricted to a set of blocks.
//!
//! Solves `min_c ‖target - gain * B_Λ c‖` through the normal equations, with
//! the Gram matrix of `B_Λ` assembled from cached precoder Grams and factored
//! incrementally as blocks are appended. When the Gram is not positive
//! definite or its estimated 1-norm condition number reaches [`COND_LIMIT`], the
//! solve falls back to an SVD minimum-norm solution of the materialized `B_Λ`.

use super::{BlockDictionary, Selection};
use crate::linalg::BlockCholesky;
use crate::{CMatrix, CVector, Error, Result, C64};

/// Condition estimate at which normal equations are abandoned.
pub const COND_LIMIT: f64 = 1e6;

#[derive(Debug, Clone)]
pub struct LsSolution {
    pub blocks: Vec<usize>,
    /// Dictionary coordinates stacked in `blocks` order (`|Λ| d`).
    pub coeffs: CVector,
    /// `target - gain * B_Λ coeffs`.
    pub residual: CVector,
    pub rank_deficient: bool,
    pub dense_fallback: bool,
    /// Estimated 1-norm condition number of `B_Λᴴ B_Λ` (infinite when the
    /// Gram was not positive definite).
    pub cond_estimate: f64,
}

impl LsSolution {
    pub fn block_coeffs(&self, pos: usize, d: usize) -> &[C64] {
        &self.coeffs.as_slice()[pos * d..(pos + 1) * d]
    }

    /// Symbol estimate of the block at position `pos` (coordinates divided by
    /// the block's symbol gain).
    pub fn symbols(&self, dict: &BlockDictionary, pos: usize) -> Vec<C64> {
        let c = dict.symbol_gain(self.blocks[pos]);
        let inv = if c > 0.0 { 1.0 / c } else { 0.0 };
        self.block_coeffs(pos, dict.block_len())
            .iter()
            .map(|v| v * inv)
            .collect()
    }
}

/// One-shot restricted least squares.
pub fn restricted_ls(dict: &BlockDictionary, y: &CVector, blocks: &[usize]) -> Result<LsSolution> {
    let mut ls = IncrementalLs::new(dict, y.clone());
    for &j in blocks {
        ls.push(j)?;
    }
    Ok(ls.solve())
}

/// Normal-equation state that grows one block at a time.
#[derive(Debug, Clone)]
pub struct IncrementalLs<'a> {
    dict: &'a BlockDictionary,
    target: CVector,
    blocks: Vec<usize>,
    chol: BlockCholesky,
    /// Column absolute sums of the Gram, for `‖G‖₁`.
    col_sums: Vec<f64>,
    /// What each block added to the column sums of the blocks before it.
    contrib: Vec<Vec<f64>>,
    /// `B_Λᴴ target`.
    rhs: Vec<C64>,
    /// Set once the Gram stopped being usable; cleared by a rebuild.
    dense: bool,
}

impl<'a> IncrementalLs<'a> {
    pub fn new(dict: &'a BlockDictionary, target: CVector) -> Self {
        Self {
            dict,
            target,
            blocks: Vec::new(),
            chol: BlockCholesky::new(),
            col_sums: Vec::new(),
            contrib: Vec::new(),
            rhs: Vec::new(),
            dense: false,
        }
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    pub fn target(&self) -> &CVector {
        &self.target
    }

    /// Number of unknowns `|Λ| d`.
    pub fn dim(&self) -> usize {
        self.blocks.len() * self.dict.block_len()
    }

    pub fn push(&mut self, j: usize) -> Result<()> {
        let d = self.dict.block_len();
        if j >= self.dict.blocks() {
            return Err(Error::Selection(format!("block {j} out of range")));
        }
        if self.blocks.contains(&j) {
            return Err(Error::Selection(format!("block {j} selected twice")));
        }
        if (self.blocks.len() + 1) * d > self.dict.rows() {
            return Err(Error::Selection(format!(
                "{} blocks of length {d} exceed {} measurements",
                self.blocks.len() + 1,
                self.dict.rows()
            )));
        }
        let n = self.dim();
        let mut cross = CMatrix::zeros(n, d);
        for (pos, &i) in self.blocks.iter().enumerate() {
            let g = self.dict.gram_block(i, j);
            cross.view_mut((pos * d, 0), (d, d)).copy_from(&g);
        }
        let diag = self.dict.gram_block(j, j);
        if !self.dense && self.chol.append(&cross, &diag).is_err() {
            self.dense = true;
        }
        // column `row` of G gains the entries G(j-block, row) = cross[row, :]ᴴ
        let added: Vec<f64> = (0..n)
            .map(|row| cross.row(row).iter().map(|v| v.norm()).sum::<f64>())
            .collect();
        for (sum, a) in self.col_sums.iter_mut().zip(&added) {
            *sum += a;
        }
        self.contrib.push(added);
        for k in 0..d {
            let s = cross.column(k).iter().map(|v| v.norm()).sum::<f64>()
                + diag.column(k).iter().map(|v| v.norm()).sum::<f64>();
            self.col_sums.push(s);
        }
        self.rhs
            .extend(self.dict.block_correlate(&self.target, j).iter().copied());
        self.blocks.push(j);
        Ok(())
    }

    /// Replaces the target, keeping the factorization.
    pub fn retarget(&mut self, target: CVector) {
        self.target = target;
        self.rhs.clear();
        for &j in &self.blocks {
            self.rhs
                .extend(self.dict.block_correlate(&self.target, j).iter().copied());
        }
    }

    /// Drops the given blocks and refactors the remaining ones in their
    /// original order. The factor of the blocks ahead of the first removed
    /// one is kept.
    pub fn remove(&mut self, gone: &[usize]) -> Result<()> {
        let Some(first) = self.blocks.iter().position(|j| gone.contains(j)) else {
            return Ok(());
        };
        let keep: Vec<usize> = self.blocks[first..]
            .iter()
            .copied()
            .filter(|j| !gone.contains(j))
            .collect();
        if self.dense {
            let mut all = self.blocks[..first].to_vec();
            all.extend(keep);
            return self.rebuild(&all);
        }
        let n = first * self.dict.block_len();
        for added in self.contrib.drain(first..) {
            for (sum, a) in self.col_sums[..n].iter_mut().zip(&added) {
                *sum -= a;
            }
        }
        self.col_sums.truncate(n);
        self.chol.truncate(n);
        self.rhs.truncate(n);
        self.blocks.truncate(first);
        for j in keep {
            self.push(j)?;
        }
        Ok(())
    }

    fn rebuild(&mut self, keep: &[usize]) -> Result<()> {
        let target = std::mem::replace(&mut self.target, CVector::zeros(0));
        *self = Self::new(self.dict, target);
        for &j in keep {
            self.push(j)?;
        }
        Ok(())
    }

    fn gram_norm1(&self) -> f64 {
        self.col_sums.iter().copied().fold(0.0, f64::max)
    }

    pub fn solve(&self) -> LsSolution {
        let gain = self.dict.gain();
        let n = self.dim();
        if n == 0 {
            return LsSolution {
                blocks: Vec::new(),
                coeffs: CVector::zeros(0),
                residual: self.target.clone(),
                rank_deficient: false,
                dense_fallback: false,
                cond_estimate: 0.0,
            };
        }
        let mut x = self.rhs.clone();
        let cond = if self.dense {
            f64::INFINITY
        } else {
            self.gram_norm1() * self.chol.inverse_norm1_estimate_and_solve(&mut x)
        };
        let (coeffs, rank_deficient, dense_fallback) = if cond < COND_LIMIT {
            debug_assert_eq!(self.chol.dim(), n);
            let x = CVector::from_vec(x) / C64::new(gain, 0.0);
            (x, false, false)
        } else {
            let (x, rd) = self.dense_solve();
            (x, rd, true)
        };
        let fit = self.dict.apply_blocks(&self.blocks, coeffs.as_slice());
        let residual = &self.target - fit * C64::new(gain, 0.0);
        LsSolution {
            blocks: self.blocks.clone(),
            coeffs,
            residual,
            rank_deficient,
            dense_fallback,
            cond_estimate: cond,
        }
    }

    fn dense_solve(&self) -> (CVector, bool) {
        let gain = self.dict.gain();
        // the push guard keeps |Λ| d <= MT, so the cap only bites on huge frames
        let b = self
            .dict
            .materialize_capped(Selection::Blocks(&self.blocks), usize::MAX)
            .expect("blocks validated on push")
            * C64::new(gain, 0.0);
        let (rows, cols) = b.shape();
        let svd = b.svd(true, true);
        let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
        let eps = rows.max(cols) as f64 * f64::EPSILON * smax;
        let rank = svd.singular_values.iter().filter(|&&s| s > eps).count();
        let x = svd
            .solve(&self.target, eps)
            .expect("both singular vector sets were computed");
        (x, rank < cols)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        generate_channels, generate_precoders, ChannelRealization, Normalization, PrecoderBank,
        SystemConfig,
    };
    use crate::rng;
    use std::sync::Arc;

    fn setup(orthogonal: bool) -> (BlockDictionary, CVector) {
        let cfg = SystemConfig {
            m: 3,
            n: 8,
            d: 3,
            t: 7,
            k: 3,
            n_active: 3,
            precoding_orthogonal: orthogonal,
            ..SystemConfig::desk()
        };
        let p = generate_precoders(&cfg, &mut rng::substream(5, &[1])).unwrap();
        let h = generate_channels(&cfg, &mut rng::substream(5, &[2]));
        let dict = BlockDictionary::new(Arc::new(p), h, 2.0, Normalization::Statistical).unwrap();
        let mut r = rng::substream(5, &[3]);
        let y = CVector::from_fn(dict.rows(), |_, _| rng::complex_normal(&mut r));
        (dict, y)
    }

    #[test]
    fn incremental_matches_from_scratch() {
        let (dict, y) = setup(false);
        let mut inc = IncrementalLs::new(&dict, y.clone());
        for j in [4, 1, 6] {
            inc.push(j).unwrap();
        }
        let a = inc.solve();
        let b = restricted_ls(&dict, &y, &[4, 1, 6]).unwrap();
        assert!((a.coeffs - b.coeffs).camax() < 1e-8);
        assert!(!a.dense_fallback);
    }

    #[test]
    fn residual_is_orthogonal_to_selection() {
        let (dict, y) = setup(true);
        let sol = restricted_ls(&dict, &y, &[0, 2, 5]).unwrap();
        for &j in &sol.blocks {
            assert!(dict.block_correlate(&sol.residual, j).norm() < 1e-9 * y.norm());
        }
    }

    #[test]
    fn remove_equals_fresh_solve() {
        let (dict, y) = setup(false);
        let mut inc = IncrementalLs::new(&dict, y.clone());
        for j in [3, 0, 7, 2] {
            inc.push(j).unwrap();
        }
        inc.remove(&[0, 2]).unwrap();
        assert_eq!(inc.blocks(), &[3, 7]);
        let fresh = restricted_ls(&dict, &y, &[3, 7]).unwrap();
        assert!((inc.solve().coeffs - fresh.coeffs).camax() < 1e-10);
    }

    #[test]
    fn duplicate_block_falls_back_to_min_norm() {
        // two users sharing channel and precoder give identical blocks
        let cfg = SystemConfig {
            m: 2,
            n: 2,
            d: 2,
            t: 5,
            k: 1,
            n_active: 1,
            precoding_orthogonal: false,
            ..SystemConfig::desk()
        };
        let base = generate_precoders(&cfg, &mut rng::substream(9, &[1])).unwrap();
        let p = base.get(0).clone();
        let bank = PrecoderBank::from_matrices(vec![p.clone(), p], false).unwrap();
        let h0 = generate_channels(&cfg, &mut rng::substream(9, &[2]));
        let col = h0.user(0).clone_owned();
        let h = ChannelRealization::from_matrix(CMatrix::from_columns(&[col.clone(), col]));
        let dict = BlockDictionary::new(Arc::new(bank), h, 1.0, Normalization::Statistical).unwrap();
        let mut r = rng::substream(9, &[3]);
        let y = CVector::from_fn(dict.rows(), |_, _| rng::complex_normal(&mut r));
        let sol = restricted_ls(&dict, &y, &[0, 1]).unwrap();
        assert!(sol.dense_fallback);
        assert!(sol.rank_deficient);
        // minimum norm splits the energy evenly between the copies
        assert!((CVector::from_column_slice(sol.block_coeffs(0, 2))
            - CVector::from_column_slice(sol.block_coeffs(1, 2)))
        .camax()
            < 1e-9);
    }

    #[test]
    fn rejects_bad_selections() {
        let (dict, y) = setup(true);
        let mut inc = IncrementalLs::new(&dict, y);
        inc.push(1).unwrap();
        assert!(inc.push(1).is_err());
        assert!(inc.push(99).is_err());
    }
}
