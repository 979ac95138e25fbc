//! Tiny-instance checks of the matrix-free code against dense references.

use crate::analysis::{block_coherence, capacity_bits, noise_tail_prob, CoherenceOptions};
use crate::model::{
    generate_channels, generate_precoders, synthesize_frame_with, FrameOptions, Normalization, SystemConfig,
};
use crate::operator::{restricted_ls, BlockDictionary};
use crate::oracle;
use crate::recovery::{bomp, RecoveryConfig};
use crate::rng;
use crate::{CVector, Execution, Result};
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn tiny() -> SystemConfig {
    SystemConfig {
        m: 2,
        n: 6,
        n_active: 2,
        d: 2,
        t: 8,
        k: 2,
        precoding_orthogonal: true,
        ..SystemConfig::desk()
    }
}

fn instance(cfg: &SystemConfig, seed: u64, normalization: Normalization) -> Result<BlockDictionary> {
    let p = generate_precoders(cfg, &mut rng::substream(seed, &[rng::TAG_PRECODERS]))?;
    let h = generate_channels(cfg, &mut rng::substream(seed, &[rng::TAG_CHANNELS]));
    Ok(BlockDictionary::new(Arc::new(p), h, cfg.rho0, normalization)?.with_execution(Execution::Sequential))
}

fn check(name: &'static str, worst: f64, tol: f64) -> Check {
    Check {
        name,
        passed: worst <= tol,
        detail: format!("worst deviation {worst:.3e} (tolerance {tol:.0e})"),
    }
}

/// Runs every check on `instances` seeded tiny systems starting at `seed`.
pub fn run_selftest(seed: u64, instances: usize) -> Result<Vec<Check>> {
    let mut cfg = tiny();
    let mut op = 0.0f64;
    let mut ls = 0.0f64;
    let mut coh = 0.0f64;
    let mut det = 0.0f64;
    let mut support_matches = 0usize;
    for i in 0..instances as u64 {
        let s = rng::derive_key(seed, &[i]);
        cfg.precoding_orthogonal = i % 2 == 0;
        let norm = if i % 3 == 0 { Normalization::Exact } else { Normalization::Statistical };
        let dict = instance(&cfg, s, norm)?;
        let dense = oracle::dense_dictionary(dict.precoders(), dict.channels(), norm);
        let mut r = rng::substream(s, &[rng::TAG_FRAME]);
        let x = CVector::from_fn(dict.blocks() * cfg.d, |_, _| rng::complex_normal(&mut r));
        let v = CVector::from_fn(dict.rows(), |_, _| rng::complex_normal(&mut r));
        op = op.max((dict.apply(&x) - &dense * &x).norm() / x.norm());
        op = op.max((dict.adjoint(&v) - dense.ad_mul(&v)).norm() / v.norm());

        let blocks = [1usize, 4];
        let sol = restricted_ls(&dict, &v, &blocks)?;
        let sub = oracle::select_blocks(&dense, cfg.d, &blocks);
        let reference = oracle::pinv_solve(&sub, &v) / crate::C64::new(dict.gain(), 0.0);
        ls = ls.max((&sol.coeffs - reference).norm() / sol.coeffs.norm().max(1e-300));

        let (mu, _) = block_coherence(&dict, None, &CoherenceOptions::default())?;
        coh = coh.max((mu - oracle::block_coherence_dense(&dense, cfg.d)).abs());

        let c = capacity_bits(&dict, &blocks)?;
        let direct = oracle::direct_log2_det(&sub, cfg.rho0);
        det = det.max(((c - direct) / direct).abs());

        let frame = synthesize_frame_with(
            &cfg,
            dict.precoders(),
            dict.channels(),
            &mut r,
            &FrameOptions {
                noiseless: true,
                support: None,
            },
        );
        // greedy selection is compared on unit-norm columns, where block
        // correlations are not skewed by channel strength
        let exact = BlockDictionary::new(
            dict.precoder_bank().clone(),
            dict.channels().clone(),
            cfg.rho0,
            Normalization::Exact,
        )?;
        let dense = oracle::dense_dictionary(dict.precoders(), dict.channels(), Normalization::Exact);
        let got = bomp(&exact, &frame.y, &RecoveryConfig::new(cfg.n_active))?.identified();
        let brute = oracle::brute_force_support(&dense, cfg.d, &frame.y, cfg.n_active);
        support_matches += usize::from(got == brute);
    }
    let mut tail = 0.0f64;
    for d in [1usize, 3, 9, 40] {
        for x in [0.2f64, 2.0, 9.0, 45.0] {
            let want = statrs::function::gamma::gamma_lr(d as f64, x);
            tail = tail.max((noise_tail_prob(x.sqrt(), d, 0.0) - want).abs());
        }
    }
    Ok(vec![
        check("operator matches explicit Kronecker dictionary", op, 1e-12),
        check("restricted least squares matches pseudo-inverse", ls, 1e-10),
        check("pruned block coherence matches full SVD scan", coh, 1e-8),
        check("capacity determinant identity", det, 1e-9),
        check("noise tail matches incomplete gamma", tail, 1e-12),
        Check {
            name: "noiseless BOMP support matches exhaustive search",
            passed: support_matches * 100 >= instances * 99,
            detail: format!("{support_matches}/{instances} instances agree"),
        },
    ])
}
