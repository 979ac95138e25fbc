#![allow(dead_code)]

use sparsemac::model::{
    generate_channels, generate_precoders, synthesize_frame_with, FrameInstance, FrameOptions, Normalization,
    SystemConfig,
};
use sparsemac::operator::BlockDictionary;
use sparsemac::{rng, Execution};
use std::sync::Arc;

/// M=2, N=6, d=2, T=8 with two active users.
pub fn tiny(orthogonal: bool) -> SystemConfig {
    SystemConfig {
        m: 2,
        n: 6,
        n_active: 2,
        d: 2,
        t: 8,
        k: 2,
        precoding_orthogonal: orthogonal,
        ..SystemConfig::desk()
    }
}

pub fn dictionary(cfg: &SystemConfig, seed: u64, norm: Normalization) -> BlockDictionary {
    let p = generate_precoders(cfg, &mut rng::substream(seed, &[rng::TAG_PRECODERS])).unwrap();
    let h = generate_channels(cfg, &mut rng::substream(seed, &[rng::TAG_CHANNELS]));
    BlockDictionary::new(Arc::new(p), h, cfg.rho0, norm)
        .unwrap()
        .with_execution(Execution::Sequential)
}

pub fn frame(cfg: &SystemConfig, dict: &BlockDictionary, seed: u64, noiseless: bool) -> FrameInstance {
    let opts = FrameOptions {
        noiseless,
        support: None,
    };
    synthesize_frame_with(
        cfg,
        dict.precoders(),
        dict.channels(),
        &mut rng::substream(seed, &[rng::TAG_FRAME]),
        &opts,
    )
}

pub fn rel_err(a: &sparsemac::CVector, b: &sparsemac::CVector) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}
