use super::modulation::modulate;
use super::{ChannelRealization, Modulation, PrecoderBank, SystemConfig};
use crate::rng::{self, Stream};
use crate::{CVector, C64};

/// Payload of one active user.
#[derive(Debug, Clone, PartialEq)]
pub struct ActiveUser {
    pub index: usize,
    /// Message length in symbols (`<= d`; the rest of the block is zero padding).
    pub len: usize,
    pub bits: Vec<bool>,
}

/// One Monte-Carlo realization of a frame.
#[derive(Debug, Clone)]
pub struct FrameInstance {
    /// Active user indices, ascending.
    pub support: Vec<usize>,
    /// Payloads, in the same order as `support`.
    pub users: Vec<ActiveUser>,
    /// Stacked symbol blocks (`N*d`), zero outside the support.
    pub s: CVector,
    /// Noise (`M*T`).
    pub z: CVector,
    /// Received vector, `vec(Y)` in column-major order (`M*T`).
    pub y: CVector,
    pub d: usize,
    pub modulation: Modulation,
}

impl FrameInstance {
    pub fn block(&self, j: usize) -> &[C64] {
        &self.s.as_slice()[j * self.d..(j + 1) * self.d]
    }

    pub fn user(&self, j: usize) -> Option<&ActiveUser> {
        self.support
            .binary_search(&j)
            .ok()
            .map(|pos| &self.users[pos])
    }

    pub fn is_active(&self, j: usize) -> bool {
        self.support.binary_search(&j).is_ok()
    }

    pub fn payload_bits(&self) -> usize {
        self.users.iter().map(|u| u.bits.len()).sum()
    }
}

#[derive(Debug, Clone, Default)]
pub struct FrameOptions {
    /// Force `z = 0`.
    pub noiseless: bool,
    /// Use this support instead of drawing one.
    pub support: Option<Vec<usize>>,
}

/// `sqrt(rho0) * sum_n vec(h_n (P_n s_n)ᵀ)` over the nonzero blocks of `s`.
pub fn noiseless_signal(
    cfg: &SystemConfig,
    precoders: &PrecoderBank,
    channels: &ChannelRealization,
    s: &CVector,
) -> CVector {
    let (m, t, d) = (cfg.m, cfg.t, cfg.d);
    let gain = cfg.rho0.sqrt();
    let mut y = CVector::zeros(m * t);
    for n in 0..cfg.n {
        let block = s.rows(n * d, d);
        if block.iter().all(|v| *v == C64::new(0.0, 0.0)) {
            continue;
        }
        let x = precoders.get(n) * block;
        let h = channels.user(n);
        let ys = y.as_mut_slice();
        for (slot, xt) in x.iter().enumerate() {
            let scaled = xt * gain;
            for (ant, hm) in h.iter().enumerate() {
                ys[ant + m * slot] += hm * scaled;
            }
        }
    }
    y
}

/// Draws the support, payloads and noise of one frame and forms `y`.
///
/// Draw order within `rng`: support, message lengths (only when variable),
/// payload bits user by user, then `M*T` noise samples.
pub fn synthesize_frame(
    cfg: &SystemConfig,
    precoders: &PrecoderBank,
    channels: &ChannelRealization,
    rng: &mut Stream,
) -> FrameInstance {
    synthesize_frame_with(cfg, precoders, channels, rng, &FrameOptions::default())
}

pub fn synthesize_frame_with(
    cfg: &SystemConfig,
    precoders: &PrecoderBank,
    channels: &ChannelRealization,
    rng: &mut Stream,
    opts: &FrameOptions,
) -> FrameInstance {
    let d = cfg.d;
    let support = match &opts.support {
        Some(s) => {
            let mut s = s.clone();
            s.sort_unstable();
            s.dedup();
            s
        }
        None => rng::sample_indices(rng, cfg.n, cfg.n_active),
    };
    let lens: Vec<usize> = match cfg.message_len {
        None => vec![d; support.len()],
        Some((lo, hi)) => support
            .iter()
            .map(|_| lo + rng::below(rng, (hi - lo + 1) as u64) as usize)
            .collect(),
    };
    let bps = cfg.modulation.bits_per_symbol();
    let mut s = CVector::zeros(cfg.n * d);
    let users: Vec<ActiveUser> = support
        .iter()
        .zip(&lens)
        .map(|(&index, &len)| {
            let bits: Vec<bool> = (0..len * bps).map(|_| rng::bit(rng)).collect();
            let symbols = modulate(&bits, cfg.modulation).expect("whole number of symbols");
            s.rows_mut(index * d, len).copy_from_slice(&symbols);
            ActiveUser { index, len, bits }
        })
        .collect();
    let mt = cfg.measurements();
    let z = if opts.noiseless {
        CVector::zeros(mt)
    } else {
        CVector::from_iterator(mt, (0..mt).map(|_| rng::complex_normal(rng)))
    };
    let y = noiseless_signal(cfg, precoders, channels, &s) + &z;
    FrameInstance {
        support,
        users,
        s,
        z,
        y,
        d,
        modulation: cfg.modulation,
    }
}
