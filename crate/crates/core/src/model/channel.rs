use super::SystemConfig;
use crate::rng::{self, Stream};
use crate::CMatrix;

/// Channel vectors of all online users, one per column of an `M×N` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    h: CMatrix,
}

impl ChannelRealization {
    pub fn from_matrix(h: CMatrix) -> Self {
        Self { h }
    }

    pub fn antennas(&self) -> usize {
        self.h.nrows()
    }

    pub fn users(&self) -> usize {
        self.h.ncols()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.h
    }

    pub fn user(&self, n: usize) -> nalgebra::DVectorView<'_, crate::C64> {
        self.h.column(n)
    }
}

/// i.i.d. CN(0,1) channels, drawn user by user (all `M` antennas of user 0 first).
pub fn generate_channels(cfg: &SystemConfig, rng: &mut Stream) -> ChannelRealization {
    let draws: Vec<_> = (0..cfg.m * cfg.n).map(|_| rng::complex_normal(rng)).collect();
    ChannelRealization {
        h: CMatrix::from_vec(cfg.m, cfg.n, draws),
    }
}
