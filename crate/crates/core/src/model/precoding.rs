use super::SystemConfig;
use crate::linalg;
use crate::rng::{self, Stream};
use crate::{CMatrix, Error, Result};
use std::borrow::Cow;
use std::sync::OnceLock;

/// Pairwise precoder Grams are cached only while they fit in this many bytes.
const GRAM_CACHE_BYTES: usize = 256 << 20;

/// The `T×d` precoders of all `N` online users.
///
/// Precoders are fixed per user, so the cross Grams `P_iᴴ P_j` that the
/// least-squares step needs are computed once and shared by every frame
/// (and every thread) that uses this bank.
#[derive(Debug)]
pub struct PrecoderBank {
    t: usize,
    d: usize,
    orthogonal: bool,
    mats: Vec<CMatrix>,
    spectral: Vec<OnceLock<f64>>,
    gram: Option<Vec<OnceLock<CMatrix>>>,
}

impl PrecoderBank {
    /// Wraps explicit precoders. All must be `t×d` with `d < t`.
    pub fn from_matrices(mats: Vec<CMatrix>, orthogonal: bool) -> Result<Self> {
        let (t, d) = mats
            .first()
            .map(|p| p.shape())
            .ok_or_else(|| Error::InvalidConfig("empty precoder set".into()))?;
        if d >= t {
            return Err(Error::InvalidConfig(format!(
                "precoders need d < T for full column rank, got T={t}, d={d}"
            )));
        }
        if mats.iter().any(|p| p.shape() != (t, d)) {
            return Err(Error::InvalidConfig("precoders differ in shape".into()));
        }
        let n = mats.len();
        let pairs = n * (n + 1) / 2;
        let bytes = pairs
            .saturating_mul(d * d)
            .saturating_mul(std::mem::size_of::<crate::C64>());
        let gram = (bytes <= GRAM_CACHE_BYTES).then(|| (0..pairs).map(|_| OnceLock::new()).collect());
        Ok(Self {
            t,
            d,
            orthogonal,
            spectral: (0..n).map(|_| OnceLock::new()).collect(),
            mats,
            gram,
        })
    }

    pub fn len(&self) -> usize {
        self.mats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mats.is_empty()
    }

    pub fn frame_len(&self) -> usize {
        self.t
    }

    pub fn block_len(&self) -> usize {
        self.d
    }

    pub fn is_orthogonal(&self) -> bool {
        self.orthogonal
    }

    pub fn get(&self, n: usize) -> &CMatrix {
        &self.mats[n]
    }

    pub fn matrices(&self) -> &[CMatrix] {
        &self.mats
    }

    fn pair_slot(&self, lo: usize, hi: usize) -> usize {
        // row-major upper triangle including the diagonal
        let n = self.mats.len();
        lo * n - lo * (lo + 1) / 2 + hi
    }

    /// `P_iᴴ P_j` (d×d).
    pub fn gram(&self, i: usize, j: usize) -> Cow<'_, CMatrix> {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        let compute = || linalg::ad_mul(&self.mats[lo], &self.mats[hi]);
        let upper: Cow<'_, CMatrix> = match &self.gram {
            Some(cache) => Cow::Borrowed(cache[self.pair_slot(lo, hi)].get_or_init(compute)),
            None => Cow::Owned(compute()),
        };
        if i <= j {
            upper
        } else {
            Cow::Owned(upper.adjoint())
        }
    }

    /// Largest singular value of `P_n` (1 for orthonormal columns).
    pub fn spectral_norm(&self, n: usize) -> f64 {
        if self.orthogonal {
            return 1.0;
        }
        *self.spectral[n].get_or_init(|| linalg::spectral_norm(&self.gram(n, n)).sqrt())
    }
}

/// Draws one precoder per online user.
///
/// Entries are CN(0,1) draws taken column by column. In Gaussian mode each
/// column is scaled to unit norm; in orthogonal mode the draw is replaced by
/// the `Q` factor of its thin QR decomposition.
pub fn generate_precoders(cfg: &SystemConfig, rng: &mut Stream) -> Result<PrecoderBank> {
    if cfg.d >= cfg.t {
        return Err(Error::InvalidConfig(format!(
            "cannot build full-rank T×d precoders with d={} >= T={}",
            cfg.d, cfg.t
        )));
    }
    let mats = (0..cfg.n)
        .map(|_| {
            let draws: Vec<_> = (0..cfg.t * cfg.d).map(|_| rng::complex_normal(rng)).collect();
            let raw = CMatrix::from_vec(cfg.t, cfg.d, draws);
            if cfg.precoding_orthogonal {
                raw.qr().q()
            } else {
                normalize_columns(raw)
            }
        })
        .collect();
    PrecoderBank::from_matrices(mats, cfg.precoding_orthogonal)
}

fn normalize_columns(mut p: CMatrix) -> CMatrix {
    for mut col in p.column_iter_mut() {
        let norm = col.norm();
        col /= crate::C64::new(norm, 0.0);
    }
    p
}
