use crate::kv::{KvDoc, KvWriter};
use crate::{Error, Result};
use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Modulation {
    Qpsk,
    Bpsk,
}

impl Modulation {
    pub fn bits_per_symbol(self) -> usize {
        match self {
            Modulation::Qpsk => 2,
            Modulation::Bpsk => 1,
        }
    }

    /// Minimum distance between distinct unit-energy constellation points.
    pub fn min_distance(self) -> f64 {
        match self {
            Modulation::Qpsk => std::f64::consts::SQRT_2,
            Modulation::Bpsk => 2.0,
        }
    }
}

impl FromStr for Modulation {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "qpsk" => Ok(Modulation::Qpsk),
            "bpsk" => Ok(Modulation::Bpsk),
            other => Err(format!("unknown modulation `{other}` (qpsk | bpsk)")),
        }
    }
}

impl fmt::Display for Modulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Modulation::Qpsk => "qpsk",
            Modulation::Bpsk => "bpsk",
        })
    }
}

/// Error-correction capability `t_c` of the per-message code.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Correction {
    /// The decoder never certifies a block (ICBOMP degenerates to BOMP).
    Never,
    /// Up to this many bit errors are corrected and certified.
    UpTo(u32),
    /// Every block of an active user is corrected.
    Unlimited,
}

impl Correction {
    pub fn accepts(self, bit_errors: usize) -> bool {
        match self {
            Correction::Never => false,
            Correction::UpTo(t) => bit_errors <= t as usize,
            Correction::Unlimited => true,
        }
    }

    /// Bit-error threshold used when counting frame errors: a message is in
    /// error when it carries more than this many bit errors.
    pub fn frame_error_threshold(self) -> Option<usize> {
        match self {
            Correction::Never => Some(0),
            Correction::UpTo(t) => Some(t as usize),
            Correction::Unlimited => None,
        }
    }
}

impl FromStr for Correction {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "never" | "-1" => Ok(Correction::Never),
            "inf" | "unlimited" => Ok(Correction::Unlimited),
            other => other
                .parse::<u32>()
                .map(Correction::UpTo)
                .map_err(|_| format!("expected a bit count, `never` or `inf`, got `{other}`")),
        }
    }
}

impl fmt::Display for Correction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Correction::Never => f.write_str("never"),
            Correction::UpTo(t) => write!(f, "{t}"),
            Correction::Unlimited => f.write_str("inf"),
        }
    }
}

/// Column scaling of the dictionary blocks.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Normalization {
    /// `B_n = (P_n ⊗ h_n) / sqrt(M)`: columns have unit norm on average over channels.
    #[default]
    Statistical,
    /// `B_n = (P_n ⊗ h_n) / ‖h_n‖`: every column has exactly unit norm.
    Exact,
}

/// Every scenario parameter of one system.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemConfig {
    /// Base-station antennas `M`.
    pub m: usize,
    /// Online users `N`.
    pub n: usize,
    /// Active users `N_a`.
    pub n_active: usize,
    /// Message block length `d` in symbols.
    pub d: usize,
    /// Frame length `T` in symbols.
    pub t: usize,
    /// Uplink SNR, linear.
    pub rho0: f64,
    /// Maximum detector iterations `K`.
    pub k: usize,
    /// Orthonormal precoder columns (sub-coherence zero) instead of normalized Gaussian columns.
    pub precoding_orthogonal: bool,
    pub modulation: Modulation,
    /// Correctable bits per message.
    pub t_c: Correction,
    pub seed: u64,
    /// Optional message length range `[min, max]` in symbols; messages shorter
    /// than `d` are zero-padded. `None` means every message has length `d`.
    pub message_len: Option<(usize, usize)>,
    pub normalization: Normalization,
    /// Residual-norm threshold for stopping before `K` iterations.
    pub early_stop: Option<f64>,
    /// Code rate applied to reported throughput.
    pub code_rate: Option<f64>,
}

impl SystemConfig {
    /// Desk-scale scenario: M=8, N=40, d=50, T=250, K=20, N_a=12 at 8 dB.
    pub fn desk() -> Self {
        Self {
            m: 8,
            n: 40,
            n_active: 12,
            d: 50,
            t: 250,
            rho0: db_to_linear(8.0),
            k: 20,
            precoding_orthogonal: true,
            modulation: Modulation::Qpsk,
            t_c: Correction::UpTo(2),
            seed: 1,
            message_len: None,
            normalization: Normalization::Statistical,
            early_stop: None,
            code_rate: None,
        }
    }

    /// Measurements per frame, `M*T`.
    pub fn measurements(&self) -> usize {
        self.m * self.t
    }

    /// `floor(MT / d)`: users a fully used frame can carry, and the iteration cap.
    pub fn max_users(&self) -> usize {
        self.measurements() / self.d
    }

    /// `MT < Nd`: the under-determined regime the detectors target.
    pub fn is_underdetermined(&self) -> bool {
        self.measurements() < self.n * self.d
    }

    pub fn esn0_db(&self) -> f64 {
        linear_to_db(self.rho0)
    }

    pub fn with_esn0_db(mut self, db: f64) -> Self {
        self.rho0 = db_to_linear(db);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.m == 0 || self.n == 0 || self.d == 0 || self.t == 0 {
            return bad("M, N, d and T must be positive".into());
        }
        if self.d >= self.t {
            return bad(format!("block length d={} must be below T={}", self.d, self.t));
        }
        if self.n_active > self.n {
            return bad(format!("N_a={} exceeds N={}", self.n_active, self.n));
        }
        if self.k == 0 || self.k > self.max_users() {
            return bad(format!(
                "K={} must lie in 1..=floor(MT/d)={}",
                self.k,
                self.max_users()
            ));
        }
        if !(self.rho0.is_finite() && self.rho0 > 0.0) {
            return bad(format!("rho0={} must be positive", self.rho0));
        }
        if let Some((lo, hi)) = self.message_len {
            if lo == 0 || lo > hi || hi > self.d {
                return bad(format!("message length range [{lo}, {hi}] must satisfy 1 <= min <= max <= d"));
            }
        }
        if let Some(eps) = self.early_stop {
            if !(eps.is_finite() && eps >= 0.0) {
                return bad(format!("early_stop={eps} must be a non-negative number"));
            }
        }
        if let Some(rate) = self.code_rate {
            if !(rate > 0.0 && rate <= 1.0) {
                return bad(format!("code_rate={rate} must lie in (0, 1]"));
            }
        }
        Ok(())
    }

    /// Consumes the scenario keys from `doc`; the caller decides about leftovers.
    pub fn take_from(doc: &mut KvDoc) -> Result<Self> {
        let rho0: Option<f64> = doc.take("rho0")?;
        let esn0: Option<f64> = doc.take("esn0_db")?;
        let rho0 = match (rho0, esn0) {
            (Some(r), None) => r,
            (None, Some(db)) => db_to_linear(db),
            (Some(_), Some(_)) => {
                return Err(Error::InvalidConfig(
                    "give either `rho0` or `esn0_db`, not both".into(),
                ))
            }
            (None, None) => {
                return Err(Error::InvalidConfig(
                    "missing mandatory key `rho0` (or `esn0_db`)".into(),
                ))
            }
        };
        let lo: Option<usize> = doc.take("msg_len_min")?;
        let hi: Option<usize> = doc.take("msg_len_max")?;
        let message_len = match (lo, hi) {
            (None, None) => None,
            (Some(lo), Some(hi)) => Some((lo, hi)),
            _ => {
                return Err(Error::InvalidConfig(
                    "`msg_len_min` and `msg_len_max` go together".into(),
                ))
            }
        };
        let normalization = if doc.take::<bool>("normalize_columns")?.unwrap_or(false) {
            Normalization::Exact
        } else {
            Normalization::Statistical
        };
        let cfg = Self {
            m: doc.require("M")?,
            n: doc.require("N")?,
            n_active: doc.require("N_a")?,
            d: doc.require("d")?,
            t: doc.require("T")?,
            rho0,
            k: doc.require("K")?,
            precoding_orthogonal: doc.take("precoding_orthogonal")?.unwrap_or(true),
            modulation: doc.require("modulation")?,
            t_c: doc.require("t_c")?,
            seed: doc.require("seed")?,
            message_len,
            normalization,
            early_stop: doc.take("early_stop")?,
            code_rate: doc.take("code_rate")?,
        };
        Ok(cfg)
    }

    /// Parses a scenario file and validates it.
    pub fn parse(text: &str) -> Result<Self> {
        let mut doc = KvDoc::parse(text)?;
        let cfg = Self::take_from(&mut doc)?;
        doc.finish()?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn write_kv(&self, w: &mut KvWriter) {
        w.put("M", self.m)
            .put("N", self.n)
            .put("N_a", self.n_active)
            .put("d", self.d)
            .put("T", self.t)
            .put("rho0", self.rho0)
            .put("K", self.k)
            .put("precoding_orthogonal", self.precoding_orthogonal)
            .put("modulation", self.modulation)
            .put("t_c", self.t_c)
            .put("seed", self.seed);
        if let Some((lo, hi)) = self.message_len {
            w.put("msg_len_min", lo).put("msg_len_max", hi);
        }
        if self.normalization == Normalization::Exact {
            w.put("normalize_columns", true);
        }
        if let Some(eps) = self.early_stop {
            w.put("early_stop", eps);
        }
        if let Some(rate) = self.code_rate {
            w.put("code_rate", rate);
        }
    }

    pub fn to_kv_string(&self) -> String {
        let mut w = KvWriter::new();
        self.write_kv(&mut w);
        w.finish()
    }
}

/// Es/N0 in dB to linear `rho0`; unit-power symbols, unit-norm precoder
/// columns and unit-variance noise make the two the same quantity.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}
