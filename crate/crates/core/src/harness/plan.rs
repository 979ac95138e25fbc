//! Experiment plans and their key-value file format.
//!
//! A plan file holds every scenario key of [`SystemConfig`] plus:
//!
//! ```text
//! name = desk
//! axis = esn0_db            # esn0_db | n_active | antennas | frame_len | users
//! values = 0, 4, 8, 12      # strictly increasing
//! algorithms = bomp, icbomp, ic-mmse
//! trials = 200
//! seed_policy = independent # independent | shared
//! redraw_precoders = false
//! analysis = false
//! out_dir = out/desk
//! ```

use crate::kv::{KvDoc, KvWriter};
use crate::model::SystemConfig;
use crate::recovery::Algorithm;
use crate::{Error, Result};
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    EsN0Db,
    NActive,
    Antennas,
    FrameLen,
    Users,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::EsN0Db => "esn0_db",
            Axis::NActive => "n_active",
            Axis::Antennas => "antennas",
            Axis::FrameLen => "frame_len",
            Axis::Users => "users",
        }
    }

    /// Whether points on this axis need their own precoder bank.
    pub fn changes_precoders(self) -> bool {
        matches!(self, Axis::FrameLen | Axis::Users)
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "esn0_db" | "esn0" | "snr" => Axis::EsN0Db,
            "n_active" | "n_a" => Axis::NActive,
            "antennas" | "m" => Axis::Antennas,
            "frame_len" | "t" => Axis::FrameLen,
            "users" | "n" => Axis::Users,
            other => return Err(Error::InvalidConfig(format!("unknown sweep axis {other:?}"))),
        })
    }
}

/// How random streams are shared between algorithms at one point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SeedPolicy {
    /// Every (algorithm, point, trial) has its own stream.
    #[default]
    Independent,
    /// All algorithms see the same realization of each trial.
    Shared,
}

impl FromStr for SeedPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "independent" => Ok(SeedPolicy::Independent),
            "shared" => Ok(SeedPolicy::Shared),
            other => Err(Error::InvalidConfig(format!("unknown seed policy {other:?}"))),
        }
    }
}

impl fmt::Display for SeedPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SeedPolicy::Independent => "independent",
            SeedPolicy::Shared => "shared",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub name: String,
    pub base: SystemConfig,
    pub axis: Axis,
    pub values: Vec<f64>,
    pub algorithms: Vec<Algorithm>,
    pub trials: usize,
    pub seed_policy: SeedPolicy,
    pub redraw_precoders: bool,
    /// Write a guarantee report for the first trial of every point.
    pub analysis: bool,
    pub out_dir: PathBuf,
}

impl ExperimentPlan {
    /// The desk-scale Es/N0 sweep, at 20 active users so that every
    /// algorithm still makes errors at the top of the grid.
    pub fn desk() -> Self {
        Self {
            name: "desk".into(),
            base: SystemConfig {
                n_active: 20,
                ..SystemConfig::desk()
            },
            axis: Axis::EsN0Db,
            values: vec![0.0, 4.0, 8.0, 12.0],
            algorithms: vec![Algorithm::Bomp, Algorithm::Icbomp, Algorithm::IcMmse],
            trials: 200,
            seed_policy: SeedPolicy::Shared,
            redraw_precoders: false,
            analysis: false,
            out_dir: PathBuf::from("out/desk"),
        }
    }

    /// Scenario at one sweep value.
    pub fn config_at(&self, value: f64) -> Result<SystemConfig> {
        let as_count = || -> Result<usize> {
            if value >= 0.0 && value.fract() == 0.0 {
                Ok(value as usize)
            } else {
                Err(Error::InvalidConfig(format!(
                    "{} value {value} is not a whole number",
                    self.axis
                )))
            }
        };
        let mut cfg = self.base.clone();
        match self.axis {
            Axis::EsN0Db => cfg = cfg.with_esn0_db(value),
            Axis::NActive => cfg.n_active = as_count()?,
            Axis::Antennas => cfg.m = as_count()?,
            Axis::FrameLen => cfg.t = as_count()?,
            Axis::Users => cfg.n = as_count()?,
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if self.algorithms.is_empty() {
            return Err(Error::InvalidConfig("no algorithms selected".into()));
        }
        if self.values.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidConfig(
                "sweep values must be strictly increasing".into(),
            ));
        }
        for &v in &self.values {
            self.config_at(v)?;
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut doc = KvDoc::parse(text)?;
        let base = SystemConfig::take_from(&mut doc)?;
        let plan = Self {
            name: doc.take("name")?.unwrap_or_else(|| "plan".to_string()),
            base,
            axis: doc.take("axis")?.unwrap_or(Axis::EsN0Db),
            values: doc.take_list("values")?.unwrap_or_default(),
            algorithms: doc
                .take_list("algorithms")?
                .unwrap_or_else(|| vec![Algorithm::Bomp, Algorithm::Icbomp]),
            trials: doc.require("trials")?,
            seed_policy: doc.take("seed_policy")?.unwrap_or_default(),
            redraw_precoders: doc.take("redraw_precoders")?.unwrap_or(false),
            analysis: doc.take("analysis")?.unwrap_or(false),
            out_dir: doc
                .take::<String>("out_dir")?
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from("out")),
        };
        doc.finish()?;
        plan.validate()?;
        Ok(plan)
    }

    pub fn to_kv_string(&self) -> String {
        let mut w = KvWriter::new();
        w.put("name", &self.name);
        self.base.write_kv(&mut w);
        w.put("axis", self.axis)
            .put_list("values", &self.values)
            .put_list("algorithms", &self.algorithms)
            .put("trials", self.trials)
            .put("seed_policy", self.seed_policy)
            .put("redraw_precoders", self.redraw_precoders)
            .put("analysis", self.analysis)
            .put("out_dir", self.out_dir.display());
        w.finish()
    }
}
