//! Monte-Carlo driver: model → detector → error counting.
//!
//! Streams: the precoder bank of a point comes from
//! `[TAG_PRECODERS, T, d, N, orthogonal]`, so it is shared by every point with
//! the same dimensions. Trial `i` of algorithm `a` at sweep value `v` draws,
//! in order, (precoders when redrawn,) channels, support, message lengths,
//! bits and noise from `[TAG_TRIAL, bits(v), id(a), i]` (`id = 0` for every
//! algorithm under the shared seed policy).

use super::plan::{ExperimentPlan, SeedPolicy};
use super::stats::{aggregate, count_errors, PointStats, TrialOutcome};
use crate::analysis::{analyze, CoherenceOptions, GuaranteeReport, CAPACITY_DIM_CAP};
use crate::codec::{CodecSpec, Genie};
use crate::model::{generate_channels, generate_precoders, synthesize_frame, FrameInstance, PrecoderBank, SystemConfig};
use crate::operator::BlockDictionary;
use crate::recovery::{bomp, icbomp, oracle_receiver, Algorithm, OracleMode, RecoveryConfig, RecoveryResult};
use crate::rng::{self, Stream};
use crate::{Execution, Result};
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

/// One drawn trial: the dictionary seen by the receiver and the frame.
#[derive(Debug, Clone)]
pub struct Realization {
    pub dict: BlockDictionary,
    pub frame: FrameInstance,
}

/// Draws channels and a frame for `cfg` from `rng`.
pub fn realize(cfg: &SystemConfig, precoders: Arc<PrecoderBank>, rng: &mut Stream) -> Result<Realization> {
    let channels = generate_channels(cfg, rng);
    let frame = synthesize_frame(cfg, &precoders, &channels, rng);
    let dict = BlockDictionary::new(precoders, channels, cfg.rho0, cfg.normalization)?
        .with_execution(Execution::Sequential);
    Ok(Realization { dict, frame })
}

/// Runs `algorithm` on a realization. The genie codec sees the frame only
/// through the detectors that are allowed to use it.
pub fn detect(algorithm: Algorithm, r: &Realization, cfg: &SystemConfig) -> Result<RecoveryResult> {
    let rcfg = RecoveryConfig::from(cfg);
    let genie = Genie::new(CodecSpec::new(cfg.t_c, cfg.modulation), &r.frame);
    let y = &r.frame.y;
    match algorithm {
        Algorithm::Bomp => bomp(&r.dict, y, &rcfg),
        Algorithm::Icbomp => icbomp(&r.dict, y, &rcfg, &genie),
        Algorithm::OracleLs => oracle_receiver(&r.dict, y, &r.frame.support, &genie, OracleMode::Ls),
        Algorithm::IcMmse => oracle_receiver(&r.dict, y, &r.frame.support, &genie, OracleMode::IcMmse),
    }
}

/// Precoder banks keyed by the dimensions that determine them.
#[derive(Debug, Default)]
pub struct PrecoderCache {
    banks: Mutex<HashMap<(usize, usize, usize, bool), Arc<PrecoderBank>>>,
}

impl PrecoderCache {
    pub fn get(&self, cfg: &SystemConfig) -> Result<Arc<PrecoderBank>> {
        let key = (cfg.t, cfg.d, cfg.n, cfg.precoding_orthogonal);
        let mut banks = self.banks.lock().expect("precoder cache poisoned");
        if let Some(b) = banks.get(&key) {
            return Ok(b.clone());
        }
        let mut r = rng::substream(
            cfg.seed,
            &[rng::TAG_PRECODERS, cfg.t as u64, cfg.d as u64, cfg.n as u64, cfg.precoding_orthogonal as u64],
        );
        let bank = Arc::new(generate_precoders(cfg, &mut r)?);
        banks.insert(key, bank.clone());
        Ok(bank)
    }
}

pub fn trial_stream(plan: &ExperimentPlan, value: f64, algorithm: Algorithm, trial: usize) -> Stream {
    let alg = match plan.seed_policy {
        SeedPolicy::Independent => algorithm.id(),
        SeedPolicy::Shared => 0,
    };
    rng::substream(plan.base.seed, &[rng::TAG_TRIAL, value.to_bits(), alg, trial as u64])
}

fn trial_realization(
    plan: &ExperimentPlan,
    cfg: &SystemConfig,
    cache: &PrecoderCache,
    value: f64,
    algorithm: Algorithm,
    trial: usize,
) -> Result<Realization> {
    let mut r = trial_stream(plan, value, algorithm, trial);
    let bank = if plan.redraw_precoders {
        Arc::new(generate_precoders(cfg, &mut r)?)
    } else {
        cache.get(cfg)?
    };
    realize(cfg, bank, &mut r)
}

pub fn run_trial(
    plan: &ExperimentPlan,
    cfg: &SystemConfig,
    cache: &PrecoderCache,
    value: f64,
    algorithm: Algorithm,
    trial: usize,
) -> Result<TrialOutcome> {
    let real = trial_realization(plan, cfg, cache, value, algorithm, trial)?;
    let result = detect(algorithm, &real, cfg)?;
    Ok(TrialOutcome {
        errors: count_errors(&result, &real.frame, cfg),
        n_active: real.frame.support.len(),
        d: cfg.d,
        iterations: result.iterations(),
        cancelled: result.cancelled.len(),
        flagged: result.flags.any(),
    })
}

/// All trial outcomes of one algorithm at one sweep value, in trial order.
pub fn run_trials(
    plan: &ExperimentPlan,
    cache: &PrecoderCache,
    value: f64,
    algorithm: Algorithm,
    exec: Execution,
) -> Result<Vec<TrialOutcome>> {
    let cfg = plan.config_at(value)?;
    exec.map(plan.trials, |i| run_trial(plan, &cfg, cache, value, algorithm, i))
        .into_iter()
        .collect()
}

pub fn run_point(
    plan: &ExperimentPlan,
    cache: &PrecoderCache,
    value: f64,
    exec: Execution,
) -> Result<Vec<PointStats>> {
    let cfg = plan.config_at(value)?;
    plan.algorithms
        .iter()
        .map(|&alg| {
            let trials = run_trials(plan, cache, value, alg, exec)?;
            Ok(aggregate(alg, plan.axis.name(), value, &cfg, &trials))
        })
        .collect()
}

/// Guarantee report for trial 0 of ICBOMP at `value`.
pub fn point_report(plan: &ExperimentPlan, cache: &PrecoderCache, value: f64) -> Result<GuaranteeReport> {
    let cfg = plan.config_at(value)?;
    let real = trial_realization(plan, &cfg, cache, value, Algorithm::Icbomp, 0)?;
    let result = detect(Algorithm::Icbomp, &real, &cfg)?;
    let p_e = (cfg.n_active * cfg.d <= CAPACITY_DIM_CAP).then_some(0.0);
    let opts = CoherenceOptions {
        subsample: Some((CoherenceOptions::default().max_pairs, cfg.seed)),
        ..CoherenceOptions::default()
    };
    analyze(&real.dict, &real.frame, &cfg, Some(&result), p_e, &opts)
}

#[derive(Debug, Clone)]
pub struct PlanOutput {
    /// Point-major, algorithms in plan order.
    pub stats: Vec<PointStats>,
    pub reports: Vec<(f64, GuaranteeReport)>,
}

pub fn run_plan(plan: &ExperimentPlan, exec: Execution) -> Result<PlanOutput> {
    plan.validate()?;
    let cache = PrecoderCache::default();
    let mut stats = Vec::new();
    let mut reports = Vec::new();
    for &v in &plan.values {
        stats.extend(run_point(plan, &cache, v, exec)?);
        if plan.analysis {
            reports.push((v, point_report(plan, &cache, v)?));
        }
    }
    Ok(PlanOutput { stats, reports })
}
