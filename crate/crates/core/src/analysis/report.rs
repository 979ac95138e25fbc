use super::{
    coherence_profile, error_and_ser_bounds, iteration_profile, lemma1_predicate, theorem1_predicate,
    theorem2_predicates, theorem3_report, CoherenceOptions, CoherenceProfile, ErrorBounds,
    PredicateOutcome, Theorem2Outcome, Theorem3Report,
};
use crate::kv::KvWriter;
use crate::model::{Correction, FrameInstance, SystemConfig};
use crate::operator::BlockDictionary;
use crate::recovery::RecoveryResult;
use crate::Result;

/// Theorem 2 conditions at one ICBOMP iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationGuarantee {
    /// 1-based iteration number.
    pub iteration: usize,
    /// Active blocks in that iteration's least-squares set.
    pub n_i: usize,
    pub outcome: Theorem2Outcome,
    /// Whether the iteration actually cancelled something.
    pub cancelled_any: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GuaranteeReport {
    pub profile: CoherenceProfile,
    pub n_active: usize,
    pub k: usize,
    pub theorem1: PredicateOutcome,
    pub lemma1: PredicateOutcome,
    pub bounds: Option<ErrorBounds>,
    /// Only iterations whose least-squares set holds active blocks alone are
    /// covered.
    pub theorem2: Vec<IterationGuarantee>,
    pub theorem3: Option<Theorem3Report>,
    pub p_e: f64,
}

impl GuaranteeReport {
    pub fn theorem1_holds(&self) -> bool {
        self.theorem1.holds()
    }

    /// Flat `key = value` block; `theorem2.<i>` entries list
    /// `cond_17,cond_18,cancelled`.
    pub fn write_kv(&self, w: &mut KvWriter) {
        let p = &self.profile;
        w.put("mu_b", p.mu_b);
        w.put("nu", p.nu);
        w.put("s_l", p.s_l);
        w.put("s_u", p.s_u);
        w.put("tau", p.tau);
        w.put("mu_b_subsampled", p.subsampled);
        w.put("n_active", self.n_active);
        w.put("k", self.k);
        w.put("theorem1_holds", self.theorem1.holds());
        w.put(
            "theorem1_failure",
            self.theorem1.failure.map_or("none", |f| f.code()),
        );
        w.put("theorem1_lhs", self.theorem1.lhs);
        w.put("theorem1_rhs", self.theorem1.rhs);
        w.put("theorem1_margin", self.theorem1.margin);
        w.put("lemma1_holds", self.lemma1.holds());
        match &self.bounds {
            Some(b) => {
                w.put("err_bound", b.err_bound);
                w.put("n_e", b.n_e);
                w.put("ser_bound", b.ser_bound);
            }
            None => {
                w.put("err_bound", "unavailable");
                w.put("n_e", "unavailable");
                w.put("ser_bound", "unavailable");
            }
        }
        for it in &self.theorem2 {
            w.put(
                &format!("theorem2.{}", it.iteration),
                format!(
                    "{},{},{}",
                    it.outcome.cond_17.holds(),
                    it.outcome.cond_18.holds(),
                    it.cancelled_any
                ),
            );
        }
        if let Some(t3) = &self.theorem3 {
            w.put("p_e", self.p_e);
            w.put("capacity_bits", t3.capacity);
            w.put("s_lower_bits", t3.s_lower);
            w.put("theorem3_rhs", t3.rhs);
            w.put("theorem3_satisfiable", t3.satisfiable);
        }
    }

    pub fn to_kv_string(&self) -> String {
        let mut w = KvWriter::new();
        w.comment("recovery guarantees evaluated on one realization");
        self.write_kv(&mut w);
        w.finish()
    }
}

/// Per-iteration Theorem 2 check along an ICBOMP trace.
pub fn theorem2_trace(
    dict: &BlockDictionary,
    frame: &FrameInstance,
    result: &RecoveryResult,
    cfg: &SystemConfig,
    opts: &CoherenceOptions,
) -> Result<Vec<IterationGuarantee>> {
    let t_c = match cfg.t_c {
        Correction::Never => return Ok(Vec::new()),
        Correction::UpTo(t) => Some(t),
        Correction::Unlimited => None,
    };
    let mut in_ls: Vec<usize> = Vec::new();
    let mut cancelled: Vec<usize> = Vec::new();
    let mut out = Vec::new();
    for (i, rec) in result.trace.iter().enumerate() {
        let Some(sel) = rec.selected else { break };
        in_ls.push(sel);
        if in_ls.iter().all(|&j| frame.is_active(j)) {
            let unidentified: Vec<usize> = frame
                .support
                .iter()
                .copied()
                .filter(|j| !in_ls.contains(j) && !cancelled.contains(j))
                .collect();
            let profile =
                iteration_profile(dict, &frame.s, &frame.z, &in_ls, &cancelled, &unidentified, opts)?;
            out.push(IterationGuarantee {
                iteration: i + 1,
                n_i: in_ls.len(),
                outcome: theorem2_predicates(&profile, cfg, in_ls.len(), t_c),
                cancelled_any: !rec.cancelled.is_empty(),
            });
        }
        in_ls.retain(|j| !rec.cancelled.contains(j));
        cancelled.extend_from_slice(&rec.cancelled);
    }
    Ok(out)
}

/// Everything the analysis layer can say about one realization. Pass an
/// ICBOMP result to include the per-iteration conditions and a `p_e` to
/// include the capacity check.
pub fn analyze(
    dict: &BlockDictionary,
    frame: &FrameInstance,
    cfg: &SystemConfig,
    icbomp: Option<&RecoveryResult>,
    p_e: Option<f64>,
    opts: &CoherenceOptions,
) -> Result<GuaranteeReport> {
    let n_active = frame.support.len();
    let profile = coherence_profile(dict, &frame.s, &frame.z, &frame.support, opts)?;
    let theorem2 = match icbomp {
        Some(r) => theorem2_trace(dict, frame, r, cfg, opts)?,
        None => Vec::new(),
    };
    let theorem3 = match p_e {
        Some(p) => {
            let bits: Vec<usize> = frame.users.iter().map(|u| u.bits.len()).collect();
            Some(theorem3_report(dict, &frame.support, &bits, p)?)
        }
        None => None,
    };
    Ok(GuaranteeReport {
        profile,
        n_active,
        k: cfg.k,
        theorem1: theorem1_predicate(&profile, cfg, n_active),
        lemma1: lemma1_predicate(&profile, cfg, n_active),
        bounds: error_and_ser_bounds(&profile, cfg, cfg.k, n_active),
        theorem2,
        theorem3,
        p_e: p_e.unwrap_or(0.0),
    })
}
