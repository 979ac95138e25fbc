//! Recovery guarantees evaluated on measured coherence quantities.

use super::CoherenceProfile;
use crate::model::SystemConfig;

/// Why a predicate came out false.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Failure {
    /// `1 - (d-1)ν - (K-1)dμ_B <= 0`: the Gram of `K` blocks is not provably
    /// well conditioned, so the inequality is not evaluated as a guarantee.
    SideCondition,
    /// The inequality itself fails.
    Inequality,
}

impl Failure {
    pub fn code(self) -> &'static str {
        match self {
            Failure::SideCondition => "side_condition",
            Failure::Inequality => "inequality",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredicateOutcome {
    pub lhs: f64,
    pub rhs: f64,
    /// `1 - (d-1)ν - (K-1)dμ_B` (or the per-iteration analogue).
    pub margin: f64,
    pub failure: Option<Failure>,
}

impl PredicateOutcome {
    pub fn holds(&self) -> bool {
        self.failure.is_none()
    }

    fn judge(lhs: f64, rhs: f64, margin: f64, strict: bool) -> Self {
        let failure = if margin <= 0.0 {
            Some(Failure::SideCondition)
        } else if (strict && lhs > rhs) || (!strict && lhs >= rhs) {
            None
        } else {
            Some(Failure::Inequality)
        };
        Self {
            lhs,
            rhs,
            margin,
            failure,
        }
    }
}

/// `1 - (d-1)ν - (k-1)dμ_B`.
pub fn gram_margin(p: &CoherenceProfile, d: usize, k: usize) -> f64 {
    let d = d as f64;
    1.0 - (d - 1.0) * p.nu - (k as f64 - 1.0) * d * p.mu_b
}

/// The support-recovery condition for `n_a` active users with budget
/// `cfg.k`:
///
/// `ρ₀M(1-(d-1)ν)² s_l² > τ² + ρ₀M dμ{2(N_a-1)(1+(d-1)ν) + N_a² dμ} s_l²
///   + 2√(ρ₀M) τ {(2N_a-1)dμ + 1 + (d-1)ν} s_l`.
pub fn theorem1_predicate(p: &CoherenceProfile, cfg: &SystemConfig, n_a: usize) -> PredicateOutcome {
    support_condition(p, cfg.rho0 * cfg.m as f64, cfg.d, n_a, gram_margin(p, cfg.d, cfg.k))
}

fn support_condition(p: &CoherenceProfile, snr: f64, d: usize, n: usize, margin: f64) -> PredicateOutcome {
    let df = d as f64;
    let na = n as f64;
    let mu = df * p.mu_b;
    let within = 1.0 + (df - 1.0) * p.nu;
    let lhs = snr * (1.0 - (df - 1.0) * p.nu).powi(2) * p.s_l * p.s_l;
    let rhs = p.tau * p.tau
        + snr * mu * (2.0 * (na - 1.0) * within + na * na * mu) * p.s_l * p.s_l
        + 2.0 * snr.sqrt() * p.tau * ((2.0 * na - 1.0) * mu + within) * p.s_l;
    PredicateOutcome::judge(lhs, rhs, margin, true)
}

/// The intermediate correct-selection inequality the support condition is
/// derived from; it compares the best active block (with `s_u`) against the
/// best inactive one:
///
/// `ρ₀M(1-(d-1)ν)² s_u² > τ² + ρ₀M(dμ)² N_a² s_u² + 2ρ₀M dμ(N_a-1)(1+(d-1)ν) s_l²
///   + 2√(ρ₀M) τ {(N_a-1)dμ + 1 + (d-1)ν} s_l + 2√(ρ₀M) N_a dμ τ s_u`.
pub fn lemma1_predicate(p: &CoherenceProfile, cfg: &SystemConfig, n_a: usize) -> PredicateOutcome {
    let snr = cfg.rho0 * cfg.m as f64;
    let df = cfg.d as f64;
    let na = n_a as f64;
    let mu = df * p.mu_b;
    let within = 1.0 + (df - 1.0) * p.nu;
    let lhs = snr * (1.0 - (df - 1.0) * p.nu).powi(2) * p.s_u * p.s_u;
    let rhs = p.tau * p.tau
        + snr * mu * mu * na * na * p.s_u * p.s_u
        + 2.0 * snr * mu * (na - 1.0) * within * p.s_l * p.s_l
        + 2.0 * snr.sqrt() * p.tau * ((na - 1.0) * mu + within) * p.s_l
        + 2.0 * snr.sqrt() * na * mu * p.tau * p.s_u;
    PredicateOutcome::judge(lhs, rhs, gram_margin(p, cfg.d, cfg.k), true)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorBounds {
    /// Bound on `‖ŝ - s‖₂²` in dictionary coordinates.
    pub err_bound: f64,
    /// Most symbols that can be demodulated wrongly under that bound.
    pub n_e: u64,
    /// `min(1, N_e / (N_a d))`.
    pub ser_bound: f64,
}

/// `err = Kτ² / (margin² ρ₀M)`, `N_e = ⌊err / (l_min/2)²⌋`,
/// `ser = N_e / (N_a d)`. `None` when the margin is not positive.
pub fn error_and_ser_bounds(
    p: &CoherenceProfile,
    cfg: &SystemConfig,
    k: usize,
    n_a: usize,
) -> Option<ErrorBounds> {
    let margin = gram_margin(p, cfg.d, k);
    if margin <= 0.0 {
        return None;
    }
    let err_bound = k as f64 * p.tau * p.tau / (margin * margin * cfg.rho0 * cfg.m as f64);
    let half = cfg.modulation.min_distance() / 2.0;
    let n_e = (err_bound / (half * half)).floor() as u64;
    let ser_bound = if n_a == 0 {
        0.0
    } else {
        (n_e as f64 / (n_a * cfg.d) as f64).min(1.0)
    };
    Some(ErrorBounds {
        err_bound,
        n_e,
        ser_bound,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Theorem2Outcome {
    /// Support-style condition with the per-iteration quantities and `N_i`.
    pub cond_17: PredicateOutcome,
    /// `margin_i² ρ₀M t_c l_min² >= 4 τ_i²`.
    pub cond_18: PredicateOutcome,
}

impl Theorem2Outcome {
    pub fn holds(&self) -> bool {
        self.cond_17.holds() && self.cond_18.holds()
    }
}

/// Conditions for at least one certified block in an ICBOMP iteration whose
/// least-squares set holds `n_i` active blocks. `t_c` is the number of
/// correctable bits (`None` for a codec that corrects everything).
pub fn theorem2_predicates(
    p: &CoherenceProfile,
    cfg: &SystemConfig,
    n_i: usize,
    t_c: Option<u32>,
) -> Theorem2Outcome {
    let snr = cfg.rho0 * cfg.m as f64;
    let margin = gram_margin(p, cfg.d, n_i);
    let within_margin = 1.0 - (cfg.d as f64 - 1.0) * p.nu;
    let cond_17 = support_condition(p, snr, cfg.d, n_i, within_margin);
    let lmin = cfg.modulation.min_distance();
    let lhs = match t_c {
        Some(t) => margin * margin * snr * t as f64 * lmin * lmin,
        None => f64::INFINITY,
    };
    let cond_18 = PredicateOutcome::judge(lhs, 4.0 * p.tau * p.tau, margin, false);
    Theorem2Outcome { cond_17, cond_18 }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(m: usize, d: usize, esn0: f64, k: usize) -> SystemConfig {
        SystemConfig {
            m,
            d,
            k,
            ..SystemConfig::desk()
        }
        .with_esn0_db(esn0)
    }

    #[test]
    fn zero_coherence_reduces_to_remark() {
        let p = CoherenceProfile::from_values(0.0, 0.0, 3.0, 3.0, 2.0);
        let c = cfg(4, 10, 3.0, 2);
        let out = theorem1_predicate(&p, &c, 5);
        let snr: f64 = c.rho0 * 4.0;
        assert!((out.lhs - snr * 9.0).abs() < 1e-12);
        assert!((out.rhs - (4.0 + 2.0 * snr.sqrt() * 2.0 * 3.0)).abs() < 1e-9);
    }

    #[test]
    fn plug_in_error_bound() {
        let p = CoherenceProfile::from_values(0.0, 0.0, 1.0, 1.0, 1.5);
        let c = cfg(2, 4, 0.0, 1);
        let b = error_and_ser_bounds(&p, &c, 1, 1).unwrap();
        assert!((b.err_bound - 2.25 / (c.rho0 * 2.0)).abs() < 1e-12);
        let unit = CoherenceProfile::from_values(0.0, 0.0, 1.0, 1.0, 0.9f64.sqrt());
        let c = SystemConfig { rho0: 0.5, ..cfg(2, 4, 0.0, 1) };
        let b = error_and_ser_bounds(&unit, &c, 1, 2).unwrap();
        assert!((b.err_bound - 0.9).abs() < 1e-12);
        assert_eq!(b.n_e, 1);
        assert!((b.ser_bound - 1.0 / 8.0).abs() < 1e-15);
    }

    #[test]
    fn side_condition_reported() {
        let p = CoherenceProfile::from_values(0.1, 0.0, 1.0, 1.0, 0.0);
        let c = cfg(8, 10, 30.0, 3);
        assert_eq!(theorem1_predicate(&p, &c, 1).failure, Some(Failure::SideCondition));
        assert!(error_and_ser_bounds(&p, &c, 3, 1).is_none());
    }

    #[test]
    fn theorem2_degenerate_limits() {
        let c = cfg(8, 10, 10.0, 3);
        let quiet = CoherenceProfile::from_values(0.01, 0.0, 3.0, 3.0, 0.0);
        assert!(theorem2_predicates(&quiet, &c, 2, Some(0)).holds());
        let noisy = CoherenceProfile::from_values(0.01, 0.0, 3.0, 3.0, 0.1);
        assert!(!theorem2_predicates(&noisy, &c, 2, Some(0)).cond_18.holds());
        assert!(theorem2_predicates(&noisy, &c, 2, None).cond_18.holds());
    }
}
