//! Noise tail probability, counting bounds and the capacity check.

use crate::linalg::BlockCholesky;
use crate::model::SystemConfig;
use crate::operator::BlockDictionary;
use crate::{CMatrix, Error, Result, C64};
use statrs::function::gamma::ln_gamma;
use std::f64::consts::LN_2;

/// Largest `N_a d` for which the capacity determinant is formed.
pub const CAPACITY_DIM_CAP: usize = 3000;

/// `P(‖B_jᴴ z‖₂ <= τ̃)` for one block under unit-variance complex noise:
/// `1 - e^{-ς²} Σ_{k<d} ς^{2k}/k!` with `ς = τ̃ / sqrt(1 + (d-1)ν)`.
///
/// This is the regularized lower incomplete gamma `P(d, ς²)`. Both branches
/// sum in log space so that `d` in the hundreds does not overflow: below the
/// mode the convergent tail `Σ_{k>=d}` gives `P` directly, above it the finite
/// sum gives `Q = 1 - P`.
pub fn noise_tail_prob(tau_tilde: f64, d: usize, nu: f64) -> f64 {
    assert!(d >= 1, "block length must be positive");
    let scale = 1.0 + (d as f64 - 1.0) * nu;
    let x = tau_tilde * tau_tilde / scale;
    if x <= 0.0 {
        return 0.0;
    }
    let df = d as f64;
    let lnx = x.ln();
    if x < df {
        // P = Σ_{k>=d} e^{-x} x^k / k!, terms shrink by x/(k+1) < 1
        let mut term = df * lnx - x - ln_gamma(df + 1.0);
        let first = term;
        let mut sum = 1.0; // relative to exp(first)
        let mut k = df;
        loop {
            k += 1.0;
            term += lnx - k.ln();
            let rel = (term - first).exp();
            sum += rel;
            if rel < 1e-17 * sum {
                break;
            }
        }
        (first.exp() * sum).clamp(0.0, 1.0)
    } else {
        // Q = Σ_{k<d} e^{-x} x^k / k!, largest term at k = d-1
        let top = (df - 1.0) * lnx - x - ln_gamma(df);
        let mut term = top;
        let mut sum = 1.0;
        for k in (1..d).rev() {
            term += (k as f64).ln() - lnx;
            let rel = (term - top).exp();
            sum += rel;
            if rel < 1e-17 * sum {
                break;
            }
        }
        (1.0 - top.exp() * sum).clamp(0.0, 1.0)
    }
}

/// `log₂ C(n, k)` via log-gamma.
pub fn log2_binomial(n: usize, k: usize) -> f64 {
    assert!(k <= n, "k must not exceed n");
    if k == 0 || k == n {
        return 0.0;
    }
    let (n, k) = (n as f64, k as f64);
    (ln_gamma(n + 1.0) - ln_gamma(k + 1.0) - ln_gamma(n - k + 1.0)) / LN_2
}

/// Binary entropy in bits.
pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

/// `(1 - fer) N_a d / (MT)`, times the code rate when one is configured.
pub fn throughput(fer: f64, cfg: &SystemConfig) -> f64 {
    let raw = (1.0 - fer) * (cfg.n_active * cfg.d) as f64 / cfg.measurements() as f64;
    raw * cfg.code_rate.unwrap_or(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Theorem3Report {
    /// `log₂ C(N, N_a) + Σ b_i`.
    pub s_lower: f64,
    /// `log₂ det(I + ρ₀ B_Iᴴ B_I)`.
    pub capacity: f64,
    /// `(H(p_e) + C) / (1 - p_e)`.
    pub rhs: f64,
    pub satisfiable: bool,
}

/// Counting bound on the information in a frame against the capacity of the
/// active users' channel. Uses `det(I_MT + ρ₀ B_I B_Iᴴ) = det(I + ρ₀ B_Iᴴ B_I)`
/// so only an `N_a d` square matrix is factored.
pub fn theorem3_report(
    dict: &BlockDictionary,
    support: &[usize],
    payload_bits: &[usize],
    p_e: f64,
) -> Result<Theorem3Report> {
    if !(0.0..1.0).contains(&p_e) {
        return Err(Error::InvalidConfig(format!("p_e={p_e} must lie in [0, 1)")));
    }
    let capacity = capacity_bits(dict, support)?;
    let s_lower = log2_binomial(dict.blocks(), support.len()) + payload_bits.iter().sum::<usize>() as f64;
    let rhs = (binary_entropy(p_e) + capacity) / (1.0 - p_e);
    Ok(Theorem3Report {
        s_lower,
        capacity,
        rhs,
        satisfiable: s_lower <= rhs,
    })
}

/// `log₂ det(I + ρ₀ B_Iᴴ B_I)`.
pub fn capacity_bits(dict: &BlockDictionary, support: &[usize]) -> Result<f64> {
    let d = dict.block_len();
    let n = support.len() * d;
    if n > CAPACITY_DIM_CAP {
        return Err(Error::SizeCap {
            what: "capacity determinant (use fewer active users or shorter blocks)",
            requested: n,
            cap: CAPACITY_DIM_CAP,
        });
    }
    let rho0 = C64::new(dict.rho0(), 0.0);
    let mut a = CMatrix::identity(n, n);
    for (p, &i) in support.iter().enumerate() {
        for (q, &j) in support.iter().enumerate().skip(p) {
            let g = dict.gram_block(i, j) * rho0;
            let mut v = a.view_mut((p * d, q * d), (d, d));
            v += &g;
            if q != p {
                a.view_mut((q * d, p * d), (d, d)).copy_from(&g.adjoint());
            }
        }
    }
    let chol = BlockCholesky::factor(&a).map_err(|_| {
        Error::Selection("I + ρ₀ BᴴB failed to factor; the Gram is not finite".into())
    })?;
    Ok(chol.ln_det() / LN_2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::function::gamma::gamma_lr;

    #[test]
    fn tail_special_cases() {
        assert_eq!(noise_tail_prob(0.0, 7, 0.1), 0.0);
        for tau in [0.3, 1.0, 2.5] {
            let expect = 1.0 - (-(tau * tau) as f64).exp();
            assert!((noise_tail_prob(tau, 1, 0.4) - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn tail_matches_incomplete_gamma() {
        for d in [1usize, 2, 4, 16, 50, 200, 800] {
            for &x in &[0.01f64, 0.5, 3.0, 15.0, 40.0, 150.0, 199.0, 201.0, 260.0, 900.0] {
                let got = noise_tail_prob(x.sqrt(), d, 0.0);
                let want = gamma_lr(d as f64, x);
                assert!((got - want).abs() < 1e-10, "d={d} x={x}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn tail_scales_with_subcoherence() {
        let a = noise_tail_prob(3.0, 4, 0.5);
        let b = noise_tail_prob(3.0 / 2.5f64.sqrt(), 4, 0.0);
        assert!((a - b).abs() < 1e-14);
    }

    #[test]
    fn binomial_and_entropy() {
        assert!((log2_binomial(10, 3) - 120f64.log2()).abs() < 1e-12);
        assert_eq!(log2_binomial(9, 9), 0.0);
        let big = log2_binomial(1000, 500);
        assert!(big > 990.0 && big < 1000.0);
        assert!((binary_entropy(0.5) - 1.0).abs() < 1e-15);
        assert_eq!(binary_entropy(0.0), 0.0);
    }

    #[test]
    fn throughput_formula() {
        let cfg = SystemConfig {
            m: 8,
            t: 1000,
            d: 200,
            n: 80,
            n_active: 24,
            ..SystemConfig::desk()
        };
        assert_eq!(cfg.max_users(), 40);
        assert!((throughput(0.0, &cfg) - 0.6).abs() < 1e-15);
        assert_eq!(throughput(1.0, &cfg), 0.0);
    }
}
