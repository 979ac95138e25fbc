//! Largest provably supported number of active users for given coherence
//! figures.

use crate::analysis::{theorem1_predicate, CoherenceProfile};
use crate::model::SystemConfig;
use crate::{Error, Result};
use std::fmt::Write;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Table1Row {
    pub m: usize,
    pub n: usize,
    pub d: usize,
    pub t: usize,
    pub s_l: f64,
    pub mu_b: f64,
    pub tau: f64,
}

const fn row(m: usize, n: usize, d: usize, t: usize, s_l: f64, mu_b: f64, tau: f64) -> Table1Row {
    Table1Row { m, n, d, t, s_l, mu_b, tau }
}

/// Published rows (orthonormal precoders, equal message lengths).
pub const PUBLISHED_ROWS: [Table1Row; 9] = [
    row(8, 80, 200, 1000, 14.14, 0.0035, 15.00),
    row(50, 500, 200, 1000, 14.14, 0.0019, 15.00),
    row(100, 1000, 200, 1000, 14.14, 0.0014, 15.00),
    row(8, 80, 200, 1000, 14.14, 0.0035, 14.20),
    row(50, 500, 200, 1000, 14.14, 0.0019, 14.20),
    row(100, 1000, 200, 1000, 14.14, 0.0014, 14.20),
    row(8, 80, 100, 500, 10.0, 0.0066, 15.00),
    row(50, 500, 100, 500, 10.0, 0.0037, 15.00),
    row(100, 1000, 100, 500, 10.0, 0.0030, 15.00),
];

pub const PUBLISHED_ESN0_DB: [f64; 3] = [0.0, 10.0, 15.0];

/// The published answers for [`PUBLISHED_ROWS`] at [`PUBLISHED_ESN0_DB`].
pub const PUBLISHED_COUNTS: [[usize; 3]; 9] = [
    [0, 1, 1],
    [1, 1, 1],
    [1, 2, 2],
    [0, 1, 1],
    [1, 1, 1],
    [1, 2, 2],
    [0, 1, 1],
    [1, 1, 1],
    [1, 1, 1],
];

/// Largest `N_a` for which the support condition holds with `K = N_a` and
/// `ν = 0`; 0 when even a single user fails.
pub fn max_supported_users(r: &Table1Row, esn0_db: f64) -> usize {
    let profile = CoherenceProfile::from_values(r.mu_b, 0.0, r.s_l, r.s_l, r.tau);
    let mut best = 0;
    for n_a in 1..=(r.m * r.t / r.d).min(r.n) {
        let cfg = SystemConfig {
            m: r.m,
            n: r.n,
            d: r.d,
            t: r.t,
            n_active: n_a,
            k: n_a,
            ..SystemConfig::desk()
        }
        .with_esn0_db(esn0_db);
        if !theorem1_predicate(&profile, &cfg, n_a).holds() {
            break;
        }
        best = n_a;
    }
    best
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table1 {
    pub rows: Vec<Table1Row>,
    pub esn0_db: Vec<f64>,
    /// `counts[row][snr]`.
    pub counts: Vec<Vec<usize>>,
}

pub fn table1_report(rows: &[Table1Row], esn0_db: &[f64]) -> Table1 {
    Table1 {
        rows: rows.to_vec(),
        esn0_db: esn0_db.to_vec(),
        counts: rows
            .iter()
            .map(|r| esn0_db.iter().map(|&s| max_supported_users(r, s)).collect())
            .collect(),
    }
}

impl Table1 {
    pub fn render(&self) -> String {
        let mut out = String::new();
        write!(out, "{:>5} {:>6} {:>5} {:>6} {:>7} {:>8} {:>7}", "M", "N", "d", "T", "s_l", "mu_B", "tau").unwrap();
        for s in &self.esn0_db {
            write!(out, " {:>7}", format!("{s}dB")).unwrap();
        }
        out.push('\n');
        for (r, counts) in self.rows.iter().zip(&self.counts) {
            write!(
                out,
                "{:>5} {:>6} {:>5} {:>6} {:>7.2} {:>8.4} {:>7.2}",
                r.m, r.n, r.d, r.t, r.s_l, r.mu_b, r.tau
            )
            .unwrap();
            for c in counts {
                write!(out, " {c:>7}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}

/// Rows from text, one `M, N, d, T, s_l, mu_B, tau` per line; `#` comments.
pub fn parse_rows(text: &str) -> Result<Vec<Table1Row>> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        let err = |msg: String| Error::Parse { line: i + 1, msg };
        if f.len() != 7 {
            return Err(err(format!("expected 7 fields, found {}", f.len())));
        }
        let int = |s: &str| s.parse::<usize>().map_err(|e| err(format!("`{s}`: {e}")));
        let real = |s: &str| s.parse::<f64>().map_err(|e| err(format!("`{s}`: {e}")));
        let r = row(int(f[0])?, int(f[1])?, int(f[2])?, int(f[3])?, real(f[4])?, real(f[5])?, real(f[6])?);
        if r.d == 0 || r.t < r.d || r.m == 0 {
            return Err(err("need M > 0 and 0 < d <= T".into()));
        }
        rows.push(r);
    }
    Ok(rows)
}
