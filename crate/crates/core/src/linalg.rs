//! Small dense kernels the operator and analysis layers share.

use crate::{CMatrix, CVector, C64};

const POWER_TOL: f64 = 1e-8;
const POWER_MAX_ITERS: usize = 500;

/// Spectral norm of `a` by power iteration on `aᴴa` (relative tolerance
/// 1e-8 on the Rayleigh quotient, at most 500 iterations).
pub fn spectral_norm(a: &CMatrix) -> f64 {
    let n = a.ncols();
    if n == 0 || a.nrows() == 0 {
        return 0.0;
    }
    // deterministic start with no special alignment
    let mut v = CVector::from_fn(n, |i, _| C64::new(1.0 + 0.37 * i as f64 / n as f64, 0.11 * (i % 3) as f64));
    v /= C64::new(v.norm(), 0.0);
    let mut lambda = 0.0;
    for _ in 0..POWER_MAX_ITERS {
        let w = a.ad_mul(&(a * &v));
        let next = v.dotc(&w).re;
        let norm = w.norm();
        if norm == 0.0 {
            return 0.0;
        }
        v = w / C64::new(norm, 0.0);
        let done = (next - lambda).abs() <= POWER_TOL * next.abs();
        lambda = next;
        if done {
            break;
        }
    }
    lambda.max(0.0).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NotPositiveDefinite;

/// Cholesky factor `G = L Lᴴ` that grows by appending trailing blocks.
///
/// `L` is stored as packed rows: row `i` starts at `i(i+1)/2` and holds
/// columns `0..=i`, so appending rows never moves existing data.
#[derive(Debug, Clone, Default)]
pub struct BlockCholesky {
    n: usize,
    l: Vec<C64>,
}

impl BlockCholesky {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn row(&self, i: usize) -> &[C64] {
        let start = i * (i + 1) / 2;
        &self.l[start..start + i + 1]
    }

    /// Factors a full Hermitian matrix from scratch.
    pub fn factor(g: &CMatrix) -> Result<Self, NotPositiveDefinite> {
        const PANEL: usize = 64;
        let n = g.nrows();
        let mut c = Self::new();
        let mut j0 = 0;
        while j0 < n {
            let w = PANEL.min(n - j0);
            let cross = g.view((0, j0), (j0, w)).into_owned();
            let diag = g.view((j0, j0), (w, w)).into_owned();
            c.append(&cross, &diag)?;
            j0 += w;
        }
        Ok(c)
    }

    /// Extends the factor of `G11` to that of `[[G11, G12], [G12ᴴ, G22]]`.
    /// `cross` is `G12` (`n×k`), `diag` is `G22` (`k×k`). On failure the
    /// factor is left unchanged.
    pub fn append(&mut self, cross: &CMatrix, diag: &CMatrix) -> Result<(), NotPositiveDefinite> {
        let n = self.n;
        let k = diag.nrows();
        debug_assert_eq!(cross.shape(), (n, k));
        debug_assert_eq!(diag.ncols(), k);
        // X = L11⁻¹ G12 in row-major (`n×k`) layout, by row panels: the
        // panel update against the solved rows is a gemm
        let mut x = vec![C64::new(0.0, 0.0); n * k];
        for i in 0..n {
            for r in 0..k {
                x[i * k + r] = cross[(i, r)];
            }
        }
        const PANEL: usize = 64;
        let mut lpanel = Vec::new();
        let mut i0 = 0;
        while i0 < n {
            let g = PANEL.min(n - i0);
            let (done, rest) = x.split_at_mut(i0 * k);
            let panel = &mut rest[..g * k];
            if i0 > 0 {
                lpanel.clear();
                for i in i0..i0 + g {
                    lpanel.extend_from_slice(&self.row(i)[..i0]);
                }
                let minus = C64::new(-1.0, 0.0);
                zgemm(g, i0, k, minus, &lpanel, (i0, 1), done, (k, 1), C64::new(1.0, 0.0), panel, (k, 1));
            }
            for ii in 0..g {
                let i = i0 + ii;
                let row = self.row(i);
                let (solved, cur) = panel.split_at_mut(ii * k);
                let cur = &mut cur[..k];
                for c in i0..i {
                    let l = row[c];
                    let xc = &solved[(c - i0) * k..(c - i0 + 1) * k];
                    for (a, v) in cur.iter_mut().zip(xc) {
                        *a -= l * v;
                    }
                }
                let pivot = row[i].re;
                cur.iter_mut().for_each(|a| *a /= pivot);
            }
            i0 += g;
        }
        // Schur complement S = G22 - XᴴX, factored in place (lower)
        let mut s = diag.clone_owned();
        if n > 0 {
            let xc: Vec<C64> = x.iter().map(|v| v.conj()).collect();
            zgemm(k, n, k, C64::new(-1.0, 0.0), &xc, (1, k), &x, (k, 1), C64::new(1.0, 0.0), s.as_mut_slice(), (1, k));
        }
        for j in 0..k {
            let mut pivot = s[(j, j)].re;
            for c in 0..j {
                pivot -= s[(j, c)].norm_sqr();
            }
            if !(pivot.is_finite() && pivot > 0.0) {
                return Err(NotPositiveDefinite);
            }
            let ljj = pivot.sqrt();
            s[(j, j)] = C64::new(ljj, 0.0);
            for i in j + 1..k {
                let mut v = s[(i, j)];
                for c in 0..j {
                    v -= s[(i, c)] * s[(j, c)].conj();
                }
                s[(i, j)] = v / ljj;
            }
        }
        self.l.reserve(k * n + k * (k + 1) / 2);
        for r in 0..k {
            self.l.extend((0..n).map(|c| x[c * k + r].conj()));
            for c in 0..=r {
                self.l.push(s[(r, c)]);
            }
        }
        self.n += k;
        Ok(())
    }

    /// Keeps the leading `n×n` factor, which is the factor of the leading
    /// principal submatrix.
    pub fn truncate(&mut self, n: usize) {
        if n < self.n {
            self.l.truncate(n * (n + 1) / 2);
            self.n = n;
        }
    }

    /// Solves `L x = b` in place.
    pub fn forward(&self, b: &mut [C64]) {
        debug_assert_eq!(b.len(), self.n);
        for i in 0..self.n {
            let row = self.row(i);
            b[i] = (b[i] - dot(&row[..i], &b[..i])) / row[i].re;
        }
    }

    /// Solves `Lᴴ x = b` in place.
    pub fn backward(&self, b: &mut [C64]) {
        for i in (0..self.n).rev() {
            let row = self.row(i);
            let xi = b[i] / row[i].re;
            b[i] = xi;
            for (bc, lc) in b[..i].iter_mut().zip(&row[..i]) {
                *bc -= lc.conj() * xi;
            }
        }
    }

    /// Solves `G x = b` in place for several right-hand sides, reading the
    /// factor once per direction.
    pub fn solve_many(&self, bs: &mut [Vec<C64>]) {
        for i in 0..self.n {
            let row = self.row(i);
            for b in bs.iter_mut() {
                b[i] = (b[i] - dot(&row[..i], &b[..i])) / row[i].re;
            }
        }
        for i in (0..self.n).rev() {
            let row = self.row(i);
            for b in bs.iter_mut() {
                let xi = b[i] / row[i].re;
                b[i] = xi;
                for (bc, lc) in b[..i].iter_mut().zip(&row[..i]) {
                    *bc -= lc.conj() * xi;
                }
            }
        }
    }

    /// Solves `G x = b` in place.
    pub fn solve_in_place(&self, b: &mut [C64]) {
        self.forward(b);
        self.backward(b);
    }

    pub fn solve(&self, b: &CVector) -> CVector {
        let mut x = b.clone();
        self.solve_in_place(x.as_mut_slice());
        x
    }

    /// `ln det G`.
    pub fn ln_det(&self) -> f64 {
        2.0 * (0..self.n).map(|i| self.row(i)[i].re.ln()).sum::<f64>()
    }

    /// Lower bound estimate of `‖G⁻¹‖₁` (Hager's method with Higham's
    /// alternating-sign safeguard).
    #[cfg(test)]
    pub fn inverse_norm1_estimate(&self) -> f64 {
        self.inverse_norm1_estimate_and_solve(&mut [])
    }

    /// Lower bound estimate of `‖G⁻¹‖₁`, also solving `G x = b` in place for
    /// `b` during the estimator's first pass over the factor.
    pub fn inverse_norm1_estimate_and_solve(&self, b: &mut [C64]) -> f64 {
        let n = self.n;
        if n == 0 {
            return 0.0;
        }
        let norm1 = |v: &[C64]| v.iter().map(|c| c.norm()).sum::<f64>();
        let start = vec![C64::new(1.0 / n as f64, 0.0); n];
        let alt: Vec<C64> = (0..n)
            .map(|i| {
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                let ramp = if n > 1 { i as f64 / (n - 1) as f64 } else { 0.0 };
                C64::new(sign * (1.0 + ramp), 0.0)
            })
            .collect();
        let mut first = vec![start.clone(), alt];
        if !b.is_empty() {
            first.push(b.to_vec());
        }
        self.solve_many(&mut first);
        if let Some(sol) = first.get(2) {
            b.copy_from_slice(sol);
        }
        let alt_est = 2.0 * norm1(&first[1]) / (3.0 * n as f64);

        let mut x = start;
        let mut y = std::mem::take(&mut first[0]);
        let mut est = 0.0;
        for iter in 0..2 {
            if iter > 0 {
                y = x.clone();
                self.solve_in_place(&mut y);
            }
            let next = norm1(&y);
            if iter > 0 && next <= est {
                break;
            }
            est = next;
            let mut z: Vec<C64> = y
                .iter()
                .map(|v| {
                    let a = v.norm();
                    if a == 0.0 {
                        C64::new(1.0, 0.0)
                    } else {
                        v / a
                    }
                })
                .collect();
            self.solve_in_place(&mut z);
            let (j, zmax) = z
                .iter()
                .enumerate()
                .map(|(i, v)| (i, v.norm()))
                .fold((0, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            let ztx: f64 = z.iter().zip(&x).map(|(a, b)| (a.conj() * b).re).sum();
            if iter > 0 && zmax <= ztx {
                break;
            }
            x.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
            x[j] = C64::new(1.0, 0.0);
        }
        est.max(alt_est)
    }
}

/// `C ← α A B + β C` for complex matrices given as slices with
/// `(row stride, column stride)` pairs. `A` is `m×p`, `B` is `p×q`.
#[allow(clippy::too_many_arguments)]
pub fn zgemm(
    m: usize,
    p: usize,
    q: usize,
    alpha: C64,
    a: &[C64],
    (rsa, csa): (usize, usize),
    b: &[C64],
    (rsb, csb): (usize, usize),
    beta: C64,
    c: &mut [C64],
    (rsc, csc): (usize, usize),
) {
    if m == 0 || q == 0 {
        return;
    }
    let last = |rows: usize, cols: usize, rs: usize, cs: usize| (rows - 1) * rs + (cols - 1) * cs;
    if p > 0 {
        assert!(last(m, p, rsa, csa) < a.len() && last(p, q, rsb, csb) < b.len());
    }
    assert!(last(m, q, rsc, csc) < c.len());
    // SAFETY: the bounds are checked above; Complex<f64> is repr(C) `[re, im]`,
    // and `c` is a unique borrow that cannot alias `a` or `b`
    unsafe {
        matrixmultiply::zgemm(
            matrixmultiply::CGemmOption::Standard,
            matrixmultiply::CGemmOption::Standard,
            m,
            p,
            q,
            [alpha.re, alpha.im],
            a.as_ptr().cast(),
            rsa as isize,
            csa as isize,
            b.as_ptr().cast(),
            rsb as isize,
            csb as isize,
            [beta.re, beta.im],
            c.as_mut_ptr().cast(),
            rsc as isize,
            csc as isize,
        );
    }
}

/// `Aᴴ B` through [`zgemm`].
pub fn ad_mul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    assert_eq!(a.nrows(), b.nrows());
    let (p, m, q) = (a.nrows(), a.ncols(), b.ncols());
    let ac: Vec<C64> = a.iter().map(|v| v.conj()).collect();
    let mut c = CMatrix::zeros(m, q);
    zgemm(m, p, q, C64::new(1.0, 0.0), &ac, (p, 1), b.as_slice(), (1, p), C64::new(0.0, 0.0), c.as_mut_slice(), (1, m));
    c
}

/// `Σ a_c b_c` (no conjugation). Four independent accumulator lanes keep
/// the loop throughput-bound rather than latency-bound.
#[inline]
fn dot(a: &[C64], b: &[C64]) -> C64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut re = [0.0f64; 4];
    let mut im = [0.0f64; 4];
    let (ac, ar) = (a.chunks_exact(4), a.chunks_exact(4).remainder());
    let (bc, br) = (b.chunks_exact(4), b.chunks_exact(4).remainder());
    for (x, y) in ac.zip(bc) {
        for l in 0..4 {
            re[l] += x[l].re * y[l].re - x[l].im * y[l].im;
            im[l] += x[l].re * y[l].im + x[l].im * y[l].re;
        }
    }
    for (x, y) in ar.iter().zip(br) {
        re[0] += x.re * y.re - x.im * y.im;
        im[0] += x.re * y.im + x.im * y.re;
    }
    C64::new((re[0] + re[1]) + (re[2] + re[3]), (im[0] + im[1]) + (im[2] + im[3]))
}

/// Pairwise summation in index order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}
