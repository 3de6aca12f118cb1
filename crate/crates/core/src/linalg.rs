//! Tridiagonal and banded solvers plus Sturm counts for symmetric
//! tridiagonal matrices.

use crate::error::{Error, Result};

/// Thomas algorithm for `a_i x_{i-1} + b_i x_i + c_i x_{i+1} = d_i`.
///
/// `lower[0]` and `upper[n-1]` are ignored. No pivoting; the systems built
/// in this crate are diagonally dominant.
pub fn solve_tridiagonal(
    lower: &[f64],
    diag: &[f64],
    upper: &[f64],
    rhs: &mut [f64],
) -> Result<()> {
    let n = diag.len();
    assert!(lower.len() == n && upper.len() == n && rhs.len() == n);
    let mut c_star = vec![0.0; n];
    let mut denom = diag[0];
    if denom == 0.0 {
        return Err(Error::LinearSolveFailure(
            "zero pivot in tridiagonal solve".into(),
        ));
    }
    c_star[0] = upper[0] / denom;
    rhs[0] /= denom;
    for i in 1..n {
        denom = diag[i] - lower[i] * c_star[i - 1];
        if denom == 0.0 || !denom.is_finite() {
            return Err(Error::LinearSolveFailure(format!("zero pivot at row {i}")));
        }
        c_star[i] = upper[i] / denom;
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= c_star[i] * rhs[i + 1];
    }
    Ok(())
}

/// Square band matrix with `kl` sub- and `ku` super-diagonals, factorized
/// in place by Gaussian elimination with partial pivoting.
///
/// Storage follows the LAPACK `gbtrf` layout: row `kl + ku + i - j` of
/// column `j` holds `A[i][j]`, with `kl` extra rows for fill-in.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    ld: usize,
    data: Vec<f64>,
    pivots: Vec<usize>,
    factored: bool,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let ld = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            ku,
            ld,
            data: vec![0.0; ld * n],
            pivots: vec![0; n],
            factored: false,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        j * self.ld + (self.kl + self.ku + i - j)
    }

    /// Adds `v` to entry `(i, j)`, which must lie inside the band.
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(
            i + self.ku >= j && j + self.kl >= i,
            "({i},{j}) outside band"
        );
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i + self.ku < j || j + self.kl < i {
            return 0.0;
        }
        self.data[self.idx(i, j)]
    }

    /// Matrix-vector product; only valid before factorization.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert!(!self.factored);
        let mut y = vec![0.0; self.n];
        for j in 0..self.n {
            let lo = j.saturating_sub(self.ku);
            let hi = (j + self.kl).min(self.n - 1);
            for (i, yi) in y.iter_mut().enumerate().take(hi + 1).skip(lo) {
                *yi += self.data[self.idx(i, j)] * x[j];
            }
        }
        y
    }

    pub fn factorize(&mut self) -> Result<()> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let kv = ku + kl;
        for j in 0..n {
            let last = (j + kl).min(n - 1);
            // pivot search in column j
            let mut p = j;
            let mut best = self.data[self.idx(j, j)].abs();
            for i in j + 1..=last {
                let v = self.data[self.idx(i, j)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            self.pivots[j] = p;
            if best == 0.0 || !best.is_finite() {
                return Err(Error::LinearSolveFailure(format!(
                    "singular band matrix at column {j}"
                )));
            }
            let ucol = (j + kv).min(n - 1);
            if p != j {
                for c in j..=ucol {
                    let a = self.idx(j, c);
                    let b = self.idx(p, c);
                    self.data.swap(a, b);
                }
            }
            let pivot = self.data[self.idx(j, j)];
            for i in j + 1..=last {
                let k = self.idx(i, j);
                self.data[k] /= pivot;
            }
            for c in j + 1..=ucol {
                let ujc = self.data[self.idx(j, c)];
                if ujc == 0.0 {
                    continue;
                }
                for i in j + 1..=last {
                    let l = self.data[self.idx(i, j)];
                    let k = self.idx(i, c);
                    self.data[k] -= l * ujc;
                }
            }
        }
        self.factored = true;
        Ok(())
    }

    /// Solves `A x = b` in place using the stored factorization.
    pub fn solve(&self, b: &mut [f64]) {
        assert!(self.factored, "factorize before solve");
        let (n, kl, kv) = (self.n, self.kl, self.ku + self.kl);
        for j in 0..n {
            let p = self.pivots[j];
            if p != j {
                b.swap(j, p);
            }
            let last = (j + kl).min(n - 1);
            for i in j + 1..=last {
                b[i] -= self.data[self.idx(i, j)] * b[j];
            }
        }
        for j in (0..n).rev() {
            b[j] /= self.data[self.idx(j, j)];
            let first = j.saturating_sub(kv);
            for i in first..j {
                b[i] -= self.data[self.idx(i, j)] * b[j];
            }
        }
    }
}

/// Symmetric tridiagonal matrix with diagonal `diag` and off-diagonal
/// `off` (`off[i]` couples rows `i` and `i + 1`).
#[derive(Debug, Clone)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Number of eigenvalues strictly below `x` (Sturm sequence count).
    pub fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut q = self.diag[0] - x;
        if q < 0.0 {
            count += 1;
        }
        for i in 1..self.diag.len() {
            let denom = if q == 0.0 {
                f64::EPSILON * (1.0 + x.abs())
            } else {
                q
            };
            q = self.diag[i] - x - self.off[i - 1] * self.off[i - 1] / denom;
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Gershgorin interval containing the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.diag.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 }
                + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// The `k`-th smallest eigenvalue (0-based), by bisection on Sturm counts.
    pub fn eigenvalue(&self, k: usize, tol: f64) -> f64 {
        let (mut lo, mut hi) = self.gershgorin();
        while hi - lo > tol * (1.0 + lo.abs().max(hi.abs())) {
            let mid = 0.5 * (lo + hi);
            if mid == lo || mid == hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tridiagonal_matches_dense() {
        let lower = [0.0, -1.0, -1.0, -1.0];
        let diag = [4.0, 4.0, 4.0, 4.0];
        let upper = [-1.0, -1.0, -1.0, 0.0];
        let x = [1.0, 2.0, 3.0, 4.0];
        let mut b: Vec<f64> = (0..4)
            .map(|i| {
                diag[i] * x[i]
                    + if i > 0 { lower[i] * x[i - 1] } else { 0.0 }
                    + if i < 3 { upper[i] * x[i + 1] } else { 0.0 }
            })
            .collect();
        solve_tridiagonal(&lower, &diag, &upper, &mut b).unwrap();
        for (got, want) in b.iter().zip(x) {
            assert!((got - want).abs() < 1e-14);
        }
    }

    #[test]
    fn band_lu_needs_pivoting() {
        // zero leading diagonal forces a row swap
        let n = 6;
        let mut a = BandMatrix::zeros(n, 2, 1);
        let mut dense = nalgebra::DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for j in i.saturating_sub(2)..=(i + 1).min(n - 1) {
                let v = if i == j && i == 0 {
                    0.0
                } else {
                    1.0 + (i * 7 + j * 3) as f64 % 5.0
                };
                a.add(i, j, v);
                dense[(i, j)] = v;
            }
        }
        let x: Vec<f64> = (0..n).map(|i| (i as f64).sin() + 2.0).collect();
        let mut b = a.mul_vec(&x);
        a.factorize().unwrap();
        a.solve(&mut b);
        for (got, want) in b.iter().zip(&x) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
        assert!(dense.determinant().abs() > 0.0);
    }

    #[test]
    fn sturm_count_for_discrete_laplacian() {
        // eigenvalues of tridiag(-1, 2, -1) are 2 - 2 cos(k pi / (n+1))
        let n = 50;
        let t = SymTridiagonal {
            diag: vec![2.0; n],
            off: vec![-1.0; n - 1],
        };
        for k in [0, 7, 49] {
            let exact = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert!((t.eigenvalue(k, 1e-14) - exact).abs() < 1e-12);
        }
        assert_eq!(t.count_below(0.0), 0);
        assert_eq!(t.count_below(4.0), n);
    }
}
