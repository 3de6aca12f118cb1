//! Dense real polynomials in ascending coefficient order.

use std::ops::{Add, Mul, Sub};

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Poly {
    /// `coeffs[k]` multiplies `x^k`.
    pub coeffs: Vec<f64>,
}

impl Poly {
    pub fn new(coeffs: Vec<f64>) -> Self {
        let mut p = Self { coeffs };
        p.trim();
        p
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![c])
    }

    /// `a + b x`
    pub fn linear(a: f64, b: f64) -> Self {
        Self::new(vec![a, b])
    }

    fn trim(&mut self) {
        while self.coeffs.len() > 1 && self.coeffs.last() == Some(&0.0) {
            self.coeffs.pop();
        }
        if self.coeffs.is_empty() {
            self.coeffs.push(0.0);
        }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() <= 1 {
            return Poly::constant(0.0);
        }
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| k as f64 * c)
                .collect(),
        )
    }

    pub fn scale(&self, s: f64) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    /// Real roots via the eigenvalues of the companion matrix; `None` if
    /// the QR iteration does not converge.
    pub fn real_roots(&self, imag_tol: f64) -> Option<Vec<f64>> {
        let n = self.degree();
        if n == 0 {
            return Some(Vec::new());
        }
        let lead = self.coeffs[n];
        let mut companion = nalgebra::DMatrix::<f64>::zeros(n, n);
        for i in 1..n {
            companion[(i, i - 1)] = 1.0;
        }
        for i in 0..n {
            companion[(i, n - 1)] = -self.coeffs[i] / lead;
        }
        let mut roots: Vec<f64> = nalgebra::Schur::try_new(companion, f64::EPSILON, 10_000)?
            .complex_eigenvalues()
            .iter()
            .filter(|z| z.im.abs() <= imag_tol * (1.0 + z.re.abs()))
            .map(|z| z.re)
            .collect();
        roots.sort_by(f64::total_cmp);
        Some(roots)
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new(
            (0..n)
                .map(|k| self.coeffs.get(k).unwrap_or(&0.0) + rhs.coeffs.get(k).unwrap_or(&0.0))
                .collect(),
        )
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self + &rhs.scale(-1.0)
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut out = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_and_eval() {
        // (1 + x)(2 - x) = 2 + x - x^2
        let p = &Poly::linear(1.0, 1.0) * &Poly::linear(2.0, -1.0);
        assert_eq!(p.coeffs, vec![2.0, 1.0, -1.0]);
        assert_eq!(p.eval(3.0), -4.0);
        assert_eq!(p.derivative().coeffs, vec![1.0, -2.0]);
    }

    #[test]
    fn companion_roots_of_cubic() {
        // (x - 1)(x - 2)(x + 3)
        let p = &(&Poly::linear(-1.0, 1.0) * &Poly::linear(-2.0, 1.0)) * &Poly::linear(3.0, 1.0);
        let r = p.real_roots(1e-9).unwrap();
        assert_eq!(r.len(), 3);
        for (got, want) in r.iter().zip([-3.0, 1.0, 2.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }
}
