//! One-dimensional quadrature and scalar root bracketing.

use crate::error::{Error, Result};

/// Composite trapezoid rule with `panels` equal panels.
pub fn trapezoid<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let inner: f64 = (1..panels).map(|k| f(a + k as f64 * h)).sum();
    h * (0.5 * (f(a) + f(b)) + inner)
}

// 10-point Gauss-Legendre nodes/weights on [-1, 1] (positive half).
const GL_NODES: [f64; 5] = [
    0.148_874_338_981_631_2,
    0.433_395_394_129_247_2,
    0.679_409_568_299_024_4,
    0.865_063_366_688_984_5,
    0.973_906_528_517_171_7,
];
const GL_WEIGHTS: [f64; 5] = [
    0.295_524_224_714_752_9,
    0.269_266_719_309_996_4,
    0.219_086_362_515_982,
    0.149_451_349_150_580_6,
    0.066_671_344_308_688_1,
];

/// 10-point Gauss-Legendre rule on `[a, b]`.
pub fn gauss_legendre<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let s: f64 = GL_NODES
        .iter()
        .zip(GL_WEIGHTS)
        .map(|(&x, w)| w * (f(c - h * x) + f(c + h * x)))
        .sum();
    h * s
}

/// Composite 10-point Gauss-Legendre with `panels` equal panels.
pub fn gauss_legendre_composite<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|k| gauss_legendre(f, a + k as f64 * h, a + (k + 1) as f64 * h))
        .sum()
}

/// Adaptive Simpson quadrature to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: usize,
    ) -> Option<f64> {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if delta.abs() <= 15.0 * tol || (b - a) < 1e-15 * (1.0 + a.abs()) {
            return Some(left + right + delta / 15.0);
        }
        if depth == 0 {
            return None;
        }
        Some(
            recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
                + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?,
        )
    }
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    recurse(f, a, b, fa, fm, fb, whole, tol, 48)
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::QuadratureFailure(format!("adaptive Simpson on [{a}, {b}]")))
}

/// Bisection on a bracket `[a, b]` with `f(a)` and `f(b)` of opposite sign.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (b - a).abs() <= tol || m == a || m == b {
            return m;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Sign changes of `f` on a uniform grid of `n` subintervals of `[a, b]`,
/// refined by bisection. Exact zeros at interior grid points count once.
pub fn bracket_roots<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize, tol: f64) -> Vec<f64> {
    let h = (b - a) / n as f64;
    let mut roots = Vec::new();
    let mut x0 = a;
    let mut f0 = f(a);
    for k in 1..=n {
        let x1 = if k == n { b } else { a + k as f64 * h };
        let f1 = f(x1);
        if f0 != 0.0 && f1 == 0.0 && k < n {
            roots.push(x1);
        } else if f0 * f1 < 0.0 {
            roots.push(bisect(&f, x0, x1, tol));
        }
        x0 = x1;
        f0 = f1;
    }
    roots
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rules_integrate_polynomials() {
        let f = |x: f64| 3.0 * x * x - 2.0 * x + 1.0;
        // int_0^2 = 8 - 4 + 2
        assert!((gauss_legendre(&f, 0.0, 2.0) - 6.0).abs() < 1e-13);
        assert!((adaptive_simpson(&f, 0.0, 2.0, 1e-12).unwrap() - 6.0).abs() < 1e-12);
        assert!((trapezoid(f, 0.0, 2.0, 1000) - 6.0).abs() < 1e-5);
    }

    #[test]
    fn gauss_legendre_handles_exponentials() {
        let v = gauss_legendre_composite(&|x: f64| x.exp(), 0.0, 1.0, 4);
        assert!((v - (std::f64::consts::E - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn bracket_finds_all_cubic_roots() {
        let f = |x: f64| (x - 0.1) * (x - 0.5) * (x - 0.9);
        let r = bracket_roots(f, 0.0, 1.0, 200, 1e-14);
        assert_eq!(r.len(), 3);
        for (got, want) in r.iter().zip([0.1, 0.5, 0.9]) {
            assert!((got - want).abs() < 1e-13);
        }
    }
}
