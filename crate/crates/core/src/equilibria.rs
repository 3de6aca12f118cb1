//! Equilibrium manifold `(phi(T), T)`, the scalar function `P(T)` and the
//! three homogeneous equilibria of the bistable regime.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{BistableViolation, Error, Result};
use crate::kinetics::{jacobian, HomotopySetup, Jacobian};
use crate::params::{KineticParams, State, PARAM_KEYS};
use crate::poly::Poly;
use crate::quadrature::bisect;

/// `phi_1..phi_7` at `t`, computed in the order 3, 4, 7, 5, 2, 6, 1.
pub fn phi(p: &KineticParams, t: f64) -> [f64; 7] {
    let phi3 = p.k3 * p.rho3 * t / (p.k3 * t + p.h3);
    let phi4 = p.k4 * p.rho4 * t / (p.k4 * t + p.h4);
    let phi7 = p.k7 * p.rho7 * t / (p.k7 * t + p.h7);
    let phi5 = p.k5 * p.rho5 * phi7 / (p.k5 * phi7 + p.h5);
    let phi2 = p.k2 / p.h2 * phi4 * phi5;
    let x = p.k6 * phi5 + p.kbar6 * phi2;
    let phi6 = p.rho6 * x / (x + p.h6);
    let phi1 = p.k1 / p.h1 * phi3 * phi6;
    [phi1, phi2, phi3, phi4, phi5, phi6, phi7]
}

/// Derivatives `d phi_i / dT`.
pub fn phi_prime(p: &KineticParams, t: f64) -> [f64; 7] {
    let e3 = p.k3 * t + p.h3;
    let e4 = p.k4 * t + p.h4;
    let e7 = p.k7 * t + p.h7;
    let phi3 = p.k3 * p.rho3 * t / e3;
    let phi4 = p.k4 * p.rho4 * t / e4;
    let phi7 = p.k7 * p.rho7 * t / e7;
    let d3 = p.k3 * p.rho3 * p.h3 / (e3 * e3);
    let d4 = p.k4 * p.rho4 * p.h4 / (e4 * e4);
    let d7 = p.k7 * p.rho7 * p.h7 / (e7 * e7);

    let e5 = p.k5 * phi7 + p.h5;
    let phi5 = p.k5 * p.rho5 * phi7 / e5;
    let d5 = p.k5 * p.rho5 * p.h5 / (e5 * e5) * d7;

    let phi2 = p.k2 / p.h2 * phi4 * phi5;
    let d2 = p.k2 / p.h2 * (d4 * phi5 + phi4 * d5);

    let x = p.k6 * phi5 + p.kbar6 * phi2;
    let dx = p.k6 * d5 + p.kbar6 * d2;
    let phi6 = p.rho6 * x / (x + p.h6);
    let d6 = p.rho6 * p.h6 * dx / ((x + p.h6) * (x + p.h6));

    let d1 = p.k1 / p.h1 * (d3 * phi6 + phi3 * d6);
    [d1, d2, d3, d4, d5, d6, d7]
}

/// Limits of `phi_i(T)` as `T -> infinity`.
pub fn phi_limits(p: &KineticParams) -> [f64; 7] {
    let phi5 = p.k5 * p.rho5 * p.rho7 / (p.k5 * p.rho7 + p.h5);
    let phi2 = p.k2 / p.h2 * p.rho4 * phi5;
    let x = p.k6 * phi5 + p.kbar6 * phi2;
    let phi6 = p.rho6 * x / (x + p.h6);
    let phi1 = p.k1 / p.h1 * p.rho3 * phi6;
    [phi1, phi2, p.rho3, p.rho4, phi5, phi6, p.rho7]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhiValues {
    pub phi: [f64; 7],
    pub limits: [f64; 7],
}

pub fn phi_values(p: &KineticParams, t: f64) -> PhiValues {
    PhiValues {
        phi: phi(p, t),
        limits: phi_limits(p),
    }
}

/// The homogeneous state `(phi(T), T)`.
pub fn manifold_point(p: &KineticParams, t: f64) -> State {
    let f = phi(p, t);
    [f[0], f[1], f[2], f[3], f[4], f[5], f[6], t]
}

/// `P(T) = (k8 phi6 + kbar8 phi1)(T0 - T) - h8 T`.
pub fn p_value(p: &KineticParams, t: f64) -> f64 {
    let f = phi(p, t);
    (p.k8 * f[5] + p.kbar8 * f[0]) * (p.t0() - t) - p.h8 * t
}

pub fn p_prime(p: &KineticParams, t: f64) -> f64 {
    let f = phi(p, t);
    let d = phi_prime(p, t);
    (p.k8 * d[5] + p.kbar8 * d[0]) * (p.t0() - t) - (p.k8 * f[5] + p.kbar8 * f[0]) - p.h8
}

/// Closed form of `R'(0) = Q(0)`.
pub fn closed_form_d(p: &KineticParams) -> f64 {
    p.k5 * p.rho5 * p.k6 * p.rho6 * p.k7 * p.rho7 * p.k8 * p.rho8 * p.h1 * p.h2 * p.h3 * p.h4
        - p.h1 * p.h2 * p.h3 * p.h4 * p.h5 * p.h6 * p.h7 * p.h8
}

/// `P = R / P2` with `R(T) = aT^4 + bT^3 + cT^2 + dT` and `P2 > 0` on `T >= 0`.
#[derive(Debug, Clone, Serialize)]
pub struct RationalP {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub numerator: Poly,
    pub denominator: Poly,
    /// Largest relative deviation between `R/P2` and `P` at the check nodes.
    pub fit_residual: f64,
}

impl RationalP {
    pub fn eval(&self, t: f64) -> f64 {
        self.numerator.eval(t) / self.denominator.eval(t)
    }

    /// `Q(T) = R(T) / T`.
    pub fn q(&self) -> Poly {
        Poly::new(vec![self.d, self.c, self.b, self.a])
    }
}

/// Exact numerator and denominator of `P`, expanded as polynomials.
fn expand_p(p: &KineticParams) -> (Poly, Poly) {
    let t = Poly::linear(0.0, 1.0);
    let e3 = Poly::linear(p.h3, p.k3);
    let e4 = Poly::linear(p.h4, p.k4);
    let e5 = Poly::linear(p.h5 * p.h7, p.k5 * p.k7 * p.rho7 + p.h5 * p.k7);
    // N6 = T k5 rho5 k7 rho7 [k6 h2 (k4 T + h4) + kbar6 k2 k4 rho4 T]
    let bracket = &e4.scale(p.k6 * p.h2) + &t.scale(p.kbar6 * p.k2 * p.k4 * p.rho4);
    let n6 = &t.scale(p.k5 * p.rho5 * p.k7 * p.rho7) * &bracket;
    let s6 = &n6 + &(&e4 * &e5).scale(p.h6 * p.h2);
    let p2 = &e3.scale(p.h1) * &s6;
    let activation = &e3.scale(p.k8 * p.h1) + &t.scale(p.kbar8 * p.k1 * p.k3 * p.rho3);
    let p1 = &n6.scale(p.rho6) * &activation;
    let r = &(&p1 * &Poly::linear(p.t0(), -1.0)) - &(&t * &p2).scale(p.h8);
    (r, p2)
}

/// Builds `R` and `P2`; cross-checks against direct evaluation of `P` and
/// against a Vandermonde fit at five Chebyshev nodes on `[0, 2 T0]`.
pub fn build_p(p: &KineticParams) -> Result<RationalP> {
    let (r, p2) = expand_p(p);
    let coeff = |k: usize| r.coeffs.get(k).copied().unwrap_or(0.0);

    let span = 2.0 * p.t0();
    let nodes: Vec<f64> = (0..5)
        .map(|k| {
            let theta = std::f64::consts::PI * (2 * k + 1) as f64 / 10.0;
            0.5 * span * (1.0 - theta.cos())
        })
        .collect();

    // fit in the scaled variable s = T / span
    let vander = DMatrix::from_fn(5, 5, |i, j| (nodes[i] / span).powi(j as i32));
    let rhs = DVector::from_iterator(5, nodes.iter().map(|&t| p_value(p, t) * p2.eval(t)));
    let fitted = vander
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::LinearSolveFailure("Chebyshev Vandermonde system".into()))?;
    let fitted_d = fitted[1] / span;

    let closed = closed_form_d(p);
    let d = coeff(1);
    // scale of the two competing products in d
    let d_scale = closed.abs().max(
        p.k5 * p.rho5 * p.k6 * p.rho6 * p.k7 * p.rho7 * p.k8 * p.rho8 * p.h1 * p.h2 * p.h3 * p.h4,
    );
    if (d - closed).abs() > 1e-10 * d_scale {
        return Err(Error::CoefficientMismatch { fitted: d, closed });
    }
    let coeff_scale = (0..5).map(|k| (fitted[k]).abs()).fold(0.0, f64::max) / span;
    if (fitted_d - closed).abs() > 1e-8 * coeff_scale.max(d_scale) {
        return Err(Error::CoefficientMismatch {
            fitted: fitted_d,
            closed,
        });
    }

    let mut fit_residual: f64 = 0.0;
    for k in 0..=20 {
        let t = span * k as f64 / 20.0;
        let direct = p_value(p, t);
        let ratio = r.eval(t) / p2.eval(t);
        let scale = 1.0 + direct.abs() + p.h8 * t;
        fit_residual = fit_residual.max((ratio - direct).abs() / scale);
    }
    if fit_residual > 1e-9 {
        return Err(Error::CoefficientMismatch {
            fitted: fit_residual,
            closed: 0.0,
        });
    }

    Ok(RationalP {
        a: coeff(4),
        b: coeff(3),
        c: coeff(2),
        d,
        numerator: r,
        denominator: p2,
        fit_residual,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct EquilibriumSet {
    pub t_plus: f64,
    pub t_bar: f64,
    pub t_minus: f64,
    pub w_plus: State,
    pub w_bar: State,
    pub w_minus: State,
    /// `P'` at `(T+, T_bar, T-)`.
    pub dp: [f64; 3],
    /// Cubic `Q`, ascending coefficients.
    pub q_coeffs: Vec<f64>,
}

impl EquilibriumSet {
    pub fn states(&self) -> [State; 3] {
        [self.w_plus, self.w_bar, self.w_minus]
    }

    pub fn levels(&self) -> [f64; 3] {
        [self.t_plus, self.t_bar, self.t_minus]
    }
}

/// Locates `0 < T_bar < T-` and checks the bistable sign pattern.
pub fn find_equilibria(p: &KineticParams) -> Result<EquilibriumSet> {
    p.validate()?;
    let rp = build_p(p)?;
    if rp.d >= 0.0 {
        return Err(Error::ConditionPViolated(BistableViolation::DNonNegative));
    }
    let q = rp.q();
    // P < 0 for T >= T0, so every positive root lies in (0, T0).
    let roots = crate::quadrature::bracket_roots(|t| q.eval(t), 0.0, p.t0(), 200, 1e-14 * p.t0());
    let roots: Vec<f64> = roots.into_iter().filter(|&t| t > 0.0).collect();
    match roots.len() {
        0 => {
            return Err(Error::ConditionPViolated(
                BistableViolation::NoPositiveRoots,
            ))
        }
        2 => {}
        _ => return Err(Error::ConditionPViolated(BistableViolation::WrongRootCount)),
    }
    let (t_bar, t_minus) = (polish_root(p, roots[0]), polish_root(p, roots[1]));
    let dp = [p_prime(p, 0.0), p_prime(p, t_bar), p_prime(p, t_minus)];
    if !(dp[0] < 0.0 && dp[1] > 0.0 && dp[2] < 0.0) {
        return Err(Error::ConditionPViolated(
            BistableViolation::WrongDerivativeSigns,
        ));
    }
    Ok(EquilibriumSet {
        t_plus: 0.0,
        t_bar,
        t_minus,
        w_plus: [0.0; 8],
        w_bar: manifold_point(p, t_bar),
        w_minus: manifold_point(p, t_minus),
        dp,
        q_coeffs: q.coeffs,
    })
}

/// Root of `Q` refined against the direct evaluation of `P`.
fn polish_root(p: &KineticParams, t0: f64) -> f64 {
    let width = 1e-8 * (1.0 + t0);
    let (lo, hi) = (t0 - width, t0 + width);
    let (plo, phi_) = (p_value(p, lo), p_value(p, hi));
    if lo > 0.0 && plo * phi_ < 0.0 {
        bisect(|t| p_value(p, t), lo, hi, 1e-16 * (1.0 + t0))
    } else {
        t0
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityEntry {
    pub tau: f64,
    /// Principal (Perron) eigenvalue at `(w+, w_bar, w-)`.
    pub principal: [f64; 3],
    pub signs: [i8; 3],
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    pub entries: Vec<StabilityEntry>,
    /// Diagonal formulas at `tau = 1`, per equilibrium.
    pub tau1_formula: [[f64; 8]; 3],
    /// Computed spectra at `tau = 1` (real parts, sorted), per equilibrium.
    pub tau1_eigenvalues: [[f64; 8]; 3],
}

impl StabilityReport {
    pub fn sign_triple(&self) -> Option<[i8; 3]> {
        self.entries.first().map(|e| e.signs)
    }
}

/// Diagonal of the `tau = 1` Jacobian, which is triangular up to a
/// permutation and therefore carries the spectrum.
pub fn tau1_diagonal(p: &KineticParams, t: f64) -> [f64; 8] {
    let w = manifold_point(p, t);
    [
        p_prime(p, t),
        -p.h1,
        -p.h2,
        -(p.k3 * t + p.h3),
        -(p.k4 * t + p.h4),
        -(p.k5 * w[6] + p.h5),
        -(p.k6 * w[4] + p.kbar6 * w[1] + p.h6),
        -(p.k7 * t + p.h7),
    ]
}

/// Real parts of the spectrum, sorted, or `None` if the QR iteration
/// does not converge.
pub fn sorted_real_spectrum(j: &Jacobian) -> Option<[f64; 8]> {
    let schur = nalgebra::Schur::try_new(*j, f64::EPSILON, 10_000)?;
    let ev = schur.complex_eigenvalues();
    let mut out: [f64; 8] = std::array::from_fn(|i| ev[i].re);
    out.sort_by(f64::total_cmp);
    Some(out)
}

/// `lambda I - j` is a nonsingular M-matrix: every pivot of its
/// unpivoted LU factorization is positive.
fn is_m_matrix_shift(j: &Jacobian, lambda: f64) -> bool {
    let mut b = -*j;
    for i in 0..8 {
        b[(i, i)] += lambda;
    }
    for k in 0..8 {
        let piv = b[(k, k)];
        if !(piv > 0.0) {
            return false;
        }
        for r in k + 1..8 {
            let f = b[(r, k)] / piv;
            if f != 0.0 {
                for c in k..8 {
                    b[(r, c)] -= f * b[(k, c)];
                }
            }
        }
    }
    true
}

/// Largest real eigenvalue of a matrix with nonnegative off-diagonal
/// entries, by bisection on the M-matrix test.
pub fn metzler_principal_eigenvalue(j: &Jacobian) -> f64 {
    let scale = j.amax().max(f64::MIN_POSITIVE);
    let mut lo = (0..8).map(|i| j[(i, i)]).fold(f64::NEG_INFINITY, f64::max);
    let row_bound = (0..8)
        .map(|i| (0..8).map(|c| j[(i, c)]).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max);
    let mut hi = row_bound.max(lo) + 1e-9 * scale;
    while !is_m_matrix_shift(j, hi) {
        hi += (hi - lo).max(scale);
    }
    while hi - lo > 1e-15 * scale {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if is_m_matrix_shift(j, mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn classify_stability(
    p: &KineticParams,
    hom: &HomotopySetup,
    eq: &EquilibriumSet,
    tau_grid: &[f64],
) -> Result<StabilityReport> {
    let states = eq.states();
    let mut entries = Vec::with_capacity(tau_grid.len());
    for &tau in tau_grid {
        let mut principal = [0.0; 3];
        let mut signs = [0i8; 3];
        for (k, w) in states.iter().enumerate() {
            let j = jacobian(p, hom, tau, w);
            let top = metzler_principal_eigenvalue(&j);
            let scale = j.amax().max(1.0);
            principal[k] = top;
            signs[k] = if top.abs() <= 1e-12 * scale {
                return Err(Error::SignFlipAcrossTau {
                    equilibrium: NAMES[k],
                    tau,
                });
            } else if top > 0.0 {
                1
            } else {
                -1
            };
        }
        if let Some(first) = entries.first().map(|e: &StabilityEntry| e.signs) {
            if let Some(k) = (0..3).find(|&k| first[k] != signs[k]) {
                return Err(Error::SignFlipAcrossTau {
                    equilibrium: NAMES[k],
                    tau,
                });
            }
        }
        entries.push(StabilityEntry {
            tau,
            principal,
            signs,
        });
    }
    let levels = eq.levels();
    let tau1_formula = levels.map(|t| {
        let mut d = tau1_diagonal(p, t);
        d.sort_by(f64::total_cmp);
        d
    });
    let mut tau1_eigenvalues = [[0.0; 8]; 3];
    for (k, w) in states.iter().enumerate() {
        tau1_eigenvalues[k] = sorted_real_spectrum(&jacobian(p, hom, 1.0, w)).ok_or_else(|| {
            Error::LinearSolveFailure("QR iteration did not converge at tau = 1".into())
        })?;
    }
    Ok(StabilityReport {
        entries,
        tau1_formula,
        tau1_eigenvalues,
    })
}

const NAMES: [&str; 3] = ["w+", "w_bar", "w-"];

/// Per-parameter sampling ranges (log-uniform) and candidate budget.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchBox {
    /// `[lo, hi]` per key in parameter order.
    pub ranges: Vec<[f64; 2]>,
    pub budget: usize,
}

impl Default for SearchBox {
    fn default() -> Self {
        let ranges = PARAM_KEYS
            .iter()
            .map(|key| match *key {
                "kbar6" | "kbar8" => [2.0, 20.0],
                "h8" => [0.5, 4.0],
                k if k.starts_with('D') => [0.5, 2.0],
                _ => [0.5, 2.0],
            })
            .collect();
        Self {
            ranges,
            budget: 20_000,
        }
    }
}

impl SearchBox {
    pub fn validate(&self) -> Result<()> {
        if self.ranges.len() != PARAM_KEYS.len() {
            return Err(Error::Schema(format!(
                "search box needs {} ranges",
                PARAM_KEYS.len()
            )));
        }
        for (key, [lo, hi]) in PARAM_KEYS.iter().zip(&self.ranges) {
            if !(*lo > 0.0 && hi >= lo && hi.is_finite()) {
                return Err(Error::Schema(format!(
                    "search range for {key} must satisfy 0 < lo <= hi"
                )));
            }
        }
        Ok(())
    }
}

/// Seeded random search for a bistable parameter set.
///
/// Candidates are drawn sequentially from the seed and screened in parallel
/// batches; the first passing candidate in draw order wins, so the result
/// does not depend on the thread count.
pub fn search_bistable_params(bx: &SearchBox, seed: u64) -> Result<KineticParams> {
    bx.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tried = 0;
    const BATCH: usize = 256;
    while tried < bx.budget {
        let n = BATCH.min(bx.budget - tried);
        let batch: Vec<KineticParams> = (0..n)
            .map(|_| {
                let mut cand = KineticParams::unit();
                for (slot, [lo, hi]) in cand.values_mut().into_iter().zip(&bx.ranges) {
                    let u: f64 = rng.gen();
                    *slot = lo * (hi / lo).powf(u);
                }
                cand
            })
            .collect();
        let hit = batch
            .par_iter()
            .position_first(|cand| find_equilibria(cand).is_ok());
        if let Some(i) = hit {
            return Ok(batch[i]);
        }
        tried += n;
    }
    Err(Error::SearchExhausted { tried })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_at_unit_params() {
        let f = phi(&KineticParams::unit(), 1.0);
        let want = [1.0 / 6.0, 1.0 / 6.0, 0.5, 0.5, 1.0 / 3.0, 1.0 / 3.0, 0.5];
        for (got, want) in f.iter().zip(want) {
            assert!((got - want).abs() < 1e-15);
        }
        assert_eq!(phi(&KineticParams::unit(), 0.0), [0.0; 7]);
        assert!((phi(&KineticParams::unit(), 1e9)[2] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn closed_form_d_examples() {
        assert_eq!(closed_form_d(&KineticParams::unit()), 0.0);
        let mut p = KineticParams::unit();
        p.k5 = 2.0;
        p.k6 = 2.0;
        p.k7 = 2.0;
        p.k8 = 2.0;
        assert_eq!(closed_form_d(&p), 15.0);
        let rp = build_p(&p).unwrap();
        assert!((rp.d - 15.0).abs() < 1e-12);
        assert!(rp.a < 0.0);
        assert!(matches!(
            find_equilibria(&p),
            Err(Error::ConditionPViolated(BistableViolation::DNonNegative))
        ));
    }

    #[test]
    fn heavy_inhibition_has_no_positive_roots() {
        let mut p = KineticParams::unit();
        for h in [
            &mut p.h1, &mut p.h2, &mut p.h3, &mut p.h4, &mut p.h5, &mut p.h6, &mut p.h7, &mut p.h8,
        ] {
            *h = 100.0;
        }
        assert!(matches!(
            find_equilibria(&p),
            Err(Error::ConditionPViolated(
                BistableViolation::NoPositiveRoots
            ))
        ));
    }

    #[test]
    fn limits_match_large_t() {
        let mut p = KineticParams::unit();
        p.kbar6 = 3.0;
        p.k2 = 1.7;
        let far = phi(&p, 1e12);
        for (a, b) in far.iter().zip(phi_limits(&p)) {
            assert!((a - b).abs() < 1e-9 * (1.0 + b));
        }
    }
}
