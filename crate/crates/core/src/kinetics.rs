//! Reaction terms, the homotopy family and their Jacobians.

use nalgebra::SMatrix;
use rand::Rng;
use serde::Serialize;

use crate::equilibria::{p_prime, p_value};
use crate::error::{Error, Result};
use crate::homotopy::GSpec;
use crate::params::{first_violation_of_c, KineticParams, State};

pub type Jacobian = SMatrix<f64, 8, 8>;

/// Reaction rates `F(v)`.
pub fn eval_f(p: &KineticParams, v: &State) -> State {
    let [v1, v2, v3, v4, v5, v6, v7, t] = *v;
    [
        p.k1 * v3 * v6 - p.h1 * v1,
        p.k2 * v4 * v5 - p.h2 * v2,
        p.k3 * t * (p.rho3 - v3) - p.h3 * v3,
        p.k4 * t * (p.rho4 - v4) - p.h4 * v4,
        p.k5 * v7 * (p.rho5 - v5) - p.h5 * v5,
        (p.k6 * v5 + p.kbar6 * v2) * (p.rho6 - v6) - p.h6 * v6,
        p.k7 * t * (p.rho7 - v7) - p.h7 * v7,
        (p.k8 * v6 + p.kbar8 * v1) * (p.t0() - t) - p.h8 * t,
    ]
}

/// Breakpoint `tau1` and bump `g` of the homotopy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HomotopySetup {
    pub tau1: f64,
    pub g: GSpec,
}

impl HomotopySetup {
    /// A setup whose bump vanishes; enough for anything evaluated at `tau = 0`.
    pub fn without_bump(tau1: f64) -> Self {
        Self {
            tau1,
            g: GSpec {
                m: 0.0,
                r: 1.0,
                amplitude: 0.0,
            },
        }
    }

    /// `(alpha, beta, gamma)` at `tau`.
    pub fn coefficients(&self, tau: f64) -> (f64, f64, f64) {
        let t1 = self.tau1;
        if tau < t1 {
            (1.0, 0.0, tau)
        } else {
            ((1.0 - tau) / (1.0 - t1), (tau - t1) / (1.0 - t1), t1)
        }
    }
}

/// Component 8 of `F^tau`, given the thrombin level and `F8(v)`.
#[inline]
pub fn f8_tau(p: &KineticParams, hom: &HomotopySetup, tau: f64, f8: f64, t: f64) -> f64 {
    let (alpha, beta, gamma) = hom.coefficients(tau);
    let mut out = alpha * f8;
    if beta != 0.0 {
        out += beta * p_value(p, t);
    }
    if gamma != 0.0 {
        out += gamma * hom.g.eval(t);
    }
    out
}

/// `F^tau(v)`: components 1..7 of `F`, thrombin row deformed.
pub fn eval_f_tau(p: &KineticParams, hom: &HomotopySetup, tau: f64, v: &State) -> State {
    let mut f = eval_f(p, v);
    f[7] = f8_tau(p, hom, tau, f[7], v[7]);
    f
}

/// Jacobian of `F^tau` at `v`.
pub fn jacobian(p: &KineticParams, hom: &HomotopySetup, tau: f64, v: &State) -> Jacobian {
    let [v1, v2, v3, v4, v5, v6, v7, t] = *v;
    let (alpha, beta, gamma) = hom.coefficients(tau);
    let mut j = Jacobian::zeros();

    j[(0, 0)] = -p.h1;
    j[(0, 2)] = p.k1 * v6;
    j[(0, 5)] = p.k1 * v3;

    j[(1, 1)] = -p.h2;
    j[(1, 3)] = p.k2 * v5;
    j[(1, 4)] = p.k2 * v4;

    j[(2, 2)] = -(p.k3 * t + p.h3);
    j[(2, 7)] = p.k3 * (p.rho3 - v3);

    j[(3, 3)] = -(p.k4 * t + p.h4);
    j[(3, 7)] = p.k4 * (p.rho4 - v4);

    j[(4, 4)] = -(p.k5 * v7 + p.h5);
    j[(4, 6)] = p.k5 * (p.rho5 - v5);

    j[(5, 1)] = p.kbar6 * (p.rho6 - v6);
    j[(5, 4)] = p.k6 * (p.rho6 - v6);
    j[(5, 5)] = -(p.k6 * v5 + p.kbar6 * v2 + p.h6);

    j[(6, 6)] = -(p.k7 * t + p.h7);
    j[(6, 7)] = p.k7 * (p.rho7 - v7);

    let gap = p.t0() - t;
    j[(7, 0)] = alpha * p.kbar8 * gap;
    j[(7, 5)] = alpha * p.k8 * gap;
    let mut h = alpha * (-(p.k8 * v6 + p.kbar8 * v1) - p.h8);
    if beta != 0.0 {
        h += beta * p_prime(p, t);
    }
    if gamma != 0.0 {
        h += gamma * hom.g.derivative(t);
    }
    j[(7, 7)] = h;
    j
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonotoneViolation {
    pub sample: usize,
    pub i: usize,
    pub j: usize,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MonotoneReport {
    pub tau: f64,
    pub samples: usize,
    pub violations: Vec<MonotoneViolation>,
}

impl MonotoneReport {
    pub fn is_monotone(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Lists every negative off-diagonal Jacobian entry over `samples`.
pub fn check_monotone(
    p: &KineticParams,
    hom: &HomotopySetup,
    tau: f64,
    samples: &[State],
) -> Result<MonotoneReport> {
    let mut violations = Vec::new();
    for (index, v) in samples.iter().enumerate() {
        if let Some(c) = first_violation_of_c(p, v) {
            return Err(Error::SampleOutsideC {
                index,
                component: c + 1,
            });
        }
        let jac = jacobian(p, hom, tau, v);
        for i in 0..8 {
            for j in 0..8 {
                if i != j && jac[(i, j)] < 0.0 {
                    violations.push(MonotoneViolation {
                        sample: index,
                        i: i + 1,
                        j: j + 1,
                        value: jac[(i, j)],
                    });
                }
            }
        }
    }
    Ok(MonotoneReport {
        tau,
        samples: samples.len(),
        violations,
    })
}

/// Uniform samples of the box `[0, 2 w1] x [0, 2 w2] x [0, rho3] x ... x [0, T0]`.
///
/// `C` places no bound on the complexes, so `w_minus` supplies a scale.
pub fn sample_region_c<R: Rng>(
    p: &KineticParams,
    w_minus: &State,
    n: usize,
    rng: &mut R,
) -> Vec<State> {
    (0..n)
        .map(|_| {
            std::array::from_fn(|i| {
                let hi = p.capacity(i).unwrap_or(2.0 * w_minus[i]);
                rng.gen::<f64>() * hi
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_params_at_unit_state() {
        let f = eval_f(&KineticParams::unit(), &[1.0; 8]);
        assert_eq!(f, [0.0, 0.0, -1.0, -1.0, -1.0, -1.0, -1.0, -1.0]);
        assert_eq!(eval_f(&KineticParams::unit(), &[0.0; 8]), [0.0; 8]);
    }

    #[test]
    fn coefficients_at_endpoints() {
        let hom = HomotopySetup::without_bump(0.4);
        assert_eq!(hom.coefficients(0.0), (1.0, 0.0, 0.0));
        assert_eq!(hom.coefficients(1.0), (0.0, 1.0, 0.4));
        let (a, b, g) = hom.coefficients(0.4);
        assert_eq!((a, b, g), (1.0, 0.0, 0.4));
        let (a, b, _) = hom.coefficients(0.7);
        assert!((a + b - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_state_kills_complex_couplings() {
        let j = jacobian(
            &KineticParams::unit(),
            &HomotopySetup::without_bump(0.5),
            0.0,
            &[0.0; 8],
        );
        assert_eq!(j[(0, 2)], 0.0);
        assert_eq!(j[(0, 5)], 0.0);
        assert_eq!(j[(1, 3)], 0.0);
        assert_eq!(j[(1, 4)], 0.0);
    }

    #[test]
    fn sample_above_capacity_is_rejected() {
        let p = KineticParams::unit();
        let hom = HomotopySetup::without_bump(0.5);
        let bad = [0.1, 0.1, 1.5, 0.1, 0.1, 0.1, 0.1, 0.1];
        let err = check_monotone(&p, &hom, 0.0, &[[0.0; 8], bad]).unwrap_err();
        assert!(matches!(
            err,
            Error::SampleOutsideC {
                index: 1,
                component: 3
            }
        ));
    }
}
