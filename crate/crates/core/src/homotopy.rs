//! The bump `g`, the scalar lower bound `G`, the upper solution `Psi` and
//! the positive vector `q` used to control the homotopy.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equilibria::{p_prime, phi, EquilibriumSet};
use crate::error::{Error, Result};
use crate::kinetics::{eval_f_tau, jacobian, HomotopySetup};
use crate::params::{KineticParams, State};
use crate::quadrature::{bracket_roots, trapezoid};
use crate::waves::{wave_speed_scalar, wave_speed_system, WaveConfig, WaveResult};

/// Smooth bump `g(T) = A exp(-1 / (1 - s^2))`, `s = (T - m) / r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GSpec {
    pub m: f64,
    pub r: f64,
    #[serde(rename = "A")]
    pub amplitude: f64,
}

impl GSpec {
    pub fn eval(&self, t: f64) -> f64 {
        let s = (t - self.m) / self.r;
        let q = 1.0 - s * s;
        if q <= 1e-3 {
            // exp(-1000) underflows anyway
            return 0.0;
        }
        self.amplitude * (-1.0 / q).exp()
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let s = (t - self.m) / self.r;
        let q = 1.0 - s * s;
        if q <= 1e-3 {
            return 0.0;
        }
        self.amplitude * (-1.0 / q).exp() * (-2.0 * s / (q * q)) / self.r
    }

    pub fn support(&self) -> (f64, f64) {
        (self.m - self.r, self.m + self.r)
    }

    /// The support must sit strictly inside `(t_bar, t_minus)`.
    pub fn check_support(&self, t_bar: f64, t_minus: f64) -> Result<()> {
        let (lo, hi) = self.support();
        if self.r > 0.0 && self.amplitude >= 0.0 && lo > t_bar && hi < t_minus {
            Ok(())
        } else {
            Err(Error::GSupportOutside {
                lo,
                hi,
                t_bar,
                t_minus,
            })
        }
    }
}

/// `G(T) = tau1 g(T) - h8 T` with its zeros and the integral up to `T2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GFunction {
    pub tau1: f64,
    pub h8: f64,
    pub g: GSpec,
    pub t1: f64,
    pub t2: f64,
    pub i2: f64,
}

impl GFunction {
    pub fn eval(&self, t: f64) -> f64 {
        self.tau1 * self.g.eval(t) - self.h8 * t
    }
}

/// Amplitude multiplier applied after the minimal admissible amplitude is
/// found, so that the `G`-wave speed is clearly positive.
pub const AMPLITUDE_MARGIN: f64 = 2.0;

/// Scans `G` on `[0, t_minus]`; returns `(T1, T2, I2)` when the sign pattern
/// is `-, +, -` with `I2 > 0`.
fn g_conditions(tau1: f64, h8: f64, g: &GSpec, t_minus: f64) -> Option<(f64, f64, f64)> {
    let big_g = |t: f64| tau1 * g.eval(t) - h8 * t;
    // exclude the zero at T = 0 itself
    let lo = 1e-9 * t_minus;
    let zeros = bracket_roots(big_g, lo, t_minus, 10_000, 1e-12 * t_minus);
    if zeros.len() != 2 || big_g(t_minus) >= 0.0 {
        return None;
    }
    let (t1, t2) = (zeros[0], zeros[1]);
    let mid = 0.5 * (t1 + t2);
    if !(big_g(0.5 * t1) < 0.0 && big_g(mid) > 0.0) {
        return None;
    }
    let i2 = trapezoid(big_g, 0.0, t2, 10_000);
    (i2 > 0.0).then_some((t1, t2, i2))
}

/// Builds `g` for given levels and `h8`.
pub fn build_g_levels(h8: f64, t_bar: f64, t_minus: f64, tau1: f64) -> Result<(GSpec, GFunction)> {
    if !(tau1 > 0.0 && tau1 < 1.0) {
        return Err(Error::GConstructionFailed(format!(
            "tau1 = {tau1} is not in (0, 1)"
        )));
    }
    let m = 0.5 * (t_bar + t_minus);
    let r = 0.4 * (t_minus - t_bar);
    let spec = |a: f64| GSpec { m, r, amplitude: a };
    spec(0.0).check_support(t_bar, t_minus)?;
    let passes = |a: f64| g_conditions(tau1, h8, &spec(a), t_minus).is_some();

    let mut hi = h8 * t_minus;
    let mut doublings = 0;
    while !passes(hi) {
        hi *= 2.0;
        doublings += 1;
        if doublings > 60 {
            return Err(Error::GConstructionFailed(
                "amplitude search exhausted".into(),
            ));
        }
    }
    let mut lo = if doublings == 0 { 0.0 } else { 0.5 * hi };
    while hi - lo > 1e-10 * hi {
        let mid = 0.5 * (lo + hi);
        if passes(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let g = spec(AMPLITUDE_MARGIN * hi);
    let (t1, t2, i2) = g_conditions(tau1, h8, &g, t_minus).ok_or_else(|| {
        Error::GConstructionFailed("conditions lost after applying the margin".into())
    })?;
    g.check_support(t_bar, t_minus)?;
    Ok((
        g,
        GFunction {
            tau1,
            h8,
            g,
            t1,
            t2,
            i2,
        },
    ))
}

/// Checks a given bump against the support and `G` conditions.
pub fn g_function(
    p: &KineticParams,
    eq: &EquilibriumSet,
    tau1: f64,
    g: GSpec,
) -> Result<GFunction> {
    g.check_support(eq.t_bar, eq.t_minus)?;
    let (t1, t2, i2) = g_conditions(tau1, p.h8, &g, eq.t_minus).ok_or_else(|| {
        Error::GConstructionFailed("G lacks the sign pattern -, +, - with positive integral".into())
    })?;
    Ok(GFunction {
        tau1,
        h8: p.h8,
        g,
        t1,
        t2,
        i2,
    })
}

pub fn build_g(p: &KineticParams, eq: &EquilibriumSet, tau1: f64) -> Result<(GSpec, GFunction)> {
    build_g_levels(p.h8, eq.t_bar, eq.t_minus, tau1)
}

#[derive(Debug, Clone, Serialize)]
pub struct SpeedEntry {
    pub tau: f64,
    pub wave: WaveResult,
    /// Whether the expected lower bound (`c0` below `tau1`, `c1` above) holds
    /// within the fit tolerance.
    pub bound_holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpeedReport {
    pub c0: f64,
    /// Speed of the scalar `G`-front.
    pub c1: WaveResult,
    pub entries: Vec<SpeedEntry>,
}

impl SpeedReport {
    pub fn all_bounds_hold(&self) -> bool {
        self.entries.iter().all(|e| e.bound_holds)
    }
}

/// Measures `c^tau` over `tau_grid` (in parallel) and the `G`-front speed.
pub fn verify_speed_preservation(
    p: &KineticParams,
    hom: &HomotopySetup,
    eq: &EquilibriumSet,
    gf: &GFunction,
    tau_grid: &[f64],
    cfg: &WaveConfig,
) -> Result<SpeedReport> {
    let mut taus: Vec<f64> = tau_grid.to_vec();
    if !taus.contains(&0.0) {
        taus.insert(0, 0.0);
    }
    let (runs, c1) = rayon::join(
        || {
            taus.par_iter()
                .map(|&tau| wave_speed_system(p, hom, tau, eq, cfg).map(|w| (tau, w)))
                .collect::<Result<Vec<_>>>()
        },
        || wave_speed_scalar(|t| gf.eval(t), p.diffusion[7], gf.t2, cfg),
    );
    let runs = runs?;
    let c1 = c1?;
    if c1.c <= 0.0 {
        return Err(Error::SpeedSignLost {
            tau: hom.tau1,
            c: c1.c,
        });
    }
    let c0 = runs
        .iter()
        .find(|(t, _)| *t == 0.0)
        .map(|(_, w)| w.c)
        .unwrap_or(f64::NAN);
    let mut entries = Vec::new();
    for (tau, wave) in runs {
        if wave.c <= 0.0 {
            return Err(Error::SpeedSignLost { tau, c: wave.c });
        }
        let bound = if tau < hom.tau1 { c0 } else { c1.c };
        let tol = 0.02 * bound.abs() + 3.0 * (wave.stderr + c1.stderr);
        let bound_holds = wave.c >= bound - tol;
        entries.push(SpeedEntry {
            tau,
            wave,
            bound_holds,
        });
    }
    Ok(SpeedReport { c0, c1, entries })
}

/// Default `lambda`, giving `kappa1 > kappa6 > kappa2 > kappa5 > kappa3 >
/// kappa4 > kappa7 > kappa8`.
pub const DEFAULT_LAMBDAS: [f64; 8] = [8.0, 6.0, 4.0, 3.0, 5.0, 7.0, 2.0, 1.0];

/// `Psi(s) = (phi_i(T- + kappa_i s), T- + kappa_8 s)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UpperSolutionSpec {
    pub epsilon: f64,
    pub kappa: [f64; 8],
    pub t_minus: f64,
    pub s_max: f64,
}

impl UpperSolutionSpec {
    pub fn eval(&self, p: &KineticParams, s: f64) -> State {
        let mut out = [0.0; 8];
        for i in 0..7 {
            out[i] = phi(p, self.t_minus + self.kappa[i] * s)[i];
        }
        out[7] = self.t_minus + self.kappa[7] * s;
        out
    }

    pub fn ordering_holds(&self) -> bool {
        let k = self.kappa;
        // 1 > 6 > 2 > 5 > 3 > 4 > 7 > 8, 0-based
        let chain = [0, 5, 1, 4, 2, 3, 6, 7];
        chain.windows(2).all(|w| k[w[0]] > k[w[1]])
    }
}

/// Sample points in `(0, s_max]`: log-spaced near zero, then linear.
fn s_samples(s_max: f64) -> Vec<f64> {
    let mut s: Vec<f64> = (0..40)
        .map(|k| s_max * 10f64.powf(-8.0 + 7.0 * k as f64 / 39.0))
        .collect();
    s.extend((1..=200).map(|k| s_max * k as f64 / 200.0));
    s
}

/// Checks `F^tau(Psi(s)) < 0` on the sampled `(s, tau)` grid.
pub fn check_upper_solution(
    p: &KineticParams,
    hom: &HomotopySetup,
    psi: &UpperSolutionSpec,
    tau_grid: &[f64],
) -> Result<()> {
    let samples = s_samples(psi.s_max);
    let failure = tau_grid
        .par_iter()
        .filter_map(|&tau| {
            samples.iter().find_map(|&s| {
                let f = eval_f_tau(p, hom, tau, &psi.eval(p, s));
                f.iter().position(|&fi| fi >= 0.0).map(|i| (s, tau, i + 1))
            })
        })
        .min_by(|a, b| a.1.total_cmp(&b.1));
    match failure {
        Some((s, tau, component)) => Err(Error::UpperSolutionViolated { s, tau, component }),
        None => Ok(()),
    }
}

/// Builds `Psi` with `kappa_i = 1 + epsilon lambda_i` and `s_max = T0 - T-`.
pub fn build_upper_solution(
    p: &KineticParams,
    eq: &EquilibriumSet,
    epsilon: f64,
    lambdas: &[f64; 8],
) -> Result<UpperSolutionSpec> {
    let spec = UpperSolutionSpec {
        epsilon,
        kappa: lambdas.map(|l| 1.0 + epsilon * l),
        t_minus: eq.t_minus,
        s_max: p.t0() - eq.t_minus,
    };
    if !(epsilon > 0.0) || !spec.ordering_holds() {
        return Err(Error::Schema(
            "lambdas must order kappa as 1 > 6 > 2 > 5 > 3 > 4 > 7 > 8".into(),
        ));
    }
    Ok(spec)
}

/// Halves `epsilon` from `start` until the upper-solution check passes.
pub fn find_upper_solution(
    p: &KineticParams,
    hom: &HomotopySetup,
    eq: &EquilibriumSet,
    start: f64,
    tau_grid: &[f64],
) -> Result<UpperSolutionSpec> {
    let mut eps = start;
    let mut last = None;
    for _ in 0..40 {
        let psi = build_upper_solution(p, eq, eps, &DEFAULT_LAMBDAS)?;
        match check_upper_solution(p, hom, &psi, tau_grid) {
            Ok(()) => return Ok(psi),
            Err(e) => last = Some(e),
        }
        eps *= 0.5;
    }
    Err(last.expect("at least one attempt"))
}

/// Slack used for the free inequalities of the chain.
const Q_SLACK: f64 = 1.05;

/// A vector `q > 0` with `(F^tau)'(0) q < 0` componentwise.
pub fn construct_q(p: &KineticParams, hom: &HomotopySetup, tau: f64) -> Result<State> {
    let (alpha, beta, gamma) = hom.coefficients(tau);
    let d = [p.h1, p.h2, p.h3, p.h4, p.h5, p.h6, p.h7];
    let t0 = p.t0();
    let (th38, th48, th57, th62, th65, th78) = (
        p.k3 * p.rho3,
        p.k4 * p.rho4,
        p.k5 * p.rho5,
        p.kbar6 * p.rho6,
        p.k6 * p.rho6,
        p.k7 * p.rho7,
    );
    let (th81, th86) = (alpha * p.kbar8 * t0, alpha * p.k8 * t0);
    let h = -alpha * p.h8 + beta * p_prime(p, 0.0) + gamma * hom.g.derivative(0.0);

    let chain = th86 * th65 * th57 * th78 / (d[4] * d[5] * d[6]);
    if h >= 0.0 || chain >= -h {
        let ratio = if h < 0.0 { chain / -h } else { f64::INFINITY };
        return Err(Error::ConditionZ1Violated { tau, ratio });
    }
    let ratio = chain / -h;
    let s = if ratio > 0.0 {
        Q_SLACK.min(ratio.powf(-1.0 / 6.0))
    } else {
        Q_SLACK
    };

    let (q1, q2) = (1.0, 1.0);
    // q7, q5 and q6 are affine in q8: q6 = a6 + b6 q8
    let c7 = s * th78 / d[6];
    let c5 = s * th57 / d[4] * c7;
    let a6 = s * th62 * q2 / d[5];
    let b6 = s * th65 * c5 / d[5];
    let num = th81 * q1 + th86 * a6;
    let den = -h - th86 * b6;
    let q8 = if num > 0.0 { Q_SLACK * num / den } else { 1.0 };
    let q = [
        q1,
        q2,
        Q_SLACK * th38 / d[2] * q8,
        Q_SLACK * th48 / d[3] * q8,
        c5 * q8,
        a6 + b6 * q8,
        c7 * q8,
        q8,
    ];
    let jq = jacobian(p, hom, tau, &[0.0; 8]) * nalgebra::SVector::<f64, 8>::from(q);
    if jq.iter().any(|&v| v >= 0.0) {
        return Err(Error::ConditionZ1Violated { tau, ratio });
    }
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_vanishes_outside_support() {
        let g = GSpec {
            m: 0.5,
            r: 0.2,
            amplitude: 3.0,
        };
        assert_eq!(g.eval(0.29), 0.0);
        assert_eq!(g.eval(0.71), 0.0);
        assert!((g.eval(0.5) - 3.0 * (-1f64).exp()).abs() < 1e-15);
        let h = 1e-6;
        let fd = (g.eval(0.6 + h) - g.eval(0.6 - h)) / (2.0 * h);
        assert!((fd - g.derivative(0.6)).abs() < 1e-6 * fd.abs().max(1.0));
    }

    #[test]
    fn build_g_on_reference_levels() {
        let (g, gf) = build_g_levels(1.0, 0.3, 1.0, 0.5).unwrap();
        assert!(0.0 < gf.t1 && gf.t1 < gf.t2 && gf.t2 < 1.0);
        assert!(gf.i2 > 0.0);
        g.check_support(0.3, 1.0).unwrap();
    }

    #[test]
    fn zero_amplitude_fails_conditions() {
        let g = GSpec {
            m: 0.65,
            r: 0.28,
            amplitude: 0.0,
        };
        assert!(g_conditions(0.5, 1.0, &g, 1.0).is_none());
    }

    #[test]
    fn support_touching_t_minus_is_rejected() {
        let g = GSpec {
            m: 0.9,
            r: 0.28,
            amplitude: 1.0,
        };
        assert!(matches!(
            g.check_support(0.3, 1.0),
            Err(Error::GSupportOutside { .. })
        ));
    }

    #[test]
    fn unit_params_violate_z1() {
        let hom = HomotopySetup::without_bump(0.5);
        let err = construct_q(&KineticParams::unit(), &hom, 0.0).unwrap_err();
        assert!(matches!(err, Error::ConditionZ1Violated { .. }));
    }

    #[test]
    fn default_lambdas_are_ordered() {
        let psi = UpperSolutionSpec {
            epsilon: 0.1,
            kappa: DEFAULT_LAMBDAS.map(|l| 1.0 + 0.1 * l),
            t_minus: 1.0,
            s_max: 1.0,
        };
        assert!(psi.ordering_holds());
    }
}
