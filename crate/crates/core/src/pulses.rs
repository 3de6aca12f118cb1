//! Stationary pulses on the half-line: the scalar pulse by quadrature, the
//! decoupled system pulse at `tau = 1`, and Newton continuation in `tau`.
//!
//! The discrete problem uses second-order differences on `x_i = i dx`,
//! `i = 0..=N`, with a ghost node for `w'(0) = 0` and `w(x_N) = 0`.

use serde::{Deserialize, Serialize};

use crate::equilibria::{p_value, EquilibriumSet};
use crate::error::{Error, MonitorKind, Result};
use crate::kinetics::{eval_f_tau, jacobian, HomotopySetup};
use crate::linalg::{solve_tridiagonal, BandMatrix, SymTridiagonal};
use crate::params::{KineticParams, State, NSPECIES};
use crate::quadrature::{bisect, bracket_roots, gauss_legendre};
use crate::waves::{Grid, Profile};

/// Running integral `A(w) = int_0^w f` tabulated on a uniform grid and
/// interpolated by cubic Hermite polynomials with the exact slope `f`.
struct PrimitiveTable {
    h: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl PrimitiveTable {
    fn new<F: Fn(f64) -> f64>(f: &F, upper: f64, intervals: usize) -> Self {
        let h = upper / intervals as f64;
        let mut values = Vec::with_capacity(intervals + 1);
        let mut acc = 0.0;
        values.push(0.0);
        for k in 0..intervals {
            acc += gauss_legendre(f, k as f64 * h, (k + 1) as f64 * h);
            values.push(acc);
        }
        let slopes = (0..=intervals).map(|k| f(k as f64 * h)).collect();
        Self { h, values, slopes }
    }

    fn eval(&self, w: f64) -> f64 {
        let n = self.values.len() - 1;
        let k = ((w / self.h).floor().max(0.0) as usize).min(n - 1);
        let s = (w - k as f64 * self.h) / self.h;
        let (y0, y1) = (self.values[k], self.values[k + 1]);
        let (m0, m1) = (self.slopes[k] * self.h, self.slopes[k + 1] * self.h);
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * y0
            + (s3 - 2.0 * s2 + s) * m0
            + (-2.0 * s3 + 3.0 * s2) * y1
            + (s3 - s2) * m1
    }
}

/// Scalar pulse `D w'' + f(w) = 0` on `[0, L]`.
#[derive(Debug, Clone)]
pub struct ScalarPulse {
    pub w0: f64,
    /// Zero of `f` between 0 and `upper`.
    pub mid: f64,
    pub upper: f64,
    pub d: f64,
    pub grid: Grid,
    pub values: Vec<f64>,
    /// `int_0^upper f`.
    pub total_integral: f64,
    /// `int_0^w0 f` by an independent quadrature.
    pub integral_at_w0: f64,
}

/// Half-line grid for pulse computations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseDomain {
    pub length: f64,
    pub dx: f64,
}

impl PulseDomain {
    pub fn grid(&self) -> Grid {
        let cells = (self.length / self.dx).round() as usize;
        Grid::half_line(cells as f64 * self.dx, cells)
    }
}

/// Builds the even pulse of `D w'' + f(w) = 0` with `w'(0) = 0`, decaying
/// to 0, for `f` with sign pattern `-, +` on `(0, mid), (mid, upper)`.
pub fn scalar_pulse<F: Fn(f64) -> f64>(
    f: &F,
    d: f64,
    upper: f64,
    domain: &PulseDomain,
) -> Result<ScalarPulse> {
    let zeros = bracket_roots(f, 1e-9 * upper, upper * (1.0 - 1e-9), 2000, 1e-15 * upper);
    let mid = *zeros
        .first()
        .ok_or_else(|| Error::QuadratureFailure("nonlinearity has no interior zero".into()))?;
    let table = PrimitiveTable::new(f, upper, 20_000);
    let total = table.eval(upper);
    let scale = (0..=200)
        .map(|k| f(upper * k as f64 / 200.0).abs())
        .fold(0.0, f64::max)
        * upper;
    if total <= 1e-12 * scale {
        return Err(Error::NoPulse { integral: total });
    }
    let w0 = bisect(|w| table.eval(w), mid, upper, 1e-15 * upper);
    let integral_at_w0 = crate::quadrature::adaptive_simpson(f, 0.0, w0, 1e-14 * scale)?;
    if integral_at_w0.abs() > 1e-9 * scale {
        return Err(Error::QuadratureFailure(format!(
            "A(w0) = {integral_at_w0:e} after bisection"
        )));
    }

    let f0 = f(w0);
    let h_fd = 1e-6 * w0;
    let f0p = (f(w0 + h_fd) - f(w0 - h_fd)) / (2.0 * h_fd);
    let taylor = |x: f64| w0 - f0 * x * x / (2.0 * d) + f0 * f0p * x.powi(4) / (24.0 * d * d);
    // Phi(w) = int_w^w0 f = -A(w)
    let rhs = |w: f64| -(2.0 * (-table.eval(w)).max(0.0) / d).sqrt();

    let grid = domain.grid();
    let dx = grid.dx;
    let mut values = vec![0.0; grid.nodes()];
    values[0] = w0;
    let x_start = 0.25 * dx;
    let mut x = x_start;
    let mut w = taylor(x_start);
    let sub = 40;
    let h = dx / sub as f64;
    for (i, slot) in values.iter_mut().enumerate().skip(1) {
        let target = i as f64 * dx;
        if target <= x_start {
            *slot = taylor(target);
            continue;
        }
        while x < target - 1e-12 * dx {
            let step = h.min(target - x);
            let k1 = rhs(w);
            let k2 = rhs(w + 0.5 * step * k1);
            let k3 = rhs(w + 0.5 * step * k2);
            let k4 = rhs(w + step * k3);
            w += step / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            x += step;
        }
        *slot = w.max(0.0);
    }
    Ok(ScalarPulse {
        w0,
        mid,
        upper,
        d,
        grid,
        values,
        total_integral: total,
        integral_at_w0,
    })
}

impl ScalarPulse {
    /// Largest deviation of `D (w')^2 / 2 - int_w^w0 f` along the profile,
    /// using a fourth-order difference for `w'`.
    pub fn first_integral_defect<F: Fn(f64) -> f64>(&self, f: &F) -> f64 {
        let table = PrimitiveTable::new(f, self.upper, 20_000);
        let dx = self.grid.dx;
        let n = self.values.len();
        let w = &self.values;
        let mut worst: f64 = 0.0;
        for i in 2..n - 2 {
            if w[i] < 1e-6 * self.w0 {
                break;
            }
            let dw = (w[i - 2] - 8.0 * w[i - 1] + 8.0 * w[i + 1] - w[i + 2]) / (12.0 * dx);
            let phi = -table.eval(w[i]);
            worst = worst.max((0.5 * self.d * dw * dw - phi).abs());
        }
        worst
    }
}

/// Discrete residual `D w'' + F^tau(w)` at the unknown nodes `0..N-1`.
fn residual(p: &KineticParams, hom: &HomotopySetup, tau: f64, dx: f64, u: &[f64], out: &mut [f64]) {
    let n = u.len() / NSPECIES;
    let inv = 1.0 / (dx * dx);
    for i in 0..n {
        let v: State = u[i * 8..i * 8 + 8].try_into().unwrap();
        let f = eval_f_tau(p, hom, tau, &v);
        for c in 0..8 {
            let left = if i == 0 { u[8 + c] } else { u[(i - 1) * 8 + c] };
            let right = if i + 1 < n { u[(i + 1) * 8 + c] } else { 0.0 };
            out[i * 8 + c] = p.diffusion[c] * (left - 2.0 * u[i * 8 + c] + right) * inv + f[c];
        }
    }
}

fn assemble_jacobian(
    p: &KineticParams,
    hom: &HomotopySetup,
    tau: f64,
    dx: f64,
    u: &[f64],
) -> BandMatrix {
    let n = u.len() / NSPECIES;
    let inv = 1.0 / (dx * dx);
    let mut a = BandMatrix::zeros(u.len(), 8, 8);
    for i in 0..n {
        let v: State = u[i * 8..i * 8 + 8].try_into().unwrap();
        let j = jacobian(p, hom, tau, &v);
        for r in 0..8 {
            for c in 0..8 {
                let val = j[(r, c)];
                if val != 0.0 {
                    a.add(i * 8 + r, i * 8 + c, val);
                }
            }
            let dc = p.diffusion[r] * inv;
            let row = i * 8 + r;
            a.add(row, row, -2.0 * dc);
            if i == 0 {
                a.add(row, 8 + r, 2.0 * dc);
            } else {
                a.add(row, row - 8, dc);
                if i + 1 < n {
                    a.add(row, row + 8, dc);
                }
            }
        }
    }
    a
}

fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Damped Newton on the discrete pulse problem; returns the iteration count.
fn newton(
    p: &KineticParams,
    hom: &HomotopySetup,
    tau: f64,
    dx: f64,
    u: &mut Vec<f64>,
    cfg: &PulseConfig,
) -> Result<usize> {
    let mut r = vec![0.0; u.len()];
    let mut trial = vec![0.0; u.len()];
    let mut r_trial = vec![0.0; u.len()];
    residual(p, hom, tau, dx, u, &mut r);
    for it in 0..cfg.max_newton {
        if norm_inf(&r) <= cfg.newton_tol {
            return Ok(it);
        }
        let mut jac = assemble_jacobian(p, hom, tau, dx, u);
        jac.factorize().map_err(|_| Error::NewtonDiverged { tau })?;
        let mut delta: Vec<f64> = r.iter().map(|x| -x).collect();
        jac.solve(&mut delta);
        let base = norm2(&r);
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..=cfg.max_halvings {
            for ((t, ui), di) in trial.iter_mut().zip(u.iter()).zip(&delta) {
                *t = ui + lambda * di;
            }
            residual(p, hom, tau, dx, &trial, &mut r_trial);
            let nr = norm2(&r_trial);
            if nr.is_finite() && nr < (1.0 - 1e-4 * lambda) * base {
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            // roundoff floor: accept a converged iterate that cannot improve
            if norm_inf(&r) <= 10.0 * cfg.newton_tol {
                return Ok(it);
            }
            return Err(Error::NewtonDiverged { tau });
        }
        std::mem::swap(u, &mut trial);
        std::mem::swap(&mut r, &mut r_trial);
    }
    if norm_inf(&r) <= cfg.newton_tol {
        Ok(cfg.max_newton)
    } else {
        Err(Error::NewtonDiverged { tau })
    }
}

/// Numerical settings for pulse construction and continuation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PulseConfig {
    pub dx: f64,
    /// Truncation length; chosen by doubling when absent.
    pub length: Option<f64>,
    pub newton_tol: f64,
    pub residual_tol: f64,
    /// Tolerance for the fourth-order stencil residual relative to the
    /// reaction scale. It measures truncation error, not solver error.
    pub consistency_tol: f64,
    pub max_newton: usize,
    pub max_halvings: usize,
    pub dtau_init: f64,
    pub dtau_max: f64,
    pub dtau_min: f64,
}

impl Default for PulseConfig {
    fn default() -> Self {
        Self {
            dx: 0.01,
            length: None,
            newton_tol: 1e-10,
            residual_tol: 1e-8,
            consistency_tol: 1e-2,
            max_newton: 30,
            max_halvings: 8,
            dtau_init: 0.05,
            dtau_max: 0.1,
            dtau_min: 1e-4,
        }
    }
}

impl PulseConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("dx", self.dx),
            ("newton_tol", self.newton_tol),
            ("residual_tol", self.residual_tol),
            ("consistency_tol", self.consistency_tol),
            ("dtau_init", self.dtau_init),
            ("dtau_max", self.dtau_max),
            ("dtau_min", self.dtau_min),
        ];
        for (key, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Schema(format!("pulse.{key} must be > 0")));
            }
        }
        if let Some(l) = self.length {
            if !(l > 100.0 * self.dx) {
                return Err(Error::Schema("pulse.length must exceed 100 dx".into()));
            }
        }
        Ok(())
    }

    pub fn refined(&self) -> Self {
        Self {
            dx: 0.5 * self.dx,
            ..*self
        }
    }
}

/// Starting truncation length `40 max sqrt(D_i / h_i)`.
pub fn base_length(p: &KineticParams) -> f64 {
    let h = [p.h1, p.h2, p.h3, p.h4, p.h5, p.h6, p.h7, p.h8];
    40.0 * (0..8)
        .map(|i| (p.diffusion[i] / h[i]).sqrt())
        .fold(0.0, f64::max)
}

/// Pulse certificate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Certificate {
    /// Second-order discrete residual.
    pub residual_sup: f64,
    /// Fourth-order stencil residual (truncation-error scale).
    pub residual4_sup: f64,
    /// `residual4_sup` over the largest reaction term along the profile.
    pub residual4_rel: f64,
    pub monotone: bool,
    /// Every forward difference strictly negative where the value exceeds
    /// the decay floor.
    pub strictly_monotone: bool,
    pub positive: bool,
    /// Largest `w_c(L - dx) / w_c(0)`.
    pub tail_ratio: f64,
    /// `min_c (w-_c - max_x w_c)`.
    pub box_margin: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct PulseResult {
    pub tau: f64,
    pub length: f64,
    pub dx: f64,
    pub amplitude: State,
    pub residual_sup: f64,
    pub monotone: bool,
    pub weighted_sup: f64,
    pub certificate: Certificate,
    #[serde(skip)]
    pub profile: Profile,
}

impl PulseResult {
    fn from_unknowns(
        p: &KineticParams,
        hom: &HomotopySetup,
        eq: &EquilibriumSet,
        tau: f64,
        grid: Grid,
        u: &[f64],
        cfg: &PulseConfig,
    ) -> Self {
        let mut values = u.to_vec();
        values.extend_from_slice(&[0.0; 8]);
        let profile = Profile {
            grid,
            ncomp: 8,
            values,
        };
        let certificate = verify_pulse(p, hom, eq, tau, &profile, cfg);
        let amplitude: State = profile.node(0).try_into().unwrap();
        Self {
            tau,
            length: grid.x_end(),
            dx: grid.dx,
            amplitude,
            residual_sup: certificate.residual_sup,
            monotone: certificate.monotone,
            weighted_sup: profile.weighted_sup(),
            certificate,
            profile,
        }
    }

    fn unknowns(&self) -> Vec<f64> {
        let n = self.profile.grid.cells;
        self.profile.values[..n * 8].to_vec()
    }
}

/// Recomputes residuals and shape checks for a half-line profile.
pub fn verify_pulse(
    p: &KineticParams,
    hom: &HomotopySetup,
    eq: &EquilibriumSet,
    tau: f64,
    profile: &Profile,
    cfg: &PulseConfig,
) -> Certificate {
    let grid = profile.grid;
    let n = grid.cells;
    let dx = grid.dx;
    let u = &profile.values[..n * 8];
    let mut r = vec![0.0; u.len()];
    residual(p, hom, tau, dx, u, &mut r);
    let residual_sup = norm_inf(&r);

    // fourth-order stencil with even reflection at 0
    let val = |i: isize, c: usize| -> f64 {
        let k = i.unsigned_abs();
        if k >= n {
            0.0
        } else {
            profile.get(k, c)
        }
    };
    let mut residual4_sup: f64 = 0.0;
    let mut reaction_scale: f64 = 0.0;
    for i in 0..n.saturating_sub(2) {
        let v: State = profile.node(i).try_into().unwrap();
        let f = eval_f_tau(p, hom, tau, &v);
        reaction_scale = f.iter().fold(reaction_scale, |m, x| m.max(x.abs()));
        let ii = i as isize;
        for (c, fc) in f.iter().enumerate() {
            let lap = (-val(ii - 2, c) + 16.0 * val(ii - 1, c) - 30.0 * val(ii, c)
                + 16.0 * val(ii + 1, c)
                - val(ii + 2, c))
                / (12.0 * dx * dx);
            residual4_sup = residual4_sup.max((p.diffusion[c] * lap + fc).abs());
        }
    }
    let residual4_rel = residual4_sup / reaction_scale.max(f64::MIN_POSITIVE);

    let mut monotone = true;
    let mut strictly_monotone = true;
    let mut positive = true;
    let mut tail_ratio: f64 = 0.0;
    let mut box_margin = f64::INFINITY;
    for c in 0..8 {
        let w0 = profile.get(0, c);
        if !(w0 > 0.0) {
            positive = false;
        }
        for i in 0..n {
            let (a, b) = (profile.get(i, c), profile.get(i + 1, c));
            if a < 0.0 {
                positive = false;
            }
            if b - a > 1e-10 {
                monotone = false;
            }
            if a > 1e-12 * w0 && b - a >= 0.0 {
                strictly_monotone = false;
            }
        }
        tail_ratio = tail_ratio.max(profile.get(n - 1, c).abs() / w0.abs().max(f64::MIN_POSITIVE));
        box_margin = box_margin.min(eq.w_minus[c] - profile.sup(c));
    }
    let pass = residual_sup <= cfg.residual_tol
        && residual4_rel <= cfg.consistency_tol
        && monotone
        && positive
        && tail_ratio <= 1e-6
        && box_margin >= -1e-10;
    Certificate {
        residual_sup,
        residual4_sup,
        residual4_rel,
        monotone,
        strictly_monotone,
        positive,
        tail_ratio,
        box_margin,
        pass,
    }
}

/// Thrombin nonlinearity of the decoupled problem, `P + tau1 g`.
fn tau1_thrombin_rate<'a>(p: &'a KineticParams, hom: &HomotopySetup) -> impl Fn(f64) -> f64 + 'a {
    let hom = *hom;
    move |t| p_value(p, t) + hom.tau1 * hom.g.eval(t)
}

/// Solves `D w'' - a w = -b` with the pulse boundary conditions.
fn solve_linear_component(d: f64, dx: f64, a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    let n = a.len();
    let k = d / (dx * dx);
    let lower = vec![k; n];
    let mut upper = vec![k; n];
    upper[0] = 2.0 * k;
    let diag: Vec<f64> = a.iter().map(|ai| -2.0 * k - ai).collect();
    let mut rhs: Vec<f64> = b.iter().map(|bi| -bi).collect();
    solve_tridiagonal(&lower, &diag, &upper, &mut rhs)?;
    Ok(rhs)
}

/// Newton refinement of the scalar thrombin profile on the discrete grid.
fn polish_thrombin(d: f64, dx: f64, t: &mut [f64], f: &dyn Fn(f64) -> f64) -> Result<()> {
    let n = t.len();
    let k = d / (dx * dx);
    for _ in 0..20 {
        let mut r = vec![0.0; n];
        let mut diag = vec![0.0; n];
        for i in 0..n {
            let left = if i == 0 { t[1] } else { t[i - 1] };
            let right = if i + 1 < n { t[i + 1] } else { 0.0 };
            r[i] = k * (left - 2.0 * t[i] + right) + f(t[i]);
            let h = 1e-7 * (1.0 + t[i].abs());
            diag[i] = -2.0 * k + (f(t[i] + h) - f(t[i] - h)) / (2.0 * h);
        }
        if norm_inf(&r) < 1e-12 {
            return Ok(());
        }
        let lower = vec![k; n];
        let mut upper = vec![k; n];
        upper[0] = 2.0 * k;
        for ri in r.iter_mut() {
            *ri = -*ri;
        }
        solve_tridiagonal(&lower, &diag, &upper, &mut r)?;
        for (ti, di) in t.iter_mut().zip(&r) {
            *ti += di;
        }
    }
    Ok(())
}

/// The decoupled pulse at `tau = 1` on a fixed grid.
fn system_pulse_tau1_on(
    p: &KineticParams,
    hom: &HomotopySetup,
    eq: &EquilibriumSet,
    domain: &PulseDomain,
    cfg: &PulseConfig,
) -> Result<(PulseResult, ScalarPulse)> {
    let rate = tau1_thrombin_rate(p, hom);
    let d8 = p.diffusion[7];
    let f = |t: f64| rate(t) / d8;
    let scalar = scalar_pulse(&f, 1.0, eq.t_minus, domain).map_err(|e| match e {
        Error::NoPulse { .. } => Error::ScalarPulseMissing,
        other => other,
    })?;
    let grid = scalar.grid;
    let n = grid.cells;
    let dx = grid.dx;
    let mut t = scalar.values[..n].to_vec();
    polish_thrombin(d8, dx, &mut t, &rate)?;

    let solve =
        |c: usize, a: Vec<f64>, b: Vec<f64>| solve_linear_component(p.diffusion[c], dx, &a, &b);
    let w3 = solve(
        2,
        t.iter().map(|&x| p.k3 * x + p.h3).collect(),
        t.iter().map(|&x| p.k3 * p.rho3 * x).collect(),
    )?;
    let w4 = solve(
        3,
        t.iter().map(|&x| p.k4 * x + p.h4).collect(),
        t.iter().map(|&x| p.k4 * p.rho4 * x).collect(),
    )?;
    let w7 = solve(
        6,
        t.iter().map(|&x| p.k7 * x + p.h7).collect(),
        t.iter().map(|&x| p.k7 * p.rho7 * x).collect(),
    )?;
    let w5 = solve(
        4,
        w7.iter().map(|&x| p.k5 * x + p.h5).collect(),
        w7.iter().map(|&x| p.k5 * p.rho5 * x).collect(),
    )?;
    let w2 = solve(
        1,
        vec![p.h2; n],
        w4.iter().zip(&w5).map(|(a, b)| p.k2 * a * b).collect(),
    )?;
    let act6: Vec<f64> = w5
        .iter()
        .zip(&w2)
        .map(|(a, b)| p.k6 * a + p.kbar6 * b)
        .collect();
    let w6 = solve(
        5,
        act6.iter().map(|&x| x + p.h6).collect(),
        act6.iter().map(|&x| p.rho6 * x).collect(),
    )?;
    let w1 = solve(
        0,
        vec![p.h1; n],
        w3.iter().zip(&w6).map(|(a, b)| p.k1 * a * b).collect(),
    )?;

    let mut u = Vec::with_capacity(n * 8);
    for i in 0..n {
        u.extend_from_slice(&[w1[i], w2[i], w3[i], w4[i], w5[i], w6[i], w7[i], t[i]]);
    }
    let result = PulseResult::from_unknowns(p, hom, eq, 1.0, grid, &u, cfg);
    Ok((result, scalar))
}

/// Pulse of the decoupled problem at `tau = 1`, with the truncation length
/// doubled until the amplitude is insensitive to it.
pub fn system_pulse_tau1(
    p: &KineticParams,
    hom: &HomotopySetup,
    eq: &EquilibriumSet,
    cfg: &PulseConfig,
) -> Result<PulseResult> {
    cfg.validate()?;
    let mut length = cfg.length.unwrap_or_else(|| base_length(p));
    let (mut best, _) = system_pulse_tau1_on(p, hom, eq, &PulseDomain { length, dx: cfg.dx }, cfg)?;
    if cfg.length.is_none() {
        for _ in 0..4 {
            length *= 2.0;
            let (next, _) =
                system_pulse_tau1_on(p, hom, eq, &PulseDomain { length, dx: cfg.dx }, cfg)?;
            let change = (0..8)
                .map(|c| (next.amplitude[c] - best.amplitude[c]).abs() / best.amplitude[c])
                .fold(0.0, f64::max);
            if change < 1e-6 {
                break;
            }
            best = next;
        }
    }
    if !best.certificate.pass {
        return Err(Error::CertificateFailed(format!("{:?}", best.certificate)));
    }
    Ok(best)
}

/// The scalar thrombin pulse underlying the `tau = 1` system pulse.
pub fn thrombin_scalar_pulse(
    p: &KineticParams,
    hom: &HomotopySetup,
    eq: &EquilibriumSet,
    domain: &PulseDomain,
) -> Result<ScalarPulse> {
    let rate = tau1_thrombin_rate(p, hom);
    let d8 = p.diffusion[7];
    scalar_pulse(&|t: f64| rate(t) / d8, 1.0, eq.t_minus, domain)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ContinuationStep {
    pub tau: f64,
    pub newton_iterations: usize,
    pub amplitude_t: f64,
    pub weighted_sup: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Continuation {
    pub pulse: PulseResult,
    pub path: Vec<ContinuationStep>,
}

fn check_monitors(
    res: &PulseResult,
    eq: &EquilibriumSet,
    floor: f64,
    weighted_cap: f64,
) -> Option<MonitorKind> {
    let prof = &res.profile;
    let n = prof.grid.cells;
    let far = (0.75 * n as f64) as usize;
    for c in 0..8 {
        let w0 = prof.get(0, c);
        for i in 0..n {
            let (a, b) = (prof.get(i, c), prof.get(i + 1, c));
            if a < -1e-12 || !(w0 > 0.0) {
                return Some(MonitorKind::Positivity);
            }
            if b - a > 1e-10 {
                return Some(MonitorKind::Monotonicity);
            }
        }
        if w0 > eq.w_minus[c] + 1e-10 {
            return Some(MonitorKind::BoxBound);
        }
        if prof.get(far, c) > 1e-4 * w0 {
            return Some(MonitorKind::Decay);
        }
    }
    if res.amplitude[7] < floor {
        return Some(MonitorKind::Separation);
    }
    if res.weighted_sup > weighted_cap {
        return Some(MonitorKind::WeightedNorm);
    }
    None
}

/// Carries the pulse from `tau = 1` down to `tau = 0`.
pub fn continue_pulse(
    p: &KineticParams,
    hom: &HomotopySetup,
    eq: &EquilibriumSet,
    start: &PulseResult,
    cfg: &PulseConfig,
) -> Result<Continuation> {
    cfg.validate()?;
    let grid = start.profile.grid;
    let dx = grid.dx;
    let floor = 0.1 * start.amplitude[7];
    let weighted_cap = 50.0 * start.weighted_sup;

    let mut path = vec![ContinuationStep {
        tau: 1.0,
        newton_iterations: 0,
        amplitude_t: start.amplitude[7],
        weighted_sup: start.weighted_sup,
    }];
    let mut tau = 1.0;
    let mut current = start.unknowns();
    let mut previous: Option<(f64, Vec<f64>)> = None;
    let mut dtau = cfg.dtau_init;
    let mut last_result = start.clone();

    while tau > 0.0 {
        let step = dtau.min(tau);
        let next_tau = if tau - step < 1e-12 { 0.0 } else { tau - step };
        let mut guess = current.clone();
        if let Some((ptau, pu)) = &previous {
            let s = (next_tau - tau) / (tau - ptau);
            for ((g, c), q) in guess.iter_mut().zip(&current).zip(pu) {
                *g = c + s * (c - q);
            }
        }
        let outcome = newton(p, hom, next_tau, dx, &mut guess, cfg).and_then(|its| {
            let res = PulseResult::from_unknowns(p, hom, eq, next_tau, grid, &guess, cfg);
            match check_monitors(&res, eq, floor, weighted_cap) {
                Some(kind) => Err(Error::MonitorViolated {
                    kind,
                    tau: next_tau,
                }),
                None => Ok((its, res)),
            }
        });
        match outcome {
            Ok((its, res)) => {
                path.push(ContinuationStep {
                    tau: next_tau,
                    newton_iterations: its,
                    amplitude_t: res.amplitude[7],
                    weighted_sup: res.weighted_sup,
                });
                previous = Some((tau, std::mem::replace(&mut current, guess)));
                tau = next_tau;
                last_result = res;
                if its <= 4 {
                    dtau = (1.5 * dtau).min(cfg.dtau_max);
                }
            }
            Err(err) => {
                dtau *= 0.5;
                if dtau < cfg.dtau_min {
                    return Err(err);
                }
            }
        }
    }
    if !last_result.certificate.pass {
        return Err(Error::CertificateFailed(format!(
            "{:?}",
            last_result.certificate
        )));
    }
    Ok(Continuation {
        pulse: last_result,
        path,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BlockSpectrum {
    pub component: usize,
    /// Eigenvalue of smallest magnitude.
    pub nearest_zero: f64,
    pub positive_count: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    pub blocks: Vec<BlockSpectrum>,
    pub min_abs: f64,
    pub positive_count: usize,
    /// Same quantities on the grid with `dx` halved.
    pub refined_min_abs: f64,
    pub drift: f64,
    /// Eigenvalue of smallest magnitude for the thrombin block with a
    /// Dirichlet condition at `x = 0` instead of the Neumann condition.
    pub dirichlet_thrombin_nearest_zero: f64,
}

/// One diagonal block `D_c d^2/dx^2 + J_cc(w(x))`, symmetrized.
fn block_operator(d: f64, dx: f64, diag_coeff: &[f64], neumann: bool) -> SymTridiagonal {
    let k = d / (dx * dx);
    if neumann {
        let diag: Vec<f64> = diag_coeff.iter().map(|a| a - 2.0 * k).collect();
        let mut off = vec![k; diag.len() - 1];
        off[0] = std::f64::consts::SQRT_2 * k;
        SymTridiagonal { diag, off }
    } else {
        // Dirichlet at x = 0: drop node 0
        let diag: Vec<f64> = diag_coeff[1..].iter().map(|a| a - 2.0 * k).collect();
        let off = vec![k; diag.len() - 1];
        SymTridiagonal { diag, off }
    }
}

fn nearest_zero(op: &SymTridiagonal) -> (f64, usize) {
    let n = op.len();
    let below = op.count_below(0.0);
    let mut best = f64::INFINITY;
    if below > 0 {
        best = op.eigenvalue(below - 1, 1e-14);
    }
    if below < n {
        let up = op.eigenvalue(below, 1e-14);
        if up.abs() < best.abs() {
            best = up;
        }
    }
    (best, n - op.count_below(1e-300))
}

fn block_spectra(
    p: &KineticParams,
    hom: &HomotopySetup,
    pulse: &PulseResult,
) -> (Vec<BlockSpectrum>, f64) {
    let prof = &pulse.profile;
    let n = prof.grid.cells;
    let dx = prof.grid.dx;
    let mut blocks = Vec::new();
    let mut dirichlet = 0.0;
    for c in 0..8 {
        let coeff: Vec<f64> = (0..n)
            .map(|i| {
                let v: State = prof.node(i).try_into().unwrap();
                jacobian(p, hom, 1.0, &v)[(c, c)]
            })
            .collect();
        let op = block_operator(p.diffusion[c], dx, &coeff, true);
        let (nearest, positive_count) = nearest_zero(&op);
        blocks.push(BlockSpectrum {
            component: c + 1,
            nearest_zero: nearest,
            positive_count,
        });
        if c == 7 {
            dirichlet = nearest_zero(&block_operator(p.diffusion[c], dx, &coeff, false)).0;
        }
    }
    (blocks, dirichlet)
}

/// Spectrum of the linearization at the `tau = 1` pulse. The operator is
/// block triangular there, so its spectrum is the union of the spectra of
/// the eight scalar diagonal blocks.
pub fn linearized_spectrum_check(
    p: &KineticParams,
    hom: &HomotopySetup,
    eq: &EquilibriumSet,
    pulse: &PulseResult,
    cfg: &PulseConfig,
) -> Result<SpectrumReport> {
    let (blocks, dirichlet) = block_spectra(p, hom, pulse);
    let min_abs = blocks
        .iter()
        .map(|b| b.nearest_zero.abs())
        .fold(f64::INFINITY, f64::min);
    let positive_count = blocks.iter().map(|b| b.positive_count).sum();

    let fine_cfg = PulseConfig {
        length: Some(pulse.length),
        ..cfg.refined()
    };
    let domain = PulseDomain {
        length: pulse.length,
        dx: fine_cfg.dx,
    };
    let (fine, _) = system_pulse_tau1_on(p, hom, eq, &domain, &fine_cfg)?;
    let (fine_blocks, _) = block_spectra(p, hom, &fine);
    let refined_min_abs = fine_blocks
        .iter()
        .map(|b| b.nearest_zero.abs())
        .fold(f64::INFINITY, f64::min);
    let drift = (refined_min_abs - min_abs).abs() / min_abs;

    if min_abs < 1e-4 || refined_min_abs < 1e-4 {
        return Err(Error::NearZeroEigenvalue {
            lambda: min_abs.min(refined_min_abs),
        });
    }
    Ok(SpectrumReport {
        blocks,
        min_abs,
        positive_count,
        refined_min_abs,
        drift,
        dirichlet_thrombin_nearest_zero: dirichlet,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_table_matches_cubic_primitive() {
        let f = |u: f64| u * (u - 0.25) * (1.0 - u);
        let t = PrimitiveTable::new(&f, 1.0, 1000);
        let exact = |w: f64| -0.25 * w * w / 2.0 + 1.25 * w.powi(3) / 3.0 - w.powi(4) / 4.0;
        // Hermite error on a quartic is at most 6 h^4 / 384 = 1.6e-14 here
        for w in [0.0, 0.0123, 0.3, 0.77, 1.0] {
            assert!(
                (t.eval(w) - exact(w)).abs() < 2e-14,
                "{w}: {:e}",
                t.eval(w) - exact(w)
            );
        }
    }

    #[test]
    fn cubic_pulse_amplitude() {
        let a = 0.25;
        let f = move |u: f64| u * (u - a) * (1.0 - u);
        let pulse = scalar_pulse(
            &f,
            1.0,
            1.0,
            &PulseDomain {
                length: 40.0,
                dx: 0.01,
            },
        )
        .unwrap();
        let exact = (2.0 * (1.0 + a) - (4.0 * (1.0 + a) * (1.0 + a) - 18.0 * a).sqrt()) / 3.0;
        assert!((pulse.w0 - exact).abs() < 1e-10, "{} vs {exact}", pulse.w0);
        assert!(pulse.first_integral_defect(&f) < 1e-6);
        assert!(pulse.values.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn symmetric_cubic_has_no_pulse() {
        let f = |u: f64| u * (u - 0.5) * (1.0 - u);
        let err = scalar_pulse(
            &f,
            1.0,
            1.0,
            &PulseDomain {
                length: 40.0,
                dx: 0.01,
            },
        )
        .unwrap_err();
        assert!(matches!(err, Error::NoPulse { .. }));
    }
}
