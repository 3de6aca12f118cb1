//! Method-of-lines time stepping and front-speed measurement.
//!
//! States are stored node-major: component `c` at node `i` lives at
//! `values[i * ncomp + c]`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equilibria::EquilibriumSet;
use crate::error::{Error, Result};
use crate::kinetics::{eval_f_tau, HomotopySetup};
use crate::linalg::solve_tridiagonal;
use crate::params::{KineticParams, State};
use crate::quadrature::adaptive_simpson;

/// Uniform grid with nodes `x0 + i dx`, `i = 0..=cells`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    pub x0: f64,
    pub dx: f64,
    pub cells: usize,
}

impl Grid {
    /// `[-half_length, half_length]`.
    pub fn full_line(half_length: f64, cells: usize) -> Self {
        Self {
            x0: -half_length,
            dx: 2.0 * half_length / cells as f64,
            cells,
        }
    }

    /// `[0, length]`.
    pub fn half_line(length: f64, cells: usize) -> Self {
        Self {
            x0: 0.0,
            dx: length / cells as f64,
            cells,
        }
    }

    pub fn nodes(&self) -> usize {
        self.cells + 1
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.dx
    }

    pub fn x_end(&self) -> f64 {
        self.x(self.cells)
    }
}

/// Discretized solution, node-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub grid: Grid,
    pub ncomp: usize,
    pub values: Vec<f64>,
}

impl Profile {
    pub fn from_fn<F: FnMut(f64, usize) -> f64>(grid: Grid, ncomp: usize, mut f: F) -> Self {
        let mut values = Vec::with_capacity(grid.nodes() * ncomp);
        for i in 0..grid.nodes() {
            let x = grid.x(i);
            for c in 0..ncomp {
                values.push(f(x, c));
            }
        }
        Self {
            grid,
            ncomp,
            values,
        }
    }

    pub fn constant(grid: Grid, state: &[f64]) -> Self {
        Self::from_fn(grid, state.len(), |_, c| state[c])
    }

    #[inline]
    pub fn get(&self, i: usize, c: usize) -> f64 {
        self.values[i * self.ncomp + c]
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.values[i * self.ncomp..(i + 1) * self.ncomp]
    }

    pub fn component(&self, c: usize) -> Vec<f64> {
        (0..self.grid.nodes()).map(|i| self.get(i, c)).collect()
    }

    /// `max_x |v(x)| sqrt(1 + x^2)` over all components.
    pub fn weighted_sup(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.grid.nodes() {
            let w = (1.0 + self.grid.x(i).powi(2)).sqrt();
            for &v in self.node(i) {
                m = m.max(v.abs() * w);
            }
        }
        m
    }

    pub fn sup(&self, c: usize) -> f64 {
        (0..self.grid.nodes())
            .map(|i| self.get(i, c))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// Local reaction term of a reaction-diffusion system.
pub trait Reaction: Sync {
    fn ncomp(&self) -> usize;
    fn diffusion(&self) -> &[f64];
    fn eval(&self, u: &[f64], out: &mut [f64]);
}

/// The 8-species kinetics at homotopy parameter `tau`.
#[derive(Debug, Clone, Copy)]
pub struct SystemReaction<'a> {
    pub params: &'a KineticParams,
    pub hom: &'a HomotopySetup,
    pub tau: f64,
}

impl Reaction for SystemReaction<'_> {
    fn ncomp(&self) -> usize {
        8
    }

    fn diffusion(&self) -> &[f64] {
        &self.params.diffusion
    }

    fn eval(&self, u: &[f64], out: &mut [f64]) {
        let v: State = u.try_into().expect("8 components");
        out.copy_from_slice(&eval_f_tau(self.params, self.hom, self.tau, &v));
    }
}

/// `u_t = D u_xx + f(u)`.
pub struct ScalarReaction<F> {
    pub f: F,
    pub d: [f64; 1],
}

impl<F: Fn(f64) -> f64 + Sync> ScalarReaction<F> {
    pub fn new(f: F, d: f64) -> Self {
        Self { f, d: [d] }
    }
}

impl<F: Fn(f64) -> f64 + Sync> Reaction for ScalarReaction<F> {
    fn ncomp(&self) -> usize {
        1
    }

    fn diffusion(&self) -> &[f64] {
        &self.d
    }

    fn eval(&self, u: &[f64], out: &mut [f64]) {
        out[0] = (self.f)(u[0]);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Boundary {
    /// Zero flux, imposed with a ghost node.
    Neumann,
    /// Values pinned to the given state.
    Dirichlet(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stepper {
    /// Forward Euler.
    #[default]
    Explicit,
    /// Implicit diffusion, explicit reaction.
    Imex,
}

/// Largest stable forward-Euler step, with the 0.9 safety factor.
pub fn cfl_limit(dx: f64, max_diffusion: f64) -> f64 {
    0.9 * dx * dx / (2.0 * max_diffusion)
}

// below this many unknowns the reaction sweep stays on one thread
const PAR_MIN_LEN: usize = 8192;

/// Time stepper for one simulation.
pub struct Integrator<'a, R: Reaction> {
    reaction: &'a R,
    bc: [Boundary; 2],
    dt: f64,
    stepper: Stepper,
    t: f64,
    state: Profile,
    rate: Vec<f64>,
}

impl<'a, R: Reaction> Integrator<'a, R> {
    pub fn new(
        reaction: &'a R,
        initial: Profile,
        bc: [Boundary; 2],
        dt: f64,
        stepper: Stepper,
    ) -> Result<Self> {
        assert_eq!(initial.ncomp, reaction.ncomp());
        let max_d = reaction.diffusion().iter().copied().fold(0.0, f64::max);
        let limit = cfl_limit(initial.grid.dx, max_d);
        if stepper == Stepper::Explicit && dt > limit * (1.0 + 1e-12) {
            return Err(Error::CflViolation { dt, limit });
        }
        let mut state = initial;
        let n = state.ncomp;
        for (side, b) in bc.iter().enumerate() {
            if let Boundary::Dirichlet(v) = b {
                let i = if side == 0 { 0 } else { state.grid.cells };
                state.values[i * n..(i + 1) * n].copy_from_slice(v);
            }
        }
        let rate = vec![0.0; state.values.len()];
        Ok(Self {
            reaction,
            bc,
            dt,
            stepper,
            t: 0.0,
            state,
            rate,
        })
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn profile(&self) -> &Profile {
        &self.state
    }

    fn reaction_rates(&mut self) {
        let n = self.state.ncomp;
        let r = self.reaction;
        if self.state.values.len() >= PAR_MIN_LEN {
            self.rate
                .par_chunks_mut(n * 64)
                .zip(self.state.values.par_chunks(n * 64))
                .for_each(|(out, u)| {
                    for (o, ui) in out.chunks_mut(n).zip(u.chunks(n)) {
                        r.eval(ui, o);
                    }
                });
        } else {
            for (o, ui) in self.rate.chunks_mut(n).zip(self.state.values.chunks(n)) {
                r.eval(ui, o);
            }
        }
    }

    fn step(&mut self, dt: f64) -> Result<()> {
        self.reaction_rates();
        let n = self.state.ncomp;
        let cells = self.state.grid.cells;
        let inv_dx2 = 1.0 / (self.state.grid.dx * self.state.grid.dx);
        let reaction = self.reaction;
        let diff = reaction.diffusion();
        match self.stepper {
            Stepper::Explicit => {
                let u = &self.state.values;
                let rate = &mut self.rate;
                for i in 0..=cells {
                    for c in 0..n {
                        let center = u[i * n + c];
                        let left = if i > 0 { u[(i - 1) * n + c] } else { u[n + c] };
                        let right = if i < cells {
                            u[(i + 1) * n + c]
                        } else {
                            u[(cells - 1) * n + c]
                        };
                        rate[i * n + c] += diff[c] * (left - 2.0 * center + right) * inv_dx2;
                    }
                }
                for (v, r) in self.state.values.iter_mut().zip(&self.rate) {
                    *v += dt * r;
                }
            }
            Stepper::Imex => {
                let m = cells + 1;
                let mut lower = vec![0.0; m];
                let mut diag = vec![0.0; m];
                let mut upper = vec![0.0; m];
                let mut rhs = vec![0.0; m];
                for c in 0..n {
                    let r = dt * diff[c] * inv_dx2;
                    for i in 0..m {
                        lower[i] = -r;
                        diag[i] = 1.0 + 2.0 * r;
                        upper[i] = -r;
                        rhs[i] = self.state.values[i * n + c] + dt * self.rate[i * n + c];
                    }
                    upper[0] = -2.0 * r;
                    lower[m - 1] = -2.0 * r;
                    if let Boundary::Dirichlet(v) = &self.bc[0] {
                        (diag[0], upper[0], rhs[0]) = (1.0, 0.0, v[c]);
                    }
                    if let Boundary::Dirichlet(v) = &self.bc[1] {
                        (diag[m - 1], lower[m - 1], rhs[m - 1]) = (1.0, 0.0, v[c]);
                    }
                    solve_tridiagonal(&lower, &diag, &upper, &mut rhs)?;
                    for i in 0..m {
                        self.state.values[i * n + c] = rhs[i];
                    }
                }
            }
        }
        for (side, b) in self.bc.iter().enumerate() {
            if let Boundary::Dirichlet(v) = b {
                let i = if side == 0 { 0 } else { cells };
                self.state.values[i * n..(i + 1) * n].copy_from_slice(v);
            }
        }
        self.t += dt;
        Ok(())
    }

    /// Moves the profile `k` nodes to the left (`k < 0`: to the right),
    /// filling the vacated nodes with copies of the boundary node.
    pub fn shift_nodes(&mut self, k: isize) {
        let n = self.state.ncomp;
        let v = &mut self.state.values;
        let len = v.len();
        let shift = k.unsigned_abs() * n;
        if shift == 0 || shift >= len {
            return;
        }
        if k > 0 {
            v.copy_within(shift.., 0);
            let edge: Vec<f64> = v[len - shift - n..len - shift].to_vec();
            for chunk in v[len - shift..].chunks_mut(n) {
                chunk.copy_from_slice(&edge);
            }
        } else {
            v.copy_within(..len - shift, shift);
            let edge: Vec<f64> = v[shift..shift + n].to_vec();
            for chunk in v[..shift].chunks_mut(n) {
                chunk.copy_from_slice(&edge);
            }
        }
    }

    /// Steps until `t_target`, shortening the final step to land on it.
    pub fn advance_to(&mut self, t_target: f64) -> Result<()> {
        while self.t < t_target - 1e-12 * self.dt {
            let dt = self.dt.min(t_target - self.t);
            self.step(dt)?;
        }
        if !self.state.is_finite() {
            return Err(Error::NonFiniteState { t: self.t });
        }
        Ok(())
    }
}

/// Output times and profiles of a simulation.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub snapshots: Vec<Profile>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepConfig {
    /// Time step; defaults to the explicit stability limit.
    pub dt: Option<f64>,
    pub t_end: f64,
    /// Snapshot interval in time units.
    pub stride: f64,
    #[serde(default)]
    pub stepper: Stepper,
}

impl StepConfig {
    pub fn resolve_dt(&self, dx: f64, max_diffusion: f64) -> f64 {
        self.dt.unwrap_or_else(|| cfl_limit(dx, max_diffusion))
    }
}

/// Runs `reaction` from `initial`, keeping snapshots every `cfg.stride`.
pub fn simulate<R: Reaction>(
    reaction: &R,
    initial: Profile,
    bc: [Boundary; 2],
    cfg: &StepConfig,
) -> Result<Trajectory> {
    let max_d = reaction.diffusion().iter().copied().fold(0.0, f64::max);
    let dt = cfg.resolve_dt(initial.grid.dx, max_d);
    let mut integ = Integrator::new(reaction, initial, bc, dt, cfg.stepper)?;
    let mut times = vec![0.0];
    let mut snapshots = vec![integ.profile().clone()];
    let mut k = 1;
    loop {
        let target = (k as f64 * cfg.stride).min(cfg.t_end);
        integ.advance_to(target)?;
        times.push(integ.time());
        snapshots.push(integ.profile().clone());
        if target >= cfg.t_end {
            break;
        }
        k += 1;
    }
    Ok(Trajectory { times, snapshots })
}

/// Rightmost `x` where component `c` crosses `level` downward, linearly
/// interpolated.
pub fn front_position(profile: &Profile, c: usize, level: f64) -> Option<f64> {
    let g = profile.grid;
    (0..g.cells).rev().find_map(|i| {
        let (a, b) = (profile.get(i, c), profile.get(i + 1, c));
        (a >= level && b < level).then(|| g.x(i) + g.dx * (a - level) / (a - b))
    })
}

/// Least-squares slope and its standard error.
pub fn fit_slope(t: &[f64], x: &[f64]) -> (f64, f64) {
    let n = t.len() as f64;
    let tm = t.iter().sum::<f64>() / n;
    let xm = x.iter().sum::<f64>() / n;
    let sxx: f64 = t.iter().map(|ti| (ti - tm).powi(2)).sum();
    let sxy: f64 = t.iter().zip(x).map(|(ti, xi)| (ti - tm) * (xi - xm)).sum();
    let slope = sxy / sxx;
    let ssr: f64 = t
        .iter()
        .zip(x)
        .map(|(ti, xi)| (xi - xm - slope * (ti - tm)).powi(2))
        .sum();
    let stderr = if t.len() > 2 {
        (ssr / (n - 2.0) / sxx).sqrt()
    } else {
        f64::INFINITY
    };
    (slope, stderr)
}

/// Grid and time settings for front-speed runs on `[-half_length, half_length]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveConfig {
    pub half_length: f64,
    pub cells: usize,
    pub dt: Option<f64>,
    pub t_end: f64,
    /// Interval between front-position samples.
    pub sample_every: f64,
    /// Initial front location.
    pub front_start: f64,
    /// Shift the profile back to the middle when the front drifts more than
    /// a quarter of the domain; positions are reported in the fixed frame.
    #[serde(default = "default_recenter")]
    pub recenter: bool,
    #[serde(default)]
    pub stepper: Stepper,
}

impl Default for WaveConfig {
    fn default() -> Self {
        Self {
            half_length: 100.0,
            cells: 2000,
            dt: None,
            t_end: 120.0,
            sample_every: 0.5,
            front_start: 0.0,
            recenter: true,
            stepper: Stepper::Explicit,
        }
    }
}

fn default_recenter() -> bool {
    true
}

impl WaveConfig {
    pub fn grid(&self) -> Grid {
        Grid::full_line(self.half_length, self.cells)
    }

    /// Same run with `dx` halved and `dt` rescaled accordingly.
    pub fn refined(&self) -> Self {
        Self {
            cells: self.cells * 2,
            dt: self.dt.map(|d| d / 4.0),
            ..*self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.half_length > 0.0 && self.t_end > 0.0 && self.sample_every > 0.0) {
            return Err(Error::Schema(
                "wave: half_length, t_end and sample_every must be > 0".into(),
            ));
        }
        if self.cells < 100 {
            return Err(Error::Schema("wave: cells must be >= 100".into()));
        }
        if self.front_start.abs() >= self.half_length {
            return Err(Error::Schema(
                "wave: front_start must lie inside the domain".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct WaveResult {
    pub c: f64,
    pub stderr: f64,
    pub n_points: usize,
    /// Time window of the fit.
    pub window: [f64; 2],
    #[serde(skip)]
    pub times: Vec<f64>,
    #[serde(skip)]
    pub front_positions: Vec<f64>,
    #[serde(skip)]
    pub final_profile: Option<Profile>,
}

/// Smooth monotone front from `left` to `right` centered at `x0`.
pub fn tanh_front(grid: Grid, left: &[f64], right: &[f64], x0: f64) -> Profile {
    let width = 20.0 * grid.dx;
    Profile::from_fn(grid, left.len(), |x, c| {
        let s = 0.5 * (1.0 - ((x - x0) / width).tanh());
        s * left[c] + (1.0 - s) * right[c]
    })
}

/// Tracks the `level` crossing of component `c` and fits its speed over
/// the last half of the run.
pub fn track_front<R: Reaction>(
    reaction: &R,
    initial: Profile,
    bc: [Boundary; 2],
    cfg: &WaveConfig,
    c: usize,
    level: f64,
) -> Result<WaveResult> {
    cfg.validate()?;
    let grid = initial.grid;
    let max_d = reaction.diffusion().iter().copied().fold(0.0, f64::max);
    let dt = cfg.dt.unwrap_or_else(|| cfl_limit(grid.dx, max_d));
    let mut integ = Integrator::new(reaction, initial, bc, dt, cfg.stepper)?;
    let margin = 10.0 * grid.dx;
    let center = 0.5 * (grid.x0 + grid.x_end());
    let quarter = 0.25 * (grid.x_end() - grid.x0);
    let mut offset = 0.0;
    let mut times = Vec::new();
    let mut xs = Vec::new();
    let steps = (cfg.t_end / cfg.sample_every).round().max(1.0) as usize;
    for k in 1..=steps {
        let t = k as f64 * cfg.t_end / steps as f64;
        integ.advance_to(t)?;
        let x = front_position(integ.profile(), c, level).ok_or(Error::NoFrontDetected { t })?;
        if x - grid.x0 < margin || grid.x_end() - x < margin {
            return Err(Error::FrontLeftDomain { t, x: x + offset });
        }
        times.push(t);
        xs.push(x + offset);
        if cfg.recenter && (x - center).abs() > quarter {
            let nodes = ((x - center) / grid.dx).round() as isize;
            integ.shift_nodes(nodes);
            offset += nodes as f64 * grid.dx;
        }
    }
    let start = times
        .iter()
        .position(|&t| t >= 0.5 * cfg.t_end)
        .unwrap_or(0);
    if times.len() - start < 3 {
        return Err(Error::NoFrontDetected { t: cfg.t_end });
    }
    let (speed, stderr) = fit_slope(&times[start..], &xs[start..]);
    Ok(WaveResult {
        c: speed,
        stderr,
        n_points: times.len() - start,
        window: [times[start], cfg.t_end],
        times,
        front_positions: xs,
        final_profile: Some(integ.profile().clone()),
    })
}

/// Speed of the front connecting `w-` (left) to `0` (right) for `F^tau`.
pub fn wave_speed_system(
    params: &KineticParams,
    hom: &HomotopySetup,
    tau: f64,
    eq: &EquilibriumSet,
    cfg: &WaveConfig,
) -> Result<WaveResult> {
    let reaction = SystemReaction { params, hom, tau };
    let grid = cfg.grid();
    let initial = tanh_front(grid, &eq.w_minus, &eq.w_plus, cfg.front_start);
    let bc = [
        Boundary::Dirichlet(eq.w_minus.to_vec()),
        Boundary::Dirichlet(eq.w_plus.to_vec()),
    ];
    track_front(&reaction, initial, bc, cfg, 7, 0.5 * eq.t_minus)
}

/// Speed of `u_t = D u_xx + f(u)` for a front from `upper` down to 0.
pub fn wave_speed_scalar<F: Fn(f64) -> f64 + Sync>(
    f: F,
    d: f64,
    upper: f64,
    cfg: &WaveConfig,
) -> Result<WaveResult> {
    let reaction = ScalarReaction::new(f, d);
    let initial = tanh_front(cfg.grid(), &[upper], &[0.0], cfg.front_start);
    let bc = [
        Boundary::Dirichlet(vec![upper]),
        Boundary::Dirichlet(vec![0.0]),
    ];
    track_front(&reaction, initial, bc, cfg, 0, 0.5 * upper)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SpeedSign {
    Positive,
    Negative,
    Indeterminate,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SpeedSignReport {
    pub integral: f64,
    pub sign: SpeedSign,
}

/// Sign of `int_0^{upper} f`, which is the sign of the scalar wave speed.
pub fn speed_sign_scalar_criterion<F: Fn(f64) -> f64>(f: F, upper: f64) -> Result<SpeedSignReport> {
    let max_f = (0..=1000)
        .map(|k| f(upper * k as f64 / 1000.0).abs())
        .fold(0.0, f64::max);
    let floor = 1e-10 * upper * max_f;
    let integral = adaptive_simpson(&f, 0.0, upper, 1e-3 * floor.max(f64::MIN_POSITIVE))?;
    let sign = if integral.abs() < floor || max_f == 0.0 {
        SpeedSign::Indeterminate
    } else if integral > 0.0 {
        SpeedSign::Positive
    } else {
        SpeedSign::Negative
    };
    Ok(SpeedSignReport { integral, sign })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cubic(a: f64) -> impl Fn(f64) -> f64 + Sync {
        move |u| u * (u - a) * (1.0 - u)
    }

    #[test]
    fn cfl_violation_is_reported() {
        let r = ScalarReaction::new(cubic(0.25), 1.0);
        let grid = Grid::full_line(10.0, 200);
        let init = Profile::constant(grid, &[0.0]);
        let err = Integrator::new(
            &r,
            init,
            [Boundary::Neumann, Boundary::Neumann],
            1.0,
            Stepper::Explicit,
        )
        .err()
        .unwrap();
        assert!(matches!(err, Error::CflViolation { .. }));
    }

    #[test]
    fn front_crossing_interpolates() {
        let grid = Grid::full_line(1.0, 2);
        let p = Profile {
            grid,
            ncomp: 1,
            values: vec![1.0, 0.75, 0.25],
        };
        assert!((front_position(&p, 0, 0.5).unwrap() - 0.5).abs() < 1e-15);
        assert!(front_position(&p, 0, 2.0).is_none());
    }

    #[test]
    fn slope_fit_recovers_line() {
        let t = [0.0, 1.0, 2.0, 3.0];
        let x = [1.0, 3.0, 5.0, 7.0];
        let (c, se) = fit_slope(&t, &x);
        assert!((c - 2.0).abs() < 1e-14);
        assert!(se < 1e-12);
    }

    #[test]
    fn cubic_integral_sign() {
        let r = speed_sign_scalar_criterion(cubic(0.25), 1.0).unwrap();
        assert_eq!(r.sign, SpeedSign::Positive);
        assert!((r.integral - 0.5 / 12.0).abs() < 1e-12);
        let r = speed_sign_scalar_criterion(cubic(0.5), 1.0).unwrap();
        assert_eq!(r.sign, SpeedSign::Indeterminate);
    }

    #[test]
    fn imex_and_explicit_agree_on_heat_equation() {
        let r = ScalarReaction::new(|_| 0.0, 1.0);
        let grid = Grid::full_line(5.0, 200);
        let init = Profile::from_fn(grid, 1, |x, _| (-x * x).exp());
        let bc = [Boundary::Neumann, Boundary::Neumann];
        let dt = 0.5 * cfl_limit(grid.dx, 1.0);
        let mut a = Integrator::new(&r, init.clone(), bc.clone(), dt, Stepper::Explicit).unwrap();
        let mut b = Integrator::new(&r, init, bc, dt, Stepper::Imex).unwrap();
        a.advance_to(0.5).unwrap();
        b.advance_to(0.5).unwrap();
        let diff = a
            .profile()
            .values
            .iter()
            .zip(&b.profile().values)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        assert!(diff < 1e-3, "{diff}");
    }
}
