//! End-to-end experiments: the speed/pulse dichotomy, threshold runs from
//! scaled pulses, and the full staged suite.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equilibria::{
    classify_stability, find_equilibria, p_value, EquilibriumSet, StabilityReport,
};
use crate::error::{Error, Result};
use crate::homotopy::{
    build_g, construct_q, find_upper_solution, g_function, verify_speed_preservation, GFunction,
    GSpec, SpeedReport,
};
use crate::kinetics::HomotopySetup;
use crate::params::KineticParams;
use crate::pulses::{
    continue_pulse, linearized_spectrum_check, system_pulse_tau1, ContinuationStep, PulseConfig,
    PulseResult, SpectrumReport,
};
use crate::waves::{
    cfl_limit, fit_slope, front_position, speed_sign_scalar_criterion, wave_speed_system, Boundary,
    Grid, Integrator, Profile, SpeedSign, SpeedSignReport, Stepper, SystemReaction, WaveConfig,
    WaveResult,
};

/// Fixed floor on the speed uncertainty, covering grid error of the
/// front-speed fit.
pub const SPEED_FLOOR: f64 = 0.01;

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum PulseOutcome {
    Found {
        residual_sup: f64,
        amplitude_t: f64,
        strictly_monotone: bool,
    },
    Failed {
        reason: String,
        tau: Option<f64>,
    },
}

impl PulseOutcome {
    pub fn is_found(&self) -> bool {
        matches!(self, PulseOutcome::Found { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Consistent,
    Inconsistent,
}

#[derive(Debug, Clone, Serialize)]
pub struct DichotomyReport {
    pub label: String,
    pub c: f64,
    pub stderr: f64,
    pub uncertainty: f64,
    pub scalar_criterion: SpeedSignReport,
    pub pulse: PulseOutcome,
    pub verdict: Verdict,
    #[serde(skip)]
    pub tau0_pulse: Option<PulseResult>,
}

fn failure_tau(err: &Error) -> Option<f64> {
    match err {
        Error::NewtonDiverged { tau } | Error::MonitorViolated { tau, .. } => Some(*tau),
        _ => None,
    }
}

/// Pulse at `tau = 1` continued to `tau = 0`, with failures folded into
/// the outcome. Returns the path as well when the continuation succeeds.
pub fn pulse_outcome(
    p: &KineticParams,
    hom: &HomotopySetup,
    eq: &EquilibriumSet,
    cfg: &PulseConfig,
) -> (PulseOutcome, Option<PulseResult>, Vec<ContinuationStep>) {
    let attempt = system_pulse_tau1(p, hom, eq, cfg)
        .and_then(|start| continue_pulse(p, hom, eq, &start, cfg));
    match attempt {
        Ok(cont) => {
            let pulse = cont.pulse;
            let outcome = PulseOutcome::Found {
                residual_sup: pulse.residual_sup,
                amplitude_t: pulse.amplitude[7],
                strictly_monotone: pulse.certificate.strictly_monotone,
            };
            (outcome, Some(pulse), cont.path)
        }
        Err(e) => (
            PulseOutcome::Failed {
                reason: e.to_string(),
                tau: failure_tau(&e),
            },
            None,
            Vec::new(),
        ),
    }
}

/// Verdict from a measured speed and a pulse outcome.
pub fn assemble_dichotomy(
    label: &str,
    wave: &WaveResult,
    criterion: SpeedSignReport,
    outcome: PulseOutcome,
    pulse: Option<PulseResult>,
) -> Result<DichotomyReport> {
    let uncertainty = (3.0 * wave.stderr).max(SPEED_FLOOR);
    if wave.c.abs() < uncertainty {
        return Err(Error::Inconclusive {
            c: wave.c,
            uncertainty,
        });
    }
    let found = outcome.is_found();
    let verdict = if (wave.c > 0.0 && found) || (wave.c <= 0.0 && !found) {
        Verdict::Consistent
    } else {
        Verdict::Inconsistent
    };
    Ok(DichotomyReport {
        label: label.to_string(),
        c: wave.c,
        stderr: wave.stderr,
        uncertainty,
        scalar_criterion: criterion,
        pulse: outcome,
        verdict,
        tau0_pulse: pulse,
    })
}

/// Measures `c0`, runs the continuation, and compares.
pub fn run_dichotomy(
    label: &str,
    p: &KineticParams,
    hom: &HomotopySetup,
    eq: &EquilibriumSet,
    wave_cfg: &WaveConfig,
    pulse_cfg: &PulseConfig,
) -> Result<DichotomyReport> {
    let (wave, (outcome, pulse, _)) = rayon::join(
        || wave_speed_system(p, hom, 0.0, eq, wave_cfg),
        || pulse_outcome(p, hom, eq, pulse_cfg),
    );
    let wave = wave?;
    let criterion = speed_sign_scalar_criterion(|t| p_value(p, t), eq.t_minus)?;
    assemble_dichotomy(label, &wave, criterion, outcome, pulse)
}

/// Settings for runs started from a scaled pulse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ThresholdConfig {
    pub lambdas: Vec<f64>,
    /// Half-line length; the pulse is extended evenly through `x = 0`.
    pub length: f64,
    pub dx: f64,
    pub dt: Option<f64>,
    pub t_end: f64,
    pub sample_every: f64,
    pub stepper: Stepper,
    /// Extinction when `sup T` drops below this fraction of `T-bar`.
    pub extinction_fraction: f64,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        Self {
            lambdas: vec![0.6, 0.8, 1.2, 1.5],
            length: 120.0,
            dx: 0.1,
            dt: None,
            t_end: 120.0,
            sample_every: 0.5,
            stepper: Stepper::Explicit,
            extinction_fraction: 0.01,
        }
    }
}

impl ThresholdConfig {
    pub fn validate(&self) -> Result<()> {
        for (key, v) in [
            ("length", self.length),
            ("dx", self.dx),
            ("t_end", self.t_end),
            ("sample_every", self.sample_every),
            ("extinction_fraction", self.extinction_fraction),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Schema(format!("threshold.{key} must be > 0")));
            }
        }
        if self.lambdas.iter().any(|l| !(*l >= 0.0 && l.is_finite())) {
            return Err(Error::Schema("threshold.lambdas must be >= 0".into()));
        }
        if self.length < 100.0 * self.dx {
            return Err(Error::Schema(
                "threshold.length must be at least 100 dx".into(),
            ));
        }
        Ok(())
    }

    pub fn refined(&self) -> Self {
        Self {
            dx: 0.5 * self.dx,
            dt: self.dt.map(|d| d / 4.0),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum ThresholdOutcome {
    Propagation { speed: f64, stderr: f64 },
    Extinction { t: f64 },
}

#[derive(Debug, Clone, Serialize)]
pub struct ThresholdRun {
    pub lambda: f64,
    #[serde(flatten)]
    pub outcome: ThresholdOutcome,
    pub final_sup_t: f64,
    #[serde(skip)]
    pub times: Vec<f64>,
    #[serde(skip)]
    pub front_positions: Vec<Option<f64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ThresholdReport {
    pub runs: Vec<ThresholdRun>,
    /// No extinction above a propagating `lambda`.
    pub monotone_in_lambda: bool,
    pub extinction_level: f64,
    pub front_level: f64,
}

/// Samples `pulse` at the nodes of `grid`, zero beyond its support.
fn resample(pulse: &Profile, grid: Grid, scale: f64) -> Profile {
    let src = pulse.grid;
    Profile::from_fn(grid, 8, |x, c| {
        let s = x / src.dx;
        let i = s.floor() as usize;
        if i >= src.cells {
            return 0.0;
        }
        let frac = s - i as f64;
        scale * ((1.0 - frac) * pulse.get(i, c) + frac * pulse.get(i + 1, c))
    })
}

fn run_one_threshold(
    p: &KineticParams,
    eq: &EquilibriumSet,
    pulse: &PulseResult,
    lambda: f64,
    cfg: &ThresholdConfig,
) -> Result<ThresholdRun> {
    let hom = HomotopySetup::without_bump(0.5);
    let reaction = SystemReaction {
        params: p,
        hom: &hom,
        tau: 0.0,
    };
    let cells = (cfg.length / cfg.dx).round() as usize;
    let grid = Grid::half_line(cells as f64 * cfg.dx, cells);
    let initial = resample(&pulse.profile, grid, lambda);
    let dt = cfg
        .dt
        .unwrap_or_else(|| cfl_limit(grid.dx, p.max_diffusion()));
    let mut integ = Integrator::new(
        &reaction,
        initial,
        [Boundary::Neumann, Boundary::Neumann],
        dt,
        cfg.stepper,
    )?;

    let floor = cfg.extinction_fraction * eq.t_bar;
    let level = 0.5 * eq.t_minus;
    let sup_t = |prof: &Profile| prof.sup(7);
    if sup_t(integ.profile()) < floor {
        return Ok(ThresholdRun {
            lambda,
            outcome: ThresholdOutcome::Extinction { t: 0.0 },
            final_sup_t: sup_t(integ.profile()),
            times: vec![0.0],
            front_positions: vec![None],
        });
    }
    let margin = 10.0 * grid.dx;
    let steps = (cfg.t_end / cfg.sample_every).round().max(1.0) as usize;
    let mut times = Vec::new();
    let mut fronts = Vec::new();
    for k in 1..=steps {
        let t = k as f64 * cfg.t_end / steps as f64;
        integ.advance_to(t)?;
        let prof = integ.profile();
        let sup = sup_t(prof);
        let front = front_position(prof, 7, level);
        times.push(t);
        fronts.push(front);
        if sup < floor {
            return Ok(ThresholdRun {
                lambda,
                outcome: ThresholdOutcome::Extinction { t },
                final_sup_t: sup,
                times,
                front_positions: fronts,
            });
        }
        if front.is_some_and(|x| grid.x_end() - x < margin) {
            break;
        }
    }
    let final_sup_t = sup_t(integ.profile());
    let t_stop = *times.last().unwrap_or(&0.0);
    let start = times.iter().position(|&t| t >= 0.5 * t_stop).unwrap_or(0);
    let window: Option<Vec<f64>> = fronts[start..].iter().copied().collect();
    if let Some(xs) = window {
        let advancing = xs.windows(2).all(|w| w[1] >= w[0] - 1e-12) && xs.last() > xs.first();
        if xs.len() >= 3 && advancing {
            let (speed, stderr) = fit_slope(&times[start..], &xs);
            return Ok(ThresholdRun {
                lambda,
                outcome: ThresholdOutcome::Propagation { speed, stderr },
                final_sup_t,
                times,
                front_positions: fronts,
            });
        }
    }
    Err(Error::Unclassified {
        lambda,
        t_end: t_stop,
    })
}

/// Runs the system at `tau = 0` from `lambda` times the evenly extended
/// pulse, for every `lambda` in `cfg` (in parallel).
///
/// The even extension is represented on the half-line by a no-flux
/// condition at `x = 0`.
pub fn run_threshold(
    p: &KineticParams,
    eq: &EquilibriumSet,
    pulse: &PulseResult,
    cfg: &ThresholdConfig,
) -> Result<ThresholdReport> {
    cfg.validate()?;
    let mut runs = cfg
        .lambdas
        .par_iter()
        .map(|&lambda| run_one_threshold(p, eq, pulse, lambda, cfg))
        .collect::<Result<Vec<_>>>()?;
    runs.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    let first_prop = runs
        .iter()
        .position(|r| matches!(r.outcome, ThresholdOutcome::Propagation { .. }));
    let monotone_in_lambda = match first_prop {
        Some(k) => runs[k..]
            .iter()
            .all(|r| matches!(r.outcome, ThresholdOutcome::Propagation { .. })),
        None => true,
    };
    Ok(ThresholdReport {
        runs,
        monotone_in_lambda,
        extinction_level: cfg.extinction_fraction * eq.t_bar,
        front_level: 0.5 * eq.t_minus,
    })
}

/// The configured bump when given, the constructed one otherwise.
pub fn resolve_g(
    p: &KineticParams,
    eq: &EquilibriumSet,
    tau1: f64,
    g: Option<GSpec>,
) -> Result<(GSpec, GFunction)> {
    match g {
        Some(g) => g_function(p, eq, tau1, g).map(|gf| (g, gf)),
        None => build_g(p, eq, tau1),
    }
}

/// Everything the suite needs besides the kinetic parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteSettings {
    pub label: String,
    pub tau1: f64,
    /// Bump override; constructed when absent.
    pub g: Option<GSpec>,
    pub tau_grid: Vec<f64>,
    pub wave: WaveConfig,
    pub pulse: PulseConfig,
    pub threshold: ThresholdConfig,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstructionReport {
    pub g: GFunction,
    pub q: Vec<(f64, [f64; 8])>,
    pub upper_epsilon: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteSummary {
    pub label: String,
    pub equilibria: EquilibriumSet,
    pub stability: StabilityReport,
    pub construction: ConstructionReport,
    pub c0: WaveResult,
    /// Absent when `c0` is not positive.
    pub speeds: Option<SpeedReport>,
    pub spectrum: Option<SpectrumReport>,
    pub continuation: Vec<ContinuationStep>,
    pub dichotomy: DichotomyReport,
    /// Absent when there is no `tau = 0` pulse.
    pub threshold: Option<ThresholdReport>,
    #[serde(skip)]
    pub tau0_pulse: Option<PulseResult>,
    #[serde(skip)]
    pub tau1_pulse: Option<PulseResult>,
}

/// Equilibria, stability, constructions, speeds, pulses, dichotomy and
/// threshold in sequence. The first hard failure is returned tagged with
/// its stage.
pub fn run_full_suite(p: &KineticParams, s: &SuiteSettings) -> Result<SuiteSummary> {
    p.validate().map_err(|e| e.at_stage("config"))?;
    let eq = find_equilibria(p).map_err(|e| e.at_stage("equilibria"))?;
    let (g, gf) = resolve_g(p, &eq, s.tau1, s.g).map_err(|e| e.at_stage("g"))?;
    let hom = HomotopySetup { tau1: s.tau1, g };
    let stability =
        classify_stability(p, &hom, &eq, &s.tau_grid).map_err(|e| e.at_stage("stability"))?;
    let q = s
        .tau_grid
        .iter()
        .map(|&tau| construct_q(p, &hom, tau).map(|q| (tau, q)))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.at_stage("q"))?;
    let psi = find_upper_solution(p, &hom, &eq, 0.1, &s.tau_grid)
        .map_err(|e| e.at_stage("upper_solution"))?;
    let construction = ConstructionReport {
        g: gf,
        q,
        upper_epsilon: psi.epsilon,
    };

    let c0 = wave_speed_system(p, &hom, 0.0, &eq, &s.wave).map_err(|e| e.at_stage("speed"))?;
    let speeds = if c0.c > 0.0 {
        Some(
            verify_speed_preservation(p, &hom, &eq, &gf, &s.tau_grid, &s.wave)
                .map_err(|e| e.at_stage("speed"))?,
        )
    } else {
        None
    };

    let tau1_pulse = system_pulse_tau1(p, &hom, &eq, &s.pulse).map_err(|e| e.at_stage("pulse"))?;
    let spectrum = Some(
        linearized_spectrum_check(p, &hom, &eq, &tau1_pulse, &s.pulse)
            .map_err(|e| e.at_stage("spectrum"))?,
    );
    let (outcome, tau0_pulse, continuation) =
        match continue_pulse(p, &hom, &eq, &tau1_pulse, &s.pulse) {
            Ok(cont) => {
                let pulse = cont.pulse;
                let outcome = PulseOutcome::Found {
                    residual_sup: pulse.residual_sup,
                    amplitude_t: pulse.amplitude[7],
                    strictly_monotone: pulse.certificate.strictly_monotone,
                };
                (outcome, Some(pulse), cont.path)
            }
            Err(e) => (
                PulseOutcome::Failed {
                    reason: e.to_string(),
                    tau: failure_tau(&e),
                },
                None,
                Vec::new(),
            ),
        };
    let criterion = speed_sign_scalar_criterion(|t| p_value(p, t), eq.t_minus)
        .map_err(|e| e.at_stage("dichotomy"))?;
    let dichotomy = assemble_dichotomy(&s.label, &c0, criterion, outcome, tau0_pulse.clone())
        .map_err(|e| e.at_stage("dichotomy"))?;

    let threshold = match &tau0_pulse {
        Some(pulse) => {
            Some(run_threshold(p, &eq, pulse, &s.threshold).map_err(|e| e.at_stage("threshold"))?)
        }
        None => None,
    };
    Ok(SuiteSummary {
        label: s.label.clone(),
        equilibria: eq,
        stability,
        construction,
        c0,
        speeds,
        spectrum,
        continuation,
        dichotomy,
        threshold,
        tau0_pulse,
        tau1_pulse: Some(tau1_pulse),
    })
}

/// `true` when the scalar integral sign agrees with the measured speed.
pub fn criterion_agrees(report: &DichotomyReport) -> bool {
    match report.scalar_criterion.sign {
        SpeedSign::Positive => report.c > 0.0,
        SpeedSign::Negative => report.c < 0.0,
        SpeedSign::Indeterminate => false,
    }
}
