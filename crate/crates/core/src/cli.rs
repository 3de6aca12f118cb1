//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{parse_config, RunConfig};
use crate::equilibria::{
    build_p, classify_stability, closed_form_d, find_equilibria, p_value, EquilibriumSet,
    StabilityReport,
};
use crate::error::{Error, Result};
use crate::experiments::{
    pulse_outcome, resolve_g, run_dichotomy, run_full_suite, run_threshold, PulseOutcome, Verdict,
};
use crate::homotopy::{verify_speed_preservation, GFunction, SpeedReport};
use crate::io::OutputDir;
use crate::kinetics::{check_monotone, eval_f, sample_region_c, HomotopySetup, MonotoneReport};
use crate::pulses::{
    continue_pulse, linearized_spectrum_check, system_pulse_tau1, ContinuationStep, PulseResult,
};
use crate::waves::{speed_sign_scalar_criterion, wave_speed_system, SpeedSignReport, WaveResult};

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DOMAIN: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "pulselab",
    version,
    about = "Waves and pulses for an 8-species coagulation model"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Seed for sampled checks.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Comma-separated tau values.
    #[arg(long = "tau-grid", global = true, value_delimiter = ',')]
    tau_grid: Option<Vec<f64>>,
    /// Comma-separated scaling factors for threshold runs.
    #[arg(long = "lambda", global = true, value_delimiter = ',')]
    lambda: Option<Vec<f64>>,
    /// Double the spatial resolution.
    #[arg(long, global = true)]
    refine: bool,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Spatially uniform equilibria and the rational thrombin nonlinearity.
    Equilibria,
    /// Principal eigenvalues over the tau grid and the monotone-system check.
    Stability,
    /// Front speeds over the tau grid.
    Wave,
    /// The pulse at tau = 0 (requires a positive wave speed).
    Pulse,
    /// Continuation from the tau = 1 pulse, reporting where it stops.
    Continue,
    /// Compare the sign of the wave speed with pulse existence.
    Dichotomy,
    /// Runs from scaled pulses: propagation or extinction.
    Threshold,
    /// Every stage in sequence.
    Suite,
}

pub fn exit_code(err: &Error) -> i32 {
    if err.is_usage_error() {
        EXIT_USAGE
    } else if err.is_domain_error() {
        EXIT_DOMAIN
    } else {
        EXIT_NUMERICAL
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                stdout.write_all(text.as_bytes())
            } else {
                stderr.write_all(text.as_bytes())
            };
            return code;
        }
    };
    if let Err(e) = configure_threads() {
        let _ = writeln!(stderr, "error: {e}");
        return exit_code(&e);
    }
    match dispatch(&cli, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("PULSELAB_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        Error::Schema(format!(
            "PULSELAB_THREADS must be a positive integer, got \"{raw}\""
        ))
    })?;
    // a pool already set up by an earlier call in the same process is fine
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
    Ok(())
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::Schema("--config is required".into()))?;
    let mut cfg = parse_config(path)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(grid) = &cli.tau_grid {
        let mut grid = grid.clone();
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        cfg.tau_grid = grid;
    }
    if let Some(l) = &cli.lambda {
        cfg.threshold.lambdas = l.clone();
    }
    if cli.refine {
        cfg = cfg.refined();
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Parameters, equilibria and homotopy shared by most commands.
struct Context {
    cfg: RunConfig,
    eq: EquilibriumSet,
    hom: HomotopySetup,
    gf: GFunction,
    out: OutputDir,
}

impl Context {
    fn new(cli: &Cli) -> Result<Self> {
        let cfg = load_config(cli)?;
        let out = OutputDir::create(&cli.out, cfg.to_json_value())?;
        let eq = find_equilibria(&cfg.params)?;
        let (g, gf) = resolve_g(&cfg.params, &eq, cfg.homotopy.tau1, cfg.homotopy.g)?;
        let hom = HomotopySetup {
            tau1: cfg.homotopy.tau1,
            g,
        };
        Ok(Self {
            cfg,
            eq,
            hom,
            gf,
            out,
        })
    }

    fn c0(&self) -> Result<WaveResult> {
        wave_speed_system(&self.cfg.params, &self.hom, 0.0, &self.eq, &self.cfg.wave)
    }

    fn require_positive_speed(&self) -> Result<WaveResult> {
        let w = self.c0()?;
        if w.c <= 0.0 {
            return Err(Error::NoPulseExpected { c: w.c });
        }
        Ok(w)
    }
}

#[derive(Serialize)]
struct EquilibriaReport<'a> {
    equilibria: &'a EquilibriumSet,
    /// `|F(w*)|_inf` at `w+`, `w-bar`, `w-`.
    residuals: [f64; 3],
    d_fitted: f64,
    d_closed_form: f64,
    numerator: Vec<f64>,
    denominator: Vec<f64>,
    fit_residual: f64,
}

#[derive(Serialize)]
struct StabilityOutput {
    stability: StabilityReport,
    monotone: Vec<MonotoneReport>,
}

#[derive(Serialize)]
struct WaveOutput {
    c0: WaveResult,
    scalar_criterion: SpeedSignReport,
    /// Present when `c0 > 0`.
    speeds: Option<SpeedReport>,
}

#[derive(Serialize)]
struct PulseOutput<'a> {
    c0: &'a WaveResult,
    tau1: &'a PulseResult,
    tau0: &'a PulseResult,
    spectrum: crate::pulses::SpectrumReport,
}

#[derive(Serialize)]
struct ContinuationOutput<'a> {
    tau1: &'a PulseResult,
    outcome: PulseOutcome,
    path: Vec<ContinuationStep>,
}

fn front_rows(w: &WaveResult) -> Vec<Vec<f64>> {
    w.times
        .iter()
        .zip(&w.front_positions)
        .map(|(t, x)| vec![*t, *x])
        .collect()
}

fn dispatch(cli: &Cli, stdout: &mut dyn Write) -> Result<i32> {
    if let Command::Suite = cli.command {
        return run_suite(cli, stdout);
    }
    let ctx = Context::new(cli)?;
    let p = &ctx.cfg.params;
    match cli.command {
        Command::Equilibria => {
            let rational = build_p(p)?;
            let residuals = ctx
                .eq
                .states()
                .map(|w| eval_f(p, &w).iter().fold(0.0, |m: f64, x| m.max(x.abs())));
            let report = EquilibriaReport {
                equilibria: &ctx.eq,
                residuals,
                d_fitted: rational.d,
                d_closed_form: closed_form_d(p),
                numerator: rational.numerator.coeffs.clone(),
                denominator: rational.denominator.coeffs.clone(),
                fit_residual: rational.fit_residual,
            };
            let path = ctx.out.write_report("equilibria", &report)?;
            writeln!(
                stdout,
                "T+ = {:e}, T-bar = {:e}, T- = {:e}\nwrote {}",
                ctx.eq.t_plus,
                ctx.eq.t_bar,
                ctx.eq.t_minus,
                path.display()
            )?;
        }
        Command::Stability => {
            let stability = classify_stability(p, &ctx.hom, &ctx.eq, &ctx.cfg.tau_grid)?;
            let mut rng = ChaCha8Rng::seed_from_u64(ctx.cfg.seed);
            let samples = sample_region_c(p, &ctx.eq.w_minus, ctx.cfg.samples, &mut rng);
            let monotone = ctx
                .cfg
                .tau_grid
                .par_iter()
                .map(|&tau| check_monotone(p, &ctx.hom, tau, &samples))
                .collect::<Result<Vec<_>>>()?;
            let violations: usize = monotone.iter().map(|m| m.violations.len()).sum();
            writeln!(
                stdout,
                "sign triple {:?}, monotone violations {violations}",
                stability.sign_triple()
            )?;
            let path = ctx.out.write_report(
                "stability",
                &StabilityOutput {
                    stability,
                    monotone,
                },
            )?;
            writeln!(stdout, "wrote {}", path.display())?;
        }
        Command::Wave => {
            let c0 = ctx.c0()?;
            let scalar_criterion = speed_sign_scalar_criterion(|t| p_value(p, t), ctx.eq.t_minus)?;
            let speeds = if c0.c > 0.0 {
                Some(verify_speed_preservation(
                    p,
                    &ctx.hom,
                    &ctx.eq,
                    &ctx.gf,
                    &ctx.cfg.tau_grid,
                    &ctx.cfg.wave,
                )?)
            } else {
                None
            };
            writeln!(stdout, "c0 = {:e} +- {:e}", c0.c, c0.stderr)?;
            if let Some(s) = &speeds {
                for e in &s.entries {
                    writeln!(
                        stdout,
                        "tau = {}: c = {:e}, bound holds: {}",
                        e.tau, e.wave.c, e.bound_holds
                    )?;
                }
            }
            ctx.out
                .write_table("front_tau0", &["t".into(), "x".into()], front_rows(&c0))?;
            let path = ctx.out.write_report(
                "wave",
                &WaveOutput {
                    c0,
                    scalar_criterion,
                    speeds,
                },
            )?;
            writeln!(stdout, "wrote {}", path.display())?;
        }
        Command::Pulse => {
            let c0 = ctx.require_positive_speed()?;
            let tau1 = system_pulse_tau1(p, &ctx.hom, &ctx.eq, &ctx.cfg.pulse)?;
            let spectrum = linearized_spectrum_check(p, &ctx.hom, &ctx.eq, &tau1, &ctx.cfg.pulse)?;
            let tau0 = continue_pulse(p, &ctx.hom, &ctx.eq, &tau1, &ctx.cfg.pulse)?.pulse;
            ctx.out.write_profile("pulse_tau1", &tau1.profile)?;
            ctx.out.write_profile("pulse", &tau0.profile)?;
            writeln!(
                stdout,
                "pulse at tau = 0: T(0) = {:e}, residual {:e}, certificate {}",
                tau0.amplitude[7],
                tau0.residual_sup,
                if tau0.certificate.pass {
                    "pass"
                } else {
                    "fail"
                }
            )?;
            let path = ctx.out.write_report(
                "pulse",
                &PulseOutput {
                    c0: &c0,
                    tau1: &tau1,
                    tau0: &tau0,
                    spectrum,
                },
            )?;
            writeln!(stdout, "wrote {}", path.display())?;
        }
        Command::Continue => {
            let tau1 = system_pulse_tau1(p, &ctx.hom, &ctx.eq, &ctx.cfg.pulse)?;
            ctx.out.write_profile("pulse_tau1", &tau1.profile)?;
            let result = continue_pulse(p, &ctx.hom, &ctx.eq, &tau1, &ctx.cfg.pulse);
            let (outcome, path, failure) = match result {
                Ok(cont) => {
                    ctx.out.write_profile("pulse_tau0", &cont.pulse.profile)?;
                    let outcome = PulseOutcome::Found {
                        residual_sup: cont.pulse.residual_sup,
                        amplitude_t: cont.pulse.amplitude[7],
                        strictly_monotone: cont.pulse.certificate.strictly_monotone,
                    };
                    (outcome, cont.path, None)
                }
                Err(e) => {
                    let tau = match &e {
                        Error::NewtonDiverged { tau } | Error::MonitorViolated { tau, .. } => {
                            Some(*tau)
                        }
                        _ => None,
                    };
                    (
                        PulseOutcome::Failed {
                            reason: e.to_string(),
                            tau,
                        },
                        Vec::new(),
                        Some(e),
                    )
                }
            };
            let file = ctx.out.write_report(
                "continuation",
                &ContinuationOutput {
                    tau1: &tau1,
                    outcome,
                    path,
                },
            )?;
            writeln!(stdout, "wrote {}", file.display())?;
            if let Some(e) = failure {
                return Err(e);
            }
        }
        Command::Dichotomy => {
            let report = run_dichotomy(
                &ctx.cfg.label,
                p,
                &ctx.hom,
                &ctx.eq,
                &ctx.cfg.wave,
                &ctx.cfg.pulse,
            )?;
            writeln!(
                stdout,
                "c0 = {:e} (uncertainty {:e}), pulse found: {}, verdict: {:?}",
                report.c,
                report.uncertainty,
                report.pulse.is_found(),
                report.verdict
            )?;
            let path = ctx.out.write_report("dichotomy", &report)?;
            writeln!(stdout, "wrote {}", path.display())?;
            if report.verdict != Verdict::Consistent {
                return Ok(EXIT_NUMERICAL);
            }
        }
        Command::Threshold => {
            ctx.require_positive_speed()?;
            let (outcome, pulse, _) = pulse_outcome(p, &ctx.hom, &ctx.eq, &ctx.cfg.pulse);
            let pulse = pulse.ok_or_else(|| match outcome {
                PulseOutcome::Failed { reason, .. } => Error::CertificateFailed(reason),
                PulseOutcome::Found { .. } => unreachable!("found without a pulse"),
            })?;
            let report = run_threshold(p, &ctx.eq, &pulse, &ctx.cfg.threshold)?;
            for run in &report.runs {
                writeln!(stdout, "lambda = {}: {:?}", run.lambda, run.outcome)?;
            }
            let mut header = vec!["t".to_string()];
            header.extend(
                report
                    .runs
                    .iter()
                    .map(|r| format!("front_lambda_{}", r.lambda)),
            );
            let longest = report.runs.iter().map(|r| r.times.len()).max().unwrap_or(0);
            let rows = (0..longest).map(|k| {
                let t = report
                    .runs
                    .iter()
                    .find_map(|r| r.times.get(k).copied())
                    .unwrap_or(f64::NAN);
                let mut row = vec![t];
                row.extend(report.runs.iter().map(|r| {
                    r.front_positions
                        .get(k)
                        .copied()
                        .flatten()
                        .unwrap_or(f64::NAN)
                }));
                row
            });
            ctx.out.write_table("threshold_fronts", &header, rows)?;
            let path = ctx.out.write_report("threshold", &report)?;
            writeln!(stdout, "wrote {}", path.display())?;
        }
        Command::Suite => unreachable!("handled above"),
    }
    Ok(0)
}

fn run_suite(cli: &Cli, stdout: &mut dyn Write) -> Result<i32> {
    let cfg = load_config(cli)?;
    let out = OutputDir::create(&cli.out, cfg.to_json_value())?;
    let summary = run_full_suite(&cfg.params, &cfg.suite_settings())?;
    if let Some(pulse) = &summary.tau1_pulse {
        out.write_profile("pulse_tau1", &pulse.profile)?;
    }
    if let Some(pulse) = &summary.tau0_pulse {
        out.write_profile("pulse_tau0", &pulse.profile)?;
    }
    out.write_table(
        "front_tau0",
        &["t".into(), "x".into()],
        front_rows(&summary.c0),
    )?;
    writeln!(
        stdout,
        "c0 = {:e}, pulse found: {}, verdict: {:?}",
        summary.c0.c,
        summary.dichotomy.pulse.is_found(),
        summary.dichotomy.verdict
    )?;
    let path = out.write_report("suite", &summary)?;
    writeln!(stdout, "wrote {}", path.display())?;
    if summary.dichotomy.verdict != Verdict::Consistent {
        return Ok(EXIT_NUMERICAL);
    }
    Ok(0)
}
