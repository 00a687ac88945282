//! Command-line front end. Exit codes: 0 when every verdict passes, 2 when a
//! quantitative verdict fails, 1 on usage or runtime errors.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;

use crate::closed_form::{approx_two_mode, NlsParams, Sign, TwoModeCorrection, TwoModeData};
use crate::error::{Error, Result};
use crate::experiment::{
    choose_parameters_thm1, choose_parameters_thm2, default_large_m, minimal_n_thm1,
    minimal_n_thm2, params_thm1, params_thm2, run_thm1, run_thm2, spread, sweep_bound,
    thm1_negative_control, Config, ExperimentKind, ExperimentReport, RunRecord, RunSetup,
    TraceRow, TraceSource, Verdict,
};
use crate::io::write_atomic;
use crate::mode_ode::{write_modes_csv, ModeSystem};
use crate::solver::evolve;
use crate::spectral::{SobolevIndex, Trajectory};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_FAIL: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "periodic-nls", version, arg_required_else_help = true)]
#[command(about = "Split-step simulation and instability experiments for the periodic NLS")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evolve two-mode initial data with the split-step solver.
    Simulate(TwoModeArgs),
    /// Tabulate the closed-form two-mode ansatz (and its correction).
    Approx(TwoModeArgs),
    /// Integrate the truncated mode system.
    Ode(TwoModeArgs),
    /// Measure the closeness ratio against the two-mode ansatz.
    VerifyBound(BoundArgs),
    /// Zero-mode decoherence between two nearby data.
    Thm1(InstabilityArgs),
    /// Decoherence of two data differing by a constant.
    Thm2(InstabilityArgs),
    /// Summarize a stored report.
    Report {
        /// Report JSON written by another subcommand.
        input: PathBuf,
    },
}

#[derive(Debug, Args)]
struct Common {
    /// JSON config; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long)]
    p: Option<u32>,
    /// Sign of the nonlinearity, 1 or -1.
    #[arg(long, allow_hyphen_values = true)]
    omega: Option<i8>,
    #[arg(long)]
    gridsize: Option<usize>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Debug, Args)]
struct TwoModeArgs {
    #[command(flatten)]
    common: Common,
    /// Zero-mode amplitude, `re` or `re,im`.
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true, default_value = "0.05")]
    alpha: Complex64,
    /// Unit-mode amplitude, `re` or `re,im`.
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true, default_value = "0.1")]
    beta: Complex64,
    #[arg(long, default_value_t = 10.0)]
    t_final: f64,
}

#[derive(Debug, Args)]
struct BoundArgs {
    #[command(flatten)]
    common: Common,
    /// Repeat to sweep several amplitudes.
    #[arg(long)]
    sigma: Vec<f64>,
    #[arg(long)]
    alpha_ratio: Option<f64>,
    #[arg(long)]
    horizon_factor: Option<f64>,
}

#[derive(Debug, Args)]
struct InstabilityArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    s: Option<f64>,
    #[arg(long = "M")]
    large_m: Option<f64>,
    #[arg(long)]
    negative_control_n: Option<u64>,
}

fn parse_complex(text: &str) -> std::result::Result<Complex64, String> {
    let parts: Vec<&str> = text.split(',').collect();
    let num = |s: &str| s.trim().parse::<f64>().map_err(|e| format!("`{s}`: {e}"));
    match parts.as_slice() {
        [re] => Ok(Complex64::new(num(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(num(re)?, num(im)?)),
        _ => Err(format!("expected `re` or `re,im`, got `{text}`")),
    }
}

impl Common {
    fn config(&self) -> Result<Config> {
        let mut c = match &self.config {
            Some(path) => Config::load(path)?,
            None => Config::default(),
        };
        if self.p.is_some() || self.omega.is_some() {
            let omega = match self.omega.map(|w| w.signum()) {
                Some(-1) => Sign::Focusing,
                Some(1) => Sign::Defocusing,
                Some(_) => return Err(Error::invalid("omega", "must be 1 or -1")),
                None => c.nls.omega(),
            };
            c.nls = NlsParams::new(self.p.unwrap_or(c.nls.p()), omega)?;
        }
        if let Some(g) = self.gridsize {
            c.solver.gridsize = g;
        }
        if let Some(dt) = self.dt {
            c.solver.dt = dt;
        }
        if let Some(n) = self.samples {
            c.experiment.samples = n;
        }
        Ok(c)
    }
}

/// Parses `argv` (program name first), runs the subcommand and returns the
/// process exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_PASS };
            let missing = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand
            );
            let _ = e.print();
            return if missing { EXIT_ERROR } else { code };
        }
    };
    match dispatch(cli.command) {
        Ok(Some(report)) => {
            print!("{}", report.summary());
            if report.passed() {
                EXIT_PASS
            } else {
                EXIT_FAIL
            }
        }
        Ok(None) => EXIT_PASS,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

fn dispatch(command: Command) -> Result<Option<ExperimentReport>> {
    match command {
        Command::Simulate(args) => simulate(&args).map(Some),
        Command::Approx(args) => approx(&args).map(|_| None),
        Command::Ode(args) => ode(&args).map(|_| None),
        Command::VerifyBound(args) => verify_bound(&args).map(Some),
        Command::Thm1(args) => thm1(&args).map(Some),
        Command::Thm2(args) => thm2(&args).map(Some),
        Command::Report { input } => ExperimentReport::read(&input).map(Some),
    }
}

fn two_mode_data(args: &TwoModeArgs, cap: f64) -> Result<TwoModeData> {
    let sigma = args.alpha.norm().max(args.beta.norm());
    TwoModeData::with_cap(args.alpha, args.beta, sigma, cap)
}

fn sample_times(t_final: f64, samples: usize) -> Vec<f64> {
    let n = samples.max(1);
    (0..=n).map(|i| t_final * i as f64 / n as f64).collect()
}

fn write_modes(dir: &Path, name: &str, traj: &Trajectory, modes: &[i64]) -> Result<PathBuf> {
    let mut buf = Vec::new();
    write_modes_csv(traj, modes, &mut buf)?;
    let path = dir.join(name);
    write_atomic(&path, &buf)?;
    println!("wrote {}", path.display());
    Ok(path)
}

fn finish(report: ExperimentReport, dir: &Path) -> Result<ExperimentReport> {
    let (json, csv) = report.write(dir)?;
    println!("wrote {} and {}", json.display(), csv.display());
    Ok(report)
}

fn simulate(args: &TwoModeArgs) -> Result<ExperimentReport> {
    let config = args.common.config()?;
    let data = two_mode_data(args, config.experiment.caps.sigma_max)?;
    let times = sample_times(args.t_final, config.experiment.samples);
    let ev = evolve(&approx_two_mode(&config.nls, &data, 0.0), &config.nls, &config.solver.config(times))?;
    let run = RunRecord::new("simulate", &config.solver);
    let mut report = ExperimentReport::new(ExperimentKind::Simulate, config.nls, TraceSource::Pde);
    report.runs.push(run.clone());
    report.trace = ev
        .diagnostics
        .iter()
        .map(|d| TraceRow {
            t: d.t,
            mass: Some(d.mass),
            hamiltonian: Some(d.hamiltonian),
            ..Default::default()
        })
        .collect();
    report.measure("mass_drift", ev.mass_drift, TraceSource::Pde, Some(&run));
    report.measure("hamiltonian_drift", ev.hamiltonian_drift, TraceSource::Pde, Some(&run));
    write_modes(&args.common.out, "simulate_modes.csv", &ev.trajectory, &[-2, -1, 0, 1, 2, 3])?;
    finish(report, &args.common.out)
}

fn approx(args: &TwoModeArgs) -> Result<()> {
    let config = args.common.config()?;
    let data = two_mode_data(args, config.experiment.caps.sigma_max)?;
    let correction = TwoModeCorrection::new(config.nls, data).ok();
    let traj: Trajectory = sample_times(args.t_final, config.experiment.samples)
        .into_iter()
        .map(|t| crate::spectral::Snapshot {
            t,
            field: match &correction {
                Some(c) => c.corrected(t),
                None => approx_two_mode(&config.nls, &data, t),
            },
        })
        .collect();
    write_modes(&args.common.out, "approx_modes.csv", &traj, &[-2, -1, 0, 1, 2, 3])?;
    Ok(())
}

fn ode(args: &TwoModeArgs) -> Result<()> {
    let config = args.common.config()?;
    let data = two_mode_data(args, config.experiment.caps.sigma_max)?;
    let system = ModeSystem::truncated(config.nls, &data);
    let times = sample_times(args.t_final, config.experiment.samples);
    let traj = system.integrate(args.t_final, config.solver.dt, &times)?;
    write_modes(&args.common.out, "ode_modes.csv", &traj, &system.frequencies())?;
    Ok(())
}

fn verify_bound(args: &BoundArgs) -> Result<ExperimentReport> {
    let mut config = args.common.config()?;
    config.experiment.kind = ExperimentKind::VerifyBound;
    if !args.sigma.is_empty() {
        config.experiment.sigma = args.sigma.clone();
    }
    if let Some(r) = args.alpha_ratio {
        config.experiment.alpha_ratio = r;
    }
    if let Some(h) = args.horizon_factor {
        config.experiment.horizon_factor = h;
    }
    let e = &config.experiment;
    let traces = sweep_bound(&config.nls, &e.sigma, e.alpha_ratio, e.horizon_factor, &config.solver, e.samples)?;
    let mut report = ExperimentReport::new(ExperimentKind::VerifyBound, config.nls, TraceSource::Pde);
    for tr in &traces {
        let sigma = tr.data.sigma();
        report.runs.push(tr.run.clone());
        report.trace.extend(tr.samples.iter().map(|s| TraceRow {
            t: s.t,
            gap: None,
            bound_ratio: Some(s.ratio),
            mass: Some(s.mass),
            hamiltonian: Some(s.hamiltonian),
        }));
        report.measure(&format!("max_ratio[sigma={sigma}]"), tr.max_ratio, TraceSource::Pde, Some(&tr.run));
        report.verdicts.push(Verdict::below(
            &format!("finite_ratio[sigma={sigma}]"),
            tr.max_ratio,
            f64::MAX,
            format!("max ||U - u||_H1 / sigma^{} over t <= {:.6e}", tr.exponent, tr.horizon),
        ));
        if let Some(c) = tr.max_corrected_ratio {
            report.measure(&format!("max_corrected_ratio[sigma={sigma}]"), c, TraceSource::Pde, Some(&tr.run));
            report.verdicts.push(Verdict::below(
                &format!("correction_improves[sigma={sigma}]"),
                c,
                tr.max_ratio,
                "ratio against u + v below ratio against u",
            ));
        }
    }
    if traces.len() > 1 {
        let s = spread(traces.iter().map(|t| t.max_ratio));
        report.verdicts.push(Verdict::below("sigma_uniformity", s, 2.0, "largest / smallest max ratio"));
    }
    report.notes.push("trace rows are concatenated in sigma order".into());
    finish(report, &args.common.out)
}

fn instability_config(args: &InstabilityArgs, kind: ExperimentKind) -> Result<Config> {
    let mut config = args.common.config()?;
    config.experiment.kind = kind;
    let e = &mut config.experiment;
    if let Some(v) = args.rho {
        e.rho = v;
    }
    if let Some(v) = args.delta {
        e.delta = v;
    }
    if let Some(v) = args.s {
        e.s = SobolevIndex::new(v)?;
    }
    if args.large_m.is_some() {
        e.large_m = args.large_m;
    }
    if let Some(n) = args.negative_control_n {
        e.negative_control_n = n;
    }
    Ok(config)
}

fn thm1(args: &InstabilityArgs) -> Result<ExperimentReport> {
    let config = instability_config(args, ExperimentKind::Thm1)?;
    let e = &config.experiment;
    let setup = RunSetup::from_config(&config);
    let (params, infeasible) = match choose_parameters_thm1(e.rho, e.delta, e.s, &setup) {
        Ok(p) => (p, None),
        Err(Error::Infeasible { cap, required }) => {
            let n = minimal_n_thm1(e.rho, e.delta, e.s, &setup)?;
            (params_thm1(e.rho, e.delta, e.s, n, &setup)?, Some((cap, required)))
        }
        Err(err) => return Err(err),
    };
    let (main, control) = rayon::join(
        || run_thm1(&params, &setup),
        || thm1_negative_control(e.rho, e.delta, e.s, e.negative_control_n, &setup),
    );
    let mut report = main?;
    merge_control(&mut report, control?);
    if let Some((cap, required)) = infeasible {
        report.notes.insert(0, format!("no admissible N <= {cap}; running at the required N = {required:.6e}"));
    }
    finish(report, &args.common.out)
}

fn merge_control(report: &mut ExperimentReport, control: ExperimentReport) {
    let n = control.params.map_or(0, |p| p.n);
    if let Some(v) = control.verdict("negative_control") {
        report.verdicts.push(v.clone());
    }
    for m in control.measurements {
        let mut m = m;
        m.name = format!("control[N={n}].{}", m.name);
        report.measurements.push(m);
    }
    for v in control.verdicts.into_iter().filter(|v| v.name != "negative_control") {
        report.verdicts.push(Verdict {
            name: format!("control[N={n}].{}", v.name),
            ..v
        });
    }
    report.runs.extend(control.runs);
}

fn thm2(args: &InstabilityArgs) -> Result<ExperimentReport> {
    let mut config = instability_config(args, ExperimentKind::Thm2)?;
    if args.common.p.is_none() && config.nls.p() < 5 {
        config.nls = NlsParams::new(5, config.nls.omega())?;
    }
    if args.delta.is_none() && args.common.config.is_none() {
        config.experiment.delta = 0.05;
    }
    let e = &config.experiment;
    let setup = RunSetup::from_config(&config);
    let (params, infeasible) = match choose_parameters_thm2(e.rho, e.delta, e.s, e.large_m, &setup) {
        Ok(p) => (p, None),
        Err(Error::Infeasible { cap, required }) => {
            let m = e.large_m.unwrap_or_else(|| default_large_m(e.rho, e.delta, setup.rotation_margin));
            let n = minimal_n_thm2(e.rho, e.delta, e.s, m, &setup)?;
            (params_thm2(e.rho, e.delta, e.s, Some(m), n, &setup)?, Some((cap, required)))
        }
        Err(err) => return Err(err),
    };
    let mut report = run_thm2(&params, &setup)?;
    if let Some((cap, required)) = infeasible {
        report.notes.insert(0, format!("no admissible N <= {cap}; running at the required N = {required:.6e}"));
    }
    finish(report, &args.common.out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_values_parse() {
        assert_eq!(parse_complex("0.1").unwrap(), Complex64::new(0.1, 0.0));
        assert_eq!(parse_complex("-0.1,0.2").unwrap(), Complex64::new(-0.1, 0.2));
        assert!(parse_complex("a,b,c").is_err());
    }

    #[test]
    fn no_arguments_is_a_usage_error() {
        assert_eq!(run_cli(["periodic-nls"]), EXIT_ERROR);
        assert_eq!(run_cli(["periodic-nls", "bogus"]), EXIT_ERROR);
        assert_eq!(run_cli(["periodic-nls", "--help"]), EXIT_PASS);
    }

    #[test]
    fn bad_config_is_a_runtime_error() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("c.json");
        std::fs::write(&cfg, r#"{"solver":{"dt":"fast"}}"#).unwrap();
        let code = run_cli([
            "periodic-nls",
            "verify-bound",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert_eq!(code, EXIT_ERROR);
    }
}
