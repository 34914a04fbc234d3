//! Batch experiment driver behind the `ou-epr` binary.
//!
//! Each run resolves one [`ExperimentConfig`] (file, then flags), executes a
//! single command, writes its CSV artifacts plus `report.json` into the
//! output directory and maps the outcome to an exit status:
//! 0 all checks pass, 1 some check failed, 2 bad configuration,
//! 3 computation error.

pub mod config;
pub mod report;

use std::ffi::OsString;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

pub use config::{CommandName, ExperimentConfig, VerifyTest};
pub use report::{ExperimentReport, TestRecord, Timing};

use crate::cramer::{cramer, cramer_quadrature, lambda_finite_t, rate_legendre, rate_paper};
use crate::epr::{ergodic_mean, sample_epr};
use crate::mc_verify::{estimate_log_mgf, ft_histogram_test, girsanov_balance};
use crate::ou_sim::{simulate, Scheme, SimConfig};
use crate::output::{fmt_float, CsvWriter};
use crate::rng::RngStream;
use crate::spectral::{eigenvalues, Kernel};
use crate::{Error, Result};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_COMPUTE: i32 = 3;

const MGF_SPECTRAL_TERMS: usize = 64;

#[derive(Debug, Parser)]
#[command(
    name = "ou-epr",
    version,
    about = "Entropy production of the rotating 2D Ornstein-Uhlenbeck process"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Option<Command>,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// First n eigenvalues of the covariance operator on [0, T].
    Spectrum,
    /// Finite-T, closed-form and quadrature Cramér functions on a lambda grid.
    Cramer,
    /// Rate function by explicit formula and by Legendre transform.
    Rate,
    /// Write sample trajectories.
    Simulate,
    /// Sample e_p(t) on independent stationary paths.
    Epr,
    /// Monte Carlo checks; without a test name nothing runs.
    Verify {
        #[arg(value_enum)]
        test: Option<VerifyTest>,
    },
}

impl Command {
    fn name(&self) -> CommandName {
        match self {
            Command::Spectrum => CommandName::Spectrum,
            Command::Cramer => CommandName::Cramer,
            Command::Rate => CommandName::Rate,
            Command::Simulate => CommandName::Simulate,
            Command::Epr => CommandName::Epr,
            Command::Verify { .. } => CommandName::Verify,
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Flat TOML config; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for path simulation (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Operator horizon.
    #[arg(long = "T", global = true)]
    pub horizon: Option<f64>,
    /// Number of eigenvalues.
    #[arg(long, global = true)]
    pub n: Option<usize>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub lambda_min: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub lambda_max: Option<f64>,
    #[arg(long, global = true)]
    pub lambda_steps: Option<usize>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub x: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub x_min: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub x_max: Option<f64>,
    #[arg(long, global = true)]
    pub x_steps: Option<usize>,
    #[arg(long, global = true)]
    pub dt: Option<f64>,
    #[arg(long, global = true)]
    pub scheme: Option<Scheme>,
    #[arg(long, global = true)]
    pub n_paths: Option<usize>,
    /// Path horizon for Monte Carlo commands.
    #[arg(long = "t", global = true)]
    pub t: Option<f64>,
    #[arg(long, global = true)]
    pub bins: Option<usize>,
}

/// File values first, then every flag that was given.
pub fn resolve(cli: &Cli) -> Result<ExperimentConfig> {
    let mut c = match &cli.flags.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(cmd) = cli.command {
        c.command = Some(cmd.name());
        if let Command::Verify { test } = cmd {
            c.test = test.or(c.test);
        }
    }
    let f = &cli.flags;
    macro_rules! set {
        ($($flag:ident => $field:ident),* $(,)?) => {
            $(if let Some(v) = f.$flag.clone() { c.$field = v; })*
        };
    }
    macro_rules! set_opt {
        ($($flag:ident),* $(,)?) => {
            $(if f.$flag.is_some() { c.$flag = f.$flag; })*
        };
    }
    set!(theta => theta, seed => seed, out => output_dir, horizon => horizon, n => n,
        lambda_steps => lambda_steps, x_min => x_min, x_max => x_max, x_steps => x_steps,
        dt => dt, scheme => scheme, n_paths => n_paths, t => t, bins => bins);
    set_opt!(threads, lambda, lambda_min, lambda_max, x);
    c.validate()?;
    Ok(c)
}

struct Run<'a> {
    config: &'a ExperimentConfig,
    dir: &'a Path,
    report: ExperimentReport,
}

impl Run<'_> {
    fn csv(&mut self, name: &str, header: &[&str]) -> Result<CsvWriter<BufWriter<File>>> {
        self.report.artifacts.push(name.to_string());
        Ok(CsvWriter::create(&self.dir.join(name), header)?)
    }

    fn timed<T>(&mut self, step: &str, f: impl FnOnce(&mut Self) -> Result<T>) -> Result<T> {
        let start = Instant::now();
        let out = f(self);
        self.report.timings.push(Timing {
            step: step.to_string(),
            seconds: start.elapsed().as_secs_f64(),
        });
        out
    }
}

/// Executes the configured command and writes `report.json`, also when the
/// computation fails part-way.
pub fn run(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let dir = config.output_dir.clone();
    std::fs::create_dir_all(&dir)?;
    let mut run = Run {
        config,
        dir: &dir,
        report: ExperimentReport::new(config),
    };
    let command = config.command.expect("validated");
    let outcome = run.timed(command.as_str(), |run| dispatch(run, command));
    if let Err(e) = &outcome {
        run.report.error = Some(e.to_string());
    }
    run.report.artifacts.push("report.json".into());
    run.report.write(&dir)?;
    outcome.map(|()| run.report)
}

fn dispatch(run: &mut Run, command: CommandName) -> Result<()> {
    match command {
        CommandName::Spectrum => spectrum(run),
        CommandName::Cramer => cramer_table(run),
        CommandName::Rate => rate_table(run),
        CommandName::Simulate => trajectories(run),
        CommandName::Epr => epr_samples(run),
        CommandName::Verify => match run.config.test {
            None => Ok(()),
            Some(VerifyTest::Mgf) => verify_mgf(run),
            Some(VerifyTest::Girsanov) => verify_girsanov(run),
            Some(VerifyTest::Gc) => verify_gc(run),
            Some(VerifyTest::Ergodic) => verify_ergodic(run),
        },
    }
}

fn spectrum(run: &mut Run) -> Result<()> {
    let cfg = run.config;
    let model = cfg.model()?;
    let kernel = Kernel::from_drift(&model.drift(), cfg.horizon)?;
    let spec = eigenvalues(&kernel, cfg.n)?;
    let mut out = run.csv("spectrum.csv", &["j", "kind", "omega", "gamma"])?;
    for (k, (root, gamma)) in spec.roots.iter().zip(&spec.gammas).enumerate() {
        out.row(&[
            (k + 1).to_string(),
            root.kind.as_str().to_string(),
            fmt_float(root.omega),
            fmt_float(*gamma),
        ])?;
    }
    out.finish()?;
    let trace = spec.trace_estimate();
    run.report.tests.push(TestRecord::within(
        "trace",
        trace.total(),
        cfg.horizon,
        1e-3,
    ));
    Ok(())
}

fn cramer_table(run: &mut Run) -> Result<()> {
    let cfg = run.config;
    let model = cfg.model()?;
    let lambdas = match cfg.lambda_grid(Vec::new) {
        g if g.is_empty() => cfg.default_lambda_range()?,
        g => g,
    };
    let mut out = run.csv(
        "cramer.csv",
        &["lambda", "ell", "LambdaT", "Lambda_closed", "Lambda_quad"],
    )?;
    let mut worst: f64 = 0.0;
    for &l in &lambdas {
        let finite_t = lambda_finite_t(&model, l, cfg.horizon, cfg.n)?.value;
        let closed = cramer(&model, l).value;
        let quad = cramer_quadrature(&model, l)?.value;
        if closed.is_finite() {
            worst = worst.max((closed - quad).abs());
        }
        out.row(&[l, model.ell_of_lambda(l), finite_t, closed, quad].map(fmt_float))?;
    }
    out.finish()?;
    run.report
        .tests
        .push(TestRecord::within("closed_vs_quadrature", worst, 0.0, 1e-8));
    Ok(())
}

fn rate_table(run: &mut Run) -> Result<()> {
    let cfg = run.config;
    let model = cfg.model()?;
    let mut out = run.csv(
        "rate.csv",
        &["x", "I_paper", "I_legendre", "argmax_lambda", "ell0"],
    )?;
    let mut worst: f64 = 0.0;
    for x in cfg.x_grid() {
        let explicit = rate_paper(&model, x);
        let legendre = rate_legendre(&model, x)?;
        worst = worst.max((explicit.value - legendre.value).abs());
        let argmax = legendre.argmax_lambda.unwrap_or(f64::NAN);
        let ell0 = explicit.ell0.unwrap_or(f64::NAN);
        out.row(&[x, explicit.value, legendre.value, argmax, ell0].map(fmt_float))?;
    }
    out.finish()?;
    run.report
        .tests
        .push(TestRecord::within("legendre_duality", worst, 0.0, 1e-6));
    Ok(())
}

fn trajectories(run: &mut Run) -> Result<()> {
    let cfg = run.config;
    let model = cfg.model()?;
    let mut sim = SimConfig::new(cfg.horizon, cfg.dt, cfg.scheme);
    if let Some(l) = cfg.lambda {
        sim = sim.with_tilt(l);
    }
    let rng = RngStream::new(cfg.seed, 0);
    let width = cfg.n_paths.saturating_sub(1).to_string().len().max(4);
    for i in 0..cfg.n_paths {
        let traj = simulate(&model, &sim, &mut rng.child(i as u64))?;
        let name = format!("trajectory_{i:0width$}.csv");
        let file = BufWriter::new(File::create(run.dir.join(&name))?);
        traj.write_csv(file)?
            .into_inner()
            .map_err(|e| e.into_error())?;
        run.report.artifacts.push(name);
    }
    Ok(())
}

fn epr_samples(run: &mut Run) -> Result<()> {
    let cfg = run.config;
    let model = cfg.model()?;
    let rng = RngStream::new(cfg.seed, 0);
    let samples = crate::stats::map_paths(cfg.n_paths, |i| {
        sample_epr(&model, cfg.t, cfg.dt, &mut rng.child(i))
    });
    let mut out = run.csv("epr.csv", &["path", "t", "value", "quad_part", "ito_part"])?;
    for (i, s) in samples.into_iter().enumerate() {
        let s = s?;
        out.row(&[
            i.to_string(),
            fmt_float(s.t),
            fmt_float(s.value),
            fmt_float(s.quad_part),
            fmt_float(s.ito_part),
        ])?;
    }
    out.finish()?;
    Ok(())
}

fn verify_mgf(run: &mut Run) -> Result<()> {
    let cfg = run.config;
    let model = cfg.model()?;
    let rng = RngStream::new(cfg.seed, 0);
    let mut out = run.csv(
        "mgf.csv",
        &["lambda", "t", "empirical", "spectral", "stderr", "pass"],
    )?;
    for l in cfg.lambda_grid(|| vec![0.05]) {
        let est = estimate_log_mgf(&model, l, cfg.t, cfg.n_paths, cfg.dt, &rng)?;
        let spectral = lambda_finite_t(&model, l, cfg.t, MGF_SPECTRAL_TERMS)?.value;
        let rec = TestRecord::within(
            format!("mgf[lambda={l}]"),
            est.log_mgf_over_t,
            spectral,
            (3.0 * est.stderr).max(1e-12),
        );
        out.row(&[
            fmt_float(l),
            fmt_float(cfg.t),
            fmt_float(est.log_mgf_over_t),
            fmt_float(spectral),
            fmt_float(est.stderr),
            rec.pass.to_string(),
        ])?;
        run.report.tests.push(rec);
    }
    out.finish()?;
    Ok(())
}

fn verify_girsanov(run: &mut Run) -> Result<()> {
    let cfg = run.config;
    let model = cfg.model()?;
    let rng = RngStream::new(cfg.seed, 0);
    let mut out = run.csv(
        "girsanov.csv",
        &["lambda", "lhs", "rhs", "stderr_lhs", "stderr_rhs", "pass"],
    )?;
    for l in cfg.lambda_grid(|| vec![0.05, -0.05]) {
        let (lhs, rhs) = girsanov_balance(&model, l, cfg.t, cfg.n_paths, cfg.dt, &rng)?;
        let tol = (3.0 * (lhs.stderr + rhs.stderr)).max(1e-12);
        let rec = TestRecord::within(
            format!("girsanov[lambda={l}]"),
            lhs.log_mgf_over_t,
            rhs.log_mgf_over_t,
            tol,
        );
        out.row(&[
            fmt_float(l),
            fmt_float(lhs.log_mgf_over_t),
            fmt_float(rhs.log_mgf_over_t),
            fmt_float(lhs.stderr),
            fmt_float(rhs.stderr),
            rec.pass.to_string(),
        ])?;
        run.report.tests.push(rec);
    }
    out.finish()?;
    Ok(())
}

fn verify_gc(run: &mut Run) -> Result<()> {
    let cfg = run.config;
    let model = cfg.model()?;
    let rng = RngStream::new(cfg.seed, 0);
    let hist = ft_histogram_test(&model, cfg.t, cfg.n_paths, cfg.dt, cfg.bins, &rng)?;
    let mut out = run.csv(
        "gc.csv",
        &["x", "log_ratio_over_t", "count_pos", "count_neg"],
    )?;
    for b in &hist.admissible {
        out.row(&[
            fmt_float(b.x),
            fmt_float(b.log_ratio_over_t),
            b.count_pos.to_string(),
            b.count_neg.to_string(),
        ])?;
    }
    out.finish()?;
    run.report.tests.push(TestRecord::within(
        "gc_slope",
        hist.slope_estimate,
        1.0,
        0.15,
    ));
    Ok(())
}

fn verify_ergodic(run: &mut Run) -> Result<()> {
    let cfg = run.config;
    let model = cfg.model()?;
    let rng = RngStream::new(cfg.seed, 0);
    let points = ergodic_mean(&model, &[cfg.t], cfg.n_paths, cfg.dt, &rng)?;
    let mut out = run.csv("ergodic.csv", &["t", "mean", "stderr"])?;
    for p in &points {
        out.row(&[p.t, p.mean, p.stderr].map(fmt_float))?;
        run.report.tests.push(TestRecord::within(
            format!("ergodic[t={}]", p.t),
            p.mean,
            model.ep(),
            3.0 * p.stderr,
        ));
    }
    out.finish()?;
    Ok(())
}

pub fn exit_code(outcome: &Result<ExperimentReport>) -> i32 {
    match outcome {
        Ok(report) if report.all_pass() => EXIT_PASS,
        Ok(_) => EXIT_FAIL,
        Err(Error::Config(_)) => EXIT_CONFIG,
        Err(_) => EXIT_COMPUTE,
    }
}

/// Parses `args`, runs, and returns the process exit status.
pub fn main_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_CONFIG
            } else {
                EXIT_PASS
            };
            let _ = e.print();
            return code;
        }
    };
    let config = match resolve(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads.unwrap_or(0))
        .build()
        .expect("thread pool");
    let outcome = pool.install(|| run(&config));
    match &outcome {
        Ok(report) => {
            for t in &report.tests {
                let verdict = if t.pass { "PASS" } else { "FAIL" };
                println!(
                    "{verdict} {} statistic={} target={} tolerance={}",
                    t.name, t.statistic, t.target, t.tolerance
                );
            }
        }
        Err(e) => eprintln!("error: {e}"),
    }
    exit_code(&outcome)
}

pub fn main() -> i32 {
    main_from(std::env::args_os())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<ExperimentConfig> {
        let cli =
            Cli::try_parse_from(std::iter::once("ou-epr").chain(args.iter().copied())).unwrap();
        resolve(&cli)
    }

    #[test]
    fn flags_after_subcommand() {
        let c = parse(&["spectrum", "--theta", "0.5", "--T", "3", "--n", "7"]).unwrap();
        assert_eq!(c.command, Some(CommandName::Spectrum));
        assert_eq!((c.theta, c.horizon, c.n), (0.5, 3.0, 7));
        let c = parse(&["verify", "gc", "--t", "2", "--lambda", "-0.05"]).unwrap();
        assert_eq!(c.test, Some(VerifyTest::Gc));
        assert_eq!((c.t, c.lambda), (2.0, Some(-0.05)));
    }

    #[test]
    fn negative_theta_and_bad_values() {
        assert_eq!(parse(&["rate", "--theta", "-0.7"]).unwrap().theta, -0.7);
        assert!(matches!(
            parse(&["rate", "--theta", "0"]),
            Err(Error::Config(_))
        ));
        assert!(matches!(parse(&[]), Err(Error::Config(_))));
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "command = \"cramer\"\ntheta = 0.3\nseed = 9\n").unwrap();
        let c = parse(&["--config", path.to_str().unwrap(), "--seed", "4"]).unwrap();
        assert_eq!(c.command, Some(CommandName::Cramer));
        assert_eq!((c.theta, c.seed), (0.3, 4));
        std::fs::write(&path, "thta = 0.3\n").unwrap();
        assert!(matches!(
            parse(&["rate", "--config", path.to_str().unwrap()]),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn exit_codes() {
        let cfg = ExperimentConfig {
            command: Some(CommandName::Rate),
            ..Default::default()
        };
        let mut rep = ExperimentReport::new(&cfg);
        assert_eq!(exit_code(&Ok(rep.clone())), EXIT_PASS);
        rep.tests.push(TestRecord::within("x", 2.0, 0.0, 1.0));
        assert_eq!(exit_code(&Ok(rep)), EXIT_FAIL);
        assert_eq!(exit_code(&Err(Error::Config("x".into()))), EXIT_CONFIG);
        assert_eq!(exit_code(&Err(Error::SchemeMismatch)), EXIT_COMPUTE);
    }
}
