//! Configuration, experiment orchestration and output formats of the `nsab`
//! command-line tool.

pub mod config;
pub mod snapshot;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use nsab_core::adn::{check_covering, check_ellipticity, covering_samples, CoveringReport, DNSystem};
use nsab_core::discretization::{assemble, Operators};
use nsab_core::evolution::{
    run_evolution, smooth_initial_field, uniqueness_probe, vanishing_sweep, EvolutionConfig, Outcome, NORM_DEFINITIONS,
};
use nsab_core::field::{DualField, RandomSpec, SolenoidalField};
use nsab_core::space::ChannelSpace;
use nsab_core::spectral::{default_gamma0_grid, eigenpairs_a, garding_constants};
use nsab_core::stationary::{
    recover_pressure, smooth_random_forcing, solve_stationary, strong_bc_residual, wall_trace_error, Forcing, Manufactured,
};
use serde::Serialize;
use serde_json::json;

pub use config::{parse_config, ConfigError, Experiment, RunConfig};
use config::{ForcingId, InitialId};
use snapshot::Snapshot;

/// Output-directory override; takes precedence over `output.dir` but not
/// over `--out`.
pub const OUT_DIR_ENV: &str = "NSAB_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "nsab-out";

pub const EXIT_SUCCESS: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_WATCHDOG: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("numerical failure: {0}")]
    Numerical(#[from] nsab_core::Error),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => EXIT_CONFIG,
            RunError::Numerical(_) | RunError::Verification(_) => EXIT_NUMERICAL,
            RunError::Io(_) => EXIT_IO,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let kind = match self {
            RunError::Config(_) => "config",
            RunError::Numerical(_) => "numerical",
            RunError::Verification(_) => "verification",
            RunError::Io(_) => "io",
        };
        let mut v = json!({
            "status": "error",
            "kind": kind,
            "exit_code": self.exit_code(),
            "message": self.to_string(),
        });
        if let RunError::Config(c) = self {
            v["config_error"] = serde_json::to_value(c).expect("serializable");
        }
        v
    }
}

/// Command-line overrides.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub serial: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    Watchdog,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Success => EXIT_SUCCESS,
            Status::Watchdog => EXIT_WATCHDOG,
        }
    }
}

/// Output directory with the list of files written so far.
pub struct Artifacts {
    pub dir: PathBuf,
    pub files: Vec<String>,
}

impl Artifacts {
    fn create(dir: PathBuf) -> std::io::Result<Self> {
        fs::create_dir_all(&dir)?;
        Ok(Self { dir, files: Vec::new() })
    }

    fn write(&mut self, name: &str, bytes: impl AsRef<[u8]>) -> std::io::Result<()> {
        fs::write(self.dir.join(name), bytes)?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn json(&mut self, name: &str, v: &impl Serialize) -> std::io::Result<()> {
        let mut s = serde_json::to_string_pretty(v).expect("serializable");
        s.push('\n');
        self.write(name, s)
    }

    fn snapshot(&mut self, name: &str, snap: &Snapshot) -> std::io::Result<()> {
        self.write(name, snap.to_bytes())
    }
}

/// 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_row(vals: &[f64]) -> String {
    let mut s = vals.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(",");
    s.push('\n');
    s
}

pub fn resolve_out_dir(cfg: &RunConfig, ov: &Overrides) -> PathBuf {
    if let Some(o) = &ov.out {
        return o.clone();
    }
    if let Some(env) = std::env::var_os(OUT_DIR_ENV).filter(|v| !v.is_empty()) {
        return PathBuf::from(env);
    }
    PathBuf::from(cfg.output_dir.clone().unwrap_or_else(|| DEFAULT_OUT_DIR.into()))
}

/// Parses the config at `path` and applies the overrides.
pub fn load_config(path: &Path, experiment: Experiment, ov: &Overrides) -> Result<RunConfig, RunError> {
    let text = fs::read_to_string(path).map_err(|e| ConfigError {
        kind: config::ConfigErrorKind::Syntax,
        line: None,
        column: None,
        key: None,
        message: format!("cannot read {}: {e}", path.display()),
    })?;
    let mut cfg = parse_config(&text)?;
    if let Some(k) = cfg.kind {
        if k != experiment {
            return Err(ConfigError {
                kind: config::ConfigErrorKind::Domain,
                line: None,
                column: None,
                key: Some("experiment.kind".into()),
                message: format!("config is for '{}' but the subcommand is '{}'", k.name(), experiment.name()),
            }
            .into());
        }
    }
    cfg.kind = Some(experiment);
    if let Some(s) = ov.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

struct Setup {
    space: ChannelSpace,
    ops: Operators,
}

fn setup(cfg: &RunConfig) -> Result<Setup, RunError> {
    let space = ChannelSpace::new(cfg.geometry, cfg.resolution)?;
    let ops = assemble(&space, &cfg.params)?;
    Ok(Setup { space, ops })
}

fn forcing(cfg: &RunConfig, space: &ChannelSpace) -> Forcing {
    match cfg.forcing.id {
        ForcingId::None => Forcing::zero(space),
        ForcingId::Smooth => {
            let mut f = smooth_random_forcing(space, cfg.seed ^ 0x0f0f_0f0f, cfg.forcing.max_mode, cfg.forcing.degree);
            for m in f.nodal.iter_mut() {
                for c in m.iter_mut() {
                    c.iter_mut().for_each(|v| *v *= cfg.forcing.amplitude);
                }
            }
            f
        }
    }
}

fn dual_forcing(cfg: &RunConfig, space: &ChannelSpace) -> Option<DualField> {
    match cfg.forcing.id {
        ForcingId::None => None,
        ForcingId::Smooth => Some(forcing(cfg, space).dual(space)),
    }
}

fn initial(cfg: &RunConfig, s: &Setup) -> Result<SolenoidalField, RunError> {
    Ok(match cfg.initial.id {
        InitialId::Zero => SolenoidalField::zeros(&s.space),
        InitialId::Smooth => smooth_initial_field(&s.space, &s.ops, cfg.seed, cfg.initial.amplitude)?,
        InitialId::Random => {
            SolenoidalField::random(&s.space, cfg.seed, RandomSpec { amplitude: cfg.initial.amplitude, ..RandomSpec::default() })
        }
    })
}

fn evolution_config(cfg: &RunConfig, space: &ChannelSpace) -> EvolutionConfig {
    let t = &cfg.time;
    EvolutionConfig {
        dt: t.dt,
        t_final: t.t_final,
        scheme: t.scheme,
        report_every: t.report_every,
        snapshot_every: (t.snapshot_every > 0).then_some(t.snapshot_every),
        nonlinear: t.nonlinear,
        forcing: dual_forcing(cfg, space),
        watchdog_factor: t.watchdog_factor,
        gamma0: t.gamma0,
        inject_nan_at: (t.inject_nan_at > 0).then_some(t.inject_nan_at),
    }
}

pub const ENERGY_HEADER: &str = "t,E_Lambda,a_uu,grad_sq,H1,H3,H5,dE_balance\n";

fn verify_adn(cfg: &RunConfig, out: &mut Artifacts) -> Result<Status, RunError> {
    let ell = check_ellipticity(&DNSystem::ns_alpha_beta(cfg.params.gamma)?);
    let etas = covering_samples(cfg.adn.samples, cfg.adn.random, cfg.adn.min_magnitude, cfg.adn.max_magnitude, cfg.seed);
    let covering: Vec<CoveringReport> = etas.iter().map(|&eta| check_covering(eta, cfg.params.gamma)).collect::<Result<_, _>>()?;
    let failures = covering.iter().filter(|c| !c.pass).count();
    let pass = ell.pass && failures == 0;
    out.json(
        "adn_report.json",
        &json!({
            "gamma": cfg.params.gamma,
            "ellipticity": if ell.pass { "pass" } else { "fail" },
            "ellipticity_detail": ell,
            "covering": covering,
            "covering_failures": failures,
            "pass": pass,
        }),
    )?;
    if !pass {
        return Err(RunError::Verification(format!(
            "ellipticity {}, {failures} covering failures",
            if ell.pass { "pass" } else { "fail" }
        )));
    }
    Ok(Status::Success)
}

fn solve(cfg: &RunConfig, out: &mut Artifacts) -> Result<Status, RunError> {
    let s = setup(cfg)?;
    let f = forcing(cfg, &s.space);
    let sol = solve_stationary(&f.dual(&s.space), &s.ops)?;
    let bc = strong_bc_residual(&sol.u, &s.space, &cfg.params)?;
    let pressure = recover_pressure(&sol.u, &f, &s.space, f64::INFINITY)?;
    out.snapshot("solution.snap", &Snapshot::new(sol.u.clone(), 0.0, &s.space, &cfg.params))?;
    out.json(
        "solve_report.json",
        &json!({
            "kernel_dim": sol.kernel_dim,
            "relative_residual": sol.relative_residual,
            "boundary_residual": bc,
            "pressure_defect": pressure.defect,
            "coefficient_norm": sol.u.coeff_norm(),
        }),
    )?;
    Ok(Status::Success)
}

fn eigs(cfg: &RunConfig, out: &mut Artifacts) -> Result<Status, RunError> {
    let s = setup(cfg)?;
    let pairs = eigenpairs_a(&s.ops, cfg.eigs_count)?;
    let mut csv = String::from("n,lambda,eta1,eta2,residual\n");
    for (n, p) in pairs.iter().enumerate() {
        let _ = write!(csv, "{},", n + 1);
        csv.push_str(&csv_row(&[p.lambda, p.eta[0], p.eta[1], p.residual]));
    }
    out.write("eigs.csv", csv)?;
    let garding = garding_constants(&s.ops, &default_gamma0_grid())?;
    out.json("garding.json", &garding)?;
    Ok(Status::Success)
}

fn outcome_status(o: &Outcome) -> Status {
    match o {
        Outcome::Completed => Status::Success,
        Outcome::Watchdog { .. } => Status::Watchdog,
    }
}

fn evolve(cfg: &RunConfig, out: &mut Artifacts) -> Result<Status, RunError> {
    let s = setup(cfg)?;
    let u0 = initial(cfg, &s)?;
    let ecfg = evolution_config(cfg, &s.space);
    let run = run_evolution(&s.space, &s.ops, &u0, &ecfg)?;
    let mut csv = String::from(ENERGY_HEADER);
    for r in &run.reports {
        csv.push_str(&csv_row(&[r.t, r.e_lambda, r.a_uu, r.grad_sq, r.h1, r.h3, r.h5, r.de_balance]));
    }
    out.write("energy.csv", csv)?;
    for (i, (t, field)) in run.snapshots.iter().enumerate() {
        out.snapshot(&format!("snapshot_{i:05}.snap"), &Snapshot::new(field.clone(), *t, &s.space, &cfg.params))?;
    }
    eprintln!("advisory CFL number: {:.3e}", run.max_cfl);
    let norms: Vec<(&str, &str)> = NORM_DEFINITIONS.to_vec();
    out.json(
        "outcome.json",
        &json!({
            "outcome": run.outcome,
            "steps": run.steps,
            "gamma0": run.gamma0,
            "max_cfl": run.max_cfl,
            "norm_definitions": norms,
        }),
    )?;
    Ok(outcome_status(&run.outcome))
}

fn sweep(cfg: &RunConfig, out: &mut Artifacts) -> Result<Status, RunError> {
    let s = setup(cfg)?;
    let u0 = initial(cfg, &s)?;
    let pairs: Vec<(f64, f64)> = (0..=cfg.sweep.halvings)
        .map(|n| {
            let s = 0.5f64.powi(n as i32);
            (cfg.sweep.alpha0 * s, cfg.sweep.beta0 * s)
        })
        .collect();
    let rows = vanishing_sweep(&s.space, &s.ops, &pairs, &u0, &evolution_config(cfg, &s.space))?;
    let mut csv = String::from("alpha,beta,ell,sup_l2,int_h1_sq,alpha_grad_sup,beta_h2_int,l2_nonincreasing,e_lambda_nonincreasing,status\n");
    for r in &rows {
        let row = csv_row(&[r.alpha, r.beta, r.ell, r.sup_l2, r.int_h1_sq, r.alpha_grad_sup, r.beta_h2_int]);
        let status = match r.outcome {
            Outcome::Completed => "completed",
            Outcome::Watchdog { .. } => "watchdog",
        };
        let _ = writeln!(csv, "{},{},{},{status}", row.trim_end(), r.l2_nonincreasing, r.e_lambda_nonincreasing);
    }
    out.write("sweep.csv", csv)?;
    out.json("sweep.json", &rows)?;
    Ok(if rows.iter().any(|r| r.outcome != Outcome::Completed) { Status::Watchdog } else { Status::Success })
}

fn probe(cfg: &RunConfig, out: &mut Artifacts) -> Result<Status, RunError> {
    let s = setup(cfg)?;
    let u0 = initial(cfg, &s)?;
    let direction = smooth_initial_field(&s.space, &s.ops, cfg.seed.wrapping_add(1), 1.0)?;
    let rep = uniqueness_probe(&s.space, &s.ops, &u0, &direction, cfg.probe_delta, &evolution_config(cfg, &s.space))?;
    let mut csv = String::from("t,growth,int_H3\n");
    for (t, g, i) in &rep.series {
        csv.push_str(&csv_row(&[*t, *g, *i]));
    }
    out.write("uniqueness.csv", csv)?;
    out.json("uniqueness.json", &json!({ "delta": rep.delta, "growth": rep.growth, "max_rate": rep.max_rate }))?;
    Ok(Status::Success)
}

fn convergence(cfg: &RunConfig, out: &mut Artifacts) -> Result<Status, RunError> {
    let mut csv = String::from("p,h2_error,h2_relative,pressure_error,wall_error,wall_relative\n");
    let r = cfg.resolution;
    for &p in &cfg.convergence_degrees {
        let res = nsab_core::Resolution::with_all(r.n1, r.n2, p, nsab_core::Resolution::min_quadrature(p), r.mx, r.my)?;
        let space = ChannelSpace::new(cfg.geometry, res)?;
        let ops = assemble(&space, &cfg.params)?;
        let man = Manufactured::sample(&space);
        let f = man.forcing(&space, &cfg.params);
        let sol = solve_stationary(&f.dual(&space), &ops)?;
        let nq = 2 * p + 20;
        let (h2, h2_rel) = man.h2_error(&sol.u, &space, nq);
        let pressure = recover_pressure(&sol.u, &f, &space, f64::INFINITY)?;
        let perr = man.pressure_error(&pressure, &space, nq);
        let (w, w_rel) = wall_trace_error(&sol.u, &man.wall_trace(&space, &cfg.params), &space, &cfg.params);
        let _ = write!(csv, "{p},");
        csv.push_str(&csv_row(&[h2, h2_rel, perr, w, w_rel]));
    }
    out.write("convergence.csv", csv)?;
    Ok(Status::Success)
}

/// Runs one experiment, writing outputs, a manifest and the resolved config
/// under the output directory. Errors are also written as `error.json` when
/// the directory is usable.
pub fn run(cfg: &RunConfig, ov: &Overrides) -> Result<Status, RunError> {
    let experiment = cfg.kind.ok_or_else(|| ConfigError {
        kind: config::ConfigErrorKind::Domain,
        line: None,
        column: None,
        key: Some("experiment.kind".into()),
        message: "no experiment selected".into(),
    })?;
    let mut out = Artifacts::create(resolve_out_dir(cfg, ov))?;
    let started = Instant::now();
    let echo = cfg.echo();
    out.write("config.echo", &echo)?;
    let result = match experiment {
        Experiment::VerifyAdn => verify_adn(cfg, &mut out),
        Experiment::Solve => solve(cfg, &mut out),
        Experiment::Eigs => eigs(cfg, &mut out),
        Experiment::Evolve => evolve(cfg, &mut out),
        Experiment::Sweep => sweep(cfg, &mut out),
        Experiment::ProbeUniqueness => probe(cfg, &mut out),
        Experiment::Convergence => convergence(cfg, &mut out),
    };
    let elapsed = started.elapsed().as_secs_f64();
    let (status, exit_code) = match &result {
        Ok(Status::Success) => ("success", EXIT_SUCCESS),
        Ok(Status::Watchdog) => ("watchdog", EXIT_WATCHDOG),
        Err(e) => ("error", e.exit_code()),
    };
    if let Err(e) = &result {
        out.json("error.json", &e.to_json())?;
    }
    let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    let manifest = json!({
        "tool": "nsab",
        "version": env!("CARGO_PKG_VERSION"),
        "experiment": experiment.name(),
        "status": status,
        "exit_code": exit_code,
        "seed": cfg.seed,
        "rng": "ChaCha8 seeded from a 64-bit integer",
        "serial": ov.serial,
        "timestamp_unix": timestamp,
        "timings_s": { "total": elapsed },
        "config": cfg,
        "config_echo": echo,
        "outputs": out.files,
    });
    out.json("manifest.json", &manifest)?;
    result
}

/// Writes a structured error for failures that happen before a run starts.
pub fn report_early_error(err: &RunError, out: Option<&Path>) {
    if let Some(dir) = out {
        if fs::create_dir_all(dir).is_ok() {
            let mut s = serde_json::to_string_pretty(&err.to_json()).expect("serializable");
            s.push('\n');
            let _ = fs::write(dir.join("error.json"), s);
        }
    }
}
