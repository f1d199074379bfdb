//! Flat `section.key = value` run configuration.
//!
//! ```text
//! # comment
//! model.alpha = 0.2
//! model.beta = 0.1
//! resolution.p = 24
//! time.scheme = cn-ab2
//! ```
//!
//! Every key is optional; [`RunConfig::echo`] writes the fully resolved
//! configuration back in the same format.

use std::collections::BTreeMap;
use std::fmt;

use nsab_core::evolution::Scheme;
use nsab_core::{derive_params, ChannelGeometry, ModelParams, Resolution};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigError {
    pub kind: ConfigErrorKind,
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub key: Option<String>,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConfigErrorKind {
    Syntax,
    UnknownKey,
    DuplicateKey,
    Type,
    Domain,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, self.column) {
            (Some(l), Some(c)) => write!(f, "line {l}, column {c}: ")?,
            (Some(l), None) => write!(f, "line {l}: ")?,
            _ => {}
        }
        if let Some(k) = &self.key {
            write!(f, "{k}: ")?;
        }
        f.write_str(&self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    VerifyAdn,
    Solve,
    Eigs,
    Evolve,
    Sweep,
    ProbeUniqueness,
    Convergence,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::VerifyAdn,
        Experiment::Solve,
        Experiment::Eigs,
        Experiment::Evolve,
        Experiment::Sweep,
        Experiment::ProbeUniqueness,
        Experiment::Convergence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::VerifyAdn => "verify-adn",
            Experiment::Solve => "solve",
            Experiment::Eigs => "eigs",
            Experiment::Evolve => "evolve",
            Experiment::Sweep => "sweep",
            Experiment::ProbeUniqueness => "probe-uniqueness",
            Experiment::Convergence => "convergence",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.name() == s)
    }
}

/// Built-in forcings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ForcingId {
    None,
    /// Low-degree Legendre profiles on the lowest wavenumbers.
    Smooth,
}

/// Built-in initial fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialId {
    Zero,
    /// `(A + 1)⁻²` applied to a smooth forcing, scaled to H¹ norm `amplitude`.
    Smooth,
    /// Random coefficients with decaying spectrum of size `amplitude`.
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForcingSpec {
    pub id: ForcingId,
    pub amplitude: f64,
    pub max_mode: i64,
    pub degree: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InitialSpec {
    pub id: InitialId,
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeSpec {
    pub dt: f64,
    pub t_final: f64,
    pub scheme: Scheme,
    pub report_every: usize,
    /// 0 disables snapshots.
    pub snapshot_every: usize,
    pub nonlinear: bool,
    pub watchdog_factor: f64,
    /// Computed from the spectrum when absent.
    pub gamma0: Option<f64>,
    /// Debug: poison the state after this many steps (0 = never).
    pub inject_nan_at: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdnSpec {
    pub samples: usize,
    pub random: usize,
    pub min_magnitude: f64,
    pub max_magnitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSpec {
    pub alpha0: f64,
    pub beta0: f64,
    pub halvings: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub kind: Option<Experiment>,
    pub params: ModelParams,
    pub geometry: ChannelGeometry,
    pub resolution: Resolution,
    /// Resolution padding factor (physical grid = factor × mode count).
    pub padding: usize,
    pub seed: u64,
    pub forcing: ForcingSpec,
    pub initial: InitialSpec,
    pub time: TimeSpec,
    pub eigs_count: usize,
    pub adn: AdnSpec,
    pub sweep: SweepSpec,
    pub probe_delta: f64,
    pub convergence_degrees: Vec<usize>,
    pub output_dir: Option<String>,
}

pub const DEFAULT_N: usize = 16;
pub const DEFAULT_P: usize = 32;

impl Default for RunConfig {
    fn default() -> Self {
        parse_config("").expect("defaults are valid")
    }
}

struct Entry {
    value: String,
    line: usize,
    value_col: usize,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> ConfigError {
    ConfigError { kind: ConfigErrorKind::Syntax, line: Some(line), column: Some(column), key: None, message: message.into() }
}

fn is_ident(s: &str) -> bool {
    let mut c = s.chars();
    matches!(c.next(), Some(ch) if ch.is_ascii_lowercase()) && c.all(|ch| ch.is_ascii_lowercase() || ch.is_ascii_digit() || ch == '_')
}

fn tokenize(text: &str) -> Result<BTreeMap<String, Entry>, ConfigError> {
    let mut out: BTreeMap<String, Entry> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let Some(eq) = content.find('=') else {
            return Err(syntax(line, content.trim_end().len() + 1, "expected '=' after key"));
        };
        let key_part = &content[..eq];
        let key = key_part.trim();
        let key_col = key_part.len() - key_part.trim_start().len() + 1;
        if key.is_empty() {
            return Err(syntax(line, eq + 1, "missing key before '='"));
        }
        let mut parts = key.split('.');
        let (sec, name, extra) = (parts.next(), parts.next(), parts.next());
        match (sec, name, extra) {
            (Some(s), Some(n), None) if is_ident(s) && is_ident(n) => {}
            _ => {
                let bad = key.find(|c: char| !(c.is_ascii_alphanumeric() || c == '_' || c == '.')).unwrap_or(0);
                return Err(syntax(line, key_col + bad, format!("key '{key}' must have the form section.key")));
            }
        }
        let value_part = &content[eq + 1..];
        let value = value_part.trim();
        let value_col = eq + 2 + (value_part.len() - value_part.trim_start().len());
        if value.is_empty() {
            return Err(syntax(line, eq + 2, format!("missing value for '{key}'")));
        }
        if let Some(prev) = out.get(key) {
            return Err(ConfigError {
                kind: ConfigErrorKind::DuplicateKey,
                line: Some(line),
                column: Some(key_col),
                key: Some(key.to_string()),
                message: format!("duplicate key, first set on line {} and again on line {line}", prev.line),
            });
        }
        out.insert(key.to_string(), Entry { value: value.to_string(), line, value_col });
    }
    Ok(out)
}

/// Consumes typed values from the token map.
struct Reader {
    entries: BTreeMap<String, Entry>,
}

impl Reader {
    fn type_error(&self, key: &str, e: &Entry, what: &str) -> ConfigError {
        ConfigError {
            kind: ConfigErrorKind::Type,
            line: Some(e.line),
            column: Some(e.value_col),
            key: Some(key.to_string()),
            message: format!("expected {what}, got '{}'", e.value),
        }
    }

    fn raw(&mut self, key: &str) -> Option<Entry> {
        self.entries.remove(key)
    }

    fn parse<T>(&mut self, key: &str, default: T, what: &str, f: impl Fn(&str) -> Option<T>) -> Result<T, ConfigError> {
        match self.raw(key) {
            None => Ok(default),
            Some(e) => f(&e.value).ok_or_else(|| self.type_error(key, &e, what)),
        }
    }

    fn f64(&mut self, key: &str, default: f64) -> Result<f64, ConfigError> {
        self.parse(key, default, "a finite number", |s| s.parse::<f64>().ok().filter(|v| v.is_finite()))
    }

    fn opt_f64(&mut self, key: &str) -> Result<Option<f64>, ConfigError> {
        self.parse(key, None, "a finite number or 'auto'", |s| {
            if s == "auto" {
                Some(None)
            } else {
                s.parse::<f64>().ok().filter(|v| v.is_finite()).map(Some)
            }
        })
    }

    fn usize(&mut self, key: &str, default: usize) -> Result<usize, ConfigError> {
        self.parse(key, default, "a nonnegative integer", |s| s.parse().ok())
    }

    fn u64(&mut self, key: &str, default: u64) -> Result<u64, ConfigError> {
        self.parse(key, default, "a nonnegative integer", |s| s.parse().ok())
    }

    fn bool(&mut self, key: &str, default: bool) -> Result<bool, ConfigError> {
        self.parse(key, default, "true or false", |s| s.parse().ok())
    }

    fn word<T: Copy>(&mut self, key: &str, default: T, choices: &[(&str, T)]) -> Result<T, ConfigError> {
        let names: Vec<&str> = choices.iter().map(|c| c.0).collect();
        let what = format!("one of {}", names.join(", "));
        self.parse(key, default, &what, |s| choices.iter().find(|c| c.0 == s).map(|c| c.1))
    }

    fn list(&mut self, key: &str, default: Vec<usize>) -> Result<Vec<usize>, ConfigError> {
        self.parse(key, default, "a comma-separated list of integers", |s| {
            s.split(',').map(|x| x.trim().parse().ok()).collect::<Option<Vec<usize>>>().filter(|v| !v.is_empty())
        })
    }

    fn string(&mut self, key: &str) -> Option<String> {
        self.raw(key).map(|e| e.value)
    }

    fn finish(self) -> Result<(), ConfigError> {
        if let Some((key, e)) = self.entries.iter().min_by_key(|(_, e)| e.line) {
            return Err(ConfigError {
                kind: ConfigErrorKind::UnknownKey,
                line: Some(e.line),
                column: None,
                key: Some(key.clone()),
                message: "unknown key".into(),
            });
        }
        Ok(())
    }
}

fn domain(lines: &[(&str, Option<usize>)], message: impl Into<String>) -> ConfigError {
    let (key, line) = lines.iter().find(|(_, l)| l.is_some()).copied().unwrap_or((lines[0].0, None));
    ConfigError { kind: ConfigErrorKind::Domain, line, column: None, key: Some(key.to_string()), message: message.into() }
}

/// Parses and validates a configuration.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let entries = tokenize(text)?;
    let line_of = |k: &str| entries.get(k).map(|e| e.line);
    let model_lines = [
        ("model.alpha", line_of("model.alpha")),
        ("model.beta", line_of("model.beta")),
        ("model.gamma", line_of("model.gamma")),
        ("model.ell", line_of("model.ell")),
    ];
    let geo_lines = [("geometry.l1", line_of("geometry.l1")), ("geometry.l2", line_of("geometry.l2")), ("geometry.h", line_of("geometry.h"))];
    let res_lines = [
        ("resolution.n1", line_of("resolution.n1")),
        ("resolution.n2", line_of("resolution.n2")),
        ("resolution.p", line_of("resolution.p")),
        ("resolution.q", line_of("resolution.q")),
        ("resolution.padding", line_of("resolution.padding")),
    ];
    let time_lines = [("time.dt", line_of("time.dt")), ("time.t_final", line_of("time.t_final"))];
    let sweep_lines = [("sweep.alpha0", line_of("sweep.alpha0")), ("sweep.beta0", line_of("sweep.beta0"))];
    let adn_lines = [("adn.min_magnitude", line_of("adn.min_magnitude")), ("adn.max_magnitude", line_of("adn.max_magnitude"))];
    let mut r = Reader { entries };

    let kind = match r.raw("experiment.kind") {
        None => None,
        Some(e) => Some(Experiment::parse(&e.value).ok_or_else(|| {
            let names: Vec<&str> = Experiment::ALL.iter().map(|x| x.name()).collect();
            r.type_error("experiment.kind", &e, &format!("one of {}", names.join(", ")))
        })?),
    };

    let alpha = r.f64("model.alpha", 0.2)?;
    let beta = r.f64("model.beta", 0.1)?;
    let gamma = r.f64("model.gamma", 0.5)?;
    let ell = r.f64("model.ell", 0.01)?;
    let params = derive_params(alpha, beta, gamma, ell).map_err(|e| domain(&model_lines, strip_prefix(&e.to_string())))?;

    let tau = 2.0 * std::f64::consts::PI;
    let l1 = r.f64("geometry.l1", tau)?;
    let l2 = r.f64("geometry.l2", tau)?;
    let h = r.f64("geometry.h", 1.0)?;
    let geometry = ChannelGeometry::new(l1, l2, h).map_err(|e| domain(&geo_lines, strip_prefix(&e.to_string())))?;

    let n1 = r.usize("resolution.n1", DEFAULT_N)?;
    let n2 = r.usize("resolution.n2", DEFAULT_N)?;
    let p = r.usize("resolution.p", DEFAULT_P)?;
    let q = r.usize("resolution.q", Resolution::min_quadrature(p))?;
    let padding = r.usize("resolution.padding", 2)?;
    if padding == 0 {
        return Err(domain(&res_lines[4..], "padding factor must be at least 1"));
    }
    let resolution =
        Resolution::with_all(n1, n2, p, q, padding * n1, padding * n2).map_err(|e| domain(&res_lines, strip_prefix(&e.to_string())))?;

    let seed = r.u64("run.seed", 0)?;

    let forcing = ForcingSpec {
        id: r.word("forcing.id", ForcingId::None, &[("none", ForcingId::None), ("smooth", ForcingId::Smooth)])?,
        amplitude: r.f64("forcing.amplitude", 1.0)?,
        max_mode: r.usize("forcing.max_mode", 2)? as i64,
        degree: r.usize("forcing.degree", 3)?,
    };
    let initial = InitialSpec {
        id: r.word(
            "initial.id",
            InitialId::Smooth,
            &[("zero", InitialId::Zero), ("smooth", InitialId::Smooth), ("random", InitialId::Random)],
        )?,
        amplitude: r.f64("initial.amplitude", 1.0)?,
    };

    let time = TimeSpec {
        dt: r.f64("time.dt", 1e-2)?,
        t_final: r.f64("time.t_final", 1.0)?,
        scheme: r.word("time.scheme", Scheme::CnAb2, &[("imex-euler", Scheme::ImexEuler), ("cn-ab2", Scheme::CnAb2)])?,
        report_every: r.usize("time.report_every", 1)?,
        snapshot_every: r.usize("time.snapshot_every", 0)?,
        nonlinear: r.bool("time.nonlinear", true)?,
        watchdog_factor: r.f64("time.watchdog_factor", 1e6)?,
        gamma0: r.opt_f64("time.gamma0")?,
        inject_nan_at: r.usize("time.inject_nan_at", 0)?,
    };
    if time.dt <= 0.0 {
        return Err(domain(&time_lines, "dt must be positive"));
    }
    if time.t_final < 0.0 {
        return Err(domain(&time_lines[1..], "t_final must be nonnegative"));
    }
    if time.watchdog_factor <= 1.0 {
        return Err(domain(&[("time.watchdog_factor", None)], "watchdog_factor must exceed 1"));
    }

    let eigs_count = r.usize("eigs.count", 20)?;
    let adn = AdnSpec {
        samples: r.usize("adn.samples", 100)?,
        random: r.usize("adn.random", 20)?,
        min_magnitude: r.f64("adn.min_magnitude", 1e-3)?,
        max_magnitude: r.f64("adn.max_magnitude", 1e3)?,
    };
    if !(adn.min_magnitude > 0.0 && adn.min_magnitude <= adn.max_magnitude) {
        return Err(domain(&adn_lines, "magnitudes must satisfy 0 < min_magnitude <= max_magnitude"));
    }
    let sweep = SweepSpec {
        alpha0: r.f64("sweep.alpha0", params.alpha)?,
        beta0: r.f64("sweep.beta0", params.beta)?,
        halvings: r.usize("sweep.halvings", 5)?,
    };
    if !(sweep.beta0 > 0.0 && sweep.alpha0 > sweep.beta0) {
        return Err(domain(&sweep_lines, "alpha0 must exceed beta0 > 0"));
    }
    let probe_delta = r.f64("probe.delta", 1e-6)?;
    let convergence_degrees = r.list("convergence.degrees", vec![8, 16, 24])?;
    if let Some(&bad) = convergence_degrees.iter().find(|&&d| d < 4) {
        return Err(domain(&[("convergence.degrees", None)], format!("degree {bad} below the minimum 4")));
    }
    let output_dir = r.string("output.dir");
    r.finish()?;

    Ok(RunConfig {
        kind,
        params,
        geometry,
        resolution,
        padding,
        seed,
        forcing,
        initial,
        time,
        eigs_count,
        adn,
        sweep,
        probe_delta,
        convergence_degrees,
        output_dir,
    })
}

fn strip_prefix(msg: &str) -> String {
    msg.split_once(": ").map_or(msg, |(_, rest)| rest).to_string()
}

fn word_of<T: Serialize>(v: &T) -> String {
    serde_json::to_value(v).ok().and_then(|j| j.as_str().map(str::to_string)).unwrap_or_default()
}

impl RunConfig {
    /// Fully resolved configuration in the input format; parsing the echo
    /// gives back an equal config.
    pub fn echo(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(&v);
            s.push('\n');
        };
        if let Some(k) = self.kind {
            put("experiment.kind", k.name().into());
        }
        put("model.alpha", self.params.alpha.to_string());
        put("model.beta", self.params.beta.to_string());
        put("model.gamma", self.params.gamma.to_string());
        put("model.ell", self.params.ell.to_string());
        put("geometry.l1", self.geometry.l1.to_string());
        put("geometry.l2", self.geometry.l2.to_string());
        put("geometry.h", self.geometry.h.to_string());
        put("resolution.n1", self.resolution.n1.to_string());
        put("resolution.n2", self.resolution.n2.to_string());
        put("resolution.p", self.resolution.p.to_string());
        put("resolution.q", self.resolution.q.to_string());
        put("resolution.padding", self.padding.to_string());
        put("run.seed", self.seed.to_string());
        put("forcing.id", word_of(&self.forcing.id));
        put("forcing.amplitude", self.forcing.amplitude.to_string());
        put("forcing.max_mode", self.forcing.max_mode.to_string());
        put("forcing.degree", self.forcing.degree.to_string());
        put("initial.id", word_of(&self.initial.id));
        put("initial.amplitude", self.initial.amplitude.to_string());
        put("time.dt", self.time.dt.to_string());
        put("time.t_final", self.time.t_final.to_string());
        put("time.scheme", word_of(&self.time.scheme));
        put("time.report_every", self.time.report_every.to_string());
        put("time.snapshot_every", self.time.snapshot_every.to_string());
        put("time.nonlinear", self.time.nonlinear.to_string());
        put("time.watchdog_factor", self.time.watchdog_factor.to_string());
        put("time.gamma0", self.time.gamma0.map_or("auto".into(), |g| g.to_string()));
        put("time.inject_nan_at", self.time.inject_nan_at.to_string());
        put("eigs.count", self.eigs_count.to_string());
        put("adn.samples", self.adn.samples.to_string());
        put("adn.random", self.adn.random.to_string());
        put("adn.min_magnitude", self.adn.min_magnitude.to_string());
        put("adn.max_magnitude", self.adn.max_magnitude.to_string());
        put("sweep.alpha0", self.sweep.alpha0.to_string());
        put("sweep.beta0", self.sweep.beta0.to_string());
        put("sweep.halvings", self.sweep.halvings.to_string());
        put("probe.delta", self.probe_delta.to_string());
        put(
            "convergence.degrees",
            self.convergence_degrees.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(","),
        );
        if let Some(d) = &self.output_dir {
            put("output.dir", d.clone());
        }
        s
    }
}
