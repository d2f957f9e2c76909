//! Run and sweep configuration files.
//!
//! The format is line oriented: `[section]` headers, `key = value` pairs,
//! `#` comments and blank lines. Lists are comma separated. Every problem
//! in a file is collected before giving up, so a single pass reports all
//! of them.
//!
//! ```text
//! [model]
//! dcoef = 0.1
//! motility = exponential
//! gamma0 = 10
//! gamma1 = 0.1
//! lambda = 1
//! response = hill
//!
//! [grid]
//! length = 20
//! cells = 512
//!
//! [scheme]
//! t_end = 200
//!
//! [init]
//! kind = constant_perturbed
//! base = 4, 4, 0
//! seed = 42
//! ```

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::PathBuf;
use std::str::FromStr;

use crate::diagnostics::Thresholds;
use crate::init::InitSpec;
use crate::model::{EnvelopeConstants, ModelParams, MotilitySpec, MotilityTable, ResponseSpec};
use crate::stability::DEFAULT_N_MAX;
use crate::stepper::{DtPolicy, Scheme, SchemeConfig, DEFAULT_IMEX_DT, DEFAULT_SAFETY};

pub const DEFAULT_CELLS: usize = 512;
pub const DEFAULT_AMPLITUDE: f64 = 0.01;
pub const DEFAULT_CADENCE: f64 = 1.0;
pub const DEFAULT_SNAPSHOT_EVERY: f64 = 10.0;
pub const DEFAULT_MAX_CELLS: usize = 256;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConfigError {
    Parse { line: usize, message: String },
    Validation { field: String, message: String },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Parse { line: 0, message } => write!(f, "parse error: {message}"),
            ConfigError::Parse { line, message } => write!(f, "parse error at line {line}: {message}"),
            ConfigError::Validation { field, message } => write!(f, "invalid {field}: {message}"),
        }
    }
}

/// All problems found in one file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigErrors(pub Vec<ConfigError>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsConfig {
    pub thresholds: Thresholds,
    pub envelope: EnvelopeConstants,
    pub n_max: usize,
    /// Upper ends of the sampling ranges for the hypothesis check; derived
    /// from the initial data when absent.
    pub hypothesis_v_max: Option<f64>,
    pub hypothesis_w_max: Option<f64>,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        DiagnosticsConfig {
            thresholds: Thresholds::default(),
            envelope: EnvelopeConstants::default(),
            n_max: DEFAULT_N_MAX,
            hypothesis_v_max: None,
            hypothesis_w_max: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: ModelParams,
    pub length: f64,
    pub cells: usize,
    pub scheme: SchemeConfig,
    pub init: InitSpec,
    /// Time between time-series rows.
    pub cadence: f64,
    /// Time between field snapshots; `0` keeps only the first and last.
    pub snapshot_every: f64,
    pub out_dir: PathBuf,
    pub diagnostics: DiagnosticsConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SweepAxis {
    Dcoef,
    Alpha,
    Theta,
    Gamma0,
    Gamma1,
    Lambda,
    Length,
    Cells,
}

impl SweepAxis {
    pub const ALL: [SweepAxis; 8] = [
        SweepAxis::Dcoef,
        SweepAxis::Alpha,
        SweepAxis::Theta,
        SweepAxis::Gamma0,
        SweepAxis::Gamma1,
        SweepAxis::Lambda,
        SweepAxis::Length,
        SweepAxis::Cells,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::Dcoef => "dcoef",
            SweepAxis::Alpha => "alpha",
            SweepAxis::Theta => "theta",
            SweepAxis::Gamma0 => "gamma0",
            SweepAxis::Gamma1 => "gamma1",
            SweepAxis::Lambda => "lambda",
            SweepAxis::Length => "l",
            SweepAxis::Cells => "n",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        SweepAxis::ALL.into_iter().find(|a| a.name() == s)
    }

    /// Sets this parameter on a copy of `base`.
    pub fn apply(&self, base: &RunConfig, value: f64) -> Result<RunConfig, String> {
        let mut c = base.clone();
        let exp = |c: &mut RunConfig, f: &dyn Fn(&mut (f64, f64, f64))| -> Result<(), String> {
            let MotilitySpec::Exponential { gamma0, gamma1, lambda } = c.params.motility else {
                return Err(format!("axis needs exponential motility, base has {}", c.params.motility.family()));
            };
            let mut t = (gamma0, gamma1, lambda);
            f(&mut t);
            c.params.motility = MotilitySpec::exponential(t.0, t.1, t.2).map_err(|e| e.to_string())?;
            Ok(())
        };
        match self {
            SweepAxis::Dcoef => c.params.dcoef = value,
            SweepAxis::Alpha => c.params.alpha = value,
            SweepAxis::Theta => c.params.theta = value,
            SweepAxis::Gamma0 => exp(&mut c, &|t| t.0 = value)?,
            SweepAxis::Gamma1 => exp(&mut c, &|t| t.1 = value)?,
            SweepAxis::Lambda => exp(&mut c, &|t| t.2 = value)?,
            SweepAxis::Length => c.length = value,
            SweepAxis::Cells => {
                if !(value >= 4.0 && value.fract() == 0.0 && value <= 1e8) {
                    return Err(format!("n must be an integer >= 4, got {value}"));
                }
                c.cells = value as usize;
            }
        }
        c.params.validate().map_err(|e| e.to_string())?;
        if !(c.length.is_finite() && c.length > 0.0) {
            return Err(format!("l must be > 0, got {}", c.length));
        }
        Ok(c)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub base: RunConfig,
    /// Axes in file order; cells are the cartesian product, last axis fastest.
    pub axes: Vec<(SweepAxis, Vec<f64>)>,
    pub workers: usize,
    pub max_cells: usize,
    /// Summary columns beyond the parameters; empty means all.
    pub columns: Vec<String>,
}

impl SweepConfig {
    pub fn cell_count(&self) -> usize {
        self.axes.iter().map(|(_, v)| v.len()).product()
    }

    /// Parameter assignments in row order.
    pub fn cells(&self) -> Vec<Vec<(SweepAxis, f64)>> {
        let mut out = vec![Vec::new()];
        for (axis, values) in &self.axes {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    values.iter().map(move |&v| {
                        let mut p = prefix.clone();
                        p.push((*axis, v));
                        p
                    })
                })
                .collect();
        }
        out
    }
}

pub const SWEEP_COLUMNS: [&str; 9] = [
    "unstable",
    "fastest_mode",
    "fastest_growth",
    "regime",
    "amplitude_u",
    "dominant_mode",
    "max_ledger_residual",
    "settled",
    "error",
];

struct Entry {
    value: String,
    line: usize,
}

struct Section {
    line: usize,
    entries: BTreeMap<String, Entry>,
}

const SECTIONS: [&str; 7] = ["model", "grid", "scheme", "init", "output", "diagnostics", "sweep"];

fn lex(text: &str, errors: &mut Vec<ConfigError>) -> BTreeMap<String, Section> {
    let mut sections: BTreeMap<String, Section> = BTreeMap::new();
    let mut current: Option<String> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if let Some(name) = body.strip_prefix('[') {
            let Some(name) = name.strip_suffix(']') else {
                errors.push(ConfigError::Parse { line, message: format!("malformed section header `{body}`") });
                current = None;
                continue;
            };
            let name = name.trim().to_ascii_lowercase();
            if !SECTIONS.contains(&name.as_str()) {
                errors.push(ConfigError::Parse { line, message: format!("unknown section [{name}]") });
                current = None;
                continue;
            }
            if sections.contains_key(&name) {
                errors.push(ConfigError::Parse { line, message: format!("duplicate section [{name}]") });
            }
            sections.entry(name.clone()).or_insert(Section { line, entries: BTreeMap::new() });
            current = Some(name);
            continue;
        }
        let Some((key, value)) = body.split_once('=') else {
            errors.push(ConfigError::Parse { line, message: format!("expected `key = value`, got `{body}`") });
            continue;
        };
        let key = key.trim().to_ascii_lowercase();
        let Some(sec) = current.as_ref().and_then(|c| sections.get_mut(c)) else {
            errors.push(ConfigError::Parse { line, message: format!("`{key}` appears outside a known section") });
            continue;
        };
        if key.is_empty() {
            errors.push(ConfigError::Parse { line, message: "empty key".into() });
            continue;
        }
        if sec.entries.contains_key(&key) {
            errors.push(ConfigError::Parse { line, message: format!("duplicate key `{key}`") });
            continue;
        }
        sec.entries.insert(key, Entry { value: value.trim().to_string(), line });
    }
    sections
}

/// Typed access to one section that records every failure.
struct Reader<'a> {
    name: &'static str,
    section: Option<&'a Section>,
    used: Vec<&'static str>,
    errors: &'a mut Vec<ConfigError>,
}

impl<'a> Reader<'a> {
    fn new(name: &'static str, sections: &'a BTreeMap<String, Section>, errors: &'a mut Vec<ConfigError>) -> Self {
        Reader { name, section: sections.get(name), used: Vec::new(), errors }
    }

    fn raw(&mut self, key: &'static str) -> Option<(&'a str, usize)> {
        self.used.push(key);
        self.section.and_then(|s| s.entries.get(key)).map(|e| (e.value.as_str(), e.line))
    }

    fn invalid(&mut self, key: &str, message: impl Into<String>) {
        self.errors.push(ConfigError::Validation { field: format!("{}.{key}", self.name), message: message.into() });
    }

    fn missing(&mut self, key: &str) {
        self.invalid(key, format!("missing required key `{key}`"));
    }

    fn parsed<T: FromStr>(&mut self, key: &'static str, what: &str) -> Option<T> {
        let (v, line) = self.raw(key)?;
        match v.parse::<T>() {
            Ok(x) => Some(x),
            Err(_) => {
                self.errors.push(ConfigError::Parse { line, message: format!("`{key}`: expected {what}, got `{v}`") });
                None
            }
        }
    }

    fn f64(&mut self, key: &'static str) -> Option<f64> {
        let x = self.parsed::<f64>(key, "a number")?;
        if x.is_finite() {
            Some(x)
        } else {
            self.invalid(key, format!("{key} must be finite"));
            None
        }
    }

    fn req_f64(&mut self, key: &'static str) -> Option<f64> {
        if self.has(key) {
            self.f64(key)
        } else {
            self.used.push(key);
            self.missing(key);
            None
        }
    }

    fn usize(&mut self, key: &'static str) -> Option<usize> {
        self.parsed::<usize>(key, "a non-negative integer")
    }

    fn bool(&mut self, key: &'static str) -> Option<bool> {
        self.parsed::<bool>(key, "true or false")
    }

    fn word(&mut self, key: &'static str) -> Option<String> {
        self.raw(key).map(|(v, _)| v.to_ascii_lowercase())
    }

    fn list(&mut self, key: &'static str) -> Option<Vec<f64>> {
        let (v, line) = self.raw(key)?;
        let mut out = Vec::new();
        for part in v.split(',') {
            match part.trim().parse::<f64>() {
                Ok(x) if x.is_finite() => out.push(x),
                _ => {
                    self.errors.push(ConfigError::Parse {
                        line,
                        message: format!("`{key}`: expected a comma-separated list of numbers, got `{v}`"),
                    });
                    return None;
                }
            }
        }
        Some(out)
    }

    fn has(&self, key: &str) -> bool {
        self.section.is_some_and(|s| s.entries.contains_key(key))
    }

    /// Flags keys that nothing asked for.
    fn finish(self) {
        let Some(sec) = self.section else { return };
        for (k, e) in &sec.entries {
            if !self.used.contains(&k.as_str()) {
                self.errors.push(ConfigError::Parse { line: e.line, message: format!("unknown key `{k}` in [{}]", self.name) });
            }
        }
    }
}

fn parse_model(r: &mut Reader<'_>) -> Option<ModelParams> {
    let alpha = r.f64("alpha").unwrap_or(1.0);
    let theta = r.f64("theta").unwrap_or(0.0);
    let dcoef = r.req_f64("dcoef");
    if alpha < 0.0 {
        r.invalid("alpha", "alpha must be ≥ 0");
    }
    if theta < 0.0 {
        r.invalid("theta", "theta must be ≥ 0");
    }
    if dcoef.is_some_and(|d| d <= 0.0) {
        r.invalid("dcoef", "dcoef must be > 0");
    }

    let motility = match r.word("motility").as_deref() {
        None => {
            r.missing("motility");
            None
        }
        Some("exponential") => {
            let (g0, g1, lam) = (r.req_f64("gamma0"), r.req_f64("gamma1"), r.req_f64("lambda"));
            match (g0, g1, lam) {
                (Some(a), Some(b), Some(c)) => MotilitySpec::exponential(a, b, c).map_err(|e| r.invalid("motility", e.to_string())).ok(),
                _ => None,
            }
        }
        Some("constant") => {
            let g = r.req_f64("gamma");
            g.and_then(|g| MotilitySpec::constant(g).map_err(|e| r.invalid("gamma", e.to_string())).ok())
        }
        Some("table") => {
            let (k, v) = (r.list("table_v"), r.list("table_gamma"));
            if !r.has("table_v") {
                r.missing("table_v");
            }
            if !r.has("table_gamma") {
                r.missing("table_gamma");
            }
            match (k, v) {
                (Some(k), Some(v)) => MotilityTable::new(k, v)
                    .map(MotilitySpec::Table)
                    .map_err(|e| r.invalid("motility", e.to_string()))
                    .ok(),
                _ => None,
            }
        }
        Some(other) => {
            r.invalid("motility", format!("unknown motility family `{other}` (expected exponential, constant or table)"));
            None
        }
    };

    let response = match r.word("response").as_deref() {
        None => {
            r.missing("response");
            None
        }
        Some("linear") => Some(ResponseSpec::Linear),
        Some("michaelis") => {
            let l = r.f64("response_lambda").unwrap_or(1.0);
            ResponseSpec::michaelis(l).map_err(|e| r.invalid("response_lambda", e.to_string())).ok()
        }
        Some("hill") => {
            let l = r.f64("response_lambda").unwrap_or(1.0);
            let m = r.f64("hill_m").unwrap_or(2.0);
            ResponseSpec::hill(l, m).map_err(|e| r.invalid("hill_m", e.to_string())).ok()
        }
        Some(other) => {
            r.invalid("response", format!("unknown response family `{other}` (expected linear, michaelis or hill)"));
            None
        }
    };
    let params = ModelParams { alpha, theta, dcoef: dcoef?, motility: motility?, response: response? };
    if alpha < 0.0 || theta < 0.0 || params.dcoef <= 0.0 {
        return None;
    }
    Some(params)
}

fn parse_scheme(r: &mut Reader<'_>) -> Option<SchemeConfig> {
    let mode = match r.word("mode").as_deref() {
        None | Some("imex") => Some(Scheme::Imex),
        Some("explicit") => Some(Scheme::Explicit),
        Some(other) => {
            r.invalid("mode", format!("unknown scheme `{other}` (expected imex or explicit)"));
            None
        }
    };
    let safety = r.f64("safety").unwrap_or(DEFAULT_SAFETY);
    if !(safety > 0.0 && safety <= 1.0) {
        r.invalid("safety", "safety must lie in (0, 1]");
    }
    let dt = match r.raw("dt") {
        Some(("auto", _)) => Some(DtPolicy::Auto { safety }),
        Some((v, line)) => match v.parse::<f64>() {
            Ok(x) if x.is_finite() && x > 0.0 => Some(DtPolicy::Fixed(x)),
            Ok(_) => {
                r.invalid("dt", "dt must be > 0");
                None
            }
            Err(_) => {
                r.errors.push(ConfigError::Parse { line, message: format!("`dt`: expected a number or `auto`, got `{v}`") });
                None
            }
        },
        None => match mode {
            Some(Scheme::Explicit) => Some(DtPolicy::Auto { safety }),
            _ => Some(DtPolicy::Fixed(DEFAULT_IMEX_DT)),
        },
    };
    let t_end = r.req_f64("t_end");
    if t_end.is_some_and(|t| t < 0.0) {
        r.invalid("t_end", "t_end must be ≥ 0");
    }
    let max_steps = r.usize("max_steps").unwrap_or(usize::MAX);
    let t_end = t_end.filter(|t| *t >= 0.0)?;
    if !(safety > 0.0 && safety <= 1.0) {
        return None;
    }
    Some(SchemeConfig { mode: mode?, dt: dt?, t_end, max_steps })
}

fn parse_base(r: &mut Reader<'_>) -> Option<[f64; 3]> {
    let Some(b) = r.list("base") else {
        if !r.has("base") {
            r.missing("base");
        }
        return None;
    };
    if b.len() != 3 {
        r.invalid("base", format!("base needs three values u, v, w, got {}", b.len()));
        return None;
    }
    if b.iter().any(|x| *x < 0.0) {
        r.invalid("base", "base values must be ≥ 0");
        return None;
    }
    Some([b[0], b[1], b[2]])
}

fn parse_init(r: &mut Reader<'_>) -> Option<InitSpec> {
    match r.word("kind").as_deref() {
        None => {
            r.missing("kind");
            None
        }
        Some("constant_perturbed") => {
            let base = parse_base(r);
            let amplitude = r.f64("amplitude").unwrap_or(DEFAULT_AMPLITUDE);
            let perturb_w = r.bool("perturb_w").unwrap_or(false);
            let seed = r.parsed::<u64>("seed", "an unsigned 64-bit integer");
            if amplitude < 0.0 {
                r.invalid("amplitude", "amplitude must be ≥ 0");
                return None;
            }
            let seed = match seed {
                Some(s) => s,
                None if amplitude == 0.0 && !r.has("seed") => 0,
                None => {
                    if !r.has("seed") {
                        r.invalid("seed", "seed is required when amplitude > 0");
                    }
                    return None;
                }
            };
            Some(InitSpec::ConstantPerturbed { base: base?, amplitude, seed, perturb_w })
        }
        Some("eigenmode") => {
            let base = parse_base(r);
            let mode = r.usize("mode");
            let amplitude = r.req_f64("amplitude");
            match mode {
                None if !r.has("mode") => r.missing("mode"),
                Some(0) => r.invalid("mode", "mode must be ≥ 1"),
                _ => {}
            }
            let mode = mode.filter(|m| *m > 0)?;
            Some(InitSpec::Eigenmode { base: base?, mode, amplitude: amplitude? })
        }
        Some("file") => match r.raw("path") {
            Some((p, _)) => Some(InitSpec::File(PathBuf::from(p))),
            None => {
                r.missing("path");
                None
            }
        },
        Some(other) => {
            r.invalid("kind", format!("unknown initial data `{other}` (expected constant_perturbed, eigenmode or file)"));
            None
        }
    }
}

fn parse_diagnostics(r: &mut Reader<'_>) -> DiagnosticsConfig {
    let d = DiagnosticsConfig::default();
    let mut th = d.thresholds;
    fn positive(r: &mut Reader<'_>, key: &'static str, slot: &mut f64) {
        if let Some(x) = r.f64(key) {
            if x > 0.0 {
                *slot = x;
            } else {
                r.invalid(key, format!("{key} must be > 0"));
            }
        }
    }
    positive(r, "eps_conv", &mut th.eps_conv);
    positive(r, "eps_pat", &mut th.eps_pat);
    positive(r, "settle_tol", &mut th.settle_tol);
    positive(r, "settle_window", &mut th.settle_window);
    if th.settle_window > 1.0 {
        r.invalid("settle_window", "settle_window is a fraction of t_end and must be ≤ 1");
    }
    let mut envelope = d.envelope;
    positive(r, "envelope_c1", &mut envelope.c1);
    if let Some(c2) = r.f64("envelope_c2") {
        if c2 >= 0.0 {
            envelope.c2 = c2;
        } else {
            r.invalid("envelope_c2", "envelope_c2 must be ≥ 0");
        }
    }
    let n_max = r.usize("n_max").unwrap_or(d.n_max);
    let mut v_max = None;
    let mut w_max = None;
    for (key, slot) in [("hypothesis_v_max", &mut v_max), ("hypothesis_w_max", &mut w_max)] {
        if let Some(x) = r.f64(key) {
            if x > 0.0 {
                *slot = Some(x);
            } else {
                r.invalid(key, format!("{key} must be > 0"));
            }
        }
    }
    DiagnosticsConfig { thresholds: th, envelope, n_max, hypothesis_v_max: v_max, hypothesis_w_max: w_max }
}

fn parse_run(sections: &BTreeMap<String, Section>, errors: &mut Vec<ConfigError>) -> Option<RunConfig> {
    for name in ["model", "grid", "scheme", "init"] {
        if !sections.contains_key(name) {
            errors.push(ConfigError::Parse { line: 0, message: format!("missing [{name}]") });
        }
    }

    let mut r = Reader::new("model", sections, errors);
    let params = r.section.is_some().then(|| parse_model(&mut r)).flatten();
    r.finish();

    let mut r = Reader::new("grid", sections, errors);
    let length = r.req_f64("length");
    let cells = r.usize("cells").unwrap_or(DEFAULT_CELLS);
    if length.is_some_and(|l| l <= 0.0) {
        r.invalid("length", "length must be > 0");
    }
    if cells < 4 {
        r.invalid("cells", "cells must be ≥ 4");
    }
    r.finish();

    let mut r = Reader::new("scheme", sections, errors);
    let scheme = parse_scheme(&mut r);
    r.finish();

    let mut r = Reader::new("init", sections, errors);
    let init = parse_init(&mut r);
    r.finish();

    let mut r = Reader::new("output", sections, errors);
    let out_dir = r.raw("dir").map_or_else(|| PathBuf::from("out"), |(v, _)| PathBuf::from(v));
    let cadence = r.f64("cadence").unwrap_or(DEFAULT_CADENCE);
    if cadence <= 0.0 {
        r.invalid("cadence", "cadence must be > 0");
    }
    let snapshot_every = r.f64("snapshot_every").unwrap_or(DEFAULT_SNAPSHOT_EVERY);
    if snapshot_every < 0.0 {
        r.invalid("snapshot_every", "snapshot_every must be ≥ 0");
    }
    r.finish();

    let mut r = Reader::new("diagnostics", sections, errors);
    let diagnostics = parse_diagnostics(&mut r);
    r.finish();

    let length = length.filter(|l| *l > 0.0)?;
    if cells < 4 || cadence <= 0.0 || snapshot_every < 0.0 {
        return None;
    }
    Some(RunConfig {
        params: params?,
        length,
        cells,
        scheme: scheme?,
        init: init?,
        cadence,
        snapshot_every,
        out_dir,
        diagnostics,
    })
}

/// Parses and validates a run configuration. A `[sweep]` section is rejected.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigErrors> {
    let mut errors = Vec::new();
    let sections = lex(text, &mut errors);
    if let Some(s) = sections.get("sweep") {
        errors.push(ConfigError::Parse { line: s.line, message: "[sweep] is only accepted by the sweep command".into() });
    }
    let cfg = parse_run(&sections, &mut errors);
    match cfg {
        Some(c) if errors.is_empty() => Ok(c),
        _ => Err(ConfigErrors(errors)),
    }
}

/// Parses a run configuration with a `[sweep]` section.
pub fn parse_sweep_config(text: &str) -> Result<SweepConfig, ConfigErrors> {
    let mut errors = Vec::new();
    let sections = lex(text, &mut errors);
    let base = parse_run(&sections, &mut errors);
    if !sections.contains_key("sweep") {
        errors.push(ConfigError::Parse { line: 0, message: "missing [sweep]".into() });
    }

    let mut r = Reader::new("sweep", &sections, &mut errors);
    let workers = r.usize("workers").unwrap_or(0);
    let max_cells = r.usize("max_cells").unwrap_or(DEFAULT_MAX_CELLS);
    let columns: Vec<String> = r
        .raw("columns")
        .map(|(v, _)| v.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect())
        .unwrap_or_default();
    for c in &columns {
        if !SWEEP_COLUMNS.contains(&c.as_str()) {
            let c = c.clone();
            r.invalid("columns", format!("unknown column `{c}`"));
        }
    }
    let mut axes = Vec::new();
    for axis in SweepAxis::ALL {
        if let Some(values) = r.list(axis.name()) {
            if values.is_empty() {
                r.invalid(axis.name(), "axis has no values");
            }
            let line = r.section.and_then(|s| s.entries.get(axis.name())).map_or(0, |e| e.line);
            axes.push((line, axis, values));
        }
    }
    r.finish();
    axes.sort_by_key(|(line, _, _)| *line);
    let axes: Vec<(SweepAxis, Vec<f64>)> = axes.into_iter().map(|(_, a, v)| (a, v)).collect();
    if sections.contains_key("sweep") && axes.is_empty() {
        errors.push(ConfigError::Validation { field: "sweep".into(), message: "axes must be nonempty".into() });
    }
    let cells: usize = axes.iter().map(|(_, v)| v.len()).product();
    if !axes.is_empty() && cells > max_cells {
        errors.push(ConfigError::Validation {
            field: "sweep.max_cells".into(),
            message: format!("sweep has {cells} cells, more than max_cells = {max_cells}"),
        });
    }
    match base {
        Some(base) if errors.is_empty() => Ok(SweepConfig { base, axes, workers, max_cells, columns }),
        _ => Err(ConfigErrors(errors)),
    }
}

fn num(x: f64) -> String {
    format!("{x:?}")
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(|x| num(*x)).collect::<Vec<_>>().join(", ")
}

impl RunConfig {
    /// Canonical text that parses back to an identical config.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let p = &self.params;
        writeln!(s, "[model]").unwrap();
        writeln!(s, "alpha = {}", num(p.alpha)).unwrap();
        writeln!(s, "theta = {}", num(p.theta)).unwrap();
        writeln!(s, "dcoef = {}", num(p.dcoef)).unwrap();
        match &p.motility {
            MotilitySpec::Exponential { gamma0, gamma1, lambda } => {
                writeln!(s, "motility = exponential").unwrap();
                writeln!(s, "gamma0 = {}", num(*gamma0)).unwrap();
                writeln!(s, "gamma1 = {}", num(*gamma1)).unwrap();
                writeln!(s, "lambda = {}", num(*lambda)).unwrap();
            }
            MotilitySpec::Constant { gamma } => {
                writeln!(s, "motility = constant").unwrap();
                writeln!(s, "gamma = {}", num(*gamma)).unwrap();
            }
            MotilitySpec::Table(t) => {
                writeln!(s, "motility = table").unwrap();
                writeln!(s, "table_v = {}", join(t.knots())).unwrap();
                writeln!(s, "table_gamma = {}", join(t.values())).unwrap();
            }
        }
        match p.response {
            ResponseSpec::Linear => writeln!(s, "response = linear").unwrap(),
            ResponseSpec::Michaelis { lambda } => {
                writeln!(s, "response = michaelis").unwrap();
                writeln!(s, "response_lambda = {}", num(lambda)).unwrap();
            }
            ResponseSpec::Hill { lambda, m } => {
                writeln!(s, "response = hill").unwrap();
                writeln!(s, "response_lambda = {}", num(lambda)).unwrap();
                writeln!(s, "hill_m = {}", num(m)).unwrap();
            }
        }

        writeln!(s, "\n[grid]\nlength = {}\ncells = {}", num(self.length), self.cells).unwrap();

        writeln!(s, "\n[scheme]\nmode = {}", self.scheme.mode.tag()).unwrap();
        match self.scheme.dt {
            DtPolicy::Fixed(dt) => writeln!(s, "dt = {}", num(dt)).unwrap(),
            DtPolicy::Auto { safety } => writeln!(s, "dt = auto\nsafety = {}", num(safety)).unwrap(),
        }
        writeln!(s, "t_end = {}", num(self.scheme.t_end)).unwrap();
        if self.scheme.max_steps != usize::MAX {
            writeln!(s, "max_steps = {}", self.scheme.max_steps).unwrap();
        }

        writeln!(s, "\n[init]").unwrap();
        match &self.init {
            InitSpec::ConstantPerturbed { base, amplitude, seed, perturb_w } => {
                writeln!(s, "kind = constant_perturbed\nbase = {}", join(base)).unwrap();
                writeln!(s, "amplitude = {}\nseed = {seed}\nperturb_w = {perturb_w}", num(*amplitude)).unwrap();
            }
            InitSpec::Eigenmode { base, mode, amplitude } => {
                writeln!(s, "kind = eigenmode\nbase = {}", join(base)).unwrap();
                writeln!(s, "mode = {mode}\namplitude = {}", num(*amplitude)).unwrap();
            }
            InitSpec::File(path) => writeln!(s, "kind = file\npath = {}", path.display()).unwrap(),
        }

        writeln!(s, "\n[output]\ndir = {}", self.out_dir.display()).unwrap();
        writeln!(s, "cadence = {}\nsnapshot_every = {}", num(self.cadence), num(self.snapshot_every)).unwrap();

        let d = &self.diagnostics;
        let th = &d.thresholds;
        writeln!(s, "\n[diagnostics]").unwrap();
        writeln!(s, "eps_conv = {}\neps_pat = {}", num(th.eps_conv), num(th.eps_pat)).unwrap();
        writeln!(s, "settle_tol = {}\nsettle_window = {}", num(th.settle_tol), num(th.settle_window)).unwrap();
        writeln!(s, "envelope_c1 = {}\nenvelope_c2 = {}", num(d.envelope.c1), num(d.envelope.c2)).unwrap();
        writeln!(s, "n_max = {}", d.n_max).unwrap();
        if let Some(v) = d.hypothesis_v_max {
            writeln!(s, "hypothesis_v_max = {}", num(v)).unwrap();
        }
        if let Some(w) = d.hypothesis_w_max {
            writeln!(s, "hypothesis_w_max = {}", num(w)).unwrap();
        }
        s
    }

    /// Seed of the random initial data, if any.
    pub fn seed(&self) -> Option<u64> {
        match self.init {
            InitSpec::ConstantPerturbed { seed, .. } => Some(seed),
            _ => None,
        }
    }

    pub fn set_seed(&mut self, new_seed: u64) {
        if let InitSpec::ConstantPerturbed { seed, .. } = &mut self.init {
            *seed = new_seed;
        }
    }
}

impl SweepConfig {
    pub fn to_text(&self) -> String {
        let mut s = self.base.to_text();
        writeln!(s, "\n[sweep]").unwrap();
        for (axis, values) in &self.axes {
            writeln!(s, "{} = {}", axis.name(), join(values)).unwrap();
        }
        writeln!(s, "workers = {}\nmax_cells = {}", self.workers, self.max_cells).unwrap();
        if !self.columns.is_empty() {
            writeln!(s, "columns = {}", self.columns.join(", ")).unwrap();
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const FIG1: &str = "\
# pattern-forming setup
[model]
alpha = 1
theta = 0
dcoef = 0.1
motility = exponential
gamma0 = 10
gamma1 = 0.1
lambda = 1
response = hill
response_lambda = 1
hill_m = 2

[grid]
length = 20
cells = 512

[scheme]
mode = imex
dt = 0.001
t_end = 200

[init]
kind = constant_perturbed
base = 4, 4, 0
amplitude = 0.01
seed = 42

[output]
dir = out/fig1
cadence = 1
";

    #[test]
    fn fig1_file_parses() {
        let c = parse_config(FIG1).unwrap();
        assert_eq!(c.params, ModelParams::fig1(0.1).unwrap());
        assert_eq!(c.length, 20.0);
        assert_eq!(c.cells, 512);
        assert_eq!(c.scheme, SchemeConfig::imex(200.0, 1e-3));
        assert_eq!(
            c.init,
            InitSpec::ConstantPerturbed { base: [4.0, 4.0, 0.0], amplitude: 0.01, seed: 42, perturb_w: false }
        );
        assert_eq!(c.out_dir, PathBuf::from("out/fig1"));
        assert_eq!(c.diagnostics, DiagnosticsConfig::default());
    }

    #[test]
    fn empty_text_reports_missing_model() {
        let e = parse_config("").unwrap_err();
        assert!(e.0.contains(&ConfigError::Parse { line: 0, message: "missing [model]".into() }));
        assert!(e.to_string().contains("missing [model]"));
    }

    #[test]
    fn negative_theta_is_named() {
        let e = parse_config(&FIG1.replace("theta = 0", "theta = -1")).unwrap_err();
        assert_eq!(
            e.0,
            vec![ConfigError::Validation { field: "model.theta".into(), message: "theta must be ≥ 0".into() }]
        );
    }

    #[test]
    fn all_errors_are_collected_with_lines() {
        let text = FIG1
            .replace("dcoef = 0.1", "dcoef = fast")
            .replace("cells = 512", "cells = 512\ncolour = blue")
            .replace("seed = 42", "")
            .replace("[output]", "[outptu]");
        let e = parse_config(&text).unwrap_err();
        let msgs: Vec<String> = e.0.iter().map(|x| x.to_string()).collect();
        assert!(msgs.iter().any(|m| m.contains("line 5") && m.contains("dcoef")), "{msgs:?}");
        assert!(msgs.iter().any(|m| m.contains("line 17") && m.contains("colour")), "{msgs:?}");
        assert!(msgs.iter().any(|m| m.contains("init.seed")), "{msgs:?}");
        assert!(msgs.iter().any(|m| m.contains("unknown section [outptu]")), "{msgs:?}");
        assert!(msgs.len() >= 4);
    }

    #[test]
    fn defaults_apply() {
        let text = "[model]\ndcoef=1\nmotility=constant\ngamma=2\nresponse=linear\n[grid]\nlength=5\n[scheme]\nmode=explicit\nt_end=1\n[init]\nkind=eigenmode\nbase=1,1,1\nmode=2\namplitude=0.1\n";
        let c = parse_config(text).unwrap();
        assert_eq!(c.params.alpha, 1.0);
        assert_eq!(c.cells, DEFAULT_CELLS);
        assert_eq!(c.scheme.dt, DtPolicy::Auto { safety: DEFAULT_SAFETY });
        assert_eq!(c.cadence, DEFAULT_CADENCE);
        assert_eq!(c.seed(), None);
    }

    #[test]
    fn text_round_trip() {
        let c = parse_config(FIG1).unwrap();
        assert_eq!(parse_config(&c.to_text()).unwrap(), c);
        let table = "[model]\ndcoef=0.3\nmotility=table\ntable_v=0,1,2.5\ntable_gamma=3,1,0.2\nresponse=michaelis\nresponse_lambda=0.7\n\
                     [grid]\nlength=10\ncells=64\n[scheme]\nmode=explicit\nt_end=2\nmax_steps=10\n[init]\nkind=file\npath=a/b.csv\n\
                     [diagnostics]\neps_conv=0.05\nhypothesis_v_max=30\n";
        let c = parse_config(table).unwrap();
        assert_eq!(parse_config(&c.to_text()).unwrap(), c);
    }

    #[test]
    fn sweep_axes_and_caps() {
        let text = format!("{FIG1}\n[sweep]\ndcoef = 0.1, 0.01\nl = 10, 20, 30\nworkers = 2\n");
        let s = parse_sweep_config(&text).unwrap();
        assert_eq!(s.axes, vec![(SweepAxis::Dcoef, vec![0.1, 0.01]), (SweepAxis::Length, vec![10.0, 20.0, 30.0])]);
        assert_eq!(s.cell_count(), 6);
        let cells = s.cells();
        assert_eq!(cells[1], vec![(SweepAxis::Dcoef, 0.1), (SweepAxis::Length, 20.0)]);
        assert_eq!(parse_sweep_config(&s.to_text()).unwrap(), s);

        let e = parse_sweep_config(&format!("{FIG1}\n[sweep]\nworkers = 2\n")).unwrap_err();
        assert!(e.to_string().contains("axes must be nonempty"));
        let e = parse_sweep_config(&format!("{FIG1}\n[sweep]\ndcoef = 1,2,3\nmax_cells = 2\n")).unwrap_err();
        assert!(e.to_string().contains("max_cells"));
        assert!(parse_config(&text).is_err());
    }

    #[test]
    fn sweep_axis_application() {
        let base = parse_config(FIG1).unwrap();
        let c = SweepAxis::Gamma1.apply(&base, 0.5).unwrap();
        assert_eq!(c.params.motility, MotilitySpec::exponential(10.0, 0.5, 1.0).unwrap());
        assert_eq!(SweepAxis::Cells.apply(&base, 64.0).unwrap().cells, 64);
        assert!(SweepAxis::Cells.apply(&base, 64.5).is_err());
        assert!(SweepAxis::Dcoef.apply(&base, 0.0).is_err());
        assert!(SweepAxis::Length.apply(&base, -1.0).is_err());
    }
}
