//! Config-driven runs and their on-disk artifacts.
//!
//! [`execute`] does the work in memory; the `cmd_*` functions add file
//! output and map failures to exit statuses:
//! `0` ok, `2` configuration error, `3` hypothesis violation, `4` solver
//! failure.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::config::{ConfigErrors, RunConfig, SweepAxis, SweepConfig};
use crate::diagnostics::{
    classify_asymptotics, consumption_bound_check, pattern_metrics, w_mass_balance, AsymptoteReport, BoundednessWatch,
    PatternMetrics, Regime, TrajectorySummary,
};
use crate::error::Error;
use crate::grid::{integrate, sup_norm, write_snapshot, FieldState, Grid};
use crate::init::{make_initial_state, InitError, InitSpec};
use crate::model::{
    boundedness_envelope, validate_hypotheses, HypothesisReport, ModelParams, MotilitySpec, ResponseSpec,
    DEFAULT_HYPOTHESIS_SAMPLES,
};
use crate::stability::{stability_report, StabilityReport};
use crate::stepper::{run, Observation, RunSummary, SchemeConfig, DEFAULT_IMEX_DT};

/// Relative ledger tolerance applied when `θ = 0`.
pub const LEDGER_TOL: f64 = 1e-12;
/// Growth rate above which a predicted instability must show as a pattern.
pub const COHERENCE_GROWTH: f64 = 0.05;

pub const TIMESERIES_HEADER: &str =
    "t,mass_u,mass_w,theta_integral,ledger_residual,sup_u,sup_v,sup_w,amplitude_u,dominant_mode";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("hypothesis violation: {0}")]
    Hypothesis(String),
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("cannot write artifacts: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Hypothesis(_) => 3,
            CliError::Solver(_) | CliError::Io(_) => 4,
        }
    }
}

impl From<ConfigErrors> for CliError {
    fn from(e: ConfigErrors) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<InitError> for CliError {
    fn from(e: InitError) -> Self {
        CliError::Config(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesRow {
    pub t: f64,
    pub mass_u: f64,
    pub mass_w: f64,
    pub theta_integral: f64,
    pub ledger_residual: f64,
    pub sup_u: f64,
    pub sup_v: f64,
    pub sup_w: f64,
    pub amplitude_u: f64,
    pub dominant_mode: Option<usize>,
}

impl SeriesRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{}",
            self.t,
            self.mass_u,
            self.mass_w,
            self.theta_integral,
            self.ledger_residual,
            self.sup_u,
            self.sup_v,
            self.sup_w,
            self.amplitude_u,
            self.dominant_mode.map_or_else(|| "NA".to_string(), |n| n.to_string())
        )
    }
}

/// Pass/fail state of the runtime identities.
#[derive(Debug, Clone, PartialEq)]
pub struct Checks {
    /// `None` when `θ > 0`, where the ledger only closes to `O(dt)`.
    pub ledger_ok: Option<bool>,
    pub max_ledger_residual: f64,
    pub w_monotone: bool,
    pub w_monotone_first_violation: Option<usize>,
    pub consumption_ok: bool,
    /// `|∫w + consumption − ∫w₀| / max(1, ∫w₀)`.
    pub w_balance_rel: f64,
    /// Relative growth of the running max of `sup u` over the second half.
    pub late_growth: f64,
    pub envelope: f64,
    pub envelope_warnings: usize,
}

impl Checks {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let opt = |b: Option<bool>| b.map_or_else(|| "NA".to_string(), |b| b.to_string());
        writeln!(s, "ledger_ok={}", opt(self.ledger_ok)).unwrap();
        writeln!(s, "max_ledger_residual={:.6e}", self.max_ledger_residual).unwrap();
        writeln!(s, "w_monotone={}", self.w_monotone).unwrap();
        writeln!(s, "w_monotone_first_violation={}", self.w_monotone_first_violation.map_or("NA".into(), |i| i.to_string()))
            .unwrap();
        writeln!(s, "consumption_ok={}", self.consumption_ok).unwrap();
        writeln!(s, "w_balance_rel={:.6e}", self.w_balance_rel).unwrap();
        writeln!(s, "late_growth={:.6e}", self.late_growth).unwrap();
        writeln!(s, "envelope={:.6e}", self.envelope).unwrap();
        writeln!(s, "envelope_warnings={}", self.envelope_warnings).unwrap();
        s
    }
}

/// Everything a run produced, before anything touches the disk.
#[derive(Debug, Clone)]
pub struct Execution {
    pub config: RunConfig,
    pub grid: Grid,
    pub initial: FieldState,
    pub hypotheses: HypothesisReport,
    pub summary: RunSummary,
    pub series: Vec<SeriesRow>,
    pub snapshots: Vec<FieldState>,
    pub asymptotics: AsymptoteReport,
    pub metrics: PatternMetrics,
    pub watch: BoundednessWatch,
    pub checks: Checks,
    /// Analysis of `(u*, u*, 0)`; an error message when it cannot be formed.
    pub stability: Result<StabilityReport, String>,
}

impl Execution {
    pub fn u_star(&self) -> f64 {
        self.asymptotics.u_star_pred
    }
}

/// `(u₀ mass + α w₀ mass)/l`.
pub fn u_star_from_masses(state: &FieldState, grid: &Grid, params: &ModelParams) -> f64 {
    (integrate(&state.u, grid) + params.alpha * integrate(&state.w, grid)) / grid.length()
}

/// Sampling ranges for the hypothesis check: configured values, else
/// generous multiples of the initial data (covering every table knot).
pub fn hypothesis_ranges(cfg: &RunConfig, state: &FieldState, grid: &Grid) -> (f64, f64) {
    let u_star = u_star_from_masses(state, grid, &cfg.params);
    let mut v_max = 2.0 * sup_norm(&state.u).max(sup_norm(&state.v)).max(u_star);
    if let MotilitySpec::Table(t) = &cfg.params.motility {
        v_max = v_max.max(t.knots().last().copied().unwrap_or(0.0));
    }
    let v_max = cfg.diagnostics.hypothesis_v_max.unwrap_or(v_max.max(10.0));
    let w_max = cfg.diagnostics.hypothesis_w_max.unwrap_or((2.0 * sup_norm(&state.w)).max(10.0));
    (v_max, w_max)
}

/// Progress callback: `(t, t_end)` at every observation.
pub type Progress<'a> = &'a mut dyn FnMut(f64, f64);

/// Runs a configuration in memory.
pub fn execute(cfg: &RunConfig, progress: Option<Progress<'_>>) -> Result<Execution, CliError> {
    let grid = Grid::new(cfg.length, cfg.cells).map_err(|e| CliError::Config(e.to_string()))?;
    cfg.params.validate().map_err(|e| CliError::Config(e.to_string()))?;
    let initial = make_initial_state(&cfg.init, &grid)?;

    let (v_max, w_max) = hypothesis_ranges(cfg, &initial, &grid);
    let hypotheses = validate_hypotheses(&cfg.params, v_max, w_max, DEFAULT_HYPOTHESIS_SAMPLES)
        .map_err(|e| CliError::Config(e.to_string()))?;
    if !hypotheses.h1_ok {
        return Err(CliError::Hypothesis(format!(
            "motility is not positive and smooth on [0, {v_max}] (min sampled {})",
            hypotheses.gamma_lo
        )));
    }
    if !hypotheses.h2_ok {
        return Err(CliError::Hypothesis(format!(
            "response is not zero at 0, positive and nondecreasing on [0, {w_max}]"
        )));
    }

    let envelope = boundedness_envelope(&cfg.params, cfg.diagnostics.envelope).map_err(|e| CliError::Config(e.to_string()))?;
    let t0 = initial.t;
    let t_end = cfg.scheme.t_end.max(t0);
    let window_start = t_end - cfg.diagnostics.thresholds.settle_window * (t_end - t0);
    let settle_tol = cfg.diagnostics.thresholds.settle_tol;

    let mut series = Vec::new();
    let mut snapshots: Vec<FieldState> = Vec::new();
    let mut tail: Vec<FieldState> = Vec::new();
    let mut watch = BoundednessWatch::new(envelope);
    let mut prev: Option<FieldState> = None;
    let mut last_unsettled_t = None;
    let mut progress = progress;

    let mut observer = |o: &Observation<'_>| {
        let st = o.state;
        let m = pattern_metrics(&st.u, o.grid);
        series.push(SeriesRow {
            t: st.t,
            mass_u: o.ledger.current_u_mass,
            mass_w: o.ledger.current_w_mass,
            theta_integral: o.ledger.theta_integral,
            ledger_residual: o.ledger.residual,
            sup_u: sup_norm(&st.u),
            sup_v: sup_norm(&st.v),
            sup_w: sup_norm(&st.w),
            amplitude_u: m.amplitude,
            dominant_mode: m.dominant_mode,
        });
        watch.observe(st.t, st);
        let snap_due = match snapshots.last() {
            None => true,
            Some(last) => cfg.snapshot_every > 0.0 && st.t - last.t >= cfg.snapshot_every * (1.0 - 1e-9),
        };
        if (snap_due || o.is_final) && snapshots.last().is_none_or(|s| s.t != st.t) {
            snapshots.push(st.clone());
        }
        if let Some(p) = &prev {
            if p.sup_distance(st) > settle_tol {
                last_unsettled_t = Some(st.t);
            }
        }
        prev = Some(st.clone());
        if st.t >= window_start {
            tail.push(st.clone());
        }
        if let Some(cb) = progress.as_mut() {
            cb(st.t, t_end);
        }
    };
    let scheme = SchemeConfig { t_end, ..cfg.scheme };
    let summary = run(initial.clone(), &grid, &cfg.params, &scheme, cfg.cadence, &mut [&mut observer])
        .map_err(|e| CliError::Solver(e.to_string()))?;

    let u0_mass = integrate(&initial.u, &grid);
    let w0_mass = integrate(&initial.w, &grid);
    let traj = TrajectorySummary {
        grid,
        t_end: t_end - t0,
        tail,
        u0_mass,
        w0_mass,
        consumption: summary.consumption,
        last_unsettled_t,
    };
    let asymptotics = classify_asymptotics(&traj, &cfg.params, &cfg.diagnostics.thresholds);
    let metrics = pattern_metrics(&summary.state.u, &grid);

    let total = summary.ledger.initial_total;
    let w_final = integrate(&summary.state.w, &grid);
    let checks = Checks {
        ledger_ok: (cfg.params.theta == 0.0).then(|| summary.max_ledger_residual <= LEDGER_TOL * total.max(1.0)),
        max_ledger_residual: summary.max_ledger_residual,
        w_monotone: summary.w_monotone.ok,
        w_monotone_first_violation: summary.w_monotone.first_violation,
        consumption_ok: consumption_bound_check(summary.consumption, w0_mass),
        w_balance_rel: w_mass_balance(w_final, summary.consumption, w0_mass).abs() / w0_mass.max(1.0),
        late_growth: watch.late_growth(),
        envelope,
        envelope_warnings: watch.warnings.len(),
    };

    let u_star = asymptotics.u_star_pred;
    let stability =
        stability_report(&cfg.params, u_star, cfg.length, cfg.diagnostics.n_max).map_err(|e| e.to_string());

    Ok(Execution {
        config: cfg.clone(),
        grid,
        initial,
        hypotheses,
        summary,
        series,
        snapshots,
        asymptotics,
        metrics,
        watch,
        checks,
        stability,
    })
}

fn write_file(path: &Path, contents: &str) -> io::Result<()> {
    fs::write(path, contents)
}

/// Config text with a provenance header; parses back to the same config.
pub fn manifest_text(cfg: &RunConfig, command: &str) -> String {
    let mut s = String::new();
    writeln!(s, "# motility {}", env!("CARGO_PKG_VERSION")).unwrap();
    writeln!(s, "# command: {command}").unwrap();
    writeln!(s, "# reproduce with: motility {command} <this file>").unwrap();
    s.push_str(&cfg.to_text());
    s
}

fn metrics_text(m: &PatternMetrics) -> String {
    let mut s = String::new();
    writeln!(s, "amplitude={:.6e}", m.amplitude).unwrap();
    writeln!(s, "dominant_mode={}", m.dominant_mode.map_or("NA".into(), |n| n.to_string())).unwrap();
    writeln!(s, "peak_count={}", m.peak_count).unwrap();
    let spec: Vec<String> = m.mode_spectrum.iter().map(|c| format!("{c:.6e}")).collect();
    writeln!(s, "mode_spectrum={}", spec.join(",")).unwrap();
    s
}

fn hypotheses_text(h: &HypothesisReport) -> String {
    let mut s = String::new();
    writeln!(s, "h1_ok={}", h.h1_ok).unwrap();
    writeln!(s, "gamma_lo={:.6e}\ngamma_hi={:.6e}\neta_est={:.6e}", h.gamma_lo, h.gamma_hi, h.eta_est).unwrap();
    writeln!(s, "h2_ok={}", h.h2_ok).unwrap();
    writeln!(s, "h2_warnings={}", h.h2_warnings.join(";")).unwrap();
    writeln!(s, "v_max={:.6e}\nw_max={:.6e}\nsamples={}", h.v_max, h.w_max, h.samples).unwrap();
    s
}

/// Writes the time series, snapshots and reports of `exe` into `dir`.
pub fn write_artifacts(exe: &Execution, dir: &Path) -> io::Result<()> {
    fs::create_dir_all(dir.join("snapshots"))?;

    let mut ts = BufWriter::new(fs::File::create(dir.join("timeseries.csv"))?);
    writeln!(ts, "{TIMESERIES_HEADER}")?;
    for row in &exe.series {
        writeln!(ts, "{}", row.to_csv())?;
    }
    ts.flush()?;

    for (i, snap) in exe.snapshots.iter().enumerate() {
        let f = BufWriter::new(fs::File::create(dir.join("snapshots").join(format!("snap_{i:05}.csv")))?);
        write_snapshot(f, snap, &exe.grid)?;
    }

    let mut asym = exe.asymptotics.to_text();
    asym.push_str(&metrics_text(&exe.metrics));
    write_file(&dir.join("asymptotics.txt"), &asym)?;
    write_file(&dir.join("checks.txt"), &exe.checks.to_text())?;
    write_file(&dir.join("hypotheses.txt"), &hypotheses_text(&exe.hypotheses))?;
    write_stability(&exe.stability, dir)
}

fn write_stability(report: &Result<StabilityReport, String>, dir: &Path) -> io::Result<()> {
    match report {
        Ok(r) => {
            write_file(&dir.join("stability.txt"), &r.to_text())?;
            write_file(&dir.join("stability_modes.csv"), &r.modes_csv())
        }
        Err(msg) => write_file(&dir.join("stability.txt"), &format!("error={msg}\n")),
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct CliOptions {
    pub quiet: bool,
}

fn progress_printer(quiet: bool, label: String) -> impl FnMut(f64, f64) {
    let mut next = 0.0;
    move |t, t_end| {
        if quiet || t_end <= 0.0 {
            return;
        }
        let frac = t / t_end;
        if frac >= next {
            eprintln!("[{label}] t = {t:.3} / {t_end} ({:.0}%)", 100.0 * frac);
            next = (frac * 10.0).floor() / 10.0 + 0.1;
        }
    }
}

/// `run <config>`: executes one configuration and writes every artifact
/// into `cfg.out_dir`.
pub fn cmd_run(cfg: &RunConfig, opts: CliOptions) -> Result<Execution, CliError> {
    fs::create_dir_all(&cfg.out_dir)?;
    write_file(&cfg.out_dir.join("manifest.txt"), &manifest_text(cfg, "run"))?;
    let mut progress = progress_printer(opts.quiet, "run".into());
    let exe = execute(cfg, Some(&mut progress))?;
    write_artifacts(&exe, &cfg.out_dir)?;
    if !opts.quiet {
        eprintln!("regime: {}", exe.asymptotics.regime);
    }
    Ok(exe)
}

/// `stability <config>`: analysis of `(u*, u*, 0)` with `u*` from the
/// initial masses. Writes nothing when `out` is `None`.
pub fn cmd_stability(cfg: &RunConfig, out: Option<&Path>) -> Result<StabilityReport, CliError> {
    let grid = Grid::new(cfg.length, cfg.cells).map_err(|e| CliError::Config(e.to_string()))?;
    let initial = make_initial_state(&cfg.init, &grid)?;
    let u_star = u_star_from_masses(&initial, &grid, &cfg.params);
    let report = stability_report(&cfg.params, u_star, cfg.length, cfg.diagnostics.n_max).map_err(|e| match e {
        Error::InvalidParameter(m) => CliError::Config(m),
        other => CliError::Config(other.to_string()),
    })?;
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
        write_file(&dir.join("manifest.txt"), &manifest_text(cfg, "stability"))?;
        write_stability(&Ok(report.clone()), dir)?;
    }
    Ok(report)
}

/// One line of the sweep summary.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub index: usize,
    pub params: Vec<(SweepAxis, f64)>,
    pub theta: f64,
    pub unstable: Option<bool>,
    pub fastest_mode: Option<usize>,
    pub fastest_growth: Option<f64>,
    pub regime: Option<Regime>,
    pub settled: Option<bool>,
    pub amplitude_u: Option<f64>,
    pub dominant_mode: Option<usize>,
    pub max_ledger_residual: Option<f64>,
    pub error: Option<String>,
}

impl SweepRow {
    fn column(&self, name: &str) -> String {
        fn o<T: ToString>(x: Option<T>) -> String {
            x.map_or_else(|| "NA".to_string(), |v| v.to_string())
        }
        match name {
            "unstable" => o(self.unstable),
            "fastest_mode" => o(self.fastest_mode),
            "fastest_growth" => o(self.fastest_growth.map(|g| format!("{g:.6e}"))),
            "regime" => o(self.regime.map(|r| r.tag())),
            "settled" => o(self.settled),
            "amplitude_u" => o(self.amplitude_u.map(|a| format!("{a:.6e}"))),
            "dominant_mode" => o(self.dominant_mode),
            "max_ledger_residual" => o(self.max_ledger_residual.map(|r| format!("{r:.6e}"))),
            // commas would break the row
            "error" => self.error.as_deref().unwrap_or("").replace([',', '\n'], ";"),
            _ => String::new(),
        }
    }

    /// Violation of the prediction/observation rule, if any.
    pub fn coherence_violation(&self) -> Option<String> {
        let (unstable, regime) = (self.unstable?, self.regime?);
        if !unstable && self.theta == 0.0 && regime != Regime::ConvergeToUStar {
            return Some(format!("cell {}: predicted stable but observed {regime}", self.index));
        }
        if unstable && self.fastest_growth.is_some_and(|g| g > COHERENCE_GROWTH) && regime != Regime::Pattern {
            return Some(format!("cell {}: predicted unstable but observed {regime}", self.index));
        }
        None
    }
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    pub csv: String,
    pub violations: Vec<String>,
}

fn sweep_cell(base: &SweepConfig, index: usize, assignment: &[(SweepAxis, f64)], root: &Path) -> SweepRow {
    let mut row = SweepRow {
        index,
        params: assignment.to_vec(),
        theta: base.base.params.theta,
        unstable: None,
        fastest_mode: None,
        fastest_growth: None,
        regime: None,
        settled: None,
        amplitude_u: None,
        dominant_mode: None,
        max_ledger_residual: None,
        error: None,
    };
    let mut cfg = base.base.clone();
    for (axis, v) in assignment {
        match axis.apply(&cfg, *v) {
            Ok(c) => cfg = c,
            Err(e) => {
                row.error = Some(format!("{}: {e}", axis.name()));
                return row;
            }
        }
    }
    row.theta = cfg.params.theta;
    cfg.out_dir = root.join(format!("cell_{index:04}"));

    match cmd_stability(&cfg, None) {
        Ok(r) => {
            row.unstable = Some(r.unstable);
            row.fastest_mode = r.fastest_mode;
            row.fastest_growth = r.fastest_growth;
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    match cmd_run(&cfg, CliOptions { quiet: true }) {
        Ok(exe) => {
            row.regime = Some(exe.asymptotics.regime);
            row.settled = Some(exe.asymptotics.settled);
            row.amplitude_u = Some(exe.metrics.amplitude);
            row.dominant_mode = exe.metrics.dominant_mode;
            row.max_ledger_residual = Some(exe.summary.max_ledger_residual);
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

/// `sweep <config>`: runs every cell of the cartesian product, each into its
/// own `cell_NNNN` directory, then writes `summary.csv` and `coherence.txt`.
pub fn cmd_sweep(sweep: &SweepConfig, opts: CliOptions) -> Result<SweepOutcome, CliError> {
    if sweep.axes.is_empty() {
        return Err(CliError::Config("sweep axes must be nonempty".into()));
    }
    let root = sweep.base.out_dir.clone();
    fs::create_dir_all(&root)?;
    let manifest = format!("# motility {}\n# command: sweep\n{}", env!("CARGO_PKG_VERSION"), sweep.to_text());
    write_file(&root.join("manifest.txt"), &manifest)?;

    let cells = sweep.cells();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(sweep.workers)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {} workers: {e}", sweep.workers)))?;
    let rows: Vec<SweepRow> = pool.install(|| {
        cells
            .par_iter()
            .enumerate()
            .map(|(i, a)| {
                let row = sweep_cell(sweep, i, a, &root);
                if !opts.quiet {
                    eprintln!("[sweep] cell {i} done: {}", row.column("regime"));
                }
                row
            })
            .collect()
    });

    let columns: Vec<&str> = if sweep.columns.is_empty() {
        crate::config::SWEEP_COLUMNS.to_vec()
    } else {
        sweep.columns.iter().map(String::as_str).collect()
    };
    let mut csv = String::from("cell");
    for (axis, _) in &sweep.axes {
        csv.push(',');
        csv.push_str(axis.name());
    }
    for c in &columns {
        csv.push(',');
        csv.push_str(c);
    }
    csv.push('\n');
    for row in &rows {
        write!(csv, "{}", row.index).unwrap();
        for (_, v) in &row.params {
            write!(csv, ",{v:?}").unwrap();
        }
        for c in &columns {
            write!(csv, ",{}", row.column(c)).unwrap();
        }
        csv.push('\n');
    }
    write_file(&root.join("summary.csv"), &csv)?;

    let violations: Vec<String> = rows.iter().filter_map(SweepRow::coherence_violation).collect();
    let mut coherence = format!("coherent={}\n", violations.is_empty());
    for v in &violations {
        writeln!(coherence, "violation={v}").unwrap();
    }
    write_file(&root.join("coherence.txt"), &coherence)?;
    Ok(SweepOutcome { rows, csv, violations })
}

/// The pattern-forming preset on `(0, 20)`: `γ(v) = 0.1 + 10e^{−v}`,
/// `F(w) = w²/(1+w²)`, `α = 1`, `θ = 0`, base `(4, 4, 0)` with a 1% seeded
/// perturbation, 512 cells, IMEX with `dt = 10⁻³` to `t = 200`.
pub fn fig1_config(dcoef: f64, seed: u64) -> Result<RunConfig, CliError> {
    let params = ModelParams::new(
        1.0,
        0.0,
        dcoef,
        MotilitySpec::exponential(10.0, 0.1, 1.0).map_err(|e| CliError::Config(e.to_string()))?,
        ResponseSpec::hill(1.0, 2.0).map_err(|e| CliError::Config(e.to_string()))?,
    )
    .map_err(|e| CliError::Config(e.to_string()))?;
    Ok(RunConfig {
        params,
        length: 20.0,
        cells: 512,
        scheme: SchemeConfig::imex(200.0, DEFAULT_IMEX_DT),
        init: InitSpec::ConstantPerturbed { base: [4.0, 4.0, 0.0], amplitude: 0.01, seed, perturb_w: false },
        cadence: 1.0,
        snapshot_every: 10.0,
        out_dir: PathBuf::from(format!("out/fig1_d{dcoef}")),
        diagnostics: Default::default(),
    })
}

pub const DEFAULT_SEED: u64 = 42;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;
    use crate::model::MotilityTable;

    fn small(t_end: f64) -> RunConfig {
        let mut c = fig1_config(0.1, 7).unwrap();
        c.cells = 64;
        c.scheme = SchemeConfig::imex(t_end, 1e-2);
        c
    }

    #[test]
    fn zero_horizon_is_undecided_with_one_snapshot() {
        let exe = execute(&small(0.0), None).unwrap();
        assert_eq!(exe.asymptotics.regime, Regime::Undecided);
        assert_eq!(exe.snapshots.len(), 1);
        assert_eq!(exe.snapshots[0], exe.initial);
        assert_eq!(exe.series.len(), 1);
        assert_eq!(exe.checks.ledger_ok, Some(true));
    }

    #[test]
    fn zero_motility_knot_is_a_hypothesis_violation() {
        let mut c = small(1.0);
        c.params.motility = MotilitySpec::Table(MotilityTable::new(vec![0.0, 5.0, 10.0], vec![1.0, 0.0, 0.5]).unwrap());
        let e = execute(&c, None).unwrap_err();
        assert_eq!(e.exit_code(), 3, "{e}");
    }

    #[test]
    fn solver_failures_exit_with_4() {
        let mut c = small(1.0);
        c.cadence = 100.0;
        c.scheme = SchemeConfig { dt: crate::stepper::DtPolicy::Fixed(10.0), ..SchemeConfig::explicit(100.0) };
        let e = execute(&c, None).unwrap_err();
        assert_eq!(e.exit_code(), 4, "{e}");
    }

    #[test]
    fn series_and_snapshots_follow_cadence() {
        let mut c = small(3.0);
        c.cadence = 0.5;
        c.snapshot_every = 1.0;
        let exe = execute(&c, None).unwrap();
        let ts: Vec<f64> = exe.series.iter().map(|r| r.t).collect();
        assert_eq!(ts, vec![0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0]);
        let snaps: Vec<f64> = exe.snapshots.iter().map(|s| s.t).collect();
        assert_eq!(snaps, vec![0.0, 1.0, 2.0, 3.0]);
        assert!(exe.checks.w_monotone && exe.checks.consumption_ok);
    }

    #[test]
    fn artifacts_are_written_and_manifest_reproduces() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = small(2.0);
        c.out_dir = dir.path().join("a");
        let exe = cmd_run(&c, CliOptions { quiet: true }).unwrap();
        for f in ["manifest.txt", "timeseries.csv", "asymptotics.txt", "checks.txt", "stability.txt", "stability_modes.csv"] {
            assert!(c.out_dir.join(f).is_file(), "{f}");
        }
        let manifest = fs::read_to_string(c.out_dir.join("manifest.txt")).unwrap();
        let again = parse_config(&manifest).unwrap();
        assert_eq!(again, c);
        let ts = fs::read_to_string(c.out_dir.join("timeseries.csv")).unwrap();
        assert!(ts.starts_with(TIMESERIES_HEADER));
        assert_eq!(ts.lines().count(), exe.series.len() + 1);
        assert_eq!(fs::read_dir(c.out_dir.join("snapshots")).unwrap().count(), 2);
    }

    #[test]
    fn stability_uses_initial_masses() {
        let r = cmd_stability(&fig1_config(0.1, 1).unwrap(), None).unwrap();
        assert!((r.u_star - 4.0).abs() < 1e-12);
        assert!(r.unstable);
        assert_eq!(r.modes.len(), 25);
        let r = cmd_stability(&fig1_config(100.0, 1).unwrap(), None).unwrap();
        assert!(!r.unstable);
        let mut c = fig1_config(0.1, 1).unwrap();
        c.params.motility = MotilitySpec::constant(1.0).unwrap();
        let r = cmd_stability(&c, None).unwrap();
        assert!(!r.unstable && r.conditions.is_none());
    }

    #[test]
    fn coherence_rule() {
        let mut row = SweepRow {
            index: 0,
            params: vec![],
            theta: 0.0,
            unstable: Some(false),
            fastest_mode: None,
            fastest_growth: None,
            regime: Some(Regime::ConvergeToUStar),
            settled: Some(true),
            amplitude_u: Some(0.0),
            dominant_mode: None,
            max_ledger_residual: Some(0.0),
            error: None,
        };
        assert_eq!(row.coherence_violation(), None);
        row.regime = Some(Regime::Undecided);
        assert!(row.coherence_violation().is_some());
        row.theta = 0.5;
        assert_eq!(row.coherence_violation(), None);
        row.unstable = Some(true);
        row.fastest_growth = Some(0.01);
        assert_eq!(row.coherence_violation(), None);
        row.fastest_growth = Some(0.4);
        assert!(row.coherence_violation().is_some());
        row.regime = Some(Regime::Pattern);
        assert_eq!(row.coherence_violation(), None);
    }
}
