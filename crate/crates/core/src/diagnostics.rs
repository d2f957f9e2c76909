//! Runtime checks of the conserved and monotone quantities of the model,
//! long-time regime classification, and pattern metrics.

use std::fmt;
use std::fmt::Write as _;

use crate::grid::{integrate, sup_norm, FieldState, Grid};
use crate::model::ModelParams;

/// Slack allowed when checking that `sup w` never increases.
pub const MONOTONE_SLACK: f64 = 1e-12;

/// Running form of the identity
/// `∫u + α∫w + θ ∫₀ᵗ ∫u = ∫u₀ + α∫w₀`.
///
/// The time integral is accumulated by the trapezoid rule between
/// successive calls to [`MassLedger::record`].
#[derive(Debug, Clone, PartialEq)]
pub struct MassLedger {
    pub alpha: f64,
    pub theta: f64,
    pub initial_total: f64,
    pub initial_u_mass: f64,
    pub initial_w_mass: f64,
    pub current_u_mass: f64,
    pub current_w_mass: f64,
    pub theta_integral: f64,
    pub residual: f64,
    pub last_t: f64,
}

impl MassLedger {
    pub fn new(state: &FieldState, grid: &Grid, params: &ModelParams) -> Self {
        let mu = integrate(&state.u, grid);
        let mw = integrate(&state.w, grid);
        MassLedger {
            alpha: params.alpha,
            theta: params.theta,
            initial_total: mu + params.alpha * mw,
            initial_u_mass: mu,
            initial_w_mass: mw,
            current_u_mass: mu,
            current_w_mass: mw,
            theta_integral: 0.0,
            residual: 0.0,
            last_t: state.t,
        }
    }

    /// Folds in a new observation at `state.t`.
    pub fn record(&mut self, state: &FieldState, grid: &Grid) {
        let mu = integrate(&state.u, grid);
        let mw = integrate(&state.w, grid);
        let dt = state.t - self.last_t;
        if dt > 0.0 {
            self.theta_integral += self.theta * dt * 0.5 * (self.current_u_mass + mu);
        }
        self.last_t = state.t;
        self.current_u_mass = mu;
        self.current_w_mass = mw;
        self.residual = mu + self.alpha * mw + self.theta_integral - self.initial_total;
    }

    pub fn relative_residual(&self) -> f64 {
        self.residual.abs() / self.initial_total.max(1.0)
    }
}

/// Records `state` into the ledger and reports whether
/// `|residual| ≤ tolerance · max(1, initial_total)`.
pub fn ledger_check(state: &FieldState, grid: &Grid, ledger: &mut MassLedger, tolerance: f64) -> bool {
    ledger.record(state, grid);
    ledger.residual.abs() <= tolerance * ledger.initial_total.max(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MonotoneVerdict {
    pub ok: bool,
    pub first_violation: Option<usize>,
    pub violations: usize,
}

/// Passes iff every entry is at most its predecessor plus [`MONOTONE_SLACK`].
pub fn w_monotonicity_check(history: &[f64]) -> MonotoneVerdict {
    let mut t = MonotoneTracker::default();
    for &x in history {
        t.push(x);
    }
    t.verdict()
}

/// Streaming version of [`w_monotonicity_check`].
#[derive(Debug, Clone, Default)]
pub struct MonotoneTracker {
    prev: Option<f64>,
    index: usize,
    violations: usize,
    first: Option<usize>,
}

impl MonotoneTracker {
    pub fn push(&mut self, x: f64) {
        if let Some(p) = self.prev {
            if x > p + MONOTONE_SLACK {
                self.violations += 1;
                self.first.get_or_insert(self.index);
            }
        }
        self.prev = Some(x);
        self.index += 1;
    }

    pub fn verdict(&self) -> MonotoneVerdict {
        MonotoneVerdict {
            ok: self.violations == 0,
            first_violation: self.first,
            violations: self.violations,
        }
    }
}

/// Cumulative consumption `∫₀ᵗ∫ u F(w)` cannot exceed the initial nutrient mass.
pub fn consumption_bound_check(consumption: f64, w0_mass: f64) -> bool {
    consumption <= w0_mass + 1e-10 * w0_mass.max(1.0)
}

/// `|w mass + consumption − w₀ mass|` relative to `max(1, w₀ mass)`.
pub fn w_mass_balance(w_mass: f64, consumption: f64, w0_mass: f64) -> f64 {
    (w_mass + consumption - w0_mass).abs() / w0_mass.max(1.0)
}

/// Tunable thresholds for [`classify_asymptotics`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    /// Sup-norm distance to a predicted constant limit.
    pub eps_conv: f64,
    /// Minimum `max u − min u` for a settled state to count as a pattern.
    pub eps_pat: f64,
    /// Maximum sup-norm variation over the settling window.
    pub settle_tol: f64,
    /// Fraction of the simulated horizon forming the settling window.
    pub settle_window: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { eps_conv: 1e-2, eps_pat: 1e-1, settle_tol: 1e-4, settle_window: 0.05 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    DecayToWStar,
    ConvergeToUStar,
    Pattern,
    Undecided,
}

impl Regime {
    pub fn tag(&self) -> &'static str {
        match self {
            Regime::DecayToWStar => "DECAY_TO_W_STAR",
            Regime::ConvergeToUStar => "CONVERGE_TO_U_STAR",
            Regime::Pattern => "PATTERN",
            Regime::Undecided => "UNDECIDED",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// What the classifier needs to know about a finished run.
#[derive(Debug, Clone)]
pub struct TrajectorySummary {
    pub grid: Grid,
    pub t_end: f64,
    /// Observations inside the settling window, oldest first; the last
    /// entry is the final state.
    pub tail: Vec<FieldState>,
    pub u0_mass: f64,
    pub w0_mass: f64,
    /// `∫₀^{t_end}∫ u F(w)`, accumulated by the scheme.
    pub consumption: f64,
    /// Last observation time at which consecutive observations still
    /// differed by more than the settling tolerance.
    pub last_unsettled_t: Option<f64>,
}

impl TrajectorySummary {
    pub fn final_state(&self) -> Option<&FieldState> {
        self.tail.last()
    }

    /// Largest sup-norm distance from any window observation to the final state.
    pub fn tail_variation(&self) -> Option<f64> {
        let last = self.tail.last()?;
        Some(self.tail.iter().map(|s| s.sup_distance(last)).fold(0.0, f64::max))
    }

    fn window_span(&self) -> f64 {
        match (self.tail.first(), self.tail.last()) {
            (Some(a), Some(b)) => b.t - a.t,
            _ => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoteReport {
    pub regime: Regime,
    pub settled: bool,
    pub tail_variation: f64,
    /// `(∫u₀ + α∫w₀)/|Ω|`.
    pub u_star_pred: f64,
    /// `(∫w₀ − ∫∫uF(w))/|Ω|`; only meaningful when `θ > 0`.
    pub w_star_pred: Option<f64>,
    pub dist_u: f64,
    pub dist_v: f64,
    pub dist_w: f64,
    pub amplitude_u: f64,
    pub settling_time: Option<f64>,
}

impl AsymptoteReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let opt = |x: Option<f64>| x.map_or_else(|| "NA".to_string(), |v| format!("{v:.12e}"));
        writeln!(s, "regime={}", self.regime).unwrap();
        writeln!(s, "settled={}", self.settled).unwrap();
        writeln!(s, "tail_variation={:.6e}", self.tail_variation).unwrap();
        writeln!(s, "u_star_pred={:.12e}", self.u_star_pred).unwrap();
        writeln!(s, "w_star_pred={}", opt(self.w_star_pred)).unwrap();
        writeln!(s, "dist_u={:.6e}", self.dist_u).unwrap();
        writeln!(s, "dist_v={:.6e}", self.dist_v).unwrap();
        writeln!(s, "dist_w={:.6e}", self.dist_w).unwrap();
        writeln!(s, "amplitude_u={:.6e}", self.amplitude_u).unwrap();
        writeln!(s, "settling_time={}", opt(self.settling_time)).unwrap();
        s
    }
}

/// Decides which long-time regime a finished run is in.
///
/// Predicted limits come from the masses, never from the final fields.
/// When `θ > 0` the candidate limit is `(0, 0, w*)`; when `θ = 0` it is
/// `(u*, u*, 0)`. A settled but spatially nonconstant `u` is a pattern;
/// that test runs first so a larger `eps_conv` can never turn a pattern
/// into convergence.
pub fn classify_asymptotics(summary: &TrajectorySummary, params: &ModelParams, th: &Thresholds) -> AsymptoteReport {
    let l = summary.grid.length();
    let u_star = (summary.u0_mass + params.alpha * summary.w0_mass) / l;
    let w_star = (params.theta > 0.0).then(|| (summary.w0_mass - summary.consumption) / l);

    let Some(last) = summary.final_state() else {
        return AsymptoteReport {
            regime: Regime::Undecided,
            settled: false,
            tail_variation: f64::INFINITY,
            u_star_pred: u_star,
            w_star_pred: w_star,
            dist_u: f64::INFINITY,
            dist_v: f64::INFINITY,
            dist_w: f64::INFINITY,
            amplitude_u: 0.0,
            settling_time: None,
        };
    };
    let variation = summary.tail_variation().unwrap_or(f64::INFINITY);
    let settled = summary.t_end > 0.0
        && summary.tail.len() >= 2
        && summary.window_span() > 0.0
        && variation < th.settle_tol;

    let dist = |f: &[f64], c: f64| f.iter().map(|x| (x - c).abs()).fold(0.0, f64::max);
    let (dist_u, dist_v, dist_w) = match w_star {
        Some(ws) => (sup_norm(&last.u), sup_norm(&last.v), dist(&last.w, ws)),
        None => (dist(&last.u, u_star), dist(&last.v, u_star), sup_norm(&last.w)),
    };
    let amplitude_u = last.u.max() - last.u.min();

    let regime = if !settled {
        Regime::Undecided
    } else if amplitude_u > th.eps_pat {
        Regime::Pattern
    } else if dist_u < th.eps_conv && dist_v < th.eps_conv && dist_w < th.eps_conv {
        if w_star.is_some() {
            Regime::DecayToWStar
        } else {
            Regime::ConvergeToUStar
        }
    } else {
        Regime::Undecided
    };

    AsymptoteReport {
        regime,
        settled,
        tail_variation: variation,
        u_star_pred: u_star,
        w_star_pred: w_star,
        dist_u,
        dist_v,
        dist_w,
        amplitude_u,
        settling_time: if settled { Some(summary.last_unsettled_t.unwrap_or(0.0)) } else { None },
    }
}

pub const SPECTRUM_LEN: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct PatternMetrics {
    /// `max u − min u`.
    pub amplitude: f64,
    /// Index `n ≥ 1` of the largest cosine coefficient, or `None` for a
    /// numerically flat field.
    pub dominant_mode: Option<usize>,
    /// Coefficients of `cos(nπx/l)` for `n = 0..64`; entry 0 is the mean.
    pub mode_spectrum: Vec<f64>,
    /// Strict interior local maxima above `min + 5%·amplitude`.
    pub peak_count: usize,
}

/// Projects `u` on the Neumann eigenbasis `cos(nπx/l)`, `n = 0..cells`,
/// and counts peaks.
pub fn pattern_metrics(u: &[f64], grid: &Grid) -> PatternMetrics {
    let n = u.len();
    let (lo, hi) = u.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let amplitude = if n == 0 { 0.0 } else { hi - lo };
    let coeffs = cosine_coefficients(u, grid);

    let floor = 1e-9 * sup_norm(u).max(1.0);
    let dominant_mode = if amplitude <= floor {
        None
    } else {
        let mut best = 1;
        for k in 2..coeffs.len() {
            if coeffs[k].abs() > coeffs[best].abs() {
                best = k;
            }
        }
        Some(best)
    };

    let cut = lo + 0.05 * amplitude;
    let peak_count = if amplitude <= floor {
        0
    } else {
        (1..n.saturating_sub(1)).filter(|&i| u[i] > u[i - 1] && u[i] > u[i + 1] && u[i] > cut).count()
    };

    PatternMetrics {
        amplitude,
        dominant_mode,
        mode_spectrum: coeffs.iter().take(SPECTRUM_LEN).copied().collect(),
        peak_count,
    }
}

/// `c_0 = mean`, `c_k = (2/l) Σ u_i cos(kπx_i/l) dx` for `k = 1..n`.
pub fn cosine_coefficients(u: &[f64], grid: &Grid) -> Vec<f64> {
    let n = u.len();
    let l = grid.length();
    let mut out = vec![0.0; n];
    if n == 0 {
        return out;
    }
    out[0] = integrate(u, grid) / l;
    // cos(kθ_i) by the Chebyshev recurrence in k, one cell at a time
    for (i, &ui) in u.iter().enumerate() {
        let theta = std::f64::consts::PI * grid.center(i) / l;
        let c1 = theta.cos();
        let (mut prev, mut cur) = (1.0, c1);
        for coeff in out.iter_mut().skip(1) {
            *coeff += ui * cur;
            let next = 2.0 * c1 * cur - prev;
            prev = cur;
            cur = next;
        }
    }
    let scale = 2.0 * grid.dx() / l;
    for c in out.iter_mut().skip(1) {
        *c *= scale;
    }
    out
}

/// Tracks the running maximum of `sup u` against the uniform envelope.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundednessWatch {
    pub envelope: f64,
    pub running_max: f64,
    /// `(t, running max)` at every observation.
    pub history: Vec<(f64, f64)>,
    /// `(t, sup u)` whenever the envelope was exceeded.
    pub warnings: Vec<(f64, f64)>,
}

impl BoundednessWatch {
    pub fn new(envelope: f64) -> Self {
        BoundednessWatch { envelope, running_max: 0.0, history: Vec::new(), warnings: Vec::new() }
    }

    /// Returns false when `sup u` exceeds the envelope.
    pub fn observe(&mut self, t: f64, state: &FieldState) -> bool {
        let s = sup_norm(&state.u);
        self.running_max = self.running_max.max(s);
        self.history.push((t, self.running_max));
        if s > self.envelope {
            self.warnings.push((t, s));
            false
        } else {
            true
        }
    }

    /// Relative growth of the running max over the second half of the
    /// observed time span.
    pub fn late_growth(&self) -> f64 {
        let (Some(&(t0, _)), Some(&(t1, end))) = (self.history.first(), self.history.last()) else {
            return 0.0;
        };
        let mid = 0.5 * (t0 + t1);
        let at_mid = self
            .history
            .iter()
            .take_while(|(t, _)| *t <= mid)
            .last()
            .map_or(end, |&(_, m)| m);
        if at_mid > 0.0 {
            (end - at_mid) / at_mid
        } else if end > 0.0 {
            f64::INFINITY
        } else {
            0.0
        }
    }
}

/// `boundedness_watch` as a one-shot check.
pub fn boundedness_watch(state: &FieldState, envelope: f64) -> bool {
    sup_norm(&state.u) <= envelope
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn fig1() -> ModelParams {
        ModelParams::fig1(0.1).unwrap()
    }

    #[test]
    fn ledger_of_cell_free_state_stays_zero() {
        let g = Grid::new(20.0, 32).unwrap();
        let mut st = FieldState::constant(&g, 0.0, 1.0, 2.0);
        let mut p = fig1();
        p.theta = 0.7;
        let mut ledger = MassLedger::new(&st, &g, &p);
        for k in 1..10 {
            st.t = k as f64;
            assert!(ledger_check(&st, &g, &mut ledger, 0.0));
        }
        assert_eq!(ledger.residual, 0.0);
        assert_eq!(ledger.theta_integral, 0.0);
    }

    #[test]
    fn ledger_accumulates_trapezoid() {
        let g = Grid::new(1.0, 4).unwrap();
        let mut p = fig1();
        p.theta = 2.0;
        let mut st = FieldState::constant(&g, 1.0, 0.0, 0.0);
        let mut ledger = MassLedger::new(&st, &g, &p);
        st.t = 0.5;
        st.u = g.constant_field(3.0);
        ledger.record(&st, &g);
        // 2 · 0.5 · (1 + 3)/2
        assert_eq!(ledger.theta_integral, 2.0);
        assert_eq!(ledger.residual, 3.0 + 2.0 - 1.0);
    }

    #[test]
    fn monotone_check_finds_bump() {
        assert!(w_monotonicity_check(&[2.0, 2.0, 2.0]).ok);
        let v = w_monotonicity_check(&[3.0, 2.5, 2.5, 2.6, 2.0, 2.1]);
        assert!(!v.ok);
        assert_eq!(v.first_violation, Some(3));
        assert_eq!(v.violations, 2);
        assert!(w_monotonicity_check(&[1.0, 1.0 + 5e-13]).ok);
    }

    #[test]
    fn consumption_bound() {
        assert!(consumption_bound_check(0.0, 0.0));
        assert!(consumption_bound_check(0.0, 5.0));
        assert!(consumption_bound_check(5.0, 5.0));
        assert!(!consumption_bound_check(5.01, 5.0));
        assert!(w_mass_balance(3.0, 2.0, 5.0) < 1e-15);
    }

    #[test]
    fn flat_field_metrics() {
        let g = Grid::new(20.0, 64).unwrap();
        let m = pattern_metrics(&g.constant_field(4.0), &g);
        assert_eq!(m.amplitude, 0.0);
        assert_eq!(m.dominant_mode, None);
        assert_eq!(m.peak_count, 0);
        assert!((m.mode_spectrum[0] - 4.0).abs() < 1e-14);
        assert_eq!(m.mode_spectrum.len(), SPECTRUM_LEN);
    }

    #[test]
    fn single_eigenmode_metrics() {
        let l = 20.0;
        let g = Grid::new(l, 256).unwrap();
        let u = g.field_from_fn(|x| 4.0 + (3.0 * PI * x / l).cos());
        let m = pattern_metrics(&u, &g);
        assert_eq!(m.dominant_mode, Some(3));
        assert!((m.amplitude - 2.0).abs() < 1e-3);
        assert!((m.mode_spectrum[3] - 1.0).abs() < 1e-12);
        assert!(m.mode_spectrum[2].abs() < 1e-12);
        // interior maximum at x = 2l/3 only; x = 0 is a boundary cell
        assert_eq!(m.peak_count, 1);
    }

    #[test]
    fn eigenmode_index_is_exact_below_quarter_resolution() {
        let l = 7.0;
        let g = Grid::new(l, 128).unwrap();
        for k in 1..32 {
            let u = g.field_from_fn(|x| 1.0 + 0.3 * (k as f64 * PI * x / l).cos());
            assert_eq!(pattern_metrics(&u, &g).dominant_mode, Some(k));
        }
    }

    fn summary(g: Grid, tail: Vec<FieldState>, u0: f64, w0: f64, consumed: f64) -> TrajectorySummary {
        TrajectorySummary {
            grid: g,
            t_end: tail.last().map_or(0.0, |s| s.t),
            tail,
            u0_mass: u0,
            w0_mass: w0,
            consumption: consumed,
            last_unsettled_t: Some(1.0),
        }
    }

    #[test]
    fn classifier_regimes() {
        let g = Grid::new(20.0, 32).unwrap();
        let p = fig1();
        let th = Thresholds::default();
        let at = |s: &FieldState, t: f64| FieldState { t, ..s.clone() };

        let flat = FieldState::constant(&g, 4.0, 4.0, 0.0);
        let r = classify_asymptotics(&summary(g, vec![at(&flat, 9.0), at(&flat, 10.0)], 80.0, 0.0, 0.0), &p, &th);
        assert_eq!(r.regime, Regime::ConvergeToUStar);
        assert_eq!(r.u_star_pred, 4.0);

        let bumpy = FieldState::new(g.field_from_fn(|x| 4.0 + (PI * x / 20.0).cos()), g.constant_field(4.0), g.constant_field(0.0), 0.0);
        let r = classify_asymptotics(&summary(g, vec![at(&bumpy, 9.0), at(&bumpy, 10.0)], 80.0, 0.0, 0.0), &p, &th);
        assert_eq!(r.regime, Regime::Pattern);

        let r = classify_asymptotics(&summary(g, vec![at(&flat, 10.0)], 80.0, 0.0, 0.0), &p, &th);
        assert_eq!(r.regime, Regime::Undecided);

        let mut moving = at(&flat, 10.0);
        moving.u[3] += 1e-3;
        let r = classify_asymptotics(&summary(g, vec![at(&flat, 9.0), moving], 80.0, 0.0, 0.0), &p, &th);
        assert_eq!(r.regime, Regime::Undecided);
        assert!(!r.settled);

        let mut pd = fig1();
        pd.theta = 1.0;
        let decay = FieldState::constant(&g, 0.0, 0.0, 0.75);
        let r = classify_asymptotics(&summary(g, vec![at(&decay, 9.0), at(&decay, 10.0)], 1.0, 40.0, 25.0), &pd, &th);
        assert_eq!(r.regime, Regime::DecayToWStar);
        assert_eq!(r.w_star_pred, Some(0.75));
    }

    #[test]
    fn boundedness_watch_plateau_and_warning() {
        let g = Grid::new(1.0, 4).unwrap();
        let st = FieldState::constant(&g, 4.0, 4.0, 0.0);
        let mut watch = BoundednessWatch::new(100.0);
        for k in 0..10 {
            assert!(watch.observe(k as f64, &st));
        }
        assert_eq!(watch.running_max, 4.0);
        assert_eq!(watch.late_growth(), 0.0);
        let mut low = BoundednessWatch::new(1.0);
        assert!(!low.observe(0.0, &st));
        assert_eq!(low.warnings.len(), 1);
        assert!(!boundedness_watch(&st, 3.9));
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    fn state_from(g: &Grid, amp: f64, t: f64) -> FieldState {
        FieldState::new(
            g.field_from_fn(|x| 4.0 + amp * (x / 3.0).cos()),
            g.constant_field(4.0),
            g.constant_field(0.0),
            t,
        )
    }

    proptest! {
        // Raising eps_conv may only resolve UNDECIDED, never switch between definite regimes.
        #[test]
        fn larger_eps_conv_is_monotone(amp in 0.0..0.3f64, drift in 0.0..2e-4f64, eps in 1e-4..0.2f64) {
            let g = Grid::new(20.0, 32).unwrap();
            let p = ModelParams::fig1(0.1).unwrap();
            let a = state_from(&g, amp, 9.0);
            let mut b = state_from(&g, amp, 10.0);
            b.v[0] += drift;
            let s = TrajectorySummary {
                grid: g, t_end: 10.0, tail: vec![a, b],
                u0_mass: 80.0, w0_mass: 0.0, consumption: 0.0, last_unsettled_t: None,
            };
            let th = Thresholds { eps_conv: eps, ..Thresholds::default() };
            let th2 = Thresholds { eps_conv: 2.0 * eps, ..th };
            let r1 = classify_asymptotics(&s, &p, &th).regime;
            let r2 = classify_asymptotics(&s, &p, &th2).regime;
            prop_assert!(r1 == Regime::Undecided || r1 == r2, "{:?} -> {:?}", r1, r2);
        }
    }
}
