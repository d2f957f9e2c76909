//! The continuous model: motility function, nutrient response, rate
//! constants, and numeric checks of the structural hypotheses on them.
//!
//! The cell equation is `u_t = Δ(γ(v)u) + α u F(w) − θ u`, the signal
//! equation `v_t = D Δv + u − v`, and the nutrient equation
//! `w_t = Δw − u F(w)`, all with zero-flux boundaries.

use crate::error::{Error, Result};

/// Signal-dependent cell motility `γ(v)`.
#[derive(Debug, Clone, PartialEq)]
pub enum MotilitySpec {
    /// `γ(v) = γ₁ + γ₀ e^{−λ v}`.
    Exponential { gamma0: f64, gamma1: f64, lambda: f64 },
    /// `γ(v) = γ_c`.
    Constant { gamma: f64 },
    /// Sampled knots joined by a monotone piecewise cubic.
    Table(MotilityTable),
}

impl MotilitySpec {
    pub fn exponential(gamma0: f64, gamma1: f64, lambda: f64) -> Result<Self> {
        if !(gamma0.is_finite() && gamma0 >= 0.0) {
            return Err(Error::InvalidParameter(format!("gamma0 must be >= 0, got {gamma0}")));
        }
        if !(gamma1.is_finite() && gamma1 > 0.0) {
            return Err(Error::InvalidParameter(format!("gamma1 must be > 0, got {gamma1}")));
        }
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidParameter(format!("lambda must be > 0, got {lambda}")));
        }
        Ok(MotilitySpec::Exponential { gamma0, gamma1, lambda })
    }

    pub fn constant(gamma: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::InvalidParameter(format!("gamma_c must be > 0, got {gamma}")));
        }
        Ok(MotilitySpec::Constant { gamma })
    }

    /// Config tag of the family.
    pub fn family(&self) -> &'static str {
        match self {
            MotilitySpec::Exponential { .. } => "exponential",
            MotilitySpec::Constant { .. } => "constant",
            MotilitySpec::Table(_) => "table",
        }
    }

    /// `γ(v)` for `v ≥ 0`.
    pub fn eval(&self, v: f64) -> Result<f64> {
        check_nonnegative("motility", v)?;
        let g = match self {
            MotilitySpec::Exponential { gamma0, gamma1, lambda } => gamma1 + gamma0 * (-lambda * v).exp(),
            MotilitySpec::Constant { gamma } => *gamma,
            MotilitySpec::Table(t) => t.value(v),
        };
        if g <= 0.0 || g.is_nan() {
            return Err(Error::NonPositiveMotility { at: v, value: g });
        }
        Ok(g)
    }

    /// `γ'(v)` for `v ≥ 0`.
    pub fn eval_deriv(&self, v: f64) -> Result<f64> {
        check_nonnegative("motility derivative", v)?;
        Ok(match self {
            MotilitySpec::Exponential { gamma0, lambda, .. } => -lambda * gamma0 * (-lambda * v).exp(),
            MotilitySpec::Constant { .. } => 0.0,
            MotilitySpec::Table(t) => t.slope(v),
        })
    }

    /// `(γ_lo, γ_hi, η)` for the exponential family, where `η` bounds `|γ'|`.
    pub fn exponential_bounds(&self) -> Option<(f64, f64, f64)> {
        match *self {
            MotilitySpec::Exponential { gamma0, gamma1, lambda } => Some((gamma1, gamma1 + gamma0, lambda * gamma0)),
            _ => None,
        }
    }
}

/// Knot table for a tabulated motility, interpolated with a
/// Fritsch–Carlson style monotone cubic and clamped outside the knots.
#[derive(Debug, Clone, PartialEq)]
pub struct MotilityTable {
    knots: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl MotilityTable {
    /// Knots must be finite and strictly increasing. Knot values are not
    /// required to be positive here; a non-positive value is reported when
    /// the table is evaluated or validated.
    pub fn new(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if knots.len() != values.len() {
            return Err(Error::InvalidParameter(format!(
                "table has {} knots but {} values",
                knots.len(),
                values.len()
            )));
        }
        if knots.len() < 2 {
            return Err(Error::InvalidParameter("table needs at least two knots".into()));
        }
        if knots.iter().chain(&values).any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("table entries must be finite".into()));
        }
        if knots.windows(2).any(|p| p[1] <= p[0]) {
            return Err(Error::InvalidParameter("table knots must be strictly increasing".into()));
        }
        let slopes = pchip_slopes(&knots, &values);
        Ok(MotilityTable { knots, values, slopes })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn segment(&self, v: f64) -> Option<usize> {
        let n = self.knots.len();
        if v <= self.knots[0] || v >= self.knots[n - 1] {
            return None;
        }
        // first knot strictly greater than v, minus one
        Some(self.knots.partition_point(|&k| k <= v) - 1)
    }

    fn value(&self, v: f64) -> f64 {
        let n = self.knots.len();
        match self.segment(v) {
            None if v <= self.knots[0] => self.values[0],
            None => self.values[n - 1],
            Some(k) => {
                let h = self.knots[k + 1] - self.knots[k];
                let t = (v - self.knots[k]) / h;
                let (t2, t3) = (t * t, t * t * t);
                (2.0 * t3 - 3.0 * t2 + 1.0) * self.values[k]
                    + (t3 - 2.0 * t2 + t) * h * self.slopes[k]
                    + (-2.0 * t3 + 3.0 * t2) * self.values[k + 1]
                    + (t3 - t2) * h * self.slopes[k + 1]
            }
        }
    }

    fn slope(&self, v: f64) -> f64 {
        match self.segment(v) {
            None => 0.0,
            Some(k) => {
                let h = self.knots[k + 1] - self.knots[k];
                let t = (v - self.knots[k]) / h;
                let t2 = t * t;
                (6.0 * t2 - 6.0 * t) / h * self.values[k]
                    + (3.0 * t2 - 4.0 * t + 1.0) * self.slopes[k]
                    + (-6.0 * t2 + 6.0 * t) / h * self.values[k + 1]
                    + (3.0 * t2 - 2.0 * t) * self.slopes[k + 1]
            }
        }
    }
}

fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|p| p[1] - p[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
    if n == 2 {
        return vec![delta[0]; 2];
    }
    let mut d = vec![0.0; n];
    for k in 1..n - 1 {
        if delta[k - 1] * delta[k] > 0.0 {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            d[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
        }
    }
    d[0] = pchip_end_slope(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = pchip_end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    d
}

fn pchip_end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if s.signum() != d0.signum() || d0 == 0.0 {
        0.0
    } else if d0.signum() != d1.signum() && s.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        s
    }
}

/// Nutrient functional response `F(w)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ResponseSpec {
    /// `F(w) = w`.
    Linear,
    /// `F(w) = w / (λ + w)`.
    Michaelis { lambda: f64 },
    /// `F(w) = w^m / (λ + w^m)`.
    Hill { lambda: f64, m: f64 },
}

impl ResponseSpec {
    pub fn michaelis(lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidParameter(format!("response lambda must be > 0, got {lambda}")));
        }
        Ok(ResponseSpec::Michaelis { lambda })
    }

    pub fn hill(lambda: f64, m: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidParameter(format!("response lambda must be > 0, got {lambda}")));
        }
        if !(m.is_finite() && m > 1.0) {
            return Err(Error::InvalidParameter(format!("hill exponent must be > 1, got {m}")));
        }
        Ok(ResponseSpec::Hill { lambda, m })
    }

    pub fn family(&self) -> &'static str {
        match self {
            ResponseSpec::Linear => "linear",
            ResponseSpec::Michaelis { .. } => "michaelis",
            ResponseSpec::Hill { .. } => "hill",
        }
    }

    /// `F(w)` for `w ≥ 0`; `F(0)` is exactly zero for every family.
    pub fn eval(&self, w: f64) -> Result<f64> {
        check_nonnegative("response", w)?;
        Ok(self.eval_unchecked(w))
    }

    pub fn eval_deriv(&self, w: f64) -> Result<f64> {
        check_nonnegative("response derivative", w)?;
        Ok(match *self {
            ResponseSpec::Linear => 1.0,
            ResponseSpec::Michaelis { lambda } => lambda / ((lambda + w) * (lambda + w)),
            ResponseSpec::Hill { lambda, m } => {
                if w == 0.0 {
                    0.0
                } else {
                    let wm = w.powf(m);
                    lambda * m * wm / w / ((lambda + wm) * (lambda + wm))
                }
            }
        })
    }

    /// `F(w)` without the sign check. Callers guarantee `w ≥ −ε` and tiny
    /// negative arguments are treated as zero.
    pub(crate) fn eval_unchecked(&self, w: f64) -> f64 {
        if w <= 0.0 {
            return 0.0;
        }
        match *self {
            ResponseSpec::Linear => w,
            ResponseSpec::Michaelis { lambda } => w / (lambda + w),
            ResponseSpec::Hill { lambda, m } => {
                let wm = if m == 2.0 { w * w } else { w.powf(m) };
                wm / (lambda + wm)
            }
        }
    }
}

/// Rate constants and constitutive functions of the model.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    /// Nutrient-to-cell conversion rate `α ≥ 0`.
    pub alpha: f64,
    /// Cell death rate `θ ≥ 0`.
    pub theta: f64,
    /// Signal diffusivity `D > 0`.
    pub dcoef: f64,
    pub motility: MotilitySpec,
    pub response: ResponseSpec,
}

impl ModelParams {
    pub fn new(alpha: f64, theta: f64, dcoef: f64, motility: MotilitySpec, response: ResponseSpec) -> Result<Self> {
        let p = ModelParams { alpha, theta, dcoef, motility, response };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(Error::InvalidParameter(format!("alpha must be >= 0, got {}", self.alpha)));
        }
        if !(self.theta.is_finite() && self.theta >= 0.0) {
            return Err(Error::InvalidParameter(format!("theta must be >= 0, got {}", self.theta)));
        }
        if !(self.dcoef.is_finite() && self.dcoef > 0.0) {
            return Err(Error::InvalidParameter(format!("dcoef must be > 0, got {}", self.dcoef)));
        }
        Ok(())
    }

    /// The pattern-forming setup: `γ(v) = 0.1 + 10e^{−v}`,
    /// `F(w) = w²/(1+w²)`, `α = 1`, `θ = 0`.
    pub fn fig1(dcoef: f64) -> Result<Self> {
        ModelParams::new(
            1.0,
            0.0,
            dcoef,
            MotilitySpec::exponential(10.0, 0.1, 1.0)?,
            ResponseSpec::hill(1.0, 2.0)?,
        )
    }
}

/// Outcome of sampling `γ` and `F` over finite ranges.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisReport {
    pub h1_ok: bool,
    pub gamma_lo: f64,
    pub gamma_hi: f64,
    pub eta_est: f64,
    pub h2_ok: bool,
    pub h2_warnings: Vec<String>,
    pub v_max: f64,
    pub w_max: f64,
    pub samples: usize,
}

impl HypothesisReport {
    pub fn ok(&self) -> bool {
        self.h1_ok && self.h2_ok
    }
}

pub const DEFAULT_HYPOTHESIS_SAMPLES: usize = 10_001;

/// Samples `γ` on `[0, v_max]` and `F` on `[0, w_max]` at `n_samples`
/// uniform points each.
///
/// Motility passes when it stays positive and finite with a finite slope.
/// The response passes when `F(0) = 0`, `F > 0` away from zero and the
/// samples are nondecreasing. A vanishing `F'(0)` is only a warning: the
/// Hill family with `m > 1` has it and is used for the pattern experiments.
pub fn validate_hypotheses(params: &ModelParams, v_max: f64, w_max: f64, n_samples: usize) -> Result<HypothesisReport> {
    if !(v_max.is_finite() && v_max > 0.0) || !(w_max.is_finite() && w_max > 0.0) {
        return Err(Error::InvalidRange(format!("sample bounds must be positive, got v_max={v_max}, w_max={w_max}")));
    }
    if n_samples < 2 {
        return Err(Error::InvalidRange(format!("need at least 2 samples, got {n_samples}")));
    }
    let step = |max: f64, i: usize| max * i as f64 / (n_samples - 1) as f64;

    let mut h1_ok = true;
    let mut gamma_lo = f64::INFINITY;
    let mut gamma_hi = f64::NEG_INFINITY;
    let mut eta_est: f64 = 0.0;
    for i in 0..n_samples {
        let v = step(v_max, i);
        let g = match params.motility.eval(v) {
            Ok(g) => g,
            Err(Error::NonPositiveMotility { value, .. }) => {
                h1_ok = false;
                value
            }
            Err(_) => {
                h1_ok = false;
                f64::NAN
            }
        };
        if g.is_finite() {
            gamma_lo = gamma_lo.min(g);
            gamma_hi = gamma_hi.max(g);
        } else {
            h1_ok = false;
        }
        match params.motility.eval_deriv(v) {
            Ok(d) if d.is_finite() => eta_est = eta_est.max(d.abs()),
            _ => h1_ok = false,
        }
    }
    if let MotilitySpec::Table(t) = &params.motility {
        // uniform samples can step over a knot
        for &g in t.values() {
            gamma_lo = gamma_lo.min(g);
            gamma_hi = gamma_hi.max(g);
            if g <= 0.0 {
                h1_ok = false;
            }
        }
    }
    if gamma_lo > gamma_hi {
        gamma_lo = 0.0;
        gamma_hi = 0.0;
    }

    let mut h2_ok = true;
    let mut h2_warnings = Vec::new();
    let f0 = params.response.eval(0.0)?;
    if f0 != 0.0 {
        h2_ok = false;
    }
    let mut prev = f0;
    for i in 1..n_samples {
        let f = params.response.eval(step(w_max, i))?;
        if !f.is_finite() || f <= 0.0 || f < prev {
            h2_ok = false;
        }
        prev = f;
    }
    if params.response.eval_deriv(0.0)? == 0.0 {
        h2_warnings.push("F'(0)=0".to_string());
    }

    Ok(HypothesisReport {
        h1_ok,
        gamma_lo,
        gamma_hi,
        eta_est,
        h2_ok,
        h2_warnings,
        v_max,
        w_max,
        samples: n_samples,
    })
}

/// Constants of the uniform-in-time bound, which are not known in closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeConstants {
    pub c1: f64,
    pub c2: f64,
}

impl Default for EnvelopeConstants {
    fn default() -> Self {
        EnvelopeConstants { c1: 1.0, c2: 1.0 }
    }
}

/// `M = C₁(1+α)¹³(1+1/D)¹² exp(C₂(1+α)⁶(1+1/D)⁴)`, the sup-norm envelope
/// for `u`. Advisory only; may overflow to infinity for small `D`.
pub fn boundedness_envelope(params: &ModelParams, constants: EnvelopeConstants) -> Result<f64> {
    let EnvelopeConstants { c1, c2 } = constants;
    if !(c1.is_finite() && c1 > 0.0) || !(c2.is_finite() && c2 >= 0.0) {
        return Err(Error::InvalidParameter(format!("envelope constants must satisfy c1 > 0, c2 >= 0, got ({c1}, {c2})")));
    }
    let a = 1.0 + params.alpha;
    let d = 1.0 + 1.0 / params.dcoef;
    Ok(c1 * a.powi(13) * d.powi(12) * (c2 * a.powi(6) * d.powi(4)).exp())
}

fn check_nonnegative(what: &'static str, x: f64) -> Result<()> {
    if x < 0.0 || x.is_nan() {
        Err(Error::NegativeInput { what, value: x })
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig1_gamma() -> MotilitySpec {
        MotilitySpec::exponential(10.0, 0.1, 1.0).unwrap()
    }

    #[test]
    fn exponential_motility_values() {
        let g = fig1_gamma();
        assert_eq!(g.eval(0.0).unwrap(), 10.1);
        assert_eq!(g.eval(1e6).unwrap(), 0.1);
        // 0.1 + 10 e^{-4}, mpmath at 40 digits
        assert!((g.eval(4.0).unwrap() - 0.283_156_388_887_341_8).abs() < 1e-15);
        assert!(matches!(g.eval(-1.0), Err(Error::NegativeInput { .. })));
    }

    #[test]
    fn exponential_motility_derivative() {
        let g = fig1_gamma();
        assert_eq!(g.eval_deriv(0.0).unwrap(), -10.0);
        let h = 1e-6;
        let fd = (g.eval(4.0 + h).unwrap() - g.eval(4.0 - h).unwrap()) / (2.0 * h);
        let d = g.eval_deriv(4.0).unwrap();
        assert!((d - fd).abs() < 1e-8);
        assert!((d + 0.183_156_388_887_341_8).abs() < 1e-15);
        assert_eq!(MotilitySpec::constant(2.0).unwrap().eval_deriv(7.0).unwrap(), 0.0);
    }

    #[test]
    fn response_families() {
        let hill = ResponseSpec::hill(1.0, 2.0).unwrap();
        assert_eq!(hill.eval(0.0).unwrap(), 0.0);
        assert_eq!(hill.eval(1.0).unwrap(), 0.5);
        assert_eq!(ResponseSpec::Linear.eval(3.7).unwrap(), 3.7);
        assert!(ResponseSpec::Linear.eval(-0.1).is_err());
        assert_eq!(hill.eval_deriv(0.0).unwrap(), 0.0);
        assert!((ResponseSpec::michaelis(2.0).unwrap().eval_deriv(0.0).unwrap() - 0.5).abs() < 1e-15);
        assert!(ResponseSpec::hill(1.0, 1.0).is_err());
    }

    #[test]
    fn response_derivatives_match_finite_differences() {
        let h = 1e-5;
        for spec in [
            ResponseSpec::Linear,
            ResponseSpec::michaelis(0.7).unwrap(),
            ResponseSpec::hill(1.0, 2.0).unwrap(),
            ResponseSpec::hill(2.5, 3.5).unwrap(),
        ] {
            for i in 1..200 {
                let w = 0.05 * i as f64;
                let fd = (spec.eval(w + h).unwrap() - spec.eval(w - h).unwrap()) / (2.0 * h);
                assert!((spec.eval_deriv(w).unwrap() - fd).abs() < 1e-6, "{spec:?} at {w}");
            }
        }
    }

    #[test]
    fn hypotheses_for_fig1_warn_on_flat_response() {
        let p = ModelParams::fig1(0.1).unwrap();
        let r = validate_hypotheses(&p, 50.0, 10.0, DEFAULT_HYPOTHESIS_SAMPLES).unwrap();
        assert!(r.h1_ok && r.h2_ok);
        assert_eq!(r.h2_warnings, vec!["F'(0)=0".to_string()]);
        assert!(r.gamma_lo >= 0.1 && r.gamma_hi <= 10.1 && r.gamma_lo <= r.gamma_hi);
        assert!(r.eta_est <= 10.0 + 1e-12);
    }

    #[test]
    fn hypotheses_for_constants_are_clean() {
        let p = ModelParams::new(1.0, 0.0, 1.0, MotilitySpec::constant(1.0).unwrap(), ResponseSpec::Linear).unwrap();
        let r = validate_hypotheses(&p, 10.0, 10.0, 101).unwrap();
        assert!(r.ok());
        assert!(r.h2_warnings.is_empty());
        assert_eq!((r.gamma_lo, r.gamma_hi, r.eta_est), (1.0, 1.0, 0.0));
    }

    #[test]
    fn hypotheses_reject_zero_knot() {
        let table = MotilityTable::new(vec![0.0, 1.0, 2.0, 3.0], vec![2.0, 1.0, 0.0, 0.5]).unwrap();
        let p = ModelParams::new(1.0, 0.0, 1.0, MotilitySpec::Table(table), ResponseSpec::Linear).unwrap();
        let r = validate_hypotheses(&p, 3.0, 1.0, 301).unwrap();
        assert!(!r.h1_ok);
        assert!(r.h2_ok);
        assert!(r.gamma_lo <= 0.0);
    }

    #[test]
    fn hypotheses_reject_bad_ranges() {
        let p = ModelParams::fig1(0.1).unwrap();
        assert!(matches!(validate_hypotheses(&p, 0.0, 1.0, 10), Err(Error::InvalidRange(_))));
        assert!(matches!(validate_hypotheses(&p, 1.0, 1.0, 1), Err(Error::InvalidRange(_))));
    }

    #[test]
    fn table_interpolates_monotonically_and_clamps() {
        let t = MotilityTable::new(vec![0.0, 1.0, 2.0, 4.0], vec![5.0, 2.0, 1.5, 1.0]).unwrap();
        let g = MotilitySpec::Table(t);
        assert_eq!(g.eval(0.0).unwrap(), 5.0);
        assert_eq!(g.eval(2.0).unwrap(), 1.5);
        assert_eq!(g.eval(9.0).unwrap(), 1.0);
        assert_eq!(g.eval_deriv(9.0).unwrap(), 0.0);
        let mut prev = f64::INFINITY;
        for i in 0..=400 {
            let v = 0.01 * i as f64;
            let x = g.eval(v).unwrap();
            assert!(x <= prev + 1e-14 && x > 0.0);
            prev = x;
        }
        let h = 1e-6;
        for v in [0.3, 1.2, 2.5, 3.9] {
            let fd = (g.eval(v + h).unwrap() - g.eval(v - h).unwrap()) / (2.0 * h);
            assert!((g.eval_deriv(v).unwrap() - fd).abs() < 1e-6);
        }
    }

    #[test]
    fn table_rejects_bad_knots() {
        assert!(MotilityTable::new(vec![0.0], vec![1.0]).is_err());
        assert!(MotilityTable::new(vec![0.0, 0.0], vec![1.0, 2.0]).is_err());
        assert!(MotilityTable::new(vec![0.0, 1.0], vec![1.0]).is_err());
    }

    #[test]
    fn params_reject_negative_rates() {
        let g = MotilitySpec::constant(1.0).unwrap();
        assert!(ModelParams::new(-1.0, 0.0, 1.0, g.clone(), ResponseSpec::Linear).is_err());
        assert!(ModelParams::new(1.0, -1.0, 1.0, g.clone(), ResponseSpec::Linear).is_err());
        assert!(ModelParams::new(1.0, 0.0, 0.0, g, ResponseSpec::Linear).is_err());
    }

    #[test]
    fn envelope_closed_form() {
        let g = MotilitySpec::constant(1.0).unwrap();
        let p = |alpha, d| ModelParams::new(alpha, 0.0, d, g.clone(), ResponseSpec::Linear).unwrap();
        let m = boundedness_envelope(&p(0.0, 1e300), EnvelopeConstants { c1: 1.0, c2: 1.0 }).unwrap();
        assert!((m - std::f64::consts::E).abs() < 1e-15);
        let m = boundedness_envelope(&p(1.0, 1.0), EnvelopeConstants { c1: 1.0, c2: 0.0 }).unwrap();
        assert_eq!(m, 33_554_432.0);
        let m = boundedness_envelope(&p(0.0, 1.0), EnvelopeConstants { c1: 2.0, c2: 0.0 }).unwrap();
        assert_eq!(m, 8192.0);
        assert!(boundedness_envelope(&p(0.0, 1.0), EnvelopeConstants { c1: 0.0, c2: 1.0 }).is_err());
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn exponential_bounds_hold(g0 in 0.0..50.0f64, g1 in 0.01..5.0f64, lam in 0.05..5.0f64, v in 0.0..100.0f64) {
            let spec = MotilitySpec::exponential(g0, g1, lam).unwrap();
            let (lo, hi, eta) = spec.exponential_bounds().unwrap();
            let g = spec.eval(v).unwrap();
            prop_assert!(lo <= g && g <= hi);
            prop_assert!(spec.eval_deriv(v).unwrap().abs() <= eta);
        }

        #[test]
        fn exponential_is_nonincreasing(g0 in 0.0..50.0f64, g1 in 0.01..5.0f64, lam in 0.05..5.0f64,
                                        a in 0.0..50.0f64, b in 0.0..50.0f64) {
            let spec = MotilitySpec::exponential(g0, g1, lam).unwrap();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(spec.eval(hi).unwrap() <= spec.eval(lo).unwrap());
        }

        #[test]
        fn motility_derivative_matches_fd(g0 in 0.0..20.0f64, g1 in 0.01..5.0f64, lam in 0.05..3.0f64, v in 0.01..20.0f64) {
            let spec = MotilitySpec::exponential(g0, g1, lam).unwrap();
            let h = 1e-5;
            let fd = (spec.eval(v + h).unwrap() - spec.eval(v - h).unwrap()) / (2.0 * h);
            prop_assert!((spec.eval_deriv(v).unwrap() - fd).abs() <= 1e-6);
        }

        #[test]
        fn response_vanishes_at_zero(lam in 0.01..10.0f64, m in 1.01..6.0f64) {
            prop_assert_eq!(ResponseSpec::Linear.eval(0.0).unwrap(), 0.0);
            prop_assert_eq!(ResponseSpec::michaelis(lam).unwrap().eval(0.0).unwrap(), 0.0);
            prop_assert_eq!(ResponseSpec::hill(lam, m).unwrap().eval(0.0).unwrap(), 0.0);
        }
    }
}
