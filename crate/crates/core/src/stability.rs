//! Linear stability of the constant steady states.
//!
//! Perturbing a constant state `(u_c, v_c, w_c)` by `cos(kx) e^{ρt}` gives
//! the matrix
//!
//! ```text
//!        ⎡ −γ(u_c)k²   −u_c γ'(u_c)k²   α u_c F'(0) ⎤
//! M_k =  ⎢     1          −Dk² − 1           0      ⎥
//!        ⎣     0              0        −k² − u_c F'(0) ⎦
//! ```
//!
//! whose eigenvalues are `ρ_w = −k² − u_c F'(0)` and the roots of
//! `ρ² + a₁ρ + a₀ = 0` with `a₁ = 1 + (D + γ)k²` and
//! `a₀ = Dγk⁴ + (γ + u_c γ')k²`. Growth is possible only when
//! `S = γ(u*) + u* γ'(u*) < 0`, for `0 < k² < −S/(Dγ(u*))`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{ModelParams, MotilitySpec};

pub const DEFAULT_N_MAX: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EquilibriumKind {
    /// `(0, 0, 0)`
    Zero,
    /// `(0, 0, u*/α)`
    NutrientOnly,
    /// `(u*, u*, 0)`
    CellOnly,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Equilibrium {
    pub kind: EquilibriumKind,
    pub state: [f64; 3],
    pub eigenvalues: [f64; 3],
    /// Linearly stable when no eigenvalue is positive.
    pub stable: bool,
    /// Number of zero eigenvalues; these are never counted as unstable.
    pub marginal: usize,
}

/// Constant equilibria of the kinetics (no diffusion) with the eigenvalues
/// of their Jacobians.
pub fn ode_equilibria(params: &ModelParams, u_star: f64) -> Result<Vec<Equilibrium>> {
    if !(u_star.is_finite() && u_star >= 0.0) {
        return Err(Error::InvalidParameter(format!("u* must be >= 0, got {u_star}")));
    }
    let make = |kind, state, eigenvalues: [f64; 3]| Equilibrium {
        kind,
        state,
        eigenvalues,
        stable: eigenvalues.iter().all(|&e| e <= 0.0),
        marginal: eigenvalues.iter().filter(|&&e| e == 0.0).count(),
    };
    let fp0 = params.response.eval_deriv(0.0)?;
    let mut out = vec![make(EquilibriumKind::Zero, [0.0; 3], [0.0, -1.0, 0.0])];
    if params.alpha > 0.0 {
        let w = u_star / params.alpha;
        let e = params.alpha * params.response.eval(w)?;
        out.push(make(EquilibriumKind::NutrientOnly, [0.0, 0.0, w], [0.0, -1.0, e]));
    }
    out.push(make(EquilibriumKind::CellOnly, [u_star, u_star, 0.0], [0.0, -1.0, -u_star * fp0]));
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionPoint {
    pub k_sq: f64,
    pub a1: f64,
    pub a0: f64,
    /// Root with the larger real part.
    pub rho_plus: Complex64,
    pub rho_minus: Complex64,
    /// Decoupled nutrient branch `−k² − u_c F'(0)`.
    pub rho_w: f64,
}

impl DispersionPoint {
    pub fn roots(&self) -> [Complex64; 3] {
        [self.rho_plus, self.rho_minus, Complex64::new(self.rho_w, 0.0)]
    }
}

/// Dispersion relation of the constant state `(u_c, u_c, 0)` at `k²`.
pub fn dispersion_at(k_sq: f64, params: &ModelParams, u_c: f64) -> Result<DispersionPoint> {
    if !(k_sq.is_finite() && k_sq >= 0.0) {
        return Err(Error::InvalidParameter(format!("k² must be >= 0, got {k_sq}")));
    }
    let g = params.motility.eval(u_c)?;
    let gp = params.motility.eval_deriv(u_c)?;
    let fp0 = params.response.eval_deriv(0.0)?;
    let d = params.dcoef;
    let a1 = 1.0 + (d + g) * k_sq;
    let a0 = d * g * k_sq * k_sq + (g + u_c * gp) * k_sq;
    let (rho_plus, rho_minus) = quadratic_roots(a1, a0);
    Ok(DispersionPoint { k_sq, a1, a0, rho_plus, rho_minus, rho_w: -k_sq - u_c * fp0 })
}

/// Roots of `ρ² + a₁ρ + a₀`, larger real part first. The real case takes
/// the larger-magnitude root from the formula and the other from `a₀/q`.
fn quadratic_roots(a1: f64, a0: f64) -> (Complex64, Complex64) {
    let disc = a1 * a1 - 4.0 * a0;
    if disc >= 0.0 {
        let q = -0.5 * (a1 + a1.signum() * disc.sqrt());
        if q == 0.0 {
            return (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        }
        let (r1, r2) = (q, a0 / q);
        let (hi, lo) = if r1 >= r2 { (r1, r2) } else { (r2, r1) };
        (Complex64::new(hi, 0.0), Complex64::new(lo, 0.0))
    } else {
        let im = 0.5 * (-disc).sqrt();
        (Complex64::new(-0.5 * a1, im), Complex64::new(-0.5 * a1, -im))
    }
}

/// The matrix `M_k` assembled entry by entry.
pub fn mk_matrix(k_sq: f64, params: &ModelParams, u_c: f64) -> Result<[[f64; 3]; 3]> {
    let g = params.motility.eval(u_c)?;
    let gp = params.motility.eval_deriv(u_c)?;
    let fp0 = params.response.eval_deriv(0.0)?;
    Ok([
        [-g * k_sq, -u_c * gp * k_sq, params.alpha * u_c * fp0],
        [1.0, -params.dcoef * k_sq - 1.0, 0.0],
        [0.0, 0.0, -k_sq - u_c * fp0],
    ])
}

/// Eigenvalues of `M_k` from its characteristic cubic, without using the
/// block structure. Serves as an independent check of [`dispersion_at`].
pub fn mk_eigen_oracle(k_sq: f64, params: &ModelParams, u_c: f64) -> Result<[Complex64; 3]> {
    let m = mk_matrix(k_sq, params, u_c)?;
    let trace = m[0][0] + m[1][1] + m[2][2];
    let minors = m[0][0] * m[1][1] - m[0][1] * m[1][0] + m[0][0] * m[2][2] - m[0][2] * m[2][0] + m[1][1] * m[2][2]
        - m[1][2] * m[2][1];
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    // det(ρI − M) = ρ³ − tr ρ² + minors ρ − det
    Ok(cubic_roots(-trace, minors, -det))
}

/// Roots of the monic cubic `x³ + c2 x² + c1 x + c0`.
fn cubic_roots(c2: f64, c1: f64, c0: f64) -> [Complex64; 3] {
    let p = |x: f64| ((x + c2) * x + c1) * x + c0;
    // Cauchy bound brackets every real root
    let bound = 1.0 + c2.abs().max(c1.abs()).max(c0.abs());
    let (mut lo, mut hi) = (-bound, bound);
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if p(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut r = if p(lo).abs() <= p(hi).abs() { lo } else { hi };
    r = newton_real(r, c2, c1, c0);
    // x³ + c2x² + c1x + c0 = (x − r)(x² + b1 x + b0)
    let b1 = c2 + r;
    let b0 = c1 + r * b1;
    let (q1, q2) = quadratic_roots(b1, b0);
    let polish = |z: Complex64| newton_complex(z, c2, c1, c0);
    [Complex64::new(r, 0.0), polish(q1), polish(q2)]
}

fn newton_real(mut x: f64, c2: f64, c1: f64, c0: f64) -> f64 {
    for _ in 0..8 {
        let f = ((x + c2) * x + c1) * x + c0;
        let df = (3.0 * x + 2.0 * c2) * x + c1;
        if df == 0.0 {
            break;
        }
        let nx = x - f / df;
        let nf = ((nx + c2) * nx + c1) * nx + c0;
        if nf.abs() >= f.abs() {
            break;
        }
        x = nx;
    }
    x
}

fn newton_complex(mut z: Complex64, c2: f64, c1: f64, c0: f64) -> Complex64 {
    let eval = |z: Complex64| ((z + c2) * z + c1) * z + c0;
    for _ in 0..4 {
        let f = eval(z);
        let df = (z * 3.0 + 2.0 * c2) * z + c1;
        if df.norm() == 0.0 {
            break;
        }
        let nz = z - f / df;
        if eval(nz).norm() >= f.norm() {
            break;
        }
        z = nz;
    }
    z
}

/// `γ(u*) + u* γ'(u*)`.
pub fn s_value(params: &ModelParams, u_star: f64) -> Result<f64> {
    Ok(params.motility.eval(u_star)? + u_star * params.motility.eval_deriv(u_star)?)
}

/// Upper end `k̄²` of the unstable band `(0, k̄²)`, or `None` when `S ≥ 0`.
pub fn instability_band(params: &ModelParams, u_star: f64) -> Result<Option<f64>> {
    if !(u_star.is_finite() && u_star > 0.0) {
        return Err(Error::InvalidParameter(format!("u* must be > 0, got {u_star}")));
    }
    let s = s_value(params, u_star)?;
    if s >= 0.0 {
        return Ok(None);
    }
    Ok(Some(-s / (params.dcoef * params.motility.eval(u_star)?)))
}

/// Neumann modes `n ∈ [1, n_max]` with `0 < (nπ/l)² < k̄²`.
pub fn admissible_modes(band_upper: Option<f64>, l: f64, n_max: usize) -> Vec<usize> {
    let Some(kbar) = band_upper else {
        return Vec::new();
    };
    (1..=n_max).filter(|&n| mode_k_sq(n, l) < kbar).collect()
}

pub fn mode_k_sq(n: usize, l: f64) -> f64 {
    let k = n as f64 * PI / l;
    k * k
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeGrowth {
    pub n: usize,
    pub point: DispersionPoint,
}

impl ModeGrowth {
    pub fn growth(&self) -> f64 {
        self.point.rho_plus.re
    }
}

/// Evaluates the dispersion relation on each mode.
pub fn mode_growth(params: &ModelParams, u_star: f64, l: f64, modes: &[usize]) -> Result<Vec<ModeGrowth>> {
    modes
        .iter()
        .map(|&n| Ok(ModeGrowth { n, point: dispersion_at(mode_k_sq(n, l), params, u_star)? }))
        .collect()
}

/// Mode with the largest growth rate; ties go to the smaller index.
pub fn fastest_mode(growth: &[ModeGrowth]) -> Option<&ModeGrowth> {
    growth.iter().fold(None, |best: Option<&ModeGrowth>, m| match best {
        Some(b) if b.growth() >= m.growth() => Some(b),
        _ => Some(m),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatternConditions {
    pub mode: usize,
    /// `u* > 1/λ`
    pub u_star_above: bool,
    /// `(γ₁/γ₀) e^{λu*}`
    pub con1_lhs: f64,
    /// `λu* − 1`
    pub con1_rhs: f64,
    pub con1_ok: bool,
    /// `D`
    pub con2_lhs: f64,
    /// `−(S/γ(u*)) · l²/(nπ)²`
    pub con2_rhs: f64,
    pub con2_ok: bool,
}

/// Literal evaluation of the two pattern conditions for exponential motility.
pub fn check_pattern_conditions(params: &ModelParams, u_star: f64, l: f64, n: usize) -> Result<PatternConditions> {
    let MotilitySpec::Exponential { gamma0, gamma1, lambda } = params.motility else {
        return Err(Error::WrongFamily(params.motility.family()));
    };
    let u_star_above = u_star > 1.0 / lambda;
    let con1_lhs = gamma1 / gamma0 * (lambda * u_star).exp();
    let con1_rhs = lambda * u_star - 1.0;
    let decay = gamma0 * (-lambda * u_star).exp();
    let s = gamma1 + decay * (1.0 - lambda * u_star);
    let g = gamma1 + decay;
    let con2_rhs = -s / g * l * l / (n as f64 * PI).powi(2);
    Ok(PatternConditions {
        mode: n,
        u_star_above,
        con1_lhs,
        con1_rhs,
        con1_ok: u_star_above && con1_lhs < con1_rhs,
        con2_lhs: params.dcoef,
        con2_rhs,
        con2_ok: params.dcoef < con2_rhs,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub u_star: f64,
    pub length: f64,
    pub s_value: f64,
    pub band_upper: Option<f64>,
    pub modes: Vec<ModeGrowth>,
    pub fastest_mode: Option<usize>,
    pub fastest_growth: Option<f64>,
    /// `None` for non-exponential motility.
    pub conditions: Option<PatternConditions>,
    pub unstable: bool,
}

/// Full linear analysis of `(u*, u*, 0)` on `(0, l)`.
pub fn stability_report(params: &ModelParams, u_star: f64, l: f64, n_max: usize) -> Result<StabilityReport> {
    let s = s_value(params, u_star)?;
    let band = instability_band(params, u_star)?;
    let modes = mode_growth(params, u_star, l, &admissible_modes(band, l, n_max))?;
    let fastest = fastest_mode(&modes).copied();
    let conditions = match check_pattern_conditions(params, u_star, l, 1) {
        Ok(c) => Some(c),
        Err(Error::WrongFamily(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(StabilityReport {
        u_star,
        length: l,
        s_value: s,
        band_upper: band,
        unstable: s < 0.0 && !modes.is_empty(),
        fastest_mode: fastest.map(|m| m.n),
        fastest_growth: fastest.map(|m| m.growth()),
        modes,
        conditions,
    })
}

impl StabilityReport {
    /// Flat `key=value` block.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let na = || "NA".to_string();
        writeln!(s, "u_star={:.12e}", self.u_star).unwrap();
        writeln!(s, "length={:.12e}", self.length).unwrap();
        writeln!(s, "s_value={:.12e}", self.s_value).unwrap();
        writeln!(s, "band_upper={}", self.band_upper.map_or_else(na, |b| format!("{b:.12e}"))).unwrap();
        writeln!(s, "admissible_modes={}", self.modes.len()).unwrap();
        writeln!(s, "fastest_mode={}", self.fastest_mode.map_or_else(na, |n| n.to_string())).unwrap();
        writeln!(s, "fastest_growth={}", self.fastest_growth.map_or_else(na, |g| format!("{g:.12e}"))).unwrap();
        match &self.conditions {
            Some(c) => {
                writeln!(s, "con1_ok={}", c.con1_ok).unwrap();
                writeln!(s, "con1_lhs={:.12e}", c.con1_lhs).unwrap();
                writeln!(s, "con1_rhs={:.12e}", c.con1_rhs).unwrap();
                writeln!(s, "con2_ok={}", c.con2_ok).unwrap();
                writeln!(s, "con2_lhs={:.12e}", c.con2_lhs).unwrap();
                writeln!(s, "con2_rhs={:.12e}", c.con2_rhs).unwrap();
            }
            None => {
                writeln!(s, "con1_ok=NA").unwrap();
                writeln!(s, "con2_ok=NA").unwrap();
            }
        }
        writeln!(s, "unstable={}", self.unstable).unwrap();
        s
    }

    /// One CSV row per admissible mode.
    pub fn modes_csv(&self) -> String {
        let mut s = String::from("n,k_sq,a1,a0,re_rho_plus,im_rho_plus,rho_w\n");
        for m in &self.modes {
            let p = &m.point;
            writeln!(
                s,
                "{},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}",
                m.n, p.k_sq, p.a1, p.a0, p.rho_plus.re, p.rho_plus.im, p.rho_w
            )
            .unwrap();
        }
        s
    }
}


#[cfg(test)]
mod props {
    use super::tests::multiset_distance;
    use super::*;
    use crate::model::ResponseSpec;
    use proptest::prelude::*;

    fn params(d: f64, g0: f64, g1: f64, lam: f64, alpha: f64, linear: bool) -> ModelParams {
        let response = if linear { ResponseSpec::Linear } else { ResponseSpec::michaelis(1.5).unwrap() };
        ModelParams::new(alpha, 0.0, d, MotilitySpec::exponential(g0, g1, lam).unwrap(), response).unwrap()
    }

    proptest! {
        #[test]
        fn dispersion_roots_solve_quadratic(k_sq in 0.0..50.0f64, d in 0.001..10.0f64, g0 in 0.0..20.0f64,
                                            g1 in 0.01..2.0f64, lam in 0.1..3.0f64, u in 0.0..8.0f64) {
            let p = params(d, g0, g1, lam, 1.0, true);
            let pt = dispersion_at(k_sq, &p, u).unwrap();
            let scale = 1f64.max(pt.a0.abs()).max(pt.a1.abs());
            for r in [pt.rho_plus, pt.rho_minus] {
                let res = r * r + r * pt.a1 + pt.a0;
                prop_assert!(res.norm() <= 1e-10 * scale, "residual {}", res.norm());
            }
        }

        #[test]
        fn growth_sign_matches_band(d in 0.001..1.0f64, u in 1.5..6.0f64, frac in 0.01..3.0f64) {
            let p = params(d, 10.0, 0.1, 1.0, 1.0, false);
            let s = s_value(&p, u).unwrap();
            let k_sq_probe = match instability_band(&p, u).unwrap() {
                Some(kbar) => kbar * frac,
                None => frac,
            };
            prop_assume!((frac - 1.0).abs() > 1e-6);
            let grows = dispersion_at(k_sq_probe, &p, u).unwrap().rho_plus.re > 0.0;
            let inside = s < 0.0 && frac < 1.0;
            prop_assert_eq!(grows, inside);
        }

        #[test]
        fn band_shrinks_with_d(d in 0.001..10.0f64, u in 1.5..6.0f64) {
            let p = params(d, 10.0, 0.1, 1.0, 1.0, false);
            let q = params(d * 1.5, 10.0, 0.1, 1.0, 1.0, false);
            if let (Some(a), Some(b)) = (instability_band(&p, u).unwrap(), instability_band(&q, u).unwrap()) {
                prop_assert!(b < a);
            }
        }

        #[test]
        fn oracle_agrees_with_dispersion(k_sq in 0.0..20.0f64, d in 0.001..10.0f64, g0 in 0.0..20.0f64,
                                         g1 in 0.01..2.0f64, lam in 0.1..3.0f64, u in 0.0..8.0f64,
                                         alpha in 0.0..3.0f64, linear in any::<bool>()) {
            let p = params(d, g0, g1, lam, alpha, linear);
            let pt = dispersion_at(k_sq, &p, u).unwrap();
            let o = mk_eigen_oracle(k_sq, &p, u).unwrap();
            prop_assert!(multiset_distance(&pt.roots(), &o) <= 1e-10);
        }

        #[test]
        fn zero_wavenumber_matches_equilibria(d in 0.001..10.0f64, u in 0.0..8.0f64) {
            let p = params(d, 10.0, 0.1, 1.0, 1.0, true);
            let pt = dispersion_at(0.0, &p, u).unwrap();
            for e in ode_equilibria(&p, u).unwrap() {
                prop_assert_eq!(pt.rho_plus.re, e.eigenvalues[0]);
                prop_assert_eq!(pt.rho_minus.re, e.eigenvalues[1]);
            }
        }
    }
}
