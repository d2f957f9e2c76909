//! Time integration of the three-field system.
//!
//! Both schemes evaluate the reaction pair `α u F(w)` / `−u F(w)` once per
//! step from the same values, so the combination `∫u + α∫w` moves only by
//! the death term. Diffusion is in flux form and conserves each field.

mod run;
mod tridiag;

pub use run::{run, Observation, Observer, RunSummary};
pub use tridiag::{solve_tridiagonal, MIN_PIVOT};

use crate::error::{Error, Result};
use crate::grid::{laplacian_into, FieldState, Grid, NEG_TOLERANCE};
use crate::model::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Forward Euler on every term.
    Explicit,
    /// Backward Euler diffusion with frozen motility, forward Euler reactions.
    Imex,
}

impl Scheme {
    pub fn tag(&self) -> &'static str {
        match self {
            Scheme::Explicit => "explicit",
            Scheme::Imex => "imex",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DtPolicy {
    Fixed(f64),
    /// Recompute [`stable_dt`] with this safety factor before every step.
    Auto { safety: f64 },
}

pub const DEFAULT_SAFETY: f64 = 0.9;
pub const DEFAULT_IMEX_DT: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeConfig {
    pub mode: Scheme,
    pub dt: DtPolicy,
    pub t_end: f64,
    pub max_steps: usize,
}

impl SchemeConfig {
    pub fn explicit(t_end: f64) -> Self {
        SchemeConfig {
            mode: Scheme::Explicit,
            dt: DtPolicy::Auto { safety: DEFAULT_SAFETY },
            t_end,
            max_steps: usize::MAX,
        }
    }

    pub fn imex(t_end: f64, dt: f64) -> Self {
        SchemeConfig {
            mode: Scheme::Imex,
            dt: DtPolicy::Fixed(dt),
            t_end,
            max_steps: usize::MAX,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.dt {
            DtPolicy::Fixed(dt) if !(dt.is_finite() && dt > 0.0) => {
                return Err(Error::InvalidParameter(format!("dt must be > 0, got {dt}")))
            }
            DtPolicy::Auto { safety } if !(safety > 0.0 && safety <= 1.0) => {
                return Err(Error::InvalidParameter(format!("safety factor must lie in (0, 1], got {safety}")))
            }
            _ => {}
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(Error::InvalidParameter(format!("t_end must be >= 0, got {}", self.t_end)));
        }
        Ok(())
    }
}

/// What a single step did.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    pub dt_used: f64,
    pub t_new: f64,
    /// `dt · ∫ u F(w)` removed from the nutrient this step.
    pub consumption: f64,
    /// True when some component landed in `[−ε, 0)`.
    pub touched_negative: bool,
    /// Set by [`run`] when observers were notified after this step.
    pub observed: bool,
}

/// `σ dx² / (2 max(γ_max, D, 1))` with `γ_max` taken over the current signal.
pub fn stable_dt(params: &ModelParams, grid: &Grid, state: &FieldState, safety: f64) -> Result<f64> {
    let mut gmax: f64 = 0.0;
    for &v in state.v.iter() {
        gmax = gmax.max(params.motility.eval(v.max(0.0))?);
    }
    let dx = grid.dx();
    Ok(safety * dx * dx / (2.0 * gmax.max(params.dcoef).max(1.0)))
}

/// One forward Euler step; returns the new state.
pub fn step_explicit(state: &FieldState, params: &ModelParams, grid: &Grid, dt: f64) -> Result<(FieldState, StepReport)> {
    let mut next = state.clone();
    let report = Stepper::new(grid.cells()).step(&mut next, params, grid, Scheme::Explicit, dt)?;
    Ok((next, report))
}

/// One IMEX step; returns the new state.
pub fn step_imex(state: &FieldState, params: &ModelParams, grid: &Grid, dt: f64) -> Result<(FieldState, StepReport)> {
    let mut next = state.clone();
    let report = Stepper::new(grid.cells()).step(&mut next, params, grid, Scheme::Imex, dt)?;
    Ok((next, report))
}

/// Scratch buffers reused across steps.
pub(crate) struct Stepper {
    gamma: Vec<f64>,
    react: Vec<f64>,
    lap: Vec<f64>,
    prod: Vec<f64>,
    u: Vec<f64>,
    v: Vec<f64>,
    w: Vec<f64>,
    sub: Vec<f64>,
    diag: Vec<f64>,
    sup: Vec<f64>,
    scratch: Vec<f64>,
}

impl Stepper {
    pub(crate) fn new(n: usize) -> Self {
        let z = || vec![0.0; n];
        Stepper {
            gamma: z(),
            react: z(),
            lap: z(),
            prod: z(),
            u: z(),
            v: z(),
            w: z(),
            sub: z(),
            diag: z(),
            sup: z(),
            scratch: z(),
        }
    }

    /// Advances `state` in place. On error `state` is left untouched.
    pub(crate) fn step(&mut self, state: &mut FieldState, params: &ModelParams, grid: &Grid, scheme: Scheme, dt: f64) -> Result<StepReport> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidParameter(format!("dt must be > 0, got {dt}")));
        }
        let n = grid.cells();
        for (_, f) in state.components() {
            if f.len() != n {
                return Err(Error::GridMismatch { expected: n, got: f.len() });
            }
        }
        let dx = grid.dx();
        let (alpha, theta, dcoef) = (params.alpha, params.theta, params.dcoef);

        for i in 0..n {
            let v = state.v[i];
            if v < -NEG_TOLERANCE {
                return Err(Error::NegativityBreach { field: "v", cell: i, value: v });
            }
            self.gamma[i] = params.motility.eval(v.max(0.0))?;
            self.react[i] = state.u[i] * params.response.eval_unchecked(state.w[i]);
        }
        let consumption = dt * self.react.iter().sum::<f64>() * dx;

        match scheme {
            Scheme::Explicit => {
                for i in 0..n {
                    self.prod[i] = self.gamma[i] * state.u[i];
                }
                laplacian_into(&self.prod, dx, &mut self.lap);
                for i in 0..n {
                    let ui = state.u[i];
                    self.u[i] = ui + dt * (self.lap[i] + alpha * self.react[i] - theta * ui);
                }
                laplacian_into(&state.v, dx, &mut self.lap);
                for i in 0..n {
                    self.v[i] = state.v[i] + dt * (dcoef * self.lap[i] + state.u[i] - state.v[i]);
                }
                laplacian_into(&state.w, dx, &mut self.lap);
                for i in 0..n {
                    self.w[i] = state.w[i] + dt * (self.lap[i] - self.react[i]);
                }
            }
            Scheme::Imex => {
                let r = dt / (dx * dx);
                // u, increment form: (I − dt Δ_h Γ) δ = dt (Δ_h(Γu) + αR − θu)
                for i in 0..n {
                    self.prod[i] = self.gamma[i] * state.u[i];
                }
                laplacian_into(&self.prod, dx, &mut self.lap);
                for i in 0..n {
                    let nb = neighbours(i, n);
                    self.diag[i] = 1.0 + r * nb * self.gamma[i];
                    self.sub[i] = if i > 0 { -r * self.gamma[i - 1] } else { 0.0 };
                    self.sup[i] = if i + 1 < n { -r * self.gamma[i + 1] } else { 0.0 };
                    self.u[i] = dt * (self.lap[i] + alpha * self.react[i] - theta * state.u[i]);
                }
                tridiag::solve_in_place(&self.sub, &self.diag, &self.sup, &mut self.u, &mut self.scratch)?;
                for i in 0..n {
                    self.u[i] += state.u[i];
                }

                // v, direct form: ((1 + dt) I − dt D Δ_h) v' = v + dt u
                let rd = r * dcoef;
                for i in 0..n {
                    self.diag[i] = 1.0 + dt + rd * neighbours(i, n);
                    self.sub[i] = if i > 0 { -rd } else { 0.0 };
                    self.sup[i] = if i + 1 < n { -rd } else { 0.0 };
                    self.v[i] = state.v[i] + dt * state.u[i];
                }
                tridiag::solve_in_place(&self.sub, &self.diag, &self.sup, &mut self.v, &mut self.scratch)?;

                // w, increment form: (I − dt Δ_h) δ = dt (Δ_h w − R)
                laplacian_into(&state.w, dx, &mut self.lap);
                for i in 0..n {
                    self.diag[i] = 1.0 + r * neighbours(i, n);
                    self.sub[i] = if i > 0 { -r } else { 0.0 };
                    self.sup[i] = if i + 1 < n { -r } else { 0.0 };
                    self.w[i] = dt * (self.lap[i] - self.react[i]);
                }
                tridiag::solve_in_place(&self.sub, &self.diag, &self.sup, &mut self.w, &mut self.scratch)?;
                for i in 0..n {
                    self.w[i] += state.w[i];
                }
            }
        }

        let mut touched_negative = false;
        for (name, f) in [("u", &self.u), ("v", &self.v), ("w", &self.w)] {
            for (i, &x) in f.iter().enumerate() {
                if !x.is_finite() {
                    return Err(Error::NonFinite { field: name, cell: i });
                }
                if x < 0.0 {
                    if x < -NEG_TOLERANCE {
                        return Err(Error::NegativityBreach { field: name, cell: i, value: x });
                    }
                    touched_negative = true;
                }
            }
        }
        std::mem::swap(&mut state.u.0, &mut self.u);
        std::mem::swap(&mut state.v.0, &mut self.v);
        std::mem::swap(&mut state.w.0, &mut self.w);
        state.t += dt;

        Ok(StepReport {
            dt_used: dt,
            t_new: state.t,
            consumption,
            touched_negative,
            observed: false,
        })
    }
}

fn neighbours(i: usize, n: usize) -> f64 {
    if i == 0 || i + 1 == n {
        1.0
    } else {
        2.0
    }
}
