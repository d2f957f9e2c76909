use super::{stable_dt, DtPolicy, SchemeConfig, Stepper};
use crate::diagnostics::{MassLedger, MonotoneTracker, MonotoneVerdict};
use crate::error::{Error, Result};
use crate::grid::{sup_norm, FieldState, Grid};
use crate::model::ModelParams;

/// Read-only view handed to observers.
pub struct Observation<'a> {
    pub step: usize,
    pub state: &'a FieldState,
    pub grid: &'a Grid,
    pub params: &'a ModelParams,
    pub ledger: &'a MassLedger,
    /// `∫₀ᵗ∫ u F(w)` so far.
    pub consumption: f64,
    pub is_final: bool,
}

pub trait Observer {
    fn observe(&mut self, obs: &Observation<'_>);
}

impl<F: FnMut(&Observation<'_>)> Observer for F {
    fn observe(&mut self, obs: &Observation<'_>) {
        self(obs)
    }
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub state: FieldState,
    pub steps: usize,
    pub ledger: MassLedger,
    pub consumption: f64,
    /// Largest `|ledger residual|` seen after any step.
    pub max_ledger_residual: f64,
    /// Step-by-step monotonicity of `sup w`.
    pub w_monotone: MonotoneVerdict,
    pub observations: usize,
    pub touched_negative_steps: usize,
    pub reached_t_end: bool,
}

/// Advances `state0` to `scheme.t_end` (absolute time) or `scheme.max_steps`.
///
/// Observers fire on the initial state, every `cadence` units of simulated
/// time (every step when `cadence <= 0`) and on the final state. Steps are
/// shortened to land exactly on observation times and on `t_end`. The
/// ledger and the `sup w` history are updated after every step.
pub fn run(
    state0: FieldState,
    grid: &Grid,
    params: &ModelParams,
    scheme: &SchemeConfig,
    cadence: f64,
    observers: &mut [&mut dyn Observer],
) -> Result<RunSummary> {
    scheme.validate()?;
    params.validate()?;
    state0.validate(grid)?;

    let mut state = state0;
    let t0 = state.t;
    let t_end = scheme.t_end;
    let mut stepper = Stepper::new(grid.cells());
    let mut ledger = MassLedger::new(&state, grid, params);
    let mut w_sup = MonotoneTracker::default();
    w_sup.push(sup_norm(&state.w));
    let mut consumption = 0.0;
    let mut max_res: f64 = 0.0;
    let mut steps = 0usize;
    let mut observations = 0usize;
    let mut touched_negative_steps = 0usize;
    let mut obs_index = 1u64;

    let has_work = state.t < t_end && scheme.max_steps > 0;
    let mut notify = |state: &FieldState, ledger: &MassLedger, step: usize, consumption: f64, is_final: bool| {
        let obs = Observation { step, state, grid, params, ledger, consumption, is_final };
        for o in observers.iter_mut() {
            o.observe(&obs);
        }
    };
    notify(&state, &ledger, 0, 0.0, !has_work);
    observations += 1;

    while state.t < t_end && steps < scheme.max_steps {
        let mut dt = match scheme.dt {
            DtPolicy::Fixed(dt) => dt,
            DtPolicy::Auto { safety } => stable_dt(params, grid, &state, safety)?,
        };
        let next_obs = if cadence > 0.0 { (t0 + obs_index as f64 * cadence).min(t_end) } else { t_end };
        let snapped = state.t + dt >= next_obs - 1e-9 * dt;
        if snapped {
            dt = next_obs - state.t;
        }

        let report = stepper
            .step(&mut state, params, grid, scheme.mode, dt)
            .map_err(|e| Error::Step { step: steps, time: state.t, source: Box::new(e) })?;
        if snapped {
            state.t = next_obs;
        }
        steps += 1;
        consumption += report.consumption;
        touched_negative_steps += report.touched_negative as usize;
        ledger.record(&state, grid);
        max_res = max_res.max(ledger.residual.abs());
        w_sup.push(sup_norm(&state.w));

        let is_final = state.t >= t_end || steps >= scheme.max_steps;
        if snapped && cadence > 0.0 && next_obs < t_end {
            obs_index += 1;
        }
        if cadence <= 0.0 || snapped || is_final {
            notify(&state, &ledger, steps, consumption, is_final);
            observations += 1;
        }
    }

    Ok(RunSummary {
        reached_t_end: state.t >= t_end,
        state,
        steps,
        ledger,
        consumption,
        max_ledger_residual: max_res,
        w_monotone: w_sup.verdict(),
        observations,
        touched_negative_steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stepper::Scheme;

    #[test]
    fn zero_horizon_returns_initial_state() {
        let g = Grid::new(20.0, 16).unwrap();
        let p = ModelParams::fig1(0.1).unwrap();
        let st = FieldState::constant(&g, 4.0, 4.0, 0.0);
        let mut finals = Vec::new();
        let mut obs = |o: &Observation<'_>| finals.push((o.step, o.is_final));
        let s = run(st.clone(), &g, &p, &SchemeConfig::imex(0.0, 1e-3), 1.0, &mut [&mut obs]).unwrap();
        assert_eq!(s.state, st);
        assert_eq!(s.steps, 0);
        assert_eq!(finals, vec![(0, true)]);
    }

    #[test]
    fn equilibrium_run_is_stationary() {
        let g = Grid::new(20.0, 32).unwrap();
        let p = ModelParams::fig1(0.1).unwrap();
        let st = FieldState::constant(&g, 4.0, 4.0, 0.0);
        for scheme in [SchemeConfig::explicit(0.5), SchemeConfig::imex(0.5, 0.01)] {
            let s = run(st.clone(), &g, &p, &scheme, 0.1, &mut []).unwrap();
            assert!(s.reached_t_end);
            assert_eq!(s.state.t, 0.5);
            assert!(s.state.sup_distance(&st) <= 1e-12);
        }
    }

    #[test]
    fn observations_land_on_cadence() {
        let g = Grid::new(20.0, 16).unwrap();
        let p = ModelParams::fig1(0.1).unwrap();
        let st = FieldState::constant(&g, 4.0, 4.0, 0.0);
        let mut times = Vec::new();
        let mut obs = |o: &Observation<'_>| times.push(o.state.t);
        let scheme = SchemeConfig { mode: Scheme::Imex, dt: DtPolicy::Fixed(0.03), t_end: 1.05, max_steps: usize::MAX };
        run(st, &g, &p, &scheme, 0.25, &mut [&mut obs]).unwrap();
        assert_eq!(times, vec![0.0, 0.25, 0.5, 0.75, 1.0, 1.05]);
    }

    #[test]
    fn max_steps_stops_early() {
        let g = Grid::new(20.0, 16).unwrap();
        let p = ModelParams::fig1(0.1).unwrap();
        let st = FieldState::constant(&g, 4.0, 4.0, 0.0);
        let scheme = SchemeConfig { max_steps: 3, ..SchemeConfig::imex(10.0, 0.1) };
        let s = run(st, &g, &p, &scheme, 0.0, &mut []).unwrap();
        assert_eq!(s.steps, 3);
        assert!(!s.reached_t_end);
        assert_eq!(s.observations, 4);
    }

    #[test]
    fn step_errors_carry_context() {
        let g = Grid::new(1.0, 16).unwrap();
        let p = ModelParams::fig1(0.1).unwrap();
        let mut st = FieldState::constant(&g, 1.0, 0.0, 0.0);
        st.u[8] = 10.0;
        let scheme = SchemeConfig { mode: Scheme::Explicit, dt: DtPolicy::Fixed(1.0), t_end: 5.0, max_steps: 10 };
        match run(st, &g, &p, &scheme, 0.0, &mut []) {
            Err(Error::Step { step: 0, source, .. }) => assert!(matches!(*source, Error::NegativityBreach { .. })),
            other => panic!("unexpected {other:?}"),
        }
    }
}
