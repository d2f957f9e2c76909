//! Simulation and linear-stability toolkit for a chemotaxis-type system with
//! density-suppressed motility and nutrient consumption:
//!
//! ```text
//! u_t = Δ(γ(v)u) + α u F(w) − θ u
//! v_t = D Δv + u − v
//! w_t = Δw − u F(w)
//! ```
//!
//! on `(0, l)` with zero-flux boundaries.

pub mod config;
pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod init;
pub mod model;
pub mod runner;
pub mod stability;
pub mod stepper;

pub use error::{Error, Result};
pub use grid::{Field, FieldState, Grid};
pub use model::{ModelParams, MotilitySpec, MotilityTable, ResponseSpec};
pub use stepper::{run, DtPolicy, Scheme, SchemeConfig};
