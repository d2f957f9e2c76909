//! Initial data: seeded perturbations of a constant state, single cosine
//! modes, or a snapshot file.

use std::f64::consts::PI;
use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::{Field, FieldState, Grid};

#[derive(Debug, Clone, PartialEq)]
pub enum InitSpec {
    /// `base·(1 + amplitude·ξ_i)` on `u` and `v` (and `w` when
    /// `perturb_w`), with `ξ_i` uniform on `[−1, 1]` and shifted to mean zero.
    ConstantPerturbed {
        base: [f64; 3],
        amplitude: f64,
        seed: u64,
        perturb_w: bool,
    },
    /// `u = base_u + amplitude·cos(nπx/l)`; `v` and `w` stay at their base.
    Eigenmode { base: [f64; 3], mode: usize, amplitude: f64 },
    /// Snapshot written by [`crate::grid::write_snapshot`].
    File(PathBuf),
}

impl InitSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            InitSpec::ConstantPerturbed { .. } => "CONSTANT_PERTURBED",
            InitSpec::Eigenmode { .. } => "EIGENMODE",
            InitSpec::File(_) => "FILE",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let check_base = |base: &[f64; 3]| {
            for (name, b) in ["u", "v", "w"].iter().zip(base) {
                if !(b.is_finite() && *b >= 0.0) {
                    return Err(Error::InvalidParameter(format!("base {name} must be >= 0, got {b}")));
                }
            }
            Ok(())
        };
        match self {
            InitSpec::ConstantPerturbed { base, amplitude, .. } => {
                check_base(base)?;
                if !(amplitude.is_finite() && *amplitude >= 0.0) {
                    return Err(Error::InvalidParameter(format!("amplitude must be >= 0, got {amplitude}")));
                }
            }
            InitSpec::Eigenmode { base, mode, amplitude } => {
                check_base(base)?;
                if *mode == 0 {
                    return Err(Error::InvalidParameter("mode must be >= 1".into()));
                }
                if !amplitude.is_finite() {
                    return Err(Error::InvalidParameter(format!("amplitude must be finite, got {amplitude}")));
                }
            }
            InitSpec::File(_) => {}
        }
        Ok(())
    }
}

/// Builds the initial state at `t = 0`.
///
/// A `File` source must match the grid's cell count and length; its stored
/// time is kept.
pub fn make_initial_state(spec: &InitSpec, grid: &Grid) -> std::result::Result<FieldState, InitError> {
    spec.validate()?;
    let n = grid.cells();
    let state = match spec {
        InitSpec::ConstantPerturbed { base, amplitude, seed, perturb_w } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut draw = |b: f64, on: bool| -> Field {
                if !on || *amplitude == 0.0 {
                    return grid.constant_field(b);
                }
                let xi: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
                let mean = xi.iter().sum::<f64>() / n as f64;
                Field(xi.iter().map(|x| b * (1.0 + amplitude * (x - mean))).collect())
            };
            let u = draw(base[0], true);
            let v = draw(base[1], true);
            let w = draw(base[2], *perturb_w);
            FieldState::new(u, v, w, 0.0)
        }
        InitSpec::Eigenmode { base, mode, amplitude } => {
            let l = grid.length();
            let k = *mode as f64 * PI / l;
            let u = grid.field_from_fn(|x| base[0] + amplitude * (k * x).cos());
            FieldState::new(u, grid.constant_field(base[1]), grid.constant_field(base[2]), 0.0)
        }
        InitSpec::File(path) => {
            let f = File::open(path).map_err(|e| InitError::Io(format!("{}: {e}", path.display())))?;
            let (state, file_grid) = crate::grid::read_snapshot(BufReader::new(f))?;
            if file_grid.cells() != n {
                return Err(Error::GridMismatch { expected: n, got: file_grid.cells() }.into());
            }
            if (file_grid.length() - grid.length()).abs() > 1e-12 * grid.length() {
                return Err(Error::InvalidParameter(format!(
                    "snapshot length {} differs from configured length {}",
                    file_grid.length(),
                    grid.length()
                ))
                .into());
            }
            state
        }
    };
    for (name, f) in state.components() {
        if let Some((cell, &value)) = f.iter().enumerate().find(|(_, x)| **x < 0.0 || !x.is_finite()) {
            return Err(InitError::NegativeInitialData { field: name, cell, value });
        }
    }
    Ok(state)
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum InitError {
    #[error("initial {field} is negative ({value}) at cell {cell}")]
    NegativeInitialData { field: &'static str, cell: usize, value: f64 },
    #[error("cannot read initial data: {0}")]
    Io(String),
    #[error(transparent)]
    Model(#[from] Error),
}
