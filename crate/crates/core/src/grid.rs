//! Uniform cell-centered grid on `(0, l)` with zero-flux faces, the
//! flux-form operators built on it, and discrete integrals and norms.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::ops::{Deref, DerefMut};

use crate::error::{Error, Result};
use crate::model::MotilitySpec;

/// Componentwise slack below zero tolerated in a state before it counts
/// as a solver failure.
pub const NEG_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    length: f64,
    cells: usize,
    dx: f64,
}

impl Grid {
    pub const MIN_CELLS: usize = 4;

    pub fn new(length: f64, cells: usize) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidParameter(format!("grid length must be > 0, got {length}")));
        }
        if cells < Self::MIN_CELLS {
            return Err(Error::InvalidParameter(format!(
                "grid needs at least {} cells, got {cells}",
                Self::MIN_CELLS
            )));
        }
        Ok(Grid { length, cells, dx: length / cells as f64 })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Center of cell `i`, `(i + ½) dx`.
    pub fn center(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.dx
    }

    pub fn centers(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.cells).map(|i| self.center(i))
    }

    /// Field sampled at cell centers.
    pub fn field_from_fn(&self, f: impl Fn(f64) -> f64) -> Field {
        Field(self.centers().map(f).collect())
    }

    pub fn constant_field(&self, c: f64) -> Field {
        Field(vec![c; self.cells])
    }

    fn check(&self, f: &Field) -> Result<()> {
        if f.len() != self.cells {
            return Err(Error::GridMismatch { expected: self.cells, got: f.len() });
        }
        Ok(())
    }
}

/// Cell averages of one component.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Field(pub Vec<f64>);

impl Field {
    pub fn new(values: Vec<f64>) -> Self {
        Field(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }
}

impl Deref for Field {
    type Target = Vec<f64>;
    fn deref(&self) -> &Vec<f64> {
        &self.0
    }
}

impl DerefMut for Field {
    fn deref_mut(&mut self) -> &mut Vec<f64> {
        &mut self.0
    }
}

impl From<Vec<f64>> for Field {
    fn from(v: Vec<f64>) -> Self {
        Field(v)
    }
}

/// Cell density `u`, signal `v` and nutrient `w` at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub u: Field,
    pub v: Field,
    pub w: Field,
    pub t: f64,
}

impl FieldState {
    pub fn new(u: Field, v: Field, w: Field, t: f64) -> Self {
        FieldState { u, v, w, t }
    }

    pub fn constant(grid: &Grid, u: f64, v: f64, w: f64) -> Self {
        FieldState {
            u: grid.constant_field(u),
            v: grid.constant_field(v),
            w: grid.constant_field(w),
            t: 0.0,
        }
    }

    pub fn components(&self) -> [(&'static str, &Field); 3] {
        [("u", &self.u), ("v", &self.v), ("w", &self.w)]
    }

    /// Checks lengths against the grid, finiteness, and the `−ε` floor.
    pub fn validate(&self, grid: &Grid) -> Result<()> {
        for (name, f) in self.components() {
            grid.check(f)?;
            for (i, &x) in f.iter().enumerate() {
                if !x.is_finite() {
                    return Err(Error::NonFinite { field: name, cell: i });
                }
                if x < -NEG_TOLERANCE {
                    return Err(Error::NegativityBreach { field: name, cell: i, value: x });
                }
            }
        }
        Ok(())
    }

    /// Largest componentwise distance to `other`.
    pub fn sup_distance(&self, other: &FieldState) -> f64 {
        self.components()
            .iter()
            .zip(other.components().iter())
            .flat_map(|((_, a), (_, b))| a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }
}

/// Writes `(Δ_h f)_i = (F_{i+½} − F_{i−½}) / dx` with interior face fluxes
/// `(f_{i+1} − f_i) / dx` and zero flux through both boundary faces.
pub(crate) fn laplacian_into(f: &[f64], dx: f64, out: &mut [f64]) {
    let n = f.len();
    let inv = 1.0 / (dx * dx);
    let mut left = 0.0;
    for i in 0..n {
        let right = if i + 1 < n { f[i + 1] - f[i] } else { 0.0 };
        out[i] = (right - left) * inv;
        left = right;
    }
}

/// Discrete Neumann Laplacian in flux form. Cell sums of the result
/// telescope to zero.
pub fn laplacian_neumann(f: &Field, grid: &Grid) -> Result<Field> {
    grid.check(f)?;
    let mut out = vec![0.0; f.len()];
    laplacian_into(f, grid.dx, &mut out);
    Ok(Field(out))
}

/// `Δ_h(γ(v) u)`, the Laplacian of the pointwise product.
pub fn motility_laplacian(u: &Field, v: &Field, spec: &MotilitySpec, grid: &Grid) -> Result<Field> {
    grid.check(u)?;
    grid.check(v)?;
    let p = u
        .iter()
        .zip(v.iter())
        .map(|(&ui, &vi)| spec.eval(vi).map(|g| g * ui))
        .collect::<Result<Vec<_>>>()?;
    let mut out = vec![0.0; p.len()];
    laplacian_into(&p, grid.dx, &mut out);
    Ok(Field(out))
}

/// Midpoint rule `Σ f_i dx`.
pub fn integrate(f: &[f64], grid: &Grid) -> f64 {
    f.iter().sum::<f64>() * grid.dx
}

pub fn sup_norm(f: &[f64]) -> f64 {
    f.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn l2_norm(f: &[f64], grid: &Grid) -> f64 {
    (f.iter().map(|x| x * x).sum::<f64>() * grid.dx).sqrt()
}

/// Serializes a state as `x,u,v,w` rows under a `# t=.. n=.. l=..` header.
/// Values carry 17 significant digits so reading them back is exact.
pub fn write_snapshot<W: Write>(mut out: W, state: &FieldState, grid: &Grid) -> std::io::Result<()> {
    let mut buf = String::with_capacity(80 * (grid.cells() + 2));
    writeln!(buf, "# t={:.16e} n={} l={:.16e}", state.t, grid.cells(), grid.length()).unwrap();
    writeln!(buf, "x,u,v,w").unwrap();
    for i in 0..grid.cells() {
        writeln!(
            buf,
            "{:.16e},{:.16e},{:.16e},{:.16e}",
            grid.center(i),
            state.u[i],
            state.v[i],
            state.w[i]
        )
        .unwrap();
    }
    out.write_all(buf.as_bytes())
}

/// Inverse of [`write_snapshot`].
pub fn read_snapshot<R: BufRead>(input: R) -> Result<(FieldState, Grid)> {
    let bad = |msg: String| Error::InvalidParameter(format!("snapshot: {msg}"));
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| bad("empty input".into()))?
        .map_err(|e| bad(e.to_string()))?;
    let header = header.strip_prefix('#').ok_or_else(|| bad("missing '#' header".into()))?;
    let (mut t, mut n, mut l) = (None, None, None);
    for tok in header.split_whitespace() {
        match tok.split_once('=') {
            Some(("t", x)) => t = x.parse::<f64>().ok(),
            Some(("n", x)) => n = x.parse::<usize>().ok(),
            Some(("l", x)) => l = x.parse::<f64>().ok(),
            _ => return Err(bad(format!("unexpected header token '{tok}'"))),
        }
    }
    let (t, n, l) = match (t, n, l) {
        (Some(t), Some(n), Some(l)) => (t, n, l),
        _ => return Err(bad("header needs t=, n= and l=".into())),
    };
    let grid = Grid::new(l, n)?;
    let (mut u, mut v, mut w) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for (lineno, line) in lines.enumerate() {
        let line = line.map_err(|e| bad(e.to_string()))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with("x,") {
            continue;
        }
        let cols: Vec<f64> = line
            .split(',')
            .map(|c| c.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| bad(format!("line {}: {e}", lineno + 2)))?;
        if cols.len() != 4 {
            return Err(bad(format!("line {}: expected 4 columns", lineno + 2)));
        }
        u.push(cols[1]);
        v.push(cols[2]);
        w.push(cols[3]);
    }
    if u.len() != n {
        return Err(Error::GridMismatch { expected: n, got: u.len() });
    }
    Ok((FieldState::new(Field(u), Field(v), Field(w), t), grid))
}


#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn laplacian_conserves(values in prop::collection::vec(-100.0..100.0f64, 4..300), dx in 0.02..1.0f64) {
            let g = Grid::new(dx * values.len() as f64, values.len()).unwrap();
            let f = Field(values);
            let lap = laplacian_neumann(&f, &g).unwrap();
            let total = integrate(&lap, &g);
            prop_assert!(total.abs() <= 1e-13 * g.cells() as f64 * sup_norm(&f), "total {}", total);
        }
    }
}
