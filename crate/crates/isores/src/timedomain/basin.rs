//! Basin-of-attraction mapping on a grid of initial conditions. Each cell is
//! iterated through the Poincare map until it falls within the capture radius
//! of a known attractor's fixed point.

use super::ode::{dopri5_to, OdeControl};
use super::{Oscillator, PeriodicOrbit};
use crate::error::Result;
use crate::model::DampingLaw;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone, Copy)]
pub struct BasinConfig {
    pub capture_radius: f64,
    pub max_periods: usize,
    pub tol_ode: f64,
}

impl Default for BasinConfig {
    fn default() -> Self {
        Self { capture_radius: 1e-3, max_periods: 500, tol_ode: 1e-9 }
    }
}

/// Label for an undecided cell.
pub const UNDECIDED: i32 = -1;

#[derive(Debug, Clone, Serialize)]
pub struct BasinGrid {
    pub x_range: (f64, f64),
    pub v_range: (f64, f64),
    pub nx: usize,
    pub nv: usize,
    /// row-major over v (outer) and x (inner): attractor index or [`UNDECIDED`]
    pub labels: Vec<i32>,
    pub undecided: usize,
    #[serde(skip)]
    pub attractors: Vec<PeriodicOrbit>,
}

impl BasinGrid {
    pub fn label_at(&self, ix: usize, iv: usize) -> i32 {
        self.labels[iv * self.nx + ix]
    }
}

/// Iterates the Poincare map from `(x, v)` until capture by one of the
/// attractors; `None` when the budget runs out (e.g. on a basin boundary).
pub fn classify_initial_condition(
    law: &DampingLaw,
    forcing: f64,
    omega: f64,
    initial: (f64, f64),
    attractors: &[PeriodicOrbit],
    cfg: &BasinConfig,
) -> Result<Option<usize>> {
    let osc = Oscillator::new(law, forcing, omega)?;
    let ctl = OdeControl::with_tol(cfg.tol_ode);
    let period = osc.period();
    let mut y = [initial.0, initial.1];
    let mut rhs = osc.rhs2();
    for _ in 0..cfg.max_periods {
        for (i, orbit) in attractors.iter().enumerate() {
            let d = ((y[0] - orbit.initial.x).powi(2) + (y[1] - orbit.initial.v).powi(2)).sqrt();
            if d <= cfg.capture_radius {
                return Ok(Some(i));
            }
        }
        y = dopri5_to(&mut rhs, 0.0, period, y, &ctl)?;
    }
    Ok(None)
}

/// Labels every cell of a `(x0, v0)` window by the attractor its trajectory
/// converges to. Cells are independent and run in parallel.
pub fn basin_grid(
    law: &DampingLaw,
    forcing: f64,
    omega: f64,
    x_range: (f64, f64),
    v_range: (f64, f64),
    nx: usize,
    nv: usize,
    attractors: &[PeriodicOrbit],
    cfg: &BasinConfig,
) -> Result<BasinGrid> {
    let cells: Vec<(usize, usize)> =
        (0..nv).flat_map(|iv| (0..nx).map(move |ix| (ix, iv))).collect();
    let labels: Vec<i32> = cells
        .par_iter()
        .map(|&(ix, iv)| {
            let x = if nx == 1 {
                0.5 * (x_range.0 + x_range.1)
            } else {
                x_range.0 + (x_range.1 - x_range.0) * ix as f64 / (nx - 1) as f64
            };
            let v = if nv == 1 {
                0.5 * (v_range.0 + v_range.1)
            } else {
                v_range.0 + (v_range.1 - v_range.0) * iv as f64 / (nv - 1) as f64
            };
            match classify_initial_condition(law, forcing, omega, (x, v), attractors, cfg) {
                Ok(Some(i)) => i as i32,
                _ => UNDECIDED,
            }
        })
        .collect();
    let undecided = labels.iter().filter(|&&l| l == UNDECIDED).count();
    Ok(BasinGrid {
        x_range,
        v_range,
        nx,
        nv,
        labels,
        undecided,
        attractors: attractors.to_vec(),
    })
}
