//! Ground-truth verification in the time domain: direct integration of the
//! oscillator, shooting for periodic orbits with variational (monodromy)
//! integration, Floquet stability, pseudo-arclength continuation and basins
//! of attraction.

pub mod basin;
pub mod continuation;
pub mod ode;

pub use basin::{basin_grid, classify_initial_condition, BasinConfig, BasinGrid};
pub use continuation::{
    continue_branch, locate_irc, BranchPoint, ContinuationConfig, ContinuationParam, IrcSearch,
    IrcSeed, OrbitBranch, Termination,
};

use crate::error::{Error, Result};
use crate::model::DampingLaw;
use nalgebra::{Complex, Matrix2, Vector2};
use ode::{dopri5_to, OdeControl};

/// Oscillator state at a forcing phase `t` (time within the forcing period).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscState {
    pub x: f64,
    pub v: f64,
    pub t: f64,
}

/// The forced oscillator `x'' + x + F_d(x') = 2 f cos(omega t)`.
#[derive(Clone, Copy)]
pub struct Oscillator<'a> {
    pub law: &'a DampingLaw,
    pub forcing: f64,
    pub omega: f64,
}

impl<'a> Oscillator<'a> {
    pub fn new(law: &'a DampingLaw, forcing: f64, omega: f64) -> Result<Self> {
        if !(omega > 0.0) {
            return Err(Error::InvalidParameter(format!("omega must be > 0, got {omega}")));
        }
        if !(forcing >= 0.0) {
            return Err(Error::InvalidParameter(format!("forcing must be >= 0, got {forcing}")));
        }
        Ok(Self { law, forcing, omega })
    }

    pub fn period(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.omega
    }

    fn accel(&self, t: f64, x: f64, v: f64) -> f64 {
        2.0 * self.forcing * (self.omega * t).cos() - x - self.law.force(v)
    }

    fn rhs2(&self) -> impl FnMut(f64, &[f64; 2]) -> [f64; 2] + '_ {
        move |t, y| [y[1], self.accel(t, y[0], y[1])]
    }

    /// State plus variational matrix plus the damping-trace integral: the
    /// monodromy matrix comes out alongside the flow, and the accumulated
    /// trace integral feeds the Abel-Liouville identity.
    fn rhs_variational(&self) -> impl FnMut(f64, &[f64; 7]) -> [f64; 7] + '_ {
        move |t, y| {
            let dfv = self.law.dforce(y[1]);
            [
                y[1],
                self.accel(t, y[0], y[1]),
                y[3],
                -y[2] - dfv * y[3],
                y[5],
                -y[4] - dfv * y[5],
                -dfv,
            ]
        }
    }
}

/// Trajectory sampled at fixed phase points.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<(f64, f64, f64)>, // (t, x, v)
}

impl Trajectory {
    /// Peak |x| over the trailing `n_periods * samples_per_period` samples.
    pub fn tail_amplitude(&self, tail_samples: usize) -> f64 {
        self.samples
            .iter()
            .rev()
            .take(tail_samples)
            .map(|s| s.1.abs())
            .fold(0.0, f64::max)
    }
}

/// Integrates the oscillator for `n_periods` forcing periods from `initial`,
/// sampling `samples_per_period` fixed phase points per period.
pub fn integrate(
    law: &DampingLaw,
    forcing: f64,
    omega: f64,
    initial: (f64, f64),
    n_periods: usize,
    samples_per_period: usize,
    tol_ode: f64,
) -> Result<Trajectory> {
    let osc = Oscillator::new(law, forcing, omega)?;
    let period = osc.period();
    let m = samples_per_period.max(1);
    let ctl = OdeControl::with_tol(tol_ode);
    let mut y = [initial.0, initial.1];
    let mut samples = Vec::with_capacity(n_periods * m + 1);
    samples.push((0.0, y[0], y[1]));
    let mut rhs = osc.rhs2();
    for i in 0..n_periods * m {
        let t0 = period * i as f64 / m as f64;
        let t1 = period * (i + 1) as f64 / m as f64;
        y = dopri5_to(&mut rhs, t0, t1, y, &ctl)?;
        samples.push((t1, y[0], y[1]));
    }
    Ok(Trajectory { samples })
}

/// A periodic orbit found by shooting, with Floquet data.
#[derive(Debug, Clone)]
pub struct PeriodicOrbit {
    /// state at forcing phase 0
    pub initial: OscState,
    pub period: f64,
    pub multipliers: [Complex<f64>; 2],
    pub stable: bool,
    /// max |x| over one period
    pub amplitude: f64,
    pub monodromy: Matrix2<f64>,
    /// integral of the Jacobian trace over one period; by Abel-Liouville,
    /// det(monodromy) = exp(trace_integral)
    pub trace_integral: f64,
    /// shooting converged onto an orbit away from its seed
    pub drifted: bool,
}

impl PeriodicOrbit {
    pub fn max_multiplier_mag(&self) -> f64 {
        self.multipliers.iter().map(|m| m.norm()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ShootConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub tol_ode: f64,
    /// multiplier magnitude margin for the stability verdict
    pub tol_stab: f64,
    /// relative seed distance past which convergence counts as drifted
    pub drift_factor: f64,
}

impl Default for ShootConfig {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 30, tol_ode: 1e-10, tol_stab: 1e-9, drift_factor: 0.5 }
    }
}

fn multipliers_of(m: &Matrix2<f64>) -> [Complex<f64>; 2] {
    let tr = m.trace();
    let det = m.determinant();
    let disc = tr * tr - 4.0 * det;
    if disc >= 0.0 {
        let s = disc.sqrt();
        [Complex::new((tr + s) / 2.0, 0.0), Complex::new((tr - s) / 2.0, 0.0)]
    } else {
        let s = (-disc).sqrt() / 2.0;
        [Complex::new(tr / 2.0, s), Complex::new(tr / 2.0, -s)]
    }
}

/// Peak |x| over one period with parabolic refinement around the best sample.
fn measure_amplitude(osc: &Oscillator, start: [f64; 2], ctl: &OdeControl) -> Result<f64> {
    let period = osc.period();
    let n = 96;
    let mut xs = Vec::with_capacity(n + 1);
    xs.push(start[0].abs());
    let mut y = start;
    let mut rhs = osc.rhs2();
    for i in 0..n {
        y = dopri5_to(
            &mut rhs,
            period * i as f64 / n as f64,
            period * (i + 1) as f64 / n as f64,
            y,
            ctl,
        )?;
        xs.push(y[0].abs());
    }
    let (k, _) = xs
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).expect("finite sample"))
        .expect("nonempty");
    // parabola through the three samples around the peak (the orbit is
    // periodic, so wrap at the ends)
    let prev = if k == 0 { xs[n - 1] } else { xs[k - 1] };
    let next = if k >= n { xs[1] } else { xs[k + 1] };
    let denom = prev - 2.0 * xs[k] + next;
    if denom.abs() < 1e-300 {
        return Ok(xs[k]);
    }
    let delta = 0.5 * (prev - next) / denom;
    Ok(xs[k] - 0.25 * (prev - next) * delta)
}

/// Newton shooting on the period map of the forced oscillator. The monodromy
/// matrix is integrated variationally alongside the state.
pub fn shoot(
    law: &DampingLaw,
    forcing: f64,
    omega: f64,
    guess: (f64, f64),
    cfg: &ShootConfig,
) -> Result<PeriodicOrbit> {
    let osc = Oscillator::new(law, forcing, omega)?;
    let period = osc.period();
    let ctl = OdeControl::with_tol(cfg.tol_ode);
    let mut u = Vector2::new(guess.0, guess.1);
    let mut last = None;

    for it in 0..cfg.max_iter {
        let y0 = [u[0], u[1], 1.0, 0.0, 0.0, 1.0, 0.0];
        let yt = dopri5_to(&mut osc.rhs_variational(), 0.0, period, y0, &ctl)?;
        let r = Vector2::new(yt[0] - u[0], yt[1] - u[1]);
        let m = Matrix2::new(yt[2], yt[4], yt[3], yt[5]);
        let scale = 1.0f64.max(u.norm());
        last = Some((r.norm(), m, yt[6]));
        if r.norm() <= cfg.tol * scale {
            let multipliers = multipliers_of(&m);
            let max_mag = multipliers.iter().map(|c| c.norm()).fold(0.0, f64::max);
            let amplitude = measure_amplitude(&osc, [u[0], u[1]], &ctl)?;
            let seed_dist = ((u[0] - guess.0).powi(2) + (u[1] - guess.1).powi(2)).sqrt();
            return Ok(PeriodicOrbit {
                initial: OscState { x: u[0], v: u[1], t: 0.0 },
                period,
                multipliers,
                stable: max_mag < 1.0 + cfg.tol_stab,
                amplitude,
                monodromy: m,
                trace_integral: yt[6],
                drifted: seed_dist > cfg.drift_factor * scale,
            });
        }
        let jac = m - Matrix2::identity();
        let Some(inv) = jac.try_inverse() else {
            return Err(Error::ShootingDiverged { iterations: it, residual: r.norm() });
        };
        let mut step = inv * r;
        // keep Newton honest far from the solution
        let cap = 2.0 * scale;
        if step.norm() > cap {
            step *= cap / step.norm();
        }
        u -= step;
        if !u.iter().all(|c| c.is_finite()) {
            return Err(Error::ShootingDiverged { iterations: it, residual: f64::NAN });
        }
    }
    Err(Error::ShootingDiverged {
        iterations: cfg.max_iter,
        residual: last.map(|l| l.0).unwrap_or(f64::NAN),
    })
}

/// Shooting for an unforced periodic orbit (period unknown). The phase is
/// pinned by starting at v = 0; unknowns are the initial displacement and the
/// period.
pub fn shoot_autonomous(
    law: &DampingLaw,
    guess_x: f64,
    guess_period: f64,
    cfg: &ShootConfig,
) -> Result<PeriodicOrbit> {
    let osc = Oscillator::new(law, 0.0, 1.0)?;
    let ctl = OdeControl::with_tol(cfg.tol_ode);
    let mut x0 = guess_x;
    let mut period = guess_period;

    for it in 0..cfg.max_iter {
        let y0 = [x0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0];
        let yt = dopri5_to(&mut osc.rhs_variational(), 0.0, period, y0, &ctl)?;
        let r = Vector2::new(yt[0] - x0, yt[1]);
        let scale = 1.0f64.max(x0.abs());
        if r.norm() <= cfg.tol * scale {
            let m = Matrix2::new(yt[2], yt[4], yt[3], yt[5]);
            let multipliers = multipliers_of(&m);
            let nontrivial = multipliers
                .iter()
                .map(|c| (c.norm() - 1.0).abs())
                .zip(multipliers.iter())
                .min_by(|a, b| b.0.partial_cmp(&a.0).expect("finite"))
                .map(|(_, c)| c.norm())
                .unwrap_or(1.0);
            let amplitude = {
                let saved = Oscillator { law, forcing: 0.0, omega: 2.0 * std::f64::consts::PI / period };
                measure_amplitude(&saved, [x0, 0.0], &ctl)?
            };
            return Ok(PeriodicOrbit {
                initial: OscState { x: x0, v: 0.0, t: 0.0 },
                period,
                multipliers,
                stable: nontrivial < 1.0 + cfg.tol_stab,
                amplitude,
                monodromy: m,
                trace_integral: yt[6],
                drifted: (x0 - guess_x).abs() > cfg.drift_factor * scale,
            });
        }
        // Jacobian: d r / d(x0, T)
        let m = Matrix2::new(yt[2], yt[4], yt[3], yt[5]);
        let vel_end = yt[1];
        let acc_end = osc.accel(period, yt[0], yt[1]);
        let jac = Matrix2::new(m[(0, 0)] - 1.0, vel_end, m[(1, 0)], acc_end);
        let Some(inv) = jac.try_inverse() else {
            return Err(Error::ShootingDiverged { iterations: it, residual: r.norm() });
        };
        let step = inv * r;
        x0 -= step[0];
        period -= step[1];
        if !(period > 0.1 && period < 1e3) || !x0.is_finite() {
            return Err(Error::ShootingDiverged { iterations: it, residual: r.norm() });
        }
    }
    Err(Error::ShootingDiverged { iterations: cfg.max_iter, residual: f64::NAN })
}

/// Energy dissipated by damping and injected by forcing over one period of a
/// converged orbit. The two agree for an exact periodic solution.
pub fn orbit_energy_balance(
    law: &DampingLaw,
    forcing: f64,
    omega: f64,
    orbit: &PeriodicOrbit,
    tol_ode: f64,
) -> Result<(f64, f64)> {
    let osc = Oscillator::new(law, forcing, omega)?;
    let ctl = OdeControl::with_tol(tol_ode);
    let mut rhs = move |t: f64, y: &[f64; 4]| {
        let acc = osc.accel(t, y[0], y[1]);
        [
            y[1],
            acc,
            y[1] * law.force(y[1]),
            y[1] * 2.0 * forcing * (omega * t).cos(),
        ]
    };
    let yt = dopri5_to(
        &mut rhs,
        0.0,
        orbit.period,
        [orbit.initial.x, orbit.initial.v, 0.0, 0.0],
        &ctl,
    )?;
    Ok((yt[2], yt[3]))
}

/// Poincare map at the fixed-phase section: advances the state by one forcing
/// period.
pub fn period_map(
    law: &DampingLaw,
    forcing: f64,
    omega: f64,
    state: (f64, f64),
    tol_ode: f64,
) -> Result<(f64, f64)> {
    let osc = Oscillator::new(law, forcing, omega)?;
    let ctl = OdeControl::with_tol(tol_ode);
    let y = dopri5_to(&mut osc.rhs2(), 0.0, osc.period(), [state.0, state.1], &ctl)?;
    Ok((y[0], y[1]))
}

/// Initial condition guess for the periodic orbit that the single-harmonic
/// solution `(amp_sq, omega)` approximates, with its phase recovered from the
/// harmonic balance (`x = 2a cos(omega t + phase)`).
pub fn hb_orbit_guess(law: &DampingLaw, _forcing: f64, omega: f64, amp_sq: f64) -> (f64, f64) {
    let a = amp_sq.sqrt();
    let fd = law.averaged_force(2.0 * a * omega);
    let phase = (-0.5 * fd).atan2(a * (1.0 - omega * omega));
    (2.0 * a * phase.cos(), -2.0 * a * omega * phase.sin())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Params;
    use approx::assert_relative_eq;

    fn quintic(c1: f64, c3: f64) -> DampingLaw {
        DampingLaw::quintic(Params::new(c1, c3).unwrap())
    }

    #[test]
    fn unforced_positive_damping_decays_to_origin() {
        let law = quintic(0.1, 0.5);
        let traj = integrate(&law, 0.0, 1.0, (0.5, 0.0), 60, 8, 1e-10).unwrap();
        assert!(traj.tail_amplitude(16) < 1e-3);
    }

    #[test]
    fn origin_multipliers_match_linear_theory() {
        // f = 0, c3 = 0: the origin is a fixed point of the period map and the
        // variational system is the linearly damped oscillator, so
        // |multiplier| = exp(-pi c1 / omega).
        let law = quintic(0.1, 0.0);
        let omega = 1.3;
        let orbit = shoot(&law, 0.0, omega, (0.0, 0.0), &ShootConfig::default()).unwrap();
        assert!(orbit.initial.x.abs() < 1e-12 && orbit.initial.v.abs() < 1e-12);
        let expect = (-std::f64::consts::PI * 0.1 / omega).exp();
        for m in orbit.multipliers {
            assert_relative_eq!(m.norm(), expect, max_relative = 1e-8);
        }
        assert!(orbit.stable);
    }

    #[test]
    fn shooting_abel_liouville_identity() {
        let law = quintic(0.1, -0.6);
        let orbit = shoot(&law, 0.009, 1.0, (0.2, 0.0), &ShootConfig::default()).unwrap();
        let det = orbit.monodromy.determinant();
        assert_relative_eq!(det, orbit.trace_integral.exp(), max_relative = 1e-8);
    }

    #[test]
    fn half_period_antisymmetry_of_symmetric_orbit() {
        let law = quintic(0.1, -0.6);
        let orbit = shoot(&law, 0.009, 1.0, (0.2, 0.0), &ShootConfig::default()).unwrap();
        let osc = Oscillator::new(&law, 0.009, 1.0).unwrap();
        let ctl = OdeControl::with_tol(1e-11);
        let half = dopri5_to(
            &mut osc.rhs2(),
            0.0,
            orbit.period / 2.0,
            [orbit.initial.x, orbit.initial.v],
            &ctl,
        )
        .unwrap();
        assert_relative_eq!(half[0], -orbit.initial.x, epsilon = 1e-7);
        assert_relative_eq!(half[1], -orbit.initial.v, epsilon = 1e-7);
    }

    #[test]
    fn energy_balance_on_converged_orbit() {
        let law = quintic(0.1, -0.6);
        let orbit = shoot(&law, 0.009, 1.0, (0.6, 0.1), &ShootConfig::default()).unwrap();
        let (dissipated, injected) = orbit_energy_balance(&law, 0.009, 1.0, &orbit, 1e-11).unwrap();
        assert_relative_eq!(dissipated, injected, max_relative = 1e-6);
    }
}
