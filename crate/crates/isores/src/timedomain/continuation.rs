//! Pseudo-arclength continuation of periodic orbits through folds, with
//! Floquet-based fold and Neimark-Sacker event flags and closed-loop (IRC)
//! detection.

use super::ode::{dopri5_to, OdeControl};
use super::{multipliers_of, Oscillator, PeriodicOrbit, ShootConfig};
use crate::error::{Error, Result};
use crate::hbcore::{BranchKind, TraceResult};
use crate::model::DampingLaw;
use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContinuationParam {
    Omega,
    Forcing,
}

#[derive(Debug, Clone)]
pub struct ContinuationConfig {
    /// initial arclength step
    pub ds0: f64,
    pub ds_min: f64,
    pub ds_max: f64,
    pub max_steps: usize,
    pub corrector_tol: f64,
    pub corrector_max_iter: usize,
    pub tol_ode: f64,
    /// normalized distance below which the branch is declared a closed loop
    pub tol_loop: f64,
    /// continuation parameter bounds; the branch terminates on leaving them
    pub param_range: (f64, f64),
}

impl Default for ContinuationConfig {
    fn default() -> Self {
        Self {
            ds0: 5e-3,
            ds_min: 1e-9,
            ds_max: 5e-2,
            max_steps: 4000,
            corrector_tol: 1e-9,
            corrector_max_iter: 8,
            tol_ode: 1e-10,
            tol_loop: 1e-6,
            param_range: (0.2, 2.0),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BranchPoint {
    pub omega: f64,
    pub forcing: f64,
    pub orbit: PeriodicOrbit,
    pub fold_flag: bool,
    pub ns_flag: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// branch returned to its starting orbit: a closed loop
    Closed,
    ParamOutOfRange,
    MaxSteps,
    StepUnderflow,
}

#[derive(Debug, Clone)]
pub struct OrbitBranch {
    pub points: Vec<BranchPoint>,
    pub termination: Termination,
}

impl OrbitBranch {
    pub fn closed(&self) -> bool {
        self.termination == Termination::Closed
    }

    pub fn amplitude_range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for p in &self.points {
            lo = lo.min(p.orbit.amplitude);
            hi = hi.max(p.orbit.amplitude);
        }
        (lo, hi)
    }

    pub fn omega_range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for p in &self.points {
            lo = lo.min(p.omega);
            hi = hi.max(p.omega);
        }
        (lo, hi)
    }

    pub fn fold_count(&self) -> usize {
        self.points.iter().filter(|p| p.fold_flag).count()
    }
}

/// Period-map residual and monodromy at augmented state (x0, v0, param).
struct Flow<'a> {
    law: &'a DampingLaw,
    param: ContinuationParam,
    fixed_omega: f64,
    fixed_forcing: f64,
    tol_ode: f64,
}

impl<'a> Flow<'a> {
    fn omega(&self, u: &Vector3<f64>) -> f64 {
        match self.param {
            ContinuationParam::Omega => u[2],
            ContinuationParam::Forcing => self.fixed_omega,
        }
    }

    fn forcing(&self, u: &Vector3<f64>) -> f64 {
        match self.param {
            ContinuationParam::Omega => self.fixed_forcing,
            ContinuationParam::Forcing => u[2],
        }
    }

    /// Residual of the period map plus its monodromy and trace integral.
    fn eval(&self, u: &Vector3<f64>) -> Result<(Vector2<f64>, Matrix2<f64>, f64)> {
        let omega = self.omega(u);
        let forcing = self.forcing(u);
        if !(omega > 1e-6) {
            return Err(Error::ContinuationFailed(format!("frequency collapsed ({omega:.3e})")));
        }
        let osc = Oscillator::new(self.law, forcing.max(0.0), omega)?;
        let ctl = OdeControl::with_tol(self.tol_ode);
        let y0 = [u[0], u[1], 1.0, 0.0, 0.0, 1.0, 0.0];
        let yt = dopri5_to(&mut osc.rhs_variational(), 0.0, osc.period(), y0, &ctl)?;
        Ok((
            Vector2::new(yt[0] - u[0], yt[1] - u[1]),
            Matrix2::new(yt[2], yt[4], yt[3], yt[5]),
            yt[6],
        ))
    }

    /// 2x3 Jacobian of the residual: [M - I | dR/dparam], the last column by
    /// one-sided finite differences.
    fn jacobian(&self, u: &Vector3<f64>, r: &Vector2<f64>, m: &Matrix2<f64>) -> Result<[Vector2<f64>; 3]> {
        let h = 1e-7 * u[2].abs().max(1e-3);
        let mut up = *u;
        up[2] += h;
        let (rp, _, _) = self.eval(&up)?;
        let dparam = (rp - r) / h;
        let ji = *m - Matrix2::identity();
        Ok([ji.column(0).into(), ji.column(1).into(), dparam])
    }
}

fn tangent_from_jacobian(cols: &[Vector2<f64>; 3], prev: Option<&Vector3<f64>>) -> Vector3<f64> {
    // null vector of the 2x3 Jacobian via the cross product of its rows
    let r0 = Vector3::new(cols[0][0], cols[1][0], cols[2][0]);
    let r1 = Vector3::new(cols[0][1], cols[1][1], cols[2][1]);
    let mut t = r0.cross(&r1);
    let n = t.norm();
    if n > 1e-14 {
        t /= n;
    } else {
        t = Vector3::new(0.0, 0.0, 1.0);
    }
    if let Some(p) = prev {
        if t.dot(p) < 0.0 {
            t = -t;
        }
    }
    t
}

/// Follows the family of periodic orbits from `start` under variation of
/// `param`, rounding folds by pseudo-arclength stepping. Fold points (a real
/// multiplier crossing +1) and Neimark-Sacker points (a complex pair crossing
/// the unit circle) are flagged; the latter are never followed onto the
/// quasiperiodic branch. A branch that returns to its starting orbit is
/// reported as closed; open branches are continued in both directions from
/// the starting orbit and stitched.
pub fn continue_branch(
    law: &DampingLaw,
    start: &PeriodicOrbit,
    forcing: f64,
    omega: f64,
    param: ContinuationParam,
    cfg: &ContinuationConfig,
) -> Result<OrbitBranch> {
    let flow = Flow { law, param, fixed_omega: omega, fixed_forcing: forcing, tol_ode: cfg.tol_ode };
    let p0 = match param {
        ContinuationParam::Omega => omega,
        ContinuationParam::Forcing => forcing,
    };
    let u0 = Vector3::new(start.initial.x, start.initial.v, p0);
    let (r0, m0, tr0) = flow.eval(&u0)?;
    if r0.norm() > 1e-6 * (1.0 + u0.norm()) {
        return Err(Error::ContinuationFailed(format!(
            "starting orbit is not converged (residual {:.3e})",
            r0.norm()
        )));
    }
    let jac = flow.jacobian(&u0, &r0, &m0)?;
    let tangent0 = tangent_from_jacobian(&jac, None);
    let start_point = branch_point(&flow, &u0, &m0, tr0, start.amplitude, false, false)?;

    let forward = follow(&flow, u0, tangent0, &m0, start, cfg)?;
    if forward.1 == Termination::Closed {
        let mut points = vec![start_point];
        points.extend(forward.0);
        return Ok(OrbitBranch { points, termination: Termination::Closed });
    }
    let backward = follow(&flow, u0, -tangent0, &m0, start, cfg)?;
    if backward.1 == Termination::Closed {
        let mut points = vec![start_point];
        points.extend(backward.0);
        return Ok(OrbitBranch { points, termination: Termination::Closed });
    }
    let mut points: Vec<BranchPoint> = backward.0.into_iter().rev().collect();
    points.push(start_point);
    points.extend(forward.0);
    Ok(OrbitBranch { points, termination: forward.1 })
}

/// One-directional pseudo-arclength sweep; returns the points past the
/// starting orbit and the reason the sweep stopped.
fn follow(
    flow: &Flow,
    u0: Vector3<f64>,
    tangent0: Vector3<f64>,
    m0: &Matrix2<f64>,
    start: &PeriodicOrbit,
    cfg: &ContinuationConfig,
) -> Result<(Vec<BranchPoint>, Termination)> {
    let mut u = u0;
    let mut tangent = tangent0;
    // branch extent estimate for loop-closure normalization
    let mut extent = Vector3::new(
        start.amplitude.max(1e-3),
        start.amplitude.max(1e-3),
        u0[2].abs().max(1e-3),
    );

    let mut points: Vec<BranchPoint> = Vec::new();
    let u_start = u0;
    let mut ds = cfg.ds0;
    let mut prev_det = (m0 - Matrix2::identity()).determinant();
    let mut prev_cplx_excess = complex_excess(m0);
    let mut arclength = 0.0;
    let mut termination = Termination::MaxSteps;

    // reject corrector states that leave a padded parameter window or blow up
    let p_span = (cfg.param_range.1 - cfg.param_range.0).max(1e-3);
    let p_window = (cfg.param_range.0 - 0.3 * p_span, cfg.param_range.1 + 0.3 * p_span);
    let state_bound = 1e3 * (1.0 + start.amplitude);

    for _ in 0..cfg.max_steps {
        // predictor
        let pred = u + tangent * ds;
        // corrector: Newton on {R = 0, tangent . (w - pred) = 0}
        let mut w = pred;
        let mut converged = None;
        for _ in 0..cfg.corrector_max_iter {
            if !w.iter().all(|c| c.is_finite())
                || w.norm() > state_bound
                || w[2] < p_window.0
                || w[2] > p_window.1
            {
                break;
            }
            let (r, m, tr) = match flow.eval(&w) {
                Ok(v) => v,
                Err(_) => break,
            };
            let scale = 1.0 + w.norm();
            let arc = tangent.dot(&(w - pred));
            if r.norm() <= cfg.corrector_tol * scale && arc.abs() <= cfg.corrector_tol * scale {
                converged = Some((r, m, tr));
                break;
            }
            let cols = match flow.jacobian(&w, &r, &m) {
                Ok(c) => c,
                Err(_) => break,
            };
            let j3 = Matrix3::new(
                cols[0][0], cols[1][0], cols[2][0],
                cols[0][1], cols[1][1], cols[2][1],
                tangent[0], tangent[1], tangent[2],
            );
            let rhs = Vector3::new(r[0], r[1], arc);
            let Some(inv) = j3.try_inverse() else { break };
            let step = inv * rhs;
            w -= step;
        }

        // post-acceptance data can still fail near blow-up states; treat that
        // like a corrector failure and retry with a shorter step
        let accepted = converged.and_then(|(_, m, tr)| {
            let cols = flow.jacobian(&w, &Vector2::zeros(), &m).ok()?;
            let amplitude = amplitude_at(&flow, &w).ok()?;
            Some((m, tr, cols, amplitude))
        });
        let Some((m, tr, cols, amplitude)) = accepted else {
            ds *= 0.5;
            if ds < cfg.ds_min {
                termination = Termination::StepUnderflow;
                break;
            }
            continue;
        };

        tangent = tangent_from_jacobian(&cols, Some(&tangent));
        arclength += (w - u).norm();
        u = w;
        extent[0] = extent[0].max((u[0] - u_start[0]).abs());
        extent[1] = extent[1].max((u[1] - u_start[1]).abs());
        extent[2] = extent[2].max((u[2] - u_start[2]).abs());

        let det = (m - Matrix2::identity()).determinant();
        let fold_flag = det * prev_det < 0.0;
        let cplx = complex_excess(&m);
        let ns_flag = match (prev_cplx_excess, cplx) {
            (Some(a), Some(b)) => a * b < 0.0,
            _ => false,
        };
        prev_det = det;
        prev_cplx_excess = cplx;

        points.push(branch_point(&flow, &u, &m, tr, amplitude, fold_flag, ns_flag)?);

        // loop closure: back at the start after a genuine excursion
        let d = Vector3::new(
            (u[0] - u_start[0]) / extent[0].max(1e-9),
            (u[1] - u_start[1]) / extent[1].max(1e-9),
            (u[2] - u_start[2]) / extent[2].max(1e-9),
        );
        if points.len() > 10 && arclength > 20.0 * ds.max(cfg.ds0) && d.norm() < cfg.tol_loop.max(3.0 * ds / extent.norm()) {
            termination = Termination::Closed;
            break;
        }

        let p = u[2];
        if p < cfg.param_range.0 || p > cfg.param_range.1 {
            termination = Termination::ParamOutOfRange;
            break;
        }

        ds = (ds * 1.3).min(cfg.ds_max);
    }

    Ok((points, termination))
}

fn complex_excess(m: &Matrix2<f64>) -> Option<f64> {
    let tr = m.trace();
    let det = m.determinant();
    if tr * tr - 4.0 * det < 0.0 {
        // complex pair; |lambda|^2 = det
        Some(det - 1.0)
    } else {
        None
    }
}

fn amplitude_at(flow: &Flow, u: &Vector3<f64>) -> Result<f64> {
    let osc = Oscillator::new(flow.law, flow.forcing(u).max(0.0), flow.omega(u))?;
    let ctl = OdeControl::with_tol(flow.tol_ode);
    super::measure_amplitude(&osc, [u[0], u[1]], &ctl)
}

fn branch_point(
    flow: &Flow,
    u: &Vector3<f64>,
    m: &Matrix2<f64>,
    trace_integral: f64,
    amplitude: f64,
    fold_flag: bool,
    ns_flag: bool,
) -> Result<BranchPoint> {
    let omega = flow.omega(u);
    let forcing = flow.forcing(u);
    let multipliers = multipliers_of(m);
    let max_mag = multipliers.iter().map(|c| c.norm()).fold(0.0, f64::max);
    Ok(BranchPoint {
        omega,
        forcing,
        orbit: PeriodicOrbit {
            initial: super::OscState { x: u[0], v: u[1], t: 0.0 },
            period: 2.0 * std::f64::consts::PI / omega,
            multipliers,
            stable: max_mag < 1.0 + 1e-9,
            amplitude,
            monodromy: *m,
            trace_integral,
            drifted: false,
        },
        fold_flag,
        ns_flag,
    })
}

/// A seed for the IRC search: an approximate point on the isolated branch.
#[derive(Debug, Clone, Copy)]
pub struct IrcSeed {
    pub omega: f64,
    pub x_peak: f64,
}

#[derive(Debug)]
pub struct IrcSearch {
    /// deduplicated closed branches, each with the index of the isolated
    /// harmonic-balance branch it verifies (when one was supplied)
    pub loops: Vec<(OrbitBranch, Option<usize>)>,
    pub rejected: Vec<(IrcSeed, String)>,
}

/// Shoots from every seed and continues the orbit over frequency, keeping the
/// branches that close into loops. Duplicate loops are merged; each loop is
/// cross-linked to the isolated harmonic-balance branch it overlaps.
pub fn locate_irc(
    law: &DampingLaw,
    forcing: f64,
    seeds: &[IrcSeed],
    hb: Option<&TraceResult>,
    cfg: &ContinuationConfig,
) -> Result<IrcSearch> {
    let shoot_cfg = ShootConfig { tol_ode: cfg.tol_ode, ..Default::default() };
    let mut loops: Vec<(OrbitBranch, Option<usize>)> = Vec::new();
    let mut rejected = Vec::new();

    for &seed in seeds {
        let amp_sq = (seed.x_peak / 2.0) * (seed.x_peak / 2.0);
        let guess = super::hb_orbit_guess(law, forcing, seed.omega, amp_sq);
        let orbit = match super::shoot(law, forcing, seed.omega, guess, &shoot_cfg) {
            Ok(o) => o,
            Err(e) => {
                rejected.push((seed, format!("shooting failed: {e}")));
                continue;
            }
        };
        if (orbit.amplitude - seed.x_peak).abs() > 0.5 * seed.x_peak.max(0.05) {
            rejected.push((
                seed,
                format!(
                    "converged to a different orbit (amplitude {:.4} vs seed {:.4})",
                    orbit.amplitude, seed.x_peak
                ),
            ));
            continue;
        }
        let branch =
            match continue_branch(law, &orbit, forcing, seed.omega, ContinuationParam::Omega, cfg) {
                Ok(b) => b,
                Err(e) => {
                    rejected.push((seed, format!("continuation failed: {e}")));
                    continue;
                }
            };
        if !branch.closed() {
            rejected.push((seed, format!("branch did not close ({:?})", branch.termination)));
            continue;
        }
        let (alo, ahi) = branch.amplitude_range();
        let (wlo, whi) = branch.omega_range();
        let duplicate = loops.iter().any(|(b, _)| {
            let (alo2, ahi2) = b.amplitude_range();
            let (wlo2, whi2) = b.omega_range();
            (alo - alo2).abs() < 0.05 * ahi.max(ahi2)
                && (ahi - ahi2).abs() < 0.05 * ahi.max(ahi2)
                && (wlo - wlo2).abs() < 0.02
                && (whi - whi2).abs() < 0.02
        });
        if duplicate {
            continue;
        }
        let linked = hb.and_then(|t| {
            t.branches.iter().enumerate().find_map(|(i, b)| {
                if b.kind != BranchKind::Isolated {
                    return None;
                }
                let (blo, bhi) = b.x_peak_range();
                let overlap = alo.max(blo) <= ahi.min(bhi) * 1.05 + 0.02;
                let (bwlo, bwhi) = b.omega_range();
                let woverlap = wlo.max(bwlo) <= whi.min(bwhi) + 0.02;
                (overlap && woverlap).then_some(i)
            })
        });
        loops.push((branch, linked));
    }
    Ok(IrcSearch { loops, rejected })
}
