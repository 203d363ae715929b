//! Nonpersistent singularities of the response manifold: closed-form isola and
//! simple-bifurcation points, numeric classification, the hysteresis locus,
//! and the parameter-plane region chart.

use crate::error::{Error, Result};
use crate::hbcore::{trace_frequency_response_quintic, HbSystem, TraceConfig};
use crate::model::Params;
use nalgebra::{Matrix3, Vector3};
use serde::Serialize;

/// Existence thresholds in c3 at fixed c1: the unforced isola pair exists for
/// `c3 <= c31` and the forced pair S3/S4 for `c3 <= c32`; `c32 > c31` always.
pub fn thresholds(c1: f64) -> (f64, f64) {
    let c31 = -(2.0 / 3.0) * (10.0 * c1).sqrt();
    let c32 = -(10.0 / 9.0) * (2.0 * c1).sqrt();
    (c31, c32)
}

/// Qualitative parameter zone: 1 has no singularities, 2 one isola and one
/// simple bifurcation, 3 two of each.
pub fn zone(params: Params) -> u8 {
    let (c31, c32) = thresholds(params.c1);
    if params.c3 > c32 {
        1
    } else if params.c3 > c31 {
        2
    } else {
        3
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SingularKind {
    Fold,
    Isola,
    SimpleBifurcation,
    Hysteresis,
    WingedCusp,
    HighCodim,
}

impl SingularKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Fold => "fold",
            Self::Isola => "isola",
            Self::SimpleBifurcation => "simple_bifurcation",
            Self::Hysteresis => "hysteresis",
            Self::WingedCusp => "winged_cusp",
            Self::HighCodim => "high_codim",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SingularLabel {
    S1,
    S2,
    S3,
    S4,
    Numeric,
}

/// A classified nonpersistent singularity on the manifold.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SingularPoint {
    pub kind: SingularKind,
    pub amp_sq: f64,
    pub freq_sq: f64,
    pub force_sq: f64,
    pub hessian_det: f64,
    pub label: SingularLabel,
}

impl SingularPoint {
    pub fn x_peak(&self) -> f64 {
        2.0 * self.amp_sq.sqrt()
    }

    pub fn forcing(&self) -> f64 {
        self.force_sq.max(0.0).sqrt()
    }
}

/// The closed-form singular points of the quintic manifold. All sit at unit
/// squared frequency; only physically meaningful points (real, nonnegative
/// amplitude and forcing) are returned, classified by the sign of the Hessian
/// determinant. Degenerate parameter values on `c3 = c31` or `c3 = c32`
/// produce the higher-codimension points instead.
pub fn closed_form_singularities(params: Params) -> Vec<SingularPoint> {
    let Params { c1, c3 } = params;
    let sys = HbSystem::new(params);
    let (c31, c32) = thresholds(c1);
    let mut out = Vec::new();
    let eq_tol = 1e-12 * c3.abs().max(1.0);

    let classify_by_det = |amp_sq: f64, force_sq: f64, label: SingularLabel| {
        let det = sys.hessian_det_verified(amp_sq, 1.0);
        let kind = if det > 0.0 { SingularKind::Isola } else { SingularKind::SimpleBifurcation };
        SingularPoint { kind, amp_sq, freq_sq: 1.0, force_sq, hessian_det: det, label }
    };

    if (c3 - c31).abs() <= eq_tol {
        // A1 = A2 = A4, F = 0: codimension >= 4
        let amp = (10.0 * c1).sqrt() / 10.0;
        out.push(SingularPoint {
            kind: SingularKind::HighCodim,
            amp_sq: amp,
            freq_sq: 1.0,
            force_sq: 0.0,
            hessian_det: sys.hessian_det_verified(amp, 1.0),
            label: SingularLabel::Numeric,
        });
    } else if c3 < c31 {
        let s = (9.0 * c3 * c3 - 40.0 * c1).sqrt();
        let a1 = (-3.0 * c3 - s) / 20.0;
        let a2 = (-3.0 * c3 + s) / 20.0;
        out.push(classify_by_det(a1, 0.0, SingularLabel::S1));
        out.push(classify_by_det(a2, 0.0, SingularLabel::S2));
    }

    if (c3 - c32).abs() <= eq_tol {
        // S3 and S4 coalesce into the winged cusp
        let amp = (2.0 * c1).sqrt() / 10.0;
        let force_sq = sys.residual(amp, 1.0, 0.0);
        out.push(SingularPoint {
            kind: SingularKind::WingedCusp,
            amp_sq: amp,
            freq_sq: 1.0,
            force_sq,
            hessian_det: sys.hessian_det_verified(amp, 1.0),
            label: SingularLabel::Numeric,
        });
    } else if c3 < c32 {
        let s = (81.0 * c3 * c3 - 200.0 * c1).sqrt();
        let a3 = (-9.0 * c3 - s) / 100.0;
        let a4 = (-9.0 * c3 + s) / 100.0;
        let f3 = (-9.0 * c3 - s) * (200.0 * c1 - 3.0 * c3 * (s + 9.0 * c3)).powi(2) / 6.25e6;
        let f4 = (-9.0 * c3 + s) * (200.0 * c1 + 3.0 * c3 * (s - 9.0 * c3)).powi(2) / 6.25e6;
        out.push(classify_by_det(a3, f3, SingularLabel::S3));
        out.push(classify_by_det(a4, f4, SingularLabel::S4));
    }

    out.sort_by(|a, b| a.amp_sq.partial_cmp(&b.amp_sq).expect("finite amplitude"));
    out
}

/// Scale-aware zero test: each derivative is compared against the magnitude
/// of its own largest term at the point.
struct ConditionEval {
    sys: HbSystem,
    amp_sq: f64,
    freq_sq: f64,
    tol_defining: f64,
    tol_nondegenerate: f64,
}

impl ConditionEval {
    fn amp_scale(&self) -> f64 {
        let (a, w) = (self.amp_sq, self.freq_sq);
        let (c1, c3) = (self.sys.c1, self.sys.c3);
        [
            500.0 * a.powi(4) * w.powi(5),
            240.0 * c3 * a.powi(3) * w.powi(4),
            3.0 * (20.0 * c1 + 9.0 * c3 * c3) * a * a * w.powi(3),
            w * w * (12.0 * c1 * c3 * a + 1.0),
            (c1 * c1 - 2.0) * w,
            1.0,
        ]
        .into_iter()
        .map(f64::abs)
        .fold(f64::MIN_POSITIVE, f64::max)
    }

    fn freq_scale(&self) -> f64 {
        let (a, w) = (self.amp_sq, self.freq_sq);
        let (c1, c3) = (self.sys.c1, self.sys.c3);
        a * [
            500.0 * a.powi(4) * w.powi(4),
            240.0 * c3 * a.powi(3) * w.powi(3),
            27.0 * c3 * c3 * a * a * w * w,
            60.0 * c1 * a * a * w * w,
            12.0 * c1 * c3 * a * w,
            c1 * c1,
            2.0 * w,
            2.0,
        ]
        .into_iter()
        .map(f64::abs)
        .fold(f64::MIN_POSITIVE, f64::max)
    }

    fn amp2_scale(&self) -> f64 {
        let (a, w) = (self.amp_sq, self.freq_sq);
        let (c1, c3) = (self.sys.c1, self.sys.c3);
        2.0 * w
            * w
            * [
                1000.0 * a.powi(3) * w.powi(3),
                360.0 * c3 * a * a * w * w,
                27.0 * c3 * c3 * a * w,
                60.0 * c1 * a * w,
                6.0 * c1 * c3,
            ]
            .into_iter()
            .map(f64::abs)
            .fold(f64::MIN_POSITIVE, f64::max)
    }

    fn mixed_scale(&self) -> f64 {
        let (a, w) = (self.amp_sq, self.freq_sq);
        let (c1, c3) = (self.sys.c1, self.sys.c3);
        [
            2500.0 * a.powi(4) * w.powi(4),
            960.0 * c3 * a.powi(3) * w.powi(3),
            (180.0 * c1 + 81.0 * c3 * c3) * a * a * w * w,
            24.0 * c1 * c3 * a * w,
            2.0 * w,
            c1 * c1 - 2.0,
        ]
        .into_iter()
        .map(f64::abs)
        .fold(f64::MIN_POSITIVE, f64::max)
    }

    fn is_zero(&self, value: f64, scale: f64) -> bool {
        value.abs() <= self.tol_defining * scale
    }

    fn is_nonzero(&self, value: f64, scale: f64) -> bool {
        value.abs() > self.tol_nondegenerate * scale
    }

    /// Mixed partial by central differences of dg/dA in the frequency, as the
    /// classification contract prescribes.
    fn mixed_fd(&self) -> f64 {
        let h = 1e-5 * self.freq_sq.abs().max(0.1);
        (self.sys.d_amp(self.amp_sq, self.freq_sq + h) - self.sys.d_amp(self.amp_sq, self.freq_sq - h))
            / (2.0 * h)
    }
}

/// Classifies the singularity at a manifold point by its defining and
/// nondegeneracy conditions, most degenerate first. Points where every
/// defining condition beyond the fold fails are reported as plain folds;
/// points whose defining conditions hold but whose nondegeneracy tests all
/// fail are an error.
pub fn classify(
    amp_sq: f64,
    freq_sq: f64,
    force_sq: f64,
    params: Params,
    tol_sing: f64,
) -> Result<SingularKind> {
    let sys = HbSystem::new(params);
    let g = sys.residual(amp_sq, freq_sq, force_sq);
    let g_scale = sys.residual_scale(amp_sq, freq_sq, force_sq);
    if g.abs() > tol_sing.max(1e-8) * g_scale.max(1.0) {
        return Err(Error::InvalidInput(format!(
            "point is not on the manifold (|g| = {:.3e})",
            g.abs()
        )));
    }
    let ev = ConditionEval {
        sys,
        amp_sq,
        freq_sq,
        tol_defining: tol_sing,
        tol_nondegenerate: 1e-4,
    };

    let ga = sys.d_amp(amp_sq, freq_sq);
    let gw = sys.d_freq(amp_sq, freq_sq);
    let gaa = sys.d2_amp2(amp_sq, freq_sq);
    let gaaa = sys.d3_amp3(amp_sq, freq_sq);
    let gaw = ev.mixed_fd();
    let gww = sys.d2_freq2(amp_sq, freq_sq);
    let g4 = sys.d4_amp4(amp_sq, freq_sq);
    let det = sys.hessian_det_verified(amp_sq, freq_sq);

    let ga0 = ev.is_zero(ga, ev.amp_scale());
    if !ga0 {
        return Err(Error::InvalidInput(
            "dg/dA does not vanish: not a singular point".into(),
        ));
    }
    let gw0 = ev.is_zero(gw, ev.freq_scale());
    let gaa0 = ev.is_zero(gaa, ev.amp2_scale());
    let gaaa0 = ev.is_zero(gaaa, ev.amp2_scale() / amp_sq.max(1e-6));
    let gaw0 = ev.is_zero(gaw, ev.mixed_scale());

    // codimension >= 4: everything through the third amplitude derivative and
    // the mixed partial vanishes
    if gw0 && gaa0 && gaaa0 && gaw0 {
        if ev.is_nonzero(g4, ev.amp2_scale() / amp_sq.max(1e-6).powi(2)) {
            return Ok(SingularKind::HighCodim);
        }
        return Err(Error::Unclassifiable(
            "codim >= 4 defining conditions hold but d4g/dA4 vanishes too".into(),
        ));
    }

    // winged cusp: dg/dA = d2g/dA2 = dg/dW = d2g/dAdW = 0 with
    // d3g/dA3 != 0 and d2g/dW2 != 0
    if gw0 && gaa0 && gaw0 {
        let nd1 = ev.is_nonzero(gaaa, ev.amp2_scale() / amp_sq.max(1e-6));
        let nd2 = ev.is_nonzero(gww, ev.freq_scale() / freq_sq.max(1e-6));
        if nd1 && nd2 {
            return Ok(SingularKind::WingedCusp);
        }
        return Err(Error::Unclassifiable(
            "winged-cusp defining conditions hold but a nondegeneracy fails".into(),
        ));
    }

    // isola / simple bifurcation: dg/dW = 0, nondegenerate Hessian
    if gw0 {
        let nd = ev.is_nonzero(gaa, ev.amp2_scale());
        // the determinant is a difference of two products; its cancellation
        // scale is the magnitude of those products
        let det_scale = (gaa * gww).abs() + (gaw * gaw).abs();
        if nd && ev.is_nonzero(det, det_scale.max(1e-12)) {
            return Ok(if det > 0.0 { SingularKind::Isola } else { SingularKind::SimpleBifurcation });
        }
        return Err(Error::Unclassifiable(format!(
            "dg/dW = 0 but Hessian data degenerate (d2g/dA2 = {gaa:.3e}, det = {det:.3e})"
        )));
    }

    // hysteresis: d2g/dA2 = 0 with dg/dW != 0 and d3g/dA3 != 0
    if gaa0 {
        let nd1 = ev.is_nonzero(gw, ev.freq_scale());
        let nd2 = ev.is_nonzero(gaaa, ev.amp2_scale() / amp_sq.max(1e-6));
        if nd1 && nd2 {
            return Ok(SingularKind::Hysteresis);
        }
        return Err(Error::Unclassifiable(
            "hysteresis defining conditions hold but a nondegeneracy fails".into(),
        ));
    }

    // only g = dg/dA = 0: persistent fold
    Ok(SingularKind::Fold)
}

/// Newton refinement of {g = 0, dg/dA = 0, dg/dW = 0} in (A, W, F) from a
/// seed; used to confirm the closed forms and to locate singular points
/// numerically.
pub fn refine_singular_point(params: Params, seed: (f64, f64, f64)) -> Result<(f64, f64, f64)> {
    let sys = HbSystem::new(params);
    let (mut a, mut w, mut f) = seed;
    for _ in 0..60 {
        let r = Vector3::new(sys.residual(a, w, f), sys.d_amp(a, w), sys.d_freq(a, w));
        if r.norm() <= 1e-13 * sys.residual_scale(a, w, f).max(1.0) {
            return Ok((a, w, f));
        }
        let j = Matrix3::new(
            sys.d_amp(a, w),
            sys.d_freq(a, w),
            -1.0,
            sys.d2_amp2(a, w),
            sys.d2_amp_freq(a, w),
            0.0,
            sys.d2_amp_freq(a, w),
            sys.d2_freq2(a, w),
            0.0,
        );
        let Some(inv) = j.try_inverse() else {
            return Err(Error::IllConditioned("singular Jacobian in singularity refinement".into()));
        };
        let step = inv * r;
        a -= step[0];
        w -= step[1];
        f -= step[2];
        if ![a, w, f].iter().all(|v| v.is_finite()) {
            return Err(Error::IllConditioned("singularity refinement diverged".into()));
        }
    }
    Err(Error::IllConditioned("singularity refinement did not converge".into()))
}

/// A point of the hysteresis locus.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct HysteresisPoint {
    pub c3: f64,
    pub forcing: f64,
    pub amp_sq: f64,
    pub freq_sq: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct HysteresisBranch {
    pub points: Vec<HysteresisPoint>,
    /// set when the continuation stopped on a vanishing nondegeneracy
    /// (collision with a higher-order singularity such as the winged cusp)
    pub termination: Option<String>,
}

/// Newton solve of the hysteresis system {g = 0, dg/dA = 0, d2g/dA2 = 0} in
/// (A, W, F) at fixed parameters.
pub fn refine_hysteresis_point(
    params: Params,
    seed: (f64, f64, f64),
) -> Result<(f64, f64, f64)> {
    let sys = HbSystem::new(params);
    let (mut a, mut w, mut f) = seed;
    for _ in 0..200 {
        let r = Vector3::new(sys.residual(a, w, f), sys.d_amp(a, w), sys.d2_amp2(a, w));
        if r.norm() <= 1e-13 * sys.residual_scale(a, w, f).max(1.0) {
            return Ok((a, w, f));
        }
        let j = Matrix3::new(
            sys.d_amp(a, w),
            sys.d_freq(a, w),
            -1.0,
            sys.d2_amp2(a, w),
            sys.d2_amp_freq(a, w),
            0.0,
            sys.d3_amp3(a, w),
            sys.d3_amp2_freq(a, w),
            0.0,
        );
        let Some(inv) = j.try_inverse() else {
            return Err(Error::IllConditioned("singular Jacobian in hysteresis refinement".into()));
        };
        let mut step = inv * r;
        // damp long steps: seeds can start far from the locus
        step[0] = step[0].clamp(-0.2 * a.abs().max(0.05), 0.2 * a.abs().max(0.05));
        step[1] = step[1].clamp(-0.1 * w.max(0.1), 0.1 * w.max(0.1));
        a -= step[0];
        w -= step[1];
        f -= step[2];
        if !(a.is_finite() && w.is_finite() && f.is_finite()) || w <= 0.0 {
            return Err(Error::IllConditioned("hysteresis refinement diverged".into()));
        }
    }
    Err(Error::IllConditioned("hysteresis refinement did not converge".into()))
}

/// Finds hysteresis seeds at fixed parameters by scanning the folds of
/// response curves over a sweep of forcing amplitudes and keeping the fold
/// with the smallest |d2g/dA2|, plus a crude Newton grid as fallback.
fn hysteresis_seeds(params: Params) -> Vec<(f64, f64, f64)> {
    let sys = HbSystem::new(params);
    let mut seeds: Vec<(f64, f64, f64)> = Vec::new();

    // fold scan: for a sweep of f, walk the response roots over frequency and
    // find fold points (dg/dA changes sign along the root ordering)
    let cfg = TraceConfig { base_points: 400, ..TraceConfig::default() };
    for k in 0..14 {
        let f = 2e-3 * 1.45f64.powi(k);
        let Ok(tr) = trace_frequency_response_quintic(params, f, &cfg) else { continue };
        for branch in &tr.branches {
            for pair in branch.samples.windows(2) {
                let d0 = sys.d_amp(pair[0].amp_sq, pair[0].omega * pair[0].omega);
                let d1 = sys.d_amp(pair[1].amp_sq, pair[1].omega * pair[1].omega);
                if d0 * d1 < 0.0 {
                    let a = 0.5 * (pair[0].amp_sq + pair[1].amp_sq);
                    let w = 0.5 * (pair[0].omega * pair[0].omega + pair[1].omega * pair[1].omega);
                    seeds.push((a, w, f * f));
                }
            }
        }
    }

    // grid fallback in (A, W)
    for ia in 1..24 {
        for &w0 in &[0.85, 0.95, 1.05, 1.15] {
            seeds.push((0.016 * ia as f64, w0, 1e-4));
        }
    }
    seeds
}

/// Numerically continues the hysteresis locus {g = dg/dA = d2g/dA2 = 0} over
/// the requested c3 range at fixed c1. Multiple disconnected structures (and
/// both frequency flanks of each) are returned as separate polylines; a
/// branch records its termination when a nondegeneracy collapses, e.g. where
/// it runs into the winged cusp.
pub fn hysteresis_locus(c1: f64, c3_range: (f64, f64), steps: usize) -> Result<Vec<HysteresisBranch>> {
    if !(c1 > 0.0) {
        return Err(Error::InvalidParameter(format!("c1 must be > 0, got {c1}")));
    }
    let (c3_lo, c3_hi) = (c3_range.0.min(c3_range.1), c3_range.0.max(c3_range.1));
    let n = steps.max(8);
    let start_c3 = 0.5 * (c3_lo + c3_hi);
    let params0 = Params::new(c1, start_c3)?;

    // collect distinct hysteresis points at the mid-range c3
    let mut anchors: Vec<(f64, f64, f64)> = Vec::new();
    for seed in hysteresis_seeds(params0) {
        if let Ok(p) = refine_hysteresis_point(params0, seed) {
            if p.0 > 0.0 && p.2 >= -1e-12 {
                let dup = anchors
                    .iter()
                    .any(|q| (q.0 - p.0).abs() < 1e-6 && (q.1 - p.1).abs() < 1e-6);
                if !dup {
                    anchors.push(p);
                }
            }
        }
    }

    let mut branches = Vec::new();
    for anchor in anchors {
        let mut pts = std::collections::BTreeMap::new();
        let mut termination = None;
        for dir in [1.0f64, -1.0] {
            let mut current = anchor;
            let mut k = 0usize;
            loop {
                let c3 = start_c3 + dir * (c3_hi - c3_lo) * k as f64 / n as f64;
                if c3 < c3_lo - 1e-12 || c3 > c3_hi + 1e-12 {
                    break;
                }
                let params = Params::new(c1, c3)?;
                match refine_hysteresis_point(params, current) {
                    Ok(p) if p.0 > 0.0 && p.2 >= -1e-12 => {
                        let sys = HbSystem::new(params);
                        // nondegeneracy monitors of the hysteresis
                        let gw = sys.d_freq(p.0, p.1);
                        let gaaa = sys.d3_amp3(p.0, p.1);
                        let gw_scale = p.0 * (500.0 * p.0.powi(4) + 2.0).max(1.0);
                        if gw.abs() < 1e-7 * gw_scale || gaaa.abs() < 1e-7 {
                            termination = Some(format!(
                                "nondegeneracy vanished at c3 = {c3:.6} (dg/dW = {gw:.3e}, d3g/dA3 = {gaaa:.3e}): higher-order singularity"
                            ));
                            break;
                        }
                        pts.insert(
                            (c3 * 1e12) as i64,
                            HysteresisPoint {
                                c3,
                                forcing: p.2.max(0.0).sqrt(),
                                amp_sq: p.0,
                                freq_sq: p.1,
                            },
                        );
                        current = p;
                    }
                    _ => break,
                }
                k += 1;
            }
        }
        if pts.len() >= 2 {
            branches.push(HysteresisBranch { points: pts.into_values().collect(), termination });
        }
    }

    // drop duplicate branches (same structure found from several anchors)
    branches.sort_by(|a, b| {
        a.points[0]
            .amp_sq
            .partial_cmp(&b.points[0].amp_sq)
            .expect("finite amplitude")
    });
    branches.dedup_by(|a, b| {
        let fa = a.points[a.points.len() / 2].forcing;
        let fb = b.points[b.points.len() / 2].forcing;
        let wa = a.points[a.points.len() / 2].freq_sq;
        let wb = b.points[b.points.len() / 2].freq_sq;
        (fa - fb).abs() < 1e-6 && (wa - wb).abs() < 1e-4
    });
    Ok(branches)
}

/// One labeled curve of the region chart.
#[derive(Debug, Clone, Serialize)]
pub struct ChartCurve {
    pub kind: SingularKind,
    /// (c3, f) polyline, plus the underlying manifold coordinates
    pub points: Vec<(f64, f64, f64, f64)>, // (c3, f, A, omega)
}

#[derive(Debug, Clone, Serialize)]
pub struct ChartZone {
    pub label: char,
    pub c3: f64,
    pub f: f64,
    pub irc_count: usize,
    pub branch_count: usize,
}

/// Region chart of the (c3, f) parameter plane at fixed c1.
#[derive(Debug, Clone, Serialize)]
pub struct RegionChart {
    pub c1: f64,
    pub isola_curves: Vec<ChartCurve>,
    pub simple_bif_curves: Vec<ChartCurve>,
    pub hysteresis_curves: Vec<ChartCurve>,
    pub winged_cusp: Option<(f64, f64)>,
    pub high_codim: Option<(f64, f64)>,
    /// c3 where the two merge curves cross: superisola scenarios between this
    /// value and c31
    pub superisola_boundary: Option<f64>,
    pub zones: Vec<ChartZone>,
    pub warnings: Vec<String>,
}

/// Assembles the region chart: isola and simple-bifurcation curves swept in
/// closed form over c3, the hysteresis locus, the winged cusp, the
/// codimension >= 4 point, and representative zone samples labeled by their
/// traced IRC count.
pub fn region_chart(
    c1: f64,
    c3_window: (f64, f64),
    f_max: f64,
    resolution: usize,
) -> Result<RegionChart> {
    if !(c1 > 0.0) {
        return Err(Error::InvalidParameter(format!("c1 must be > 0, got {c1}")));
    }
    let (c3_lo, c3_hi) = (c3_window.0.min(c3_window.1), c3_window.0.max(c3_window.1));
    if !(c3_hi > c3_lo) || !(f_max > 0.0) {
        return Err(Error::InvalidInput("empty region-chart window".into()));
    }
    let n = resolution.max(16);
    let (c31, c32) = thresholds(c1);
    let mut warnings = Vec::new();

    let mut isola_curves: Vec<ChartCurve> = Vec::new();
    let mut simple_bif_curves: Vec<ChartCurve> = Vec::new();

    // sweep the closed forms over c3
    let mut s4_isola = Vec::new();
    let mut s4_bif = Vec::new();
    let mut s3_bif = Vec::new();
    let mut zero_line = Vec::new();
    for i in 0..=n {
        let c3 = c3_lo + (c3_hi - c3_lo) * i as f64 / n as f64;
        let params = match Params::new(c1, c3) {
            Ok(p) => p,
            Err(_) => continue,
        };
        for p in closed_form_singularities(params) {
            let f = p.forcing();
            if f > f_max {
                continue;
            }
            let rec = (c3, f, p.amp_sq, 1.0);
            match (p.label, p.kind) {
                (SingularLabel::S3, _) => s3_bif.push(rec),
                (SingularLabel::S4, SingularKind::Isola) => s4_isola.push(rec),
                (SingularLabel::S4, SingularKind::SimpleBifurcation) => s4_bif.push(rec),
                (SingularLabel::S1 | SingularLabel::S2, SingularKind::Isola) => {
                    zero_line.push(rec)
                }
                _ => {}
            }
        }
    }
    if !s4_isola.is_empty() {
        isola_curves.push(ChartCurve { kind: SingularKind::Isola, points: s4_isola });
    }
    if !zero_line.is_empty() {
        isola_curves.push(ChartCurve { kind: SingularKind::Isola, points: zero_line });
    }
    if !s3_bif.is_empty() {
        simple_bif_curves.push(ChartCurve { kind: SingularKind::SimpleBifurcation, points: s3_bif });
    }
    if !s4_bif.is_empty() {
        simple_bif_curves.push(ChartCurve { kind: SingularKind::SimpleBifurcation, points: s4_bif });
    }

    // hysteresis locus
    let hysteresis_curves = match hysteresis_locus(c1, (c3_lo, c3_hi), n) {
        Ok(branches) => branches
            .into_iter()
            .map(|b| {
                if let Some(t) = &b.termination {
                    warnings.push(format!("hysteresis locus: {t}"));
                }
                ChartCurve {
                    kind: SingularKind::Hysteresis,
                    points: b
                        .points
                        .iter()
                        .map(|p| (p.c3, p.forcing, p.amp_sq, p.freq_sq.sqrt()))
                        .collect(),
                }
            })
            .collect(),
        Err(e) => {
            warnings.push(format!("hysteresis locus failed: {e}"));
            Vec::new()
        }
    };

    // special points
    let winged_cusp = (c32 >= c3_lo && c32 <= c3_hi).then(|| {
        let sys = HbSystem::new(Params::new(c1, c32).expect("valid params"));
        let amp = (2.0 * c1).sqrt() / 10.0;
        (c32, sys.residual(amp, 1.0, 0.0).max(0.0).sqrt())
    });
    let high_codim = (c31 >= c3_lo && c31 <= c3_hi).then_some((c31, 0.0));

    // merge-curve crossing (superisola boundary): F3(c3) = F4(c3) for c3 < c31
    let superisola_boundary = if c3_lo < c31 {
        let diff = |c3: f64| {
            let s = (81.0 * c3 * c3 - 200.0 * c1).sqrt();
            let f3 = (-9.0 * c3 - s) * (200.0 * c1 - 3.0 * c3 * (s + 9.0 * c3)).powi(2);
            let f4 = (-9.0 * c3 + s) * (200.0 * c1 + 3.0 * c3 * (s - 9.0 * c3)).powi(2);
            f3 - f4
        };
        crate::numeric::scan_roots(diff, c3_lo.min(c31 - 1e-9) - 0.0, c31 - 1e-9, 400, 1e-12)
            .ok()
            .and_then(|r| r.first().copied())
    } else {
        None
    };

    // representative zone samples labeled by traced topology
    let mut zones = Vec::new();
    let zone_reps = zone_representatives(c1, (c3_lo, c3_hi), f_max);
    for (label, c3, f) in zone_reps {
        let params = Params::new(c1, c3)?;
        let cfg = TraceConfig { base_points: 600, ..TraceConfig::default() };
        match trace_frequency_response_quintic(params, f, &cfg) {
            Ok(tr) => zones.push(ChartZone {
                label,
                c3,
                f,
                irc_count: tr.irc_count(),
                branch_count: tr.branches.len(),
            }),
            Err(e) => warnings.push(format!("zone {label} sample failed: {e}")),
        }
    }

    Ok(RegionChart {
        c1,
        isola_curves,
        simple_bif_curves,
        hysteresis_curves,
        winged_cusp,
        high_codim,
        superisola_boundary,
        zones,
        warnings,
    })
}

/// Picks one representative (c3, f) per qualitative region of the chart that
/// intersects the window.
fn zone_representatives(c1: f64, c3_window: (f64, f64), f_max: f64) -> Vec<(char, f64, f64)> {
    let (c31, c32) = thresholds(c1);
    let mut reps = Vec::new();
    let in_window = |c3: f64| c3 > c3_window.0 && c3 < c3_window.1;

    // zone-2 slice: below the isola curve (a), between the curves (b), above
    // the merge curve (c)
    let c3_z2 = 0.5 * (c31 + c32);
    if in_window(c3_z2) {
        if let Ok(params) = Params::new(c1, c3_z2) {
            let pts = closed_form_singularities(params);
            let f4 = pts
                .iter()
                .find(|p| p.label == SingularLabel::S4)
                .map(|p| p.forcing())
                .unwrap_or(0.0);
            let f3 = pts
                .iter()
                .find(|p| p.label == SingularLabel::S3)
                .map(|p| p.forcing())
                .unwrap_or(f_max);
            reps.push(('a', c3_z2, (0.5 * f4).min(f_max)));
            reps.push(('b', c3_z2, ((f4 * f3).sqrt()).min(f_max)));
            reps.push(('c', c3_z2, (1.15 * f3).min(f_max)));
        }
    }
    // zone-3 slice at small forcing: the island chain (d)
    let c3_z3 = c31 - 0.35 * (c32 - c31).abs();
    if in_window(c3_z3) {
        reps.push(('d', c3_z3, (5e-4f64).min(f_max)));
    }
    reps
}
