//! Averaged (harmonically filtered) damping and the IRC onset/merge events it
//! predicts: zeros of the averaged damping curve mark isolas born at zero
//! forcing, positive minima mark isola births at finite forcing, and maxima
//! (and negative minima between zeros) mark merges.

use crate::error::{Error, Result};
use crate::model::DampingLaw;
use crate::numeric::{brent, periodic_trapezoid};
use serde::Serialize;

/// Averaged damping at displacement amplitude `x0` (motion `x0 sin t` at the
/// resonant frequency): the equivalent forcing `fd = 2f` that balances the
/// dissipated energy over one cycle. Uses the closed form when the law has
/// one, quadrature otherwise. The value is signed; a negative value means the
/// damping feeds energy in over the cycle at that amplitude.
pub fn averaged_damping(law: &DampingLaw, x0: f64) -> f64 {
    law.averaged_force(x0)
}

/// Averaged damping by direct quadrature of the energy-balance integral
/// `(1/(pi x0)) \int_0^{2pi} x0 cos(t) F_d(x0 cos t) dt`, independent of the
/// closed forms.
pub fn averaged_damping_quadrature(law: &DampingLaw, x0: f64) -> f64 {
    if x0 == 0.0 {
        return 0.0;
    }
    // periodic trapezoid rule is spectrally accurate for this integrand
    let n = (256 + (1.5 * x0.abs()) as usize).next_multiple_of(8);
    periodic_trapezoid(|t| t.cos() * law.force(x0 * t.cos()), n) / std::f64::consts::PI
}

/// Sampled averaged-damping curve, `x0 >= 0` only (the curve is odd).
#[derive(Debug, Clone, Serialize)]
pub struct AveragedDampingCurve {
    pub samples: Vec<(f64, f64)>,
    /// closed-form tag when one applies
    pub closed_form: Option<&'static str>,
}

/// Samples the averaged damping curve on `[0, x0_max]`.
pub fn averaged_damping_curve(law: &DampingLaw, x0_max: f64, points: usize) -> AveragedDampingCurve {
    let n = points.max(2);
    let samples = (0..n)
        .map(|i| {
            let x0 = x0_max * i as f64 / (n - 1) as f64;
            (x0, averaged_damping(law, x0))
        })
        .collect();
    let closed_form = match law {
        DampingLaw::QuinticPoly { .. } => Some("quintic"),
        DampingLaw::SineCubic { .. } => Some("sine_cubic"),
        DampingLaw::TabulatedOdd(_) => None,
    };
    AveragedDampingCurve { samples, closed_form }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IrcEventKind {
    /// zero crossing of the averaged damping: isola born at zero forcing
    OnsetZero,
    /// positive local minimum: isola born at finite forcing
    OnsetMin,
    /// local maximum: merge (simple bifurcation)
    MergeMax,
    /// negative local minimum between two zeros: merge (simple bifurcation)
    MergeMinBetweenZeros,
}

impl IrcEventKind {
    pub fn is_onset(&self) -> bool {
        matches!(self, Self::OnsetZero | Self::OnsetMin)
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::OnsetZero => "onset_zero",
            Self::OnsetMin => "onset_min",
            Self::MergeMax => "merge_max",
            Self::MergeMinBetweenZeros => "merge_min_between_zeros",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StabilityHint {
    FullyUnstable,
    UpperBranchStable,
}

impl StabilityHint {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::FullyUnstable => "fully_unstable",
            Self::UpperBranchStable => "upper_branch_stable",
        }
    }
}

/// Predicted IRC onset or merge event at displacement amplitude `x0`.
/// `f` is the single-sided forcing amplitude, i.e. `|fd| / 2`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct IrcEvent {
    pub kind: IrcEventKind,
    pub x0: f64,
    pub f: f64,
    pub stability_hint: StabilityHint,
}

/// Finds every zero and extremum of the averaged damping curve on
/// `(0, x0_max]` and classifies them as IRC onset/merge events, sorted by x0.
///
/// Brackets are located on a uniform grid (`resolution` is the grid step as a
/// fraction of `x0_max`; pass 0 for the default 1e-3) and refined on the exact
/// curve and its exact derivative.
pub fn predict_irc_events(law: &DampingLaw, x0_max: f64, resolution: f64) -> Result<Vec<IrcEvent>> {
    if !(x0_max > 0.0) {
        return Err(Error::InvalidInput(format!("x0_max must be > 0, got {x0_max}")));
    }
    let step_frac = if resolution > 0.0 { resolution } else { 1e-3 };
    let n = ((1.0 / step_frac).ceil() as usize).clamp(64, 2_000_000);

    let fd = |x: f64| averaged_damping(law, x);
    let dfd = |x: f64| law.averaged_force_deriv(x);

    let mut events: Vec<IrcEvent> = Vec::new();
    let mut zeros: Vec<f64> = Vec::new();
    let mut extrema: Vec<(f64, f64)> = Vec::new(); // (x0, fd value)

    let x_eps = 1e-9 * x0_max;
    let mut x_prev = x0_max / n as f64;
    let mut f_prev = fd(x_prev);
    let mut d_prev = dfd(x_prev);
    for i in 2..=n {
        let x = x0_max * i as f64 / n as f64;
        let fx = fd(x);
        let dx = dfd(x);
        if f_prev * fx < 0.0 {
            let r = brent(fd, x_prev, x, 1e-13 * x0_max, 200)?;
            zeros.push(r);
        } else if fx == 0.0 && x < x0_max {
            zeros.push(x);
        }
        if d_prev * dx < 0.0 {
            let r = brent(dfd, x_prev, x, 1e-13 * x0_max, 200)?;
            if r > x_eps {
                extrema.push((r, fd(r)));
            }
        }
        x_prev = x;
        f_prev = fx;
        d_prev = dx;
    }

    for &z in &zeros {
        events.push(IrcEvent {
            kind: IrcEventKind::OnsetZero,
            x0: z,
            f: 0.0,
            // a zero crossed with decreasing damping births a fully unstable IRC
            stability_hint: if dfd(z) < 0.0 {
                StabilityHint::FullyUnstable
            } else {
                StabilityHint::UpperBranchStable
            },
        });
    }
    for &(x, v) in &extrema {
        let curvature = {
            let h = 1e-5 * x0_max.max(1.0);
            (dfd(x + h) - dfd(x - h)) / (2.0 * h)
        };
        let is_max = curvature < 0.0;
        let kind = if is_max {
            IrcEventKind::MergeMax
        } else if v < 0.0 {
            IrcEventKind::MergeMinBetweenZeros
        } else {
            IrcEventKind::OnsetMin
        };
        events.push(IrcEvent {
            kind,
            x0: x,
            f: v.abs() / 2.0,
            stability_hint: StabilityHint::UpperBranchStable,
        });
    }
    events.sort_by(|a, b| a.x0.partial_cmp(&b.x0).expect("finite amplitude"));
    Ok(events)
}

/// A merge event annotated with the pair of components it joins
/// (0 is the main branch, onsets are numbered 1.. by ascending amplitude).
#[derive(Debug, Clone, Serialize)]
pub struct AnnotatedMerge {
    pub event: IrcEvent,
    /// original adjacent component indices joined at this amplitude
    pub joins: (usize, usize),
    /// component sets (by onset index, 0 = main) united after the merge
    pub united: Vec<usize>,
}

/// Sorts the merge events by forcing amplitude and annotates each with the
/// adjacent IRC indices it joins, tracking the evolving connectivity.
pub fn merge_ordering(events: &[IrcEvent]) -> Vec<AnnotatedMerge> {
    let onsets: Vec<f64> = events.iter().filter(|e| e.kind.is_onset()).map(|e| e.x0).collect();
    let mut merges: Vec<&IrcEvent> = events.iter().filter(|e| !e.kind.is_onset()).collect();
    merges.sort_by(|a, b| a.f.partial_cmp(&b.f).expect("finite forcing"));

    // union-find over component ids 0..=n (0 = main branch)
    let mut parent: Vec<usize> = (0..=onsets.len()).collect();
    fn find(parent: &mut Vec<usize>, mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }

    let mut out = Vec::with_capacity(merges.len());
    for m in merges {
        // the merge joins the components adjacent to its amplitude: the onset
        // just below (0 = main branch when there is none) and the one above
        let below = onsets.partition_point(|&x| x < m.x0);
        let joins = (below, (below + 1).min(onsets.len()));
        let ra = find(&mut parent, joins.0);
        let rb = find(&mut parent, joins.1);
        parent[ra.max(rb)] = ra.min(rb);
        let root = find(&mut parent, joins.0);
        let united: Vec<usize> =
            (0..=onsets.len()).filter(|&k| find(&mut parent, k) == root).collect();
        out.push(AnnotatedMerge { event: *m, joins, united });
    }
    out
}
