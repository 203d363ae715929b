//! Four-column onset/merge comparison: time-domain numerics, closed-form
//! singularities, raw damping-force features, and averaged-damping events,
//! row by row for a quintic-law parameter set.

use crate::energybalance::{predict_irc_events, IrcEventKind};
use crate::error::{Error, Result};
use crate::hbcore::{HbSystem, TraceConfig};
use crate::model::{damping_negative_interval, DampingLaw, Params};
use crate::numeric::scan_roots;
use crate::singularity::{closed_form_singularities, SingularKind};
use crate::timedomain::{
    locate_irc, shoot_autonomous, ContinuationConfig, IrcSeed, ShootConfig,
};
use serde::Serialize;

/// One comparison row. Pairs are (amplitude, 2f), except the damping column,
/// which reads (velocity, |force|).
#[derive(Debug, Clone, Serialize)]
pub struct VerifyRow {
    pub quantity: String,
    pub numerical: Option<(f64, f64)>,
    pub singularity: (f64, f64),
    pub damping: Option<(f64, f64)>,
    pub averaged_damping: (f64, f64),
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyTable {
    pub c1: f64,
    pub c3: f64,
    pub rows: Vec<VerifyRow>,
    pub warnings: Vec<String>,
}

impl VerifyTable {
    pub fn write_csv(&self, w: &mut impl std::io::Write) -> std::io::Result<()> {
        use crate::export::fmt_sci;
        writeln!(
            w,
            "quantity,numerical_x,numerical_2f,singularity_x,singularity_2f,damping_v,damping_fd,averaged_x,averaged_fd"
        )?;
        let pair = |p: Option<(f64, f64)>| match p {
            Some((a, b)) => (fmt_sci(a), fmt_sci(b)),
            None => (String::new(), String::new()),
        };
        for r in &self.rows {
            let (nx, nf) = pair(r.numerical);
            let (dx, df) = pair(r.damping);
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{}",
                r.quantity,
                nx,
                nf,
                fmt_sci(r.singularity.0),
                fmt_sci(r.singularity.1),
                dx,
                df,
                fmt_sci(r.averaged_damping.0),
                fmt_sci(r.averaged_damping.1)
            )?;
        }
        Ok(())
    }
}

/// Geometric features of the raw damping force: zero crossings and extrema,
/// classified with the same onset/merge semantics as the averaged curve.
fn force_features(params: Params, v_max: f64) -> (Vec<f64>, Vec<(f64, f64, bool)>) {
    let law = DampingLaw::quintic(params);
    let zeros = damping_negative_interval(params)
        .map(|(lo, hi)| vec![lo, hi])
        .unwrap_or_default();
    // extrema from the derivative's sign changes
    let extrema = scan_roots(|v| law.dforce(v), 1e-6, v_max, 4000, 1e-13)
        .unwrap_or_default()
        .into_iter()
        .map(|v| {
            let h = 1e-5;
            let curvature = (law.dforce(v + h) - law.dforce(v - h)) / (2.0 * h);
            (v, law.force(v), curvature < 0.0)
        })
        .collect();
    (zeros, extrema)
}

/// Builds the three analytic columns: closed-form singularities, damping-force
/// features and averaged-damping events. Rows are onsets (ascending
/// amplitude) followed by merges.
pub fn verify_analytic(params: Params) -> Result<VerifyTable> {
    let mut warnings = Vec::new();
    let points = closed_form_singularities(params);
    if points.is_empty() {
        return Ok(VerifyTable { c1: params.c1, c3: params.c3, rows: Vec::new(), warnings });
    }

    let x_max = points.iter().map(|p| p.x_peak()).fold(0.0, f64::max);
    let law = DampingLaw::quintic(params);
    let events = predict_irc_events(&law, 1.6 * x_max + 0.5, 0.0)?;

    // onsets are isolas, merges are simple bifurcations; within the closed
    // forms the zero-forcing pair are the onsets in zone 3, while in zone 2
    // the isola S4 is the single onset
    let mut sing_onsets: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.kind == SingularKind::Isola)
        .map(|p| (p.x_peak(), 2.0 * p.forcing()))
        .collect();
    let mut sing_merges: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.kind == SingularKind::SimpleBifurcation)
        .map(|p| (p.x_peak(), 2.0 * p.forcing()))
        .collect();
    sing_onsets.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite"));
    sing_merges.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite"));

    let av_onsets: Vec<(f64, f64)> = events
        .iter()
        .filter(|e| e.kind.is_onset())
        .map(|e| (e.x0, 2.0 * e.f))
        .collect();
    let av_merges: Vec<(f64, f64)> = events
        .iter()
        .filter(|e| !e.kind.is_onset())
        .map(|e| (e.x0, 2.0 * e.f))
        .collect();

    let (zeros, extrema) = force_features(params, 1.6 * x_max + 0.5);
    let damp_onsets: Vec<(f64, f64)> = if zeros.is_empty() {
        extrema.iter().filter(|e| !e.2 && e.1 > 0.0).map(|e| (e.0, e.1.abs())).collect()
    } else {
        zeros.iter().map(|&v| (v, 0.0)).collect()
    };
    let damp_merges: Vec<(f64, f64)> = extrema
        .iter()
        .filter(|e| e.2 || e.1 < 0.0)
        .map(|e| (e.0, e.1.abs()))
        .collect();

    if av_onsets.len() != sing_onsets.len() || av_merges.len() != sing_merges.len() {
        warnings.push(format!(
            "column row counts differ: singularities {}/{} vs averaged {}/{}",
            sing_onsets.len(),
            sing_merges.len(),
            av_onsets.len(),
            av_merges.len()
        ));
    }

    let zero_onsets = !zeros.is_empty();
    let mut rows = Vec::new();
    for (i, &s) in sing_onsets.iter().enumerate() {
        rows.push(VerifyRow {
            quantity: if zero_onsets {
                format!("onset {} / zero {}", i + 1, i + 1)
            } else {
                format!("onset {} / minimum", i + 1)
            },
            numerical: None,
            singularity: s,
            damping: damp_onsets.get(i).copied(),
            averaged_damping: av_onsets.get(i).copied().unwrap_or(s),
        });
    }
    for (i, &s) in sing_merges.iter().enumerate() {
        let kind = events
            .iter()
            .filter(|e| !e.kind.is_onset())
            .nth(i)
            .map(|e| match e.kind {
                IrcEventKind::MergeMax => "maximum",
                _ => "minimum",
            })
            .unwrap_or("extremum");
        rows.push(VerifyRow {
            quantity: format!("merge {} / {}", i + 1, kind),
            numerical: None,
            singularity: s,
            damping: damp_merges.get(i).copied(),
            averaged_damping: av_merges.get(i).copied().unwrap_or(s),
        });
    }
    Ok(VerifyTable { c1: params.c1, c3: params.c3, rows, warnings })
}

#[derive(Debug, Clone)]
pub struct NumericalOptions {
    /// relative f tolerance of the bisection
    pub rel_tol: f64,
    pub trace: TraceConfig,
    pub continuation: ContinuationConfig,
    pub shoot: ShootConfig,
}

impl Default for NumericalOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-4,
            trace: TraceConfig { base_points: 400, ..TraceConfig::default() },
            continuation: ContinuationConfig {
                ds0: 2e-3,
                ds_max: 1.2e-2,
                param_range: (0.5, 1.7),
                max_steps: 6000,
                ..ContinuationConfig::default()
            },
            shoot: ShootConfig::default(),
        }
    }
}

/// Number of distinct closed IRC loops found by shooting from every resonant
/// harmonic-balance root and continuing over frequency.
fn time_domain_loop_count(
    law: &DampingLaw,
    sys: &HbSystem,
    forcing: f64,
    opts: &NumericalOptions,
) -> Result<usize> {
    let roots = sys.solve_amplitudes(1.0, forcing * forcing, 1e-10)?;
    let seeds: Vec<IrcSeed> = roots
        .iter()
        .filter(|&&a| a > 1e-12)
        .map(|&a| IrcSeed { omega: 1.0, x_peak: 2.0 * a.sqrt() })
        .collect();
    let search = locate_irc(law, forcing, &seeds, None, &opts.continuation)?;
    Ok(search.loops.len())
}

/// Bisection over forcing of a loop-count transition; returns the bracket
/// endpoints and midpoint.
fn bisect_loop_transition(
    law: &DampingLaw,
    sys: &HbSystem,
    mut f_lo: f64,
    mut f_hi: f64,
    count_at_least: usize,
    opts: &NumericalOptions,
) -> Result<f64> {
    let lo_ok = time_domain_loop_count(law, sys, f_lo, opts)? >= count_at_least;
    let hi_ok = time_domain_loop_count(law, sys, f_hi, opts)? >= count_at_least;
    if lo_ok == hi_ok {
        return Err(Error::BracketingFailed {
            lo: f_lo,
            hi: f_hi,
            what: format!("loop count >= {count_at_least} does not change across the bracket"),
        });
    }
    while (f_hi - f_lo) > opts.rel_tol * f_hi {
        let mid = 0.5 * (f_lo + f_hi);
        if (time_domain_loop_count(law, sys, mid, opts)? >= count_at_least) == lo_ok {
            f_lo = mid;
        } else {
            f_hi = mid;
        }
    }
    Ok(0.5 * (f_lo + f_hi))
}

/// At forcing `f`, the mean amplitude of the two resonant orbits closest to
/// each other: near a merge or onset this estimates the touching amplitude,
/// with the square-root detuning terms of the two branches cancelling.
fn colliding_pair_amplitude(
    law: &DampingLaw,
    sys: &HbSystem,
    forcing: f64,
    opts: &NumericalOptions,
) -> Result<f64> {
    let roots = sys.solve_amplitudes(1.0, forcing * forcing, 1e-10)?;
    let mut amps = Vec::new();
    for &a in roots.iter().filter(|&&a| a > 1e-12) {
        let guess = crate::timedomain::hb_orbit_guess(law, forcing, 1.0, a);
        if let Ok(orbit) = crate::timedomain::shoot(law, forcing, 1.0, guess, &opts.shoot) {
            amps.push(orbit.amplitude);
        }
    }
    amps.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    amps.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
    if amps.len() < 2 {
        return Err(Error::IllConditioned(format!(
            "expected at least two distinct orbits at f = {forcing:.6e}, found {}",
            amps.len()
        )));
    }
    let (mut best, mut gap) = (0, f64::INFINITY);
    for i in 0..amps.len() - 1 {
        let g = amps[i + 1] - amps[i];
        if g < gap {
            gap = g;
            best = i;
        }
    }
    Ok(0.5 * (amps[best] + amps[best + 1]))
}

/// Fills the numerical column by time-domain continuation: onset rows from
/// unforced limit-cycle shooting (zone 3) or forcing bisection (zone 2), and
/// merge rows from bisection of the closed-loop count over forcing.
pub fn verify_numerical(params: Params, opts: &NumericalOptions) -> Result<VerifyTable> {
    let mut table = verify_analytic(params)?;
    let law = DampingLaw::quintic(params);
    let sys = HbSystem::new(params);

    let onset_rows: Vec<usize> = (0..table.rows.len())
        .filter(|&i| table.rows[i].quantity.starts_with("onset"))
        .collect();
    let merge_rows: Vec<usize> = (0..table.rows.len())
        .filter(|&i| table.rows[i].quantity.starts_with("merge"))
        .collect();

    // onset rows
    let zero_forcing_onsets = table.rows.iter().any(|r| {
        r.quantity.starts_with("onset") && r.singularity.1 == 0.0
    });
    if zero_forcing_onsets {
        // unforced limit cycles at the zero-crossing amplitudes
        for &i in &onset_rows {
            let x_guess = table.rows[i].singularity.0;
            match shoot_autonomous(&law, x_guess, 2.0 * std::f64::consts::PI, &opts.shoot) {
                Ok(orbit) => table.rows[i].numerical = Some((orbit.amplitude, 0.0)),
                Err(e) => table.warnings.push(format!("autonomous onset {i}: {e}")),
            }
        }
    } else {
        for (k, &i) in onset_rows.iter().enumerate() {
            let f_pred = table.rows[i].singularity.1 / 2.0;
            let want = k + 1;
            match bisect_loop_transition(&law, &sys, 0.75 * f_pred, 1.25 * f_pred, want, opts) {
                Ok(f_star) => {
                    let amp =
                        colliding_pair_amplitude(&law, &sys, f_star * (1.0 + 2e-3), opts)?;
                    table.rows[i].numerical = Some((amp, 2.0 * f_star));
                }
                Err(e) => table.warnings.push(format!("onset bisection {i}: {e}")),
            }
        }
    }

    // merge rows, in ascending merge forcing: each merge drops the loop count
    // by one
    let mut order: Vec<usize> = merge_rows.clone();
    order.sort_by(|&a, &b| {
        table.rows[a]
            .singularity
            .1
            .partial_cmp(&table.rows[b].singularity.1)
            .expect("finite")
    });
    let total_loops = order.len();
    for (k, &i) in order.iter().enumerate() {
        let f_pred = table.rows[i].singularity.1 / 2.0;
        let want = total_loops - k; // loops still alive just below this merge
        match bisect_loop_transition(&law, &sys, 0.75 * f_pred, 1.25 * f_pred, want, opts) {
            Ok(f_star) => {
                let amp = colliding_pair_amplitude(&law, &sys, f_star * (1.0 - 2e-3), opts)?;
                table.rows[i].numerical = Some((amp, 2.0 * f_star));
            }
            Err(e) => table.warnings.push(format!("merge bisection {i}: {e}")),
        }
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn analytic_table_zone3_matches_reference_columns() {
        let table = verify_analytic(Params::new(0.1, -0.8).unwrap()).unwrap();
        assert_eq!(table.rows.len(), 4);
        // singularities column
        let sing: Vec<(f64, f64)> = table.rows.iter().map(|r| r.singularity).collect();
        assert_relative_eq!(sing[0].0, 0.4633, epsilon = 1e-4);
        assert_relative_eq!(sing[1].0, 0.8633, epsilon = 1e-4);
        assert_relative_eq!(sing[2].0, 0.2496, epsilon = 1e-4);
        assert_relative_eq!(sing[2].1, 0.01624, epsilon = 1e-5);
        assert_relative_eq!(sing[3].0, 0.7167, epsilon = 1e-4);
        assert_relative_eq!(sing[3].1, 0.03103, epsilon = 1e-5);
        // damping column zeros and extrema
        let damp: Vec<(f64, f64)> = table.rows.iter().map(|r| r.damping.unwrap()).collect();
        assert_relative_eq!(damp[0].0, 0.3938, epsilon = 1e-4);
        assert_relative_eq!(damp[1].0, 0.8031, epsilon = 1e-4);
        assert_relative_eq!(damp[2].0, 0.2147, epsilon = 1e-4);
        assert_relative_eq!(damp[2].1, 0.01401, epsilon = 1e-5);
        assert_relative_eq!(damp[3].0, 0.6587, epsilon = 1e-4);
        assert_relative_eq!(damp[3].1, 0.03877, epsilon = 1e-5);
        // averaged column equals the singularities column to 1e-8
        for r in &table.rows {
            assert_relative_eq!(r.averaged_damping.0, r.singularity.0, epsilon = 1e-8);
            assert_relative_eq!(r.averaged_damping.1, r.singularity.1, epsilon = 1e-8);
        }
    }

    #[test]
    fn analytic_table_zone2_rows() {
        let table = verify_analytic(Params::new(0.1, -0.6).unwrap()).unwrap();
        assert_eq!(table.rows.len(), 2);
        assert!(table.rows[0].quantity.starts_with("onset"));
        assert_relative_eq!(table.rows[0].singularity.0, 0.580570381266021, epsilon = 1e-9);
        assert!(table.rows[1].quantity.starts_with("merge"));
        assert_relative_eq!(table.rows[1].singularity.0, 0.308120159023436, epsilon = 1e-9);
    }

    #[test]
    fn zone1_table_is_empty() {
        let table = verify_analytic(Params::new(0.1, -0.3).unwrap()).unwrap();
        assert!(table.rows.is_empty());
    }
}
