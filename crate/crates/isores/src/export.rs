//! Plot-ready exports. CSV numbers use a fixed 12-significant-digit
//! scientific format so identical inputs produce byte-identical files.

use crate::energybalance::{AnnotatedMerge, AveragedDampingCurve, IrcEvent};
use crate::hbcore::ResponseBranch;
use crate::singularity::RegionChart;
use crate::timedomain::{BasinGrid, OrbitBranch, Trajectory};
use std::io::{self, Write};

/// Fixed 12-significant-digit scientific form.
pub fn fmt_sci(x: f64) -> String {
    format!("{:.11e}", x)
}

pub fn write_branches_csv(w: &mut impl Write, branches: &[ResponseBranch]) -> io::Result<()> {
    writeln!(w, "omega,x_peak,A,branch_id,kind,closed,stability")?;
    for (id, b) in branches.iter().enumerate() {
        let kind = match b.kind {
            crate::hbcore::BranchKind::Main => "main",
            crate::hbcore::BranchKind::Isolated => "isolated",
        };
        for s in &b.samples {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                fmt_sci(s.omega),
                fmt_sci(s.x_peak),
                fmt_sci(s.amp_sq),
                id,
                kind,
                b.closed,
                s.stability
            )?;
        }
    }
    Ok(())
}

pub fn write_damping_curve_csv(w: &mut impl Write, curve: &AveragedDampingCurve) -> io::Result<()> {
    writeln!(w, "x0,fd")?;
    for (x0, fd) in &curve.samples {
        writeln!(w, "{},{}", fmt_sci(*x0), fmt_sci(*fd))?;
    }
    Ok(())
}

pub fn write_events_csv(
    w: &mut impl Write,
    events: &[IrcEvent],
    merges: &[AnnotatedMerge],
) -> io::Result<()> {
    writeln!(w, "kind,x0,f,stability_hint,joins")?;
    for e in events {
        let joins = merges
            .iter()
            .find(|m| m.event.x0 == e.x0)
            .map(|m| format!("{}-{}", m.joins.0, m.joins.1))
            .unwrap_or_default();
        writeln!(
            w,
            "{},{},{},{},{}",
            e.kind.as_str(),
            fmt_sci(e.x0),
            fmt_sci(e.f),
            e.stability_hint.as_str(),
            joins
        )?;
    }
    Ok(())
}

pub fn write_region_chart_csv(w: &mut impl Write, chart: &RegionChart) -> io::Result<()> {
    writeln!(w, "c3,f,A,omega,kind")?;
    let all = chart
        .isola_curves
        .iter()
        .chain(&chart.simple_bif_curves)
        .chain(&chart.hysteresis_curves);
    for curve in all {
        for &(c3, f, a, omega) in &curve.points {
            writeln!(
                w,
                "{},{},{},{},{}",
                fmt_sci(c3),
                fmt_sci(f),
                fmt_sci(a),
                fmt_sci(omega),
                curve.kind.as_str()
            )?;
        }
    }
    Ok(())
}

pub fn write_trajectory_csv(w: &mut impl Write, traj: &Trajectory) -> io::Result<()> {
    writeln!(w, "t,x,v")?;
    for (t, x, v) in &traj.samples {
        writeln!(w, "{},{},{}", fmt_sci(*t), fmt_sci(*x), fmt_sci(*v))?;
    }
    Ok(())
}

pub fn write_orbit_branch_csv(w: &mut impl Write, branch: &OrbitBranch) -> io::Result<()> {
    writeln!(w, "omega,amplitude,stable,fold_flag,ns_flag")?;
    for p in &branch.points {
        writeln!(
            w,
            "{},{},{},{},{}",
            fmt_sci(p.omega),
            fmt_sci(p.orbit.amplitude),
            p.orbit.stable,
            p.fold_flag,
            p.ns_flag
        )?;
    }
    Ok(())
}

/// Raster of basin labels, one row per initial velocity, ascending.
pub fn write_basin_csv(w: &mut impl Write, grid: &BasinGrid) -> io::Result<()> {
    for iv in 0..grid.nv {
        let row: Vec<String> =
            (0..grid.nx).map(|ix| grid.label_at(ix, iv).to_string()).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sci_format_is_fixed_width_significands() {
        assert_eq!(fmt_sci(1.0), "1.00000000000e0");
        assert_eq!(fmt_sci(-0.0123456789), "-1.23456789000e-2");
        assert_eq!(fmt_sci(12345.6789), "1.23456789000e4");
    }
}
