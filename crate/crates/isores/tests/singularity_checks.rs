//! Singularity-module checks: residual conditions at every returned point,
//! the Hessian sign table over random parameter draws, hysteresis seeding
//! from response-curve folds, and the region chart.

use approx::assert_relative_eq;
use isores::hbcore::{trace_frequency_response_quintic, HbSystem, TraceConfig};
use isores::model::Params;
use isores::singularity::{
    closed_form_singularities, hysteresis_locus, refine_hysteresis_point, region_chart,
    thresholds, zone, SingularKind, SingularLabel,
};
use rand::{Rng, SeedableRng};

#[test]
fn every_singular_point_satisfies_the_defining_conditions() {
    for c3 in [-0.52, -0.6, -0.66, -0.7, -0.8, -1.1] {
        let params = Params::new(0.1, c3).unwrap();
        let sys = HbSystem::new(params);
        for p in closed_form_singularities(params) {
            if !matches!(p.kind, SingularKind::Isola | SingularKind::SimpleBifurcation) {
                continue;
            }
            assert!(sys.residual(p.amp_sq, p.freq_sq, p.force_sq).abs() <= 1e-9);
            assert!(sys.d_amp(p.amp_sq, p.freq_sq).abs() <= 1e-9);
            assert!(sys.d_freq(p.amp_sq, p.freq_sq).abs() <= 1e-9);
        }
    }
}

#[test]
fn hessian_sign_table_over_random_parameters() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
    let mut zone2 = 0;
    let mut zone3 = 0;
    while zone2 + zone3 < 200 {
        let c1: f64 = rng.random_range(0.02..0.8);
        let (c31, c32) = thresholds(c1);
        let c3: f64 = rng.random_range((1.8 * c31)..(0.98 * c32));
        let params = Params::new(c1, c3).unwrap();
        let sys = HbSystem::new(params);
        let pts = closed_form_singularities(params);
        // avoid draws within rounding reach of the thresholds
        if (c3 - c31).abs() < 1e-3 || (c3 - c32).abs() < 1e-3 {
            continue;
        }
        match zone(params) {
            2 => {
                zone2 += 1;
                let s4 = pts.iter().find(|p| p.label == SingularLabel::S4).unwrap();
                assert!(s4.hessian_det > 0.0, "H4 must be positive in zone 2");
                assert_eq!(s4.kind, SingularKind::Isola);
                let s3 = pts.iter().find(|p| p.label == SingularLabel::S3).unwrap();
                assert!(s3.hessian_det < 0.0, "H3 must be negative (simple bifurcation)");
            }
            3 => {
                zone3 += 1;
                for label in [SingularLabel::S1, SingularLabel::S2] {
                    let p = pts.iter().find(|p| p.label == label).unwrap();
                    assert!(
                        p.hessian_det > 0.0,
                        "H1, H2 must be positive below c31 (c1={c1}, c3={c3})"
                    );
                }
                let s4 = pts.iter().find(|p| p.label == SingularLabel::S4).unwrap();
                assert!(s4.hessian_det < 0.0, "H4 flips sign across c31");
                let s3 = pts.iter().find(|p| p.label == SingularLabel::S3).unwrap();
                assert!(s3.hessian_det < 0.0);
            }
            _ => {}
        }
        // classification consistency at every point
        for p in &pts {
            let kind =
                isores::singularity::classify(p.amp_sq, p.freq_sq, p.force_sq, params, 1e-7)
                    .unwrap();
            assert_eq!(kind, p.kind);
        }
    }
    assert!(zone2 > 40 && zone3 > 40, "sampled {zone2} zone-2 and {zone3} zone-3 draws");
}

#[test]
fn irc_count_oracle_around_the_singular_forcings() {
    // zone 2: exactly one IRC strictly between the isola and merge forcings,
    // none below, merged (but still multivalued) above
    let params = Params::new(0.1, -0.6).unwrap();
    let pts = closed_form_singularities(params);
    let f4 = pts.iter().find(|p| p.label == SingularLabel::S4).unwrap().forcing();
    let f3 = pts.iter().find(|p| p.label == SingularLabel::S3).unwrap().forcing();
    let cfg = TraceConfig { base_points: 600, ..TraceConfig::default() };
    let just_above_birth = trace_frequency_response_quintic(params, f4 * 1.05, &cfg).unwrap();
    assert_eq!(just_above_birth.irc_count(), 1);
    let just_below_merge = trace_frequency_response_quintic(params, f3 * 0.95, &cfg).unwrap();
    assert_eq!(just_below_merge.irc_count(), 1);
    let below_birth = trace_frequency_response_quintic(params, f4 * 0.95, &cfg).unwrap();
    assert_eq!(below_birth.irc_count(), 0);
    let above_merge = trace_frequency_response_quintic(params, f3 * 1.05, &cfg).unwrap();
    assert_eq!(above_merge.irc_count(), 0);
    assert_eq!(above_merge.branches.len(), 1, "merged response is one connected branch");
}

#[test]
fn hysteresis_newton_converges_from_a_response_fold_seed() {
    // fold of the f = 0.012 response curve feeds the hysteresis refinement
    let params = Params::new(0.1, -0.6).unwrap();
    let sys = HbSystem::new(params);
    // fold at fixed f: walk the resonant column down in frequency until the
    // root count changes, then take the coalescing pair midpoint
    let f = 0.0105;
    let mut seed = None;
    let mut prev: Option<(f64, Vec<f64>)> = None;
    for i in 0..400 {
        let w = 1.1 - 0.3 * i as f64 / 400.0;
        let roots = sys.solve_amplitudes(w * w, f * f, 1e-10).unwrap();
        if let Some((wp, p)) = &prev {
            if p.len() == 3 && roots.len() == 1 {
                // the coalescing pair is the closest adjacent pair
                let mid = if p[1] - p[0] < p[2] - p[1] {
                    0.5 * (p[0] + p[1])
                } else {
                    0.5 * (p[1] + p[2])
                };
                seed = Some((mid, wp * wp, f * f));
                break;
            }
        }
        prev = Some((w, roots));
    }
    let seed = seed.expect("fold bracket in the scanned window");
    let (a, w, f2) = refine_hysteresis_point(params, seed).unwrap();
    // the hysteresis point for these parameters, computed independently
    assert_relative_eq!(f2.sqrt(), 0.01196202703, epsilon = 1e-6);
    assert!(sys.d_amp(a, w).abs() < 1e-9);
    assert!(sys.d2_amp2(a, w).abs() < 1e-7);
}

#[test]
fn hysteresis_locus_brackets_the_zone2_merge_window() {
    let branches = hysteresis_locus(0.1, (-0.64, -0.55), 40).unwrap();
    assert!(!branches.is_empty());
    // at c3 = -0.6 the locus forcing exceeds the merge forcing f3
    let mut found = false;
    for b in &branches {
        for p in &b.points {
            if (p.c3 + 0.6).abs() < 5e-3 {
                assert!(p.forcing > 0.00969209741338955);
                assert!(p.forcing < 0.02);
                found = true;
            }
        }
    }
    assert!(found, "no locus point near c3 = -0.6");
}

#[test]
fn region_chart_layout_and_zone_topologies() {
    let chart = region_chart(0.1, (-0.9, -0.4), 0.05, 60).unwrap();
    let (c31, c32) = thresholds(0.1);

    let (wc_c3, wc_f) = chart.winged_cusp.expect("winged cusp inside the window");
    assert_relative_eq!(wc_c3, c32, epsilon = 1e-12);
    assert_relative_eq!(wc_f, 0.011278626810032684, epsilon = 1e-9);
    let (hc_c3, hc_f) = chart.high_codim.expect("high-codim point inside the window");
    assert_relative_eq!(hc_c3, c31, epsilon = 1e-12);
    assert_eq!(hc_f, 0.0);

    // superisola boundary where the two merge curves cross
    let boundary = chart.superisola_boundary.expect("merge curves cross below c31");
    assert_relative_eq!(boundary, -0.746, epsilon = 2e-3);
    assert_relative_eq!(boundary, -0.74535599249993, epsilon = 1e-6);

    assert!(!chart.isola_curves.is_empty());
    assert!(!chart.simple_bif_curves.is_empty());
    assert!(!chart.hysteresis_curves.is_empty());

    // zone representatives display distinct topologies
    let find = |label: char| {
        chart
            .zones
            .iter()
            .find(|z| z.label == label)
            .unwrap_or_else(|| panic!("zone {label} sample missing; warnings: {:?}", chart.warnings))
    };
    let a = find('a');
    let b = find('b');
    let c = find('c');
    let d = find('d');
    assert_eq!(a.irc_count, 0);
    assert_eq!(b.irc_count, 1);
    assert_eq!(c.irc_count, 0);
    assert_eq!(d.irc_count, 2);
    assert_eq!(a.branch_count, 1);
    assert!(c.branch_count == 1 && d.branch_count == 3);
}
