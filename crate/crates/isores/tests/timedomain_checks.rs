//! Time-domain ground truth against the harmonic-balance picture: coexisting
//! attractors, Floquet identities, fold locations and closed IRC loops.

use approx::assert_relative_eq;
use isores::hbcore::{trace_frequency_response_quintic, HbSystem, TraceConfig};
use isores::model::{DampingLaw, Params};
use isores::timedomain::{
    basin_grid, classify_initial_condition, continue_branch, hb_orbit_guess, integrate,
    locate_irc, orbit_energy_balance, shoot, BasinConfig, ContinuationConfig, ContinuationParam,
    IrcSeed, ShootConfig,
};

fn fig1_setup() -> (DampingLaw, f64, f64) {
    (DampingLaw::quintic(Params::new(0.1, -0.6).unwrap()), 0.009, 1.0)
}

#[test]
fn coexisting_attractors_from_labeled_initial_conditions() {
    let (law, f, omega) = fig1_setup();
    let low = integrate(&law, f, omega, (0.0, 0.38), 400, 16, 1e-10).unwrap();
    let high = integrate(&law, f, omega, (0.0, 0.39), 400, 16, 1e-10).unwrap();
    let amp_low = low.tail_amplitude(64);
    let amp_high = high.tail_amplitude(64);
    assert!(
        amp_high / amp_low > 1.5,
        "attractor amplitudes too close: {amp_low} vs {amp_high}"
    );
}

#[test]
fn shooting_finds_three_orbits_two_stable() {
    let (law, f, omega) = fig1_setup();
    let params = Params::new(0.1, -0.6).unwrap();
    let sys = HbSystem::new(params);
    let roots = sys.solve_amplitudes(1.0, f * f, 1e-10).unwrap();
    assert_eq!(roots.len(), 3);
    let cfg = ShootConfig::default();
    let mut orbits = Vec::new();
    for &a in &roots {
        let guess = hb_orbit_guess(&law, f, omega, a);
        let orbit = shoot(&law, f, omega, guess, &cfg).unwrap();
        orbits.push(orbit);
    }
    orbits.sort_by(|a, b| a.amplitude.partial_cmp(&b.amplitude).expect("finite"));
    // distinct orbits
    assert!(orbits[1].amplitude - orbits[0].amplitude > 0.05);
    assert!(orbits[2].amplitude - orbits[1].amplitude > 0.05);
    assert!(orbits[0].stable && !orbits[1].stable && orbits[2].stable);
    // harmonic-balance amplitudes within 2 percent along the stable branches
    assert_relative_eq!(orbits[0].amplitude, 2.0 * roots[0].sqrt(), max_relative = 0.02);
    assert_relative_eq!(orbits[2].amplitude, 2.0 * roots[2].sqrt(), max_relative = 0.02);
    // Abel-Liouville on every converged orbit
    for o in &orbits {
        assert_relative_eq!(
            o.monodromy.determinant(),
            o.trace_integral.exp(),
            max_relative = 1e-6
        );
        let (diss, inj) = orbit_energy_balance(&law, f, omega, o, 1e-11).unwrap();
        assert_relative_eq!(diss, inj, max_relative = 1e-6);
    }
}

#[test]
fn basin_labels_for_the_two_reference_initial_conditions() {
    let (law, f, omega) = fig1_setup();
    let params = Params::new(0.1, -0.6).unwrap();
    let sys = HbSystem::new(params);
    let roots = sys.solve_amplitudes(1.0, f * f, 1e-10).unwrap();
    let cfg = ShootConfig::default();
    let mut attractors = Vec::new();
    for &a in &roots {
        let orbit = shoot(&law, f, omega, hb_orbit_guess(&law, f, omega, a), &cfg).unwrap();
        if orbit.stable {
            attractors.push(orbit);
        }
    }
    assert_eq!(attractors.len(), 2);
    attractors.sort_by(|a, b| a.amplitude.partial_cmp(&b.amplitude).expect("finite"));

    let basin_cfg = BasinConfig::default();
    let lo = classify_initial_condition(&law, f, omega, (0.0, 0.38), &attractors, &basin_cfg)
        .unwrap()
        .expect("decided");
    let hi = classify_initial_condition(&law, f, omega, (0.0, 0.39), &attractors, &basin_cfg)
        .unwrap()
        .expect("decided");
    assert_eq!(lo, 0, "v0 = 0.38 belongs to the small attractor");
    assert_eq!(hi, 1, "v0 = 0.39 belongs to the large attractor");

    // the saddle point itself must not be claimed by either basin
    let saddle = shoot(&law, f, omega, hb_orbit_guess(&law, f, omega, roots[1]), &cfg).unwrap();
    let saddle_label = classify_initial_condition(
        &law,
        f,
        omega,
        (saddle.initial.x, saddle.initial.v),
        &attractors,
        &BasinConfig { max_periods: 200, ..BasinConfig::default() },
    )
    .unwrap();
    assert!(saddle_label.is_none(), "saddle lies on the basin boundary");
}

#[test]
fn coarse_basin_grid_is_fully_decided_with_single_attractor() {
    // high forcing: only one orbit exists near resonance
    let params = Params::new(0.1, -0.6).unwrap();
    let law = DampingLaw::quintic(params);
    let f = 0.02;
    let sys = HbSystem::new(params);
    let roots = sys.solve_amplitudes(1.0, f * f, 1e-10).unwrap();
    assert_eq!(roots.len(), 1);
    let orbit =
        shoot(&law, f, 1.0, hb_orbit_guess(&law, f, 1.0, roots[0]), &ShootConfig::default())
            .unwrap();
    assert!(orbit.stable);
    let grid = basin_grid(
        &law,
        f,
        1.0,
        (-1.0, 1.0),
        (-1.0, 1.0),
        7,
        7,
        &[orbit],
        &BasinConfig::default(),
    )
    .unwrap();
    assert_eq!(grid.undecided, 0);
    assert!(grid.labels.iter().all(|&l| l == 0));
}

#[test]
fn irc_loop_closes_and_matches_harmonic_balance() {
    // zone 2 with the isola alive: the isolated branch is a closed loop
    let params = Params::new(0.1, -0.6).unwrap();
    let law = DampingLaw::quintic(params);
    let f = 0.008;
    let cfg = TraceConfig { base_points: 500, ..TraceConfig::default() };
    let tr = trace_frequency_response_quintic(params, f, &cfg).unwrap();
    assert_eq!(tr.irc_count(), 1);
    let hb_island = tr
        .branches
        .iter()
        .find(|b| b.kind == isores::hbcore::BranchKind::Isolated && b.closed)
        .unwrap();
    let (hb_lo, hb_hi) = hb_island.x_peak_range();

    let seeds = [IrcSeed { omega: 1.0, x_peak: hb_hi }];
    let search = locate_irc(
        &law,
        f,
        &seeds,
        Some(&tr),
        &ContinuationConfig { param_range: (0.5, 1.6), ..ContinuationConfig::default() },
    )
    .unwrap();
    assert_eq!(search.loops.len(), 1, "rejected: {:?}", search.rejected);
    let (branch, linked) = &search.loops[0];
    let hb_island_idx = tr
        .branches
        .iter()
        .position(|b| b.kind == isores::hbcore::BranchKind::Isolated)
        .unwrap();
    assert_eq!(*linked, Some(hb_island_idx));
    let (lo, hi) = branch.amplitude_range();
    // single-harmonic approximation error stays within a few percent
    assert_relative_eq!(hi, hb_hi, max_relative = 0.03);
    assert_relative_eq!(lo, hb_lo, max_relative = 0.05);
}

#[test]
fn no_irc_below_the_onset_forcing() {
    let params = Params::new(0.1, -0.6).unwrap();
    let law = DampingLaw::quintic(params);
    let seeds = [IrcSeed { omega: 1.0, x_peak: 0.58 }];
    let search = locate_irc(&law, 0.004, &seeds, None, &ContinuationConfig::default()).unwrap();
    assert!(search.loops.is_empty());
    assert_eq!(search.rejected.len(), 1);
}

#[test]
fn continuation_folds_match_harmonic_balance_fold_points() {
    // merged regime between the merge and hysteresis forcings: the S-shaped
    // main curve carries folds
    let params = Params::new(0.1, -0.6).unwrap();
    let law = DampingLaw::quintic(params);
    let f = 0.0105;
    let sys = HbSystem::new(params);
    let roots = sys.solve_amplitudes(1.0, f * f, 1e-10).unwrap();
    let top = *roots.last().unwrap();
    let orbit =
        shoot(&law, f, 1.0, hb_orbit_guess(&law, f, 1.0, top), &ShootConfig::default()).unwrap();
    let branch = continue_branch(
        &law,
        &orbit,
        f,
        1.0,
        ContinuationParam::Omega,
        &ContinuationConfig { param_range: (0.7, 1.4), ..ContinuationConfig::default() },
    )
    .unwrap();
    let fold_omegas: Vec<f64> =
        branch.points.iter().filter(|p| p.fold_flag).map(|p| p.omega).collect();
    assert!(!fold_omegas.is_empty(), "no folds detected on the merged branch");

    // harmonic-balance fold frequencies: where the root count changes
    let cfg = TraceConfig { base_points: 800, ..TraceConfig::default() };
    let tr = trace_frequency_response_quintic(params, f, &cfg).unwrap();
    let main = tr.main_branch().unwrap();
    let mut hb_folds = Vec::new();
    for w in main.samples.windows(2) {
        let da0 = sys.d_amp(w[0].amp_sq, w[0].omega * w[0].omega);
        let da1 = sys.d_amp(w[1].amp_sq, w[1].omega * w[1].omega);
        if da0 * da1 < 0.0 {
            hb_folds.push(0.5 * (w[0].omega + w[1].omega));
        }
    }
    for fw in &fold_omegas {
        let nearest = hb_folds
            .iter()
            .map(|h| (h - fw).abs() / fw)
            .fold(f64::INFINITY, f64::min);
        assert!(
            nearest < 0.02,
            "fold at omega = {fw} is {nearest:.3} away from harmonic-balance folds {hb_folds:?}"
        );
    }
}

#[test]
fn neimark_sacker_points_are_flagged_not_followed() {
    // past the hysteresis forcing the curve is single-valued but carries an
    // unstable segment bounded by Neimark-Sacker points
    let params = Params::new(0.1, -0.6).unwrap();
    let law = DampingLaw::quintic(params);
    let f = 0.012;
    let sys = HbSystem::new(params);
    let roots = sys.solve_amplitudes(1.0, f * f, 1e-10).unwrap();
    assert_eq!(roots.len(), 1, "response is monovalued past the hysteresis");
    let orbit = shoot(&law, f, 1.0, hb_orbit_guess(&law, f, 1.0, roots[0]), &ShootConfig::default())
        .unwrap();
    let branch = continue_branch(
        &law,
        &orbit,
        f,
        1.0,
        ContinuationParam::Omega,
        &ContinuationConfig { param_range: (0.7, 1.4), ..ContinuationConfig::default() },
    )
    .unwrap();
    let ns_points = branch.points.iter().filter(|p| p.ns_flag).count();
    assert!(ns_points >= 2, "expected Neimark-Sacker crossings on both flanks");
    assert_eq!(branch.fold_count(), 0);
    assert!(branch.points.iter().any(|p| !p.orbit.stable));
    // the branch keeps following the periodic solution through the unstable
    // segment instead of stopping at the first crossing
    let (wlo, whi) = branch.omega_range();
    assert!(wlo < 0.75 && whi > 1.35);
}

#[test]
fn zone3_unforced_isola_stability_pattern() {
    // small forcing in zone 3: the lower IRC is fully unstable, the upper one
    // keeps a stable upper branch
    let params = Params::new(0.1, -0.8).unwrap();
    let law = DampingLaw::quintic(params);
    let f = 0.004;
    let cfg = TraceConfig { base_points: 500, ..TraceConfig::default() };
    let tr = trace_frequency_response_quintic(params, f, &cfg).unwrap();
    assert_eq!(tr.irc_count(), 2, "warnings: {:?}", tr.warnings);

    let sys = HbSystem::new(params);
    let roots = sys.solve_amplitudes(1.0, f * f, 1e-10).unwrap();
    assert_eq!(roots.len(), 5);
    let shoot_cfg = ShootConfig::default();
    // lower island: both branches unstable
    let lower_bottom =
        shoot(&law, f, 1.0, hb_orbit_guess(&law, f, 1.0, roots[1]), &shoot_cfg).unwrap();
    let lower_top =
        shoot(&law, f, 1.0, hb_orbit_guess(&law, f, 1.0, roots[2]), &shoot_cfg).unwrap();
    assert!(!lower_bottom.stable && !lower_top.stable);
    // upper island: its upper branch is stable
    let upper_top =
        shoot(&law, f, 1.0, hb_orbit_guess(&law, f, 1.0, roots[4]), &shoot_cfg).unwrap();
    assert!(upper_top.stable);
    let upper_bottom =
        shoot(&law, f, 1.0, hb_orbit_guess(&law, f, 1.0, roots[3]), &shoot_cfg).unwrap();
    assert!(!upper_bottom.stable);
}
