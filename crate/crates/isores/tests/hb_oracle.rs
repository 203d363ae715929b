//! Harmonic-balance checks against independent oracles: a bisection-based
//! amplitude scanner, finite differences of the residual, and root-count
//! parity.

use approx::assert_relative_eq;
use isores::hbcore::{
    trace_frequency_response_quintic, DescribingResidual, HbSystem, TraceConfig,
};
use isores::model::{DampingLaw, Params};
use rand::{Rng, SeedableRng};

/// Sign-change scan of the residual over A in [0, a_hi] at fixed resolution;
/// the independent route the amplitude solver is checked against.
fn bisection_oracle(sys: &HbSystem, freq_sq: f64, force_sq: f64, a_hi: f64, cells: usize) -> Vec<f64> {
    let mut roots = Vec::new();
    let mut prev = sys.residual(0.0, freq_sq, force_sq);
    if prev == 0.0 {
        roots.push(0.0);
    }
    for i in 1..=cells {
        let a = a_hi * i as f64 / cells as f64;
        let g = sys.residual(a, freq_sq, force_sq);
        if prev * g < 0.0 {
            let (mut lo, mut hi) = (a_hi * (i - 1) as f64 / cells as f64, a);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if sys.residual(lo, freq_sq, force_sq) * sys.residual(mid, freq_sq, force_sq) <= 0.0
                {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        } else if g == 0.0 {
            roots.push(a);
        }
        prev = g;
    }
    roots
}

#[test]
fn solver_agrees_with_bisection_oracle() {
    let sys = HbSystem::new(Params::new(0.1, -0.6).unwrap());
    // scan at the paper's 1e-6 resolution over A in [0, 1]
    for (omega, f) in [(1.0, 0.0056), (1.0, 0.0057), (1.0, 0.006), (0.99, 0.008), (1.01, 0.02)] {
        let oracle = bisection_oracle(&sys, omega * omega, f * f, 1.0, 1_000_000);
        let solved = sys.solve_amplitudes(omega * omega, f * f, 1e-9).unwrap();
        assert_eq!(solved.len(), oracle.len(), "count mismatch at omega={omega}, f={f}");
        for (a, b) in solved.iter().zip(&oracle) {
            assert_relative_eq!(a, b, epsilon = 1e-7, max_relative = 1e-5);
        }
    }
}

#[test]
fn derivative_formulas_match_finite_differences() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..1000 {
        let sys = HbSystem::new(
            Params::new(rng.random_range(0.01..0.8), rng.random_range(-1.2..1.2)).unwrap(),
        );
        let a: f64 = rng.random_range(1e-3..0.4);
        let w: f64 = rng.random_range(0.3..3.0);
        let ha = 1e-6 * a;
        let hw = 1e-6 * w;
        let g = |a: f64, w: f64| sys.residual(a, w, 0.0);

        let da_fd = (g(a + ha, w) - g(a - ha, w)) / (2.0 * ha);
        assert_relative_eq!(sys.d_amp(a, w), da_fd, max_relative = 1e-6);
        let dw_fd = (g(a, w + hw) - g(a, w - hw)) / (2.0 * hw);
        assert_relative_eq!(sys.d_freq(a, w), dw_fd, max_relative = 1e-6);

        // second derivatives need the wider quartic-root step
        let ha2 = 2e-4 * a.max(0.05);
        let hw2 = 2e-4 * w.max(0.05);
        let daa_fd = (g(a + ha2, w) - 2.0 * g(a, w) + g(a - ha2, w)) / (ha2 * ha2);
        assert_relative_eq!(sys.d2_amp2(a, w), daa_fd, max_relative = 1e-5, epsilon = 1e-7);
        let dww_fd = (g(a, w + hw2) - 2.0 * g(a, w) + g(a, w - hw2)) / (hw2 * hw2);
        assert_relative_eq!(sys.d2_freq2(a, w), dww_fd, max_relative = 1e-5, epsilon = 1e-7);
        let daw_fd = (g(a + ha2, w + hw2) - g(a + ha2, w - hw2) - g(a - ha2, w + hw2)
            + g(a - ha2, w - hw2))
            / (4.0 * ha2 * hw2);
        assert_relative_eq!(sys.d2_amp_freq(a, w), daw_fd, max_relative = 1e-5, epsilon = 1e-7);

        // Hessian determinant: closed form vs second partials vs finite differences
        let det = sys.hessian_det(a, w);
        let det_sym = sys.d2_amp2(a, w) * sys.d2_freq2(a, w) - sys.d2_amp_freq(a, w).powi(2);
        assert_relative_eq!(det, det_sym, max_relative = 1e-9, epsilon = 1e-9);
        let det_fd = sys.hessian_det_fd(a, w);
        assert_relative_eq!(det, det_fd, max_relative = 1e-5, epsilon = 1e-5);
    }
}

#[test]
fn root_count_parity_is_odd_for_positive_forcing() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
    let mut checked = 0;
    while checked < 500 {
        let sys = HbSystem::new(
            Params::new(rng.random_range(0.02..0.6), rng.random_range(-1.0..0.5)).unwrap(),
        );
        let w: f64 = rng.random_range(0.2..2.5);
        let f2: f64 = rng.random_range(1e-8..0.25);
        let roots = sys.solve_amplitudes(w, f2, 1e-9).unwrap();
        // skip draws that land within machine reach of a fold, where the
        // distinct-root count legitimately drops by one
        let degenerate = roots.iter().any(|&a| sys.d_amp(a, w).abs() < 1e-5);
        if degenerate {
            continue;
        }
        assert_eq!(roots.len() % 2, 1, "even root count at W={w}, F={f2}");
        checked += 1;
    }
}

#[test]
fn resonance_energy_balance_identity() {
    // at unit squared frequency: g(A, 1, F) = 0 iff fd(2 sqrt(A))^2 = 4 F,
    // algebraically, for every parameter set
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    for _ in 0..500 {
        let params =
            Params::new(rng.random_range(0.01..0.9), rng.random_range(-1.2..1.2)).unwrap();
        let sys = HbSystem::new(params);
        let law = DampingLaw::quintic(params);
        let a: f64 = rng.random_range(1e-4..0.5);
        let fd = isores::energybalance::averaged_damping(&law, 2.0 * a.sqrt());
        let force_sq = 0.25 * fd * fd;
        let g = sys.residual(a, 1.0, force_sq);
        let scale = sys.residual_scale(a, 1.0, force_sq);
        assert!(
            g.abs() <= 1e-12 * scale,
            "identity violated: g = {g:.3e} at A = {a}, params = {params:?}"
        );
    }
}

#[test]
fn traced_branches_satisfy_residual_tolerance() {
    let params = Params::new(0.1, -0.6).unwrap();
    let sys = HbSystem::new(params);
    let f = 0.008;
    let cfg = TraceConfig { base_points: 500, ..TraceConfig::default() };
    let tr = trace_frequency_response_quintic(params, f, &cfg).unwrap();
    let tol = 1e-10 * (f * f).max(1.0);
    for b in &tr.branches {
        for s in &b.samples {
            let g = sys.residual(s.amp_sq, s.omega * s.omega, f * f);
            assert!(g.abs() <= tol, "residual {g:.3e} beyond tolerance on branch");
        }
    }
}

#[test]
fn describing_solver_reproduces_polynomial_route_topology() {
    // the generic describing-function route sees the same solution structure
    // as the polynomial path for the quintic law
    let params = Params::new(0.1, -0.6).unwrap();
    let cfg = TraceConfig { base_points: 500, x_peak_max: 2.0, ..TraceConfig::default() };
    let poly = trace_frequency_response_quintic(params, 0.008, &cfg).unwrap();
    assert_eq!(poly.irc_count(), 1);
    let law = DampingLaw::quintic(params);
    let gen_res = DescribingResidual::new(&law);
    let n_at_1 = gen_res.solve_amplitudes(1.0, 0.008 * 0.008, 1.0, 3000, 1e-9).unwrap().len();
    assert_eq!(n_at_1, 3);
}
