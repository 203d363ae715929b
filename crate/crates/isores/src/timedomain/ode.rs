//! Embedded Dormand-Prince 5(4) integrator with PI-free standard step control,
//! fixed-size state, and exact endpoint hits.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct OdeControl {
    pub rtol: f64,
    pub atol: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for OdeControl {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-12, h_max: f64::INFINITY, max_steps: 50_000_000 }
    }
}

impl OdeControl {
    pub fn with_tol(tol: f64) -> Self {
        Self { rtol: tol, atol: tol * 1e-2, ..Default::default() }
    }
}

const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
const B: [f64; 6] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
];
// b - b_hat, for the embedded 4th-order error estimate (k7 term included)
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];

/// Integrates `y' = f(t, y)` from `t0` to `t1` (forward only), invoking
/// `observe` after every accepted step. Returns the state at `t1`.
pub fn dopri5<const N: usize>(
    f: &mut impl FnMut(f64, &[f64; N]) -> [f64; N],
    t0: f64,
    t1: f64,
    y0: [f64; N],
    ctl: &OdeControl,
    observe: &mut impl FnMut(f64, &[f64; N]),
) -> Result<[f64; N]> {
    let span = t1 - t0;
    if span <= 0.0 {
        return Ok(y0);
    }
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    let mut h = (ctl.rtol.powf(0.25) * span).min(span / 10.0).min(ctl.h_max).max(1e-10 * span);
    let h_floor = span * 1e-15;

    for _ in 0..ctl.max_steps {
        if t >= t1 {
            return Ok(y);
        }
        h = h.min(t1 - t).min(ctl.h_max);
        if h < h_floor {
            return Err(Error::OdeStepUnderflow { t, h });
        }

        let stage = |y: &[f64; N], ks: &[&[f64; N]], coeffs: &[f64], h: f64| -> [f64; N] {
            let mut out = *y;
            for i in 0..N {
                let mut acc = 0.0;
                for (k, c) in ks.iter().zip(coeffs) {
                    acc += c * k[i];
                }
                out[i] += h * acc;
            }
            out
        };

        let k2 = f(t + C[0] * h, &stage(&y, &[&k1], &A2, h));
        let k3 = f(t + C[1] * h, &stage(&y, &[&k1, &k2], &A3, h));
        let k4 = f(t + C[2] * h, &stage(&y, &[&k1, &k2, &k3], &A4, h));
        let k5 = f(t + C[3] * h, &stage(&y, &[&k1, &k2, &k3, &k4], &A5, h));
        let k6 = f(t + C[4] * h, &stage(&y, &[&k1, &k2, &k3, &k4, &k5], &A6, h));
        let y1 = stage(&y, &[&k1, &k2, &k3, &k4, &k5, &k6], &B, h);
        let k7 = f(t + h, &y1);

        let mut err_sq = 0.0;
        for i in 0..N {
            let e = k1[i] * E[0]
                + k3[i] * E[2]
                + k4[i] * E[3]
                + k5[i] * E[4]
                + k6[i] * E[5]
                + k7[i] * E[6];
            let sc = ctl.atol + ctl.rtol * y[i].abs().max(y1[i].abs());
            let r = h * e / sc;
            err_sq += r * r;
        }
        let err = (err_sq / N as f64).sqrt();

        if err <= 1.0 {
            t += h;
            y = y1;
            k1 = k7; // first-same-as-last
            observe(t, &y);
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h *= fac;
        } else {
            h *= (0.9 * err.powf(-0.2)).max(0.1);
        }
    }
    Err(Error::OdeStepUnderflow { t, h })
}

/// Convenience wrapper without an observer.
pub fn dopri5_to<const N: usize>(
    f: &mut impl FnMut(f64, &[f64; N]) -> [f64; N],
    t0: f64,
    t1: f64,
    y0: [f64; N],
    ctl: &OdeControl,
) -> Result<[f64; N]> {
    dopri5(f, t0, t1, y0, ctl, &mut |_, _| {})
}
