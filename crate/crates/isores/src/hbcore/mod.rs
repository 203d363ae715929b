//! Single-harmonic balance: the algebraic response manifold of the quintic
//! oscillator in squared variables, its exact derivatives, amplitude solving
//! and frequency-response tracing.
//!
//! Throughout, `amp_sq` is the squared complex amplitude (peak displacement is
//! `2 sqrt(amp_sq)`), `freq_sq` the squared forcing frequency and `force_sq`
//! the squared single-sided forcing amplitude.

mod trace;

pub use trace::{
    trace_frequency_response, trace_frequency_response_quintic, BranchKind, BranchSample,
    ResponseBranch, StabilityHint, TraceConfig, TraceResult,
};

use crate::error::{Error, Result};
use crate::model::{DampingLaw, Params};
use crate::numeric::{real_polynomial_roots, CubicSpline};

/// A point on the harmonic-balance manifold, in squared variables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HbPoint {
    pub amp_sq: f64,
    pub freq_sq: f64,
    pub force_sq: f64,
}

impl HbPoint {
    pub fn x_peak(&self) -> f64 {
        2.0 * self.amp_sq.sqrt()
    }

    pub fn omega(&self) -> f64 {
        self.freq_sq.sqrt()
    }

    pub fn forcing(&self) -> f64 {
        self.force_sq.sqrt()
    }
}

/// Residual tolerance for accepting a manifold point at squared forcing `force_sq`.
pub fn residual_tol(force_sq: f64) -> f64 {
    1e-10 * force_sq.abs().max(1.0)
}

/// The quintic-law response manifold with exact polynomial derivatives.
#[derive(Debug, Clone, Copy)]
pub struct HbSystem {
    pub c1: f64,
    pub c3: f64,
}

impl From<Params> for HbSystem {
    fn from(p: Params) -> Self {
        Self { c1: p.c1, c3: p.c3 }
    }
}

impl HbSystem {
    pub fn new(params: Params) -> Self {
        params.into()
    }

    /// Manifold residual g(A, W, F).
    pub fn residual(&self, amp_sq: f64, freq_sq: f64, force_sq: f64) -> f64 {
        let (a, w) = (amp_sq, freq_sq);
        let (c1, c3) = (self.c1, self.c3);
        100.0 * a.powi(5) * w.powi(5)
            + 60.0 * c3 * a.powi(4) * w.powi(4)
            + (20.0 * c1 + 9.0 * c3 * c3) * a.powi(3) * w.powi(3)
            + 6.0 * c1 * c3 * a * a * w * w
            + a * ((c1 * c1 - 2.0) * w + w * w + 1.0)
            - force_sq
    }

    /// Largest term magnitude of the residual, for scale-aware tolerances.
    pub fn residual_scale(&self, amp_sq: f64, freq_sq: f64, force_sq: f64) -> f64 {
        let (a, w) = (amp_sq, freq_sq);
        let (c1, c3) = (self.c1, self.c3);
        [
            100.0 * a.powi(5) * w.powi(5),
            60.0 * c3 * a.powi(4) * w.powi(4),
            (20.0 * c1 + 9.0 * c3 * c3) * a.powi(3) * w.powi(3),
            6.0 * c1 * c3 * a * a * w * w,
            a * (c1 * c1 - 2.0) * w,
            a * (w * w + 1.0),
            force_sq,
        ]
        .into_iter()
        .map(f64::abs)
        .fold(f64::MIN_POSITIVE, f64::max)
    }

    /// dg/dA.
    pub fn d_amp(&self, amp_sq: f64, freq_sq: f64) -> f64 {
        let (a, w) = (amp_sq, freq_sq);
        let (c1, c3) = (self.c1, self.c3);
        500.0 * a.powi(4) * w.powi(5)
            + 240.0 * c3 * a.powi(3) * w.powi(4)
            + 3.0 * (20.0 * c1 + 9.0 * c3 * c3) * a * a * w.powi(3)
            + w * w * (12.0 * c1 * c3 * a + 1.0)
            + (c1 * c1 - 2.0) * w
            + 1.0
    }

    /// dg/dW. Carries a global factor A.
    pub fn d_freq(&self, amp_sq: f64, freq_sq: f64) -> f64 {
        let (a, w) = (amp_sq, freq_sq);
        let (c1, c3) = (self.c1, self.c3);
        a * (500.0 * a.powi(4) * w.powi(4)
            + 240.0 * c3 * a.powi(3) * w.powi(3)
            + 27.0 * c3 * c3 * a * a * w * w
            + 12.0 * c1 * a * w * (5.0 * a * w + c3)
            + c1 * c1
            + 2.0 * w
            - 2.0)
    }

    /// d2g/dA2.
    pub fn d2_amp2(&self, amp_sq: f64, freq_sq: f64) -> f64 {
        let (a, w) = (amp_sq, freq_sq);
        let (c1, c3) = (self.c1, self.c3);
        2.0 * w
            * w
            * (a * w * (1000.0 * a * a * w * w + 360.0 * c3 * a * w + 27.0 * c3 * c3)
                + 6.0 * c1 * (10.0 * a * w + c3))
    }

    /// d2g/dW2.
    pub fn d2_freq2(&self, amp_sq: f64, freq_sq: f64) -> f64 {
        let (a, w) = (amp_sq, freq_sq);
        let (c1, c3) = (self.c1, self.c3);
        2000.0 * a.powi(5) * w.powi(3)
            + 720.0 * c3 * a.powi(4) * w * w
            + (120.0 * c1 + 54.0 * c3 * c3) * a.powi(3) * w
            + 12.0 * c1 * c3 * a * a
            + 2.0 * a
    }

    /// Mixed partial d2g/dAdW.
    pub fn d2_amp_freq(&self, amp_sq: f64, freq_sq: f64) -> f64 {
        let (a, w) = (amp_sq, freq_sq);
        let (c1, c3) = (self.c1, self.c3);
        2500.0 * a.powi(4) * w.powi(4)
            + 960.0 * c3 * a.powi(3) * w.powi(3)
            + (180.0 * c1 + 81.0 * c3 * c3) * a * a * w * w
            + 24.0 * c1 * c3 * a * w
            + 2.0 * w
            + c1 * c1
            - 2.0
    }

    /// d3g/dA3.
    pub fn d3_amp3(&self, amp_sq: f64, freq_sq: f64) -> f64 {
        let (a, w) = (amp_sq, freq_sq);
        let (c1, c3) = (self.c1, self.c3);
        6000.0 * a * a * w.powi(5)
            + 1440.0 * c3 * a * w.powi(4)
            + (120.0 * c1 + 54.0 * c3 * c3) * w.powi(3)
    }

    /// d3g/dA2dW.
    pub fn d3_amp2_freq(&self, amp_sq: f64, freq_sq: f64) -> f64 {
        let (a, w) = (amp_sq, freq_sq);
        let (c1, c3) = (self.c1, self.c3);
        10000.0 * a.powi(3) * w.powi(4)
            + 2880.0 * c3 * a * a * w.powi(3)
            + (360.0 * c1 + 162.0 * c3 * c3) * a * w * w
            + 24.0 * c1 * c3 * w
    }

    /// d4g/dA4.
    pub fn d4_amp4(&self, amp_sq: f64, freq_sq: f64) -> f64 {
        let (a, w) = (amp_sq, freq_sq);
        let c3 = self.c3;
        12000.0 * a * w.powi(5) + 1440.0 * c3 * w.powi(4)
    }

    /// Hessian determinant of g with respect to (A, W), closed form.
    ///
    /// The transcribed expression was re-derived symbolically from the
    /// residual and matches `d2_amp2 * d2_freq2 - d2_amp_freq^2` exactly; the
    /// finite-difference path below stays as an independent check.
    pub fn hessian_det(&self, amp_sq: f64, freq_sq: f64) -> f64 {
        let (a, w) = (amp_sq, freq_sq);
        let (c1, c3) = (self.c1, self.c3);
        -2_250_000.0 * a.powi(8) * w.powi(8)
            - 1_920_000.0 * c3 * a.powi(7) * w.powi(7)
            - 592_200.0 * c3 * c3 * a.powi(6) * w.powi(6)
            - 240.0 * a.powi(4) * w.powi(5) * (324.0 * c3.powi(3) * a + 25.0)
            - 5.0 * a.powi(3) * w.powi(4) * (729.0 * c3.powi(4) * a - 2000.0 * a + 480.0 * c3)
            + 4.0 * w * w * (81.0 * c3 * c3 * a * a - 1.0)
            + 24.0 * c3 * a * a * w.powi(3) * (160.0 * a - 9.0 * c3)
            - 2.0 * c1
                * c1
                * (11_500.0 * a.powi(4) * w.powi(4)
                    + 3840.0 * c3 * a.powi(3) * w.powi(3)
                    + 297.0 * c3 * c3 * a * a * w * w
                    + 2.0 * w
                    - 2.0)
            - 24.0 * c1
                * a
                * w
                * (c3 * (10_200.0 * a.powi(4) * w.powi(4) + 3.0 * w - 4.0)
                    + 10.0 * a * w * (1750.0 * a.powi(4) * w.powi(4) + 2.0 * w - 3.0)
                    + 1875.0 * c3 * c3 * a.powi(3) * w.powi(3)
                    + 108.0 * c3.powi(3) * a * a * w * w)
            - 24.0 * c1.powi(3) * a * w * (15.0 * a * w + 2.0 * c3)
            - c1.powi(4)
            + 8.0 * w
            - 4.0
    }

    /// Hessian determinant from central finite differences of the residual.
    /// Independent of every closed-form derivative above.
    pub fn hessian_det_fd(&self, amp_sq: f64, freq_sq: f64) -> f64 {
        let ha = 1e-4 * amp_sq.abs().max(1e-2);
        let hw = 1e-4 * freq_sq.abs().max(1e-2);
        let g = |a: f64, w: f64| self.residual(a, w, 0.0);
        let gaa =
            (g(amp_sq + ha, freq_sq) - 2.0 * g(amp_sq, freq_sq) + g(amp_sq - ha, freq_sq)) / (ha * ha);
        let gww =
            (g(amp_sq, freq_sq + hw) - 2.0 * g(amp_sq, freq_sq) + g(amp_sq, freq_sq - hw)) / (hw * hw);
        let gaw = (g(amp_sq + ha, freq_sq + hw) - g(amp_sq + ha, freq_sq - hw)
            - g(amp_sq - ha, freq_sq + hw)
            + g(amp_sq - ha, freq_sq - hw))
            / (4.0 * ha * hw);
        gaa * gww - gaw * gaw
    }

    /// Hessian determinant with the closed form checked against the
    /// finite-difference path; the finite-difference value wins (and the
    /// discrepancy is logged) if the two disagree.
    pub fn hessian_det_verified(&self, amp_sq: f64, freq_sq: f64) -> f64 {
        let closed = self.hessian_det(amp_sq, freq_sq);
        let fd = self.hessian_det_fd(amp_sq, freq_sq);
        // The FD path carries ~1e-8 relative truncation error itself; only a
        // gross disagreement indicates a transcription problem.
        let scale = closed.abs().max(fd.abs()).max(1e-6);
        if (closed - fd).abs() > 1e-6 * scale && (closed - fd).abs() > 1e-4 * fd.abs().max(1e-12) {
            log::warn!(
                "hessian determinant closed form ({closed:.9e}) disagrees with finite \
                 differences ({fd:.9e}) at A={amp_sq:.6e}, W={freq_sq:.6e}; using the latter"
            );
            return fd;
        }
        closed
    }

    /// All real nonnegative amplitude roots of the manifold at fixed squared
    /// frequency and forcing, ascending. Companion-matrix eigenvalues polished
    /// by Newton; near-duplicates within `tol_root` merged.
    pub fn solve_amplitudes(&self, freq_sq: f64, force_sq: f64, tol_root: f64) -> Result<Vec<f64>> {
        if !(freq_sq > 0.0) {
            return Err(Error::InvalidInput(format!(
                "squared frequency must be positive, got {freq_sq}"
            )));
        }
        if force_sq < 0.0 {
            return Err(Error::InvalidInput("squared forcing must be >= 0".into()));
        }
        let (c1, c3, w) = (self.c1, self.c3, freq_sq);
        let coeffs = [
            -force_sq,
            (c1 * c1 - 2.0) * w + w * w + 1.0,
            6.0 * c1 * c3 * w * w,
            (20.0 * c1 + 9.0 * c3 * c3) * w.powi(3),
            60.0 * c3 * w.powi(4),
            100.0 * w.powi(5),
        ];
        let candidates = real_polynomial_roots(&coeffs, 3e-6);
        let mut roots = Vec::with_capacity(candidates.len());
        let res_tol = residual_tol(force_sq);
        for mut a in candidates {
            // Newton polish against the exact residual
            for _ in 0..40 {
                let r = self.residual(a, w, force_sq);
                let d = self.d_amp(a, w);
                if d == 0.0 {
                    break;
                }
                let step = r / d;
                a -= step;
                if step.abs() <= 1e-16 * a.abs().max(1.0) {
                    break;
                }
            }
            if a < -tol_root {
                continue;
            }
            let mut a = a.max(0.0);
            let res = self.residual(a, w, force_sq).abs();
            if res > res_tol {
                // Newton stalls either on a tangent (double) root or on a
                // spurious candidate from a complex eigenvalue pair near a
                // fold; a sign change in a small bracket tells them apart
                let width = 1e-4 * a.abs().max(1e-2);
                let mut bracketed = None;
                for k in 1..=4 {
                    let (lo, hi) = ((a - k as f64 * width).max(0.0), a + k as f64 * width);
                    if self.residual(lo, w, force_sq) * self.residual(hi, w, force_sq) < 0.0 {
                        bracketed = Some((lo, hi));
                        break;
                    }
                }
                match bracketed {
                    Some((lo, hi)) => {
                        a = crate::numeric::brent(
                            |x| self.residual(x, w, force_sq),
                            lo,
                            hi,
                            1e-15 * a.abs().max(1.0),
                            200,
                        )
                        .map_err(|e| {
                            Error::IllConditioned(format!(
                                "amplitude root at W={w:.6e}, F={force_sq:.6e} failed to refine: {e}"
                            ))
                        })?;
                    }
                    // no sign change and a residual that is small on the local
                    // scale: an annihilated fold pair, not a root
                    None if res <= 1e-3 * self.residual_scale(a, w, force_sq).max(1e-6) => {
                        continue;
                    }
                    None => {
                        return Err(Error::IllConditioned(format!(
                            "amplitude root at W={w:.6e}, F={force_sq:.6e} stalled with residual {res:.3e}"
                        )));
                    }
                }
            }
            roots.push(a);
        }
        roots.sort_by(|x, y| x.partial_cmp(y).expect("finite roots"));
        roots.dedup_by(|x, y| (*x - *y).abs() <= tol_root * x.abs().max(1.0));
        Ok(roots)
    }
}

/// Harmonic-balance residual for an arbitrary odd damping law, built from the
/// law's describing (averaged-damping) amplitude:
/// `g = A (1 - W)^2 + fd(2 sqrt(A W))^2 / 4 - F`.
///
/// For the quintic law this reduces exactly to [`HbSystem::residual`].
pub struct DescribingResidual<'a> {
    law: &'a DampingLaw,
    spline: Option<CubicSpline>,
}

impl<'a> DescribingResidual<'a> {
    pub fn new(law: &'a DampingLaw) -> Self {
        Self { law, spline: None }
    }

    /// Precomputes a dense interpolant of the describing amplitude over
    /// velocity amplitudes `[0, v_max]` to make grid scans cheap.
    pub fn with_cache(law: &'a DampingLaw, v_max: f64, nodes: usize) -> Self {
        let n = nodes.max(16);
        let xs: Vec<f64> = (0..=n).map(|i| v_max * i as f64 / n as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|&v| law.averaged_force(v)).collect();
        let spline = CubicSpline::new(xs, ys).ok();
        Self { law, spline }
    }

    pub fn law(&self) -> &DampingLaw {
        self.law
    }

    fn describing(&self, v_amp: f64, fast: bool) -> f64 {
        if fast {
            if let Some(sp) = &self.spline {
                return sp.eval(v_amp);
            }
        }
        self.law.averaged_force(v_amp)
    }

    fn eval(&self, amp_sq: f64, freq_sq: f64, force_sq: f64, fast: bool) -> f64 {
        let fd = self.describing(2.0 * (amp_sq * freq_sq).sqrt(), fast);
        amp_sq * (1.0 - freq_sq) * (1.0 - freq_sq) + 0.25 * fd * fd - force_sq
    }

    /// Residual using the exact describing amplitude.
    pub fn residual(&self, amp_sq: f64, freq_sq: f64, force_sq: f64) -> f64 {
        self.eval(amp_sq, freq_sq, force_sq, false)
    }

    /// Residual using the cached interpolant when one was built.
    pub fn residual_fast(&self, amp_sq: f64, freq_sq: f64, force_sq: f64) -> f64 {
        self.eval(amp_sq, freq_sq, force_sq, true)
    }

    /// Amplitude roots at fixed squared frequency/forcing by sign-change
    /// scanning in `sqrt(A)` up to `a_max`, refined against the exact residual.
    pub fn solve_amplitudes(
        &self,
        freq_sq: f64,
        force_sq: f64,
        a_max: f64,
        cells: usize,
        tol_root: f64,
    ) -> Result<Vec<f64>> {
        let n = cells.max(8);
        let step = a_max / n as f64;
        let mut roots: Vec<f64> = Vec::new();
        let mut prev_a = 0.0;
        let mut prev_g = self.residual_fast(0.0, freq_sq, force_sq);
        if prev_g == 0.0 {
            roots.push(0.0);
        }
        for i in 1..=n {
            let a = step * i as f64;
            let g = self.residual_fast(a * a, freq_sq, force_sq);
            if prev_g * g < 0.0 {
                // re-bracket on the exact residual before refining
                let exact = |x: f64| self.residual(x * x, freq_sq, force_sq);
                let (mut lo, mut hi) = (prev_a, a);
                let (mut flo, mut fhi) = (exact(lo), exact(hi));
                if flo * fhi > 0.0 {
                    let pad = 2.0 * step;
                    lo = (lo - pad).max(0.0);
                    hi += pad;
                    flo = exact(lo);
                    fhi = exact(hi);
                }
                if flo * fhi <= 0.0 {
                    let r = crate::numeric::brent(exact, lo, hi, 1e-15 * a_max.max(1.0), 200)?;
                    roots.push(r * r);
                }
            } else if g == 0.0 {
                roots.push(a * a);
            }
            prev_a = a;
            prev_g = g;
        }
        roots.sort_by(|x, y| x.partial_cmp(y).expect("finite roots"));
        roots.dedup_by(|x, y| (*x - *y).abs() <= tol_root * x.abs().max(1.0));
        Ok(roots)
    }
}
