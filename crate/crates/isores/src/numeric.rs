//! Shared numerical primitives: root bracketing and refinement, cubic splines,
//! real polynomial roots via the companion matrix, and Bessel J1.

use crate::error::{Error, Result};
use nalgebra::{Complex, DMatrix};

/// Brent's method on a bracketing interval. `fa` and `fb` must have opposite
/// signs (zero endpoints are returned immediately).
pub fn brent<F: FnMut(f64) -> f64>(
    mut f: F,
    mut a: f64,
    mut b: f64,
    tol: f64,
    max_iter: usize,
) -> Result<f64> {
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa * fb > 0.0 {
        return Err(Error::BracketingFailed {
            lo: a,
            hi: b,
            what: format!("no sign change (f(lo)={fa:.3e}, f(hi)={fb:.3e})"),
        });
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iter {
        if fb.abs() > fc.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            // inverse quadratic / secant step
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            if 2.0 * p < (3.0 * xm * q - (tol1 * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
        if (fb > 0.0) == (fc > 0.0) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
    }
    Ok(b)
}

/// Scans `f` on a uniform grid over `[lo, hi]` and refines every sign change
/// with Brent. Returns the refined roots in ascending order.
pub fn scan_roots<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    cells: usize,
    tol: f64,
) -> Result<Vec<f64>> {
    let n = cells.max(2);
    let mut roots = Vec::new();
    let step = (hi - lo) / n as f64;
    let mut x_prev = lo;
    let mut f_prev = f(x_prev);
    for i in 1..=n {
        let x = if i == n { hi } else { lo + step * i as f64 };
        let fx = f(x);
        if f_prev == 0.0 {
            roots.push(x_prev);
        } else if f_prev * fx < 0.0 {
            roots.push(brent(&mut f, x_prev, x, tol, 200)?);
        }
        x_prev = x;
        f_prev = fx;
    }
    if f_prev == 0.0 {
        roots.push(x_prev);
    }
    roots.dedup_by(|a, b| (*a - *b).abs() <= tol);
    Ok(roots)
}

/// Natural cubic spline through strictly increasing knots.
#[derive(Debug, Clone)]
pub struct CubicSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    // second derivatives at the knots
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        let n = xs.len();
        if n < 2 || ys.len() != n {
            return Err(Error::InvalidInput(
                "spline needs at least two knots and matching lengths".into(),
            ));
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput(
                "spline knots must be strictly increasing".into(),
            ));
        }
        // tridiagonal solve for natural boundary conditions
        let mut m = vec![0.0; n];
        if n > 2 {
            let mut diag = vec![0.0; n];
            let mut rhs = vec![0.0; n];
            let mut upper = vec![0.0; n];
            for i in 1..n - 1 {
                let h0 = xs[i] - xs[i - 1];
                let h1 = xs[i + 1] - xs[i];
                diag[i] = 2.0 * (h0 + h1);
                upper[i] = h1;
                rhs[i] = 6.0 * ((ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0);
            }
            // forward elimination (lower coefficient equals previous h)
            for i in 2..n - 1 {
                let h0 = xs[i] - xs[i - 1];
                let w = h0 / diag[i - 1];
                diag[i] -= w * upper[i - 1];
                rhs[i] -= w * rhs[i - 1];
            }
            for i in (1..n - 1).rev() {
                m[i] = (rhs[i] - upper[i] * m[i + 1]) / diag[i];
            }
        }
        Ok(Self { xs, ys, m })
    }

    fn segment(&self, x: f64) -> usize {
        match self
            .xs
            .binary_search_by(|v| v.partial_cmp(&x).expect("finite knot"))
        {
            Ok(i) => i.min(self.xs.len() - 2),
            Err(i) => i.clamp(1, self.xs.len() - 1) - 1,
        }
    }

    /// Evaluates the spline; extrapolates linearly outside the knot range.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.ys[0] + self.deriv(self.xs[0]) * (x - self.xs[0]);
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1] + self.deriv(self.xs[n - 1]) * (x - self.xs[n - 1]);
        }
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let a = (self.xs[i + 1] - x) / h;
        let b = (x - self.xs[i]) / h;
        a * self.ys[i]
            + b * self.ys[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }

    pub fn deriv(&self, x: f64) -> f64 {
        let n = self.xs.len();
        let xc = x.clamp(self.xs[0], self.xs[n - 1]);
        let i = self.segment(xc);
        let h = self.xs[i + 1] - self.xs[i];
        let a = (self.xs[i + 1] - xc) / h;
        let b = (xc - self.xs[i]) / h;
        (self.ys[i + 1] - self.ys[i]) / h
            + ((3.0 * b * b - 1.0) * self.m[i + 1] - (3.0 * a * a - 1.0) * self.m[i]) * h / 6.0
    }
}

/// Real roots of a polynomial with coefficients in ascending power order,
/// computed from the eigenvalues of the companion matrix.
///
/// Zero roots are deflated first (they make the companion matrix singular),
/// the Schur iteration is bounded, and a Durand-Kerner sweep covers the rare
/// degenerate spectra the QR iteration fails on (e.g. repeated imaginary
/// pairs). Roots are reported when the eigenvalue's imaginary part is below
/// `imag_tol * (1 + |re|)`.
pub fn real_polynomial_roots(coeffs: &[f64], imag_tol: f64) -> Vec<f64> {
    // strip vanishing leading coefficients
    let mut deg = coeffs.len();
    while deg > 1 && coeffs[deg - 1] == 0.0 {
        deg -= 1;
    }
    // factor out zero roots
    let mut zero_mult = 0;
    while zero_mult + 1 < deg && coeffs[zero_mult] == 0.0 {
        zero_mult += 1;
    }
    let work = &coeffs[zero_mult..deg];
    let mut roots: Vec<f64> = if zero_mult > 0 { vec![0.0] } else { Vec::new() };
    let n = work.len() - 1;
    if n >= 1 {
        let lead = work[n];
        let mut comp = DMatrix::<f64>::zeros(n, n);
        for i in 1..n {
            comp[(i, i - 1)] = 1.0;
        }
        for i in 0..n {
            comp[(i, n - 1)] = -work[i] / lead;
        }
        let eig = nalgebra::linalg::Schur::try_new(comp, 1e-14, 200 * n.max(4))
            .map(|schur| schur.complex_eigenvalues().iter().copied().collect::<Vec<_>>())
            .unwrap_or_else(|| durand_kerner(work));
        roots.extend(
            eig.iter()
                .filter(|z| z.im.abs() <= imag_tol * (1.0 + z.re.abs()))
                .map(|z| z.re),
        );
    }
    roots.sort_by(|a, b| a.partial_cmp(b).expect("finite root"));
    roots
}

/// Durand-Kerner simultaneous root iteration; coefficients ascending.
fn durand_kerner(coeffs: &[f64]) -> Vec<Complex<f64>> {
    let n = coeffs.len() - 1;
    let lead = coeffs[n];
    let monic: Vec<f64> = coeffs.iter().map(|&c| c / lead).collect();
    let eval = |z: Complex<f64>| -> Complex<f64> {
        monic.iter().rev().fold(Complex::new(0.0, 0.0), |acc, &c| acc * z + c)
    };
    let radius = 1.0 + monic[..n].iter().map(|c| c.abs()).fold(0.0, f64::max);
    let seed = Complex::new(0.4, 0.9);
    let mut zs: Vec<Complex<f64>> = (0..n).map(|k| seed.powu(k as u32 + 1) * radius).collect();
    for _ in 0..600 {
        let mut max_step = 0.0f64;
        for i in 0..n {
            let mut denom = Complex::new(1.0, 0.0);
            for j in 0..n {
                if j != i {
                    denom *= zs[i] - zs[j];
                }
            }
            if denom.norm() < 1e-300 {
                continue;
            }
            let step = eval(zs[i]) / denom;
            zs[i] -= step;
            max_step = max_step.max(step.norm());
        }
        if max_step < 1e-14 * radius {
            break;
        }
    }
    zs
}

/// Bessel function of the first kind, order one, via the periodic trapezoid
/// rule on J1(z) = (1/2pi) int_0^{2pi} cos(tau - z sin tau) dtau, which is
/// spectrally accurate.
pub fn bessel_j1(z: f64) -> f64 {
    let n = (96 + (1.4 * z.abs()) as usize).next_multiple_of(8);
    let mut acc = 0.0;
    for k in 0..n {
        let tau = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
        acc += (tau - z * tau.sin()).cos();
    }
    acc / n as f64
}

/// Periodic trapezoid quadrature of `f` over one period `[0, 2pi)`.
pub fn periodic_trapezoid<F: FnMut(f64) -> f64>(mut f: F, n: usize) -> f64 {
    let mut acc = 0.0;
    for k in 0..n {
        acc += f(2.0 * std::f64::consts::PI * k as f64 / n as f64);
    }
    acc * 2.0 * std::f64::consts::PI / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn brent_finds_cubic_root() {
        let r = brent(|x| x * x * x - 2.0, 0.0, 2.0, 1e-14, 100).unwrap();
        assert_relative_eq!(r, 2f64.powf(1.0 / 3.0), max_relative = 1e-12);
    }

    #[test]
    fn scan_roots_finds_all_sign_changes() {
        let roots = scan_roots(|x| (x - 0.3) * (x - 1.7) * (x - 2.2), 0.0, 3.0, 300, 1e-13).unwrap();
        assert_eq!(roots.len(), 3);
        assert_relative_eq!(roots[0], 0.3, epsilon = 1e-10);
        assert_relative_eq!(roots[2], 2.2, epsilon = 1e-10);
    }

    #[test]
    fn spline_reproduces_cubic() {
        let xs: Vec<f64> = (0..60).map(|i| i as f64 * 0.05).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| x * x * x - x).collect();
        let sp = CubicSpline::new(xs, ys).unwrap();
        for &x in &[0.11, 0.77, 1.93, 2.5] {
            assert_relative_eq!(sp.eval(x), x * x * x - x, epsilon = 2e-4);
            assert_relative_eq!(sp.deriv(x), 3.0 * x * x - 1.0, epsilon = 3e-3);
        }
    }

    #[test]
    fn companion_roots_of_factored_quintic() {
        // (x-1)(x-2)(x-3)(x+1)(x+4) expanded, ascending coefficients
        let coeffs = [-24.0, 14.0, 25.0, -15.0, -1.0, 1.0];
        let p = |x: f64| {
            coeffs
                .iter()
                .rev()
                .fold(0.0, |acc, &c| acc * x + c)
        };
        for r in [1.0, 2.0, 3.0, -1.0, -4.0] {
            assert!(p(r).abs() < 1e-9, "not a root: {r} -> {}", p(r));
        }
        let roots = real_polynomial_roots(&coeffs, 1e-8);
        assert_eq!(roots.len(), 5);
        assert_relative_eq!(roots[0], -4.0, epsilon = 1e-8);
        assert_relative_eq!(roots[4], 3.0, epsilon = 1e-8);
    }

    #[test]
    fn bessel_j1_reference_values() {
        // reference values from mpmath besselj(1, x)
        assert_relative_eq!(bessel_j1(0.5), 0.2422684576748739, epsilon = 1e-13);
        assert_relative_eq!(bessel_j1(3.0), 0.3390589585259365, epsilon = 1e-13);
        assert_relative_eq!(bessel_j1(12.0), -0.2234471044906276, epsilon = 1e-13);
        assert_relative_eq!(bessel_j1(30.0), -0.1187510626166229, epsilon = 1e-13);
        assert!(bessel_j1(0.0).abs() < 1e-15);
    }
}
