//! The forced oscillator, its odd damping laws and the nondimensionalization
//! that maps physical parameters onto the two dimensionless damping
//! coefficients `c1` and `c3` (the quintic coefficient is normalized to 1).

use crate::error::{Error, Result};
use crate::numeric::{bessel_j1, CubicSpline};
use serde::{Deserialize, Serialize};

/// Parameters of the physical oscillator
/// `m y'' + k y + ct1 y' + ct3 y'^3 + ct5 y'^5 = 2 ft cos(wt t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub m: f64,
    pub k: f64,
    pub ct1: f64,
    pub ct3: f64,
    pub ct5: f64,
    /// forcing half-amplitude (the right-hand side is `2 ft cos`)
    pub ft: f64,
    /// forcing angular frequency
    pub wt: f64,
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            (self.m, "m"),
            (self.k, "k"),
            (self.ct1, "ct1"),
            (self.ct5, "ct5"),
            (self.wt, "wt"),
        ];
        for (v, name) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be > 0, got {v}")));
            }
        }
        if !(self.ft >= 0.0) || !self.ft.is_finite() {
            return Err(Error::InvalidParameter(format!("ft must be >= 0, got {}", self.ft)));
        }
        if !self.ct3.is_finite() {
            return Err(Error::InvalidParameter("ct3 must be finite".into()));
        }
        Ok(())
    }
}

/// Dimensionless damping parameters of
/// `x'' + x + c1 x' + c3 x'^3 + x'^5 = 2 f cos(omega t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub c1: f64,
    pub c3: f64,
}

impl Params {
    pub fn new(c1: f64, c3: f64) -> Result<Self> {
        if !(c1 > 0.0) || !c1.is_finite() {
            return Err(Error::InvalidParameter(format!("c1 must be > 0, got {c1}")));
        }
        if !c3.is_finite() {
            return Err(Error::InvalidParameter("c3 must be finite".into()));
        }
        Ok(Self { c1, c3 })
    }
}

/// Multipliers taking physical quantities to dimensionless ones:
/// `t = time * t_phys`, `x = displacement * y`, `f = forcing * ft`,
/// `omega = frequency * wt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scales {
    pub time: f64,
    pub displacement: f64,
    pub forcing: f64,
    pub frequency: f64,
}

impl Scales {
    /// Multiplier taking physical velocity `dy/dt_phys` to dimensionless `dx/dt`.
    pub fn velocity(&self) -> f64 {
        self.displacement / self.time
    }
}

/// Maps the physical system onto the dimensionless one (quintic coefficient 1)
/// and returns the scale factors of the transformation.
pub fn nondimensionalize(p: &PhysicalParams) -> Result<(Params, Scales)> {
    p.validate()?;
    let (m, k, ct5) = (p.m, p.k, p.ct5);
    let c1 = p.ct1 / (k * m).sqrt();
    let c3 = p.ct3 * k.powf(-0.25) * m.powf(-0.25) / ct5.sqrt();
    let scales = Scales {
        time: (k / m).sqrt(),
        displacement: ct5.powf(0.25) * k.powf(0.375) * m.powf(-0.625),
        forcing: ct5.powf(0.25) * k.powf(-0.625) * m.powf(-0.625),
        frequency: (m / k).sqrt(),
    };
    Ok((Params::new(c1, c3)?, scales))
}

/// Odd velocity-force damping law with an evaluatable derivative.
#[derive(Debug, Clone)]
pub enum DampingLaw {
    /// `c1 v + c3 v^3 + v^5`
    QuinticPoly { c1: f64, c3: f64 },
    /// `c1 sin(v) + c3 v^3`
    SineCubic { c1: f64, c3: f64 },
    /// Samples for v >= 0, mirrored by oddness; cubic-spline interpolation.
    TabulatedOdd(OddTable),
}

impl DampingLaw {
    pub fn quintic(params: Params) -> Self {
        Self::QuinticPoly { c1: params.c1, c3: params.c3 }
    }

    pub fn sine_cubic(c1: f64, c3: f64) -> Result<Self> {
        Params::new(c1, c3)?;
        Ok(Self::SineCubic { c1, c3 })
    }

    /// Damping force at velocity `v`.
    pub fn force(&self, v: f64) -> f64 {
        match self {
            Self::QuinticPoly { c1, c3 } => v * (c1 + v * v * (c3 + v * v)),
            Self::SineCubic { c1, c3 } => c1 * v.sin() + c3 * v * v * v,
            Self::TabulatedOdd(t) => t.force(v),
        }
    }

    /// Derivative of the damping force with respect to velocity.
    pub fn dforce(&self, v: f64) -> f64 {
        match self {
            Self::QuinticPoly { c1, c3 } => c1 + v * v * (3.0 * c3 + 5.0 * v * v),
            Self::SineCubic { c1, c3 } => c1 * v.cos() + 3.0 * c3 * v * v,
            Self::TabulatedOdd(t) => t.dforce(v),
        }
    }

    /// Single-harmonic averaged damping (describing amplitude) at velocity
    /// amplitude `v_amp`: the closed form when one exists, quadrature otherwise.
    pub fn averaged_force(&self, v_amp: f64) -> f64 {
        if v_amp == 0.0 {
            return 0.0;
        }
        match self {
            Self::QuinticPoly { c1, c3 } => {
                v_amp * (c1 + v_amp * v_amp * (0.75 * c3 + 0.625 * v_amp * v_amp))
            }
            Self::SineCubic { c1, c3 } => {
                2.0 * c1 * bessel_j1(v_amp) + 0.75 * c3 * v_amp.powi(3)
            }
            Self::TabulatedOdd(_) => crate::energybalance::averaged_damping_quadrature(self, v_amp),
        }
    }

    /// Derivative of `averaged_force` with respect to the amplitude.
    pub fn averaged_force_deriv(&self, v_amp: f64) -> f64 {
        match self {
            Self::QuinticPoly { c1, c3 } => {
                c1 + v_amp * v_amp * (2.25 * c3 + 3.125 * v_amp * v_amp)
            }
            Self::SineCubic { c1, c3 } => {
                // J1'(z) = J0(z) - J1(z)/z, with the z -> 0 limit 1/2
                let dj1 = if v_amp.abs() < 1e-8 {
                    0.5
                } else {
                    bessel_j0(v_amp) - bessel_j1(v_amp) / v_amp
                };
                2.0 * c1 * dj1 + 2.25 * c3 * v_amp * v_amp
            }
            Self::TabulatedOdd(_) => {
                let h = 1e-6 * v_amp.abs().max(1.0);
                (self.averaged_force(v_amp + h) - self.averaged_force(v_amp - h)) / (2.0 * h)
            }
        }
    }
}

fn bessel_j0(z: f64) -> f64 {
    let n = (96 + (1.4 * z.abs()) as usize).next_multiple_of(8);
    let mut acc = 0.0;
    for k in 0..n {
        let tau = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
        acc += (z * tau.sin()).cos();
    }
    acc / n as f64
}

/// Odd tabulated damping law: samples stored for v >= 0 only.
#[derive(Debug, Clone)]
pub struct OddTable {
    spline: CubicSpline,
    v_max: f64,
}

impl OddTable {
    /// Builds the table from (v, force) samples with v >= 0. A (0, 0) sample
    /// is prepended when missing, which oddness requires.
    pub fn new(mut samples: Vec<(f64, f64)>) -> Result<Self> {
        samples.retain(|s| s.0 >= 0.0);
        samples.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite sample"));
        samples.dedup_by(|a, b| a.0 == b.0);
        if samples.first().map(|s| s.0 != 0.0).unwrap_or(true) {
            samples.insert(0, (0.0, 0.0));
        } else if samples[0].1 != 0.0 {
            return Err(Error::InvalidInput(
                "odd damping law requires force(0) = 0".into(),
            ));
        }
        if samples.len() < 3 {
            return Err(Error::InvalidInput(
                "tabulated law needs at least three samples for v >= 0".into(),
            ));
        }
        let v_max = samples.last().expect("nonempty").0;
        let (xs, ys) = samples.into_iter().unzip();
        Ok(Self {
            spline: CubicSpline::new(xs, ys)?,
            v_max,
        })
    }

    pub fn force(&self, v: f64) -> f64 {
        v.signum() * self.spline.eval(v.abs())
    }

    pub fn dforce(&self, v: f64) -> f64 {
        // even function of v by oddness of the force
        self.spline.deriv(v.abs())
    }

    pub fn v_max(&self) -> f64 {
        self.v_max
    }
}

/// Velocity interval on which the quintic damping force is negative, when one
/// exists (requires `c3 < -2 sqrt(c1)`). The degenerate tangency case reports
/// no interval.
pub fn damping_negative_interval(params: Params) -> Option<(f64, f64)> {
    let Params { c1, c3 } = params;
    let disc = c3 * c3 - 4.0 * c1;
    if c3 >= 0.0 || disc <= 0.0 {
        return None;
    }
    let s = disc.sqrt();
    Some((((-c3 - s) / 2.0).sqrt(), ((-c3 + s) / 2.0).sqrt()))
}

/// Key-value config block describing a damping law.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LawConfig {
    /// "quintic" | "sine_cubic" | "table"
    pub law: String,
    #[serde(default)]
    pub c1: Option<f64>,
    #[serde(default)]
    pub c3: Option<f64>,
    /// two-column CSV (v, force), required for `law = "table"`
    #[serde(default)]
    pub table_path: Option<String>,
}

impl LawConfig {
    pub fn quintic(c1: f64, c3: f64) -> Self {
        Self { law: "quintic".into(), c1: Some(c1), c3: Some(c3), table_path: None }
    }

    pub fn build(&self) -> Result<DampingLaw> {
        let need = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| Error::InvalidParameter(format!("law config misses `{name}`")))
        };
        match self.law.as_str() {
            "quintic" => Ok(DampingLaw::quintic(Params::new(
                need(self.c1, "c1")?,
                need(self.c3, "c3")?,
            )?)),
            "sine_cubic" => DampingLaw::sine_cubic(need(self.c1, "c1")?, need(self.c3, "c3")?),
            "table" => {
                let path = self.table_path.as_ref().ok_or_else(|| {
                    Error::InvalidParameter("law = \"table\" requires `table_path`".into())
                })?;
                let text = std::fs::read_to_string(path)?;
                let mut samples = Vec::new();
                for (lineno, line) in text.lines().enumerate() {
                    let line = line.trim();
                    if line.is_empty() || line.starts_with('#') {
                        continue;
                    }
                    let mut cols = line.split(',').map(str::trim);
                    let parse = |s: Option<&str>| -> Result<f64> {
                        s.and_then(|v| v.parse().ok()).ok_or_else(|| {
                            Error::InvalidInput(format!(
                                "{path}:{}: expected two numeric columns",
                                lineno + 1
                            ))
                        })
                    };
                    // tolerate a non-numeric header row
                    let c0 = cols.next();
                    if lineno == 0 && c0.map(|s| s.parse::<f64>().is_err()).unwrap_or(false) {
                        continue;
                    }
                    samples.push((parse(c0)?, parse(cols.next())?));
                }
                Ok(DampingLaw::TabulatedOdd(OddTable::new(samples)?))
            }
            other => Err(Error::InvalidParameter(format!("unknown law \"{other}\""))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn nondim_identity_case() {
        let p = PhysicalParams { m: 1.0, k: 1.0, ct1: 1.0, ct3: 0.0, ct5: 1.0, ft: 0.1, wt: 1.0 };
        let (params, scales) = nondimensionalize(&p).unwrap();
        assert_relative_eq!(params.c1, 1.0);
        assert_relative_eq!(params.c3, 0.0);
        assert_relative_eq!(scales.time, 1.0);
        assert_relative_eq!(scales.displacement, 1.0);
        assert_relative_eq!(scales.forcing, 1.0);
        assert_relative_eq!(scales.frequency, 1.0);
    }

    #[test]
    fn nondim_direct_substitution() {
        let p = PhysicalParams { m: 1.0, k: 1.0, ct1: 0.1, ct3: -0.6, ct5: 1.0, ft: 0.01, wt: 1.0 };
        let (params, _) = nondimensionalize(&p).unwrap();
        assert_relative_eq!(params.c1, 0.1, max_relative = 1e-15);
        assert_relative_eq!(params.c3, -0.6, max_relative = 1e-15);
    }

    #[test]
    fn nondim_c1_hand_value() {
        let p = PhysicalParams { m: 4.0, k: 9.0, ct1: 0.6, ct3: 0.0, ct5: 1.0, ft: 0.0, wt: 1.0 };
        let (params, _) = nondimensionalize(&p).unwrap();
        // ct1 / sqrt(km) = 0.6 / 6
        assert_relative_eq!(params.c1, 0.1, max_relative = 1e-15);
    }

    #[test]
    fn nondim_rejects_nonpositive() {
        for bad in [
            PhysicalParams { m: 0.0, k: 1.0, ct1: 1.0, ct3: 0.0, ct5: 1.0, ft: 0.0, wt: 1.0 },
            PhysicalParams { m: 1.0, k: -1.0, ct1: 1.0, ct3: 0.0, ct5: 1.0, ft: 0.0, wt: 1.0 },
            PhysicalParams { m: 1.0, k: 1.0, ct1: 0.0, ct3: 0.0, ct5: 1.0, ft: 0.0, wt: 1.0 },
            PhysicalParams { m: 1.0, k: 1.0, ct1: 1.0, ct3: 0.0, ct5: 0.0, ft: 0.0, wt: 1.0 },
        ] {
            assert!(nondimensionalize(&bad).is_err());
        }
    }

    #[test]
    fn damping_force_examples() {
        let law = DampingLaw::quintic(Params::new(0.1, -0.8).unwrap());
        assert_eq!(law.force(0.0), 0.0);
        // Zero of the damping force at the lower edge of the negative interval.
        assert!(law.force(0.3937651910995723).abs() < 1e-12);
        assert_relative_eq!(law.force(1.0), 0.3, max_relative = 1e-15);
    }

    #[test]
    fn negative_interval_cases() {
        let (lo, hi) = damping_negative_interval(Params::new(0.1, -0.8).unwrap()).unwrap();
        assert_relative_eq!(lo, 0.393765191099572, max_relative = 1e-12);
        assert_relative_eq!(hi, 0.803087152355408, max_relative = 1e-12);
        assert!(damping_negative_interval(Params::new(0.1, -0.6).unwrap()).is_none());
        // degenerate tangency: discriminant exactly zero
        let c1: f64 = 0.1;
        let c3 = -2.0 * c1.sqrt();
        assert!(damping_negative_interval(Params::new(c1, c3).unwrap()).is_none());
    }

    #[test]
    fn tabulated_law_mirrors_oddly() {
        let quintic = DampingLaw::quintic(Params::new(0.1, -0.8).unwrap());
        let samples: Vec<(f64, f64)> =
            (0..=400).map(|i| i as f64 * 0.005).map(|v| (v, quintic.force(v))).collect();
        let table = DampingLaw::TabulatedOdd(OddTable::new(samples).unwrap());
        for v in [-1.7, -0.4, 0.13, 0.9, 1.99] {
            assert_relative_eq!(table.force(v), quintic.force(v), epsilon = 1e-6);
            assert_relative_eq!(table.force(-v), -table.force(v), epsilon = 1e-15);
            assert_relative_eq!(table.dforce(v), quintic.dforce(v), max_relative = 1e-3, epsilon = 1e-3);
        }
    }

    #[test]
    fn sine_cubic_force_and_derivative() {
        let law = DampingLaw::sine_cubic(0.1, 1e-5).unwrap();
        assert_relative_eq!(law.force(0.7), 0.1 * 0.7f64.sin() + 1e-5 * 0.343, max_relative = 1e-15);
        let h = 1e-6;
        let fd = (law.force(0.7 + h) - law.force(0.7 - h)) / (2.0 * h);
        assert_relative_eq!(law.dforce(0.7), fd, max_relative = 1e-8);
    }
}
