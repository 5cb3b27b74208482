//! Model and wave parameters, the existence regions, `s*(b)` and the mass
//! threshold `M*(b)`.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::soliton;

/// Relative tolerance for deciding `c == 2 sqrt(omega)`.
pub const BOUNDARY_RTOL: f64 = 1e-12;

/// `gamma = 1 + 16 b / 3`, written so that `b = -3/16` gives exactly zero.
pub fn gamma_of_b(b: f64) -> f64 {
    (3.0 + 16.0 * b) / 3.0
}

/// The quintic coefficient `b` together with the derived `gamma`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub b: f64,
    pub gamma: f64,
}

impl ModelParams {
    pub fn from_b(b: f64) -> Self {
        Self { b, gamma: gamma_of_b(b) }
    }

    pub fn from_gamma(gamma: f64) -> Self {
        Self { b: 3.0 * (gamma - 1.0) / 16.0, gamma }
    }

    /// `s_* = sqrt(-gamma / (1 - gamma))`, the lower bound on `|s|` for
    /// `gamma <= 0`. `None` when `gamma > 0`.
    pub fn velocity_cutoff(&self) -> Option<f64> {
        (self.gamma <= 0.0).then(|| (-self.gamma / (1.0 - self.gamma)).sqrt())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Region {
    ExponentialInterior,
    AlgebraicBoundary,
    Inadmissible,
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Region::ExponentialInterior => "exponential interior",
            Region::AlgebraicBoundary => "algebraic boundary",
            Region::Inadmissible => "inadmissible",
        };
        f.write_str(s)
    }
}

/// Human-readable description of the admissible velocity window.
pub fn admissible_window(omega: f64, params: &ModelParams) -> String {
    let r = 2.0 * omega.sqrt();
    match params.velocity_cutoff() {
        None => format!("gamma > 0 requires -{r} < c <= {r}"),
        Some(cut) => format!("gamma <= 0 requires -{r} < c < {}", -cut * r),
    }
}

pub fn classify(omega: f64, c: f64, params: &ModelParams) -> Result<Region> {
    if !(omega > 0.0) || !omega.is_finite() {
        return invalid(format!("omega must be positive and finite, got {omega}"));
    }
    if !c.is_finite() || !params.gamma.is_finite() {
        return invalid("c and gamma must be finite");
    }
    let r = 2.0 * omega.sqrt();
    let region = match params.velocity_cutoff() {
        None => {
            if (c - r).abs() <= BOUNDARY_RTOL * r.max(1.0) {
                Region::AlgebraicBoundary
            } else if -r < c && c < r {
                Region::ExponentialInterior
            } else {
                Region::Inadmissible
            }
        }
        Some(cut) => {
            if -r < c && c < -cut * r {
                Region::ExponentialInterior
            } else {
                Region::Inadmissible
            }
        }
    };
    Ok(region)
}

/// An admissible `(omega, c)` pair with `s = c / (2 sqrt(omega))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaveParams {
    pub omega: f64,
    pub c: f64,
    pub s: f64,
    pub region: Region,
}

impl WaveParams {
    pub fn new(omega: f64, c: f64, params: &ModelParams) -> Result<Self> {
        let region = classify(omega, c, params)?;
        if region == Region::Inadmissible {
            return Err(Error::Inadmissible {
                omega,
                c,
                gamma: params.gamma,
                region: admissible_window(omega, params),
            });
        }
        let mut c = c;
        if region == Region::AlgebraicBoundary {
            c = 2.0 * omega.sqrt();
        }
        Ok(Self { omega, c, s: c / (2.0 * omega.sqrt()), region })
    }

    pub fn is_algebraic(&self) -> bool {
        self.region == Region::AlgebraicBoundary
    }
}

/// The unique `s* in (0,1)` where the momentum of `phi_{1,2s}` changes sign
/// (only exists for `b > 0`).
pub fn s_star(b: f64) -> Result<f64> {
    if !(b > 0.0) {
        return invalid(format!("s* exists only for b > 0, got b={b}"));
    }
    let params = ModelParams::from_b(b);
    let p = |s: f64| soliton::momentum_closed(1.0, 2.0 * s, &params);
    let (mut lo, mut hi) = (1e-6, 1.0 - 1e-6);
    let (plo, phi) = (p(lo)?, p(hi)?);
    if !(plo > 0.0 && phi < 0.0) {
        return Err(Error::NonConvergence { iterations: 0, residual: plo.min(phi.abs()) });
    }
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..200 {
        mid = 0.5 * (lo + hi);
        let pm = p(mid)?;
        if pm.abs() < 1e-12 || hi - lo < f64::EPSILON {
            break;
        }
        if pm > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(mid)
}

/// `M*(b)`: the mass below which solutions are global and bounded.
pub fn mass_threshold(b: f64) -> Result<f64> {
    let params = ModelParams::from_b(b);
    if !(params.gamma > 0.0) {
        return invalid(format!("mass threshold needs b > -3/16, got b={b}"));
    }
    if b > 0.0 {
        let s = s_star(b)?;
        soliton::mass_closed(1.0, 2.0 * s, &params)
    } else {
        Ok(4.0 * PI / params.gamma.powf(1.5))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_examples() {
        assert_eq!(gamma_of_b(0.0), 1.0);
        assert_eq!(gamma_of_b(-3.0 / 16.0), 0.0);
        assert!((gamma_of_b(-0.15) - 0.2).abs() < 1e-15);
        let p = ModelParams::from_gamma(-0.5);
        assert!((gamma_of_b(p.b) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn classify_examples() {
        let g = |gamma| ModelParams::from_gamma(gamma);
        assert_eq!(classify(1.0, 2.0, &g(0.5)).unwrap(), Region::AlgebraicBoundary);
        assert_eq!(classify(1.0, 2.0, &g(-1.0)).unwrap(), Region::Inadmissible);
        assert_eq!(classify(4.0, -2.0, &g(1.0)).unwrap(), Region::ExponentialInterior);
        assert_eq!(WaveParams::new(4.0, -2.0, &g(1.0)).unwrap().s, -0.5);
        assert!(classify(0.0, 0.0, &g(1.0)).is_err());
        assert!(classify(-1.0, 0.0, &g(1.0)).is_err());
        // gamma = 0: s_* = 0, so every negative velocity above -2 sqrt(omega) is fine
        assert_eq!(classify(1.0, -1.0, &g(0.0)).unwrap(), Region::ExponentialInterior);
        assert_eq!(classify(1.0, 0.0, &g(0.0)).unwrap(), Region::Inadmissible);
    }

    #[test]
    fn boundary_tolerance() {
        let p = ModelParams::from_b(0.0);
        let c = 2.0 * 3f64.sqrt();
        assert_eq!(classify(3.0, c * (1.0 + 1e-14), &p).unwrap(), Region::AlgebraicBoundary);
        assert_eq!(classify(3.0, c * (1.0 + 1e-9), &p).unwrap(), Region::Inadmissible);
        assert_eq!(classify(3.0, c * (1.0 - 1e-9), &p).unwrap(), Region::ExponentialInterior);
    }

    #[test]
    fn s_star_sign_pattern() {
        let s = s_star(0.5).unwrap();
        let p = ModelParams::from_b(0.5);
        let mom = |s: f64| soliton::momentum_closed(1.0, 2.0 * s, &p).unwrap();
        assert!(mom(s).abs() < 1e-12);
        assert!(mom(s - 0.1) > 0.0);
        assert!(mom(s + 0.1) < 0.0);
        assert!(s_star(-0.1).is_err());
        assert!(s_star(0.0).is_err());
    }

    #[test]
    fn threshold_examples() {
        assert!((mass_threshold(0.0).unwrap() - 4.0 * PI).abs() < 1e-12);
        let m = mass_threshold(-0.15).unwrap();
        assert!((m - 4.0 * PI / 0.2f64.powf(1.5)).abs() < 1e-9 * m);
        let b = 0.5;
        let expect =
            soliton::mass_closed(1.0, 2.0 * s_star(b).unwrap(), &ModelParams::from_b(b)).unwrap();
        assert_eq!(mass_threshold(b).unwrap(), expect);
        assert!(mass_threshold(-0.2).is_err());
    }
}
