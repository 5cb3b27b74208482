//! Conserved quantities, actions, the Nehari functional, gauge maps and
//! potential-well membership, evaluated on grid fields.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::params::ModelParams;
use crate::soliton;
use crate::spectral::{Field, C64};

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Quadratures shared by all functionals, computed in one pass.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Moments {
    /// `||v_x||^2`
    pub grad2: f64,
    /// `||v||^2`
    pub mass: f64,
    /// `(i v_x, v)`
    pub cross: f64,
    /// `(i |v|^2 v_x, v)`
    pub cubic: f64,
    /// `||v||_4^4`
    pub l4: f64,
    /// `||v||_6^6`
    pub l6: f64,
}

impl Moments {
    pub fn of(v: &Field) -> Moments {
        let d = v.derivative(1);
        let dx = v.grid().dx();
        let mut m = Moments { grad2: 0.0, mass: 0.0, cross: 0.0, cubic: 0.0, l4: 0.0, l6: 0.0 };
        for (w, wx) in v.samples().iter().zip(d.samples()) {
            let r = w.norm_sqr();
            let c = (I * wx * w.conj()).re;
            m.grad2 += wx.norm_sqr();
            m.mass += r;
            m.cross += c;
            m.cubic += r * c;
            m.l4 += r * r;
            m.l6 += r * r * r;
        }
        m.grad2 *= dx;
        m.mass *= dx;
        m.cross *= dx;
        m.cubic *= dx;
        m.l4 *= dx;
        m.l6 *= dx;
        m
    }

    /// `E = ||u_x||^2/2 - (i|u|^2 u_x, u)/4 - b ||u||_6^6 / 6`
    pub fn energy_u(&self, b: f64) -> f64 {
        0.5 * self.grad2 - 0.25 * self.cubic - b / 6.0 * self.l6
    }

    /// `calE = ||v_x||^2/2 - gamma ||v||_6^6 / 32`
    pub fn energy_v(&self, gamma: f64) -> f64 {
        0.5 * self.grad2 - gamma / 32.0 * self.l6
    }

    /// `calP = (i v_x, v) + ||v||_4^4 / 4`
    pub fn momentum_v(&self) -> f64 {
        self.cross + 0.25 * self.l4
    }

    pub fn action_v(&self, omega: f64, c: f64, gamma: f64) -> f64 {
        self.energy_v(gamma) + 0.5 * omega * self.mass + 0.5 * c * self.momentum_v()
    }

    pub fn nehari(&self, omega: f64, c: f64, gamma: f64) -> f64 {
        self.grad2 + omega * self.mass + c * self.cross + 0.5 * c * self.l4
            - 3.0 * gamma / 16.0 * self.l6
    }

    pub fn jc(&self, c: f64, gamma: f64) -> f64 {
        -c / 8.0 * self.l4 + gamma / 16.0 * self.l6
    }
}

/// Conserved quantities of one field, plus optional action-type values for a
/// chosen `(omega, c)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantRecord {
    pub energy: f64,
    pub mass: f64,
    pub momentum: f64,
    pub action: Option<f64>,
    pub nehari: Option<f64>,
    pub jc: Option<f64>,
}

impl InvariantRecord {
    /// Adds `calS`, `calK` and `calJ_c` (meaningful for fields of the
    /// gauge-transformed equation).
    pub fn with_wave(mut self, m: &Moments, omega: f64, c: f64, params: &ModelParams) -> Self {
        self.action = Some(m.action_v(omega, c, params.gamma));
        self.nehari = Some(m.nehari(omega, c, params.gamma));
        self.jc = Some(m.jc(c, params.gamma));
        self
    }
}

/// `E, M, P` of the original equation.
pub fn invariants_u(u: &Field, b: f64) -> Result<InvariantRecord> {
    u.check_decay()?;
    let m = Moments::of(u);
    Ok(InvariantRecord {
        energy: m.energy_u(b),
        mass: m.mass,
        momentum: m.cross,
        action: None,
        nehari: None,
        jc: None,
    })
}

/// `calE, calM, calP` of the gauge-transformed equation.
pub fn invariants_v(v: &Field, params: &ModelParams) -> Result<InvariantRecord> {
    v.check_decay()?;
    let m = Moments::of(v);
    Ok(InvariantRecord {
        energy: m.energy_v(params.gamma),
        mass: m.mass,
        momentum: m.momentum_v(),
        action: None,
        nehari: None,
        jc: None,
    })
}

fn gauge_phase(u: &Field, sign: f64) -> Result<Field> {
    u.check_decay()?;
    let grid = u.grid();
    let l = grid.half_length();
    let density = u.map(|z| C64::new(z.norm_sqr(), 0.0)).with_carrier(0.0);
    let cum = density.antiderivative_from_left();
    let window_mass = u.lp_pow(2);
    // move the net winding into the carrier so the samples stay periodic
    let dq = sign * window_mass / (8.0 * l);
    let data = u
        .samples()
        .iter()
        .zip(cum.samples())
        .zip(grid.nodes())
        .map(|((w, m), &x)| w * C64::from_polar(1.0, sign * 0.25 * m.re - dq * x))
        .collect();
    Ok(Field::new(grid.clone(), data).with_carrier(u.carrier() + dq).with_decay(u.decay()))
}

/// `G(u) = u exp((i/4) int_{-inf}^x |u|^2)`, integral from the left edge.
pub fn gauge_g(u: &Field) -> Result<Field> {
    gauge_phase(u, 1.0)
}

pub fn gauge_g_inverse(v: &Field) -> Result<Field> {
    gauge_phase(v, -1.0)
}

/// `S = E + (omega/2) M + (c/2) P`
pub fn action_s(u: &Field, omega: f64, c: f64, b: f64) -> Result<f64> {
    let r = invariants_u(u, b)?;
    Ok(r.energy + 0.5 * omega * r.mass + 0.5 * c * r.momentum)
}

/// `calS = calE + (omega/2) calM + (c/2) calP`
pub fn action_scal(v: &Field, omega: f64, c: f64, params: &ModelParams) -> Result<f64> {
    v.check_decay()?;
    Ok(Moments::of(v).action_v(omega, c, params.gamma))
}

pub fn nehari_k(v: &Field, omega: f64, c: f64, params: &ModelParams) -> Result<f64> {
    v.check_decay()?;
    Ok(Moments::of(v).nehari(omega, c, params.gamma))
}

/// The quadratic part of `calK` in the form
/// `||d_x(e^{-icx/2} v)||^2 + (omega - c^2/4) ||v||^2`.
pub fn nehari_quadratic(v: &Field, omega: f64, c: f64) -> f64 {
    let w = v.clone().with_carrier(v.carrier() - 0.5 * c);
    let d = w.derivative(1);
    d.lp_pow(2) + (omega - 0.25 * c * c) * v.lp_pow(2)
}

/// `calK` assembled from [`nehari_quadratic`].
pub fn nehari_k_xform(v: &Field, omega: f64, c: f64, params: &ModelParams) -> Result<f64> {
    v.check_decay()?;
    Ok(nehari_quadratic(v, omega, c) + 0.5 * c * v.lp_pow(4)
        - 3.0 * params.gamma / 16.0 * v.lp_pow(6))
}

/// `calJ_c = -(c/8) ||v||_4^4 + (gamma/16) ||v||_6^6`
pub fn jc(v: &Field, c: f64, params: &ModelParams) -> Result<f64> {
    v.check_decay()?;
    Ok(-c / 8.0 * v.lp_pow(4) + params.gamma / 16.0 * v.lp_pow(6))
}

/// `calE_c = ||psi'||^2/2 + (c/8) ||psi||_4^4 - (gamma/32) ||psi||_6^6`
pub fn ec(psi: &Field, c: f64, params: &ModelParams) -> Result<f64> {
    psi.check_decay()?;
    let m = Moments::of(psi);
    Ok(0.5 * m.grad2 + c / 8.0 * m.l4 - params.gamma / 32.0 * m.l6)
}

/// `||e^{-icx/2} phi||` in `H^1-dot` plus `L^4`.
pub fn x_norm(phi: &Field, c: f64) -> f64 {
    let w = phi.clone().with_carrier(phi.carrier() - 0.5 * c);
    w.derivative(1).lp_pow(2).sqrt() + w.lp_norm(4)
}

/// Gradient of `calS_{omega,c}`:
/// `-v'' + omega v + i c v' + (c/2)|v|^2 v - (3 gamma/16)|v|^4 v`.
pub fn action_gradient(v: &Field, omega: f64, c: f64, params: &ModelParams) -> Field {
    let d1 = v.derivative(1);
    let d2 = v.derivative(2);
    let g3 = 3.0 * params.gamma / 16.0;
    let data = v
        .samples()
        .iter()
        .zip(d1.samples())
        .zip(d2.samples())
        .map(|((&w, &w1), &w2)| {
            let r = w.norm_sqr();
            -w2 + omega * w + I * c * w1 + (0.5 * c * r - g3 * r * r) * w
        })
        .collect();
    Field::new(v.grid().clone(), data).with_carrier(v.carrier()).with_decay(v.decay())
}

/// Gradient of `calE_c`: `-psi'' + (c/2)|psi|^2 psi - (3 gamma/16)|psi|^4 psi`.
pub fn ec_gradient(psi: &Field, c: f64, params: &ModelParams) -> Field {
    let d2 = psi.derivative(2);
    let g3 = 3.0 * params.gamma / 16.0;
    let data = psi
        .samples()
        .iter()
        .zip(d2.samples())
        .map(|(&w, &w2)| {
            let r = w.norm_sqr();
            -w2 + (0.5 * c * r - g3 * r * r) * w
        })
        .collect();
    Field::new(psi.grid().clone(), data).with_carrier(psi.carrier()).with_decay(psi.decay())
}

/// The three forms of the profile equation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProfileEquation {
    /// `-phi'' + omega phi + i c phi' - i |phi|^2 phi' - b |phi|^4 phi = 0`
    Dnls,
    /// `-Phi'' + (omega - c^2/4) Phi + (c/2) Phi^3 - (3 gamma/16) Phi^5 = 0`
    Real,
    /// `-phi'' + omega phi + i c phi' + (c/2)|phi|^2 phi - (3 gamma/16)|phi|^4 phi = 0`
    Modified,
}

/// Sup-norm of the discretized left-hand side.
pub fn elliptic_residual(
    f: &Field,
    omega: f64,
    c: f64,
    params: &ModelParams,
    which: ProfileEquation,
) -> Result<f64> {
    f.check_decay()?;
    let res = match which {
        ProfileEquation::Modified => action_gradient(f, omega, c, params),
        ProfileEquation::Real => {
            let g = ec_gradient(f, c, params);
            g.axpy(C64::new(omega - 0.25 * c * c, 0.0), f)
        }
        ProfileEquation::Dnls => {
            let d1 = f.derivative(1);
            let d2 = f.derivative(2);
            let data = f
                .samples()
                .iter()
                .zip(d1.samples())
                .zip(d2.samples())
                .map(|((&w, &w1), &w2)| {
                    let r = w.norm_sqr();
                    -w2 + omega * w + I * c * w1 - I * r * w1 - params.b * r * r * w
                })
                .collect();
            Field::new(f.grid().clone(), data)
        }
    };
    Ok(res.sup_norm())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum WellTag {
    APlusBPlus,
    AMinusBMinus,
    APlusBMinus,
    AMinusBPlus,
    /// `calS < d` but a sign is too close to zero to call
    Undetermined,
    /// `calS >= d`
    Outside,
}

/// Position of a field relative to the potential wells
/// `A+- = {S < d, +-K > 0}` and `B+- = {S < d, +-(d - J) > 0}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WellMembership {
    pub action_margin: f64,
    pub nehari: f64,
    pub jc_margin: f64,
    pub a: Option<Sign>,
    pub b: Option<Sign>,
    pub tag: WellTag,
}

impl WellMembership {
    pub fn in_a(&self, s: Sign) -> bool {
        self.a == Some(s)
    }
    pub fn in_b(&self, s: Sign) -> bool {
        self.b == Some(s)
    }
}

/// Classifies `v` against `d(omega, c)`; margins within `tol` of zero are
/// treated as undecided.
pub fn well_membership_tol(
    v: &Field,
    omega: f64,
    c: f64,
    params: &ModelParams,
    tol: f64,
) -> Result<WellMembership> {
    v.check_decay()?;
    let d = soliton::action_d(omega, c, params)?;
    let m = Moments::of(v);
    let action_margin = m.action_v(omega, c, params.gamma) - d;
    let nehari = m.nehari(omega, c, params.gamma);
    let jc_margin = m.jc(c, params.gamma) - d;
    let inside = action_margin < -tol;
    let a = match () {
        _ if !inside => None,
        _ if nehari > tol => Some(Sign::Plus),
        _ if nehari < -tol => Some(Sign::Minus),
        _ => None,
    };
    let b = match () {
        _ if !inside => None,
        _ if jc_margin < -tol => Some(Sign::Plus),
        _ if jc_margin > tol => Some(Sign::Minus),
        _ => None,
    };
    let tag = match (inside, a, b) {
        (false, _, _) => WellTag::Outside,
        (true, Some(Sign::Plus), Some(Sign::Plus)) => WellTag::APlusBPlus,
        (true, Some(Sign::Minus), Some(Sign::Minus)) => WellTag::AMinusBMinus,
        (true, Some(Sign::Plus), Some(Sign::Minus)) => WellTag::APlusBMinus,
        (true, Some(Sign::Minus), Some(Sign::Plus)) => WellTag::AMinusBPlus,
        _ => WellTag::Undetermined,
    };
    Ok(WellMembership { action_margin, nehari, jc_margin, a, b, tag })
}

/// [`well_membership_tol`] with `tol = 1e-9 max(1, |d|)`.
pub fn well_membership(v: &Field, omega: f64, c: f64, params: &ModelParams) -> Result<WellMembership> {
    let d = soliton::action_d(omega, c, params)?;
    well_membership_tol(v, omega, c, params, 1e-9 * d.abs().max(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::soliton::SolitonProfile;
    use crate::spectral::SpectralGrid;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn zero_field() {
        let grid = SpectralGrid::new(20.0, 256).unwrap();
        let z = Field::zeros(grid);
        let p = ModelParams::from_b(0.0);
        let r = invariants_u(&z, 0.0).unwrap();
        assert_eq!((r.energy, r.mass, r.momentum), (0.0, 0.0, 0.0));
        let r = invariants_v(&z, &p).unwrap();
        assert_eq!((r.energy, r.mass, r.momentum), (0.0, 0.0, 0.0));
        assert_eq!(gauge_g(&z).unwrap().sup_norm(), 0.0);
        assert_eq!(action_s(&z, 1.0, 0.0, 0.0).unwrap(), 0.0);
        assert_eq!(jc(&z, 1.0, &p).unwrap(), 0.0);
        assert_eq!(elliptic_residual(&z, 1.0, 0.0, &p, ProfileEquation::Real).unwrap(), 0.0);
    }

    #[test]
    fn soliton_values() {
        let grid = SpectralGrid::exponential_default();
        let p = ModelParams::from_b(0.0);
        let prof = SolitonProfile::new(1.0, 1.0, &p).unwrap();
        let v = prof.sample_varphi(&grid);
        let r = invariants_v(&v, &p).unwrap();
        assert!(rel(r.momentum, 2.0 * 3f64.sqrt()) < 1e-8);
        assert!(rel(r.energy, -(3f64.sqrt()) / 2.0) < 1e-8);
        let k = nehari_k(&v, 1.0, 1.0, &p).unwrap();
        assert!(k.abs() < 1e-7 * v.hm_norm(1).powi(2));
        assert!(nehari_k(&v.scale(0.5), 1.0, 1.0, &p).unwrap() > 0.0);
        assert!(nehari_k(&v.scale(2.0), 1.0, 1.0, &p).unwrap() < 0.0);
        let d = soliton::action_d(1.0, 1.0, &p).unwrap();
        assert!(rel(jc(&v, 1.0, &p).unwrap(), d) < 1e-7);
    }

    #[test]
    fn well_examples() {
        let grid = SpectralGrid::exponential_default();
        let p = ModelParams::from_b(-0.1);
        let prof = SolitonProfile::new(1.0, 0.5, &p).unwrap();
        let v = prof.sample_varphi(&grid);
        assert_eq!(well_membership(&v.scale(0.99), 1.0, 0.5, &p).unwrap().tag, WellTag::APlusBPlus);
        assert_eq!(well_membership(&v.scale(1.01), 1.0, 0.5, &p).unwrap().tag, WellTag::AMinusBMinus);
        assert_eq!(well_membership(&v, 1.0, 0.5, &p).unwrap().tag, WellTag::Outside);
    }

    #[test]
    fn residual_of_closed_form() {
        let grid = SpectralGrid::exponential_default();
        let p = ModelParams::from_b(0.0);
        let prof = SolitonProfile::new(1.0, 0.0, &p).unwrap();
        let r = elliptic_residual(&prof.sample_real(&grid), 1.0, 0.0, &p, ProfileEquation::Real).unwrap();
        assert!(r < 1e-8, "{r}");
    }
}
