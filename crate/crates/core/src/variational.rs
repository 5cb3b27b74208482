//! Nehari-manifold minimization of `calS_{omega,c}` and mass-constrained
//! minimization of `calE_c`, both by preconditioned gradient descent.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::functionals::{self, Moments};
use crate::params::{ModelParams, WaveParams};
use crate::spectral::{Field, SpectralGrid, C64};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinimizeOptions {
    pub max_iters: usize,
    /// stop when the preconditioned gradient norm drops below this
    pub tol: f64,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self { max_iters: 20000, tol: 1e-8 }
    }
}

/// Scales `phi` onto the Nehari manifold. Along the ray,
/// `calK(lambda phi) = lambda^2 A + lambda^4 B - lambda^6 C`; the positive root
/// of `A + B t - C t^2` in `t = lambda^2` is unique when `A, C > 0`.
pub fn nehari_project(phi: &Field, omega: f64, c: f64, params: &ModelParams) -> Result<(Field, f64)> {
    if !(params.gamma > 0.0) {
        return invalid("Nehari projection needs gamma > 0");
    }
    let a = functionals::nehari_quadratic(phi, omega, c);
    let b = 0.5 * c * phi.lp_pow(4);
    let cc = 3.0 * params.gamma / 16.0 * phi.lp_pow(6);
    if !(cc > 0.0) {
        return Err(Error::NotProjectable("the field vanishes".into()));
    }
    if !(a > 0.0) {
        return Err(Error::NotProjectable(format!("quadratic part {a:.3e} is not positive")));
    }
    let disc = (b * b + 4.0 * a * cc).sqrt();
    let t = if b >= 0.0 { (b + disc) / (2.0 * cc) } else { 2.0 * a / (disc - b) };
    let lambda = t.sqrt();
    Ok((phi.scale(lambda), lambda))
}

#[derive(Clone, Debug)]
pub struct NehariResult {
    pub minimizer: Field,
    pub value: f64,
    pub iterations: usize,
    /// preconditioned gradient norm at the last iterate
    pub residual: f64,
    pub nehari: f64,
    pub converged: bool,
}

/// Centered Gaussian `A e^{-x^2/2}` with `||.||^2 = mass`.
pub fn gaussian_with_mass(grid: &Arc<SpectralGrid>, mass: f64) -> Field {
    let amp = (mass / PI.sqrt()).sqrt();
    Field::from_real_fn(grid.clone(), |x| amp * (-0.5 * x * x).exp())
}

/// Default initial guess: the Gaussian with the soliton's mass, carrying the
/// soliton's carrier `e^{icx/2}`.
pub fn default_nehari_init(grid: &Arc<SpectralGrid>, omega: f64, c: f64, params: &ModelParams) -> Result<Field> {
    let mass = crate::soliton::mass_closed(omega, c, params)?;
    Ok(gaussian_with_mass(grid, mass).with_carrier(0.5 * c))
}

/// Preconditioner `(1 - d_x^2)^{-1}` acting on the physical field.
/// `(sigma + (k - k0)^2)^{-1}`, the X-space analogue of [`precondition`].
fn precondition_shifted(g: &Field, k0: f64, sigma: f64) -> Field {
    g.apply_symbol(|k| C64::new(1.0 / (sigma + (k - k0) * (k - k0)), 0.0))
}

fn precondition(g: &Field) -> Field {
    g.apply_symbol(|k| C64::new(1.0 / (1.0 + k * k), 0.0))
}

pub fn nehari_minimize(
    omega: f64,
    c: f64,
    params: &ModelParams,
    init: &Field,
    opts: MinimizeOptions,
) -> Result<NehariResult> {
    let wave = WaveParams::new(omega, c, params)?;
    let c = wave.c;
    let gamma = params.gamma;
    let (mut phi, _) = nehari_project(&init.to_carrier(0.5 * c), omega, c, params)?;
    // matches the linear part -d^2 + (omega - c^2/4) of the shifted profile;
    // floored so the algebraic case keeps a bounded preconditioner
    let sigma = (omega - 0.25 * c * c).max(0.1 * omega);
    // projected trial point with its value and gradient
    let eval = |f: &Field| -> Result<(Field, f64, Field)> {
        let (p, _) = nehari_project(f, omega, c, params)?;
        let v = Moments::of(&p).action_v(omega, c, gamma);
        let g = functionals::action_gradient(&p, omega, c, params);
        Ok((p, v, g))
    };
    let mut value = Moments::of(&phi).action_v(omega, c, gamma);
    let mut g = functionals::action_gradient(&phi, omega, c, params);
    let mut tau = 0.5;
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;
    // previous (gradient, preconditioned gradient, direction) for Polak-Ribiere
    let mut prev: Option<(Field, Field, Field)> = None;
    while iterations < opts.max_iters {
        let pg = precondition_shifted(&g, 0.5 * c, sigma);
        residual = g.inner(&pg).max(0.0).sqrt();
        if residual < opts.tol {
            converged = true;
            break;
        }
        iterations += 1;
        let mut dir = pg.scale(-1.0);
        if let Some((g0, pg0, d0)) = &prev {
            let beta = (g.inner(&pg) - g.inner(pg0)) / g0.inner(pg0);
            if beta > 0.0 && iterations % 200 != 0 {
                let trial = dir.axpy(C64::new(beta, 0.0), d0);
                if trial.inner(&g) < 0.0 {
                    dir = trial;
                }
            }
        }
        let slope = dir.inner(&g);
        // values stall at rounding level long before the gradient does, so
        // steps come from a secant on the directional derivative and descent
        // is only checked up to rounding
        let slack = 1e-13 * value.abs().max(1.0);
        let mut accepted = None;
        while tau > 1e-14 {
            let (p1, f1, g1) = eval(&phi.axpy(C64::new(tau, 0.0), &dir))?;
            let s1 = dir.inner(&g1);
            let t = if slope < s1 { tau * slope / (slope - s1) } else { 4.0 * tau };
            let t = t.clamp(0.1 * tau, 10.0 * tau);
            let (p2, f2, g2) = eval(&phi.axpy(C64::new(t, 0.0), &dir))?;
            if f2 <= value + slack && f2 <= f1 + slack {
                accepted = Some((p2, f2, g2, t));
                break;
            }
            if f1 <= value + slack {
                accepted = Some((p1, f1, g1, tau));
                break;
            }
            tau *= 0.5;
        }
        let Some((p, f, gn, t)) = accepted else {
            return Ok(finish_nehari(phi, value, iterations, residual, residual < 1e3 * opts.tol, omega, c, params));
        };
        phi = p;
        value = value.min(f);
        tau = t;
        prev = Some((std::mem::replace(&mut g, gn), pg, dir));
    }
    Ok(finish_nehari(phi, value, iterations, residual, converged, omega, c, params))
}

#[allow(clippy::too_many_arguments)]
fn finish_nehari(
    phi: Field,
    value: f64,
    iterations: usize,
    residual: f64,
    converged: bool,
    omega: f64,
    c: f64,
    params: &ModelParams,
) -> NehariResult {
    let nehari = Moments::of(&phi).nehari(omega, c, params.gamma);
    NehariResult { minimizer: phi, value, iterations, residual, nehari, converged }
}

#[derive(Clone, Debug)]
pub struct MassConstrainedResult {
    pub minimizer: Field,
    pub value: f64,
    pub multiplier: f64,
    pub omega_tilde: f64,
    pub iterations: usize,
    /// sup-norm of the Euler-Lagrange residual
    pub residual: f64,
    pub converged: bool,
}

fn ec_value(psi: &Field, c: f64, gamma: f64) -> f64 {
    let m = Moments::of(psi);
    0.5 * m.grad2 + c / 8.0 * m.l4 - gamma / 32.0 * m.l6
}

/// Minimizes `calE_c` on `{||psi||^2 = m}`.
///
/// The multiplier is the `lambda` of
/// `-psi'' + lambda psi + (c/2)|psi|^2 psi - (3 gamma/16)|psi|^4 psi = 0`,
/// recovered as `-(calE_c'(psi), psi) / m`; then `omega~ = lambda + c^2/4`.
pub fn mass_constrained_minimize(
    c: f64,
    m: f64,
    params: &ModelParams,
    init: &Field,
    opts: MinimizeOptions,
) -> Result<MassConstrainedResult> {
    let gamma = params.gamma;
    if !(c < 0.0) {
        return invalid(format!("mass-constrained problem needs c < 0, got {c}"));
    }
    if !(m > 0.0) {
        return invalid("mass must be positive");
    }
    if gamma > 0.0 && !(m < 2.0 * PI / gamma.sqrt()) {
        return invalid(format!("gamma > 0 needs m < 2 pi / sqrt(gamma) = {}", 2.0 * PI / gamma.sqrt()));
    }
    let normalize = |f: &Field| {
        let n2 = f.lp_pow(2);
        f.scale((m / n2).sqrt())
    };
    let mut psi = normalize(&init.to_carrier(0.0));
    let mut value = ec_value(&psi, c, gamma);
    let mut tau = 0.5;
    let mut iterations = 0;
    let mut converged = false;
    let mut gnorm;
    loop {
        let g = functionals::ec_gradient(&psi, c, params);
        let pg = precondition(&g);
        let ppsi = precondition(&psi);
        let mu = -pg.inner(&psi) / ppsi.inner(&psi);
        let d = pg.axpy(C64::new(mu, 0.0), &ppsi);
        gnorm = d.inner(&g).max(0.0).sqrt();
        if gnorm < opts.tol {
            converged = true;
            break;
        }
        if iterations >= opts.max_iters {
            break;
        }
        iterations += 1;
        let mut accepted = false;
        while tau > 1e-14 {
            let trial = normalize(&psi.axpy(C64::new(-tau, 0.0), &d));
            let tv = ec_value(&trial, c, gamma);
            if tv <= value {
                psi = trial;
                value = tv;
                tau = (tau * 1.25).min(4.0);
                accepted = true;
                break;
            }
            tau *= 0.5;
        }
        if !accepted {
            converged = gnorm < 1e3 * opts.tol;
            break;
        }
    }
    let g = functionals::ec_gradient(&psi, c, params);
    let multiplier = -g.inner(&psi) / m;
    let residual = g.axpy(C64::new(multiplier, 0.0), &psi).sup_norm();
    Ok(MassConstrainedResult {
        minimizer: psi,
        value,
        multiplier,
        omega_tilde: multiplier + 0.25 * c * c,
        iterations,
        residual,
        converged,
    })
}

/// Empirical Gagliardo-Nirenberg constants.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GnConstants {
    /// sup of `||f||_4 / (||f'||^{1/4} ||f||^{3/4})` over the test family
    pub c1: f64,
    /// `C1^8 / 64`, so that `calE_c >= ||psi'||^2/4 - C2 c^2 ||psi||^6` for `gamma <= 0`
    pub c2: f64,
}

/// `||f||_4 / (||f'||^{1/4} ||f||^{3/4})`.
pub fn gn_ratio(f: &Field) -> f64 {
    let d = f.derivative(1).lp_norm(2);
    f.lp_norm(4) / (d.powf(0.25) * f.lp_norm(2).powf(0.75))
}

/// Sweeps Gaussians and sech profiles of several widths.
pub fn gn_constants(grid: &Arc<SpectralGrid>) -> GnConstants {
    let l = grid.half_length();
    let mut best: f64 = 0.0;
    for j in 0..12 {
        let w = (l / 12.0) * 0.75f64.powi(j);
        let gauss = Field::from_real_fn(grid.clone(), |x| (-0.5 * (x / w) * (x / w)).exp());
        let sech = Field::from_real_fn(grid.clone(), |x| 1.0 / (x / w).cosh());
        for f in [gauss, sech] {
            if f.edge_ratio() < 1e-8 && 10.0 * grid.dx() < w {
                best = best.max(gn_ratio(&f));
            }
        }
    }
    GnConstants { c1: best, c2: best.powi(8) / 64.0 }
}
