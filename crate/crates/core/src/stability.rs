//! Orbital distance, perturbations and the stability experiment harness.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::evolve::{self, Drift, EvolveConfig};
use crate::functionals::{self, Moments, Sign, WellTag};
use crate::params::{self, ModelParams, WaveParams};
use crate::soliton::{self, Gauge, SolitonProfile};
use crate::spectral::{Field, SpectralGrid, C64};

/// Result of minimizing `||u - e^{i theta} p(. - y)||_{H^1}` over `(theta, y)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitalFit {
    pub distance: f64,
    pub theta: f64,
    pub y: f64,
}

/// Best phase and shift of `profile` against `u`.
///
/// For fixed `y` the optimal phase is the argument of the complex `H^1`
/// pairing `<u, p(. - y)>`, which as a function of `y` is a trigonometric sum;
/// one inverse FFT evaluates it at every grid shift. The best grid shift is
/// refined by golden-section search on the pairing modulus.
pub fn orbital_fit(u: &Field, profile: &Field) -> OrbitalFit {
    let grid = u.grid().clone();
    let q = u.carrier();
    let p = profile.to_carrier(q);
    let (a, b) = (u.spectrum(), p.spectrum());
    let ks = grid.wavenumbers();
    let h: Vec<C64> = a
        .iter()
        .zip(&b)
        .zip(ks)
        .map(|((x, y), &k)| x * y.conj() * (1.0 + (k + q) * (k + q)))
        .collect();
    let mut corr = h.clone();
    grid.inverse(&mut corr);
    let (best, _) = corr
        .iter()
        .enumerate()
        .fold((0, -1.0), |(bi, bv), (i, z)| if z.norm() > bv { (i, z.norm()) } else { (bi, bv) });
    let l = grid.half_length();
    let dx = grid.dx();
    let mut y0 = best as f64 * dx;
    if y0 >= l {
        y0 -= 2.0 * l;
    }
    let pairing = |y: f64| -> C64 {
        h.iter().zip(ks).map(|(z, &k)| z * C64::from_polar(1.0, k * y)).sum::<C64>()
    };
    // golden-section maximization of |pairing| on [y0 - dx, y0 + dx]
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let (mut lo, mut hi) = (y0 - dx, y0 + dx);
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let mut f1 = pairing(x1).norm();
    let mut f2 = pairing(x2).norm();
    while hi - lo > 1e-6 * dx {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = pairing(x2).norm();
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = pairing(x1).norm();
        }
    }
    // golden section only resolves the peak to sqrt(eps); polish with Newton on |S|^2
    let mut y = 0.5 * (lo + hi);
    for _ in 0..8 {
        let (mut s0, mut s1, mut s2) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        for (z, &k) in h.iter().zip(ks) {
            let t = z * C64::from_polar(1.0, k * y);
            s0 += t;
            s1 += t * C64::new(0.0, k);
            s2 -= t * (k * k);
        }
        let g1 = (s0.conj() * s1).re;
        let g2 = s1.norm_sqr() + (s0.conj() * s2).re;
        if !(g2 < 0.0) {
            break;
        }
        let step = -g1 / g2;
        if !step.is_finite() || step.abs() > dx {
            break;
        }
        y += step;
        if step.abs() < 1e-15 * (1.0 + y.abs()) {
            break;
        }
    }
    let theta = (pairing(y) * C64::from_polar(1.0, q * y)).arg();
    let fitted = p.translate(y).scale_c(C64::from_polar(1.0, theta));
    OrbitalFit { distance: u.sub(&fitted).hm_norm(1), theta, y }
}

/// Distance from `u` to the orbit of the soliton `(omega, c)` in the given gauge.
pub fn orbital_distance(u: &Field, omega: f64, c: f64, params: &ModelParams, gauge: Gauge) -> Result<OrbitalFit> {
    u.check_decay()?;
    let prof = SolitonProfile::new(omega, c, params)?;
    Ok(orbital_fit(u, &prof.sample(u.grid(), gauge)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationKind {
    EvenBump,
    OddBump,
    RandomSmooth,
    Scaling,
}

impl std::str::FromStr for PerturbationKind {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "even_bump" => Ok(Self::EvenBump),
            "odd_bump" => Ok(Self::OddBump),
            "random_smooth" => Ok(Self::RandomSmooth),
            "scaling" => Ok(Self::Scaling),
            _ => invalid(format!(
                "unknown perturbation kind '{s}' (expected even_bump, odd_bump, random_smooth, scaling)"
            )),
        }
    }
}

impl std::fmt::Display for PerturbationKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::EvenBump => "even_bump",
            Self::OddBump => "odd_bump",
            Self::RandomSmooth => "random_smooth",
            Self::Scaling => "scaling",
        })
    }
}

/// Adds a perturbation of `H^1` norm exactly `delta`.
///
/// `random_smooth` draws modes `|m| <= 8` from a seeded ChaCha generator and
/// multiplies by a Gaussian envelope of width `L/8` so the result still
/// decays at the window edges.
pub fn perturb(profile: &Field, delta: f64, kind: PerturbationKind, seed: u64) -> Result<Field> {
    if !(delta >= 0.0) {
        return invalid("delta must be non-negative");
    }
    if delta == 0.0 {
        return Ok(profile.clone());
    }
    let grid = profile.grid().clone();
    let q = profile.carrier();
    let shape = match kind {
        PerturbationKind::EvenBump => {
            Field::from_real_fn(grid.clone(), |x| (-0.5 * x * x).exp()).to_carrier(q)
        }
        PerturbationKind::OddBump => {
            Field::from_real_fn(grid.clone(), |x| x * (-0.5 * x * x).exp()).to_carrier(q)
        }
        PerturbationKind::Scaling => profile.clone(),
        PerturbationKind::RandomSmooth => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let l = grid.half_length();
            let coeffs: Vec<(f64, C64)> = (-8..=8)
                .map(|m| {
                    let z = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                    (std::f64::consts::PI * m as f64 / l, z)
                })
                .collect();
            let sigma = l / 8.0;
            Field::from_fn(grid.clone(), |x| {
                let s: C64 = coeffs.iter().map(|(k, z)| z * C64::from_polar(1.0, k * x)).sum();
                s * (-0.5 * (x / sigma) * (x / sigma)).exp()
            })
            .with_carrier(q)
        }
    };
    let norm = shape.hm_norm(1);
    if !(norm > 0.0) {
        return invalid("cannot perturb along a zero direction");
    }
    Ok(profile.axpy(C64::new(delta / norm, 0.0), &shape))
}

/// Grid, scheme and monitoring choices for a stability run.
#[derive(Clone, Debug)]
pub struct StabilityConfig {
    pub grid: Arc<SpectralGrid>,
    pub equation: Gauge,
    /// `None`: the default `min(0.2 dx^2, 1e-3)`
    pub dt: Option<f64>,
    pub snapshot_stride: usize,
    /// recentre the state on the fitted soliton position at every snapshot
    pub comoving: bool,
    pub seed: u64,
}

impl StabilityConfig {
    pub fn new(grid: Arc<SpectralGrid>, equation: Gauge) -> Self {
        Self { grid, equation, dt: None, snapshot_stride: 100, comoving: false, seed: 0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilitySample {
    pub t: f64,
    pub distance: f64,
    pub theta: f64,
    pub y: f64,
    /// sign of `calK` (gauge-transformed runs only)
    pub k_sign: Option<i8>,
    pub jc: Option<f64>,
    /// whether the corridor bounds hold at this time (when monitored)
    pub corridor: Option<bool>,
}

/// Shifted parameters bracketing the soliton in the flow-control argument.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Corridor {
    pub epsilon: f64,
    pub plus: (f64, f64),
    pub minus: (f64, f64),
    pub d_plus: f64,
    pub d_minus: f64,
    /// coefficient of `||v||_4^4` widening the bounds (`s eps/4`, `eps/8` or 0)
    pub l4_weight: f64,
}

impl Corridor {
    /// `(lower, upper)` bounds on `calJ_c(v)`.
    pub fn bounds(&self, l4: f64) -> (f64, f64) {
        (self.d_minus - self.l4_weight * l4, self.d_plus + self.l4_weight * l4)
    }

    pub fn holds(&self, m: &Moments, c: f64, gamma: f64) -> bool {
        let (lo, hi) = self.bounds(m.l4);
        let j = m.jc(c, gamma);
        lo < j && j < hi
    }
}

/// Corridor for shift `eps` (requires `0 < gamma < 1` and an admissible
/// `(omega, c)`); `None` if a shifted parameter leaves the existence region.
pub fn corridor(omega: f64, c: f64, params: &ModelParams, eps: f64) -> Option<Corridor> {
    if !(params.gamma > 0.0 && params.gamma < 1.0) {
        return None;
    }
    let wave = WaveParams::new(omega, c, params).ok()?;
    let c = wave.c;
    let mu = omega.sqrt();
    let (plus, minus, l4_weight) = if c > 0.0 {
        let s = wave.s;
        (
            ((mu + eps).powi(2), 2.0 * s * (mu + eps)),
            ((mu - eps).powi(2), 2.0 * s * (mu - eps)),
            0.25 * s * eps,
        )
    } else if c == 0.0 {
        ((omega, eps), (omega, -eps), eps / 8.0)
    } else {
        ((omega + eps, c), (omega - eps, c), 0.0)
    };
    if !(minus.0 > 0.0) {
        return None;
    }
    let d_plus = soliton::action_d(plus.0, plus.1, params).ok()?;
    let d_minus = soliton::action_d(minus.0, minus.1, params).ok()?;
    Some(Corridor { epsilon: eps, plus, minus, d_plus, d_minus, l4_weight })
}

/// Smallest `eps` on a geometric ladder for which `v0` lies in
/// `B+(plus) ∩ B-(minus)` with every margin above `margin`.
pub fn calibrate_corridor(v0: &Field, omega: f64, c: f64, params: &ModelParams, margin: f64) -> Option<Corridor> {
    let mut found = None;
    for j in 0..60 {
        let eps = 0.5 * 0.8f64.powi(j);
        let Some(cor) = corridor(omega, c, params, eps) else { continue };
        let ok = (|| -> Result<bool> {
            let p = functionals::well_membership_tol(v0, cor.plus.0, cor.plus.1, params, margin)?;
            let m = functionals::well_membership_tol(v0, cor.minus.0, cor.minus.1, params, margin)?;
            Ok(p.in_b(Sign::Plus) && m.in_b(Sign::Minus))
        })()
        .unwrap_or(false);
        if ok {
            found = Some(cor);
        } else if found.is_some() {
            break;
        }
    }
    found
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StabilityReport {
    pub b: f64,
    pub omega: f64,
    pub c: f64,
    pub delta: f64,
    pub kind: PerturbationKind,
    pub seed: u64,
    pub equation: Gauge,
    pub t_final: f64,
    pub dt: f64,
    pub samples: Vec<StabilitySample>,
    pub drift: Drift,
    pub blowup: Option<f64>,
    pub sup_distance: f64,
    pub ratio: f64,
    /// drift below `1e-7` and no blow-up
    pub numerically_valid: bool,
    pub initial_well: Option<WellTag>,
    /// `None` unless the initial data sits in a well with `|calK| > 1e-3`
    pub k_sign_constant: Option<bool>,
    pub corridor: Option<Corridor>,
    /// `None` when no corridor applies
    pub corridor_held: Option<bool>,
}

/// Drift above this marks a run as numerically invalid.
pub const DRIFT_LIMIT: f64 = 1e-7;

/// Perturbs the soliton `(omega, c)` by `delta`, evolves to `t_final` and
/// records the orbital distance and potential-well data at every snapshot.
#[allow(clippy::too_many_arguments)]
pub fn stability_experiment(
    b: f64,
    omega: f64,
    c: f64,
    delta: f64,
    kind: PerturbationKind,
    t_final: f64,
    config: &StabilityConfig,
) -> Result<StabilityReport> {
    let params = ModelParams::from_b(b);
    let wave = WaveParams::new(omega, c, &params)?;
    let c = wave.c;
    let grid = &config.grid;
    let prof = SolitonProfile::new(omega, c, &params)?;
    let profile = prof.sample(grid, config.equation);
    let v0 = perturb(&profile, delta, kind, config.seed)?;
    let modified = config.equation == Gauge::Modified;

    let mut initial_well = None;
    let mut k_sign0 = None;
    let mut cor = None;
    if modified {
        let wm = functionals::well_membership(&v0, omega, c, &params)?;
        initial_well = Some(wm.tag);
        if wm.a.is_some() && wm.nehari.abs() > 1e-3 {
            k_sign0 = Some(wm.nehari.signum() as i8);
        }
        let d = soliton::action_d(omega, c, &params)?;
        cor = calibrate_corridor(&v0, omega, c, &params, 1e-10 * d.abs().max(1.0));
    }

    let mut ecfg = EvolveConfig::new(config.equation, params, grid, t_final);
    if let Some(dt) = config.dt {
        ecfg.dt = dt;
    }
    ecfg.snapshot_stride = config.snapshot_stride;
    if modified {
        ecfg.wave = Some((omega, c));
    }
    let mut samples = Vec::new();
    let mut offset = 0.0;
    let traj = evolve::run_observed(&v0, &ecfg, |t, state| {
        let fit = orbital_fit(state, &profile);
        let (k_sign, jc, corridor_ok) = if modified {
            let m = Moments::of(state);
            let k = m.nehari(omega, c, params.gamma);
            (
                Some(k.signum() as i8),
                Some(m.jc(c, params.gamma)),
                cor.map(|cr| cr.holds(&m, c, params.gamma)),
            )
        } else {
            (None, None, None)
        };
        samples.push(StabilitySample {
            t,
            distance: fit.distance,
            theta: fit.theta,
            y: fit.y + offset,
            k_sign,
            jc,
            corridor: corridor_ok,
        });
        if config.comoving && fit.y != 0.0 {
            *state = state.translate(-fit.y);
            offset += fit.y;
        }
        Ok(())
    })?;
    let sup_distance = samples.iter().map(|s| s.distance).fold(0.0, f64::max);
    let k_sign_constant = k_sign0.map(|s0| samples.iter().all(|s| s.k_sign == Some(s0)));
    let corridor_held = cor.map(|_| samples.iter().all(|s| s.corridor == Some(true)));
    Ok(StabilityReport {
        b,
        omega,
        c,
        delta,
        kind,
        seed: config.seed,
        equation: config.equation,
        t_final,
        dt: traj.dt,
        numerically_valid: traj.blowup.is_none() && traj.drift.max() < DRIFT_LIMIT,
        drift: traj.drift,
        blowup: traj.blowup,
        ratio: if delta > 0.0 { sup_distance / delta } else { f64::NAN },
        sup_distance,
        samples,
        initial_well,
        k_sign_constant,
        corridor: cor,
        corridor_held,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GlobalBoundReport {
    pub b: f64,
    pub mass: f64,
    pub threshold: f64,
    /// `M*(b) - M(u0)`
    pub margin: f64,
    pub below_threshold: bool,
    pub times: Vec<f64>,
    pub h1: Vec<f64>,
    pub initial_h1: f64,
    pub sup_h1: f64,
    pub blowup: Option<f64>,
    pub drift: Drift,
    /// no blow-up and `sup H^1 < 10 x` initial
    pub bounded: bool,
}

/// Evolves `u0` under the original equation and tracks its `H^1` norm.
/// Data above the threshold are run as well; the report says so.
pub fn global_bound_experiment(b: f64, u0: &Field, t_final: f64, dt: Option<f64>) -> Result<GlobalBoundReport> {
    let params = ModelParams::from_b(b);
    let threshold = params::mass_threshold(b)?;
    let mass = u0.lp_pow(2);
    let mut cfg = EvolveConfig::new(Gauge::Dnls, params, u0.grid(), t_final);
    if let Some(dt) = dt {
        cfg.dt = dt;
    }
    let mut times = Vec::new();
    let mut h1 = Vec::new();
    let traj = evolve::run_observed(u0, &cfg, |t, state| {
        times.push(t);
        h1.push(state.hm_norm(1));
        Ok(())
    })?;
    let initial_h1 = h1[0];
    let sup_h1 = h1.iter().cloned().fold(0.0, f64::max);
    Ok(GlobalBoundReport {
        b,
        mass,
        threshold,
        margin: threshold - mass,
        below_threshold: mass < threshold,
        times,
        h1,
        initial_h1,
        sup_h1,
        blowup: traj.blowup,
        drift: traj.drift,
        bounded: traj.blowup.is_none() && sup_h1 < 10.0 * initial_h1,
    })
}
