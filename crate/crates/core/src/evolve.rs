//! Integrating-factor RK4 (Lawson) time stepping for both forms of the
//! equation, with invariant tracking.
//!
//! The state is kept as the normalized spectrum of the samples `w` of
//! `v = e^{iqx} w`. The dispersive term is propagated exactly by
//! `exp(-i (k+q)^2 dt)`; the nonlinearity is evaluated on a 3N-padded grid.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::functionals::{InvariantRecord, Moments};
use crate::params::ModelParams;
use crate::soliton::Gauge;
use crate::spectral::{Decay, Field, Padded, SpectralGrid, C64};

const I: C64 = C64 { re: 0.0, im: 1.0 };
const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Samples above this modulus count as blow-up.
pub const BLOWUP_SUP: f64 = 1e6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolveConfig {
    pub equation: Gauge,
    pub dt: f64,
    pub t_final: f64,
    pub snapshot_stride: usize,
    pub params: ModelParams,
    /// `dt <= safety * dx^2`
    pub safety: f64,
    /// switch off to test the free propagator
    pub nonlinear: bool,
    /// keep the field at every snapshot (otherwise only invariants)
    pub keep_fields: bool,
    /// `(omega, c)` for which snapshots also record `calS`, `calK`, `calJ_c`
    pub wave: Option<(f64, f64)>,
}

impl EvolveConfig {
    /// Defaults: `dt = min(0.2 dx^2, 1e-3)`, stride 100.
    pub fn new(equation: Gauge, params: ModelParams, grid: &SpectralGrid, t_final: f64) -> Self {
        Self {
            equation,
            dt: default_dt(grid),
            t_final,
            snapshot_stride: 100,
            params,
            safety: 0.2,
            nonlinear: true,
            keep_fields: false,
            wave: None,
        }
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn validate(&self, grid: &SpectralGrid) -> Result<()> {
        if !(self.dt > 0.0) || !(self.t_final > 0.0) {
            return invalid("dt and t_final must be positive");
        }
        if self.snapshot_stride == 0 {
            return invalid("snapshot stride must be at least 1");
        }
        let ceiling = self.safety * grid.dx() * grid.dx();
        if self.dt > ceiling * (1.0 + 1e-12) {
            return invalid(format!(
                "dt={} exceeds the stability ceiling {:.3e} = {} dx^2",
                self.dt, ceiling, self.safety
            ));
        }
        Ok(())
    }

    /// Step count and the uniform step actually used to land on `t_final`.
    pub fn steps(&self) -> (usize, f64) {
        let n = ((self.t_final / self.dt) - 1e-9).ceil().max(1.0) as usize;
        (n, self.t_final / n as f64)
    }
}

pub fn default_dt(grid: &SpectralGrid) -> f64 {
    (0.2 * grid.dx() * grid.dx()).min(1e-3)
}

#[derive(Clone, Debug)]
pub struct Snapshot {
    pub t: f64,
    pub step: usize,
    pub invariants: InvariantRecord,
    pub field: Option<Field>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Drift {
    pub energy: f64,
    pub mass: f64,
    pub momentum: f64,
}

impl Drift {
    pub fn max(&self) -> f64 {
        self.energy.max(self.mass).max(self.momentum)
    }

    pub fn of(snapshots: &[Snapshot]) -> Drift {
        let Some(first) = snapshots.first() else { return Drift::default() };
        let q0 = first.invariants;
        let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1.0);
        snapshots.iter().fold(Drift::default(), |d, s| {
            let q = s.invariants;
            Drift {
                energy: d.energy.max(rel(q.energy, q0.energy)),
                mass: d.mass.max(rel(q.mass, q0.mass)),
                momentum: d.momentum.max(rel(q.momentum, q0.momentum)),
            }
        })
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub snapshots: Vec<Snapshot>,
    pub drift: Drift,
    /// time of the first non-finite or oversized state
    pub blowup: Option<f64>,
    pub dt: f64,
    pub final_field: Field,
}

/// One integrator bound to a grid, carrier and configuration.
pub struct Stepper {
    grid: Arc<SpectralGrid>,
    carrier: f64,
    equation: Gauge,
    params: ModelParams,
    nonlinear: bool,
    dt: f64,
    e_full: Vec<C64>,
    e_half: Vec<C64>,
    mult: Vec<C64>,
    pad: Padded,
    pw: Vec<C64>,
    pwx: Vec<C64>,
    tmp: Vec<C64>,
    stage: Vec<C64>,
    eu: Vec<C64>,
    e2u: Vec<C64>,
    acc: Vec<C64>,
    a: Vec<C64>,
}

impl Stepper {
    pub fn new(grid: Arc<SpectralGrid>, carrier: f64, config: &EvolveConfig, dt: f64) -> Self {
        let n = grid.n();
        let nyq = grid.nyquist_index();
        let ks: Vec<f64> = grid.wavenumbers().iter().map(|k| k + carrier).collect();
        let e = |h: f64| ks.iter().map(|k| C64::from_polar(1.0, -k * k * h)).collect::<Vec<_>>();
        let mult = ks
            .iter()
            .enumerate()
            .map(|(j, &k)| if j == nyq { ZERO } else { I * k })
            .collect();
        Self {
            pad: Padded::new(grid.clone()),
            carrier,
            equation: config.equation,
            params: config.params,
            nonlinear: config.nonlinear,
            dt,
            e_full: e(dt),
            e_half: e(0.5 * dt),
            mult,
            pw: vec![ZERO; 3 * n],
            pwx: vec![ZERO; 3 * n],
            tmp: vec![ZERO; n],
            stage: vec![ZERO; n],
            eu: vec![ZERO; n],
            e2u: vec![ZERO; n],
            acc: vec![ZERO; n],
            a: vec![ZERO; n],
            grid,
        }
    }

    pub fn grid(&self) -> &Arc<SpectralGrid> {
        &self.grid
    }
    pub fn carrier(&self) -> f64 {
        self.carrier
    }

    /// Nonlinear term of the chosen equation, spectrum in and out.
    fn nonlinearity(&mut self, spec: &[C64], out: &mut [C64]) {
        if !self.nonlinear {
            out.iter_mut().for_each(|z| *z = ZERO);
            return;
        }
        for ((t, s), m) in self.tmp.iter_mut().zip(spec).zip(&self.mult) {
            *t = s * m;
        }
        self.pad.values(spec, &mut self.pw);
        self.pad.values(&self.tmp, &mut self.pwx);
        match self.equation {
            Gauge::Dnls => {
                let b = self.params.b;
                for (w, wx) in self.pw.iter_mut().zip(&self.pwx) {
                    let r = w.norm_sqr();
                    *w = -r * wx + I * (b * r * r) * *w;
                }
            }
            Gauge::Modified => {
                let g = 3.0 * self.params.gamma / 16.0;
                for (w, wx) in self.pw.iter_mut().zip(&self.pwx) {
                    let r = w.norm_sqr();
                    *w = -0.5 * r * wx + 0.5 * *w * *w * wx.conj() + I * (g * r * r) * *w;
                }
            }
        }
        self.pad.truncate(&mut self.pw, out);
    }

    /// Advances the spectrum by one step.
    pub fn step(&mut self, u: &mut [C64]) {
        let n = u.len();
        let h = self.dt;
        let mut a = std::mem::take(&mut self.a);
        for j in 0..n {
            self.eu[j] = self.e_full[j] * u[j];
            self.e2u[j] = self.e_half[j] * u[j];
        }
        // a1
        self.nonlinearity(u, &mut a);
        for j in 0..n {
            self.acc[j] = self.e_full[j] * a[j];
            self.stage[j] = self.e2u[j] + 0.5 * h * self.e_half[j] * a[j];
        }
        // a2
        let stage = std::mem::take(&mut self.stage);
        self.nonlinearity(&stage, &mut a);
        self.stage = stage;
        for j in 0..n {
            self.acc[j] += 2.0 * self.e_half[j] * a[j];
            self.stage[j] = self.e2u[j] + 0.5 * h * a[j];
        }
        // a3
        let stage = std::mem::take(&mut self.stage);
        self.nonlinearity(&stage, &mut a);
        self.stage = stage;
        for j in 0..n {
            self.acc[j] += 2.0 * self.e_half[j] * a[j];
            self.stage[j] = self.eu[j] + h * self.e_half[j] * a[j];
        }
        // a4
        let stage = std::mem::take(&mut self.stage);
        self.nonlinearity(&stage, &mut a);
        self.stage = stage;
        for j in 0..n {
            u[j] = self.eu[j] + h / 6.0 * (self.acc[j] + a[j]);
        }
        self.a = a;
    }
}

/// One step of the configured scheme.
pub fn step(state: &Field, config: &EvolveConfig) -> Result<Field> {
    config.validate(state.grid())?;
    state.check_decay()?;
    let mut st = Stepper::new(state.grid().clone(), state.carrier(), config, config.dt);
    let mut spec = state.spectrum();
    st.step(&mut spec);
    Ok(Field::from_spectrum(state.grid().clone(), state.carrier(), spec).with_decay(state.decay()))
}

fn record(field: &Field, config: &EvolveConfig) -> InvariantRecord {
    let m = Moments::of(field);
    let rec = match config.equation {
        Gauge::Dnls => InvariantRecord {
            energy: m.energy_u(config.params.b),
            mass: m.mass,
            momentum: m.cross,
            action: None,
            nehari: None,
            jc: None,
        },
        Gauge::Modified => InvariantRecord {
            energy: m.energy_v(config.params.gamma),
            mass: m.mass,
            momentum: m.momentum_v(),
            action: None,
            nehari: None,
            jc: None,
        },
    };
    match (config.equation, config.wave) {
        (Gauge::Modified, Some((omega, c))) => rec.with_wave(&m, omega, c, &config.params),
        _ => rec,
    }
}

pub fn run(u0: &Field, config: &EvolveConfig) -> Result<Trajectory> {
    run_observed(u0, config, |_, _| Ok(()))
}

/// Like [`run`], calling `observer(t, state)` at every snapshot. The observer
/// may modify the state (e.g. recentre it); integration continues from the
/// modified state.
pub fn run_observed(
    u0: &Field,
    config: &EvolveConfig,
    mut observer: impl FnMut(f64, &mut Field) -> Result<()>,
) -> Result<Trajectory> {
    let grid = u0.grid().clone();
    config.validate(&grid)?;
    u0.check_decay()?;
    let (nsteps, dt) = config.steps();
    let carrier = u0.carrier();
    let mut stepper = Stepper::new(grid.clone(), carrier, config, dt);
    let mut spec;
    let mut snapshots = Vec::new();
    let mut blowup = None;
    let mut field = u0.clone().with_decay(Decay::Periodic);
    let mut snap = |step: usize, field: &mut Field, snapshots: &mut Vec<Snapshot>| -> Result<()> {
        let t = step as f64 * dt;
        observer(t, field)?;
        snapshots.push(Snapshot {
            t,
            step,
            invariants: record(field, config),
            field: config.keep_fields.then(|| field.clone()),
        });
        Ok(())
    };
    snap(0, &mut field, &mut snapshots)?;
    spec = field.spectrum();
    for n in 1..=nsteps {
        stepper.step(&mut spec);
        let bound: f64 = spec.iter().map(|z| z.norm()).sum();
        if !bound.is_finite() || bound > BLOWUP_SUP {
            let f = Field::from_spectrum(grid.clone(), carrier, spec.clone());
            if !f.is_finite() || f.sup_norm() > BLOWUP_SUP {
                blowup = Some(n as f64 * dt);
                break;
            }
        }
        if n % config.snapshot_stride == 0 || n == nsteps {
            field = Field::from_spectrum(grid.clone(), carrier, spec.clone()).with_decay(Decay::Periodic);
            snap(n, &mut field, &mut snapshots)?;
            spec = field.spectrum();
        }
    }
    let final_field = match (&blowup, snapshots.last()) {
        (None, _) => field,
        (Some(_), Some(Snapshot { field: Some(f), .. })) => f.clone(),
        (Some(_), _) => field,
    };
    Ok(Trajectory { drift: Drift::of(&snapshots), snapshots, blowup, dt, final_field })
}
