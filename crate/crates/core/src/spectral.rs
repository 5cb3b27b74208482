//! Periodic Fourier grid and complex grid functions.
//!
//! A [`Field`] stores samples `w_j` of `v(x) = e^{i q x} w(x)` where `q` is a
//! fixed carrier wavenumber. Derivatives use the multiplier `i(k + q)`, so a
//! field whose phase winds linearly (a travelling soliton, or the gauge
//! transformed algebraic soliton) is represented by samples that are periodic
//! on the window even though `v` itself is not.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{invalid, Error, Result};

pub type C64 = Complex64;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Uniform periodic grid on `[-L, L)` with `N` nodes.
pub struct SpectralGrid {
    half_length: f64,
    n: usize,
    dx: f64,
    nodes: Vec<f64>,
    wavenumbers: Vec<f64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    fwd3: Arc<dyn Fft<f64>>,
    inv3: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for SpectralGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralGrid")
            .field("half_length", &self.half_length)
            .field("n", &self.n)
            .finish()
    }
}

impl SpectralGrid {
    pub fn new(half_length: f64, n: usize) -> Result<Arc<Self>> {
        if !(half_length > 0.0) || !half_length.is_finite() {
            return invalid(format!("half length must be positive, got {half_length}"));
        }
        if n < 8 || !n.is_power_of_two() {
            return invalid(format!("point count must be a power of two >= 8, got {n}"));
        }
        let dx = 2.0 * half_length / n as f64;
        let nodes = (0..n).map(|j| -half_length + j as f64 * dx).collect();
        let wavenumbers = (0..n)
            .map(|j| {
                let m = if j < n / 2 { j as f64 } else { j as f64 - n as f64 };
                std::f64::consts::PI * m / half_length
            })
            .collect();
        let mut planner = FftPlanner::new();
        Ok(Arc::new(Self {
            half_length,
            n,
            dx,
            nodes,
            wavenumbers,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
            fwd3: planner.plan_fft_forward(3 * n),
            inv3: planner.plan_fft_inverse(3 * n),
        }))
    }

    /// L = 40, N = 2048: adequate for exponentially decaying profiles.
    pub fn exponential_default() -> Arc<Self> {
        Self::new(40.0, 2048).expect("valid default grid")
    }

    /// L = 400, N = 16384: range for the 1/x^2 tails of algebraic profiles.
    pub fn algebraic_default() -> Arc<Self> {
        Self::new(400.0, 16384).expect("valid default grid")
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn dx(&self) -> f64 {
        self.dx
    }
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }
    /// Wavenumbers in FFT order; index `N/2` holds the Nyquist mode `-pi N / (2L)`.
    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }
    pub fn nyquist_index(&self) -> usize {
        self.n / 2
    }

    /// Samples to normalized Fourier coefficients, in place.
    pub fn forward(&self, data: &mut [C64]) {
        self.fwd.process(data);
        let s = 1.0 / self.n as f64;
        data.iter_mut().for_each(|z| *z *= s);
    }

    /// Normalized Fourier coefficients to samples, in place.
    pub fn inverse(&self, data: &mut [C64]) {
        self.inv.process(data);
    }

    fn same_as(&self, other: &SpectralGrid) -> bool {
        self.n == other.n && self.half_length == other.half_length
    }
}

/// Which edge-decay test a field must pass before functionals are evaluated
/// on it as if it lived on the whole line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Decay {
    /// `max edge |f| <= 1e-8 max |f|`
    Exponential,
    /// `max edge |f|^2 <= 1e-4 max |f|^2`, for 1/x^2 density tails
    Algebraic,
    /// Genuinely periodic state (e.g. an evolved snapshot); no check.
    Periodic,
}

impl Decay {
    pub fn threshold(self) -> Option<f64> {
        match self {
            Decay::Exponential => Some(1e-8),
            Decay::Algebraic => Some(1e-4),
            Decay::Periodic => None,
        }
    }
}

/// Complex samples on a [`SpectralGrid`] with a carrier wavenumber.
#[derive(Clone, Debug)]
pub struct Field {
    grid: Arc<SpectralGrid>,
    carrier: f64,
    decay: Decay,
    data: Vec<C64>,
}

impl Field {
    pub fn new(grid: Arc<SpectralGrid>, data: Vec<C64>) -> Self {
        assert_eq!(data.len(), grid.n(), "sample count must match the grid");
        Self { grid, carrier: 0.0, decay: Decay::Exponential, data }
    }

    pub fn zeros(grid: Arc<SpectralGrid>) -> Self {
        let n = grid.n();
        Self::new(grid, vec![C64::new(0.0, 0.0); n])
    }

    pub fn from_fn(grid: Arc<SpectralGrid>, f: impl Fn(f64) -> C64) -> Self {
        let data = grid.nodes().iter().map(|&x| f(x)).collect();
        Self::new(grid, data)
    }

    pub fn from_real_fn(grid: Arc<SpectralGrid>, f: impl Fn(f64) -> f64) -> Self {
        Self::from_fn(grid, |x| C64::new(f(x), 0.0))
    }

    /// Builds a field from normalized Fourier coefficients of the samples.
    pub fn from_spectrum(grid: Arc<SpectralGrid>, carrier: f64, mut coeffs: Vec<C64>) -> Self {
        assert_eq!(coeffs.len(), grid.n());
        grid.inverse(&mut coeffs);
        Self { grid, carrier, decay: Decay::Exponential, data: coeffs }
    }

    /// Reinterprets the samples as carrying wavenumber `q` (samples unchanged).
    pub fn with_carrier(mut self, q: f64) -> Self {
        self.carrier = q;
        self
    }

    pub fn with_decay(mut self, decay: Decay) -> Self {
        self.decay = decay;
        self
    }

    /// Same physical function expressed with carrier `q`.
    pub fn to_carrier(&self, q: f64) -> Field {
        if q == self.carrier {
            return self.clone();
        }
        let dq = self.carrier - q;
        let data = self
            .grid
            .nodes()
            .iter()
            .zip(&self.data)
            .map(|(&x, &w)| w * C64::from_polar(1.0, dq * x))
            .collect();
        Field { grid: self.grid.clone(), carrier: q, decay: self.decay, data }
    }

    pub fn grid(&self) -> &Arc<SpectralGrid> {
        &self.grid
    }
    pub fn carrier(&self) -> f64 {
        self.carrier
    }
    pub fn decay(&self) -> Decay {
        self.decay
    }
    pub fn samples(&self) -> &[C64] {
        &self.data
    }
    pub fn samples_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }
    pub fn into_samples(self) -> Vec<C64> {
        self.data
    }

    /// Physical values `v(x_j) = e^{i q x_j} w_j`.
    pub fn physical(&self) -> Vec<C64> {
        self.to_carrier(0.0).data
    }

    /// Normalized Fourier coefficients of the samples (FFT order).
    pub fn spectrum(&self) -> Vec<C64> {
        let mut c = self.data.clone();
        self.grid.forward(&mut c);
        c
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn sup_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest edge modulus divided by the peak modulus (0 for the zero field).
    pub fn edge_ratio(&self) -> f64 {
        let peak = self.sup_norm();
        if peak == 0.0 {
            return 0.0;
        }
        let edge = self.data[0].norm().max(self.data[self.data.len() - 1].norm());
        edge / peak
    }

    pub fn check_decay(&self) -> Result<()> {
        let Some(threshold) = self.decay.threshold() else { return Ok(()) };
        let mut ratio = self.edge_ratio();
        if self.decay == Decay::Algebraic {
            ratio *= ratio;
        }
        if ratio > threshold {
            return Err(Error::GuardViolation { ratio, threshold });
        }
        Ok(())
    }

    fn map_spectrum(&self, mult: impl Fn(usize, f64) -> C64) -> Field {
        let mut c = self.spectrum();
        let q = self.carrier;
        for (j, (z, &k)) in c.iter_mut().zip(self.grid.wavenumbers()).enumerate() {
            *z *= mult(j, k + q);
        }
        self.grid.inverse(&mut c);
        Field { grid: self.grid.clone(), carrier: q, decay: self.decay, data: c }
    }

    /// `d^order/dx^order` of the physical function, spectrally.
    pub fn derivative(&self, order: u32) -> Field {
        let nyq = self.grid.nyquist_index();
        self.map_spectrum(|j, k| if j == nyq { C64::new(0.0, 0.0) } else { (I * k).powu(order) })
    }

    /// Applies the Fourier multiplier `sym(k + q)` to the samples.
    pub fn apply_symbol(&self, sym: impl Fn(f64) -> C64) -> Field {
        self.map_spectrum(|_, k| sym(k))
    }

    /// Shift by `y`: returns `v(x - y)`.
    pub fn translate(&self, y: f64) -> Field {
        let phase = C64::from_polar(1.0, -self.carrier * y);
        let mut c = self.spectrum();
        for (z, &k) in c.iter_mut().zip(self.grid.wavenumbers()) {
            *z *= C64::from_polar(1.0, -k * y) * phase;
        }
        self.grid.inverse(&mut c);
        Field { grid: self.grid.clone(), carrier: self.carrier, decay: self.decay, data: c }
    }

    /// `H^m` norm: `(2L sum (1 + (k+q)^2)^m |c_k|^2)^{1/2}`.
    pub fn hm_norm(&self, m: u32) -> f64 {
        let c = self.spectrum();
        let q = self.carrier;
        let s: f64 = c
            .iter()
            .zip(self.grid.wavenumbers())
            .map(|(z, &k)| (1.0 + (k + q) * (k + q)).powi(m as i32) * z.norm_sqr())
            .sum();
        (2.0 * self.grid.half_length() * s).sqrt()
    }

    /// `L^2` norm (Fourier side; identical to `hm_norm(0)`).
    pub fn l2_norm(&self) -> f64 {
        self.hm_norm(0)
    }

    /// `||v||_p^p` by the trapezoid rule (rectangle rule on the periodic grid).
    pub fn lp_pow(&self, p: u32) -> f64 {
        let dx = self.grid.dx();
        self.data.iter().map(|z| z.norm_sqr().powf(p as f64 / 2.0)).sum::<f64>() * dx
    }

    pub fn lp_norm(&self, p: u32) -> f64 {
        self.lp_pow(p).powf(1.0 / p as f64)
    }

    /// Real inner product `Re int v conj(w) dx`.
    pub fn inner(&self, other: &Field) -> f64 {
        let other = self.aligned(other);
        let dx = self.grid.dx();
        self.data.iter().zip(&other.data).map(|(a, b)| (a * b.conj()).re).sum::<f64>() * dx
    }

    /// Complex `H^m` pairing `int (1 + xi^2)^m v_hat conj(w_hat)`.
    pub fn hm_pairing(&self, other: &Field, m: u32) -> C64 {
        let other = self.aligned(other);
        let (a, b) = (self.spectrum(), other.spectrum());
        let q = self.carrier;
        let s: C64 = a
            .iter()
            .zip(&b)
            .zip(self.grid.wavenumbers())
            .map(|((x, y), &k)| x * y.conj() * (1.0 + (k + q) * (k + q)).powi(m as i32))
            .sum();
        s * (2.0 * self.grid.half_length())
    }

    /// `other` re-expressed on this field's carrier (clone-free when equal).
    fn aligned<'a>(&self, other: &'a Field) -> std::borrow::Cow<'a, Field> {
        assert!(self.grid.same_as(&other.grid), "fields live on different grids");
        if other.carrier == self.carrier {
            std::borrow::Cow::Borrowed(other)
        } else {
            std::borrow::Cow::Owned(other.to_carrier(self.carrier))
        }
    }

    pub fn scale(&self, a: f64) -> Field {
        self.map(|z| z * a)
    }

    pub fn scale_c(&self, a: C64) -> Field {
        self.map(|z| z * a)
    }

    /// Pointwise map of the samples (carrier and decay class kept).
    pub fn map(&self, f: impl Fn(C64) -> C64) -> Field {
        Field {
            grid: self.grid.clone(),
            carrier: self.carrier,
            decay: self.decay,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    /// `self + a * other`.
    pub fn axpy(&self, a: C64, other: &Field) -> Field {
        let other = self.aligned(other);
        let data = self.data.iter().zip(&other.data).map(|(x, y)| x + a * y).collect();
        Field { grid: self.grid.clone(), carrier: self.carrier, decay: self.decay, data }
    }

    pub fn add(&self, other: &Field) -> Field {
        self.axpy(C64::new(1.0, 0.0), other)
    }

    pub fn sub(&self, other: &Field) -> Field {
        self.axpy(C64::new(-1.0, 0.0), other)
    }

    /// Spectral antiderivative of the physical function, zero at the left
    /// edge: the mean contributes `mean * (x - x_0)` and the oscillating part
    /// is integrated mode by mode. Returned with carrier 0.
    pub fn antiderivative_from_left(&self) -> Field {
        let f = self.to_carrier(0.0);
        let real_input = f.data.iter().all(|z| z.im == 0.0);
        let grid = &f.grid;
        let mut c = f.spectrum();
        let mean = c[0];
        c[0] = C64::new(0.0, 0.0);
        c[grid.nyquist_index()] = C64::new(0.0, 0.0);
        for (z, &k) in c.iter_mut().zip(grid.wavenumbers()).skip(1) {
            *z /= I * k;
        }
        grid.inverse(&mut c);
        let x0 = grid.nodes()[0];
        let g0 = c[0];
        let mut data: Vec<C64> =
            grid.nodes().iter().zip(&c).map(|(&x, &g)| mean * (x - x0) + g - g0).collect();
        if real_input {
            data.iter_mut().for_each(|z| z.im = 0.0);
        }
        Field { grid: grid.clone(), carrier: 0.0, decay: Decay::Periodic, data }
    }
}

/// Scratch space for exact products of band-limited fields: spectra are
/// zero-padded to `3N` modes, multiplied pointwise, and truncated back, which
/// leaves products of degree up to five free of aliasing.
pub struct Padded {
    grid: Arc<SpectralGrid>,
    scratch: Vec<C64>,
}

impl Padded {
    pub fn new(grid: Arc<SpectralGrid>) -> Self {
        let len = grid
            .fwd3
            .get_inplace_scratch_len()
            .max(grid.inv3.get_inplace_scratch_len());
        Self { grid, scratch: vec![C64::new(0.0, 0.0); len] }
    }

    pub fn grid(&self) -> &Arc<SpectralGrid> {
        &self.grid
    }

    /// Normalized `N`-mode spectrum to values on the `3N`-point grid.
    /// The Nyquist mode is dropped.
    pub fn values(&mut self, spec: &[C64], out: &mut [C64]) {
        let n = self.grid.n();
        debug_assert_eq!(out.len(), 3 * n);
        out.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
        out[..n / 2].copy_from_slice(&spec[..n / 2]);
        out[2 * n + n / 2 + 1..].copy_from_slice(&spec[n / 2 + 1..]);
        self.grid.inv3.process_with_scratch(out, &mut self.scratch);
    }

    /// `3N`-grid values (overwritten) back to a truncated `N`-mode spectrum.
    pub fn truncate(&mut self, vals: &mut [C64], spec: &mut [C64]) {
        let n = self.grid.n();
        self.grid.fwd3.process_with_scratch(vals, &mut self.scratch);
        let s = 1.0 / (3 * n) as f64;
        for j in 0..n / 2 {
            spec[j] = vals[j] * s;
        }
        spec[n / 2] = C64::new(0.0, 0.0);
        for j in n / 2 + 1..n {
            spec[j] = vals[j + 2 * n] * s;
        }
    }
}

/// Dealiased pointwise combination of up to four fields sharing one grid and
/// carrier. `f` receives the values of the inputs at each padded node.
pub fn dealias_pad(inputs: &[&Field], f: impl Fn(&[C64]) -> C64) -> Field {
    assert!(!inputs.is_empty() && inputs.len() <= 4);
    let grid = inputs[0].grid.clone();
    let carrier = inputs[0].carrier;
    let n = grid.n();
    let mut pad = Padded::new(grid.clone());
    let vals: Vec<Vec<C64>> = inputs
        .iter()
        .map(|fld| {
            let mut v = vec![C64::new(0.0, 0.0); 3 * n];
            pad.values(&fld.to_carrier(carrier).spectrum(), &mut v);
            v
        })
        .collect();
    let mut point = [C64::new(0.0, 0.0); 4];
    let mut prod: Vec<C64> = (0..3 * n)
        .map(|l| {
            for (p, v) in point.iter_mut().zip(&vals) {
                *p = v[l];
            }
            f(&point[..inputs.len()])
        })
        .collect();
    let mut spec = vec![C64::new(0.0, 0.0); n];
    pad.truncate(&mut prod, &mut spec);
    Field::from_spectrum(grid, carrier, spec)
}
