//! Acceptance suite: every criterion at its stated tolerance, one PASS/FAIL
//! line each. Set `ACCEPTANCE_ONLY=3,7` to run a subset.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use soliton_lab::evolve::{self, EvolveConfig};
use soliton_lab::functionals::{self, Sign};
use soliton_lab::params::{self, ModelParams, Region};
use soliton_lab::soliton::{self, Gauge, SolitonProfile};
use soliton_lab::spectral::{Field, SpectralGrid, C64};
use soliton_lab::stability::{self, PerturbationKind, StabilityConfig};
use soliton_lab::variational::{self, MinimizeOptions};
use soliton_lab::Result;

struct Verdict {
    pass: bool,
    summary: String,
    notes: Vec<String>,
}

impl Verdict {
    fn new(pass: bool, summary: impl Into<String>) -> Self {
        Self { pass, summary: summary.into(), notes: Vec::new() }
    }
    fn note(mut self, n: impl Into<String>) -> Self {
        self.notes.push(n.into());
        self
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn grid(l: f64, n: usize) -> Arc<SpectralGrid> {
    SpectralGrid::new(l, n).expect("valid grid")
}

// closed forms against grid quadrature
fn c01() -> Result<Verdict> {
    let interior = grid(40.0, 2048);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for b in [-0.25, -3.0 / 16.0, -0.1, 0.0, 0.5] {
        let p = ModelParams::from_b(b);
        let (lo, hi) = match p.velocity_cutoff() {
            None => (-0.8, 0.75),
            Some(cut) if cut == 0.0 => (-0.85, -0.05),
            Some(cut) => (-0.85, -cut - 0.05),
        };
        for j in 0..9 {
            let c = 2.0 * (lo + (hi - lo) * j as f64 / 8.0);
            let v = SolitonProfile::new(1.0, c, &p)?.sample_varphi(&interior);
            let q = functionals::invariants_v(&v, &p)?;
            let cf = soliton::closed_form_invariants(1.0, c, &p)?;
            worst = worst.max(rel(q.mass, cf.mass)).max(rel(q.momentum, cf.momentum)).max(rel(q.energy, cf.energy));
            count += 1;
        }
    }
    // beyond the window Phi^2 ~ 4/(c x^2)
    let long = grid(400.0, 16384);
    let l = long.half_length();
    let mut worst_alg: f64 = 0.0;
    for b in [-0.15, -0.1, -0.05, 0.1, 0.3] {
        let p = ModelParams::from_b(b);
        let c = 2.0;
        let v = SolitonProfile::new(1.0, c, &p)?.sample_varphi(&long);
        let q = functionals::invariants_v(&v, &p)?;
        let cf = soliton::closed_form_invariants(1.0, c, &p)?;
        let mass = q.mass + 8.0 / (c * l);
        let momentum = q.momentum - 4.0 / l + 8.0 / (3.0 * c * c * l.powi(3));
        let energy = q.energy + c / l;
        worst_alg = worst_alg.max(rel(mass, cf.mass)).max(rel(momentum, cf.momentum)).max(rel(energy, cf.energy));
        count += 1;
    }
    Ok(Verdict::new(
        worst < 1e-8 && worst_alg < 1e-3 && count == 50,
        format!("{count} pairs; interior max rel err {worst:.2e} (< 1e-8), algebraic {worst_alg:.2e} (< 1e-3)"),
    ))
}

// d_omega M against a central difference, and d_ww = d_omega M / 2
fn c02() -> Result<Verdict> {
    let mut worst_fd: f64 = 0.0;
    let mut worst_h: f64 = 0.0;
    for (omega, c, b) in [(1.0, 0.5, -3.0 / 32.0), (1.0, -1.0, -0.1), (2.0, 1.3, 0.0), (1.0, -1.5, -0.25), (0.5, 0.8, 0.5)] {
        let p = ModelParams::from_b(b);
        let h = 1e-5;
        let fd = (soliton::mass_closed(omega + h, c, &p)? - soliton::mass_closed(omega - h, c, &p)?) / (2.0 * h);
        let exact = soliton::dmass_domega_closed(omega, c, &p)?;
        worst_fd = worst_fd.max(rel(fd, exact));
        let hess = soliton::hessian_d(omega, c, &p, None)?;
        worst_h = worst_h.max(rel(hess.d_ww, 0.5 * exact));
    }
    Ok(Verdict::new(
        worst_fd < 1e-6 && worst_h < 1e-4,
        format!("5 points; d_omega M fd rel err {worst_fd:.2e} (< 1e-6), d_ww vs half {worst_h:.2e} (< 1e-4)"),
    ))
}

// det d'' against the closed form; sign follows -P
fn c03() -> Result<Verdict> {
    let mut pts: Vec<(f64, f64, f64)> = vec![
        (-0.25, 1.0, -0.6),
        (-0.25, 2.0, -0.75),
        (-0.25, 1.0, -0.9),
        (-0.1, 1.0, -0.8),
        (-0.1, 1.0, -0.3),
        (-0.1, 2.0, 0.2),
        (-0.1, 1.0, 0.6),
        (-0.1, 0.5, 0.9),
        (-0.05, 1.0, 0.0),
        (-0.05, 1.0, 0.5),
    ];
    for b in [0.5, 0.2] {
        let ss = params::s_star(b)?;
        for (omega, s) in [
            (1.0, ss - 0.3),
            (1.0, ss - 0.15),
            (2.0, ss - 0.2),
            (1.0, ss + 0.3 * (1.0 - ss)),
            (2.0, ss + 0.5 * (1.0 - ss)),
        ] {
            pts.push((b, omega, s));
        }
    }
    let mut worst: f64 = 0.0;
    let mut signs_ok = true;
    let mut negative_b_ok = true;
    let (mut pos, mut neg) = (0, 0);
    for &(b, omega, s) in &pts {
        let p = ModelParams::from_b(b);
        let c = 2.0 * s * omega.sqrt();
        let h = soliton::hessian_d(omega, c, &p, None)?;
        worst = worst.max(rel(h.det, h.closed_det));
        let mom = soliton::momentum_closed(omega, c, &p)?;
        signs_ok &= h.det.signum() == -mom.signum();
        if b < 0.0 {
            negative_b_ok &= h.det < 0.0;
        } else if h.det > 0.0 {
            pos += 1;
        } else {
            neg += 1;
        }
    }
    Ok(Verdict::new(
        pts.len() == 20 && worst < 1e-4 && signs_ok && negative_b_ok && pos > 0 && neg > 0,
        format!(
            "{} points; max rel err {worst:.2e} (< 1e-4); b<0 all negative: {negative_b_ok}; b>0 det>0 at {pos}, <0 at {neg}; sign(det) = -sign(P): {signs_ok}",
            pts.len()
        ),
    ))
}

// sign of the momentum along s, and P(s*) = 0 for b = 0.5
fn c04() -> Result<Verdict> {
    let mut ok = true;
    let mut checked = 0;
    let mut details = Vec::new();
    for b in [-0.25, -0.1, 0.0, 0.5] {
        let p = ModelParams::from_b(b);
        let ss = params::s_star(b).ok();
        let mut bad = 0;
        for j in 1..=200 {
            let s = -1.0 + 2.0 * j as f64 / 200.0;
            if params::classify(1.0, 2.0 * s, &p)? == Region::Inadmissible {
                continue;
            }
            let mom = soliton::momentum_closed(1.0, 2.0 * s, &p)?;
            let expect_ok = match ss {
                Some(st) if s > st => mom < 0.0,
                Some(_) => mom > 0.0,
                None if b == 0.0 && s == 1.0 => mom.abs() < 1e-12,
                None => mom > 0.0,
            };
            checked += 1;
            if !expect_ok {
                bad += 1;
            }
        }
        ok &= bad == 0;
        details.push(format!("b={b}: {bad} violations"));
    }
    let ss = params::s_star(0.5)?;
    let at = soliton::momentum_closed(1.0, 2.0 * ss, &ModelParams::from_b(0.5))?;
    Ok(Verdict::new(
        ok && at.abs() < 1e-10,
        format!("{checked} admissible samples, {}; |P(s*)| = {:.1e} at s* = {ss:.12} (< 1e-10)", details.join(", "), at.abs()),
    ))
}

// exponential solitons approach the algebraic one
fn c05() -> Result<Verdict> {
    let p = ModelParams::from_b(-0.1);
    let g = grid(400.0, 16384);
    let s_list = [0.9, 0.99, 0.999];
    let mut decreasing = true;
    let mut m1_last = f64::NAN;
    let mut rows = Vec::new();
    for m in 0..=2 {
        let study = soliton::converge_to_algebraic(&s_list, m, &p, &g, Gauge::Dnls, 1e-4)?;
        let d: Vec<f64> = study.entries.iter().map(|e| e.distance).collect();
        decreasing &= d.windows(2).all(|w| w[1] < w[0]);
        if m == 1 {
            m1_last = d[2];
        }
        rows.push(format!("H^{m}: {:.4e} {:.4e} {:.4e}", d[0], d[1], d[2]));
    }
    Ok(Verdict::new(
        decreasing && m1_last < 1e-2,
        format!("strictly decreasing: {decreasing}; H^1 distance at s=0.999 {m1_last:.4e} (< 1e-2)"),
    )
    .note(rows.join("; ")))
}

fn random_field(g: &Arc<SpectralGrid>, rng: &mut ChaCha8Rng) -> Field {
    let bumps: Vec<(f64, f64, f64, f64, f64)> = (0..3)
        .map(|_| {
            (
                rng.gen_range(0.1..1.2),
                rng.gen_range(0.7..3.0),
                rng.gen_range(-6.0..6.0),
                rng.gen_range(-1.5..1.5),
                rng.gen_range(-PI..PI),
            )
        })
        .collect();
    Field::from_fn(g.clone(), move |x| {
        bumps.iter().map(|&(a, w, x0, k, th)| C64::from_polar(a * (-((x - x0) / w).powi(2)).exp(), k * x + th)).sum()
    })
}

// the gauge map and the action identity
fn c06() -> Result<Verdict> {
    let g = grid(30.0, 1024);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut inv_err: f64 = 0.0;
    let mut id_err: f64 = 0.0;
    for _ in 0..20 {
        let u = random_field(&g, &mut rng);
        let b = rng.gen_range(-0.25..0.5);
        let p = ModelParams::from_b(b);
        let v = functionals::gauge_g(&u)?;
        let iu = functionals::invariants_u(&u, b)?;
        let iv = functionals::invariants_v(&v, &p)?;
        inv_err = inv_err.max((iu.energy - iv.energy).abs()).max((iu.mass - iv.mass).abs()).max((iu.momentum - iv.momentum).abs());
        let back = functionals::gauge_g_inverse(&v)?;
        id_err = id_err.max(back.sub(&u).l2_norm() / u.l2_norm());
    }
    let g = grid(40.0, 2048);
    let mut act_err: f64 = 0.0;
    for (omega, c, b) in [(1.0, 0.0, -0.1), (1.0, 1.2, -0.1), (2.0, -1.0, 0.0), (1.0, -1.5, -0.25), (1.0, 0.5, 0.5)] {
        let p = ModelParams::from_b(b);
        let prof = SolitonProfile::new(omega, c, &p)?;
        let d = soliton::action_d(omega, c, &p)?;
        let s_mod = functionals::action_scal(&prof.sample_varphi(&g), omega, c, &p)?;
        let s_orig = functionals::action_s(&prof.sample_dnls(&g), omega, c, b)?;
        act_err = act_err.max(rel(s_mod, d)).max(rel(s_orig, d));
    }
    Ok(Verdict::new(
        inv_err < 1e-10 && id_err < 1e-10 && act_err < 1e-7,
        format!("20 fields: invariants abs err {inv_err:.1e} (< 1e-10), inverse rel err {id_err:.1e} (< 1e-10); action vs d rel err {act_err:.1e} (< 1e-7)"),
    ))
}

// the integrator reproduces exact solitons at fourth order
fn c07() -> Result<Verdict> {
    let p = ModelParams::from_b(0.0);
    let g = grid(40.0, 1024);
    let t_final = 2.0;
    let mut ok = true;
    let mut parts = Vec::new();
    for c in [0.0, 1.0] {
        let u0 = SolitonProfile::new(1.0, c, &p)?.sample_dnls(&g);
        let exact = u0.translate(c * t_final).scale_c(C64::from_polar(1.0, t_final));
        let err_at = |dt: f64| -> Result<(f64, f64)> {
            let cfg = EvolveConfig::new(Gauge::Dnls, p, &g, t_final).with_dt(dt);
            let traj = evolve::run(&u0, &cfg)?;
            Ok((traj.final_field.sub(&exact).hm_norm(1), traj.drift.max()))
        };
        let (err, drift) = err_at(1e-4)?;
        let (e1, _) = err_at(1e-3)?;
        let (e2, _) = err_at(5e-4)?;
        let ratio = e1 / e2;
        ok &= err < 1e-5 && drift < 1e-8 && (12.0..=20.0).contains(&ratio);
        parts.push(format!("c={c}: H^1 err {err:.2e}, drift {drift:.1e}, ratio {ratio:.2}"));
    }
    Ok(Verdict::new(ok, format!("{} (err < 1e-5, drift < 1e-8, ratio in [12, 20])", parts.join("; "))))
}

// Nehari minimization recovers the soliton
fn c08() -> Result<Verdict> {
    let mut ok = true;
    let mut parts = Vec::new();
    let mut notes = Vec::new();
    for (omega, c, gamma) in [(1.0, 0.0, 1.0), (1.0, 1.0, 0.5), (1.0, 2.0, 0.5)] {
        let p = ModelParams::from_gamma(gamma);
        let algebraic = params::classify(omega, c, &p)? == Region::AlgebraicBoundary;
        let g = if algebraic { grid(2000.0, 65536) } else { grid(40.0, 2048) };
        let init = variational::default_nehari_init(&g, omega, c, &p)?;
        let r = variational::nehari_minimize(omega, c, &p, &init, MinimizeOptions::default())?;
        let d = soliton::action_d(omega, c, &p)?;
        let reference = SolitonProfile::new(omega, c, &p)?.sample_varphi(&g);
        let fit = stability::orbital_fit(&r.minimizer, &reference);
        let aligned = reference.translate(fit.y).scale_c(C64::from_polar(1.0, fit.theta));
        let xd = functionals::x_norm(&r.minimizer.sub(&aligned), c);
        let value_err = rel(r.value, d);
        ok &= value_err < 1e-4 && fit.distance < 1e-3;
        parts.push(format!("({omega},{c},{gamma}): value rel err {value_err:.1e}, H^1 dist {:.2e}", fit.distance));
        notes.push(format!(
            "({omega},{c},{gamma}) on L={}, N={}: {} iterations, converged {}, X-norm dist {xd:.2e}",
            g.half_length(),
            g.n(),
            r.iterations,
            r.converged
        ));
    }
    let mut v = Verdict::new(ok, format!("{} (value < 1e-4, H^1 < 1e-3)", parts.join("; ")));
    for n in notes {
        v = v.note(n);
    }
    Ok(v)
}

fn mass_constrained_case(gamma: f64) -> Result<(bool, String)> {
    let (omega, c) = (1.0, -1.0);
    let p = ModelParams::from_gamma(gamma);
    let g = grid(40.0, 2048);
    let m = soliton::mass_closed(omega, c, &p)?;
    let init = variational::gaussian_with_mass(&g, m);
    let r = variational::mass_constrained_minimize(c, m, &p, &init, MinimizeOptions::default())?;
    let reference = SolitonProfile::new(omega, c, &p)?.sample_real(&g);
    let fit = stability::orbital_fit(&r.minimizer, &reference);
    let gn = variational::gn_constants(&g);
    let lower = -gn.c2 * c * c * m.powi(3);
    let lam_err = rel(r.multiplier, 0.75);
    let bounds = lower <= r.value && r.value < 0.0;
    Ok((
        fit.distance < 1e-3 && lam_err < 1e-3 && bounds,
        format!(
            "gamma={gamma}: H^1 dist {:.2e}, lambda {:.8} (rel err {lam_err:.1e}), value {:.6} in [{lower:.4}, 0): {bounds}",
            fit.distance, r.multiplier, r.value
        ),
    ))
}

// mass-constrained minimizer and its multiplier
fn c09() -> Result<Verdict> {
    let v = match mass_constrained_case(-0.5) {
        Ok((pass, msg)) => Verdict::new(pass, msg),
        Err(e) => Verdict::new(false, format!("gamma=-0.5, c=-1: {e}")),
    };
    let info = match mass_constrained_case(-0.25) {
        Ok((pass, msg)) => format!("same check at gamma=-0.25 (admissible): {msg} -> {}", if pass { "ok" } else { "off" }),
        Err(e) => format!("gamma=-0.25: {e}"),
    };
    Ok(v.note(info))
}

struct StabilityCase {
    b: f64,
    c: f64,
    l: f64,
    n: usize,
    comoving: bool,
    dt_modified: Option<f64>,
}

// perturbed solitons stay near the orbit
fn c10() -> Result<Verdict> {
    let cases = [
        StabilityCase { b: -0.1, c: 2.0, l: 50.0, n: 4096, comoving: true, dt_modified: Some(6e-5) },
        StabilityCase { b: -0.1, c: 0.0, l: 40.0, n: 1024, comoving: false, dt_modified: None },
        StabilityCase { b: -0.25, c: -1.5, l: 40.0, n: 1024, comoving: false, dt_modified: None },
    ];
    let (delta, t_final) = (1e-2, 20.0);
    let mut ok = true;
    let mut notes = Vec::new();
    for case in &cases {
        // scaling data sit in a well at the exponential points, which
        // exercises the K-sign check; reported but not gated
        let extra = (case.c != 2.0).then_some((Gauge::Modified, PerturbationKind::Scaling));
        let runs = [(Gauge::Dnls, PerturbationKind::RandomSmooth), (Gauge::Modified, PerturbationKind::RandomSmooth)];
        for (k, (eq, kind)) in runs.into_iter().chain(extra).enumerate() {
            let gated = k < 2;
            let mut cfg = StabilityConfig::new(grid(case.l, case.n), eq);
            cfg.comoving = case.comoving;
            cfg.seed = 1;
            if eq == Gauge::Modified {
                cfg.dt = case.dt_modified;
            }
            let t0 = Instant::now();
            let r = stability::stability_experiment(case.b, 1.0, case.c, delta, kind, t_final, &cfg)?;
            let ksign = r.k_sign_constant.unwrap_or(true);
            let cor = r.corridor_held.unwrap_or(true);
            let pass = r.blowup.is_none() && r.drift.max() < 1e-7 && r.ratio <= 10.0 && ksign && cor;
            if gated {
                ok &= pass;
            }
            notes.push(format!(
                "b={} c={} {:?} {kind}: ratio {:.3}, drift {:.1e}, blow-up {:?}, well {:?}, K sign constant {:?}, corridor eps {:?} held {:?}, dt {:.2e} [{:.0}s] {}",
                case.b,
                r.c,
                eq,
                r.ratio,
                r.drift.max(),
                r.blowup,
                r.initial_well,
                r.k_sign_constant,
                r.corridor.map(|c| c.epsilon),
                r.corridor_held,
                r.dt,
                t0.elapsed().as_secs_f64(),
                match (gated, pass) {
                    (false, _) => "(not gated)",
                    (true, true) => "ok",
                    (true, false) => "FAIL",
                }
            ));
        }
    }
    let mut v = Verdict::new(ok, "6 runs (3 configurations x 2 equations), delta 1e-2, T=20, random_smooth seed 1");
    for n in notes {
        v = v.note(n);
    }
    Ok(v)
}

// data below the mass threshold stay bounded
fn c11() -> Result<Verdict> {
    let g = grid(40.0, 1024);
    let width = 4.0;
    let mut ok = true;
    let mut parts = Vec::new();
    for b in [0.0, -0.1] {
        let threshold = params::mass_threshold(b)?;
        let amp = (0.9 * threshold / (width * PI.sqrt())).sqrt();
        let u0 = Field::from_real_fn(g.clone(), |x| amp * (-0.5 * (x / width).powi(2)).exp());
        let r = stability::global_bound_experiment(b, &u0, 20.0, None)?;
        ok &= r.bounded && r.below_threshold && r.blowup.is_none();
        parts.push(format!(
            "b={b}: M/M* {:.3}, H^1 {:.3} -> sup {:.3}, drift {:.1e}, bounded {}",
            r.mass / r.threshold,
            r.initial_h1,
            r.sup_h1,
            r.drift.max(),
            r.bounded
        ));
    }
    Ok(Verdict::new(ok, parts.join("; ")))
}

// the action identity and agreement of the two well families
fn c12() -> Result<Verdict> {
    let g = grid(30.0, 1024);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut id_err: f64 = 0.0;
    for _ in 0..100 {
        let v = random_field(&g, &mut rng);
        let p = ModelParams::from_b(rng.gen_range(-0.3..0.5));
        let (omega, c) = (rng.gen_range(0.2..3.0), rng.gen_range(-2.0..2.0));
        let s = functionals::action_scal(&v, omega, c, &p)?;
        let k = functionals::nehari_k(&v, omega, c, &p)?;
        let j = functionals::jc(&v, c, &p)?;
        id_err = id_err.max((s - (0.5 * k + j)).abs() / s.abs().max(1.0));
    }

    let g = grid(40.0, 1024);
    let margin = 1e-6;
    let (mut counted, mut agree, mut tried) = (0, 0, 0);
    let (mut plus, mut minus) = (0, 0);
    while counted < 100 && tried < 1000 {
        tried += 1;
        let b = [-0.1, 0.0][rng.gen_range(0..2)];
        let c = [-1.0, 0.0, 1.0][rng.gen_range(0..3)];
        let p = ModelParams::from_b(b);
        let prof = SolitonProfile::new(1.0, c, &p)?.sample_varphi(&g);
        let dl = rng.gen_range(0.01..0.1) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let v = stability::perturb(&prof.scale(1.0 + dl), 1e-3, PerturbationKind::RandomSmooth, rng.gen())?;
        let w = functionals::well_membership_tol(&v, 1.0, c, &p, margin)?;
        let (Some(a), Some(bb)) = (w.a, w.b) else { continue };
        counted += 1;
        if a == bb {
            agree += 1;
        }
        match a {
            Sign::Plus => plus += 1,
            Sign::Minus => minus += 1,
        }
    }
    Ok(Verdict::new(
        id_err < 1e-10 && counted == 100 && agree == counted,
        format!(
            "identity rel err {id_err:.1e} over 100 fields (< 1e-10); wells agree on {agree}/{counted} fields with margins > 1e-6 ({plus} in A+, {minus} in A-, {tried} drawn)"
        ),
    ))
}

fn main() {
    let only: Option<Vec<usize>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|t| t.trim().parse().ok()).collect());
    let criteria: [(&str, fn() -> Result<Verdict>); 12] = [
        ("closed forms vs quadrature", c01),
        ("mass derivative and Hessian diagonal", c02),
        ("Hessian determinant", c03),
        ("momentum sign pattern and s*", c04),
        ("convergence to the algebraic soliton", c05),
        ("gauge layer and action identity", c06),
        ("evolution fidelity", c07),
        ("Nehari minimization", c08),
        ("mass-constrained minimization", c09),
        ("stability evidence", c10),
        ("mass threshold", c11),
        ("potential-well identity and membership", c12),
    ];
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let id = i + 1;
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let t0 = Instant::now();
        let v = f().unwrap_or_else(|e| Verdict::new(false, format!("error: {e}")));
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!("[{tag}] {id:>2} {name} ({:.1}s): {}", t0.elapsed().as_secs_f64(), v.summary);
        for n in &v.notes {
            println!("         {n}");
        }
        if !v.pass {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria passed");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
