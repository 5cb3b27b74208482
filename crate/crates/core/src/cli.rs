//! Command-line front end.
//!
//! Every subcommand resolves a [`RunConfig`] from an optional TOML file and
//! flags (flags win), writes it as `config.toml` next to its results and
//! emits CSV tables plus a `summary.json`. Rerunning with
//! `--config <out>/config.toml` reproduces the outputs byte for byte.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::evolve::{self, EvolveConfig};
use crate::functionals::{self, ProfileEquation};
use crate::io::{self, fmt_f64, Table};
use crate::params::{self, ModelParams, WaveParams};
use crate::soliton::{self, Gauge, SolitonProfile};
use crate::spectral::{Field, SpectralGrid, C64};
use crate::stability::{self, PerturbationKind, StabilityConfig, StabilityReport};
use crate::variational::{self, MinimizeOptions};

#[derive(Parser, Debug)]
#[command(name = "soliton-lab", version, about = "Numerical laboratory for DNLS solitons with a quintic term")]
pub struct Cli {
    /// TOML run configuration; flags override its values
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// output directory (default: out/<command>)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Sample a soliton profile and its closed-form invariants
    #[command(allow_negative_numbers = true)]
    Profile {
        #[command(flatten)]
        p: ParamArgs,
        #[command(flatten)]
        g: GridArgs,
    },
    /// Grid invariants, actions and profile residuals of a soliton or a field dump
    #[command(allow_negative_numbers = true)]
    Invariants {
        #[command(flatten)]
        p: ParamArgs,
        #[command(flatten)]
        g: GridArgs,
        /// binary field dump to evaluate instead of the soliton
        #[arg(long)]
        field: Option<PathBuf>,
    },
    /// Finite-difference Hessian of d(omega, c) against the closed determinant
    #[command(allow_negative_numbers = true)]
    Hessian {
        #[command(flatten)]
        p: ParamArgs,
        /// finite-difference step
        #[arg(long)]
        h: Option<f64>,
    },
    /// Critical velocity s* and the momentum sign sweep
    #[command(allow_negative_numbers = true)]
    Sstar {
        #[command(flatten)]
        p: ParamArgs,
    },
    /// Mass threshold M*(b)
    #[command(allow_negative_numbers = true)]
    Threshold {
        #[command(flatten)]
        p: ParamArgs,
    },
    /// H^m distances from phi_{1,2s} to the algebraic soliton
    #[command(allow_negative_numbers = true)]
    Converge {
        #[command(flatten)]
        p: ParamArgs,
        #[command(flatten)]
        g: GridArgs,
        /// Sobolev order (0, 1 or 2)
        #[arg(long)]
        m: Option<u32>,
    },
    /// Evolve a (possibly perturbed) soliton
    #[command(allow_negative_numbers = true)]
    Evolve {
        #[command(flatten)]
        p: ParamArgs,
        #[command(flatten)]
        g: GridArgs,
        #[command(flatten)]
        e: EvolveArgs,
        #[command(flatten)]
        x: ExperimentArgs,
    },
    /// Orbital stability experiment, or a sweep of them
    #[command(allow_negative_numbers = true)]
    Stability {
        #[command(flatten)]
        p: ParamArgs,
        #[command(flatten)]
        g: GridArgs,
        #[command(flatten)]
        e: EvolveArgs,
        #[command(flatten)]
        x: ExperimentArgs,
        #[command(flatten)]
        sw: SweepArgs,
    },
    /// Minimize the action on the Nehari manifold
    #[command(allow_negative_numbers = true)]
    Nehari {
        #[command(flatten)]
        p: ParamArgs,
        #[command(flatten)]
        g: GridArgs,
        #[command(flatten)]
        v: SolverArgs,
    },
    /// Minimize calE_c at fixed mass (c < 0)
    #[command(allow_negative_numbers = true)]
    Massmin {
        #[command(flatten)]
        p: ParamArgs,
        #[command(flatten)]
        g: GridArgs,
        #[command(flatten)]
        v: SolverArgs,
    },
    /// Aggregate every summary.json below a directory into one table
    Report {
        /// directory to scan (default: out)
        dir: Option<PathBuf>,
    },
}

#[derive(Args, Debug, Clone, Default)]
pub struct ParamArgs {
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long)]
    pub omega: Option<f64>,
    #[arg(long)]
    pub c: Option<f64>,
    /// speed s with c = 2 s sqrt(omega); a comma list for `converge`
    #[arg(long, value_delimiter = ',')]
    pub s: Vec<f64>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct GridArgs {
    /// half window length L
    #[arg(long = "L", alias = "half-length")]
    pub half_length: Option<f64>,
    /// number of grid points
    #[arg(long = "N", alias = "points")]
    pub n: Option<usize>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct EvolveArgs {
    #[arg(long)]
    pub dt: Option<f64>,
    /// final time
    #[arg(long = "T", alias = "t-final")]
    pub t_final: Option<f64>,
    /// dnls or modified
    #[arg(long, value_parser = parse_gauge)]
    pub equation: Option<Gauge>,
    /// steps between snapshots
    #[arg(long)]
    pub stride: Option<usize>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct ExperimentArgs {
    #[arg(long)]
    pub delta: Option<f64>,
    /// even_bump, odd_bump, random_smooth or scaling
    #[arg(long)]
    pub kind: Option<PerturbationKind>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// recentre on the fitted soliton position at every snapshot
    #[arg(long)]
    pub comoving: bool,
}

#[derive(Args, Debug, Clone, Default)]
pub struct SweepArgs {
    /// sweep over these perturbation sizes
    #[arg(long, value_delimiter = ',')]
    pub deltas: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    pub seeds: Vec<u64>,
    #[arg(long, value_delimiter = ',')]
    pub kinds: Vec<PerturbationKind>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct SolverArgs {
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// target mass for `massmin` (default: the soliton mass)
    #[arg(long)]
    pub mass: Option<f64>,
}

fn parse_gauge(s: &str) -> std::result::Result<Gauge, String> {
    match s {
        "dnls" => Ok(Gauge::Dnls),
        "modified" => Ok(Gauge::Modified),
        _ => Err(format!("expected 'dnls' or 'modified', got '{s}'")),
    }
}

/// Serializable run description; every field is optional in the file.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    pub params: ParamBlock,
    pub grid: GridBlock,
    pub evolve: EvolveBlock,
    pub experiment: ExperimentBlock,
    pub solver: SolverBlock,
    pub sweep: SweepBlock,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamBlock {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_list: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridBlock {
    #[serde(rename = "L", skip_serializing_if = "Option::is_none")]
    pub half_length: Option<f64>,
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolveBlock {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(rename = "T", skip_serializing_if = "Option::is_none")]
    pub t_final: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub equation: Option<Gauge>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stride: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentBlock {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<PerturbationKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comoving: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverBlock {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mass: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepBlock {
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub deltas: Vec<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub seeds: Vec<u64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub kinds: Vec<PerturbationKind>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    fn apply_params(&mut self, p: &ParamArgs, list_s: bool) {
        set(&mut self.params.b, p.b);
        set(&mut self.params.omega, p.omega);
        set(&mut self.params.c, p.c);
        if !p.s.is_empty() {
            if list_s {
                self.params.s_list = Some(p.s.clone());
            } else {
                self.params.s = p.s.first().copied();
            }
        }
    }

    fn apply_grid(&mut self, g: &GridArgs) {
        set(&mut self.grid.half_length, g.half_length);
        set(&mut self.grid.n, g.n);
    }

    fn apply_evolve(&mut self, e: &EvolveArgs) {
        set(&mut self.evolve.dt, e.dt);
        set(&mut self.evolve.t_final, e.t_final);
        set(&mut self.evolve.equation, e.equation);
        set(&mut self.evolve.stride, e.stride);
    }

    fn apply_experiment(&mut self, x: &ExperimentArgs) {
        set(&mut self.experiment.delta, x.delta);
        set(&mut self.experiment.kind, x.kind);
        set(&mut self.experiment.seed, x.seed);
        if x.comoving {
            self.experiment.comoving = Some(true);
        }
    }

    fn apply_solver(&mut self, v: &SolverArgs) {
        set(&mut self.solver.max_iters, v.max_iters);
        set(&mut self.solver.tol, v.tol);
        set(&mut self.solver.mass, v.mass);
    }

    fn model(&self) -> ModelParams {
        ModelParams::from_b(self.params.b.unwrap_or(0.0))
    }

    /// Fills `b`, `omega`, `c` (from `s` when given) and returns the model.
    fn resolve_wave(&mut self) -> Result<(ModelParams, WaveParams)> {
        let b = *self.params.b.get_or_insert(0.0);
        let omega = *self.params.omega.get_or_insert(1.0);
        if !(omega > 0.0) {
            return Err(Error::Config(format!("omega must be positive, got {omega}")));
        }
        let c = match (self.params.c, self.params.s) {
            (Some(c), Some(s)) if (c - 2.0 * s * omega.sqrt()).abs() > 1e-12 * c.abs().max(1.0) => {
                return Err(Error::Config(format!("both c={c} and s={s} given and c != 2 s sqrt(omega)")));
            }
            (Some(c), _) => c,
            (None, Some(s)) => 2.0 * s * omega.sqrt(),
            (None, None) => 0.0,
        };
        let model = ModelParams::from_b(b);
        let wave = WaveParams::new(omega, c, &model)?;
        self.params.c = Some(wave.c);
        self.params.s = Some(wave.s);
        Ok((model, wave))
    }

    fn resolve_grid(&mut self, algebraic: bool) -> Result<Arc<SpectralGrid>> {
        let (l0, n0) = if algebraic { (400.0, 16384) } else { (40.0, 2048) };
        let l = *self.grid.half_length.get_or_insert(l0);
        let n = *self.grid.n.get_or_insert(n0);
        SpectralGrid::new(l, n)
    }

    fn options(&mut self) -> MinimizeOptions {
        let d = MinimizeOptions::default();
        MinimizeOptions {
            max_iters: *self.solver.max_iters.get_or_insert(d.max_iters),
            tol: *self.solver.tol.get_or_insert(d.tol),
        }
    }
}

fn set<T>(slot: &mut Option<T>, v: Option<T>) {
    if v.is_some() {
        *slot = v;
    }
}

/// Outcome of a subcommand: results were written, but a numerical failure
/// (blow-up, non-convergence) may still set a nonzero exit status.
pub struct Outcome {
    pub out_dir: PathBuf,
    pub numerical_failure: Option<String>,
}

const EXIT_NUMERICAL: i32 = 3;

/// Parses the process arguments, runs, and returns the exit status.
pub fn main_from_env() -> i32 {
    let cli = Cli::parse();
    match run(cli) {
        Ok(o) => {
            eprintln!("results written to {}", o.out_dir.display());
            match o.numerical_failure {
                Some(msg) => {
                    eprintln!("numerical failure: {msg}");
                    EXIT_NUMERICAL
                }
                None => 0,
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Profile { .. } => "profile",
        Command::Invariants { .. } => "invariants",
        Command::Hessian { .. } => "hessian",
        Command::Sstar { .. } => "sstar",
        Command::Threshold { .. } => "threshold",
        Command::Converge { .. } => "converge",
        Command::Evolve { .. } => "evolve",
        Command::Stability { .. } => "stability",
        Command::Nehari { .. } => "nehari",
        Command::Massmin { .. } => "massmin",
        Command::Report { .. } => "report",
    }
}

pub fn run(cli: Cli) -> Result<Outcome> {
    let name = command_name(&cli.command);
    if let Command::Report { dir } = &cli.command {
        let dir = dir.clone().unwrap_or_else(|| PathBuf::from("out"));
        let out = cli.out.clone().unwrap_or_else(|| dir.clone());
        report(&dir, &out)?;
        return Ok(Outcome { out_dir: out, numerical_failure: None });
    }
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(c) = &cfg.command {
        if c != name {
            return Err(Error::Config(format!("config file is for '{c}' but the subcommand is '{name}'")));
        }
    }
    cfg.command = Some(name.to_string());
    match &cli.command {
        Command::Profile { p, g } => {
            cfg.apply_params(p, false);
            cfg.apply_grid(g);
        }
        Command::Invariants { p, g, field } => {
            cfg.apply_params(p, false);
            cfg.apply_grid(g);
            set(&mut cfg.experiment.field, field.clone());
        }
        Command::Hessian { p, h } => {
            cfg.apply_params(p, false);
            set(&mut cfg.experiment.h, *h);
        }
        Command::Sstar { p } | Command::Threshold { p } => cfg.apply_params(p, false),
        Command::Converge { p, g, m } => {
            cfg.apply_params(p, true);
            cfg.apply_grid(g);
            set(&mut cfg.experiment.m, *m);
        }
        Command::Evolve { p, g, e, x } => {
            cfg.apply_params(p, false);
            cfg.apply_grid(g);
            cfg.apply_evolve(e);
            cfg.apply_experiment(x);
        }
        Command::Stability { p, g, e, x, sw } => {
            cfg.apply_params(p, false);
            cfg.apply_grid(g);
            cfg.apply_evolve(e);
            cfg.apply_experiment(x);
            if !sw.deltas.is_empty() {
                cfg.sweep.deltas = sw.deltas.clone();
            }
            if !sw.seeds.is_empty() {
                cfg.sweep.seeds = sw.seeds.clone();
            }
            if !sw.kinds.is_empty() {
                cfg.sweep.kinds = sw.kinds.clone();
            }
        }
        Command::Nehari { p, g, v } | Command::Massmin { p, g, v } => {
            cfg.apply_params(p, false);
            cfg.apply_grid(g);
            cfg.apply_solver(v);
        }
        Command::Report { .. } => unreachable!(),
    }
    let out = cli.out.clone().unwrap_or_else(|| Path::new("out").join(name));
    execute(cfg, &out)
}

/// Runs a resolved or partial configuration, writing into `out`.
pub fn execute(mut cfg: RunConfig, out: &Path) -> Result<Outcome> {
    let name = cfg.command.clone().ok_or_else(|| Error::Config("no command given".into()))?;
    std::fs::create_dir_all(out)?;
    let (summary, failure) = match name.as_str() {
        "profile" => cmd_profile(&mut cfg, out)?,
        "invariants" => cmd_invariants(&mut cfg)?,
        "hessian" => cmd_hessian(&mut cfg)?,
        "sstar" => cmd_sstar(&mut cfg, out)?,
        "threshold" => cmd_threshold(&mut cfg)?,
        "converge" => cmd_converge(&mut cfg, out)?,
        "evolve" => cmd_evolve(&mut cfg, out)?,
        "stability" => cmd_stability(&mut cfg, out)?,
        "nehari" => cmd_nehari(&mut cfg, out)?,
        "massmin" => cmd_massmin(&mut cfg, out)?,
        other => return Err(Error::Config(format!("unknown command '{other}'"))),
    };
    std::fs::write(out.join("config.toml"), cfg.to_toml()?)?;
    let mut summary = summary;
    if let Value::Object(map) = &mut summary {
        map.insert("command".into(), json!(name));
    }
    io::write_json(&out.join("summary.json"), &summary)?;
    Ok(Outcome { out_dir: out.to_path_buf(), numerical_failure: failure })
}

type CmdResult = Result<(Value, Option<String>)>;

fn wave_json(model: &ModelParams, w: &WaveParams) -> Value {
    json!({
        "b": model.b,
        "gamma": model.gamma,
        "omega": w.omega,
        "c": w.c,
        "s": w.s,
        "region": w.region.to_string(),
    })
}

fn cmd_profile(cfg: &mut RunConfig, out: &Path) -> CmdResult {
    let (model, wave) = cfg.resolve_wave()?;
    let grid = cfg.resolve_grid(wave.is_algebraic())?;
    let prof = SolitonProfile::new(wave.omega, wave.c, &model)?;
    let phi = prof.sample_dnls(&grid).physical();
    let mut t = Table::new(["x", "Phi", "re_phi", "im_phi"]);
    for (x, z) in grid.nodes().iter().zip(&phi) {
        t.push_floats(&[*x, prof.phi(*x), z.re, z.im]);
    }
    t.write(&out.join("profile.csv"))?;
    let closed = soliton::closed_form_invariants(wave.omega, wave.c, &model)?;
    Ok((json!({ "params": wave_json(&model, &wave), "closed_form": closed }), None))
}

fn cmd_invariants(cfg: &mut RunConfig) -> CmdResult {
    let (model, wave) = cfg.resolve_wave()?;
    let (omega, c) = (wave.omega, wave.c);
    let from_file = cfg.experiment.field.clone();
    let (u, soliton) = match &from_file {
        Some(path) => {
            let f = io::read_field_binary(path)?;
            cfg.grid.half_length = Some(f.grid().half_length());
            cfg.grid.n = Some(f.grid().n());
            (f, None)
        }
        None => {
            let grid = cfg.resolve_grid(wave.is_algebraic())?;
            let prof = SolitonProfile::new(omega, c, &model)?;
            (prof.sample_dnls(&grid), Some(prof))
        }
    };
    let inv_u = functionals::invariants_u(&u, model.b)?;
    let v = functionals::gauge_g(&u)?;
    let inv_v = functionals::invariants_v(&v, &model)?;
    let mut summary = json!({
        "params": wave_json(&model, &wave),
        "grid": { "L": u.grid().half_length(), "N": u.grid().n() },
        "original": inv_u,
        "gauged": inv_v,
        "action_S": functionals::action_s(&u, omega, c, model.b)?,
        "action_calS": functionals::action_scal(&v, omega, c, &model)?,
        "nehari_K": functionals::nehari_k(&v, omega, c, &model)?,
        "jc": functionals::jc(&v, c, &model)?,
        "closed_form": soliton::closed_form_invariants(omega, c, &model)?,
    });
    if let Some(prof) = soliton {
        let grid = u.grid();
        let res = json!({
            "dnls": functionals::elliptic_residual(&u, omega, c, &model, ProfileEquation::Dnls)?,
            "real": functionals::elliptic_residual(&prof.sample_real(grid), omega, c, &model, ProfileEquation::Real)?,
            "modified": functionals::elliptic_residual(&prof.sample_varphi(grid), omega, c, &model, ProfileEquation::Modified)?,
        });
        summary["residuals"] = res;
    }
    Ok((summary, None))
}

fn cmd_hessian(cfg: &mut RunConfig) -> CmdResult {
    let (model, wave) = cfg.resolve_wave()?;
    let h = soliton::hessian_d(wave.omega, wave.c, &model, cfg.experiment.h)?;
    cfg.experiment.h = Some(h.step);
    Ok((
        json!({
            "params": wave_json(&model, &wave),
            "d_ww": h.d_ww, "d_wc": h.d_wc, "d_cc": h.d_cc,
            "fd_det": h.det, "closed_det": h.closed_det, "step": h.step,
        }),
        None,
    ))
}

fn cmd_sstar(cfg: &mut RunConfig, out: &Path) -> CmdResult {
    let b = *cfg.params.b.get_or_insert(0.0);
    let model = cfg.model();
    let s_star = params::s_star(b)?;
    // momentum of phi_{1,2s} across the admissible speeds
    let lo = match model.velocity_cutoff() {
        Some(s) if model.gamma < 0.0 => s,
        _ => -1.0,
    };
    let mut t = Table::new(["s", "momentum"]);
    let n = 200;
    for j in 1..n {
        let s = lo + (1.0 - lo) * j as f64 / n as f64;
        if let Ok(p) = soliton::momentum_closed(1.0, 2.0 * s, &model) {
            t.push_floats(&[s, p]);
        }
    }
    t.write(&out.join("momentum.csv"))?;
    Ok((json!({ "b": b, "gamma": model.gamma, "s_star": s_star }), None))
}

fn cmd_threshold(cfg: &mut RunConfig) -> CmdResult {
    let b = *cfg.params.b.get_or_insert(0.0);
    let model = cfg.model();
    Ok((json!({ "b": b, "gamma": model.gamma, "mass_threshold": params::mass_threshold(b)? }), None))
}

fn cmd_converge(cfg: &mut RunConfig, out: &Path) -> CmdResult {
    let b = *cfg.params.b.get_or_insert(-0.1);
    let model = cfg.model();
    let s_list = cfg.params.s_list.get_or_insert_with(|| vec![0.9, 0.99, 0.999]).clone();
    let m = *cfg.experiment.m.get_or_insert(1);
    let grid = cfg.resolve_grid(true)?;
    let study = soliton::converge_to_algebraic(&s_list, m, &model, &grid, Gauge::Dnls, 1e-4)?;
    let mut t = Table::new(["s", "distance", "grid_distance", "tail_correction"]);
    for e in &study.entries {
        t.push_floats(&[e.s, e.distance, e.grid_distance, e.tail_correction]);
    }
    t.write(&out.join("distances.csv"))?;
    let decreasing = study.entries.windows(2).all(|w| w[1].distance < w[0].distance);
    Ok((json!({ "b": b, "gamma": model.gamma, "m": m, "strictly_decreasing": decreasing, "entries": study.entries }), None))
}

fn resolve_evolve(cfg: &mut RunConfig, grid: &SpectralGrid) -> (Gauge, f64, f64, usize) {
    let eq = *cfg.evolve.equation.get_or_insert(Gauge::Dnls);
    let dt = *cfg.evolve.dt.get_or_insert(evolve::default_dt(grid));
    let t = *cfg.evolve.t_final.get_or_insert(20.0);
    let stride = *cfg.evolve.stride.get_or_insert(100);
    (eq, dt, t, stride)
}

fn cmd_evolve(cfg: &mut RunConfig, out: &Path) -> CmdResult {
    let (model, wave) = cfg.resolve_wave()?;
    let grid = cfg.resolve_grid(wave.is_algebraic())?;
    let (eq, dt, t_final, stride) = resolve_evolve(cfg, &grid);
    let delta = *cfg.experiment.delta.get_or_insert(0.0);
    let kind = *cfg.experiment.kind.get_or_insert(PerturbationKind::EvenBump);
    let seed = *cfg.experiment.seed.get_or_insert(0);
    let prof = SolitonProfile::new(wave.omega, wave.c, &model)?;
    let u0 = stability::perturb(&prof.sample(&grid, eq), delta, kind, seed)?;
    let mut ec = EvolveConfig::new(eq, model, &grid, t_final).with_dt(dt);
    ec.snapshot_stride = stride;
    if eq == Gauge::Modified {
        ec.wave = Some((wave.omega, wave.c));
    }
    let traj = evolve::run(&u0, &ec)?;
    let mut t = Table::new(["t", "step", "energy", "mass", "momentum", "action", "nehari", "jc"]);
    for s in &traj.snapshots {
        let q = s.invariants;
        let opt = |x: Option<f64>| x.map(fmt_f64).unwrap_or_default();
        t.push(vec![
            fmt_f64(s.t),
            s.step.to_string(),
            fmt_f64(q.energy),
            fmt_f64(q.mass),
            fmt_f64(q.momentum),
            opt(q.action),
            opt(q.nehari),
            opt(q.jc),
        ]);
    }
    t.write(&out.join("invariants.csv"))?;
    io::write_field_binary(&out.join("final.bin"), &traj.final_field)?;
    let failure = traj.blowup.map(|t| format!("blow-up at t={t}"));
    Ok((
        json!({
            "params": wave_json(&model, &wave),
            "dt": traj.dt,
            "drift": traj.drift,
            "max_drift": traj.drift.max(),
            "blowup": traj.blowup,
        }),
        failure,
    ))
}

/// Report without the time series, which goes to CSV.
#[derive(Serialize)]
struct StabilitySummary<'a> {
    #[serde(flatten)]
    report: &'a StabilityReport,
}

fn stability_table(r: &StabilityReport) -> Table {
    let mut t = Table::new(["t", "distance", "theta", "y", "k_sign", "jc", "corridor"]);
    for s in &r.samples {
        t.push(vec![
            fmt_f64(s.t),
            fmt_f64(s.distance),
            fmt_f64(s.theta),
            fmt_f64(s.y),
            s.k_sign.map(|k| k.to_string()).unwrap_or_default(),
            s.jc.map(fmt_f64).unwrap_or_default(),
            s.corridor.map(|b| b.to_string()).unwrap_or_default(),
        ]);
    }
    t
}

fn stability_json(r: &StabilityReport) -> Value {
    let mut v = serde_json::to_value(StabilitySummary { report: r }).expect("report serializes");
    if let Value::Object(m) = &mut v {
        m.remove("samples");
    }
    v
}

fn stability_failure(r: &StabilityReport) -> Option<String> {
    r.blowup.map(|t| format!("blow-up at t={t}"))
}

/// Thread pool honouring `SOLITON_LAB_THREADS`.
fn pool() -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("SOLITON_LAB_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| Error::Config(format!("SOLITON_LAB_THREADS must be a positive integer, got '{v}'")))?;
        b = b.num_threads(n.max(1));
    }
    b.build().map_err(|e| Error::Config(e.to_string()))
}

fn cmd_stability(cfg: &mut RunConfig, out: &Path) -> CmdResult {
    let (model, wave) = cfg.resolve_wave()?;
    let grid = cfg.resolve_grid(wave.is_algebraic())?;
    let (eq, dt, t_final, stride) = resolve_evolve(cfg, &grid);
    let delta = *cfg.experiment.delta.get_or_insert(1e-2);
    let kind = *cfg.experiment.kind.get_or_insert(PerturbationKind::RandomSmooth);
    let seed = *cfg.experiment.seed.get_or_insert(0);
    let comoving = *cfg.experiment.comoving.get_or_insert(false);
    let mut sc = StabilityConfig::new(grid, eq);
    sc.dt = Some(dt);
    sc.snapshot_stride = stride;
    sc.comoving = comoving;
    let b = model.b;
    let job = |delta: f64, kind: PerturbationKind, seed: u64| {
        let mut sc = sc.clone();
        sc.seed = seed;
        stability::stability_experiment(b, wave.omega, wave.c, delta, kind, t_final, &sc)
    };
    let sw = &cfg.sweep;
    if sw.deltas.is_empty() && sw.seeds.is_empty() && sw.kinds.is_empty() {
        let r = job(delta, kind, seed)?;
        stability_table(&r).write(&out.join("timeseries.csv"))?;
        return Ok((stability_json(&r), stability_failure(&r)));
    }
    let deltas = if sw.deltas.is_empty() { vec![delta] } else { sw.deltas.clone() };
    let seeds = if sw.seeds.is_empty() { vec![seed] } else { sw.seeds.clone() };
    let kinds = if sw.kinds.is_empty() { vec![kind] } else { sw.kinds.clone() };
    let mut jobs = Vec::new();
    for &d in &deltas {
        for &k in &kinds {
            for &s in &seeds {
                jobs.push((d, k, s));
            }
        }
    }
    let reports: Vec<Result<StabilityReport>> =
        pool()?.install(|| jobs.par_iter().map(|&(d, k, s)| job(d, k, s)).collect());
    let mut table = Table::new(["job", "delta", "kind", "seed", "sup_distance", "ratio", "max_drift", "blowup", "valid"]);
    let mut failure = None;
    for (i, r) in reports.into_iter().enumerate() {
        let r = r?;
        let dir = out.join(format!("job-{i:04}"));
        stability_table(&r).write(&dir.join("timeseries.csv"))?;
        let mut s = stability_json(&r);
        s["command"] = json!("stability");
        io::write_json(&dir.join("summary.json"), &s)?;
        table.push(vec![
            i.to_string(),
            fmt_f64(r.delta),
            r.kind.to_string(),
            r.seed.to_string(),
            fmt_f64(r.sup_distance),
            fmt_f64(r.ratio),
            fmt_f64(r.drift.max()),
            r.blowup.map(fmt_f64).unwrap_or_default(),
            r.numerically_valid.to_string(),
        ]);
        if failure.is_none() {
            failure = stability_failure(&r);
        }
    }
    table.write(&out.join("sweep.csv"))?;
    Ok((json!({ "params": wave_json(&model, &wave), "jobs": jobs.len() }), failure))
}

fn write_minimizer(f: &Field, out: &Path) -> Result<()> {
    io::write_field_binary(&out.join("minimizer.bin"), f)?;
    io::field_table(f).write(&out.join("minimizer.csv"))
}

fn cmd_nehari(cfg: &mut RunConfig, out: &Path) -> CmdResult {
    let (model, wave) = cfg.resolve_wave()?;
    let grid = cfg.resolve_grid(wave.is_algebraic())?;
    let opts = cfg.options();
    let (omega, c) = (wave.omega, wave.c);
    let init = variational::default_nehari_init(&grid, omega, c, &model)?;
    let r = variational::nehari_minimize(omega, c, &model, &init, opts)?;
    let d = soliton::action_d(omega, c, &model)?;
    let reference = SolitonProfile::new(omega, c, &model)?.sample_varphi(&grid);
    let fit = stability::orbital_fit(&r.minimizer, &reference);
    let aligned = reference.translate(fit.y).scale_c(C64::from_polar(1.0, fit.theta));
    let x_dist = functionals::x_norm(&r.minimizer.sub(&aligned), c);
    write_minimizer(&r.minimizer, out)?;
    let failure = (!r.converged).then(|| format!("no convergence after {} iterations (residual {:.3e})", r.iterations, r.residual));
    Ok((
        json!({
            "params": wave_json(&model, &wave),
            "value": r.value,
            "action_d": d,
            "relative_error": (r.value - d).abs() / d.abs(),
            "iterations": r.iterations,
            "residual": r.residual,
            "nehari": r.nehari,
            "converged": r.converged,
            "orbit": fit,
            "x_distance": x_dist,
        }),
        failure,
    ))
}

fn cmd_massmin(cfg: &mut RunConfig, out: &Path) -> CmdResult {
    let (model, wave) = cfg.resolve_wave()?;
    let grid = cfg.resolve_grid(wave.is_algebraic())?;
    let opts = cfg.options();
    let (omega, c) = (wave.omega, wave.c);
    let m = match cfg.solver.mass {
        Some(m) => m,
        None => *cfg.solver.mass.insert(soliton::mass_closed(omega, c, &model)?),
    };
    let init = variational::gaussian_with_mass(&grid, m);
    let r = variational::mass_constrained_minimize(c, m, &model, &init, opts)?;
    let gn = variational::gn_constants(&grid);
    let lower = -gn.c2 * c * c * m.powi(3);
    // distance to Phi_{omega~, c} when that soliton exists
    let orbit = SolitonProfile::new(r.omega_tilde, c, &model)
        .ok()
        .map(|p| stability::orbital_fit(&r.minimizer, &p.sample_real(&grid)));
    write_minimizer(&r.minimizer, out)?;
    let failure = (!r.converged).then(|| format!("no convergence after {} iterations (residual {:.3e})", r.iterations, r.residual));
    Ok((
        json!({
            "params": wave_json(&model, &wave),
            "mass": m,
            "value": r.value,
            "multiplier": r.multiplier,
            "omega_tilde": r.omega_tilde,
            "iterations": r.iterations,
            "residual": r.residual,
            "converged": r.converged,
            "gn": gn,
            "value_lower_bound": lower,
            "orbit": orbit,
        }),
        failure,
    ))
}

fn collect_summaries(dir: &Path, acc: &mut Vec<PathBuf>) -> Result<()> {
    let mut entries: Vec<_> = std::fs::read_dir(dir)?.collect::<std::io::Result<_>>()?;
    entries.sort_by_key(|e| e.path());
    for e in entries {
        let p = e.path();
        if p.is_dir() {
            collect_summaries(&p, acc)?;
        } else if p.file_name().is_some_and(|n| n == "summary.json") {
            acc.push(p);
        }
    }
    Ok(())
}

fn scalar_cell(v: &Value) -> Option<String> {
    match v {
        Value::Number(n) => Some(n.as_f64().map(fmt_f64).unwrap_or_else(|| n.to_string())),
        Value::Bool(b) => Some(b.to_string()),
        Value::String(s) => Some(s.clone()),
        Value::Null => Some(String::new()),
        _ => None,
    }
}

/// Flattens nested objects into dotted keys, keeping scalar leaves.
fn flatten(prefix: &str, v: &Value, out: &mut std::collections::BTreeMap<String, String>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, x, out);
            }
        }
        other => {
            if let Some(s) = scalar_cell(other) {
                out.insert(prefix.to_string(), s);
            }
        }
    }
}

/// Writes `report.csv` with one row per `summary.json` found below `dir`.
pub fn report(dir: &Path, out: &Path) -> Result<()> {
    let mut paths = Vec::new();
    collect_summaries(dir, &mut paths)?;
    let out_file = out.join("report.csv");
    let rows: Vec<Result<std::collections::BTreeMap<String, String>>> = pool()?.install(|| {
        paths
            .par_iter()
            .map(|p| {
                let text = std::fs::read_to_string(p)?;
                let v: Value = serde_json::from_str(&text)
                    .map_err(|e| Error::Config(format!("{}: {e}", p.display())))?;
                let mut row = std::collections::BTreeMap::new();
                flatten("", &v, &mut row);
                let rel = p.parent().and_then(|d| d.strip_prefix(dir).ok()).unwrap_or(Path::new(""));
                row.insert("run".into(), rel.display().to_string());
                Ok(row)
            })
            .collect()
    });
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let mut keys: Vec<String> = rows.iter().flat_map(|r| r.keys().cloned()).collect();
    keys.sort();
    keys.dedup();
    keys.retain(|k| k != "run" && k != "command");
    let mut header = vec!["run".to_string(), "command".to_string()];
    header.extend(keys);
    let mut t = Table::new(header.clone());
    for r in &rows {
        t.push(header.iter().map(|k| r.get(k).cloned().unwrap_or_default()).collect());
    }
    t.write(&out_file)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("soliton-lab").chain(args.iter().copied())).unwrap()
    }

    fn tmp(name: &str) -> PathBuf {
        std::env::temp_dir().join(format!("soliton-lab-cli-{}-{name}", std::process::id()))
    }

    #[test]
    fn flags_parse_negative_values_and_lists() {
        let cli = parse(&["converge", "--b", "-0.1", "--s", "0.9,0.99,0.999", "--m", "1"]);
        match cli.command {
            Command::Converge { p, m, .. } => {
                assert_eq!(p.b, Some(-0.1));
                assert_eq!(p.s, vec![0.9, 0.99, 0.999]);
                assert_eq!(m, Some(1));
            }
            _ => panic!("wrong subcommand"),
        }
    }

    #[test]
    fn hessian_and_rerun_from_config_is_identical() {
        let out = tmp("hessian");
        let o = run(parse(&["hessian", "--omega", "1", "--c", "0", "--b", "0", "--out", out.to_str().unwrap()])).unwrap();
        assert!(o.numerical_failure.is_none());
        let s: Value = serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
        assert!((s["closed_det"].as_f64().unwrap() + 1.0).abs() < 1e-12);
        assert!((s["fd_det"].as_f64().unwrap() + 1.0).abs() < 1e-4);
        let first = std::fs::read(out.join("summary.json")).unwrap();
        let out2 = tmp("hessian2");
        let cfg = out.join("config.toml");
        run(parse(&["hessian", "--config", cfg.to_str().unwrap(), "--out", out2.to_str().unwrap()])).unwrap();
        assert_eq!(first, std::fs::read(out2.join("summary.json")).unwrap());
        assert_eq!(std::fs::read(&cfg).unwrap(), std::fs::read(out2.join("config.toml")).unwrap());
        std::fs::remove_dir_all(out).ok();
        std::fs::remove_dir_all(out2).ok();
    }

    #[test]
    fn validation_errors_map_to_exit_codes() {
        let e = run(parse(&["profile", "--b", "-0.5", "--c", "-1", "--out", tmp("bad").to_str().unwrap()])).err().unwrap();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("inadmissible"));
        let e = run(parse(&["profile", "--c", "1", "--s", "0.1", "--out", tmp("bad2").to_str().unwrap()])).err().unwrap();
        assert_eq!(e.exit_code(), 2);
        assert!(Cli::try_parse_from(["soliton-lab", "evolve", "--equation", "schrodinger"]).is_err());
        std::fs::remove_dir_all(tmp("bad")).ok();
        std::fs::remove_dir_all(tmp("bad2")).ok();
    }

    #[test]
    fn report_aggregates_summaries() {
        let root = tmp("report");
        run(parse(&["threshold", "--b", "0", "--out", root.join("a").to_str().unwrap()])).unwrap();
        run(parse(&["sstar", "--b", "0.5", "--out", root.join("b").to_str().unwrap()])).unwrap();
        report(&root, &root).unwrap();
        let text = std::fs::read_to_string(root.join("report.csv")).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("run,command,"));
        assert!(lines[1].starts_with("a,threshold,"));
        std::fs::remove_dir_all(root).ok();
    }
}
