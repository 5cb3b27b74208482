//! Evolves a travelling soliton of the original equation and compares with
//! the exact solution `e^{i omega t} phi(x - c t)`.

use soliton_lab::evolve::{self, EvolveConfig};
use soliton_lab::params::ModelParams;
use soliton_lab::soliton::{Gauge, SolitonProfile};
use soliton_lab::spectral::{SpectralGrid, C64};
use soliton_lab::Result;

fn main() -> Result<()> {
    let (omega, c, t_final) = (1.0, 1.0, 1.0);
    let p = ModelParams::from_b(0.0);
    let grid = SpectralGrid::new(40.0, 1024)?;
    let u0 = SolitonProfile::new(omega, c, &p)?.sample_dnls(&grid);

    let mut errors = Vec::new();
    for dt in [1e-3, 5e-4] {
        let cfg = EvolveConfig::new(Gauge::Dnls, p, &grid, t_final).with_dt(dt);
        let traj = evolve::run(&u0, &cfg)?;
        let exact = u0.translate(c * t_final).scale_c(C64::from_polar(1.0, omega * t_final));
        let err = traj.final_field.sub(&exact).hm_norm(1);
        println!(
            "dt={dt:.1e}  H1 error {err:.3e}  drift E {:.1e} M {:.1e} P {:.1e}",
            traj.drift.energy, traj.drift.mass, traj.drift.momentum
        );
        errors.push(err);
    }
    println!("error ratio under dt halving: {:.2} (fourth order: 16)", errors[0] / errors[1]);
    Ok(())
}
