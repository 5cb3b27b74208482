//! The gauge transformation, the conserved quantities in both gauges and the
//! potential wells around a soliton.

use soliton_lab::functionals::{self, ProfileEquation};
use soliton_lab::params::ModelParams;
use soliton_lab::soliton::{self, SolitonProfile};
use soliton_lab::spectral::SpectralGrid;
use soliton_lab::Result;

fn main() -> Result<()> {
    let (omega, c) = (1.0, 0.8);
    let p = ModelParams::from_b(-0.1);
    let grid = SpectralGrid::exponential_default();
    let prof = SolitonProfile::new(omega, c, &p)?;
    let u = prof.sample_dnls(&grid);
    let v = functionals::gauge_g(&u)?;

    let iu = functionals::invariants_u(&u, p.b)?;
    let iv = functionals::invariants_v(&v, &p)?;
    let closed = soliton::closed_form_invariants(omega, c, &p)?;
    println!("        {:>20} {:>20} {:>20}", "original", "gauged", "closed form");
    println!("mass    {:>20.14} {:>20.14} {:>20.14}", iu.mass, iv.mass, closed.mass);
    println!("moment  {:>20.14} {:>20.14} {:>20.14}", iu.momentum, iv.momentum, closed.momentum);
    println!("energy  {:>20.14} {:>20.14} {:>20.14}", iu.energy, iv.energy, closed.energy);

    let back = functionals::gauge_g_inverse(&v)?;
    println!("\nG^-1 G u - u   {:.2e}", back.to_carrier(u.carrier()).sub(&u).sup_norm());
    println!("S(phi)         {:.14}", functionals::action_s(&u, omega, c, p.b)?);
    println!("calS(varphi)   {:.14}", functionals::action_scal(&v, omega, c, &p)?);
    println!("d(omega, c)    {:.14}", closed.action_d);
    println!(
        "residuals      dnls {:.1e}  real {:.1e}  modified {:.1e}",
        functionals::elliptic_residual(&u, omega, c, &p, ProfileEquation::Dnls)?,
        functionals::elliptic_residual(&prof.sample_real(&grid), omega, c, &p, ProfileEquation::Real)?,
        functionals::elliptic_residual(&prof.sample_varphi(&grid), omega, c, &p, ProfileEquation::Modified)?,
    );

    println!("\nscaled solitons lambda * varphi:");
    let varphi = prof.sample_varphi(&grid);
    for lambda in [0.9, 0.99, 1.01, 1.1] {
        let w = functionals::well_membership(&varphi.scale(lambda), omega, c, &p)?;
        println!(
            "  lambda={lambda:<5} S-d={:+.3e}  K={:+.3e}  J-d={:+.3e}  {:?}",
            w.action_margin, w.nehari, w.jc_margin, w.tag
        );
    }
    Ok(())
}
