//! Mass-constrained minimization for `c < 0` and the recovered frequency.

use soliton_lab::params::ModelParams;
use soliton_lab::soliton::{self, SolitonProfile};
use soliton_lab::spectral::SpectralGrid;
use soliton_lab::stability;
use soliton_lab::variational::{self, MinimizeOptions};
use soliton_lab::Result;

fn main() -> Result<()> {
    let grid = SpectralGrid::exponential_default();
    let gn = variational::gn_constants(&grid);
    println!("GN constants: C1 = {:.10} (sharp 3^(-1/8) = {:.10}), C2 = {:.6e}", gn.c1, 3f64.powf(-0.125), gn.c2);

    // gamma = -1/4, where (omega, c) = (1, -1) is admissible
    let (omega, c) = (1.0, -1.0);
    let p = ModelParams::from_gamma(-0.25);
    let m = soliton::mass_closed(omega, c, &p)?;
    let init = variational::gaussian_with_mass(&grid, m);
    let r = variational::mass_constrained_minimize(c, m, &p, &init, MinimizeOptions::default())?;
    let reference = SolitonProfile::new(omega, c, &p)?.sample_real(&grid);
    let fit = stability::orbital_fit(&r.minimizer, &reference);
    println!("mass {m:.10}  value {:.10}  lower bound {:.4}", r.value, -gn.c2 * c * c * m.powi(3));
    println!(
        "multiplier {:.10} (expected {})  omega~ {:.10}  iters {}  H1 dist to Phi {:.2e}",
        r.multiplier,
        omega - c * c / 4.0,
        r.omega_tilde,
        r.iterations,
        fit.distance
    );
    Ok(())
}
