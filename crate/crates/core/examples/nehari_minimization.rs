//! Minimizes the action on the Nehari manifold from a Gaussian and compares
//! the result with the soliton.

use soliton_lab::functionals;
use soliton_lab::params::ModelParams;
use soliton_lab::soliton::{self, SolitonProfile};
use soliton_lab::spectral::{SpectralGrid, C64};
use soliton_lab::stability;
use soliton_lab::variational::{self, MinimizeOptions};
use soliton_lab::Result;

fn main() -> Result<()> {
    let grid = SpectralGrid::exponential_default();
    for (omega, c, gamma) in [(1.0, 0.0, 1.0), (1.0, 1.0, 0.5), (2.0, -1.0, 0.25)] {
        let p = ModelParams::from_gamma(gamma);
        let init = variational::default_nehari_init(&grid, omega, c, &p)?;
        let r = variational::nehari_minimize(omega, c, &p, &init, MinimizeOptions::default())?;
        let d = soliton::action_d(omega, c, &p)?;
        let reference = SolitonProfile::new(omega, c, &p)?.sample_varphi(&grid);
        let fit = stability::orbital_fit(&r.minimizer, &reference);
        let aligned = reference.translate(fit.y).scale_c(C64::from_polar(1.0, fit.theta));
        println!(
            "(omega, c, gamma) = ({omega}, {c}, {gamma}): value {:.12} d {:.12}  iters {:>4}  H1 dist {:.1e}  X dist {:.1e}  K {:.1e}",
            r.value,
            d,
            r.iterations,
            fit.distance,
            functionals::x_norm(&r.minimizer.sub(&aligned), c),
            r.nehari
        );
    }
    Ok(())
}
