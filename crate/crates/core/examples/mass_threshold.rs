//! Data below the mass threshold `M*(b)` stay bounded in `H^1`.

use soliton_lab::params;
use soliton_lab::spectral::SpectralGrid;
use soliton_lab::stability;
use soliton_lab::variational;
use soliton_lab::Result;

fn main() -> Result<()> {
    let grid = SpectralGrid::new(40.0, 1024)?;
    for b in [0.0, -0.1] {
        let threshold = params::mass_threshold(b)?;
        let u0 = variational::gaussian_with_mass(&grid, 0.9 * threshold);
        let r = stability::global_bound_experiment(b, &u0, 2.0, None)?;
        println!(
            "b={b:>5}: M*={threshold:.6}  M(u0)={:.6}  margin {:.4}  H1 {:.4} -> sup {:.4}  bounded {}",
            r.mass, r.margin, r.initial_h1, r.sup_h1, r.bounded
        );
    }
    Ok(())
}
