//! A short orbital stability run: perturb, evolve, and follow the distance
//! to the soliton orbit together with the potential-well diagnostics.

use soliton_lab::soliton::Gauge;
use soliton_lab::spectral::SpectralGrid;
use soliton_lab::stability::{self, PerturbationKind, StabilityConfig};
use soliton_lab::Result;

fn main() -> Result<()> {
    let grid = SpectralGrid::new(40.0, 1024)?;
    for equation in [Gauge::Dnls, Gauge::Modified] {
        let mut cfg = StabilityConfig::new(grid.clone(), equation);
        cfg.seed = 7;
        cfg.snapshot_stride = 500;
        let r = stability::stability_experiment(-0.1, 1.0, 0.5, 1e-2, PerturbationKind::RandomSmooth, 2.0, &cfg)?;
        println!("{equation:?}: sup distance {:.3e}  ratio {:.2}  drift {:.1e}", r.sup_distance, r.ratio, r.drift.max());
        for s in &r.samples {
            println!(
                "  t={:5.2}  dist {:.3e}  theta {:+.4}  y {:+.4}  K sign {:?}  corridor {:?}",
                s.t, s.distance, s.theta, s.y, s.k_sign, s.corridor
            );
        }
        if equation == Gauge::Modified {
            println!("  initial well {:?}, K sign constant {:?}, corridor eps {:?}",
                r.initial_well, r.k_sign_constant, r.corridor.map(|c| c.epsilon));
        }
    }
    Ok(())
}
