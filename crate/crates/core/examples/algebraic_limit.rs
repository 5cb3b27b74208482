//! Exponential solitons approaching the algebraic one as `s -> 1`.

use soliton_lab::params::ModelParams;
use soliton_lab::soliton::{self, Gauge, SolitonProfile};
use soliton_lab::spectral::SpectralGrid;
use soliton_lab::Result;

fn main() -> Result<()> {
    let p = ModelParams::from_b(-0.1);
    let alg = SolitonProfile::new(1.0, 2.0, &p)?;
    for x in [0.0, 1.0, 10.0, 100.0] {
        println!("Phi_alg({x:>5}) = {:.10e}   x * Phi = {:.6}", alg.phi(x), x * alg.phi(x));
    }
    for s in [0.9, 0.99, 0.999] {
        println!("sup |Phi_(1,2s)|^2 at s={s}: {:.10}", soliton::sup_norm_sq(s, &p)?);
    }

    let grid = SpectralGrid::algebraic_default();
    let s_list = [0.9, 0.99, 0.999];
    for m in 0..=2 {
        let study = soliton::converge_to_algebraic(&s_list, m, &p, &grid, Gauge::Dnls, 1e-4)?;
        let row: Vec<String> = study.entries.iter().map(|e| format!("{:.4e}", e.distance)).collect();
        println!("H^{m} distances for s = {s_list:?}: {}", row.join("  "));
    }
    Ok(())
}
