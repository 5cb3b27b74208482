//! Parameter regions and the closed-form soliton invariants.
//!
//! Run with `cargo run --release --example closed_forms`.

use soliton_lab::params::{self, ModelParams};
use soliton_lab::soliton;
use soliton_lab::Result;

fn main() -> Result<()> {
    for b in [-0.25, -0.1, 0.0, 0.5] {
        let p = ModelParams::from_b(b);
        let cut = p.velocity_cutoff().map(|s| format!("{s:.6}")).unwrap_or_else(|| "none".into());
        let sstar = params::s_star(b).map(|s| format!("{s:.6}")).unwrap_or_else(|_| "-".into());
        let mstar = params::mass_threshold(b).map(|m| format!("{m:.6}")).unwrap_or_else(|_| "-".into());
        println!("b={b:>6}  gamma={:>8.5}  cutoff={cut:>9}  s*={sstar:>9}  M*={mstar}", p.gamma);
    }

    println!("\n{:>6} {:>7} {:>12} {:>12} {:>12} {:>12} {:>12}", "b", "s", "M", "P", "E", "d", "det d''");
    for (b, s) in [(-0.1, 0.0), (-0.1, 0.5), (-0.1, 1.0), (0.0, 0.9), (0.5, 0.3), (0.5, 0.9)] {
        let p = ModelParams::from_b(b);
        let c = 2.0 * s;
        let inv = soliton::closed_form_invariants(1.0, c, &p)?;
        let det = soliton::hessian_det_closed(1.0, c, &p)
            .map(|d| format!("{d:12.5e}"))
            .unwrap_or_else(|_| format!("{:>12}", "-"));
        println!(
            "{b:>6} {s:>7} {:>12.6} {:>12.6} {:>12.6} {:>12.6} {det}",
            inv.mass, inv.momentum, inv.energy, inv.action_d
        );
    }

    // the finite-difference Hessian agrees with the closed determinant
    let p = ModelParams::from_b(0.5);
    let h = soliton::hessian_d(1.0, 0.6, &p, None)?;
    println!("\nb=0.5, c=0.6: fd det {:.8e}, closed det {:.8e}", h.det, h.closed_det);

    // inadmissible parameters report the admissible window
    match params::classify(1.0, -1.0, &ModelParams::from_b(-0.5)) {
        Ok(r) => println!("region: {r}"),
        Err(e) => println!("rejected: {e}"),
    }
    Ok(())
}
