//! Fourier grid basics: derivatives, Sobolev norms, translation and the
//! dealiased products used by the nonlinear terms.

use soliton_lab::spectral::{dealias_pad, Field, SpectralGrid, C64};
use soliton_lab::Result;

fn main() -> Result<()> {
    let grid = SpectralGrid::new(20.0, 512)?;
    let f = Field::from_real_fn(grid.clone(), |x| (-x * x).exp());

    // d/dx e^{-x^2} = -2x e^{-x^2}
    let df = f.derivative(1);
    let err = grid
        .nodes()
        .iter()
        .zip(df.samples())
        .map(|(&x, z)| (z.re + 2.0 * x * (-x * x).exp()).abs())
        .fold(0.0, f64::max);
    println!("derivative error      {err:.2e}");

    let pi = std::f64::consts::PI;
    println!("||f||_2^2             {:.15}  (exact {:.15})", f.lp_pow(2), (pi / 2.0).sqrt());
    println!("||f||_H1              {:.15}", f.hm_norm(1));

    // a carrier e^{iqx} is kept outside the samples
    let g = f.clone().with_carrier(1.5);
    println!("||f e^(1.5ix)||_H1    {:.15}", g.hm_norm(1));

    let shifted = f.translate(2.5);
    let err = grid
        .nodes()
        .iter()
        .zip(shifted.samples())
        .map(|(&x, z)| (z.re - (-(x - 2.5) * (x - 2.5)).exp()).abs())
        .fold(0.0, f64::max);
    println!("translation error     {err:.2e}");

    // |f|^4 f on the 3N grid: no aliasing into the retained modes
    let q = dealias_pad(&[&f], |v| v[0].norm_sqr() * v[0].norm_sqr() * v[0]);
    let direct = f.map(|z| z.norm_sqr() * z.norm_sqr() * z);
    println!("dealiased vs pointwise {:.2e}", q.sub(&direct).sup_norm());

    let cum = Field::from_fn(grid.clone(), |x| C64::new((-x * x).exp(), 0.0)).antiderivative_from_left();
    println!("int_(-L)^L e^(-x^2)   {:.15}", cum.samples()[grid.n() - 1].re);
    Ok(())
}
