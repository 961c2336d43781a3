//! Weighted Poincare constant for zero-flux functions.
use std::f64::consts::PI;

use ehd::diagnostics::weighted_poincare_estimate;
use ehd::grid::{Grid2D, ScalarField};

fn main() -> ehd::Result<()> {
    for n in [16, 32, 64] {
        let g = Grid2D::unit_square(n)?;
        let c = weighted_poincare_estimate(&ScalarField::constant(g, 1.0))?;
        println!(
            "rho = 1, n = {n}: c = {c:.6} (1/pi^2 = {:.6})",
            1.0 / (PI * PI)
        );
    }
    let g = Grid2D::unit_square(32)?;
    let rho = ScalarField::from_fn(g, |x, y| 1.0 + 0.5 * (2.0 * PI * x).cos() * (PI * y).sin());
    println!("bumpy rho: c = {:.6}", weighted_poincare_estimate(&rho)?);
    Ok(())
}
