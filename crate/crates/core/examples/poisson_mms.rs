//! Manufactured-solution convergence of the Dirichlet Poisson solver.
use std::f64::consts::PI;

use ehd::grid::{lp_norm, Grid2D, ScalarField};
use ehd::poisson::{default_max_iter, solve_dirichlet};

fn main() -> ehd::Result<()> {
    let mut prev: Option<f64> = None;
    for n in [16, 32, 64, 128] {
        let g = Grid2D::unit_square(n)?;
        let exact = ScalarField::from_fn(g, |x, y| (PI * x).sin() * (PI * y).sin());
        let phi = solve_dirichlet(&exact.scaled(-2.0 * PI * PI), 1e-10, default_max_iter(&g))?;
        let err = lp_norm(&phi.zip_map(&exact, |a, b| a - b)?, 2.0)?;
        match prev {
            Some(p) => println!(
                "n = {n:4}  L2 error {err:.3e}  order {:.3}",
                (p / err).log2()
            ),
            None => println!("n = {n:4}  L2 error {err:.3e}"),
        }
        prev = Some(err);
    }
    Ok(())
}
