//! Poisson-Boltzmann equilibrium for unequal charge masses.
use ehd::grid::Grid2D;
use ehd::stationary::{sinh_form_check, solve_pb, stationary_pressure_check};

fn main() -> ehd::Result<()> {
    let g = Grid2D::unit_square(64)?;
    for (m, n) in [(0.3, 0.3), (0.05, 0.1), (2.0, 6.0)] {
        let s = solve_pb(m, n, g, 1e-10)?;
        println!(
            "M = {m}, N = {n}: phi in [{:.4e}, {:.4e}], {} Newton steps, sinh residual {:.2e}, pressure residual {:.2e}",
            s.phi.min(),
            s.phi.max(),
            s.j_history.len() - 1,
            sinh_form_check(&s)?,
            stationary_pressure_check(&s)?,
        );
    }
    let dir = std::env::temp_dir().join("ehd_stationary_example");
    solve_pb(0.05, 0.1, g, 1e-10)?.export(&dir)?;
    println!("exported to {}", dir.display());
    Ok(())
}
