//! Scharfetter-Gummel transport in a fixed potential relaxing to the
//! Boltzmann profile, with mass conservation.
use ehd::grid::{integrate, Grid2D, MacVectorField, ScalarField};
use ehd::transport::{discrete_maxwellian, step_charges, ChargePair, Species};

fn main() -> ehd::Result<()> {
    let g = Grid2D::unit_square(32)?;
    let phi = ScalarField::from_fn(g, |x, y| 2.0 * (3.0 * x).sin() * y);
    let bump = |x: f64, y: f64| 1.0 + 0.8 * (-((x - 0.3).powi(2) + (y - 0.6).powi(2)) / 0.02).exp();
    let mut c = ChargePair::new(ScalarField::from_fn(g, bump), ScalarField::constant(g, 0.5))?;
    let (m, n) = c.masses();
    let (vinf, winf) = (
        discrete_maxwellian(&phi, m, Species::Cation),
        discrete_maxwellian(&phi, n, Species::Anion),
    );
    let u = MacVectorField::zeros(g);
    for k in 0..=400 {
        if k % 50 == 0 {
            let dv = c.v.zip_map(&vinf, |a, b| a - b)?.max_abs();
            let dw = c.w.zip_map(&winf, |a, b| a - b)?.max_abs();
            println!(
                "step {k:3}  |v - v_inf| {dv:.3e}  |w - w_inf| {dw:.3e}  mass drift {:.1e}",
                (integrate(&c.v) - m).abs() + (integrate(&c.w) - n).abs()
            );
        }
        c = step_charges(&c, &phi, &u, 0.01, 1e-12)?;
    }
    Ok(())
}
