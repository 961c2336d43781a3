//! Small perturbation of equilibrium: relative entropy against its quadratic
//! approximation, and the L1 distance bound.
use ehd::sim::{run, SimConfig};

fn main() -> ehd::Result<()> {
    let overrides: Vec<String> = [
        "grid.nx=32",
        "grid.ny=32",
        "time.dt=0.005",
        "time.t_max=0.2",
        "time.record_every=8",
        "initial.preset=near-equilibrium",
        "initial.epsilon=1e-3",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let out = run(&SimConfig::with_overrides(&overrides)?)?;
    for r in &out.reports {
        println!(
            "t = {:.3}  W_rel = {:.4e}  L = {:.4e}  rel diff {:.2e}  L1 lhs {:.3e}",
            r.t,
            r.w_rel,
            r.l,
            (r.w_rel - r.l).abs() / r.l,
            r.ck_lhs
        );
    }
    Ok(())
}
