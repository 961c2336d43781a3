//! Charges carried by a vortex: kinetic and electric energy exchange,
//! with diagnostics written to a directory.
use ehd::sim::{run, SimConfig};

fn main() -> ehd::Result<()> {
    let dir = std::env::temp_dir().join("ehd_vortex_example");
    let overrides: Vec<String> = vec![
        "grid.nx=48".into(),
        "grid.ny=48".into(),
        "time.dt=2e-3".into(),
        "time.t_max=0.2".into(),
        "time.record_every=10".into(),
        "output.snapshot_every=50".into(),
        "initial.preset=vortex-charge".into(),
        format!("output.dir={:?}", dir.display().to_string()),
    ];
    let out = run(&SimConfig::with_overrides(&overrides)?)?;
    for r in &out.reports {
        println!(
            "t = {:.3}  kinetic {:.4e}  electric {:.4e}  production {:.4e}  lady {:.3}",
            r.t, r.kinetic, r.electric, r.production, r.lady_ratio
        );
    }
    println!("wrote {}", dir.display());
    Ok(())
}
