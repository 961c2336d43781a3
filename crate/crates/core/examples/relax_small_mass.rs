//! Relaxation from a perturbed state: energy decay and fitted rates.
use ehd::diagnostics::{fit_decay, post_transient_window};
use ehd::sim::{run, SimConfig};

fn main() -> ehd::Result<()> {
    let overrides: Vec<String> = [
        "grid.nx=32",
        "grid.ny=32",
        "grid.lx=4",
        "grid.ly=4",
        "time.dt=0.01",
        "time.t_max=3",
        "time.record_every=1",
        "initial.preset=relax-small-mass",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let cfg = SimConfig::with_overrides(&overrides)?;
    let out = run(&cfg)?;
    for r in out.reports.iter().step_by(50) {
        println!(
            "t = {:5.2}  W = {:.8}  W_rel = {:.4e}  E1 = {:.4e}",
            r.t, r.w, r.w_rel, r.e1
        );
    }
    let window = post_transient_window(cfg.time.t_max);
    let fw = fit_decay(&out.series(|r| r.w_rel), window)?;
    let fe = fit_decay(&out.series(|r| r.e1), window)?;
    println!(
        "decay rates: W_rel {:.4} (r2 {:.4}), E1 {:.4} (r2 {:.4})",
        fw.lambda, fw.r_squared, fe.lambda, fe.r_squared
    );
    Ok(())
}
