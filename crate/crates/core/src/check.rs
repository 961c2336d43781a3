//! Invariant and inequality suite run by `ehd check`.

use std::fmt;

use crate::diagnostics::{
    csiszar_squared_check, energy_report, entropy_production, error_norms, linearized_energy,
    relative_entropy, relative_entropy_identity, total_energy,
};
use crate::error::Result;
use crate::fluid::ladyzhenskaya_ratio;
use crate::grid::{div_from_faces, lp_norm};
use crate::poisson::DirichletLaplacian;
use crate::sim::{cfl_limit, step, SimConfig, SystemState};
use crate::stationary::{sinh_form_check, solve_pb, StationarySolution};

/// Outcome of one property.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for PropertyResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

fn prop(name: &'static str, passed: bool, detail: String) -> PropertyResult {
    PropertyResult {
        name,
        passed,
        detail,
    }
}

/// Pointwise and functional properties of a single state.
pub fn check_state(
    state: &SystemState,
    s: &StationarySolution,
    poisson_tol: f64,
) -> Result<Vec<PropertyResult>> {
    let mut out = Vec::new();
    let (vmin, wmin) = (state.v.min(), state.w.min());
    out.push(prop(
        "nonnegative-charges",
        vmin >= 0.0 && wmin >= 0.0,
        format!("min v = {vmin:.3e}, min w = {wmin:.3e}"),
    ));
    let (m, n) = state.masses();
    out.push(prop(
        "positive-masses",
        m > 0.0 && n > 0.0,
        format!("M = {m:.6e}, N = {n:.6e}"),
    ));
    let b = state.u.max_abs_boundary();
    out.push(prop(
        "no-slip-boundary",
        b == 0.0,
        format!("max |u| on boundary = {b:.3e}"),
    ));
    let d = div_from_faces(&state.u).max_abs();
    out.push(prop(
        "divergence-free",
        d <= 1e-8,
        format!("max |div u| = {d:.3e}"),
    ));

    let rhs = state.v.zip_map(&state.w, |a, b| a - b)?;
    let r = DirichletLaplacian::new(*state.grid())
        .apply(&state.phi)?
        .zip_map(&rhs, |a, b| a - b)?;
    let rn = lp_norm(&r, 2.0)?;
    let bound = poisson_tol * (1.0 + lp_norm(&rhs, 2.0)?);
    out.push(prop(
        "poisson-consistency",
        rn <= bound,
        format!("||lap phi - (v - w)|| = {rn:.3e} (bound {bound:.3e})"),
    ));

    let e = total_energy(state);
    let sum = e.entropy_v + e.entropy_w + e.electric + e.kinetic;
    out.push(prop(
        "energy-decomposition",
        (sum - e.total).abs() <= 1e-14 * (1.0 + e.total.abs()),
        format!("W = {:.6e}", e.total),
    ));
    let prod = entropy_production(state);
    out.push(prop(
        "production-nonnegative",
        prod >= 0.0,
        format!("{prod:.6e}"),
    ));
    let wrel = relative_entropy(state, s)?;
    let l = linearized_energy(state, s)?;
    let e1 = error_norms(state, s, 1)?;
    let e2 = error_norms(state, s, 2)?;
    out.push(prop(
        "functionals-nonnegative",
        wrel >= -1e-14 && l >= 0.0 && e1 >= 0.0 && e2 >= 0.0,
        format!("W_rel = {wrel:.3e}, L = {l:.3e}, E1 = {e1:.3e}, E2 = {e2:.3e}"),
    ));
    let id = relative_entropy_identity(state, s)?;
    let scale = 1.0 + id.w_rel.abs() + id.w_minus_winf.abs();
    let gap = (id.w_rel - id.w_minus_winf).abs();
    out.push(prop(
        "relative-entropy-identity",
        gap <= 1e-8 * scale,
        format!("|W_rel - (W - W_inf)| = {gap:.3e}"),
    ));
    let gap2 = (id.w_rel - id.maxwellian_form).abs();
    out.push(prop(
        "relative-entropy-maxwellian-form",
        gap2 <= 1e-8 * scale,
        format!("|W_rel - maxwellian form| = {gap2:.3e}"),
    ));
    let (lhs, wr) = csiszar_squared_check(state, s)?;
    let slack = 1e-12 * (1.0 + wr.abs());
    out.push(prop(
        "csiszar-kullback",
        lhs <= wr * (1.0 + 1e-6) + slack,
        format!("{lhs:.6e} <= {wr:.6e}"),
    ));
    let sinh = sinh_form_check(s)?;
    out.push(prop(
        "stationary-sinh-form",
        sinh <= 1e-9,
        format!("residual = {sinh:.3e}"),
    ));
    if state.u.is_zero() {
        out.push(prop("ladyzhenskaya", true, "u = 0, ratio undefined".into()));
    } else {
        let r = ladyzhenskaya_ratio(&state.u)?;
        out.push(prop("ladyzhenskaya", r <= 1.05, format!("ratio = {r:.4}")));
    }
    Ok(out)
}

/// Checks the configured initial state, then runs `steps` steps and checks
/// mass conservation, energy decay and the per-step invariants.
pub fn run_checks(config: &SimConfig, steps: usize) -> Result<Vec<PropertyResult>> {
    config.validate()?;
    let grid = config.grid()?;
    let tol = config.tolerances();
    let init = config.initial_data()?;
    let state = SystemState::new(init.v, init.w, init.u, tol.poisson)?;
    let (m, n) = state.masses();
    let s = solve_pb(m, n, grid, tol.pb)?;
    let mut out = check_state(&state, &s, tol.poisson)?;

    let mut cur = state;
    let mut reports = vec![energy_report(&cur, &s)?];
    let mut stepwise_ok = true;
    let mut worst = String::new();
    for _ in 0..steps {
        let dt = config.time.dt.min(cfl_limit(&cur, config.time.cfl_safety));
        cur = step(&cur, dt, &tol, config.time.cfl_safety)?;
        reports.push(energy_report(&cur, &s)?);
        for p in check_state(&cur, &s, tol.poisson)? {
            if !p.passed && stepwise_ok {
                stepwise_ok = false;
                worst = format!("t = {:.4e}: {p}", cur.t);
            }
        }
    }
    out.push(prop(
        "trajectory-invariants",
        stepwise_ok,
        if stepwise_ok {
            format!("{steps} steps")
        } else {
            worst
        },
    ));
    let drift = reports
        .iter()
        .map(|r| ((r.mass_v - m) / m).abs().max(((r.mass_w - n) / n).abs()))
        .fold(0.0, f64::max);
    out.push(prop(
        "mass-conservation",
        drift <= 1e-12,
        format!("max relative drift = {drift:.3e}"),
    ));
    let mut up = 0;
    let mut max_inc = f64::NEG_INFINITY;
    for w in reports.windows(2) {
        let inc = w[1].w - w[0].w;
        let dt = w[1].t - w[0].t;
        max_inc = max_inc.max(inc);
        if inc > 1e-3 * dt {
            up += 1;
        }
    }
    out.push(prop(
        "energy-dissipation",
        up == 0,
        format!("{up} increasing steps, largest increment {max_inc:.3e}"),
    ));
    Ok(out)
}
