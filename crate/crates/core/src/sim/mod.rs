//! Coupled time stepping, run driver and output.
//!
//! One step solves the Poisson equation, advances the charges with the
//! potential lagged, assembles the body force from the new charges, advances
//! the velocity, and finally re-solves the potential so that the returned
//! state is self-consistent.

pub mod config;
pub mod presets;

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use log::{info, warn};

use crate::diagnostics::{energy_report, EnergyReport, CSV_HEADER};
use crate::error::{EhdError, Result};
use crate::fluid::{body_force, step_velocity, FluidState};
use crate::grid::{
    grad_to_faces, integrate, write_matrix, FaceBoundary, Grid2D, MacVectorField, ScalarField,
};
use crate::poisson::{default_max_iter, DirichletLaplacian};
use crate::stationary::{solve_pb, StationarySolution};
use crate::transport::{step_charges, ChargePair, TRANSPORT_TOL};

pub use config::SimConfig;
pub use presets::{generate, presets, InitialData, PresetInfo, PresetParams};

/// Relative tolerances of the three elliptic solves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub poisson: f64,
    pub pb: f64,
    pub projection: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            poisson: 1e-10,
            pb: 1e-10,
            projection: 1e-10,
        }
    }
}

/// Full state `{u, p, v, w, phi, t}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemState {
    pub u: MacVectorField,
    pub p: ScalarField,
    pub v: ScalarField,
    pub w: ScalarField,
    pub phi: ScalarField,
    pub t: f64,
}

impl SystemState {
    /// Builds a state at `t = 0`, solving for the potential of `v - w`.
    pub fn new(
        v: ScalarField,
        w: ScalarField,
        u: MacVectorField,
        poisson_tol: f64,
    ) -> Result<Self> {
        let grid = *v.grid();
        if *w.grid() != grid || *u.grid() != grid {
            return Err(EhdError::GridMismatch);
        }
        if v.min() < 0.0 || w.min() < 0.0 {
            return Err(EhdError::InvalidInput(
                "charge densities must be nonnegative".into(),
            ));
        }
        if u.max_abs_boundary() != 0.0 {
            return Err(EhdError::InvalidInput(
                "velocity must vanish on boundary faces".into(),
            ));
        }
        let phi = solve_potential(&v, &w, ScalarField::zeros(grid), poisson_tol)?;
        Ok(Self {
            u,
            p: ScalarField::zeros(grid),
            v,
            w,
            phi,
            t: 0.0,
        })
    }

    /// The stationary solution at rest.
    pub fn at_equilibrium(s: &StationarySolution) -> Self {
        let grid = *s.grid();
        Self {
            u: MacVectorField::zeros(grid),
            p: ScalarField::zeros(grid),
            v: s.v.clone(),
            w: s.w.clone(),
            phi: s.phi.clone(),
            t: 0.0,
        }
    }

    pub fn grid(&self) -> &Grid2D {
        self.v.grid()
    }

    pub fn masses(&self) -> (f64, f64) {
        (integrate(&self.v), integrate(&self.w))
    }
}

fn solve_potential(
    v: &ScalarField,
    w: &ScalarField,
    guess: ScalarField,
    tol: f64,
) -> Result<ScalarField> {
    let rhs = v.zip_map(w, |a, b| a - b)?;
    let grid = *v.grid();
    DirichletLaplacian::new(grid).solve_from(&rhs, guess, tol, 4 * default_max_iter(&grid))
}

/// Largest admissible step: `safety * min(hx, hy) / max(max|u|, max|grad phi|)`.
pub fn cfl_limit(state: &SystemState, safety: f64) -> f64 {
    let drift = grad_to_faces(&state.phi, FaceBoundary::DirichletZero).max_abs();
    let speed = state.u.max_abs().max(drift);
    if speed == 0.0 {
        f64::INFINITY
    } else {
        safety * state.grid().min_spacing() / speed
    }
}

/// Advances the coupled system by `dt`.
pub fn step(
    state: &SystemState,
    dt: f64,
    tol: &Tolerances,
    cfl_safety: f64,
) -> Result<SystemState> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(EhdError::InvalidInput(format!(
            "dt must be positive, got {dt}"
        )));
    }
    let limit = cfl_limit(state, cfl_safety);
    if dt > limit {
        return Err(EhdError::CflViolation { dt, limit });
    }
    let phi = solve_potential(&state.v, &state.w, state.phi.clone(), tol.poisson)?;
    let charges = ChargePair {
        v: state.v.clone(),
        w: state.w.clone(),
    };
    let charges = step_charges(&charges, &phi, &state.u, dt, TRANSPORT_TOL)?;
    let f = body_force(&charges.v, &charges.w, &phi)?;
    let fluid = FluidState {
        u: state.u.clone(),
        p: state.p.clone(),
    };
    let fluid = step_velocity(&fluid, &f, dt, tol.projection)?;
    let phi = solve_potential(&charges.v, &charges.w, phi, tol.poisson)?;
    Ok(SystemState {
        u: fluid.u,
        p: fluid.p,
        v: charges.v,
        w: charges.w,
        phi,
        t: state.t + dt,
    })
}

/// Result of [`run`].
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub reports: Vec<EnergyReport>,
    pub initial: SystemState,
    pub final_state: SystemState,
    pub stationary: StationarySolution,
    pub steps: usize,
}

impl RunOutput {
    /// `(t, value)` pairs of one report column.
    pub fn series(&self, f: impl Fn(&EnergyReport) -> f64) -> Vec<(f64, f64)> {
        self.reports.iter().map(|r| (r.t, f(r))).collect()
    }

    /// The diagnostics CSV, header included.
    pub fn csv(&self) -> String {
        let mut s = String::from(CSV_HEADER);
        s.push('\n');
        for r in &self.reports {
            s.push_str(&r.csv_row());
            s.push('\n');
        }
        s
    }
}

/// Runs the configured simulation, writing output when `config.output.dir`
/// is set.
pub fn run(config: &SimConfig) -> Result<RunOutput> {
    config.validate()?;
    let grid = config.grid()?;
    let tol = config.tolerances();
    let init = config.initial_data()?;
    let (m, n) = (integrate(&init.v), integrate(&init.w));
    if m + n > config.output.rho0_warn {
        warn!(
            "total mass {:.3e} exceeds the small-data threshold {:.3e}",
            m + n,
            config.output.rho0_warn
        );
    }
    let stationary = solve_pb(m, n, grid, tol.pb)?;
    let initial = SystemState::new(init.v, init.w, init.u, tol.poisson)?;
    run_from(config, initial, stationary)
}

/// Same as [`run`] from an explicit initial state and stationary target.
pub fn run_from(
    config: &SimConfig,
    initial: SystemState,
    stationary: StationarySolution,
) -> Result<RunOutput> {
    let tol = config.tolerances();
    let out_dir = config.output.dir.clone();
    let snap_every = config.output.snapshot_every;
    let record_every = config.time.record_every.max(1);
    let t_max = config.time.t_max;
    let safety = config.time.cfl_safety;

    let mut reports = Vec::new();
    let mut state = initial.clone();
    let mut steps = 0usize;

    if t_max > 0.0 {
        reports.push(energy_report(&state, &stationary)?);
        if let (Some(dir), true) = (&out_dir, snap_every > 0) {
            write_snapshot(dir, &state, 0)?;
        }
        let t_end_tol = 1e-12 * t_max;
        while t_max - state.t > t_end_tol {
            let dt = config
                .time
                .dt
                .min(cfl_limit(&state, safety))
                .min(t_max - state.t);
            state = step(&state, dt, &tol, safety)?;
            steps += 1;
            let last = t_max - state.t <= t_end_tol;
            if steps.is_multiple_of(record_every) {
                reports.push(energy_report(&state, &stationary)?);
            }
            if let Some(dir) = &out_dir {
                if snap_every > 0 && (steps.is_multiple_of(snap_every) || last) {
                    write_snapshot(dir, &state, steps)?;
                }
            }
        }
        info!("finished {steps} steps at t = {}", state.t);
    }

    let output = RunOutput {
        reports,
        initial,
        final_state: state,
        stationary,
        steps,
    };
    if let Some(dir) = &out_dir {
        write_outputs(dir, &output)?;
    }
    Ok(output)
}

fn write_snapshot(dir: &Path, s: &SystemState, step: usize) -> Result<()> {
    let snap = dir.join("snapshots");
    let g = s.grid();
    let name = |f: &str| -> PathBuf { snap.join(format!("{f}_{step}.txt")) };
    s.v.write_matrix(&name("v"))?;
    s.w.write_matrix(&name("w"))?;
    s.phi.write_matrix(&name("phi"))?;
    s.p.write_matrix(&name("p"))?;
    write_matrix(&name("ux"), s.u.ux(), g.nx() + 1)?;
    write_matrix(&name("uy"), s.u.uy(), g.nx())?;
    Ok(())
}

fn write_outputs(dir: &Path, out: &RunOutput) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut f = fs::File::create(dir.join("diagnostics.csv"))?;
    f.write_all(out.csv().as_bytes())?;
    out.stationary.export(&dir.join("stationary"))?;
    Ok(())
}
