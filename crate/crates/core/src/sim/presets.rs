//! Named initial-data generators.

use std::f64::consts::PI;

use crate::error::{EhdError, Result};
use crate::fluid::from_stream_function;
use crate::grid::{integrate, Grid2D, MacVectorField, ScalarField};
use crate::stationary::solve_pb;

/// Parameters shared by all presets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PresetParams {
    /// Mass of `v`.
    pub m: f64,
    /// Mass of `w`.
    pub n: f64,
    /// Relative perturbation size for `near-equilibrium`.
    pub epsilon: f64,
    /// Peak-scale velocity for `vortex-charge`.
    pub u_amplitude: f64,
}

impl Default for PresetParams {
    fn default() -> Self {
        Self {
            m: 0.05,
            n: 0.1,
            epsilon: 1e-3,
            u_amplitude: 0.5,
        }
    }
}

/// Initial charges and velocity.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialData {
    pub v: ScalarField,
    pub w: ScalarField,
    pub u: MacVectorField,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PresetInfo {
    pub name: &'static str,
    pub description: &'static str,
}

const PRESETS: [PresetInfo; 4] = [
    PresetInfo {
        name: "symmetric-null",
        description: "uniform v = w (requires M = N), fluid at rest; already stationary",
    },
    PresetInfo {
        name: "relax-small-mass",
        description: "separated gaussian bumps of v and w normalized to M and N, fluid at rest",
    },
    PresetInfo {
        name: "vortex-charge",
        description: "counter-rotating vortex pair plus the relax-small-mass charge bumps",
    },
    PresetInfo {
        name: "near-equilibrium",
        description: "stationary Maxwellians perturbed multiplicatively by epsilon, fluid at rest",
    },
];

/// All available presets.
pub fn presets() -> &'static [PresetInfo] {
    &PRESETS
}

fn normalized(f: ScalarField, mass: f64) -> ScalarField {
    let z = integrate(&f);
    f.scaled(mass / z)
}

fn bump(grid: Grid2D, cx: f64, cy: f64) -> ScalarField {
    let sigma = 0.1 * grid.lx().min(grid.ly());
    let (x0, y0) = (cx * grid.lx(), cy * grid.ly());
    ScalarField::from_fn(grid, |x, y| {
        let r2 = (x - x0).powi(2) + (y - y0).powi(2);
        (-r2 / (2.0 * sigma * sigma)).exp()
    })
}

fn charge_bumps(grid: Grid2D, p: &PresetParams) -> (ScalarField, ScalarField) {
    (
        normalized(bump(grid, 0.3, 0.5), p.m),
        normalized(bump(grid, 0.7, 0.5), p.n),
    )
}

fn check(p: &PresetParams) -> Result<()> {
    if !(p.m > 0.0 && p.n > 0.0 && p.m.is_finite() && p.n.is_finite()) {
        return Err(EhdError::InvalidInput(format!(
            "preset masses must be positive, got M = {}, N = {}",
            p.m, p.n
        )));
    }
    Ok(())
}

/// Generates the named preset on `grid`. `pb_tol` is used by presets built
/// on the stationary solution.
pub fn generate(name: &str, grid: Grid2D, p: &PresetParams, pb_tol: f64) -> Result<InitialData> {
    check(p)?;
    let rest = MacVectorField::zeros(grid);
    match name {
        "symmetric-null" => {
            if p.m != p.n {
                return Err(EhdError::InvalidInput(format!(
                    "symmetric-null needs M = N, got M = {}, N = {}",
                    p.m, p.n
                )));
            }
            let c = ScalarField::constant(grid, p.m / grid.area());
            Ok(InitialData {
                v: c.clone(),
                w: c,
                u: rest,
            })
        }
        "relax-small-mass" => {
            let (v, w) = charge_bumps(grid, p);
            Ok(InitialData { v, w, u: rest })
        }
        "vortex-charge" => {
            let (v, w) = charge_bumps(grid, p);
            let (lx, ly) = (grid.lx(), grid.ly());
            let scale = p.u_amplitude * lx.min(ly) / (2.0 * PI);
            // stream function vanishing on the boundary: two cells side by side
            let u = from_stream_function(grid, |x, y| {
                scale * (2.0 * PI * x / lx).sin() * (PI * y / ly).sin()
            });
            Ok(InitialData { v, w, u })
        }
        "near-equilibrium" => {
            let s = solve_pb(p.m, p.n, grid, pb_tol)?;
            if p.epsilon == 0.0 {
                return Ok(InitialData {
                    v: s.v,
                    w: s.w,
                    u: rest,
                });
            }
            if !(p.epsilon.abs() < 1.0) {
                return Err(EhdError::InvalidInput(format!(
                    "near-equilibrium needs |epsilon| < 1, got {}",
                    p.epsilon
                )));
            }
            let (lx, ly) = (grid.lx(), grid.ly());
            let eta_v =
                ScalarField::from_fn(grid, |x, y| (PI * x / lx).cos() * (PI * y / ly).cos());
            let eta_w =
                ScalarField::from_fn(grid, |x, y| (2.0 * PI * x / lx).cos() * (PI * y / ly).sin());
            let v = s.v.zip_map(&eta_v, |a, e| a * (1.0 + p.epsilon * e))?;
            let w = s.w.zip_map(&eta_w, |a, e| a * (1.0 + p.epsilon * e))?;
            Ok(InitialData {
                v: normalized(v, p.m),
                w: normalized(w, p.n),
                u: rest,
            })
        }
        other => Err(EhdError::UnknownPreset(other.to_string())),
    }
}
