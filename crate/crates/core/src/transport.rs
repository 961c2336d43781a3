//! Nernst-Planck transport of the two charge densities.
//!
//! Drift-diffusion uses Scharfetter-Gummel exponential fitting and is solved
//! implicitly; advection by the fluid velocity is explicit first-order upwind
//! inside the same step. Boundary faces carry no flux at all, which is the
//! discrete no-flux condition, so species masses only change by the linear
//! solver residual; that residual is removed by rescaling to the pre-step mass.
//!
//! Sign convention: the cation density `v` drifts with `-grad phi` in the
//! flux `grad v - v grad phi`, whose zero set is `v ~ exp(+phi)`. The anion
//! density `w` has flux `grad w + w grad phi` and equilibrates to
//! `w ~ exp(-phi)`.

use crate::error::{EhdError, Result};
use crate::grid::{kahan_sum, Grid2D, MacVectorField, ScalarField};
use crate::linalg::{pcg, SymStencil};

/// Relative residual for the implicit drift-diffusion solve.
pub const TRANSPORT_TOL: f64 = 1e-13;

/// Which charge carrier is being advanced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Species {
    /// `v`, flux `grad v - v grad phi`.
    Cation,
    /// `w`, flux `grad w + w grad phi`.
    Anion,
}

impl Species {
    /// The `sign` argument of [`sg_face_flux`]: `-1` for `v`, `+1` for `w`.
    pub fn drift_sign(self) -> f64 {
        match self {
            Species::Cation => -1.0,
            Species::Anion => 1.0,
        }
    }
}

/// Bernoulli function `x / (e^x - 1)`.
pub fn bernoulli(x: f64) -> f64 {
    if x.abs() < 1e-10 {
        1.0 - 0.5 * x + x * x / 12.0
    } else {
        x / x.exp_m1()
    }
}

/// Scharfetter-Gummel flux density across a face from the left cell to the
/// right cell: `(B(sign*dpsi) cL - B(-sign*dpsi) cR) / h` with
/// `dpsi = phi_R - phi_L`.
pub fn sg_face_flux(cl: f64, cr: f64, dpsi: f64, h: f64, sign: f64) -> f64 {
    (bernoulli(sign * dpsi) * cl - bernoulli(-sign * dpsi) * cr) / h
}

/// Cation and anion densities.
#[derive(Debug, Clone, PartialEq)]
pub struct ChargePair {
    pub v: ScalarField,
    pub w: ScalarField,
}

impl ChargePair {
    pub fn new(v: ScalarField, w: ScalarField) -> Result<Self> {
        if v.grid() != w.grid() {
            return Err(EhdError::GridMismatch);
        }
        if v.min() < 0.0 || w.min() < 0.0 {
            return Err(EhdError::InvalidInput(
                "charge densities must be nonnegative".into(),
            ));
        }
        Ok(Self { v, w })
    }

    pub fn masses(&self) -> (f64, f64) {
        (
            crate::grid::integrate(&self.v),
            crate::grid::integrate(&self.w),
        )
    }
}

/// Discrete Boltzmann profile `mass * exp(-sign*phi) / int exp(-sign*phi)`.
/// It is an exact zero of the Scharfetter-Gummel flux on every face.
pub fn discrete_maxwellian(phi: &ScalarField, mass: f64, species: Species) -> ScalarField {
    let s = species.drift_sign();
    let shift = phi
        .data()
        .iter()
        .map(|p| -s * p)
        .fold(f64::NEG_INFINITY, f64::max);
    let e = phi.map(|p| (-s * p - shift).exp());
    let z = crate::grid::integrate(&e);
    e.scaled(mass / z)
}

/// Explicit upwind advective update `c - dt div(u c)`.
pub fn advect_upwind(c: &ScalarField, u: &MacVectorField, dt: f64) -> ScalarField {
    let g = *c.grid();
    let (nx, ny) = (g.nx(), g.ny());
    let (hx, hy) = (g.hx(), g.hy());
    let d = c.data();
    let mut out = d.to_vec();
    for j in 0..ny {
        for i in 1..nx {
            let vel = u.ux()[g.ux_idx(i, j)];
            if vel == 0.0 {
                continue;
            }
            let (l, r) = (g.idx(i - 1, j), g.idx(i, j));
            let flux = vel * if vel > 0.0 { d[l] } else { d[r] };
            out[l] -= dt * flux / hx;
            out[r] += dt * flux / hx;
        }
    }
    for j in 1..ny {
        for i in 0..nx {
            let vel = u.uy()[g.uy_idx(i, j)];
            if vel == 0.0 {
                continue;
            }
            let (b, t) = (g.idx(i, j - 1), g.idx(i, j));
            let flux = vel * if vel > 0.0 { d[b] } else { d[t] };
            out[b] -= dt * flux / hy;
            out[t] += dt * flux / hy;
        }
    }
    ScalarField::from_vec(g, out).expect("finite update")
}

/// Builds the symmetrized implicit operator `diag(m) + dt K` acting on
/// `g = c / m`, with `m = exp(-sign*phi)` (shifted so `max m = 1`).
fn implicit_system(phi: &ScalarField, species: Species, dt: f64) -> (SymStencil, Vec<f64>) {
    let g = *phi.grid();
    let (nx, ny) = (g.nx(), g.ny());
    let (hx, hy) = (g.hx(), g.hy());
    let s = species.drift_sign();
    let p = phi.data();
    let shift = p.iter().map(|v| -s * v).fold(f64::NEG_INFINITY, f64::max);
    let m: Vec<f64> = p.iter().map(|v| (-s * v - shift).exp()).collect();
    let mut op = SymStencil::zeros(nx, ny);
    op.diag.copy_from_slice(&m);
    for j in 0..ny {
        for i in 0..nx {
            let k = g.idx(i, j);
            if i + 1 < nx {
                let dpsi = p[k + 1] - p[k];
                let a = bernoulli(s * dpsi) * m[k] / hx;
                op.add_edge(k, k + 1, dt * a / hx);
            }
            if j + 1 < ny {
                let dpsi = p[k + nx] - p[k];
                let a = bernoulli(s * dpsi) * m[k] / hy;
                op.add_edge(k, k + nx, dt * a / hy);
            }
        }
    }
    (op, m)
}

/// Advances one species by one step. Advection is explicit upwind, drift and
/// diffusion are backward Euler with `phi` held fixed.
pub fn step_species(
    c: &ScalarField,
    species: Species,
    phi: &ScalarField,
    u: &MacVectorField,
    dt: f64,
    tol: f64,
) -> Result<ScalarField> {
    let grid = *c.grid();
    if *phi.grid() != grid || *u.grid() != grid {
        return Err(EhdError::GridMismatch);
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(EhdError::InvalidInput(format!(
            "dt must be positive, got {dt}"
        )));
    }
    let mass = kahan_sum(c.data().iter().copied());
    let rhs = if u.is_zero() {
        c.clone()
    } else {
        advect_upwind(c, u, dt)
    };
    let (op, m) = implicit_system(phi, species, dt);
    let mut x: Vec<f64> = c.data().iter().zip(&m).map(|(c, m)| c / m).collect();
    let bnorm = rhs.data().iter().map(|v| v * v).sum::<f64>().sqrt();
    let max_iter = 50 * (grid.nx() + grid.ny()) + 500;
    pcg(&op, rhs.data(), &mut x, tol * bnorm, max_iter, false)?;
    let mut out: Vec<f64> = x.iter().zip(&m).map(|(g, m)| (g * m).max(0.0)).collect();
    let new_mass = kahan_sum(out.iter().copied());
    if new_mass > 0.0 && mass > 0.0 {
        let f = mass / new_mass;
        for v in out.iter_mut() {
            *v *= f;
        }
    }
    ScalarField::from_vec(grid, out)
}

/// Advances both charge densities by `dt` under the potential `phi` and the
/// face velocity `u` (zero on boundary faces).
pub fn step_charges(
    c: &ChargePair,
    phi: &ScalarField,
    u: &MacVectorField,
    dt: f64,
    tol: f64,
) -> Result<ChargePair> {
    if u.max_abs_boundary() != 0.0 {
        return Err(EhdError::InvalidInput(
            "velocity must vanish on boundary faces".into(),
        ));
    }
    Ok(ChargePair {
        v: step_species(&c.v, Species::Cation, phi, u, dt, tol)?,
        w: step_species(&c.w, Species::Anion, phi, u, dt, tol)?,
    })
}

/// Net Scharfetter-Gummel flux field of one species (diagnostic helper);
/// boundary faces are zero.
pub fn sg_flux_field(c: &ScalarField, species: Species, phi: &ScalarField) -> MacVectorField {
    let g: Grid2D = *c.grid();
    let (nx, ny) = (g.nx(), g.ny());
    let s = species.drift_sign();
    let (d, p) = (c.data(), phi.data());
    let mut f = MacVectorField::zeros(g);
    for j in 0..ny {
        for i in 1..nx {
            let (l, r) = (g.idx(i - 1, j), g.idx(i, j));
            f.ux_mut()[g.ux_idx(i, j)] = sg_face_flux(d[l], d[r], p[r] - p[l], g.hx(), s);
        }
    }
    for j in 1..ny {
        for i in 0..nx {
            let (b, t) = (g.idx(i, j - 1), g.idx(i, j));
            f.uy_mut()[g.uy_idx(i, j)] = sg_face_flux(d[b], d[t], p[t] - p[b], g.hy(), s);
        }
    }
    f
}
