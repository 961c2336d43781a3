//! Incompressible velocity update on the MAC grid.
//!
//! One step is: explicit upwind self-advection, implicit viscous solve per
//! component with no-slip walls, addition of the body force, then a pressure
//! projection onto discretely divergence-free fields. The force is added after
//! the viscous solve so that gradient forces are removed exactly by the
//! projection.

use crate::error::{EhdError, Result};
use crate::grid::{
    div_from_faces, grad_to_faces, velocity_gradient_sq, FaceBoundary, Grid2D, MacVectorField,
    ScalarField,
};
use crate::linalg::{pcg, SymStencil};
use crate::poisson::{default_max_iter, NeumannLaplacian};

/// Velocity and zero-mean pressure.
#[derive(Debug, Clone, PartialEq)]
pub struct FluidState {
    pub u: MacVectorField,
    pub p: ScalarField,
}

impl FluidState {
    pub fn at_rest(grid: Grid2D) -> Self {
        Self {
            u: MacVectorField::zeros(grid),
            p: ScalarField::zeros(grid),
        }
    }
}

/// Electric body force `(v - w) grad phi` on interior faces, with `v - w`
/// averaged to the face. Boundary faces are zero.
pub fn body_force(v: &ScalarField, w: &ScalarField, phi: &ScalarField) -> Result<MacVectorField> {
    let g = *v.grid();
    if *w.grid() != g || *phi.grid() != g {
        return Err(EhdError::GridMismatch);
    }
    let q = v.zip_map(w, |a, b| a - b)?;
    let mut f = grad_to_faces(phi, FaceBoundary::ZeroFlux);
    let (nx, ny) = (g.nx(), g.ny());
    for j in 0..ny {
        for i in 1..nx {
            let k = g.ux_idx(i, j);
            f.ux_mut()[k] *= 0.5 * (q.at(i - 1, j) + q.at(i, j));
        }
    }
    for j in 1..ny {
        for i in 0..nx {
            let k = g.uy_idx(i, j);
            f.uy_mut()[k] *= 0.5 * (q.at(i, j - 1) + q.at(i, j));
        }
    }
    Ok(f)
}

/// Divergence of the electric stress `grad phi (x) grad phi - |grad phi|^2 I / 2`
/// on faces, with `phi` carrying homogeneous Dirichlet data. Agrees with
/// [`body_force`] to second order away from the boundary when `phi` solves
/// the Poisson equation for `v - w`.
pub fn stress_divergence(phi: &ScalarField) -> MacVectorField {
    let g = *phi.grid();
    let (nx, ny) = (g.nx(), g.ny());
    let (hx, hy) = (g.hx(), g.hy());
    let gp = grad_to_faces(phi, FaceBoundary::DirichletZero);
    let (gx, gy) = gp.cell_centered();
    // normal stress difference 1/2 (gx^2 - gy^2) at cell centers
    let sxx: Vec<f64> = gx
        .data()
        .iter()
        .zip(gy.data())
        .map(|(a, b)| 0.5 * (a * a - b * b))
        .collect();
    // shear stress gx*gy at nodes (i, j), i in 0..=nx, j in 0..=ny
    let node = |i: usize, j: usize| j * (nx + 1) + i;
    let mut sxy = vec![0.0; (nx + 1) * (ny + 1)];
    for j in 0..=ny {
        for i in 0..=nx {
            let mut ax = 0.0;
            let mut cx = 0;
            if j > 0 {
                ax += gp.ux()[g.ux_idx(i, j - 1)];
                cx += 1;
            }
            if j < ny {
                ax += gp.ux()[g.ux_idx(i, j)];
                cx += 1;
            }
            let mut ay = 0.0;
            let mut cy = 0;
            if i > 0 {
                ay += gp.uy()[g.uy_idx(i - 1, j)];
                cy += 1;
            }
            if i < nx {
                ay += gp.uy()[g.uy_idx(i, j)];
                cy += 1;
            }
            sxy[node(i, j)] = (ax / cx as f64) * (ay / cy as f64);
        }
    }
    let mut out = MacVectorField::zeros(g);
    for j in 0..ny {
        for i in 1..nx {
            out.ux_mut()[g.ux_idx(i, j)] = (sxx[g.idx(i, j)] - sxx[g.idx(i - 1, j)]) / hx
                + (sxy[node(i, j + 1)] - sxy[node(i, j)]) / hy;
        }
    }
    for j in 1..ny {
        for i in 0..nx {
            out.uy_mut()[g.uy_idx(i, j)] = -(sxx[g.idx(i, j)] - sxx[g.idx(i, j - 1)]) / hy
                + (sxy[node(i + 1, j)] - sxy[node(i, j)]) / hx;
        }
    }
    out
}

/// `u . grad u` by first-order upwinding; zero on boundary faces.
fn advection(u: &MacVectorField) -> MacVectorField {
    let g = *u.grid();
    let (nx, ny) = (g.nx(), g.ny());
    let (hx, hy) = (g.hx(), g.hy());
    let (ux, uy) = (u.ux(), u.uy());
    let mut out = MacVectorField::zeros(g);
    for j in 0..ny {
        for i in 1..nx {
            let k = g.ux_idx(i, j);
            let a = ux[k];
            let b = 0.25
                * (uy[g.uy_idx(i - 1, j)]
                    + uy[g.uy_idx(i, j)]
                    + uy[g.uy_idx(i - 1, j + 1)]
                    + uy[g.uy_idx(i, j + 1)]);
            let ddx = if a > 0.0 {
                (a - ux[g.ux_idx(i - 1, j)]) / hx
            } else {
                (ux[g.ux_idx(i + 1, j)] - a) / hx
            };
            let ddy = if b > 0.0 {
                let s = if j > 0 { ux[g.ux_idx(i, j - 1)] } else { -a };
                (a - s) / hy
            } else {
                let n = if j + 1 < ny {
                    ux[g.ux_idx(i, j + 1)]
                } else {
                    -a
                };
                (n - a) / hy
            };
            out.ux_mut()[k] = a * ddx + b * ddy;
        }
    }
    for j in 1..ny {
        for i in 0..nx {
            let k = g.uy_idx(i, j);
            let b = uy[k];
            let a = 0.25
                * (ux[g.ux_idx(i, j - 1)]
                    + ux[g.ux_idx(i + 1, j - 1)]
                    + ux[g.ux_idx(i, j)]
                    + ux[g.ux_idx(i + 1, j)]);
            let ddy = if b > 0.0 {
                (b - uy[g.uy_idx(i, j - 1)]) / hy
            } else {
                (uy[g.uy_idx(i, j + 1)] - b) / hy
            };
            let ddx = if a > 0.0 {
                let w = if i > 0 { uy[g.uy_idx(i - 1, j)] } else { -b };
                (b - w) / hx
            } else {
                let e = if i + 1 < nx {
                    uy[g.uy_idx(i + 1, j)]
                } else {
                    -b
                };
                (e - b) / hx
            };
            out.uy_mut()[k] = a * ddx + b * ddy;
        }
    }
    out
}

/// `I - dt lap` for one velocity component on an `mx x my` face lattice.
/// Faces where `fixed` holds are boundary faces pinned to zero; lattice edges
/// without a neighbour are no-slip walls handled by the ghost `-u`.
fn viscous_operator(
    mx: usize,
    my: usize,
    hx: f64,
    hy: f64,
    dt: f64,
    fixed: impl Fn(usize, usize) -> bool,
) -> SymStencil {
    let cx = dt / (hx * hx);
    let cy = dt / (hy * hy);
    let mut op = SymStencil::zeros(mx, my);
    for j in 0..my {
        for i in 0..mx {
            let k = j * mx + i;
            op.diag[k] += 1.0;
            if fixed(i, j) {
                continue;
            }
            // x direction
            if i + 1 < mx {
                if fixed(i + 1, j) {
                    op.diag[k] += cx;
                } else {
                    op.add_edge(k, k + 1, cx);
                }
            } else {
                op.diag[k] += 2.0 * cx;
            }
            if i > 0 {
                if fixed(i - 1, j) {
                    op.diag[k] += cx;
                }
            } else {
                op.diag[k] += 2.0 * cx;
            }
            // y direction
            if j + 1 < my {
                if fixed(i, j + 1) {
                    op.diag[k] += cy;
                } else {
                    op.add_edge(k, k + mx, cy);
                }
            } else {
                op.diag[k] += 2.0 * cy;
            }
            if j > 0 {
                if fixed(i, j - 1) {
                    op.diag[k] += cy;
                }
            } else {
                op.diag[k] += 2.0 * cy;
            }
        }
    }
    op
}

fn implicit_viscous(u: &MacVectorField, dt: f64, tol: f64) -> Result<MacVectorField> {
    let g = *u.grid();
    let (nx, ny) = (g.nx(), g.ny());
    let (hx, hy) = (g.hx(), g.hy());
    let max_iter = default_max_iter(&g);
    let opx = viscous_operator(nx + 1, ny, hx, hy, dt, |i, _| i == 0 || i == nx);
    let opy = viscous_operator(nx, ny + 1, hx, hy, dt, |_, j| j == 0 || j == ny);
    let mut x = u.ux().to_vec();
    let mut y = u.uy().to_vec();
    let scale = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
    pcg(&opx, u.ux(), &mut x, tol * scale(u.ux()), max_iter, false)?;
    pcg(&opy, u.uy(), &mut y, tol * scale(u.uy()), max_iter, false)?;
    let mut out = MacVectorField::from_parts(g, x, y)?;
    out.zero_boundary();
    Ok(out)
}

/// Projects `u` onto discretely divergence-free fields; returns the projected
/// field and the scalar `q` with `u_out = u - grad q`.
pub fn project(u: &MacVectorField, tol: f64) -> Result<(MacVectorField, ScalarField)> {
    let g = *u.grid();
    let d = div_from_faces(u);
    let q = NeumannLaplacian::new(g).solve(&d, tol, default_max_iter(&g))?;
    let mut out = u.clone();
    out.axpy(-1.0, &grad_to_faces(&q, FaceBoundary::ZeroFlux))?;
    Ok((out, q))
}

/// Advances the velocity by one projection step under the body force `f`.
///
/// `tol` is the relative tolerance of the viscous and pressure solves.
pub fn step_velocity(s: &FluidState, f: &MacVectorField, dt: f64, tol: f64) -> Result<FluidState> {
    let g = *s.u.grid();
    if *f.grid() != g || *s.p.grid() != g {
        return Err(EhdError::GridMismatch);
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(EhdError::InvalidInput(format!(
            "dt must be positive, got {dt}"
        )));
    }
    let umax = s.u.max_abs();
    if umax > 0.0 {
        let limit = g.min_spacing() / umax;
        if dt > limit {
            return Err(EhdError::CflViolation { dt, limit });
        }
    }
    let mut star = s.u.clone();
    if umax > 0.0 {
        star.axpy(-dt, &advection(&s.u))?;
    }
    let mut next = if star.is_zero() {
        star
    } else {
        implicit_viscous(&star, dt, tol)?
    };
    next.axpy(dt, f)?;
    next.zero_boundary();
    if next.is_zero() {
        return Ok(FluidState::at_rest(g));
    }
    let d = div_from_faces(&next);
    let rhs = d.scaled(1.0 / dt);
    let p = NeumannLaplacian::new(g).solve_from(&rhs, s.p.clone(), tol, default_max_iter(&g))?;
    next.axpy(-dt, &grad_to_faces(&p, FaceBoundary::ZeroFlux))?;
    Ok(FluidState { u: next, p })
}

/// `||u||_{L^4} / (||u||_{L^2}^{1/2} ||grad u||_{L^2}^{1/2})`, with the norms
/// of `u` taken at cell centers and the gradient from the no-slip face stencil.
pub fn ladyzhenskaya_ratio(u: &MacVectorField) -> Result<f64> {
    if u.is_zero() {
        return Err(EhdError::ZeroField);
    }
    let g = *u.grid();
    let (cx, cy) = u.cell_centered();
    let area = g.cell_area();
    let mut s2 = 0.0;
    let mut s4 = 0.0;
    for (a, b) in cx.data().iter().zip(cy.data()) {
        let m = a * a + b * b;
        s2 += m;
        s4 += m * m;
    }
    let l2 = (area * s2).sqrt();
    let l4 = (area * s4).powf(0.25);
    let grad = velocity_gradient_sq(u).sqrt();
    if l2 == 0.0 || grad == 0.0 {
        return Err(EhdError::ZeroField);
    }
    Ok(l4 / (l2.sqrt() * grad.sqrt()))
}

/// Divergence-free field from a stream function sampled at grid nodes
/// (`psi(x, y)` must vanish on the boundary for the walls to be impermeable).
pub fn from_stream_function(grid: Grid2D, psi: impl Fn(f64, f64) -> f64) -> MacVectorField {
    let (nx, ny) = (grid.nx(), grid.ny());
    let (hx, hy) = (grid.hx(), grid.hy());
    let node = |i: usize, j: usize| psi(i as f64 * hx, j as f64 * hy);
    let mut u = MacVectorField::zeros(grid);
    for j in 0..ny {
        for i in 0..=nx {
            u.ux_mut()[grid.ux_idx(i, j)] = (node(i, j + 1) - node(i, j)) / hy;
        }
    }
    for j in 0..=ny {
        for i in 0..nx {
            u.uy_mut()[grid.uy_idx(i, j)] = -(node(i + 1, j) - node(i, j)) / hx;
        }
    }
    u.zero_boundary();
    u
}
