//! Electrostatic Poisson solve `lap phi = rhs` with `phi = 0` on the boundary,
//! and the zero-flux (Neumann) Laplacian used by the pressure projection.
//!
//! Dirichlet data enter through the ghost value `-f_interior`, which puts the
//! zero boundary value on the face midpoint. The discrete operator is
//! `div_from_faces . grad_to_faces(DirichletZero)`, so it is symmetric and
//! negative definite with respect to the cell inner product.

use crate::error::{EhdError, Result};
use crate::grid::{integrate, lp_norm, Grid2D, ScalarField};
use crate::linalg::{pcg, SymStencil};

/// Default relative tolerance for all elliptic solves.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Builds `-lap_h`, positive definite with Dirichlet ghosts and positive
/// semidefinite (constants in the kernel) without.
pub(crate) fn stiffness(grid: &Grid2D, dirichlet: bool) -> SymStencil {
    let (nx, ny) = (grid.nx(), grid.ny());
    let (hx, hy) = (grid.hx(), grid.hy());
    let cx = 1.0 / (hx * hx);
    let cy = 1.0 / (hy * hy);
    let mut op = SymStencil::zeros(nx, ny);
    for j in 0..ny {
        for i in 0..nx {
            let k = grid.idx(i, j);
            if i + 1 < nx {
                op.add_edge(k, k + 1, cx);
            }
            if j + 1 < ny {
                op.add_edge(k, k + nx, cy);
            }
            if dirichlet {
                // ghost = -f: each boundary face contributes 2/h^2 to the diagonal
                if i == 0 || i + 1 == nx {
                    op.diag[k] += 2.0 * cx;
                }
                if j == 0 || j + 1 == ny {
                    op.diag[k] += 2.0 * cy;
                }
            }
        }
    }
    op
}

/// Discrete Laplacian with homogeneous Dirichlet data.
#[derive(Debug, Clone)]
pub struct DirichletLaplacian {
    grid: Grid2D,
    neg: SymStencil,
}

impl DirichletLaplacian {
    pub fn new(grid: Grid2D) -> Self {
        Self {
            grid,
            neg: stiffness(&grid, true),
        }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    /// `lap_h f`.
    pub fn apply(&self, f: &ScalarField) -> Result<ScalarField> {
        if *f.grid() != self.grid {
            return Err(EhdError::GridMismatch);
        }
        let mut out = vec![0.0; self.grid.num_cells()];
        self.neg.apply(f.data(), &mut out);
        for v in out.iter_mut() {
            *v = -*v;
        }
        Ok(ScalarField::from_vec(self.grid, out).expect("finite by construction"))
    }

    /// Solves `lap_h phi = rhs` so that `||lap_h phi - rhs||_2 <= tol (1 + ||rhs||_2)`.
    pub fn solve(&self, rhs: &ScalarField, tol: f64, max_iter: usize) -> Result<ScalarField> {
        self.solve_from(rhs, ScalarField::zeros(self.grid), tol, max_iter)
    }

    /// Same as [`DirichletLaplacian::solve`] with an initial guess.
    pub fn solve_from(
        &self,
        rhs: &ScalarField,
        guess: ScalarField,
        tol: f64,
        max_iter: usize,
    ) -> Result<ScalarField> {
        if *rhs.grid() != self.grid || *guess.grid() != self.grid {
            return Err(EhdError::GridMismatch);
        }
        check_tol(tol)?;
        let b: Vec<f64> = rhs.data().iter().map(|v| -v).collect();
        let abs_tol = l2_to_euclid(&self.grid, tol * (1.0 + lp_norm(rhs, 2.0)?));
        let mut x = guess.into_vec();
        pcg(&self.neg, &b, &mut x, abs_tol, max_iter, false)?;
        ScalarField::from_vec(self.grid, x)
    }
}

/// Discrete Laplacian with zero-flux boundary faces; singular on constants.
#[derive(Debug, Clone)]
pub struct NeumannLaplacian {
    grid: Grid2D,
    neg: SymStencil,
}

impl NeumannLaplacian {
    pub fn new(grid: Grid2D) -> Self {
        Self {
            grid,
            neg: stiffness(&grid, false),
        }
    }

    pub fn apply(&self, f: &ScalarField) -> Result<ScalarField> {
        if *f.grid() != self.grid {
            return Err(EhdError::GridMismatch);
        }
        let mut out = vec![0.0; self.grid.num_cells()];
        self.neg.apply(f.data(), &mut out);
        for v in out.iter_mut() {
            *v = -*v;
        }
        Ok(ScalarField::from_vec(self.grid, out).expect("finite by construction"))
    }

    /// Zero-mean solution of `lap_N p = rhs`. The right-hand side must
    /// integrate to zero (relative to its `L^1` size) to within `1e-10`.
    pub fn solve(&self, rhs: &ScalarField, tol: f64, max_iter: usize) -> Result<ScalarField> {
        self.solve_from(rhs, ScalarField::zeros(self.grid), tol, max_iter)
    }

    /// Same as [`NeumannLaplacian::solve`] with an initial guess.
    pub fn solve_from(
        &self,
        rhs: &ScalarField,
        guess: ScalarField,
        tol: f64,
        max_iter: usize,
    ) -> Result<ScalarField> {
        if *rhs.grid() != self.grid || *guess.grid() != self.grid {
            return Err(EhdError::GridMismatch);
        }
        check_tol(tol)?;
        let mass = integrate(rhs);
        let scale = lp_norm(rhs, 1.0)?.max(1.0);
        if mass.abs() > 1e-10 * scale {
            return Err(EhdError::Incompatible { mass });
        }
        let n = self.grid.num_cells();
        let mean = rhs.data().iter().sum::<f64>() / n as f64;
        let b: Vec<f64> = rhs.data().iter().map(|v| mean - v).collect();
        let abs_tol = l2_to_euclid(&self.grid, tol * (1.0 + lp_norm(rhs, 2.0)?));
        let mut x = guess.into_vec();
        pcg(&self.neg, &b, &mut x, abs_tol, max_iter, true)?;
        let xm = x.iter().sum::<f64>() / n as f64;
        for v in x.iter_mut() {
            *v -= xm;
        }
        ScalarField::from_vec(self.grid, x)
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(EhdError::InvalidInput(format!(
            "tolerance must be positive, got {tol}"
        )))
    }
}

/// Converts an `L^2`-quadrature bound into a Euclidean one.
pub(crate) fn l2_to_euclid(grid: &Grid2D, l2: f64) -> f64 {
    l2 / grid.cell_area().sqrt()
}

/// Iteration cap used when callers do not supply one.
pub fn default_max_iter(grid: &Grid2D) -> usize {
    20 * (grid.nx() + grid.ny()) + 200
}

/// Solves `lap_h phi = rhs` with `phi = 0` on the boundary.
pub fn solve_dirichlet(rhs: &ScalarField, tol: f64, max_iter: usize) -> Result<ScalarField> {
    DirichletLaplacian::new(*rhs.grid()).solve(rhs, tol, max_iter)
}

/// Zero-mean solution of the zero-flux Poisson problem.
pub fn solve_neumann(rhs: &ScalarField, tol: f64) -> Result<ScalarField> {
    let grid = *rhs.grid();
    NeumannLaplacian::new(grid).solve(rhs, tol, default_max_iter(&grid))
}
