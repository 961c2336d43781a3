//! Stationary Poisson-Boltzmann solution.
//!
//! The stationary potential minimizes
//! `J[phi] = 1/2 ||grad phi||^2 + M log int e^phi + N log int e^-phi`
//! over grid functions with zero Dirichlet data. The minimizer solves
//! `lap phi = M e^phi / int e^phi - N e^-phi / int e^-phi`, and the stationary
//! densities are the two normalized exponentials.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{EhdError, Result};
use crate::grid::{
    grad_to_faces, h1_seminorm_sq, integrate, lp_norm, FaceBoundary, Grid2D, ScalarField,
};
use crate::linalg::pcg;
use crate::poisson::{default_max_iter, l2_to_euclid, stiffness, DirichletLaplacian};
use crate::transport::{discrete_maxwellian, Species};

/// Default residual tolerance of [`solve_pb`].
pub const PB_TOL: f64 = 1e-10;
const MAX_NEWTON: usize = 200;
const ARMIJO: f64 = 1e-4;

/// Converged stationary state with its masses and solver record.
#[derive(Debug, Clone)]
pub struct StationarySolution {
    pub phi: ScalarField,
    pub v: ScalarField,
    pub w: ScalarField,
    pub m: f64,
    pub n: f64,
    /// `L^2` norm of the Euler-Lagrange residual at exit.
    pub residual: f64,
    pub iterations: usize,
    /// Value of `J` at the initial guess and after every accepted step.
    pub j_history: Vec<f64>,
}

impl StationarySolution {
    pub fn grid(&self) -> &Grid2D {
        self.phi.grid()
    }

    /// Writes `phi.txt`, `v.txt`, `w.txt` and `metadata.txt` into `dir`.
    pub fn export(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        self.phi.write_matrix(&dir.join("phi.txt"))?;
        self.v.write_matrix(&dir.join("v.txt"))?;
        self.w.write_matrix(&dir.join("w.txt"))?;
        let g = self.grid();
        let mut meta = String::new();
        let _ = writeln!(meta, "M = {:.16e}", self.m);
        let _ = writeln!(meta, "N = {:.16e}", self.n);
        let _ = writeln!(meta, "residual = {:.16e}", self.residual);
        let _ = writeln!(meta, "iterations = {}", self.iterations);
        let _ = writeln!(meta, "phi_max_abs = {:.16e}", self.phi.max_abs());
        let _ = writeln!(meta, "nx = {}", g.nx());
        let _ = writeln!(meta, "ny = {}", g.ny());
        let _ = writeln!(meta, "lx = {:.16e}", g.lx());
        let _ = writeln!(meta, "ly = {:.16e}", g.ly());
        fs::write(dir.join("metadata.txt"), meta)?;
        Ok(())
    }
}

/// `log int e^{f}` by log-sum-exp.
fn log_integral_exp(f: &ScalarField, sign: f64) -> f64 {
    let shift = f
        .data()
        .iter()
        .map(|x| sign * x)
        .fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = f.data().iter().map(|x| (sign * x - shift).exp()).sum();
    shift + (s * f.grid().cell_area()).ln()
}

fn check_masses(m: f64, n: f64) -> Result<()> {
    if m > 0.0 && n > 0.0 && m.is_finite() && n.is_finite() {
        Ok(())
    } else {
        Err(EhdError::InvalidInput(format!(
            "masses must be positive and finite, got M = {m}, N = {n}"
        )))
    }
}

/// The convex functional minimized by the stationary potential.
pub fn functional_j(phi: &ScalarField, m: f64, n: f64) -> Result<f64> {
    check_masses(m, n)?;
    Ok(0.5 * h1_seminorm_sq(phi, FaceBoundary::DirichletZero)
        + m * log_integral_exp(phi, 1.0)
        + n * log_integral_exp(phi, -1.0))
}

/// `(M e^phi / int e^phi, N e^-phi / int e^-phi)`.
fn densities(phi: &ScalarField, m: f64, n: f64) -> (ScalarField, ScalarField) {
    (
        discrete_maxwellian(phi, m, Species::Cation),
        discrete_maxwellian(phi, n, Species::Anion),
    )
}

/// Euler-Lagrange residual `lap phi - v(phi) + w(phi)` and the two densities.
pub fn pb_residual(
    lap: &DirichletLaplacian,
    phi: &ScalarField,
    m: f64,
    n: f64,
) -> Result<(ScalarField, ScalarField, ScalarField)> {
    let (v, w) = densities(phi, m, n);
    let l = lap.apply(phi)?;
    let r: Vec<f64> = l
        .data()
        .iter()
        .zip(v.data().iter().zip(w.data()))
        .map(|(a, (p, q))| a - p + q)
        .collect();
    Ok((ScalarField::from_vec(*phi.grid(), r)?, v, w))
}

/// Solves the Poisson-Boltzmann problem from `phi = 0`.
pub fn solve_pb(m: f64, n: f64, grid: Grid2D, tol: f64) -> Result<StationarySolution> {
    solve_pb_from(m, n, ScalarField::zeros(grid), tol)
}

/// Damped quasi-Newton iteration from an arbitrary initial potential.
///
/// Each step solves `(-lap + diag(v + w)) delta = R`, dropping the rank-one
/// terms from the normalizing integrals, and backtracks on `J`.
pub fn solve_pb_from(m: f64, n: f64, phi0: ScalarField, tol: f64) -> Result<StationarySolution> {
    check_masses(m, n)?;
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(EhdError::InvalidInput(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let grid = *phi0.grid();
    let lap = DirichletLaplacian::new(grid);
    let base = stiffness(&grid, true);
    let max_lin = default_max_iter(&grid) * 2;

    let mut phi = phi0;
    let mut j = functional_j(&phi, m, n)?;
    let mut j_history = vec![j];
    let (mut r, mut v, mut w) = pb_residual(&lap, &phi, m, n)?;
    let mut rnorm = lp_norm(&r, 2.0)?;
    let mut iterations = 0;

    while rnorm > tol {
        if iterations >= MAX_NEWTON {
            return Err(EhdError::NewtonNonConvergence { residual: rnorm });
        }
        iterations += 1;

        let mut op = base.clone();
        for (d, (a, b)) in op.diag.iter_mut().zip(v.data().iter().zip(w.data())) {
            *d += a + b;
        }
        let mut delta = vec![0.0; grid.num_cells()];
        let lin_tol = l2_to_euclid(&grid, (1e-3 * rnorm).max(1e-3 * tol));
        pcg(&op, r.data(), &mut delta, lin_tol, max_lin, false)?;
        let delta = ScalarField::from_vec(grid, delta)?;

        // dJ/dt along delta is -<R, delta>
        let slope = -grid.cell_area()
            * r.data()
                .iter()
                .zip(delta.data())
                .map(|(a, b)| a * b)
                .sum::<f64>();
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let trial = phi.zip_map(&delta, |a, b| a + t * b)?;
            let jt = functional_j(&trial, m, n)?;
            if jt.is_finite() && jt <= j + ARMIJO * t * slope {
                accepted = Some((trial, jt));
                break;
            }
            // Once the predicted decrease is below the rounding level of J,
            // the Armijo test is meaningless; fall back to residual decrease.
            if (t * slope).abs() < 1e-13 * (1.0 + j.abs()) {
                let (rt, _, _) = pb_residual(&lap, &trial, m, n)?;
                if lp_norm(&rt, 2.0)? < rnorm {
                    accepted = Some((trial, jt));
                }
                break;
            }
            t *= 0.5;
        }
        let Some((next, jn)) = accepted else {
            return Err(EhdError::LineSearchStall { j, step: t });
        };
        phi = next;
        j = jn;
        j_history.push(j);
        (r, v, w) = pb_residual(&lap, &phi, m, n)?;
        rnorm = lp_norm(&r, 2.0)?;
    }

    let (v, w) = densities(&phi, m, n);
    Ok(StationarySolution {
        v: renormalize(v, m),
        w: renormalize(w, n),
        phi,
        m,
        n,
        residual: rnorm,
        iterations,
        j_history,
    })
}

fn renormalize(f: ScalarField, mass: f64) -> ScalarField {
    let z = integrate(&f);
    f.scaled(mass / z)
}

/// `||lap phi - 2 alpha sinh(phi - beta)||_2` with
/// `alpha = sqrt(M N / (int e^phi int e^-phi))` and
/// `beta = 1/2 log(N int e^phi / (M int e^-phi))`.
pub fn sinh_form_check(s: &StationarySolution) -> Result<f64> {
    let (alpha, beta) = alpha_beta(&s.phi, s.m, s.n);
    let lap = DirichletLaplacian::new(*s.grid()).apply(&s.phi)?;
    let r = lap.zip_map(&s.phi, |l, p| l - 2.0 * alpha * (p - beta).sinh())?;
    lp_norm(&r, 2.0)
}

/// `(alpha[phi], beta[phi])` of the sinh form.
pub fn alpha_beta(phi: &ScalarField, m: f64, n: f64) -> (f64, f64) {
    let lp = log_integral_exp(phi, 1.0);
    let lm = log_integral_exp(phi, -1.0);
    let alpha = (0.5 * (m.ln() + n.ln() - lp - lm)).exp();
    let beta = 0.5 * (n.ln() + lp - m.ln() - lm);
    (alpha, beta)
}

/// Face `L^2` norm over interior faces of `(v - w) grad phi - grad(v + w)`.
pub fn stationary_pressure_check(s: &StationarySolution) -> Result<f64> {
    let force = crate::fluid::body_force(&s.v, &s.w, &s.phi)?;
    let total = s.v.zip_map(&s.w, |a, b| a + b)?;
    let mut diff = force;
    diff.axpy(-1.0, &grad_to_faces(&total, FaceBoundary::ZeroFlux))?;
    Ok(diff.dot(&diff)?.sqrt())
}
