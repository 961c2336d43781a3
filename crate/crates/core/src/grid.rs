//! Uniform 2D Cartesian mesh with MAC staggering.
//!
//! Scalars (charge densities, potential, pressure) live at cell centers.
//! Vector fields live on faces: `ux` on the `(nx+1) x ny` vertical faces and
//! `uy` on the `nx x (ny+1)` horizontal faces. Cell `(i, j)` sits at
//! `((i+1/2) hx, (j+1/2) hy)` and is stored at `j * nx + i`.
//!
//! Face quadrature gives interior faces the weight `hx*hy` and boundary faces
//! half of it, so that `<grad f, grad f>_faces = -<lap f, f>_cells` holds
//! exactly for the Dirichlet ghost convention used by [`crate::poisson`].

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{EhdError, Result};

/// Uniform mesh of `(0, lx) x (0, ly)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2D {
    nx: usize,
    ny: usize,
    lx: f64,
    ly: f64,
}

impl Grid2D {
    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self> {
        if nx < 3 || ny < 3 {
            return Err(EhdError::InvalidInput(format!(
                "grid needs at least 3 cells per direction, got {nx} x {ny}"
            )));
        }
        if !(lx.is_finite() && ly.is_finite() && lx > 0.0 && ly > 0.0) {
            return Err(EhdError::InvalidInput(format!(
                "domain lengths must be positive and finite, got {lx} x {ly}"
            )));
        }
        Ok(Self { nx, ny, lx, ly })
    }

    /// `n x n` cells on the unit square.
    pub fn unit_square(n: usize) -> Result<Self> {
        Self::new(n, n, 1.0, 1.0)
    }

    #[inline]
    pub fn nx(&self) -> usize {
        self.nx
    }
    #[inline]
    pub fn ny(&self) -> usize {
        self.ny
    }
    #[inline]
    pub fn lx(&self) -> f64 {
        self.lx
    }
    #[inline]
    pub fn ly(&self) -> f64 {
        self.ly
    }
    #[inline]
    pub fn hx(&self) -> f64 {
        self.lx / self.nx as f64
    }
    #[inline]
    pub fn hy(&self) -> f64 {
        self.ly / self.ny as f64
    }
    #[inline]
    pub fn cell_area(&self) -> f64 {
        self.hx() * self.hy()
    }
    /// Measure of the domain.
    #[inline]
    pub fn area(&self) -> f64 {
        self.lx * self.ly
    }
    #[inline]
    pub fn min_spacing(&self) -> f64 {
        self.hx().min(self.hy())
    }
    #[inline]
    pub fn num_cells(&self) -> usize {
        self.nx * self.ny
    }
    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }
    #[inline]
    pub fn center(&self, i: usize, j: usize) -> (f64, f64) {
        ((i as f64 + 0.5) * self.hx(), (j as f64 + 0.5) * self.hy())
    }
    #[inline]
    pub fn ux_len(&self) -> usize {
        (self.nx + 1) * self.ny
    }
    #[inline]
    pub fn uy_len(&self) -> usize {
        self.nx * (self.ny + 1)
    }
    /// Index of the vertical face at `x = i*hx`, row `j`.
    #[inline]
    pub fn ux_idx(&self, i: usize, j: usize) -> usize {
        j * (self.nx + 1) + i
    }
    /// Index of the horizontal face at `y = j*hy`, column `i`.
    #[inline]
    pub fn uy_idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }
}

/// Treatment of the domain boundary when differencing a cell-centered field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaceBoundary {
    /// Zero normal derivative: boundary face gradients are 0.
    ZeroFlux,
    /// Homogeneous Dirichlet data through the ghost value `-f_interior`.
    DirichletZero,
}

/// Cell-centered real field.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid2D,
    data: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: Grid2D) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: Grid2D, value: f64) -> Self {
        Self {
            grid,
            data: vec![value; grid.num_cells()],
        }
    }

    pub fn from_vec(grid: Grid2D, data: Vec<f64>) -> Result<Self> {
        if data.len() != grid.num_cells() {
            return Err(EhdError::InvalidInput(format!(
                "scalar field needs {} values, got {}",
                grid.num_cells(),
                data.len()
            )));
        }
        if let Some(k) = data.iter().position(|v| !v.is_finite()) {
            return Err(EhdError::InvalidInput(format!(
                "non-finite value {} at cell {k}",
                data[k]
            )));
        }
        Ok(Self { grid, data })
    }

    /// Samples `f(x, y)` at the cell centers.
    pub fn from_fn(grid: Grid2D, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut data = Vec::with_capacity(grid.num_cells());
        for j in 0..grid.ny() {
            for i in 0..grid.nx() {
                let (x, y) = grid.center(i, j);
                data.push(f(x, y));
            }
        }
        Self { grid, data }
    }

    #[inline]
    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }
    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }
    #[inline]
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }
    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }
    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[self.grid.idx(i, j)]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise combination of two fields on the same grid.
    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(EhdError::GridMismatch);
        }
        Ok(Self {
            grid: self.grid,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        self.map(|v| alpha * v)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Writes the field as a row-major text matrix, one grid row per line.
    pub fn write_matrix(&self, path: &Path) -> Result<()> {
        write_matrix(path, &self.data, self.grid.nx())
    }

    /// Reads a field written by [`ScalarField::write_matrix`].
    pub fn read_matrix(grid: Grid2D, path: &Path) -> Result<Self> {
        let (rows, cols, data) = read_matrix(path)?;
        if rows != grid.ny() || cols != grid.nx() {
            return Err(EhdError::MatrixFormat {
                path: path.to_path_buf(),
                reason: format!(
                    "expected {} rows x {} columns, found {rows} x {cols}",
                    grid.ny(),
                    grid.nx()
                ),
            });
        }
        Self::from_vec(grid, data)
    }
}

/// Face-staggered vector field.
#[derive(Debug, Clone, PartialEq)]
pub struct MacVectorField {
    grid: Grid2D,
    ux: Vec<f64>,
    uy: Vec<f64>,
}

impl MacVectorField {
    pub fn zeros(grid: Grid2D) -> Self {
        Self {
            grid,
            ux: vec![0.0; grid.ux_len()],
            uy: vec![0.0; grid.uy_len()],
        }
    }

    pub fn from_parts(grid: Grid2D, ux: Vec<f64>, uy: Vec<f64>) -> Result<Self> {
        if ux.len() != grid.ux_len() || uy.len() != grid.uy_len() {
            return Err(EhdError::InvalidInput(format!(
                "face field needs {} + {} values, got {} + {}",
                grid.ux_len(),
                grid.uy_len(),
                ux.len(),
                uy.len()
            )));
        }
        Ok(Self { grid, ux, uy })
    }

    #[inline]
    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }
    #[inline]
    pub fn ux(&self) -> &[f64] {
        &self.ux
    }
    #[inline]
    pub fn uy(&self) -> &[f64] {
        &self.uy
    }
    #[inline]
    pub fn ux_mut(&mut self) -> &mut [f64] {
        &mut self.ux
    }
    #[inline]
    pub fn uy_mut(&mut self) -> &mut [f64] {
        &mut self.uy
    }

    pub fn max_abs(&self) -> f64 {
        self.ux
            .iter()
            .chain(&self.uy)
            .fold(0.0, |m: f64, v| m.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.ux.iter().chain(&self.uy).all(|&v| v == 0.0)
    }

    /// Largest magnitude on the boundary faces (normal components).
    pub fn max_abs_boundary(&self) -> f64 {
        let g = &self.grid;
        let mut m: f64 = 0.0;
        for j in 0..g.ny() {
            m = m.max(self.ux[g.ux_idx(0, j)].abs());
            m = m.max(self.ux[g.ux_idx(g.nx(), j)].abs());
        }
        for i in 0..g.nx() {
            m = m.max(self.uy[g.uy_idx(i, 0)].abs());
            m = m.max(self.uy[g.uy_idx(i, g.ny())].abs());
        }
        m
    }

    /// Sets the boundary-face (normal) components to zero.
    pub fn zero_boundary(&mut self) {
        let g = self.grid;
        for j in 0..g.ny() {
            self.ux[g.ux_idx(0, j)] = 0.0;
            self.ux[g.ux_idx(g.nx(), j)] = 0.0;
        }
        for i in 0..g.nx() {
            self.uy[g.uy_idx(i, 0)] = 0.0;
            self.uy[g.uy_idx(i, g.ny())] = 0.0;
        }
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            grid: self.grid,
            ux: self.ux.iter().map(|v| alpha * v).collect(),
            uy: self.uy.iter().map(|v| alpha * v).collect(),
        }
    }

    pub fn axpy(&mut self, alpha: f64, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(EhdError::GridMismatch);
        }
        for (a, b) in self.ux.iter_mut().zip(&other.ux) {
            *a += alpha * b;
        }
        for (a, b) in self.uy.iter_mut().zip(&other.uy) {
            *a += alpha * b;
        }
        Ok(())
    }

    /// Face quadrature of `a . b`: weight `hx*hy` on interior faces, half on
    /// boundary faces.
    pub fn dot(&self, other: &Self) -> Result<f64> {
        if self.grid != other.grid {
            return Err(EhdError::GridMismatch);
        }
        let g = &self.grid;
        let mut s = 0.0;
        for j in 0..g.ny() {
            for i in 0..=g.nx() {
                let k = g.ux_idx(i, j);
                let w = if i == 0 || i == g.nx() { 0.5 } else { 1.0 };
                s += w * self.ux[k] * other.ux[k];
            }
        }
        for j in 0..=g.ny() {
            let w = if j == 0 || j == g.ny() { 0.5 } else { 1.0 };
            for i in 0..g.nx() {
                let k = g.uy_idx(i, j);
                s += w * self.uy[k] * other.uy[k];
            }
        }
        Ok(s * g.cell_area())
    }

    /// Velocity interpolated to cell centers.
    pub fn cell_centered(&self) -> (ScalarField, ScalarField) {
        let g = self.grid;
        let mut cx = ScalarField::zeros(g);
        let mut cy = ScalarField::zeros(g);
        for j in 0..g.ny() {
            for i in 0..g.nx() {
                let k = g.idx(i, j);
                cx.data[k] = 0.5 * (self.ux[g.ux_idx(i, j)] + self.ux[g.ux_idx(i + 1, j)]);
                cy.data[k] = 0.5 * (self.uy[g.uy_idx(i, j)] + self.uy[g.uy_idx(i, j + 1)]);
            }
        }
        (cx, cy)
    }
}

/// Midpoint quadrature `hx*hy*sum f`, with compensated summation.
pub fn integrate(f: &ScalarField) -> f64 {
    kahan_sum(f.data.iter().copied()) * f.grid.cell_area()
}

pub(crate) fn kahan_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// `L^p` norm by midpoint quadrature; `p = f64::INFINITY` gives the max norm.
pub fn lp_norm(f: &ScalarField, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(EhdError::InvalidInput(format!(
            "L^p norm needs p >= 1, got {p}"
        )));
    }
    if p.is_infinite() {
        return Ok(f.max_abs());
    }
    let area = f.grid.cell_area();
    if p == 1.0 {
        return Ok(area * f.data.iter().map(|v| v.abs()).sum::<f64>());
    }
    if p == 2.0 {
        return Ok((area * f.data.iter().map(|v| v * v).sum::<f64>()).sqrt());
    }
    let s: f64 = f.data.iter().map(|v| v.abs().powf(p)).sum();
    Ok((area * s).powf(1.0 / p))
}

/// Face-centered gradient of a cell field.
pub fn grad_to_faces(f: &ScalarField, bc: FaceBoundary) -> MacVectorField {
    let g = f.grid;
    let (nx, ny) = (g.nx(), g.ny());
    let (hx, hy) = (g.hx(), g.hy());
    let mut out = MacVectorField::zeros(g);
    let d = &f.data;
    for j in 0..ny {
        for i in 1..nx {
            out.ux[g.ux_idx(i, j)] = (d[g.idx(i, j)] - d[g.idx(i - 1, j)]) / hx;
        }
    }
    for j in 1..ny {
        for i in 0..nx {
            out.uy[g.uy_idx(i, j)] = (d[g.idx(i, j)] - d[g.idx(i, j - 1)]) / hy;
        }
    }
    if bc == FaceBoundary::DirichletZero {
        // ghost = -interior, so the one-sided difference is 2 f / h
        for j in 0..ny {
            out.ux[g.ux_idx(0, j)] = 2.0 * d[g.idx(0, j)] / hx;
            out.ux[g.ux_idx(nx, j)] = -2.0 * d[g.idx(nx - 1, j)] / hx;
        }
        for i in 0..nx {
            out.uy[g.uy_idx(i, 0)] = 2.0 * d[g.idx(i, 0)] / hy;
            out.uy[g.uy_idx(i, ny)] = -2.0 * d[g.idx(i, ny - 1)] / hy;
        }
    }
    out
}

/// Cell divergence of a face field.
pub fn div_from_faces(u: &MacVectorField) -> ScalarField {
    let g = u.grid;
    let (hx, hy) = (g.hx(), g.hy());
    let mut out = ScalarField::zeros(g);
    for j in 0..g.ny() {
        for i in 0..g.nx() {
            out.data[g.idx(i, j)] = (u.ux[g.ux_idx(i + 1, j)] - u.ux[g.ux_idx(i, j)]) / hx
                + (u.uy[g.uy_idx(i, j + 1)] - u.uy[g.uy_idx(i, j)]) / hy;
        }
    }
    out
}

/// Squared `H^1` seminorm `||grad f||^2` from face gradients.
pub fn h1_seminorm_sq(f: &ScalarField, bc: FaceBoundary) -> f64 {
    let gf = grad_to_faces(f, bc);
    gf.dot(&gf).expect("same grid")
}

/// `1/2 ||u||^2` by face quadrature.
pub fn kinetic_energy(u: &MacVectorField) -> f64 {
    0.5 * u.dot(u).expect("same grid")
}

/// Squared gradient norm of a face velocity with no-slip walls,
/// `sum_c ||grad u_c||^2`, consistent with the viscous operator.
pub fn velocity_gradient_sq(u: &MacVectorField) -> f64 {
    let g = u.grid;
    let (nx, ny) = (g.nx(), g.ny());
    let (hx, hy) = (g.hx(), g.hy());
    let mut s = 0.0;
    // ux: x-differences between adjacent faces (boundary faces are 0),
    // y-differences between rows plus the wall ghost -ux.
    for j in 0..ny {
        for i in 0..nx {
            let d = (u.ux[g.ux_idx(i + 1, j)] - u.ux[g.ux_idx(i, j)]) / hx;
            s += d * d;
        }
    }
    for i in 1..nx {
        for j in 1..ny {
            let d = (u.ux[g.ux_idx(i, j)] - u.ux[g.ux_idx(i, j - 1)]) / hy;
            s += d * d;
        }
        let b = 2.0 * u.ux[g.ux_idx(i, 0)] / hy;
        let t = 2.0 * u.ux[g.ux_idx(i, ny - 1)] / hy;
        s += 0.5 * (b * b + t * t);
    }
    for j in 0..ny {
        for i in 0..nx {
            let d = (u.uy[g.uy_idx(i, j + 1)] - u.uy[g.uy_idx(i, j)]) / hy;
            s += d * d;
        }
    }
    for j in 1..ny {
        for i in 1..nx {
            let d = (u.uy[g.uy_idx(i, j)] - u.uy[g.uy_idx(i - 1, j)]) / hx;
            s += d * d;
        }
        let l = 2.0 * u.uy[g.uy_idx(0, j)] / hx;
        let r = 2.0 * u.uy[g.uy_idx(nx - 1, j)] / hx;
        s += 0.5 * (l * l + r * r);
    }
    s * g.cell_area()
}

/// Writes a row-major matrix: `cols` values per line, single spaces,
/// 17 significant digits.
pub fn write_matrix(path: &Path, data: &[f64], cols: usize) -> Result<()> {
    if cols == 0 || !data.len().is_multiple_of(cols) {
        return Err(EhdError::InvalidInput(format!(
            "{} values cannot form rows of {cols}",
            data.len()
        )));
    }
    let mut out = String::with_capacity(data.len() * 24);
    for row in data.chunks(cols) {
        for (k, v) in row.iter().enumerate() {
            if k > 0 {
                out.push(' ');
            }
            write!(out, "{v:.16e}").expect("write to string");
        }
        out.push('\n');
    }
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    fs::write(path, out)?;
    Ok(())
}

/// Reads a matrix written by [`write_matrix`]; returns `(rows, cols, data)`.
pub fn read_matrix(path: &Path) -> Result<(usize, usize, Vec<f64>)> {
    let text = fs::read_to_string(path)?;
    let bad = |reason: String| EhdError::MatrixFormat {
        path: path.to_path_buf(),
        reason,
    };
    let mut data = Vec::new();
    let mut rows = 0;
    let mut cols = None;
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let before = data.len();
        for tok in line.split_whitespace() {
            let v: f64 = tok
                .parse()
                .map_err(|_| bad(format!("line {}: cannot parse '{tok}'", lineno + 1)))?;
            data.push(v);
        }
        let n = data.len() - before;
        match cols {
            None => cols = Some(n),
            Some(c) if c != n => {
                return Err(bad(format!(
                    "line {} has {n} values, expected {c}",
                    lineno + 1
                )))
            }
            _ => {}
        }
        rows += 1;
    }
    let cols = cols.ok_or_else(|| bad("empty file".into()))?;
    Ok((rows, cols, data))
}
