//! Symmetric five-point operators and a conjugate gradient solver
//! preconditioned by a zero-fill incomplete Cholesky factorization.

use crate::error::{EhdError, Result};

/// Symmetric operator on an `mx x my` lattice with nearest-neighbour coupling.
///
/// Row `k` reads `diag[k] x[k] + east[k] x[k+1] + east[k-1] x[k-1]
/// + north[k] x[k+mx] + north[k-mx] x[k-mx]`. `east[k]` must be zero on the
/// last column and `north[k]` on the last row.
#[derive(Debug, Clone)]
pub(crate) struct SymStencil {
    pub mx: usize,
    pub my: usize,
    pub diag: Vec<f64>,
    pub east: Vec<f64>,
    pub north: Vec<f64>,
}

impl SymStencil {
    pub fn zeros(mx: usize, my: usize) -> Self {
        let n = mx * my;
        Self {
            mx,
            my,
            diag: vec![0.0; n],
            east: vec![0.0; n],
            north: vec![0.0; n],
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.mx * self.my
    }

    /// Adds the coupling `c * (x_a - x_b)^2 / 2`-type edge term: `+c` on both
    /// diagonals, `-c` off-diagonal. `b` must be the east or north neighbour of `a`.
    #[inline]
    pub fn add_edge(&mut self, a: usize, b: usize, c: f64) {
        self.diag[a] += c;
        self.diag[b] += c;
        if b == a + 1 {
            self.east[a] -= c;
        } else {
            debug_assert_eq!(b, a + self.mx);
            self.north[a] -= c;
        }
    }

    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let (n, mx) = (self.len(), self.mx);
        for k in 0..n {
            y[k] = self.diag[k] * x[k];
        }
        // east is zero on the last column, so the wrap-around terms vanish
        for k in 0..n - 1 {
            let e = self.east[k];
            y[k] += e * x[k + 1];
            y[k + 1] += e * x[k];
        }
        for k in 0..n - mx {
            let c = self.north[k];
            y[k] += c * x[k + mx];
            y[k + mx] += c * x[k];
        }
    }
}

/// Zero-fill incomplete factorization `(D + L) D^-1 (D + L^T)` of a
/// [`SymStencil`].
struct Ic0<'a> {
    op: &'a SymStencil,
    inv_pivots: Vec<f64>,
}

impl<'a> Ic0<'a> {
    fn new(op: &'a SymStencil) -> Self {
        let (mx, n) = (op.mx, op.len());
        let mut d = vec![0.0; n];
        for k in 0..n {
            let mut p = op.diag[k];
            if k >= 1 {
                p -= op.east[k - 1] * op.east[k - 1] / d[k - 1];
            }
            if k >= mx {
                p -= op.north[k - mx] * op.north[k - mx] / d[k - mx];
            }
            // singular operators can drive the last pivots to roundoff
            if !(p > 1e-12 * op.diag[k]) {
                p = if op.diag[k] > 0.0 { op.diag[k] } else { 1.0 };
            }
            d[k] = p;
        }
        let inv_pivots = d.iter().map(|p| 1.0 / p).collect();
        Self { op, inv_pivots }
    }

    fn solve(&self, r: &[f64], z: &mut [f64]) {
        let (mx, n) = (self.op.mx, self.op.len());
        let (e, no, di) = (&self.op.east, &self.op.north, &self.inv_pivots);
        z[0] = r[0] * di[0];
        for k in 1..mx.min(n) {
            z[k] = (r[k] - e[k - 1] * z[k - 1]) * di[k];
        }
        for k in mx..n {
            z[k] = (r[k] - e[k - 1] * z[k - 1] - no[k - mx] * z[k - mx]) * di[k];
        }
        for k in (n - mx..n - 1).rev() {
            z[k] -= e[k] * z[k + 1] * di[k];
        }
        for k in (0..n - mx).rev() {
            z[k] -= (e[k] * z[k + 1] + no[k] * z[k + mx]) * di[k];
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn remove_mean(v: &mut [f64]) {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    for x in v.iter_mut() {
        *x -= m;
    }
}

/// Solves `op x = rhs` by preconditioned CG, starting from `x`.
///
/// Stops when the true Euclidean residual is at most `abs_tol` and returns
/// the iteration count. With
/// `singular_constant` the operator is assumed to annihilate constants and
/// the iteration is kept in the mean-zero subspace.
pub(crate) fn pcg(
    op: &SymStencil,
    rhs: &[f64],
    x: &mut [f64],
    abs_tol: f64,
    max_iter: usize,
    singular_constant: bool,
) -> Result<usize> {
    let n = op.len();
    debug_assert_eq!(rhs.len(), n);
    debug_assert_eq!(x.len(), n);
    let pre = Ic0::new(op);

    let mut r = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut q = vec![0.0; n];
    let mut iterations = 0;

    // Outer loop restarts from the true residual whenever the recursive one
    // has drifted below tolerance without the true one following.
    loop {
        op.apply(x, &mut q);
        for k in 0..n {
            r[k] = rhs[k] - q[k];
        }
        if singular_constant {
            remove_mean(&mut r);
        }
        let mut rnorm = dot(&r, &r).sqrt();
        if rnorm <= abs_tol {
            return Ok(iterations);
        }
        if iterations >= max_iter {
            return Err(EhdError::NonConvergence {
                iterations,
                residual: rnorm,
            });
        }
        pre.solve(&r, &mut z);
        if singular_constant {
            remove_mean(&mut z);
        }
        p.copy_from_slice(&z);
        let mut rz = dot(&r, &z);
        while iterations < max_iter {
            op.apply(&p, &mut q);
            let pq = dot(&p, &q);
            if pq <= 0.0 || !pq.is_finite() {
                return Err(EhdError::NonConvergence {
                    iterations,
                    residual: rnorm,
                });
            }
            let alpha = rz / pq;
            for k in 0..n {
                x[k] += alpha * p[k];
                r[k] -= alpha * q[k];
            }
            if singular_constant {
                remove_mean(&mut r);
            }
            iterations += 1;
            rnorm = dot(&r, &r).sqrt();
            if rnorm <= abs_tol * 0.5 {
                break;
            }
            pre.solve(&r, &mut z);
            if singular_constant {
                remove_mean(&mut z);
            }
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for k in 0..n {
                p[k] = z[k] + beta * p[k];
            }
        }
        if iterations >= max_iter {
            op.apply(x, &mut q);
            for k in 0..n {
                r[k] = rhs[k] - q[k];
            }
            if singular_constant {
                remove_mean(&mut r);
            }
            let true_res = dot(&r, &r).sqrt();
            if true_res <= abs_tol {
                return Ok(iterations);
            }
            return Err(EhdError::NonConvergence {
                iterations,
                residual: true_res,
            });
        }
    }
}
