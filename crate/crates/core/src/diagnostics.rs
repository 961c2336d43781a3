//! Energy and entropy functionals, the inequalities between them, and
//! exponential decay fits.

use crate::error::{EhdError, Result};
use crate::fluid::ladyzhenskaya_ratio;
use crate::grid::{
    h1_seminorm_sq, integrate, kinetic_energy, lp_norm, velocity_gradient_sq, FaceBoundary,
    ScalarField,
};
use crate::poisson::stiffness;
use crate::sim::SystemState;
use crate::stationary::{functional_j, StationarySolution};
use crate::transport::{discrete_maxwellian, Species};

/// Densities below this are treated as zero inside logarithms.
pub const DENSITY_FLOOR: f64 = 1e-300;

/// `psi_r(s) = s log(s/r) - s + r`, with `psi_r(0) = r`.
pub fn psi(s: f64, r: f64) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(EhdError::InvalidInput(format!("psi needs r > 0, got {r}")));
    }
    if !(s >= 0.0) || !s.is_finite() {
        return Err(EhdError::InvalidInput(format!("psi needs s >= 0, got {s}")));
    }
    Ok(psi_unchecked(s, r))
}

#[inline]
fn psi_unchecked(s: f64, r: f64) -> f64 {
    if s == 0.0 {
        return r;
    }
    let d = (s - r) / r;
    if d.abs() < 1e-2 {
        // r * ((1+d) log(1+d) - d) = r * sum_{k>=2} (-d)^k / (k (k-1))
        let mut term = d * d;
        let mut sum = 0.0;
        for k in 2..14 {
            let kf = k as f64;
            sum += term / (kf * (kf - 1.0));
            term *= -d;
        }
        r * sum
    } else {
        s * (s / r).ln() - s + r
    }
}

fn psi_integral(f: &ScalarField, r: impl Fn(usize) -> f64) -> f64 {
    let area = f.grid().cell_area();
    area * crate::grid::kahan_sum(
        f.data()
            .iter()
            .enumerate()
            .map(|(k, &s)| psi_unchecked(s.max(0.0), r(k))),
    )
}

/// The four parts of the total energy and their sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyComponents {
    pub entropy_v: f64,
    pub entropy_w: f64,
    pub electric: f64,
    pub kinetic: f64,
    pub total: f64,
}

/// `W = int psi(v) + psi(w) + 1/2 ||grad phi||^2 + 1/2 ||u||^2`.
pub fn total_energy(state: &SystemState) -> EnergyComponents {
    let entropy_v = psi_integral(&state.v, |_| 1.0);
    let entropy_w = psi_integral(&state.w, |_| 1.0);
    let electric = 0.5 * h1_seminorm_sq(&state.phi, FaceBoundary::DirichletZero);
    let kinetic = kinetic_energy(&state.u);
    EnergyComponents {
        entropy_v,
        entropy_w,
        electric,
        kinetic,
        total: entropy_v + entropy_w + electric + kinetic,
    }
}

/// `W` evaluated at the stationary solution (no fluid).
pub fn stationary_energy(s: &StationarySolution) -> f64 {
    psi_integral(&s.v, |_| 1.0)
        + psi_integral(&s.w, |_| 1.0)
        + 0.5 * h1_seminorm_sq(&s.phi, FaceBoundary::DirichletZero)
}

/// `sum_faces c_face |d chi|^2` with `chi = log c + sign_phi * phi`, harmonic
/// mean face density.
fn log_gradient_dissipation(c: &ScalarField, phi: &ScalarField, sign_phi: f64) -> f64 {
    let g = *c.grid();
    let (nx, ny) = (g.nx(), g.ny());
    let (hx, hy) = (g.hx(), g.hy());
    let d = c.data();
    let p = phi.data();
    let chi: Vec<f64> = d
        .iter()
        .zip(p)
        .map(|(&c, &q)| c.max(DENSITY_FLOOR).ln() + sign_phi * q)
        .collect();
    let face = |a: usize, b: usize, h: f64| -> f64 {
        let (ca, cb) = (d[a], d[b]);
        if ca < DENSITY_FLOOR || cb < DENSITY_FLOOR {
            return 0.0;
        }
        let mean = 2.0 * ca * cb / (ca + cb);
        let gr = (chi[b] - chi[a]) / h;
        mean * gr * gr
    };
    let mut s = 0.0;
    for j in 0..ny {
        for i in 0..nx {
            let k = g.idx(i, j);
            if i + 1 < nx {
                s += face(k, k + 1, hx);
            }
            if j + 1 < ny {
                s += face(k, k + nx, hy);
            }
        }
    }
    s * g.cell_area()
}

/// `int v |grad log(v e^-phi)|^2 + w |grad log(w e^phi)|^2 + |grad u|^2`.
pub fn entropy_production(state: &SystemState) -> f64 {
    log_gradient_dissipation(&state.v, &state.phi, -1.0)
        + log_gradient_dissipation(&state.w, &state.phi, 1.0)
        + velocity_gradient_sq(&state.u)
}

fn potential_gap_sq(state: &SystemState, s: &StationarySolution) -> Result<f64> {
    let d = state.phi.zip_map(&s.phi, |a, b| a - b)?;
    Ok(h1_seminorm_sq(&d, FaceBoundary::DirichletZero))
}

fn check_same_grid(state: &SystemState, s: &StationarySolution) -> Result<()> {
    if state.grid() != s.grid() {
        return Err(EhdError::GridMismatch);
    }
    Ok(())
}

/// Entropy relative to the stationary Maxwellians plus electric and kinetic
/// energy of the deviation.
pub fn relative_entropy(state: &SystemState, s: &StationarySolution) -> Result<f64> {
    check_same_grid(state, s)?;
    let (vi, wi) = (s.v.data(), s.w.data());
    Ok(psi_integral(&state.v, |k| vi[k])
        + psi_integral(&state.w, |k| wi[k])
        + 0.5 * potential_gap_sq(state, s)?
        + kinetic_energy(&state.u))
}

/// Both readings of the relative entropy identity: `W + W_inf` as printed
/// and `W - W_inf`, next to `W_rel` itself.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelativeEntropyIdentity {
    pub w_rel: f64,
    pub w_plus_winf: f64,
    pub w_minus_winf: f64,
    /// `int psi_{v_M}(v) + psi_{w_M}(w) + 1/2 |u|^2 + J[phi_inf] - J[phi]`.
    pub maxwellian_form: f64,
}

pub fn relative_entropy_identity(
    state: &SystemState,
    s: &StationarySolution,
) -> Result<RelativeEntropyIdentity> {
    check_same_grid(state, s)?;
    let w = total_energy(state).total;
    let winf = stationary_energy(s);
    let (m, n) = (integrate(&state.v), integrate(&state.w));
    let vm = discrete_maxwellian(&state.phi, m, Species::Cation);
    let wm = discrete_maxwellian(&state.phi, n, Species::Anion);
    let (vmd, wmd) = (vm.data(), wm.data());
    let maxwellian_form = psi_integral(&state.v, |k| vmd[k])
        + psi_integral(&state.w, |k| wmd[k])
        + kinetic_energy(&state.u)
        + functional_j(&s.phi, m, n)?
        - functional_j(&state.phi, m, n)?;
    Ok(RelativeEntropyIdentity {
        w_rel: relative_entropy(state, s)?,
        w_plus_winf: w + winf,
        w_minus_winf: w - winf,
        maxwellian_form,
    })
}

/// Quadratic expansion of the relative entropy:
/// `int 1/2 |u|^2 + (v-v_inf)^2/(2 v_inf) + (w-w_inf)^2/(2 w_inf) + |grad(phi-phi_inf)|^2`.
pub fn linearized_energy(state: &SystemState, s: &StationarySolution) -> Result<f64> {
    check_same_grid(state, s)?;
    let area = state.grid().cell_area();
    let quad = |c: &ScalarField, r: &ScalarField| -> f64 {
        c.data()
            .iter()
            .zip(r.data())
            .map(|(a, b)| (a - b) * (a - b) / (2.0 * b))
            .sum::<f64>()
            * area
    };
    Ok(kinetic_energy(&state.u)
        + quad(&state.v, &s.v)
        + quad(&state.w, &s.w)
        + potential_gap_sq(state, s)?)
}

/// `int |u|^2 + |v-v_inf|^p / v_inf^(p-1) + |w-w_inf|^p / w_inf^(p-1) + |grad(phi-phi_inf)|^2`
/// for `p` in `{1, 2}`.
pub fn error_norms(state: &SystemState, s: &StationarySolution, p: u32) -> Result<f64> {
    check_same_grid(state, s)?;
    let area = state.grid().cell_area();
    let term = |c: &ScalarField, r: &ScalarField| -> Result<f64> {
        let it = c.data().iter().zip(r.data());
        Ok(area
            * match p {
                1 => it.map(|(a, b)| (a - b).abs()).sum::<f64>(),
                2 => it.map(|(a, b)| (a - b) * (a - b) / b).sum::<f64>(),
                _ => {
                    return Err(EhdError::InvalidInput(format!(
                        "error norm exponent must be 1 or 2, got {p}"
                    )))
                }
            })
    };
    Ok(2.0 * kinetic_energy(&state.u)
        + term(&state.v, &s.v)?
        + term(&state.w, &s.w)?
        + potential_gap_sq(state, s)?)
}

/// Left side `||v-v_inf||_1 + ||w-w_inf||_1 + ||grad(phi-phi_inf)||^2 + ||u||^2`
/// and `W_rel`; the claimed bound is `lhs <= 4 W_rel`.
pub fn csiszar_check(state: &SystemState, s: &StationarySolution) -> Result<(f64, f64)> {
    check_same_grid(state, s)?;
    let dv = state.v.zip_map(&s.v, |a, b| a - b)?;
    let dw = state.w.zip_map(&s.w, |a, b| a - b)?;
    let lhs = lp_norm(&dv, 1.0)?
        + lp_norm(&dw, 1.0)?
        + potential_gap_sq(state, s)?
        + 2.0 * kinetic_energy(&state.u);
    Ok((lhs, relative_entropy(state, s)?))
}

/// Pinsker form with squared `L^1` distances:
/// `||v-v_inf||_1^2/(2M) + ||w-w_inf||_1^2/(2N) + 1/2 ||grad(phi-phi_inf)||^2 + 1/2 ||u||^2`
/// against `W_rel`. Valid whenever the masses of `v, w` match `M, N`.
pub fn csiszar_squared_check(state: &SystemState, s: &StationarySolution) -> Result<(f64, f64)> {
    check_same_grid(state, s)?;
    let dv = lp_norm(&state.v.zip_map(&s.v, |a, b| a - b)?, 1.0)?;
    let dw = lp_norm(&state.w.zip_map(&s.w, |a, b| a - b)?, 1.0)?;
    let lhs = dv * dv / (2.0 * s.m)
        + dw * dw / (2.0 * s.n)
        + 0.5 * potential_gap_sq(state, s)?
        + kinetic_energy(&state.u);
    Ok((lhs, relative_entropy(state, s)?))
}

/// One row of the diagnostics time series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyReport {
    pub t: f64,
    pub mass_v: f64,
    pub mass_w: f64,
    pub kinetic: f64,
    pub electric: f64,
    pub entropy_v: f64,
    pub entropy_w: f64,
    pub w: f64,
    pub production: f64,
    pub w_rel: f64,
    pub l: f64,
    pub e1: f64,
    pub e2: f64,
    pub ck_lhs: f64,
    /// NaN when the velocity vanishes.
    pub lady_ratio: f64,
}

/// Column order of `diagnostics.csv`.
pub const CSV_HEADER: &str =
    "t,mass_v,mass_w,kinetic,electric,entropy_v,entropy_w,W,production,W_rel,L,E1,E2,ck_lhs,lady_ratio";

impl EnergyReport {
    pub fn values(&self) -> [f64; 15] {
        [
            self.t,
            self.mass_v,
            self.mass_w,
            self.kinetic,
            self.electric,
            self.entropy_v,
            self.entropy_w,
            self.w,
            self.production,
            self.w_rel,
            self.l,
            self.e1,
            self.e2,
            self.ck_lhs,
            self.lady_ratio,
        ]
    }

    pub fn csv_row(&self) -> String {
        self.values()
            .iter()
            .map(|v| format!("{v:.16e}"))
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// Evaluates every functional on `state` against the stationary solution.
pub fn energy_report(state: &SystemState, s: &StationarySolution) -> Result<EnergyReport> {
    let e = total_energy(state);
    let lady_ratio = match ladyzhenskaya_ratio(&state.u) {
        Ok(r) => r,
        Err(EhdError::ZeroField) => f64::NAN,
        Err(err) => return Err(err),
    };
    Ok(EnergyReport {
        t: state.t,
        mass_v: integrate(&state.v),
        mass_w: integrate(&state.w),
        kinetic: e.kinetic,
        electric: e.electric,
        entropy_v: e.entropy_v,
        entropy_w: e.entropy_w,
        w: e.total,
        production: entropy_production(state),
        w_rel: relative_entropy(state, s)?,
        l: linearized_energy(state, s)?,
        e1: error_norms(state, s, 1)?,
        e2: error_norms(state, s, 2)?,
        ck_lhs: csiszar_check(state, s)?.0,
        lady_ratio,
    })
}

/// Least-squares exponential fit `y ~ exp(intercept - lambda t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub lambda: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
}

/// Window that drops the first tenth of `[0, t_end]`.
pub fn post_transient_window(t_end: f64) -> (f64, f64) {
    (0.1 * t_end, t_end)
}

/// Fits a line to `(t, log y)` over the samples with `t` inside `window`.
pub fn fit_decay(series: &[(f64, f64)], window: (f64, f64)) -> Result<DecayFit> {
    let pts: Vec<(f64, f64)> = series
        .iter()
        .copied()
        .filter(|&(t, _)| t >= window.0 && t <= window.1)
        .collect();
    if pts.len() < 10 {
        return Err(EhdError::EmptyWindow { points: pts.len() });
    }
    for &(t, y) in &pts {
        if !(y > 0.0) || !y.is_finite() {
            return Err(EhdError::NonpositiveValues { t, value: y });
        }
    }
    // logs relative to the first sample, so a constant series is exactly flat
    let base = pts[0].1.ln();
    let logs: Vec<f64> = pts.iter().map(|p| p.1.ln() - base).collect();
    let n = pts.len() as f64;
    let tm = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let ym = logs.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (&(t, _), &l) in pts.iter().zip(&logs) {
        let (dt, dy) = (t - tm, l - ym);
        sxx += dt * dt;
        sxy += dt * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(EhdError::InvalidInput(
            "decay window needs distinct sample times".into(),
        ));
    }
    let slope = sxy / sxx;
    let ss_res: f64 = pts
        .iter()
        .zip(&logs)
        .map(|(&(t, _), &l)| {
            let e = l - (ym + slope * (t - tm));
            e * e
        })
        .sum();
    let intercept = base + ym - slope * tm;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    Ok(DecayFit {
        lambda: -slope,
        intercept,
        r_squared,
        window,
    })
}

/// Smallest `c` with `int f^2 <= c int |grad(f rho)|^2` for all mean-zero
/// grid functions `f`, where the gradient carries no boundary condition.
///
/// Computed as `1/mu_min` for `rho K rho` restricted to mean-zero vectors,
/// `K` the zero-flux stiffness, by inverse iteration.
pub fn weighted_poincare_estimate(rho: &ScalarField) -> Result<f64> {
    let g = *rho.grid();
    if rho.min() <= 0.0 {
        return Err(EhdError::InvalidInput("weight must be positive".into()));
    }
    let k = stiffness(&g, false);
    let r = rho.data().to_vec();
    let n = g.num_cells();
    let apply = |x: &[f64], y: &mut [f64], tmp: &mut [f64]| {
        for i in 0..n {
            tmp[i] = r[i] * x[i];
        }
        k.apply(tmp, y);
        for i in 0..n {
            y[i] *= r[i];
        }
        remove_mean(y);
    };

    let mut x: Vec<f64> = (0..n)
        .map(|idx| {
            let (xc, yc) = g.center(idx % g.nx(), idx / g.nx());
            xc / g.lx() + 0.1 * yc / g.ly()
        })
        .collect();
    remove_mean(&mut x);
    normalize(&mut x);

    let mut y = vec![0.0; n];
    let mut tmp = vec![0.0; n];
    let mut mu_old = f64::INFINITY;
    let max_outer = 2000;
    for it in 0..max_outer {
        let mut z = vec![0.0; n];
        projected_cg(&apply, &x, &mut z, 1e-13, 20 * n.max(100))?;
        remove_mean(&mut z);
        normalize(&mut z);
        apply(&z, &mut y, &mut tmp);
        let mu: f64 = z.iter().zip(&y).map(|(a, b)| a * b).sum();
        x = z;
        if (mu_old - mu).abs() <= 1e-13 * mu && it > 2 {
            return Ok(1.0 / mu);
        }
        mu_old = mu;
    }
    Err(EhdError::NonConvergence {
        iterations: max_outer,
        residual: mu_old,
    })
}

fn remove_mean(v: &mut [f64]) {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    for x in v.iter_mut() {
        *x -= m;
    }
}

fn normalize(v: &mut [f64]) {
    let s = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    for x in v.iter_mut() {
        *x /= s;
    }
}

/// Unpreconditioned CG for an operator that is SPD on mean-zero vectors.
fn projected_cg(
    apply: &impl Fn(&[f64], &mut [f64], &mut [f64]),
    b: &[f64],
    x: &mut [f64],
    rel_tol: f64,
    max_iter: usize,
) -> Result<()> {
    let n = b.len();
    let mut tmp = vec![0.0; n];
    let mut q = vec![0.0; n];
    apply(x, &mut q, &mut tmp);
    let mut r: Vec<f64> = b.iter().zip(&q).map(|(a, c)| a - c).collect();
    remove_mean(&mut r);
    let bnorm = b.iter().map(|a| a * a).sum::<f64>().sqrt();
    let mut p = r.clone();
    let mut rr: f64 = r.iter().map(|a| a * a).sum();
    for _ in 0..max_iter {
        if rr.sqrt() <= rel_tol * bnorm {
            return Ok(());
        }
        apply(&p, &mut q, &mut tmp);
        let pq: f64 = p.iter().zip(&q).map(|(a, c)| a * c).sum();
        if !(pq > 0.0) {
            break;
        }
        let alpha = rr / pq;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        remove_mean(&mut r);
        let rr_new: f64 = r.iter().map(|a| a * a).sum();
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
    }
    if rr.sqrt() <= rel_tol * bnorm {
        return Ok(());
    }
    Err(EhdError::NonConvergence {
        iterations: max_iter,
        residual: rr.sqrt(),
    })
}

/// `int |grad(f rho)|^2` with zero-flux boundary faces.
pub fn weighted_gradient_sq(f: &ScalarField, rho: &ScalarField) -> Result<f64> {
    let fr = f.zip_map(rho, |a, b| a * b)?;
    Ok(h1_seminorm_sq(&fr, FaceBoundary::ZeroFlux))
}
