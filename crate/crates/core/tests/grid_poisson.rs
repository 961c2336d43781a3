use std::f64::consts::PI;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ehd::grid::{
    div_from_faces, grad_to_faces, h1_seminorm_sq, integrate, lp_norm, FaceBoundary, Grid2D,
    MacVectorField, ScalarField,
};
use ehd::poisson::{default_max_iter, solve_dirichlet, solve_neumann, DirichletLaplacian};
use ehd::EhdError;

fn random_field(g: Grid2D, rng: &mut ChaCha8Rng) -> ScalarField {
    let d = (0..g.num_cells())
        .map(|_| rng.gen_range(-1.0..1.0))
        .collect();
    ScalarField::from_vec(g, d).unwrap()
}

fn random_interior_faces(g: Grid2D, rng: &mut ChaCha8Rng) -> MacVectorField {
    let ux = (0..g.ux_len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let uy = (0..g.uy_len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut u = MacVectorField::from_parts(g, ux, uy).unwrap();
    u.zero_boundary();
    u
}

fn cell_dot(a: &ScalarField, b: &ScalarField) -> f64 {
    a.data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| x * y)
        .sum::<f64>()
        * a.grid().cell_area()
}

// plain 5-point Laplacian with Dirichlet ghosts, written out independently
fn five_point(f: &ScalarField) -> Vec<f64> {
    let g = f.grid();
    let (nx, ny, hx, hy) = (g.nx(), g.ny(), g.hx(), g.hy());
    let at = |i: isize, j: isize, ci: usize, cj: usize| -> f64 {
        if i < 0 || j < 0 || i >= nx as isize || j >= ny as isize {
            -f.at(ci, cj)
        } else {
            f.at(i as usize, j as usize)
        }
    };
    let mut out = vec![0.0; nx * ny];
    for j in 0..ny {
        for i in 0..nx {
            let (ii, jj) = (i as isize, j as isize);
            let c = f.at(i, j);
            out[j * nx + i] = (at(ii + 1, jj, i, j) - 2.0 * c + at(ii - 1, jj, i, j)) / (hx * hx)
                + (at(ii, jj + 1, i, j) - 2.0 * c + at(ii, jj - 1, i, j)) / (hy * hy);
        }
    }
    out
}

#[test]
fn integrate_examples() {
    let g = Grid2D::unit_square(8).unwrap();
    assert_eq!(integrate(&ScalarField::zeros(g)), 0.0);
    assert!((integrate(&ScalarField::constant(g, 1.0)) - 1.0).abs() < 1e-15);
    let g = Grid2D::unit_square(64).unwrap();
    assert!((integrate(&ScalarField::from_fn(g, |x, _| x)) - 0.5).abs() <= 1e-12);
}

#[test]
fn lp_norm_examples() {
    let g = Grid2D::unit_square(8).unwrap();
    assert!((lp_norm(&ScalarField::constant(g, 2.0), 2.0).unwrap() - 2.0).abs() < 1e-14);
    assert_eq!(
        lp_norm(&ScalarField::constant(g, -3.0), f64::INFINITY).unwrap(),
        3.0
    );
    // one cell of value 4 on a 4x4 unit grid: L1 = 4/16, L2 = sqrt(16/16)
    let g = Grid2D::unit_square(4).unwrap();
    let mut d = vec![0.0; 16];
    d[5] = 4.0;
    let f = ScalarField::from_vec(g, d).unwrap();
    assert!((lp_norm(&f, 1.0).unwrap() - 0.25).abs() < 1e-15);
    assert!((lp_norm(&f, 2.0).unwrap() - 1.0).abs() < 1e-15);
}

#[test]
fn gradient_of_linear_and_constant() {
    let g = Grid2D::new(12, 9, 1.5, 0.8).unwrap();
    let c = grad_to_faces(&ScalarField::constant(g, 3.0), FaceBoundary::ZeroFlux);
    assert!(c.is_zero());
    let lin = grad_to_faces(&ScalarField::from_fn(g, |x, _| x), FaceBoundary::ZeroFlux);
    for j in 0..g.ny() {
        for i in 1..g.nx() {
            assert!((lin.ux()[g.ux_idx(i, j)] - 1.0).abs() <= 1e-12);
        }
    }
    assert!(lin.uy().iter().all(|&v| v == 0.0));
}

#[test]
fn divergence_of_gradient_is_five_point_laplacian() {
    let g = Grid2D::new(10, 7, 1.0, 0.7).unwrap();
    let f = ScalarField::from_fn(g, |x, y| x * y + x * x - 0.3 * y);
    let lap = div_from_faces(&grad_to_faces(&f, FaceBoundary::DirichletZero));
    for (a, b) in lap.data().iter().zip(five_point(&f)) {
        assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
    }
    assert!(div_from_faces(&MacVectorField::zeros(g)).max_abs() == 0.0);
}

#[test]
fn h1_seminorm_converges_to_closed_form() {
    // int |grad sin(pi x) sin(pi y)|^2 = pi^2 / 2
    let exact = PI * PI / 2.0;
    let mut errs = Vec::new();
    for n in [16, 32, 64, 128] {
        let g = Grid2D::unit_square(n).unwrap();
        let f = ScalarField::from_fn(g, |x, y| (PI * x).sin() * (PI * y).sin());
        errs.push((h1_seminorm_sq(&f, FaceBoundary::DirichletZero) - exact).abs());
    }
    assert!(errs.windows(2).all(|w| w[1] < w[0]));
    assert!(errs[3] / exact < 1e-3);
    let g = Grid2D::unit_square(16).unwrap();
    assert_eq!(
        h1_seminorm_sq(&ScalarField::constant(g, 2.0), FaceBoundary::ZeroFlux),
        0.0
    );
}

#[test]
fn dirichlet_operator_structure() {
    let g = Grid2D::new(6, 5, 1.0, 1.3).unwrap();
    let lap = DirichletLaplacian::new(g);
    let n = g.num_cells();
    let mut cols = Vec::new();
    for k in 0..n {
        let mut e = vec![0.0; n];
        e[k] = 1.0;
        cols.push(
            lap.apply(&ScalarField::from_vec(g, e).unwrap())
                .unwrap()
                .into_vec(),
        );
    }
    for (a, col) in cols.iter().enumerate() {
        for (b, x) in col.iter().enumerate() {
            assert!((x - cols[b][a]).abs() <= 1e-9);
        }
    }
    // row sums: zero inside, negative next to the wall
    for j in 0..g.ny() {
        for i in 0..g.nx() {
            let k = g.idx(i, j);
            let s: f64 = (0..n).map(|c| cols[c][k]).sum();
            let boundary = i == 0 || j == 0 || i + 1 == g.nx() || j + 1 == g.ny();
            if boundary {
                assert!(s < -1e-9);
            } else {
                assert!(s.abs() <= 1e-9);
            }
        }
    }
}

#[test]
fn poisson_zero_rhs_and_round_trip() {
    let g = Grid2D::new(24, 20, 1.0, 0.9).unwrap();
    let z = solve_dirichlet(&ScalarField::zeros(g), 1e-10, default_max_iter(&g)).unwrap();
    assert_eq!(z.max_abs(), 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let psi = random_field(g, &mut rng);
    let rhs = DirichletLaplacian::new(g).apply(&psi).unwrap();
    let back = solve_dirichlet(&rhs, 1e-13, default_max_iter(&g)).unwrap();
    let err = back
        .data()
        .iter()
        .zip(psi.data())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(err <= 1e-9, "{err}");
}

#[test]
fn manufactured_solution_second_order() {
    let mut errs = Vec::new();
    for n in [32, 64, 128] {
        let g = Grid2D::unit_square(n).unwrap();
        let exact = ScalarField::from_fn(g, |x, y| (PI * x).sin() * (PI * y).sin());
        let phi =
            solve_dirichlet(&exact.scaled(-2.0 * PI * PI), 1e-10, default_max_iter(&g)).unwrap();
        let e = phi.zip_map(&exact, |a, b| a - b).unwrap();
        errs.push(cell_dot(&e, &e).sqrt());
    }
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!((1.8..=2.2).contains(&order), "order {order}");
    }
}

#[test]
fn neumann_projection_and_compatibility() {
    let g = Grid2D::new(20, 16, 1.0, 0.8).unwrap();
    assert_eq!(
        solve_neumann(&ScalarField::zeros(g), 1e-10)
            .unwrap()
            .max_abs(),
        0.0
    );
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let u = random_interior_faces(g, &mut rng);
    let d = div_from_faces(&u);
    let p = solve_neumann(&d, 1e-13).unwrap();
    let mut proj = u.clone();
    proj.axpy(-1.0, &grad_to_faces(&p, FaceBoundary::ZeroFlux))
        .unwrap();
    assert!(div_from_faces(&proj).max_abs() <= 1e-8);
    let bad = ScalarField::constant(g, 1.0);
    assert!(matches!(
        solve_neumann(&bad, 1e-10),
        Err(EhdError::Incompatible { .. })
    ));
}

#[test]
fn maximum_principle() {
    // nonpositive source gives a nonnegative potential
    let g = Grid2D::unit_square(32).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..5 {
        let d = (0..g.num_cells())
            .map(|_| -rng.gen_range(0.0..2.0))
            .collect();
        let rhs = ScalarField::from_vec(g, d).unwrap();
        let phi = solve_dirichlet(&rhs, 1e-12, default_max_iter(&g)).unwrap();
        assert!(phi.min() >= -1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn summation_by_parts(seed in any::<u64>(), nx in 3usize..20, ny in 3usize..20) {
        let g = Grid2D::new(nx, ny, 1.0 + nx as f64 * 0.01, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_field(g, &mut rng);
        let u = random_interior_faces(g, &mut rng);
        let lhs = grad_to_faces(&f, FaceBoundary::ZeroFlux).dot(&u).unwrap();
        let rhs = -cell_dot(&f, &div_from_faces(&u));
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
        prop_assert!(integrate(&div_from_faces(&u)).abs() <= 1e-12);
    }

    #[test]
    fn solve_is_linear(seed in any::<u64>(), a in -3.0f64..3.0) {
        let g = Grid2D::unit_square(12).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (r1, r2) = (random_field(g, &mut rng), random_field(g, &mut rng));
        let it = default_max_iter(&g);
        let s1 = solve_dirichlet(&r1, 1e-13, it).unwrap();
        let s2 = solve_dirichlet(&r2, 1e-13, it).unwrap();
        let comb = r1.zip_map(&r2, |x, y| a * x + y).unwrap();
        let sc = solve_dirichlet(&comb, 1e-13, it).unwrap();
        for k in 0..g.num_cells() {
            let want = a * s1.data()[k] + s2.data()[k];
            prop_assert!((sc.data()[k] - want).abs() <= 1e-9 * (1.0 + want.abs()));
        }
    }

    #[test]
    fn laplacian_self_adjoint(seed in any::<u64>()) {
        let g = Grid2D::new(9, 14, 0.9, 1.4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (f, h) = (random_field(g, &mut rng), random_field(g, &mut rng));
        let lap = DirichletLaplacian::new(g);
        let a = cell_dot(&lap.apply(&f).unwrap(), &h);
        let b = cell_dot(&f, &lap.apply(&h).unwrap());
        prop_assert!((a - b).abs() <= 1e-11 * (1.0 + a.abs()));
        prop_assert!(cell_dot(&lap.apply(&f).unwrap(), &f) < 0.0);
    }

    #[test]
    fn norm_triangle_inequality(seed in any::<u64>(), p in prop::sample::select(vec![1.0, 2.0, 3.0, f64::INFINITY])) {
        let g = Grid2D::unit_square(10).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (f, h) = (random_field(g, &mut rng), random_field(g, &mut rng));
        let s = f.zip_map(&h, |a, b| a + b).unwrap();
        let (nf, nh, ns) = (lp_norm(&f, p).unwrap(), lp_norm(&h, p).unwrap(), lp_norm(&s, p).unwrap());
        prop_assert!(ns <= nf + nh + 1e-12);
    }
}
