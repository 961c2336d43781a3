use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ehd::grid::{Grid2D, ScalarField};
use ehd::poisson::DirichletLaplacian;
use ehd::stationary::{
    functional_j, sinh_form_check, solve_pb, solve_pb_from, stationary_pressure_check,
    StationarySolution,
};

fn random_phi(g: Grid2D, rng: &mut ChaCha8Rng, amp: f64) -> ScalarField {
    ScalarField::from_vec(
        g,
        (0..g.num_cells())
            .map(|_| amp * rng.gen_range(-1.0..1.0))
            .collect(),
    )
    .unwrap()
}

fn l1(f: &ScalarField) -> f64 {
    f.data().iter().map(|x| x.abs()).sum::<f64>() * f.grid().cell_area()
}

fn linf(a: &ScalarField, b: &ScalarField) -> f64 {
    a.data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

#[test]
fn functional_is_strictly_convex() {
    let g = Grid2D::new(12, 10, 1.2, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..50 {
        let (a, b) = (random_phi(g, &mut rng, 2.0), random_phi(g, &mut rng, 2.0));
        let mid = a.zip_map(&b, |x, y| 0.5 * (x + y)).unwrap();
        let (m, n) = (rng.gen_range(0.01..2.0), rng.gen_range(0.01..2.0));
        let jm = functional_j(&mid, m, n).unwrap();
        let avg = 0.5 * (functional_j(&a, m, n).unwrap() + functional_j(&b, m, n).unwrap());
        assert!(jm < avg);
    }
}

#[test]
fn functional_lower_bound() {
    let g = Grid2D::new(10, 14, 0.8, 1.3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let zero = ScalarField::zeros(g);
    for _ in 0..50 {
        let phi = random_phi(g, &mut rng, 3.0);
        let (m, n) = (rng.gen_range(0.01..2.0), rng.gen_range(0.01..2.0));
        let j0 = functional_j(&zero, m, n).unwrap();
        assert!((j0 - (m + n) * g.area().ln()).abs() <= 1e-12);
        assert!(functional_j(&phi, m, n).unwrap() >= j0 - (m - n).abs() * l1(&phi) - 1e-12);
    }
}

#[test]
fn symmetric_masses_give_zero_potential() {
    for n in [8, 33, 64] {
        let g = Grid2D::new(n, n + 3, 1.0, 1.1).unwrap();
        let s = solve_pb(0.7, 0.7, g, 1e-10).unwrap();
        assert!(s.phi.max_abs() <= 1e-10);
        let c = 0.7 / g.area();
        assert!(s
            .v
            .data()
            .iter()
            .chain(s.w.data())
            .all(|&x| (x - c).abs() <= 1e-14 * c));
        assert!(sinh_form_check(&s).unwrap() <= 1e-10);
        assert!(stationary_pressure_check(&s).unwrap() <= 1e-13);
    }
}

#[test]
fn asymmetric_solution_properties() {
    let g = Grid2D::unit_square(48).unwrap();
    let s = solve_pb(0.05, 0.1, g, 1e-10).unwrap();
    let cell = g.cell_area();
    let (mv, mw) = (
        s.v.data().iter().sum::<f64>() * cell,
        s.w.data().iter().sum::<f64>() * cell,
    );
    assert!(((mv - 0.05) / 0.05).abs() <= 1e-12);
    assert!(((mw - 0.1) / 0.1).abs() <= 1e-12);
    assert!(s.v.min() > 0.0 && s.w.min() > 0.0);
    let lap = DirichletLaplacian::new(g).apply(&s.phi).unwrap();
    let r: f64 = lap
        .data()
        .iter()
        .zip(s.v.data().iter().zip(s.w.data()))
        .map(|(l, (v, w))| (l - (v - w)).powi(2))
        .sum::<f64>()
        * cell;
    assert!(r.sqrt() <= 1e-10);
    assert!(sinh_form_check(&s).unwrap() <= 1e-9);
    // less positive than negative charge: the potential is superharmonic,
    // hence nonnegative under the zero boundary condition
    assert!(s.phi.min() >= -1e-10);
    for w in s.j_history.windows(2) {
        assert!(w[1] <= w[0] + 1e-14, "{:?}", s.j_history);
    }
    assert!(s.j_history.windows(2).any(|w| w[1] < w[0]));
}

#[test]
fn unique_minimizer_from_different_starts() {
    let g = Grid2D::unit_square(32).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let a = solve_pb(0.3, 0.9, g, 1e-10).unwrap();
    for _ in 0..3 {
        let b = solve_pb_from(0.3, 0.9, random_phi(g, &mut rng, 1.0), 1e-10).unwrap();
        assert!(linf(&a.phi, &b.phi) <= 1e-9);
    }
}

#[test]
fn small_mass_sequence_shrinks() {
    let g = Grid2D::unit_square(32).unwrap();
    let norms: Vec<f64> = [1e-1, 1e-2, 1e-3]
        .iter()
        .map(|&n| solve_pb(2.0 * n, n, g, 1e-12).unwrap().phi.max_abs())
        .collect();
    assert!(norms.windows(2).all(|w| w[1] < w[0]), "{norms:?}");
    assert!(norms[2] < 0.02 * norms[0]);
}

#[test]
fn sinh_check_rejects_unconverged_potential() {
    let g = Grid2D::unit_square(16).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    let s = solve_pb(0.2, 0.5, g, 1e-10).unwrap();
    let fake = StationarySolution {
        phi: random_phi(g, &mut rng, 1.0),
        ..s
    };
    assert!(sinh_form_check(&fake).unwrap() > 1.0);
}

#[test]
fn pressure_identity_refines_at_second_order() {
    let errs: Vec<f64> = [32, 64, 128]
        .iter()
        .map(|&n| {
            let s = solve_pb(2.0, 6.0, Grid2D::unit_square(n).unwrap(), 1e-12).unwrap();
            stationary_pressure_check(&s).unwrap()
        })
        .collect();
    for w in errs.windows(2) {
        let r = w[0] / w[1];
        assert!((3.0..=5.0).contains(&r), "{errs:?}");
    }
}

#[test]
fn export_writes_solution_and_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let g = Grid2D::new(8, 6, 1.0, 0.75).unwrap();
    let s = solve_pb(0.4, 0.4, g, 1e-10).unwrap();
    s.export(dir.path()).unwrap();
    let phi = ScalarField::read_matrix(g, &dir.path().join("phi.txt")).unwrap();
    assert_eq!(phi, s.phi);
    let meta = std::fs::read_to_string(dir.path().join("metadata.txt")).unwrap();
    let line = meta.lines().find(|l| l.starts_with("phi_max_abs")).unwrap();
    let val: f64 = line.split('=').nth(1).unwrap().trim().parse().unwrap();
    assert!(val <= 1e-10);
}
