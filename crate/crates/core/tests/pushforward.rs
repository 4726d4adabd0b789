use bfm_core::grid::{normalize, DensityField, Grid, Potential, VectorField};
use bfm_core::pushforward::{
    build_argmin_map, build_map, dual_value_j, primal_cost, pushforward_density, Side,
    TransportMap,
};
use bfm_core::transform::ctransform;
use bfm_core::CostModel;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn bump(grid: Grid, c: [f64; 2], w: f64) -> DensityField {
    let raw: Vec<f64> = (0..grid.len())
        .map(|i| {
            let p = grid.point(i);
            let r2 = (p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2);
            (-r2 / (w * w)).exp()
        })
        .collect();
    normalize(grid, &raw).unwrap()
}

/// Random smooth direction: a few low cosine modes.
fn smooth_direction(rng: &mut ChaCha8Rng, grid: Grid) -> Potential {
    let coeffs: Vec<(f64, f64, f64)> = (0..4)
        .map(|_| {
            (
                rng.gen_range(-1.0..1.0),
                rng.gen_range(0..3) as f64,
                rng.gen_range(0..3) as f64,
            )
        })
        .collect();
    Potential::from_fn(grid, |p| {
        coeffs
            .iter()
            .map(|(a, k, l)| {
                a * (std::f64::consts::PI * k * p[0]).cos() * (std::f64::consts::PI * l * p[1]).cos()
            })
            .sum()
    })
}

fn inner(u: &Potential, r: &[f64]) -> f64 {
    u.values().iter().zip(r).map(|(a, b)| a * b).sum::<f64>() * u.grid().cell_volume()
}

fn check_first_variation(model: &CostModel, phi: &Potential, mu: &DensityField, nu: &DensityField) {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let eps = 1e-3;
    let j0 = dual_value_j(model, phi, mu, nu).unwrap();
    let rho = pushforward_density(&build_map(model, phi).unwrap(), mu).unwrap();
    let resid: Vec<f64> = nu.values().iter().zip(rho.values()).map(|(a, b)| a - b).collect();
    for _ in 0..5 {
        let u = smooth_direction(&mut rng, *phi.grid());
        let mut moved = phi.clone();
        moved.add_scaled(eps, &u).unwrap();
        let fd = (dual_value_j(model, &moved, mu, nu).unwrap() - j0) / eps;
        let exact = inner(&u, &resid);
        assert!(
            (fd - exact).abs() <= 0.05 * exact.abs().max(1e-3),
            "finite difference {fd} vs first variation {exact}"
        );
    }
}

#[test]
fn first_variation_at_a_translation() {
    let g = Grid::cube(2, 64).unwrap();
    let mu = bump(g, [0.4, 0.45], 0.1);
    let nu = bump(g, [0.55, 0.5], 0.12);
    let model = CostModel::quadratic(2);
    // φ(y) = a·y moves every point by a, here a whole number of cells
    let a = [4.0 / 64.0, 2.0 / 64.0];
    let phi = Potential::from_fn(g, |p| a[0] * p[0] + a[1] * p[1]);
    check_first_variation(&model, &phi, &mu, &nu);
}

#[test]
fn one_sided_differences_bracket_the_first_variation() {
    // Away from cell-aligned maps the discrete J has kinks at the 1e-3
    // scale, so the one-sided quotients differ; concavity still puts the
    // first variation between them.
    let g = Grid::cube(2, 64).unwrap();
    let mu = bump(g, [0.4, 0.45], 0.1);
    let nu = bump(g, [0.55, 0.5], 0.12);
    let model = CostModel::quadratic(2);
    let mut solver =
        bfm_core::Solver::new(&model, &mu, &nu, bfm_core::SolverConfig::default()).unwrap();
    solver.step().unwrap();
    let phi = solver.state().phi.clone();
    let j0 = dual_value_j(&model, &phi, &mu, &nu).unwrap();
    let rho = pushforward_density(&build_map(&model, &phi).unwrap(), &mu).unwrap();
    let resid: Vec<f64> = nu.values().iter().zip(rho.values()).map(|(a, b)| a - b).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let eps = 1e-3;
    for _ in 0..5 {
        let u = smooth_direction(&mut rng, g);
        let (mut up, mut down) = (phi.clone(), phi.clone());
        up.add_scaled(eps, &u).unwrap();
        down.add_scaled(-eps, &u).unwrap();
        let forward = (dual_value_j(&model, &up, &mu, &nu).unwrap() - j0) / eps;
        let backward = (j0 - dual_value_j(&model, &down, &mu, &nu).unwrap()) / eps;
        let exact = inner(&u, &resid);
        let slack = 0.05 * exact.abs().max(1e-3);
        assert!(forward <= backward + 1e-9);
        assert!(forward - slack <= exact && exact <= backward + slack, "{forward} {exact} {backward}");
    }
}

#[test]
fn affine_potential_translates() {
    let g = Grid::cube(2, 64).unwrap();
    let a = [0.1, -0.05];
    let phi = Potential::from_fn(g, |p| a[0] * p[0] + a[1] * p[1]);
    let map = build_map(&CostModel::quadratic(2), &phi).unwrap();
    let h = g.max_spacing();
    for i in 0..g.len() {
        let p = g.point(i);
        let inside = (0.1..0.85).contains(&p[0]) && (0.1..0.85).contains(&p[1]);
        if inside {
            let d = map.displacement().at(i);
            assert!((d[0] - a[0]).abs() <= h && (d[1] - a[1]).abs() <= h);
        }
    }
}

#[test]
fn exact_translation_costs_a_quarter() {
    let g = Grid::cube(2, 64).unwrap();
    let mu: bfm_core::shapes::ShapeUnion = "disc:0.25,0.25,0.125".parse().unwrap();
    let mu = mu.density(g).unwrap();
    let disp = VectorField::new(g, vec![vec![0.5; g.len()], vec![0.5; g.len()]]).unwrap();
    let map = TransportMap::from_displacement(disp, Side::Mu);
    let cost = primal_cost(&CostModel::quadratic(2), &map, &mu).unwrap();
    assert!((cost - 0.25).abs() < 1e-12);
    assert_eq!(primal_cost(&CostModel::quadratic(2), &TransportMap::identity(g, Side::Mu), &mu).unwrap(), 0.0);
}

#[test]
fn one_dimensional_maps_are_monotone() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let g = Grid::new(&[80]).unwrap();
    for p in [1.1, 1.5, 2.0, 3.0] {
        let model = CostModel::new(vec![p]).unwrap();
        for _ in 0..20 {
            let raw = Potential::new(g, (0..80).map(|_| rng.gen_range(-0.2..0.2)).collect()).unwrap();
            // a c-transform output is c-concave
            let phi = ctransform(&model, &raw).unwrap();
            let arg_map = build_argmin_map(&model, &phi).unwrap();
            for j in 1..80 {
                assert!(arg_map.target(j)[0] >= arg_map.target(j - 1)[0] - 1e-12);
            }
            if p == 2.0 {
                let map = build_map(&model, &phi).unwrap();
                for j in 1..80 {
                    assert!(map.target(j)[0] >= map.target(j - 1)[0] - 1e-12);
                }
            }
        }
    }
}

#[test]
fn finite_difference_and_minimiser_maps_agree_on_a_translation() {
    let g = Grid::cube(2, 64).unwrap();
    let model = CostModel::new(vec![1.5, 2.5]).unwrap();
    // potential whose c-transform minimisers move every interior point by
    // a fixed vector: φ(y) = h'(a)·y
    let a = [0.125, -0.0625];
    let slope = [model.axis_gradient(0, a[0]), model.axis_gradient(1, a[1])];
    let phi = Potential::from_fn(g, |p| slope[0] * p[0] + slope[1] * p[1]);
    let fd = build_map(&model, &phi).unwrap();
    let am = build_argmin_map(&model, &phi).unwrap();
    let h = g.max_spacing();
    let mut checked = 0;
    for i in 0..g.len() {
        let p = g.point(i);
        if (0.1..0.8).contains(&p[0]) && (0.15..0.9).contains(&p[1]) {
            let (x, y) = (fd.displacement().at(i), am.displacement().at(i));
            assert!((x[0] - y[0]).abs() <= 2.0 * h && (x[1] - y[1]).abs() <= 2.0 * h);
            assert!((y[0] - a[0]).abs() <= h && (y[1] - a[1]).abs() <= h);
            checked += 1;
        }
    }
    assert!(checked > 1000);
}

fn random_map(rng: &mut ChaCha8Rng, g: Grid, reach: f64) -> TransportMap {
    let comps = (0..g.ndim())
        .map(|_| (0..g.len()).map(|_| rng.gen_range(-reach..reach)).collect())
        .collect();
    TransportMap::from_displacement(VectorField::new(g, comps).unwrap(), Side::Mu)
}

#[test]
fn coordinate_functions_are_transported_exactly() {
    // multilinear splatting reproduces linear test functions whenever the
    // target stays between the outermost cell centres
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let g = Grid::new(&[40, 30]).unwrap();
    let raw: Vec<f64> = (0..g.len())
        .map(|i| {
            let p = g.point(i);
            if (0.3..0.7).contains(&p[0]) && (0.3..0.7).contains(&p[1]) {
                rng.gen_range(0.0..1.0)
            } else {
                0.0
            }
        })
        .collect();
    let mu = normalize(g, &raw).unwrap();
    let map = random_map(&mut rng, g, 0.15);
    let out = pushforward_density(&map, &mu).unwrap();
    for axis in 0..2 {
        let lhs: f64 = (0..g.len()).map(|i| g.point(i)[axis] * out.values()[i]).sum::<f64>()
            * g.cell_volume();
        let rhs: f64 = (0..g.len()).map(|i| map.target(i)[axis] * mu.values()[i]).sum::<f64>()
            * g.cell_volume();
        assert!((lhs - rhs).abs() <= 1e-12, "axis {axis}: {lhs} vs {rhs}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn splatting_conserves_mass(seed in any::<u64>(), reach in 0.0f64..1.5, three in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = if three { Grid::new(&[6, 5, 7]).unwrap() } else { Grid::new(&[13, 11]).unwrap() };
        let raw: Vec<f64> = (0..g.len()).map(|_| rng.gen_range(0.0..1.0)).collect();
        let mu = normalize(g, &raw).unwrap();
        let out = pushforward_density(&random_map(&mut rng, g, reach), &mu).unwrap();
        prop_assert!((out.mass() - 1.0).abs() <= 1e-12);
        prop_assert!(out.values().iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn coordinate_identity_within_one_cell(seed in any::<u64>()) {
        // targets near the walls are clamped onto the boundary nodes, which
        // moves linear moments by at most half a cell
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = Grid::new(&[16, 16]).unwrap();
        let raw: Vec<f64> = (0..g.len()).map(|_| rng.gen_range(0.0..1.0)).collect();
        let mu = normalize(g, &raw).unwrap();
        let map = random_map(&mut rng, g, 1.0);
        let out = pushforward_density(&map, &mu).unwrap();
        for axis in 0..2 {
            let lhs: f64 = (0..g.len()).map(|i| g.point(i)[axis] * out.values()[i]).sum::<f64>() * g.cell_volume();
            let rhs: f64 = (0..g.len()).map(|i| map.target(i)[axis] * mu.values()[i]).sum::<f64>() * g.cell_volume();
            prop_assert!((lhs - rhs).abs() <= g.spacing(axis));
        }
    }
}
