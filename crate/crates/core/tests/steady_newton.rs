use burgers_core::discretization::{
    linear_ramp, newton_solve_steady, steady_jacobian, steady_residual,
};
use burgers_core::{composite, BoundaryPair, Field, Grid};
use proptest::prelude::*;

#[test]
fn newton_recovers_the_composite() {
    let g = Grid::symmetric(801).unwrap();
    let bc = BoundaryPair::antisymmetric(1.0).unwrap();
    let p = composite(1.0, 0.0, 0.1).unwrap();
    let from_composite = newton_solve_steady(0.1, &bc, &p.sample(&g), 1e-10, 20).unwrap();
    assert!(from_composite.iterations <= 4);
    let diff = from_composite.u.sub(&p.sample(&g)).unwrap().max_abs();
    assert!(diff <= 5e-4, "max diff {diff:e}");

    let from_ramp = newton_solve_steady(0.1, &bc, &linear_ramp(&g, &bc), 1e-10, 50).unwrap();
    let cross = from_ramp.u.sub(&from_composite.u).unwrap().max_abs();
    assert!(cross <= 1e-8, "cross-initialization diff {cross:e}");

    for r in [&from_composite, &from_ramp] {
        let h = &r.residual_history;
        assert!(*h.last().unwrap() <= 1e-10);
        assert!(h.windows(2).skip(1).all(|w| w[1] < w[0]));
        assert_eq!(r.u.values()[0], 1.0);
        assert_eq!(r.u.values()[800], -1.0);
    }
}

#[test]
fn converged_solution_is_odd() {
    let g = Grid::symmetric(801).unwrap();
    for (alpha, eps) in [(1.0, 0.1), (2.0, 0.25), (0.5, 0.1)] {
        let bc = BoundaryPair::antisymmetric(alpha).unwrap();
        let p = composite(alpha, 0.0, eps).unwrap();
        let r = newton_solve_steady(eps, &bc, &p.sample(&g), 1e-10, 20).unwrap();
        let v = r.u.values();
        for i in 0..v.len() {
            assert!((v[i] + v[v.len() - 1 - i]).abs() <= 1e-8);
        }
    }
}

#[test]
fn newton_converges_quadratically() {
    let g = Grid::symmetric(201).unwrap();
    let bc = BoundaryPair::antisymmetric(1.0).unwrap();
    let r = newton_solve_steady(0.25, &bc, &linear_ramp(&g, &bc), 1e-12, 50).unwrap();
    let h = &r.residual_history;
    assert!(h.len() >= 3, "history {h:?}");
    let tail = &h[h.len() - 3..];
    for w in tail.windows(2) {
        assert!(w[1] <= 1e4 * w[0] * w[0], "history {h:?}");
    }
}

#[test]
fn discretization_error_is_second_order() {
    // Dirichlet data taken from the composite itself so the only
    // difference left is truncation error.
    let eps = 0.25;
    let p = composite(1.0, 0.0, eps).unwrap();
    let bc = BoundaryPair::matched(&p).unwrap();
    let mut errs = Vec::new();
    for n in [201, 401, 801] {
        let g = Grid::symmetric(n).unwrap();
        let r = newton_solve_steady(eps, &bc, &p.sample(&g), 1e-11, 20).unwrap();
        errs.push(r.u.sub(&p.sample(&g)).unwrap().max_abs());
    }
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!((1.7..=2.2).contains(&order), "errors {errs:?}");
    }
}

fn pseudo_random(n: usize, seed: u64) -> Vec<f64> {
    let mut s = seed
        .wrapping_mul(6364136223846793005)
        .wrapping_add(1442695040888963407);
    (0..n)
        .map(|_| {
            s = s
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn jacobian_matches_central_differences(
        seed in any::<u64>(),
        n in 3usize..60,
        eps in 0.05f64..1.0,
        alpha in -2.0f64..2.0,
    ) {
        let g = Grid::symmetric(n).unwrap();
        let bc = BoundaryPair::antisymmetric(alpha).unwrap();
        let base = pseudo_random(n, seed);
        let dir = pseudo_random(n, seed ^ 0x9e37_79b9);
        let u = Field::new(g, base.clone()).unwrap();
        let h = 1e-6;
        let plus = Field::new(g, base.iter().zip(&dir).map(|(a, d)| a + h * d).collect()).unwrap();
        let minus = Field::new(g, base.iter().zip(&dir).map(|(a, d)| a - h * d).collect()).unwrap();
        let rp = steady_residual(&plus, eps, &bc);
        let rm = steady_residual(&minus, eps, &bc);
        let jv = steady_jacobian(&u, eps).matvec(&dir);
        let scale = eps / (g.dx() * g.dx()) + 1.0 / g.dx();
        for (i, (jvi, (p, m))) in jv.iter().zip(rp.values().iter().zip(rm.values())).enumerate() {
            let fd = (p - m) / (2.0 * h);
            prop_assert!((fd - jvi).abs() <= 1e-6 * scale, "row {} fd {} jv {}", i, fd, jvi);
        }
    }
}
