//! Closed-form relaxation optima, checked against independent oracles.

use sonc::covers::ExponentStrategy;
use sonc::{compute_bound, BoundOptions, Exponent, Polynomial, PopInstance, Status};

fn poly(n: usize, terms: &[(&[u32], f64)]) -> Polynomial {
    Polynomial::from_terms(n, terms.iter().map(|(e, c)| (Exponent::new(e.to_vec()), *c))).unwrap()
}

/// Maximizes `-big_m * nu - 1 / (4 nu)` over a fine grid; this is the bound of
/// `min -x^p` with a single circuit of weights (1/2, 1/2), after eliminating
/// the origin share `c0 = 1 / (4 nu)` from `1 <= 2 sqrt(c0 nu)`.
fn grid_oracle(big_m: f64) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for k in 1..200_000 {
        let nu = k as f64 * 1e-5;
        let c0 = 1.0 / (4.0 * nu);
        best = best.max(-big_m * nu - c0);
    }
    best
}

#[test]
fn oracles_agree_with_calculus() {
    // d/dnu (-4 nu - 1/(4 nu)) = 0 at nu = 1/4, value -2
    assert!((grid_oracle(4.0) + 2.0).abs() < 1e-8);
    // -16 nu - 1/(4 nu): nu = 1/8, value -4
    assert!((grid_oracle(16.0) + 4.0).abs() < 1e-8);
}

#[test]
fn min_minus_x() {
    let inst = PopInstance::new(poly(1, &[(&[1], -1.0)]), vec![], vec![-1.0], vec![2.0]).unwrap();
    let out = compute_bound(&inst, &BoundOptions::default());
    assert_eq!(out.status, Status::Optimal, "{:?}", out.message);
    assert_eq!(out.exponents, vec![2]);
    let g = out.gamma_solver.unwrap();
    assert!((g - grid_oracle(4.0)).abs() < 1e-5, "gamma {g}");
    let cert = out.gamma_certified().unwrap();
    assert!((cert + 2.0).abs() < 1e-5);
    let solve = out.solve.unwrap();
    assert!((solve.nu[0] - 0.25).abs() < 1e-3);
}

#[test]
fn min_minus_x_squared_with_quartic_bound() {
    let inst = PopInstance::new(poly(1, &[(&[2], -1.0)]), vec![], vec![-1.0], vec![2.0]).unwrap();
    let opts = BoundOptions {
        strategy: ExponentStrategy::Fixed(vec![4]),
        ..Default::default()
    };
    let out = compute_bound(&inst, &opts);
    assert_eq!(out.status, Status::Optimal, "{:?}", out.message);
    let g = out.gamma_solver.unwrap();
    assert!((g - grid_oracle(16.0)).abs() < 1e-5, "gamma {g}");
    assert!((out.solve.unwrap().nu[0] - 0.125).abs() < 1e-3);
}

#[test]
fn motzkin_unconstrained() {
    let f = poly(
        2,
        &[(&[4, 2], 1.0), (&[2, 4], 1.0), (&[2, 2], -3.0), (&[0, 0], 1.0)],
    );
    let inst = PopInstance::new(f, vec![], vec![-1.0; 2], vec![1.0; 2]).unwrap();
    // 3 (c0 c1 c2)^(1/3) >= 3 with c1, c2 <= 1 forces 1 - gamma >= 1.
    for opts in [BoundOptions::without_bound_constraints(), BoundOptions::default()] {
        let out = compute_bound(&inst, &opts);
        assert_eq!(out.status, Status::Optimal, "{:?}", out.message);
        let g = out.gamma_solver.unwrap();
        assert!(g.abs() < 1e-5, "gamma {g}");
        assert!(out.gamma_certified().unwrap().abs() < 1e-5);
    }
}
