//! Solver-level round trips: manufactured solutions, the convolution
//! oracle, and the dimension-bounded regularity ratio.

use rand::Rng;

use ritz_core::exact::{
    manufacture_rhs, poisson_solve, regularity_report, residual_check, schrodinger_solve,
};
use ritz_core::quad::project_coefficient;
use ritz_core::rng;
use ritz_core::series::CosineSeries;
use ritz_core::{MultiIndex, QuadratureRule};

fn random_sparse(dim: usize, modes: usize, max_freq: u32, seed: u64) -> CosineSeries {
    let mut r = rng::stream(seed, "test-sparse");
    let mut u = CosineSeries::zero(dim);
    while u.num_terms() < modes {
        let k = MultiIndex::new((0..dim).map(|_| r.gen_range(0..=max_freq)).collect());
        if k.is_zero() || u.coeff(&k) != 0.0 {
            continue;
        }
        u.add_term(k, 2.0 * r.gen::<f64>() - 1.0);
    }
    u
}

#[test]
fn poisson_manufactured_round_trips() {
    let mut worst = 0.0f64;
    for d in 1..=3usize {
        for seed in 0..34u64 {
            let u = random_sparse(d, 4, 16, 1000 * d as u64 + seed);
            let f = manufacture_rhs(&u, None).unwrap();
            let solved = poisson_solve(&f).unwrap();
            worst = worst.max(residual_check(&solved, &f, None).unwrap());
            for (k, c) in u.terms() {
                assert!(
                    (solved.coeff(k) - c).abs() <= 1e-12,
                    "coefficient mismatch at {k:?} (d={d}, seed={seed})"
                );
            }
        }
    }
    assert!(worst <= 1e-12, "worst Poisson residual {worst:.3e}");
}

#[test]
fn schrodinger_manufactured_round_trips() {
    let mut worst = 0.0f64;
    for d in 1..=3usize {
        // keep the dense Galerkin systems desk-sized in three dimensions
        let (u_freq, v_freq) = match d {
            1 => (16, 4),
            2 => (6, 3),
            _ => (3, 2),
        };
        for seed in 0..34u64 {
            let u = random_sparse(d, 3, u_freq, 2000 * d as u64 + seed);
            // positive potential: constant background plus a small bump
            let mut v = random_sparse(d, 2, v_freq, 3000 * d as u64 + seed).scale(0.2);
            v.add_term(MultiIndex::zero(d), 2.0);
            let f = manufacture_rhs(&u, Some(&v)).unwrap();
            // a lattice containing the manufactured solution is enough:
            // the Galerkin solve then recovers it to solver accuracy and
            // the out-of-lattice residual cancels exactly
            let bound = u.max_freq() + v.max_freq();
            let solution = schrodinger_solve(&f, &v, bound).unwrap();
            worst = worst.max(residual_check(&solution.u, &f, Some(&v)).unwrap());
        }
    }
    assert!(worst <= 1e-8, "worst Schroedinger residual {worst:.3e}");
}

#[test]
fn series_product_matches_quadrature_projection() {
    let mut r = rng::stream(5, "test-pair");
    let mut worst = 0.0f64;
    for pair in 0..50u64 {
        let d = 1 + (pair % 3) as usize;
        let a = random_sparse(d, 3, 4, 4000 + pair);
        let b = random_sparse(d, 3, 4, 5000 + pair);
        let product = a.product(&b).unwrap();
        let rule = QuadratureRule::for_max_freq(d, a.max_freq() + b.max_freq());
        // probe the full support plus a few random off-support indices
        let mut probes: Vec<MultiIndex> = product.terms().map(|(k, _)| k.clone()).collect();
        for _ in 0..3 {
            probes.push(MultiIndex::new(
                (0..d).map(|_| r.gen_range(0..=9u32)).collect(),
            ));
        }
        for k in &probes {
            let projected = project_coefficient(
                |x| a.eval(x).unwrap() * b.eval(x).unwrap(),
                k,
                &rule,
            )
            .unwrap();
            worst = worst.max((projected - product.coeff(k)).abs());
        }
    }
    assert!(worst <= 1e-10, "worst convolution discrepancy {worst:.3e}");
}

#[test]
fn regularity_ratio_bounded_by_dimension() {
    for &d in &[1usize, 2, 4, 8] {
        for &s in &[0.0f64, 1.0, 2.0] {
            for seed in 0..100u64 {
                let f = random_sparse(d, 3, 4, 7000 * d as u64 + 13 * seed + s as u64);
                let report = regularity_report(&f, s, None).unwrap();
                let ratio = report.get("ratio").unwrap();
                assert!(
                    ratio <= d as f64,
                    "ratio {ratio:.6} exceeds d={d} (s={s}, seed={seed})"
                );
            }
        }
    }
}
