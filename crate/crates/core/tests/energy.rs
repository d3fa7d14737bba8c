//! Energy-excess identities, the equivalence sandwich, sampling bias
//! properties of the empirical losses, and a small training benchmark.

use rand::Rng;

use ritz_core::exact::manufacture_rhs;
use ritz_core::rng;
use ritz_core::series::{CosineSeries, NormKind};
use ritz_core::{
    empirical_loss, energy_excess, h1_error, population_loss, train, Activation, Field, InitMode,
    MultiIndex, Optimizer, ProblemKind, QuadratureRule, SampleGenerator, SampleSet, TrainConfig,
    TwoLayerNet,
};

fn random_zero_mean(dim: usize, modes: usize, max_freq: u32, seed: u64) -> CosineSeries {
    let mut r = rng::stream(seed, "test-series");
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

fn positive_potential(dim: usize, seed: u64) -> CosineSeries {
    let mut v = random_zero_mean(dim, 2, 2, seed).scale(0.3);
    v.add_term(MultiIndex::zero(dim), 1.5);
    v
}

#[test]
fn excess_routes_agree_for_spectral_perturbations() {
    for d in 1..=3usize {
        let rule = QuadratureRule::tensor_gauss(d, 48);
        for seed in 0..10u64 {
            let u_star = random_zero_mean(d, 3, 3, 100 * d as u64 + seed).scale(0.1);
            let f = manufacture_rhs(&u_star, None).unwrap();
            let u = u_star
                .add(&random_zero_mean(d, 2, 4, 900 + seed).scale(0.05))
                .unwrap();
            let report = energy_excess(&u, &u_star, &f, None, &rule).unwrap();
            assert!(report.agreement <= 1e-8, "poisson agreement {:.3e}", report.agreement);
            assert!(report.sandwich_ok);

            let v = positive_potential(d, 500 + seed);
            let f_s = manufacture_rhs(&u_star, Some(&v)).unwrap();
            let report = energy_excess(&u, &u_star, &f_s, Some(&v), &rule).unwrap();
            assert!(
                report.agreement <= 1e-8,
                "schroedinger agreement {:.3e}",
                report.agreement
            );
            assert!(report.sandwich_ok);
        }
    }
}

#[test]
fn sandwich_holds_for_random_networks() {
    let d = 2;
    let rule = QuadratureRule::tensor_gauss(d, 48);
    for seed in 0..100u64 {
        let u_star = random_zero_mean(d, 3, 3, 40 + seed).scale(0.1);
        let f = manufacture_rhs(&u_star, None).unwrap();
        let net = TwoLayerNet::init_random(d, 8, 1.0, Activation::softplus(4.0), seed);
        let report = energy_excess(&net, &u_star, &f, None, &rule).unwrap();
        assert!(report.sandwich_ok, "poisson sandwich failed at seed {seed}");

        let v = positive_potential(d, 7000 + seed);
        let f_s = manufacture_rhs(&u_star, Some(&v)).unwrap();
        let report = energy_excess(&net, &u_star, &f_s, Some(&v), &rule).unwrap();
        assert!(report.sandwich_ok, "schroedinger sandwich failed at seed {seed}");
    }
}

#[test]
fn schrodinger_empirical_loss_is_unbiased() {
    let d = 2;
    let net = TwoLayerNet::init_random(d, 8, 1.0, Activation::softplus(4.0), 3);
    let u_star = random_zero_mean(d, 3, 3, 77).scale(0.1);
    let v = positive_potential(d, 78);
    let f = manufacture_rhs(&u_star, Some(&v)).unwrap();
    let rule = QuadratureRule::tensor_gauss(d, 48);
    let population = population_loss(&net, &f, Some(&v), &rule).unwrap();

    let trials = 1000;
    let n = 256;
    let mut values = Vec::with_capacity(trials);
    for t in 0..trials {
        let samples = SampleSet::generate(d, n, 9000 + t as u64, SampleGenerator::IidUniform);
        values.push(empirical_loss(&net, &samples, &f, Some(&v)).unwrap());
    }
    let mean: f64 = values.iter().sum::<f64>() / trials as f64;
    let var: f64 =
        values.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (trials - 1) as f64;
    let se = (var / trials as f64).sqrt();
    assert!(
        (mean - population).abs() <= 3.0 * se,
        "bias {:.3e} exceeds 3 SE = {:.3e}",
        mean - population,
        3.0 * se
    );
}

#[test]
fn poisson_empirical_loss_bias_matches_mean_variance() {
    let d = 1;
    let net = TwoLayerNet::init_random(d, 8, 1.0, Activation::softplus(4.0), 5);
    let u_star = random_zero_mean(d, 2, 3, 81).scale(0.1);
    let f = manufacture_rhs(&u_star, None).unwrap();
    let rule = QuadratureRule::tensor_gauss(d, 48);
    let population = population_loss(&net, &f, None, &rule).unwrap();

    // the only nonlinearity in the measure is the squared sample mean, so
    // the bias is exactly Var(mean of net) / 2 = Var(net) / (2n)
    let mean_net = rule.integrate(|x| net.eval_grad(x).unwrap().0);
    let var_net = rule.integrate(|x| {
        let v = net.eval_grad(x).unwrap().0 - mean_net;
        v * v
    });
    let trials = 1000;
    let n = 64;
    let expected_bias = var_net / (2.0 * n as f64);

    let mut values = Vec::with_capacity(trials);
    for t in 0..trials {
        let samples = SampleSet::generate(d, n, 17_000 + t as u64, SampleGenerator::IidUniform);
        values.push(empirical_loss(&net, &samples, &f, None).unwrap());
    }
    let mean: f64 = values.iter().sum::<f64>() / trials as f64;
    let var: f64 =
        values.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (trials - 1) as f64;
    let se = (var / trials as f64).sqrt();
    let bias = mean - population;
    assert!(bias >= -3.0 * se, "bias {bias:.3e} significantly negative");
    assert!(
        (bias - expected_bias).abs() <= 3.0 * se,
        "bias {bias:.3e} not within 3 SE of {expected_bias:.3e}"
    );
}

#[test]
fn training_zero_source_drives_constant_to_zero() {
    let config = TrainConfig {
        kind: ProblemKind::Poisson,
        f: CosineSeries::zero(1),
        v: None,
        m: 4,
        budget: 1.0,
        tau: None,
        n: 64,
        optimizer: Optimizer::default(),
        step: None,
        iters: 2000,
        projection_cadence: 1,
        seed: 1,
        init: InitMode::Random,
    };
    let result = train(&config).unwrap();
    let rule = QuadratureRule::tensor_gauss(1, 16);
    let mean = rule.integrate(|x| result.net.eval_grad(x).unwrap().0);
    assert!(mean.abs() <= 1e-3, "trained mean {mean:.3e} away from zero");
}

#[test]
fn training_smoke_benchmark() {
    let pi = std::f64::consts::PI;
    let u_star = CosineSeries::basis(MultiIndex::new(vec![1])).scale(1.0 / (pi * pi));
    let f = manufacture_rhs(&u_star, None).unwrap();
    let rule = QuadratureRule::tensor_gauss(1, 48);
    let u_norm = u_star.norm(NormKind::H1).unwrap();

    let mut rel_errors: Vec<f64> = (0..5u64)
        .map(|seed| {
            let config = TrainConfig {
                kind: ProblemKind::Poisson,
                f: f.clone(),
                v: None,
                m: 16,
                budget: u_star.norm(NormKind::Barron(2.0)).unwrap(),
                tau: None,
                n: 4096,
                optimizer: Optimizer::default(),
                step: Some(0.1),
                iters: 600,
                projection_cadence: 1,
                seed,
                init: InitMode::Approximant,
            };
            let result = train(&config).unwrap();
            h1_error(&result.net, &u_star, &rule).unwrap() / u_norm
        })
        .collect();
    rel_errors.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = rel_errors[2];
    assert!(median <= 0.2, "median relative H1 error {median:.4}");
}
