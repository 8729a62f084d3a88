//! Oracle-backed checks of the likelihood machinery: enumeration over latent
//! configurations, brute-force Bayes for the conditional class probabilities,
//! finite-difference gradients, and independent density implementations.

mod common;

use common::*;
use ndarray::Array2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ratings::dataset::{LongRatings, RatingDataset};
use ratings::likelihood::{
    log_likelihood_grouped, log_likelihood_long, log_posterior, log_posterior_unconstrained,
    log_prior,
};
use ratings::model::{resolve_spec, PriorOverrides, Variant};
use ratings::params::{self, CcParams, Layout, Params};
use ratings::posterior::conditional_z;

#[test]
fn enumeration_oracle_small_instances() {
    // marginalized likelihood equals the z-explicit sum over all K^I
    // configurations on every instance with I <= 4, J <= 3, K <= 3
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for trial in 0..200 {
        let problem = random_problem(&mut rng, 4, 3, 3);
        let params = random_ds_params(&mut rng, problem.raters, problem.categories);
        let (pi, theta) = match &params {
            Params::DawidSkene(p) => (p.pi.clone(), p.theta.clone()),
            _ => unreachable!(),
        };
        let expected = enumeration_log_likelihood(&problem, &pi, &theta);
        let actual = log_likelihood_long(&params, &problem.dataset()).unwrap();
        assert!(
            (expected - actual).abs() < 1e-12,
            "trial {trial}: enumeration {expected} vs marginalized {actual}"
        );
    }
}

#[test]
fn enumeration_oracle_toy_2x2() {
    let problem = SmallProblem {
        items: 2,
        raters: 2,
        categories: 2,
        ratings: vec![vec![(0, 0), (1, 0)], vec![(0, 1), (1, 0)]],
    };
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let params = random_ds_params(&mut rng, 2, 2);
    let (pi, theta) = match &params {
        Params::DawidSkene(p) => (p.pi.clone(), p.theta.clone()),
        _ => unreachable!(),
    };
    let expected = enumeration_log_likelihood(&problem, &pi, &theta);
    let actual = log_likelihood_long(&params, &problem.dataset()).unwrap();
    assert!((expected - actual).abs() < 1e-12);
}

#[test]
fn conditional_z_matches_brute_force_bayes() {
    let mut rng = ChaCha8Rng::seed_from_u64(4096);
    for _ in 0..200 {
        let problem = random_problem(&mut rng, 3, 2, 2);
        let params = random_ds_params(&mut rng, problem.raters, problem.categories);
        let (pi, theta) = match &params {
            Params::DawidSkene(p) => (p.pi.clone(), p.theta.clone()),
            _ => unreachable!(),
        };
        let expected = enumeration_conditional_z(&problem, &pi, &theta);
        let actual = conditional_z(&params, &problem.dataset()).unwrap();
        for (e, a) in expected.iter().zip(actual.iter()) {
            assert!((e - a).abs() < 1e-12, "{e} vs {a}");
        }
        for row in actual.rows() {
            assert!((row.sum() - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn long_grouped_equality_on_random_complete_data() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..50 {
        let raters = rng.random_range(1..=4usize);
        let categories = rng.random_range(2..=3usize);
        let items = rng.random_range(2..=20usize);
        let rows: Vec<(i64, i64, i64)> = (1..=items as i64)
            .flat_map(|i| {
                let mut r = Vec::new();
                for j in 1..=raters as i64 {
                    r.push((i, j, rng.random_range(1..=categories as i64)));
                }
                r
            })
            .collect();
        let long = RatingDataset::from_long(
            LongRatings::from_labelled(&rows, Some(categories)).unwrap(),
        );
        let grouped = long.to_grouped().unwrap();
        let params = random_ds_params(&mut rng, raters, categories);
        let a = log_likelihood_long(&params, &long).unwrap();
        let b = log_likelihood_grouped(&params, &grouped).unwrap();
        assert!((a - b).abs() < 1e-8, "{a} vs {b}");
    }
}

#[test]
fn long_grouped_equality_on_caries() {
    // 20 random parameter points on the bundled grouped dataset
    let grouped = ratings::datasets::caries();
    let long = grouped.to_long().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let params = random_ds_params(&mut rng, 5, 2);
        let a = log_likelihood_grouped(&params, &grouped).unwrap();
        let b = log_likelihood_long(&params, &long).unwrap();
        assert!((a - b).abs() < 1e-8, "{a} vs {b}");
    }
}

#[test]
fn prior_densities_match_independent_oracles() {
    // Beta(4.8, 3.2) at 0.6 against a from-scratch implementation
    let spec = resolve_spec(Variant::ClassConditional, 2, 1, &PriorOverrides::default()).unwrap();
    let params = Params::ClassConditional(CcParams {
        pi: vec![0.5, 0.5],
        accuracy: Array2::from_elem((1, 2), 0.6),
    });
    let lp = log_prior(&params, &spec).unwrap();
    let expected = dirichlet_lpdf_oracle(&[0.5, 0.5], &[3.0, 3.0])
        + 2.0 * beta_lpdf_oracle(0.6, 4.8, 3.2);
    assert!((lp - expected).abs() < 1e-10, "{lp} vs {expected}");

    // Dirichlet against the oracle at random points
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..20 {
        let k = rng.random_range(2..=4usize);
        let params = random_ds_params(&mut rng, 2, k);
        let alpha: Vec<f64> = (0..k).map(|_| rng.random::<f64>() * 5.0 + 0.2).collect();
        let spec = resolve_spec(
            Variant::DawidSkene,
            k,
            2,
            &PriorOverrides { alpha: Some(alpha.clone()), ..Default::default() },
        )
        .unwrap();
        let lp = log_prior(&params, &spec).unwrap();
        let (pi, theta) = match &params {
            Params::DawidSkene(p) => (p.pi.clone(), p.theta.clone()),
            _ => unreachable!(),
        };
        let mut expected = dirichlet_lpdf_oracle(&pi, &alpha);
        let beta = ratings::model::default_beta(k, 8.0, 0.6).unwrap();
        let beta_rows: Vec<Vec<f64>> =
            (0..k).map(|a| (0..k).map(|b| beta[[a, b]]).collect()).collect();
        for j in 0..2 {
            for a in 0..k {
                let row: Vec<f64> = (0..k).map(|b| theta[[j, a, b]]).collect();
                expected += dirichlet_lpdf_oracle(&row, &beta_rows[a]);
            }
        }
        assert!((lp - expected).abs() < 1e-9, "{lp} vs {expected}");
    }
}

fn spec_for(variant: Variant, categories: usize, raters: usize) -> ratings::model::ModelSpec {
    resolve_spec(variant, categories, raters, &PriorOverrides::default()).unwrap()
}

#[test]
fn gradients_match_finite_differences() {
    // analytic gradient of the sampling target vs central differences at 20
    // random points for each parameterized variant
    let mut rng = ChaCha8Rng::seed_from_u64(1717);
    for variant in [Variant::DawidSkene, Variant::ClassConditional, Variant::Hierarchical] {
        for point in 0..20 {
            let problem = random_problem(&mut rng, 4, 3, 3);
            let spec = spec_for(variant, problem.categories, problem.raters);
            let dataset = problem.dataset();
            let layout = Layout::new(variant, problem.categories, problem.raters);
            let x: Vec<f64> =
                (0..layout.unconstrained_dim()).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
            let (value, grad) = log_posterior_unconstrained(&x, &spec, &dataset).unwrap();
            assert!(value.is_finite());
            let mut f = |v: &[f64]| log_posterior_unconstrained(v, &spec, &dataset).unwrap().0;
            let numeric = finite_difference_gradient(&mut f, &x, 1e-5);
            for (i, (a, n)) in grad.iter().zip(&numeric).enumerate() {
                let scale = a.abs().max(n.abs()).max(1.0);
                assert!(
                    (a - n).abs() / scale < 1e-5,
                    "{variant:?} point {point} coord {i}: analytic {a} vs numeric {n}"
                );
            }
        }
    }
}

#[test]
fn unconstrained_value_is_posterior_plus_jacobian() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let problem = random_problem(&mut rng, 4, 2, 3);
    let spec = spec_for(Variant::DawidSkene, problem.categories, problem.raters);
    let dataset = problem.dataset();
    let layout = Layout::new(Variant::DawidSkene, problem.categories, problem.raters);
    let x: Vec<f64> =
        (0..layout.unconstrained_dim()).map(|_| rng.random::<f64>() - 0.5).collect();
    let (value, _) = log_posterior_unconstrained(&x, &spec, &dataset).unwrap();
    let constrained = params::from_unconstrained(&layout, &x).unwrap();
    let expected =
        log_posterior(&constrained, &spec, &dataset).unwrap() + params::log_jacobian(&constrained);
    assert!((value - expected).abs() < 1e-10, "{value} vs {expected}");
}

#[test]
fn symmetric_problem_has_zero_prevalence_gradient_at_uniform() {
    // a dataset whose ratings are symmetric under label swap, a symmetric
    // prior, and the uniform point: the pi-block gradient must vanish
    let rows = [(1, 1, 1), (2, 1, 2)];
    let dataset =
        RatingDataset::from_long(LongRatings::from_labelled(&rows, None).unwrap());
    let spec = spec_for(Variant::DawidSkene, 2, 1);
    let layout = Layout::new(Variant::DawidSkene, 2, 1);
    let x = vec![0.0; layout.unconstrained_dim()];
    let (_, grad) = log_posterior_unconstrained(&x, &spec, &dataset).unwrap();
    assert!(grad[0].abs() < 1e-12, "pi gradient {}", grad[0]);
}

#[test]
fn permutation_of_category_labels_preserves_posterior() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..20 {
        let problem = random_problem(&mut rng, 4, 2, 3);
        let k = problem.categories;
        let params = random_ds_params(&mut rng, problem.raters, k);
        let alpha: Vec<f64> = (0..k).map(|_| rng.random::<f64>() * 4.0 + 0.5).collect();
        let spec = resolve_spec(
            Variant::DawidSkene,
            k,
            problem.raters,
            &PriorOverrides { alpha: Some(alpha.clone()), ..Default::default() },
        )
        .unwrap();
        let original = log_posterior(&params, &spec, &problem.dataset()).unwrap();

        // build a cyclic permutation of category labels
        let perm: Vec<usize> = (0..k).map(|c| (c + 1) % k).collect();
        let permuted_problem = SmallProblem {
            items: problem.items,
            raters: problem.raters,
            categories: k,
            ratings: problem
                .ratings
                .iter()
                .map(|list| list.iter().map(|&(j, y)| (j, perm[y])).collect())
                .collect(),
        };
        let (pi, theta) = match &params {
            Params::DawidSkene(p) => (p.pi.clone(), p.theta.clone()),
            _ => unreachable!(),
        };
        let mut pi_p = vec![0.0; k];
        let mut theta_p = ndarray::Array3::zeros(theta.dim());
        let mut alpha_p = vec![0.0; k];
        for c in 0..k {
            pi_p[perm[c]] = pi[c];
            alpha_p[perm[c]] = alpha[c];
            for j in 0..problem.raters {
                for b in 0..k {
                    theta_p[[j, perm[c], perm[b]]] = theta[[j, c, b]];
                }
            }
        }
        let params_p =
            Params::DawidSkene(ratings::params::DsParams { pi: pi_p, theta: theta_p });
        let spec_p = resolve_spec(
            Variant::DawidSkene,
            k,
            problem.raters,
            &PriorOverrides { alpha: Some(alpha_p), ..Default::default() },
        )
        .unwrap();
        let permuted =
            log_posterior(&params_p, &spec_p, &permuted_problem.dataset()).unwrap();
        assert!(
            (original - permuted).abs() < 1e-9,
            "posterior changed under relabelling: {original} vs {permuted}"
        );
    }
}

#[test]
fn lgamma_oracle_agrees_with_library_route() {
    for x in [0.1, 0.5, 1.0, 2.5, 4.8, 10.0, 100.5] {
        let expected = ln_gamma_oracle(x);
        let via_prior = {
            // extract the library's ln_gamma through a Dirichlet density:
            // lp(uniform; (x, x)) = lnG(2x) - 2 lnG(x) + (x-1) * 2 ln(1/2)
            let spec = resolve_spec(
                Variant::DawidSkene,
                2,
                1,
                &PriorOverrides {
                    alpha: Some(vec![x, x]),
                    beta_matrix: Some(Array2::from_elem((2, 2), 1.0)),
                    ..Default::default()
                },
            )
            .unwrap();
            let params = Params::DawidSkene(ratings::params::DsParams {
                pi: vec![0.5, 0.5],
                theta: ndarray::Array3::from_elem((1, 2, 2), 0.5),
            });
            let lp = log_prior(&params, &spec).unwrap();
            // remove the known pieces, leaving lnG(2x) - 2 lnG(x)
            lp - (x - 1.0) * 2.0 * 0.5f64.ln()
        };
        let oracle = ln_gamma_oracle(2.0 * x) - 2.0 * expected;
        assert!((via_prior - oracle).abs() < 1e-8, "x = {x}: {via_prior} vs {oracle}");
    }
}
