use cvxlsi::error::Error;
use cvxlsi::inequalities::{
    classical_ot_1d, convex_poincare_test, entropy, generate_tests, lsi_test, relative_entropy, TestFunctionFamily,
};
use cvxlsi::selftest::modulus_from_lsi;
use cvxlsi::transport::{criterion_check, CriterionOptions};
use cvxlsi::weak_ot::random_tilts;
use cvxlsi::{Atoms, CostFunction, Measure1D};
use proptest::prelude::*;

fn atoms() -> impl Strategy<Value = Atoms> {
    prop::collection::vec((-3.0f64..3.0, 0.05f64..1.0), 2..12).prop_filter_map("distinct positions", |pairs| {
        let total: f64 = pairs.iter().map(|p| p.1).sum();
        Atoms::from_pairs(pairs.into_iter().map(|(x, w)| (x, w / total))).ok()
    })
}

fn family(seed: u64, count: usize) -> TestFunctionFamily {
    TestFunctionFamily { seed, count, ..Default::default() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn entropy_is_nonnegative_and_homogeneous(a in atoms(), seed in 0u64..1000, lambda in 0.1f64..10.0) {
        let gauss = Measure1D::standard_gaussian();
        for mu in [Measure1D::Atoms(a), gauss] {
            for t in generate_tests(&family(seed, 10), &mu).unwrap() {
                let e = entropy(&mu, &|x| t.f.eval(x)).unwrap();
                prop_assert!(e >= -1e-12, "{} on {}: {e}", t.id, mu.describe());
                // Ent(λg) = λ Ent(g)
                let scaled = entropy(&mu, &|x| t.f.eval(x) + lambda.ln()).unwrap();
                prop_assert!((scaled - lambda * e).abs() <= 1e-7 * (lambda * e).abs() + 1e-12);
            }
        }
    }

    #[test]
    fn passing_lsi_bounds_the_modulus(a in atoms(), seed in 0u64..1000) {
        let mu = Measure1D::Atoms(a);
        let fam = generate_tests(&family(seed, 40), &mu).unwrap();
        let h = CostFunction::quadratic_h(1.0);
        let c = (0..16).map(|k| 0.25 * 2f64.powi(k)).find(|&c| lsi_test(&mu, &h, c, &fam).unwrap().passed());
        let c = c.expect("bounded support satisfies some convex LSI");
        prop_assert!(modulus_from_lsi(&mu, c).unwrap().passed());
    }
}

#[test]
fn talagrand_coherence_on_the_gaussian() {
    let g = Measure1D::standard_gaussian().discretize(2000).unwrap();
    let mu = Measure1D::Atoms(g.clone());
    let theta = CostFunction::quadratic_theta(1.0);
    // smallest C with T(μ, ν) ≤ C H(ν|μ) over the sampled ν
    let big_c = random_tilts(&g, 30, 2.0, 3)
        .unwrap()
        .iter()
        .map(|nu| classical_ot_1d(&mu, &Measure1D::Atoms(nu.clone()), &theta).unwrap() / relative_entropy(nu, &g))
        .fold(0.0, f64::max);
    assert!(big_c.is_finite() && big_c < 2.01, "{big_c}");
    let fam = generate_tests(&family(3, 100), &mu).unwrap();
    // T₂(C) gives Var f ≤ (C/2) ∫ f'², i.e. a = 1/√C
    assert!(convex_poincare_test(&mu, 1.0 / big_c.sqrt(), &fam).unwrap().passed());
    // and the Gaussian pairing C = 2 ↔ c = √2
    assert!(lsi_test(&mu, &CostFunction::quadratic_h(1.0), big_c.sqrt(), &fam).unwrap().passed());
}

#[test]
fn exponential_measure_separates_poincare_from_lsi() {
    let tau = Measure1D::symmetric_exponential();
    let theta = CostFunction::quadratic_theta(1.0);
    assert!(!criterion_check(&tau, &theta, 1.0, &CriterionOptions::default()).unwrap().passed());
    let fam = generate_tests(&family(5, 60), &tau).unwrap();
    // the Laplace law has Poincaré constant 4, so a ≤ 1/√8 passes
    assert!(convex_poincare_test(&tau, 0.35, &fam).unwrap().passed());
    // quadratic LSI fails at every c: small c breaks the inequality, large c
    // needs an exponential moment τ does not have
    let h = CostFunction::quadratic_h(1.0);
    for c in [0.05, 0.1, 0.2, 0.4, 0.49, 1.0, 4.0, 100.0] {
        match lsi_test(&tau, &h, c, &fam) {
            Ok(r) => assert!(!r.passed(), "c = {c}"),
            Err(e) => assert!(matches!(e, Error::Divergent(_)), "c = {c}: {e}"),
        }
    }
}
