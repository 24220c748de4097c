use cvxlsi::concentration::{default_t_grid, fit_subgaussian, simulate_tails, ExperimentConfig, ZooFunction};
use cvxlsi::inequalities::quantile_coupling_cost;
use cvxlsi::weak_ot::{weak_cost_eval, weak_ot_solve, Coupling, SolverOptions};
use cvxlsi::{Atoms, CostFunction, Measure1D};
use proptest::prelude::*;

fn atoms(max: usize) -> impl Strategy<Value = Atoms> {
    prop::collection::vec((-3.0f64..3.0, 0.05f64..1.0), 1..=max).prop_filter_map("distinct positions", |pairs| {
        let total: f64 = pairs.iter().map(|p| p.1).sum();
        Atoms::from_pairs(pairs.into_iter().map(|(x, w)| (x, w / total))).ok()
    })
}

/// North-west corner kernel after permuting rows and columns.
fn corner_kernel(source: &Atoms, target: &Atoms, rows: &[usize], cols: &[usize]) -> Vec<f64> {
    let (mu, nu) = (source.weights(), target.weights());
    let m = target.len();
    let mut kernel = vec![0.0; source.len() * m];
    let mut left: Vec<f64> = nu.to_vec();
    for &i in rows {
        let mut need = mu[i];
        for &j in cols {
            let t = need.min(left[j]);
            kernel[i * m + j] += t / mu[i];
            need -= t;
            left[j] -= t;
        }
        // rounding leftovers go to the last column with room
        if need > 0.0 {
            kernel[i * m + cols[cols.len() - 1]] += need / mu[i];
        }
    }
    kernel
}

fn permutation(n: usize, key: u64) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.sort_by_key(|&i| (key.wrapping_mul(6364136223846793005).wrapping_add(i as u64 * 1442695040888963407)) >> 17);
    p
}

fn sq() -> CostFunction {
    CostFunction::quadratic_theta(1.0)
}

/// Independent 2×2 oracle: one free kernel entry, scanned densely and then
/// refined by golden section over its feasible interval.
fn two_by_two(source: &Atoms, target: &Atoms) -> f64 {
    let (mu, nu) = (source.weights(), target.weights());
    let (x, y) = (source.positions(), target.positions());
    // p = P(row 0 → column 0); row 1 takes the rest of column 0
    let lo = ((nu[0] - mu[1]) / mu[0]).max(0.0);
    let hi = (nu[0] / mu[0]).min(1.0);
    let value = |p: f64| {
        let q = (nu[0] - mu[0] * p) / mu[1];
        let b0 = p * y[0] + (1.0 - p) * y[1];
        let b1 = q * y[0] + (1.0 - q) * y[1];
        mu[0] * (x[0] - b0).powi(2) + mu[1] * (x[1] - b1).powi(2)
    };
    let (mut a, mut b) = (lo, hi);
    for _ in 0..200 {
        let (c, d) = (a + (b - a) / 3.0, b - (b - a) / 3.0);
        if value(c) <= value(d) {
            b = d;
        } else {
            a = c;
        }
    }
    value(0.5 * (a + b)).min(value(lo)).min(value(hi))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn objective_is_convex_in_the_kernel(s in atoms(5), t in atoms(5), k1 in any::<u64>(), k2 in any::<u64>(), lambda in 0.0f64..1.0) {
        let p = corner_kernel(&s, &t, &permutation(s.len(), k1), &permutation(t.len(), k1 ^ 7));
        let q = corner_kernel(&s, &t, &permutation(s.len(), k2), &permutation(t.len(), k2 ^ 7));
        let mix: Vec<f64> = p.iter().zip(&q).map(|(a, b)| lambda * a + (1.0 - lambda) * b).collect();
        let eval = |k: Vec<f64>| weak_cost_eval(&Coupling::new(s.clone(), t.clone(), k).unwrap(), &sq());
        let (vp, vq, vm) = (eval(p), eval(q), eval(mix));
        prop_assert!(vm <= lambda * vp + (1.0 - lambda) * vq + 1e-12);
    }

    #[test]
    fn monotone_in_theta_and_dominated_by_classical_cost(s in atoms(8), t in atoms(8)) {
        let opts = SolverOptions::default();
        let small = weak_ot_solve(&s, &t, &sq(), &opts).unwrap().value;
        let large = weak_ot_solve(&s, &t, &CostFunction::power(2.0, 2.0).unwrap(), &opts).unwrap().value;
        prop_assert!(small <= large + 1e-6 * (1.0 + large));
        prop_assert!(small <= quantile_coupling_cost(&s, &t, &sq()) + 1e-7);
    }

    #[test]
    fn mean_preserving_spreads_cost_nothing(s in atoms(6), spread in prop::collection::vec(0.01f64..1.0, 6)) {
        let pairs = s.iter().zip(&spread).flat_map(|((x, w), d)| [(x - d, w / 2.0), (x + d, w / 2.0)]);
        let nu = Atoms::from_pairs(pairs).unwrap();
        let r = weak_ot_solve(&s, &nu, &sq(), &SolverOptions::default()).unwrap();
        prop_assert!(r.value <= 1e-7, "{}", r.value);
    }

    #[test]
    fn matches_the_two_by_two_oracle(s in atoms(2), t in atoms(2)) {
        prop_assume!(s.len() == 2 && t.len() == 2);
        let v = weak_ot_solve(&s, &t, &sq(), &SolverOptions::default()).unwrap().value;
        let want = two_by_two(&s, &t);
        prop_assert!((v - want).abs() <= 1e-7 * (1.0 + want), "{v} vs {want}");
    }
}

fn config(seed: u64) -> ExperimentConfig {
    let zoo = vec![ZooFunction::Norm, ZooFunction::Coordinate, ZooFunction::random_max_affine(3, 4, seed)];
    ExperimentConfig::new(Measure1D::standard_gaussian(), 3, 20_000, zoo, default_t_grid(), seed).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn tails_are_deterministic_monotone_and_two_sided(seed in any::<u64>()) {
        let a = simulate_tails(&config(seed)).unwrap();
        let b = simulate_tails(&config(seed)).unwrap();
        prop_assert_eq!(&a, &b);
        for tails in &a {
            for k in 0..tails.t.len() {
                prop_assert_eq!(tails.two_sided[k], tails.lower[k] + tails.upper[k]);
                if k > 0 {
                    prop_assert!(tails.lower[k] <= tails.lower[k - 1]);
                    prop_assert!(tails.upper[k] <= tails.upper[k - 1]);
                }
            }
            let fit = fit_subgaussian(tails);
            if fit.envelope_pass {
                for (k, &t) in tails.t.iter().enumerate() {
                    let bound = fit.b * (-t * t / fit.a).exp() * (1.0 + 1e-12) + tails.half_width[k];
                    prop_assert!(tails.lower[k] <= bound && tails.upper[k] <= bound);
                }
            }
        }
    }
}
