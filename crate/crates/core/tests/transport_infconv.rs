use cvxlsi::transport::{criterion_check, default_h_grid, tail_decay_check, CriterionOptions};
use cvxlsi::{inf_convolution, Atoms, CostFunction, Engine, Extension, GridFunction, Measure1D, TransportMap};
use proptest::prelude::*;

fn atoms() -> impl Strategy<Value = Atoms> {
    prop::collection::vec((-5.0f64..5.0, 0.05f64..1.0), 2..10).prop_filter_map("distinct positions", |pairs| {
        let total: f64 = pairs.iter().map(|p| p.1).sum();
        Atoms::from_pairs(pairs.into_iter().map(|(x, w)| (x, w / total))).ok()
    })
}

/// Convex piecewise-linear function on a uniform grid of `[-4, 4]`.
fn convex(n: usize) -> impl Strategy<Value = GridFunction> {
    (prop::collection::vec(-2.0f64..2.0, n - 1), -1.0f64..1.0).prop_map(move |(mut slopes, v0)| {
        slopes.sort_by(f64::total_cmp);
        let nodes: Vec<f64> = (0..n).map(|k| -4.0 + 8.0 * k as f64 / (n - 1) as f64).collect();
        let mut values = vec![v0];
        for k in 0..n - 1 {
            values.push(values[k] + slopes[k] * (nodes[k + 1] - nodes[k]));
        }
        GridFunction::new(nodes, values, Extension::Infinite).unwrap()
    })
}

fn sq() -> CostFunction {
    CostFunction::quadratic_theta(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn modulus_is_monotone_and_subadditive(a in atoms(), h1 in 0.01f64..10.0, h2 in 0.01f64..10.0) {
        let map = TransportMap::new(&Measure1D::Atoms(a));
        let (d1, d2) = (map.delta(h1).unwrap().value, map.delta(h2).unwrap().value);
        let d12 = map.delta(h1 + h2).unwrap().value;
        prop_assert!(d12 >= d1.max(d2) - 1e-12);
        prop_assert!(d12 <= d1 + d2 + 1e-12);
    }

    #[test]
    fn modulus_matches_dense_sup(a in atoms(), h in 0.01f64..10.0) {
        let map = TransportMap::new(&Measure1D::Atoms(a.clone()));
        let tau = Measure1D::symmetric_exponential();
        // the sup is approached just after a jump of U at x or just before one at x + h
        let mut xs: Vec<f64> = (0..=20_000).map(|k| -30.0 + 60.0 * k as f64 / 20_000.0).collect();
        for &c in &a.cumulative()[..a.len() - 1] {
            let b = tau.quantile(c).unwrap();
            for e in [1e-9, -1e-9] {
                xs.push(b + e);
                xs.push(b - h + e);
            }
        }
        let sup = xs.iter().map(|&x| map.eval(x + h) - map.eval(x)).fold(f64::NEG_INFINITY, f64::max);
        let d = map.delta(h).unwrap().value;
        prop_assert!((d - sup).abs() <= 1e-12 * (1.0 + d.abs()), "step formula {d} vs dense {sup}");
    }

    #[test]
    fn scaling_covariance(a in atoms(), lambda in 0.2f64..5.0, h in 0.01f64..10.0) {
        let mu = Measure1D::Atoms(a);
        let scaled = mu.scaled(lambda).unwrap();
        let d = TransportMap::new(&mu).delta(h).unwrap().value;
        let ds = TransportMap::new(&scaled).delta(h).unwrap().value;
        prop_assert!((ds - lambda * d).abs() <= 1e-12 * (1.0 + ds.abs()));
        let opts = CriterionOptions::default();
        let b = criterion_check(&mu, &sq(), 1.0, &opts).unwrap().get("b_best").unwrap();
        let bs = criterion_check(&scaled, &sq(), 1.0, &opts).unwrap().get("b_best").unwrap();
        prop_assert!((bs - b / lambda).abs() <= 1e-9 * b / lambda);
    }

    #[test]
    fn criterion_implies_tail_decay_for_symmetric_measures(half in prop::collection::vec((0.1f64..5.0, 0.05f64..1.0), 1..6)) {
        let total: f64 = half.iter().map(|p| 2.0 * p.1).sum();
        let pairs = half.iter().flat_map(|&(x, w)| [(x, w / total), (-x, w / total)]);
        let mu = Measure1D::Atoms(Atoms::from_pairs(pairs).unwrap());
        let r = criterion_check(&mu, &sq(), 1.0, &CriterionOptions::default()).unwrap();
        prop_assert!(r.passed());
        let b = r.get("b_best").unwrap();
        prop_assert!(tail_decay_check(&mu, &sq(), 1.0, b, &default_h_grid()).unwrap().passed());
    }

    #[test]
    fn inf_convolution_invariants(f in convex(64), t in 0.1f64..3.0, s in 0.1f64..2.0, c in -1.0f64..1.0) {
        let out = f.nodes().to_vec();
        let q = inf_convolution(&f, &sq(), t, &out, Engine::Quadratic).unwrap();
        // contractivity
        for (qv, fv) in q.values().iter().zip(f.values()) {
            prop_assert!(*qv <= fv + 1e-12);
        }
        // monotone in t
        let later = inf_convolution(&f, &sq(), t + s, &out, Engine::Quadratic).unwrap();
        for (a, b) in later.values().iter().zip(q.values()) {
            prop_assert!(*a <= b + 1e-12);
        }
        // convexity is preserved on the exact piecewise-linear engine
        let exact = inf_convolution(&f, &sq(), t, &out, Engine::PiecewiseLinear).unwrap();
        prop_assert!(exact.is_convex());
        // engines agree on node-sampled input
        let slow = inf_convolution(&f, &sq(), t, &out, Engine::Exhaustive).unwrap();
        for (a, b) in slow.values().iter().zip(q.values()) {
            prop_assert!((a - b).abs() <= 1e-9);
        }
        // translation equivariance on shifted grids
        let shifted = GridFunction::new(f.nodes().iter().map(|x| x + c).collect(), f.values().to_vec(), Extension::Infinite).unwrap();
        let out_shifted: Vec<f64> = out.iter().map(|x| x + c).collect();
        let qs = inf_convolution(&shifted, &sq(), t, &out_shifted, Engine::Exhaustive).unwrap();
        for (a, b) in qs.values().iter().zip(slow.values()) {
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn constants_are_fixed(v in -5.0f64..5.0, t in 0.1f64..3.0) {
        let nodes: Vec<f64> = (0..41).map(|k| -2.0 + 0.1 * k as f64).collect();
        let f = GridFunction::from_fn(nodes.clone(), |_| v, Extension::Linear).unwrap();
        for engine in [Engine::Exhaustive, Engine::Quadratic, Engine::PiecewiseLinear] {
            let q = inf_convolution(&f, &sq(), t, &nodes, engine).unwrap();
            prop_assert!(q.values().iter().all(|&x| (x - v).abs() < 1e-12));
        }
    }

    #[test]
    fn linear_input_closed_form(slope in -2.0f64..2.0, t in 0.1f64..3.0, x in -1.0f64..1.0) {
        // a linear input is unbounded below under the linear extension and is rejected
        let g = GridFunction::new(vec![-50.0, 50.0], vec![-50.0 * slope, 50.0 * slope], Extension::Linear).unwrap();
        prop_assert!(inf_convolution(&g, &sq(), t, &[x], Engine::PiecewiseLinear).is_err() || slope == 0.0);
        // sx − ts²/4 once steep walls far away make it bounded below
        let h = GridFunction::new(vec![-100.0, -50.0, 50.0, 100.0], vec![-50.0 * slope + 200.0, -50.0 * slope, 50.0 * slope, 50.0 * slope + 200.0], Extension::Linear).unwrap();
        let q = inf_convolution(&h, &sq(), t, &[x], Engine::PiecewiseLinear).unwrap();
        prop_assert!((q.values()[0] - (slope * x - t * slope * slope / 4.0)).abs() < 1e-12);
    }
}

#[test]
fn gaussian_and_uniform_satisfy_tail_decay_at_their_criterion_constant() {
    for mu in [Measure1D::Atoms(Measure1D::standard_gaussian().discretize(2000).unwrap()), Measure1D::uniform(-1.0, 1.0).unwrap()] {
        let r = criterion_check(&mu, &sq(), 1.0, &CriterionOptions::default()).unwrap();
        assert!(r.passed(), "{r}");
        let b = r.get("b_best").unwrap();
        assert!(tail_decay_check(&mu, &sq(), 1.0, b, &default_h_grid()).unwrap().passed(), "{}", mu.describe());
    }
}
