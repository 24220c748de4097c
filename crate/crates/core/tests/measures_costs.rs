use cvxlsi::costs::{c_theta, legendre, CostFunction};
use cvxlsi::measures::Side;
use cvxlsi::{Atoms, Measure1D, TransportMap};
use proptest::prelude::*;

fn atoms() -> impl Strategy<Value = Atoms> {
    prop::collection::vec((-10.0f64..10.0, 0.05f64..1.0), 1..12).prop_filter_map("distinct positions", |pairs| {
        let total: f64 = pairs.iter().map(|p| p.1).sum();
        Atoms::from_pairs(pairs.into_iter().map(|(x, w)| (x, w / total))).ok()
    })
}

fn closed_forms() -> Vec<Measure1D> {
    vec![
        Measure1D::standard_gaussian(),
        Measure1D::gaussian(1.5, 0.3).unwrap(),
        Measure1D::symmetric_exponential(),
        Measure1D::uniform(-2.0, 5.0).unwrap(),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quantile_is_a_generalized_inverse(a in atoms(), t in 0.001f64..0.999) {
        let mu = Measure1D::Atoms(a.clone());
        let q = mu.quantile(t).unwrap();
        prop_assert!(mu.cdf(q) >= t - 1e-12);
        for &x in a.positions() {
            prop_assert!(mu.quantile(mu.cdf(x)).unwrap() <= x);
        }
    }

    #[test]
    fn closed_form_quantiles_invert(t in 0.001f64..0.999) {
        for mu in closed_forms() {
            let q = mu.quantile(t).unwrap();
            prop_assert!((mu.cdf(q) - t).abs() < 1e-12, "{} at {t}", mu.describe());
        }
    }

    #[test]
    fn unit_tail_integral_is_the_survival_function(x in -4.0f64..4.0) {
        for mu in closed_forms() {
            let tail = mu.tail_integral(x, |_| 1.0, Side::Upper).unwrap();
            prop_assert!((tail - (1.0 - mu.cdf(x))).abs() < 1e-8, "{} at {x}", mu.describe());
        }
    }

    #[test]
    fn push_forward_identity(a in atoms(), s in -1.0f64..1.0) {
        // bounded continuous test function
        let f = |x: f64| (s * x).sin() + 1.0 / (1.0 + x * x);
        let mu = Measure1D::Atoms(a.clone());
        let map = TransportMap::new(&mu);
        let direct = a.expect(f);
        // ∫ f∘U dτ by composite Simpson between the jump points of U
        let tau = Measure1D::symmetric_exponential();
        let density = |x: f64| 0.5 * (-x.abs()).exp();
        let mut cuts = vec![-40.0];
        cuts.extend(a.cumulative()[..a.len() - 1].iter().map(|&c| tau.quantile(c).unwrap()));
        cuts.push(0.0);
        cuts.push(40.0);
        cuts.sort_by(f64::total_cmp);
        let mut via_tau = 0.0;
        for w in cuts.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            if hi - lo < 1e-12 {
                continue;
            }
            let n = 2000;
            let step = (hi - lo) / n as f64;
            // the open piece keeps U constant; evaluate it at the midpoint
            let u = f(map.eval(0.5 * (lo + hi)));
            let mut sum = 0.0;
            for k in 0..=n {
                let c = if k == 0 || k == n { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
                sum += c * density(lo + step * k as f64);
            }
            via_tau += u * sum * step / 3.0;
        }
        prop_assert!((direct - via_tau).abs() < 1e-9, "{direct} vs {via_tau}");
    }

    #[test]
    fn fenchel_young(x in -5.0f64..5.0, y in -3.0f64..3.0, p in 1.2f64..4.0) {
        for c in [CostFunction::quadratic_h(1.0), CostFunction::hp(p).unwrap(), CostFunction::quadratic_theta(1.0)] {
            let dual = c.conjugate();
            prop_assert!(c.eval(x) + dual.eval(y) >= x * y - 1e-9 * (1.0 + (x * y).abs()));
            // equality where the slopes match
            let ym = c.derivative(x);
            prop_assert!((c.eval(x) + dual.eval(ym) - x * ym).abs() <= 1e-9 * (1.0 + (x * ym).abs()));
        }
    }

    #[test]
    fn theta_inverse_round_trip(t in 0.0f64..20.0, d in 0.5f64..3.0) {
        for th in [CostFunction::quadratic_theta(1.0), CostFunction::hp(3.0).unwrap().conjugate(), CostFunction::power(1.5, 2.0).unwrap()] {
            prop_assert!((th.inverse(th.eval(t)).unwrap() - t).abs() < 1e-10, "{}", th.label());
        }
        let capped = CostFunction::theta_d(d).unwrap();
        let u = t.min(d);
        prop_assert!((capped.inverse(capped.eval(u)).unwrap() - u).abs() < 1e-10);
    }

    #[test]
    fn quadratic_zone_correspondence(p in 1.2f64..4.0, z in -1.0f64..1.0) {
        // H = x²/4 on [-2, 2] and H* = y² on [-1, 1]
        let h = CostFunction::hp(p).unwrap();
        prop_assert!((h.eval(2.0 * z) - z * z).abs() < 1e-12);
        prop_assert!((h.conjugate().eval(z) - z * z).abs() < 1e-9);
        let back = h.conjugate().conjugate();
        prop_assert!((back.eval(2.0 * z) - z * z).abs() < 1e-9);
    }
}

#[test]
fn discretized_moments_converge() {
    for mu in closed_forms() {
        let mean = mu.expect(|x| x).unwrap();
        let var = mu.expect(|x| (x - mean) * (x - mean)).unwrap();
        let errors: Vec<f64> = [100, 1000, 10_000]
            .iter()
            .map(|&n| {
                let a = mu.discretize(n).unwrap();
                (a.mean() - mean).abs() + (a.variance() - var).abs()
            })
            .collect();
        assert!(errors[1] < errors[0] && errors[2] < errors[1], "{}: {errors:?}", mu.describe());
    }
}

#[test]
fn numerical_conjugate_matches_closed_form() {
    let grid: Vec<f64> = (0..=4000).map(|k| -10.0 + 20.0 * k as f64 / 4000.0).collect();
    for c in [CostFunction::quadratic_h(1.0), CostFunction::hp(3.0).unwrap()] {
        let pair = legendre(&c, &grid).unwrap();
        assert!(pair.conjugation_error < 1e-4, "{}: {}", c.label(), pair.conjugation_error);
    }
}

#[test]
fn c_theta_is_monotone_in_theta() {
    let small = c_theta(&CostFunction::quadratic_theta(1.0)).unwrap().value;
    let large = c_theta(&CostFunction::power(2.0, 1.5).unwrap()).unwrap().value;
    let steeper = c_theta(&CostFunction::hp(1.5).unwrap().conjugate()).unwrap().value;
    assert!(small <= large);
    // H_1.5 grows slower than x²/4 beyond the quadratic zone, so its conjugate dominates t²
    assert!(small <= steeper);
}
