//! Acceptance criteria. Each criterion prints one line; the binary exits
//! non-zero when any of them fails.

use std::time::Instant;

use cvxlsi::concentration::{
    concentration_report, default_t_grid, fit_subgaussian, ExperimentConfig, Tails, ZooFunction,
};
use cvxlsi::costs::c_theta;
use cvxlsi::inequalities::{bounded_support_ic_test, generate_tests, lsi_test, quantile_coupling_cost, TestFunction, TestFunctionFamily};
use cvxlsi::infconv::{hopf_lax_residual, maurey_k, HopfLaxOptions};
use cvxlsi::measures::two_point;
use cvxlsi::transport::{criterion_check, default_h_grid, tail_cost_bound, CriterionOptions};
use cvxlsi::weak_ot::{brute_force, weak_ot_solve, SolverOptions};
use cvxlsi::{inf_convolution, Atoms, CostFunction, Engine, Extension, GridFunction, Measure1D, TransportMap};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn lin(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

fn ac1_identity_transport() -> Outcome {
    let map = TransportMap::new(&Measure1D::symmetric_exponential());
    let mut err: f64 = 0.0;
    for h in default_h_grid() {
        err = err.max((map.delta(h).map_err(|e| e.to_string())?.value - h).abs());
    }
    ensure(err <= 1e-10, format!("max |delta(h) - h| = {err:.3e} (tol 1e-10)"))
}

fn ac2_two_point_criterion() -> Outcome {
    let start = Instant::now();
    let mu = two_point(0.0, 1.0, 0.5).unwrap();
    let r = criterion_check(&mu, &CostFunction::quadratic_theta(1.0), 1.0, &CriterionOptions::default()).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let b = r.get("b_best").unwrap();
    ensure(
        r.passed() && (b - 1.0).abs() <= 1e-6 && secs < 1.0,
        format!("b_best = {b:.9} (1 ± 1e-6), {secs:.3} s (< 1 s)"),
    )
}

fn ac3_exponential_failure() -> Outcome {
    let r = criterion_check(&Measure1D::symmetric_exponential(), &CostFunction::quadratic_theta(1.0), 1.0, &CriterionOptions::default())
        .unwrap();
    let table = r.table("modulus").unwrap();
    let row = table.rows.iter().find(|row| (row[0] - 50.0).abs() < 1e-9).ok_or("no h = 50 row")?;
    let want = 51f64.sqrt() / 50.0;
    ensure(
        !r.passed() && row[2] < 0.15 && (row[2] - want).abs() < 1e-9,
        format!("verdict {}, ratio at h=50 = {:.9} (< 0.15, closed form {want:.9})", r.verdict, row[2]),
    )
}

fn random_convex(rng: &mut ChaCha8Rng, n: usize) -> GridFunction {
    let nodes = lin(-5.0, 5.0, n);
    let mut slopes: Vec<f64> = (0..n - 1).map(|_| rng.random_range(-3.0..3.0)).collect();
    slopes.sort_by(f64::total_cmp);
    let mut values = vec![rng.random_range(-1.0..1.0)];
    for k in 0..n - 1 {
        values.push(values[k] + slopes[k] * (nodes[k + 1] - nodes[k]));
    }
    GridFunction::new(nodes, values, Extension::Infinite).unwrap()
}

fn ac4_moreau_engines() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let theta = CostFunction::quadratic_theta(1.0);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let f = random_convex(&mut rng, 512);
        let t = rng.random_range(0.2..3.0);
        let out = f.nodes().to_vec();
        let a = inf_convolution(&f, &theta, t, &out, Engine::Exhaustive).unwrap();
        let b = inf_convolution(&f, &theta, t, &out, Engine::Quadratic).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            worst = worst.max((x - y).abs());
        }
    }
    let f = random_convex(&mut rng, 8192);
    let out = f.nodes().to_vec();
    let time = |engine: Engine| {
        (0..3)
            .map(|_| {
                let s = Instant::now();
                inf_convolution(&f, &theta, 1.0, &out, engine).unwrap();
                s.elapsed().as_secs_f64()
            })
            .fold(f64::INFINITY, f64::min)
    };
    let (slow, fast) = (time(Engine::Exhaustive), time(Engine::Quadratic));
    let speedup = slow / fast;
    ensure(
        worst <= 1e-9 && speedup >= 20.0,
        format!("max engine gap {worst:.3e} (tol 1e-9), speedup {speedup:.0}x at n=8192 (>= 20x)"),
    )
}

fn ac5_hopf_lax() -> Outcome {
    // x² on a grid fine enough that node sampling stays below the tolerance
    let f = GridFunction::from_fn(lin(-4.0, 4.0, 400_001), |x| x * x, Extension::Infinite).unwrap();
    let h = CostFunction::quadratic_h(1.0);
    let opts = HopfLaxOptions { dt: 1e-3, dx: 1e-3, engine: Engine::Quadratic, exclude_kinks: None };
    let res = hopf_lax_residual(&f, &h, &[0.5, 1.0, 2.0], &lin(-1.0, 1.0, 201), &opts).unwrap();

    // refinement of a random convex piecewise-linear input: input spacing and
    // difference steps halve together
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut breaks: Vec<f64> = (0..4).map(|_| rng.random_range(-1.5..1.5)).collect();
    breaks.sort_by(f64::total_cmp);
    let mut slopes: Vec<f64> = (0..5).map(|_| rng.random_range(-2.0..2.0)).collect();
    slopes.sort_by(f64::total_cmp);
    let g = |x: f64| {
        let mut v = slopes[0] * (x - breaks[0]);
        for k in 0..breaks.len() {
            v += (slopes[k + 1] - slopes[k]) * (x - breaks[k]).max(0.0);
        }
        v
    };
    let xs = lin(-1.0, 1.0, 41);
    let mut maxes = Vec::new();
    for level in 0..3 {
        let step = 0.01 / 2f64.powi(level);
        let n = (12.0 / step).round() as usize + 1;
        let f = GridFunction::from_fn(lin(-6.0, 6.0, n), g, Extension::Infinite).unwrap();
        let opts = HopfLaxOptions { dt: step, dx: step, engine: Engine::Quadratic, exclude_kinks: Some(0.05) };
        maxes.push(hopf_lax_residual(&f, &h, &[0.7, 1.3], &xs, &opts).unwrap().max_abs);
    }
    // at least first order: every halving cuts the residual by 1.5 or more
    let ratios: Vec<f64> = maxes.windows(2).map(|w| w[0] / w[1]).collect();
    let first_order = ratios.iter().all(|&r| r >= 1.5);
    ensure(
        res.max_abs <= 1e-6 && first_order,
        format!("x² residual {:.3e} (tol 1e-6); refinement residuals {:?}, halving ratios {:?}", res.max_abs, maxes, ratios),
    )
}

fn random_atoms(rng: &mut ChaCha8Rng, n: usize) -> Atoms {
    let mut pos: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
    pos.sort_by(f64::total_cmp);
    let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = w.iter().sum();
    Atoms::new(pos, w.iter().map(|v| v / total).collect()).unwrap()
}

/// The weak transport instances shared by the asymmetry and Jensen criteria.
fn weak_corpus() -> Vec<(Atoms, Atoms)> {
    let two = Atoms::new(vec![0.0, 1.0], vec![0.5, 0.5]).unwrap();
    let half = Atoms::dirac(0.5);
    let mut corpus = vec![(two.clone(), half.clone()), (half, two)];
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..50 {
        let (n, m) = (rng.random_range(1..=3), rng.random_range(1..=3));
        corpus.push((random_atoms(&mut rng, n), random_atoms(&mut rng, m)));
    }
    corpus
}

fn ac6_weak_asymmetry() -> Outcome {
    let theta = CostFunction::quadratic_theta(1.0);
    let opts = SolverOptions::default();
    let corpus = weak_corpus();
    let forward = weak_ot_solve(&corpus[0].0, &corpus[0].1, &theta, &opts).unwrap().value;
    let backward = weak_ot_solve(&corpus[1].0, &corpus[1].1, &theta, &opts).unwrap().value;
    let mut worst: f64 = 0.0;
    for (s, t) in &corpus[2..] {
        let a = weak_ot_solve(s, t, &theta, &opts).unwrap().value;
        let b = brute_force(s, t, &theta).unwrap().value;
        worst = worst.max((a - b).abs());
    }
    ensure(
        (forward - 0.25).abs() <= 1e-7 && backward.abs() <= 1e-7 && worst <= 1e-5,
        format!("forward {forward:.9}, backward {backward:.3e}, max |solver - brute force| {worst:.3e} over 50 (tol 1e-5)"),
    )
}

fn ac7_jensen() -> Outcome {
    let theta = CostFunction::quadratic_theta(1.0);
    let opts = SolverOptions::default();
    let mut worst = f64::NEG_INFINITY;
    let corpus = weak_corpus();
    for (s, t) in &corpus {
        let weak = weak_ot_solve(s, t, &theta, &opts).unwrap().value;
        worst = worst.max(weak - quantile_coupling_cost(s, t, &theta));
    }
    ensure(worst <= 1e-7, format!("max weak - classical = {worst:.3e} over {} instances (<= 1e-7)", corpus.len()))
}

fn ac8_c_theta() -> Outcome {
    let l = std::f64::consts::LN_2;
    let want = 4.0 + 4.0 / l + 2.0 / (l * l);
    let got = c_theta(&CostFunction::quadratic_theta(1.0)).unwrap().value;
    let rel = (got - want).abs() / want;
    ensure(rel <= 1e-6, format!("C_theta = {got:.10}, closed form {want:.10}, relative error {rel:.2e} (tol 1e-6)"))
}

fn ac9_gaussian_chain() -> Outcome {
    let start = Instant::now();
    let reports = cvxlsi::selftest::run(0).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let failed: Vec<&str> = reports.iter().filter(|r| !r.passed()).map(|r| r.check.as_str()).collect();
    ensure(
        failed.is_empty() && secs < 60.0,
        format!("{} checks, failed {failed:?}, {secs:.1} s (< 60 s)", reports.len()),
    )
}

fn ac10_sharp_lsi() -> Outcome {
    let g = Measure1D::standard_gaussian();
    let h = CostFunction::quadratic_h(1.0);
    let fam: Vec<TestFunction> = [0.25, 0.5, 1.0, -1.0]
        .iter()
        .map(|&s| TestFunction {
            id: format!("linear{s}"),
            f: GridFunction::new(vec![-1.0, 1.0], vec![-s, s], Extension::Linear).unwrap(),
        })
        .collect();
    let sqrt2 = std::f64::consts::SQRT_2;
    let above = lsi_test(&g, &h, sqrt2 * (1.0 + 1e-3), &fam).unwrap();
    let edge = lsi_test(&g, &h, sqrt2, &fam).unwrap();
    ensure(
        above.passed() && edge.ratio > 1.0 - 1e-3,
        format!("pass at sqrt2(1+1e-3): {}, ratio at sqrt2 = {:.9} (> 1 - 1e-3)", above.passed(), edge.ratio),
    )
}

fn ac11_maurey() -> Outcome {
    let worst = lin(0.0, 5.0, 10_000).into_iter().map(|u| maurey_k(u).exp() - (2.0 - (-u).exp())).fold(f64::NEG_INFINITY, f64::max);
    let unif = Measure1D::uniform(0.0, 1.0).unwrap();
    let fam = generate_tests(&TestFunctionFamily::default(), &unif).unwrap();
    let forward = bounded_support_ic_test(&unif, 1.0, false, &fam).unwrap();
    let adversarial = bounded_support_ic_test(&two_point(0.0, 2.0, 0.5).unwrap(), 1.0, true, &[]).unwrap();
    ensure(
        worst <= 0.0 && forward.passed() && adversarial.passed(),
        format!(
            "max e^k - (2 - e^-u) = {worst:.3e}, forward {}, adversarial break {}",
            forward.verdict, adversarial.verdict
        ),
    )
}

fn ac12_tail_cost() -> Outcome {
    let r = tail_cost_bound(&Measure1D::symmetric_exponential(), &CostFunction::quadratic_theta(1.0), 1.0).unwrap();
    let w = r.get("worst_ratio").unwrap();
    ensure((w - 2.0).abs() <= 1e-6, format!("worst ratio {w:.9} (2 ± 1e-6)"))
}

fn ac13_concentration() -> Outcome {
    let mut a = Vec::new();
    for n in [4, 64] {
        let cfg = ExperimentConfig::new(Measure1D::standard_gaussian(), n, 100_000, vec![ZooFunction::Norm], default_t_grid(), 13)
            .unwrap();
        let r = concentration_report(&cfg).unwrap();
        a.push(r.get("norm.A").ok_or("no norm.A")?);
    }
    let spread = a[0].max(a[1]) / a[0].min(a[1]);

    // symmetric X with P(|X| ≥ t) = e^{-t²/A} exactly: |X| = √(A E), E ~ Exp(1)
    let want = 3.0;
    let m = 100_000;
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let xs: Vec<f64> = (0..m)
        .map(|_| {
            let e: f64 = -(1.0 - rng.random::<f64>()).ln();
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            sign * (want * e).sqrt()
        })
        .collect();
    let t = default_t_grid();
    let mf = m as f64;
    let lower: Vec<f64> = t.iter().map(|&t| xs.iter().filter(|&&x| x <= -t).count() as f64 / mf).collect();
    let upper: Vec<f64> = t.iter().map(|&t| xs.iter().filter(|&&x| x >= t).count() as f64 / mf).collect();
    let two_sided: Vec<f64> = lower.iter().zip(&upper).map(|(l, u)| l + u).collect();
    let half_width = two_sided.iter().map(|p| 3.0 * (p * (1.0 - p) / mf).sqrt()).collect();
    let tails = Tails { function: "synthetic".into(), samples: m, median: 0.0, t, lower, upper, two_sided, half_width };
    let fit = fit_subgaussian(&tails);
    let rel = (fit.a - want).abs() / want;
    ensure(
        spread <= 2.0 && rel <= 0.2,
        format!("A(N=4) = {:.3}, A(N=64) = {:.3}, spread {spread:.3} (<= 2); synthetic A = {:.3} vs {want}, error {:.1}% (<= 20%)", a[0], a[1], fit.a, 100.0 * rel),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 13] = [
        ("AC1 identity transport", ac1_identity_transport),
        ("AC2 two-point criterion", ac2_two_point_criterion),
        ("AC3 exponential failure", ac3_exponential_failure),
        ("AC4 moreau engines", ac4_moreau_engines),
        ("AC5 hopf-lax residual", ac5_hopf_lax),
        ("AC6 weak transport asymmetry", ac6_weak_asymmetry),
        ("AC7 jensen domination", ac7_jensen),
        ("AC8 C_theta quadrature", ac8_c_theta),
        ("AC9 gaussian chain", ac9_gaussian_chain),
        ("AC10 sharp lsi edge", ac10_sharp_lsi),
        ("AC11 maurey", ac11_maurey),
        ("AC12 tail cost sharpness", ac12_tail_cost),
        ("AC13 concentration", ac13_concentration),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 13 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
