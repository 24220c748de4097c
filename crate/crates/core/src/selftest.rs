//! End-to-end runs used by the `selftest` subcommand.

use crate::costs::{c_theta, CostFunction};
use crate::error::Result;
use crate::inequalities::{
    b_to_c, bounded_support_ic_test, c_to_a, convex_poincare_test, delta_bound, dual_ic_test, generate_tests, kappa,
    lsi_test, DualMode, TestFunctionFamily,
};
use crate::infconv::maurey_k;
use crate::measures::{two_point, Atoms, Measure1D};
use crate::report::{Report, Verdict};
use crate::transport::{criterion_check, default_h_grid, tail_cost_bound, CriterionOptions, TransportMap};
use crate::weak_ot::{random_tilts, weak_ot_solve, weak_transport_verify, SolverOptions, WeakDirection};

/// Constants produced by the Gaussian chain.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainConstants {
    pub b: f64,
    pub kappa: f64,
    pub c: f64,
    pub a: f64,
}

/// Atoms in the discretized Gaussian of the chain.
pub const CHAIN_ATOMS: usize = 10_000;
/// Atoms in the discretization used for weak transport.
pub const WEAK_ATOMS: usize = 32;

/// Runs the chain on the discretized standard Gaussian: modulus criterion,
/// then LSI with `c = 1/(κ b)`, the dual inequality, the convex Poincaré
/// inequality and the weak transport inequality with `a = 1/c`, plus the
/// modulus bound implied by the LSI.
pub fn gaussian_chain(seed: u64) -> Result<(ChainConstants, Vec<Report>)> {
    let g = Measure1D::standard_gaussian();
    let mu = Measure1D::Atoms(g.discretize(CHAIN_ATOMS)?);
    let t0 = 1.0;
    let theta = CostFunction::quadratic_theta(t0);
    let h = CostFunction::quadratic_h(t0);
    let mut reports = Vec::new();

    let crit = criterion_check(&mu, &theta, t0, &CriterionOptions::default())?;
    let b = crit.get("b_best").unwrap_or(0.0);
    let crit_pass = crit.passed();
    reports.push(crit);
    if !crit_pass {
        return Ok((ChainConstants { b, kappa: f64::NAN, c: f64::NAN, a: f64::NAN }, reports));
    }
    let k = kappa(&theta, t0)?;
    let c = b_to_c(b, &theta, t0)?;
    let a = c_to_a(c, 1.0, 2.0)?;
    let constants = ChainConstants { b, kappa: k, c, a };

    let fam = generate_tests(&TestFunctionFamily { seed, ..Default::default() }, &mu)?;
    reports.push(lsi_test(&mu, &h, c, &fam)?.to_report());
    reports.push(dual_ic_test(&mu, &theta.scaled(a), 1.0, DualMode::Minus, &fam)?.to_report());
    reports.push(convex_poincare_test(&mu, a, &fam)?.to_report());

    let small = g.discretize(WEAK_ATOMS)?;
    let samples = random_tilts(&small, 100, 3.0, seed)?;
    reports.push(weak_transport_verify(&small, WeakDirection::Minus, &theta, a, &samples)?);

    reports.push(modulus_from_lsi(&mu, c)?);
    Ok((constants, reports))
}

/// `Δ_μ(h) ≤ 16c(2/3 + √(h/2))` on the default grid.
pub fn modulus_from_lsi(mu: &Measure1D, c: f64) -> Result<Report> {
    let map = TransportMap::new(mu);
    let mut worst: f64 = map.delta_at_zero() / delta_bound(c, 0.0);
    for h in default_h_grid() {
        worst = worst.max(map.delta(h)?.value / delta_bound(c, h));
    }
    Ok(Report::new("modulus-from-lsi", Verdict::from_bool(worst <= 1.0)).with_value("c", c).with_value("worst_ratio", worst))
}

fn identity_transport() -> Result<Report> {
    let map = TransportMap::new(&Measure1D::symmetric_exponential());
    let mut err: f64 = 0.0;
    for h in default_h_grid() {
        err = err.max((map.delta(h)?.value - h).abs());
    }
    Ok(Report::new("identity-transport", Verdict::from_bool(err <= 1e-10)).with_value("max_error", err))
}

fn two_point_criterion() -> Result<Report> {
    let mu = two_point(0.0, 1.0, 0.5)?;
    let r = criterion_check(&mu, &CostFunction::quadratic_theta(1.0), 1.0, &CriterionOptions::default())?;
    let b = r.get("b_best").unwrap_or(f64::NAN);
    Ok(Report::new("two-point-criterion", Verdict::from_bool((b - 1.0).abs() <= 1e-6)).with_value("b_best", b))
}

fn c_theta_quadratic() -> Result<Report> {
    let l = std::f64::consts::LN_2;
    let want = 4.0 + 4.0 / l + 2.0 / (l * l);
    let got = c_theta(&CostFunction::quadratic_theta(1.0))?.value;
    let rel = (got - want).abs() / want;
    Ok(Report::new("c-theta-quadratic", Verdict::from_bool(rel <= 1e-6)).with_value("value", got).with_value("relative_error", rel))
}

fn weak_asymmetry() -> Result<Report> {
    let theta = CostFunction::quadratic_theta(1.0);
    let two = Atoms::new(vec![0.0, 1.0], vec![0.5, 0.5])?;
    let half = Atoms::dirac(0.5);
    let opts = SolverOptions::default();
    let forward = weak_ot_solve(&two, &half, &theta, &opts)?.value;
    let backward = weak_ot_solve(&half, &two, &theta, &opts)?.value;
    let ok = (forward - 0.25).abs() <= 1e-7 && backward.abs() <= 1e-7;
    Ok(Report::new("weak-asymmetry", Verdict::from_bool(ok)).with_value("forward", forward).with_value("backward", backward))
}

fn maurey() -> Result<Report> {
    let worst = (0..10_000)
        .map(|i| {
            let u = 5.0 * i as f64 / 9_999.0;
            maurey_k(u).exp() - (2.0 - (-u).exp())
        })
        .fold(f64::NEG_INFINITY, f64::max);
    let unif = Measure1D::uniform(0.0, 1.0)?;
    let fam = generate_tests(&TestFunctionFamily { count: 50, ..Default::default() }, &unif)?;
    let fwd = bounded_support_ic_test(&unif, 1.0, false, &fam)?;
    let adv = bounded_support_ic_test(&two_point(0.0, 2.0, 0.5)?, 1.0, true, &[])?;
    let ok = worst <= 1e-15 && fwd.passed() && adv.passed();
    let mut r = Report::new("maurey", Verdict::from_bool(ok)).with_value("worst_k_excess", worst);
    r.set("forward_pass", if fwd.passed() { 1.0 } else { 0.0 });
    r.set("adversarial_a", adv.get("a").unwrap_or(f64::NAN));
    Ok(r)
}

fn exponential_tail_cost() -> Result<Report> {
    let r = tail_cost_bound(&Measure1D::symmetric_exponential(), &CostFunction::quadratic_theta(1.0), 1.0)?;
    let w = r.get("worst_ratio").unwrap_or(f64::NAN);
    Ok(Report::new("exponential-tail-cost", Verdict::from_bool((w - 2.0).abs() <= 1e-6)).with_value("worst_ratio", w))
}

/// Runs the quick invariant suite and the Gaussian chain; the last report
/// summarizes all verdicts.
pub fn run(seed: u64) -> Result<Vec<Report>> {
    let mut reports =
        vec![identity_transport()?, two_point_criterion()?, c_theta_quadratic()?, weak_asymmetry()?, maurey()?, exponential_tail_cost()?];
    let (k, chain) = gaussian_chain(seed)?;
    reports.extend(chain);
    let failed = reports.iter().filter(|r| !r.passed()).count();
    let mut summary = Report::new("selftest", Verdict::from_bool(failed == 0))
        .with_value("checks", reports.len() as f64)
        .with_value("failed", failed as f64)
        .with_value("chain_b", k.b)
        .with_value("chain_kappa", k.kappa)
        .with_value("chain_c", k.c)
        .with_value("chain_a", k.a);
    for r in reports.iter().filter(|r| !r.passed()) {
        summary.note(format!("{}: {}", r.check, r.verdict));
    }
    reports.push(summary);
    Ok(reports)
}
