//! Entropy functionals, convex test families, and the inequality checkers.
//!
//! Every checker sweeps a finite family of convex piecewise-linear test
//! functions. A pass over such a family is evidence, not a proof, that the
//! inequality holds for all convex Lipschitz functions; reports say so.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::costs::{c_theta, CostFunction};
use crate::error::{Error, Result};
use crate::infconv::{inf_convolution, Engine, Extension, GridFunction};
use crate::measures::{Atoms, Measure1D};
use crate::report::{Report, Table, Verdict};

/// Relative tolerance applied to both sides of every comparison.
pub const REL_TOL: f64 = 1e-7;
/// Absolute floor added to every comparison.
pub const ABS_TOL: f64 = 1e-12;

const FAMILY_CAVEAT: &str =
    "pass over a finite piecewise-linear convex family: necessary evidence, not a proof for every convex Lipschitz function";

/// Atom count used when a checker needs an atomic version of a continuous measure.
pub const DISCRETIZATION: usize = 2000;

fn le(a: f64, b: f64) -> bool {
    a <= b + REL_TOL * a.abs().max(b.abs()) + ABS_TOL
}

/// `Ent_μ(e^φ) = ∫ φ e^φ dμ − Z log Z` with `Z = ∫ e^φ dμ`.
pub fn entropy(mu: &Measure1D, phi: &dyn Fn(f64) -> f64) -> Result<f64> {
    if let Some(a) = mu.as_atoms() {
        let (ent, shift) = atom_entropy(&a, phi);
        return Ok(ent * shift.exp());
    }
    let z = mu.expect(|x| phi(x).exp())?;
    let m = mu.expect(|x| {
        let p = phi(x);
        if p == 0.0 {
            0.0
        } else {
            p * p.exp()
        }
    })?;
    let ent = m - z * z.ln();
    if ent.is_finite() {
        Ok(ent.max(0.0))
    } else {
        Err(Error::divergent("entropy integral is not finite"))
    }
}

/// Entropy of `e^φ` under atoms, returned as `(Ent · e^{−M}, M)` with
/// `M = max φ` to keep exponentials in range.
fn atom_entropy(a: &Atoms, phi: &dyn Fn(f64) -> f64) -> (f64, f64) {
    let vals: Vec<f64> = a.positions().iter().map(|&x| phi(x)).collect();
    let m = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let z: f64 = a.weights().iter().zip(&vals).map(|(w, v)| w * (v - m).exp()).sum();
    let log_z = m + z.ln();
    let ent: f64 = a.weights().iter().zip(&vals).map(|(w, v)| w * (v - m).exp() * (v - log_z)).sum();
    (ent.max(0.0), m)
}

/// Kullback–Leibler divergence `H(ν|μ)` between atom sets; `+∞` if `ν`
/// charges a point that `μ` does not.
pub fn relative_entropy(nu: &Atoms, mu: &Atoms) -> f64 {
    let mut total = 0.0;
    for (x, w) in nu.iter() {
        let i = mu.positions().partition_point(|&p| p < x);
        if i >= mu.len() || mu.positions()[i] != x {
            return f64::INFINITY;
        }
        total += w * (w / mu.weights()[i]).ln();
    }
    total.max(0.0)
}

/// Parameters of a seeded family of convex piecewise-linear test functions.
#[derive(Clone, Debug, PartialEq)]
pub struct TestFunctionFamily {
    pub seed: u64,
    pub count: usize,
    /// Lipschitz cap `L`.
    pub lipschitz: f64,
    pub max_breakpoints: usize,
    /// Include constants, linear functions, `|x − q|` and hinges.
    pub specials: bool,
}

impl Default for TestFunctionFamily {
    fn default() -> Self {
        TestFunctionFamily { seed: 0, count: 200, lipschitz: 1.0, max_breakpoints: 6, specials: true }
    }
}

/// A generated test function with a stable identifier.
#[derive(Clone, Debug)]
pub struct TestFunction {
    pub id: String,
    pub f: GridFunction,
}

/// Builds the convex function with the given sorted breakpoints and the
/// `k + 1` nondecreasing slopes around them, equal to 0 at the first breakpoint.
fn piecewise(breaks: &[f64], slopes: &[f64], pad: f64) -> GridFunction {
    let mut nodes = Vec::with_capacity(breaks.len() + 2);
    nodes.push(breaks[0] - pad);
    nodes.extend_from_slice(breaks);
    nodes.push(breaks[breaks.len() - 1] + pad);
    let mut values = vec![-slopes[0] * pad, 0.0];
    for k in 1..breaks.len() {
        let v = values[k] + slopes[k] * (breaks[k] - breaks[k - 1]);
        values.push(v);
    }
    let v = values[values.len() - 1] + slopes[slopes.len() - 1] * pad;
    values.push(v);
    GridFunction::new(nodes, values, Extension::Linear).expect("sorted nodes and finite values")
}

/// Generates the family for a measure: breakpoints fall inside the bulk of
/// `μ`, and any breakpoint landing on an atom is shifted by half the minimal
/// atom gap so derivatives are unambiguous `μ`-almost everywhere.
pub fn generate_tests(family: &TestFunctionFamily, mu: &Measure1D) -> Result<Vec<TestFunction>> {
    let l = family.lipschitz;
    if !(l > 0.0) {
        return Err(Error::invalid("test family needs a positive Lipschitz cap"));
    }
    let atoms = mu.as_atoms();
    let lo = mu.quantile(0.005)?;
    let hi = mu.quantile_upper(0.005);
    let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 1.0, lo + 1.0) };
    let pad = (hi - lo).max(1.0);
    let gap = atoms
        .as_ref()
        .map(|a| a.positions().windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min))
        .unwrap_or(f64::INFINITY);
    let off_atoms = |b: f64| -> f64 {
        match &atoms {
            Some(a) => {
                let tol = 1e-12 * (1.0 + b.abs());
                if a.positions().iter().any(|&p| (p - b).abs() <= tol) {
                    let shift = if gap.is_finite() { 0.5 * gap } else { 0.5 };
                    b + shift
                } else {
                    b
                }
            }
            None => b,
        }
    };
    let mut out = Vec::new();
    if family.specials {
        let zero = GridFunction::new(vec![lo, hi], vec![0.0, 0.0], Extension::Linear)?;
        out.push(TestFunction { id: "constant".into(), f: zero });
        for frac in [0.25, 1.0] {
            for sign in [1.0, -1.0] {
                let s = sign * frac * l;
                let f = GridFunction::new(vec![lo, hi], vec![s * lo, s * hi], Extension::Linear)?;
                out.push(TestFunction { id: format!("linear(slope={s})"), f });
            }
        }
        for level in [0.1, 0.25, 0.5, 0.75, 0.9] {
            let q = off_atoms(mu.quantile(level)?);
            out.push(TestFunction { id: format!("abs(q={q})"), f: piecewise(&[q], &[-l, l], pad) });
            for frac in [0.25, 0.5, 1.0] {
                let a = frac * l;
                out.push(TestFunction { id: format!("hinge_up(a={a},q={q})"), f: piecewise(&[q], &[0.0, a], pad) });
                out.push(TestFunction { id: format!("hinge_down(a={a},q={q})"), f: piecewise(&[q], &[-a, 0.0], pad) });
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(family.seed);
    for k in 0..family.count {
        let nb = rng.random_range(1..=family.max_breakpoints.max(1));
        let mut breaks: Vec<f64> = (0..nb).map(|_| off_atoms(rng.random_range(lo..=hi))).collect();
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let mut slopes: Vec<f64> = (0..=breaks.len()).map(|_| rng.random_range(-l..=l)).collect();
        slopes.sort_by(f64::total_cmp);
        out.push(TestFunction { id: format!("random#{k}"), f: piecewise(&breaks, &slopes, pad) });
    }
    Ok(out)
}

/// One row of an inequality sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub id: String,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub pass: bool,
}

/// Outcome of sweeping an inequality over a test family.
#[derive(Clone, Debug)]
pub struct InequalityReport {
    pub check: String,
    pub verdict: Verdict,
    /// Sides and ratio at the worst function.
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub worst: Option<String>,
    pub constants: Vec<(String, f64)>,
    pub rows: Vec<Row>,
    /// Functions skipped because the inequality is not defined for them.
    pub skipped: usize,
    pub notes: Vec<String>,
}

impl InequalityReport {
    fn from_rows(check: &str, rows: Vec<Row>, constants: Vec<(String, f64)>, skipped: usize) -> Self {
        let worst = rows
            .iter()
            .enumerate()
            .fold(None::<usize>, |best, (i, r)| match best {
                Some(b) if rows[b].ratio >= r.ratio => Some(b),
                _ => Some(i),
            });
        let all = rows.iter().all(|r| r.pass);
        let (lhs, rhs, ratio, id) = match worst {
            Some(i) => (rows[i].lhs, rows[i].rhs, rows[i].ratio, Some(rows[i].id.clone())),
            None => (0.0, 0.0, 0.0, None),
        };
        let failing = rows.iter().find(|r| !r.pass).map(|r| r.id.clone());
        InequalityReport {
            check: check.to_string(),
            verdict: Verdict::from_bool(all),
            lhs,
            rhs,
            ratio,
            worst: failing.or(id),
            constants,
            rows,
            skipped,
            notes: vec![FAMILY_CAVEAT.to_string()],
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict.is_pass()
    }

    /// Re-decides every row with relative tolerance `rel` in place of
    /// [`REL_TOL`].
    pub fn with_tolerance(mut self, rel: f64) -> Self {
        for r in self.rows.iter_mut() {
            r.pass = r.lhs <= r.rhs + rel * r.lhs.abs().max(r.rhs.abs()) + ABS_TOL;
        }
        self.verdict = Verdict::from_bool(self.rows.iter().all(|r| r.pass));
        if let Some(r) = self.rows.iter().find(|r| !r.pass) {
            self.worst = Some(r.id.clone());
        }
        self
    }

    pub fn to_report(&self) -> Report {
        let mut r = Report::new(&self.check, self.verdict.clone())
            .with_value("lhs", self.lhs)
            .with_value("rhs", self.rhs)
            .with_value("ratio", self.ratio)
            .with_value("functions", self.rows.len() as f64)
            .with_value("skipped", self.skipped as f64);
        for (k, v) in &self.constants {
            r.set(k, *v);
        }
        r.witness = self.worst.clone();
        r.notes = self.notes.clone();
        let mut t = Table::new("ratios", &["index", "lhs", "rhs", "ratio"]);
        for (i, row) in self.rows.iter().enumerate() {
            t.push(vec![i as f64, row.lhs, row.rhs, row.ratio]);
        }
        r.tables.push(t);
        r
    }
}

fn ratio(lhs: f64, rhs: f64) -> f64 {
    if rhs > 0.0 {
        lhs / rhs
    } else if lhs <= ABS_TOL {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Checks `Ent_μ(e^φ) ≤ ∫ H(c φ') e^φ dμ` over the family.
pub fn lsi_test(mu: &Measure1D, h: &CostFunction, c: f64, family: &[TestFunction]) -> Result<InequalityReport> {
    if !(c > 0.0) {
        return Err(Error::invalid("LSI constant must be positive"));
    }
    let l = family.iter().map(|t| t.f.lipschitz()).fold(0.0, f64::max);
    // measures with every exponential moment pass the guard without evaluating
    // e^{s|x|}, which would overflow for large s
    if l > 0.0 && !mu.has_all_exp_moments() {
        let s = l.max(2.0 * c * l);
        if mu.exp_moment(s)?.is_infinite() {
            return Err(Error::divergent(format!("exponential moment of order {s} is infinite")));
        }
    }
    let atoms = mu.as_atoms();
    let rows: Vec<Row> = family
        .par_iter()
        .map(|t| {
            let f = &t.f;
            let (lhs, rhs) = match &atoms {
                Some(a) => {
                    let (ent, m) = atom_entropy(a, &|x| f.eval(x));
                    let rhs: f64 = a.iter().map(|(x, w)| w * h.eval(c * f.derivative(x)) * (f.eval(x) - m).exp()).sum();
                    (ent, rhs)
                }
                None => {
                    let ent = entropy(mu, &|x| f.eval(x))?;
                    let rhs = mu.expect(|x| {
                        let g = h.eval(c * f.derivative(x));
                        if g == 0.0 {
                            0.0
                        } else {
                            g * f.eval(x).exp()
                        }
                    })?;
                    (ent, rhs)
                }
            };
            Ok(Row { id: t.id.clone(), lhs, rhs, ratio: ratio(lhs, rhs), pass: le(lhs, rhs) })
        })
        .collect::<Result<_>>()?;
    Ok(InequalityReport::from_rows("convex-lsi", rows, vec![("c".into(), c)], 0))
}

/// Checks `Var_μ(f) ≤ (2a²)⁻¹ ∫ |f'|² dμ` and reports `a_max`, the largest
/// `a` passing on this family.
pub fn convex_poincare_test(mu: &Measure1D, a: f64, family: &[TestFunction]) -> Result<InequalityReport> {
    if !(a > 0.0) {
        return Err(Error::invalid("Poincaré constant must be positive"));
    }
    let atoms = mu.as_atoms();
    let rows: Vec<Row> = family
        .par_iter()
        .map(|t| {
            let f = &t.f;
            let (var, energy) = match &atoms {
                Some(m) => {
                    let mean = m.expect(|x| f.eval(x));
                    let var = m.expect(|x| (f.eval(x) - mean).powi(2));
                    (var, m.expect(|x| f.derivative(x).powi(2)))
                }
                None => {
                    let mean = mu.expect(|x| f.eval(x))?;
                    let var = mu.expect(|x| (f.eval(x) - mean).powi(2))?;
                    (var, mu.expect(|x| f.derivative(x).powi(2))?)
                }
            };
            let rhs = energy / (2.0 * a * a);
            Ok(Row { id: t.id.clone(), lhs: var, rhs, ratio: ratio(var, rhs), pass: le(var, rhs) })
        })
        .collect::<Result<_>>()?;
    // a_max = min over functions with positive variance of sqrt(energy / (2 var))
    let a_max = rows
        .iter()
        .filter(|r| r.lhs > ABS_TOL)
        .map(|r| (r.rhs * 2.0 * a * a / (2.0 * r.lhs)).sqrt())
        .fold(f64::INFINITY, f64::min);
    let mut rep = InequalityReport::from_rows("convex-poincare", rows, vec![("a".into(), a), ("a_max".into(), a_max)], 0);
    if mu.as_atoms().is_none() {
        rep.notes.push("variance and energy computed by quadrature".into());
    }
    Ok(rep)
}

/// Which dual inequality to test.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DualMode {
    /// `∫ e^{Q_t f} dμ ≤ exp(∫ f dμ)`.
    Minus,
    /// `exp(∫ Q_t f dμ) · ∫ e^{−f} dμ ≤ 1`.
    Plus,
    /// `∫ e^{Q_t f} dμ · ∫ e^{−f} dμ ≤ 1`.
    TwoSided,
}

fn log_mean_exp(a: &Atoms, vals: &[f64]) -> f64 {
    let m = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = a.weights().iter().zip(vals).map(|(w, v)| w * (v - m).exp()).sum();
    m + s.ln()
}

/// Atomic version of `μ`: itself, or its quantile discretization.
fn atomic(mu: &Measure1D, notes: &mut Vec<String>) -> Result<Atoms> {
    match mu.as_atoms() {
        Some(a) => Ok(a.into_owned()),
        None => {
            notes.push(format!("continuous measure replaced by its {DISCRETIZATION}-atom quantile discretization"));
            mu.discretize(DISCRETIZATION)
        }
    }
}

/// Checks the dual infimum-convolution inequality in the given mode.
///
/// `Q_t f` is computed exactly for the piecewise-linear test functions.
/// Functions unbounded below are skipped when `θ` is finite everywhere
/// (their infimum convolution is `−∞`).
pub fn dual_ic_test(
    mu: &Measure1D,
    theta: &CostFunction,
    t: f64,
    mode: DualMode,
    family: &[TestFunction],
) -> Result<InequalityReport> {
    let mut notes = Vec::new();
    let a = atomic(mu, &mut notes)?;
    let xs = a.positions().to_vec();
    let bounded_cost = theta.finite_radius().is_finite();
    let usable: Vec<&TestFunction> = family.iter().filter(|f| bounded_cost || f.f.is_bounded_below()).collect();
    let skipped = family.len() - usable.len();
    let rows: Vec<Row> = usable
        .par_iter()
        .map(|tf| {
            let q = inf_convolution(&tf.f, theta, t, &xs, Engine::PiecewiseLinear)?;
            let fv: Vec<f64> = xs.iter().map(|&x| tf.f.eval(x)).collect();
            let neg: Vec<f64> = fv.iter().map(|v| -v).collect();
            let (lhs, rhs) = match mode {
                DualMode::Minus => (log_mean_exp(&a, q.values()), a.weights().iter().zip(&fv).map(|(w, v)| w * v).sum()),
                DualMode::Plus => {
                    let mean_q: f64 = a.weights().iter().zip(q.values()).map(|(w, v)| w * v).sum();
                    (mean_q + log_mean_exp(&a, &neg), 0.0)
                }
                DualMode::TwoSided => (log_mean_exp(&a, q.values()) + log_mean_exp(&a, &neg), 0.0),
            };
            // sides are logarithms; the ratio is the quotient of the original sides
            let ratio = (lhs - rhs).exp();
            Ok(Row { id: tf.id.clone(), lhs, rhs, ratio, pass: le(lhs, rhs) })
        })
        .collect::<Result<_>>()?;
    let name = match mode {
        DualMode::Minus => "dual-ic-minus",
        DualMode::Plus => "dual-ic-plus",
        DualMode::TwoSided => "dual-ic-two-sided",
    };
    let mut rep = InequalityReport::from_rows(name, rows, vec![("t".into(), t)], skipped);
    rep.notes.push("lhs and rhs are logarithms of the two sides".into());
    rep.notes.extend(notes);
    Ok(rep)
}

/// Bounded-support inequality with the cost `θ_D`.
///
/// Forward: when the support has diameter at most `D`, the two-sided dual
/// inequality is swept over the family. Adversarial: when the diameter
/// exceeds `D`, the functions `φ_a(x) = a [|x − x₀| − ε]₊` are tried with `a`
/// doubling until the product exceeds 1.
pub fn bounded_support_ic_test(mu: &Measure1D, d: f64, adversarial: bool, family: &[TestFunction]) -> Result<Report> {
    let theta = CostFunction::theta_d(d)?;
    let (_, s, t) = mu.median_support();
    let diam = t - s;
    if !adversarial {
        if !(diam <= d) {
            return Err(Error::DiameterExceeded { diameter: diam, bound: d });
        }
        let rep = dual_ic_test(mu, &theta, 1.0, DualMode::TwoSided, family)?;
        let mut r = rep.to_report();
        r.check = "bounded-support-forward".into();
        r.set("D", d);
        r.set("diameter", diam);
        return Ok(r);
    }
    if !(diam > d) {
        return Err(Error::invalid(format!("adversarial search needs diameter > D, got {diam} ≤ {d}")));
    }
    let mut notes = Vec::new();
    let a = atomic(mu, &mut notes)?;
    let xs = a.positions().to_vec();
    let eps = 1e-3 * (diam - d).min(d);
    let mut found: Option<(f64, f64, f64)> = None;
    let mut best = f64::NEG_INFINITY;
    'search: for x0 in [xs[0], xs[xs.len() - 1]] {
        let mut slope = 0.125;
        while slope <= 2f64.powi(40) {
            let lo = x0 - diam - 1.0;
            let hi = x0 + diam + 1.0;
            let f = GridFunction::new(
                vec![lo, x0 - eps, x0 + eps, hi],
                vec![slope * (x0 - eps - lo), 0.0, 0.0, slope * (hi - x0 - eps)],
                Extension::Linear,
            )?;
            let q = inf_convolution(&f, &theta, 1.0, &xs, Engine::PiecewiseLinear)?;
            let neg: Vec<f64> = xs.iter().map(|&x| -f.eval(x)).collect();
            let log_product = log_mean_exp(&a, q.values()) + log_mean_exp(&a, &neg);
            best = best.max(log_product);
            if log_product > 0.0 {
                found = Some((slope, x0, log_product));
                break 'search;
            }
            slope *= 2.0;
        }
    }
    let mut r = Report::new("bounded-support-adversarial", Verdict::from_bool(found.is_some()))
        .with_value("D", d)
        .with_value("diameter", diam)
        .with_value("epsilon", eps)
        .with_value("best_log_product", best);
    if let Some((slope, x0, lp)) = found {
        r.set("a", slope);
        r.set("x0", x0);
        r.witness = Some(format!("a = {slope}, x0 = {x0}: product = {}", lp.exp()));
    }
    r.notes = notes;
    Ok(r)
}

/// Which link of the constant chain to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChainDirection {
    /// Modulus constant `b` to LSI constant `c`.
    BToC,
    /// LSI constant `c` to the implied modulus bounds.
    CToDelta,
    /// LSI constant `c` to the transport constant `a`.
    CToA,
    /// Transport constant `a` to the modulus constant `b`.
    AToB,
}

/// `κ = min(1, t₀) / (210 θ⁻¹(2 + t₀²))`.
pub fn kappa(theta: &CostFunction, t0: f64) -> Result<f64> {
    Ok(t0.min(1.0) / (210.0 * theta.inverse(2.0 + t0 * t0)?))
}

/// `c = 1/(κ b)`.
pub fn b_to_c(b: f64, theta: &CostFunction, t0: f64) -> Result<f64> {
    if !(b > 0.0) {
        return Err(Error::invalid("b must be positive"));
    }
    Ok(1.0 / (kappa(theta, t0)? * b))
}

/// `16 c (2/3 + √(h/2))`.
pub fn delta_bound(c: f64, h: f64) -> f64 {
    16.0 * c * (2.0 / 3.0 + (0.5 * h).sqrt())
}

/// `8 c (2/3 + √(h/2) + 2 (2h/9)^{1/4})`.
pub fn delta_bound_sharp(c: f64, h: f64) -> f64 {
    8.0 * c * (2.0 / 3.0 + (0.5 * h).sqrt() + 2.0 * (2.0 * h / 9.0).powf(0.25))
}

/// `a = ((α − 1)/A)^{1/α} / c`.
pub fn c_to_a(c: f64, big_a: f64, alpha: f64) -> Result<f64> {
    if !(c > 0.0) || !(big_a >= 1.0) || !(alpha > 1.0 && alpha <= 2.0) {
        return Err(Error::invalid("c_to_a needs c > 0, A ≥ 1 and alpha in (1, 2]"));
    }
    Ok(((alpha - 1.0) / big_a).powf(1.0 / alpha) / c)
}

/// Both routes from `a` to `b`: `b = κ₁ a` with
/// `κ₁ = t₀ / (8 θ⁻¹(log 3 + t₀²))`, and the route through `C_θ`
/// (`None` when `C_θ` diverges).
pub fn a_to_b(a: f64, theta: &CostFunction, t0: f64) -> Result<(f64, Option<f64>)> {
    if !(a > 0.0) {
        return Err(Error::invalid("a must be positive"));
    }
    let kappa1 = t0 / (8.0 * theta.inverse(3f64.ln() + t0 * t0)?);
    let via_c = match c_theta(theta) {
        Ok(c) => {
            let inner = theta.inverse(0.5 * (2.0 * (0.5 * c.value).exp() - 1.0).ln())?;
            Some(a.min(1.0) / 16.0 / (1.0 + inner / (a * t0)))
        }
        Err(_) => None,
    };
    Ok((kappa1 * a, via_c))
}

/// Inputs of [`constant_chain`]; only the fields the direction needs are read.
#[derive(Clone, Debug)]
pub struct ChainInputs {
    pub b: Option<f64>,
    pub c: Option<f64>,
    pub a: Option<f64>,
    pub t0: f64,
    /// Transport-side cost `θ`.
    pub theta: CostFunction,
    /// Scaling constants `(A, α)` of the Hamiltonian side.
    pub scaling: Option<(f64, f64)>,
    pub h_grid: Vec<f64>,
}

/// Evaluates one link of the constant chain and reports every constant.
pub fn constant_chain(direction: ChainDirection, inputs: &ChainInputs) -> Result<Report> {
    let need = |v: Option<f64>, name: &str| v.ok_or_else(|| Error::invalid(format!("this direction needs --{name}")));
    let t0 = inputs.t0;
    let theta = &inputs.theta;
    let mut r = Report::new("constant-chain", Verdict::Pass).with_value("t0", t0);
    match direction {
        ChainDirection::BToC => {
            let b = need(inputs.b, "b")?;
            r.set("b", b);
            r.set("kappa", kappa(theta, t0)?);
            r.set("c", b_to_c(b, theta, t0)?);
        }
        ChainDirection::CToDelta => {
            let c = need(inputs.c, "c")?;
            r.set("c", c);
            r.set("delta_bound_at_0", delta_bound(c, 0.0));
            r.set("sharp_delta_bound_at_0", delta_bound_sharp(c, 0.0));
            let mut t = Table::new("delta-bounds", &["h", "bound", "sharp_bound"]);
            for &h in &inputs.h_grid {
                t.push(vec![h, delta_bound(c, h), delta_bound_sharp(c, h)]);
            }
            r.tables.push(t);
        }
        ChainDirection::CToA => {
            let c = need(inputs.c, "c")?;
            let (big_a, alpha) = inputs
                .scaling
                .ok_or_else(|| Error::invalid("this direction needs the scaling constants A and alpha"))?;
            r.set("c", c);
            r.set("A", big_a);
            r.set("alpha", alpha);
            r.set("a", c_to_a(c, big_a, alpha)?);
        }
        ChainDirection::AToB => {
            let a = need(inputs.a, "a")?;
            let (b1, b2) = a_to_b(a, theta, t0)?;
            r.set("a", a);
            r.set("b", b1);
            match b2 {
                Some(b2) => r.set("b_via_c_theta", b2),
                None => r.note("C_theta diverges for this cost, so the second route is unavailable"),
            }
        }
    }
    Ok(r)
}

/// `T_θ(μ, ν) = ∫₀¹ θ(|F_μ⁻¹(u) − F_ν⁻¹(u)|) du`, exact for atomic inputs.
pub fn classical_ot_1d(mu: &Measure1D, nu: &Measure1D, theta: &CostFunction) -> Result<f64> {
    if let (Some(a), Some(b)) = (mu.as_atoms(), nu.as_atoms()) {
        return Ok(quantile_coupling_cost(&a, &b, theta));
    }
    let g = |u: f64| {
        let x = if u > 0.5 { mu.quantile_upper(1.0 - u) } else { mu.quantile(u).unwrap_or(f64::NAN) };
        let y = if u > 0.5 { nu.quantile_upper(1.0 - u) } else { nu.quantile(u).unwrap_or(f64::NAN) };
        theta.eval((x - y).abs())
    };
    let v = crate::quad::integrate(g, 0.0, 1.0, 1e-14, 1e-10).value;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::divergent("transport cost is not finite"))
    }
}

/// Monotone coupling cost between two atom sets by merging their
/// cumulative partitions of `[0, 1]`.
pub fn quantile_coupling_cost(a: &Atoms, b: &Atoms, theta: &CostFunction) -> f64 {
    let (ca, cb) = (a.cumulative(), b.cumulative());
    let (mut i, mut j) = (0, 0);
    let mut prev = 0.0;
    let mut total = 0.0;
    while i < a.len() && j < b.len() {
        let next = ca[i].min(cb[j]);
        let mass = next - prev;
        if mass > 0.0 {
            total += mass * theta.eval((a.positions()[i] - b.positions()[j]).abs());
        }
        prev = next;
        if ca[i] <= next {
            i += 1;
        }
        if cb[j] <= next {
            j += 1;
        }
    }
    total
}
