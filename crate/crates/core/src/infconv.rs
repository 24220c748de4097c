//! Infimum convolutions `Q_t f(x) = inf_y {f(y) + t θ(|x − y|/t)}` on grids.
//!
//! Three engines are available:
//!
//! * [`Engine::Exhaustive`] minimizes over the input nodes, `O(nm)`;
//! * [`Engine::Quadratic`] is the lower envelope of parabolas for
//!   `θ(u) = c u²`, linear time in `n + m`;
//! * [`Engine::PiecewiseLinear`] treats the input as the piecewise-linear
//!   interpolant and minimizes exactly over every segment, `O(nm)`.
//!
//! The first two sample the infimum at input nodes, so their output is an
//! upper bound of the exact value for the interpolant.

use rayon::prelude::*;

use crate::costs::CostFunction;
use crate::error::{Error, Result};
use crate::measures::Measure1D;
use crate::report::{Report, Table, Verdict};

/// How a grid function continues beyond its outermost nodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Extension {
    /// Linear extrapolation with the outermost chord slopes.
    Linear,
    /// `+∞` outside the node hull.
    Infinite,
}

/// A real function given by values at sorted nodes, interpolated linearly.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    nodes: Vec<f64>,
    values: Vec<f64>,
    convex: bool,
    lipschitz: f64,
    pub extension: Extension,
}

fn chord_slopes(nodes: &[f64], values: &[f64]) -> Vec<f64> {
    nodes
        .windows(2)
        .zip(values.windows(2))
        .map(|(x, v)| (v[1] - v[0]) / (x[1] - x[0]))
        .collect()
}

impl GridFunction {
    pub fn new(nodes: Vec<f64>, values: Vec<f64>, extension: Extension) -> Result<Self> {
        if nodes.is_empty() || nodes.len() != values.len() {
            return Err(Error::invalid("grid function needs matching, non-empty nodes and values"));
        }
        if nodes.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::invalid("grid function nodes and values must be finite"));
        }
        if nodes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("grid function nodes must be strictly increasing"));
        }
        if extension == Extension::Linear && nodes.len() < 2 {
            return Err(Error::invalid("linear extension needs at least two nodes"));
        }
        let slopes = chord_slopes(&nodes, &values);
        let convex = slopes.windows(2).all(|w| w[1] >= w[0] - 1e-10 * w[0].abs().max(w[1].abs()).max(1.0));
        let lipschitz = slopes.iter().fold(0.0f64, |m, s| m.max(s.abs()));
        Ok(GridFunction { nodes, values, convex, lipschitz, extension })
    }

    /// Samples `f` at the nodes.
    pub fn from_fn(nodes: Vec<f64>, f: impl Fn(f64) -> f64, extension: Extension) -> Result<Self> {
        let values = nodes.iter().map(|&x| f(x)).collect();
        Self::new(nodes, values, extension)
    }

    /// Declares a Lipschitz bound, which must dominate every chord slope.
    pub fn with_lipschitz(mut self, l: f64) -> Result<Self> {
        if l < self.lipschitz * (1.0 - 1e-12) {
            return Err(Error::invalid(format!("declared Lipschitz bound {l} is below the chord slope {}", self.lipschitz)));
        }
        self.lipschitz = l;
        Ok(self)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_convex(&self) -> bool {
        self.convex
    }

    /// Largest absolute chord slope, or the declared bound if larger.
    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn slopes(&self) -> Vec<f64> {
        chord_slopes(&self.nodes, &self.values)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn edge_slopes(&self) -> (f64, f64) {
        let n = self.nodes.len();
        if n < 2 {
            return (0.0, 0.0);
        }
        let first = (self.values[1] - self.values[0]) / (self.nodes[1] - self.nodes[0]);
        let last = (self.values[n - 1] - self.values[n - 2]) / (self.nodes[n - 1] - self.nodes[n - 2]);
        (first, last)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.nodes.len();
        let (lo, hi) = (self.nodes[0], self.nodes[n - 1]);
        if x < lo || x > hi {
            return match self.extension {
                Extension::Infinite => f64::INFINITY,
                Extension::Linear => {
                    let (s0, s1) = self.edge_slopes();
                    if x < lo {
                        self.values[0] + s0 * (x - lo)
                    } else {
                        self.values[n - 1] + s1 * (x - hi)
                    }
                }
            };
        }
        if n == 1 {
            return self.values[0];
        }
        let k = self.nodes.partition_point(|&p| p <= x).clamp(1, n - 1);
        let (x0, x1) = (self.nodes[k - 1], self.nodes[k]);
        let (v0, v1) = (self.values[k - 1], self.values[k]);
        v0 + (v1 - v0) * (x - x0) / (x1 - x0)
    }

    /// Right derivative of the interpolant.
    pub fn right_derivative(&self, x: f64) -> f64 {
        let n = self.nodes.len();
        if n < 2 {
            return 0.0;
        }
        if x >= self.nodes[n - 1] {
            return match self.extension {
                Extension::Linear => self.edge_slopes().1,
                Extension::Infinite => f64::INFINITY,
            };
        }
        if x < self.nodes[0] {
            return match self.extension {
                Extension::Linear => self.edge_slopes().0,
                Extension::Infinite => f64::NAN,
            };
        }
        let k = self.nodes.partition_point(|&p| p <= x);
        (self.values[k] - self.values[k - 1]) / (self.nodes[k] - self.nodes[k - 1])
    }

    /// Left derivative of the interpolant.
    pub fn left_derivative(&self, x: f64) -> f64 {
        let n = self.nodes.len();
        if n < 2 {
            return 0.0;
        }
        if x <= self.nodes[0] {
            return match self.extension {
                Extension::Linear => self.edge_slopes().0,
                Extension::Infinite => f64::NEG_INFINITY,
            };
        }
        if x > self.nodes[n - 1] {
            return match self.extension {
                Extension::Linear => self.edge_slopes().1,
                Extension::Infinite => f64::NAN,
            };
        }
        let k = self.nodes.partition_point(|&p| p < x);
        (self.values[k] - self.values[k - 1]) / (self.nodes[k] - self.nodes[k - 1])
    }

    /// Derivative almost everywhere, using the right derivative at nodes.
    pub fn derivative(&self, x: f64) -> f64 {
        self.right_derivative(x)
    }

    /// Whether the function (with its extension) is bounded below.
    pub fn is_bounded_below(&self) -> bool {
        match self.extension {
            Extension::Infinite => true,
            Extension::Linear => {
                let (s0, s1) = self.edge_slopes();
                s0 <= 0.0 && s1 >= 0.0
            }
        }
    }

    /// Infimum over the whole line (the minimal node value when bounded below).
    pub fn infimum(&self) -> f64 {
        if !self.is_bounded_below() {
            return f64::NEG_INFINITY;
        }
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `x ↦ f(x − c)`.
    pub fn shifted(&self, c: f64) -> Self {
        GridFunction {
            nodes: self.nodes.iter().map(|x| x + c).collect(),
            values: self.values.clone(),
            convex: self.convex,
            lipschitz: self.lipschitz,
            extension: self.extension,
        }
    }

    /// `x ↦ f(x) + c`.
    pub fn plus(&self, c: f64) -> Self {
        let mut g = self.clone();
        g.values.iter_mut().for_each(|v| *v += c);
        g
    }
}

/// Which algorithm [`inf_convolution`] uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Engine {
    Exhaustive,
    Quadratic,
    PiecewiseLinear,
    /// `Quadratic` when `θ` is quadratic, `Exhaustive` otherwise.
    Auto,
}

/// `c` with `θ(u) = c u²`, if `θ` has that form.
fn quadratic_coefficient(theta: &CostFunction) -> Option<f64> {
    let c = theta.eval(1.0);
    let probes = [0.25, 0.5, 2.0, 3.0, 10.0];
    (c.is_finite() && c > 0.0 && probes.iter().all(|&u| (theta.eval(u) - c * u * u).abs() <= 1e-14 * c * u * u))
        .then_some(c)
}

/// Radius around `x` that contains every minimizer when `f` is `L`-Lipschitz:
/// the slope-matching condition gives `|x − y| ≤ t (θ*)'(L)`.
pub fn padding_radius(lipschitz: f64, theta: &CostFunction, t: f64) -> f64 {
    (t * theta.conjugate_derivative(lipschitz)).min(t * theta.finite_radius())
}

/// The points `y_k + t (θ*)'(s)` for the one-sided slopes `s` at every input
/// node: the loci where the minimizer of a piecewise-linear input leaves or
/// enters a node, and where `Q_t f` fails to be twice differentiable.
pub fn kink_loci(f: &GridFunction, theta: &CostFunction, t: f64) -> Vec<f64> {
    let dual = theta.conjugate();
    let mut out = Vec::new();
    for &y in f.nodes() {
        for s in [f.left_derivative(y), f.right_derivative(y)] {
            if s.is_finite() {
                out.push(y + t * dual.derivative(s));
            }
        }
    }
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

/// Merges the kink loci of `Q_t f` into a set of output nodes.
pub fn nodes_with_kinks(nodes: &[f64], f: &GridFunction, theta: &CostFunction, t: f64) -> Vec<f64> {
    let (lo, hi) = (nodes[0], nodes[nodes.len() - 1]);
    let mut all: Vec<f64> = nodes.to_vec();
    all.extend(kink_loci(f, theta, t).into_iter().filter(|&x| x > lo && x < hi));
    all.sort_by(f64::total_cmp);
    all.dedup();
    all
}

/// `Q_t f` evaluated at `out` (sorted).
pub fn inf_convolution(f: &GridFunction, theta: &CostFunction, t: f64, out: &[f64], engine: Engine) -> Result<GridFunction> {
    if !(t > 0.0) {
        return Err(Error::invalid("infimum convolution needs t > 0"));
    }
    if out.is_empty() || out.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("output nodes must be non-empty and strictly increasing"));
    }
    if !f.is_bounded_below() && theta.finite_radius().is_infinite() {
        return Err(Error::invalid("input function is unbounded below under its extension"));
    }
    let values = match engine {
        Engine::Exhaustive => exhaustive(f, theta, t, out)?,
        Engine::Quadratic => {
            let c = quadratic_coefficient(theta)
                .ok_or_else(|| Error::invalid("the quadratic engine needs theta(u) = c u^2"))?;
            envelope(f, theta, c / t, t, out)?
        }
        Engine::PiecewiseLinear => piecewise_linear(f, theta, t, out)?,
        Engine::Auto => match quadratic_coefficient(theta) {
            Some(c) => envelope(f, theta, c / t, t, out)?,
            None => exhaustive(f, theta, t, out)?,
        },
    };
    if values.iter().any(|v| !v.is_finite()) {
        let i = values.iter().position(|v| !v.is_finite()).expect("found above");
        return Err(Error::invalid(format!("infimum convolution is not finite at x = {}", out[i])));
    }
    let ext = if out.len() < 2 { Extension::Infinite } else { f.extension };
    GridFunction::new(out.to_vec(), values, ext)
}

/// Rejects minimizers sitting on the first or last input node when the
/// objective still decreases outward, which means the true infimum lies
/// beyond the sampled domain.
fn check_edge(f: &GridFunction, theta: &CostFunction, t: f64, x: f64, i: usize) -> Result<()> {
    if f.extension == Extension::Infinite || f.len() < 2 {
        return Ok(());
    }
    let n = f.len();
    let (s0, s1) = f.edge_slopes();
    let pull = |y: f64| theta.derivative((y - x) / t);
    if i == n - 1 && s1 + pull(f.nodes[n - 1]) < -1e-12 {
        return Err(Error::EdgeAttained { x, y: f.nodes[n - 1] });
    }
    if i == 0 && s0 + pull(f.nodes[0]) > 1e-12 {
        return Err(Error::EdgeAttained { x, y: f.nodes[0] });
    }
    Ok(())
}

fn exhaustive(f: &GridFunction, theta: &CostFunction, t: f64, out: &[f64]) -> Result<Vec<f64>> {
    out.par_iter()
        .map(|&x| {
            let mut best = (f64::INFINITY, 0usize);
            for (i, (&y, &v)) in f.nodes.iter().zip(&f.values).enumerate() {
                let c = v + t * theta.eval((x - y).abs() / t);
                if c < best.0 {
                    best = (c, i);
                }
            }
            check_edge(f, theta, t, x, best.1)?;
            Ok(best.0)
        })
        .collect()
}

/// Lower envelope of the parabolas `f(y_i) + κ (x − y_i)²`.
fn envelope(f: &GridFunction, theta: &CostFunction, kappa: f64, t: f64, out: &[f64]) -> Result<Vec<f64>> {
    let ys = &f.nodes;
    let fs = &f.values;
    let n = ys.len();
    // hull[k] is a parabola index; bounds[k] is where parabola hull[k] starts to win
    let mut hull: Vec<usize> = Vec::with_capacity(n);
    let mut bounds: Vec<f64> = Vec::with_capacity(n + 1);
    let meet = |p: usize, q: usize| {
        ((fs[q] + kappa * ys[q] * ys[q]) - (fs[p] + kappa * ys[p] * ys[p])) / (2.0 * kappa * (ys[q] - ys[p]))
    };
    for q in 0..n {
        loop {
            match hull.last() {
                None => {
                    hull.push(q);
                    bounds.push(f64::NEG_INFINITY);
                    break;
                }
                Some(&p) => {
                    let s = meet(p, q);
                    if s <= *bounds.last().expect("parallel to hull") {
                        hull.pop();
                        bounds.pop();
                    } else {
                        hull.push(q);
                        bounds.push(s);
                        break;
                    }
                }
            }
        }
    }
    let mut values = Vec::with_capacity(out.len());
    let mut k = 0;
    for &x in out {
        while k + 1 < hull.len() && bounds[k + 1] < x {
            k += 1;
        }
        let i = hull[k];
        check_edge(f, theta, t, x, i)?;
        values.push(fs[i] + kappa * (x - ys[i]) * (x - ys[i]));
    }
    Ok(values)
}

/// Exact infimum for the piecewise-linear interpolant (and its linear rays).
fn piecewise_linear(f: &GridFunction, theta: &CostFunction, t: f64, out: &[f64]) -> Result<Vec<f64>> {
    let dual = theta.conjugate();
    let radius = t * theta.finite_radius();
    let n = f.len();
    let slopes = f.slopes();
    // (lo, hi, slope, anchor x, anchor value) per piece
    let mut pieces: Vec<(f64, f64, f64, f64, f64)> = Vec::with_capacity(n + 1);
    if n == 1 {
        pieces.push((f.nodes[0], f.nodes[0], 0.0, f.nodes[0], f.values[0]));
    }
    for k in 0..n.saturating_sub(1) {
        pieces.push((f.nodes[k], f.nodes[k + 1], slopes[k], f.nodes[k], f.values[k]));
    }
    if f.extension == Extension::Linear && n >= 2 {
        let (s0, s1) = f.edge_slopes();
        pieces.push((f64::NEG_INFINITY, f.nodes[0], s0, f.nodes[0], f.values[0]));
        pieces.push((f.nodes[n - 1], f64::INFINITY, s1, f.nodes[n - 1], f.values[n - 1]));
    }
    out.par_iter()
        .map(|&x| {
            let mut best = f64::INFINITY;
            for &(lo, hi, s, ax, av) in &pieces {
                let lo = lo.max(x - radius);
                let hi = hi.min(x + radius);
                if lo > hi {
                    continue;
                }
                let y = (x - t * dual.derivative(s)).clamp(lo, hi);
                if !y.is_finite() {
                    return Err(Error::invalid(format!("infimum is -inf at x = {x}")));
                }
                let v = av + s * (y - ax) + t * theta.eval((x - y).abs() / t);
                best = best.min(v);
            }
            Ok(best)
        })
        .collect()
}

/// `R^λ f(x) = inf_y {f(y) + λ H*(a(x − y))}` for convex `f`, computed exactly
/// for the piecewise-linear interpolant.
pub fn r_lambda(f: &GridFunction, hstar: &CostFunction, a: f64, lambda: f64, x: f64) -> Result<f64> {
    if !f.is_convex() {
        return Err(Error::invalid("R^lambda needs a convex input"));
    }
    if !(lambda > 0.0 && lambda < 1.0) || !(a > 0.0) {
        return Err(Error::invalid("R^lambda needs lambda in (0, 1) and a > 0"));
    }
    let theta = hstar.scaled(a).times(lambda);
    let v = inf_convolution(f, &theta, 1.0, &[x], Engine::PiecewiseLinear)?;
    Ok(v.values()[0])
}

/// Checks `f(x) − R^λ f(x) ≤ λ H(f'(x)/(aλ))` at every node, with both
/// one-sided derivatives.
pub fn r_lambda_gap_check(f: &GridFunction, hstar: &CostFunction, a: f64, lambda: f64) -> Result<Report> {
    let h = hstar.conjugate();
    let mut worst = f64::NEG_INFINITY;
    let mut witness = None;
    let mut table = Table::new("r-lambda-gap", &["x", "gap", "bound"]);
    for &x in f.nodes() {
        let r = r_lambda(f, hstar, a, lambda, x)?;
        let gap = f.eval(x) - r;
        for d in [f.left_derivative(x), f.right_derivative(x)] {
            if !d.is_finite() {
                continue;
            }
            let bound = lambda * h.eval(d / (a * lambda));
            let e = gap - bound;
            if e > worst {
                worst = e;
                if e > 1e-10 * (1.0 + bound.abs()) {
                    witness = Some(format!("x = {x}: gap {gap} > bound {bound}"));
                }
            }
            table.push(vec![x, gap, bound]);
        }
    }
    let mut r = Report::new("r-lambda-gap", Verdict::from_bool(witness.is_none()))
        .with_value("lambda", lambda)
        .with_value("a", a)
        .with_value("worst_excess", worst);
    r.witness = witness;
    r.tables.push(table);
    Ok(r)
}

/// Options for [`hopf_lax_residual`].
#[derive(Clone, Copy, Debug)]
pub struct HopfLaxOptions {
    pub dt: f64,
    pub dx: f64,
    pub engine: Engine,
    /// Skip `(t, x)` within this distance of a kink locus of `Q_t f`.
    pub exclude_kinks: Option<f64>,
}

impl Default for HopfLaxOptions {
    fn default() -> Self {
        HopfLaxOptions { dt: 1e-3, dx: 1e-3, engine: Engine::Auto, exclude_kinks: None }
    }
}

/// Residual of `∂_t Q + H(∂_x Q) = 0` by centered differences.
#[derive(Clone, Debug)]
pub struct Residual {
    pub max_abs: f64,
    pub mean_abs: f64,
    /// Rows `(t, x, residual)`.
    pub table: Table,
    pub skipped: usize,
}

/// Evaluates `Q_t f` with the cost `t H*(|·|/t)` around each `(t, x)` grid
/// point and returns the finite-difference Hamilton–Jacobi residual.
pub fn hopf_lax_residual(
    f: &GridFunction,
    h: &CostFunction,
    t_grid: &[f64],
    x_grid: &[f64],
    opts: &HopfLaxOptions,
) -> Result<Residual> {
    let HopfLaxOptions { dt, dx, engine, exclude_kinks } = *opts;
    if !(dt > 0.0 && dx > 0.0) {
        return Err(Error::invalid("difference steps must be positive"));
    }
    let tmin = t_grid.iter().copied().fold(f64::INFINITY, f64::min);
    if !(tmin > dt) {
        return Err(Error::invalid("time grid too coarse: need t > dt to form centered differences"));
    }
    let theta = h.conjugate();
    let mut xs: Vec<f64> = x_grid.iter().flat_map(|&x| [x - dx, x, x + dx]).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let at = |q: &GridFunction, x: f64| {
        let i = q.nodes().partition_point(|&p| p < x);
        q.values()[i]
    };
    let mut table = Table::new("hopf-lax-residual", &["t", "x", "residual"]);
    let mut sum = 0.0;
    let mut max: f64 = 0.0;
    let mut count = 0usize;
    let mut skipped = 0usize;
    for &t in t_grid {
        let minus = inf_convolution(f, &theta, t - dt, &xs, engine)?;
        let mid = inf_convolution(f, &theta, t, &xs, engine)?;
        let plus = inf_convolution(f, &theta, t + dt, &xs, engine)?;
        let kinks = match exclude_kinks {
            Some(_) => kink_loci(f, &theta, t),
            None => Vec::new(),
        };
        for &x in x_grid {
            if let Some(r) = exclude_kinks {
                if kinks.iter().any(|k| (k - x).abs() < r) {
                    skipped += 1;
                    continue;
                }
            }
            let qt = (at(&plus, x) - at(&minus, x)) / (2.0 * dt);
            let qx = (at(&mid, x + dx) - at(&mid, x - dx)) / (2.0 * dx);
            let res = qt + h.eval(qx);
            table.push(vec![t, x, res]);
            sum += res.abs();
            max = max.max(res.abs());
            count += 1;
        }
    }
    Ok(Residual {
        max_abs: max,
        mean_abs: if count > 0 { sum / count as f64 } else { 0.0 },
        table,
        skipped,
    })
}

/// `k(u) = u − u²` on `[0, 1/2)` and `1/4` beyond.
pub fn maurey_k(u: f64) -> f64 {
    if u < 0.5 {
        u - u * u
    } else {
        0.25
    }
}

/// Checks `Q₁^{θ_D} φ ≤ k(φ)` on the support of `μ` after normalizing `φ` to
/// have infimum 0 there, and `e^{k(u)} ≤ 2 − e^{−u}` on a grid of `[0, 5]`.
pub fn maurey_bound_check(phi: &GridFunction, d: f64, mu: &Measure1D) -> Result<Report> {
    let (_, s, t) = mu.median_support();
    let diam = t - s;
    if !(diam <= d) {
        return Err(Error::DiameterExceeded { diameter: diam, bound: d });
    }
    if !phi.is_convex() || !phi.is_bounded_below() {
        return Err(Error::invalid("maurey check needs a convex function bounded below"));
    }
    let points: Vec<f64> = match mu.as_atoms() {
        Some(a) => a.positions().to_vec(),
        None => (0..=400).map(|k| s + (t - s) * k as f64 / 400.0).collect(),
    };
    let mut support_nodes = points.clone();
    support_nodes.extend(phi.nodes().iter().copied().filter(|&x| x >= s && x <= t));
    let floor = support_nodes.iter().map(|&x| phi.eval(x)).fold(f64::INFINITY, f64::min);
    let shifted = phi.plus(-floor);
    let theta = crate::costs::CostFunction::theta_d(d)?;
    let mut out = points.clone();
    out.sort_by(f64::total_cmp);
    out.dedup();
    let q = inf_convolution(&shifted, &theta, 1.0, &out, Engine::PiecewiseLinear)?;
    let mut worst_chain = f64::NEG_INFINITY;
    let mut witness = None;
    for (&x, &qv) in q.nodes().iter().zip(q.values()) {
        let u = shifted.eval(x);
        let e = qv - maurey_k(u);
        if e > worst_chain {
            worst_chain = e;
            if e > 1e-12 {
                witness = Some(format!("x = {x}: Q1 phi = {qv} > k(phi) = {}", maurey_k(u)));
            }
        }
    }
    let worst_k = (0..10_000)
        .map(|i| {
            let u = 5.0 * i as f64 / 9_999.0;
            maurey_k(u).exp() - (2.0 - (-u).exp())
        })
        .fold(f64::NEG_INFINITY, f64::max);
    let pass = witness.is_none() && worst_k <= 1e-15;
    let mut r = Report::new("maurey-envelope", Verdict::from_bool(pass))
        .with_value("D", d)
        .with_value("diameter", diam)
        .with_value("worst_chain_excess", worst_chain)
        .with_value("worst_k_excess", worst_k);
    r.witness = witness;
    Ok(r)
}
