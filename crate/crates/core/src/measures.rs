//! Probability measures on the real line.
//!
//! A [`Measure1D`] is one of three representations: a finite set of weighted
//! atoms, a piecewise-linear CDF sampled on a grid, or a closed-form family.
//! All of them answer the same queries (CDF, generalized quantile, tails,
//! moments, sampling), so the checkers downstream never care which one they
//! were handed.
//!
//! The quantile is the left-continuous generalized inverse
//! `F⁻¹(t) = inf{y : F(y) ≥ t}`. At plateaus of the CDF it returns the left
//! end of the gap, which is what makes the transport map left-continuous.

use std::borrow::Cow;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use statrs::distribution::{Continuous, ContinuousCDF, Normal};
use statrs::function::erf::{erfc, erfc_inv};

use crate::error::{Error, Result};
use crate::quad;

/// Mass-normalization tolerance accepted for atom weights.
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// Numerical tolerance bundle used by checkers that sample grids.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub grid: usize,
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64, grid: usize) -> Result<Self> {
        if !(abs >= 0.0 && rel >= 0.0) || abs + rel <= 0.0 {
            return Err(Error::invalid("tolerance needs abs + rel > 0 with both nonnegative"));
        }
        if grid == 0 {
            return Err(Error::invalid("grid resolution must be positive"));
        }
        Ok(Tolerance { abs, rel, grid })
    }

    /// `a ≤ b` up to this tolerance.
    pub fn le(&self, a: f64, b: f64) -> bool {
        a <= b + self.abs + self.rel * a.abs().max(b.abs())
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { abs: 1e-12, rel: 1e-7, grid: 2000 }
    }
}

/// Finitely many weighted points with strictly increasing positions.
#[derive(Clone, Debug, PartialEq)]
pub struct Atoms {
    positions: Vec<f64>,
    weights: Vec<f64>,
    // cumulative[i] = Σ_{j ≤ i} w_j, with the last entry pinned to 1.
    cumulative: Vec<f64>,
    // upper[i] = Σ_{j > i} w_j, summed from the right so small tails stay exact.
    upper: Vec<f64>,
}

impl Atoms {
    /// Builds an atom set; positions must be strictly increasing, weights
    /// positive and summing to one within [`NORMALIZATION_TOL`].
    pub fn new(positions: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if positions.is_empty() || positions.len() != weights.len() {
            return Err(Error::invalid("atoms need matching, non-empty positions and weights"));
        }
        if positions.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("atom positions must be finite"));
        }
        if positions.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("atom positions must be strictly increasing"));
        }
        if weights.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
            return Err(Error::invalid("atom weights must be strictly positive"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::invalid(format!("atom weights sum to {total}, not 1")));
        }
        let weights: Vec<f64> = weights.iter().map(|w| w / total).collect();
        Ok(Self::from_normalized(positions, weights))
    }

    fn from_normalized(positions: Vec<f64>, weights: Vec<f64>) -> Self {
        let n = weights.len();
        let mut cumulative = Vec::with_capacity(n);
        let mut acc = 0.0;
        for w in &weights {
            acc += w;
            cumulative.push(acc.min(1.0));
        }
        cumulative[n - 1] = 1.0;
        let mut upper = vec![0.0; n];
        for i in (0..n - 1).rev() {
            upper[i] = upper[i + 1] + weights[i + 1];
        }
        Atoms { positions, weights, cumulative, upper }
    }

    /// Sorts the pairs, merges equal positions and normalizes the weights.
    /// Zero weights are dropped.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let mut pairs: Vec<(f64, f64)> = pairs.into_iter().filter(|p| p.1 != 0.0).collect();
        if pairs.iter().any(|(x, w)| !x.is_finite() || !(*w > 0.0) || !w.is_finite()) {
            return Err(Error::invalid("atoms need finite positions and positive weights"));
        }
        if pairs.is_empty() {
            return Err(Error::invalid("no atoms with positive weight"));
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut positions: Vec<f64> = Vec::with_capacity(pairs.len());
        let mut weights: Vec<f64> = Vec::with_capacity(pairs.len());
        for (x, w) in pairs {
            if positions.last() == Some(&x) {
                *weights.last_mut().expect("parallel vectors") += w;
            } else {
                positions.push(x);
                weights.push(w);
            }
        }
        let total: f64 = weights.iter().sum();
        let weights = weights.into_iter().map(|w| w / total).collect();
        Ok(Self::from_normalized(positions, weights))
    }

    /// Equal weights on the given (not necessarily sorted) positions.
    pub fn uniform(positions: &[f64]) -> Result<Self> {
        let w = 1.0 / positions.len() as f64;
        Self::from_pairs(positions.iter().map(|&x| (x, w)))
    }

    pub fn dirac(x: f64) -> Self {
        Self::from_normalized(vec![x], vec![1.0])
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    /// `upper_mass()[i]` is the mass strictly to the right of atom `i`.
    pub fn upper_mass(&self) -> &[f64] {
        &self.upper
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.positions.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn mean(&self) -> f64 {
        self.iter().map(|(x, w)| x * w).sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.iter().map(|(x, w)| w * (x - m) * (x - m)).sum()
    }

    pub fn expect<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.iter().map(|(x, w)| w * f(x)).sum()
    }

    /// Same positions, new weights (renormalized). Used for reweightings.
    pub fn reweighted(&self, weights: &[f64]) -> Result<Self> {
        if weights.len() != self.len() {
            return Err(Error::invalid("reweighting needs one weight per atom"));
        }
        Self::from_pairs(self.positions.iter().copied().zip(weights.iter().copied()))
    }

    fn cdf(&self, x: f64) -> f64 {
        let k = self.positions.partition_point(|&p| p <= x);
        if k == 0 {
            0.0
        } else {
            self.cumulative[k - 1]
        }
    }

    fn quantile(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let i = self.cumulative.partition_point(|&c| c < t);
        self.positions[i.min(self.len() - 1)]
    }

    fn quantile_upper(&self, q: f64) -> f64 {
        if q >= 1.0 {
            return f64::NEG_INFINITY;
        }
        // smallest i with 1 - cum_i ≤ q, i.e. upper_i ≤ q; `upper` is nonincreasing.
        let i = self.upper.partition_point(|&u| u > q);
        self.positions[i.min(self.len() - 1)]
    }

    fn mass_above(&self, x: f64, closed: bool) -> f64 {
        let k = if closed {
            self.positions.partition_point(|&p| p < x)
        } else {
            self.positions.partition_point(|&p| p <= x)
        };
        if k == 0 {
            1.0
        } else {
            self.upper[k - 1]
        }
    }

    fn mass_below(&self, x: f64, closed: bool) -> f64 {
        let k = if closed {
            self.positions.partition_point(|&p| p <= x)
        } else {
            self.positions.partition_point(|&p| p < x)
        };
        if k == 0 {
            0.0
        } else {
            self.cumulative[k - 1]
        }
    }

    fn largest_gap(&self) -> f64 {
        self.positions.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }
}

/// A continuous CDF given by its values at sorted nodes and interpolated
/// linearly in between (a piecewise-constant density).
#[derive(Clone, Debug, PartialEq)]
pub struct GridCdf {
    nodes: Vec<f64>,
    cdf: Vec<f64>,
}

impl GridCdf {
    pub fn new(nodes: Vec<f64>, cdf: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 || nodes.len() != cdf.len() {
            return Err(Error::invalid("grid CDF needs at least two nodes and matching values"));
        }
        if nodes.iter().any(|x| !x.is_finite()) || nodes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("grid CDF nodes must be finite and strictly increasing"));
        }
        if cdf.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::invalid("grid CDF values must lie in [0, 1]"));
        }
        if cdf.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::invalid("grid CDF values must be nondecreasing"));
        }
        if cdf[0] != 0.0 || cdf[cdf.len() - 1] != 1.0 {
            return Err(Error::invalid("grid CDF must start at 0 and end at 1"));
        }
        Ok(GridCdf { nodes, cdf })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.cdf
    }

    fn cdf_at(&self, x: f64) -> f64 {
        let n = self.nodes.len();
        if x < self.nodes[0] {
            return 0.0;
        }
        if x >= self.nodes[n - 1] {
            return 1.0;
        }
        let k = self.nodes.partition_point(|&p| p <= x);
        let (x0, x1) = (self.nodes[k - 1], self.nodes[k]);
        let (f0, f1) = (self.cdf[k - 1], self.cdf[k]);
        f0 + (f1 - f0) * (x - x0) / (x1 - x0)
    }

    fn quantile(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let i = self.cdf.partition_point(|&c| c < t);
        let i = i.min(self.nodes.len() - 1);
        if i == 0 {
            return self.nodes[0];
        }
        let (f0, f1) = (self.cdf[i - 1], self.cdf[i]);
        let (x0, x1) = (self.nodes[i - 1], self.nodes[i]);
        x0 + (x1 - x0) * (t - f0) / (f1 - f0)
    }

    fn density(&self, x: f64) -> f64 {
        let n = self.nodes.len();
        if x < self.nodes[0] || x >= self.nodes[n - 1] {
            return 0.0;
        }
        let k = self.nodes.partition_point(|&p| p <= x);
        (self.cdf[k] - self.cdf[k - 1]) / (self.nodes[k] - self.nodes[k - 1])
    }

    fn support(&self) -> (f64, f64) {
        let first = self.cdf.iter().rposition(|&c| c == 0.0).unwrap_or(0);
        let last = self.cdf.iter().position(|&c| c == 1.0).unwrap_or(self.cdf.len() - 1);
        (self.nodes[first], self.nodes[last])
    }

    fn segments(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        (1..self.nodes.len()).map(move |k| {
            let (x0, x1) = (self.nodes[k - 1], self.nodes[k]);
            (x0, x1, (self.cdf[k] - self.cdf[k - 1]) / (x1 - x0))
        })
    }

    fn largest_gap(&self) -> f64 {
        let (s, t) = self.support();
        self.segments()
            .filter(|&(x0, x1, d)| d == 0.0 && x0 >= s && x1 <= t)
            .map(|(x0, x1, _)| x1 - x0)
            .fold(0.0, f64::max)
    }
}

/// Closed-form families with exact CDF, quantile and density.
#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    /// Density `exp(-|x|/scale) / (2 scale)`; `scale = 1` is the source
    /// measure of the transport map.
    SymmetricExponential { scale: f64 },
    Gaussian { mean: f64, sd: f64 },
    Uniform { lo: f64, hi: f64 },
    /// Mass `p0` at `x0` and `1 - p0` at `x1`.
    TwoPoint { x0: f64, x1: f64, p0: f64 },
}

impl Family {
    pub fn tag(&self) -> &'static str {
        match self {
            Family::SymmetricExponential { .. } => "symmetric-exponential",
            Family::Gaussian { .. } => "gaussian",
            Family::Uniform { .. } => "uniform",
            Family::TwoPoint { .. } => "two-point",
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Family::SymmetricExponential { scale } => scale > 0.0 && scale.is_finite(),
            Family::Gaussian { mean, sd } => mean.is_finite() && sd > 0.0 && sd.is_finite(),
            Family::Uniform { lo, hi } => lo.is_finite() && hi.is_finite() && lo < hi,
            Family::TwoPoint { x0, x1, p0 } => {
                x0.is_finite() && x1.is_finite() && x0 < x1 && p0 > 0.0 && p0 < 1.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!("invalid parameters for {}: {self:?}", self.tag())))
        }
    }

    fn normal(mean: f64, sd: f64) -> Normal {
        Normal::new(mean, sd).expect("validated parameters")
    }
}

/// A Borel probability measure on the real line.
#[derive(Clone, Debug, PartialEq)]
pub enum Measure1D {
    Atoms(Atoms),
    GridCdf(GridCdf),
    ClosedForm(Family),
}

impl From<Atoms> for Measure1D {
    fn from(a: Atoms) -> Self {
        Measure1D::Atoms(a)
    }
}

impl From<GridCdf> for Measure1D {
    fn from(g: GridCdf) -> Self {
        Measure1D::GridCdf(g)
    }
}

/// `z` with `P(Z > z) = q` for a standard normal `Z`; the series inverse is
/// polished by Newton steps on `erfc`.
fn normal_upper_quantile(q: f64) -> f64 {
    let mut z = std::f64::consts::SQRT_2 * erfc_inv(2.0 * q);
    for _ in 0..2 {
        let density = (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
        if density > 0.0 {
            z += (0.5 * erfc(z / std::f64::consts::SQRT_2) - q) / density;
        }
    }
    z
}

/// Which tail of the line an integral runs over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// The open interval `(x, ∞)`.
    Upper,
    /// The open interval `(-∞, x)`.
    Lower,
}

/// Two-point measure with masses `p0` at `x0` and `1 - p0` at `x1`.
pub fn two_point(x0: f64, x1: f64, p0: f64) -> Result<Measure1D> {
    Measure1D::family(Family::TwoPoint { x0, x1, p0 })
}

impl Measure1D {
    pub fn family(f: Family) -> Result<Self> {
        f.validate()?;
        Ok(Measure1D::ClosedForm(f))
    }

    /// The symmetric exponential measure with density `exp(-|x|)/2`.
    pub fn symmetric_exponential() -> Self {
        Measure1D::ClosedForm(Family::SymmetricExponential { scale: 1.0 })
    }

    pub fn standard_gaussian() -> Self {
        Measure1D::ClosedForm(Family::Gaussian { mean: 0.0, sd: 1.0 })
    }

    pub fn gaussian(mean: f64, sd: f64) -> Result<Self> {
        Self::family(Family::Gaussian { mean, sd })
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        Self::family(Family::Uniform { lo, hi })
    }

    pub fn atoms(positions: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        Atoms::new(positions, weights).map(Measure1D::Atoms)
    }

    /// The atom set, when the measure is purely atomic.
    pub fn as_atoms(&self) -> Option<Cow<'_, Atoms>> {
        match self {
            Measure1D::Atoms(a) => Some(Cow::Borrowed(a)),
            Measure1D::ClosedForm(Family::TwoPoint { x0, x1, p0 }) => Some(Cow::Owned(
                Atoms::from_normalized(vec![*x0, *x1], vec![*p0, 1.0 - *p0]),
            )),
            _ => None,
        }
    }

    pub fn is_atomic(&self) -> bool {
        self.as_atoms().is_some()
    }

    pub fn is_dirac(&self) -> bool {
        matches!(self, Measure1D::Atoms(a) if a.len() == 1)
    }

    /// A length scale used to size quadrature blocks and search grids.
    pub fn natural_scale(&self) -> f64 {
        match self {
            Measure1D::ClosedForm(Family::SymmetricExponential { scale }) => *scale,
            Measure1D::ClosedForm(Family::Gaussian { sd, .. }) => *sd,
            Measure1D::ClosedForm(Family::Uniform { lo, hi }) => hi - lo,
            Measure1D::ClosedForm(Family::TwoPoint { x0, x1, .. }) => x1 - x0,
            Measure1D::GridCdf(g) => g.nodes[g.nodes.len() - 1] - g.nodes[0],
            Measure1D::Atoms(a) => {
                let s = a.variance().sqrt();
                if s > 0.0 {
                    s
                } else {
                    1.0
                }
            }
        }
    }

    /// `F(x) = μ((-∞, x])`.
    pub fn cdf(&self, x: f64) -> f64 {
        if let Some(a) = self.as_atoms() {
            return a.cdf(x);
        }
        match self {
            Measure1D::GridCdf(g) => g.cdf_at(x),
            Measure1D::ClosedForm(Family::SymmetricExponential { scale }) => {
                if x < 0.0 {
                    0.5 * (x / scale).exp()
                } else {
                    1.0 - 0.5 * (-x / scale).exp()
                }
            }
            Measure1D::ClosedForm(Family::Gaussian { mean, sd }) => Family::normal(*mean, *sd).cdf(x),
            Measure1D::ClosedForm(Family::Uniform { lo, hi }) => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
            _ => unreachable!("atomic cases handled above"),
        }
    }

    /// Generalized inverse `inf{y : F(y) ≥ t}`; `-∞` at `t = 0`.
    pub fn quantile(&self, t: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::invalid(format!("quantile level {t} outside [0, 1]")));
        }
        Ok(self.quantile_unchecked(t))
    }

    fn quantile_unchecked(&self, t: f64) -> f64 {
        if let Some(a) = self.as_atoms() {
            return a.quantile(t);
        }
        match self {
            Measure1D::GridCdf(g) => g.quantile(t),
            Measure1D::ClosedForm(Family::SymmetricExponential { scale }) => {
                if t <= 0.0 {
                    f64::NEG_INFINITY
                } else if t <= 0.5 {
                    scale * (2.0 * t).ln()
                } else {
                    -scale * (2.0 * (1.0 - t)).ln()
                }
            }
            Measure1D::ClosedForm(Family::Gaussian { mean, sd }) => {
                if t <= 0.0 {
                    f64::NEG_INFINITY
                } else if t >= 1.0 {
                    f64::INFINITY
                } else {
                    mean - sd * normal_upper_quantile(t)
                }
            }
            Measure1D::ClosedForm(Family::Uniform { lo, hi }) => {
                if t <= 0.0 {
                    f64::NEG_INFINITY
                } else {
                    lo + t * (hi - lo)
                }
            }
            _ => unreachable!("atomic cases handled above"),
        }
    }

    /// `F⁻¹(1 - q)` evaluated without forming `1 - q`, so that upper quantiles
    /// stay accurate for tiny `q`.
    pub fn quantile_upper(&self, q: f64) -> f64 {
        if let Some(a) = self.as_atoms() {
            return a.quantile_upper(q);
        }
        match self {
            Measure1D::ClosedForm(Family::SymmetricExponential { scale }) => {
                if q <= 0.0 {
                    f64::INFINITY
                } else if q <= 0.5 {
                    -scale * (2.0 * q).ln()
                } else {
                    scale * (2.0 * (1.0 - q)).ln()
                }
            }
            Measure1D::ClosedForm(Family::Gaussian { mean, sd }) => {
                if q <= 0.0 {
                    f64::INFINITY
                } else if q >= 1.0 {
                    f64::NEG_INFINITY
                } else {
                    mean + sd * normal_upper_quantile(q)
                }
            }
            _ => self.quantile_unchecked(1.0 - q),
        }
    }

    /// `μ((x, ∞))`.
    pub fn mass_above(&self, x: f64) -> f64 {
        self.mass_above_impl(x, false)
    }

    /// `μ([x, ∞))`.
    pub fn mass_at_or_above(&self, x: f64) -> f64 {
        self.mass_above_impl(x, true)
    }

    /// `μ((-∞, x))`.
    pub fn mass_below(&self, x: f64) -> f64 {
        self.mass_below_impl(x, false)
    }

    /// `μ((-∞, x])`, the CDF.
    pub fn mass_at_or_below(&self, x: f64) -> f64 {
        self.mass_below_impl(x, true)
    }

    fn mass_above_impl(&self, x: f64, closed: bool) -> f64 {
        if let Some(a) = self.as_atoms() {
            return a.mass_above(x, closed);
        }
        match self {
            Measure1D::ClosedForm(Family::SymmetricExponential { scale }) => {
                if x >= 0.0 {
                    0.5 * (-x / scale).exp()
                } else {
                    1.0 - 0.5 * (x / scale).exp()
                }
            }
            Measure1D::ClosedForm(Family::Gaussian { mean, sd }) => Family::normal(*mean, *sd).sf(x),
            _ => 1.0 - self.cdf(x),
        }
    }

    fn mass_below_impl(&self, x: f64, closed: bool) -> f64 {
        if let Some(a) = self.as_atoms() {
            return a.mass_below(x, closed);
        }
        self.cdf(x)
    }

    /// Density of the absolutely continuous representations.
    pub fn density(&self, x: f64) -> Option<f64> {
        match self {
            Measure1D::GridCdf(g) => Some(g.density(x)),
            Measure1D::ClosedForm(Family::SymmetricExponential { scale }) => {
                Some(0.5 / scale * (-x.abs() / scale).exp())
            }
            Measure1D::ClosedForm(Family::Gaussian { mean, sd }) => Some(Family::normal(*mean, *sd).pdf(x)),
            Measure1D::ClosedForm(Family::Uniform { lo, hi }) => {
                Some(if x >= *lo && x <= *hi { 1.0 / (hi - lo) } else { 0.0 })
            }
            _ => None,
        }
    }

    /// `(m, s_μ, t_μ)`: the median `F⁻¹(1/2)` and the endpoints of the support.
    pub fn median_support(&self) -> (f64, f64, f64) {
        let m = self.quantile_unchecked(0.5);
        let (s, t) = match self {
            Measure1D::Atoms(a) => (a.positions[0], a.positions[a.len() - 1]),
            Measure1D::GridCdf(g) => g.support(),
            Measure1D::ClosedForm(Family::SymmetricExponential { .. })
            | Measure1D::ClosedForm(Family::Gaussian { .. }) => (f64::NEG_INFINITY, f64::INFINITY),
            Measure1D::ClosedForm(Family::Uniform { lo, hi }) => (*lo, *hi),
            Measure1D::ClosedForm(Family::TwoPoint { x0, x1, .. }) => (*x0, *x1),
        };
        (m, s, t)
    }

    pub fn support_diameter(&self) -> f64 {
        let (_, s, t) = self.median_support();
        t - s
    }

    /// Largest gap inside the support, i.e. the largest jump of the transport
    /// map, which is the limit of its modulus of continuity as `h → 0⁺`.
    pub fn largest_gap(&self) -> f64 {
        if let Some(a) = self.as_atoms() {
            return a.largest_gap();
        }
        match self {
            Measure1D::GridCdf(g) => g.largest_gap(),
            _ => 0.0,
        }
    }

    /// `∫ e^{s|x|} dμ`, or `+∞` when the integral diverges.
    pub fn exp_moment(&self, s: f64) -> Result<f64> {
        if !(s > 0.0) {
            return Err(Error::invalid("exponential moment needs s > 0"));
        }
        if let Some(a) = self.as_atoms() {
            return Ok(a.expect(|x| (s * x.abs()).exp()));
        }
        Ok(match self {
            Measure1D::ClosedForm(Family::SymmetricExponential { scale }) => {
                if s * scale >= 1.0 {
                    f64::INFINITY
                } else {
                    1.0 / (1.0 - s * scale)
                }
            }
            Measure1D::ClosedForm(Family::Gaussian { mean, sd }) => {
                let z = *mean / *sd;
                let n = Family::normal(0.0, 1.0);
                let v = 0.5 * s * s * sd * sd;
                (s * mean + v).exp() * n.cdf(z + s * sd) + (-s * mean + v).exp() * n.cdf(-z + s * sd)
            }
            Measure1D::ClosedForm(Family::Uniform { lo, hi }) => {
                exp_abs_integral(s, *lo, *hi) / (hi - lo)
            }
            Measure1D::GridCdf(g) => g.segments().map(|(x0, x1, d)| d * exp_abs_integral(s, x0, x1)).sum(),
            _ => unreachable!("atomic cases handled above"),
        })
    }

    /// Whether `∫ e^{s|x|} dμ < ∞` for every `s > 0`.
    pub fn has_all_exp_moments(&self) -> bool {
        !matches!(self, Measure1D::ClosedForm(Family::SymmetricExponential { .. }))
    }

    /// Quantile discretization: atoms at `F⁻¹((i - 1/2)/n)` with weight `1/n`,
    /// equal positions merged.
    pub fn discretize(&self, n: usize) -> Result<Atoms> {
        if n == 0 {
            return Err(Error::invalid("discretization needs n ≥ 1"));
        }
        let w = 1.0 / n as f64;
        let mut pairs = Vec::with_capacity(n);
        for i in 0..n {
            let t = (i as f64 + 0.5) * w;
            let x = if t > 0.5 {
                self.quantile_upper((n - i) as f64 * w - 0.5 * w)
            } else {
                self.quantile_unchecked(t)
            };
            if !x.is_finite() {
                return Err(Error::invalid(format!("quantile at interior level {t} is infinite")));
            }
            pairs.push((x, w));
        }
        Atoms::from_pairs(pairs)
    }

    /// `∫ g dμ` over the open tail `(x, ∞)` or `(-∞, x)`.
    pub fn tail_integral<G: Fn(f64) -> f64>(&self, x: f64, g: G, side: Side) -> Result<f64> {
        if let Some(a) = self.as_atoms() {
            let v: f64 = a
                .iter()
                .filter(|(p, _)| match side {
                    Side::Upper => *p > x,
                    Side::Lower => *p < x,
                })
                .map(|(p, w)| w * g(p))
                .sum();
            return if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::divergent("tail sum is not finite"))
            };
        }
        let (lo, hi) = match side {
            Side::Upper => (x, f64::INFINITY),
            Side::Lower => (f64::NEG_INFINITY, x),
        };
        self.integrate_between(lo, hi, &g)
    }

    /// `∫ g dμ` over the whole line.
    pub fn expect<G: Fn(f64) -> f64>(&self, g: G) -> Result<f64> {
        if let Some(a) = self.as_atoms() {
            let v = a.expect(g);
            return if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::divergent("expectation is not finite"))
            };
        }
        self.integrate_between(f64::NEG_INFINITY, f64::INFINITY, &g)
    }

    fn integrate_between<G: Fn(f64) -> f64>(&self, lo: f64, hi: f64, g: &G) -> Result<f64> {
        const REL: f64 = 1e-12;
        match self {
            Measure1D::GridCdf(gc) => {
                let mut total = 0.0;
                for (x0, x1, d) in gc.segments() {
                    let (a, b) = (x0.max(lo), x1.min(hi));
                    if a < b && d > 0.0 {
                        total += d * quad::integrate(g, a, b, 1e-300, REL).value;
                    }
                }
                finite(total)
            }
            Measure1D::ClosedForm(Family::Uniform { lo: a0, hi: b0 }) => {
                let (a, b) = (a0.max(lo), b0.min(hi));
                if a >= b {
                    return Ok(0.0);
                }
                finite(quad::integrate(g, a, b, 1e-300, REL).value / (b0 - a0))
            }
            Measure1D::ClosedForm(fam) => {
                let dens = |u: f64| {
                    let d = self.density(u).expect("continuous family");
                    if d == 0.0 {
                        0.0
                    } else {
                        g(u) * d
                    }
                };
                let (center, scale) = match fam {
                    Family::Gaussian { mean, sd } => (*mean, *sd),
                    Family::SymmetricExponential { scale } => (0.0, *scale),
                    _ => unreachable!("atomic and uniform families handled elsewhere"),
                };
                let v = match (lo.is_finite(), hi.is_finite()) {
                    (true, true) => quad::integrate(dens, lo, hi, 1e-300, REL).value,
                    (true, false) => {
                        if lo < center {
                            quad::integrate(&dens, lo, center, 1e-300, REL).value
                                + quad::integrate_upper(&dens, center, scale, REL)?.value
                        } else {
                            quad::integrate_upper(&dens, lo, scale, REL)?.value
                        }
                    }
                    (false, true) => {
                        if hi > center {
                            quad::integrate(&dens, center, hi, 1e-300, REL).value
                                + quad::integrate_lower(&dens, center, scale, REL)?.value
                        } else {
                            quad::integrate_lower(&dens, hi, scale, REL)?.value
                        }
                    }
                    (false, false) => quad::integrate_line(&dens, center, scale, REL)?.value,
                };
                finite(v)
            }
            Measure1D::Atoms(_) => unreachable!("atomic measures are summed exactly"),
        }
    }

    /// Draws one sample using an explicit generator.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Measure1D::ClosedForm(Family::Gaussian { mean, sd }) => {
                let z: f64 = StandardNormal.sample(rng);
                mean + sd * z
            }
            _ => {
                // Open interval (0, 1) so unbounded families stay finite.
                let u: f64 = loop {
                    let u: f64 = rng.random();
                    if u > 0.0 {
                        break u;
                    }
                };
                self.quantile_unchecked(u)
            }
        }
    }

    /// Push-forward under `x ↦ λx` for `λ > 0`.
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::invalid("scaling factor must be positive"));
        }
        Ok(match self {
            Measure1D::Atoms(a) => Measure1D::Atoms(Atoms::from_normalized(
                a.positions.iter().map(|x| lambda * x).collect(),
                a.weights.clone(),
            )),
            Measure1D::GridCdf(g) => Measure1D::GridCdf(GridCdf {
                nodes: g.nodes.iter().map(|x| lambda * x).collect(),
                cdf: g.cdf.clone(),
            }),
            Measure1D::ClosedForm(f) => Measure1D::ClosedForm(match *f {
                Family::SymmetricExponential { scale } => Family::SymmetricExponential { scale: lambda * scale },
                Family::Gaussian { mean, sd } => Family::Gaussian { mean: lambda * mean, sd: lambda * sd },
                Family::Uniform { lo, hi } => Family::Uniform { lo: lambda * lo, hi: lambda * hi },
                Family::TwoPoint { x0, x1, p0 } => Family::TwoPoint { x0: lambda * x0, x1: lambda * x1, p0 },
            }),
        })
    }

    /// Short human-readable description used in reports.
    pub fn describe(&self) -> String {
        match self {
            Measure1D::Atoms(a) => format!("atoms(n={})", a.len()),
            Measure1D::GridCdf(g) => format!("gridcdf(nodes={})", g.nodes.len()),
            Measure1D::ClosedForm(f) => match f {
                Family::SymmetricExponential { scale } => format!("symmetric-exponential({scale})"),
                Family::Gaussian { mean, sd } => format!("gaussian({mean}, {sd})"),
                Family::Uniform { lo, hi } => format!("uniform({lo}, {hi})"),
                Family::TwoPoint { x0, x1, p0 } => format!("two-point({x0}, {x1}, {p0})"),
            },
        }
    }
}

fn finite(v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::divergent("integral is not finite"))
    }
}

/// `∫_a^b e^{s|x|} dx` in closed form.
fn exp_abs_integral(s: f64, a: f64, b: f64) -> f64 {
    let pos = |lo: f64, hi: f64| ((s * hi).exp() - (s * lo).exp()) / s;
    if a >= 0.0 {
        pos(a, b)
    } else if b <= 0.0 {
        pos(-b, -a)
    } else {
        pos(0.0, -a) + pos(0.0, b)
    }
}
