//! Monte Carlo tails of convex and concave 1-Lipschitz functions of product
//! measures, and sub-Gaussian envelope fits `B e^{−t²/A}`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::measures::Measure1D;
use crate::report::{Report, Table, Verdict};

/// Smallest sample count accepted by [`ExperimentConfig::new`].
pub const MIN_SAMPLES: usize = 10_000;
const CHUNK: usize = 1024;

/// Functions of `x ∈ ℝᴺ` with a Lipschitz certificate in the Euclidean norm.
#[derive(Clone, Debug, PartialEq)]
pub enum ZooFunction {
    Constant(f64),
    /// `x₁`.
    Coordinate,
    /// `(x₁ + … + x_N)/√N`.
    NormalizedSum,
    /// `|x|`.
    Norm,
    /// `−|x|`, concave.
    NegNorm,
    /// `max_k xₖ`.
    MaxCoordinate,
    /// `max_k (⟨aₖ, x⟩ + bₖ)`.
    MaxAffine { slopes: Vec<Vec<f64>>, offsets: Vec<f64> },
}

impl ZooFunction {
    pub fn name(&self) -> String {
        match self {
            ZooFunction::Constant(c) => format!("constant({c})"),
            ZooFunction::Coordinate => "coordinate".into(),
            ZooFunction::NormalizedSum => "normalized-sum".into(),
            ZooFunction::Norm => "norm".into(),
            ZooFunction::NegNorm => "neg-norm".into(),
            ZooFunction::MaxCoordinate => "max-coordinate".into(),
            ZooFunction::MaxAffine { slopes, .. } => format!("max-affine({})", slopes.len()),
        }
    }

    /// Parses a zoo name; `max-affine` draws eight unit-norm pieces from `seed`.
    pub fn parse(name: &str, dim: usize, seed: u64) -> Result<Self> {
        Ok(match name {
            "constant" => ZooFunction::Constant(0.0),
            "coordinate" => ZooFunction::Coordinate,
            "normalized-sum" => ZooFunction::NormalizedSum,
            "norm" => ZooFunction::Norm,
            "neg-norm" => ZooFunction::NegNorm,
            "max-coordinate" => ZooFunction::MaxCoordinate,
            "max-affine" => ZooFunction::random_max_affine(dim, 8, seed),
            other => return Err(Error::invalid(format!("unknown zoo function '{other}'"))),
        })
    }

    /// `k` random affine pieces with unit-norm slopes and offsets in `[0, 1]`.
    pub fn random_max_affine(dim: usize, k: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut slopes = Vec::with_capacity(k);
        for _ in 0..k {
            let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
            let n = v.iter().map(|a| a * a).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
            slopes.push(v.iter().map(|a| a / n).collect());
        }
        let offsets = (0..k).map(|_| rng.random_range(0.0..1.0)).collect();
        ZooFunction::MaxAffine { slopes, offsets }
    }

    /// Checks that the function is convex or concave and 1-Lipschitz in dimension `dim`.
    pub fn certify(&self, dim: usize) -> Result<()> {
        if let ZooFunction::MaxAffine { slopes, offsets } = self {
            if slopes.is_empty() || slopes.len() != offsets.len() {
                return Err(Error::invalid("max-affine needs matching, non-empty slopes and offsets"));
            }
            for (k, a) in slopes.iter().enumerate() {
                if a.len() != dim {
                    return Err(Error::invalid(format!("affine piece {k} has dimension {}, expected {dim}", a.len())));
                }
                let n = a.iter().map(|v| v * v).sum::<f64>().sqrt();
                if n > 1.0 + 1e-12 {
                    return Err(Error::invalid(format!("affine piece {k} has slope norm {n} > 1")));
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            ZooFunction::Constant(c) => *c,
            ZooFunction::Coordinate => x[0],
            ZooFunction::NormalizedSum => x.iter().sum::<f64>() / (x.len() as f64).sqrt(),
            ZooFunction::Norm => x.iter().map(|v| v * v).sum::<f64>().sqrt(),
            ZooFunction::NegNorm => -x.iter().map(|v| v * v).sum::<f64>().sqrt(),
            ZooFunction::MaxCoordinate => x.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            ZooFunction::MaxAffine { slopes, offsets } => slopes
                .iter()
                .zip(offsets)
                .map(|(a, b)| a.iter().zip(x).map(|(p, q)| p * q).sum::<f64>() + b)
                .fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

/// One Monte Carlo experiment.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub base: Measure1D,
    pub dim: usize,
    pub samples: usize,
    pub zoo: Vec<ZooFunction>,
    pub t_grid: Vec<f64>,
    pub seed: u64,
    /// Chained LSI constant of the base measure, recorded next to the fit.
    pub chained_c: Option<f64>,
}

impl ExperimentConfig {
    pub fn new(base: Measure1D, dim: usize, samples: usize, zoo: Vec<ZooFunction>, t_grid: Vec<f64>, seed: u64) -> Result<Self> {
        let cfg = ExperimentConfig { base, dim, samples, zoo, t_grid, seed, chained_c: None };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::invalid("dimension must be at least 1"));
        }
        if self.samples < MIN_SAMPLES {
            return Err(Error::invalid(format!("at least {MIN_SAMPLES} samples are needed, got {}", self.samples)));
        }
        if self.zoo.is_empty() {
            return Err(Error::invalid("empty function zoo"));
        }
        if self.t_grid.iter().any(|t| !(*t > 0.0)) || self.t_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("t grid must be positive and increasing"));
        }
        for f in &self.zoo {
            f.certify(self.dim)?;
        }
        Ok(())
    }
}

/// `0.25, 0.5, …, 5`.
pub fn default_t_grid() -> Vec<f64> {
    (1..=20).map(|k| 0.25 * k as f64).collect()
}

/// Empirical tails of one zoo function around its sample median.
#[derive(Clone, Debug, PartialEq)]
pub struct Tails {
    pub function: String,
    pub samples: usize,
    pub median: f64,
    pub t: Vec<f64>,
    /// `P(φ − med ≤ −t)`.
    pub lower: Vec<f64>,
    /// `P(φ − med ≥ t)`.
    pub upper: Vec<f64>,
    /// `P(|φ − med| ≥ t)`.
    pub two_sided: Vec<f64>,
    /// Three binomial standard errors; the first bucket also carries the
    /// uncertainty of the sample median.
    pub half_width: Vec<f64>,
}

/// Samples `μ^{⊗N}` and tabulates the tails of every zoo function.
///
/// Samples come in chunks of 1024, each from its own ChaCha stream derived
/// from the seed, so results do not depend on the thread count.
pub fn simulate_tails(cfg: &ExperimentConfig) -> Result<Vec<Tails>> {
    cfg.validate()?;
    let chunks = cfg.samples.div_ceil(CHUNK);
    let per_chunk: Vec<Vec<Vec<f64>>> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(k as u64);
            let count = CHUNK.min(cfg.samples - k * CHUNK);
            let mut x = vec![0.0; cfg.dim];
            let mut out = vec![Vec::with_capacity(count); cfg.zoo.len()];
            for _ in 0..count {
                for v in x.iter_mut() {
                    *v = cfg.base.sample(&mut rng);
                }
                for (f, o) in cfg.zoo.iter().zip(out.iter_mut()) {
                    o.push(f.eval(&x));
                }
            }
            out
        })
        .collect();
    let m = cfg.samples as f64;
    let mut result = Vec::with_capacity(cfg.zoo.len());
    for (fi, f) in cfg.zoo.iter().enumerate() {
        let mut vals: Vec<f64> = per_chunk.iter().flat_map(|c| c[fi].iter().copied()).collect();
        vals.sort_by(f64::total_cmp);
        let n = vals.len();
        let median = if n % 2 == 1 { vals[n / 2] } else { 0.5 * (vals[n / 2 - 1] + vals[n / 2]) };
        let mut lower = Vec::with_capacity(cfg.t_grid.len());
        let mut upper = Vec::with_capacity(cfg.t_grid.len());
        let mut two = Vec::with_capacity(cfg.t_grid.len());
        let mut hw = Vec::with_capacity(cfg.t_grid.len());
        for (k, &t) in cfg.t_grid.iter().enumerate() {
            let lo = vals.partition_point(|&v| v <= median - t) as f64 / m;
            let up = (n - vals.partition_point(|&v| v < median + t)) as f64 / m;
            let p = lo + up;
            lower.push(lo);
            upper.push(up);
            two.push(p);
            let mut h = 3.0 * (p * (1.0 - p) / m).sqrt();
            if k == 0 {
                h += 1.0 / m.sqrt();
            }
            hw.push(h);
        }
        result.push(Tails {
            function: f.name(),
            samples: cfg.samples,
            median,
            t: cfg.t_grid.clone(),
            lower,
            upper,
            two_sided: two,
            half_width: hw,
        });
    }
    Ok(result)
}

/// Sub-Gaussian envelope `B e^{−t²/A}` fitted to a tail table.
#[derive(Clone, Debug, PartialEq)]
pub struct TailFit {
    pub a: f64,
    pub b: f64,
    /// Root-mean-square residual of the log-linear least-squares fit.
    pub residual: f64,
    /// Points with tail at least `10/M` used in the fit.
    pub points: usize,
    /// True when fewer than four usable points exist or the tail does not decay.
    pub degenerate: bool,
    /// Every empirical point (both sides) lies below the envelope plus its half-width.
    pub envelope_pass: bool,
}

/// Fits `log P(|φ − med| ≥ t) ≈ log B − t²/A` by least squares on the
/// reliable points, then raises `B` (at least 1) until the envelope covers them.
pub fn fit_subgaussian(tails: &Tails) -> TailFit {
    let floor = 10.0 / tails.samples as f64;
    let pts: Vec<(f64, f64)> = tails
        .t
        .iter()
        .zip(&tails.two_sided)
        .filter(|(_, &p)| p >= floor && p > 0.0)
        .map(|(&t, &p)| (t * t, p.ln()))
        .collect();
    let degenerate = TailFit { a: 0.0, b: 0.0, residual: f64::NAN, points: pts.len(), degenerate: true, envelope_pass: false };
    if pts.len() < 4 {
        return degenerate;
    }
    let n = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |acc, p| (acc.0 + p.0, acc.1 + p.1));
    let (mx, my) = (sx / n, sy / n);
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    if !(slope < 0.0) {
        return degenerate;
    }
    let intercept = my - slope * mx;
    let residual = (pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum::<f64>() / n).sqrt();
    let a = -1.0 / slope;
    let b = pts.iter().map(|p| (p.1 + p.0 / a).exp()).fold(intercept.exp(), f64::max).max(1.0);
    let env = |t: f64| b * (-t * t / a).exp();
    let envelope_pass = tails.t.iter().enumerate().all(|(k, &t)| {
        let bound = env(t) * (1.0 + 1e-12) + tails.half_width[k];
        tails.lower[k] <= bound && tails.upper[k] <= bound && tails.two_sided[k] <= bound
    });
    TailFit { a, b, residual, points: pts.len(), degenerate: false, envelope_pass }
}

/// Runs the experiment and fits every zoo function.
pub fn concentration_report(cfg: &ExperimentConfig) -> Result<Report> {
    let tails = simulate_tails(cfg)?;
    let fits: Vec<TailFit> = tails.iter().map(fit_subgaussian).collect();
    let ok = fits.iter().zip(&tails).all(|(f, t)| f.envelope_pass || t.two_sided.iter().all(|&p| p == 0.0));
    let mut r = Report::new("two-sided-concentration", Verdict::from_bool(ok))
        .with_value("dimension", cfg.dim as f64)
        .with_value("samples", cfg.samples as f64)
        .with_value("seed", cfg.seed as f64);
    if let Some(c) = cfg.chained_c {
        r.set("chained_c", c);
    }
    for (t, f) in tails.iter().zip(&fits) {
        r.set(&format!("{}.median", t.function), t.median);
        r.set(&format!("{}.A", t.function), f.a);
        r.set(&format!("{}.B", t.function), f.b);
        r.set(&format!("{}.fit_residual", t.function), f.residual);
        if f.degenerate {
            r.note(format!("{}: degenerate fit", t.function));
        }
        let mut table = Table::new(&format!("tails-{}", t.function), &["t", "lower", "upper", "two_sided", "half_width"]);
        for k in 0..t.t.len() {
            table.push(vec![t.t[k], t.lower[k], t.upper[k], t.two_sided[k], t.half_width[k]]);
        }
        r.tables.push(table);
    }
    r.note("A and B are fitted to samples; they are not derived from the chained constant");
    Ok(r)
}
