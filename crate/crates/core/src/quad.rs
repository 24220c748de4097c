//! Adaptive Gauss–Kronrod (7/15) quadrature, plus semi-infinite integration by
//! geometrically growing blocks with a divergence test.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_0,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub abs_error: f64,
}

fn kronrod_rule<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut gauss = fc * WG[3];
    let mut kronrod = fc * WGK[7];
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = h * x;
        let s = f(c - dx) + f(c + dx);
        kronrod += w * s;
        // Gauss nodes sit at the odd Kronrod positions.
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Integrates `f` over the finite interval `[a, b]`.
///
/// The integrand is never evaluated at the endpoints, so integrable endpoint
/// singularities are tolerated.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Integral {
    if a == b {
        return Integral { value: 0.0, abs_error: 0.0 };
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    // Work list of intervals, bisecting the one with the largest error.
    let mut pieces = vec![{
        let (v, e) = kronrod_rule(&f, lo, hi);
        (lo, hi, v, e)
    }];
    for _ in 0..2000 {
        let total: f64 = pieces.iter().map(|p| p.2).sum();
        let err: f64 = pieces.iter().map(|p| p.3).sum();
        if !total.is_finite() || err <= abs_tol.max(rel_tol * total.abs()) {
            break;
        }
        let (idx, _) = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty");
        let (l, r, _, _) = pieces.swap_remove(idx);
        let m = 0.5 * (l + r);
        if m <= l || m >= r {
            break;
        }
        let (v1, e1) = kronrod_rule(&f, l, m);
        let (v2, e2) = kronrod_rule(&f, m, r);
        pieces.push((l, m, v1, e1));
        pieces.push((m, r, v2, e2));
    }
    let value: f64 = pieces.iter().map(|p| p.2).sum();
    let abs_error: f64 = pieces.iter().map(|p| p.3).sum();
    Integral { value: sign * value, abs_error }
}

/// Integrates `f` over `(a, ∞)` using blocks of width `scale * 2^k`.
///
/// Returns [`Error::Divergent`] if the block contributions stop shrinking or
/// the integrand produces non-finite values.
pub fn integrate_upper<F: Fn(f64) -> f64>(f: F, a: f64, scale: f64, rel_tol: f64) -> Result<Integral> {
    let mut total = 0.0;
    let mut err = 0.0;
    let mut left = a;
    let mut width = scale;
    let mut quiet = 0;
    let mut prev = f64::INFINITY;
    let mut growing = 0;
    for k in 0..80 {
        let right = left + width;
        let block = integrate(&f, left, right, 1e-300, rel_tol * 0.1);
        if !block.value.is_finite() {
            return Err(Error::divergent(format!("non-finite integrand on ({left}, {right})")));
        }
        total += block.value;
        err += block.abs_error;
        let mag = block.value.abs();
        if mag <= 1e-17 * total.abs() || mag < 1e-300 {
            quiet += 1;
        } else {
            quiet = 0;
        }
        if k >= 6 && quiet >= 2 {
            return Ok(Integral { value: total, abs_error: err });
        }
        if k >= 8 && mag >= 0.9 * prev && mag > 1e-12 * total.abs() {
            growing += 1;
            if growing >= 4 {
                return Err(Error::divergent(format!(
                    "tail contributions do not decay beyond {left}"
                )));
            }
        } else {
            growing = 0;
        }
        prev = mag;
        left = right;
        width *= 2.0;
        if !left.is_finite() {
            break;
        }
    }
    Err(Error::divergent("tail contributions did not settle".to_string()))
}

/// Integrates `f` over `(-∞, b)`.
pub fn integrate_lower<F: Fn(f64) -> f64>(f: F, b: f64, scale: f64, rel_tol: f64) -> Result<Integral> {
    integrate_upper(|u| f(-u), -b, scale, rel_tol)
}

/// Integrates `f` over the whole real line, splitting at `center`.
pub fn integrate_line<F: Fn(f64) -> f64>(f: F, center: f64, scale: f64, rel_tol: f64) -> Result<Integral> {
    let up = integrate_upper(&f, center, scale, rel_tol)?;
    let down = integrate_lower(&f, center, scale, rel_tol)?;
    Ok(Integral {
        value: up.value + down.value,
        abs_error: up.abs_error + down.abs_error,
    })
}

/// Finds `x` in `[lo, hi]` with `f(x) = 0` for a monotone `f` that changes sign.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let flo = f(lo);
    let increasing = flo < 0.0;
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= tol {
            break;
        }
        let v = f(mid);
        if (v < 0.0) == increasing {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let r = integrate(|x| x * x * x - 2.0 * x + 1.0, -1.0, 2.0, 1e-14, 1e-14);
        // x^4/4 - x^2 + x on [-1, 2] = (4 - 4 + 2) - (1/4 - 1 - 1) = 3.75
        assert!((r.value - 3.75).abs() < 1e-13);
    }

    #[test]
    fn exponential_tail() {
        let r = integrate_upper(|x| (-x).exp(), 0.0, 1.0, 1e-12).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn flat_integrand_diverges() {
        assert!(integrate_upper(|_| 0.5, 0.0, 1.0, 1e-10).is_err());
        assert!(integrate_upper(|x: f64| x.exp() * (-0.5 * x).exp(), 0.0, 1.0, 1e-10).is_err());
    }

    #[test]
    fn gaussian_line() {
        let r = integrate_line(|x: f64| (-0.5 * x * x).exp(), 0.0, 1.0, 1e-12).unwrap();
        assert!((r.value - (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-11);
    }

    #[test]
    fn bisect_sqrt() {
        let x = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-15);
        assert!((x - 2f64.sqrt()).abs() < 1e-14);
    }
}
