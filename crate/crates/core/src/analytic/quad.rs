//! Globally adaptive Gauss-Kronrod (7/15) quadrature on finite intervals.

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
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { abs: 1e-13, rel: 1e-11, max_intervals: 4000 }
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    let value = k * h;
    let error = ((k - g) * h).abs();
    Segment { a, b, value, error }
}

/// Integrates `f` over the union of consecutive intervals given by `breaks`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, breaks: &[f64], tol: Tolerance) -> Result<f64> {
    if breaks.len() < 2 {
        return Ok(0.0);
    }
    let mut segs: Vec<Segment> = breaks.windows(2).filter(|w| w[1] > w[0]).map(|w| kronrod(&f, w[0], w[1])).collect();
    loop {
        let total: f64 = segs.iter().map(|s| s.value).sum();
        let err: f64 = segs.iter().map(|s| s.error).sum();
        if !total.is_finite() {
            return Err(Error::Precision("integrand produced a non-finite value".into()));
        }
        if err <= tol.abs.max(tol.rel * total.abs()) {
            return Ok(total);
        }
        if segs.len() >= tol.max_intervals {
            return Err(Error::Precision(format!(
                "quadrature did not converge: estimated error {err:e} after {} intervals",
                segs.len()
            )));
        }
        let (idx, worst) = segs
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, s)| (i, *s))
            .expect("non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            return Err(Error::Precision("quadrature interval underflow".into()));
        }
        segs[idx] = kronrod(&f, worst.a, mid);
        segs.push(kronrod(&f, mid, worst.b));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let v = integrate(|x| 3.0 * x * x, &[0.0, 2.0], Tolerance::default()).unwrap();
        assert!((v - 8.0).abs() < 1e-14);
    }

    #[test]
    fn smooth_functions() {
        let v = integrate(f64::sin, &[0.0, std::f64::consts::PI], Tolerance::default()).unwrap();
        assert!((v - 2.0).abs() < 1e-13);
        let v = integrate(|x| (-x).exp(), &[0.0, 1.0, 50.0], Tolerance::default()).unwrap();
        assert!((v - (1.0 - (-50.0f64).exp())).abs() < 1e-13);
    }

    #[test]
    fn peaked_integrand() {
        let s = 1e-3;
        let g = |x: f64| (-(x - 0.3) * (x - 0.3) / (2.0 * s * s)).exp() / (s * (2.0 * std::f64::consts::PI).sqrt());
        let v = integrate(g, &[0.0, 1.0], Tolerance::default()).unwrap();
        assert!((v - 1.0).abs() < 1e-10, "{v}");
    }

    #[test]
    fn nonconvergence_reported() {
        let tol = Tolerance { max_intervals: 3, ..Tolerance::default() };
        assert!(matches!(integrate(|x| x.sqrt().recip(), &[0.0, 1.0], tol), Err(Error::Precision(_))));
    }
}
