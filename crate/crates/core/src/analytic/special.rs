//! Special functions used by the BER formulas.
//!
//! `ln Gamma` and `erfc` come from `libm`, the incomplete gamma from `statrs`;
//! the hypergeometric special case `2F1(1, a + 1/2; a + 1; z)` is evaluated here.

use std::f64::consts::{PI, SQRT_2};

use statrs::function::gamma::gamma_ur;

use crate::error::{Error, Result};

const SERIES_CAP: usize = 10_000_000;

pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::Config(format!("log_gamma requires a positive finite argument, got {x}")));
    }
    Ok(libm::lgamma(x))
}

/// Gaussian tail probability `Q(x) = erfc(x / sqrt 2) / 2`.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}

/// Upper regularized incomplete gamma `Gamma(a, x) / Gamma(a)`.
pub(crate) fn gamma_upper_regularized(a: f64, x: f64) -> f64 {
    gamma_ur(a, x)
}

/// `2F1(1, a + 1/2; a + 1; z)` for `a > 0`, `0 <= z < 1`.
///
/// Gauss series away from `z = 1`. Close to 1 with `a (1 - z)` small the
/// series stalls, and the `1 - z` connection formula (with `c - a - b = -1/2`)
///
/// `F = sqrt(pi) G(a+1)/G(a+1/2) (1-z)^(-1/2) z^(-a) - 2a 2F1(1, a+1/2; 3/2; 1-z)`
///
/// is used instead.
pub fn gauss_2f1_special(a: f64, z: f64) -> Result<f64> {
    gauss_2f1_special_split(a, z, 1.0 - z)
}

/// As [`gauss_2f1_special`], with `w = 1 - z` supplied by the caller to keep
/// precision when `z` rounds to 1.
pub(crate) fn gauss_2f1_special_split(a: f64, z: f64, w: f64) -> Result<f64> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::Config(format!("2F1 shape must be positive, got {a}")));
    }
    if !(0.0..=1.0).contains(&z) || !(w > 0.0 && w <= 1.0) {
        return Err(Error::Config(format!("2F1 argument must lie in [0, 1), got {z}")));
    }
    if z <= 0.9 || a * w > 1.0 {
        // term ratio: (a + 1/2 + k) / (a + 1 + k) * z
        series(|k| (a + 0.5 + k) / (a + 1.0 + k) * z)
    } else {
        // term ratio of 2F1(1, a+1/2; 3/2; w): (a + 1/2 + k) / (3/2 + k) * w
        let tail = series(|k| (a + 0.5 + k) / (1.5 + k) * w)?;
        let lead =
            (PI.ln() / 2.0 + libm::lgamma(a + 1.0) - libm::lgamma(a + 0.5) - 0.5 * w.ln() - a * (-w).ln_1p()).exp();
        Ok(lead - 2.0 * a * tail)
    }
}

/// `sum_k t_k` with `t_0 = 1`, `t_{k+1} = t_k * ratio(k)`, stopped at relative term 1e-16.
fn series(ratio: impl Fn(f64) -> f64) -> Result<f64> {
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut comp = 0.0;
    for k in 0..SERIES_CAP {
        term *= ratio(k as f64);
        // Kahan summation; all terms are positive.
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        if term <= 1e-17 * sum {
            return Ok(sum);
        }
    }
    Err(Error::Precision(format!("hypergeometric series did not converge in {SERIES_CAP} terms")))
}
