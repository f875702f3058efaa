//! Gamma-distributed SNRs and sums of independent gammas.
//!
//! Equal scales collapse to a single gamma. Unequal scales use the
//! Moschopoulos mixture: the sum is distributed as `Gamma(rho + K, b0)` where
//! the mixing index `K` has probabilities `w_i = C eta_i`.

use super::special::{gamma_upper_regularized, log_gamma};
use crate::error::{Error, Result};

pub const SERIES_TERM_CAP: usize = 100_000;
pub const DEFAULT_SERIES_TOL: f64 = 1e-12;

/// `X ~ G(a, b)` with density `x^(a-1) e^(-x/b) / (b^a Gamma(a))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaDist {
    pub shape: f64,
    pub scale: f64,
}

impl GammaDist {
    pub fn new(shape: f64, scale: f64) -> Result<Self> {
        if !(shape > 0.0 && shape.is_finite() && scale > 0.0 && scale.is_finite()) {
            return Err(Error::Config(format!("gamma parameters must be positive, got ({shape}, {scale})")));
        }
        Ok(Self { shape, scale })
    }

    pub fn mean(&self) -> f64 {
        self.shape * self.scale
    }

    pub fn variance(&self) -> f64 {
        self.shape * self.scale * self.scale
    }

    /// Same distribution of `k X`.
    pub fn scaled(&self, k: f64) -> Self {
        Self { shape: self.shape, scale: self.scale * k }
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return f64::NEG_INFINITY;
        }
        (self.shape - 1.0) * x.ln() - x / self.scale - self.shape * self.scale.ln() - statrs_ln_gamma(self.shape)
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        self.ln_pdf(x).exp()
    }

    pub fn survival(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        gamma_upper_regularized(self.shape, x / self.scale)
    }

    /// Smallest doubling step `x` with survival below `p`.
    pub fn upper_bound(&self, p: f64) -> f64 {
        let mut x = self.mean() + 8.0 * self.variance().sqrt();
        while self.survival(x) >= p {
            x *= 1.5;
        }
        x
    }

    /// `M(s) = (1 - s b)^(-a)`, defined for `s < 1/b`.
    pub fn mgf(&self, s: f64) -> Result<f64> {
        let limit = 1.0 / self.scale;
        if s >= limit {
            return Err(Error::Divergence { s, limit });
        }
        Ok((-self.shape * (-s * self.scale).ln_1p()).exp())
    }
}

fn statrs_ln_gamma(x: f64) -> f64 {
    log_gamma(x).unwrap_or(f64::NAN)
}

/// Moschopoulos series state for unequal scales.
#[derive(Debug, Clone, PartialEq)]
pub struct MoschopoulosSeries {
    /// `C = prod (b0 / b_k)^(a_k)`.
    pub c: f64,
    pub rho: f64,
    pub b0: f64,
    /// `eta_i`, with `eta_0 = 1`.
    pub eta: Vec<f64>,
    /// `z_j` for `j = 1..`, stored at index `j - 1`.
    pub z: Vec<f64>,
    /// Mixing weights `C eta_i`.
    weights: Vec<f64>,
    /// `sum_{k > i} w_k`.
    tails: Vec<f64>,
    /// Set when the weight recursion hit the term cap before underflowing.
    truncated: bool,
}

impl MoschopoulosSeries {
    fn new(components: &[GammaDist]) -> Result<Self> {
        let rho: f64 = components.iter().map(|g| g.shape).sum();
        let b0 = components.iter().map(|g| g.scale).fold(f64::INFINITY, f64::min);
        let ln_c: f64 = components.iter().map(|g| g.shape * (b0 / g.scale).ln()).sum();
        let c = ln_c.exp();
        if c == 0.0 {
            return Err(Error::Precision(format!("Moschopoulos constant underflows (ln C = {ln_c})")));
        }
        let ratios: Vec<(f64, f64)> = components.iter().map(|g| (g.shape, 1.0 - b0 / g.scale)).collect();
        // t * z_t = sum_k a_k r_k^t
        let tz = |t: usize| -> f64 { ratios.iter().map(|&(a, r)| a * r.powi(t as i32)).sum() };

        let mut tz_cache: Vec<f64> = vec![0.0];
        let mut eta = vec![1.0];
        let mut weights = vec![c];
        let mut truncated = true;
        while eta.len() < SERIES_TERM_CAP {
            let i1 = eta.len();
            if tz_cache.len() <= i1 {
                tz_cache.push(tz(i1));
            }
            let mut acc = 0.0;
            for t in 1..=i1 {
                let v = tz_cache[t];
                if v == 0.0 {
                    break;
                }
                acc += v * eta[i1 - t];
            }
            let next = acc / i1 as f64;
            if !next.is_finite() {
                return Err(Error::Precision("Moschopoulos coefficients overflow".into()));
            }
            let w = c * next;
            eta.push(next);
            weights.push(w);
            if w < 1e-300 && i1 > 1 {
                truncated = false;
                break;
            }
        }
        let z = (1..tz_cache.len()).map(|j| tz_cache[j] / j as f64).collect();
        let mut tails = vec![0.0; weights.len()];
        for i in (0..weights.len().saturating_sub(1)).rev() {
            tails[i] = tails[i + 1] + weights[i + 1];
        }
        Ok(Self { c, rho, b0, eta, z, weights, tails, truncated })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Mixing weights truncated once their remaining mass drops below `tol`.
    pub fn significant_weights(&self, tol: f64) -> &[f64] {
        let n = self.tails.iter().position(|&t| t < tol).map_or(self.weights.len(), |i| i + 1);
        &self.weights[..n]
    }

    fn pdf(&self, x: f64, tol: f64) -> Result<(f64, usize)> {
        if x <= 0.0 {
            return Ok((0.0, 0));
        }
        let u = x / self.b0;
        let ln_u = u.ln();
        // ln of the Gamma(rho + i, b0) density at x, updated incrementally.
        let mut ln_g = (self.rho - 1.0) * x.ln() - u - self.rho * self.b0.ln() - statrs_ln_gamma(self.rho);
        let mut sum = 0.0;
        for (i, (&w, &tail)) in self.weights.iter().zip(&self.tails).enumerate() {
            let g = ln_g.exp();
            sum += w * g;
            let shape = self.rho + i as f64;
            // Beyond the mode in i the component densities decrease, so tail * g bounds the rest.
            if shape - 1.0 >= u && tail * g <= tol * sum {
                return Ok((sum, i + 1));
            }
            ln_g += ln_u - shape.ln();
        }
        if self.truncated {
            return Err(Error::Precision(format!(
                "Moschopoulos series needs more than {SERIES_TERM_CAP} terms at x = {x}"
            )));
        }
        Ok((sum, self.weights.len()))
    }
}

/// Distribution of a sum of independent gamma variables.
#[derive(Debug, Clone, PartialEq)]
pub enum GammaSum {
    Single(GammaDist),
    Series { components: Vec<GammaDist>, series: MoschopoulosSeries },
}

/// Relative scale difference below which scales count as equal.
const EQUAL_SCALE_REL: f64 = 1e-12;

pub fn gamma_sum(components: &[GammaDist]) -> Result<GammaSum> {
    let first = components.first().ok_or_else(|| Error::Config("gamma sum needs at least one component".into()))?;
    for g in components {
        GammaDist::new(g.shape, g.scale)?;
    }
    let equal = components.iter().all(|g| (g.scale - first.scale).abs() <= EQUAL_SCALE_REL * first.scale);
    if equal {
        let shape = components.iter().map(|g| g.shape).sum();
        return Ok(GammaSum::Single(GammaDist { shape, scale: first.scale }));
    }
    Ok(GammaSum::Series { components: components.to_vec(), series: MoschopoulosSeries::new(components)? })
}

impl GammaSum {
    pub fn mean(&self) -> f64 {
        match self {
            GammaSum::Single(g) => g.mean(),
            GammaSum::Series { components, .. } => components.iter().map(GammaDist::mean).sum(),
        }
    }

    /// Smallest shape among the mixture components, which governs behaviour at the origin.
    pub fn origin_shape(&self) -> f64 {
        match self {
            GammaSum::Single(g) => g.shape,
            GammaSum::Series { series, .. } => series.rho,
        }
    }

    /// A point beyond which the survival function is below `p`.
    pub fn upper_bound(&self, p: f64) -> f64 {
        match self {
            GammaSum::Single(g) => g.upper_bound(p),
            GammaSum::Series { components, series } => {
                // Gamma(rho, max b) stochastically dominates the sum.
                let bmax = components.iter().map(|g| g.scale).fold(0.0, f64::max);
                GammaDist { shape: series.rho, scale: bmax }.upper_bound(p)
            }
        }
    }

    /// Density and the number of series terms used (0 for a single gamma).
    pub fn pdf_with_terms(&self, x: f64, tol: f64) -> Result<(f64, usize)> {
        match self {
            GammaSum::Single(g) => Ok((g.pdf(x), 0)),
            GammaSum::Series { series, .. } => series.pdf(x, tol),
        }
    }
}

pub fn gamma_sum_pdf(sum: &GammaSum, x: f64, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::Config("series tolerance must be positive".into()));
    }
    sum.pdf_with_terms(x, tol).map(|(v, _)| v)
}
