//! Exact and closed-form BER of DCSK over Nakagami-m fading.

use std::f64::consts::{PI, SQRT_2};

use super::gamma::{gamma_sum, GammaDist, GammaSum, DEFAULT_SERIES_TOL};
use super::quad::{integrate, Tolerance};
use super::special::{gauss_2f1_special_split, log_gamma, q_function};
use crate::error::{Error, Result};

/// Survival level at which the averaging integral is cut off.
const SURVIVAL_CUTOFF: f64 = 1e-14;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// `Q(sqrt(gamma^2 / (2 gamma + f)))` for segment length `f`.
pub fn conditional_ber(gamma_b: f64, f: f64) -> f64 {
    if gamma_b <= 0.0 {
        return 0.5;
    }
    q_function((gamma_b * gamma_b / (2.0 * gamma_b + f)).sqrt())
}

/// Averages the conditional BER over the SNR distribution `dist`.
pub fn average_ber(dist: &GammaSum, f: f64) -> Result<f64> {
    let upper = dist.upper_bound(SURVIVAL_CUTOFF);
    let mean = dist.mean();
    let tol = Tolerance { abs: 1e-13, rel: 1e-10, max_intervals: 4000 };
    let pdf = |x: f64| -> f64 {
        match dist.pdf_with_terms(x, DEFAULT_SERIES_TOL) {
            Ok((v, _)) => v,
            Err(_) => f64::NAN,
        }
    };
    let shape = dist.origin_shape();
    let split = (0.5 * mean).min(upper);
    let head = if shape < 1.0 {
        // x = t^(1/a) turns the x^(a-1) singularity at the origin into a constant.
        let inv = 1.0 / shape;
        let g = |t: f64| {
            let x = t.powf(inv);
            let jac = inv * t.powf(inv - 1.0);
            conditional_ber(x, f) * pdf(x) * jac
        };
        integrate(g, &[0.0, split.powf(shape)], tol)
    } else {
        integrate(|x| conditional_ber(x, f) * pdf(x), &[0.0, split], tol)
    };
    let head = head.map_err(|e| annotate(e, dist))?;
    let mut breaks = vec![split];
    for p in [mean, 2.0 * mean, upper] {
        if p > *breaks.last().unwrap() {
            breaks.push(p);
        }
    }
    let tail = integrate(|x| conditional_ber(x, f) * pdf(x), &breaks, tol).map_err(|e| annotate(e, dist))?;
    let v = head + tail;
    if !v.is_finite() {
        return Err(Error::Precision(format!("BER average is not finite for {dist:?}")));
    }
    Ok(v.clamp(f64::MIN_POSITIVE, 0.5))
}

fn annotate(e: Error, dist: &GammaSum) -> Error {
    match e {
        Error::Precision(msg) => Error::Precision(format!("{msg} (averaging over mean SNR {:.4e})", dist.mean())),
        other => other,
    }
}

fn check_common(m: f64, paths: usize, f: f64) -> Result<()> {
    if !(m > 0.0 && m.is_finite()) || paths == 0 {
        return Err(Error::Config(format!("need m > 0 and L >= 1, got m={m}, L={paths}")));
    }
    if !(f >= 1.0) {
        return Err(Error::Config(format!("segment length must be >= 1, got {f}")));
    }
    Ok(())
}

/// Single-link SNR distribution `G(mL, (Eb/N0)/(mL))`.
pub fn nc_snr(ebn0_db: f64, m: f64, paths: usize) -> Result<GammaDist> {
    let ml = m * paths as f64;
    GammaDist::new(ml, db_to_linear(ebn0_db) / ml)
}

/// Non-cooperative DCSK BER over `L` Nakagami-m paths.
pub fn exact_ber_nc(ebn0_db: f64, m: f64, paths: usize, f: f64) -> Result<f64> {
    check_common(m, paths, f)?;
    average_ber(&GammaSum::Single(nc_snr(ebn0_db, m, paths)?), f)
}

/// Inputs to the cooperative link budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkParams {
    pub ebn0_db: f64,
    pub m: f64,
    pub paths: usize,
    pub users: usize,
    pub m_r: usize,
    pub m_d: usize,
    pub d_sd: f64,
    pub d_sr: f64,
    pub d_rd: f64,
}

/// Gamma parameters of the S-D, R-D and S-R received SNRs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub a1: f64,
    pub b1: f64,
    pub a2: f64,
    pub b2: f64,
    pub a3: f64,
    pub b3: f64,
}

impl LinkBudget {
    pub fn new(p: &LinkParams) -> Result<Self> {
        if p.users == 0 || p.m_r == 0 || p.m_d == 0 {
            return Err(Error::Config("users and antenna counts must be >= 1".into()));
        }
        if !(p.d_sd > 0.0 && p.d_sr > 0.0 && p.d_rd > 0.0) {
            return Err(Error::Config("distances must be positive".into()));
        }
        if !(p.m > 0.0) || p.paths == 0 {
            return Err(Error::Config("need m > 0 and L >= 1".into()));
        }
        let snr = db_to_linear(p.ebn0_db);
        let ml = p.m * p.paths as f64;
        let n = p.users as f64;
        let (mr, md) = (p.m_r as f64, p.m_d as f64);
        Ok(Self {
            a1: md * ml,
            b1: snr / (2.0 * md * p.d_sd * p.d_sd * ml * n),
            a2: mr * md * ml,
            b2: snr / (2.0 * mr * md * p.d_rd * p.d_rd * ml * n),
            a3: mr * ml,
            b3: snr / (2.0 * mr * p.d_sr * p.d_sr * ml * n),
        })
    }

    /// Budget for a cooperating user pair: the partner acts as a one-antenna
    /// relay sitting at the source-destination distance.
    pub fn cooperative_pair(p: &LinkParams) -> Result<Self> {
        Self::new(&LinkParams { m_r: 1, m_d: 1, d_rd: p.d_sd, ..*p })
    }

    pub fn source_destination(&self) -> GammaDist {
        GammaDist { shape: self.a1, scale: self.b1 }
    }

    pub fn relay_destination(&self) -> GammaDist {
        GammaDist { shape: self.a2, scale: self.b2 }
    }

    pub fn source_relay(&self) -> GammaDist {
        GammaDist { shape: self.a3, scale: self.b3 }
    }

    /// Whether `gamma_D` is a single gamma (`d_SD / d_RD = sqrt(M_R)`).
    pub fn equal_scales(&self) -> bool {
        (self.b1 - self.b2).abs() <= 1e-12 * self.b1
    }

    /// Distribution of `gamma_D = (gamma_SD + gamma_RD) / sqrt 2`.
    pub fn destination_snr(&self) -> Result<GammaSum> {
        gamma_sum(&[self.source_destination().scaled(1.0 / SQRT_2), self.relay_destination().scaled(1.0 / SQRT_2)])
    }
}

/// Error-free relaying: BER of the combined destination SNR.
pub fn exact_ber_cd_ef(budget: &LinkBudget, f: f64) -> Result<f64> {
    average_ber(&budget.destination_snr()?, f)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DfTerms {
    pub ber_sr: f64,
    pub ber_sd: f64,
    pub ber_d: f64,
}

impl DfTerms {
    /// `BER_SR * BER_SD + (1 - BER_SR) * BER_D`.
    pub fn compose(&self) -> f64 {
        self.ber_sr * self.ber_sd + (1.0 - self.ber_sr) * self.ber_d
    }
}

pub fn df_terms(budget: &LinkBudget, f: f64) -> Result<DfTerms> {
    Ok(DfTerms {
        ber_sr: average_ber(&GammaSum::Single(budget.source_relay()), f)?,
        ber_sd: average_ber(&GammaSum::Single(budget.source_destination()), f)?,
        ber_d: exact_ber_cd_ef(budget, f)?,
    })
}

/// Decode-and-forward relaying.
pub fn exact_ber_cd_df(budget: &LinkBudget, f: f64) -> Result<f64> {
    Ok(df_terms(budget, f)?.compose())
}

/// Gamma fit `(a_w, b_w)` for `w = gamma^2 / (2 gamma + f)` when `gamma ~ G(a, b)`.
pub fn approx_fit(a: f64, b: f64, f: f64) -> Result<GammaDist> {
    GammaDist::new(a, b)?;
    let g = a * b;
    let r = (g + 0.5 * f) / (g + f);
    let shape = a * r * r;
    let scale = b * g * (g + f).powi(2) / (2.0 * (g + 0.5 * f).powi(3));
    GammaDist::new(shape, scale).map_err(|_| Error::Precision(format!("degenerate gamma fit for ({a}, {b}, {f})")))
}

/// `(1/pi) int_0^{pi/2} (1 + b_w / (2 sin^2 t))^(-a_w) dt` in closed form.
pub fn craig_closed_form(fit: &GammaDist) -> Result<f64> {
    let (aw, bw) = (fit.shape, fit.scale);
    let z = 2.0 / (2.0 + bw);
    let hyp = gauss_2f1_special_split(aw, z, bw / (2.0 + bw))?;
    let ln_lead = 0.5 * bw.ln() + log_gamma(aw + 0.5)? - log_gamma(aw + 1.0)? - (aw + 0.5) * (0.5 * bw).ln_1p();
    let v = ln_lead.exp() * hyp / (2.0 * (2.0 * PI).sqrt());
    if !v.is_finite() {
        return Err(Error::Precision(format!("closed-form BER not finite for a_w={aw}, b_w={bw}")));
    }
    Ok(v)
}

/// MGF-based closed-form approximation for `gamma ~ G(a, b)`.
pub fn approx_ber(a: f64, b: f64, f: f64) -> Result<f64> {
    craig_closed_form(&approx_fit(a, b, f)?)
}

/// Closed-form approximation of the error-free-relay BER; needs `b1 = b2`.
pub fn approx_ber_cd_ef(budget: &LinkBudget, f: f64) -> Result<f64> {
    if !budget.equal_scales() {
        return Err(Error::Unsupported(format!(
            "closed form requires d_SD/d_RD = sqrt(M_R) (b1 = {:.6e}, b2 = {:.6e})",
            budget.b1, budget.b2
        )));
    }
    approx_ber(budget.a1 + budget.a2, budget.b1 / SQRT_2, f)
}

/// Decode-and-forward composition of the closed-form terms; needs `b1 = b2`.
pub fn approx_ber_cd_df(budget: &LinkBudget, f: f64) -> Result<f64> {
    let ber_d = approx_ber_cd_ef(budget, f)?;
    Ok(DfTerms { ber_sr: approx_ber(budget.a3, budget.b3, f)?, ber_sd: approx_ber(budget.a1, budget.b1, f)?, ber_d }
        .compose())
}
