//! BER estimation: block loops, stopping rule, Wilson intervals and sweeps.
//!
//! Blocks are simulated in parallel in fixed-size rounds, then scanned in
//! block order against the stopping rule. Every block draws from streams keyed
//! by `(seed, point, block)`, so the result does not depend on the thread count.

use rand::Rng;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::rng::{StreamKey, StreamRole};
use crate::system::{LinkSimulator, SystemConfig};

const ROUND_BLOCKS: u64 = 1024;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoppingRule {
    pub min_errors: u64,
    pub max_bits: u64,
    pub confidence: f64,
}

impl Default for StoppingRule {
    fn default() -> Self {
        Self { min_errors: 100, max_bits: 100_000_000, confidence: 0.95 }
    }
}

impl StoppingRule {
    pub fn validate(&self, two_beta: usize) -> Result<()> {
        if self.min_errors < 1 {
            return Err(Error::Config("min_errors must be >= 1".into()));
        }
        if self.max_bits < two_beta as u64 {
            return Err(Error::Config(format!("max_bits must be >= 2beta = {two_beta}")));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(Error::Config(format!("confidence must lie in (0, 1), got {}", self.confidence)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BerPoint {
    pub ebn0_db: f64,
    pub bits: u64,
    pub errors: u64,
    pub ber: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// No errors observed: only `ci_high` is informative.
    pub upper_bound_only: bool,
}

impl BerPoint {
    pub fn from_counts(ebn0_db: f64, errors: u64, bits: u64, confidence: f64) -> Self {
        let (ci_low, ci_high) = wilson_interval(errors, bits, confidence);
        let ber = if bits == 0 { 0.0 } else { errors as f64 / bits as f64 };
        Self { ebn0_db, bits, errors, ber, ci_low, ci_high, upper_bound_only: errors == 0 }
    }

    pub fn contains(&self, p: f64) -> bool {
        self.ci_low <= p && p <= self.ci_high
    }
}

/// Wilson score interval for `errors` successes out of `n` trials.
pub fn wilson_interval(errors: u64, n: u64, confidence: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let z = Normal::standard().inverse_cdf(0.5 + 0.5 * confidence);
    let n_f = n as f64;
    let p = errors as f64 / n_f;
    let z2 = z * z;
    let denom = 1.0 + z2 / n_f;
    let centre = (p + z2 / (2.0 * n_f)) / denom;
    let half = z / denom * (p * (1.0 - p) / n_f + z2 / (4.0 * n_f * n_f)).sqrt();
    // Clamp so the estimate always lies inside despite rounding at p = 0 or 1.
    ((centre - half).clamp(0.0, p), (centre + half).clamp(p, 1.0))
}

/// Estimates the BER of `config` with blocks keyed under point index 0.
pub fn estimate_ber(config: &SystemConfig, rule: &StoppingRule, master_seed: u64) -> Result<BerPoint> {
    estimate_ber_at(config, rule, master_seed, 0)
}

/// As [`estimate_ber`], with an explicit point index for the stream keys.
pub fn estimate_ber_at(config: &SystemConfig, rule: &StoppingRule, master_seed: u64, point: u64) -> Result<BerPoint> {
    rule.validate(config.two_beta)?;
    let sim = LinkSimulator::new(config.clone())?;
    let users = config.users;
    let bits_per_block = users as u64;

    let run = |block: u64| -> Result<u64> {
        let key = StreamKey::new(master_seed, point, block);
        let mut rng = key.stream(StreamRole::Bits);
        let bits: Vec<bool> = (0..users).map(|_| rng.random()).collect();
        let decided = sim.run_block(&bits, key)?;
        Ok(bits.iter().zip(&decided).filter(|(a, b)| a != b).count() as u64)
    };

    let (mut bits, mut errors) = (0u64, 0u64);
    let mut next = 0u64;
    'rounds: while errors < rule.min_errors && bits < rule.max_bits {
        let remaining = (rule.max_bits - bits).div_ceil(bits_per_block);
        let count = remaining.min(ROUND_BLOCKS);
        let round: Vec<u64> = (next..next + count).into_par_iter().map(run).collect::<Result<_>>()?;
        next += count;
        for e in round {
            bits += bits_per_block;
            errors += e;
            if errors >= rule.min_errors || bits >= rule.max_bits {
                break 'rounds;
            }
        }
    }
    Ok(BerPoint::from_counts(config.ebn0_db, errors, bits, rule.confidence))
}

/// Which analytic curves to attach to a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Overlays {
    pub exact: bool,
    pub approx: bool,
}

#[derive(Debug)]
pub struct CurvePoint {
    pub ebn0_db: f64,
    /// `None` when simulation was not requested.
    pub sim: Option<Result<BerPoint>>,
    pub exact: Option<Result<f64>>,
    pub approx: Option<Result<f64>>,
}

#[derive(Debug, Default)]
pub struct BerCurve {
    pub points: Vec<CurvePoint>,
}

impl BerCurve {
    pub fn exact_values(&self) -> Vec<Option<f64>> {
        self.points.iter().map(|p| p.exact.as_ref().and_then(|r| r.as_ref().ok().copied())).collect()
    }

    pub fn sim_points(&self) -> Vec<Option<BerPoint>> {
        self.points.iter().map(|p| p.sim.as_ref().and_then(|r| r.as_ref().ok().copied())).collect()
    }
}

/// Runs every grid point; a failing point is recorded, not propagated.
///
/// `rule = None` skips simulation and evaluates only the requested overlays.
pub fn sweep(
    template: &SystemConfig,
    grid: &[f64],
    rule: Option<&StoppingRule>,
    master_seed: u64,
    overlays: Overlays,
) -> Result<BerCurve> {
    if grid.is_empty() {
        return Err(Error::Config("Eb/N0 grid is empty".into()));
    }
    let points = grid
        .iter()
        .enumerate()
        .map(|(i, &ebn0_db)| {
            let cfg = SystemConfig { ebn0_db, ..template.clone() };
            CurvePoint {
                ebn0_db,
                sim: rule.map(|r| estimate_ber_at(&cfg, r, master_seed, i as u64)),
                exact: overlays.exact.then(|| cfg.exact_ber()),
                approx: overlays.approx.then(|| cfg.approx_ber()),
            }
        })
        .collect();
    Ok(BerCurve { points })
}

/// Inclusive arithmetic grid `start, start + step, ...` up to `stop`.
pub fn ebn0_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !start.is_finite() || !stop.is_finite() || stop < start {
        return Err(Error::Config(format!("invalid Eb/N0 grid {start}:{step}:{stop}")));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| start + i as f64 * step).collect())
}
