//! Chaotic carrier generation.
//!
//! DCSK transmits segments of a chaotic sample stream. Two one-dimensional maps
//! are offered: the second-order Chebyshev map `c -> 1 - 2c^2`, whose invariant
//! density `1/(pi sqrt(1 - c^2))` has zero mean and variance 1/2, and the
//! logistic map `x -> r x (1 - x)` at `r = 3.9`, a non-conjugate alternative
//! with a heavier-tailed amplitude distribution. Output is rescaled using the
//! invariant moments of the map, not the empirical moments of each frame, so
//! the per-sample energy equals the target only in expectation.

use crate::error::{Error, Result};

const LOGISTIC_R: f64 = 3.9;
// Invariant moments of the r = 3.9 logistic map, from a 4e9-sample ensemble average.
const LOGISTIC_MEAN: f64 = 0.592_503_3;
const LOGISTIC_VAR: f64 = 0.089_519_2;
const CHEBYSHEV_VAR: f64 = 0.5;

pub const DEFAULT_BURN_IN: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ChaosMap {
    #[default]
    Chebyshev2,
    Logistic,
}

impl ChaosMap {
    fn step(self, x: f64) -> f64 {
        match self {
            ChaosMap::Chebyshev2 => 1.0 - 2.0 * x * x,
            ChaosMap::Logistic => LOGISTIC_R * x * (1.0 - x),
        }
    }

    /// Maps a state in `[-1, 1)` onto the map's own domain.
    fn state_from_unit(self, y: f64) -> f64 {
        match self {
            ChaosMap::Chebyshev2 => y,
            ChaosMap::Logistic => 0.5 * (y + 1.0),
        }
    }

    fn is_fixed_point(self, x: f64) -> bool {
        (self.step(x) - x).abs() <= 4.0 * f64::EPSILON
    }

    /// Affine map from raw iterate to a zero-mean, unit-energy sample.
    fn normalization(self) -> (f64, f64) {
        match self {
            ChaosMap::Chebyshev2 => (0.0, 1.0 / CHEBYSHEV_VAR.sqrt()),
            ChaosMap::Logistic => (LOGISTIC_MEAN, 1.0 / LOGISTIC_VAR.sqrt()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ChaosConfig {
    pub map: ChaosMap,
    pub seed: u64,
    pub burn_in: usize,
}

impl ChaosConfig {
    pub fn new(map: ChaosMap, seed: u64) -> Self {
        Self { map, seed, burn_in: DEFAULT_BURN_IN }
    }

    pub fn with_burn_in(mut self, burn_in: usize) -> Self {
        self.burn_in = burn_in;
        self
    }

    /// Initial state in `[-1, 1)`: the top 53 bits of the seed, scaled.
    pub fn initial_state(&self) -> f64 {
        (self.seed >> 11) as f64 * (2.0 / (1u64 << 53) as f64) - 1.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChaoticSequence {
    pub samples: Vec<f64>,
    pub target_energy: f64,
}

impl ChaoticSequence {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    pub fn energy_per_sample(&self) -> f64 {
        self.samples.iter().map(|c| c * c).sum::<f64>() / self.samples.len() as f64
    }
}

/// Stateful sample source; `generate` is a thin wrapper over it.
#[derive(Debug, Clone)]
pub struct ChaosGenerator {
    map: ChaosMap,
    state: f64,
    offset: f64,
    scale: f64,
}

impl ChaosGenerator {
    pub fn new(config: &ChaosConfig, target_energy: f64) -> Result<Self> {
        if !(target_energy > 0.0 && target_energy.is_finite()) {
            return Err(Error::Config(format!("target energy must be positive, got {target_energy}")));
        }
        let map = config.map;
        let mut state = map.state_from_unit(config.initial_state());
        if map.is_fixed_point(state) {
            return Err(Error::InvalidSeed { state });
        }
        for _ in 0..config.burn_in {
            let next = map.step(state);
            if next == state {
                return Err(Error::InvalidSeed { state });
            }
            state = next;
        }
        if map.is_fixed_point(state) {
            return Err(Error::InvalidSeed { state });
        }
        let (offset, unit) = map.normalization();
        Ok(Self { map, state, offset, scale: unit * target_energy.sqrt() })
    }

    /// Next normalized sample. Fails if the orbit has collapsed onto a fixed point.
    pub fn next_sample(&mut self) -> Result<f64> {
        let next = self.map.step(self.state);
        if next == self.state {
            return Err(Error::InvalidSeed { state: next });
        }
        self.state = next;
        Ok((next - self.offset) * self.scale)
    }

    pub fn fill(&mut self, out: &mut [f64]) -> Result<()> {
        for v in out.iter_mut() {
            *v = self.next_sample()?;
        }
        Ok(())
    }
}

/// `length` samples after discarding `burn_in` iterates, scaled to `target_energy` per sample.
pub fn generate(config: &ChaosConfig, length: usize, target_energy: f64) -> Result<ChaoticSequence> {
    if length == 0 {
        return Err(Error::Config("sequence length must be at least 1".into()));
    }
    let mut gen = ChaosGenerator::new(config, target_energy)?;
    let mut samples = vec![0.0; length];
    gen.fill(&mut samples)?;
    Ok(ChaoticSequence { samples, target_energy })
}
