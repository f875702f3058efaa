//! Nakagami-m block-fading multipath channel with AWGN.

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::error::{config, Result};

/// Per-link multipath power-delay profile. All paths share the same `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct FadingProfile {
    pub m: f64,
    pub omegas: Vec<f64>,
    pub delays: Vec<usize>,
}

impl FadingProfile {
    /// `paths` equal-power taps at delays `0, 1, .., paths-1`.
    pub fn uniform(m: f64, paths: usize) -> Result<Self> {
        if paths == 0 {
            return config("path count must be >= 1");
        }
        Self::new(m, vec![1.0 / paths as f64; paths], (0..paths).collect())
    }

    pub fn new(m: f64, omegas: Vec<f64>, delays: Vec<usize>) -> Result<Self> {
        let p = Self { m, omegas, delays };
        p.validate()?;
        Ok(p)
    }

    pub fn paths(&self) -> usize {
        self.omegas.len()
    }

    pub fn max_delay(&self) -> usize {
        self.delays.last().copied().unwrap_or(0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.m > 0.0 && self.m.is_finite()) {
            return config(format!("Nakagami m must be positive, got {}", self.m));
        }
        let l = self.omegas.len();
        if l == 0 {
            return config("path count must be >= 1");
        }
        if self.delays.len() != l {
            return config(format!("{} path powers but {} delays", l, self.delays.len()));
        }
        if self.omegas.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
            return config("path powers must be positive");
        }
        let total: f64 = self.omegas.iter().sum();
        if (total - 1.0).abs() >= 1e-12 {
            return config(format!("path powers must sum to 1, got {total}"));
        }
        // Equal m on every path plus a uniform scale Omega_i/m forces equal powers.
        let first = self.omegas[0];
        if self.omegas.iter().any(|&w| (w - first).abs() > 1e-12) {
            return config("path powers must be equal (uniform scale Omega_i/m with common m)");
        }
        if self.delays[0] != 0 {
            return config("first path delay must be 0");
        }
        if self.delays.windows(2).any(|d| d[1] <= d[0]) {
            return config("path delays must be strictly increasing");
        }
        Ok(())
    }
}

/// Tap gains and integer delays for one block.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub taps: Vec<(f64, usize)>,
}

impl ChannelRealization {
    pub fn max_delay(&self) -> usize {
        self.taps.iter().map(|t| t.1).max().unwrap_or(0)
    }

    pub fn energy(&self) -> f64 {
        self.taps.iter().map(|(a, _)| a * a).sum()
    }
}

/// `alpha_i = sqrt(g_i)`, `g_i ~ Gamma(m, Omega_i / m)`.
pub fn draw_realization<R: Rng + ?Sized>(profile: &FadingProfile, rng: &mut R) -> ChannelRealization {
    let taps = profile
        .omegas
        .iter()
        .zip(&profile.delays)
        .map(|(&omega, &d)| {
            let g = Gamma::new(profile.m, omega / profile.m).expect("validated profile").sample(rng);
            (g.sqrt(), d)
        })
        .collect();
    ChannelRealization { taps }
}

/// Adds `amplitude * sum_i alpha_i s[j - tau_i]` into `out`, truncating the tail.
pub fn convolve_add(out: &mut [f64], signal: &[f64], realization: &ChannelRealization, amplitude: f64) {
    for &(alpha, delay) in &realization.taps {
        let g = amplitude * alpha;
        if delay >= out.len() {
            continue;
        }
        for (o, s) in out[delay..].iter_mut().zip(signal) {
            *o += g * s;
        }
    }
}

/// Adds zero-mean Gaussian noise of variance `n0 / 2` per sample.
pub fn add_awgn<R: Rng + ?Sized>(out: &mut [f64], n0: f64, rng: &mut R) {
    if n0 <= 0.0 {
        return;
    }
    let sigma = (0.5 * n0).sqrt();
    for v in out.iter_mut() {
        let z: f64 = StandardNormal.sample(rng);
        *v += sigma * z;
    }
}

/// `r_j = sqrt(path_loss) * sum_i alpha_i s_{j - tau_i} + n_j`, same length as `signal`.
pub fn propagate<R: Rng + ?Sized>(
    signal: &[f64],
    realization: &ChannelRealization,
    path_loss: f64,
    n0: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if signal.len() < realization.max_delay() {
        return config(format!(
            "signal of {} samples shorter than channel delay {}",
            signal.len(),
            realization.max_delay()
        ));
    }
    let mut out = vec![0.0; signal.len()];
    convolve_add(&mut out, signal, realization, path_loss.sqrt());
    add_awgn(&mut out, n0, rng);
    Ok(out)
}
