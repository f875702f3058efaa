//! NC / CC / CD topologies: slot scheduling, relaying and equal-gain combining.
//!
//! Energies follow the per-channel convention of the link budget: a user bit
//! carries `E_b`, half of it in each slot when a relay (or partner) takes part.
//! In slot 1 each of the `M_D` source-destination channels carries
//! `E_b / (2 M_D)`, and in slot 2 each of the `M_R M_D` relay-destination
//! channels carries `E_b / (2 M_R M_D)`. In the cooperative topologies each
//! user's link budget holds a `1/n` share of `E_b/N0`. Relay antennas transmit
//! in orthogonal sub-slots, so every relay-destination antenna pair is a
//! separately combined diversity branch.

use std::f64::consts::SQRT_2;

use rand::RngCore;
use rand_chacha::ChaCha8Rng;

use crate::analytic::{
    approx_ber, approx_ber_cd_df, approx_ber_cd_ef, db_to_linear, exact_ber_cd_df, exact_ber_cd_ef, exact_ber_nc,
    nc_snr, LinkBudget, LinkParams,
};
use crate::channel::{add_awgn, convolve_add, draw_realization, ChannelRealization, FadingProfile};
use crate::chaos::{ChaosConfig, ChaosGenerator, ChaosMap, DEFAULT_BURN_IN};
use crate::error::{Error, Result};
use crate::modem::gml_detect;
use crate::rng::{StreamKey, StreamRole};
use crate::spreading::{add_user_signal, segment_length, walsh, WalshMatrix};

/// Noise spectral density used by the simulator; energies scale against it.
pub const N0: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Topology {
    /// Direct transmission only.
    Nc,
    /// Two users relay each other's bits.
    Cc,
    /// Dedicated multi-antenna relay.
    Cd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Protocol {
    /// Relay forwards the true bits.
    Ef,
    /// Relay forwards a user's bit only if it decoded it correctly.
    Df,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub topology: Topology,
    pub protocol: Protocol,
    pub users: usize,
    pub m_r: usize,
    pub m_d: usize,
    pub d_sd: f64,
    pub d_sr: f64,
    pub d_rd: f64,
    pub fading: FadingProfile,
    pub two_beta: usize,
    pub ebn0_db: f64,
    pub chaos_map: ChaosMap,
    /// Keeps the relay (or partner) silent in slot 2 regardless of protocol.
    pub force_relay_idle: bool,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            topology: Topology::Cd,
            protocol: Protocol::Ef,
            users: 2,
            m_r: 1,
            m_d: 1,
            d_sd: 1.0,
            d_sr: 1.0,
            d_rd: 1.0,
            fading: FadingProfile::uniform(1.0, 2).expect("valid default profile"),
            two_beta: 128,
            ebn0_db: 10.0,
            chaos_map: ChaosMap::Chebyshev2,
            force_relay_idle: false,
        }
    }
}

/// Per user-bit energy allocation in units of `E_b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyAudit {
    pub slot1: f64,
    pub slot2: f64,
    pub per_sd_channel: f64,
    pub per_sr_channel: f64,
    pub per_rd_channel: f64,
    /// Fraction of `E_b/N0` in each user's link budget.
    pub user_share: f64,
}

impl EnergyAudit {
    pub fn total(&self) -> f64 {
        self.slot1 + self.slot2
    }
}

/// Relay state for one user after slot 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelayDecision {
    Zero,
    One,
    Idle,
}

/// Received waveforms and relay decisions for one block.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SlotTranscript {
    /// Slot 1 at each destination antenna.
    pub destination_slot1: Vec<Vec<f64>>,
    /// Slot 1 at each relay antenna (or at each partner for CC).
    pub relay_slot1: Vec<Vec<f64>>,
    /// Slot 2 per relay-destination antenna pair, relay-antenna major.
    pub destination_slot2: Vec<Vec<f64>>,
    pub relay_decisions: Vec<RelayDecision>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockOutcome {
    pub decisions: Vec<bool>,
    pub transcript: Option<SlotTranscript>,
}

/// Mean received SNR per channel for each link class.
#[derive(Debug, Clone, Copy, PartialEq)]
struct ChannelSnrs {
    sd: f64,
    sr: f64,
    rd: f64,
}

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        if self.users == 0 {
            return Err(Error::Config("at least one user is required".into()));
        }
        if self.m_r == 0 || self.m_d == 0 {
            return Err(Error::Config("antenna counts must be >= 1".into()));
        }
        for (name, d) in [("d_sd", self.d_sd), ("d_sr", self.d_sr), ("d_rd", self.d_rd)] {
            if !(d > 0.0 && d.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {d}")));
            }
        }
        if !self.ebn0_db.is_finite() {
            return Err(Error::Config("Eb/N0 must be finite".into()));
        }
        self.fading.validate()?;
        // Reference and data halves each hold a whole number of Walsh chips.
        if !self.two_beta.is_multiple_of(2 * self.walsh_order()) {
            return Err(Error::Config(format!(
                "two_beta = {} must be a multiple of {} for {} users",
                self.two_beta,
                2 * self.walsh_order(),
                self.users
            )));
        }
        let f = segment_length(self.two_beta, self.walsh_order())?;
        if self.fading.max_delay() >= f {
            return Err(Error::Config(format!(
                "maximum path delay {} must be shorter than the segment length {f}",
                self.fading.max_delay()
            )));
        }
        if self.topology == Topology::Cc && self.users != 2 {
            return Err(Error::Unsupported(format!("CC topology needs exactly 2 users, got {}", self.users)));
        }
        Ok(())
    }

    pub fn walsh_order(&self) -> usize {
        2 * self.users
    }

    /// Carrier segment length `f = 2beta / 2n`.
    pub fn segment_length(&self) -> Result<usize> {
        segment_length(self.two_beta, self.walsh_order())
    }

    pub fn link_params(&self) -> LinkParams {
        LinkParams {
            ebn0_db: self.ebn0_db,
            m: self.fading.m,
            paths: self.fading.paths(),
            users: self.users,
            m_r: self.m_r,
            m_d: self.m_d,
            d_sd: self.d_sd,
            d_sr: self.d_sr,
            d_rd: self.d_rd,
        }
    }

    /// The analytic budget matching this topology (`None` for NC).
    pub fn link_budget(&self) -> Result<Option<LinkBudget>> {
        match self.topology {
            Topology::Nc => Ok(None),
            Topology::Cd => LinkBudget::new(&self.link_params()).map(Some),
            Topology::Cc => LinkBudget::cooperative_pair(&self.link_params()).map(Some),
        }
    }

    /// Exact analytic BER for this configuration.
    pub fn exact_ber(&self) -> Result<f64> {
        self.validate()?;
        let f = self.segment_length()? as f64;
        match (self.link_budget()?, self.protocol) {
            (None, _) => exact_ber_nc(self.ebn0_db, self.fading.m, self.fading.paths(), f),
            (Some(b), Protocol::Ef) => exact_ber_cd_ef(&b, f),
            (Some(b), Protocol::Df) => exact_ber_cd_df(&b, f),
        }
    }

    /// Closed-form approximation; `Unsupported` when the branch scales differ.
    pub fn approx_ber(&self) -> Result<f64> {
        self.validate()?;
        let f = self.segment_length()? as f64;
        match (self.link_budget()?, self.protocol) {
            (None, _) => {
                let g = nc_snr(self.ebn0_db, self.fading.m, self.fading.paths())?;
                approx_ber(g.shape, g.scale, f)
            }
            (Some(b), Protocol::Ef) => approx_ber_cd_ef(&b, f),
            (Some(b), Protocol::Df) => approx_ber_cd_df(&b, f),
        }
    }

    fn channel_snrs(&self) -> ChannelSnrs {
        let a = energy_audit(self);
        let snr = db_to_linear(self.ebn0_db) * a.user_share / N0;
        // CC: the partner relays from the source side, at the S-D distance.
        let d_relay = if self.topology == Topology::Cc { self.d_sd } else { self.d_rd };
        ChannelSnrs {
            sd: snr * a.per_sd_channel / (self.d_sd * self.d_sd),
            sr: snr * a.per_sr_channel / (self.d_sr * self.d_sr),
            rd: snr * a.per_rd_channel / (d_relay * d_relay),
        }
    }
}

/// Energy per user bit, split across slots and channels.
pub fn energy_audit(config: &SystemConfig) -> EnergyAudit {
    match config.topology {
        Topology::Nc => EnergyAudit {
            slot1: 1.0,
            slot2: 0.0,
            per_sd_channel: 1.0,
            per_sr_channel: 0.0,
            per_rd_channel: 0.0,
            user_share: 1.0,
        },
        Topology::Cc => EnergyAudit {
            slot1: 0.5,
            slot2: 0.5,
            per_sd_channel: 0.5,
            per_sr_channel: 0.5,
            per_rd_channel: 0.5,
            user_share: 1.0 / config.users as f64,
        },
        Topology::Cd => {
            let (mr, md) = (config.m_r as f64, config.m_d as f64);
            EnergyAudit {
                slot1: 0.5,
                slot2: 0.5,
                per_sd_channel: 0.5 / md,
                per_sr_channel: 0.5 / mr,
                per_rd_channel: 0.5 / (mr * md),
                user_share: 1.0 / config.users as f64,
            }
        }
    }
}

/// Prepared per-configuration state, reused across blocks.
#[derive(Debug, Clone)]
pub struct LinkSimulator {
    config: SystemConfig,
    walsh: WalshMatrix,
    f: usize,
    snrs: ChannelSnrs,
}

struct BlockStreams {
    carrier: ChaCha8Rng,
    fading: ChaCha8Rng,
    noise: ChaCha8Rng,
    relay_noise: ChaCha8Rng,
}

impl LinkSimulator {
    pub fn new(config: SystemConfig) -> Result<Self> {
        config.validate()?;
        let walsh = walsh(config.walsh_order())?;
        let f = config.segment_length()?;
        let snrs = config.channel_snrs();
        Ok(Self { config, walsh, f, snrs })
    }

    pub fn config(&self) -> &SystemConfig {
        &self.config
    }

    /// Runs one transmission period; returns one decision per user.
    pub fn run_block(&self, bits: &[bool], key: StreamKey) -> Result<Vec<bool>> {
        Ok(self.simulate(bits, key, false)?.decisions)
    }

    /// As [`run_block`](Self::run_block), also returning every received waveform.
    pub fn run_block_with_transcript(&self, bits: &[bool], key: StreamKey) -> Result<BlockOutcome> {
        self.simulate(bits, key, true)
    }

    fn amplitude(&self, channel_snr: f64) -> f64 {
        // Composed symbols carry unit energy per sample, i.e. 2beta per symbol.
        (channel_snr * N0 / self.config.two_beta as f64).sqrt()
    }

    fn carrier(&self, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
        let mut seg = vec![0.0; self.f];
        loop {
            let cfg = ChaosConfig { map: self.config.chaos_map, seed: rng.next_u64(), burn_in: DEFAULT_BURN_IN };
            match ChaosGenerator::new(&cfg, 1.0).and_then(|mut g| g.fill(&mut seg)) {
                Ok(()) => return Ok(seg),
                Err(Error::InvalidSeed { .. }) => continue,
                Err(e) => return Err(e),
            }
        }
    }

    /// Unit-energy-per-sample composed symbols, one per listed user.
    fn compose(&self, users: &[(usize, bool)], rng: &mut ChaCha8Rng) -> Result<Vec<Vec<f64>>> {
        users
            .iter()
            .map(|&(u, bit)| {
                let seg = self.carrier(rng)?;
                let mut x = vec![0.0; self.config.two_beta];
                add_user_signal(&mut x, u, bit, &seg, &self.walsh, 1.0)?;
                Ok(x)
            })
            .collect()
    }

    fn draw(&self, rng: &mut ChaCha8Rng, count: usize) -> Vec<ChannelRealization> {
        (0..count).map(|_| draw_realization(&self.config.fading, rng)).collect()
    }

    /// One receive antenna: superposition of `signals[i]` through `channels[i]`, plus noise.
    fn receive(
        &self,
        signals: &[&[f64]],
        channels: &[&ChannelRealization],
        amplitude: f64,
        rng: &mut ChaCha8Rng,
    ) -> Vec<f64> {
        let mut out = vec![0.0; self.config.two_beta];
        for (s, h) in signals.iter().zip(channels) {
            convolve_add(&mut out, s, h, amplitude);
        }
        add_awgn(&mut out, N0, rng);
        out
    }

    fn gml(&self, rx: &[f64], user: usize) -> Result<f64> {
        Ok(gml_detect(rx, user, &self.walsh, self.f)?.value)
    }

    fn streams(key: StreamKey) -> BlockStreams {
        BlockStreams {
            carrier: key.stream(StreamRole::Carrier),
            fading: key.stream(StreamRole::Fading),
            noise: key.stream(StreamRole::Noise),
            relay_noise: key.stream(StreamRole::RelayNoise),
        }
    }

    fn simulate(&self, bits: &[bool], key: StreamKey, record: bool) -> Result<BlockOutcome> {
        let n = self.config.users;
        if bits.len() != n {
            return Err(Error::Config(format!("expected {n} bits per block, got {}", bits.len())));
        }
        match self.config.topology {
            Topology::Nc => self.simulate_nc(bits, key, record),
            Topology::Cd => self.simulate_cd(bits, key, record),
            Topology::Cc => self.simulate_cc(bits, key, record),
        }
    }

    fn simulate_nc(&self, bits: &[bool], key: StreamKey, record: bool) -> Result<BlockOutcome> {
        let mut s = Self::streams(key);
        let tagged: Vec<(usize, bool)> = bits.iter().enumerate().map(|(i, &b)| (i + 1, b)).collect();
        let symbols = self.compose(&tagged, &mut s.carrier)?;
        let h = self.draw(&mut s.fading, bits.len());
        let sig: Vec<&[f64]> = symbols.iter().map(Vec::as_slice).collect();
        let ch: Vec<&ChannelRealization> = h.iter().collect();
        let rx = self.receive(&sig, &ch, self.amplitude(self.snrs.sd), &mut s.noise);
        let decisions = (1..=bits.len()).map(|u| Ok(self.gml(&rx, u)? > 0.0)).collect::<Result<_>>()?;
        let transcript = record.then(|| SlotTranscript { destination_slot1: vec![rx], ..Default::default() });
        Ok(BlockOutcome { decisions, transcript })
    }

    fn simulate_cd(&self, bits: &[bool], key: StreamKey, record: bool) -> Result<BlockOutcome> {
        let c = &self.config;
        let n = c.users;
        let mut s = Self::streams(key);
        let tagged: Vec<(usize, bool)> = bits.iter().enumerate().map(|(i, &b)| (i + 1, b)).collect();
        let symbols = self.compose(&tagged, &mut s.carrier)?;
        let sig: Vec<&[f64]> = symbols.iter().map(Vec::as_slice).collect();

        // All fading drawn up front in a fixed order: S-D, S-R (user-major), then R-D.
        let h_sd = self.draw(&mut s.fading, n * c.m_d);
        let h_sr = self.draw(&mut s.fading, n * c.m_r);
        let h_rd = self.draw(&mut s.fading, c.m_r * c.m_d);

        let mut transcript = SlotTranscript::default();
        let mut slot1 = vec![0.0; n];
        for k in 0..c.m_d {
            let ch: Vec<&ChannelRealization> = (0..n).map(|u| &h_sd[u * c.m_d + k]).collect();
            let rx = self.receive(&sig, &ch, self.amplitude(self.snrs.sd), &mut s.noise);
            for (u, acc) in slot1.iter_mut().enumerate() {
                *acc += self.gml(&rx, u + 1)?;
            }
            if record {
                transcript.destination_slot1.push(rx);
            }
        }
        let mut relay_stat = vec![0.0; n];
        for j in 0..c.m_r {
            let ch: Vec<&ChannelRealization> = (0..n).map(|u| &h_sr[u * c.m_r + j]).collect();
            let rx = self.receive(&sig, &ch, self.amplitude(self.snrs.sr), &mut s.noise);
            for (u, acc) in relay_stat.iter_mut().enumerate() {
                *acc += self.gml(&rx, u + 1)?;
            }
            if record {
                transcript.relay_slot1.push(rx);
            }
        }

        let relay_decisions = self.relay_decisions(bits, &relay_stat);
        let forwarded: Vec<(usize, bool)> = relay_decisions
            .iter()
            .enumerate()
            .filter_map(|(u, d)| match d {
                RelayDecision::One => Some((u + 1, true)),
                RelayDecision::Zero => Some((u + 1, false)),
                RelayDecision::Idle => None,
            })
            .collect();

        let mut slot2 = vec![0.0; n];
        if !forwarded.is_empty() {
            // Relay regenerates the forwarded symbols on fresh carriers and sums them.
            let regenerated = self.compose(&forwarded, &mut s.carrier)?;
            let mut relay_tx = vec![0.0; c.two_beta];
            for x in &regenerated {
                relay_tx.iter_mut().zip(x).for_each(|(o, v)| *o += v);
            }
            let amp = self.amplitude(self.snrs.rd);
            for h in &h_rd {
                let rx = self.receive(&[&relay_tx], &[h], amp, &mut s.relay_noise);
                for &(u, _) in &forwarded {
                    slot2[u - 1] += self.gml(&rx, u)?;
                }
                if record {
                    transcript.destination_slot2.push(rx);
                }
            }
        }

        let decisions = combine(&slot1, &slot2, &relay_decisions);
        transcript.relay_decisions = relay_decisions;
        Ok(BlockOutcome { decisions, transcript: record.then_some(transcript) })
    }

    fn simulate_cc(&self, bits: &[bool], key: StreamKey, record: bool) -> Result<BlockOutcome> {
        let mut s = Self::streams(key);
        let tagged = [(1, bits[0]), (2, bits[1])];
        let symbols = self.compose(&tagged, &mut s.carrier)?;
        let sig: Vec<&[f64]> = symbols.iter().map(Vec::as_slice).collect();
        // S-D for both users, then the two inter-user links, then partner-to-destination.
        let h_sd = self.draw(&mut s.fading, 2);
        let h_uu = self.draw(&mut s.fading, 2);
        let h_pd = self.draw(&mut s.fading, 2);

        let mut transcript = SlotTranscript::default();
        let rx = self.receive(&sig, &[&h_sd[0], &h_sd[1]], self.amplitude(self.snrs.sd), &mut s.noise);
        let slot1 = vec![self.gml(&rx, 1)?, self.gml(&rx, 2)?];
        if record {
            transcript.destination_slot1.push(rx);
        }
        // Partner of user u hears only u's broadcast.
        let mut partner_stat = vec![0.0; 2];
        for u in 0..2 {
            let rx = self.receive(&[sig[u]], &[&h_uu[u]], self.amplitude(self.snrs.sr), &mut s.noise);
            partner_stat[u] = self.gml(&rx, u + 1)?;
            if record {
                transcript.relay_slot1.push(rx);
            }
        }
        let relay_decisions = self.relay_decisions(bits, &partner_stat);

        let mut slot2 = vec![0.0; 2];
        let forwarded: Vec<(usize, bool)> = relay_decisions
            .iter()
            .enumerate()
            .filter_map(|(u, d)| match d {
                RelayDecision::One => Some((u + 1, true)),
                RelayDecision::Zero => Some((u + 1, false)),
                RelayDecision::Idle => None,
            })
            .collect();
        if !forwarded.is_empty() {
            let regenerated = self.compose(&forwarded, &mut s.carrier)?;
            // User u's bit is forwarded by its partner, over the partner's own channel.
            let sig2: Vec<&[f64]> = regenerated.iter().map(Vec::as_slice).collect();
            let ch2: Vec<&ChannelRealization> = forwarded.iter().map(|&(u, _)| &h_pd[2 - u]).collect();
            let rx = self.receive(&sig2, &ch2, self.amplitude(self.snrs.rd), &mut s.relay_noise);
            for &(u, _) in &forwarded {
                slot2[u - 1] = self.gml(&rx, u)?;
            }
            if record {
                transcript.destination_slot2.push(rx);
            }
        }
        let decisions = combine(&slot1, &slot2, &relay_decisions);
        transcript.relay_decisions = relay_decisions;
        Ok(BlockOutcome { decisions, transcript: record.then_some(transcript) })
    }

    fn relay_decisions(&self, bits: &[bool], stats: &[f64]) -> Vec<RelayDecision> {
        bits.iter()
            .zip(stats)
            .map(|(&bit, &stat)| {
                let decoded = stat > 0.0;
                let forward = !self.config.force_relay_idle
                    && match self.config.protocol {
                        Protocol::Ef => true,
                        Protocol::Df => decoded == bit,
                    };
                match (forward, bit) {
                    (false, _) => RelayDecision::Idle,
                    (true, true) => RelayDecision::One,
                    (true, false) => RelayDecision::Zero,
                }
            })
            .collect()
    }
}

/// Equal-gain combining: `(slot1 + slot2) / sqrt 2` when the relay forwarded, else slot 1 alone.
fn combine(slot1: &[f64], slot2: &[f64], relay: &[RelayDecision]) -> Vec<bool> {
    slot1
        .iter()
        .zip(slot2)
        .zip(relay)
        .map(|((&a, &b), r)| match r {
            RelayDecision::Idle => a > 0.0,
            _ => (a + b) / SQRT_2 > 0.0,
        })
        .collect()
}

/// Convenience wrapper: validates `config`, then runs one block.
pub fn run_block(config: &SystemConfig, bits: &[bool], key: StreamKey) -> Result<Vec<bool>> {
    LinkSimulator::new(config.clone())?.run_block(bits, key)
}

/// CC entry point; fails unless the topology is CC with two users.
pub fn run_cc_block(config: &SystemConfig, bits: &[bool], key: StreamKey) -> Result<Vec<bool>> {
    if config.topology != Topology::Cc {
        return Err(Error::Unsupported("run_cc_block requires the CC topology".into()));
    }
    run_block(config, bits, key)
}
