//! DCSK framing, the differential correlator and the GML multi-user detector.
//!
//! Time is discrete: one symbol spans `2beta` samples, the reference occupies
//! the first `beta` and the data half the remaining `beta`.

use crate::chaos::ChaoticSequence;
use crate::error::{Error, Result};
use crate::spreading::WalshMatrix;

/// Single-user DCSK frame: `data = (2b - 1) * reference`.
#[derive(Debug, Clone, PartialEq)]
pub struct DcskFrame {
    pub reference: Vec<f64>,
    pub data: Vec<f64>,
    pub bit: bool,
}

impl DcskFrame {
    pub fn new(reference: Vec<f64>, bit: bool) -> Self {
        let sign = if bit { 1.0 } else { -1.0 };
        let data = reference.iter().map(|r| sign * r).collect();
        Self { reference, data, bit }
    }

    pub fn samples(&self) -> impl Iterator<Item = f64> + '_ {
        self.reference.iter().chain(&self.data).copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecisionStatistic {
    pub value: f64,
    pub user: usize,
    pub symbol: usize,
}

impl DecisionStatistic {
    /// Bit 1 iff strictly positive; an exact zero decides 0.
    pub fn decision(&self) -> bool {
        self.value > 0.0
    }
}

/// Modulates `bits`, drawing `beta` fresh carrier samples per bit.
pub fn dcsk_modulate(bits: &[bool], carrier: &ChaoticSequence, beta: usize) -> Result<Vec<f64>> {
    if beta < 1 {
        return Err(Error::Config("half spreading factor beta must be >= 1".into()));
    }
    let needed = beta * bits.len();
    if carrier.len() < needed {
        return Err(Error::Config(format!(
            "carrier supplies {} samples, {} bits need {needed}",
            carrier.len(),
            bits.len()
        )));
    }
    let mut out = Vec::with_capacity(2 * needed);
    for (bit, reference) in bits.iter().zip(carrier.samples.chunks_exact(beta)) {
        out.extend(DcskFrame::new(reference.to_vec(), *bit).samples());
    }
    Ok(out)
}

/// Correlates the data half of one frame against its reference half.
pub fn dcsk_correlate(received: &[f64], beta: usize) -> Result<DecisionStatistic> {
    if beta < 1 || received.len() != 2 * beta {
        return Err(Error::Framing { expected: 2 * beta, actual: received.len() });
    }
    let (reference, data) = received.split_at(beta);
    let value = reference.iter().zip(data).map(|(r, d)| r * d).sum();
    Ok(DecisionStatistic { value, user: 1, symbol: 0 })
}

/// Despreads `received` with `row` into one length-`f` segment and returns its energy.
fn despread_energy(received: &[f64], row: &[i8], f: usize) -> f64 {
    let mut acc = 0.0;
    for j in 0..f {
        let s: f64 = row.iter().enumerate().map(|(i, &w)| f64::from(w) * received[i * f + j]).sum();
        acc += s * s;
    }
    acc
}

/// GML statistic `E_{u,1} - E_{u,0}` for user `user` over one symbol.
pub fn gml_detect(received: &[f64], user: usize, walsh: &WalshMatrix, f: usize) -> Result<DecisionStatistic> {
    let expected = walsh.order() * f;
    if f == 0 || received.len() != expected {
        return Err(Error::Framing { expected, actual: received.len() });
    }
    let codes = walsh.assignment(user)?;
    let e1 = despread_energy(received, walsh.row(codes.bit_one_row), f);
    let e0 = despread_energy(received, walsh.row(codes.bit_zero_row), f);
    Ok(DecisionStatistic { value: e1 - e0, user, symbol: 0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chaos::{generate, ChaosConfig, ChaosMap};
    use crate::spreading::{add_user_signal, walsh};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn carrier(seed: u64, len: usize) -> ChaoticSequence {
        generate(&ChaosConfig::new(ChaosMap::Chebyshev2, seed << 16), len, 1.0).unwrap()
    }

    #[test]
    fn frames_repeat_and_reverse() {
        let c = ChaoticSequence { samples: vec![1.0, -2.0, 0.5], target_energy: 1.0 };
        assert_eq!(dcsk_modulate(&[true], &c, 3).unwrap(), vec![1.0, -2.0, 0.5, 1.0, -2.0, 0.5]);
        assert_eq!(dcsk_modulate(&[false], &c, 3).unwrap(), vec![1.0, -2.0, 0.5, -1.0, 2.0, -0.5]);
        assert!(dcsk_modulate(&[true], &c, 0).is_err());
        assert!(dcsk_modulate(&[true, true], &c, 3).is_err());
    }

    #[test]
    fn noiseless_correlation_values() {
        let r = [0.3, -1.2, 0.7, 2.0];
        let e: f64 = r.iter().map(|v| v * v).sum();
        let c = ChaoticSequence { samples: r.to_vec(), target_energy: 1.0 };
        let one = dcsk_correlate(&dcsk_modulate(&[true], &c, 4).unwrap(), 4).unwrap();
        let zero = dcsk_correlate(&dcsk_modulate(&[false], &c, 4).unwrap(), 4).unwrap();
        assert!((one.value - e).abs() < 1e-12 && one.decision());
        assert!((zero.value + e).abs() < 1e-12 && !zero.decision());
        assert_eq!(one.value, -zero.value);
    }

    #[test]
    fn noiseless_loopback() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let bits: Vec<bool> = (0..100).map(|_| rng.random()).collect();
        let beta = 16;
        let tx = dcsk_modulate(&bits, &carrier(3, 100 * beta), beta).unwrap();
        let rx: Vec<bool> = tx.chunks_exact(2 * beta).map(|fr| dcsk_correlate(fr, beta).unwrap().decision()).collect();
        assert_eq!(rx, bits);
    }

    #[test]
    fn framing_errors() {
        assert!(matches!(dcsk_correlate(&[0.0; 5], 3), Err(Error::Framing { expected: 6, actual: 5 })));
        let w = walsh(4).unwrap();
        assert!(matches!(gml_detect(&[0.0; 10], 1, &w, 3), Err(Error::Framing { .. })));
    }

    #[test]
    fn gml_two_users_noiseless() {
        let w = walsh(4).unwrap();
        let f = 8;
        let (c1, c2) = (carrier(5, f), carrier(6, f));
        for (b1, b2) in [(true, false), (false, true), (true, true), (false, false)] {
            let mut rx = vec![0.0; 4 * f];
            add_user_signal(&mut rx, 1, b1, &c1.samples, &w, 1.0).unwrap();
            add_user_signal(&mut rx, 2, b2, &c2.samples, &w, 0.7).unwrap();
            assert_eq!(gml_detect(&rx, 1, &w, f).unwrap().decision(), b1);
            assert_eq!(gml_detect(&rx, 2, &w, f).unwrap().decision(), b2);
        }
    }

    #[test]
    fn gml_invalid_user_and_zero_input() {
        let w = walsh(4).unwrap();
        assert!(matches!(gml_detect(&[0.0; 8], 3, &w, 2), Err(Error::InvalidUser { .. })));
        let z = gml_detect(&[0.0; 8], 2, &w, 2).unwrap();
        assert_eq!(z.value, 0.0);
        assert!(!z.decision());
    }

    #[test]
    fn gml_single_user_agrees_with_correlator() {
        let w = walsh(2).unwrap();
        let beta = 32;
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let noise = Normal::new(0.0, 1.5).unwrap();
        let c = carrier(9, beta * 10_000);
        for (k, seg) in c.samples.chunks_exact(beta).enumerate() {
            let bit = k % 3 == 0;
            let mut rx = DcskFrame::new(seg.to_vec(), bit).samples().collect::<Vec<_>>();
            rx.iter_mut().for_each(|v| *v += noise.sample(&mut rng));
            let a = dcsk_correlate(&rx, beta).unwrap();
            let g = gml_detect(&rx, 1, &w, beta).unwrap();
            assert_eq!(a.decision(), g.decision(), "frame {k}");
            assert!((g.value - 4.0 * a.value).abs() <= 1e-9 * (1.0 + g.value.abs()));
        }
    }
}
