//! Quasi-static Rayleigh block fading, AWGN and the binary symmetric
//! feedback channel.

use alloc::vec::Vec;

use libm::{pow, sqrt};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::{ComplexMat, Error, Result, C64};

/// One coherence block of link gains. Fixed for a whole packet.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    /// Source to relay `k`, one `N×N` matrix per relay.
    pub source_relay: Vec<ComplexMat>,
    /// Relay `k` to destination.
    pub relay_dest: Vec<ComplexMat>,
    /// Source to destination.
    pub direct: ComplexMat,
}

impl ChannelSet {
    pub fn new(
        source_relay: Vec<ComplexMat>,
        relay_dest: Vec<ComplexMat>,
        direct: ComplexMat,
    ) -> Result<Self> {
        let n = direct.rows();
        if source_relay.len() != relay_dest.len() {
            return Err(Error::LengthMismatch {
                expected: source_relay.len(),
                found: relay_dest.len(),
            });
        }
        let all_square = core::iter::once(&direct)
            .chain(&source_relay)
            .chain(&relay_dest)
            .all(|m| m.shape() == (n, n));
        if !all_square || n == 0 {
            return Err(Error::InvalidParameter("channel matrices must all be N×N"));
        }
        Ok(ChannelSet {
            source_relay,
            relay_dest,
            direct,
        })
    }

    pub fn antennas(&self) -> usize {
        self.direct.rows()
    }

    pub fn relays(&self) -> usize {
        self.source_relay.len()
    }
}

/// Draws a circularly symmetric complex Gaussian sample with the given
/// variance (half per real dimension).
pub fn complex_gaussian<R: Rng + ?Sized>(variance: f64, rng: &mut R) -> C64 {
    let sd = sqrt(variance / 2.0);
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(sd * re, sd * im)
}

fn gaussian_matrix<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMat {
    ComplexMat::from_fn(n, n, |_, _| complex_gaussian(1.0, rng))
}

/// Draws every link gain i.i.d. `CN(0, 1)`. Draw order: direct link, then
/// for each relay its source link followed by its destination link.
pub fn draw_channel_set<R: Rng + ?Sized>(
    antennas: usize,
    relays: usize,
    rng: &mut R,
) -> Result<ChannelSet> {
    if antennas == 0 || relays == 0 {
        return Err(Error::InvalidParameter(
            "need at least one antenna and one relay",
        ));
    }
    let direct = gaussian_matrix(antennas, rng);
    let mut source_relay = Vec::with_capacity(relays);
    let mut relay_dest = Vec::with_capacity(relays);
    for _ in 0..relays {
        source_relay.push(gaussian_matrix(antennas, rng));
        relay_dest.push(gaussian_matrix(antennas, rng));
    }
    Ok(ChannelSet {
        source_relay,
        relay_dest,
        direct,
    })
}

/// Per-link noise power. All links share the same variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    sigma2: f64,
}

impl NoiseModel {
    /// A zero variance is accepted and means a noiseless link.
    pub fn new(sigma2: f64) -> Result<Self> {
        if !(sigma2 >= 0.0) || !sigma2.is_finite() {
            return Err(Error::InvalidParameter(
                "noise variance must be finite and >= 0",
            ));
        }
        Ok(NoiseModel { sigma2 })
    }

    pub fn noiseless() -> Self {
        NoiseModel { sigma2: 0.0 }
    }

    /// `SNR(dB) = 10 log10(σ_s² / σ²)` with unit symbol power.
    pub fn from_snr_db(snr_db: f64) -> Result<Self> {
        Self::new(crate::SIGNAL_POWER / pow(10.0, snr_db / 10.0))
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn is_noiseless(&self) -> bool {
        self.sigma2 == 0.0
    }

    /// One `CN(0, σ²)` sample; exactly zero on a noiseless link (no draw).
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> C64 {
        if self.is_noiseless() {
            C64::new(0.0, 0.0)
        } else {
            complex_gaussian(self.sigma2, rng)
        }
    }
}

/// Returns `signal + n`, `n` i.i.d. `CN(0, σ²)`. A noiseless model passes the
/// signal through untouched and consumes no randomness.
pub fn add_awgn<R: Rng + ?Sized>(signal: &[C64], noise: NoiseModel, rng: &mut R) -> Vec<C64> {
    signal.iter().map(|&x| x + noise.sample(rng)).collect()
}

/// Flips each bit independently with probability `p`.
pub fn bsc_transmit<R: Rng + ?Sized>(bits: &[u8], p: f64, rng: &mut R) -> Result<Vec<u8>> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidProbability(p));
    }
    Ok(bits
        .iter()
        .map(|&b| if rng.random::<f64>() < p { b ^ 1 } else { b })
        .collect())
}
