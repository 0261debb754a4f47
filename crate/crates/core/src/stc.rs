//! Amplify-and-forward relaying with a randomized distributed space-time code.
//!
//! Each relay scales what it hears from the source, encodes the result with a
//! space-time block code `M` (antennas × slots), left-multiplies by its
//! randomized matrix `R` and transmits `R·M` to the destination over `G`.
//!
//! The destination stacks its observations into one receive vector:
//!
//! ```text
//! r = [ H s + n_SD                       ]   (only with the direct link)
//!     [ vec( Σ_k G_k R_k M(s̃_k) + N_RD ) ]
//! ```
//!
//! where `vec` concatenates the time slots and conjugates the slots the code
//! fills with conjugated symbols. After that conjugation the whole vector is
//! linear in `s` and in the relay noise, which gives the equivalent model
//! `r = Σ_j d_j s_j + n` used by every receiver in the crate.
//!
//! Two routes to `r` exist on purpose: [`CoopLink::transmit`] runs the literal
//! signal chain (noise drawn where it physically occurs) and
//! [`CoopLink::equivalent`] builds the equivalent channel. They must agree.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use libm::{cos, sin, sqrt};
use rand::Rng;

use crate::channel::{ChannelSet, NoiseModel};
use crate::numerics::{norm_sqr, ComplexMat};
use crate::{Error, Result, C64, SIGNAL_POWER};

/// How one time slot of a linear dispersion code is formed:
/// column `t` of the code matrix is `P_t s`, or `conj(P_t s)` when
/// `conjugated` is set.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotMap {
    pub dispersion: ComplexMat,
    pub conjugated: bool,
}

/// A space-time block code carrying `antennas()` symbols over `slots()` time
/// slots from `antennas()` transmit antennas.
pub trait SpaceTimeCode {
    fn antennas(&self) -> usize;

    fn slots(&self) -> usize;

    /// Code matrix, antennas × slots.
    fn encode(&self, symbols: &[C64]) -> Result<ComplexMat>;

    fn slot_map(&self, slot: usize) -> SlotMap;

    fn conjugation_pattern(&self) -> Vec<bool> {
        (0..self.slots())
            .map(|t| self.slot_map(t).conjugated)
            .collect()
    }
}

/// The 2×2 Alamouti code.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Alamouti;

impl SpaceTimeCode for Alamouti {
    fn antennas(&self) -> usize {
        2
    }

    fn slots(&self) -> usize {
        2
    }

    fn encode(&self, symbols: &[C64]) -> Result<ComplexMat> {
        alamouti_encode(symbols)
    }

    fn slot_map(&self, slot: usize) -> SlotMap {
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        match slot {
            0 => SlotMap {
                dispersion: ComplexMat::identity(2),
                conjugated: false,
            },
            // second column is [-s2*, s1*] = conj([-s2, s1])
            1 => SlotMap {
                dispersion: ComplexMat::from_vec(2, 2, vec![zero, -one, one, zero]).expect("2x2"),
                conjugated: true,
            },
            _ => panic!("Alamouti has two slots, asked for slot {slot}"),
        }
    }
}

/// `[[s1, -s2*], [s2, s1*]]`: rows are antennas, columns are time slots.
pub fn alamouti_encode(symbols: &[C64]) -> Result<ComplexMat> {
    let [s1, s2] = symbols else {
        return Err(Error::LengthMismatch {
            expected: 2,
            found: symbols.len(),
        });
    };
    ComplexMat::from_vec(2, 2, vec![*s1, -s2.conj(), *s2, s1.conj()])
}

/// Fixed amplify-and-forward gain `A_k = g·I`, identical at every relay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplifyGain {
    gain: f64,
}

impl AmplifyGain {
    pub fn new(gain: f64) -> Result<Self> {
        if !(gain > 0.0) || !gain.is_finite() {
            return Err(Error::InvalidParameter("amplifier gain must be positive"));
        }
        Ok(AmplifyGain { gain })
    }

    /// Fixed-gain rule `g = sqrt(P_relay / (N σ_s² + σ²))`: each amplified
    /// entry has average power `P_relay` over unit-variance fading.
    pub fn fixed(antennas: usize, noise: NoiseModel, relay_power: f64) -> Result<Self> {
        Self::new(sqrt(
            relay_power / (antennas as f64 * SIGNAL_POWER + noise.sigma2()),
        ))
    }

    pub fn gain(&self) -> f64 {
        self.gain
    }

    pub fn matrix(&self, antennas: usize) -> ComplexMat {
        ComplexMat::identity(antennas).scale_real(self.gain)
    }

    pub fn amplify(&self, received: &[C64]) -> Vec<C64> {
        received.iter().map(|&x| x * self.gain).collect()
    }
}

/// Unit-modulus matrix with i.i.d. uniform phases.
pub fn draw_randomized_matrix<R: Rng + ?Sized>(antennas: usize, rng: &mut R) -> ComplexMat {
    ComplexMat::from_fn(antennas, antennas, |_, _| {
        let theta = rng.random::<f64>() * TAU;
        C64::new(cos(theta), sin(theta))
    })
}

/// The relay transmit block `R·M`.
pub fn apply_randomization(randomizer: &ComplexMat, code_block: &ComplexMat) -> Result<ComplexMat> {
    if !randomizer.is_square() {
        return Err(Error::NotSquare {
            rows: randomizer.rows(),
            cols: randomizer.cols(),
        });
    }
    randomizer.matmul(code_block)
}

/// Dimensions of a randomized code, enough to rebuild one from raw entries.
#[derive(Debug, Clone, PartialEq)]
pub struct CodeLayout {
    pub relays: usize,
    pub antennas: usize,
    pub conjugated_slots: Vec<bool>,
    pub budget: f64,
}

/// One `N×N` randomized matrix per relay together with the total relay power
/// budget `P_R`.
///
/// The budget applies to `Σ_k Σ_j trace(R_eq,kj R_eq,kjᴴ)`, where `R_eq,kj`
/// is the block-diagonal per-symbol equivalent form of relay `k`'s matrix
/// (see [`RandomizedCode::equivalent_form`]).
#[derive(Debug, Clone, PartialEq)]
pub struct RandomizedCode {
    matrices: Vec<ComplexMat>,
    budget: f64,
    conjugated_slots: Vec<bool>,
}

impl RandomizedCode {
    pub fn from_matrices(
        matrices: Vec<ComplexMat>,
        budget: f64,
        conjugated_slots: Vec<bool>,
    ) -> Result<Self> {
        if !(budget > 0.0) || !budget.is_finite() {
            return Err(Error::InvalidParameter(
                "relay power budget must be positive",
            ));
        }
        if matrices.is_empty() || conjugated_slots.is_empty() {
            return Err(Error::InvalidParameter(
                "code needs at least one relay and slot",
            ));
        }
        let n = matrices[0].rows();
        if matrices.iter().any(|m| m.shape() != (n, n)) {
            return Err(Error::InvalidParameter(
                "randomized matrices must all be N×N",
            ));
        }
        Ok(RandomizedCode {
            matrices,
            budget,
            conjugated_slots,
        })
    }

    pub fn from_layout(layout: &CodeLayout, matrices: Vec<ComplexMat>) -> Result<Self> {
        if matrices.len() != layout.relays {
            return Err(Error::LengthMismatch {
                expected: layout.relays,
                found: matrices.len(),
            });
        }
        Self::from_matrices(matrices, layout.budget, layout.conjugated_slots.clone())
    }

    /// `R_k = I` at every relay: the plain distributed code. Not scaled to
    /// the budget.
    pub fn identity(relays: usize, stc: &impl SpaceTimeCode, budget: f64) -> Result<Self> {
        Self::from_matrices(
            vec![ComplexMat::identity(stc.antennas()); relays],
            budget,
            stc.conjugation_pattern(),
        )
    }

    /// Fresh unit-modulus matrices scaled to meet the budget.
    pub fn random<R: Rng + ?Sized>(
        relays: usize,
        stc: &impl SpaceTimeCode,
        budget: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let matrices = (0..relays)
            .map(|_| draw_randomized_matrix(stc.antennas(), rng))
            .collect();
        normalize_code(&Self::from_matrices(
            matrices,
            budget,
            stc.conjugation_pattern(),
        )?)
    }

    /// The budget that unit-modulus matrices meet exactly:
    /// `n_r · N · T · N²` (N symbols, T slots, `‖R‖_F² = N²`).
    pub fn unit_modulus_budget(relays: usize, stc: &impl SpaceTimeCode) -> f64 {
        let n = stc.antennas() as f64;
        relays as f64 * n * stc.slots() as f64 * n * n
    }

    pub fn relays(&self) -> usize {
        self.matrices.len()
    }

    pub fn antennas(&self) -> usize {
        self.matrices[0].rows()
    }

    pub fn slots(&self) -> usize {
        self.conjugated_slots.len()
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn matrix(&self, relay: usize) -> &ComplexMat {
        &self.matrices[relay]
    }

    pub fn matrices(&self) -> &[ComplexMat] {
        &self.matrices
    }

    pub fn matrices_mut(&mut self) -> &mut [ComplexMat] {
        &mut self.matrices
    }

    pub fn conjugated_slots(&self) -> &[bool] {
        &self.conjugated_slots
    }

    pub fn layout(&self) -> CodeLayout {
        CodeLayout {
            relays: self.relays(),
            antennas: self.antennas(),
            conjugated_slots: self.conjugated_slots.clone(),
            budget: self.budget,
        }
    }

    pub fn with_budget(mut self, budget: f64) -> Result<Self> {
        if !(budget > 0.0) {
            return Err(Error::InvalidParameter(
                "relay power budget must be positive",
            ));
        }
        self.budget = budget;
        Ok(self)
    }

    /// The `NT×NT` block-diagonal equivalent randomized matrix of relay
    /// `relay`: `R` on the blocks of plain slots and `conj(R)` on conjugated
    /// ones. Every symbol sees the same form because a single physical matrix
    /// multiplies the whole code block.
    pub fn equivalent_form(&self, relay: usize) -> ComplexMat {
        let r = &self.matrices[relay];
        let n = r.rows();
        let mut out = ComplexMat::zeros(n * self.slots(), n * self.slots());
        for (t, &conj) in self.conjugated_slots.iter().enumerate() {
            let block = if conj { r.conj() } else { r.clone() };
            out.set_block(t * n, t * n, &block);
        }
        out
    }

    /// `Σ_k Σ_j trace(R_eq,kj R_eq,kjᴴ)`, evaluated literally on the
    /// equivalent forms.
    pub fn equivalent_trace(&self) -> f64 {
        let symbols = self.antennas();
        (0..self.relays())
            .map(|k| {
                let q = self.equivalent_form(k);
                let gram = q.matmul(&q.adjoint()).expect("square");
                symbols as f64 * gram.trace().expect("square").re
            })
            .sum()
    }

    fn scaled(&self, factor: f64) -> RandomizedCode {
        RandomizedCode {
            matrices: self.matrices.iter().map(|m| m.scale_real(factor)).collect(),
            budget: self.budget,
            conjugated_slots: self.conjugated_slots.clone(),
        }
    }
}

/// Scales every relay matrix by `sqrt(P_R / equivalent_trace)` so the code
/// sits exactly on its power budget.
pub fn normalize_code(code: &RandomizedCode) -> Result<RandomizedCode> {
    let trace = code.equivalent_trace();
    if !(trace > 0.0) || !trace.is_finite() {
        return Err(Error::DegenerateCode);
    }
    Ok(code.scaled(sqrt(code.budget / trace)))
}

/// Relative deviation of the code's equivalent trace from its budget.
pub fn budget_deviation(code: &RandomizedCode) -> f64 {
    (code.equivalent_trace() - code.budget).abs() / code.budget
}

/// Everything the literal chain produced for one symbol vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Reception {
    /// The stacked receive vector.
    pub received: Vec<C64>,
    /// What each relay fed into its encoder (`s̃_k = g (F_k s + n_SR,k)`).
    pub relay_drives: Vec<Vec<C64>>,
}

/// The physical network for one coherence block.
#[derive(Debug, Clone)]
pub struct CoopLink<C: SpaceTimeCode = Alamouti> {
    pub channels: ChannelSet,
    pub gain: AmplifyGain,
    pub noise: NoiseModel,
    pub direct_link: bool,
    pub stc: C,
}

impl<C: SpaceTimeCode> CoopLink<C> {
    pub fn new(
        channels: ChannelSet,
        gain: AmplifyGain,
        noise: NoiseModel,
        direct_link: bool,
        stc: C,
    ) -> Result<Self> {
        if stc.antennas() != channels.antennas() {
            return Err(Error::Unsupported(
                "space-time code size does not match the antenna count",
            ));
        }
        if !direct_link && channels.relays() == 0 {
            return Err(Error::InvalidParameter("no direct link and no relays"));
        }
        Ok(CoopLink {
            channels,
            gain,
            noise,
            direct_link,
            stc,
        })
    }

    pub fn antennas(&self) -> usize {
        self.channels.antennas()
    }

    pub fn relays(&self) -> usize {
        self.channels.relays()
    }

    /// Rows contributed by the direct link (0 or N).
    pub fn direct_rows(&self) -> usize {
        if self.direct_link {
            self.antennas()
        } else {
            0
        }
    }

    /// Length of the receive vector: `(T+1)N` with the direct link, `TN`
    /// without, `N` for a direct-only link.
    pub fn rows(&self) -> usize {
        let relay_rows = if self.relays() > 0 {
            self.antennas() * self.stc.slots()
        } else {
            0
        };
        self.direct_rows() + relay_rows
    }

    fn check_code(&self, code: &RandomizedCode) -> Result<()> {
        if code.relays() != self.relays() || code.antennas() != self.antennas() {
            return Err(Error::DimensionMismatch {
                op: "randomized code",
                left: (self.relays(), self.antennas()),
                right: (code.relays(), code.antennas()),
            });
        }
        if code.conjugated_slots() != self.stc.conjugation_pattern().as_slice() {
            return Err(Error::Unsupported(
                "code was built for a different space-time code",
            ));
        }
        Ok(())
    }

    /// Runs the literal chain for one symbol vector: broadcast, relay
    /// amplification, encoding, randomization, superposition at the
    /// destination, noise everywhere it physically occurs.
    ///
    /// Noise draw order: direct link, then each relay's receive noise, then
    /// the destination noise of the relay phase (antenna-major).
    pub fn transmit<R: Rng + ?Sized>(
        &self,
        code: &RandomizedCode,
        symbols: &[C64],
        rng: &mut R,
    ) -> Result<Reception> {
        self.check_code(code)?;
        let n = self.antennas();
        if symbols.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                found: symbols.len(),
            });
        }
        let mut received = Vec::with_capacity(self.rows());
        if self.direct_link {
            let y = self.channels.direct.mul_vec(symbols)?;
            received.extend(y.into_iter().map(|x| x + self.noise.sample(rng)));
        }

        let mut relay_drives = Vec::with_capacity(self.relays());
        if self.relays() > 0 {
            let slots = self.stc.slots();
            let mut y = ComplexMat::zeros(n, slots);
            for k in 0..self.relays() {
                let heard = self.channels.source_relay[k].mul_vec(symbols)?;
                let heard: Vec<C64> = heard
                    .into_iter()
                    .map(|x| x + self.noise.sample(rng))
                    .collect();
                let drive = self.gain.amplify(&heard);
                let block = self.stc.encode(&drive)?;
                let sent = apply_randomization(code.matrix(k), &block)?;
                let arrived = self.channels.relay_dest[k].matmul(&sent)?;
                y = y.add(&arrived)?;
                relay_drives.push(drive);
            }
            for z in y.as_mut_slice() {
                *z += self.noise.sample(rng);
            }
            for t in 0..slots {
                let conj = self.stc.slot_map(t).conjugated;
                received.extend(
                    y.col(t)
                        .into_iter()
                        .map(|x| if conj { x.conj() } else { x }),
                );
            }
        }
        Ok(Reception {
            received,
            relay_drives,
        })
    }

    /// The receive vector `r` for one symbol vector (see [`Self::transmit`]).
    pub fn receive<R: Rng + ?Sized>(
        &self,
        code: &RandomizedCode,
        symbols: &[C64],
        rng: &mut R,
    ) -> Result<Vec<C64>> {
        Ok(self.transmit(code, symbols, rng)?.received)
    }

    /// Noise-free relay input `g F_k s`, what the destination can infer about
    /// relay `k`'s encoder input from known symbols.
    pub fn relay_drive_estimate(&self, relay: usize, symbols: &[C64]) -> Result<Vec<C64>> {
        Ok(self
            .gain
            .amplify(&self.channels.source_relay[relay].mul_vec(symbols)?))
    }

    /// Builds the equivalent channel for the given code.
    pub fn equivalent(&self, code: &RandomizedCode) -> Result<EquivalentChannel> {
        self.check_code(code)?;
        let n = self.antennas();
        let slots = self.stc.slots();
        let g = self.gain.gain();

        // [P_1; ...; P_T], NT×N
        let mut dispersion = ComplexMat::zeros(n * slots, n);
        for t in 0..slots {
            dispersion.set_block(t * n, 0, &self.stc.slot_map(t).dispersion);
        }

        let mut relay_maps = Vec::with_capacity(self.relays());
        let mut signal_maps = Vec::with_capacity(self.relays());
        for k in 0..self.relays() {
            // slot-wise channel G or conj(G) around the equivalent randomizer
            let gk = &self.channels.relay_dest[k];
            let mut channel_blocks = ComplexMat::zeros(n * slots, n * slots);
            for t in 0..slots {
                let block = if self.stc.slot_map(t).conjugated {
                    gk.conj()
                } else {
                    gk.clone()
                };
                channel_blocks.set_block(t * n, t * n, &block);
            }
            let map = channel_blocks
                .matmul(&code.equivalent_form(k))?
                .matmul(&dispersion)?;
            let signal = map.matmul(&self.channels.source_relay[k])?.scale_real(g);
            relay_maps.push(map);
            signal_maps.push(signal);
        }

        let mut stacked = ComplexMat::zeros(self.rows(), n);
        if self.direct_link {
            stacked.set_block(0, 0, &self.channels.direct);
        }
        if let Some(first) = signal_maps.first() {
            let mut relay_sum = first.clone();
            for m in &signal_maps[1..] {
                relay_sum = relay_sum.add(m)?;
            }
            stacked.set_block(self.direct_rows(), 0, &relay_sum);
        }

        Ok(EquivalentChannel {
            stacked,
            relay_maps,
            signal_maps,
            gain: g,
            direct_rows: self.direct_rows(),
        })
    }
}

/// Linear model `r = D s + n` for one code and one coherence block.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalentChannel {
    stacked: ComplexMat,
    relay_maps: Vec<ComplexMat>,
    signal_maps: Vec<ComplexMat>,
    gain: f64,
    direct_rows: usize,
}

impl EquivalentChannel {
    pub fn rows(&self) -> usize {
        self.stacked.rows()
    }

    pub fn symbols(&self) -> usize {
        self.stacked.cols()
    }

    pub fn direct_rows(&self) -> usize {
        self.direct_rows
    }

    /// The stacked channel `D`; column `j` is the path of symbol `j`.
    pub fn stacked(&self) -> &ComplexMat {
        &self.stacked
    }

    pub fn column(&self, symbol: usize) -> Vec<C64> {
        self.stacked.col(symbol)
    }

    /// Maps relay `k`'s encoder input to the relay rows of `r`
    /// (`NT×N`, includes the randomized matrix and the destination channel).
    pub fn relay_map(&self, relay: usize) -> &ComplexMat {
        &self.relay_maps[relay]
    }

    /// `C_k = g · relay_map(k) · F_k`; column `j` carries symbol `j` through
    /// relay `k`.
    pub fn signal_map(&self, relay: usize) -> &ComplexMat {
        &self.signal_maps[relay]
    }

    pub fn gain(&self) -> f64 {
        self.gain
    }

    /// `D s`: the receive vector with every noise source switched off.
    pub fn noiseless_received(&self, symbols: &[C64]) -> Result<Vec<C64>> {
        self.stacked.mul_vec(symbols)
    }

    /// Exact covariance of all noise in `r`: `σ² I` from the destination plus
    /// `g² σ² Σ_k B_k B_kᴴ` of relay noise carried through relay `k`'s map
    /// `B_k`.
    pub fn noise_covariance(&self, noise: NoiseModel) -> ComplexMat {
        let sigma2 = noise.sigma2();
        let mut cov = ComplexMat::identity(self.rows()).scale_real(sigma2);
        for map in &self.relay_maps {
            let carried = map
                .matmul(&map.adjoint())
                .expect("square")
                .scale_real(sigma2 * self.gain * self.gain);
            let rows = carried.rows();
            let current = cov.block(self.direct_rows, self.direct_rows, rows, rows);
            cov.set_block(
                self.direct_rows,
                self.direct_rows,
                &current.add(&carried).expect("same shape"),
            );
        }
        cov
    }

    /// Per-entry noise variance of the relay rows averaged over the rows:
    /// `σ² (1 + ‖g Σ-relay map‖_F² / (NT))`, the scalar form of
    /// [`Self::noise_covariance`] (equal to its mean diagonal entry).
    pub fn relay_noise_variance(&self, noise: NoiseModel) -> f64 {
        let rows = self.rows() - self.direct_rows;
        if rows == 0 {
            return noise.sigma2();
        }
        let carried: f64 = self
            .relay_maps
            .iter()
            .map(|m| m.scale_real(self.gain).frobenius_norm_sqr())
            .sum();
        noise.sigma2() * (1.0 + carried / rows as f64)
    }
}

/// Average transmit energy per code block of one relay for a given drive,
/// `‖R M(s̃)‖_F²`.
pub fn relay_block_energy(
    stc: &impl SpaceTimeCode,
    randomizer: &ComplexMat,
    drive: &[C64],
) -> Result<f64> {
    Ok(apply_randomization(randomizer, &stc.encode(drive)?)?.frobenius_norm_sqr())
}

/// `‖s̃‖²` summed helper for power bookkeeping.
pub fn drive_energy(drive: &[C64]) -> f64 {
    norm_sqr(drive)
}
