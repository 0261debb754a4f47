//! Limited feedback of the randomized code: per-component uniform scalar
//! quantization, bit transport over a binary symmetric channel and
//! reconstruction at the relays.
//!
//! Packet layout: relay-major, then row-major over each `N×N` matrix, real
//! part before imaginary part, each component as a `b`-bit index, most
//! significant bit first.

use alloc::vec::Vec;

use rand::Rng;

use crate::channel::bsc_transmit;
use crate::stc::{normalize_code, CodeLayout, RandomizedCode};
use crate::{ComplexMat, Error, Result, C64};

/// Bit labeling of quantizer indices.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Labeling {
    #[default]
    Natural,
    Gray,
}

/// Uniform midrise quantizer with `2^b` levels on `[−c, c]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantizerSpec {
    bits: u32,
    clip: f64,
    labeling: Labeling,
}

impl QuantizerSpec {
    pub fn new(bits: u32, clip: f64) -> Result<Self> {
        if !(1..=24).contains(&bits) {
            return Err(Error::InvalidParameter(
                "quantizer needs 1..=24 bits per component",
            ));
        }
        if !(clip > 0.0) || !clip.is_finite() {
            return Err(Error::InvalidParameter("clip range must be positive"));
        }
        Ok(QuantizerSpec {
            bits,
            clip,
            labeling: Labeling::Natural,
        })
    }

    pub fn with_labeling(mut self, labeling: Labeling) -> Self {
        self.labeling = labeling;
        self
    }

    /// Clip range of twice the RMS component magnitude of a code on its
    /// budget: `2 sqrt(P_R / (n_r · N·T · N²))`.
    pub fn default_clip(layout: &CodeLayout) -> f64 {
        let n = layout.antennas as f64;
        let per_entry = layout.budget
            / (layout.relays as f64 * n * layout.conjugated_slots.len() as f64 * n * n);
        2.0 * libm::sqrt(per_entry)
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn clip(&self) -> f64 {
        self.clip
    }

    pub fn labeling(&self) -> Labeling {
        self.labeling
    }

    pub fn levels(&self) -> u32 {
        1 << self.bits
    }

    pub fn step(&self) -> f64 {
        2.0 * self.clip / self.levels() as f64
    }

    /// Index of the cell holding `x` after clipping to `[−c, c]`.
    pub fn index(&self, x: f64) -> u32 {
        let top = self.levels() - 1;
        if x.is_nan() {
            return top / 2;
        }
        let cell = libm::floor((x + self.clip) / self.step());
        if cell <= 0.0 {
            0
        } else if cell >= top as f64 {
            top
        } else {
            cell as u32
        }
    }

    /// Reconstruction level `−c + step/2 + i·step`.
    pub fn level(&self, index: u32) -> f64 {
        -self.clip + self.step() * (index as f64 + 0.5)
    }

    fn label(&self, index: u32) -> u32 {
        match self.labeling {
            Labeling::Natural => index,
            Labeling::Gray => index ^ (index >> 1),
        }
    }

    fn unlabel(&self, label: u32) -> u32 {
        match self.labeling {
            Labeling::Natural => label,
            Labeling::Gray => {
                let mut index = label;
                let mut shift = label >> 1;
                while shift != 0 {
                    index ^= shift;
                    shift >>= 1;
                }
                index
            }
        }
    }
}

/// A quantized code as it travels over the feedback channel.
#[derive(Debug, Clone, PartialEq)]
pub struct FeedbackPacket {
    pub bits: Vec<u8>,
    pub spec: QuantizerSpec,
}

fn packet_len(relays: usize, antennas: usize, spec: &QuantizerSpec) -> usize {
    relays * antennas * antennas * 2 * spec.bits as usize
}

pub fn quantize_code(code: &RandomizedCode, spec: QuantizerSpec) -> FeedbackPacket {
    let mut bits = Vec::with_capacity(packet_len(code.relays(), code.antennas(), &spec));
    for m in code.matrices() {
        for z in m.as_slice() {
            for part in [z.re, z.im] {
                let label = spec.label(spec.index(part));
                for b in (0..spec.bits).rev() {
                    bits.push(((label >> b) & 1) as u8);
                }
            }
        }
    }
    FeedbackPacket { bits, spec }
}

/// Raw reconstructed matrices, before the relay renormalizes them.
pub fn dequantize_matrices(
    packet: &FeedbackPacket,
    relays: usize,
    antennas: usize,
) -> Result<Vec<ComplexMat>> {
    let spec = packet.spec;
    let expected = packet_len(relays, antennas, &spec);
    if packet.bits.len() != expected {
        return Err(Error::MalformedPacket {
            expected,
            found: packet.bits.len(),
        });
    }
    let width = spec.bits as usize;
    let components: Vec<f64> = packet
        .bits
        .chunks_exact(width)
        .map(|chunk| {
            let label = chunk
                .iter()
                .fold(0u32, |acc, &b| (acc << 1) | u32::from(b & 1));
            spec.level(spec.unlabel(label))
        })
        .collect();
    components
        .chunks_exact(2 * antennas * antennas)
        .map(|m| {
            ComplexMat::from_vec(
                antennas,
                antennas,
                m.chunks_exact(2).map(|p| C64::new(p[0], p[1])).collect(),
            )
        })
        .collect()
}

/// Reconstructs the code at the relays and renormalizes it to `P_R`.
pub fn dequantize_code(packet: &FeedbackPacket, layout: &CodeLayout) -> Result<RandomizedCode> {
    let matrices = dequantize_matrices(packet, layout.relays, layout.antennas)?;
    normalize_code(&RandomizedCode::from_layout(layout, matrices)?)
}

/// Quantize, send over a BSC with flip probability `p`, reconstruct.
pub fn feedback_roundtrip<R: Rng + ?Sized>(
    code: &RandomizedCode,
    spec: QuantizerSpec,
    p: f64,
    rng: &mut R,
) -> Result<RandomizedCode> {
    let mut packet = quantize_code(code, spec);
    packet.bits = bsc_transmit(&packet.bits, p, rng)?;
    dequantize_code(&packet, &code.layout())
}
