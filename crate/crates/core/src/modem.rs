//! Gray-mapped 4-QAM with unit average symbol energy.
//!
//! Bit pairs map as `00 → (1+j)/√2`, `01 → (−1+j)/√2`, `11 → (−1−j)/√2`,
//! `10 → (1−j)/√2`: the first bit selects the sign of the imaginary part and
//! the second bit the sign of the real part.

use alloc::vec::Vec;
use core::f64::consts::FRAC_1_SQRT_2;

use crate::{Error, Result, C64};

const POINT_TOL: f64 = 1e-9;

fn point(b0: u8, b1: u8) -> C64 {
    let re = if b1 == 0 {
        FRAC_1_SQRT_2
    } else {
        -FRAC_1_SQRT_2
    };
    let im = if b0 == 0 {
        FRAC_1_SQRT_2
    } else {
        -FRAC_1_SQRT_2
    };
    C64::new(re, im)
}

/// The four constellation points in index order `00, 01, 10, 11`.
pub fn constellation() -> [C64; 4] {
    [point(0, 0), point(0, 1), point(1, 0), point(1, 1)]
}

pub fn modulate(bits: &[u8]) -> Result<Vec<C64>> {
    if !bits.len().is_multiple_of(2) {
        return Err(Error::OddBitCount(bits.len()));
    }
    if bits.iter().any(|&b| b > 1) {
        return Err(Error::InvalidParameter("bits must be 0 or 1"));
    }
    Ok(bits.chunks_exact(2).map(|p| point(p[0], p[1])).collect())
}

/// Minimum-distance decision. Points on a decision boundary go to the
/// positive real side, then the positive imaginary side.
pub fn hard_detect(z: C64) -> C64 {
    let re = if z.re >= 0.0 {
        FRAC_1_SQRT_2
    } else {
        -FRAC_1_SQRT_2
    };
    let im = if z.im >= 0.0 {
        FRAC_1_SQRT_2
    } else {
        -FRAC_1_SQRT_2
    };
    C64::new(re, im)
}

/// Inverse of [`modulate`]; every input must be a constellation point.
pub fn demodulate(symbols: &[C64]) -> Result<Vec<u8>> {
    let mut bits = Vec::with_capacity(2 * symbols.len());
    for &s in symbols {
        if (s - hard_detect(s)).norm() > POINT_TOL {
            return Err(Error::NotConstellationPoint);
        }
        bits.push(u8::from(s.im < 0.0));
        bits.push(u8::from(s.re < 0.0));
    }
    Ok(bits)
}

/// Hard-detects arbitrary soft estimates and returns the decided bits.
pub fn detect_bits(estimates: &[C64]) -> Vec<u8> {
    estimates
        .iter()
        .flat_map(|z| [u8::from(z.im < 0.0), u8::from(z.re < 0.0)])
        .collect()
}

/// Hamming distance between equally long bit blocks.
pub fn count_bit_errors(sent: &[u8], received: &[u8]) -> Result<usize> {
    if sent.len() != received.len() {
        return Err(Error::LengthMismatch {
            expected: sent.len(),
            found: received.len(),
        });
    }
    Ok(sent.iter().zip(received).filter(|(a, b)| a != b).count())
}
