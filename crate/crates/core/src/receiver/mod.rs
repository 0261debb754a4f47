//! Linear MMSE reception and joint optimization of the receive filters and
//! the relays' randomized matrices.
//!
//! Two routes are provided: the closed-form design ([`mmse_filter`] and
//! [`rstc_closed_form`]) evaluated from the exact second-order statistics of
//! the equivalent model, and the stochastic-gradient alternation
//! ([`AdaptState`], [`alrrmo_train`]) that needs no matrix inversion at all.

mod adaptive;
mod closed_form;

use alloc::vec::Vec;

use crate::channel::NoiseModel;
use crate::modem::hard_detect;
use crate::numerics::{hermitian_solve_vec, inner, ComplexMat};
use crate::stc::EquivalentChannel;
use crate::{Error, Result, C64, SIGNAL_POWER};

pub use adaptive::{
    alrrmo_train, filter_errors, matched_filter_init, symbol_code_gradient, AdaptState,
    TrainingReport, DIVERGENCE_FACTOR,
};
pub use closed_form::{code_objective, rstc_closed_form, ClosedFormCode, CodeQuadratic};

/// One linear filter per transmitted symbol; `ŝ_j = w_jᴴ r`.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterBank {
    filters: Vec<Vec<C64>>,
}

impl FilterBank {
    pub fn new(filters: Vec<Vec<C64>>) -> Result<Self> {
        let Some(first) = filters.first() else {
            return Err(Error::InvalidParameter("filter bank is empty"));
        };
        let len = first.len();
        if let Some(bad) = filters.iter().find(|w| w.len() != len) {
            return Err(Error::LengthMismatch {
                expected: len,
                found: bad.len(),
            });
        }
        Ok(FilterBank { filters })
    }

    pub fn zeros(symbols: usize, len: usize) -> Self {
        FilterBank {
            filters: alloc::vec![alloc::vec![C64::new(0.0, 0.0); len]; symbols],
        }
    }

    pub fn symbols(&self) -> usize {
        self.filters.len()
    }

    /// Length of every filter (the receive-vector length).
    pub fn len(&self) -> usize {
        self.filters[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn filter(&self, j: usize) -> &[C64] {
        &self.filters[j]
    }

    pub fn filter_mut(&mut self, j: usize) -> &mut [C64] {
        &mut self.filters[j]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[C64]> {
        self.filters.iter().map(Vec::as_slice)
    }

    pub fn is_finite(&self) -> bool {
        self.filters
            .iter()
            .flatten()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Soft estimates `w_jᴴ r`.
    pub fn estimate(&self, received: &[C64]) -> Result<Vec<C64>> {
        if received.len() != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                found: received.len(),
            });
        }
        Ok(self.iter().map(|w| inner(w, received)).collect())
    }
}

/// Second-order statistics of the receive vector: `E[r rᴴ]` and `E[r s_j*]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationPair {
    pub auto: ComplexMat,
    pub cross: Vec<Vec<C64>>,
}

/// `E[r rᴴ] = σ_s² D Dᴴ + C_noise` and `E[r s_j*] = σ_s² d_j`, exact under the
/// equivalent model.
pub fn analytic_correlations(eq: &EquivalentChannel, noise: NoiseModel) -> CorrelationPair {
    let d = eq.stacked();
    let auto = d
        .matmul(&d.adjoint())
        .expect("D Dᴴ")
        .scale_real(SIGNAL_POWER)
        .add(&eq.noise_covariance(noise))
        .expect("same shape");
    let cross = (0..eq.symbols())
        .map(|j| eq.column(j).into_iter().map(|x| x * SIGNAL_POWER).collect())
        .collect();
    CorrelationPair { auto, cross }
}

/// Wiener filter `w_j = E[r rᴴ]⁻¹ E[r s_j*]`.
pub fn mmse_filter(corr: &CorrelationPair, j: usize) -> Result<Vec<C64>> {
    hermitian_solve_vec(&corr.auto, &corr.cross[j])
}

pub fn wiener_filters(corr: &CorrelationPair) -> Result<FilterBank> {
    FilterBank::new(
        (0..corr.cross.len())
            .map(|j| mmse_filter(corr, j))
            .collect::<Result<_>>()?,
    )
}

/// `E|s_j − wᴴ r|² = σ_s² − 2 Re(wᴴ p_j) + wᴴ R w`, clamped at zero.
pub fn mmse_value(corr: &CorrelationPair, w: &[C64], j: usize) -> f64 {
    let rw = corr.auto.mul_vec(w).expect("filter length");
    let value = SIGNAL_POWER - 2.0 * inner(w, &corr.cross[j]).re + inner(w, &rw).re;
    if value < -1e-9 {
        log::warn!("mean squared error evaluated negative ({value:e}); clamping to 0");
    }
    value.max(0.0)
}

/// Hard decisions `hard_detect(w_jᴴ r)`.
pub fn detect_symbols(filters: &FilterBank, received: &[C64]) -> Result<Vec<C64>> {
    Ok(filters
        .estimate(received)?
        .into_iter()
        .map(hard_detect)
        .collect())
}

#[cfg(test)]
mod tests;
