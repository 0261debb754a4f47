use alloc::vec::Vec;

use rand::Rng;

use crate::numerics::{norm_sqr, ComplexMat};
use crate::stc::{
    budget_deviation, normalize_code, CoopLink, EquivalentChannel, RandomizedCode, SpaceTimeCode,
};
use crate::{Error, Result, C64};

use super::FilterBank;

/// Training aborts once the running squared error exceeds this multiple of
/// its starting level.
pub const DIVERGENCE_FACTOR: f64 = 10.0;
const WARMUP: usize = 10;
const SMOOTHING: f64 = 0.1;
const ERROR_FLOOR: f64 = 1e-2;

/// `w_j = d_j / ‖d_j‖²`.
pub fn matched_filter_init(eq: &EquivalentChannel) -> FilterBank {
    let filters = (0..eq.symbols())
        .map(|j| {
            let d = eq.column(j);
            let energy = norm_sqr(&d);
            if energy > 0.0 {
                d.into_iter().map(|x| x / energy).collect()
            } else {
                d
            }
        })
        .collect();
    FilterBank::new(filters).expect("equal-length columns")
}

/// `e_j = s_j − w_jᴴ r`.
pub fn filter_errors(
    filters: &FilterBank,
    received: &[C64],
    reference: &[C64],
) -> Result<Vec<C64>> {
    if reference.len() != filters.symbols() {
        return Err(Error::LengthMismatch {
            expected: filters.symbols(),
            found: reference.len(),
        });
    }
    Ok(filters
        .estimate(received)?
        .into_iter()
        .zip(reference)
        .map(|(est, s)| s - est)
        .collect())
}

/// `∂|e_j|²/∂conj(R_k)` for every relay, given filter `w` and its error `e`.
///
/// `drives[k]` is relay `k`'s encoder input. Plain slots contribute
/// `−e·Gᴴ w_t (P_t s̃)ᴴ`; conjugated slots see `conj(R)` and contribute
/// `−conj(e·Gᵀ w_t (P_t s̃)ᴴ)`. Summed over the symbols carried in `s̃`, this
/// is the per-symbol gradient `−e_j s_j* C_kjᴴ w_j` written for the physical
/// `N×N` matrix.
pub fn symbol_code_gradient<C: SpaceTimeCode>(
    link: &CoopLink<C>,
    w: &[C64],
    error: C64,
    drives: &[Vec<C64>],
) -> Result<Vec<ComplexMat>> {
    let n = link.antennas();
    let offset = link.direct_rows();
    let mut grads = Vec::with_capacity(link.relays());
    for (k, drive) in drives.iter().enumerate().take(link.relays()) {
        let gk = &link.channels.relay_dest[k];
        let mut grad = ComplexMat::zeros(n, n);
        for t in 0..link.stc.slots() {
            let map = link.stc.slot_map(t);
            let w_t = &w[offset + t * n..offset + (t + 1) * n];
            let u = map.dispersion.mul_vec(drive)?;
            if map.conjugated {
                let a = gk.transpose().mul_vec(w_t)?;
                for mi in 0..n {
                    for ni in 0..n {
                        grad[(mi, ni)] -= (error * a[mi] * u[ni].conj()).conj();
                    }
                }
            } else {
                let a = gk.adjoint().mul_vec(w_t)?;
                for mi in 0..n {
                    for ni in 0..n {
                        grad[(mi, ni)] -= error * a[mi] * u[ni].conj();
                    }
                }
            }
        }
        grads.push(grad);
    }
    Ok(grads)
}

/// Filters, code and step sizes of the joint stochastic-gradient adaptation.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptState {
    pub filters: FilterBank,
    pub code: RandomizedCode,
    pub beta: f64,
    pub mu: f64,
    pub iteration: usize,
}

impl AdaptState {
    pub fn new(filters: FilterBank, code: RandomizedCode, beta: f64, mu: f64) -> Result<Self> {
        if !(beta >= 0.0) || !(mu >= 0.0) || !beta.is_finite() || !mu.is_finite() {
            return Err(Error::InvalidParameter(
                "step sizes must be finite and >= 0",
            ));
        }
        Ok(AdaptState {
            filters,
            code,
            beta,
            mu,
            iteration: 0,
        })
    }

    /// `w_j ← w_j + β e_j* r` for precomputed errors.
    pub fn step_filters(&mut self, received: &[C64], errors: &[C64]) {
        for (j, e) in errors.iter().enumerate() {
            let scale = e.conj() * self.beta;
            for (w, r) in self.filters.filter_mut(j).iter_mut().zip(received) {
                *w += scale * r;
            }
        }
    }

    /// `R_k ← R_k − μ Σ_j ∂|e_j|²/∂conj(R_k)`, then renormalize to the budget.
    pub fn step_code<C: SpaceTimeCode>(
        &mut self,
        link: &CoopLink<C>,
        errors: &[C64],
        drives: &[Vec<C64>],
    ) -> Result<()> {
        if self.mu == 0.0 {
            return Ok(());
        }
        let mut code = self.code.clone();
        for (j, &e) in errors.iter().enumerate() {
            let grads = symbol_code_gradient(link, self.filters.filter(j), e, drives)?;
            for (r, g) in code.matrices_mut().iter_mut().zip(&grads) {
                r.add_scaled(g, C64::new(-self.mu, 0.0))?;
            }
        }
        self.code = normalize_code(&code)?;
        Ok(())
    }

    /// One joint update on a pilot: errors from the current filters, code
    /// step using those filters, then filter step. Returns `Σ_j |e_j|²`.
    pub fn step<C: SpaceTimeCode>(
        &mut self,
        link: &CoopLink<C>,
        received: &[C64],
        reference: &[C64],
        drives: &[Vec<C64>],
    ) -> Result<f64> {
        let errors = filter_errors(&self.filters, received, reference)?;
        self.step_code(link, &errors, drives)?;
        self.step_filters(received, &errors);
        self.iteration += 1;
        Ok(norm_sqr(&errors))
    }
}

/// Per-pilot diagnostics of a training run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingReport {
    /// `Σ_j |e_j|²` at each pilot, before that pilot's update.
    pub error_energy: Vec<f64>,
    /// Largest relative deviation of the code's equivalent trace from the
    /// budget seen after any update.
    pub max_budget_deviation: f64,
}

/// Alternating stochastic-gradient training over a pilot preamble.
///
/// Every pilot is pushed through the literal link under the *current* code,
/// as if the relays had just applied the latest fed-back matrix. The code
/// gradient uses the destination's noise-free view of each relay's encoder
/// input, `g F_k s`. Training stops with [`Error::Diverged`] once the
/// smoothed squared error exceeds [`DIVERGENCE_FACTOR`] times its level over
/// the first pilots.
pub fn alrrmo_train<C: SpaceTimeCode, R: Rng + ?Sized>(
    state: &mut AdaptState,
    link: &CoopLink<C>,
    pilots: &[Vec<C64>],
    rng: &mut R,
) -> Result<TrainingReport> {
    if pilots.is_empty() {
        return Err(Error::InvalidParameter("need at least one pilot"));
    }
    let mut report = TrainingReport {
        error_energy: Vec::with_capacity(pilots.len()),
        max_budget_deviation: budget_deviation(&state.code),
    };
    let floor = ERROR_FLOOR * state.filters.symbols() as f64;
    let mut reference = None;
    let mut running = 0.0;
    for s in pilots {
        let received = link.receive(&state.code, s, rng)?;
        let drives = (0..link.relays())
            .map(|k| link.relay_drive_estimate(k, s))
            .collect::<Result<Vec<_>>>()?;
        let energy = state.step(link, &received, s, &drives)?;
        if !energy.is_finite() || !state.filters.is_finite() {
            return Err(Error::Diverged {
                iteration: state.iteration,
            });
        }
        report.error_energy.push(energy);
        report.max_budget_deviation = report
            .max_budget_deviation
            .max(budget_deviation(&state.code));

        let seen = report.error_energy.len();
        match reference {
            None if seen >= WARMUP || seen == pilots.len() => {
                let start = report.error_energy.iter().sum::<f64>() / seen as f64;
                reference = Some(start.max(floor));
                running = start;
            }
            None => {}
            Some(level) => {
                running += SMOOTHING * (energy - running);
                if running > DIVERGENCE_FACTOR * level {
                    return Err(Error::Diverged {
                        iteration: state.iteration,
                    });
                }
            }
        }
    }
    Ok(report)
}
