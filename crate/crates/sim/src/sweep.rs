use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::SimConfig;
use crate::error::{Result, SimError};
use crate::seeding::{trial_seed, TrialIndex};
use crate::trial::{run_trial, TrialCounts};

/// Trials per parallel batch. The stopping rule is only evaluated between
/// batches, which keeps the trial count independent of thread scheduling.
pub const BATCH: u64 = 250;
/// Largest tolerated fraction of diverged (and redrawn) trials per point.
pub const DIVERGENCE_CAP: f64 = 0.01;
const MAX_ATTEMPTS: u64 = 50;

/// One point of a BER curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerPoint {
    pub scheme: String,
    pub snr_db: f64,
    pub bits_sent: u64,
    pub bit_errors: u64,
    pub ber: f64,
    pub config_hash: String,
    /// Completed trials (not written to CSV).
    #[serde(skip)]
    pub trials: u64,
    /// Trials that diverged during training and were redrawn.
    #[serde(skip)]
    pub failed_trials: u64,
    /// `Σ_i (errors in trial i)²`, for the trial-level standard error.
    #[serde(skip)]
    pub error_sq_sum: u64,
}

impl BerPoint {
    /// Monte Carlo standard error of `ber`.
    ///
    /// Errors within a block are correlated by the shared channel, so the
    /// spread is taken over per-trial error counts rather than from the
    /// binomial formula. Falls back to the binomial value when no per-trial
    /// data is available (points read back from CSV).
    pub fn std_error(&self) -> f64 {
        if self.bits_sent == 0 {
            return 0.0;
        }
        if self.trials < 2 {
            return (self.ber * (1.0 - self.ber) / self.bits_sent as f64).sqrt();
        }
        let t = self.trials as f64;
        let bits_per_trial = self.bits_sent as f64 / t;
        let mean = self.bit_errors as f64 / t;
        let var = (self.error_sq_sum as f64 / t - mean * mean).max(0.0) * t / (t - 1.0);
        (var / t).sqrt() / bits_per_trial
    }
}

#[derive(Debug, Default, Clone, Copy)]
struct Tally {
    bits_sent: u64,
    bit_errors: u64,
    error_sq_sum: u64,
    failed: u64,
}

impl Tally {
    fn add(mut self, counts: TrialCounts, failed: u64) -> Self {
        self.bits_sent += counts.bits_sent;
        self.bit_errors += counts.bit_errors;
        self.error_sq_sum += counts.bit_errors * counts.bit_errors;
        self.failed += failed;
        self
    }

    fn merge(mut self, other: Tally) -> Self {
        self.bits_sent += other.bits_sent;
        self.bit_errors += other.bit_errors;
        self.error_sq_sum += other.error_sq_sum;
        self.failed += other.failed;
        self
    }
}

/// Runs one trial, redrawing it with a fresh seed after a divergence.
/// Returns the counts and the number of diverged attempts.
fn trial_with_retry(
    config: &SimConfig,
    snr_db: f64,
    snr_index: u64,
    trial: u64,
) -> Result<(TrialCounts, u64)> {
    let mut last = None;
    for attempt in 0..MAX_ATTEMPTS {
        let index = TrialIndex {
            scheme_tag: config.scheme.tag(),
            snr_index,
            trial,
            attempt,
        };
        match run_trial(config, snr_db, trial_seed(config.master_seed, index)) {
            Ok(counts) => return Ok((counts, attempt)),
            Err(SimError::Core(e @ rstc_core::Error::Diverged { .. })) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("at least one attempt").into())
}

/// Accumulates trials at one SNR until the stopping rule is met.
pub fn run_point(config: &SimConfig, snr_index: usize, snr_db: f64) -> Result<BerPoint> {
    let mut tally = Tally::default();
    let mut trials = 0;
    loop {
        let end = (trials + BATCH).min(config.max_trials);
        let batch = (trials..end)
            .into_par_iter()
            .map(|t| trial_with_retry(config, snr_db, snr_index as u64, t))
            .try_fold(Tally::default, |acc, r| r.map(|(c, f)| acc.add(c, f)))
            .try_reduce(Tally::default, |a, b| Ok(a.merge(b)))?;
        tally = tally.merge(batch);
        trials = end;
        let enough = tally.bit_errors >= config.min_bit_errors && trials >= config.min_trials;
        if enough || trials >= config.max_trials {
            break;
        }
    }
    if tally.bit_errors < config.min_bit_errors {
        log::warn!(
            "{} at {snr_db} dB: stopped at the {}-trial cap with {} bit errors",
            config.scheme,
            config.max_trials,
            tally.bit_errors
        );
    }
    if tally.failed as f64 > DIVERGENCE_CAP * trials as f64 {
        return Err(SimError::DivergenceCap {
            scheme: config.scheme.to_string(),
            snr_db,
            failed: tally.failed,
            trials,
            cap_percent: 100.0 * DIVERGENCE_CAP,
        });
    }
    if tally.failed > 0 {
        log::info!(
            "{} at {snr_db} dB: {} diverged trials redrawn",
            config.scheme,
            tally.failed
        );
    }
    Ok(BerPoint {
        scheme: config.scheme.to_string(),
        snr_db,
        bits_sent: tally.bits_sent,
        bit_errors: tally.bit_errors,
        ber: tally.bit_errors as f64 / tally.bits_sent as f64,
        config_hash: config.hash(),
        trials,
        failed_trials: tally.failed,
        error_sq_sum: tally.error_sq_sum,
    })
}

/// One BER point per configured SNR, in list order.
pub fn run_sweep(config: &SimConfig) -> Result<Vec<BerPoint>> {
    config.validate()?;
    config.log_ignored();
    config
        .snr_db_list
        .iter()
        .enumerate()
        .map(|(i, &snr)| {
            let point = run_point(config, i, snr)?;
            log::debug!(
                "{} {snr} dB: ber {:e} over {} trials",
                point.scheme,
                point.ber,
                point.trials
            );
            Ok(point)
        })
        .collect()
}
