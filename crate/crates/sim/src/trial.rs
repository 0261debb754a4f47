//! One coherence block end to end.

use rand::Rng;
use rstc_core::channel::{complex_gaussian, draw_channel_set, NoiseModel};
use rstc_core::feedback::{feedback_roundtrip, Labeling, QuantizerSpec};
use rstc_core::modem::{count_bit_errors, detect_bits, hard_detect, modulate};
use rstc_core::receiver::{
    alrrmo_train, analytic_correlations, filter_errors, matched_filter_init, wiener_filters,
    AdaptState, CorrelationPair, FilterBank,
};
use rstc_core::stc::{Alamouti, AmplifyGain, CoopLink, RandomizedCode};
use rstc_core::{ComplexMat, C64};

use crate::config::{BaselineReceiver, Scheme, SimConfig};
use crate::error::Result;
use crate::seeding::{stream, Stream};

/// Relay output power target of the fixed AF gain, equal to the source
/// symbol power.
pub const RELAY_POWER: f64 = 1.0;

/// Payload bit counts of one trial.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TrialCounts {
    pub bits_sent: u64,
    pub bit_errors: u64,
}

fn random_symbols(n: usize, rng: &mut impl Rng) -> (Vec<u8>, Vec<C64>) {
    let bits: Vec<u8> = (0..2 * n).map(|_| rng.random_range(0..2u8)).collect();
    let symbols = modulate(&bits).expect("even bit count");
    (bits, symbols)
}

/// Runs one block: channel draw, receiver set-up (and training), payload
/// detection. Only payload bits are counted.
///
/// A diverged training run surfaces as `rstc_core::Error::Diverged`; the
/// sweep redraws the trial.
pub fn run_trial(config: &SimConfig, snr_db: f64, seed: u64) -> Result<TrialCounts> {
    let noise = NoiseModel::from_snr_db(snr_db)?;
    match config.scheme {
        Scheme::Sm => spatial_multiplexing(config, noise, seed),
        _ => relay_trial(config, noise, seed),
    }
}

fn spatial_multiplexing(config: &SimConfig, noise: NoiseModel, seed: u64) -> Result<TrialCounts> {
    let n = config.antennas;
    let mut channel_rng = stream(seed, Stream::Channel);
    let mut bits_rng = stream(seed, Stream::Bits);
    let mut noise_rng = stream(seed, Stream::Noise);

    let h = ComplexMat::from_fn(n, n, |_, _| complex_gaussian(1.0, &mut channel_rng));
    let auto = h
        .matmul(&h.adjoint())?
        .add(&ComplexMat::identity(n).scale_real(noise.sigma2()))?;
    let corr = CorrelationPair {
        auto,
        cross: (0..n).map(|j| h.col(j)).collect(),
    };
    let filters = wiener_filters(&corr)?;

    let mut counts = TrialCounts::default();
    for _ in 0..config.payload {
        let (bits, s) = random_symbols(n, &mut bits_rng);
        let r: Vec<C64> = h
            .mul_vec(&s)?
            .into_iter()
            .map(|x| x + noise.sample(&mut noise_rng))
            .collect();
        let decided = detect_bits(&filters.estimate(&r)?);
        counts.bits_sent += bits.len() as u64;
        counts.bit_errors += count_bit_errors(&bits, &decided)? as u64;
    }
    Ok(counts)
}

fn relay_trial(config: &SimConfig, noise: NoiseModel, seed: u64) -> Result<TrialCounts> {
    let n = config.antennas;
    let mut channel_rng = stream(seed, Stream::Channel);
    let mut bits_rng = stream(seed, Stream::Bits);
    let mut noise_rng = stream(seed, Stream::Noise);
    let mut code_rng = stream(seed, Stream::Code);
    let mut feedback_rng = stream(seed, Stream::Feedback);

    let link = CoopLink::new(
        draw_channel_set(n, config.relays, &mut channel_rng)?,
        AmplifyGain::fixed(n, noise, RELAY_POWER)?,
        noise,
        config.direct_link,
        Alamouti,
    )?;
    let budget = config.budget();
    let initial = match config.scheme {
        Scheme::StcAf => RandomizedCode::identity(config.relays, &Alamouti, budget)?,
        _ => RandomizedCode::random(config.relays, &Alamouti, budget, &mut code_rng)?,
    };

    let (mut filters, code, tracking) = if config.needs_pilots() {
        let mu = if config.scheme == Scheme::Alrrmo {
            config.mu
        } else {
            0.0
        };
        let start = matched_filter_init(&link.equivalent(&initial)?);
        let mut state = AdaptState::new(start, initial, config.beta, mu)?;
        let pilots: Vec<Vec<C64>> = (0..config.pilots)
            .map(|_| random_symbols(n, &mut bits_rng).1)
            .collect();
        alrrmo_train(&mut state, &link, &pilots, &mut noise_rng)?;
        let code = if config.scheme == Scheme::Alrrmo && !config.perfect_feedback {
            let labeling = if config.gray_labels {
                Labeling::Gray
            } else {
                Labeling::Natural
            };
            let spec = QuantizerSpec::new(
                config.feedback_bits,
                QuantizerSpec::default_clip(&state.code.layout()),
            )?
            .with_labeling(labeling);
            feedback_roundtrip(
                &state.code,
                spec,
                config.feedback_error_prob,
                &mut feedback_rng,
            )?
        } else {
            state.code.clone()
        };
        let tracking = config.decision_directed.then_some(config.beta);
        (state.filters, code, tracking)
    } else {
        debug_assert_eq!(config.baseline_receiver, BaselineReceiver::Wiener);
        let filters = wiener_filters(&analytic_correlations(&link.equivalent(&initial)?, noise))?;
        (filters, initial, None)
    };

    let mut counts = TrialCounts::default();
    for _ in 0..config.payload {
        let (bits, s) = random_symbols(n, &mut bits_rng);
        let r = link.receive(&code, &s, &mut noise_rng)?;
        let estimates = filters.estimate(&r)?;
        let decided = detect_bits(&estimates);
        counts.bits_sent += bits.len() as u64;
        counts.bit_errors += count_bit_errors(&bits, &decided)? as u64;
        if let Some(beta) = tracking {
            let reference: Vec<C64> = estimates.iter().copied().map(hard_detect).collect();
            track_decisions(&mut filters, beta, &r, &reference)?;
        }
    }
    Ok(counts)
}

/// Decision-directed filter update `w_j ← w_j + β e_j* r` with
/// `e_j = ŝ_j − w_jᴴ r`.
fn track_decisions(filters: &mut FilterBank, beta: f64, r: &[C64], decided: &[C64]) -> Result<()> {
    let errors = filter_errors(filters, r, decided)?;
    for (j, e) in errors.iter().enumerate() {
        for (w, x) in filters.filter_mut(j).iter_mut().zip(r) {
            *w += e.conj() * beta * x;
        }
    }
    Ok(())
}
