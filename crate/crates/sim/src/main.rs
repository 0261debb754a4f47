use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{ArgAction, Parser, ValueEnum};

use rstc_sim::{
    compare_report, emit_csv, parse_snr_list, run_sweep, BaselineReceiver, Scheme, SimConfig,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SchemeArg {
    Sm,
    StcAf,
    Rstc,
    Alrrmo,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Sm => Scheme::Sm,
            SchemeArg::StcAf => Scheme::StcAf,
            SchemeArg::Rstc => Scheme::RstcFixed,
            SchemeArg::Alrrmo => Scheme::Alrrmo,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReceiverArg {
    Adaptive,
    Wiener,
}

/// BER sweeps for amplify-and-forward relaying with randomized distributed
/// space-time codes.
#[derive(Debug, Parser)]
#[command(version, about)]
struct Args {
    /// JSON file mirroring the simulation config; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Scheme(s) to simulate; repeat or comma-separate for several.
    #[arg(long, value_enum, value_delimiter = ',', action = ArgAction::Append)]
    scheme: Vec<SchemeArg>,
    /// SNR grid in dB: `start:step:stop`, a comma list, or one value.
    #[arg(long)]
    snr: Option<String>,
    #[arg(long)]
    antennas: Option<usize>,
    #[arg(long)]
    relays: Option<usize>,
    #[arg(long, value_enum)]
    direct_link: Option<Switch>,
    #[arg(long)]
    pilots: Option<usize>,
    #[arg(long)]
    payload: Option<usize>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    feedback_bits: Option<u32>,
    #[arg(long)]
    feedback_error_prob: Option<f64>,
    #[arg(long)]
    perfect_feedback: bool,
    /// Gray-label the quantizer indices.
    #[arg(long)]
    gray_labels: bool,
    /// Relay power budget P_R (defaults to the unit-modulus code power).
    #[arg(long)]
    power_budget: Option<f64>,
    /// Receiver of the fixed-code relay schemes.
    #[arg(long, value_enum)]
    baseline_receiver: Option<ReceiverArg>,
    /// Keep adapting the filters on payload decisions.
    #[arg(long)]
    decision_directed: bool,
    #[arg(long)]
    min_bit_errors: Option<u64>,
    #[arg(long)]
    min_trials: Option<u64>,
    #[arg(long)]
    max_trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// CSV destination (stdout when omitted).
    #[arg(long)]
    output: Option<PathBuf>,
    /// Plain-text comparison report destination.
    #[arg(long)]
    report: Option<PathBuf>,
}

impl Args {
    fn apply(&self, cfg: &mut SimConfig) -> anyhow::Result<()> {
        if let Some(snr) = &self.snr {
            cfg.snr_db_list = parse_snr_list(snr)?;
        }
        macro_rules! set {
            ($($flag:ident => $field:ident),* $(,)?) => {
                $(if let Some(v) = self.$flag { cfg.$field = v; })*
            };
        }
        set!(
            antennas => antennas,
            relays => relays,
            pilots => pilots,
            payload => payload,
            beta => beta,
            mu => mu,
            feedback_bits => feedback_bits,
            feedback_error_prob => feedback_error_prob,
            min_bit_errors => min_bit_errors,
            min_trials => min_trials,
            max_trials => max_trials,
            seed => master_seed,
        );
        if let Some(d) = self.direct_link {
            cfg.direct_link = d == Switch::On;
        }
        if self.power_budget.is_some() {
            cfg.power_budget = self.power_budget;
        }
        if let Some(r) = self.baseline_receiver {
            cfg.baseline_receiver = match r {
                ReceiverArg::Adaptive => BaselineReceiver::Adaptive,
                ReceiverArg::Wiener => BaselineReceiver::Wiener,
            };
        }
        cfg.perfect_feedback |= self.perfect_feedback;
        cfg.gray_labels |= self.gray_labels;
        cfg.decision_directed |= self.decision_directed;
        Ok(())
    }
}

fn main() -> anyhow::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let args = Args::parse();

    let mut base = match &args.config {
        Some(path) => SimConfig::from_json_file(path)?,
        None => SimConfig::default(),
    };
    args.apply(&mut base)?;
    let schemes: Vec<Scheme> = if args.scheme.is_empty() {
        vec![base.scheme]
    } else {
        args.scheme.iter().copied().map(Scheme::from).collect()
    };

    let mut all = Vec::new();
    let mut sweeps = Vec::new();
    for scheme in schemes {
        let cfg = SimConfig {
            scheme,
            ..base.clone()
        };
        log::info!("running {scheme} (config {})", cfg.hash());
        let points = run_sweep(&cfg).with_context(|| format!("{scheme} sweep failed"))?;
        all.extend(points.iter().cloned());
        sweeps.push((scheme.to_string(), points));
    }

    match &args.output {
        Some(path) => emit_csv(&all, path)?,
        None => rstc_sim::write_csv(&all, std::io::stdout().lock())?,
    }
    if let Some(path) = &args.report {
        if sweeps.is_empty() {
            bail!("nothing to report");
        }
        let text = compare_report(&sweeps)?;
        std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}
