//! Side-by-side BER tables and SNR gains at target error rates.

use std::fmt::Write;

use crate::error::{Result, SimError};
use crate::output::format_ber;
use crate::sweep::BerPoint;

/// Target BERs at which gains are reported.
pub const TARGETS: [f64; 2] = [1e-2, 1e-3];

/// SNR at which a curve first falls to `target`, by linear interpolation of
/// `log10(BER)` against SNR between the bracketing points. `None` when the
/// curve never reaches the target inside the grid.
pub fn crossing(points: &[BerPoint], target: f64) -> Option<f64> {
    let mut sorted: Vec<&BerPoint> = points.iter().collect();
    sorted.sort_by(|a, b| a.snr_db.total_cmp(&b.snr_db));
    if let Some(first) = sorted.first() {
        if first.ber <= target {
            return (first.ber == target).then_some(first.snr_db);
        }
    }
    for pair in sorted.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if a.ber > target && b.ber <= target {
            if b.ber == 0.0 {
                // log-linear interpolation is undefined at zero; no crossing
                // can be placed between the two points
                return None;
            }
            let (la, lb, lt) = (a.ber.log10(), b.ber.log10(), target.log10());
            return Some(a.snr_db + (lt - la) / (lb - la) * (b.snr_db - a.snr_db));
        }
    }
    None
}

/// SNR gain of `better` over `worse` at `target`: how many dB earlier
/// `better` reaches the target.
pub fn gain_db(better: &[BerPoint], worse: &[BerPoint], target: f64) -> Option<f64> {
    Some(crossing(worse, target)? - crossing(better, target)?)
}

fn common_grid(sweeps: &[(String, Vec<BerPoint>)]) -> Result<Vec<f64>> {
    let Some((_, first)) = sweeps.first() else {
        return Err(SimError::Report("no sweeps given".into()));
    };
    let mut grid: Vec<f64> = first.iter().map(|p| p.snr_db).collect();
    for (_, points) in &sweeps[1..] {
        grid.retain(|snr| points.iter().any(|p| p.snr_db == *snr));
    }
    if grid.is_empty() {
        return Err(SimError::Report("the sweeps share no SNR point".into()));
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    Ok(grid)
}

/// Plain-text comparison of labeled sweeps: a BER table over the shared SNR
/// grid, then the gain of every sweep over every other at each target.
/// Curves that never reach a target are marked `not reached`.
pub fn compare_report(sweeps: &[(String, Vec<BerPoint>)]) -> Result<String> {
    let grid = common_grid(sweeps)?;
    let restricted: Vec<(&str, Vec<BerPoint>)> = sweeps
        .iter()
        .map(|(label, points)| {
            let kept = points
                .iter()
                .filter(|p| grid.contains(&p.snr_db))
                .cloned()
                .collect();
            (label.as_str(), kept)
        })
        .collect();

    let width = restricted
        .iter()
        .map(|(l, _)| l.len())
        .max()
        .unwrap_or(0)
        .max(12);
    let mut out = String::new();
    write!(out, "{:>8}", "snr_db").unwrap();
    for (label, _) in &restricted {
        write!(out, "  {label:>width$}").unwrap();
    }
    out.push('\n');
    for snr in &grid {
        write!(out, "{snr:>8}").unwrap();
        for (_, points) in &restricted {
            let p = points.iter().find(|p| p.snr_db == *snr).expect("on grid");
            write!(out, "  {:>width$}", format_ber(p.ber)).unwrap();
        }
        out.push('\n');
    }

    for target in TARGETS {
        writeln!(out, "\ngain at BER {target:e}:").unwrap();
        for (a, pa) in &restricted {
            for (b, pb) in &restricted {
                if a == b {
                    continue;
                }
                match gain_db(pa, pb, target) {
                    Some(g) => writeln!(out, "  {a} over {b}: {g:.2} dB").unwrap(),
                    None => writeln!(out, "  {a} over {b}: not reached").unwrap(),
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(label: &str, shift: f64) -> Vec<BerPoint> {
        // BER = 10^(−(snr − shift)/5): one decade per 5 dB
        (0..=10)
            .map(|i| {
                let snr = 2.0 * i as f64;
                let ber = 10f64.powf(-(snr - shift) / 5.0).min(0.5);
                BerPoint {
                    scheme: label.into(),
                    snr_db: snr,
                    bits_sent: 1_000_000,
                    bit_errors: (ber * 1e6) as u64,
                    ber,
                    config_hash: String::new(),
                    trials: 0,
                    failed_trials: 0,
                    error_sq_sum: 0,
                }
            })
            .collect()
    }

    #[test]
    fn identical_sweeps_have_zero_gain() {
        let a = curve("A", 0.0);
        for t in TARGETS {
            assert!(gain_db(&a, &a, t).unwrap().abs() < 1e-12);
        }
        let text = compare_report(&[("A".into(), a.clone()), ("B".into(), a)]).unwrap();
        assert!(text.contains("A over B: 0.00 dB"));
    }

    #[test]
    fn recovers_a_known_horizontal_offset() {
        let better = curve("better", 0.0);
        let worse = curve("worse", 3.0);
        for t in TARGETS {
            let g = gain_db(&better, &worse, t).unwrap();
            assert!((g - 3.0).abs() < 0.1, "{g}");
        }
    }

    #[test]
    fn crossing_interpolates_in_log_domain() {
        let c = curve("A", 0.0);
        // exact on this curve: 1e-2 at 10 dB, 1e-3 at 15 dB
        assert!((crossing(&c, 1e-2).unwrap() - 10.0).abs() < 1e-9);
        assert!((crossing(&c, 1e-3).unwrap() - 15.0).abs() < 1e-9);
    }

    #[test]
    fn unreached_target_is_flagged() {
        let high = curve("high", 30.0);
        assert_eq!(crossing(&high, 1e-3), None);
        let text =
            compare_report(&[("low".into(), curve("low", 0.0)), ("high".into(), high)]).unwrap();
        assert!(text.contains("low over high: not reached"));
    }

    #[test]
    fn disjoint_grids_are_rejected() {
        let mut b = curve("B", 0.0);
        for p in &mut b {
            p.snr_db += 1.0;
        }
        assert!(compare_report(&[("A".into(), curve("A", 0.0)), ("B".into(), b)]).is_err());
        assert!(compare_report(&[]).is_err());
    }
}
