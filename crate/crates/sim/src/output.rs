//! CSV emission and parse-back of BER points.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use crate::error::{Result, SimError};
use crate::sweep::BerPoint;

pub const CSV_HEADER: [&str; 6] = [
    "scheme",
    "snr_db",
    "bits_sent",
    "bit_errors",
    "ber",
    "config_hash",
];

/// Decimal notation with six significant digits (`0.00123456789` →
/// `"0.00123457"`).
pub fn format_ber(ber: f64) -> String {
    if ber == 0.0 {
        return "0".to_string();
    }
    let digits = |x: f64| (5 - x.abs().log10().floor() as i32).max(0) as usize;
    let mut decimals = digits(ber);
    let mut text = format!("{ber:.decimals$}");
    // rounding may carry into a new leading digit (0.000999999999 → 0.001000000)
    let rounded: f64 = text.parse().expect("formatted number");
    if digits(rounded) < decimals {
        decimals = digits(rounded);
        text = format!("{ber:.decimals$}");
    }
    text
}

/// Writes the CSV to any sink.
pub fn write_csv<W: Write>(points: &[BerPoint], sink: W) -> csv::Result<()> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(sink);
    writer.write_record(CSV_HEADER)?;
    for p in points {
        writer.write_record([
            p.scheme.clone(),
            p.snr_db.to_string(),
            p.bits_sent.to_string(),
            p.bit_errors.to_string(),
            format_ber(p.ber),
            p.config_hash.clone(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

/// Writes `points` to `destination`, header first.
pub fn emit_csv(points: &[BerPoint], destination: &Path) -> Result<()> {
    let file = File::create(destination).map_err(|source| SimError::Io {
        path: destination.to_path_buf(),
        source,
    })?;
    write_csv(points, file).map_err(|source| SimError::Csv {
        path: destination.to_path_buf(),
        source,
    })
}

/// Reads points back from a CSV written by [`emit_csv`]. Diagnostics that
/// are not part of the file come back as zero.
pub fn read_csv(path: &Path) -> Result<Vec<BerPoint>> {
    let wrap = |source| SimError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut reader = csv::Reader::from_path(path).map_err(wrap)?;
    reader.deserialize().map(|row| row.map_err(wrap)).collect()
}
