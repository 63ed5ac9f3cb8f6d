//! Rendering helpers shared by the subcommands.

use std::io::{self, Write};

use serde::Serialize;

/// Fixed 17-significant-digit scientific notation: round-trips every `f64`
/// and reads the same on every platform.
pub fn sig17(x: f64) -> String {
    if x == 0.0 {
        // avoid "-0.0000000000000000e0"
        return "0.0000000000000000e0".into();
    }
    format!("{x:.16e}")
}

pub fn csv_row<W: Write + ?Sized>(out: &mut W, fields: &[String]) -> io::Result<()> {
    writeln!(out, "{}", fields.join(","))
}

pub fn json<W: Write + ?Sized, T: Serialize>(out: &mut W, value: &T) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)
}

/// `"[a, b] ∪ [c, d]"` for a union of intervals.
pub fn union(intervals: &[(f64, f64)]) -> String {
    if intervals.is_empty() {
        return "∅".into();
    }
    intervals
        .iter()
        .map(|(a, b)| format!("[{a}, {b}]"))
        .collect::<Vec<_>>()
        .join(" ∪ ")
}

pub fn point(k: &[f64]) -> String {
    format!("({})", k.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", "))
}
