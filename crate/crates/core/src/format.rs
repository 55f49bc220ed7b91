//! Fixed-precision number formatting for tables and figures.

use alloc::format;
use alloc::string::String;

/// Token written for an undefined metric in text tables.
pub const UNDEFINED: &str = "NA";

/// Formats `value` with four decimals.
///
/// `core::fmt` rounds the exact binary value, so a tie (only possible when the
/// value is exactly representable) goes to the even digit. Negative zero is
/// written as `0.0000`.
pub fn fixed4(value: f64) -> String {
    let s = format!("{value:.4}");
    if s == "-0.0000" {
        String::from("0.0000")
    } else {
        s
    }
}

pub fn fixed4_opt(value: Option<f64>) -> String {
    match value {
        Some(v) => fixed4(v),
        None => String::from(UNDEFINED),
    }
}
