//! Text serialisation shared by the subcommands.

use std::fmt::Write as _;

/// Significant digits used for every number the CLI prints.
pub const SIG_DIGITS: usize = 12;

/// `printf("%.{sig}g")`: `sig` significant digits, trailing zeros dropped,
/// scientific notation only for very large or small magnitudes.
pub fn fmt_sig(v: f64, sig: usize) -> String {
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sig = sig.max(1);
    let sci = format!("{:.*e}", sig - 1, v);
    let (mantissa, exp) = sci.split_once('e').unwrap_or((sci.as_str(), "0"));
    let exp: i32 = exp.parse().unwrap_or(0);
    if exp < -4 || exp >= sig as i32 {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim_zeros(mantissa), sign, exp.abs())
    } else {
        let decimals = (sig as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{v:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn fmt12(v: f64) -> String {
    fmt_sig(v, SIG_DIGITS)
}

/// `v` rounded to twelve significant digits.
pub fn round12(v: f64) -> f64 {
    fmt12(v).parse().unwrap_or(v)
}

/// One row of a sweep CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveRecord {
    pub series: String,
    pub d: f64,
    pub value: f64,
}

pub const CSV_HEADER: &str = "series,d,value";

pub fn write_csv(records: &[CurveRecord]) -> String {
    let mut out = String::with_capacity(32 * (records.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for rec in records {
        let _ = writeln!(out, "{},{},{}", rec.series, fmt12(rec.d), fmt12(rec.value));
    }
    out
}

pub fn parse_csv(text: &str) -> Result<Vec<CurveRecord>, String> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, CSV_HEADER)) => {}
        Some((_, other)) => return Err(format!("line 1: expected header `{CSV_HEADER}`, got `{other}`")),
        None => return Err("empty input".into()),
    }
    lines
        .map(|(i, line)| {
            let mut fields = line.split(',');
            let (Some(series), Some(d), Some(value), None) =
                (fields.next(), fields.next(), fields.next(), fields.next())
            else {
                return Err(format!("line {}: expected 3 fields", i + 1));
            };
            let num = |s: &str| s.parse::<f64>().map_err(|e| format!("line {}: `{s}`: {e}", i + 1));
            Ok(CurveRecord {
                series: series.to_string(),
                d: num(d)?,
                value: num(value)?,
            })
        })
        .collect()
}

/// A series label is written verbatim into the CSV, so it must not break it.
pub fn valid_label(label: &str) -> bool {
    !label.is_empty() && !label.contains([',', '"', '\n', '\r'])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn general_format_matches_printf() {
        // Expected strings from C printf("%.12g").
        let cases = [
            (0.5, "0.5"),
            (1.0, "1"),
            (100.0, "100"),
            (0.25, "0.25"),
            (0.367_879_441_171_442_3, "0.367879441171"),
            (0.632_120_558_828_557_7, "0.632120558829"),
            (1e-5, "1e-05"),
            (1.234_567_890_123_4e-7, "1.23456789012e-07"),
            (0.000_123_456_789_012_345, "0.000123456789012"),
            (123_456_789_012_345.0, "1.23456789012e+14"),
            (999_999_999_999.6, "1e+12"),
            (0.0, "0"),
            (-2.5, "-2.5"),
        ];
        for (v, want) in cases {
            assert_eq!(fmt12(v), want, "{v:e}");
        }
    }

    #[test]
    fn csv_rejects_malformed() {
        assert!(parse_csv("").is_err());
        assert!(parse_csv("a,b,c\n").is_err());
        assert!(parse_csv("series,d,value\nx,1\n").is_err());
        assert!(parse_csv("series,d,value\nx,1,zz\n").is_err());
        assert!(!valid_label("a,b"));
        assert!(valid_label("mu=5"));
    }

    proptest! {
        #[test]
        fn csv_reemission_is_identical(
            rows in prop::collection::vec(("[a-z]{1,3}=[0-9.]{1,5}", 0.0..1e4f64, -1.0..1.0f64), 0..40)
        ) {
            let records: Vec<CurveRecord> = rows
                .into_iter()
                .map(|(series, d, value)| CurveRecord { series, d, value })
                .collect();
            let first = write_csv(&records);
            let second = write_csv(&parse_csv(&first).unwrap());
            prop_assert_eq!(first, second);
        }

        #[test]
        fn rounding_is_idempotent(v in -1e20..1e20f64) {
            let once = fmt12(v);
            prop_assert_eq!(fmt12(once.parse().unwrap()), once);
        }
    }
}
