//! Deterministic number formatting for CLI output.
//!
//! Every float is written with 12 significant digits in `%g` style
//! (trailing zeros stripped, exponent form below `1e-4` and from `1e12`), both in
//! tables/CSV and inside JSON documents.

use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

pub const SIGNIFICANT_DIGITS: usize = 12;

/// `%.12g`-style formatting. Non-finite values print as `nan`/`inf`/`-inf`.
pub fn fmt_sig(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= SIGNIFICANT_DIGITS as i32 {
        let mantissa = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exp).max(0) as usize;
        strip_zeros(&format!("{v:.decimals$}")).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Pretty JSON with floats written by [`fmt_sig`]; non-finite values become `null`.
struct SigFormatter {
    pretty: PrettyFormatter<'static>,
}

macro_rules! delegate {
    ($($name:ident),* $(,)?) => {
        $(
            fn $name<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
                self.pretty.$name(writer)
            }
        )*
    };
}

impl Formatter for SigFormatter {
    delegate!(
        begin_array,
        end_array,
        begin_object,
        end_object,
        end_array_value,
        begin_object_value,
        end_object_value
    );

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.pretty.begin_array_value(writer, first)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.pretty.begin_object_key(writer, first)
    }

    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            writer.write_all(fmt_sig(value).as_bytes())
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Serializes `value` as pretty JSON with a trailing newline.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(
        &mut out,
        SigFormatter {
            pretty: PrettyFormatter::with_indent(b"  "),
        },
    );
    value.serialize(&mut ser).expect("in-memory JSON serialization");
    out.push(b'\n');
    String::from_utf8(out).expect("JSON is UTF-8")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(-0.0), "0");
        assert_eq!(fmt_sig(12.0), "12");
        assert_eq!(fmt_sig(-1.0), "-1");
        assert_eq!(fmt_sig(14.0 - 28f64.sqrt()), "8.70849737787");
        assert_eq!(fmt_sig(14.0 + 28f64.sqrt()), "19.2915026221");
        assert_eq!(fmt_sig(0.1), "0.1");
        assert_eq!(fmt_sig(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_sig(1.5e-7), "1.5e-07");
        assert_eq!(fmt_sig(2.0e13), "2e+13");
        assert_eq!(fmt_sig(123456789012.0), "123456789012");
        assert_eq!(fmt_sig(0.00001), "1e-05");
        assert_eq!(fmt_sig(0.0001), "0.0001");
        assert_eq!(fmt_sig(9.9999999999996), "10");
        assert_eq!(fmt_sig(f64::NAN), "nan");
    }

    #[test]
    fn json_uses_fixed_digits() {
        #[derive(Serialize)]
        struct Row {
            x: f64,
            y: Vec<f64>,
            bad: f64,
        }
        let json = to_json(&Row {
            x: 2f64.sqrt(),
            y: vec![1.0, 1e-20],
            bad: f64::INFINITY,
        });
        assert_eq!(
            json,
            "{\n  \"x\": 1.41421356237,\n  \"y\": [\n    1,\n    1e-20\n  ],\n  \"bad\": null\n}\n"
        );
        let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed["y"][1].as_f64(), Some(1e-20));
    }
}
