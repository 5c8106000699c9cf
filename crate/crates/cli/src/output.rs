//! Report envelopes and JSON emission with 17 significant digits.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::ser::Formatter;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;

/// Compact JSON with every float written as `d.dddddddddddddddde±x`.
struct Sig17;

impl Formatter for Sig17 {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Sig17);
    value.serialize(&mut ser).expect("report types serialize");
    out.push(b'\n');
    out
}

/// SHA-256 hex digest of an input file's contents.
pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct InputHash {
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub command: &'a str,
    pub version: &'a str,
    pub config: &'a RunConfig,
    pub inputs: Vec<InputHash>,
    pub result: T,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_carry_seventeen_digits() {
        let s = String::from_utf8(to_json(&vec![0.1f64, 1.0, -2.5e-12])).unwrap();
        assert_eq!(s, "[1.0000000000000001e-1,1.0000000000000000e0,-2.4999999999999998e-12]\n");
        let back: Vec<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, vec![0.1, 1.0, -2.5e-12]);
    }

    #[test]
    fn non_finite_values_become_null() {
        let s = String::from_utf8(to_json(&vec![f64::NAN])).unwrap();
        assert_eq!(s, "[null]\n");
    }
}
