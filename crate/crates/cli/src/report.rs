//! Report assembly and serialization.

use std::io::{self, Write};

use msk_core::PointGeometry;
use serde::Serialize;

use crate::checks::{blaschke_ratio, CheckOutcome};
use crate::config::RunConfig;

pub const REPORT_SCHEMA: &str = include_str!("../schemas/report.schema.json");
pub const CONFIG_SCHEMA: &str = include_str!("../schemas/config.schema.json");

#[derive(Debug, Clone, Serialize)]
pub struct Environment {
    pub version: &'static str,
    pub seed: u64,
    pub config: RunConfig,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub environment: Environment,
    pub checks: Vec<CheckOutcome>,
    pub passed: usize,
    pub failed: usize,
}

impl VerificationReport {
    pub fn new(config: RunConfig, checks: Vec<CheckOutcome>) -> Self {
        let passed = checks.iter().filter(|c| c.pass).count();
        VerificationReport {
            environment: Environment { version: env!("CARGO_PKG_VERSION"), seed: config.seed, config },
            failed: checks.len() - passed,
            checks,
            passed,
        }
    }

    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }

    pub fn to_json(&self) -> String {
        let mut out = Vec::new();
        let mut ser = serde_json::Serializer::with_formatter(&mut out, FixedDigits);
        self.serialize(&mut ser).expect("report serialization is infallible");
        out.push(b'\n');
        String::from_utf8(out).expect("serde_json emits UTF-8")
    }

    /// One row per check.
    pub fn to_csv(&self) -> io::Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["id", "max_residual", "tolerance", "pass", "worst_s", "worst_t", "n_points", "n_skipped"])?;
        for c in &self.checks {
            let (ws, wt) = match c.worst_point {
                Some([s, t]) => (number(s), number(t)),
                None => (String::new(), String::new()),
            };
            w.write_record([
                c.id.name().to_string(),
                number(c.max_residual),
                number(c.tolerance),
                c.pass.to_string(),
                ws,
                wt,
                c.n_points.to_string(),
                c.n_skipped.to_string(),
            ])?;
        }
        finish(w)
    }
}

/// Seventeen significant digits, locale-free; empty for non-finite values.
pub fn number(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        String::new()
    }
}

fn finish(w: csv::Writer<Vec<u8>>) -> io::Result<String> {
    let bytes = w.into_inner().map_err(|e| io::Error::other(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

pub const FIELD_COLUMNS: [&str; 11] =
    ["s", "t", "x", "y", "z", "lambda1", "lambda2", "K", "H", "pairing", "blaschke_ratio"];

/// Per-point field table.
pub fn fields_csv(geometry: &[PointGeometry]) -> io::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(FIELD_COLUMNS)?;
    for pg in geometry {
        let p = pg.position();
        let row = [pg.s, pg.t, p.x, p.y, p.z, pg.lambda1, pg.lambda2, pg.gaussian, pg.mean, pg.pairing];
        let mut record: Vec<String> = row.iter().map(|&x| number(x)).collect();
        record.push(blaschke_ratio(pg).map(number).unwrap_or_default());
        w.write_record(&record)?;
    }
    finish(w)
}

/// Compact JSON with floats printed to 17 significant digits.
#[derive(Debug, Default)]
struct FixedDigits;

impl serde_json::ser::Formatter for FixedDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_carry_seventeen_significant_digits() {
        assert_eq!(number(0.1), "1.0000000000000001e-1");
        assert_eq!(number(-2.5), "-2.5000000000000000e0");
        assert_eq!(number(f64::NAN), "");
        let x = 1.0 / 3.0;
        assert_eq!(number(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn formatter_output_is_valid_json() {
        let mut out = Vec::new();
        let mut ser = serde_json::Serializer::with_formatter(&mut out, FixedDigits);
        vec![0.1, f64::NAN, 1e-300].serialize(&mut ser).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text, "[1.0000000000000001e-1,null,1.0000000000000000e-300]");
        let back: Vec<serde_json::Value> = serde_json::from_str(&text).unwrap();
        assert_eq!(back.len(), 3);
        assert!(back[1].is_null());
        let fields: Vec<&str> = text.trim_matches(['[', ']']).split(',').collect();
        assert_eq!(fields[0].parse::<f64>().unwrap(), 0.1);
        assert_eq!(fields[2].parse::<f64>().unwrap(), 1e-300);
    }
}
