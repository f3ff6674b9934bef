//! Report tables and certificate streams.

use std::io::Write;
use std::time::Instant;

use clap::ValueEnum;
use randiso::rational::{fmt as qfmt, Q};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Jsonl,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReportRow {
    pub id: String,
    pub digest: String,
    pub quantity: String,
    pub value: String,
    pub pass: bool,
    pub runtime_ms: u64,
}

/// One verified equation: a commutation check, a telescoping check or a
/// deviation bound.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CertificateRow {
    pub id: String,
    pub kind: &'static str,
    pub column: usize,
    pub level: Option<usize>,
    pub n: Option<u32>,
    pub lhs: String,
    pub rhs: String,
    pub ok: bool,
}

/// Rows of one run; every row of an experiment carries the time since that
/// experiment started.
#[derive(Debug)]
pub struct Report {
    digest: String,
    experiment: String,
    started: Instant,
    pub rows: Vec<ReportRow>,
    pub certificates: Vec<CertificateRow>,
}

/// First 16 hex digits of the SHA-256 of `input`.
pub fn digest(input: &str) -> String {
    Sha256::digest(input.as_bytes()).iter().take(8).map(|b| format!("{b:02x}")).collect()
}

impl Report {
    pub fn new(inputs: &str) -> Self {
        Self {
            digest: digest(inputs),
            experiment: String::new(),
            started: Instant::now(),
            rows: Vec::new(),
            certificates: Vec::new(),
        }
    }

    pub fn experiment(&mut self, id: impl Into<String>) {
        self.experiment = id.into();
        self.started = Instant::now();
    }

    pub fn id(&self) -> &str {
        &self.experiment
    }

    pub fn row(&mut self, quantity: impl Into<String>, value: impl Into<String>, pass: bool) {
        self.rows.push(ReportRow {
            id: self.experiment.clone(),
            digest: self.digest.clone(),
            quantity: quantity.into(),
            value: value.into(),
            pass,
            runtime_ms: self.started.elapsed().as_millis() as u64,
        });
    }

    /// A measured rational, shown as `p/q`.
    pub fn value(&mut self, quantity: impl Into<String>, q: &Q) {
        self.row(quantity, qfmt(q), true);
    }

    pub fn check(&mut self, quantity: impl Into<String>, value: impl Into<String>, pass: bool) {
        self.row(quantity, value, pass);
    }

    pub fn certificate(&mut self, cert: CertificateRow) {
        self.certificates.push(cert);
    }

    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass) && self.certificates.iter().all(|c| c.ok)
    }

    pub fn write(&self, format: Format, out: &mut dyn Write) -> Result<()> {
        match format {
            Format::Csv => {
                writeln!(out, "id,digest,quantity,value,pass,runtime_ms")?;
                for r in &self.rows {
                    let fields = [
                        r.id.clone(),
                        r.digest.clone(),
                        r.quantity.clone(),
                        r.value.clone(),
                        r.pass.to_string(),
                        r.runtime_ms.to_string(),
                    ];
                    writeln!(out, "{}", csv_line(&fields))?;
                }
                if !self.certificates.is_empty() {
                    writeln!(out)?;
                    writeln!(out, "id,kind,column,level,n,lhs,rhs,ok")?;
                    for c in &self.certificates {
                        let fields = [
                            c.id.clone(),
                            c.kind.to_string(),
                            c.column.to_string(),
                            c.level.map_or(String::new(), |l| l.to_string()),
                            c.n.map_or(String::new(), |n| n.to_string()),
                            c.lhs.clone(),
                            c.rhs.clone(),
                            c.ok.to_string(),
                        ];
                        writeln!(out, "{}", csv_line(&fields))?;
                    }
                }
            }
            Format::Jsonl => {
                for r in &self.rows {
                    writeln!(out, "{}", serde_json::to_string(r)?)?;
                }
                for c in &self.certificates {
                    writeln!(out, "{}", serde_json::to_string(c)?)?;
                }
            }
        }
        Ok(())
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn csv_line(fields: &[String]) -> String {
    fields.iter().map(|f| csv_field(f)).collect::<Vec<_>>().join(",")
}

#[cfg(test)]
mod tests {
    use super::*;
    use randiso::rational::ratio;

    #[test]
    fn csv_quotes_commas() {
        let mut r = Report::new("x = 1\n");
        r.experiment("demo");
        r.value("half", &ratio(1, 2));
        r.check("note", "a, b", true);
        let mut buf = Vec::new();
        r.write(Format::Csv, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[1].starts_with(&format!("demo,{},half,1/2,true,", digest("x = 1\n"))));
        assert!(lines[2].contains(",\"a, b\",true,"));
    }

    #[test]
    fn jsonl_rows_keep_exact_rationals() {
        let mut r = Report::new("");
        r.experiment("demo");
        r.value("third", &ratio(1, 3));
        let mut buf = Vec::new();
        r.write(Format::Jsonl, &mut buf).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["value"], "1/3");
    }
}
