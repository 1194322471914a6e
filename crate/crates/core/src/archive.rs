//! JSON archive of a built series: the configuration it came from, the
//! increments as decimal strings that parse back to the identical
//! multiprecision values, and the full certificate ledger.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::builder::{Certificate, SeriesFunction, Window};
use crate::config::{Resolved, RunConfig};
use crate::error::{Error, Result};
use crate::mp::{float_from_decimal, float_to_decimal, Cx, MIN_PREC};
use crate::poly::Poly;

pub const FORMAT: &str = "simtrans-series";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateRecord {
    pub window: Window,
    pub step: usize,
    pub witness_s: usize,
    pub m_value: [f64; 2],
    pub threshold: f64,
    pub v1: f64,
    pub escalations: usize,
    pub cutoff_orders: Vec<usize>,
    pub target_orders: Vec<usize>,
    pub created_bound: f64,
    pub initial_slack: f64,
    pub slack: f64,
    pub deductions: Vec<f64>,
}

impl From<&Certificate> for CertificateRecord {
    fn from(c: &Certificate) -> Self {
        CertificateRecord {
            window: c.window,
            step: c.step,
            witness_s: c.witness_s,
            m_value: [c.m_value.re, c.m_value.im],
            threshold: c.threshold,
            v1: c.v1,
            escalations: c.escalations,
            cutoff_orders: c.cutoff_orders.clone(),
            target_orders: c.target_orders.clone(),
            created_bound: c.created_bound,
            initial_slack: c.initial_slack,
            slack: c.slack,
            deductions: c.deductions.clone(),
        }
    }
}

impl From<&CertificateRecord> for Certificate {
    fn from(r: &CertificateRecord) -> Self {
        Certificate {
            window: r.window,
            step: r.step,
            witness_s: r.witness_s,
            m_value: Complex64::new(r.m_value[0], r.m_value[1]),
            threshold: r.threshold,
            v1: r.v1,
            escalations: r.escalations,
            cutoff_orders: r.cutoff_orders.clone(),
            target_orders: r.target_orders.clone(),
            created_bound: r.created_bound,
            initial_slack: r.initial_slack,
            slack: r.slack,
            deductions: r.deductions.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesArchive {
    pub format: String,
    pub version: u32,
    pub config: RunConfig,
    /// Working precision of the increments in bits.
    pub precision: u32,
    /// Coefficients of each increment, constant term first, as `[re, im]`
    /// decimal strings.
    pub increments: Vec<Vec<[String; 2]>>,
    pub certificates: Vec<CertificateRecord>,
    pub protect_radius: f64,
    pub tail_caps: Vec<f64>,
}

impl SeriesArchive {
    pub fn new(config: &RunConfig, series: &SeriesFunction) -> Self {
        SeriesArchive {
            format: FORMAT.to_string(),
            version: VERSION,
            config: config.clone(),
            precision: series.prec,
            increments: series
                .increments
                .iter()
                .map(|q| {
                    q.coeffs()
                        .iter()
                        .map(|c| [float_to_decimal(&c.re), float_to_decimal(&c.im)])
                        .collect()
                })
                .collect(),
            certificates: series.certificates.iter().map(CertificateRecord::from).collect(),
            protect_radius: series.protect_radius,
            tail_caps: series.tail_caps.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("archive serializes");
        s.push('\n');
        s
    }

    /// Parses and checks the format tag and version before anything else.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::Archive(format!("not valid JSON: {e}")))?;
        match value.get("format").and_then(|f| f.as_str()) {
            Some(FORMAT) => {}
            other => return Err(Error::Archive(format!("unknown format {other:?}, expected {FORMAT:?}"))),
        }
        match value.get("version").and_then(|v| v.as_u64()) {
            Some(v) if v == VERSION as u64 => {}
            other => {
                return Err(Error::Archive(format!(
                    "unsupported version {other:?}, this build reads version {VERSION}"
                )))
            }
        }
        serde_json::from_value(value).map_err(|e| Error::Archive(e.to_string()))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Archive(msg) => Error::Archive(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// The configuration resolved at the archive's precision.
    pub fn resolved(&self) -> Result<Resolved> {
        let mut cfg = self.config.clone();
        cfg.precision.bits = self.precision;
        cfg.precision.max_bits = cfg.precision.max_bits.max(self.precision);
        cfg.resolve().map_err(|e| Error::Archive(format!("config echo: {e}")))
    }

    pub fn series(&self) -> Result<SeriesFunction> {
        let prec = self.precision;
        if prec < MIN_PREC {
            return Err(Error::Archive(format!("precision {prec} below {MIN_PREC} bits")));
        }
        let parse = |s: &str, t: usize, i: usize| {
            float_from_decimal(s, prec)
                .ok_or_else(|| Error::Archive(format!("increment {} coefficient {i}: bad number {s:?}", t + 1)))
        };
        let increments = self
            .increments
            .iter()
            .enumerate()
            .map(|(t, coeffs)| {
                let cs = coeffs
                    .iter()
                    .enumerate()
                    .map(|(i, [re, im])| {
                        Ok(Cx {
                            re: parse(re, t, i)?,
                            im: parse(im, t, i)?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(Poly::new(cs, prec))
            })
            .collect::<Result<Vec<_>>>()?;
        if self.tail_caps.len() != increments.len() {
            return Err(Error::Archive(format!(
                "{} tail caps for {} increments",
                self.tail_caps.len(),
                increments.len()
            )));
        }
        Ok(SeriesFunction {
            increments,
            certificates: self.certificates.iter().map(Certificate::from).collect(),
            protect_radius: self.protect_radius,
            tail_caps: self.tail_caps.clone(),
            prec,
        })
    }
}
