//! Run configuration: a TOML document naming the directions, magnitude
//! generator, target library, window schedule, caps and verification grid.
//!
//! ```toml
//! directions = ["0", "1/4", "1/2"]
//! targets = [[[1, 0]], [[0, 0], [1, 0]], [[0, 0], [0, 0], [0.25, 0]]]
//! schedule = [[1, 2, 1, 2], [1, 4, 2, 2]]   # or schedule = "canonical:6"
//! grid = 101
//!
//! [magnitudes]
//! kind = "naturals"
//!
//! [caps]
//! order_cap = 8192
//! ```

use std::fmt;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::builder::{canonical_schedule, BuildOptions, MagnitudeSequence, TargetLibrary, Window};
use crate::error::{Error, Result};
use crate::geometry::DirectionSet;
use crate::mp::{DEFAULT_PREC, MAX_PREC};

/// A direction in turns, written as a number or as a string holding a
/// decimal or a fraction `p/q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DirectionSpec {
    Number(f64),
    Text(String),
}

impl DirectionSpec {
    pub fn theta(&self) -> Result<f64> {
        match self {
            DirectionSpec::Number(x) => Ok(*x),
            DirectionSpec::Text(s) => parse_turns(s),
        }
    }
}

impl fmt::Display for DirectionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DirectionSpec::Number(x) => write!(f, "{x}"),
            DirectionSpec::Text(s) => f.write_str(s),
        }
    }
}

/// `"0.25"` or `"1/4"`.
pub fn parse_turns(s: &str) -> Result<f64> {
    let bad = || Error::Config(format!("direction {s:?} is neither a decimal nor a fraction p/q"));
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let p: u64 = p.trim().parse().map_err(|_| bad())?;
            let q: u64 = q.trim().parse().map_err(|_| bad())?;
            if q == 0 {
                return Err(bad());
            }
            Ok(p as f64 / q as f64)
        }
        None => s.parse().map_err(|_| bad()),
    }
}

/// Magnitude generator, tagged by `kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum MagnitudeSpec {
    Naturals,
    Arithmetic { a: [f64; 2], b: [f64; 2] },
    Power { p: f64 },
    Spiral,
    Explicit { values: Vec<[f64; 2]> },
}

impl MagnitudeSpec {
    pub fn sequence(&self) -> MagnitudeSequence {
        let c = |v: &[f64; 2]| Complex64::new(v[0], v[1]);
        match self {
            MagnitudeSpec::Naturals => MagnitudeSequence::Naturals,
            MagnitudeSpec::Arithmetic { a, b } => MagnitudeSequence::Arithmetic { a: c(a), b: c(b) },
            MagnitudeSpec::Power { p } => MagnitudeSequence::Power { p: *p },
            MagnitudeSpec::Spiral => MagnitudeSequence::Spiral,
            MagnitudeSpec::Explicit { values } => MagnitudeSequence::Explicit(values.iter().map(c).collect()),
        }
    }
}

/// An explicit window list, or `"canonical:T"` for the first `T` windows of
/// the diagonal enumeration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScheduleSpec {
    Explicit(Vec<[usize; 4]>),
    Named(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Caps {
    pub order_cap: usize,
    pub scan_cap: usize,
    pub escalation_cap: usize,
    pub initial_order: usize,
}

impl Default for Caps {
    fn default() -> Self {
        let o = BuildOptions::default();
        Caps {
            order_cap: o.order_cap,
            scan_cap: o.scan_cap,
            escalation_cap: o.escalation_cap,
            initial_order: o.initial_order,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Precision {
    /// Initial working precision in bits.
    pub bits: u32,
    /// Ceiling for automatic precision increases.
    pub max_bits: u32,
}

impl Default for Precision {
    fn default() -> Self {
        Precision {
            bits: DEFAULT_PREC,
            max_bits: MAX_PREC,
        }
    }
}

fn default_grid() -> usize {
    101
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub directions: Vec<DirectionSpec>,
    pub magnitudes: MagnitudeSpec,
    /// Coefficient arrays, constant term first, each coefficient `[re, im]`.
    pub targets: Vec<Vec<[f64; 2]>>,
    pub schedule: ScheduleSpec,
    #[serde(default)]
    pub caps: Caps,
    #[serde(default)]
    pub precision: Precision,
    #[serde(default = "default_grid")]
    pub grid: usize,
}

/// A configuration resolved into builder inputs.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub dirs: DirectionSet,
    pub seq: MagnitudeSequence,
    pub targets: TargetLibrary,
    pub schedule: Vec<Window>,
    pub opts: BuildOptions,
    pub grid: usize,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string().trim_end().to_string()))?;
        cfg.resolve()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn options(&self) -> BuildOptions {
        BuildOptions {
            initial_order: self.caps.initial_order,
            order_cap: self.caps.order_cap,
            scan_cap: self.caps.scan_cap,
            escalation_cap: self.caps.escalation_cap,
            prec: self.precision.bits,
            max_prec: self.precision.max_bits,
        }
    }

    /// Validates every field and converts it to builder inputs; errors name
    /// the offending field.
    pub fn resolve(&self) -> Result<Resolved> {
        let field = |name: &str, e: Error| -> Error {
            let msg = match e {
                Error::Config(m) | Error::Domain(m) => m,
                other => other.to_string(),
            };
            Error::Config(format!("{name}: {msg}"))
        };
        let thetas = self
            .directions
            .iter()
            .enumerate()
            .map(|(i, d)| d.theta().map_err(|e| field(&format!("directions[{i}]"), e)))
            .collect::<Result<Vec<_>>>()?;
        let dirs = DirectionSet::new(&thetas).map_err(|e| field("directions", e))?;
        let seq = self.magnitudes.sequence();
        seq.validate().map_err(|e| field("magnitudes", e))?;
        let opts = self.options();
        opts.validate().map_err(|e| field("caps", e))?;
        for (i, t) in self.targets.iter().enumerate() {
            if t.iter().flatten().any(|x| !x.is_finite()) {
                return Err(Error::Config(format!("targets[{i}]: coefficients must be finite")));
            }
        }
        let targets = TargetLibrary::from_c64(&self.target_coeffs(), opts.prec);
        let schedule = self.windows(targets.len(), dirs.len())?;
        for (i, w) in schedule.iter().enumerate() {
            let at = |e| field(&format!("schedule[{i}]"), e);
            Window::new(w.v, w.denom, w.k, w.n).map_err(at)?;
            if w.k > targets.len() {
                return Err(at(Error::Domain(format!(
                    "target {} requested but the library has {}",
                    w.k,
                    targets.len()
                ))));
            }
            if w.n > dirs.len() {
                return Err(at(Error::Domain(format!(
                    "{} directions requested but {} are configured",
                    w.n,
                    dirs.len()
                ))));
            }
        }
        if self.grid < 2 {
            return Err(Error::Config("grid: must be at least 2".into()));
        }
        Ok(Resolved {
            dirs,
            seq,
            targets,
            schedule,
            opts,
            grid: self.grid,
        })
    }

    pub fn target_coeffs(&self) -> Vec<Vec<Complex64>> {
        self.targets
            .iter()
            .map(|t| t.iter().map(|c| Complex64::new(c[0], c[1])).collect())
            .collect()
    }

    fn windows(&self, library_len: usize, direction_count: usize) -> Result<Vec<Window>> {
        match &self.schedule {
            ScheduleSpec::Explicit(list) => Ok(list
                .iter()
                .map(|&[v, denom, k, n]| Window { v, denom, k, n })
                .collect()),
            ScheduleSpec::Named(name) => {
                let count = name
                    .strip_prefix("canonical:")
                    .and_then(|t| t.trim().parse::<usize>().ok())
                    .ok_or_else(|| {
                        Error::Config(format!(
                            "schedule: expected a window list or \"canonical:T\", got {name:?}"
                        ))
                    })?;
                canonical_schedule(count, library_len, direction_count)
                    .map_err(|e| Error::Config(format!("schedule: {e}")))
            }
        }
    }
}
