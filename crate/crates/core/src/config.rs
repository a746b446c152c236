//! Run configuration shared by every pipeline entry point.
//!
//! A configuration serializes to `key=value` lines (the run manifest); parsing a
//! manifest back gives an identical configuration.

use std::fmt::Write as _;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::graph::EdgeSchema;
use crate::hashing::{segment_lengths, SketchFormat};
use crate::walks::WalkMode;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub schema: String,
    pub directed: bool,
    pub node_types: Option<PathBuf>,
    pub attributes: Option<PathBuf>,
    pub attribute_fill: f64,
    /// Random walks per edge (R).
    pub walks: usize,
    /// Maximum walk length in nodes (L).
    pub walk_length: usize,
    /// Largest temporal distance (MAX).
    pub max_dt: usize,
    /// Sketch bits per node (K).
    pub dim: usize,
    /// Logarithmic bins per feature.
    pub bins: usize,
    /// `None` picks short-term walks on temporal graphs and static walks otherwise.
    pub policy: Option<WalkMode>,
    pub seed: u64,
    pub lambda: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub band_bits: usize,
    pub p1: f64,
    pub p2: f64,
    pub fraction: f64,
    pub split_ratio: f64,
    pub shuffle_labels: bool,
    pub output: Option<PathBuf>,
    pub format: SketchFormat,
    pub dump_histograms: Option<PathBuf>,
    pub threads: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            input: None,
            schema: EdgeSchema::default().to_string(),
            directed: false,
            node_types: None,
            attributes: None,
            attribute_fill: 0.0,
            walks: 10,
            walk_length: 20,
            max_dt: 3,
            dim: 128,
            bins: 5,
            policy: None,
            seed: 0,
            lambda: 1.0,
            tol: 1e-4,
            max_iter: 100,
            band_bits: 16,
            p1: 0.6,
            p2: 0.3,
            fraction: 0.05,
            split_ratio: 0.5,
            shuffle_labels: false,
            output: None,
            format: SketchFormat::Sparse,
            dump_histograms: None,
            threads: None,
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.trim().parse().map_err(|_| Error::validation(format!("invalid value '{value}' for '{key}'")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::validation(format!("invalid boolean '{value}' for '{key}'"))),
    }
}

fn opt_path(value: &str) -> Option<PathBuf> {
    let v = value.trim();
    (!v.is_empty()).then(|| PathBuf::from(v))
}

impl RunConfig {
    /// Sets one field from its manifest key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key.trim() {
            "input" => self.input = opt_path(value),
            "schema" => self.schema = value.trim().to_string(),
            "directed" => self.directed = parse_bool(key, value)?,
            "node_types" => self.node_types = opt_path(value),
            "attributes" => self.attributes = opt_path(value),
            "attribute_fill" => self.attribute_fill = parse(key, value)?,
            "walks" => self.walks = parse(key, value)?,
            "walk_length" => self.walk_length = parse(key, value)?,
            "max_dt" => self.max_dt = parse(key, value)?,
            "dim" => self.dim = parse(key, value)?,
            "bins" => self.bins = parse(key, value)?,
            "policy" => {
                self.policy = match value.trim() {
                    "" | "auto" => None,
                    other => Some(other.parse()?),
                }
            }
            "seed" => self.seed = parse(key, value)?,
            "lambda" => self.lambda = parse(key, value)?,
            "tol" => self.tol = parse(key, value)?,
            "max_iter" => self.max_iter = parse(key, value)?,
            "band_bits" => self.band_bits = parse(key, value)?,
            "p1" => self.p1 = parse(key, value)?,
            "p2" => self.p2 = parse(key, value)?,
            "fraction" => self.fraction = parse(key, value)?,
            "split_ratio" => self.split_ratio = parse(key, value)?,
            "shuffle_labels" => self.shuffle_labels = parse_bool(key, value)?,
            "output" => self.output = opt_path(value),
            "format" => self.format = value.trim().parse()?,
            "dump_histograms" => self.dump_histograms = opt_path(value),
            "threads" => {
                self.threads = match value.trim() {
                    "" | "auto" => None,
                    v => Some(parse(key, v)?),
                }
            }
            other => return Err(Error::validation(format!("unknown configuration key '{other}'"))),
        }
        Ok(())
    }

    /// Applies `key=value` lines on top of `self`. Blank lines and `#` comments are skipped.
    pub fn apply_key_values(&mut self, text: &str) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) =
                line.split_once('=').ok_or_else(|| Error::parse(i + 1, "expected 'key=value'"))?;
            self.set(key, value)?;
        }
        Ok(())
    }

    pub fn from_key_values(text: &str) -> Result<Self> {
        let mut config = RunConfig::default();
        config.apply_key_values(text)?;
        Ok(config)
    }

    /// Every parameter as `key=value` lines, in a fixed order.
    pub fn manifest(&self) -> String {
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k}={v}");
        };
        kv("input", path(&self.input));
        kv("schema", self.schema.clone());
        kv("directed", self.directed.to_string());
        kv("node_types", path(&self.node_types));
        kv("attributes", path(&self.attributes));
        kv("attribute_fill", self.attribute_fill.to_string());
        kv("walks", self.walks.to_string());
        kv("walk_length", self.walk_length.to_string());
        kv("max_dt", self.max_dt.to_string());
        kv("dim", self.dim.to_string());
        kv("bins", self.bins.to_string());
        kv("policy", self.policy.map_or("auto".to_string(), |p| p.to_string()));
        kv("seed", self.seed.to_string());
        kv("lambda", self.lambda.to_string());
        kv("tol", self.tol.to_string());
        kv("max_iter", self.max_iter.to_string());
        kv("band_bits", self.band_bits.to_string());
        kv("p1", self.p1.to_string());
        kv("p2", self.p2.to_string());
        kv("fraction", self.fraction.to_string());
        kv("split_ratio", self.split_ratio.to_string());
        kv("shuffle_labels", self.shuffle_labels.to_string());
        kv("output", path(&self.output));
        kv("format", self.format.to_string());
        kv("dump_histograms", path(&self.dump_histograms));
        kv("threads", self.threads.map_or("auto".to_string(), |t| t.to_string()));
        s
    }

    /// Checks every parameter that does not depend on the input graph.
    pub fn validate(&self) -> Result<()> {
        EdgeSchema::parse(&self.schema)?;
        if self.walks == 0 {
            return Err(Error::validation("walks per edge must be at least 1"));
        }
        if self.walk_length < 2 {
            return Err(Error::validation("walk length must be at least 2"));
        }
        if self.bins == 0 {
            return Err(Error::validation("bin count must be at least 1"));
        }
        let segments = segment_lengths(self.dim, self.max_dt)?;
        let smallest = segments.iter().copied().min().unwrap_or(0);
        if self.band_bits == 0 || self.band_bits > smallest {
            return Err(Error::validation(format!(
                "band bits {} must be in 1..={smallest} for K={} and MAX={}",
                self.band_bits, self.dim, self.max_dt
            )));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::validation("lambda must be positive"));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::validation("tol must be positive"));
        }
        if !(self.fraction > 0.0 && self.fraction <= 1.0) {
            return Err(Error::validation(format!("replica fraction {} outside (0, 1]", self.fraction)));
        }
        for (name, p) in [("p1", self.p1), ("p2", self.p2), ("split_ratio", self.split_ratio)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::validation(format!("{name} = {p} is not in [0, 1]")));
            }
        }
        if self.threads == Some(0) {
            return Err(Error::validation("threads must be at least 1"));
        }
        Ok(())
    }
}
