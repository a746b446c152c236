//! Node feature matrix and logarithmic binning.

use std::collections::HashMap;
use std::io::BufRead;

use crate::error::{Error, Result};
use crate::graph::{NodeId, TemporalGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureKind {
    Derived,
    Attribute,
}

/// Row-major `N x |F|` matrix of node features.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    values: Vec<f64>,
    rows: usize,
    names: Vec<String>,
    kinds: Vec<FeatureKind>,
}

impl FeatureMatrix {
    pub fn new(rows: usize, names: Vec<String>, kinds: Vec<FeatureKind>, values: Vec<f64>) -> Result<Self> {
        if names.len() != kinds.len() {
            return Err(Error::validation("feature names and kinds differ in length"));
        }
        if values.len() != rows * names.len() {
            return Err(Error::validation(format!(
                "expected {} values for a {rows} x {} matrix, got {}",
                rows * names.len(),
                names.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::validation("feature values must be finite"));
        }
        Ok(FeatureMatrix { values, rows, names, kinds })
    }

    pub fn num_rows(&self) -> usize {
        self.rows
    }

    pub fn num_features(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn kinds(&self) -> &[FeatureKind] {
        &self.kinds
    }

    pub fn row(&self, u: NodeId) -> &[f64] {
        let f = self.num_features();
        &self.values[u as usize * f..(u as usize + 1) * f]
    }

    pub fn get(&self, u: NodeId, j: usize) -> f64 {
        self.values[u as usize * self.num_features() + j]
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        let f = self.num_features();
        (0..self.rows).map(move |r| self.values[r * f + j])
    }

    /// Appends attribute columns. Nodes absent from `attrs` get `fill` in every new column.
    pub fn attach_attributes(&self, attrs: &HashMap<NodeId, Vec<f64>>, fill: f64) -> Result<Self> {
        let width = match attrs.values().next() {
            Some(v) => v.len(),
            None => 1,
        };
        if let Some(bad) = attrs.values().find(|v| v.len() != width) {
            return Err(Error::validation(format!(
                "attribute vectors must share one length ({width} vs {})",
                bad.len()
            )));
        }
        if let Some(&u) = attrs.keys().find(|&&u| u as usize >= self.rows) {
            return Err(Error::Domain(format!("attribute row for unknown node {u}")));
        }
        let old = self.num_features();
        let mut values = Vec::with_capacity(self.rows * (old + width));
        for r in 0..self.rows {
            values.extend_from_slice(&self.values[r * old..(r + 1) * old]);
            match attrs.get(&(r as NodeId)) {
                Some(v) => values.extend_from_slice(v),
                None => values.extend(std::iter::repeat_n(fill, width)),
            }
        }
        let mut names = self.names.clone();
        let first = self.kinds.iter().filter(|k| **k == FeatureKind::Attribute).count();
        names.extend((0..width).map(|i| format!("attr{}", first + i)));
        let mut kinds = self.kinds.clone();
        kinds.extend(std::iter::repeat_n(FeatureKind::Attribute, width));
        FeatureMatrix::new(self.rows, names, kinds, values)
    }
}

/// Degree columns: `[total, in, out]` for directed graphs, `[total]` otherwise.
pub fn derive_structural_features(g: &TemporalGraph) -> FeatureMatrix {
    let directed = g.is_directed();
    let names: Vec<String> = if directed {
        vec!["total_degree".into(), "in_degree".into(), "out_degree".into()]
    } else {
        vec!["total_degree".into()]
    };
    let mut values = Vec::with_capacity(g.num_nodes() * names.len());
    for d in g.degrees() {
        values.push(d.total as f64);
        if directed {
            values.push(d.in_degree as f64);
            values.push(d.out_degree as f64);
        }
    }
    let kinds = vec![FeatureKind::Derived; names.len()];
    FeatureMatrix { values, rows: g.num_nodes(), names, kinds }
}

/// Reads `label<TAB>v1,v2,...` lines into a node -> vector table.
pub fn parse_attributes<R: BufRead>(reader: R, g: &TemporalGraph) -> Result<HashMap<NodeId, Vec<f64>>> {
    let mut out = HashMap::new();
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::parse(lineno, e.to_string()))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (label, rest) = trimmed
            .split_once('\t')
            .ok_or_else(|| Error::parse(lineno, "expected 'label<TAB>v1,v2,...'"))?;
        let u = g.require_node(label.trim())?;
        let values = rest
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| Error::parse(lineno, format!("invalid attribute value '{v}'")))
            })
            .collect::<Result<Vec<_>>>()?;
        out.insert(u, values);
    }
    Ok(out)
}

/// Per-feature logarithmic bins.
///
/// After shifting a feature by its (nonpositive) observed minimum, bin 0 holds
/// exactly 0 and bins `1..b` split `(0, inf)` at the base-2 edges `1, 2, 4, ...`;
/// anything past the last edge clamps into bin `b - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinningScheme {
    bins: usize,
    shifts: Vec<f64>,
    maxima: Vec<f64>,
    /// Shared edges `2^0 .. 2^(b-2)`.
    edges: Vec<f64>,
}

impl BinningScheme {
    pub fn num_bins(&self) -> usize {
        self.bins
    }

    pub fn num_features(&self) -> usize {
        self.shifts.len()
    }

    /// Lower edges of bins `1..b`.
    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    /// Observed maximum of feature `j` (after shifting).
    pub fn observed_max(&self, j: usize) -> f64 {
        self.maxima[j]
    }

    pub fn bin(&self, j: usize, value: f64) -> usize {
        if self.bins == 1 {
            return 0;
        }
        let x = value - self.shifts[j];
        if x <= 0.0 || x.is_nan() {
            return 0;
        }
        let above = self.edges.partition_point(|&e| e <= x);
        above.clamp(1, self.bins - 1)
    }

    /// Histogram dimensionality `|F| * |T_V| * b`.
    pub fn histogram_dim(&self, num_node_types: usize) -> usize {
        self.num_features() * num_node_types * self.bins
    }
}

pub fn fit_log_bins(m: &FeatureMatrix, bins: usize) -> Result<BinningScheme> {
    if bins == 0 {
        return Err(Error::validation("bin count must be at least 1"));
    }
    let mut shifts = Vec::with_capacity(m.num_features());
    let mut maxima = Vec::with_capacity(m.num_features());
    for j in 0..m.num_features() {
        let (lo, hi) = m
            .column(j)
            .fold((0.0f64, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        shifts.push(lo);
        maxima.push(if hi.is_finite() { hi - lo } else { 0.0 });
    }
    let edges = (0..bins.saturating_sub(1)).map(|k| 2f64.powi(k as i32)).collect();
    Ok(BinningScheme { bins, shifts, maxima, edges })
}
