//! Categorical encoders with column provenance.
//!
//! In hybrid mode ordinal features become one label-coded column (`0..k-1`
//! in declared order), nominal features become a `k`-column one-hot block
//! with no level dropped, and numeric features pass through unchanged.
//! `OneHotAll` and `LabelAll` apply a single scheme to every categorical
//! feature. Mappings depend only on the schema, never on the data.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::par;
use crate::schema::{FeatureKind, FeatureSchema};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EncoderMode {
    Hybrid,
    OneHotAll,
    LabelAll,
}

impl FromStr for EncoderMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "hybrid" => Ok(EncoderMode::Hybrid),
            "onehot" | "one_hot_all" => Ok(EncoderMode::OneHotAll),
            "label" | "label_all" => Ok(EncoderMode::LabelAll),
            other => Err(format!("unknown encoding `{other}` (expected hybrid, onehot or label)")),
        }
    }
}

impl fmt::Display for EncoderMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EncoderMode::Hybrid => "hybrid",
            EncoderMode::OneHotAll => "onehot",
            EncoderMode::LabelAll => "label",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Passthrough,
    Label,
    OneHot,
}

/// What an encoded column stands for.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnRole {
    Numeric,
    /// Label code of an ordinal feature.
    OrdinalScalar,
    /// Label code of a nominal feature (label-all mode only).
    LabelScalar,
    /// Indicator of one level inside a one-hot block.
    Level(String),
}

impl fmt::Display for ColumnRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ColumnRole::Numeric => f.write_str("numeric"),
            ColumnRole::OrdinalScalar => f.write_str("ordinal-scalar"),
            ColumnRole::LabelScalar => f.write_str("label-scalar"),
            ColumnRole::Level(l) => f.write_str(l),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSource {
    pub feature: String,
    pub feature_index: usize,
    pub role: ColumnRole,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Block {
    pub start: usize,
    pub width: usize,
    pub scheme: Scheme,
}

#[derive(Debug, Clone)]
pub struct FittedEncoder {
    mode: EncoderMode,
    schema: Arc<FeatureSchema>,
    blocks: Vec<Block>,
    provenance: Arc<Vec<ColumnSource>>,
}

impl FittedEncoder {
    pub fn fit(schema: Arc<FeatureSchema>, mode: EncoderMode) -> Self {
        let mut blocks = Vec::with_capacity(schema.n_features());
        let mut provenance = Vec::new();
        for (i, spec) in schema.features().iter().enumerate() {
            let scheme = match (spec.kind, mode) {
                (FeatureKind::Numeric, _) => Scheme::Passthrough,
                (_, EncoderMode::OneHotAll) => Scheme::OneHot,
                (_, EncoderMode::LabelAll) => Scheme::Label,
                (FeatureKind::Ordinal, EncoderMode::Hybrid) => Scheme::Label,
                (FeatureKind::Nominal, EncoderMode::Hybrid) => Scheme::OneHot,
            };
            let start = provenance.len();
            let source = |role| ColumnSource { feature: spec.name.clone(), feature_index: i, role };
            match scheme {
                Scheme::Passthrough => provenance.push(source(ColumnRole::Numeric)),
                Scheme::Label if spec.kind == FeatureKind::Ordinal => {
                    provenance.push(source(ColumnRole::OrdinalScalar))
                }
                Scheme::Label => provenance.push(source(ColumnRole::LabelScalar)),
                Scheme::OneHot => {
                    provenance.extend(spec.levels.iter().map(|l| source(ColumnRole::Level(l.clone()))))
                }
            }
            blocks.push(Block { start, width: provenance.len() - start, scheme });
        }
        FittedEncoder { mode, schema, blocks, provenance: Arc::new(provenance) }
    }

    pub fn mode(&self) -> EncoderMode {
        self.mode
    }

    pub fn schema(&self) -> &Arc<FeatureSchema> {
        &self.schema
    }

    pub fn width(&self) -> usize {
        self.provenance.len()
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn provenance(&self) -> &[ColumnSource] {
        &self.provenance
    }

    /// Encodes one raw record (schema cell convention) into `out`.
    pub fn encode_row(&self, raw: &[f64], out: &mut [f64]) {
        debug_assert_eq!(raw.len(), self.blocks.len());
        debug_assert_eq!(out.len(), self.width());
        for (block, &v) in self.blocks.iter().zip(raw) {
            match block.scheme {
                Scheme::Passthrough | Scheme::Label => out[block.start] = v,
                Scheme::OneHot => {
                    let cols = &mut out[block.start..block.start + block.width];
                    cols.fill(0.0);
                    cols[v as usize] = 1.0;
                }
            }
        }
    }

    pub fn transform(&self, d: &Dataset) -> Result<EncodedMatrix> {
        if d.schema() != self.schema.as_ref() {
            return Err(Error::Encode("dataset schema does not match the encoder schema".into()));
        }
        let m = self.width();
        let mut values = vec![0.0; d.n_rows() * m];
        if m > 0 {
            const ROWS_PER_CHUNK: usize = 256;
            par::for_each_chunk(&mut values, ROWS_PER_CHUNK * m, |c, out| {
                for (j, row_out) in out.chunks_mut(m).enumerate() {
                    self.encode_row(d.row(c * ROWS_PER_CHUNK + j), row_out);
                }
            });
        }
        Ok(EncodedMatrix { values, rows: d.n_rows(), cols: m, provenance: self.provenance.clone() })
    }

    /// `(feature name, level)`; the level is `numeric`, `ordinal-scalar`,
    /// `label-scalar` or the one-hot level name.
    pub fn decode_column(&self, col: usize) -> Result<(&str, String)> {
        let src = self.provenance.get(col).ok_or(Error::Index { index: col, width: self.width() })?;
        Ok((&src.feature, src.role.to_string()))
    }
}

/// Dense row-major encoded matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedMatrix {
    values: Vec<f64>,
    rows: usize,
    cols: usize,
    provenance: Arc<Vec<ColumnSource>>,
}

impl EncodedMatrix {
    /// A matrix whose columns are all treated as numeric.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut values = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::Shape { expected: cols, actual: r.len() });
            }
            values.extend_from_slice(r);
        }
        Self::from_vec(values, rows.len(), cols)
    }

    pub fn from_vec(values: Vec<f64>, rows: usize, cols: usize) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::Shape { expected: rows * cols, actual: values.len() });
        }
        let provenance = (0..cols)
            .map(|c| ColumnSource { feature: format!("x{c}"), feature_index: c, role: ColumnRole::Numeric })
            .collect();
        Ok(EncodedMatrix { values, rows, cols, provenance: Arc::new(provenance) })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols + j]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn provenance(&self) -> &[ColumnSource] {
        &self.provenance
    }

    pub fn select_rows(&self, indices: &[usize]) -> EncodedMatrix {
        let mut values = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            values.extend_from_slice(self.row(i));
        }
        EncodedMatrix { values, rows: indices.len(), cols: self.cols, provenance: self.provenance.clone() }
    }
}
