//! Immutable survey tables.
//!
//! Cells are stored row-major as `f64`. Categorical cells hold the index of
//! their declared level, numeric cells hold the value itself. A `Dataset`
//! can only be built through validating constructors, so every instance in
//! hand is schema-conformant.

use std::io::Read;
use std::path::Path;
use std::sync::Arc;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::rng;
use crate::schema::FeatureSchema;

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    schema: Arc<FeatureSchema>,
    values: Vec<f64>,
    target: Vec<u8>,
}

impl Dataset {
    /// `values` is row-major with one column per input feature.
    pub fn new(schema: Arc<FeatureSchema>, values: Vec<f64>, target: Vec<u8>) -> Result<Self> {
        let p = schema.n_features();
        if values.len() != target.len() * p {
            return Err(Error::Dataset(format!(
                "{} cells do not fill {} rows of {} features",
                values.len(),
                target.len(),
                p
            )));
        }
        for (i, row) in values.chunks(p.max(1)).enumerate() {
            for (f, &v) in row.iter().enumerate() {
                let spec = schema.feature(f);
                let ok = if spec.kind.is_categorical() {
                    v >= 0.0 && v.fract() == 0.0 && (v as usize) < spec.levels.len()
                } else {
                    v.is_finite()
                };
                if !ok {
                    return Err(Error::Data {
                        row: i + 1,
                        column: spec.name.clone(),
                        msg: format!("value {v} violates the schema"),
                    });
                }
            }
        }
        if let Some(i) = target.iter().position(|&t| t > 1) {
            return Err(Error::Data {
                row: i + 1,
                column: schema.target_name().to_string(),
                msg: format!("label {} is not binary", target[i]),
            });
        }
        Ok(Dataset { schema, values, target })
    }

    pub fn load_csv(path: impl AsRef<Path>, schema: Arc<FeatureSchema>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(file, schema)
    }

    /// Reads RFC-4180 CSV with a header. Columns may appear in any order but
    /// must match the schema's declared columns exactly.
    pub fn read_csv(reader: impl Read, schema: Arc<FeatureSchema>) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let header = rdr
            .headers()
            .map_err(|e| Error::Dataset(format!("cannot read header: {e}")))?
            .clone();
        let header_err = |column: &str, msg: String| Error::Data { row: 0, column: column.to_string(), msg };

        let p = schema.n_features();
        let mut feature_col = vec![usize::MAX; p];
        let mut target_col = None;
        for (c, name) in header.iter().enumerate() {
            if name == schema.target_name() {
                if target_col.replace(c).is_some() {
                    return Err(header_err(name, "duplicate column".into()));
                }
            } else if let Some(f) = schema.feature_index(name) {
                if feature_col[f] != usize::MAX {
                    return Err(header_err(name, "duplicate column".into()));
                }
                feature_col[f] = c;
            } else {
                return Err(header_err(name, "column not declared in schema".into()));
            }
        }
        if let Some(f) = feature_col.iter().position(|&c| c == usize::MAX) {
            return Err(header_err(&schema.feature(f).name, "missing column".into()));
        }
        let target_col =
            target_col.ok_or_else(|| header_err(schema.target_name(), "missing target column".into()))?;
        let positive = schema.positive_level();
        let negative = schema.negative_level();

        let mut values = Vec::new();
        let mut target = Vec::new();
        for (i, record) in rdr.records().enumerate() {
            let row = i + 1;
            let record = record.map_err(|e| Error::Data { row, column: String::new(), msg: e.to_string() })?;
            if record.len() != header.len() {
                return Err(Error::Data {
                    row,
                    column: String::new(),
                    msg: format!("expected {} fields, found {}", header.len(), record.len()),
                });
            }
            for (f, &c) in feature_col.iter().enumerate() {
                let spec = schema.feature(f);
                let cell = &record[c];
                let err = |msg: String| Error::Data { row, column: spec.name.clone(), msg };
                if cell.is_empty() {
                    return Err(err("blank cell (missing values are not supported)".into()));
                }
                let v = if spec.kind.is_categorical() {
                    spec.level_index(cell).ok_or_else(|| err(format!("`{cell}` is not a declared level")))? as f64
                } else {
                    let v: f64 = cell.trim().parse().map_err(|_| err(format!("`{cell}` is not a number")))?;
                    if !v.is_finite() {
                        return Err(err(format!("`{cell}` is not finite")));
                    }
                    v
                };
                values.push(v);
            }
            let label = &record[target_col];
            target.push(if label == positive {
                1
            } else if label == negative {
                0
            } else {
                return Err(Error::Data {
                    row,
                    column: schema.target_name().to_string(),
                    msg: format!("`{label}` is not a declared level"),
                });
            });
        }
        Ok(Dataset { schema, values, target })
    }

    /// Writes CSV with columns in declared schema order.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv_string()).map_err(|e| Error::io(path, e))
    }

    pub fn to_csv_string(&self) -> String {
        let columns = self.schema.declared_columns();
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        // Writing to a Vec cannot fail.
        w.write_record(&columns).expect("in-memory csv");
        let target_name = self.schema.target_name();
        let mut fields = Vec::with_capacity(columns.len());
        for i in 0..self.n_rows() {
            fields.clear();
            let row = self.row(i);
            for name in &columns {
                if *name == target_name {
                    let level =
                        if self.target[i] == 1 { self.schema.positive_level() } else { self.schema.negative_level() };
                    fields.push(level.to_string());
                } else {
                    let f = self.schema.feature_index(name).expect("declared column");
                    fields.push(self.schema.feature(f).format_value(row[f]));
                }
            }
            w.write_record(&fields).expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 input")
    }

    pub fn schema(&self) -> &FeatureSchema {
        &self.schema
    }

    pub fn schema_arc(&self) -> &Arc<FeatureSchema> {
        &self.schema
    }

    pub fn n_rows(&self) -> usize {
        self.target.len()
    }

    pub fn n_features(&self) -> usize {
        self.schema.n_features()
    }

    pub fn is_empty(&self) -> bool {
        self.target.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let p = self.n_features();
        &self.values[i * p..(i + 1) * p]
    }

    pub fn value(&self, row: usize, feature: usize) -> f64 {
        self.values[row * self.n_features() + feature]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Binary labels, 1 = positive level.
    pub fn target(&self) -> &[u8] {
        &self.target
    }

    /// `(negatives, positives)`.
    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.target.iter().filter(|&&t| t == 1).count();
        (self.target.len() - pos, pos)
    }

    pub fn select(&self, indices: &[usize]) -> Dataset {
        let p = self.n_features();
        let mut values = Vec::with_capacity(indices.len() * p);
        for &i in indices {
            values.extend_from_slice(self.row(i));
        }
        Dataset { schema: self.schema.clone(), values, target: indices.iter().map(|&i| self.target[i]).collect() }
    }

    /// Stratified `(train, test)` row indices, each sorted ascending.
    pub fn split_indices(&self, test_frac: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
        if !(test_frac > 0.0 && test_frac < 1.0) {
            return Err(Error::Split(format!("test fraction {test_frac} is not in (0, 1)")));
        }
        let mut train = Vec::new();
        let mut test = Vec::new();
        for class in 0..2u8 {
            let mut idx: Vec<usize> = (0..self.n_rows()).filter(|&i| self.target[i] == class).collect();
            if idx.len() < 2 {
                return Err(Error::Split(format!("class {class} has {} rows, need at least 2", idx.len())));
            }
            idx.shuffle(&mut rng::stream(seed, &[class as u64]));
            let k = ((test_frac * idx.len() as f64).round() as usize).clamp(1, idx.len() - 1);
            test.extend_from_slice(&idx[..k]);
            train.extend_from_slice(&idx[k..]);
        }
        train.sort_unstable();
        test.sort_unstable();
        Ok((train, test))
    }

    pub fn split_stratified(&self, test_frac: f64, seed: u64) -> Result<(Dataset, Dataset)> {
        let (train, test) = self.split_indices(test_frac, seed)?;
        Ok((self.select(&train), self.select(&test)))
    }

    /// Rows whose categorical `feature` equals `level`. May be empty.
    pub fn filter_cohort(&self, feature: &str, level: &str) -> Result<Dataset> {
        let f = self
            .schema
            .feature_index(feature)
            .ok_or_else(|| Error::Query(format!("unknown feature `{feature}`")))?;
        let spec = self.schema.feature(f);
        if !spec.kind.is_categorical() {
            return Err(Error::Query(format!("feature `{feature}` is numeric")));
        }
        let code = spec
            .level_index(level)
            .ok_or_else(|| Error::Query(format!("`{level}` is not a level of `{feature}`")))? as f64;
        let rows: Vec<usize> = (0..self.n_rows()).filter(|&i| self.value(i, f) == code).collect();
        Ok(self.select(&rows))
    }
}
