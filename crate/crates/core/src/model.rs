//! Black-box prediction over raw records, and the persisted pipeline.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::encoding::{EncodedMatrix, EncoderMode, FittedEncoder};
use crate::error::{Error, Result};
use crate::learning::{FittedModel, ModelParams};
use crate::schema::FeatureSchema;

/// Anything that maps a raw record (schema cell convention, one value per
/// input feature) to P(accept). Both explainers only see this interface.
pub trait BlackBox: Sync {
    fn n_features(&self) -> usize;

    fn predict_accept(&self, record: &[f64]) -> f64;

    /// Row-major batch of records; `out[i]` receives record `i`.
    fn predict_batch(&self, records: &[f64], out: &mut [f64]) {
        let p = self.n_features();
        for (r, o) in records.chunks(p).zip(out.iter_mut()) {
            *o = self.predict_accept(r);
        }
    }
}

/// Wraps a closure as a black box.
pub struct FnModel<F> {
    width: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> f64 + Sync> FnModel<F> {
    pub fn new(width: usize, f: F) -> Self {
        FnModel { width, f }
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> BlackBox for FnModel<F> {
    fn n_features(&self) -> usize {
        self.width
    }

    fn predict_accept(&self, record: &[f64]) -> f64 {
        (self.f)(record)
    }
}

const FORMAT: &str = "tabxai-model";
const VERSION: u32 = 1;

/// Encoder plus trained model: the unit that is saved, loaded and explained.
#[derive(Debug, Clone)]
pub struct Pipeline {
    encoder: FittedEncoder,
    model: FittedModel,
}

#[derive(Serialize, Deserialize)]
struct Document {
    format: String,
    version: u32,
    encoding: EncoderMode,
    schema: String,
    model: FittedModel,
}

impl Pipeline {
    pub fn new(encoder: FittedEncoder, model: FittedModel) -> Result<Self> {
        if encoder.width() != model.width() {
            return Err(Error::Shape { expected: encoder.width(), actual: model.width() });
        }
        Ok(Pipeline { encoder, model })
    }

    /// Encodes `d` with `mode` and fits `params` on all of it.
    pub fn train(d: &Dataset, mode: EncoderMode, params: &ModelParams, seed: u64) -> Result<Self> {
        let encoder = FittedEncoder::fit(d.schema_arc().clone(), mode);
        let x = encoder.transform(d)?;
        let model = FittedModel::fit(params, &x, d.target(), seed)?;
        Ok(Pipeline { encoder, model })
    }

    pub fn encoder(&self) -> &FittedEncoder {
        &self.encoder
    }

    pub fn model(&self) -> &FittedModel {
        &self.model
    }

    pub fn schema(&self) -> &Arc<FeatureSchema> {
        self.encoder.schema()
    }

    pub fn encode(&self, d: &Dataset) -> Result<EncodedMatrix> {
        self.encoder.transform(d)
    }

    pub fn to_json(&self) -> String {
        let doc = Document {
            format: FORMAT.into(),
            version: VERSION,
            encoding: self.encoder.mode(),
            schema: self.schema().to_text(),
            model: self.model.clone(),
        };
        serde_json::to_string(&doc).expect("model documents always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: Document = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        if doc.format != FORMAT {
            return Err(Error::Format(format!("not a model document (format `{}`)", doc.format)));
        }
        if doc.version != VERSION {
            return Err(Error::Format(format!("unsupported model format version {}", doc.version)));
        }
        let schema = Arc::new(FeatureSchema::parse(&doc.schema)?);
        Pipeline::new(FittedEncoder::fit(schema, doc.encoding), doc.model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

impl BlackBox for Pipeline {
    fn n_features(&self) -> usize {
        self.schema().n_features()
    }

    fn predict_accept(&self, record: &[f64]) -> f64 {
        let mut buf = vec![0.0; self.encoder.width()];
        self.encoder.encode_row(record, &mut buf);
        self.model.predict_accept_row(&buf)
    }

    fn predict_batch(&self, records: &[f64], out: &mut [f64]) {
        let p = self.n_features();
        let mut buf = vec![0.0; self.encoder.width()];
        for (r, o) in records.chunks(p).zip(out.iter_mut()) {
            self.encoder.encode_row(r, &mut buf);
            *o = self.model.predict_accept_row(&buf);
        }
    }
}
