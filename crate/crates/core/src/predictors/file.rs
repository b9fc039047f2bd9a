//! Predictor files: `{"kind": "concept_predictor" | "label_predictor",
//! "weights": [[...], ...]}` with the bias as the last weight row.

use std::fs;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{ConceptPredictor, LabelPredictor};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Predictor {
    Concept(ConceptPredictor),
    Label(LabelPredictor),
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum PredictorDoc {
    ConceptPredictor { weights: Vec<Vec<f64>> },
    LabelPredictor { weights: Vec<Vec<f64>> },
}

impl Predictor {
    pub fn to_json(&self) -> Result<String> {
        let doc = match self {
            Predictor::Concept(g) => PredictorDoc::ConceptPredictor {
                weights: rows(g.weights())?,
            },
            Predictor::Label(f) => PredictorDoc::LabelPredictor {
                weights: rows(f.weights())?,
            },
        };
        Ok(serde_json::to_string(&doc).expect("predictor serialises") + "\n")
    }

    pub fn from_json(text: &str, origin: &Path) -> Result<Self> {
        let doc: PredictorDoc = serde_json::from_str(text).map_err(|e| Error::parse(origin, e))?;
        Ok(match doc {
            PredictorDoc::ConceptPredictor { weights } => {
                Predictor::Concept(ConceptPredictor::from_weights(matrix(weights)?)?)
            }
            PredictorDoc::LabelPredictor { weights } => {
                Predictor::Label(LabelPredictor::from_weights(matrix(weights)?)?)
            }
        })
    }
}

pub fn save_predictor(p: &Predictor, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, p.to_json()?).map_err(|e| Error::io(path, e))
}

pub fn load_predictor(path: impl AsRef<Path>) -> Result<Predictor> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Predictor::from_json(&text, path)
}

fn rows(w: &Array2<f64>) -> Result<Vec<Vec<f64>>> {
    if w.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("predictor weights".into()));
    }
    Ok(w.rows().into_iter().map(|r| r.to_vec()).collect())
}

fn matrix(rows: Vec<Vec<f64>>) -> Result<Array2<f64>> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|row| row.len() != c) {
        return Err(Error::DimensionMismatch("ragged weight rows".into()));
    }
    Array2::from_shape_vec((r, c), rows.into_iter().flatten().collect())
        .map_err(|e| Error::DimensionMismatch(e.to_string()))
}
