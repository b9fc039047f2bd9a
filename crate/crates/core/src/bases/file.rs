//! Basis files: `{"dim": d, "concepts": [{"name": ..., "vector": [...]}, ...]}`.
//!
//! External pipelines (e.g. embedding-model or activation-vector
//! extraction) emit this document so their bases can be scored here.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ConceptBasis;
use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
struct BasisDoc {
    dim: usize,
    concepts: Vec<ConceptEntry>,
}

#[derive(Serialize, Deserialize)]
struct ConceptEntry {
    name: String,
    vector: Vec<f64>,
}

pub fn basis_to_json(b: &ConceptBasis) -> Result<String> {
    if b.vectors().iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("basis vectors".into()));
    }
    let doc = BasisDoc {
        dim: b.dim(),
        concepts: b
            .names()
            .iter()
            .zip(b.vectors().rows())
            .map(|(name, row)| ConceptEntry {
                name: name.clone(),
                vector: row.to_vec(),
            })
            .collect(),
    };
    Ok(serde_json::to_string(&doc).expect("basis serialises") + "\n")
}

/// Parses a basis document. `origin` only labels errors.
pub fn basis_from_json(text: &str, origin: &Path) -> Result<ConceptBasis> {
    if let Some(token) = non_finite_literal(text) {
        return Err(Error::NonFinite(format!(
            "{} (`{token}`)",
            origin.display()
        )));
    }
    let doc: BasisDoc = serde_json::from_str(text).map_err(|e| Error::parse(origin, e))?;
    let mut names = Vec::with_capacity(doc.concepts.len());
    let mut rows = Vec::with_capacity(doc.concepts.len());
    for entry in doc.concepts {
        if entry.vector.len() != doc.dim {
            return Err(Error::RaggedDimension {
                name: entry.name,
                expected: doc.dim,
                found: entry.vector.len(),
            });
        }
        if entry.vector.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("vector of `{}`", entry.name)));
        }
        names.push(entry.name);
        rows.push(entry.vector);
    }
    ConceptBasis::from_rows(names, rows)
}

pub fn import_basis(path: impl AsRef<Path>) -> Result<ConceptBasis> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    basis_from_json(&text, path)
}

pub fn export_basis(b: &ConceptBasis, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let json = basis_to_json(b)?;
    fs::write(path, json).map_err(|e| Error::io(path, e))
}

/// Bare `NaN`/`Infinity` tokens outside strings, as written by lenient
/// JSON emitters. Strict JSON has no spelling for non-finite numbers.
fn non_finite_literal(text: &str) -> Option<String> {
    let mut in_string = false;
    let mut escaped = false;
    let mut word = String::new();
    for ch in text.chars().chain(std::iter::once(' ')) {
        if in_string {
            if escaped {
                escaped = false;
            } else if ch == '\\' {
                escaped = true;
            } else if ch == '"' {
                in_string = false;
            }
            continue;
        }
        if ch.is_ascii_alphabetic() {
            word.push(ch);
            continue;
        }
        if matches!(word.as_str(), "NaN" | "Infinity" | "inf" | "nan") {
            return Some(word);
        }
        word.clear();
        if ch == '"' {
            in_string = true;
        }
    }
    None
}
