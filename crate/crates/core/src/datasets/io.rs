//! Dataset directories: `concepts.csv`, `features.csv`, `labels.csv` and an
//! optional `groups.json`.
//!
//! `features.csv` starts with a `# range lo hi` comment line and
//! `labels.csv` may carry a `# classes L` comment line; both are skipped by
//! the CSV reader and parsed separately.

use std::fs;
use std::path::Path;

use ndarray::Array2;

use super::ConceptDataset;
use crate::error::{Error, Result};

const CONCEPTS_FILE: &str = "concepts.csv";
const FEATURES_FILE: &str = "features.csv";
const LABELS_FILE: &str = "labels.csv";
const GROUPS_FILE: &str = "groups.json";

pub fn save_dataset(d: &ConceptDataset, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    let mut concepts = d.concept_names().join(",");
    concepts.push('\n');
    for row in d.concepts().rows() {
        push_row(&mut concepts, row.iter());
    }
    write(dir.join(CONCEPTS_FILE), &concepts)?;

    let (lo, hi) = d.feature_range();
    let mut features = format!("# range {lo} {hi}\n");
    let header: Vec<String> = (1..=d.num_features()).map(|j| format!("f{j}")).collect();
    features.push_str(&header.join(","));
    features.push('\n');
    for row in d.features().rows() {
        push_row(&mut features, row.iter());
    }
    write(dir.join(FEATURES_FILE), &features)?;

    let mut labels = format!("# classes {}\nlabel\n", d.num_labels());
    for y in d.labels() {
        labels.push_str(&y.to_string());
        labels.push('\n');
    }
    write(dir.join(LABELS_FILE), &labels)?;

    let groups_path = dir.join(GROUPS_FILE);
    match d.groups() {
        Some(groups) => {
            let one_based: Vec<Vec<usize>> = groups
                .iter()
                .map(|g| g.iter().map(|j| j + 1).collect())
                .collect();
            let json = serde_json::to_string(&one_based).expect("groups serialise");
            write(groups_path, &(json + "\n"))?;
        }
        None if groups_path.exists() => {
            fs::remove_file(&groups_path).map_err(|e| Error::io(&groups_path, e))?;
        }
        None => {}
    }
    Ok(())
}

/// Loads a dataset directory written by [`save_dataset`] (or by an
/// external tool following the same layout).
pub fn load_dataset_dir(dir: impl AsRef<Path>) -> Result<ConceptDataset> {
    let dir = dir.as_ref();
    let d = load_dataset(
        dir.join(FEATURES_FILE),
        dir.join(CONCEPTS_FILE),
        dir.join(LABELS_FILE),
    )?;
    let groups_path = dir.join(GROUPS_FILE);
    if !groups_path.exists() {
        return Ok(d);
    }
    let text = read(&groups_path)?;
    let one_based: Vec<Vec<usize>> =
        serde_json::from_str(&text).map_err(|e| Error::parse(&groups_path, e))?;
    let mut groups = Vec::with_capacity(one_based.len());
    for g in one_based {
        let mut group = Vec::with_capacity(g.len());
        for j in g {
            if j == 0 {
                return Err(Error::parse(&groups_path, "concept indices are 1-based"));
            }
            group.push(j - 1);
        }
        groups.push(group);
    }
    d.with_groups(Some(groups))
}

pub fn load_dataset(
    features_path: impl AsRef<Path>,
    concepts_path: impl AsRef<Path>,
    labels_path: impl AsRef<Path>,
) -> Result<ConceptDataset> {
    let (features_path, concepts_path, labels_path) = (
        features_path.as_ref(),
        concepts_path.as_ref(),
        labels_path.as_ref(),
    );

    let text = read(concepts_path)?;
    let (names, rows) = read_csv(concepts_path, &text)?;
    let k = names.len();
    let mut concepts = Array2::<u8>::zeros((rows.len(), k));
    for (i, row) in rows.iter().enumerate() {
        for (j, field) in row.iter().enumerate() {
            concepts[[i, j]] = match field.trim() {
                "0" => 0,
                "1" => 1,
                other => {
                    return Err(Error::NonBinaryConcept {
                        row: i + 1,
                        col: j + 1,
                        value: other.to_string(),
                    })
                }
            };
        }
    }

    let text = read(features_path)?;
    let declared_range = comment_value(&text, "range")
        .map(|v| parse_range(features_path, &v))
        .transpose()?;
    let (header, rows) = read_csv(features_path, &text)?;
    for (j, h) in header.iter().enumerate() {
        if h.trim() != format!("f{}", j + 1) {
            return Err(Error::UnknownHeader(format!(
                "{}: feature column {} is `{h}`, expected `f{}`",
                features_path.display(),
                j + 1,
                j + 1
            )));
        }
    }
    let mut features = Array2::<f64>::zeros((rows.len(), header.len()));
    for (i, row) in rows.iter().enumerate() {
        for (j, field) in row.iter().enumerate() {
            features[[i, j]] = field.trim().parse().map_err(|_| {
                Error::parse(
                    features_path,
                    format!("row {}, column {}: `{field}` is not a number", i + 1, j + 1),
                )
            })?;
        }
    }
    let range = declared_range.unwrap_or_else(|| {
        let lo = features.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = features.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if lo.is_finite() {
            (lo, hi)
        } else {
            (0.0, 1.0)
        }
    });

    let text = read(labels_path)?;
    let declared_classes = comment_value(&text, "classes")
        .map(|v| {
            v.trim()
                .parse::<usize>()
                .map_err(|_| Error::parse(labels_path, format!("bad class count `{v}`")))
        })
        .transpose()?;
    let (header, rows) = read_csv(labels_path, &text)?;
    if header.len() != 1 || header[0].trim() != "label" {
        return Err(Error::UnknownHeader(format!(
            "{}: expected a single `label` column, found `{}`",
            labels_path.display(),
            header.join(",")
        )));
    }
    let mut labels = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        let y: usize = row[0].trim().parse().map_err(|_| {
            Error::parse(
                labels_path,
                format!("row {}: `{}` is not a label", i + 1, row[0]),
            )
        })?;
        labels.push(y);
    }
    let num_labels = declared_classes.unwrap_or_else(|| labels.iter().copied().max().unwrap_or(1));

    ConceptDataset::new(features, range, concepts, labels, num_labels, names, None)
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write(path: impl AsRef<Path>, contents: &str) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn push_row<T: ToString>(out: &mut String, values: impl Iterator<Item = T>) {
    let mut first = true;
    for v in values {
        if !first {
            out.push(',');
        }
        first = false;
        out.push_str(&v.to_string());
    }
    out.push('\n');
}

/// Value following `# <key>` in the leading comment lines of a file.
fn comment_value(text: &str, key: &str) -> Option<String> {
    text.lines()
        .take_while(|l| l.trim_start().starts_with('#'))
        .find_map(|l| {
            let rest = l.trim_start().trim_start_matches('#').trim_start();
            rest.strip_prefix(key)
                .filter(|r| r.starts_with(char::is_whitespace))
                .map(|r| r.trim().to_string())
        })
}

fn parse_range(path: &Path, value: &str) -> Result<(f64, f64)> {
    let parts: Vec<&str> = value.split_whitespace().collect();
    let bad = || Error::parse(path, format!("bad range comment `# range {value}`"));
    if parts.len() != 2 {
        return Err(bad());
    }
    let lo = parts[0].parse().map_err(|_| bad())?;
    let hi = parts[1].parse().map_err(|_| bad())?;
    Ok((lo, hi))
}

/// Header and body of a comma-separated file; `#` lines are comments.
fn read_csv(path: &Path, text: &str) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .has_headers(true)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| Error::parse(path, e))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| match e.kind() {
            csv::ErrorKind::UnequalLengths { .. } => {
                Error::DimensionMismatch(format!("{}: {e}", path.display()))
            }
            _ => Error::parse(path, e),
        })?;
        rows.push(record.iter().map(str::to_string).collect());
    }
    Ok((header, rows))
}
