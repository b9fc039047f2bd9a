//! Ward-linkage agglomerative clustering of concept vectors.
//!
//! Merge heights are the increase in total within-cluster sum of squares,
//! `|A||B| / (|A| + |B|) * |c_A - c_B|^2`, obtained by running the
//! Lance-Williams update on initial distances `|x - y|^2 / 2`. Ties are
//! broken by the smaller `(left id, right id)` pair.

use std::fs;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::bases::ConceptBasis;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub size: usize,
}

/// Leaves are ids `1..=k`; the cluster formed by merge `i` (0-based) has
/// id `k + 1 + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram {
    leaves: Vec<String>,
    merges: Vec<Merge>,
}

#[derive(Serialize, Deserialize)]
struct DendrogramDoc {
    leaves: Vec<String>,
    merges: Vec<(usize, usize, f64, usize)>,
}

impl Dendrogram {
    pub fn leaves(&self) -> &[String] {
        &self.leaves
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    pub fn to_json(&self) -> String {
        let doc = DendrogramDoc {
            leaves: self.leaves.clone(),
            merges: self
                .merges
                .iter()
                .map(|m| (m.left, m.right, m.height, m.size))
                .collect(),
        };
        serde_json::to_string(&doc).expect("dendrogram serialises") + "\n"
    }

    pub fn from_json(text: &str, origin: &Path) -> Result<Self> {
        let doc: DendrogramDoc = serde_json::from_str(text).map_err(|e| Error::parse(origin, e))?;
        let k = doc.leaves.len();
        let merges: Vec<Merge> = doc
            .merges
            .into_iter()
            .map(|(left, right, height, size)| Merge {
                left,
                right,
                height,
                size,
            })
            .collect();
        if k < 2 || merges.len() != k - 1 {
            return Err(Error::parse(
                origin,
                format!("{} merges for {k} leaves", merges.len()),
            ));
        }
        let mut used = vec![false; 2 * k];
        for (i, m) in merges.iter().enumerate() {
            for id in [m.left, m.right] {
                if id == 0 || id > k + i || std::mem::replace(&mut used[id], true) {
                    return Err(Error::parse(
                        origin,
                        format!("invalid cluster id {id} in merge {}", i + 1),
                    ));
                }
            }
        }
        Ok(Dendrogram {
            leaves: doc.leaves,
            merges,
        })
    }
}

pub fn ward_cluster(b: &ConceptBasis) -> Result<Dendrogram> {
    let v = b.vectors();
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("concept vectors".into()));
    }
    let k = b.num_concepts();
    if k < 2 {
        return Err(Error::TooFewConcepts(k));
    }
    let total = 2 * k - 1;
    let mut dist = Array2::<f64>::zeros((total, total));
    for i in 0..k {
        for j in i + 1..k {
            let d = 0.5 * (&v.row(i) - &v.row(j)).mapv(|x| x * x).sum();
            dist[[i, j]] = d;
            dist[[j, i]] = d;
        }
    }
    let mut size = vec![1usize; total];
    let mut active: Vec<usize> = (0..k).collect();
    let mut merges = Vec::with_capacity(k - 1);

    for step in 0..k - 1 {
        // `active` is sorted, so the first strict minimum in (a, b) order
        // is the lexicographically smallest tied pair
        let mut best = (f64::INFINITY, 0, 0);
        for (x, &a) in active.iter().enumerate() {
            for &c in &active[x + 1..] {
                if dist[[a, c]] < best.0 {
                    best = (dist[[a, c]], a, c);
                }
            }
        }
        let (height, a, c) = best;
        let new = k + step;
        size[new] = size[a] + size[c];
        active.retain(|&x| x != a && x != c);
        for &o in &active {
            let (na, nc, no) = (size[a] as f64, size[c] as f64, size[o] as f64);
            let d = ((na + no) * dist[[o, a]] + (nc + no) * dist[[o, c]] - no * dist[[a, c]])
                / (na + nc + no);
            dist[[o, new]] = d;
            dist[[new, o]] = d;
        }
        active.push(new);
        merges.push(Merge {
            left: a + 1,
            right: c + 1,
            height,
            size: size[new],
        });
    }
    Ok(Dendrogram {
        leaves: b.names().to_vec(),
        merges,
    })
}

pub fn export_dendrogram(dg: &Dendrogram, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, dg.to_json()).map_err(|e| Error::io(path, e))
}

pub fn import_dendrogram(path: impl AsRef<Path>) -> Result<Dendrogram> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Dendrogram::from_json(&text, path)
}
