use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::Composition;

/// `n × D` matrix of compositions, stored row-major, with row labels and
/// component names.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DataMatrix {
    parts: usize,
    values: Vec<f64>,
    row_labels: Vec<String>,
    component_names: Vec<String>,
}

impl DataMatrix {
    /// Builds a matrix from validated compositions of equal dimension.
    /// Rows are labelled `1..=n`.
    pub fn from_compositions(rows: Vec<Composition>) -> Result<Self> {
        let parts = match rows.first() {
            Some(x) => x.dim(),
            None => {
                return Err(Error::InvalidDimension(
                    "cannot infer the number of parts from an empty row set".into(),
                ))
            }
        };
        let mut values = Vec::with_capacity(rows.len() * parts);
        for (i, x) in rows.iter().enumerate() {
            if x.dim() != parts {
                return Err(Error::InvalidDimension(format!(
                    "row {} has {} parts, expected {parts}",
                    i + 1,
                    x.dim()
                )));
            }
            values.extend_from_slice(x.parts());
        }
        let n = rows.len();
        Ok(Self {
            parts,
            values,
            row_labels: (1..=n).map(|i| i.to_string()).collect(),
            component_names: default_names(parts),
        })
    }

    /// An empty matrix with `parts` columns.
    pub fn empty(parts: usize) -> Result<Self> {
        if parts < 2 {
            return Err(Error::InvalidDimension(format!(
                "a composition needs at least 2 parts, got {parts}"
            )));
        }
        Ok(Self {
            parts,
            values: Vec::new(),
            row_labels: Vec::new(),
            component_names: default_names(parts),
        })
    }

    pub fn with_component_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.parts {
            return Err(Error::InvalidDimension(format!(
                "{} component names for {} parts",
                names.len(),
                self.parts
            )));
        }
        self.component_names = names;
        Ok(self)
    }

    pub fn with_row_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n_rows() {
            return Err(Error::InvalidDimension(format!(
                "{} row labels for {} rows",
                labels.len(),
                self.n_rows()
            )));
        }
        self.row_labels = labels;
        Ok(self)
    }

    pub fn n_rows(&self) -> usize {
        self.values.len() / self.parts
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Number of parts `D`.
    pub fn parts(&self) -> usize {
        self.parts
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.parts..(i + 1) * self.parts]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.parts)
    }

    pub fn composition(&self, i: usize) -> Composition {
        Composition::from_positive_unchecked(self.row(i).to_vec())
    }

    pub fn compositions(&self) -> impl Iterator<Item = Composition> + '_ {
        self.rows()
            .map(|r| Composition::from_positive_unchecked(r.to_vec()))
    }

    pub fn row_labels(&self) -> &[String] {
        &self.row_labels
    }

    pub fn component_names(&self) -> &[String] {
        &self.component_names
    }

    /// Rows at `indices` (repeats allowed), keeping labels and names.
    pub fn select_rows(&self, indices: &[usize]) -> Self {
        let mut values = Vec::with_capacity(indices.len() * self.parts);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            values.extend_from_slice(self.row(i));
            labels.push(self.row_labels[i].clone());
        }
        Self {
            parts: self.parts,
            values,
            row_labels: labels,
            component_names: self.component_names.clone(),
        }
    }

    /// Removes rows by 0-based index.
    pub fn drop_rows(&self, indices: &[usize]) -> Result<Self> {
        if let Some(bad) = indices.iter().find(|&&i| i >= self.n_rows()) {
            return Err(Error::InvalidParameter(format!(
                "row index {} out of range for {} rows",
                bad + 1,
                self.n_rows()
            )));
        }
        let keep: Vec<usize> = (0..self.n_rows())
            .filter(|i| !indices.contains(i))
            .collect();
        Ok(self.select_rows(&keep))
    }
}

fn default_names(parts: usize) -> Vec<String> {
    (1..=parts).map(|i| format!("x{i}")).collect()
}
