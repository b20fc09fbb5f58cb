//! Dense/sparse feature matrices with named columns.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Result, TriageError};
use crate::scalar::Scalar;

/// What produced a matrix. Gradient-trained and kNN models standardize
/// curated matrices at fit time; text and derived matrices stay raw.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FeatureKind {
    /// Hand-engineered tracker/text columns.
    Curated,
    /// Bag-of-words or TF-IDF term columns.
    Text,
    /// Model-produced columns (stacking meta-features, scaled copies).
    Derived,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
enum Storage<F> {
    Dense(Vec<F>),
    Sparse {
        indptr: Vec<usize>,
        indices: Vec<u32>,
        values: Vec<F>,
    },
}

/// A rows × columns matrix of finite reals with named columns.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeatureMatrix<F> {
    rows: usize,
    cols: usize,
    column_names: Vec<String>,
    kind: FeatureKind,
    storage: Storage<F>,
}

impl<F: Scalar> FeatureMatrix<F> {
    /// Builds a dense matrix from rows. Every row must have
    /// `column_names.len()` finite entries.
    pub fn from_rows(
        rows: Vec<Vec<F>>,
        column_names: Vec<String>,
        kind: FeatureKind,
    ) -> Result<Self> {
        let cols = column_names.len();
        let n_rows = rows.len();
        let mut data = Vec::with_capacity(n_rows * cols);
        for (r, row) in rows.into_iter().enumerate() {
            if row.len() != cols {
                return Err(TriageError::Invalid(format!(
                    "row {r} has {} entries, expected {cols}",
                    row.len()
                )));
            }
            for (c, v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(TriageError::NonFiniteValue { row: r, col: c });
                }
            }
            data.extend(row);
        }
        Ok(FeatureMatrix {
            rows: n_rows,
            cols,
            column_names,
            kind,
            storage: Storage::Dense(data),
        })
    }

    /// Builds a sparse matrix from per-row `(column, value)` lists. Entries
    /// must be sorted by column and unique within a row.
    pub fn from_sparse_rows(
        rows: Vec<Vec<(u32, F)>>,
        column_names: Vec<String>,
        kind: FeatureKind,
    ) -> Result<Self> {
        let cols = column_names.len();
        let n_rows = rows.len();
        let nnz: usize = rows.iter().map(Vec::len).sum();
        let mut indptr = Vec::with_capacity(n_rows + 1);
        let mut indices = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        indptr.push(0);
        for (r, row) in rows.into_iter().enumerate() {
            let mut last: Option<u32> = None;
            for (c, v) in row {
                if c as usize >= cols {
                    return Err(TriageError::Invalid(format!(
                        "row {r}: column index {c} out of range ({cols} columns)"
                    )));
                }
                if last.is_some_and(|p| c <= p) {
                    return Err(TriageError::Invalid(format!(
                        "row {r}: sparse entries must be sorted and unique"
                    )));
                }
                if !v.is_finite() {
                    return Err(TriageError::NonFiniteValue {
                        row: r,
                        col: c as usize,
                    });
                }
                last = Some(c);
                indices.push(c);
                values.push(v);
            }
            indptr.push(indices.len());
        }
        Ok(FeatureMatrix {
            rows: n_rows,
            cols,
            column_names,
            kind,
            storage: Storage::Sparse {
                indptr,
                indices,
                values,
            },
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn kind(&self) -> FeatureKind {
        self.kind
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.storage, Storage::Sparse { .. })
    }

    /// Stored entry count (dense matrices store everything).
    pub fn nnz(&self) -> usize {
        match &self.storage {
            Storage::Dense(d) => d.len(),
            Storage::Sparse { values, .. } => values.len(),
        }
    }

    pub fn get(&self, row: usize, col: usize) -> F {
        debug_assert!(row < self.rows && col < self.cols);
        match &self.storage {
            Storage::Dense(d) => d[row * self.cols + col],
            Storage::Sparse {
                indptr,
                indices,
                values,
            } => {
                let span = &indices[indptr[row]..indptr[row + 1]];
                match span.binary_search(&(col as u32)) {
                    Ok(i) => values[indptr[row] + i],
                    Err(_) => F::zero(),
                }
            }
        }
    }

    /// Iterates the stored entries of one row as `(column, value)`.
    pub fn row_entries(&self, row: usize) -> RowEntries<'_, F> {
        match &self.storage {
            Storage::Dense(d) => RowEntries::Dense {
                slice: &d[row * self.cols..(row + 1) * self.cols],
                col: 0,
            },
            Storage::Sparse {
                indptr,
                indices,
                values,
            } => RowEntries::Sparse {
                indices: &indices[indptr[row]..indptr[row + 1]],
                values: &values[indptr[row]..indptr[row + 1]],
                pos: 0,
            },
        }
    }

    /// Writes one row into a dense buffer of length `cols`.
    pub fn write_row_dense(&self, row: usize, out: &mut [F]) {
        debug_assert_eq!(out.len(), self.cols);
        match &self.storage {
            Storage::Dense(d) => out.copy_from_slice(&d[row * self.cols..(row + 1) * self.cols]),
            Storage::Sparse { .. } => {
                out.fill(F::zero());
                for (c, v) in self.row_entries(row) {
                    out[c] = v;
                }
            }
        }
    }

    pub fn row_dense(&self, row: usize) -> Vec<F> {
        let mut out = vec![F::zero(); self.cols];
        self.write_row_dense(row, &mut out);
        out
    }

    /// Dot product of a row with a dense weight slice of length `cols`.
    pub fn dot_row(&self, row: usize, weights: &[F]) -> F {
        let mut acc = F::zero();
        for (c, v) in self.row_entries(row) {
            acc += v * weights[c];
        }
        acc
    }

    /// Squared L2 norm of a row.
    pub fn row_norm_sq(&self, row: usize) -> F {
        let mut acc = F::zero();
        for (_, v) in self.row_entries(row) {
            acc += v * v;
        }
        acc
    }

    /// Dot product between a row of `self` and a row of `other`.
    pub fn dot_rows(&self, row: usize, other: &FeatureMatrix<F>, other_row: usize) -> F {
        let mut acc = F::zero();
        let mut a = self.row_entries(row).peekable();
        let mut b = other.row_entries(other_row).peekable();
        while let (Some(&(ca, va)), Some(&(cb, vb))) = (a.peek(), b.peek()) {
            match ca.cmp(&cb) {
                std::cmp::Ordering::Less => {
                    a.next();
                }
                std::cmp::Ordering::Greater => {
                    b.next();
                }
                std::cmp::Ordering::Equal => {
                    acc += va * vb;
                    a.next();
                    b.next();
                }
            }
        }
        acc
    }

    /// New matrix containing the given rows of `self`, in order.
    pub fn subset_rows(&self, rows: &[usize]) -> FeatureMatrix<F> {
        match &self.storage {
            Storage::Dense(d) => {
                let mut data = Vec::with_capacity(rows.len() * self.cols);
                for &r in rows {
                    data.extend_from_slice(&d[r * self.cols..(r + 1) * self.cols]);
                }
                FeatureMatrix {
                    rows: rows.len(),
                    cols: self.cols,
                    column_names: self.column_names.clone(),
                    kind: self.kind,
                    storage: Storage::Dense(data),
                }
            }
            Storage::Sparse {
                indptr,
                indices,
                values,
            } => {
                let mut new_indptr = Vec::with_capacity(rows.len() + 1);
                let mut new_indices = Vec::new();
                let mut new_values = Vec::new();
                new_indptr.push(0);
                for &r in rows {
                    new_indices.extend_from_slice(&indices[indptr[r]..indptr[r + 1]]);
                    new_values.extend_from_slice(&values[indptr[r]..indptr[r + 1]]);
                    new_indptr.push(new_indices.len());
                }
                FeatureMatrix {
                    rows: rows.len(),
                    cols: self.cols,
                    column_names: self.column_names.clone(),
                    kind: self.kind,
                    storage: Storage::Sparse {
                        indptr: new_indptr,
                        indices: new_indices,
                        values: new_values,
                    },
                }
            }
        }
    }

    /// Keeps only the named columns, in the order given.
    pub fn select(&self, columns: &[String]) -> Result<FeatureMatrix<F>> {
        let mut keep = Vec::with_capacity(columns.len());
        for name in columns {
            match self.column_names.iter().position(|c| c == name) {
                Some(i) => keep.push(i),
                None => {
                    return Err(TriageError::SelectionUnknownColumn { name: name.clone() });
                }
            }
        }
        let names: Vec<String> = keep.iter().map(|&i| self.column_names[i].clone()).collect();
        let mut rows = Vec::with_capacity(self.rows);
        for r in 0..self.rows {
            rows.push(keep.iter().map(|&c| self.get(r, c)).collect::<Vec<F>>());
        }
        FeatureMatrix::from_rows(rows, names, self.kind)
    }

    /// Writes the matrix as CSV with `column_names` as the header.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(&self.column_names)?;
        let mut buf = vec![F::zero(); self.cols];
        for r in 0..self.rows {
            self.write_row_dense(r, &mut buf);
            w.write_record(buf.iter().map(|v| format!("{v}")))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Iterator over a row's stored entries.
pub enum RowEntries<'a, F> {
    Dense { slice: &'a [F], col: usize },
    Sparse {
        indices: &'a [u32],
        values: &'a [F],
        pos: usize,
    },
}

impl<F: Scalar> Iterator for RowEntries<'_, F> {
    type Item = (usize, F);

    fn next(&mut self) -> Option<(usize, F)> {
        match self {
            RowEntries::Dense { slice, col } => {
                if *col < slice.len() {
                    let item = (*col, slice[*col]);
                    *col += 1;
                    Some(item)
                } else {
                    None
                }
            }
            RowEntries::Sparse {
                indices,
                values,
                pos,
            } => {
                if *pos < indices.len() {
                    let item = (indices[*pos] as usize, values[*pos]);
                    *pos += 1;
                    Some(item)
                } else {
                    None
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("c{i}")).collect()
    }

    #[test]
    fn dense_round_trip() {
        let m = FeatureMatrix::from_rows(
            vec![vec![1.0, 0.0, 2.0], vec![0.0, 3.0, 0.0]],
            names(3),
            FeatureKind::Curated,
        )
        .unwrap();
        assert_eq!(m.get(0, 2), 2.0);
        assert_eq!(m.get(1, 0), 0.0);
        assert_eq!(m.row_dense(1), vec![0.0, 3.0, 0.0]);
    }

    #[test]
    fn sparse_round_trip() {
        let m = FeatureMatrix::from_sparse_rows(
            vec![vec![(0, 1.0), (2, 2.0)], vec![(1, 3.0)], vec![]],
            names(3),
            FeatureKind::Text,
        )
        .unwrap();
        assert_eq!(m.get(0, 2), 2.0);
        assert_eq!(m.get(0, 1), 0.0);
        assert_eq!(m.row_dense(2), vec![0.0, 0.0, 0.0]);
        assert_eq!(m.nnz(), 3);
    }

    #[test]
    fn non_finite_rejected() {
        let err = FeatureMatrix::from_rows(vec![vec![f64::NAN]], names(1), FeatureKind::Curated)
            .unwrap_err();
        assert!(matches!(err, TriageError::NonFiniteValue { row: 0, col: 0 }));
    }

    #[test]
    fn dot_and_norms_agree_across_storage() {
        let dense = FeatureMatrix::from_rows(
            vec![vec![1.0, 0.0, 2.0]],
            names(3),
            FeatureKind::Curated,
        )
        .unwrap();
        let sparse = FeatureMatrix::from_sparse_rows(
            vec![vec![(0, 1.0), (2, 2.0)]],
            names(3),
            FeatureKind::Text,
        )
        .unwrap();
        let w = vec![3.0, 5.0, 7.0];
        assert_eq!(dense.dot_row(0, &w), sparse.dot_row(0, &w));
        assert_eq!(dense.row_norm_sq(0), sparse.row_norm_sq(0));
        assert_eq!(dense.dot_rows(0, &sparse, 0), 5.0);
    }

    #[test]
    fn selection_keeps_named_columns() {
        let m = FeatureMatrix::from_rows(
            vec![vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]],
            names(3),
            FeatureKind::Curated,
        )
        .unwrap();
        let s = m.select(&["c2".to_string(), "c0".to_string()]).unwrap();
        assert_eq!(s.cols(), 2);
        assert_eq!(s.row_dense(1), vec![6.0, 4.0]);
        assert!(matches!(
            m.select(&["nope".to_string()]).unwrap_err(),
            TriageError::SelectionUnknownColumn { .. }
        ));
    }

    #[test]
    fn subset_rows_preserves_values() {
        let m = FeatureMatrix::from_sparse_rows(
            vec![vec![(0, 1.0)], vec![(1, 2.0)], vec![(2, 3.0)]],
            names(3),
            FeatureKind::Text,
        )
        .unwrap();
        let s = m.subset_rows(&[2, 0]);
        assert_eq!(s.rows(), 2);
        assert_eq!(s.get(0, 2), 3.0);
        assert_eq!(s.get(1, 0), 1.0);
    }
}
