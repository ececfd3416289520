use super::FeatureMatrix;
use crate::error::{Error, Result};

/// Sparse real matrix in compressed-row form.
///
/// Entries are kept in canonical order (row-major, ascending column within a
/// row) with duplicates summed and exact zeros dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        mut triplets: Vec<(usize, usize, f64)>,
    ) -> Result<Self> {
        if let Some(&(r, c, _)) = triplets.iter().find(|(r, c, _)| *r >= rows || *c >= cols) {
            return Err(Error::InvalidArgument(format!(
                "entry ({r}, {c}) outside a {rows}×{cols} matrix"
            )));
        }
        if triplets.iter().any(|t| !t.2.is_finite()) {
            return Err(Error::NonFinite("sparse matrix entries".into()));
        }
        // stable sort keeps duplicate summation in input order
        triplets.sort_by_key(|&(r, c, _)| (r, c));

        let mut row_ptr = vec![0usize; rows + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        let mut rows_of = Vec::with_capacity(triplets.len());
        let mut i = 0;
        while i < triplets.len() {
            let (r, c, mut v) = triplets[i];
            i += 1;
            while i < triplets.len() && triplets[i].0 == r && triplets[i].1 == c {
                v += triplets[i].2;
                i += 1;
            }
            if v != 0.0 {
                rows_of.push(r);
                col_idx.push(c);
                values.push(v);
            }
        }
        for r in rows_of {
            row_ptr[r + 1] += 1;
        }
        for r in 0..rows {
            row_ptr[r + 1] += row_ptr[r];
        }
        Ok(SparseMatrix {
            rows,
            cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn identity(n: usize) -> Self {
        SparseMatrix {
            rows: n,
            cols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Column indices and values of row `r`.
    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        (&self.col_idx[span.clone()], &self.values[span])
    }

    /// Canonically ordered `(row, col, value)` triples.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.rows).flat_map(move |r| {
            let (c, v) = self.row(r);
            c.iter().zip(v).map(move |(&c, &v)| (r, c, v))
        })
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let (cols, vals) = self.row(r);
        match cols.binary_search(&c) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    pub fn transpose(&self) -> SparseMatrix {
        let t = self.entries().map(|(r, c, v)| (c, r, v)).collect();
        SparseMatrix::from_triplets(self.cols, self.rows, t).expect("transpose of a valid matrix")
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.rows == self.cols
            && self
                .entries()
                .all(|(r, c, v)| (self.get(c, r) - v).abs() <= tol)
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.rows * self.cols];
        for (r, c, v) in self.entries() {
            d[r * self.cols + c] = v;
        }
        d
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.rows).map(|r| self.row(r).1.iter().sum()).collect()
    }

    /// `Y = S·X`, each output row accumulated in ascending column order.
    pub fn apply(&self, x: &FeatureMatrix) -> Result<FeatureMatrix> {
        if x.rows() != self.cols {
            return Err(Error::mismatch(
                "sparse_apply",
                format!("{} rows", self.cols),
                format!("{} rows", x.rows()),
            ));
        }
        let c = x.cols();
        let mut out = vec![0.0; self.rows * c];
        for r in 0..self.rows {
            let (cols, vals) = self.row(r);
            let dst = &mut out[r * c..(r + 1) * c];
            for (&j, &v) in cols.iter().zip(vals) {
                for (d, &xj) in dst.iter_mut().zip(x.row(j)) {
                    *d += v * xj;
                }
            }
        }
        Ok(FeatureMatrix::from_raw(self.rows, c, out))
    }

    /// `Y = Sᵀ·X`, scattered in canonical entry order.
    pub fn apply_transpose(&self, x: &FeatureMatrix) -> Result<FeatureMatrix> {
        if x.rows() != self.rows {
            return Err(Error::mismatch(
                "sparse_apply_transpose",
                format!("{} rows", self.rows),
                format!("{} rows", x.rows()),
            ));
        }
        let c = x.cols();
        let mut out = vec![0.0; self.cols * c];
        for (r, j, v) in self.entries() {
            let dst = &mut out[j * c..(j + 1) * c];
            for (d, &xr) in dst.iter_mut().zip(x.row(r)) {
                *d += v * xr;
            }
        }
        Ok(FeatureMatrix::from_raw(self.cols, c, out))
    }
}

/// Exact sparse-dense product `S·X`.
pub fn sparse_apply(s: &SparseMatrix, x: &FeatureMatrix) -> Result<FeatureMatrix> {
    s.apply(x)
}
