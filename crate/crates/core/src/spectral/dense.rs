use crate::error::{Error, Result};
use crate::geom::Vec3;

/// Dense row-major `rows × cols` matrix of per-vertex features.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl FeatureMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        FeatureMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Wraps row-major data; rejects wrong lengths and non-finite entries.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::mismatch(
                "FeatureMatrix::new",
                rows * cols,
                data.len(),
            ));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("feature matrix".into()));
        }
        Ok(FeatureMatrix { rows, cols, data })
    }

    pub(crate) fn from_raw(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        FeatureMatrix { rows, cols, data }
    }

    pub fn from_points(points: &[Vec3]) -> Self {
        FeatureMatrix {
            rows: points.len(),
            cols: 3,
            data: points.iter().flatten().copied().collect(),
        }
    }

    pub fn to_points(&self) -> Vec<Vec3> {
        assert_eq!(self.cols, 3, "to_points needs exactly 3 columns");
        self.data
            .chunks_exact(3)
            .map(|c| [c[0], c[1], c[2]])
            .collect()
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// `self += alpha * other`
    pub fn axpy(&mut self, alpha: f64, other: &FeatureMatrix) {
        debug_assert_eq!(self.shape(), other.shape());
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += alpha * b;
        }
    }

    pub fn max_abs_diff(&self, other: &FeatureMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// `y += self · W`
    pub(crate) fn matmul_acc(&self, w: &[f64], out: usize, y: &mut FeatureMatrix) {
        for r in 0..self.rows {
            let x = self.row(r);
            let yr = y.row_mut(r);
            for (i, &xi) in x.iter().enumerate() {
                if xi == 0.0 {
                    continue;
                }
                let wi = &w[i * out..(i + 1) * out];
                for (yo, &wo) in yr.iter_mut().zip(wi) {
                    *yo += xi * wo;
                }
            }
        }
    }

    /// `self · Wᵀ` where `W` is a row-major `out × self.cols` block.
    pub(crate) fn matmul_bt(&self, w: &[f64], out: usize) -> FeatureMatrix {
        debug_assert_eq!(w.len(), self.cols * out);
        let mut y = FeatureMatrix::zeros(self.rows, out);
        for r in 0..self.rows {
            let g = self.row(r);
            let yr = y.row_mut(r);
            for (o, yo) in yr.iter_mut().enumerate() {
                let wo = &w[o * self.cols..(o + 1) * self.cols];
                *yo = g.iter().zip(wo).map(|(a, b)| a * b).sum();
            }
        }
        y
    }

    /// `selfᵀ · other` accumulated into a row-major `self.cols × other.cols` buffer.
    pub(crate) fn tmatmul_acc(&self, other: &FeatureMatrix, acc: &mut [f64]) {
        debug_assert_eq!(self.rows, other.rows);
        let out = other.cols;
        debug_assert_eq!(acc.len(), self.cols * out);
        for r in 0..self.rows {
            let a = self.row(r);
            let b = other.row(r);
            for (i, &ai) in a.iter().enumerate() {
                if ai == 0.0 {
                    continue;
                }
                let dst = &mut acc[i * out..(i + 1) * out];
                for (d, &bo) in dst.iter_mut().zip(b) {
                    *d += ai * bo;
                }
            }
        }
    }
}
