use super::{FeatureMatrix, SparseMatrix};
use crate::error::{Error, Result};

/// Chebyshev graph-convolution layer
///
/// `Y = Σ_{k<K} T_k(L̃)·X·Θ_k + b` with `T_0 = I`, `T_1 = L̃` and
/// `T_k = 2·L̃·T_{k−1} − T_{k−2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChebLayer {
    pub k: usize,
    pub cin: usize,
    pub cout: usize,
    /// `K × Cin × Cout`, row-major.
    pub theta: Vec<f64>,
    pub bias: Vec<f64>,
}

/// Basis products `T_k(L̃)·X` retained by the forward pass.
#[derive(Debug, Clone)]
pub struct ChebCache {
    basis: Vec<FeatureMatrix>,
}

impl ChebCache {
    pub fn basis(&self) -> &[FeatureMatrix] {
        &self.basis
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChebGrads {
    pub theta: Vec<f64>,
    pub bias: Vec<f64>,
}

impl ChebLayer {
    pub fn zeros(k: usize, cin: usize, cout: usize) -> Result<Self> {
        if k == 0 || cin == 0 || cout == 0 {
            return Err(Error::InvalidArgument(format!(
                "Chebyshev layer needs K, Cin, Cout ≥ 1 (got {k}, {cin}, {cout})"
            )));
        }
        Ok(ChebLayer {
            k,
            cin,
            cout,
            theta: vec![0.0; k * cin * cout],
            bias: vec![0.0; cout],
        })
    }

    pub fn theta_k(&self, k: usize) -> &[f64] {
        let block = self.cin * self.cout;
        &self.theta[k * block..(k + 1) * block]
    }

    pub fn forward(
        &self,
        lt: &SparseMatrix,
        x: &FeatureMatrix,
    ) -> Result<(FeatureMatrix, ChebCache)> {
        if x.cols() != self.cin {
            return Err(Error::mismatch(
                "cheb_conv_forward input channels",
                self.cin,
                x.cols(),
            ));
        }
        if lt.rows() != x.rows() || lt.cols() != x.rows() {
            return Err(Error::mismatch(
                "cheb_conv_forward vertices",
                format!("{}×{} operator", x.rows(), x.rows()),
                format!("{}×{}", lt.rows(), lt.cols()),
            ));
        }
        let mut basis = Vec::with_capacity(self.k);
        basis.push(x.clone());
        if self.k > 1 {
            basis.push(lt.apply(x)?);
        }
        for k in 2..self.k {
            let mut next = lt.apply(&basis[k - 1])?;
            next.as_mut_slice().iter_mut().for_each(|v| *v *= 2.0);
            next.axpy(-1.0, &basis[k - 2]);
            basis.push(next);
        }

        let mut y = FeatureMatrix::zeros(x.rows(), self.cout);
        for (k, tx) in basis.iter().enumerate() {
            tx.matmul_acc(self.theta_k(k), self.cout, &mut y);
        }
        for r in 0..y.rows() {
            for (v, b) in y.row_mut(r).iter_mut().zip(&self.bias) {
                *v += b;
            }
        }
        Ok((y, ChebCache { basis }))
    }

    /// Gradients of the forward map given `dY`. The input gradient runs the
    /// Chebyshev recursion in reverse using `L̃ᵀ`.
    pub fn backward(
        &self,
        lt: &SparseMatrix,
        cache: &ChebCache,
        dy: &FeatureMatrix,
    ) -> Result<(FeatureMatrix, ChebGrads)> {
        if cache.basis.len() != self.k {
            return Err(Error::mismatch(
                "cheb_conv_backward cache order",
                self.k,
                cache.basis.len(),
            ));
        }
        let n = cache.basis[0].rows();
        if dy.shape() != (n, self.cout) {
            return Err(Error::mismatch(
                "cheb_conv_backward dY",
                format!("{n}×{}", self.cout),
                format!("{}×{}", dy.rows(), dy.cols()),
            ));
        }

        let block = self.cin * self.cout;
        let mut d_theta = vec![0.0; self.k * block];
        for (k, tx) in cache.basis.iter().enumerate() {
            tx.tmatmul_acc(dy, &mut d_theta[k * block..(k + 1) * block]);
        }
        let mut d_bias = vec![0.0; self.cout];
        for r in 0..n {
            for (b, g) in d_bias.iter_mut().zip(dy.row(r)) {
                *b += g;
            }
        }

        // adjoints of each basis product, then unwind the recursion
        let mut adj: Vec<FeatureMatrix> = (0..self.k)
            .map(|k| dy.matmul_bt(self.theta_k(k), self.cin))
            .collect();
        for k in (2..self.k).rev() {
            let g = lt.apply_transpose(&adj[k])?;
            adj[k - 1].axpy(2.0, &g);
            let ak = adj[k].clone();
            adj[k - 2].axpy(-1.0, &ak);
        }
        if self.k > 1 {
            let g = lt.apply_transpose(&adj[1])?;
            adj[0].axpy(1.0, &g);
        }
        let dx = adj.swap_remove(0);
        Ok((
            dx,
            ChebGrads {
                theta: d_theta,
                bias: d_bias,
            },
        ))
    }
}

pub fn cheb_conv_forward(
    lt: &SparseMatrix,
    x: &FeatureMatrix,
    layer: &ChebLayer,
) -> Result<(FeatureMatrix, ChebCache)> {
    layer.forward(lt, x)
}

pub fn cheb_conv_backward(
    lt: &SparseMatrix,
    layer: &ChebLayer,
    cache: &ChebCache,
    dy: &FeatureMatrix,
) -> Result<(FeatureMatrix, ChebGrads)> {
    layer.backward(lt, cache, dy)
}
