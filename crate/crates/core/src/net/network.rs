use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{centroid, dist2, Vec3};
use crate::mesh::Mesh;
use crate::spectral::{
    estimate_lambda_max, face_adjacency, normalized_laplacian_allow_isolated, pool_with_graph,
    scaled_laplacian, ChebCache, ChebLayer, FeatureMatrix, PoolingPair, SparseMatrix,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    None,
}

impl Activation {
    fn apply(self, x: &mut FeatureMatrix) {
        if self == Activation::Relu {
            x.as_mut_slice().iter_mut().for_each(|v| *v = v.max(0.0));
        }
    }

    /// Masks `grad` by the derivative at the pre-activation `pre`.
    fn backward(self, pre: &FeatureMatrix, grad: &mut FeatureMatrix) {
        if self == Activation::Relu {
            for (g, p) in grad.as_mut_slice().iter_mut().zip(pre.as_slice()) {
                if *p <= 0.0 {
                    *g = 0.0;
                }
            }
        }
    }
}

/// How `λ_max` is chosen when rescaling each Laplacian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaMaxMode {
    /// The normalized-Laplacian bound `λ_max = 2`.
    #[default]
    Bound,
    /// Power-iteration estimate per resolution.
    PowerIteration,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    None,
    /// Subtract the per-mesh centroid and divide by the topology RMS radius.
    #[default]
    CenterScale,
}

/// Architecture description; one entry per Chebyshev layer in every list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSpec {
    pub n_vertices: usize,
    pub layer_channels: Vec<usize>,
    #[serde(rename = "K")]
    pub cheb_order: Vec<usize>,
    pub pooling_ratios: Vec<f64>,
    pub latent_dim: usize,
    pub activation: Vec<Activation>,
    #[serde(default)]
    pub lambda_max: LambdaMaxMode,
    #[serde(default)]
    pub input_normalization: Normalization,
}

impl NetworkSpec {
    /// Four layers of widths 16/16/16/32, `K = 6`, pooling 0.25 per layer,
    /// ReLU, 8-dimensional latent.
    pub fn default_for(n_vertices: usize) -> Self {
        NetworkSpec {
            n_vertices,
            layer_channels: vec![16, 16, 16, 32],
            cheb_order: vec![6; 4],
            pooling_ratios: vec![0.25; 4],
            latent_dim: 8,
            activation: vec![Activation::Relu; 4],
            lambda_max: LambdaMaxMode::Bound,
            input_normalization: Normalization::CenterScale,
        }
    }

    pub fn depth(&self) -> usize {
        self.layer_channels.len()
    }

    pub fn validate(&self) -> Result<()> {
        let l = self.layer_channels.len();
        if l == 0 {
            return Err(Error::InvalidArgument(
                "network needs at least one layer".into(),
            ));
        }
        if self.cheb_order.len() != l
            || self.pooling_ratios.len() != l
            || self.activation.len() != l
        {
            return Err(Error::InvalidArgument(format!(
                "per-layer lists disagree: channels {}, K {}, pooling {}, activation {}",
                l,
                self.cheb_order.len(),
                self.pooling_ratios.len(),
                self.activation.len()
            )));
        }
        if self.latent_dim == 0 {
            return Err(Error::InvalidArgument(
                "latent_dim must be at least 1".into(),
            ));
        }
        if self.layer_channels.contains(&0) || self.cheb_order.contains(&0) {
            return Err(Error::InvalidArgument(
                "channel widths and K must be at least 1".into(),
            ));
        }
        if let Some(r) = self
            .pooling_ratios
            .iter()
            .find(|r| !(**r > 0.0 && **r <= 1.0))
        {
            return Err(Error::InvalidArgument(format!(
                "pooling ratio {r} outside (0, 1]"
            )));
        }
        Ok(())
    }
}

/// Encoder output: the structural feature vector of a mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct Latent(pub Vec<f64>);

impl Latent {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Fully connected layer `y = x·W + b` with `W` stored `fin × fout`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub fin: usize,
    pub fout: usize,
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Dense {
    pub fn zeros(fin: usize, fout: usize) -> Self {
        Dense {
            fin,
            fout,
            weight: vec![0.0; fin * fout],
            bias: vec![0.0; fout],
        }
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let mut y = self.bias.clone();
        for (i, &xi) in x.iter().enumerate() {
            let row = &self.weight[i * self.fout..(i + 1) * self.fout];
            for (yo, w) in y.iter_mut().zip(row) {
                *yo += xi * w;
            }
        }
        y
    }

    /// Returns `(dx, dW, db)`.
    fn backward(&self, x: &[f64], dy: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let mut dw = vec![0.0; self.fin * self.fout];
        let mut dx = vec![0.0; self.fin];
        for i in 0..self.fin {
            let row = &self.weight[i * self.fout..(i + 1) * self.fout];
            dx[i] = row.iter().zip(dy).map(|(w, g)| w * g).sum();
            let drow = &mut dw[i * self.fout..(i + 1) * self.fout];
            for (d, g) in drow.iter_mut().zip(dy) {
                *d = x[i] * g;
            }
        }
        (dx, dw, dy.to_vec())
    }
}

/// Affine map between millimetre coordinates and network units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InputNorm {
    pub mode: Normalization,
    pub scale: f64,
    pub center: Vec3,
}

impl InputNorm {
    fn from_topology(mode: Normalization, topology: &Mesh) -> Result<Self> {
        match mode {
            Normalization::None => Ok(InputNorm {
                mode,
                scale: 1.0,
                center: [0.0; 3],
            }),
            Normalization::CenterScale => {
                let c = centroid(&topology.vertices);
                let ms = topology.vertices.iter().map(|v| dist2(*v, c)).sum::<f64>()
                    / topology.vertex_count() as f64;
                if ms.is_nan() || ms <= 0.0 {
                    return Err(Error::Degenerate("topology has zero RMS radius".into()));
                }
                Ok(InputNorm {
                    mode,
                    scale: ms.sqrt(),
                    center: c,
                })
            }
        }
    }

    fn encode_input(&self, v: &[Vec3]) -> FeatureMatrix {
        match self.mode {
            Normalization::None => FeatureMatrix::from_points(v),
            Normalization::CenterScale => {
                let c = centroid(v);
                let s = self.scale;
                FeatureMatrix::from_points(
                    &v.iter()
                        .map(|p| [(p[0] - c[0]) / s, (p[1] - c[1]) / s, (p[2] - c[2]) / s])
                        .collect::<Vec<_>>(),
                )
            }
        }
    }

    fn encode_input_backward(&self, dx: &FeatureMatrix) -> Vec<Vec3> {
        let g = dx.to_points();
        match self.mode {
            Normalization::None => g,
            Normalization::CenterScale => {
                let m = centroid(&g);
                let s = self.scale;
                g.iter()
                    .map(|p| [(p[0] - m[0]) / s, (p[1] - m[1]) / s, (p[2] - m[2]) / s])
                    .collect()
            }
        }
    }

    fn decode_output(&self, y: &FeatureMatrix) -> Vec<Vec3> {
        let (s, c) = (self.scale, self.center);
        y.to_points()
            .into_iter()
            .map(|p| [s * p[0] + c[0], s * p[1] + c[1], s * p[2] + c[2]])
            .collect()
    }

    fn decode_output_backward(&self, dv: &[Vec3]) -> FeatureMatrix {
        let s = self.scale;
        FeatureMatrix::from_points(
            &dv.iter()
                .map(|g| [s * g[0], s * g[1], s * g[2]])
                .collect::<Vec<_>>(),
        )
    }
}

/// The encoder/decoder pair with its fixed graph operators.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub spec: NetworkSpec,
    pub topology: Mesh,
    pub norm: InputNorm,
    pub enc_layers: Vec<ChebLayer>,
    pub enc_fc: Dense,
    pub dec_fc: Dense,
    /// `dec_layers[j]` runs at resolution `depth − 1 − j`.
    pub dec_layers: Vec<ChebLayer>,
    /// `pooling[i]` maps resolution `i` to `i + 1`.
    pub pooling: Vec<PoolingPair>,
    /// Rescaled Laplacian `L̃` of resolutions `0..depth`.
    pub laplacians: Vec<SparseMatrix>,
}

/// Per-parameter-tensor gradients in [`Network::parameters`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients(pub Vec<Vec<f64>>);

impl Gradients {
    pub fn zeros_like(net: &Network) -> Self {
        Gradients(
            net.parameters()
                .iter()
                .map(|(_, _, p)| vec![0.0; p.len()])
                .collect(),
        )
    }

    pub fn add_assign(&mut self, other: &Gradients) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }

    pub fn scale(&mut self, s: f64) {
        self.0.iter_mut().flatten().for_each(|x| *x *= s);
    }

    pub fn flat(&self) -> Vec<f64> {
        self.0.iter().flatten().copied().collect()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|x| x.is_finite())
    }
}

#[derive(Debug, Clone)]
struct LayerCache {
    cheb: ChebCache,
    pre_activation: FeatureMatrix,
}

#[derive(Debug, Clone)]
pub struct EncodeCache {
    layers: Vec<LayerCache>,
    flat: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct DecodeCache {
    latent: Vec<f64>,
    layers: Vec<LayerCache>,
}

#[derive(Debug, Clone)]
pub struct AutoencoderCache {
    pub encode: EncodeCache,
    pub decode: DecodeCache,
}

/// Builds the operators of every resolution and draws seeded parameters.
pub fn init_network(spec: &NetworkSpec, topology: &Mesh, seed: u64) -> Result<Network> {
    let mut net = Network::skeleton(spec, topology)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for layer in net.enc_layers.iter_mut().chain(net.dec_layers.iter_mut()) {
        let bound = (6.0 / (layer.k * layer.cin * layer.cout) as f64).sqrt();
        layer
            .theta
            .iter_mut()
            .for_each(|t| *t = rng.random_range(-bound..bound));
    }
    for fc in [&mut net.enc_fc, &mut net.dec_fc] {
        let bound = (6.0 / (fc.fin + fc.fout) as f64).sqrt();
        fc.weight
            .iter_mut()
            .for_each(|w| *w = rng.random_range(-bound..bound));
    }
    Ok(net)
}

impl Network {
    /// Operators and zero-valued parameters for `spec` on `topology`.
    pub fn skeleton(spec: &NetworkSpec, topology: &Mesh) -> Result<Network> {
        spec.validate()?;
        topology.check()?;
        if spec.n_vertices != topology.vertex_count() {
            return Err(Error::mismatch(
                "network spec n_vertices",
                topology.vertex_count(),
                spec.n_vertices,
            ));
        }
        let depth = spec.depth();
        let mut pooling = Vec::with_capacity(depth);
        let mut laplacians = Vec::with_capacity(depth);
        let mut mesh = topology.clone();
        let mut adj = face_adjacency(mesh.vertex_count(), &mesh.faces)?;
        for &ratio in &spec.pooling_ratios {
            let lap = normalized_laplacian_allow_isolated(&adj)?;
            let lambda = match spec.lambda_max {
                LambdaMaxMode::Bound => 2.0,
                LambdaMaxMode::PowerIteration => {
                    let est = estimate_lambda_max(&lap, 1e-10, 10_000)?;
                    if est.value > 0.0 {
                        est.value
                    } else {
                        2.0
                    }
                }
            };
            laplacians.push(scaled_laplacian(&lap, lambda)?);
            let pair = pool_with_graph(&mesh, &adj, ratio)?;
            adj = pair.coarse_adjacency.clone();
            mesh = pair.coarse_mesh.clone();
            pooling.push(pair);
        }

        let ch = &spec.layer_channels;
        let mut enc_layers = Vec::with_capacity(depth);
        for i in 0..depth {
            let cin = if i == 0 { 3 } else { ch[i - 1] };
            enc_layers.push(ChebLayer::zeros(spec.cheb_order[i], cin, ch[i])?);
        }
        let mut dec_layers = Vec::with_capacity(depth);
        for i in (0..depth).rev() {
            let cout = if i == 0 { 3 } else { ch[i - 1] };
            dec_layers.push(ChebLayer::zeros(spec.cheb_order[i], ch[i], cout)?);
        }
        let coarse = pooling
            .last()
            .map_or(topology.vertex_count(), |p| p.coarse_count());
        let flat = coarse * ch[depth - 1];
        Ok(Network {
            spec: spec.clone(),
            topology: topology.clone(),
            norm: InputNorm::from_topology(spec.input_normalization, topology)?,
            enc_layers,
            enc_fc: Dense::zeros(flat, spec.latent_dim),
            dec_fc: Dense::zeros(spec.latent_dim, flat),
            dec_layers,
            pooling,
            laplacians,
        })
    }

    pub fn depth(&self) -> usize {
        self.spec.depth()
    }

    pub fn latent_dim(&self) -> usize {
        self.spec.latent_dim
    }

    pub fn n_vertices(&self) -> usize {
        self.topology.vertex_count()
    }

    pub fn topology_hash(&self) -> u64 {
        self.topology.topology_hash()
    }

    /// Vertex count at each resolution, finest first, including the
    /// coarsest level that feeds the fully connected head.
    pub fn resolutions(&self) -> Vec<usize> {
        let mut r = vec![self.n_vertices()];
        r.extend(self.pooling.iter().map(|p| p.coarse_count()));
        r
    }

    /// Parameter tensors as `(name, shape, values)` in canonical order.
    pub fn parameters(&self) -> Vec<(String, Vec<usize>, &[f64])> {
        let mut out = Vec::new();
        for (i, l) in self.enc_layers.iter().enumerate() {
            out.push((
                format!("enc.{i}.theta"),
                vec![l.k, l.cin, l.cout],
                &l.theta[..],
            ));
            out.push((format!("enc.{i}.bias"), vec![l.cout], &l.bias[..]));
        }
        out.push((
            "enc_fc.weight".into(),
            vec![self.enc_fc.fin, self.enc_fc.fout],
            &self.enc_fc.weight[..],
        ));
        out.push((
            "enc_fc.bias".into(),
            vec![self.enc_fc.fout],
            &self.enc_fc.bias[..],
        ));
        out.push((
            "dec_fc.weight".into(),
            vec![self.dec_fc.fin, self.dec_fc.fout],
            &self.dec_fc.weight[..],
        ));
        out.push((
            "dec_fc.bias".into(),
            vec![self.dec_fc.fout],
            &self.dec_fc.bias[..],
        ));
        for (j, l) in self.dec_layers.iter().enumerate() {
            out.push((
                format!("dec.{j}.theta"),
                vec![l.k, l.cin, l.cout],
                &l.theta[..],
            ));
            out.push((format!("dec.{j}.bias"), vec![l.cout], &l.bias[..]));
        }
        out
    }

    /// Mutable views in the same order as [`Network::parameters`].
    pub fn parameters_mut(&mut self) -> Vec<&mut Vec<f64>> {
        let mut out: Vec<&mut Vec<f64>> = Vec::new();
        for l in &mut self.enc_layers {
            out.push(&mut l.theta);
            out.push(&mut l.bias);
        }
        out.push(&mut self.enc_fc.weight);
        out.push(&mut self.enc_fc.bias);
        out.push(&mut self.dec_fc.weight);
        out.push(&mut self.dec_fc.bias);
        for l in &mut self.dec_layers {
            out.push(&mut l.theta);
            out.push(&mut l.bias);
        }
        out
    }

    pub fn parameter_count(&self) -> usize {
        self.parameters().iter().map(|p| p.2.len()).sum()
    }

    fn check_vertices(&self, v: &[Vec3]) -> Result<()> {
        if v.len() != self.n_vertices() {
            return Err(Error::mismatch(
                "network input vertices",
                self.n_vertices(),
                v.len(),
            ));
        }
        if v.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("network input vertices".into()));
        }
        Ok(())
    }

    pub fn encode(&self, vertices: &[Vec3]) -> Result<Latent> {
        self.encode_with_cache(vertices).map(|(z, _)| z)
    }

    /// Normalise → [ChebConv → activation → down-sample] per layer →
    /// flatten → fully connected.
    pub fn encode_with_cache(&self, vertices: &[Vec3]) -> Result<(Latent, EncodeCache)> {
        self.check_vertices(vertices)?;
        let mut x = self.norm.encode_input(vertices);
        let mut layers = Vec::with_capacity(self.depth());
        for i in 0..self.depth() {
            let (pre, cheb) = self.enc_layers[i].forward(&self.laplacians[i], &x)?;
            let mut act = pre.clone();
            self.spec.activation[i].apply(&mut act);
            x = self.pooling[i].down.apply(&act)?;
            layers.push(LayerCache {
                cheb,
                pre_activation: pre,
            });
        }
        let flat = x.into_vec();
        let z = self.enc_fc.forward(&flat);
        Ok((Latent(z), EncodeCache { layers, flat }))
    }

    /// Gradients of the encoder parameters (decoder entries left zero) and of
    /// the input vertices for an upstream latent gradient.
    pub fn encode_backward(
        &self,
        cache: &EncodeCache,
        d_latent: &[f64],
    ) -> Result<(Gradients, Vec<Vec3>)> {
        if d_latent.len() != self.latent_dim() {
            return Err(Error::mismatch(
                "latent gradient",
                self.latent_dim(),
                d_latent.len(),
            ));
        }
        if cache.layers.len() != self.depth() || cache.flat.len() != self.enc_fc.fin {
            return Err(Error::mismatch(
                "encoder cache layers",
                self.depth(),
                cache.layers.len(),
            ));
        }
        let mut grads = Gradients::zeros_like(self);
        let depth = self.depth();
        let (dflat, dw, db) = self.enc_fc.backward(&cache.flat, d_latent);
        grads.0[2 * depth] = dw;
        grads.0[2 * depth + 1] = db;

        let res = self.resolutions();
        let mut dx =
            FeatureMatrix::from_raw(res[depth], self.spec.layer_channels[depth - 1], dflat);
        for i in (0..depth).rev() {
            let mut dpre = self.pooling[i].down.apply_transpose(&dx)?;
            self.spec.activation[i].backward(&cache.layers[i].pre_activation, &mut dpre);
            let (dxi, g) =
                self.enc_layers[i].backward(&self.laplacians[i], &cache.layers[i].cheb, &dpre)?;
            grads.0[2 * i] = g.theta;
            grads.0[2 * i + 1] = g.bias;
            dx = dxi;
        }
        Ok((grads, self.norm.encode_input_backward(&dx)))
    }

    pub fn decode(&self, z: &Latent) -> Result<Vec<Vec3>> {
        self.decode_with_cache(z).map(|(v, _)| v)
    }

    /// Fully connected → reshape → [up-sample → ChebConv → activation] per
    /// layer, coarse to fine; the last layer is linear.
    pub fn decode_with_cache(&self, z: &Latent) -> Result<(Vec<Vec3>, DecodeCache)> {
        if z.len() != self.latent_dim() {
            return Err(Error::mismatch("latent length", self.latent_dim(), z.len()));
        }
        if z.0.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("latent".into()));
        }
        let depth = self.depth();
        let res = self.resolutions();
        let h = self.dec_fc.forward(&z.0);
        let mut x = FeatureMatrix::from_raw(res[depth], self.spec.layer_channels[depth - 1], h);
        let mut layers = Vec::with_capacity(depth);
        for (j, layer) in self.dec_layers.iter().enumerate() {
            let i = depth - 1 - j;
            let up = self.pooling[i].up.apply(&x)?;
            let (pre, cheb) = layer.forward(&self.laplacians[i], &up)?;
            let mut act = pre.clone();
            self.decoder_activation(i).apply(&mut act);
            x = act;
            layers.push(LayerCache {
                cheb,
                pre_activation: pre,
            });
        }
        Ok((
            self.norm.decode_output(&x),
            DecodeCache {
                latent: z.0.clone(),
                layers,
            },
        ))
    }

    fn decoder_activation(&self, resolution: usize) -> Activation {
        if resolution == 0 {
            Activation::None
        } else {
            self.spec.activation[resolution]
        }
    }

    /// Gradients of the decoder parameters (encoder entries left zero) and of
    /// the latent for an upstream gradient on the decoded vertices.
    pub fn decode_backward(
        &self,
        cache: &DecodeCache,
        d_vertices: &[Vec3],
    ) -> Result<(Gradients, Vec<f64>)> {
        if d_vertices.len() != self.n_vertices() {
            return Err(Error::mismatch(
                "reconstruction gradient",
                self.n_vertices(),
                d_vertices.len(),
            ));
        }
        if cache.layers.len() != self.depth() {
            return Err(Error::mismatch(
                "decoder cache layers",
                self.depth(),
                cache.layers.len(),
            ));
        }
        let depth = self.depth();
        let mut grads = Gradients::zeros_like(self);
        let mut dx = self.norm.decode_output_backward(d_vertices);
        for j in (0..depth).rev() {
            let i = depth - 1 - j;
            let mut dpre = dx;
            self.decoder_activation(i)
                .backward(&cache.layers[j].pre_activation, &mut dpre);
            let (dup, g) =
                self.dec_layers[j].backward(&self.laplacians[i], &cache.layers[j].cheb, &dpre)?;
            grads.0[2 * depth + 4 + 2 * j] = g.theta;
            grads.0[2 * depth + 4 + 2 * j + 1] = g.bias;
            dx = self.pooling[i].up.apply_transpose(&dup)?;
        }
        let (dz, dw, db) = self.dec_fc.backward(&cache.latent, dx.as_slice());
        grads.0[2 * depth + 2] = dw;
        grads.0[2 * depth + 3] = db;
        Ok((grads, dz))
    }

    /// `decode(encode(V))` together with everything needed for the backward pass.
    pub fn forward(&self, vertices: &[Vec3]) -> Result<(Vec<Vec3>, AutoencoderCache)> {
        let (z, encode) = self.encode_with_cache(vertices)?;
        let (out, decode) = self.decode_with_cache(&z)?;
        Ok((out, AutoencoderCache { encode, decode }))
    }

    /// Reverse-mode gradients of `⟨G, decode(encode(V))⟩` with respect to all
    /// parameters and to `V`.
    pub fn autoencoder_backward(
        &self,
        cache: &AutoencoderCache,
        grad_on_reconstruction: &[Vec3],
    ) -> Result<(Gradients, Vec<Vec3>)> {
        let (mut grads, dz) = self.decode_backward(&cache.decode, grad_on_reconstruction)?;
        let (enc, dv) = self.encode_backward(&cache.encode, &dz)?;
        grads.add_assign(&enc);
        Ok((grads, dv))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::icosphere;

    fn tiny_spec(n: usize) -> NetworkSpec {
        NetworkSpec {
            n_vertices: n,
            layer_channels: vec![4, 5],
            cheb_order: vec![3, 2],
            pooling_ratios: vec![0.5, 0.5],
            latent_dim: 3,
            activation: vec![Activation::Relu; 2],
            lambda_max: LambdaMaxMode::Bound,
            input_normalization: Normalization::CenterScale,
        }
    }

    #[test]
    fn spec_validation() {
        let mut s = tiny_spec(12);
        assert!(s.validate().is_ok());
        s.cheb_order.push(2);
        assert!(s.validate().is_err());
        let mut s = tiny_spec(12);
        s.latent_dim = 0;
        assert!(s.validate().is_err());
        let mut s = tiny_spec(12);
        s.pooling_ratios[0] = 0.0;
        assert!(s.validate().is_err());
        assert!(init_network(&tiny_spec(13), &icosphere(0), 0).is_err());
    }

    #[test]
    fn seeded_init_is_deterministic() {
        let m = icosphere(1);
        let a = init_network(&tiny_spec(42), &m, 3).unwrap();
        let b = init_network(&tiny_spec(42), &m, 3).unwrap();
        assert_eq!(a, b);
        let c = init_network(&tiny_spec(42), &m, 4).unwrap();
        assert_ne!(a.enc_layers, c.enc_layers);
        assert!(a
            .enc_layers
            .iter()
            .all(|l| l.bias.iter().all(|b| *b == 0.0)));
    }

    #[test]
    fn identity_pooling_everywhere() {
        let mut s = tiny_spec(12);
        s.pooling_ratios = vec![1.0, 1.0];
        let net = init_network(&s, &icosphere(0), 0).unwrap();
        for p in &net.pooling {
            assert_eq!(p.down, SparseMatrix::identity(12));
            assert_eq!(p.up, SparseMatrix::identity(12));
        }
        assert_eq!(net.enc_fc.fin, 12 * 5);
    }

    #[test]
    fn default_spec_fc_width() {
        let m = icosphere(2);
        let net = init_network(&NetworkSpec::default_for(162), &m, 0).unwrap();
        // 162 → 41 → 11 → 3 → 1
        assert_eq!(net.resolutions(), vec![162, 41, 11, 3, 1]);
        assert_eq!(net.enc_fc.fin, 32);
        assert_eq!(net.latent_dim(), 8);
    }

    #[test]
    fn zero_parameters_give_bias_outputs() {
        let m = icosphere(1);
        let net = Network::skeleton(&NetworkSpec::default_for(42), &m).unwrap();
        let z = net.encode(&m.vertices).unwrap();
        assert_eq!(z.values(), &[0.0; 8]);
        let mut raw = net.clone();
        raw.norm = InputNorm {
            mode: Normalization::None,
            scale: 1.0,
            center: [0.0; 3],
        };
        let v = raw.decode(&z).unwrap();
        assert!(v.iter().flatten().all(|x| *x == 0.0));
    }

    #[test]
    fn shape_and_input_errors() {
        let m = icosphere(1);
        let net = init_network(&tiny_spec(42), &m, 1).unwrap();
        let z = net.encode(&m.vertices).unwrap();
        assert_eq!(net.decode(&z).unwrap().len(), 42);
        assert!(net.encode(&m.vertices[..41]).is_err());
        let mut bad = m.vertices.clone();
        bad[3][1] = f64::NAN;
        assert!(matches!(net.encode(&bad), Err(Error::NonFinite(_))));
        assert!(net.decode(&Latent(vec![0.0; 2])).is_err());
    }

    #[test]
    fn zero_upstream_gives_zero_gradients() {
        let m = icosphere(1);
        let net = init_network(&tiny_spec(42), &m, 1).unwrap();
        let (_, cache) = net.forward(&m.vertices).unwrap();
        let (g, dv) = net
            .autoencoder_backward(&cache, &vec![[0.0; 3]; 42])
            .unwrap();
        assert!(g.flat().iter().all(|x| *x == 0.0));
        assert!(dv.iter().flatten().all(|x| *x == 0.0));
    }
}
