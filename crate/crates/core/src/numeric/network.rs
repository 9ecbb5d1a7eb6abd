//! Feature extractor (MLP with ReLU between layers) and linear camera
//! discriminator, with hand-written forward and backward passes.
//!
//! Layers compute `y = x·Wᵀ + b` over a batch `x` of shape `N×in`, with `W`
//! stored `out×in`. Every change to the extractor's parameters stamps the
//! network with a fresh version number; extractor caches remember the version
//! they came from so a backward pass against different parameters is
//! rejected. Discriminator updates leave the version alone.

use std::sync::atomic::{AtomicU64, Ordering};

use rand::Rng;
use rand_distr::{Distribution, Uniform};

use super::matrix::{matmul, matmul_at, matmul_bt, softmax_rows, Matrix};
use super::optim::sgd_step;
use crate::error::{Error, Result};

static NEXT_VERSION: AtomicU64 = AtomicU64::new(1);

fn fresh_version() -> u64 {
    NEXT_VERSION.fetch_add(1, Ordering::Relaxed)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearLayer {
    weight: Matrix,
    bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerGrads {
    pub weight: Matrix,
    pub bias: Vec<f64>,
}

impl LinearLayer {
    pub fn new(weight: Matrix, bias: Vec<f64>) -> Result<Self> {
        if weight.rows() != bias.len() {
            return Err(Error::Dimension {
                op: "linear_layer",
                left: weight.shape(),
                right: (bias.len(), 1),
            });
        }
        if weight.rows() == 0 || weight.cols() == 0 {
            return Err(Error::InvalidArgument("linear layer with zero width".into()));
        }
        if !weight.is_finite() || bias.iter().any(|b| !b.is_finite()) {
            return Err(Error::NonFinite("linear layer parameters".into()));
        }
        Ok(Self { weight, bias })
    }

    pub fn zeros(in_dim: usize, out_dim: usize) -> Self {
        Self {
            weight: Matrix::zeros(out_dim, in_dim),
            bias: vec![0.0; out_dim],
        }
    }

    /// Glorot-uniform weights in `±sqrt(6/(in+out))`, zero bias.
    pub fn glorot<R: Rng + ?Sized>(in_dim: usize, out_dim: usize, rng: &mut R) -> Self {
        let limit = (6.0 / (in_dim + out_dim) as f64).sqrt();
        let dist = Uniform::new_inclusive(-limit, limit).expect("finite limit");
        let data = (0..in_dim * out_dim).map(|_| dist.sample(rng)).collect();
        Self {
            weight: Matrix::from_vec(out_dim, in_dim, data).expect("shape by construction"),
            bias: vec![0.0; out_dim],
        }
    }

    pub fn in_dim(&self) -> usize {
        self.weight.cols()
    }

    pub fn out_dim(&self) -> usize {
        self.weight.rows()
    }

    pub fn weight(&self) -> &Matrix {
        &self.weight
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn num_parameters(&self) -> usize {
        self.weight.as_slice().len() + self.bias.len()
    }

    pub fn forward(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols() != self.in_dim() {
            return Err(Error::Dimension {
                op: "linear_forward",
                left: x.shape(),
                right: self.weight.shape(),
            });
        }
        let mut y = matmul_bt(x, &self.weight)?;
        for r in 0..y.rows() {
            for (v, b) in y.row_mut(r).iter_mut().zip(&self.bias) {
                *v += b;
            }
        }
        Ok(y)
    }

    /// Gradients of the loss w.r.t. this layer's parameters and its input,
    /// given the layer input and `∂loss/∂output`.
    pub fn backward(&self, input: &Matrix, grad_out: &Matrix) -> Result<(LayerGrads, Matrix)> {
        if input.cols() != self.in_dim()
            || grad_out.cols() != self.out_dim()
            || input.rows() != grad_out.rows()
        {
            return Err(Error::Dimension {
                op: "linear_backward",
                left: input.shape(),
                right: grad_out.shape(),
            });
        }
        let weight = matmul_at(grad_out, input)?;
        let mut bias = vec![0.0; self.out_dim()];
        for row in grad_out.row_iter() {
            for (b, g) in bias.iter_mut().zip(row) {
                *b += g;
            }
        }
        let grad_in = matmul(grad_out, &self.weight)?;
        Ok((LayerGrads { weight, bias }, grad_in))
    }

    fn apply(&mut self, grads: &LayerGrads, lr: f64) -> Result<()> {
        if grads.weight.shape() != self.weight.shape() {
            return Err(Error::Dimension {
                op: "sgd_step",
                left: self.weight.shape(),
                right: grads.weight.shape(),
            });
        }
        sgd_step(self.weight.as_mut_slice(), grads.weight.as_slice(), lr)?;
        sgd_step(&mut self.bias, &grads.bias, lr)
    }

    fn write_parameters(&self, out: &mut Vec<f64>) {
        out.extend_from_slice(self.weight.as_slice());
        out.extend_from_slice(&self.bias);
    }

    fn read_parameters(&mut self, src: &[f64]) -> usize {
        let nw = self.weight.as_slice().len();
        self.weight.as_mut_slice().copy_from_slice(&src[..nw]);
        let nb = self.bias.len();
        self.bias.copy_from_slice(&src[nw..nw + nb]);
        nw + nb
    }
}

impl LayerGrads {
    pub fn zeros_like(layer: &LinearLayer) -> Self {
        Self {
            weight: Matrix::zeros(layer.out_dim(), layer.in_dim()),
            bias: vec![0.0; layer.out_dim()],
        }
    }

    pub fn add_assign(&mut self, other: &LayerGrads) -> Result<()> {
        self.weight.add_assign(&other.weight)?;
        for (a, b) in self.bias.iter_mut().zip(&other.bias) {
            *a += b;
        }
        Ok(())
    }

    pub fn scale(&mut self, factor: f64) {
        for v in self.weight.as_mut_slice() {
            *v *= factor;
        }
        for v in &mut self.bias {
            *v *= factor;
        }
    }

    pub fn flatten_into(&self, out: &mut Vec<f64>) {
        out.extend_from_slice(self.weight.as_slice());
        out.extend_from_slice(&self.bias);
    }

    pub fn is_zero(&self) -> bool {
        self.weight.as_slice().iter().chain(&self.bias).all(|&v| v == 0.0)
    }
}

/// Activations kept from `forward_extractor` for the backward pass.
#[derive(Debug, Clone)]
pub struct ExtractorCache {
    version: u64,
    /// Input to each layer.
    inputs: Vec<Matrix>,
    /// Pre-activation output of each layer.
    pre_activations: Vec<Matrix>,
}

impl ExtractorCache {
    pub fn pre_activations(&self) -> &[Matrix] {
        &self.pre_activations
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtractorGrads {
    pub layers: Vec<LayerGrads>,
    pub input: Matrix,
}

impl ExtractorGrads {
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for l in &self.layers {
            l.flatten_into(&mut out);
        }
        out
    }

    pub fn add_assign(&mut self, other: &ExtractorGrads) -> Result<()> {
        if self.layers.len() != other.layers.len() {
            return Err(Error::InvalidArgument("gradient layer count mismatch".into()));
        }
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            a.add_assign(b)?;
        }
        Ok(())
    }

    pub fn scale(&mut self, factor: f64) {
        for l in &mut self.layers {
            l.scale(factor);
        }
    }
}

#[derive(Debug, Clone)]
pub struct DiscriminatorOutput {
    pub logits: Matrix,
    pub probs: Matrix,
}

#[derive(Debug, Clone)]
pub struct Network {
    extractor: Vec<LinearLayer>,
    discriminator: LinearLayer,
    version: u64,
}

impl PartialEq for Network {
    fn eq(&self, other: &Self) -> bool {
        self.extractor == other.extractor && self.discriminator == other.discriminator
    }
}

impl Network {
    pub fn new(extractor: Vec<LinearLayer>, discriminator: LinearLayer) -> Result<Self> {
        let Some(last) = extractor.last() else {
            return Err(Error::InvalidArgument("extractor needs at least one layer".into()));
        };
        for pair in extractor.windows(2) {
            if pair[0].out_dim() != pair[1].in_dim() {
                return Err(Error::Dimension {
                    op: "extractor_layers",
                    left: pair[0].weight().shape(),
                    right: pair[1].weight().shape(),
                });
            }
        }
        if last.out_dim() != discriminator.in_dim() {
            return Err(Error::Dimension {
                op: "discriminator_input",
                left: last.weight().shape(),
                right: discriminator.weight().shape(),
            });
        }
        if discriminator.out_dim() < 2 {
            return Err(Error::InvalidArgument(format!(
                "discriminator needs at least 2 camera classes, got {}",
                discriminator.out_dim()
            )));
        }
        Ok(Self {
            extractor,
            discriminator,
            version: fresh_version(),
        })
    }

    /// Glorot-initialized network: `input_dim → hidden… → embedding_dim`
    /// extractor followed by an `embedding_dim → num_cameras` discriminator.
    pub fn random<R: Rng + ?Sized>(
        input_dim: usize,
        hidden: &[usize],
        embedding_dim: usize,
        num_cameras: usize,
        rng: &mut R,
    ) -> Result<Self> {
        if input_dim == 0 || embedding_dim == 0 || hidden.contains(&0) {
            return Err(Error::InvalidArgument("layer widths must be positive".into()));
        }
        let mut widths = vec![input_dim];
        widths.extend_from_slice(hidden);
        widths.push(embedding_dim);
        let extractor = widths
            .windows(2)
            .map(|w| LinearLayer::glorot(w[0], w[1], rng))
            .collect();
        let discriminator = LinearLayer::glorot(embedding_dim, num_cameras, rng);
        Self::new(extractor, discriminator)
    }

    pub fn input_dim(&self) -> usize {
        self.extractor[0].in_dim()
    }

    pub fn embedding_dim(&self) -> usize {
        self.discriminator.in_dim()
    }

    pub fn num_cameras(&self) -> usize {
        self.discriminator.out_dim()
    }

    pub fn extractor_layers(&self) -> &[LinearLayer] {
        &self.extractor
    }

    pub fn discriminator(&self) -> &LinearLayer {
        &self.discriminator
    }

    /// Widths of the hidden extractor layers.
    pub fn hidden_widths(&self) -> Vec<usize> {
        self.extractor[..self.extractor.len() - 1]
            .iter()
            .map(LinearLayer::out_dim)
            .collect()
    }

    pub fn forward_extractor(&self, batch: &Matrix) -> Result<(Matrix, ExtractorCache)> {
        if batch.cols() != self.input_dim() {
            return Err(Error::Dimension {
                op: "forward_extractor",
                left: batch.shape(),
                right: self.extractor[0].weight().shape(),
            });
        }
        let n = self.extractor.len();
        let mut inputs = Vec::with_capacity(n);
        let mut pre_activations = Vec::with_capacity(n);
        let mut x = batch.clone();
        for (i, layer) in self.extractor.iter().enumerate() {
            let z = layer.forward(&x)?;
            let next = if i + 1 < n { relu(&z) } else { z.clone() };
            inputs.push(x);
            pre_activations.push(z);
            x = next;
        }
        let cache = ExtractorCache {
            version: self.version,
            inputs,
            pre_activations,
        };
        Ok((x, cache))
    }

    /// Embeddings without keeping a cache.
    pub fn embed(&self, batch: &Matrix) -> Result<Matrix> {
        if batch.cols() != self.input_dim() {
            return Err(Error::Dimension {
                op: "embed",
                left: batch.shape(),
                right: self.extractor[0].weight().shape(),
            });
        }
        let n = self.extractor.len();
        let mut x = batch.clone();
        for (i, layer) in self.extractor.iter().enumerate() {
            x = layer.forward(&x)?;
            if i + 1 < n {
                relu_in_place(&mut x);
            }
        }
        Ok(x)
    }

    pub fn backward_extractor(
        &self,
        cache: &ExtractorCache,
        grad_embeddings: &Matrix,
    ) -> Result<ExtractorGrads> {
        if cache.version != self.version {
            return Err(Error::StaleCache(
                "cache was produced by different extractor parameters".into(),
            ));
        }
        if cache.inputs.len() != self.extractor.len() {
            return Err(Error::StaleCache(format!(
                "cache holds {} layers, extractor has {}",
                cache.inputs.len(),
                self.extractor.len()
            )));
        }
        let out = cache.pre_activations.last().expect("non-empty extractor");
        if out.shape() != grad_embeddings.shape() {
            return Err(Error::Dimension {
                op: "backward_extractor",
                left: out.shape(),
                right: grad_embeddings.shape(),
            });
        }
        let n = self.extractor.len();
        let mut layers = Vec::with_capacity(n);
        let mut grad = grad_embeddings.clone();
        for i in (0..n).rev() {
            if i + 1 < n {
                relu_backward_in_place(&mut grad, &cache.pre_activations[i]);
            }
            let (g, grad_in) = self.extractor[i].backward(&cache.inputs[i], &grad)?;
            layers.push(g);
            grad = grad_in;
        }
        layers.reverse();
        Ok(ExtractorGrads {
            layers,
            input: grad,
        })
    }

    pub fn forward_discriminator(&self, embeddings: &Matrix) -> Result<DiscriminatorOutput> {
        if embeddings.cols() != self.embedding_dim() {
            return Err(Error::Dimension {
                op: "forward_discriminator",
                left: embeddings.shape(),
                right: self.discriminator.weight().shape(),
            });
        }
        let logits = self.discriminator.forward(embeddings)?;
        let probs = softmax_rows(&logits);
        Ok(DiscriminatorOutput { logits, probs })
    }

    /// The discriminator's forward input (the embeddings) is its whole cache.
    pub fn backward_discriminator(
        &self,
        embeddings: &Matrix,
        grad_logits: &Matrix,
    ) -> Result<(LayerGrads, Matrix)> {
        self.discriminator.backward(embeddings, grad_logits)
    }

    pub fn apply_extractor_gradients(&mut self, grads: &ExtractorGrads, lr: f64) -> Result<()> {
        if grads.layers.len() != self.extractor.len() {
            return Err(Error::InvalidArgument(format!(
                "{} gradient layers for {} extractor layers",
                grads.layers.len(),
                self.extractor.len()
            )));
        }
        for (layer, g) in self.extractor.iter_mut().zip(&grads.layers) {
            layer.apply(g, lr)?;
        }
        self.version = fresh_version();
        Ok(())
    }

    pub fn apply_discriminator_gradients(&mut self, grads: &LayerGrads, lr: f64) -> Result<()> {
        self.discriminator.apply(grads, lr)
    }

    pub fn extractor_parameters(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for l in &self.extractor {
            l.write_parameters(&mut out);
        }
        out
    }

    pub fn set_extractor_parameters(&mut self, params: &[f64]) -> Result<()> {
        let expected: usize = self.extractor.iter().map(LinearLayer::num_parameters).sum();
        if params.len() != expected {
            return Err(Error::InvalidArgument(format!(
                "{} extractor parameters given, expected {expected}",
                params.len()
            )));
        }
        let mut offset = 0;
        for l in &mut self.extractor {
            offset += l.read_parameters(&params[offset..]);
        }
        self.version = fresh_version();
        Ok(())
    }

    pub fn discriminator_parameters(&self) -> Vec<f64> {
        let mut out = Vec::new();
        self.discriminator.write_parameters(&mut out);
        out
    }

    pub fn set_discriminator_parameters(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.discriminator.num_parameters() {
            return Err(Error::InvalidArgument(format!(
                "{} discriminator parameters given, expected {}",
                params.len(),
                self.discriminator.num_parameters()
            )));
        }
        self.discriminator.read_parameters(params);
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.extractor
            .iter()
            .chain(std::iter::once(&self.discriminator))
            .all(|l| l.weight.is_finite() && l.bias.iter().all(|b| b.is_finite()))
    }
}

pub fn relu(z: &Matrix) -> Matrix {
    let mut out = z.clone();
    relu_in_place(&mut out);
    out
}

fn relu_in_place(z: &mut Matrix) {
    for v in z.as_mut_slice() {
        if *v <= 0.0 {
            *v = 0.0;
        }
    }
}

/// Zeroes the gradient wherever the pre-activation is `<= 0`.
fn relu_backward_in_place(grad: &mut Matrix, pre: &Matrix) {
    for (g, &z) in grad.as_mut_slice().iter_mut().zip(pre.as_slice()) {
        if z <= 0.0 {
            *g = 0.0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn random_matrix(rows: usize, cols: usize, r: &mut ChaCha8Rng) -> Matrix {
        let d = Uniform::new(-1.0, 1.0).unwrap();
        Matrix::from_vec(rows, cols, (0..rows * cols).map(|_| d.sample(r)).collect()).unwrap()
    }

    #[test]
    fn zero_network_gives_zero_embeddings() {
        let net = Network::new(
            vec![LinearLayer::zeros(3, 4), LinearLayer::zeros(4, 2)],
            LinearLayer::zeros(2, 3),
        )
        .unwrap();
        let x = random_matrix(5, 3, &mut rng(1));
        let (e, _) = net.forward_extractor(&x).unwrap();
        assert!(e.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn identity_single_layer_passes_input_through() {
        let layer = LinearLayer::new(Matrix::identity(4), vec![0.0; 4]).unwrap();
        let net = Network::new(vec![layer], LinearLayer::zeros(4, 2)).unwrap();
        let x = random_matrix(3, 4, &mut rng(2));
        let (e, _) = net.forward_extractor(&x).unwrap();
        assert_eq!(e, x);
    }

    #[test]
    fn two_layer_forward_matches_elementwise_recomputation() {
        let mut r = rng(3);
        let net = Network::random(3, &[5], 4, 2, &mut r).unwrap();
        let x = random_matrix(6, 3, &mut r);
        let (e, _) = net.forward_extractor(&x).unwrap();
        let l0 = &net.extractor_layers()[0];
        let l1 = &net.extractor_layers()[1];
        for n in 0..6 {
            let mut h = vec![0.0; 5];
            for (j, hj) in h.iter_mut().enumerate() {
                let mut s = l0.bias()[j];
                for k in 0..3 {
                    s += l0.weight().get(j, k) * x.get(n, k);
                }
                *hj = if s > 0.0 { s } else { 0.0 };
            }
            for j in 0..4 {
                let mut s = l1.bias()[j];
                for (k, hk) in h.iter().enumerate() {
                    s += l1.weight().get(j, k) * hk;
                }
                assert!((e.get(n, j) - s).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn forward_is_bit_identical_on_repeat() {
        let mut r = rng(4);
        let net = Network::random(6, &[8, 8], 5, 3, &mut r).unwrap();
        let x = random_matrix(7, 6, &mut r);
        let (a, _) = net.forward_extractor(&x).unwrap();
        let (b, _) = net.forward_extractor(&x).unwrap();
        assert_eq!(a.as_slice(), b.as_slice());
        assert_eq!(net.embed(&x).unwrap().as_slice(), a.as_slice());
        let pa = net.forward_discriminator(&a).unwrap().probs;
        let pb = net.forward_discriminator(&b).unwrap().probs;
        assert_eq!(pa.as_slice(), pb.as_slice());
    }

    #[test]
    fn input_dimension_mismatch() {
        let net = Network::random(4, &[3], 2, 2, &mut rng(5)).unwrap();
        assert!(matches!(
            net.forward_extractor(&Matrix::zeros(2, 5)),
            Err(Error::Dimension { .. })
        ));
        assert!(net.forward_discriminator(&Matrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn discriminator_probs_rows_sum_to_one() {
        let mut r = rng(6);
        let net = Network::random(4, &[6], 5, 4, &mut r).unwrap();
        let x = random_matrix(10, 4, &mut r);
        let out = net.forward_discriminator(&net.embed(&x).unwrap()).unwrap();
        for row in out.probs.row_iter() {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(row.iter().all(|&p| p > 0.0));
        }
    }

    #[test]
    fn zero_upstream_gradient_gives_zero_parameter_gradients() {
        let mut r = rng(7);
        let net = Network::random(4, &[6], 3, 2, &mut r).unwrap();
        let x = random_matrix(5, 4, &mut r);
        let (e, cache) = net.forward_extractor(&x).unwrap();
        let g = net
            .backward_extractor(&cache, &Matrix::zeros(e.rows(), e.cols()))
            .unwrap();
        assert!(g.layers.iter().all(LayerGrads::is_zero));
        assert!(g.input.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn sum_of_outputs_weight_gradient_is_column_sums_of_inputs() {
        // d/dW_jk sum_n sum_j (W x_n + b)_j = sum_n x_nk for every row j
        let mut r = rng(8);
        let layer = LinearLayer::glorot(3, 2, &mut r);
        let x = random_matrix(4, 3, &mut r);
        let ones = Matrix::from_vec(4, 2, vec![1.0; 8]).unwrap();
        let (g, _) = layer.backward(&x, &ones).unwrap();
        for k in 0..3 {
            let col_sum: f64 = (0..4).map(|n| x.get(n, k)).sum();
            for j in 0..2 {
                assert!((g.weight.get(j, k) - col_sum).abs() < 1e-14);
            }
        }
        assert_eq!(g.bias, vec![4.0, 4.0]);
    }

    #[test]
    fn relu_gradient_is_zero_at_exact_zero() {
        // bias -1 on input 1 puts the hidden pre-activation exactly at 0
        let l0 = LinearLayer::new(Matrix::identity(1), vec![-1.0]).unwrap();
        let l1 = LinearLayer::new(Matrix::identity(1), vec![0.0]).unwrap();
        let net = Network::new(vec![l0, l1], LinearLayer::zeros(1, 2)).unwrap();
        let x = Matrix::from_vec(1, 1, vec![1.0]).unwrap();
        let (_, cache) = net.forward_extractor(&x).unwrap();
        assert_eq!(cache.pre_activations()[0].get(0, 0), 0.0);
        let g = net
            .backward_extractor(&cache, &Matrix::from_vec(1, 1, vec![1.0]).unwrap())
            .unwrap();
        assert_eq!(g.layers[0].weight.get(0, 0), 0.0);
        assert_eq!(g.layers[0].bias[0], 0.0);
        assert_eq!(g.input.get(0, 0), 0.0);
    }

    #[test]
    fn stale_cache_is_rejected() {
        let mut r = rng(9);
        let mut net = Network::random(3, &[4], 2, 2, &mut r).unwrap();
        let x = random_matrix(2, 3, &mut r);
        let (e, cache) = net.forward_extractor(&x).unwrap();
        let g = net.backward_extractor(&cache, &e).unwrap();
        net.apply_extractor_gradients(&g, 0.1).unwrap();
        assert!(matches!(
            net.backward_extractor(&cache, &e),
            Err(Error::StaleCache(_))
        ));
        let other = Network::random(3, &[4], 2, 2, &mut r).unwrap();
        let (_, other_cache) = other.forward_extractor(&x).unwrap();
        assert!(net.backward_extractor(&other_cache, &e).is_err());
    }

    #[test]
    fn discriminator_update_keeps_extractor_cache_valid() {
        let mut r = rng(12);
        let mut net = Network::random(3, &[4], 2, 2, &mut r).unwrap();
        let x = random_matrix(2, 3, &mut r);
        let (e, cache) = net.forward_extractor(&x).unwrap();
        let out = net.forward_discriminator(&e).unwrap();
        let (g, _) = net.backward_discriminator(&e, &out.logits).unwrap();
        net.apply_discriminator_gradients(&g, 0.1).unwrap();
        assert!(net.backward_extractor(&cache, &e).is_ok());
    }

    #[test]
    fn parameter_flattening_round_trips() {
        let mut r = rng(10);
        let mut net = Network::random(3, &[4], 2, 3, &mut r).unwrap();
        let p = net.extractor_parameters();
        let mut q = p.clone();
        q[0] += 1.0;
        net.set_extractor_parameters(&q).unwrap();
        assert_eq!(net.extractor_parameters(), q);
        assert!(net.set_extractor_parameters(&p[1..]).is_err());
        let d = net.discriminator_parameters();
        assert_eq!(d.len(), 2 * 3 + 3);
        net.set_discriminator_parameters(&d).unwrap();
    }

    #[test]
    fn discriminator_needs_two_classes() {
        assert!(Network::new(vec![LinearLayer::zeros(2, 2)], LinearLayer::zeros(2, 1)).is_err());
        assert!(Network::new(vec![LinearLayer::zeros(2, 3)], LinearLayer::zeros(2, 2)).is_err());
    }
}
