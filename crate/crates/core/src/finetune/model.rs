use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::optim::AdamW;

/// Tensor names in storage order.
pub const TENSORS: [&str; 5] = ["embed", "w1", "b1", "w2", "b2"];

/// Bag-of-embeddings encoder with a tanh layer and a linear head.
///
/// Layouts are row-major: `embed[v·d + j]`, `w1[i·d + j]`, `w2[c·h + i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BowNet {
    pub vocab_size: usize,
    pub embed_dim: usize,
    pub hidden_dim: usize,
    pub n_classes: usize,
    pub embed: Vec<f32>,
    pub w1: Vec<f32>,
    pub b1: Vec<f32>,
    pub w2: Vec<f32>,
    pub b2: Vec<f32>,
}

/// Activations kept from the forward pass for backprop.
pub struct Trace {
    pooled: Vec<f32>,
    hidden: Vec<f32>,
    pub logits: Vec<f64>,
}

pub(crate) fn alloc(len: usize) -> Result<Vec<f32>, usize> {
    let mut v = Vec::new();
    v.try_reserve_exact(len).map_err(|_| len.saturating_mul(4))?;
    v.resize(len, 0.0);
    Ok(v)
}

fn uniform(rng: &mut ChaCha8Rng, out: &mut [f32], bound: f32) {
    for x in out {
        *x = rng.random_range(-bound..bound);
    }
}

impl BowNet {
    /// Zero-filled parameters; `Err` carries the byte count that failed.
    pub fn zeros(vocab_size: usize, embed_dim: usize, hidden_dim: usize, n_classes: usize) -> Result<Self, usize> {
        let embed_len = vocab_size.checked_mul(embed_dim).ok_or(usize::MAX)?;
        Ok(Self {
            vocab_size,
            embed_dim,
            hidden_dim,
            n_classes,
            embed: alloc(embed_len)?,
            w1: alloc(hidden_dim * embed_dim)?,
            b1: alloc(hidden_dim)?,
            w2: alloc(n_classes * hidden_dim)?,
            b2: alloc(n_classes)?,
        })
    }

    pub fn init(&mut self, rng: &mut ChaCha8Rng) {
        let (d, h, k) = (self.embed_dim as f32, self.hidden_dim as f32, self.n_classes as f32);
        uniform(rng, &mut self.embed, 0.1);
        uniform(rng, &mut self.w1, (6.0 / (d + h)).sqrt());
        uniform(rng, &mut self.w2, (6.0 / (h + k)).sqrt());
    }

    pub fn shape(&self, name: &str) -> Vec<usize> {
        match name {
            "embed" => vec![self.vocab_size, self.embed_dim],
            "w1" => vec![self.hidden_dim, self.embed_dim],
            "b1" => vec![self.hidden_dim],
            "w2" => vec![self.n_classes, self.hidden_dim],
            "b2" => vec![self.n_classes],
            _ => unreachable!("unknown tensor {name}"),
        }
    }

    pub fn tensors(&self) -> [&[f32]; 5] {
        [&self.embed, &self.w1, &self.b1, &self.w2, &self.b2]
    }

    pub fn tensors_mut(&mut self) -> [&mut Vec<f32>; 5] {
        [&mut self.embed, &mut self.w1, &mut self.b1, &mut self.w2, &mut self.b2]
    }

    pub fn forward(&self, ids: &[u32]) -> Trace {
        let (d, h) = (self.embed_dim, self.hidden_dim);
        let mut pooled = vec![0f32; d];
        if !ids.is_empty() {
            for &t in ids {
                let row = &self.embed[t as usize * d..(t as usize + 1) * d];
                for j in 0..d {
                    pooled[j] += row[j];
                }
            }
            let inv = 1.0 / ids.len() as f32;
            pooled.iter_mut().for_each(|x| *x *= inv);
        }
        let hidden: Vec<f32> = (0..h)
            .map(|i| {
                let w = &self.w1[i * d..(i + 1) * d];
                let s: f32 = w.iter().zip(&pooled).map(|(a, b)| a * b).sum();
                (s + self.b1[i]).tanh()
            })
            .collect();
        let logits = (0..self.n_classes)
            .map(|c| {
                let w = &self.w2[c * h..(c + 1) * h];
                let s: f32 = w.iter().zip(&hidden).map(|(a, b)| a * b).sum();
                (s + self.b2[c]) as f64
            })
            .collect();
        Trace { pooled, hidden, logits }
    }

    /// Add the gradient of the loss w.r.t. every parameter, given
    /// `dlogits` = ∂loss/∂logits, into `grad`.
    pub fn backward(&self, ids: &[u32], trace: &Trace, dlogits: &[f64], grad: &mut BowNet) {
        let (d, h) = (self.embed_dim, self.hidden_dim);
        let mut dhidden = vec![0f32; h];
        for (c, &dz) in dlogits.iter().enumerate() {
            let dz = dz as f32;
            grad.b2[c] += dz;
            let w = &self.w2[c * h..(c + 1) * h];
            let g = &mut grad.w2[c * h..(c + 1) * h];
            for i in 0..h {
                g[i] += dz * trace.hidden[i];
                dhidden[i] += dz * w[i];
            }
        }
        let mut dpooled = vec![0f32; d];
        for i in 0..h {
            let dpre = dhidden[i] * (1.0 - trace.hidden[i] * trace.hidden[i]);
            grad.b1[i] += dpre;
            let w = &self.w1[i * d..(i + 1) * d];
            let g = &mut grad.w1[i * d..(i + 1) * d];
            for j in 0..d {
                g[j] += dpre * trace.pooled[j];
                dpooled[j] += dpre * w[j];
            }
        }
        if ids.is_empty() {
            return;
        }
        let inv = 1.0 / ids.len() as f32;
        for &t in ids {
            let g = &mut grad.embed[t as usize * d..(t as usize + 1) * d];
            for j in 0..d {
                g[j] += dpooled[j] * inv;
            }
        }
    }

    pub fn zero(&mut self) {
        for t in self.tensors_mut() {
            t.iter_mut().for_each(|x| *x = 0.0);
        }
    }
}

/// Numerically stable softmax in f64.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// One optimizer per tensor; biases are exempt from weight decay.
pub struct Optimizer {
    states: Vec<AdamW>,
}

impl Optimizer {
    pub fn new(net: &BowNet) -> Result<Self, usize> {
        let mut states = Vec::new();
        for t in net.tensors() {
            states.push(AdamW::new(t.len())?);
        }
        Ok(Self { states })
    }

    pub fn step(&mut self, net: &mut BowNet, grad: &BowNet, lr: f64, weight_decay: f64) {
        let grads = grad.tensors();
        for (i, (p, st)) in net.tensors_mut().into_iter().zip(&mut self.states).enumerate() {
            let wd = if TENSORS[i].starts_with('b') { 0.0 } else { weight_decay };
            st.step(p, grads[i], lr, wd);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn loss(net: &BowNet, ids: &[u32], y: usize) -> f64 {
        -softmax(&net.forward(ids).logits)[y].ln()
    }

    /// Central finite differences against the analytic gradient.
    #[test]
    fn gradient_check() {
        let mut net = BowNet::zeros(6, 4, 3, 3).unwrap();
        net.init(&mut ChaCha8Rng::seed_from_u64(3));
        net.b1 = vec![0.1, -0.2, 0.05];
        let ids = [1u32, 4, 4, 2];
        let y = 2;
        let trace = net.forward(&ids);
        let mut p = softmax(&trace.logits);
        p[y] -= 1.0;
        let mut grad = BowNet::zeros(6, 4, 3, 3).unwrap();
        net.backward(&ids, &trace, &p, &mut grad);

        let eps = 1e-2f32;
        for ti in 0..5 {
            for idx in 0..net.tensors()[ti].len() {
                let mut plus = net.clone();
                plus.tensors_mut()[ti][idx] += eps;
                let mut minus = net.clone();
                minus.tensors_mut()[ti][idx] -= eps;
                let numeric = (loss(&plus, &ids, y) - loss(&minus, &ids, y)) / (2.0 * eps as f64);
                let analytic = grad.tensors()[ti][idx] as f64;
                assert!(
                    (numeric - analytic).abs() < 2e-3,
                    "{}[{idx}]: numeric {numeric} analytic {analytic}",
                    TENSORS[ti]
                );
            }
        }
    }

    #[test]
    fn softmax_sums_to_one() {
        let p = softmax(&[1000.0, 1001.0, -5.0]);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(p[1] > p[0]);
    }

    #[test]
    fn empty_input_uses_biases_only() {
        let mut net = BowNet::zeros(3, 2, 2, 2).unwrap();
        net.b2 = vec![0.0, 1.0];
        let t = net.forward(&[]);
        assert_eq!(t.logits, vec![0.0, 1.0]);
    }
}
