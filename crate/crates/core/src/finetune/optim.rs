use super::model::alloc;

/// Linear warmup to the peak rate, then linear decay to zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearSchedule {
    pub peak_lr: f64,
    pub warmup_steps: usize,
    pub total_steps: usize,
}

impl LinearSchedule {
    pub fn new(peak_lr: f64, warmup_fraction: f64, total_steps: usize) -> Self {
        Self {
            peak_lr,
            warmup_steps: (warmup_fraction * total_steps as f64) as usize,
            total_steps,
        }
    }

    /// Rate for the optimizer step with zero-based index `step`.
    pub fn lr(&self, step: usize) -> f64 {
        if step < self.warmup_steps {
            return self.peak_lr * step as f64 / self.warmup_steps as f64;
        }
        let rest = self.total_steps.saturating_sub(self.warmup_steps).max(1);
        self.peak_lr * (self.total_steps.saturating_sub(step) as f64 / rest as f64).max(0.0)
    }
}

/// Adam with decoupled weight decay over one flat parameter tensor.
#[derive(Debug, Clone)]
pub struct AdamW {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    m: Vec<f32>,
    v: Vec<f32>,
    t: i32,
}

impl AdamW {
    /// `Err` carries the byte count that could not be allocated.
    pub fn new(len: usize) -> Result<Self, usize> {
        Ok(Self {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            m: alloc(len)?,
            v: alloc(len)?,
            t: 0,
        })
    }

    pub fn step(&mut self, params: &mut [f32], grads: &[f32], lr: f64, weight_decay: f64) {
        debug_assert_eq!(params.len(), grads.len());
        self.t += 1;
        let (b1, b2) = (self.beta1, self.beta2);
        let c1 = 1.0 - b1.powi(self.t);
        let c2 = 1.0 - b2.powi(self.t);
        let decay = (1.0 - lr * weight_decay) as f32;
        for i in 0..params.len() {
            let g = grads[i] as f64;
            let m = b1 * self.m[i] as f64 + (1.0 - b1) * g;
            let v = b2 * self.v[i] as f64 + (1.0 - b2) * g * g;
            self.m[i] = m as f32;
            self.v[i] = v as f32;
            let update = lr * (m / c1) / ((v / c2).sqrt() + self.eps);
            params[i] = params[i] * decay - update as f32;
        }
    }
}
