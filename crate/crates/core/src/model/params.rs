use super::ModelConfig;
use crate::crosscnn::MixerVariant;
use crate::error::{Error, Result};
use crate::numeric::Matrix;
use crate::rng::RngState;

/// One residual FFN block: `LayerNorm -> Dense(D,H) -> GELU -> Dropout ->
/// Dense(H,D) -> Dropout`, added back onto the block input.
#[derive(Debug, Clone, PartialEq)]
pub struct FfnParams {
    pub ln_gamma: Vec<f64>,
    pub ln_beta: Vec<f64>,
    pub w1: Matrix,
    pub b1: Vec<f64>,
    pub w2: Matrix,
    pub b2: Vec<f64>,
}

impl FfnParams {
    pub fn init(token_dim: usize, hidden_dim: usize, rng: &mut RngState) -> Self {
        let (w1, b1) = dense_init(token_dim, hidden_dim, rng);
        let (w2, b2) = dense_init(hidden_dim, token_dim, rng);
        Self {
            ln_gamma: vec![1.0; token_dim],
            ln_beta: vec![0.0; token_dim],
            w1,
            b1,
            w2,
            b2,
        }
    }

    pub fn zeros(token_dim: usize, hidden_dim: usize) -> Self {
        Self {
            ln_gamma: vec![0.0; token_dim],
            ln_beta: vec![0.0; token_dim],
            w1: Matrix::zeros(token_dim, hidden_dim),
            b1: vec![0.0; hidden_dim],
            w2: Matrix::zeros(hidden_dim, token_dim),
            b2: vec![0.0; token_dim],
        }
    }

    fn tensors(&self) -> [&[f64]; 6] {
        [
            &self.ln_gamma,
            &self.ln_beta,
            self.w1.data(),
            &self.b1,
            self.w2.data(),
            &self.b2,
        ]
    }

    fn tensors_mut(&mut self) -> [&mut [f64]; 6] {
        [
            &mut self.ln_gamma,
            &mut self.ln_beta,
            self.w1.data_mut(),
            &mut self.b1,
            self.w2.data_mut(),
            &mut self.b2,
        ]
    }
}

// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weight and bias.
fn dense_init(fan_in: usize, fan_out: usize, rng: &mut RngState) -> (Matrix, Vec<f64>) {
    let bound = 1.0 / (fan_in as f64).sqrt();
    let w = Matrix::from_fn(fan_in, fan_out, |_, _| rng.uniform_in(-bound, bound));
    let b = (0..fan_out).map(|_| rng.uniform_in(-bound, bound)).collect();
    (w, b)
}

/// All trainable parameters. Gradients share this layout ([`Gradients`]).
#[derive(Debug, Clone, PartialEq)]
pub struct TimeCnnParams {
    pub mixer: MixerVariant,
    /// `L x D`, applied to each variable's (mixed) lookback series.
    pub embed_w: Matrix,
    pub embed_b: Vec<f64>,
    pub blocks: Vec<FfnParams>,
    pub final_gamma: Vec<f64>,
    pub final_beta: Vec<f64>,
    /// `D x T`.
    pub proj_w: Matrix,
    pub proj_b: Vec<f64>,
}

pub type Gradients = TimeCnnParams;

const MIXER_STREAM: u64 = 0x6d69_7865;

impl TimeCnnParams {
    pub fn init(cfg: &ModelConfig, rng: &mut RngState) -> Result<Self> {
        cfg.validate()?;
        // The mixer draws from its own stream so that every mixer variant
        // shares the same initial embedding, FFN and projection weights.
        let mixer = MixerVariant::init(
            cfg.mixer,
            cfg.lookback,
            cfg.num_variables,
            cfg.kernel_init,
            &mut rng.derive(MIXER_STREAM),
        )?;
        let (embed_w, embed_b) = dense_init(cfg.lookback, cfg.token_dim, rng);
        let blocks = (0..cfg.ffn_blocks)
            .map(|_| FfnParams::init(cfg.token_dim, cfg.hidden_dim, rng))
            .collect();
        let (proj_w, proj_b) = dense_init(cfg.token_dim, cfg.horizon, rng);
        Ok(Self {
            mixer,
            embed_w,
            embed_b,
            blocks,
            final_gamma: vec![1.0; cfg.token_dim],
            final_beta: vec![0.0; cfg.token_dim],
            proj_w,
            proj_b,
        })
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            mixer: self.mixer.zeros_like(),
            embed_w: Matrix::zeros(self.embed_w.rows(), self.embed_w.cols()),
            embed_b: vec![0.0; self.embed_b.len()],
            blocks: self
                .blocks
                .iter()
                .map(|b| FfnParams::zeros(b.w1.rows(), b.w1.cols()))
                .collect(),
            final_gamma: vec![0.0; self.final_gamma.len()],
            final_beta: vec![0.0; self.final_beta.len()],
            proj_w: Matrix::zeros(self.proj_w.rows(), self.proj_w.cols()),
            proj_b: vec![0.0; self.proj_b.len()],
        }
    }

    /// Parameter blocks in declaration order: mixer tensors, embedding,
    /// each FFN block, final norm, projection.
    pub fn tensors(&self) -> Vec<&[f64]> {
        let mut out = self.mixer.tensors();
        out.push(self.embed_w.data());
        out.push(&self.embed_b);
        for b in &self.blocks {
            out.extend(b.tensors());
        }
        out.push(&self.final_gamma);
        out.push(&self.final_beta);
        out.push(self.proj_w.data());
        out.push(&self.proj_b);
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out = self.mixer.tensors_mut();
        out.push(self.embed_w.data_mut());
        out.push(&mut self.embed_b);
        for b in &mut self.blocks {
            out.extend(b.tensors_mut());
        }
        out.push(&mut self.final_gamma);
        out.push(&mut self.final_beta);
        out.push(self.proj_w.data_mut());
        out.push(&mut self.proj_b);
        out
    }

    pub fn param_count(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.tensors().concat()
    }

    /// Overwrites every parameter from a flat vector laid out as [`Self::to_flat`].
    pub fn set_flat(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.param_count() {
            return Err(Error::shape(
                "parameters",
                format!("{} values for {} parameters", flat.len(), self.param_count()),
            ));
        }
        let mut off = 0;
        for t in self.tensors_mut() {
            t.copy_from_slice(&flat[off..off + t.len()]);
            off += t.len();
        }
        Ok(())
    }

    /// `self += scale * other`, tensor by tensor.
    pub fn add_scaled(&mut self, other: &Self, scale: f64) -> Result<()> {
        let src = other.tensors();
        let mut dst = self.tensors_mut();
        if src.len() != dst.len() {
            return Err(Error::shape("parameters", "tensor count differs"));
        }
        for (d, s) in dst.iter_mut().zip(src) {
            if d.len() != s.len() {
                return Err(Error::shape("parameters", "tensor length differs"));
            }
            for (a, b) in d.iter_mut().zip(s) {
                *a += scale * b;
            }
        }
        Ok(())
    }

    pub fn scale(&mut self, s: f64) {
        for t in self.tensors_mut() {
            for v in t.iter_mut() {
                *v *= s;
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.iter().all(|v| v.is_finite()))
    }

    /// Checks every tensor shape against `cfg`.
    pub fn validate(&self, cfg: &ModelConfig) -> Result<()> {
        let (l, n, d, h, t) = (
            cfg.lookback,
            cfg.num_variables,
            cfg.token_dim,
            cfg.hidden_dim,
            cfg.horizon,
        );
        let mismatch = |what: &str| Err(Error::shape("parameters", format!("{what} does not match config")));
        if self.mixer.kind() != cfg.mixer
            || self.mixer.param_count() != cfg.mixer.param_count(l, n)
        {
            return mismatch("mixer");
        }
        if let MixerVariant::CrossCnn(p) = &self.mixer {
            if p.kernels.shape() != (l, n) {
                return mismatch("kernel bank");
            }
        }
        if self.embed_w.shape() != (l, d) || self.embed_b.len() != d {
            return mismatch("embedding");
        }
        if self.blocks.len() != cfg.ffn_blocks {
            return mismatch("FFN block count");
        }
        for b in &self.blocks {
            if b.ln_gamma.len() != d
                || b.ln_beta.len() != d
                || b.w1.shape() != (d, h)
                || b.b1.len() != h
                || b.w2.shape() != (h, d)
                || b.b2.len() != d
            {
                return mismatch("FFN block");
            }
        }
        if self.final_gamma.len() != d || self.final_beta.len() != d {
            return mismatch("final norm");
        }
        if self.proj_w.shape() != (d, t) || self.proj_b.len() != t {
            return mismatch("projection");
        }
        Ok(())
    }
}
