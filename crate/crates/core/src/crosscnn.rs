//! Cross-variable mixing at each time point.
//!
//! The main layer gives every lookback step its own length-`N` kernel and
//! slides it over the circularly padded variable vector of that step, so each
//! output variable sees all `N` inputs exactly once. The output passes
//! through dropout and is added back onto the input (skip connection).
//! The ablation mixers share the same skip/dropout wiring.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{dropout, mac, Matrix};
use crate::rng::RngState;

/// Returns `[x_2, .., x_N, x_1, .., x_N]` (length `2N - 1`).
pub fn circular_pad(x: &[f64]) -> Result<Vec<f64>> {
    if x.is_empty() {
        return Err(Error::shape("circular pad", "empty variable vector"));
    }
    let mut out = Vec::with_capacity(2 * x.len() - 1);
    out.extend_from_slice(&x[1..]);
    out.extend_from_slice(x);
    Ok(out)
}

/// Valid cross-correlation of `w` over `circular_pad(x)`:
/// `c_j = sum_k w_k * x[(j + k + 1) mod N]` (0-based). A kernel that is one
/// on its last entry and zero elsewhere reproduces `x`.
pub fn crosscnn_point(x: &[f64], w: &[f64]) -> Result<Vec<f64>> {
    if x.len() != w.len() {
        return Err(Error::shape(
            "crosscnn",
            format!("{} variables, kernel of {}", x.len(), w.len()),
        ));
    }
    let padded = circular_pad(x)?;
    let mut out = vec![0.0; x.len()];
    conv_padded(&padded, w, &mut out);
    Ok(out)
}

#[inline]
fn conv_padded(padded: &[f64], w: &[f64], out: &mut [f64]) {
    let n = w.len();
    for (j, o) in out.iter_mut().enumerate() {
        let window = &padded[j..j + n];
        let mut s = 0.0;
        for k in 0..n {
            s += w[k] * window[k];
        }
        *o = s;
    }
    mac::record((n * n) as u64);
}

// dW[k] += sum_j g_j * padded[j + k]; dpadded[j + k] += g_j * w[k].
fn conv_padded_backward(padded: &[f64], w: &[f64], g: &[f64], dw: &mut [f64], dx: &mut [f64]) {
    let n = w.len();
    let mut dpad = vec![0.0; padded.len()];
    for (j, &gj) in g.iter().enumerate() {
        if gj == 0.0 {
            continue;
        }
        for k in 0..n {
            dw[k] += gj * padded[j + k];
            dpad[j + k] += gj * w[k];
        }
    }
    // padded[p] = x[(p + 1) mod N]
    for (p, v) in dpad.into_iter().enumerate() {
        dx[(p + 1) % n] += v;
    }
}

/// Per-time-point kernel bank, one row of `N` weights for each of the `L`
/// lookback steps. No bias.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossCnnParams {
    pub kernels: Matrix,
}

impl CrossCnnParams {
    pub fn new(kernels: Matrix) -> Self {
        Self { kernels }
    }

    pub fn lookback(&self) -> usize {
        self.kernels.rows()
    }

    pub fn num_variables(&self) -> usize {
        self.kernels.cols()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum KernelInit {
    /// `U(-1/sqrt(N), 1/sqrt(N))` per entry.
    #[default]
    SmallUniform,
    /// Identity kernel (`e_N`) per row plus `U(-noise, noise)`.
    NearIdentity { noise: f64 },
    /// All-zero kernels: the layer starts as a pure skip connection.
    Zero,
}

impl FromStr for KernelInit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "small-uniform" => Ok(KernelInit::SmallUniform),
            "near-identity" => Ok(KernelInit::NearIdentity { noise: 0.01 }),
            "zero" => Ok(KernelInit::Zero),
            other => Err(Error::Config(format!("unknown kernel init scheme '{other}'"))),
        }
    }
}

impl fmt::Display for KernelInit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelInit::SmallUniform => f.write_str("small-uniform"),
            KernelInit::NearIdentity { .. } => f.write_str("near-identity"),
            KernelInit::Zero => f.write_str("zero"),
        }
    }
}

pub fn init_kernels(
    lookback: usize,
    num_variables: usize,
    scheme: KernelInit,
    rng: &mut RngState,
) -> Result<CrossCnnParams> {
    if lookback == 0 || num_variables == 0 {
        return Err(Error::Config(format!(
            "kernel bank needs L, N >= 1 (got {lookback}x{num_variables})"
        )));
    }
    let n = num_variables;
    let kernels = match scheme {
        KernelInit::SmallUniform => {
            let bound = 1.0 / (n as f64).sqrt();
            Matrix::from_fn(lookback, n, |_, _| rng.uniform_in(-bound, bound))
        }
        KernelInit::NearIdentity { noise } => Matrix::from_fn(lookback, n, |_, k| {
            let base = if k == n - 1 { 1.0 } else { 0.0 };
            if noise > 0.0 {
                base + rng.uniform_in(-noise, noise)
            } else {
                base
            }
        }),
        KernelInit::Zero => Matrix::zeros(lookback, n),
    };
    Ok(CrossCnnParams { kernels })
}

/// Mixer selector used in configuration and the ablation harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MixerKind {
    CrossCnn,
    OneCnn,
    CrossLinear,
    /// Square `(k, k)` kernel over the (time, variable) grid, `k` odd.
    TwoDCnn(usize),
    None,
}

impl MixerKind {
    /// Trainable parameters for the given lookback and variable count.
    pub fn param_count(self, lookback: usize, num_variables: usize) -> usize {
        match self {
            MixerKind::CrossCnn => lookback * num_variables,
            MixerKind::OneCnn => num_variables,
            MixerKind::CrossLinear => num_variables * num_variables + num_variables,
            MixerKind::TwoDCnn(k) => k * k,
            MixerKind::None => 0,
        }
    }

    /// Multiply-accumulates of one forward pass over an `L x N` window.
    pub fn macs(self, lookback: usize, num_variables: usize) -> u64 {
        let (l, n) = (lookback as u64, num_variables as u64);
        match self {
            MixerKind::CrossCnn | MixerKind::OneCnn | MixerKind::CrossLinear => l * n * n,
            MixerKind::TwoDCnn(k) => {
                // Only in-bounds taps are executed under zero padding.
                let r = (k / 2) as i64;
                let taps = |len: i64| -> u64 {
                    (-r..=r).map(|off| (len - off.abs()).max(0) as u64).sum()
                };
                taps(l as i64) * taps(n as i64)
            }
            MixerKind::None => 0,
        }
    }

    pub fn validate(self) -> Result<()> {
        if let MixerKind::TwoDCnn(k) = self {
            if k == 0 || k % 2 == 0 {
                return Err(Error::Config(format!("2D kernel side must be odd, got {k}")));
            }
        }
        Ok(())
    }
}

impl fmt::Display for MixerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MixerKind::CrossCnn => f.write_str("crosscnn"),
            MixerKind::OneCnn => f.write_str("onecnn"),
            MixerKind::CrossLinear => f.write_str("crosslinear"),
            MixerKind::TwoDCnn(k) => write!(f, "cnn2d_{k}"),
            MixerKind::None => f.write_str("none"),
        }
    }
}

impl FromStr for MixerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let kind = match s {
            "crosscnn" => MixerKind::CrossCnn,
            "onecnn" => MixerKind::OneCnn,
            "crosslinear" => MixerKind::CrossLinear,
            "none" => MixerKind::None,
            other => match other.strip_prefix("cnn2d_").map(str::parse::<usize>) {
                Some(Ok(k)) => MixerKind::TwoDCnn(k),
                _ => return Err(Error::Config(format!("unknown mixer variant '{other}'"))),
            },
        };
        kind.validate()?;
        Ok(kind)
    }
}

/// Mixer parameters, one variant per ablation.
#[derive(Debug, Clone, PartialEq)]
pub enum MixerVariant {
    CrossCnn(CrossCnnParams),
    OneCnn { kernel: Vec<f64> },
    CrossLinear { weight: Matrix, bias: Vec<f64> },
    TwoDCnn { kernel: Matrix },
    None,
}

impl MixerVariant {
    pub fn init(
        kind: MixerKind,
        lookback: usize,
        num_variables: usize,
        scheme: KernelInit,
        rng: &mut RngState,
    ) -> Result<Self> {
        kind.validate()?;
        let n = num_variables;
        Ok(match kind {
            MixerKind::CrossCnn => {
                MixerVariant::CrossCnn(init_kernels(lookback, n, scheme, rng)?)
            }
            MixerKind::OneCnn => {
                let bank = init_kernels(1, n, scheme, rng)?;
                MixerVariant::OneCnn {
                    kernel: bank.kernels.into_data(),
                }
            }
            MixerKind::CrossLinear => {
                let bound = 1.0 / (n as f64).sqrt();
                MixerVariant::CrossLinear {
                    weight: Matrix::from_fn(n, n, |_, _| rng.uniform_in(-bound, bound)),
                    bias: (0..n).map(|_| rng.uniform_in(-bound, bound)).collect(),
                }
            }
            MixerKind::TwoDCnn(k) => {
                let bound = 1.0 / k as f64;
                MixerVariant::TwoDCnn {
                    kernel: Matrix::from_fn(k, k, |_, _| rng.uniform_in(-bound, bound)),
                }
            }
            MixerKind::None => MixerVariant::None,
        })
    }

    /// Same shape, all zeros. Used for gradient accumulators.
    pub fn zeros_like(&self) -> Self {
        match self {
            MixerVariant::CrossCnn(p) => MixerVariant::CrossCnn(CrossCnnParams::new(Matrix::zeros(
                p.kernels.rows(),
                p.kernels.cols(),
            ))),
            MixerVariant::OneCnn { kernel } => MixerVariant::OneCnn {
                kernel: vec![0.0; kernel.len()],
            },
            MixerVariant::CrossLinear { weight, bias } => MixerVariant::CrossLinear {
                weight: Matrix::zeros(weight.rows(), weight.cols()),
                bias: vec![0.0; bias.len()],
            },
            MixerVariant::TwoDCnn { kernel } => MixerVariant::TwoDCnn {
                kernel: Matrix::zeros(kernel.rows(), kernel.cols()),
            },
            MixerVariant::None => MixerVariant::None,
        }
    }

    pub fn kind(&self) -> MixerKind {
        match self {
            MixerVariant::CrossCnn(_) => MixerKind::CrossCnn,
            MixerVariant::OneCnn { .. } => MixerKind::OneCnn,
            MixerVariant::CrossLinear { .. } => MixerKind::CrossLinear,
            MixerVariant::TwoDCnn { kernel } => MixerKind::TwoDCnn(kernel.rows()),
            MixerVariant::None => MixerKind::None,
        }
    }

    pub fn tensors(&self) -> Vec<&[f64]> {
        match self {
            MixerVariant::CrossCnn(p) => vec![p.kernels.data()],
            MixerVariant::OneCnn { kernel } => vec![kernel],
            MixerVariant::CrossLinear { weight, bias } => vec![weight.data(), bias],
            MixerVariant::TwoDCnn { kernel } => vec![kernel.data()],
            MixerVariant::None => vec![],
        }
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        match self {
            MixerVariant::CrossCnn(p) => vec![p.kernels.data_mut()],
            MixerVariant::OneCnn { kernel } => vec![kernel],
            MixerVariant::CrossLinear { weight, bias } => vec![weight.data_mut(), bias],
            MixerVariant::TwoDCnn { kernel } => vec![kernel.data_mut()],
            MixerVariant::None => vec![],
        }
    }

    pub fn param_count(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    fn check_input(&self, x: &Matrix) -> Result<()> {
        let (l, n) = x.shape();
        let ok = match self {
            MixerVariant::CrossCnn(p) => p.kernels.shape() == (l, n),
            MixerVariant::OneCnn { kernel } => kernel.len() == n,
            MixerVariant::CrossLinear { weight, bias } => {
                weight.shape() == (n, n) && bias.len() == n
            }
            MixerVariant::TwoDCnn { kernel } => {
                kernel.rows() == kernel.cols() && kernel.rows() % 2 == 1
            }
            MixerVariant::None => true,
        };
        if !ok || n == 0 {
            return Err(Error::shape(
                "mixer",
                format!("input {l}x{n} does not fit {} parameters", self.kind()),
            ));
        }
        Ok(())
    }

    /// Mixing term before dropout and skip.
    pub fn mix(&self, x: &Matrix) -> Result<Matrix> {
        self.check_input(x)?;
        let (l, n) = x.shape();
        Ok(match self {
            MixerVariant::CrossCnn(p) => {
                let mut out = Matrix::zeros(l, n);
                for i in 0..l {
                    let padded = circular_pad(x.row(i))?;
                    conv_padded(&padded, p.kernels.row(i), out.row_mut(i));
                }
                out
            }
            MixerVariant::OneCnn { kernel } => {
                let mut out = Matrix::zeros(l, n);
                for i in 0..l {
                    let padded = circular_pad(x.row(i))?;
                    conv_padded(&padded, kernel, out.row_mut(i));
                }
                out
            }
            MixerVariant::CrossLinear { weight, bias } => {
                let mut out = x.matmul_t(weight)?;
                out.add_row_vector(bias)?;
                mac::record((l * n * n) as u64);
                out
            }
            MixerVariant::TwoDCnn { kernel } => conv2d_same(x, kernel),
            MixerVariant::None => Matrix::zeros(l, n),
        })
    }
}

fn conv2d_same(x: &Matrix, kernel: &Matrix) -> Matrix {
    let (l, n) = x.shape();
    let k = kernel.rows();
    let r = (k / 2) as isize;
    let mut out = Matrix::zeros(l, n);
    let mut macs = 0u64;
    for t in 0..l {
        for j in 0..n {
            let mut s = 0.0;
            for a in 0..k {
                let ti = t as isize + a as isize - r;
                if ti < 0 || ti >= l as isize {
                    continue;
                }
                for b in 0..k {
                    let jj = j as isize + b as isize - r;
                    if jj < 0 || jj >= n as isize {
                        continue;
                    }
                    s += kernel.get(a, b) * x.get(ti as usize, jj as usize);
                    macs += 1;
                }
            }
            out.set(t, j, s);
        }
    }
    mac::record(macs);
    out
}

/// What [`mixer_backward`] needs from the forward pass.
#[derive(Debug, Clone)]
pub struct MixerCache {
    pub input: Matrix,
    pub mask: Matrix,
}

/// `out = dropout(mix(x)) + x`; `NoMixer` is the identity.
pub fn mixer_forward(
    x: &Matrix,
    params: &MixerVariant,
    dropout_p: f64,
    training: bool,
    rng: &mut RngState,
) -> Result<(Matrix, MixerCache)> {
    params.check_input(x)?;
    if let MixerVariant::None = params {
        if !(0.0..1.0).contains(&dropout_p) {
            return Err(Error::Config(format!(
                "dropout rate must be in [0, 1), got {dropout_p}"
            )));
        }
        let mask = Matrix::filled(x.rows(), x.cols(), 1.0);
        return Ok((
            x.clone(),
            MixerCache {
                input: x.clone(),
                mask,
            },
        ));
    }
    let mixed = params.mix(x)?;
    let (dropped, mask) = dropout(&mixed, dropout_p, training, rng)?;
    let out = dropped.add(x)?;
    Ok((
        out,
        MixerCache {
            input: x.clone(),
            mask,
        },
    ))
}

/// Gradients of [`mixer_forward`]: input gradient (skip path included) and
/// parameter gradients shaped like `params`.
pub fn mixer_backward(
    params: &MixerVariant,
    cache: &MixerCache,
    upstream: &Matrix,
) -> Result<(Matrix, MixerVariant)> {
    let x = &cache.input;
    x.ensure_same_shape(upstream, "mixer backward")?;
    params.check_input(x)?;
    let (l, n) = x.shape();
    let mut dx = upstream.clone();
    let mut grads = params.zeros_like();
    if let MixerVariant::None = params {
        return Ok((dx, grads));
    }
    let gc = upstream.hadamard(&cache.mask)?;
    match (params, &mut grads) {
        (MixerVariant::CrossCnn(p), MixerVariant::CrossCnn(g)) => {
            for i in 0..l {
                let padded = circular_pad(x.row(i))?;
                let mut dxi = vec![0.0; n];
                conv_padded_backward(
                    &padded,
                    p.kernels.row(i),
                    gc.row(i),
                    g.kernels.row_mut(i),
                    &mut dxi,
                );
                for (d, v) in dx.row_mut(i).iter_mut().zip(dxi) {
                    *d += v;
                }
            }
        }
        (MixerVariant::OneCnn { kernel }, MixerVariant::OneCnn { kernel: gk }) => {
            for i in 0..l {
                let padded = circular_pad(x.row(i))?;
                let mut dxi = vec![0.0; n];
                conv_padded_backward(&padded, kernel, gc.row(i), gk, &mut dxi);
                for (d, v) in dx.row_mut(i).iter_mut().zip(dxi) {
                    *d += v;
                }
            }
        }
        (
            MixerVariant::CrossLinear { weight, .. },
            MixerVariant::CrossLinear {
                weight: gw,
                bias: gb,
            },
        ) => {
            *gw = gc.t_matmul(x)?;
            *gb = gc.column_sums();
            dx.add_assign(&gc.matmul(weight)?)?;
        }
        (MixerVariant::TwoDCnn { kernel }, MixerVariant::TwoDCnn { kernel: gk }) => {
            let k = kernel.rows();
            let r = (k / 2) as isize;
            for t in 0..l {
                for j in 0..n {
                    let g = gc.get(t, j);
                    if g == 0.0 {
                        continue;
                    }
                    for a in 0..k {
                        let ti = t as isize + a as isize - r;
                        if ti < 0 || ti >= l as isize {
                            continue;
                        }
                        for b in 0..k {
                            let jj = j as isize + b as isize - r;
                            if jj < 0 || jj >= n as isize {
                                continue;
                            }
                            let (ti, jj) = (ti as usize, jj as usize);
                            let idx = a * k + b;
                            gk.data_mut()[idx] += g * x.get(ti, jj);
                            let cur = dx.get(ti, jj);
                            dx.set(ti, jj, cur + g * kernel.get(a, b));
                        }
                    }
                }
            }
        }
        _ => unreachable!("gradient buffer built by zeros_like"),
    }
    Ok((dx, grads))
}
