//! Shifted patch tokenization and locality self-attention (forward only).
//!
//! Tokenization concatenates the image with four copies shifted diagonally
//! by half a patch (vacated pixels are zero), cuts the `5·C` channel stack
//! into non-overlapping `p × p` patches and projects each flattened patch.
//!
//! Locality self-attention is single-head scaled attention with two
//! changes: the logits are divided by a learnable temperature `τ` instead of
//! the fixed `√d_k`, and each token's logit against itself is replaced by
//! [`MASK_VALUE`] so a token attends only to the others.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Logit written on the attention diagonal.
pub const MASK_VALUE: f64 = -1e9;

/// Row-major `height × width × channels` image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageTensor {
    pub height: usize,
    pub width: usize,
    pub channels: usize,
    pub data: Vec<f64>,
}

impl ImageTensor {
    pub fn new(height: usize, width: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 || channels == 0 {
            return Err(Error::Geometry("image dimensions must be positive".into()));
        }
        if data.len() != height * width * channels {
            return Err(Error::Dimension {
                context: "image data",
                expected: height * width * channels,
                actual: data.len(),
            });
        }
        Ok(Self {
            height,
            width,
            channels,
            data,
        })
    }

    pub fn get(&self, y: usize, x: usize, c: usize) -> f64 {
        self.data[(y * self.width + x) * self.channels + c]
    }

    /// Moves the content by `(dy, dx)` pixels; uncovered pixels become zero.
    pub fn shifted(&self, dy: isize, dx: isize) -> ImageTensor {
        let mut out = vec![0.0; self.data.len()];
        for y in 0..self.height {
            let sy = y as isize - dy;
            if sy < 0 || sy >= self.height as isize {
                continue;
            }
            for x in 0..self.width {
                let sx = x as isize - dx;
                if sx < 0 || sx >= self.width as isize {
                    continue;
                }
                let src = (sy as usize * self.width + sx as usize) * self.channels;
                let dst = (y * self.width + x) * self.channels;
                out[dst..dst + self.channels].copy_from_slice(&self.data[src..src + self.channels]);
            }
        }
        ImageTensor {
            data: out,
            ..*self
        }
    }

    /// Stacks images with equal height and width along the channel axis.
    pub fn concat_channels(images: &[ImageTensor]) -> Result<ImageTensor> {
        let first = images.first().ok_or(Error::Empty("image list"))?;
        if images
            .iter()
            .any(|i| i.height != first.height || i.width != first.width)
        {
            return Err(Error::Geometry("images differ in size".into()));
        }
        let channels: usize = images.iter().map(|i| i.channels).sum();
        let mut data = Vec::with_capacity(first.height * first.width * channels);
        for p in 0..first.height * first.width {
            for img in images {
                data.extend_from_slice(&img.data[p * img.channels..(p + 1) * img.channels]);
            }
        }
        ImageTensor::new(first.height, first.width, channels, data)
    }
}

/// `num_tokens × dim`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenMatrix {
    pub num_tokens: usize,
    pub dim: usize,
    pub data: Vec<f64>,
}

impl TokenMatrix {
    pub fn new(num_tokens: usize, dim: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != num_tokens * dim {
            return Err(Error::Dimension {
                context: "token data",
                expected: num_tokens * dim,
                actual: data.len(),
            });
        }
        Ok(Self {
            num_tokens,
            dim,
            data,
        })
    }

    pub fn token(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn random(num_tokens: usize, dim: usize, rng: &mut impl Rng) -> Self {
        Self {
            num_tokens,
            dim,
            data: (0..num_tokens * dim).map(|_| rng.random_range(-1.0..1.0)).collect(),
        }
    }
}

/// Affine map `x W + b` with `W` stored row-major as `in_dim × out_dim`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearMap {
    pub in_dim: usize,
    pub out_dim: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl LinearMap {
    pub fn new(in_dim: usize, out_dim: usize, weights: Vec<f64>, bias: Vec<f64>) -> Result<Self> {
        if weights.len() != in_dim * out_dim || bias.len() != out_dim {
            return Err(Error::Dimension {
                context: "linear map",
                expected: in_dim * out_dim,
                actual: weights.len(),
            });
        }
        Ok(Self {
            in_dim,
            out_dim,
            weights,
            bias,
        })
    }

    pub fn identity(dim: usize) -> Self {
        let mut weights = vec![0.0; dim * dim];
        for i in 0..dim {
            weights[i * dim + i] = 1.0;
        }
        Self {
            in_dim: dim,
            out_dim: dim,
            weights,
            bias: vec![0.0; dim],
        }
    }

    /// Uniform weights in `±1/√in_dim`, zero bias.
    pub fn random(in_dim: usize, out_dim: usize, rng: &mut impl Rng) -> Self {
        let limit = 1.0 / (in_dim as f64).sqrt();
        Self {
            in_dim,
            out_dim,
            weights: (0..in_dim * out_dim)
                .map(|_| rng.random_range(-limit..limit))
                .collect(),
            bias: vec![0.0; out_dim],
        }
    }

    pub fn apply(&self, x: &TokenMatrix) -> Result<TokenMatrix> {
        if x.dim != self.in_dim {
            return Err(Error::Dimension {
                context: "projection input",
                expected: self.in_dim,
                actual: x.dim,
            });
        }
        let mut out = Vec::with_capacity(x.num_tokens * self.out_dim);
        for t in 0..x.num_tokens {
            let row = x.token(t);
            for j in 0..self.out_dim {
                let mut acc = self.bias[j];
                for (i, v) in row.iter().enumerate() {
                    acc += v * self.weights[i * self.out_dim + j];
                }
                out.push(acc);
            }
        }
        TokenMatrix::new(x.num_tokens, self.out_dim, out)
    }
}

fn check_patch(img: &ImageTensor, patch: usize) -> Result<()> {
    if patch == 0 || !patch.is_multiple_of(2) {
        return Err(Error::Geometry(format!("patch size {patch} must be positive and even")));
    }
    if !img.height.is_multiple_of(patch) || !img.width.is_multiple_of(patch) {
        return Err(Error::Geometry(format!(
            "patch size {patch} does not divide {}×{}",
            img.height, img.width
        )));
    }
    Ok(())
}

/// The original image followed by its four half-patch diagonal shifts:
/// up-left, up-right, down-left, down-right.
pub fn spt_stack(img: &ImageTensor, patch: usize) -> Result<ImageTensor> {
    check_patch(img, patch)?;
    let s = (patch / 2) as isize;
    ImageTensor::concat_channels(&[
        img.clone(),
        img.shifted(-s, -s),
        img.shifted(-s, s),
        img.shifted(s, -s),
        img.shifted(s, s),
    ])
}

/// Flattened patches of the shifted stack before projection. Each token
/// lists its pixels row by row with all channels of a pixel adjacent, so the
/// raw dimension is `5 · C · p²`.
pub fn spt_raw_tokens(img: &ImageTensor, patch: usize) -> Result<TokenMatrix> {
    let stack = spt_stack(img, patch)?;
    let (rows, cols) = (img.height / patch, img.width / patch);
    let dim = stack.channels * patch * patch;
    let mut data = Vec::with_capacity(rows * cols * dim);
    for pr in 0..rows {
        for pc in 0..cols {
            for y in pr * patch..(pr + 1) * patch {
                let start = (y * stack.width + pc * patch) * stack.channels;
                data.extend_from_slice(&stack.data[start..start + patch * stack.channels]);
            }
        }
    }
    TokenMatrix::new(rows * cols, dim, data)
}

/// Shifted patch tokenization followed by the linear projection.
pub fn spt_tokenize(img: &ImageTensor, patch: usize, proj: &LinearMap) -> Result<TokenMatrix> {
    proj.apply(&spt_raw_tokens(img, patch)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LsaParams {
    pub query: LinearMap,
    pub key: LinearMap,
    pub value: LinearMap,
    pub temperature: f64,
    pub mask_diagonal: bool,
}

impl LsaParams {
    /// Random projections with `τ = √d_k` and the diagonal mask enabled.
    pub fn random(dim: usize, key_dim: usize, value_dim: usize, rng: &mut impl Rng) -> Self {
        Self {
            query: LinearMap::random(dim, key_dim, rng),
            key: LinearMap::random(dim, key_dim, rng),
            value: LinearMap::random(dim, value_dim, rng),
            temperature: (key_dim as f64).sqrt(),
            mask_diagonal: true,
        }
    }

    pub fn with_temperature(mut self, temperature: f64) -> Self {
        self.temperature = temperature;
        self
    }
}

/// Attention weights (`n × n`, row-major) and the attended values.
#[derive(Debug, Clone, PartialEq)]
pub struct LsaOutput {
    pub attention: Vec<f64>,
    pub output: TokenMatrix,
}

/// In-place numerically stable softmax of one row.
pub fn softmax_row(row: &mut [f64]) {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in row.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in row.iter_mut() {
        *v /= sum;
    }
}

pub fn lsa_attention(x: &TokenMatrix, params: &LsaParams) -> Result<LsaOutput> {
    if !(params.temperature > 0.0 && params.temperature.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "temperature",
            reason: format!("{} must be positive and finite", params.temperature),
        });
    }
    let n = x.num_tokens;
    if params.mask_diagonal && n < 2 {
        return Err(Error::InvalidParameter {
            name: "tokens",
            reason: "diagonal masking needs at least two tokens".into(),
        });
    }
    if n == 0 {
        return Err(Error::Empty("token matrix"));
    }
    if params.query.out_dim != params.key.out_dim {
        return Err(Error::Dimension {
            context: "query/key width",
            expected: params.query.out_dim,
            actual: params.key.out_dim,
        });
    }
    let q = params.query.apply(x)?;
    let k = params.key.apply(x)?;
    let v = params.value.apply(x)?;

    let mut attention = vec![0.0; n * n];
    for i in 0..n {
        let row = &mut attention[i * n..(i + 1) * n];
        for (j, slot) in row.iter_mut().enumerate() {
            let dot: f64 = q.token(i).iter().zip(k.token(j)).map(|(a, b)| a * b).sum();
            *slot = dot / params.temperature;
        }
        if params.mask_diagonal {
            row[i] = MASK_VALUE;
        }
        softmax_row(row);
    }

    let mut out = vec![0.0; n * v.dim];
    for i in 0..n {
        for j in 0..n {
            let w = attention[i * n + j];
            for (o, val) in out[i * v.dim..(i + 1) * v.dim].iter_mut().zip(v.token(j)) {
                *o += w * val;
            }
        }
    }
    Ok(LsaOutput {
        attention,
        output: TokenMatrix::new(n, v.dim, out)?,
    })
}

/// `softmax(M(q kᵀ) / τ) v`.
pub fn lsa_forward(x: &TokenMatrix, params: &LsaParams) -> Result<TokenMatrix> {
    Ok(lsa_attention(x, params)?.output)
}

/// Mean Shannon entropy (nats) of the rows of an `n × n` attention map.
pub fn mean_row_entropy(attention: &[f64], n: usize) -> f64 {
    let total: f64 = attention
        .chunks(n)
        .map(|row| {
            row.iter()
                .filter(|&&p| p > 0.0)
                .map(|&p| -p * p.ln())
                .sum::<f64>()
        })
        .sum();
    total / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn token_count_and_width() {
        let img = ImageTensor::new(32, 32, 1, vec![0.5; 1024]).unwrap();
        let raw = spt_raw_tokens(&img, 8).unwrap();
        assert_eq!(raw.num_tokens, 16);
        assert_eq!(raw.dim, 320);
    }

    #[test]
    fn zero_image_projects_to_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let img = ImageTensor::new(16, 16, 2, vec![0.0; 512]).unwrap();
        let proj = LinearMap::random(5 * 2 * 16, 6, &mut rng);
        let t = spt_tokenize(&img, 4, &proj).unwrap();
        assert!(t.data.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn bad_patch_sizes() {
        let img = ImageTensor::new(12, 12, 1, vec![0.0; 144]).unwrap();
        assert!(spt_raw_tokens(&img, 3).is_err());
        assert!(spt_raw_tokens(&img, 8).is_err());
        assert!(spt_raw_tokens(&img, 0).is_err());
        assert!(spt_raw_tokens(&img, 4).is_ok());
    }

    #[test]
    fn two_identical_tokens_attend_to_each_other() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = TokenMatrix::new(2, 3, vec![0.2, -0.1, 0.7, 0.2, -0.1, 0.7]).unwrap();
        let p = LsaParams::random(3, 4, 3, &mut rng);
        let out = lsa_attention(&x, &p).unwrap();
        assert_eq!(out.attention, vec![0.0, 1.0, 1.0, 0.0]);
        let v = p.value.apply(&x).unwrap();
        assert_eq!(out.output.token(0), v.token(1));
    }

    #[test]
    fn single_token_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = TokenMatrix::random(1, 4, &mut rng);
        let p = LsaParams::random(4, 4, 4, &mut rng);
        assert!(lsa_forward(&x, &p).is_err());
        assert!(lsa_forward(&x, &p.clone().with_temperature(0.0)).is_err());
    }

    #[test]
    fn huge_temperature_is_uniform_off_diagonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = TokenMatrix::random(6, 5, &mut rng);
        let p = LsaParams::random(5, 4, 5, &mut rng).with_temperature(1e6);
        let out = lsa_attention(&x, &p).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                let expected = if i == j { 0.0 } else { 0.2 };
                assert!((out.attention[i * 6 + j] - expected).abs() < 1e-5);
            }
        }
    }
}
