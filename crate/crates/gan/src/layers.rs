//! Layers with explicit forward and backward passes.
//!
//! `forward` caches whatever `backward` needs; `backward` accumulates
//! parameter gradients and returns the input gradient. `infer` is the
//! read-only evaluation path (running batch-norm statistics, no dropout).

use crate::tensor::{col2im, im2col, matmul, ConvGeometry, Scalar, Tensor};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    Trainable,
    /// Saved with the model but never touched by the optimizer.
    Buffer,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Param<T> {
    pub value: Vec<T>,
    pub grad: Vec<T>,
    pub shape: Vec<usize>,
}

impl<T: Scalar> Param<T> {
    pub fn filled(shape: &[usize], v: T) -> Self {
        let n = shape.iter().product();
        Param {
            value: vec![v; n],
            grad: vec![T::zero(); n],
            shape: shape.to_vec(),
        }
    }

    pub fn normal(shape: &[usize], mean: f64, std: f64, rng: &mut ChaCha8Rng) -> Self {
        let dist = Normal::new(mean, std).expect("valid normal");
        let mut p = Param::filled(shape, T::zero());
        p.value
            .iter_mut()
            .for_each(|v| *v = T::from_f64_lossy(dist.sample(rng)));
        p
    }

    pub fn len(&self) -> usize {
        self.value.len()
    }

    pub fn is_empty(&self) -> bool {
        self.value.is_empty()
    }

    pub fn zero_grad(&mut self) {
        self.grad.iter_mut().for_each(|g| *g = T::zero());
    }
}

pub type Visitor<'a, T> = dyn FnMut(&str, &mut Param<T>, Role) + 'a;

/// Per-call state of a training-time forward pass.
pub struct Pass<'a> {
    pub train: bool,
    pub rng: &'a mut ChaCha8Rng,
}

const INIT_STD: f64 = 0.02;

#[derive(Clone, Debug)]
pub struct Conv2d<T> {
    pub in_ch: usize,
    pub out_ch: usize,
    pub kernel: usize,
    pub stride: usize,
    pub pad: usize,
    /// `[out, in·k·k]`
    pub weight: Param<T>,
    pub bias: Option<Param<T>>,
    cache: Option<(Vec<T>, ConvGeometry)>,
}

impl<T: Scalar> Conv2d<T> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        in_ch: usize,
        out_ch: usize,
        kernel: usize,
        stride: usize,
        pad: usize,
        bias: bool,
        rng: &mut ChaCha8Rng,
    ) -> Self {
        Conv2d {
            in_ch,
            out_ch,
            kernel,
            stride,
            pad,
            weight: Param::normal(&[out_ch, in_ch * kernel * kernel], 0.0, INIT_STD, rng),
            bias: bias.then(|| Param::filled(&[out_ch], T::zero())),
            cache: None,
        }
    }

    pub fn output_hw(&self, h: usize, w: usize) -> (usize, usize) {
        let o = |i: usize| (i + 2 * self.pad - self.kernel) / self.stride + 1;
        (o(h), o(w))
    }

    fn geometry(&self, x: &Tensor<T>) -> ConvGeometry {
        assert_eq!(x.channels(), self.in_ch, "conv input channels");
        let (ho, wo) = self.output_hw(x.height(), x.width());
        ConvGeometry {
            channels: self.in_ch,
            batch: x.batch(),
            h: x.height(),
            w: x.width(),
            kernel: self.kernel,
            stride: self.stride,
            pad: self.pad,
            ho,
            wo,
        }
    }

    fn apply(&self, cols: &[T], g: &ConvGeometry) -> Tensor<T> {
        let m = g.cols_len();
        let mut y = Tensor::zeros([self.out_ch, g.batch, g.ho, g.wo]);
        matmul(self.out_ch, g.cols_rows(), m, &self.weight.value, false, cols, false, &mut y.data, false);
        if let Some(b) = &self.bias {
            for (row, &bv) in y.data.chunks_mut(m).zip(&b.value) {
                row.iter_mut().for_each(|v| *v = *v + bv);
            }
        }
        y
    }

    pub fn forward(&mut self, x: &Tensor<T>) -> Tensor<T> {
        let g = self.geometry(x);
        let cols = im2col(&x.data, &g);
        let y = self.apply(&cols, &g);
        self.cache = Some((cols, g));
        y
    }

    pub fn infer(&self, x: &Tensor<T>) -> Tensor<T> {
        let g = self.geometry(x);
        self.apply(&im2col(&x.data, &g), &g)
    }

    pub fn backward(&mut self, dy: &Tensor<T>) -> Tensor<T> {
        let (cols, g) = self.cache.take().expect("conv backward without forward");
        let m = g.cols_len();
        let k = g.cols_rows();
        matmul(self.out_ch, m, k, &dy.data, false, &cols, true, &mut self.weight.grad, true);
        if let Some(b) = &mut self.bias {
            for (gb, row) in b.grad.iter_mut().zip(dy.data.chunks(m)) {
                *gb = *gb + row.iter().copied().sum();
            }
        }
        let mut dcols = cols;
        matmul(k, self.out_ch, m, &self.weight.value, true, &dy.data, false, &mut dcols, false);
        Tensor::from_vec(col2im(&dcols, &g), [self.in_ch, g.batch, g.h, g.w])
    }

    pub fn visit(&mut self, prefix: &str, f: &mut Visitor<'_, T>) {
        f(&format!("{prefix}.weight"), &mut self.weight, Role::Trainable);
        if let Some(b) = &mut self.bias {
            f(&format!("{prefix}.bias"), b, Role::Trainable);
        }
    }
}

/// Fractionally strided convolution; output side is
/// `(i − 1)·stride − 2·pad + kernel + output_pad`.
#[derive(Clone, Debug)]
pub struct ConvTranspose2d<T> {
    pub in_ch: usize,
    pub out_ch: usize,
    pub kernel: usize,
    pub stride: usize,
    pub pad: usize,
    pub output_pad: usize,
    /// `[in, out·k·k]`
    pub weight: Param<T>,
    pub bias: Option<Param<T>>,
    cache: Option<(Tensor<T>, ConvGeometry)>,
}

impl<T: Scalar> ConvTranspose2d<T> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        in_ch: usize,
        out_ch: usize,
        kernel: usize,
        stride: usize,
        pad: usize,
        output_pad: usize,
        bias: bool,
        rng: &mut ChaCha8Rng,
    ) -> Self {
        ConvTranspose2d {
            in_ch,
            out_ch,
            kernel,
            stride,
            pad,
            output_pad,
            weight: Param::normal(&[in_ch, out_ch * kernel * kernel], 0.0, INIT_STD, rng),
            bias: bias.then(|| Param::filled(&[out_ch], T::zero())),
            cache: None,
        }
    }

    pub fn output_hw(&self, h: usize, w: usize) -> (usize, usize) {
        let o = |i: usize| (i - 1) * self.stride + self.kernel + self.output_pad - 2 * self.pad;
        (o(h), o(w))
    }

    /// The equivalent forward convolution runs from the output grid back to
    /// the input grid.
    fn geometry(&self, x: &Tensor<T>) -> ConvGeometry {
        assert_eq!(x.channels(), self.in_ch, "transposed conv input channels");
        let (h, w) = self.output_hw(x.height(), x.width());
        ConvGeometry {
            channels: self.out_ch,
            batch: x.batch(),
            h,
            w,
            kernel: self.kernel,
            stride: self.stride,
            pad: self.pad,
            ho: x.height(),
            wo: x.width(),
        }
    }

    fn apply(&self, x: &Tensor<T>, g: &ConvGeometry) -> Tensor<T> {
        let m = g.cols_len();
        let mut cols = vec![T::zero(); g.cols_rows() * m];
        matmul(g.cols_rows(), self.in_ch, m, &self.weight.value, true, &x.data, false, &mut cols, false);
        let mut y = Tensor::from_vec(col2im(&cols, g), [self.out_ch, g.batch, g.h, g.w]);
        if let Some(b) = &self.bias {
            let row = y.row_len();
            for (r, &bv) in y.data.chunks_mut(row).zip(&b.value) {
                r.iter_mut().for_each(|v| *v = *v + bv);
            }
        }
        y
    }

    pub fn forward(&mut self, x: &Tensor<T>) -> Tensor<T> {
        let g = self.geometry(x);
        let y = self.apply(x, &g);
        self.cache = Some((x.clone(), g));
        y
    }

    pub fn infer(&self, x: &Tensor<T>) -> Tensor<T> {
        self.apply(x, &self.geometry(x))
    }

    pub fn backward(&mut self, dy: &Tensor<T>) -> Tensor<T> {
        let (x, g) = self.cache.take().expect("transposed conv backward without forward");
        let m = g.cols_len();
        let k = g.cols_rows();
        let dcols = im2col(&dy.data, &g);
        matmul(self.in_ch, m, k, &x.data, false, &dcols, true, &mut self.weight.grad, true);
        if let Some(b) = &mut self.bias {
            let row = dy.row_len();
            for (gb, r) in b.grad.iter_mut().zip(dy.data.chunks(row)) {
                *gb = *gb + r.iter().copied().sum();
            }
        }
        let mut dx = Tensor::zeros(x.shape);
        matmul(self.in_ch, k, m, &self.weight.value, false, &dcols, false, &mut dx.data, false);
        dx
    }

    pub fn visit(&mut self, prefix: &str, f: &mut Visitor<'_, T>) {
        f(&format!("{prefix}.weight"), &mut self.weight, Role::Trainable);
        if let Some(b) = &mut self.bias {
            f(&format!("{prefix}.bias"), b, Role::Trainable);
        }
    }
}

#[derive(Clone, Debug)]
pub struct BatchNorm2d<T> {
    pub gamma: Param<T>,
    pub beta: Param<T>,
    pub running_mean: Param<T>,
    pub running_var: Param<T>,
    pub momentum: f64,
    pub eps: f64,
    /// `(x̂, 1/σ)` from batch statistics, or just `1/σ` of running stats.
    cache: Option<(Option<Tensor<T>>, Vec<T>)>,
}

impl<T: Scalar> BatchNorm2d<T> {
    pub fn new(channels: usize, rng: &mut ChaCha8Rng) -> Self {
        BatchNorm2d {
            gamma: Param::normal(&[channels], 1.0, INIT_STD, rng),
            beta: Param::filled(&[channels], T::zero()),
            running_mean: Param::filled(&[channels], T::zero()),
            running_var: Param::filled(&[channels], T::one()),
            momentum: 0.1,
            eps: 1e-5,
            cache: None,
        }
    }

    fn eps(&self) -> T {
        T::from_f64_lossy(self.eps)
    }

    pub fn forward(&mut self, x: &Tensor<T>, train: bool) -> Tensor<T> {
        if !train {
            let inv: Vec<T> = self
                .running_var
                .value
                .iter()
                .map(|&v| T::one() / (v + self.eps()).sqrt())
                .collect();
            let y = self.infer(x);
            self.cache = Some((None, inv));
            return y;
        }
        let m = x.row_len();
        let mf = T::from_usize(m).unwrap();
        let mut xhat = Tensor::zeros(x.shape);
        let mut y = Tensor::zeros(x.shape);
        let mut inv_std = Vec::with_capacity(x.channels());
        let mom = T::from_f64_lossy(self.momentum);
        for c in 0..x.channels() {
            let row = &x.data[c * m..(c + 1) * m];
            let mean = row.iter().copied().sum::<T>() / mf;
            let var = row.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>() / mf;
            let inv = T::one() / (var + self.eps()).sqrt();
            let (g, b) = (self.gamma.value[c], self.beta.value[c]);
            for ((h, o), &v) in xhat.data[c * m..(c + 1) * m]
                .iter_mut()
                .zip(&mut y.data[c * m..(c + 1) * m])
                .zip(row)
            {
                *h = (v - mean) * inv;
                *o = g * *h + b;
            }
            inv_std.push(inv);
            let unbiased = if m > 1 {
                var * mf / T::from_usize(m - 1).unwrap()
            } else {
                var
            };
            let rm = &mut self.running_mean.value[c];
            *rm = (T::one() - mom) * *rm + mom * mean;
            let rv = &mut self.running_var.value[c];
            *rv = (T::one() - mom) * *rv + mom * unbiased;
        }
        self.cache = Some((Some(xhat), inv_std));
        y
    }

    pub fn infer(&self, x: &Tensor<T>) -> Tensor<T> {
        let m = x.row_len();
        let mut y = x.clone();
        for c in 0..x.channels() {
            let inv = T::one() / (self.running_var.value[c] + self.eps()).sqrt();
            let (g, b, mu) = (self.gamma.value[c], self.beta.value[c], self.running_mean.value[c]);
            y.data[c * m..(c + 1) * m]
                .iter_mut()
                .for_each(|v| *v = g * (*v - mu) * inv + b);
        }
        y
    }

    pub fn backward(&mut self, dy: &Tensor<T>) -> Tensor<T> {
        let (xhat, inv_std) = self.cache.take().expect("batch norm backward without forward");
        let m = dy.row_len();
        let mf = T::from_usize(m).unwrap();
        let mut dx = Tensor::zeros(dy.shape);
        for c in 0..dy.channels() {
            let d = &dy.data[c * m..(c + 1) * m];
            let g = self.gamma.value[c];
            let out = &mut dx.data[c * m..(c + 1) * m];
            match &xhat {
                Some(xhat) => {
                    let h = &xhat.data[c * m..(c + 1) * m];
                    let sum_d: T = d.iter().copied().sum();
                    let sum_dh: T = d.iter().zip(h).map(|(&a, &b)| a * b).sum();
                    self.beta.grad[c] = self.beta.grad[c] + sum_d;
                    self.gamma.grad[c] = self.gamma.grad[c] + sum_dh;
                    let k = g * inv_std[c] / mf;
                    for ((o, &dv), &hv) in out.iter_mut().zip(d).zip(h) {
                        *o = k * (mf * dv - sum_d - hv * sum_dh);
                    }
                }
                None => {
                    // Fixed statistics: the layer is affine in x.
                    let k = g * inv_std[c];
                    for (o, &dv) in out.iter_mut().zip(d) {
                        *o = k * dv;
                    }
                }
            }
        }
        dx
    }

    pub fn visit(&mut self, prefix: &str, f: &mut Visitor<'_, T>) {
        f(&format!("{prefix}.gamma"), &mut self.gamma, Role::Trainable);
        f(&format!("{prefix}.beta"), &mut self.beta, Role::Trainable);
        f(&format!("{prefix}.running_mean"), &mut self.running_mean, Role::Buffer);
        f(&format!("{prefix}.running_var"), &mut self.running_var, Role::Buffer);
    }
}

/// Element-wise activations. `LeakyRelu` carries its negative slope.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Activation {
    Relu,
    LeakyRelu(f64),
    Tanh,
    Sigmoid,
}

impl Activation {
    fn apply<T: Scalar>(self, v: T) -> T {
        match self {
            Activation::Relu => v.max(T::zero()),
            Activation::LeakyRelu(s) => {
                if v > T::zero() {
                    v
                } else {
                    v * T::from_f64_lossy(s)
                }
            }
            Activation::Tanh => v.tanh(),
            Activation::Sigmoid => {
                if v >= T::zero() {
                    T::one() / (T::one() + (-v).exp())
                } else {
                    let e = v.exp();
                    e / (T::one() + e)
                }
            }
        }
    }

    /// Derivative expressed through the input `x` and output `y`.
    fn derivative<T: Scalar>(self, x: T, y: T) -> T {
        match self {
            Activation::Relu => {
                if x > T::zero() {
                    T::one()
                } else {
                    T::zero()
                }
            }
            Activation::LeakyRelu(s) => {
                if x > T::zero() {
                    T::one()
                } else {
                    T::from_f64_lossy(s)
                }
            }
            Activation::Tanh => T::one() - y * y,
            Activation::Sigmoid => y * (T::one() - y),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ActivationLayer<T> {
    pub kind: Activation,
    cache: Option<(Tensor<T>, Tensor<T>)>,
}

impl<T: Scalar> ActivationLayer<T> {
    pub fn new(kind: Activation) -> Self {
        ActivationLayer { kind, cache: None }
    }

    pub fn infer(&self, x: &Tensor<T>) -> Tensor<T> {
        x.map(|v| self.kind.apply(v))
    }

    pub fn forward(&mut self, x: &Tensor<T>) -> Tensor<T> {
        let y = self.infer(x);
        self.cache = Some((x.clone(), y.clone()));
        y
    }

    pub fn backward(&mut self, dy: &Tensor<T>) -> Tensor<T> {
        let (x, y) = self.cache.take().expect("activation backward without forward");
        let data = dy
            .data
            .iter()
            .zip(x.data.iter().zip(&y.data))
            .map(|(&d, (&xv, &yv))| d * self.kind.derivative(xv, yv))
            .collect();
        Tensor::from_vec(data, dy.shape)
    }
}

/// Inverted dropout: kept units are scaled by `1 / (1 − rate)` at train time.
#[derive(Clone, Debug)]
pub struct Dropout<T> {
    pub rate: f64,
    mask: Option<Vec<T>>,
}

impl<T: Scalar> Dropout<T> {
    pub fn new(rate: f64) -> Self {
        Dropout { rate, mask: None }
    }

    pub fn forward(&mut self, x: &Tensor<T>, pass: &mut Pass<'_>) -> Tensor<T> {
        if !pass.train || self.rate == 0.0 {
            self.mask = None;
            return x.clone();
        }
        let keep = T::from_f64_lossy(1.0 / (1.0 - self.rate));
        let mask: Vec<T> = (0..x.len())
            .map(|_| {
                if pass.rng.random::<f64>() < self.rate {
                    T::zero()
                } else {
                    keep
                }
            })
            .collect();
        let data = x.data.iter().zip(&mask).map(|(&v, &k)| v * k).collect();
        self.mask = Some(mask);
        Tensor::from_vec(data, x.shape)
    }

    pub fn backward(&mut self, dy: &Tensor<T>) -> Tensor<T> {
        match self.mask.take() {
            Some(mask) => {
                Tensor::from_vec(dy.data.iter().zip(&mask).map(|(&d, &k)| d * k).collect(), dy.shape)
            }
            None => dy.clone(),
        }
    }
}

/// Fully connected layer over each sample's flattened `C·H·W` features.
/// Output shape is `[out, N, 1, 1]`.
#[derive(Clone, Debug)]
pub struct Linear<T> {
    pub in_features: usize,
    pub out_features: usize,
    /// `[out, in]`
    pub weight: Param<T>,
    pub bias: Param<T>,
    cache: Option<(Vec<T>, [usize; 4])>,
}

impl<T: Scalar> Linear<T> {
    pub fn new(in_features: usize, out_features: usize, rng: &mut ChaCha8Rng) -> Self {
        Linear {
            in_features,
            out_features,
            weight: Param::normal(&[out_features, in_features], 0.0, INIT_STD, rng),
            bias: Param::filled(&[out_features], T::zero()),
            cache: None,
        }
    }

    /// `[C, N, H, W]` → `[C·H·W, N]`
    fn gather(x: &Tensor<T>) -> Vec<T> {
        let [c, n, h, w] = x.shape;
        let plane = h * w;
        let mut out = vec![T::zero(); c * plane * n];
        for ch in 0..c {
            for b in 0..n {
                for p in 0..plane {
                    out[(ch * plane + p) * n + b] = x.data[(ch * n + b) * plane + p];
                }
            }
        }
        out
    }

    fn scatter(cols: &[T], shape: [usize; 4]) -> Tensor<T> {
        let [c, n, h, w] = shape;
        let plane = h * w;
        let mut x = Tensor::zeros(shape);
        for ch in 0..c {
            for b in 0..n {
                for p in 0..plane {
                    x.data[(ch * n + b) * plane + p] = cols[(ch * plane + p) * n + b];
                }
            }
        }
        x
    }

    fn apply(&self, feats: &[T], n: usize) -> Tensor<T> {
        let mut y = Tensor::zeros([self.out_features, n, 1, 1]);
        matmul(self.out_features, self.in_features, n, &self.weight.value, false, feats, false, &mut y.data, false);
        for (row, &b) in y.data.chunks_mut(n).zip(&self.bias.value) {
            row.iter_mut().for_each(|v| *v = *v + b);
        }
        y
    }

    fn check(&self, x: &Tensor<T>) {
        assert_eq!(
            x.channels() * x.height() * x.width(),
            self.in_features,
            "linear input features"
        );
    }

    pub fn forward(&mut self, x: &Tensor<T>) -> Tensor<T> {
        self.check(x);
        let feats = Self::gather(x);
        let y = self.apply(&feats, x.batch());
        self.cache = Some((feats, x.shape));
        y
    }

    pub fn infer(&self, x: &Tensor<T>) -> Tensor<T> {
        self.check(x);
        self.apply(&Self::gather(x), x.batch())
    }

    pub fn backward(&mut self, dy: &Tensor<T>) -> Tensor<T> {
        let (feats, shape) = self.cache.take().expect("linear backward without forward");
        let n = shape[1];
        matmul(self.out_features, n, self.in_features, &dy.data, false, &feats, true, &mut self.weight.grad, true);
        for (gb, row) in self.bias.grad.iter_mut().zip(dy.data.chunks(n)) {
            *gb = *gb + row.iter().copied().sum();
        }
        let mut dfeats = vec![T::zero(); self.in_features * n];
        matmul(self.in_features, self.out_features, n, &self.weight.value, true, &dy.data, false, &mut dfeats, false);
        Self::scatter(&dfeats, shape)
    }

    pub fn visit(&mut self, prefix: &str, f: &mut Visitor<'_, T>) {
        f(&format!("{prefix}.weight"), &mut self.weight, Role::Trainable);
        f(&format!("{prefix}.bias"), &mut self.bias, Role::Trainable);
    }
}

#[derive(Clone, Debug)]
pub enum Layer<T> {
    Conv(Conv2d<T>),
    ConvT(ConvTranspose2d<T>),
    Norm(BatchNorm2d<T>),
    Act(ActivationLayer<T>),
    Dropout(Dropout<T>),
    Linear(Linear<T>),
    Residual(Box<Sequential<T>>),
}

impl<T: Scalar> Layer<T> {
    pub fn forward(&mut self, x: &Tensor<T>, pass: &mut Pass<'_>) -> Tensor<T> {
        match self {
            Layer::Conv(l) => l.forward(x),
            Layer::ConvT(l) => l.forward(x),
            Layer::Norm(l) => l.forward(x, pass.train),
            Layer::Act(l) => l.forward(x),
            Layer::Dropout(l) => l.forward(x, pass),
            Layer::Linear(l) => l.forward(x),
            Layer::Residual(body) => {
                let mut y = body.forward(x, pass);
                y.add_assign(x);
                y
            }
        }
    }

    pub fn infer(&self, x: &Tensor<T>) -> Tensor<T> {
        match self {
            Layer::Conv(l) => l.infer(x),
            Layer::ConvT(l) => l.infer(x),
            Layer::Norm(l) => l.infer(x),
            Layer::Act(l) => l.infer(x),
            Layer::Dropout(_) => x.clone(),
            Layer::Linear(l) => l.infer(x),
            Layer::Residual(body) => {
                let mut y = body.infer(x);
                y.add_assign(x);
                y
            }
        }
    }

    pub fn backward(&mut self, dy: &Tensor<T>) -> Tensor<T> {
        match self {
            Layer::Conv(l) => l.backward(dy),
            Layer::ConvT(l) => l.backward(dy),
            Layer::Norm(l) => l.backward(dy),
            Layer::Act(l) => l.backward(dy),
            Layer::Dropout(l) => l.backward(dy),
            Layer::Linear(l) => l.backward(dy),
            Layer::Residual(body) => {
                let mut dx = body.backward(dy);
                dx.add_assign(dy);
                dx
            }
        }
    }

    pub fn visit(&mut self, prefix: &str, f: &mut Visitor<'_, T>) {
        match self {
            Layer::Conv(l) => l.visit(prefix, f),
            Layer::ConvT(l) => l.visit(prefix, f),
            Layer::Norm(l) => l.visit(prefix, f),
            Layer::Linear(l) => l.visit(prefix, f),
            Layer::Residual(body) => body.visit(prefix, f),
            Layer::Act(_) | Layer::Dropout(_) => {}
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Sequential<T> {
    pub layers: Vec<Layer<T>>,
}

impl<T: Scalar> Sequential<T> {
    pub fn new(layers: Vec<Layer<T>>) -> Self {
        Sequential { layers }
    }

    pub fn forward(&mut self, x: &Tensor<T>, pass: &mut Pass<'_>) -> Tensor<T> {
        let mut h = x.clone();
        for layer in &mut self.layers {
            h = layer.forward(&h, pass);
        }
        h
    }

    pub fn infer(&self, x: &Tensor<T>) -> Tensor<T> {
        let mut h = x.clone();
        for layer in &self.layers {
            h = layer.infer(&h);
        }
        h
    }

    pub fn backward(&mut self, dy: &Tensor<T>) -> Tensor<T> {
        let mut g = dy.clone();
        for layer in self.layers.iter_mut().rev() {
            g = layer.backward(&g);
        }
        g
    }

    /// Visit every parameter and buffer; names are `<prefix>.<index>.<field>`.
    pub fn visit(&mut self, prefix: &str, f: &mut Visitor<'_, T>) {
        for (i, layer) in self.layers.iter_mut().enumerate() {
            layer.visit(&format!("{prefix}.{i}"), f);
        }
    }
}
