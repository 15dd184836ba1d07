//! Dense activations in channel-major `[C, N, H, W]` layout.
//!
//! Keeping the channel outermost makes a convolution one GEMM over the whole
//! batch and lets batch normalization work on contiguous rows.

use num_traits::{Float, FromPrimitive};
use std::fmt::Debug;
use std::iter::Sum;

pub trait Scalar:
    Float + FromPrimitive + Sum + Default + Debug + Send + Sync + 'static
{
    /// `c ← alpha · a·b + beta · c` on strided row/column views.
    ///
    /// # Safety
    /// The pointers and strides must describe valid `m×k`, `k×n` and `m×n`
    /// views, and `c` must not alias `a` or `b`.
    #[allow(clippy::too_many_arguments)]
    unsafe fn gemm_raw(
        m: usize,
        k: usize,
        n: usize,
        alpha: Self,
        a: *const Self,
        rsa: isize,
        csa: isize,
        b: *const Self,
        rsb: isize,
        csb: isize,
        beta: Self,
        c: *mut Self,
        rsc: isize,
        csc: isize,
    );

    fn from_f64_lossy(v: f64) -> Self {
        Self::from_f64(v).expect("representable")
    }
}

impl Scalar for f32 {
    unsafe fn gemm_raw(
        m: usize,
        k: usize,
        n: usize,
        alpha: f32,
        a: *const f32,
        rsa: isize,
        csa: isize,
        b: *const f32,
        rsb: isize,
        csb: isize,
        beta: f32,
        c: *mut f32,
        rsc: isize,
        csc: isize,
    ) {
        matrixmultiply::sgemm(m, k, n, alpha, a, rsa, csa, b, rsb, csb, beta, c, rsc, csc)
    }
}

impl Scalar for f64 {
    unsafe fn gemm_raw(
        m: usize,
        k: usize,
        n: usize,
        alpha: f64,
        a: *const f64,
        rsa: isize,
        csa: isize,
        b: *const f64,
        rsb: isize,
        csb: isize,
        beta: f64,
        c: *mut f64,
        rsc: isize,
        csc: isize,
    ) {
        matrixmultiply::dgemm(m, k, n, alpha, a, rsa, csa, b, rsb, csb, beta, c, rsc, csc)
    }
}

/// Row-major `c[m×n] (+)= op(a)[m×k] · op(b)[k×n]`.
///
/// `ta` means `a` is stored as `k×m`; `tb` means `b` is stored as `n×k`.
#[allow(clippy::too_many_arguments)]
pub fn matmul<T: Scalar>(
    m: usize,
    k: usize,
    n: usize,
    a: &[T],
    ta: bool,
    b: &[T],
    tb: bool,
    c: &mut [T],
    accumulate: bool,
) {
    assert_eq!(a.len(), m * k, "lhs size");
    assert_eq!(b.len(), k * n, "rhs size");
    assert_eq!(c.len(), m * n, "output size");
    let (rsa, csa) = if ta { (1, m as isize) } else { (k as isize, 1) };
    let (rsb, csb) = if tb { (1, k as isize) } else { (n as isize, 1) };
    let beta = if accumulate { T::one() } else { T::zero() };
    // SAFETY: sizes checked above; `c` is a distinct &mut borrow.
    unsafe {
        T::gemm_raw(
            m,
            k,
            n,
            T::one(),
            a.as_ptr(),
            rsa,
            csa,
            b.as_ptr(),
            rsb,
            csb,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Tensor<T> {
    pub data: Vec<T>,
    /// `[channels, batch, height, width]`
    pub shape: [usize; 4],
}

impl<T: Scalar> Tensor<T> {
    pub fn zeros(shape: [usize; 4]) -> Self {
        Tensor {
            data: vec![T::zero(); shape.iter().product()],
            shape,
        }
    }

    pub fn from_vec(data: Vec<T>, shape: [usize; 4]) -> Self {
        assert_eq!(data.len(), shape.iter().product::<usize>(), "data/shape mismatch");
        Tensor { data, shape }
    }

    pub fn channels(&self) -> usize {
        self.shape[0]
    }

    pub fn batch(&self) -> usize {
        self.shape[1]
    }

    pub fn height(&self) -> usize {
        self.shape[2]
    }

    pub fn width(&self) -> usize {
        self.shape[3]
    }

    /// Elements per channel row (`N·H·W`).
    pub fn row_len(&self) -> usize {
        self.shape[1] * self.shape[2] * self.shape[3]
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Tensor {
            data: self.data.iter().map(|&v| f(v)).collect(),
            shape: self.shape,
        }
    }

    /// Stack along channels; both inputs must agree on `[N, H, W]`.
    pub fn concat_channels(a: &Self, b: &Self) -> Self {
        assert_eq!(a.shape[1..], b.shape[1..], "concat shape mismatch");
        let mut data = Vec::with_capacity(a.len() + b.len());
        data.extend_from_slice(&a.data);
        data.extend_from_slice(&b.data);
        Tensor {
            data,
            shape: [a.shape[0] + b.shape[0], a.shape[1], a.shape[2], a.shape[3]],
        }
    }

    /// Inverse of [`Tensor::concat_channels`].
    pub fn split_channels(&self, first: usize) -> (Self, Self) {
        let cut = first * self.row_len();
        let [c, n, h, w] = self.shape;
        (
            Tensor::from_vec(self.data[..cut].to_vec(), [first, n, h, w]),
            Tensor::from_vec(self.data[cut..].to_vec(), [c - first, n, h, w]),
        )
    }

    /// Samples `range` of the batch.
    pub fn batch_slice(&self, range: std::ops::Range<usize>) -> Self {
        let [c, n, h, w] = self.shape;
        let plane = h * w;
        let mut data = Vec::with_capacity(c * range.len() * plane);
        for ch in 0..c {
            let row = ch * n * plane;
            data.extend_from_slice(&self.data[row + range.start * plane..row + range.end * plane]);
        }
        Tensor::from_vec(data, [c, range.len(), h, w])
    }

    pub fn add_assign(&mut self, other: &Self) {
        assert_eq!(self.shape, other.shape, "add shape mismatch");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a = *a + *b;
        }
    }
}

/// Geometry of a 2-D convolution from an `h×w` input to an `ho×wo` output.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConvGeometry {
    pub channels: usize,
    pub batch: usize,
    pub h: usize,
    pub w: usize,
    pub kernel: usize,
    pub stride: usize,
    pub pad: usize,
    pub ho: usize,
    pub wo: usize,
}

impl ConvGeometry {
    pub fn cols_rows(&self) -> usize {
        self.channels * self.kernel * self.kernel
    }

    pub fn cols_len(&self) -> usize {
        self.batch * self.ho * self.wo
    }

    #[inline]
    fn source(&self, o: usize, k: usize) -> Option<usize> {
        let i = (o * self.stride + k) as isize - self.pad as isize;
        (i >= 0 && (i as usize) < self.h.max(self.w)).then_some(i as usize)
    }
}

/// Unfold `x` (`[C, N, h, w]`) into `[C·k·k, N·ho·wo]` patch columns.
pub fn im2col<T: Scalar>(x: &[T], g: &ConvGeometry) -> Vec<T> {
    let ncols = g.cols_len();
    let mut cols = vec![T::zero(); g.cols_rows() * ncols];
    let plane = g.h * g.w;
    for c in 0..g.channels {
        for ki in 0..g.kernel {
            for kj in 0..g.kernel {
                let row = ((c * g.kernel + ki) * g.kernel + kj) * ncols;
                for n in 0..g.batch {
                    let src = &x[(c * g.batch + n) * plane..][..plane];
                    let dst = &mut cols[row + n * g.ho * g.wo..][..g.ho * g.wo];
                    for oh in 0..g.ho {
                        let Some(ih) = g.source(oh, ki).filter(|&i| i < g.h) else {
                            continue;
                        };
                        for ow in 0..g.wo {
                            if let Some(iw) = g.source(ow, kj).filter(|&i| i < g.w) {
                                dst[oh * g.wo + ow] = src[ih * g.w + iw];
                            }
                        }
                    }
                }
            }
        }
    }
    cols
}

/// Adjoint of [`im2col`]: scatter-add columns back onto a `[C, N, h, w]` grid.
pub fn col2im<T: Scalar>(cols: &[T], g: &ConvGeometry) -> Vec<T> {
    let ncols = g.cols_len();
    let plane = g.h * g.w;
    let mut x = vec![T::zero(); g.channels * g.batch * plane];
    for c in 0..g.channels {
        for ki in 0..g.kernel {
            for kj in 0..g.kernel {
                let row = ((c * g.kernel + ki) * g.kernel + kj) * ncols;
                for n in 0..g.batch {
                    let src = &cols[row + n * g.ho * g.wo..][..g.ho * g.wo];
                    let dst = &mut x[(c * g.batch + n) * plane..][..plane];
                    for oh in 0..g.ho {
                        let Some(ih) = g.source(oh, ki).filter(|&i| i < g.h) else {
                            continue;
                        };
                        for ow in 0..g.wo {
                            if let Some(iw) = g.source(ow, kj).filter(|&i| i < g.w) {
                                let d = &mut dst[ih * g.w + iw];
                                *d = *d + src[oh * g.wo + ow];
                            }
                        }
                    }
                }
            }
        }
    }
    x
}
