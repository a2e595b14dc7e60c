//! Minimal CPU neural-network layer library with hand-written backprop.
//!
//! Everything is generic over [`Scalar`] so the same layer code runs in
//! `f32` for training/sampling and in `f64` for finite-difference gradient
//! verification. Activations are single-sample `(C, H, W)` arrays; batching
//! is done by the caller (data-parallel over samples with a deterministic
//! gradient reduction).
//!
//! Weights live in a [`ParamSet`] shared immutably across worker threads;
//! gradients are accumulated into per-worker [`GradStore`]s and summed in
//! sample order, so results do not depend on the worker count.

mod adam;
mod attention;
mod conv;
mod linear;
mod norm;
mod ops;
mod params;

pub use adam::Adam;
pub use attention::{AttnCache, SelfAttention};
pub use conv::Conv2d;
pub use linear::Linear;
pub use norm::{norm_groups, GroupNorm, GroupNormCache, GroupNormNoAffine};
pub use ops::{
    concat_channels, relu_backward, relu_forward, sigmoid_backward, sigmoid_forward,
    silu_backward, silu_forward, silu_vec_backward, silu_vec_forward, split_channels,
    upsample2x_backward, upsample2x_forward,
};
pub use params::{GradStore, ParamId, ParamSet};

use ndarray::{Array2, ArrayView2, ArrayViewMut2};

/// Floating-point scalar the layer library is generic over.
pub trait Scalar:
    ndarray::LinalgScalar
    + num_traits::Float
    + num_traits::FromPrimitive
    + std::fmt::Debug
    + std::fmt::Display
    + Send
    + Sync
    + 'static
{
    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
}

impl Scalar for f32 {
    fn from_f64(x: f64) -> Self {
        x as f32
    }
    fn to_f64(self) -> f64 {
        self as f64
    }
}

impl Scalar for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(self) -> f64 {
        self
    }
}

/// View a contiguous `(C, H, W)` activation as a `(C, H*W)` matrix.
pub(crate) fn as_mat<S: Scalar>(x: &ndarray::Array3<S>) -> ArrayView2<'_, S> {
    let (c, h, w) = x.dim();
    let slice = x.as_slice().expect("activation must be contiguous");
    ArrayView2::from_shape((c, h * w), slice).expect("shape")
}

pub(crate) fn as_mat_mut<S: Scalar>(x: &mut ndarray::Array3<S>) -> ArrayViewMut2<'_, S> {
    let (c, h, w) = x.dim();
    let slice = x.as_slice_mut().expect("activation must be contiguous");
    ArrayViewMut2::from_shape((c, h * w), slice).expect("shape")
}

/// `c += a . b` via the BLAS-like kernel.
pub(crate) fn gemm_acc<S: Scalar>(a: &ArrayView2<S>, b: &ArrayView2<S>, c: &mut ArrayViewMut2<S>) {
    ndarray::linalg::general_mat_mul(S::one(), a, b, S::one(), c);
}

/// `c = a . b`.
pub(crate) fn gemm<S: Scalar>(a: &ArrayView2<S>, b: &ArrayView2<S>, c: &mut ArrayViewMut2<S>) {
    ndarray::linalg::general_mat_mul(S::one(), a, b, S::zero(), c);
}

/// Fill a matrix with zero-mean normal draws of the given std.
pub fn normal_init<S: Scalar, R: rand::Rng>(
    rng: &mut R,
    rows: usize,
    cols: usize,
    std: f64,
) -> Array2<S> {
    use rand_distr::{Distribution, StandardNormal};
    let mut out = Array2::zeros((rows, cols));
    for v in out.iter_mut() {
        let z: f64 = StandardNormal.sample(rng);
        *v = S::from_f64(z * std);
    }
    out
}

/// Kaiming-style init for a layer with the given fan-in.
pub fn kaiming_init<S: Scalar, R: rand::Rng>(
    rng: &mut R,
    rows: usize,
    cols: usize,
    fan_in: usize,
) -> Array2<S> {
    normal_init(rng, rows, cols, (2.0 / fan_in as f64).sqrt())
}
