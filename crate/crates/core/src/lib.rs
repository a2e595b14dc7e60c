//! Core algorithms for label-map conditioned diffusion synthesis of cardiac
//! ultrasound images and downstream U-Net segmentation.
//!
//! The crate is organised around the stages of the synthesis pipeline:
//!
//! - [`schedules`]: diffusion noise schedules (linear and cosine) and the
//!   closed-form quantities derived from them.
//! - [`diffusion`]: forward noising, the hybrid training loss, guidance
//!   combination and the reverse sampling loop.
//! - [`nn`]: a small CPU tensor/layer library with hand-written backprop,
//!   generic over `f32`/`f64`.
//! - [`sdm_net`]: the conditional denoising U-Net with spatially-adaptive
//!   conditional normalization on the decoder path.
//! - [`labelmaps`]: semantic label map representation, sector derivation and
//!   image/label file I/O.
//! - [`augment`]: random affine + elastic label-map transformations and
//!   dataset expansion bookkeeping.
//! - [`segmenter`]: the segmentation U-Net and its training loop.
//! - [`metrics`]: Dice computation and report aggregation.
//! - [`checkpoint`]: versioned weight/optimizer containers shared by the two
//!   trainers.

pub mod augment;
pub mod checkpoint;
pub mod diffusion;
pub mod error;
pub mod labelmaps;
pub mod metrics;
pub mod nn;
pub mod schedules;
pub mod sdm_net;
pub mod segmenter;

pub use error::{CoreError, Result};
