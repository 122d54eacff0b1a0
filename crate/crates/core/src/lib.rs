//! Fractal image compression for 8-bit grayscale images.
//!
//! The pipeline follows the classic partitioned iterated function system
//! (PIFS) scheme: the image is tiled into destination blocks, every
//! destination block is matched against a pool of reduced, flipped and
//! rotated source blocks, and the best affine intensity map is stored.
//! Decoding iterates the stored maps from an arbitrary seed image.
//!
//! On top of the baseline the crate supports a Gaussian pre-filter on the
//! source pool, a 4-bit contrast quantizer, reduced candidate sets, and
//! box-counting based pruning of low-complexity destination blocks.

pub mod bench;
pub mod bitio;
pub mod boxcount;
pub mod codec;
mod error;
pub mod fixtures;
pub mod image_io;
pub mod metrics;
pub mod preprocess;
pub mod transform;

pub use boxcount::{BoxCountConfig, DimensionMap};
pub use codec::{decode, encode, CodecConfig, CompressedImage, Decoder, Transformation};
pub use error::{FicError, Result};
pub use image_io::{load_image, save_image, Image};
pub use metrics::{bit_budget, compression_ratio, rmse, BitBudget, MetricsReport};
pub use preprocess::{Block, BlockGrid};
pub use transform::{Angle, CandidateSet, Direction, FittedTransform, Quantizer};
