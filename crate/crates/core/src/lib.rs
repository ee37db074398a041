//! Multispectral image feature extraction and object detection:
//! multi-channel higher-order local autocorrelation (MUCHLAC) features
//! with HLAC and GLCM baselines, a Real AdaBoost detector, Random-Forest
//! permutation importance, and a k-fold evaluation pipeline.

pub mod adaboost;
pub mod error;
pub mod eval;
pub mod features;
pub mod forest;
pub mod glcm;
pub mod masks;
pub mod matrix;
pub mod raster;
pub mod synth;

pub use error::{Error, Result};
pub use features::{ExtractConfig, FeatureVector, Invariance, MaskBank};
pub use masks::{MaskGroup, MaskPattern, MaskPoint};
pub use matrix::FeatureMatrix;
pub use raster::{LabeledPatchSet, MultibandRaster};
