//! Binocular tone mapping: render one HDR image as the LDR stereo pair that
//! best preserves overall contrast and local detail while staying fusible.

pub mod bilateral;
pub mod edges;
pub mod energy;
pub mod error;
pub mod fusibility;
pub mod io;
pub mod optimizer;
pub mod perception;
pub mod raster;
pub mod scene;
pub mod tonemap;

pub use error::{Error, Result};
pub use raster::{BinocularPair, HdrImage, LdrImage, LuminanceMap, Plane, StereoMode};
