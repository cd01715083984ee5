//! Synthetic video generation and chunking.
//!
//! Two generators: Gaussian-blob videos with motion and camera classes (the
//! workhorse), and linear-dynamical-system sequences (a fast low-dimensional
//! stand-in for property tests). Downstream of both: scene-cut detection,
//! chunk tiling, and the pair extraction that training consumes.

pub mod blob;
pub mod chunks;
pub mod lds;
pub mod manifest;
pub mod scene;

pub use blob::{blob_centroid, gen_blob_video, render_blob_video, BlobSpec, CameraPath, SyntheticVideo};
pub use chunks::{chunk_video, tile_chunks, Chunk, ChunkPair};
pub use lds::{gen_lds_sequence, lds_trajectory};
pub use manifest::{DatasetManifest, ManifestEntry, MANIFEST_VERSION};
pub use scene::{detect_scene_cuts, frame_histogram};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MotionClass {
    Slow,
    Medium,
    Fast,
}

impl MotionClass {
    pub const ALL: [MotionClass; 3] = [Self::Slow, Self::Medium, Self::Fast];

    /// Blob speed range in pixels per frame.
    pub fn speed_range(self) -> (f64, f64) {
        match self {
            Self::Slow => (0.2, 0.6),
            Self::Medium => (0.6, 1.4),
            Self::Fast => (1.4, 2.8),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Slow => "slow",
            Self::Medium => "medium",
            Self::Fast => "fast",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "slow" => Ok(Self::Slow),
            "medium" => Ok(Self::Medium),
            "fast" => Ok(Self::Fast),
            other => Err(Error::Config(format!(
                "unknown motion class '{other}' (expected slow|medium|fast)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CameraClass {
    Static,
    PanTilt,
    Zoom,
    Complex,
}

impl CameraClass {
    pub const ALL: [CameraClass; 4] = [Self::Static, Self::PanTilt, Self::Zoom, Self::Complex];

    pub fn name(self) -> &'static str {
        match self {
            Self::Static => "static",
            Self::PanTilt => "pan_tilt",
            Self::Zoom => "zoom",
            Self::Complex => "complex",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "static" => Ok(Self::Static),
            "pan_tilt" => Ok(Self::PanTilt),
            "zoom" => Ok(Self::Zoom),
            "complex" => Ok(Self::Complex),
            other => Err(Error::Config(format!(
                "unknown camera class '{other}' (expected static|pan_tilt|zoom|complex)"
            ))),
        }
    }
}
