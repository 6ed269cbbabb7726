//! Block motion-vector fields and the classifier inputs built from them.
//!
//! A [`MvField`] is the temporal activity map: one grid of 8×8-pixel blocks
//! per inter frame, each cell carrying an optional quarter-pel displacement.
//! Missing blocks (intra blocks, skipped partitions) are filled from their
//! neighbours by [`interpolate_missing`], cropped into fixed-size volumes by
//! [`assemble_volume`] and lifted to pixel resolution by
//! [`mv_to_dense_flow`] for comparison against dense optical flow.

mod flow;
mod interpolate;
mod sidecar;
mod volume;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use flow::{mv_to_dense_flow, read_flo, write_flo, FlowFieldDense, FLO_MAGIC};
pub use interpolate::interpolate_missing;
pub use sidecar::{parse_mv_sidecar, write_mv_sidecar, MVSC_MAGIC, MVSC_VERSION};
pub use volume::{
    assemble_volume, ten_crop, CropDescriptor, InputVolume, VolumeLayout, VolumeSpec,
};

/// Side of a motion-vector block in pixels.
pub const BLOCK_SIZE: usize = 8;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MvError {
    #[error("bad magic: expected {expected:?}, found {found:?}")]
    BadMagic { expected: [u8; 4], found: [u8; 4] },
    #[error("truncated payload: expected {expected} bytes, got {actual}")]
    TruncatedPayload { expected: usize, actual: usize },
    #[error("{0} trailing bytes after the declared payload")]
    TrailingData(usize),
    #[error("unsupported sidecar version {0}")]
    VersionUnsupported(u16),
    #[error("unsupported block size {0} (only 8 is allowed)")]
    BlockSizeUnsupported(u8),
    #[error("grid dimensions and frame count must be nonzero")]
    ZeroDimension,
    #[error("frame {frame} has {actual} cells, expected {expected}")]
    FrameSizeMismatch {
        frame: usize,
        expected: usize,
        actual: usize,
    },
    #[error("crop [{x}, {x}+{size}) x [{y}, {y}+{size}) outside {grid_width}x{grid_height} grid")]
    CropOutOfBounds {
        x: usize,
        y: usize,
        size: usize,
        grid_width: usize,
        grid_height: usize,
    },
    #[error("video has {frames} frames, need {needed} (temporal looping disabled)")]
    TemporalUnderflow { frames: usize, needed: usize },
    #[error("start frame {start} out of range for {frames} frames")]
    FrameOutOfRange { start: usize, frames: usize },
    #[error("grid {grid_width}x{grid_height} smaller than crop size {size}")]
    GridTooSmall {
        grid_width: usize,
        grid_height: usize,
        size: usize,
    },
    #[error(
        "dimension mismatch: expected {expected_width}x{expected_height}, got {width}x{height}"
    )]
    DimensionMismatch {
        expected_width: usize,
        expected_height: usize,
        width: usize,
        height: usize,
    },
    #[error("crop size and temporal extent must be positive")]
    EmptyVolume,
    #[error("flow field contains non-finite values")]
    NonFiniteFlow,
    #[error("bad .flo magic {0:#010x}")]
    BadFloMagic(u32),
}

/// One block of a motion-vector grid. Displacements are in quarter-pel
/// units; absent cells conventionally carry `(0, 0)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MvCell {
    pub present: bool,
    pub dx: i16,
    pub dy: i16,
}

impl MvCell {
    pub const ABSENT: MvCell = MvCell {
        present: false,
        dx: 0,
        dy: 0,
    };

    pub fn new(dx: i16, dy: i16) -> Self {
        MvCell {
            present: true,
            dx,
            dy,
        }
    }
}

/// Per-frame grids of block motion vectors. Frames are stored row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MvField {
    grid_width: usize,
    grid_height: usize,
    frames: Vec<Vec<MvCell>>,
}

impl MvField {
    pub fn new(
        grid_width: usize,
        grid_height: usize,
        frames: Vec<Vec<MvCell>>,
    ) -> Result<Self, MvError> {
        if grid_width == 0 || grid_height == 0 || frames.is_empty() {
            return Err(MvError::ZeroDimension);
        }
        let cells = grid_width * grid_height;
        for (frame, grid) in frames.iter().enumerate() {
            if grid.len() != cells {
                return Err(MvError::FrameSizeMismatch {
                    frame,
                    expected: cells,
                    actual: grid.len(),
                });
            }
        }
        Ok(MvField {
            grid_width,
            grid_height,
            frames,
        })
    }

    /// A field where every cell of every frame holds the same vector.
    pub fn uniform(
        grid_width: usize,
        grid_height: usize,
        frame_count: usize,
        cell: MvCell,
    ) -> Result<Self, MvError> {
        Self::new(
            grid_width,
            grid_height,
            vec![vec![cell; grid_width * grid_height]; frame_count],
        )
    }

    pub fn grid_width(&self) -> usize {
        self.grid_width
    }

    pub fn grid_height(&self) -> usize {
        self.grid_height
    }

    pub fn block_size(&self) -> usize {
        BLOCK_SIZE
    }

    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }

    pub fn frames(&self) -> &[Vec<MvCell>] {
        &self.frames
    }

    pub fn frame(&self, index: usize) -> Option<&[MvCell]> {
        self.frames.get(index).map(Vec::as_slice)
    }

    /// Cell at column `x`, row `y` of frame `frame`.
    ///
    /// Panics if any index is out of range.
    pub fn cell(&self, frame: usize, x: usize, y: usize) -> MvCell {
        assert!(x < self.grid_width && y < self.grid_height);
        self.frames[frame][y * self.grid_width + x]
    }

    pub fn present_count(&self) -> usize {
        self.frames
            .iter()
            .flat_map(|f| f.iter())
            .filter(|c| c.present)
            .count()
    }
}
