//! Classifier input volumes.
//!
//! The 3D classifier takes `N×N×2×T` volumes (displacement components in
//! separate channels per time step); the 2D classifier takes `N×N×2T`
//! volumes with the components of every frame stacked along depth as
//! `dx_0, dy_0, dx_1, dy_1, ...`.

use serde::{Deserialize, Serialize};

use super::{MvError, MvField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VolumeLayout {
    /// `N×N×2×T`, input of the 3D temporal CNN.
    #[serde(rename = "SPLIT_4D")]
    Split4d,
    /// `N×N×2T`, input of the 2D temporal CNN.
    #[serde(rename = "STACKED_3D")]
    Stacked3d,
}

impl VolumeLayout {
    pub fn default_size(self) -> usize {
        match self {
            VolumeLayout::Split4d => 24,
            VolumeLayout::Stacked3d => 48,
        }
    }

    pub fn default_temporal_extent(self) -> usize {
        match self {
            VolumeLayout::Split4d => 160,
            VolumeLayout::Stacked3d => 60,
        }
    }
}

/// Geometry of one volume extraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VolumeSpec {
    pub layout: VolumeLayout,
    /// Crop side in grid cells.
    pub size: usize,
    pub temporal_extent: usize,
    pub t_start: usize,
    /// Repeat the video from its first frame when it is shorter than
    /// `t_start + temporal_extent`.
    pub loop_short: bool,
}

impl VolumeSpec {
    pub fn new(layout: VolumeLayout) -> Self {
        VolumeSpec {
            layout,
            size: layout.default_size(),
            temporal_extent: layout.default_temporal_extent(),
            t_start: 0,
            loop_short: true,
        }
    }
}

/// Top-left corner of a square crop in grid cells, optionally mirrored
/// horizontally.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CropDescriptor {
    pub x: usize,
    pub y: usize,
    pub flipped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputVolume {
    pub layout: VolumeLayout,
    pub size: usize,
    pub temporal_extent: usize,
    /// Row-major sample array with shape [`InputVolume::shape`].
    pub samples: Vec<f64>,
}

impl InputVolume {
    pub fn shape(&self) -> Vec<usize> {
        let (n, t) = (self.size, self.temporal_extent);
        match self.layout {
            VolumeLayout::Split4d => vec![n, n, 2, t],
            VolumeLayout::Stacked3d => vec![n, n, 2 * t],
        }
    }

    /// Flat index of component `c` (0 = dx, 1 = dy) at row `y`, column `x`,
    /// time step `t`.
    pub fn index(&self, y: usize, x: usize, c: usize, t: usize) -> usize {
        let (n, depth) = (self.size, self.temporal_extent);
        match self.layout {
            VolumeLayout::Split4d => ((y * n + x) * 2 + c) * depth + t,
            VolumeLayout::Stacked3d => (y * n + x) * 2 * depth + 2 * t + c,
        }
    }

    pub fn get(&self, y: usize, x: usize, c: usize, t: usize) -> f64 {
        self.samples[self.index(y, x, c, t)]
    }

    /// Mean of the dx (`c = 0`) or dy (`c = 1`) component over the volume.
    pub fn component_mean(&self, c: usize) -> f64 {
        let mut sum = 0.0;
        for y in 0..self.size {
            for x in 0..self.size {
                for t in 0..self.temporal_extent {
                    sum += self.get(y, x, c, t);
                }
            }
        }
        sum / (self.size * self.size * self.temporal_extent) as f64
    }
}

/// Cuts one zero-centred volume out of `field`.
///
/// Absent cells contribute `(0, 0)`; interpolate the field beforehand if
/// filled blocks are wanted. Samples stay in quarter-pel units. A flipped
/// crop mirrors columns and negates `dx`.
pub fn assemble_volume(
    field: &MvField,
    spec: &VolumeSpec,
    crop: CropDescriptor,
) -> Result<InputVolume, MvError> {
    let (n, depth) = (spec.size, spec.temporal_extent);
    if n == 0 || depth == 0 {
        return Err(MvError::EmptyVolume);
    }
    let (gw, gh) = (field.grid_width(), field.grid_height());
    if crop.x + n > gw || crop.y + n > gh {
        return Err(MvError::CropOutOfBounds {
            x: crop.x,
            y: crop.y,
            size: n,
            grid_width: gw,
            grid_height: gh,
        });
    }
    let frames = field.frame_count();
    if spec.t_start >= frames {
        return Err(MvError::FrameOutOfRange {
            start: spec.t_start,
            frames,
        });
    }
    if !spec.loop_short && spec.t_start + depth > frames {
        return Err(MvError::TemporalUnderflow {
            frames,
            needed: spec.t_start + depth,
        });
    }

    let mut volume = InputVolume {
        layout: spec.layout,
        size: n,
        temporal_extent: depth,
        samples: vec![0.0; 2 * n * n * depth],
    };
    let mut sums = [0.0f64; 2];
    for t in 0..depth {
        let grid = &field.frames()[(spec.t_start + t) % frames];
        for y in 0..n {
            for x in 0..n {
                let src_x = if crop.flipped {
                    crop.x + n - 1 - x
                } else {
                    crop.x + x
                };
                let cell = grid[(crop.y + y) * gw + src_x];
                if !cell.present {
                    continue;
                }
                let dx = if crop.flipped {
                    -(cell.dx as f64)
                } else {
                    cell.dx as f64
                };
                let dy = cell.dy as f64;
                let ix = volume.index(y, x, 0, t);
                let iy = volume.index(y, x, 1, t);
                volume.samples[ix] = dx;
                volume.samples[iy] = dy;
                sums[0] += dx;
                sums[1] += dy;
            }
        }
    }

    let count = (n * n * depth) as f64;
    let means = [sums[0] / count, sums[1] / count];
    for t in 0..depth {
        for y in 0..n {
            for x in 0..n {
                for (c, mean) in means.iter().enumerate() {
                    let i = volume.index(y, x, c, t);
                    volume.samples[i] -= mean;
                }
            }
        }
    }
    Ok(volume)
}

/// The ten test-time crops: four corners and the centre, each unflipped
/// then flipped.
pub fn ten_crop(
    grid_width: usize,
    grid_height: usize,
    size: usize,
) -> Result<Vec<CropDescriptor>, MvError> {
    if size == 0 || grid_width < size || grid_height < size {
        return Err(MvError::GridTooSmall {
            grid_width,
            grid_height,
            size,
        });
    }
    let (rx, ry) = (grid_width - size, grid_height - size);
    let origins = [(0, 0), (rx, 0), (0, ry), (rx, ry), (rx / 2, ry / 2)];
    Ok([false, true]
        .into_iter()
        .flat_map(|flipped| {
            origins
                .into_iter()
                .map(move |(x, y)| CropDescriptor { x, y, flipped })
        })
        .collect())
}
