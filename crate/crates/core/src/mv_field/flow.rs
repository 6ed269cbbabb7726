use std::io::{self, Read, Write};

use super::{MvError, MvField, BLOCK_SIZE};

/// Sanity tag at the start of every Middlebury `.flo` file.
pub const FLO_MAGIC: f32 = 202021.25;

/// Dense per-pixel displacement field in pixels, stored row-major as
/// `(u, v)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowFieldDense {
    width: usize,
    height: usize,
    data: Vec<[f64; 2]>,
}

impl FlowFieldDense {
    pub fn new(width: usize, height: usize, data: Vec<[f64; 2]>) -> Result<Self, MvError> {
        if width == 0 || height == 0 {
            return Err(MvError::ZeroDimension);
        }
        if data.len() != width * height {
            return Err(MvError::DimensionMismatch {
                expected_width: width,
                expected_height: height,
                width: data.len(),
                height: 1,
            });
        }
        if data.iter().flatten().any(|v| !v.is_finite()) {
            return Err(MvError::NonFiniteFlow);
        }
        Ok(FlowFieldDense {
            width,
            height,
            data,
        })
    }

    pub fn constant(width: usize, height: usize, u: f64, v: f64) -> Result<Self, MvError> {
        Self::new(width, height, vec![[u, v]; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[[f64; 2]] {
        &self.data
    }

    pub fn at(&self, x: usize, y: usize) -> [f64; 2] {
        self.data[y * self.width + x]
    }
}

/// Lifts one frame of block vectors to pixel resolution.
///
/// Every pixel of an 8×8 block receives `(-dx/4, -dy/4)`: quarter-pel to
/// pixels, and negated because a P-frame vector points from the current
/// block back to its reference while forward flow points the other way.
/// Absent blocks yield zero flow.
pub fn mv_to_dense_flow(
    field: &MvField,
    frame: usize,
    width: usize,
    height: usize,
) -> Result<FlowFieldDense, MvError> {
    let (gw, gh) = (field.grid_width(), field.grid_height());
    if width != gw * BLOCK_SIZE || height != gh * BLOCK_SIZE {
        return Err(MvError::DimensionMismatch {
            expected_width: gw * BLOCK_SIZE,
            expected_height: gh * BLOCK_SIZE,
            width,
            height,
        });
    }
    let grid = field.frame(frame).ok_or(MvError::FrameOutOfRange {
        start: frame,
        frames: field.frame_count(),
    })?;
    let mut data = Vec::with_capacity(width * height);
    for y in 0..height {
        let row = &grid[(y / BLOCK_SIZE) * gw..(y / BLOCK_SIZE + 1) * gw];
        for x in 0..width {
            let cell = row[x / BLOCK_SIZE];
            data.push(if cell.present {
                [-(cell.dx as f64) / 4.0, -(cell.dy as f64) / 4.0]
            } else {
                [0.0, 0.0]
            });
        }
    }
    FlowFieldDense::new(width, height, data)
}

pub fn read_flo<R: Read>(mut reader: R) -> io::Result<FlowFieldDense> {
    let mut header = [0u8; 12];
    reader.read_exact(&mut header)?;
    let magic = f32::from_le_bytes(header[0..4].try_into().unwrap());
    if magic != FLO_MAGIC {
        return Err(invalid(MvError::BadFloMagic(magic.to_bits())));
    }
    let width = i32::from_le_bytes(header[4..8].try_into().unwrap());
    let height = i32::from_le_bytes(header[8..12].try_into().unwrap());
    if width <= 0 || height <= 0 {
        return Err(invalid(MvError::ZeroDimension));
    }
    let (width, height) = (width as usize, height as usize);
    let mut raw = vec![0u8; width * height * 8];
    reader.read_exact(&mut raw)?;
    let data = raw
        .chunks_exact(8)
        .map(|px| {
            [
                f32::from_le_bytes(px[0..4].try_into().unwrap()) as f64,
                f32::from_le_bytes(px[4..8].try_into().unwrap()) as f64,
            ]
        })
        .collect();
    FlowFieldDense::new(width, height, data).map_err(invalid)
}

/// Writes `.flo`; values are narrowed to `f32`.
pub fn write_flo<W: Write>(mut writer: W, flow: &FlowFieldDense) -> io::Result<()> {
    let mut buf = Vec::with_capacity(12 + flow.data.len() * 8);
    buf.extend_from_slice(&FLO_MAGIC.to_le_bytes());
    buf.extend_from_slice(&(flow.width as i32).to_le_bytes());
    buf.extend_from_slice(&(flow.height as i32).to_le_bytes());
    for [u, v] in &flow.data {
        buf.extend_from_slice(&(*u as f32).to_le_bytes());
        buf.extend_from_slice(&(*v as f32).to_le_bytes());
    }
    writer.write_all(&buf)
}

fn invalid(err: MvError) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, err)
}
