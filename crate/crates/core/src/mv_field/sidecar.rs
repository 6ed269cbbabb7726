//! `MVSC` motion-vector sidecar encoding.
//!
//! Layout (little-endian):
//!
//! ```text
//! magic       "MVSC"  4 bytes
//! version     u16     (= 1)
//! grid_width  u16
//! grid_height u16
//! block_size  u8      (= 8)
//! reserved    u8      (= 0)
//! frame_count u32
//! cells       frame-major, row-major; 5 bytes each:
//!             flags u8 (bit 0 = present), dx i16, dy i16
//! ```

use super::{MvCell, MvError, MvField, BLOCK_SIZE};

pub const MVSC_MAGIC: [u8; 4] = *b"MVSC";
pub const MVSC_VERSION: u16 = 1;

const HEADER_LEN: usize = 16;
const CELL_LEN: usize = 5;

pub fn parse_mv_sidecar(bytes: &[u8]) -> Result<MvField, MvError> {
    if bytes.len() < HEADER_LEN {
        if bytes.len() >= 4 && bytes[..4] != MVSC_MAGIC {
            return Err(bad_magic(bytes));
        }
        return Err(MvError::TruncatedPayload {
            expected: HEADER_LEN,
            actual: bytes.len(),
        });
    }
    if bytes[..4] != MVSC_MAGIC {
        return Err(bad_magic(bytes));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != MVSC_VERSION {
        return Err(MvError::VersionUnsupported(version));
    }
    let grid_width = u16::from_le_bytes([bytes[6], bytes[7]]) as usize;
    let grid_height = u16::from_le_bytes([bytes[8], bytes[9]]) as usize;
    let block_size = bytes[10];
    let frame_count = u32::from_le_bytes([bytes[12], bytes[13], bytes[14], bytes[15]]) as usize;
    if grid_width == 0 || grid_height == 0 || frame_count == 0 {
        return Err(MvError::ZeroDimension);
    }
    if block_size as usize != BLOCK_SIZE {
        return Err(MvError::BlockSizeUnsupported(block_size));
    }

    let cells_per_frame = grid_width * grid_height;
    let expected = cells_per_frame
        .checked_mul(frame_count)
        .and_then(|n| n.checked_mul(CELL_LEN))
        .and_then(|n| n.checked_add(HEADER_LEN))
        .unwrap_or(usize::MAX);
    if bytes.len() < expected {
        return Err(MvError::TruncatedPayload {
            expected,
            actual: bytes.len(),
        });
    }
    if bytes.len() > expected {
        return Err(MvError::TrailingData(bytes.len() - expected));
    }

    let frames = bytes[HEADER_LEN..]
        .chunks_exact(cells_per_frame * CELL_LEN)
        .map(|frame| frame.chunks_exact(CELL_LEN).map(decode_cell).collect())
        .collect();
    MvField::new(grid_width, grid_height, frames)
}

fn decode_cell(raw: &[u8]) -> MvCell {
    if raw[0] & 1 == 0 {
        return MvCell::ABSENT;
    }
    MvCell::new(
        i16::from_le_bytes([raw[1], raw[2]]),
        i16::from_le_bytes([raw[3], raw[4]]),
    )
}

fn bad_magic(bytes: &[u8]) -> MvError {
    let mut found = [0u8; 4];
    found.copy_from_slice(&bytes[..4]);
    MvError::BadMagic {
        expected: MVSC_MAGIC,
        found,
    }
}

/// Canonical encoding: absent cells are written as `flags=0, dx=dy=0`.
///
/// Panics if the grid does not fit the format's 16-bit dimensions or the
/// frame count exceeds `u32::MAX`.
pub fn write_mv_sidecar(field: &MvField) -> Vec<u8> {
    let grid_width = u16::try_from(field.grid_width()).expect("grid width exceeds u16");
    let grid_height = u16::try_from(field.grid_height()).expect("grid height exceeds u16");
    let frame_count = u32::try_from(field.frame_count()).expect("frame count exceeds u32");

    let cells = field.grid_width() * field.grid_height() * field.frame_count();
    let mut out = Vec::with_capacity(HEADER_LEN + cells * CELL_LEN);
    out.extend_from_slice(&MVSC_MAGIC);
    out.extend_from_slice(&MVSC_VERSION.to_le_bytes());
    out.extend_from_slice(&grid_width.to_le_bytes());
    out.extend_from_slice(&grid_height.to_le_bytes());
    out.push(BLOCK_SIZE as u8);
    out.push(0);
    out.extend_from_slice(&frame_count.to_le_bytes());
    for cell in field.frames().iter().flatten() {
        let cell = if cell.present { *cell } else { MvCell::ABSENT };
        out.push(cell.present as u8);
        out.extend_from_slice(&cell.dx.to_le_bytes());
        out.extend_from_slice(&cell.dy.to_le_bytes());
    }
    out
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;

    fn two_by_two() -> MvField {
        MvField::uniform(2, 2, 1, MvCell::new(4, -4)).unwrap()
    }

    #[test]
    fn parses_uniform_two_by_two() {
        let bytes = write_mv_sidecar(&two_by_two());
        assert_eq!(bytes.len(), 16 + 4 * 5);
        let field = parse_mv_sidecar(&bytes).unwrap();
        assert_eq!(field.grid_width(), 2);
        assert_eq!(field.grid_height(), 2);
        assert_eq!(field.frame_count(), 1);
        assert_eq!(field.present_count(), 4);
        assert!(field.frames()[0].iter().all(|c| *c == MvCell::new(4, -4)));
    }

    #[test]
    fn header_bytes_are_little_endian() {
        let bytes = write_mv_sidecar(&two_by_two());
        assert_eq!(
            &bytes[..16],
            &[b'M', b'V', b'S', b'C', 1, 0, 2, 0, 2, 0, 8, 0, 1, 0, 0, 0]
        );
        // first cell: present, dx = 4, dy = -4
        assert_eq!(&bytes[16..21], &[1, 4, 0, 0xfc, 0xff]);
    }

    #[test]
    fn short_payload_is_truncated() {
        let bytes = write_mv_sidecar(&two_by_two());
        let err = parse_mv_sidecar(&bytes[..bytes.len() - 3]).unwrap_err();
        assert_eq!(
            err,
            MvError::TruncatedPayload {
                expected: 36,
                actual: 33
            }
        );
    }

    #[test]
    fn rejects_bad_header_fields() {
        let good = write_mv_sidecar(&two_by_two());

        let mut bad = good.clone();
        bad[0] = b'X';
        assert!(matches!(
            parse_mv_sidecar(&bad),
            Err(MvError::BadMagic { .. })
        ));

        let mut bad = good.clone();
        bad[4] = 2;
        assert_eq!(parse_mv_sidecar(&bad), Err(MvError::VersionUnsupported(2)));

        let mut bad = good.clone();
        bad[6] = 0;
        assert_eq!(parse_mv_sidecar(&bad), Err(MvError::ZeroDimension));

        let mut bad = good.clone();
        bad[12] = 0;
        assert_eq!(parse_mv_sidecar(&bad), Err(MvError::ZeroDimension));

        let mut bad = good.clone();
        bad[10] = 16;
        assert_eq!(
            parse_mv_sidecar(&bad),
            Err(MvError::BlockSizeUnsupported(16))
        );

        let mut bad = good;
        bad.push(0);
        assert_eq!(parse_mv_sidecar(&bad), Err(MvError::TrailingData(1)));

        assert!(matches!(
            parse_mv_sidecar(b"MVS"),
            Err(MvError::TruncatedPayload { .. })
        ));
    }

    #[test]
    fn absent_cells_decode_as_zero() {
        let field = MvField::new(1, 1, vec![vec![MvCell::ABSENT]]).unwrap();
        let mut bytes = write_mv_sidecar(&field);
        // junk displacement on an absent cell is dropped on parse
        bytes[17] = 9;
        let parsed = parse_mv_sidecar(&bytes).unwrap();
        assert_eq!(parsed.cell(0, 0, 0), MvCell::ABSENT);
    }

    pub(crate) fn arb_field() -> impl Strategy<Value = MvField> {
        (1usize..6, 1usize..6, 1usize..4).prop_flat_map(|(w, h, t)| {
            let cell = (any::<bool>(), any::<i16>(), any::<i16>()).prop_map(|(p, dx, dy)| {
                if p {
                    MvCell::new(dx, dy)
                } else {
                    MvCell::ABSENT
                }
            });
            proptest::collection::vec(proptest::collection::vec(cell, w * h), t)
                .prop_map(move |frames| MvField::new(w, h, frames).unwrap())
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn sidecar_round_trip(field in arb_field()) {
            let bytes = write_mv_sidecar(&field);
            let parsed = parse_mv_sidecar(&bytes).unwrap();
            prop_assert_eq!(&parsed, &field);
            prop_assert_eq!(write_mv_sidecar(&parsed), bytes);
        }
    }
}
