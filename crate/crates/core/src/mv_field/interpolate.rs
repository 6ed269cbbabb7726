use super::{MvCell, MvField};

/// Fills absent blocks that have at least two present 4-neighbours with the
/// mean of those neighbours, rounded to the nearest quarter-pel (ties away
/// from zero).
///
/// Fills are computed from the input snapshot: a block filled in this call
/// never contributes to another fill in the same call. Present blocks are
/// left untouched.
pub fn interpolate_missing(field: &MvField) -> MvField {
    let (w, h) = (field.grid_width(), field.grid_height());
    let frames = field
        .frames()
        .iter()
        .map(|grid| {
            let mut out = grid.clone();
            for y in 0..h {
                for x in 0..w {
                    if grid[y * w + x].present {
                        continue;
                    }
                    let mut n = 0i32;
                    let (mut sx, mut sy) = (0i32, 0i32);
                    let neighbours = [
                        (y > 0).then(|| (x, y - 1)),
                        (y + 1 < h).then(|| (x, y + 1)),
                        (x + 1 < w).then(|| (x + 1, y)),
                        (x > 0).then(|| (x - 1, y)),
                    ];
                    for (nx, ny) in neighbours.into_iter().flatten() {
                        let c = grid[ny * w + nx];
                        if c.present {
                            n += 1;
                            sx += c.dx as i32;
                            sy += c.dy as i32;
                        }
                    }
                    if n >= 2 {
                        out[y * w + x] = MvCell::new(mean_round(sx, n), mean_round(sy, n));
                    }
                }
            }
            out
        })
        .collect();
    MvField::new(w, h, frames).expect("dimensions unchanged")
}

// The mean of i16 values always fits back into i16.
fn mean_round(sum: i32, n: i32) -> i16 {
    (sum as f64 / n as f64).round() as i16
}
