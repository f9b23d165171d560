//! Sobel gradients and their projection into per-axis edge histograms.
//!
//! The whole pipeline is integer-exact: a 3×3 Sobel response on 8-bit input is
//! at most 4·255 in magnitude, and histogram bins are `u64`, so no stage
//! saturates or rounds. The 1-pixel frame border carries no response.

use crate::error::{Error, Result};
use crate::image::ImageFrame;

/// Image axis a gradient or histogram refers to.
///
/// `Horizontal` is the derivative along x (it responds to vertical edges) and
/// its histogram has one bin per column. `Vertical` is the derivative along y
/// with one bin per row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    Horizontal,
    Vertical,
}

/// Absolute single-axis Sobel response, same dimensions as the source frame.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientImage {
    pub axis: Axis,
    pub width: usize,
    pub height: usize,
    pub data: Vec<u32>,
    pub timestamp: f64,
}

impl GradientImage {
    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u32 {
        self.data[row * self.width + col]
    }
}

/// Per-axis vector of summed gradient magnitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeHistogram {
    pub axis: Axis,
    pub bins: Vec<u64>,
    pub timestamp: f64,
}

impl EdgeHistogram {
    pub fn new(axis: Axis, bins: Vec<u64>, timestamp: f64) -> Self {
        Self {
            axis,
            bins,
            timestamp,
        }
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.bins.iter().sum()
    }

    /// True when no bin carries edge energy.
    pub fn is_flat(&self) -> bool {
        self.bins.iter().all(|&b| b == 0)
    }
}

fn check_dims(frame: &ImageFrame) -> Result<()> {
    let (width, height) = (frame.width(), frame.height());
    if width < 3 || height < 3 {
        return Err(Error::DimensionTooSmall { width, height });
    }
    Ok(())
}

#[inline]
fn sobel_x(above: &[u8], mid: &[u8], below: &[u8], col: usize) -> u32 {
    let right = above[col + 1] as i32 + 2 * mid[col + 1] as i32 + below[col + 1] as i32;
    let left = above[col - 1] as i32 + 2 * mid[col - 1] as i32 + below[col - 1] as i32;
    (right - left).unsigned_abs()
}

#[inline]
fn sobel_y(above: &[u8], below: &[u8], col: usize) -> u32 {
    let down = below[col - 1] as i32 + 2 * below[col] as i32 + below[col + 1] as i32;
    let up = above[col - 1] as i32 + 2 * above[col] as i32 + above[col + 1] as i32;
    (down - up).unsigned_abs()
}

pub fn sobel_gradient(frame: &ImageFrame, axis: Axis) -> Result<GradientImage> {
    check_dims(frame)?;
    let (width, height) = (frame.width(), frame.height());
    let mut data = vec![0u32; width * height];
    for row in 1..height - 1 {
        let (above, mid, below) = (frame.row(row - 1), frame.row(row), frame.row(row + 1));
        let out = &mut data[row * width..(row + 1) * width];
        for col in 1..width - 1 {
            out[col] = match axis {
                Axis::Horizontal => sobel_x(above, mid, below, col),
                Axis::Vertical => sobel_y(above, below, col),
            };
        }
    }
    Ok(GradientImage {
        axis,
        width,
        height,
        data,
        timestamp: frame.timestamp,
    })
}

/// Horizontal: one bin per column. Vertical: one bin per row.
pub fn edge_histogram(gradient: &GradientImage, axis: Axis) -> Result<EdgeHistogram> {
    if gradient.axis != axis {
        return Err(Error::GradientAxis {
            gradient: gradient.axis,
            requested: axis,
        });
    }
    let bins = match axis {
        Axis::Horizontal => {
            let mut bins = vec![0u64; gradient.width];
            for row in gradient.data.chunks_exact(gradient.width) {
                for (bin, &g) in bins.iter_mut().zip(row) {
                    *bin += g as u64;
                }
            }
            bins
        }
        Axis::Vertical => gradient
            .data
            .chunks_exact(gradient.width)
            .map(|row| row.iter().map(|&g| g as u64).sum())
            .collect(),
    };
    Ok(EdgeHistogram::new(axis, bins, gradient.timestamp))
}

/// Horizontal and vertical histograms in a single pass, without materializing
/// gradient images. Bit-identical to [`sobel_gradient`] followed by
/// [`edge_histogram`].
pub fn frame_histograms(frame: &ImageFrame) -> Result<(EdgeHistogram, EdgeHistogram)> {
    check_dims(frame)?;
    let (width, height) = (frame.width(), frame.height());
    let mut hx = vec![0u64; width];
    let mut hy = vec![0u64; height];
    for row in 1..height - 1 {
        let (above, mid, below) = (frame.row(row - 1), frame.row(row), frame.row(row + 1));
        let mut row_sum = 0u64;
        for col in 1..width - 1 {
            hx[col] += sobel_x(above, mid, below, col) as u64;
            row_sum += sobel_y(above, below, col) as u64;
        }
        hy[row] = row_sum;
    }
    let t = frame.timestamp;
    Ok((
        EdgeHistogram::new(Axis::Horizontal, hx, t),
        EdgeHistogram::new(Axis::Vertical, hy, t),
    ))
}

/// Horizontal histogram only; used for the stereo partner frame.
pub fn horizontal_histogram(frame: &ImageFrame) -> Result<EdgeHistogram> {
    check_dims(frame)?;
    let (width, height) = (frame.width(), frame.height());
    let mut hx = vec![0u64; width];
    for row in 1..height - 1 {
        let (above, mid, below) = (frame.row(row - 1), frame.row(row), frame.row(row + 1));
        for col in 1..width - 1 {
            hx[col] += sobel_x(above, mid, below, col) as u64;
        }
    }
    Ok(EdgeHistogram::new(Axis::Horizontal, hx, frame.timestamp))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const KX: [[i32; 3]; 3] = [[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]];
    const KY: [[i32; 3]; 3] = [[-1, -2, -1], [0, 0, 0], [1, 2, 1]];

    /// Direct 3×3 correlation with an explicit kernel table.
    fn convolve_oracle(frame: &ImageFrame, axis: Axis) -> Vec<u32> {
        let k = match axis {
            Axis::Horizontal => KX,
            Axis::Vertical => KY,
        };
        let (w, h) = (frame.width(), frame.height());
        let mut out = vec![0u32; w * h];
        for r in 1..h - 1 {
            for c in 1..w - 1 {
                let mut acc = 0i32;
                for (dr, krow) in k.iter().enumerate() {
                    for (dc, kv) in krow.iter().enumerate() {
                        acc += kv * frame.get(r + dr - 1, c + dc - 1) as i32;
                    }
                }
                out[r * w + c] = acc.unsigned_abs();
            }
        }
        out
    }

    fn step_frame() -> ImageFrame {
        ImageFrame::from_fn(128, 96, 0.5, |_, c| if c < 64 { 0 } else { 255 }).unwrap()
    }

    #[test]
    fn uniform_frame_has_no_gradient() {
        let frame = ImageFrame::filled(128, 96, 128, 0.0).unwrap();
        for axis in [Axis::Horizontal, Axis::Vertical] {
            let g = sobel_gradient(&frame, axis).unwrap();
            assert!(g.data.iter().all(|&v| v == 0));
            assert!(edge_histogram(&g, axis).unwrap().is_flat());
        }
    }

    #[test]
    fn step_edge_matches_hand_convolution() {
        let frame = step_frame();
        let g = sobel_gradient(&frame, Axis::Horizontal).unwrap();
        assert_eq!(g.data, convolve_oracle(&frame, Axis::Horizontal));
        for r in 0..96 {
            for c in 0..128 {
                let expected = if (1..95).contains(&r) && (c == 63 || c == 64) {
                    4 * 255
                } else {
                    0
                };
                assert_eq!(g.get(r, c), expected, "({r},{c})");
            }
        }
        let hist = edge_histogram(&g, Axis::Horizontal).unwrap();
        assert_eq!(hist.timestamp, 0.5);
        for (c, &b) in hist.bins.iter().enumerate() {
            let expected = if c == 63 || c == 64 { 94 * 1020 } else { 0 };
            assert_eq!(b, expected, "bin {c}");
        }
        // a vertical edge has no row-wise derivative
        let gy = sobel_gradient(&frame, Axis::Vertical).unwrap();
        assert!(gy.data.iter().all(|&v| v == 0));
    }

    #[test]
    fn minimum_frame_is_all_border() {
        let frame = ImageFrame::from_fn(3, 3, 0.0, |r, c| (r * 90 + c * 40) as u8).unwrap();
        let g = sobel_gradient(&frame, Axis::Horizontal).unwrap();
        // only the centre pixel is interior
        assert_eq!(g.data.iter().filter(|&&v| v != 0).count(), 1);
        assert_eq!(g.get(1, 1), convolve_oracle(&frame, Axis::Horizontal)[4]);
    }

    #[test]
    fn single_pixel_histogram() {
        let mut data = vec![0u32; 20 * 10];
        data[5 * 20 + 9] = 7;
        let g = GradientImage {
            axis: Axis::Horizontal,
            width: 20,
            height: 10,
            data,
            timestamp: 1.0,
        };
        let h = edge_histogram(&g, Axis::Horizontal).unwrap();
        assert_eq!(h.len(), 20);
        for (i, &b) in h.bins.iter().enumerate() {
            assert_eq!(b, if i == 9 { 7 } else { 0 });
        }
        let g = GradientImage {
            axis: Axis::Vertical,
            ..g
        };
        let h = edge_histogram(&g, Axis::Vertical).unwrap();
        assert_eq!(h.len(), 10);
        assert_eq!(h.bins[5], 7);
        assert_eq!(h.total(), 7);
    }

    #[test]
    fn axis_of_gradient_must_match() {
        let frame = step_frame();
        let g = sobel_gradient(&frame, Axis::Vertical).unwrap();
        assert!(matches!(
            edge_histogram(&g, Axis::Horizontal),
            Err(Error::GradientAxis { .. })
        ));
    }

    fn textured(w: usize, h: usize, seed: u64, offset: usize) -> ImageFrame {
        // hash-based texture, addressed by absolute column so shifting is exact
        ImageFrame::from_fn(w, h, 0.0, |r, c| {
            let mut x = seed ^ ((r as u64) << 32) ^ (c + offset) as u64;
            x = x.wrapping_mul(0x9E37_79B9_7F4A_7C15);
            x ^= x >> 29;
            x = x.wrapping_mul(0xBF58_476D_1CE4_E5B9);
            (x >> 56) as u8
        })
        .unwrap()
    }

    proptest! {
        #[test]
        fn fused_pass_matches_two_stage(seed in any::<u64>(), w in 3usize..40, h in 3usize..30) {
            let frame = textured(w, h, seed, 0);
            let (hx, hy) = frame_histograms(&frame).unwrap();
            let gx = sobel_gradient(&frame, Axis::Horizontal).unwrap();
            let gy = sobel_gradient(&frame, Axis::Vertical).unwrap();
            prop_assert_eq!(&gx.data, &convolve_oracle(&frame, Axis::Horizontal));
            prop_assert_eq!(&gy.data, &convolve_oracle(&frame, Axis::Vertical));
            prop_assert_eq!(&hx, &edge_histogram(&gx, Axis::Horizontal).unwrap());
            prop_assert_eq!(&hy, &edge_histogram(&gy, Axis::Vertical).unwrap());
            prop_assert_eq!(&hx, &horizontal_histogram(&frame).unwrap());
            // axis totals are exact
            let total: u64 = gx.data.iter().map(|&v| v as u64).sum();
            prop_assert_eq!(hx.total(), total);
            let total: u64 = gy.data.iter().map(|&v| v as u64).sum();
            prop_assert_eq!(hy.total(), total);
        }

        #[test]
        fn shift_covariance(seed in any::<u64>(), k in 0usize..12) {
            let (w, h) = (64, 24);
            let base = textured(w, h, seed, 0);
            let shifted = textured(w, h, seed, k);
            let hb = horizontal_histogram(&base).unwrap();
            let hs = horizontal_histogram(&shifted).unwrap();
            // shifted content at column i came from base column i + k
            for i in (k + 2)..(w - k - 2) {
                prop_assert_eq!(hs.bins[i], hb.bins[i + k]);
            }
        }

        #[test]
        fn histogram_is_linear(seed in any::<u64>(), a in 0u32..1000) {
            let frame = textured(17, 11, seed, 0);
            for axis in [Axis::Horizontal, Axis::Vertical] {
                let g = sobel_gradient(&frame, axis).unwrap();
                let scaled = GradientImage { data: g.data.iter().map(|&v| v * a).collect(), ..g.clone() };
                let h = edge_histogram(&g, axis).unwrap();
                let hs = edge_histogram(&scaled, axis).unwrap();
                let expected: Vec<u64> = h.bins.iter().map(|&b| b * a as u64).collect();
                prop_assert_eq!(hs.bins, expected);
            }
        }
    }
}
