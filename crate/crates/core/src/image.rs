//! Grayscale frames and binary PGM (P5) input/output.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Owned 8-bit grayscale raster, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageFrame {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
    /// Seconds, monotonic.
    pub timestamp: f64,
}

impl ImageFrame {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>, timestamp: f64) -> Result<Self> {
        if width < 3 || height < 3 {
            return Err(Error::DimensionTooSmall { width, height });
        }
        let expected = width * height;
        if pixels.len() != expected {
            return Err(Error::PixelCount {
                expected,
                actual: pixels.len(),
            });
        }
        Ok(Self {
            width,
            height,
            pixels,
            timestamp,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8, timestamp: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height], timestamp)
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        timestamp: f64,
        mut f: impl FnMut(usize, usize) -> u8,
    ) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for row in 0..height {
            for col in 0..width {
                pixels.push(f(row, col));
            }
        }
        Self::new(width, height, pixels, timestamp)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.pixels[row * self.width + col]
    }

    pub fn row(&self, row: usize) -> &[u8] {
        &self.pixels[row * self.width..(row + 1) * self.width]
    }

    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }

    pub fn write_pgm(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_pgm())?;
        Ok(())
    }

    /// Decodes a binary 8-bit PGM. Errors carry `path` for diagnostics.
    pub fn from_pgm(bytes: &[u8], path: &Path, timestamp: f64) -> Result<Self> {
        let (width, height, body) = parse_pgm(bytes).map_err(|reason| Error::data(path, reason))?;
        Self::new(width, height, body.to_vec(), timestamp)
            .map_err(|e| Error::data(path, e.to_string()))
    }

    pub fn read_pgm(path: impl AsRef<Path>, timestamp: f64) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::data(path, e.to_string()))?;
        Self::from_pgm(&bytes, path, timestamp)
    }
}

fn parse_pgm(bytes: &[u8]) -> std::result::Result<(usize, usize, &[u8]), String> {
    let mut pos = 0;
    let magic = next_token(bytes, &mut pos).ok_or("missing magic number")?;
    if magic != b"P5" {
        return Err(format!(
            "unsupported magic {:?}, expected P5",
            String::from_utf8_lossy(magic)
        ));
    }
    let mut header = [0usize; 3];
    for (slot, name) in header.iter_mut().zip(["width", "height", "maxval"]) {
        let tok = next_token(bytes, &mut pos)
            .ok_or_else(|| format!("truncated header: missing {name}"))?;
        *slot = std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| format!("malformed {name} {:?}", String::from_utf8_lossy(tok)))?;
    }
    let [width, height, maxval] = header;
    if maxval != 255 {
        return Err(format!(
            "maxval {maxval} unsupported, only 8-bit (255) frames"
        ));
    }
    // exactly one whitespace byte separates the header from the raster
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err("truncated header".into());
    }
    pos += 1;
    let body = &bytes[pos..];
    let expected = width
        .checked_mul(height)
        .ok_or("image dimensions overflow")?;
    if body.len() < expected {
        return Err(format!(
            "truncated raster: {} of {expected} bytes",
            body.len()
        ));
    }
    Ok((width, height, &body[..expected]))
}

fn next_token<'a>(bytes: &'a [u8], pos: &mut usize) -> Option<&'a [u8]> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    (*pos > start).then(|| &bytes[start..*pos])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_small_and_mismatched() {
        assert!(matches!(
            ImageFrame::new(2, 5, vec![0; 10], 0.0),
            Err(Error::DimensionTooSmall { .. })
        ));
        assert!(matches!(
            ImageFrame::new(4, 4, vec![0; 15], 0.0),
            Err(Error::PixelCount {
                expected: 16,
                actual: 15
            })
        ));
    }

    #[test]
    fn pgm_round_trip_with_comment() {
        let frame = ImageFrame::from_fn(5, 4, 0.0, |r, c| (r * 10 + c) as u8).unwrap();
        let bytes = frame.to_pgm();
        let back = ImageFrame::from_pgm(&bytes, Path::new("x.pgm"), 0.0).unwrap();
        assert_eq!(back, frame);

        let mut commented = b"P5\n# made by hand\n5 4\n# depth\n255\n".to_vec();
        commented.extend_from_slice(frame.pixels());
        let back = ImageFrame::from_pgm(&commented, Path::new("x.pgm"), 0.0).unwrap();
        assert_eq!(back, frame);
    }

    #[test]
    fn truncated_pgm_names_file() {
        let frame = ImageFrame::filled(8, 8, 3, 0.0).unwrap();
        let mut bytes = frame.to_pgm();
        bytes.truncate(bytes.len() - 5);
        let err = ImageFrame::from_pgm(&bytes, Path::new("left_000003.pgm"), 0.0).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("left_000003.pgm"), "{msg}");
        assert!(msg.contains("truncated"), "{msg}");
    }

    #[test]
    fn rejects_other_formats() {
        let err = ImageFrame::from_pgm(b"P2\n3 3\n255\n0 0 0", Path::new("a"), 0.0).unwrap_err();
        assert!(err.to_string().contains("P5"));
        let err = ImageFrame::from_pgm(b"P5\n3 3\n65535\n", Path::new("a"), 0.0).unwrap_err();
        assert!(err.to_string().contains("maxval"));
    }
}
