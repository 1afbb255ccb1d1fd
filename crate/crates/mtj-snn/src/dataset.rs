//! Labeled 28x28 grayscale image sets.
//!
//! Three sources: standard IDX image/label file pairs (magic numbers
//! 2051/2049), a compact single-file raw subset format, and a procedural
//! digit generator for self-contained runs that do not ship image data.

use std::io::Read;
use std::path::Path;

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::stream_rng;

pub const IMAGE_SIDE: usize = 28;
pub const IMAGE_PIXELS: usize = IMAGE_SIDE * IMAGE_SIDE;

/// In-memory labeled image set; pixels stored as bytes, exposed in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pixels: Vec<u8>,
    labels: Vec<u8>,
}

impl Dataset {
    pub fn new(pixels: Vec<u8>, labels: Vec<u8>) -> Result<Self> {
        if pixels.len() != labels.len() * IMAGE_PIXELS {
            return Err(Error::DimensionMismatch {
                expected: labels.len() * IMAGE_PIXELS,
                got: pixels.len(),
            });
        }
        if let Some(bad) = labels.iter().find(|&&l| l > 9) {
            return Err(Error::invalid_argument(format!("label {bad} out of range 0-9")));
        }
        Ok(Self { pixels, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, i: usize) -> u8 {
        self.labels[i]
    }

    /// Pixel intensities of image `i`, normalized to [0, 1].
    pub fn image(&self, i: usize) -> Vec<f64> {
        self.pixels[i * IMAGE_PIXELS..(i + 1) * IMAGE_PIXELS]
            .iter()
            .map(|&b| b as f64 / 255.0)
            .collect()
    }

    /// First `n` images as a new set.
    pub fn take(&self, n: usize) -> Dataset {
        let n = n.min(self.len());
        Dataset {
            pixels: self.pixels[..n * IMAGE_PIXELS].to_vec(),
            labels: self.labels[..n].to_vec(),
        }
    }

    // ---- IDX ----------------------------------------------------------

    /// Parse a pair of IDX buffers (images magic 2051, labels magic 2049).
    pub fn from_idx_bytes(images: &[u8], labels: &[u8]) -> Result<Self> {
        let (pixels, n_img) = parse_idx_images(images)?;
        let lab = parse_idx_labels(labels)?;
        if lab.len() != n_img {
            return Err(Error::DimensionMismatch { expected: n_img, got: lab.len() });
        }
        Self::new(pixels, lab)
    }

    pub fn from_idx_files(images: &Path, labels: &Path) -> Result<Self> {
        let mut img = Vec::new();
        std::fs::File::open(images)?.read_to_end(&mut img)?;
        let mut lab = Vec::new();
        std::fs::File::open(labels)?.read_to_end(&mut lab)?;
        Self::from_idx_bytes(&img, &lab)
    }

    // ---- raw subset format ---------------------------------------------
    //
    // "MTJD" magic, u32 LE count, then per record: label byte followed by
    // 784 pixel bytes.

    pub fn to_raw_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 + self.len() * (1 + IMAGE_PIXELS));
        out.extend_from_slice(b"MTJD");
        out.extend_from_slice(&(self.len() as u32).to_le_bytes());
        for i in 0..self.len() {
            out.push(self.labels[i]);
            out.extend_from_slice(&self.pixels[i * IMAGE_PIXELS..(i + 1) * IMAGE_PIXELS]);
        }
        out
    }

    pub fn from_raw_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 8 || &bytes[0..4] != b"MTJD" {
            return Err(Error::invalid_argument("not a raw subset file"));
        }
        let n = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
        let expected = 8 + n * (1 + IMAGE_PIXELS);
        if bytes.len() != expected {
            return Err(Error::DimensionMismatch { expected, got: bytes.len() });
        }
        let mut pixels = Vec::with_capacity(n * IMAGE_PIXELS);
        let mut labels = Vec::with_capacity(n);
        for rec in bytes[8..].chunks_exact(1 + IMAGE_PIXELS) {
            labels.push(rec[0]);
            pixels.extend_from_slice(&rec[1..]);
        }
        Self::new(pixels, labels)
    }

    pub fn from_raw_file(path: &Path) -> Result<Self> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut bytes)?;
        Self::from_raw_bytes(&bytes)
    }

    pub fn write_raw_file(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_raw_bytes())?;
        Ok(())
    }
}

fn be_u32(bytes: &[u8], at: usize) -> Result<u32> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_be_bytes(b.try_into().unwrap()))
        .ok_or_else(|| Error::invalid_argument("truncated IDX header"))
}

fn parse_idx_images(bytes: &[u8]) -> Result<(Vec<u8>, usize)> {
    let magic = be_u32(bytes, 0)?;
    if magic != 2051 {
        return Err(Error::invalid_argument(format!(
            "bad image magic {magic}, expected 2051"
        )));
    }
    let n = be_u32(bytes, 4)? as usize;
    let rows = be_u32(bytes, 8)? as usize;
    let cols = be_u32(bytes, 12)? as usize;
    if rows != IMAGE_SIDE || cols != IMAGE_SIDE {
        return Err(Error::invalid_argument(format!(
            "unsupported image size {rows}x{cols}, expected 28x28"
        )));
    }
    let data = &bytes[16..];
    if data.len() != n * rows * cols {
        return Err(Error::DimensionMismatch { expected: n * rows * cols, got: data.len() });
    }
    Ok((data.to_vec(), n))
}

fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    let magic = be_u32(bytes, 0)?;
    if magic != 2049 {
        return Err(Error::invalid_argument(format!(
            "bad label magic {magic}, expected 2049"
        )));
    }
    let n = be_u32(bytes, 4)? as usize;
    let data = &bytes[8..];
    if data.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: data.len() });
    }
    Ok(data.to_vec())
}

// ---- procedural digits ---------------------------------------------------

/// 7x5 glyphs for the ten digits.
const GLYPHS: [[u8; 7]; 10] = [
    // each row is 5 bits, MSB left
    [0b01110, 0b10001, 0b10011, 0b10101, 0b11001, 0b10001, 0b01110], // 0
    [0b00100, 0b01100, 0b00100, 0b00100, 0b00100, 0b00100, 0b01110], // 1
    [0b01110, 0b10001, 0b00001, 0b00010, 0b00100, 0b01000, 0b11111], // 2
    [0b11111, 0b00010, 0b00100, 0b00010, 0b00001, 0b10001, 0b01110], // 3
    [0b00010, 0b00110, 0b01010, 0b10010, 0b11111, 0b00010, 0b00010], // 4
    [0b11111, 0b10000, 0b11110, 0b00001, 0b00001, 0b10001, 0b01110], // 5
    [0b00110, 0b01000, 0b10000, 0b11110, 0b10001, 0b10001, 0b01110], // 6
    [0b11111, 0b00001, 0b00010, 0b00100, 0b01000, 0b01000, 0b01000], // 7
    [0b01110, 0b10001, 0b10001, 0b01110, 0b10001, 0b10001, 0b01110], // 8
    [0b01110, 0b10001, 0b10001, 0b01111, 0b00001, 0b00010, 0b01100], // 9
];

/// Render one digit with the given jitter and style parameters.
#[allow(clippy::too_many_arguments)]
fn render_digit(
    digit: u8,
    dx: f64,
    dy: f64,
    scale: f64,
    shear: f64,
    intensity: f64,
    noise: &mut impl FnMut() -> f64,
) -> [u8; IMAGE_PIXELS] {
    let glyph = &GLYPHS[digit as usize];
    let mut img = [0.0f64; IMAGE_PIXELS];
    // Map glyph cells (5 x 7) onto a scale*(15 x 21) box centered with offset.
    let cell = 3.0 * scale;
    let width = 5.0 * cell;
    let height = 7.0 * cell;
    let x0 = (IMAGE_SIDE as f64 - width) / 2.0 + dx;
    let y0 = (IMAGE_SIDE as f64 - height) / 2.0 + dy;
    for py in 0..IMAGE_SIDE {
        for px in 0..IMAGE_SIDE {
            // Bilinear coverage of the pixel center against the sheared
            // glyph grid.
            let gy = (py as f64 + 0.5 - y0) / cell;
            let gx = (px as f64 + 0.5 - x0) / cell - shear * (gy - 3.5);
            if gx < -0.5 || gy < -0.5 || gx >= 5.5 || gy >= 7.5 {
                continue;
            }
            // Soft sampling: accumulate the four neighbouring cells with
            // triangular weights for smooth strokes.
            let mut v: f64 = 0.0;
            for cy in 0..7usize {
                for cx in 0..5usize {
                    if glyph[cy] >> (4 - cx) & 1 == 1 {
                        let wx = (1.0 - (gx - cx as f64 - 0.0).abs()).max(0.0);
                        let wy = (1.0 - (gy - cy as f64 - 0.0).abs()).max(0.0);
                        v = v.max(wx.min(1.0) * wy.min(1.0));
                    }
                }
            }
            img[py * IMAGE_SIDE + px] = (v * intensity).min(1.0);
        }
    }
    let mut out = [0u8; IMAGE_PIXELS];
    for (o, v) in out.iter_mut().zip(img.iter()) {
        let with_noise = (v + noise()).clamp(0.0, 1.0);
        *o = (with_noise * 255.0).round() as u8;
    }
    out
}

/// Deterministic procedural digit set: jittered, scaled, noisy renderings
/// of the ten digit glyphs, labels cycling 0..9.
pub fn synthetic_digits(n: usize, seed: u64) -> Dataset {
    let mut pixels = Vec::with_capacity(n * IMAGE_PIXELS);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let mut rng = stream_rng(seed, i as u64);
        let digit = (i % 10) as u8;
        let dx = rng.gen_range(-4.0..4.0);
        let dy = rng.gen_range(-3.2..3.2);
        let scale = rng.gen_range(0.7..1.28);
        let shear = rng.gen_range(-0.45..0.45);
        let intensity = rng.gen_range(0.45..1.0);
        let mut noise = || rng.gen_range(-0.10..0.10);
        let img = render_digit(digit, dx, dy, scale, shear, intensity, &mut noise);
        pixels.extend_from_slice(&img);
        labels.push(digit);
    }
    Dataset::new(pixels, labels).expect("generated dimensions are consistent")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_idx_pair(n: usize) -> (Vec<u8>, Vec<u8>) {
        let mut img = Vec::new();
        img.extend_from_slice(&2051u32.to_be_bytes());
        img.extend_from_slice(&(n as u32).to_be_bytes());
        img.extend_from_slice(&28u32.to_be_bytes());
        img.extend_from_slice(&28u32.to_be_bytes());
        img.extend(std::iter::repeat(7u8).take(n * IMAGE_PIXELS));
        let mut lab = Vec::new();
        lab.extend_from_slice(&2049u32.to_be_bytes());
        lab.extend_from_slice(&(n as u32).to_be_bytes());
        lab.extend((0..n).map(|i| (i % 10) as u8));
        (img, lab)
    }

    #[test]
    fn idx_round_trip() {
        let (img, lab) = tiny_idx_pair(5);
        let ds = Dataset::from_idx_bytes(&img, &lab).unwrap();
        assert_eq!(ds.len(), 5);
        assert_eq!(ds.label(3), 3);
        assert!((ds.image(0)[0] - 7.0 / 255.0).abs() < 1e-12);
    }

    #[test]
    fn idx_rejects_wrong_magic() {
        let (mut img, lab) = tiny_idx_pair(2);
        img[3] = 0; // corrupt magic
        assert!(Dataset::from_idx_bytes(&img, &lab).is_err());
    }

    #[test]
    fn raw_round_trip() {
        let ds = synthetic_digits(23, 5);
        let bytes = ds.to_raw_bytes();
        let back = Dataset::from_raw_bytes(&bytes).unwrap();
        assert_eq!(ds, back);
    }

    #[test]
    fn synthetic_is_deterministic_and_varied() {
        let a = synthetic_digits(20, 1);
        let b = synthetic_digits(20, 1);
        assert_eq!(a, b);
        let c = synthetic_digits(20, 2);
        assert_ne!(a, c);
        // Same digit, different instances differ (jitter).
        assert_ne!(a.image(0), a.image(10));
        assert_eq!(a.label(0), a.label(10));
        // Images have meaningful ink.
        let ink: f64 = a.image(3).iter().sum();
        assert!(ink > 10.0, "ink {ink}");
    }
}
