use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Row-major luma image with values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::DegenerateImage {
                width,
                height,
                min: 1,
            });
        }
        if pixels.len() != width * height {
            return Err(Error::Config(format!(
                "{} pixels for a {width}x{height} image",
                pixels.len()
            )));
        }
        if let Some(bad) = pixels.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::Config(format!("pixel value {bad} outside [0, 1]")));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// Builds an image from `f(x, y)`, clamping each value into `[0, 1]`.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(width > 0 && height > 0, "image sides must be positive");
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y).clamp(0.0, 1.0));
            }
        }
        Self {
            width,
            height,
            pixels,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.pixels[y * self.width + x]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            width: self.width,
            height: self.height,
            pixels: self.pixels.iter().map(|&p| f(p).clamp(0.0, 1.0)).collect(),
        }
    }

    /// Box blur with a `(2r+1)x(2r+1)` window; borders use the clipped window.
    pub fn box_blur(&self, radius: usize) -> Self {
        if radius == 0 {
            return self.clone();
        }
        let (w, h) = (self.width, self.height);
        let horizontal = Self::from_fn(w, h, |x, y| {
            let lo = x.saturating_sub(radius);
            let hi = (x + radius).min(w - 1);
            (lo..=hi).map(|xx| self.get(xx, y)).sum::<f64>() / (hi - lo + 1) as f64
        });
        Self::from_fn(w, h, |x, y| {
            let lo = y.saturating_sub(radius);
            let hi = (y + radius).min(h - 1);
            (lo..=hi).map(|yy| horizontal.get(x, yy)).sum::<f64>() / (hi - lo + 1) as f64
        })
    }

    /// Left-right mirror.
    pub fn mirrored(&self) -> Self {
        Self::from_fn(self.width, self.height, |x, y| {
            self.get(self.width - 1 - x, y)
        })
    }

    /// Parses a binary (P5) PGM with `maxval <= 255`.
    pub fn read_pgm<R: Read>(mut reader: R) -> Result<Self> {
        let mut bytes = Vec::new();
        reader.read_to_end(&mut bytes)?;
        parse_pgm(&bytes).map_err(|message| Error::Image {
            path: "<stream>".into(),
            message,
        })
    }

    /// Writes an 8-bit binary PGM, quantizing each value to the nearest level.
    pub fn write_pgm<W: Write>(&self, mut out: W) -> Result<()> {
        write!(out, "P5\n{} {}\n255\n", self.width, self.height)?;
        let data: Vec<u8> = self
            .pixels
            .iter()
            .map(|&p| (p * 255.0).round() as u8)
            .collect();
        out.write_all(&data)?;
        out.flush()?;
        Ok(())
    }

    /// Loads a PGM natively; other formats need the `image-decode` feature.
    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        if bytes.starts_with(b"P5") {
            return parse_pgm(&bytes).map_err(|message| Error::Image {
                path: path.to_path_buf(),
                message,
            });
        }
        decode_other(path, &bytes)
    }
}

#[cfg(feature = "image-decode")]
fn decode_other(path: &Path, bytes: &[u8]) -> Result<GrayImage> {
    let decoded = image::load_from_memory(bytes).map_err(|e| Error::Image {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let luma = decoded.to_luma8();
    let (w, h) = luma.dimensions();
    let pixels = luma
        .as_raw()
        .iter()
        .map(|&v| f64::from(v) / 255.0)
        .collect();
    GrayImage::new(w as usize, h as usize, pixels)
}

#[cfg(not(feature = "image-decode"))]
fn decode_other(path: &Path, _bytes: &[u8]) -> Result<GrayImage> {
    Err(Error::Image {
        path: path.to_path_buf(),
        message: "not a binary PGM (P5); build with the `image-decode` feature for other formats"
            .into(),
    })
}

fn parse_pgm(bytes: &[u8]) -> std::result::Result<GrayImage, String> {
    let mut pos = 0;
    let magic = header_token(bytes, &mut pos).ok_or("missing magic number")?;
    if magic != b"P5" {
        return Err(format!(
            "unsupported magic `{}`, expected P5",
            String::from_utf8_lossy(magic)
        ));
    }
    let mut number = |what: &str| -> std::result::Result<usize, String> {
        let tok = header_token(bytes, &mut pos).ok_or(format!("missing {what}"))?;
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or(format!("bad {what} `{}`", String::from_utf8_lossy(tok)))
    };
    let width = number("width")?;
    let height = number("height")?;
    let maxval = number("maxval")?;
    if width == 0 || height == 0 {
        return Err(format!("empty image {width}x{height}"));
    }
    if maxval == 0 || maxval > 255 {
        return Err(format!(
            "maxval {maxval} unsupported; only 8-bit PGM is accepted"
        ));
    }
    // Exactly one whitespace byte separates the header from the raster.
    pos += 1;
    let needed = width * height;
    let raster = bytes
        .get(pos..pos + needed)
        .ok_or(format!("raster truncated: need {needed} bytes"))?;
    let scale = maxval as f64;
    let pixels = raster
        .iter()
        .map(|&v| (f64::from(v) / scale).min(1.0))
        .collect();
    Ok(GrayImage {
        width,
        height,
        pixels,
    })
}

/// Next whitespace-delimited header token, skipping `#` comments.
fn header_token<'a>(bytes: &'a [u8], pos: &mut usize) -> Option<&'a [u8]> {
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
    fn pgm_round_trip_is_bit_exact_for_8bit_levels() {
        let img = GrayImage::from_fn(5, 3, |x, y| ((x * 37 + y * 91) % 256) as f64 / 255.0);
        let mut buf = Vec::new();
        img.write_pgm(&mut buf).unwrap();
        assert!(buf.starts_with(b"P5\n5 3\n255\n"));
        let back = GrayImage::read_pgm(buf.as_slice()).unwrap();
        assert_eq!(back, img);
    }

    #[test]
    fn pgm_header_comments_and_maxval() {
        let mut bytes = b"P5 # a comment\n2 # w\n1\n15\n".to_vec();
        bytes.extend([15u8, 0]);
        let img = GrayImage::read_pgm(bytes.as_slice()).unwrap();
        assert_eq!(img.pixels(), &[1.0, 0.0]);
    }

    #[test]
    fn pgm_rejects_bad_input() {
        assert!(GrayImage::read_pgm(&b"P2\n1 1\n255\n0"[..]).is_err());
        assert!(GrayImage::read_pgm(&b"P5\n4 4\n255\n\x00\x01"[..]).is_err());
        assert!(GrayImage::read_pgm(&b"P5\n1 1\n65535\n\x00\x00"[..]).is_err());
    }

    #[test]
    fn blur_preserves_constant_images() {
        let img = GrayImage::from_fn(9, 9, |_, _| 0.3);
        let blurred = img.box_blur(2);
        assert!(blurred.pixels().iter().all(|&p| (p - 0.3).abs() < 1e-12));
    }

    #[test]
    fn constructor_validates() {
        assert!(GrayImage::new(2, 2, vec![0.0; 3]).is_err());
        assert!(GrayImage::new(1, 1, vec![1.5]).is_err());
        assert!(GrayImage::new(0, 1, vec![]).is_err());
    }
}
